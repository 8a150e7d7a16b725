// Command-line front end for the neardgd simulator.
//
// Verbs:
//   run        execute every method in a config file, write traces + summaries
//   plotdata   extract label,x,rel_err series from traces for a chosen x-axis
//   summarize  recompute the summary table from trace files alone
//   spectrum   report beta / lambda_min for a topology, optionally dump W
//
// Exit codes: 0 success, 1 config error, 2 dataset error, 3 every method diverged.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "neardgd/experiment.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, std::string output_dir) {
  if (output_dir.empty()) {
    if (const char* env = std::getenv("NEARDGD_OUTPUT_DIR")) output_dir = env;
    if (output_dir.empty()) output_dir = ".";
  }
  neardgd::ExperimentConfig cfg = neardgd::parse_experiment_config_file(config_path);
  neardgd::ExperimentResult result = neardgd::run_experiment(cfg);
  std::vector<fs::path> paths = neardgd::write_experiment(result, output_dir);
  std::vector<neardgd::MethodSummary> summaries;
  for (const auto& trace : result.traces) summaries.push_back(neardgd::summarize_trace(trace, result.cost_models));
  neardgd::write_summary_table(summaries, std::cout);
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
  if (result.all_diverged()) {
    std::cerr << "error: every method diverged\n";
    return 3;
  }
  return 0;
}

int cmd_plotdata(const std::vector<std::string>& files, const std::string& axis_name, std::size_t cost_index,
                 std::string out_path) {
  neardgd::PlotAxis axis = neardgd::parse_axis(axis_name);
  std::vector<neardgd::ParsedTrace> traces;
  for (const auto& f : files) traces.push_back(neardgd::read_trace_file(f));
  if (out_path.empty()) out_path = "plot_" + axis_name + ".csv";
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out_path);
  neardgd::emit_plot_data(traces, axis, cost_index, os);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int cmd_summarize(const std::vector<std::string>& files, const std::string& csv_path) {
  std::vector<neardgd::MethodSummary> summaries;
  std::size_t n_models = 0;
  for (const auto& f : files) {
    neardgd::ParsedTrace parsed = neardgd::read_trace_file(f);
    n_models = std::max(n_models, parsed.models.size());
    summaries.push_back(neardgd::summarize_trace(parsed.trace, parsed.models));
  }
  neardgd::write_summary_table(summaries, std::cout);
  if (!csv_path.empty()) {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + csv_path);
    neardgd::write_summary_csv(summaries, n_models, os);
  }
  return 0;
}

int cmd_spectrum(const std::string& kind_name, int agents, int k, const std::string& dump_path) {
  neardgd::GraphKind kind;
  if (kind_name == "cyclic_k")
    kind = neardgd::GraphKind::cyclic_k;
  else if (kind_name == "path")
    kind = neardgd::GraphKind::path;
  else if (kind_name == "star")
    kind = neardgd::GraphKind::star;
  else if (kind_name == "complete")
    kind = neardgd::GraphKind::complete;
  else
    throw neardgd::ConfigError("unknown topology kind '" + kind_name + "'");
  neardgd::NetworkTopology topo = neardgd::build_topology(kind, agents, k);
  neardgd::ConsensusMatrix w = neardgd::metropolis_weights(topo);
  std::cout << "kind=" << neardgd::to_string(kind) << " agents=" << agents;
  if (kind == neardgd::GraphKind::cyclic_k) std::cout << " k=" << k;
  std::cout << '\n';
  std::cout << "beta=" << neardgd::detail::format_double(w.beta) << '\n';
  std::cout << "lambda_min=" << neardgd::detail::format_double(w.lambda_min) << '\n';
  std::cout << "mixing_rounds=" << w.mixing_rounds << '\n';
  if (!dump_path.empty()) {
    std::ofstream os(dump_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + dump_path);
    neardgd::dump_csv(w, os);
    std::cout << "wrote " << dump_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for decentralized gradient methods with adaptive consensus"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  CLI::App* run_cmd = app.add_subcommand("run", "Run every method in a config and write traces");
  run_cmd->add_option("config", config_path, "experiment config file")->required();
  run_cmd->add_option("-o,--output-dir", output_dir, "output directory (default: $NEARDGD_OUTPUT_DIR or .)");

  std::vector<std::string> plot_files;
  std::string axis_name = "iterations", plot_out;
  std::size_t cost_index = 0;
  CLI::App* plot_cmd = app.add_subcommand("plotdata", "Write label,x,rel_err series from traces");
  plot_cmd->add_option("traces", plot_files, "trace CSV files")->required();
  plot_cmd->add_option("--axis", axis_name, "x-axis: iterations, cost, comm_rounds or grad_rounds");
  plot_cmd->add_option("--cost-index", cost_index, "cost model index for --axis cost (0-based)");
  plot_cmd->add_option("--out", plot_out, "output file (default plot_<axis>.csv)");

  std::vector<std::string> sum_files;
  std::string sum_csv;
  CLI::App* sum_cmd = app.add_subcommand("summarize", "Summarize trace files");
  sum_cmd->add_option("traces", sum_files, "trace CSV files")->required();
  sum_cmd->add_option("--csv", sum_csv, "also write a machine-readable summary CSV");

  std::string kind_name = "cyclic_k", dump_path;
  int agents = 10, ring_k = 4;
  CLI::App* spec_cmd = app.add_subcommand("spectrum", "Report consensus-matrix spectrum for a topology");
  spec_cmd->add_option("--kind", kind_name, "cyclic_k, path, star or complete");
  spec_cmd->add_option("--agents", agents, "number of agents");
  spec_cmd->add_option("--k", ring_k, "neighbor count for cyclic_k");
  spec_cmd->add_option("--dump", dump_path, "write the dense matrix as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, output_dir);
    if (plot_cmd->parsed()) return cmd_plotdata(plot_files, axis_name, cost_index, plot_out);
    if (sum_cmd->parsed()) return cmd_summarize(sum_files, sum_csv);
    if (spec_cmd->parsed()) return cmd_spectrum(kind_name, agents, ring_k, dump_path);
  } catch (const neardgd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const neardgd::DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
