#pragma once

// Experiment harness: flat key=value config files, multi-method orchestration,
// trace emission, plot-data extraction, and summary tables.
//
// Config layout (sections of key = value lines, '#' comments):
//
//   [problem]            type = quadratic | logistic, shape and seed keys
//   [topology]           kind = cyclic_k | path | star | complete, k = ...
//   [run]                max_iters = ...
//   [cost]               models = c_c:c_g[, c_c:c_g ...]
//   [method <label>]     kind = dgd | dgd_t | near_dgd, schedule keys, alpha
//
// Traces carry a manifest echoing everything needed to replay the run;
// replays are byte-identical except for the timestamp line.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neardgd/accounting.hpp"
#include "neardgd/datasets.hpp"
#include "neardgd/engine.hpp"
#include "neardgd/objectives.hpp"
#include "neardgd/topology.hpp"

namespace neardgd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadraticSpec {
  int agents = 10;
  int dim = 10;
  double kappa = 100.0;
  std::uint64_t seed = 7;
};

struct LogisticSpec {
  std::string dataset = "synthetic";  // file path, or "synthetic"
  int agents = 10;
  PartitionMode partition = PartitionMode::shuffled;
  bool equal_shards = true;
  int declared_dim = 0;  // 0 = infer from data
  std::uint64_t seed = 1;
  // Synthetic generator shape (ignored for file datasets).
  long synth_rows = 8124;
  int synth_features = 112;
  int synth_active = 22;
};

struct ProblemSpec {
  enum class Type { quadratic, logistic };
  Type type = Type::quadratic;
  QuadraticSpec quadratic;
  LogisticSpec logistic;

  std::string describe() const {
    std::ostringstream os;
    if (type == Type::quadratic) {
      os << "quadratic(agents=" << quadratic.agents << ",dim=" << quadratic.dim
         << ",kappa=" << detail::format_double(quadratic.kappa) << ",seed=" << quadratic.seed << ")";
    } else {
      os << "logistic(dataset=" << logistic.dataset << ",agents=" << logistic.agents
         << ",partition=" << (logistic.partition == PartitionMode::shuffled ? "shuffled" : "contiguous")
         << ",equal_shards=" << (logistic.equal_shards ? 1 : 0) << ",declared_dim=" << logistic.declared_dim
         << ",seed=" << logistic.seed;
      if (logistic.dataset == "synthetic")
        os << ",rows=" << logistic.synth_rows << ",features=" << logistic.synth_features
           << ",active=" << logistic.synth_active;
      os << ")";
    }
    return os.str();
  }
};

struct TopologySpec {
  GraphKind kind = GraphKind::cyclic_k;
  int k = 4;

  std::string describe(int agents) const {
    std::ostringstream os;
    os << to_string(kind) << "(n=" << agents << (kind == GraphKind::cyclic_k ? ",k=" + std::to_string(k) : "") << ")";
    return os.str();
  }
};

struct MethodSpec {
  std::string label;
  Method method = Method::dgd;
  ConsensusSchedule schedule = ConsensusSchedule::fixed(1);
  int grad_steps = 1;
  std::optional<double> alpha;      // unset = 0.9 * max_stepsize
  std::optional<long> max_iters;    // unset = experiment default
};

struct ExperimentConfig {
  ProblemSpec problem;
  TopologySpec topology;
  std::optional<long> max_iters;  // default: 5000 quadratic, 10000 logistic
  std::vector<CostModel> cost_models{CostModel{1.0, 1.0}};
  std::vector<MethodSpec> methods;

  long resolved_max_iters() const {
    if (max_iters) return *max_iters;
    return problem.type == ProblemSpec::Type::quadratic ? 5000 : 10000;
  }
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct ConfigCursor {
  std::map<std::string, std::pair<std::string, bool>> values;  // key -> (value, consumed)
  std::string section;
  std::vector<std::string>* errors;

  std::optional<std::string> take(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    it->second.second = true;
    return it->second.first;
  }
  void fail(const std::string& key, const std::string& msg) {
    errors->push_back("[" + section + "] " + key + ": " + msg);
  }
  template <typename F>
  void parse(const std::string& key, F&& apply) {
    auto v = take(key);
    if (!v) return;
    try {
      apply(*v);
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }
  void finish() {
    for (const auto& [key, entry] : values)
      if (!entry.second) errors->push_back("[" + section + "] " + key + ": unknown key");
  }
};

inline long to_long(const std::string& s) {
  return static_cast<long>(parse_integer(trim(s)));
}
inline double to_double(const std::string& s) {
  return parse_double(trim(s));
}
inline bool to_bool(const std::string& s) {
  std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::runtime_error("expected a boolean, got '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& in) {
  std::vector<std::string> errors;
  // section name -> ordered key/value map (method sections keep their label)
  struct RawSection {
    std::string name;   // "problem", "topology", "run", "cost", "method"
    std::string label;  // method label
    std::map<std::string, std::pair<std::string, bool>> values;
  };
  std::vector<RawSection> sections;
  std::string line;
  long line_no = 0;
  RawSection* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errors.push_back("line " + std::to_string(line_no) + ": unterminated section header");
        continue;
      }
      std::string inside = detail::trim(t.substr(1, t.size() - 2));
      RawSection sec;
      if (inside.rfind("method", 0) == 0 && (inside.size() == 6 || std::isspace(static_cast<unsigned char>(inside[6])))) {
        sec.name = "method";
        sec.label = detail::trim(inside.size() > 6 ? inside.substr(7) : "");
        if (sec.label.empty()) errors.push_back("line " + std::to_string(line_no) + ": method section needs a label");
      } else {
        sec.name = inside;
      }
      sections.push_back(std::move(sec));
      current = &sections.back();
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    if (!current) {
      errors.push_back("line " + std::to_string(line_no) + ": key outside any section");
      continue;
    }
    std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    if (!current->values.emplace(key, std::make_pair(value, false)).second)
      errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "' in [" + current->name + "]");
  }

  ExperimentConfig cfg;
  bool problem_seen = false, topology_seen = false;
  std::vector<std::string> labels;
  for (auto& sec : sections) {
    detail::ConfigCursor cur{std::move(sec.values), sec.name + (sec.label.empty() ? "" : " " + sec.label), &errors};
    if (sec.name == "problem") {
      problem_seen = true;
      cur.parse("type", [&](const std::string& v) {
        if (v == "quadratic")
          cfg.problem.type = ProblemSpec::Type::quadratic;
        else if (v == "logistic")
          cfg.problem.type = ProblemSpec::Type::logistic;
        else
          throw std::runtime_error("expected quadratic or logistic");
      });
      cur.parse("agents", [&](const std::string& v) {
        long n = detail::to_long(v);
        cfg.problem.quadratic.agents = static_cast<int>(n);
        cfg.problem.logistic.agents = static_cast<int>(n);
      });
      cur.parse("dim", [&](const std::string& v) { cfg.problem.quadratic.dim = static_cast<int>(detail::to_long(v)); });
      cur.parse("kappa", [&](const std::string& v) { cfg.problem.quadratic.kappa = detail::to_double(v); });
      cur.parse("seed", [&](const std::string& v) {
        long s = detail::to_long(v);
        cfg.problem.quadratic.seed = static_cast<std::uint64_t>(s);
        cfg.problem.logistic.seed = static_cast<std::uint64_t>(s);
      });
      cur.parse("dataset", [&](const std::string& v) { cfg.problem.logistic.dataset = v; });
      cur.parse("partition", [&](const std::string& v) {
        if (v == "shuffled")
          cfg.problem.logistic.partition = PartitionMode::shuffled;
        else if (v == "contiguous")
          cfg.problem.logistic.partition = PartitionMode::contiguous;
        else
          throw std::runtime_error("expected shuffled or contiguous");
      });
      cur.parse("equal_shards", [&](const std::string& v) { cfg.problem.logistic.equal_shards = detail::to_bool(v); });
      cur.parse("declared_dim",
                [&](const std::string& v) { cfg.problem.logistic.declared_dim = static_cast<int>(detail::to_long(v)); });
      cur.parse("synth_rows", [&](const std::string& v) { cfg.problem.logistic.synth_rows = detail::to_long(v); });
      cur.parse("synth_features",
                [&](const std::string& v) { cfg.problem.logistic.synth_features = static_cast<int>(detail::to_long(v)); });
      cur.parse("synth_active",
                [&](const std::string& v) { cfg.problem.logistic.synth_active = static_cast<int>(detail::to_long(v)); });
      cur.finish();
    } else if (sec.name == "topology") {
      topology_seen = true;
      cur.parse("kind", [&](const std::string& v) {
        if (v == "cyclic_k")
          cfg.topology.kind = GraphKind::cyclic_k;
        else if (v == "path")
          cfg.topology.kind = GraphKind::path;
        else if (v == "star")
          cfg.topology.kind = GraphKind::star;
        else if (v == "complete")
          cfg.topology.kind = GraphKind::complete;
        else
          throw std::runtime_error("expected cyclic_k, path, star or complete");
      });
      cur.parse("k", [&](const std::string& v) { cfg.topology.k = static_cast<int>(detail::to_long(v)); });
      cur.finish();
    } else if (sec.name == "run") {
      cur.parse("max_iters", [&](const std::string& v) { cfg.max_iters = detail::to_long(v); });
      cur.finish();
    } else if (sec.name == "cost") {
      cur.parse("models", [&](const std::string& v) {
        std::vector<CostModel> models;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = detail::trim(item);
          auto colon = item.find(':');
          if (colon == std::string::npos) throw std::runtime_error("expected c_c:c_g pairs, got '" + item + "'");
          CostModel m;
          m.comm_cost = detail::to_double(item.substr(0, colon));
          m.grad_cost = detail::to_double(item.substr(colon + 1));
          m.validate();
          models.push_back(m);
        }
        if (models.empty()) throw std::runtime_error("no cost models given");
        cfg.cost_models = std::move(models);
      });
      cur.finish();
    } else if (sec.name == "method") {
      MethodSpec m;
      m.label = sec.label;
      if (std::find(labels.begin(), labels.end(), m.label) != labels.end())
        errors.push_back("duplicate method label '" + m.label + "'");
      labels.push_back(m.label);
      std::optional<long> t_value;
      cur.parse("kind", [&](const std::string& v) {
        if (v == "dgd")
          m.method = Method::dgd;
        else if (v == "dgd_t")
          m.method = Method::dgd_t;
        else if (v == "near_dgd")
          m.method = Method::near_dgd;
        else
          throw std::runtime_error("expected dgd, dgd_t or near_dgd");
      });
      cur.parse("t", [&](const std::string& v) { t_value = detail::to_long(v); });
      cur.parse("schedule", [&](const std::string& v) {
        if (v == "fixed")
          m.schedule = ConsensusSchedule::fixed(1);
        else if (v == "linear")
          m.schedule = ConsensusSchedule::linear();
        else if (v == "doubling")
          m.schedule = ConsensusSchedule::doubling(1);
        else if (v == "logarithmic")
          m.schedule = ConsensusSchedule::logarithmic();
        else
          throw std::runtime_error("expected fixed, linear, doubling or logarithmic");
      });
      cur.parse("period", [&](const std::string& v) { m.schedule.period = detail::to_long(v); });
      cur.parse("grad_steps", [&](const std::string& v) { m.grad_steps = static_cast<int>(detail::to_long(v)); });
      cur.parse("alpha", [&](const std::string& v) {
        if (v != "auto") m.alpha = detail::to_double(v);
      });
      cur.parse("max_iters", [&](const std::string& v) { m.max_iters = detail::to_long(v); });
      cur.finish();
      if (t_value) {
        if (m.schedule.kind != ConsensusSchedule::Kind::fixed)
          errors.push_back("[method " + m.label + "] t: only valid with a fixed schedule");
        else
          m.schedule.t_fixed = *t_value;
      }
      try {
        m.schedule.validate();
      } catch (const std::exception& e) {
        errors.push_back("[method " + m.label + "] " + e.what());
      }
      cfg.methods.push_back(std::move(m));
    } else {
      errors.push_back("unknown section [" + sec.name + "]");
    }
  }
  if (!problem_seen) errors.push_back("missing [problem] section");
  if (!topology_seen) errors.push_back("missing [topology] section");
  if (cfg.methods.empty()) errors.push_back("no [method ...] sections");
  if (!errors.empty()) {
    std::string joined = "invalid config:";
    for (const auto& e : errors) joined += "\n  " + e;
    throw ConfigError(joined);
  }
  return cfg;
}

inline ExperimentConfig parse_experiment_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse_experiment_config(in);
}

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

struct BuiltProblem {
  LocalObjectiveSet objectives;
  GroundTruth truth;
  std::string description;
};

inline BuiltProblem build_problem(const ProblemSpec& spec) {
  BuiltProblem built;
  built.description = spec.describe();
  if (spec.type == ProblemSpec::Type::quadratic) {
    QuadraticProblem q =
        generate_quadratic(spec.quadratic.agents, spec.quadratic.dim, spec.quadratic.kappa, spec.quadratic.seed);
    built.truth = quadratic_optimum(q);
    built.objectives = q.objectives();
    return built;
  }
  SparseDataset ds;
  try {
    if (spec.logistic.dataset == "synthetic") {
      std::istringstream text(synthetic_classification_text(spec.logistic.synth_rows, spec.logistic.synth_features,
                                                            spec.logistic.synth_active, spec.logistic.seed));
      ds = parse_sparse_text(text);
    } else {
      std::ifstream in(spec.logistic.dataset);
      if (!in) throw std::runtime_error("cannot open dataset file: " + spec.logistic.dataset);
      ds = parse_sparse_text(in);
    }
    Shards shards = partition(ds, spec.logistic.agents, spec.logistic.seed, spec.logistic.partition,
                              spec.logistic.equal_shards, spec.logistic.declared_dim);
    LogisticProblem prob = build_logistic(std::move(shards.design), std::move(shards.labels));
    built.objectives = prob.objectives();
  } catch (const std::exception& e) {
    throw DatasetError(e.what());
  }
  built.truth = centralized_solve(built.objectives);
  return built;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

struct ExperimentResult {
  std::vector<RunTrace> traces;
  std::vector<CostModel> cost_models;
  BuiltProblem problem;
  ConsensusMatrix consensus;

  bool all_diverged() const {
    for (const auto& t : traces)
      if (!t.diverged) return false;
    return !traces.empty();
  }
};

namespace detail {

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string slugify(const std::string& label) {
  std::string out;
  bool dash = true;  // suppress leading dashes
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      dash = false;
    } else if (!dash) {
      out += '-';
      dash = true;
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "method" : out;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.cost_models = cfg.cost_models;
  for (const auto& m : result.cost_models) m.validate();
  result.problem = build_problem(cfg.problem);
  const int agents = result.problem.objectives.agents;
  NetworkTopology topo = build_topology(cfg.topology.kind, agents, cfg.topology.k);
  result.consensus = metropolis_weights(topo);

  for (const auto& spec : cfg.methods) {
    MethodConfig mc;
    mc.label = spec.label;
    mc.method = spec.method;
    mc.schedule = spec.schedule;
    mc.grad_steps = spec.grad_steps;
    long bound_t = spec.schedule.kind == ConsensusSchedule::Kind::fixed ? spec.schedule.t_fixed : 1;
    mc.alpha = spec.alpha ? *spec.alpha
                          : default_stepsize(spec.method, result.problem.objectives, result.consensus, bound_t);
    mc.max_iters = spec.max_iters ? *spec.max_iters : cfg.resolved_max_iters();
    RunTrace trace = run(mc, result.consensus, result.problem.objectives, result.problem.truth);
    trace.set_manifest("problem", result.problem.description);
    trace.set_manifest("topology", cfg.topology.describe(agents));
    trace.set_manifest("alpha_mode", spec.alpha ? "explicit" : "auto");
    trace.set_manifest("timestamp", detail::utc_timestamp());
    result.traces.push_back(std::move(trace));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

inline const std::vector<double>& summary_thresholds() {
  static const std::vector<double> t{1e-2, 1e-4, 1e-6, 1e-8};
  return t;
}

struct MethodSummary {
  std::string label;
  bool diverged = false;
  double final_rel_err = 0.0;
  double plateau_rel_err = 0.0;  // mean over the final 10% of recorded rows
  struct Crossing {
    double threshold = 0.0;
    bool reached = false;
    long iterations = 0;
    long long comm_rounds = 0;
    long long grad_rounds = 0;
    std::vector<double> costs;  // one per cost model
  };
  std::vector<Crossing> crossings;
};

inline MethodSummary summarize_trace(const RunTrace& trace, const std::vector<CostModel>& models) {
  MethodSummary s;
  if (const std::string* l = trace.manifest_value("label")) s.label = *l;
  s.diverged = trace.diverged;
  if (!trace.rows.empty()) {
    s.final_rel_err = trace.rows.back().rel_err;
    std::size_t tail = std::max<std::size_t>(1, trace.rows.size() / 10);
    double sum = 0.0;
    for (std::size_t i = trace.rows.size() - tail; i < trace.rows.size(); ++i) sum += trace.rows[i].rel_err;
    s.plateau_rel_err = sum / static_cast<double>(tail);
  }
  for (double thr : summary_thresholds()) {
    MethodSummary::Crossing c;
    c.threshold = thr;
    for (const auto& row : trace.rows) {
      if (row.rel_err <= thr) {
        c.reached = true;
        c.iterations = row.k;
        c.comm_rounds = row.comm_rounds;
        c.grad_rounds = row.grad_rounds;
        for (const auto& m : models) c.costs.push_back(cost_of(row, m));
        break;
      }
    }
    s.crossings.push_back(std::move(c));
  }
  return s;
}

inline void write_summary_table(const std::vector<MethodSummary>& summaries, std::ostream& os) {
  os << "method                          final rel err   plateau rel err  status\n";
  for (const auto& s : summaries) {
    std::ostringstream line;
    line.setf(std::ios::left);
    line.width(32);
    line << s.label;
    std::string fin = detail::format_double(s.final_rel_err);
    std::string plat = detail::format_double(s.plateau_rel_err);
    os << line.str() << fin << std::string(fin.size() < 16 ? 16 - fin.size() : 1, ' ') << plat
       << std::string(plat.size() < 17 ? 17 - plat.size() : 1, ' ') << (s.diverged ? "diverged" : "ok") << '\n';
    for (const auto& c : s.crossings) {
      os << "    rel err <= " << detail::format_double(c.threshold) << ": ";
      if (!c.reached) {
        os << "not reached\n";
        continue;
      }
      os << "iters=" << c.iterations << " comm=" << c.comm_rounds << " grad=" << c.grad_rounds;
      for (std::size_t m = 0; m < c.costs.size(); ++m)
        os << " cost" << (m + 1) << "=" << detail::format_double(c.costs[m]);
      os << '\n';
    }
  }
}

inline void write_summary_csv(const std::vector<MethodSummary>& summaries, std::size_t n_models, std::ostream& os) {
  os << "label,diverged,final_rel_err,plateau_rel_err,threshold,reached,iterations,comm_rounds,grad_rounds";
  for (std::size_t m = 0; m < n_models; ++m) os << ",cost" << (m + 1);
  os << '\n';
  for (const auto& s : summaries)
    for (const auto& c : s.crossings) {
      os << s.label << ',' << (s.diverged ? 1 : 0) << ',' << detail::format_double(s.final_rel_err) << ','
         << detail::format_double(s.plateau_rel_err) << ',' << detail::format_double(c.threshold) << ','
         << (c.reached ? 1 : 0) << ',' << c.iterations << ',' << c.comm_rounds << ',' << c.grad_rounds;
      for (std::size_t m = 0; m < n_models; ++m)
        os << ',' << (c.reached && m < c.costs.size() ? detail::format_double(c.costs[m]) : "");
      os << '\n';
    }
}

// Writes one trace CSV per method plus summary.txt / summary.csv; returns the
// trace paths in method order.
inline std::vector<std::filesystem::path> write_experiment(const ExperimentResult& result,
                                                           const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  std::vector<std::filesystem::path> paths;
  std::vector<std::string> used;
  std::vector<MethodSummary> summaries;
  for (const auto& trace : result.traces) {
    const std::string* label = trace.manifest_value("label");
    std::string slug = detail::slugify(label ? *label : "method");
    std::string name = slug;
    int suffix = 2;
    while (std::find(used.begin(), used.end(), name) != used.end()) name = slug + "-" + std::to_string(suffix++);
    used.push_back(name);
    std::filesystem::path path = outdir / (name + ".csv");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_trace_csv(trace, result.cost_models, os);
    paths.push_back(path);
    summaries.push_back(summarize_trace(trace, result.cost_models));
  }
  {
    std::ofstream os(outdir / "summary.txt", std::ios::binary);
    write_summary_table(summaries, os);
  }
  {
    std::ofstream os(outdir / "summary.csv", std::ios::binary);
    write_summary_csv(summaries, result.cost_models.size(), os);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Plot data: long-format CSV label,x,rel_err for a chosen x-axis
// ---------------------------------------------------------------------------

enum class PlotAxis { iterations, cost, comm_rounds, grad_rounds };

inline PlotAxis parse_axis(const std::string& s) {
  if (s == "iterations") return PlotAxis::iterations;
  if (s == "cost") return PlotAxis::cost;
  if (s == "comm_rounds") return PlotAxis::comm_rounds;
  if (s == "grad_rounds") return PlotAxis::grad_rounds;
  throw ConfigError("unknown axis '" + s + "' (expected iterations, cost, comm_rounds or grad_rounds)");
}

inline void emit_plot_data(const std::vector<ParsedTrace>& traces, PlotAxis axis, std::size_t cost_index,
                           std::ostream& os) {
  const std::string* problem = nullptr;
  for (const auto& t : traces) {
    const std::string* p = t.trace.manifest_value("problem");
    if (!p) throw std::runtime_error("plot data: trace missing problem manifest entry");
    if (!problem)
      problem = p;
    else if (*p != *problem)
      throw std::runtime_error("plot data: traces come from different problems");
    if (axis == PlotAxis::cost && cost_index >= t.costs.size())
      throw std::runtime_error("plot data: cost model index out of range");
  }
  os << "label,x,rel_err\n";
  for (const auto& t : traces) {
    const std::string* label = t.trace.manifest_value("label");
    std::string name = label ? *label : "method";
    for (std::size_t r = 0; r < t.trace.rows.size(); ++r) {
      const TraceRow& row = t.trace.rows[r];
      os << name << ',';
      switch (axis) {
        case PlotAxis::iterations: os << row.k; break;
        case PlotAxis::cost: os << detail::format_double(t.costs[cost_index][r]); break;
        case PlotAxis::comm_rounds: os << row.comm_rounds; break;
        case PlotAxis::grad_rounds: os << row.grad_rounds; break;
      }
      os << ',' << detail::format_double(row.rel_err) << '\n';
    }
  }
}

inline ParsedTrace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
  try {
    return read_trace_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace neardgd
