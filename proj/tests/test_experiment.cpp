// Experiment harness tests: config parsing (including error aggregation),
// problem construction, orchestration, file emission, summaries and plot data.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "neardgd/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using neardgd::ConfigError;
using neardgd::ConsensusSchedule;
using neardgd::CostModel;
using neardgd::DatasetError;
using neardgd::ExperimentConfig;
using neardgd::ExperimentResult;
using neardgd::GraphKind;
using neardgd::Method;
using neardgd::MethodSummary;
using neardgd::ParsedTrace;
using neardgd::parse_experiment_config;
using neardgd::PlotAxis;
using neardgd::ProblemSpec;
using neardgd::RunTrace;
using neardgd::TraceRow;

ExperimentConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

std::string error_text(const std::string& config) {
  try {
    parse_text(config);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kTinyQuadratic = R"(
[problem]
type = quadratic
agents = 4
dim = 3
kappa = 50
seed = 9

[topology]
kind = cyclic_k
k = 2

[run]
max_iters = 30

[method dgd baseline]
kind = dgd
alpha = auto

[method near+ (1,1,k)]
kind = near_dgd
schedule = linear
)";

TraceRow make_row(long k, long t_k, long long comm, long long grad, double rel) {
  TraceRow row;
  row.k = k;
  row.t_k = t_k;
  row.comm_rounds = comm;
  row.grad_rounds = grad;
  row.rel_err = rel;
  row.cons_err = rel;
  return row;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path(::testing::TempDir()) / name;
  fs::remove_all(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

TEST(Config, FullConfigParses) {
  ExperimentConfig cfg = parse_text(R"(
# experiment description
[problem]
type = quadratic
agents = 10
dim = 10
kappa = 1e4    # condition number of the sum
seed = 7

[topology]
kind = cyclic_k
k = 4

[run]
max_iters = 500

[cost]
models = 1:10, 1:1, 10:1

[method dgd baseline]
kind = dgd
alpha = 0.05

[method dgd^5]
kind = dgd_t
t = 5

[method near+ (1,1,k)]
kind = near_dgd
schedule = linear
alpha = auto

[method near doubling]
kind = near_dgd
schedule = doubling
period = 100
grad_steps = 2
max_iters = 12
)");
  EXPECT_EQ(cfg.problem.type, ProblemSpec::Type::quadratic);
  EXPECT_EQ(cfg.problem.quadratic.agents, 10);
  EXPECT_EQ(cfg.problem.quadratic.dim, 10);
  EXPECT_EQ(cfg.problem.quadratic.kappa, 1e4);
  EXPECT_EQ(cfg.problem.quadratic.seed, 7u);
  EXPECT_EQ(cfg.topology.kind, GraphKind::cyclic_k);
  EXPECT_EQ(cfg.topology.k, 4);
  ASSERT_TRUE(cfg.max_iters.has_value());
  EXPECT_EQ(*cfg.max_iters, 500);
  EXPECT_EQ(cfg.resolved_max_iters(), 500);

  ASSERT_EQ(cfg.cost_models.size(), 3u);
  EXPECT_EQ(cfg.cost_models[0].comm_cost, 1.0);
  EXPECT_EQ(cfg.cost_models[0].grad_cost, 10.0);
  EXPECT_EQ(cfg.cost_models[2].comm_cost, 10.0);
  EXPECT_EQ(cfg.cost_models[2].grad_cost, 1.0);

  ASSERT_EQ(cfg.methods.size(), 4u);
  EXPECT_EQ(cfg.methods[0].label, "dgd baseline");
  EXPECT_EQ(cfg.methods[0].method, Method::dgd);
  ASSERT_TRUE(cfg.methods[0].alpha.has_value());
  EXPECT_EQ(*cfg.methods[0].alpha, 0.05);

  EXPECT_EQ(cfg.methods[1].label, "dgd^5");
  EXPECT_EQ(cfg.methods[1].method, Method::dgd_t);
  EXPECT_EQ(cfg.methods[1].schedule.kind, ConsensusSchedule::Kind::fixed);
  EXPECT_EQ(cfg.methods[1].schedule.t_fixed, 5);
  EXPECT_FALSE(cfg.methods[1].alpha.has_value());

  EXPECT_EQ(cfg.methods[2].label, "near+ (1,1,k)");
  EXPECT_EQ(cfg.methods[2].method, Method::near_dgd);
  EXPECT_EQ(cfg.methods[2].schedule.kind, ConsensusSchedule::Kind::linear);
  EXPECT_FALSE(cfg.methods[2].alpha.has_value());  // "auto" leaves it unset

  EXPECT_EQ(cfg.methods[3].schedule.kind, ConsensusSchedule::Kind::doubling);
  EXPECT_EQ(cfg.methods[3].schedule.period, 100);
  EXPECT_EQ(cfg.methods[3].grad_steps, 2);
  ASSERT_TRUE(cfg.methods[3].max_iters.has_value());
  EXPECT_EQ(*cfg.methods[3].max_iters, 12);
}

TEST(Config, LogisticKeysParse) {
  ExperimentConfig cfg = parse_text(R"(
[problem]
type = logistic
agents = 10
dataset = synthetic
partition = shuffled
equal_shards = true
declared_dim = 114
seed = 1
synth_rows = 8124
synth_features = 112
synth_active = 22

[topology]
kind = complete

[method dgd]
kind = dgd
)");
  EXPECT_EQ(cfg.problem.type, ProblemSpec::Type::logistic);
  EXPECT_EQ(cfg.problem.logistic.agents, 10);
  EXPECT_EQ(cfg.problem.logistic.dataset, "synthetic");
  EXPECT_TRUE(cfg.problem.logistic.equal_shards);
  EXPECT_EQ(cfg.problem.logistic.declared_dim, 114);
  EXPECT_EQ(cfg.problem.logistic.synth_rows, 8124);
  EXPECT_EQ(cfg.problem.logistic.synth_features, 112);
  EXPECT_EQ(cfg.problem.logistic.synth_active, 22);
  EXPECT_EQ(cfg.resolved_max_iters(), 10000);  // logistic default
}

TEST(Config, DefaultsWhenSectionsAreMinimal) {
  ExperimentConfig cfg = parse_text(R"(
[problem]
type = quadratic

[topology]
kind = complete

[method m]
kind = near_dgd
)");
  EXPECT_EQ(cfg.problem.quadratic.agents, 10);
  EXPECT_EQ(cfg.problem.quadratic.kappa, 100.0);
  EXPECT_EQ(cfg.resolved_max_iters(), 5000);  // quadratic default
  ASSERT_EQ(cfg.cost_models.size(), 1u);
  EXPECT_EQ(cfg.cost_models[0].comm_cost, 1.0);
  EXPECT_EQ(cfg.cost_models[0].grad_cost, 1.0);
  EXPECT_EQ(cfg.methods[0].grad_steps, 1);
  EXPECT_EQ(cfg.methods[0].schedule.kind, ConsensusSchedule::Kind::fixed);
  EXPECT_EQ(cfg.methods[0].schedule.t_fixed, 1);
}

TEST(Config, AllErrorsAreCollectedIntoOneReport) {
  std::string msg = error_text(R"(
[problem]
type = banana
agents = twelve

[topology]
kind = pentagon

[warmup]
foo = 1

[method]
kind = dgd

[method a]
kind = near_dgd
schedule = linear
t = 3

[method a]
kind = dgd
)");
  ASSERT_FALSE(msg.empty());
  EXPECT_NE(msg.find("expected quadratic or logistic"), std::string::npos);
  EXPECT_NE(msg.find("[problem] agents"), std::string::npos);
  EXPECT_NE(msg.find("expected cyclic_k, path, star or complete"), std::string::npos);
  EXPECT_NE(msg.find("unknown section [warmup]"), std::string::npos);
  EXPECT_NE(msg.find("method section needs a label"), std::string::npos);
  EXPECT_NE(msg.find("t: only valid with a fixed schedule"), std::string::npos);
  EXPECT_NE(msg.find("duplicate method label 'a'"), std::string::npos);
}

TEST(Config, StructuralErrorsAreReported) {
  EXPECT_NE(error_text("").find("missing [problem] section"), std::string::npos);
  EXPECT_NE(error_text("").find("missing [topology] section"), std::string::npos);
  EXPECT_NE(error_text("").find("no [method ...] sections"), std::string::npos);
  EXPECT_NE(error_text("[problem\ntype = quadratic\n").find("unterminated section header"), std::string::npos);
  EXPECT_NE(error_text("stray = 1\n").find("key outside any section"), std::string::npos);
  EXPECT_NE(error_text("[problem]\njust words\n").find("expected key = value"), std::string::npos);
  EXPECT_NE(error_text("[problem]\ntype = quadratic\ntype = quadratic\n").find("duplicate key 'type'"),
            std::string::npos);
  EXPECT_NE(error_text("[problem]\nflavor = sour\n[topology]\n[method m]\nkind = dgd\n")
                .find("[problem] flavor: unknown key"),
            std::string::npos);
}

TEST(Config, CostModelListValidation) {
  EXPECT_NE(error_text("[problem]\n[topology]\n[cost]\nmodels = 1-10\n[method m]\nkind = dgd\n")
                .find("expected c_c:c_g pairs"),
            std::string::npos);
  EXPECT_NE(error_text("[problem]\n[topology]\n[cost]\nmodels = 0:0\n[method m]\nkind = dgd\n")
                .find("costs cannot both be zero"),
            std::string::npos);
}

TEST(Config, FileLoaderReportsMissingFile) {
  EXPECT_THROW(neardgd::parse_experiment_config_file("/nonexistent/path/exp.ini"), ConfigError);
}

TEST(Config, AxisNamesParse) {
  EXPECT_EQ(neardgd::parse_axis("iterations"), PlotAxis::iterations);
  EXPECT_EQ(neardgd::parse_axis("cost"), PlotAxis::cost);
  EXPECT_EQ(neardgd::parse_axis("comm_rounds"), PlotAxis::comm_rounds);
  EXPECT_EQ(neardgd::parse_axis("grad_rounds"), PlotAxis::grad_rounds);
  EXPECT_THROW(neardgd::parse_axis("time"), ConfigError);
}

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

TEST(Problems, MissingDatasetFileRaisesDatasetError) {
  ProblemSpec spec;
  spec.type = ProblemSpec::Type::logistic;
  spec.logistic.dataset = "/nonexistent/dir/data.txt";
  EXPECT_THROW(neardgd::build_problem(spec), DatasetError);
}

TEST(Problems, SmallSyntheticLogisticBuilds) {
  ProblemSpec spec;
  spec.type = ProblemSpec::Type::logistic;
  spec.logistic.agents = 3;
  spec.logistic.synth_rows = 60;
  spec.logistic.synth_features = 10;
  spec.logistic.synth_active = 3;
  spec.logistic.declared_dim = 12;
  neardgd::BuiltProblem built = neardgd::build_problem(spec);
  EXPECT_EQ(built.objectives.agents, 3);
  EXPECT_EQ(built.objectives.dim, 12);
  EXPECT_GT(built.truth.x_star.norm(), 0.0);
  // The reference solution is a stationary point of the sum.
  EXPECT_LT(built.objectives.gradient_sum(built.truth.x_star).norm(), 1e-10);
  EXPECT_NE(built.description.find("logistic(dataset=synthetic"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

TEST(Runner, TinyQuadraticExperimentConverges) {
  ExperimentConfig cfg = parse_text(kTinyQuadratic);
  ExperimentResult result = neardgd::run_experiment(cfg);
  ASSERT_EQ(result.traces.size(), 2u);
  for (const auto& trace : result.traces) {
    ASSERT_EQ(trace.rows.size(), 30u);
    EXPECT_FALSE(trace.diverged);
    EXPECT_LT(trace.rows.back().rel_err, trace.rows.front().rel_err);
    ASSERT_NE(trace.manifest_value("problem"), nullptr);
    ASSERT_NE(trace.manifest_value("topology"), nullptr);
    ASSERT_NE(trace.manifest_value("timestamp"), nullptr);
    EXPECT_NE(trace.manifest_value("problem")->find("quadratic(agents=4"), std::string::npos);
    EXPECT_EQ(*trace.manifest_value("topology"), "cyclic_k(n=4,k=2)");
  }
  ASSERT_NE(result.traces[0].manifest_value("alpha_mode"), nullptr);
  EXPECT_EQ(*result.traces[0].manifest_value("alpha_mode"), "auto");
  EXPECT_FALSE(result.all_diverged());
}

TEST(Runner, ReplayIsByteIdenticalExceptTimestamp) {
  ExperimentConfig cfg = parse_text(kTinyQuadratic);
  auto render = [&](const ExperimentResult& result) {
    std::vector<std::string> lines;
    for (const auto& trace : result.traces) {
      std::ostringstream os;
      neardgd::write_trace_csv(trace, result.cost_models, os);
      std::istringstream is(os.str());
      std::string line;
      while (std::getline(is, line))
        if (line.rfind("# timestamp=", 0) != 0) lines.push_back(line);
    }
    return lines;
  };
  std::vector<std::string> a = render(neardgd::run_experiment(cfg));
  std::vector<std::string> b = render(neardgd::run_experiment(cfg));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]) << "line " << i;
}

TEST(Runner, WriteExperimentEmitsTracesAndSummaries) {
  ExperimentConfig cfg = parse_text(kTinyQuadratic);
  ExperimentResult result = neardgd::run_experiment(cfg);
  fs::path dir = fresh_dir("write-experiment");
  std::vector<fs::path> paths = neardgd::write_experiment(result, dir);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].filename(), "dgd-baseline.csv");
  EXPECT_EQ(paths[1].filename(), "near-1-1-k.csv");
  for (const auto& p : paths) EXPECT_TRUE(fs::exists(p));
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));

  ParsedTrace parsed = neardgd::read_trace_file(paths[0]);
  EXPECT_EQ(parsed.trace.rows.size(), 30u);
  ASSERT_NE(parsed.trace.manifest_value("label"), nullptr);
  EXPECT_EQ(*parsed.trace.manifest_value("label"), "dgd baseline");

  std::ifstream summary(dir / "summary.csv");
  std::string header;
  std::getline(summary, header);
  EXPECT_EQ(header, "label,diverged,final_rel_err,plateau_rel_err,threshold,reached,iterations,comm_rounds,grad_rounds,cost1");
  fs::remove_all(dir);
}

TEST(Runner, CollidingLabelsGetDistinctFilenames) {
  ExperimentConfig cfg = parse_text(R"(
[problem]
type = quadratic
agents = 3
dim = 2
kappa = 10
seed = 2

[topology]
kind = complete

[run]
max_iters = 3

[method Near+]
kind = near_dgd

[method near ]
kind = near_dgd
)");
  ExperimentResult result = neardgd::run_experiment(cfg);
  fs::path dir = fresh_dir("collide");
  std::vector<fs::path> paths = neardgd::write_experiment(result, dir);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].filename(), "near.csv");
  EXPECT_EQ(paths[1].filename(), "near-2.csv");
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

TEST(Summaries, ThresholdCrossingsPickTheFirstQualifyingRow) {
  RunTrace trace;
  trace.set_manifest("label", "sample");
  trace.rows.push_back(make_row(1, 1, 1, 1, 1.0));
  trace.rows.push_back(make_row(2, 1, 2, 2, 5e-3));
  trace.rows.push_back(make_row(3, 1, 3, 3, 3e-5));
  trace.rows.push_back(make_row(4, 1, 4, 4, 2e-7));
  trace.rows.push_back(make_row(5, 1, 5, 5, 4e-7));  // rises again: crossing stays at k=4
  std::vector<CostModel> models{CostModel{1.0, 10.0}};
  MethodSummary s = neardgd::summarize_trace(trace, models);
  EXPECT_EQ(s.label, "sample");
  EXPECT_FALSE(s.diverged);
  EXPECT_EQ(s.final_rel_err, 4e-7);
  EXPECT_EQ(s.plateau_rel_err, 4e-7);  // final 10% of 5 rows = last row

  ASSERT_EQ(s.crossings.size(), 4u);
  EXPECT_TRUE(s.crossings[0].reached);  // 1e-2
  EXPECT_EQ(s.crossings[0].iterations, 2);
  EXPECT_TRUE(s.crossings[1].reached);  // 1e-4
  EXPECT_EQ(s.crossings[1].iterations, 3);
  EXPECT_TRUE(s.crossings[2].reached);  // 1e-6
  EXPECT_EQ(s.crossings[2].iterations, 4);
  ASSERT_EQ(s.crossings[2].costs.size(), 1u);
  EXPECT_EQ(s.crossings[2].costs[0], 4.0 * 1.0 + 4.0 * 10.0);
  EXPECT_FALSE(s.crossings[3].reached);  // 1e-8 never hit
  EXPECT_EQ(s.crossings[3].iterations, 0);
}

TEST(Summaries, PlateauAveragesTheFinalTenPercent) {
  RunTrace trace;
  trace.set_manifest("label", "plateau");
  for (long k = 1; k <= 40; ++k) trace.rows.push_back(make_row(k, 1, k, k, k <= 36 ? 1.0 : 2.0));
  MethodSummary s = neardgd::summarize_trace(trace, {CostModel{1.0, 1.0}});
  EXPECT_EQ(s.plateau_rel_err, 2.0);  // rows 37..40
}

TEST(Summaries, TablesRenderWithoutCrashing) {
  RunTrace trace;
  trace.set_manifest("label", "render");
  trace.rows.push_back(make_row(1, 1, 1, 1, 0.5));
  std::vector<MethodSummary> summaries{neardgd::summarize_trace(trace, {CostModel{1.0, 1.0}})};
  std::ostringstream table, csv;
  neardgd::write_summary_table(summaries, table);
  neardgd::write_summary_csv(summaries, 1, csv);
  EXPECT_NE(table.str().find("render"), std::string::npos);
  EXPECT_NE(csv.str().find("render,0,0.5"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

ParsedTrace plot_input(const std::string& label, const std::string& problem) {
  ParsedTrace t;
  t.trace.set_manifest("label", label);
  t.trace.set_manifest("problem", problem);
  t.trace.rows.push_back(make_row(1, 1, 1, 1, 0.5));
  t.trace.rows.push_back(make_row(2, 2, 3, 2, 0.25));
  t.costs = {{11.0, 23.0}, {2.0, 5.0}};
  return t;
}

TEST(PlotData, IterationAxisOutputIsExact) {
  std::ostringstream os;
  neardgd::emit_plot_data({plot_input("a", "p"), plot_input("b", "p")}, PlotAxis::iterations, 0, os);
  EXPECT_EQ(os.str(),
            "label,x,rel_err\n"
            "a,1,0.5\n"
            "a,2,0.25\n"
            "b,1,0.5\n"
            "b,2,0.25\n");
}

TEST(PlotData, CostAxisSelectsTheRequestedModel) {
  std::ostringstream os;
  neardgd::emit_plot_data({plot_input("a", "p")}, PlotAxis::cost, 1, os);
  EXPECT_EQ(os.str(),
            "label,x,rel_err\n"
            "a,2,0.5\n"
            "a,5,0.25\n");
  std::ostringstream os2;
  neardgd::emit_plot_data({plot_input("a", "p")}, PlotAxis::comm_rounds, 0, os2);
  EXPECT_NE(os2.str().find("a,3,0.25"), std::string::npos);
}

TEST(PlotData, MismatchedProblemsAreRejected) {
  std::ostringstream os;
  EXPECT_THROW(neardgd::emit_plot_data({plot_input("a", "p"), plot_input("b", "q")}, PlotAxis::iterations, 0, os),
               std::runtime_error);
  EXPECT_THROW(neardgd::emit_plot_data({plot_input("a", "p")}, PlotAxis::cost, 7, os), std::runtime_error);
  ParsedTrace missing;
  missing.trace.set_manifest("label", "x");
  EXPECT_THROW(neardgd::emit_plot_data({missing}, PlotAxis::iterations, 0, os), std::runtime_error);
}

}  // namespace
