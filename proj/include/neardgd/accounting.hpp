#pragma once

// Cost accounting and run traces.
//
// Work is counted in network-wide rounds: one communication round is a single
// application of the consensus matrix by every agent, one computation round is
// one full gradient evaluation by every agent.  Counters are exact integers;
// money-cost is a readout, cost = comm_rounds*c_c + grad_rounds*c_g, so the
// same trace can be priced under any cost structure after the fact.

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neardgd/objectives.hpp"
#include "neardgd/stacked.hpp"
#include "neardgd/text_format.hpp"

namespace neardgd {

struct CostModel {
  double comm_cost = 1.0;  // c_c: price of one communication round
  double grad_cost = 1.0;  // c_g: price of one computation round

  void validate() const {
    if (comm_cost < 0.0 || grad_cost < 0.0) throw std::invalid_argument("CostModel: costs must be nonnegative");
    if (comm_cost == 0.0 && grad_cost == 0.0) throw std::invalid_argument("CostModel: costs cannot both be zero");
  }
};

struct TraceRow {
  long k = 0;                  // iteration index, 1-based
  long t_k = 0;                // consensus rounds used this iteration
  long long comm_rounds = 0;   // cumulative communication rounds
  long long grad_rounds = 0;   // cumulative computation rounds
  double rel_err = 0.0;        // ||mean - x*||^2 / ||x*||^2
  double cons_err = 0.0;       // (1/n) sum_i ||x_i - x*||^2 / ||x*||^2
};

struct RunTrace {
  std::vector<std::pair<std::string, std::string>> manifest;  // ordered key=value lines
  std::vector<TraceRow> rows;
  bool diverged = false;
  long diverged_at = 0;          // iteration at which divergence was detected
  double max_mean_drift = 0.0;   // max_k ||mean_{k} - (mean_{k-1} - alpha*g)|| / (1 + ||mean_{k-1}||)

  void set_manifest(const std::string& key, const std::string& value) {
    for (auto& kv : manifest)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    manifest.emplace_back(key, value);
  }
  const std::string* manifest_value(const std::string& key) const {
    for (const auto& kv : manifest)
      if (kv.first == key) return &kv.second;
    return nullptr;
  }
};

// Squared relative distance of the agent mean to the reference solution.
inline double relative_error(const Eigen::VectorXd& mean, const GroundTruth& truth) {
  double denom = truth.x_star.squaredNorm();
  if (denom == 0.0) throw std::invalid_argument("relative_error: reference solution has zero norm");
  return (mean - truth.x_star).squaredNorm() / denom;
}

// Mean squared relative distance of the individual agents to the reference.
inline double consensus_error(const StackedIterate& x, const GroundTruth& truth) {
  double denom = truth.x_star.squaredNorm();
  if (denom == 0.0) throw std::invalid_argument("consensus_error: reference solution has zero norm");
  double sum = 0.0;
  for (int i = 0; i < x.agents; ++i) sum += (x.block(i) - truth.x_star).squaredNorm();
  return sum / (static_cast<double>(x.agents) * denom);
}

inline double cost_of(const TraceRow& row, const CostModel& model) {
  return static_cast<double>(row.comm_rounds) * model.comm_cost + static_cast<double>(row.grad_rounds) * model.grad_cost;
}

inline std::vector<double> cost_series(const RunTrace& trace, const CostModel& model) {
  model.validate();
  std::vector<double> out;
  out.reserve(trace.rows.size());
  for (const auto& row : trace.rows) out.push_back(cost_of(row, model));
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV: '#' manifest lines, a fixed header, one row per iteration, all
// floats at full round-trip precision.  With M cost models the cost column
// expands to cost,cost2,...,costM (model order matches the manifest).
// ---------------------------------------------------------------------------

inline void write_trace_csv(const RunTrace& trace, const std::vector<CostModel>& models, std::ostream& os) {
  if (models.empty()) throw std::invalid_argument("write_trace_csv: at least one cost model required");
  for (const auto& m : models) m.validate();
  for (const auto& [key, value] : trace.manifest) os << "# " << key << '=' << value << '\n';
  os << "# diverged=" << (trace.diverged ? "1" : "0") << '\n';
  if (trace.diverged) os << "# diverged_at=" << trace.diverged_at << '\n';
  os << "# max_mean_drift=" << detail::format_double(trace.max_mean_drift) << '\n';
  for (std::size_t m = 0; m < models.size(); ++m)
    os << "# cost_model" << (m + 1) << '=' << detail::format_double(models[m].comm_cost) << ':'
       << detail::format_double(models[m].grad_cost) << '\n';
  os << "k,t_k,comm_rounds,grad_rounds,rel_err,cons_err,cost";
  for (std::size_t m = 1; m < models.size(); ++m) os << ",cost" << (m + 1);
  os << '\n';
  for (const auto& row : trace.rows) {
    os << row.k << ',' << row.t_k << ',' << row.comm_rounds << ',' << row.grad_rounds << ','
       << detail::format_double(row.rel_err) << ',' << detail::format_double(row.cons_err);
    for (const auto& model : models) os << ',' << detail::format_double(cost_of(row, model));
    os << '\n';
  }
}

struct ParsedTrace {
  RunTrace trace;
  std::vector<CostModel> models;
  std::vector<std::vector<double>> costs;  // emitted cost columns, one vector per model
};

inline ParsedTrace read_trace_csv(std::istream& is) {
  ParsedTrace out;
  std::string line;
  bool header_seen = false;
  std::size_t cost_columns = 0;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq);
      std::string value = body.substr(eq + 1);
      if (key.rfind("cost_model", 0) == 0) {
        auto colon = value.find(':');
        if (colon == std::string::npos) throw std::runtime_error("trace: bad cost model line " + std::to_string(line_no));
        CostModel m;
        m.comm_cost = detail::parse_double(value.substr(0, colon));
        m.grad_cost = detail::parse_double(value.substr(colon + 1));
        out.models.push_back(m);
      } else if (key == "diverged") {
        out.trace.diverged = value == "1";
      } else if (key == "diverged_at") {
        out.trace.diverged_at = static_cast<long>(detail::parse_integer(value));
      } else if (key == "max_mean_drift") {
        out.trace.max_mean_drift = detail::parse_double(value);
      } else {
        out.trace.manifest.emplace_back(key, value);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      if (cells.size() < 7 || cells[0] != "k")
        throw std::runtime_error("trace: bad header at line " + std::to_string(line_no));
      cost_columns = cells.size() - 6;
      out.costs.assign(cost_columns, {});
      header_seen = true;
      continue;
    }
    if (cells.size() != 6 + cost_columns)
      throw std::runtime_error("trace: wrong column count at line " + std::to_string(line_no));
    TraceRow row;
    row.k = static_cast<long>(detail::parse_integer(cells[0]));
    row.t_k = static_cast<long>(detail::parse_integer(cells[1]));
    row.comm_rounds = detail::parse_integer(cells[2]);
    row.grad_rounds = detail::parse_integer(cells[3]);
    row.rel_err = detail::parse_double(cells[4]);
    row.cons_err = detail::parse_double(cells[5]);
    out.trace.rows.push_back(row);
    for (std::size_t m = 0; m < cost_columns; ++m) out.costs[m].push_back(detail::parse_double(cells[6 + m]));
  }
  if (!header_seen) throw std::runtime_error("trace: missing header");
  return out;
}

}  // namespace neardgd
