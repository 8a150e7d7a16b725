#pragma once

// Sparse classification datasets: text parsing, agent partitioning, and a
// seeded synthetic generator used when no data file is available.
//
// Text format (one sample per line): "<label> <index>:<value> ...", indices
// 1-based and strictly increasing.  Labels {1,2} are remapped to {+1,-1};
// labels already in {+1,-1} pass through.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neardgd {

struct SparseSample {
  double label = 0.0;  // +1 or -1
  std::vector<std::pair<int, double>> features;  // (1-based index, value), ascending
};

struct SparseDataset {
  int max_feature = 0;  // largest feature index seen
  std::vector<SparseSample> samples;
  long rows() const { return static_cast<long>(samples.size()); }
};

namespace detail {

inline double parse_number(const std::string& tok, long line_no, const char* what) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("dataset line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
  }
  if (pos != tok.size())
    throw std::runtime_error("dataset line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
  return v;
}

}  // namespace detail

inline SparseDataset parse_sparse_text(std::istream& in) {
  SparseDataset ds;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    SparseSample sample;
    double raw = detail::parse_number(tok, line_no, "label");
    if (raw == 1.0)
      sample.label = 1.0;
    else if (raw == 2.0 || raw == -1.0)
      sample.label = -1.0;
    else
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": label must be 1, 2, +1 or -1");
    int prev_index = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": expected index:value, got '" + tok +
                                 "'");
      double idx_raw = detail::parse_number(tok.substr(0, colon), line_no, "feature index");
      int idx = static_cast<int>(idx_raw);
      if (idx_raw != static_cast<double>(idx) || idx < 1)
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": feature index must be a positive integer");
      if (idx <= prev_index)
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": feature indices must be increasing");
      prev_index = idx;
      double val = detail::parse_number(tok.substr(colon + 1), line_no, "feature value");
      sample.features.emplace_back(idx, val);
      ds.max_feature = std::max(ds.max_feature, idx);
    }
    ds.samples.push_back(std::move(sample));
  }
  if (ds.samples.empty()) throw std::runtime_error("dataset: no samples found");
  return ds;
}

enum class PartitionMode { contiguous, shuffled };

struct Shards {
  std::vector<Eigen::MatrixXd> design;  // one n_i x p dense matrix per agent
  std::vector<Eigen::VectorXd> labels;
  long dropped_rows = 0;  // remainder rows discarded in equal-size mode
};

// Splits samples across `agents` shards.  shuffled mode applies a seeded
// permutation first.  With equal_size, every shard gets floor(rows/agents)
// samples and the remainder is dropped; otherwise shard sizes differ by at
// most one.  declared_dim (0 = use max index) pads or truncates features to a
// fixed width.
inline Shards partition(const SparseDataset& ds, int agents, std::uint64_t seed, PartitionMode mode,
                        bool equal_size = false, int declared_dim = 0) {
  if (agents < 1) throw std::invalid_argument("partition: need at least one agent");
  if (ds.rows() < agents) throw std::invalid_argument("partition: fewer samples than agents");
  const int p = declared_dim > 0 ? declared_dim : ds.max_feature;
  if (p < 1) throw std::invalid_argument("partition: no features");

  std::vector<long> order(ds.rows());
  std::iota(order.begin(), order.end(), 0);
  if (mode == PartitionMode::shuffled) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  const long rows = ds.rows();
  const long base = rows / agents;
  const long rem = rows % agents;
  Shards out;
  out.design.reserve(agents);
  out.labels.reserve(agents);
  if (equal_size) out.dropped_rows = rem;
  long cursor = 0;
  for (int i = 0; i < agents; ++i) {
    const long take = equal_size ? base : base + (i < rem ? 1 : 0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(take, p);
    Eigen::VectorXd y(take);
    for (long r = 0; r < take; ++r) {
      const SparseSample& s = ds.samples[order[cursor + r]];
      y(r) = s.label;
      for (auto [idx, val] : s.features)
        if (idx <= p) a(r, idx - 1) = val;
    }
    cursor += take;
    out.design.push_back(std::move(a));
    out.labels.push_back(std::move(y));
  }
  return out;
}

// Seeded synthetic stand-in for a one-hot categorical dataset: `rows` samples,
// `features` binary columns, about `active` active columns per sample, labels
// linearly separable by a hidden weight vector and written as {1,2}.  Returned
// as sparse text so it exercises the parser.
inline std::string synthetic_classification_text(long rows = 8124, int features = 112, int active = 22,
                                                 std::uint64_t seed = 1) {
  if (rows < 1 || features < 2 || active < 1 || active > features)
    throw std::invalid_argument("synthetic_classification_text: bad shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(1, features);
  std::vector<double> hidden(features + 1);
  for (int j = 1; j <= features; ++j) hidden[j] = normal(rng);
  std::string out;
  out.reserve(rows * (active * 6 + 4));
  std::vector<int> idx;
  for (long r = 0; r < rows; ++r) {
    idx.clear();
    // First and last rows pin the extreme columns so max_feature is stable.
    if (r == 0) idx.push_back(1);
    if (r == 1) idx.push_back(features);
    while (static_cast<int>(idx.size()) < active) idx.push_back(pick(rng));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    double score = 0.0;
    for (int j : idx) score += hidden[j];
    out += score > 0.0 ? '1' : '2';
    for (int j : idx) {
      out += ' ';
      out += std::to_string(j);
      out += ":1";
    }
    out += '\n';
  }
  return out;
}

}  // namespace neardgd
