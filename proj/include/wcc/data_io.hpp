#ifndef WCC_DATA_IO_HPP
#define WCC_DATA_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wcc/common.hpp"

namespace wcc {

struct Dataset {
  Mat features;  // dense n x d
  Vec labels;    // entries in {+1, -1}
  std::string name;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// ---------------------------------------------------------------------------
// LIBSVM text format: one example per line, "label idx:val idx:val ..." with
// 1-based strictly ascending indices. Absent indices are zero. Labels are
// normalized to {+1,-1}: {0,-1} -> -1 and {1,+1} -> +1; any other two-class
// labeling maps the smaller label to -1.
// ---------------------------------------------------------------------------
inline Dataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_libsvm: cannot open " + path);

  struct Entry {
    double label;
    std::vector<std::pair<int, double>> feats;
  };
  std::vector<Entry> entries;
  std::set<double> distinct;
  int max_index = 0;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    Entry e;
    try {
      std::size_t used = 0;
      e.label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw parse_error("parse_libsvm: bad label '" + tok + "'", lineno);
    }
    int prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw parse_error("parse_libsvm: bad feature token '" + tok + "'", lineno);
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        val = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw parse_error("parse_libsvm: bad feature token '" + tok + "'", lineno);
      }
      if (idx <= prev)
        throw parse_error("parse_libsvm: indices must be 1-based ascending", lineno);
      prev = idx;
      max_index = std::max(max_index, idx);
      e.feats.emplace_back(idx, val);
    }
    distinct.insert(e.label);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw std::runtime_error("parse_libsvm: empty file " + path);
  if (distinct.size() > 2)
    throw std::runtime_error("parse_libsvm: more than two distinct labels in " + path);

  const bool special = std::all_of(distinct.begin(), distinct.end(), [](double v) {
    return v == 0.0 || v == 1.0 || v == -1.0;
  });
  auto map_label = [&](double raw) -> double {
    if (special) return (raw == 1.0) ? 1.0 : -1.0;
    if (distinct.size() == 1) return raw > 0.0 ? 1.0 : -1.0;
    return (raw == *distinct.begin()) ? -1.0 : 1.0;  // smaller label -> -1
  };

  Dataset ds;
  ds.name = path;
  ds.features = Mat::Zero(static_cast<int>(entries.size()), max_index);
  ds.labels.resize(static_cast<int>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ds.labels[static_cast<int>(i)] = map_label(entries[i].label);
    for (const auto& [idx, val] : entries[i].feats)
      ds.features(static_cast<int>(i), idx - 1) = val;
  }
  return ds;
}

inline void write_libsvm(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_libsvm: cannot open " + path);
  char buf[64];
  for (int i = 0; i < ds.size(); ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    for (int j = 0; j < ds.dim(); ++j) {
      if (ds.features(i, j) != 0.0) {
        std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
        out << ' ' << (j + 1) << ':' << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_libsvm: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Imbalanced-split construction: a stratified, balanced test set is drawn
// first, then the requested fraction of the remaining negative examples is
// kept in the training set. Deterministic under a fixed seed.
// ---------------------------------------------------------------------------
inline std::pair<Dataset, Dataset> imbalance_split(const Dataset& ds, double neg_keep_fraction,
                                                   double test_fraction, Rng& rng) {
  require(neg_keep_fraction > 0.0 && neg_keep_fraction <= 1.0,
          "imbalance_split: neg_keep_fraction must be in (0,1]");
  require(test_fraction >= 0.0 && test_fraction < 1.0,
          "imbalance_split: test_fraction must be in [0,1)");
  std::vector<int> pos, neg;
  for (int i = 0; i < ds.size(); ++i) (ds.labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw std::runtime_error("imbalance_split: both classes must be present");

  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  const auto n_test = static_cast<std::int64_t>(std::llround(test_fraction * ds.size()));
  const std::int64_t test_pos = n_test / 2;
  const std::int64_t test_neg = n_test - test_pos;
  if (test_pos >= static_cast<std::int64_t>(pos.size()) ||
      test_neg >= static_cast<std::int64_t>(neg.size()))
    throw std::runtime_error("imbalance_split: a class would become empty");

  std::vector<int> test_idx(pos.begin(), pos.begin() + test_pos);
  test_idx.insert(test_idx.end(), neg.begin(), neg.begin() + test_neg);

  const std::int64_t neg_remaining = static_cast<std::int64_t>(neg.size()) - test_neg;
  const auto keep = static_cast<std::int64_t>(std::llround(neg_keep_fraction * neg_remaining));
  if (keep <= 0) throw std::runtime_error("imbalance_split: a class would become empty");

  std::vector<int> train_idx(pos.begin() + test_pos, pos.end());
  train_idx.insert(train_idx.end(), neg.begin() + test_neg, neg.begin() + test_neg + keep);
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<int>& idx, const std::string& tag) {
    Dataset out;
    out.name = ds.name + tag;
    out.features.resize(static_cast<int>(idx.size()), ds.dim());
    out.labels.resize(static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.features.row(static_cast<int>(k)) = ds.features.row(idx[k]);
      out.labels[static_cast<int>(k)] = ds.labels[idx[k]];
    }
    return out;
  };
  return {take(train_idx, ":train"), take(test_idx, ":test")};
}

// Flips the labels of a uniformly chosen fraction of the examples, in place.
inline void flip_labels(Dataset& ds, double fraction, Rng& rng) {
  require(fraction >= 0.0 && fraction <= 1.0, "flip_labels: fraction must be in [0,1]");
  if (fraction == 0.0) return;
  std::vector<int> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto k = static_cast<std::int64_t>(std::llround(fraction * ds.size()));
  for (std::int64_t i = 0; i < k; ++i) ds.labels[idx[i]] = -ds.labels[idx[i]];
}

// ---------------------------------------------------------------------------
// Classification metrics: error rate and F-score on the positive class.
// Predictions are sign(score) with 0 mapped to +1.
// ---------------------------------------------------------------------------
struct Metrics {
  double error_rate = 0.0;
  double f_score = 0.0;
};

inline Metrics metrics(const Vec& scores, const Vec& labels) {
  require(scores.size() == labels.size(), "metrics: length mismatch");
  require(scores.size() > 0, "metrics: empty input");
  std::int64_t wrong = 0, tp = 0, fp = 0, fn = 0;
  for (int i = 0; i < scores.size(); ++i) {
    const double pred = scores[i] >= 0.0 ? 1.0 : -1.0;
    if (pred != labels[i]) ++wrong;
    if (pred > 0 && labels[i] > 0) ++tp;
    if (pred > 0 && labels[i] < 0) ++fp;
    if (pred < 0 && labels[i] > 0) ++fn;
  }
  Metrics m;
  m.error_rate = static_cast<double>(wrong) / static_cast<double>(scores.size());
  const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f_score = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Trace serialization. One row per outer iteration; quantities not evaluated
// on a row are NaN and serialize as empty fields.
// ---------------------------------------------------------------------------
struct TraceRow {
  std::int64_t t = 0;
  double data_passes = 0.0;
  double psi = kNaN;
  double moreau_grad_sq = kNaN;
  double test_error = kNaN;
  double f_score = kNaN;
  double wall_ms = kNaN;
};

inline constexpr const char* kTraceHeader = "t,data_passes,psi,moreau_grad_sq,test_error,f_score,wall_ms";

namespace detail {
inline std::string format_field(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << r.t << ',' << detail::format_field(r.data_passes) << ','
        << detail::format_field(r.psi) << ',' << detail::format_field(r.moreau_grad_sq) << ','
        << detail::format_field(r.test_error) << ',' << detail::format_field(r.f_score) << ','
        << detail::format_field(r.wall_ms) << '\n';
  }
  if (!out) throw std::runtime_error("write_trace_csv: write failed for " + path);
}

inline std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_trace_csv: empty file " + path);
  if (line != kTraceHeader) throw std::runtime_error("read_trace_csv: unexpected header in " + path);
  std::vector<TraceRow> rows;
  std::int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) throw parse_error("read_trace_csv: expected 7 fields", lineno);
    auto num = [&](const std::string& s) { return s.empty() ? kNaN : std::stod(s); };
    TraceRow r;
    r.t = std::stoll(fields[0]);
    r.data_passes = num(fields[1]);
    r.psi = num(fields[2]);
    r.moreau_grad_sq = num(fields[3]);
    r.test_error = num(fields[4]);
    r.f_score = num(fields[5]);
    r.wall_ms = num(fields[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace wcc

#endif  // WCC_DATA_IO_HPP
