#pragma once

// Abalone ingestion, ring-count binning, seeded (stratified) splits, and standardization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uniord/dataset.hpp"
#include "uniord/errors.hpp"

namespace uniord::data {

inline const std::vector<std::string>& abalone_numeric_columns() {
  static const std::vector<std::string> names{"length", "diameter", "height", "whole_weight",
                                              "shucked_weight", "viscera_weight", "shell_weight"};
  return names;
}

/// One parsed UCI Abalone file: sex code, seven measurements, ring count.
struct AbaloneTable {
  std::vector<char> sex;  // 'M', 'F' or 'I'
  Matrix numeric;         // n x 7
  std::vector<int> rings;

  std::size_t size() const { return rings.size(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& column, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line_no) + ": column '" + column + "' is not a number: '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& column, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line_no) + ": column '" + column + "' is not an integer: '" + s + "'");
  }
}

inline std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// Reads the UCI layout: sex, 7 numeric measurements, rings. Comma separated.
inline AbaloneTable load_abalone(const std::string& path, bool has_header = false) {
  std::ifstream in = detail::open_or_throw(path);
  AbaloneTable t;
  const auto& names = abalone_numeric_columns();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 9)
      throw IoError("line " + std::to_string(line_no) + ": expected 9 fields, found " + std::to_string(f.size()));
    if (f[0] != "M" && f[0] != "F" && f[0] != "I")
      throw IoError("line " + std::to_string(line_no) + ": column 'sex' must be M, F or I, got '" + f[0] + "'");
    std::vector<double> row(7);
    for (std::size_t c = 0; c < 7; ++c) row[c] = detail::parse_double(f[c + 1], names[c], line_no);
    t.sex.push_back(f[0][0]);
    t.numeric.append_row(row);
    t.rings.push_back(detail::parse_int(f[8], "rings", line_no));
  }
  if (t.size() == 0) throw IoError("'" + path + "' contains no records");
  return t;
}

/// Ring-count bin boundaries: class i covers rings in [edges[i-1], edges[i]).
inline const std::vector<int>& default_ring_edges() {
  static const std::vector<int> edges{1, 7, 8, 9, 10, 11, 12, 14, 30};
  return edges;
}

struct BinnedLabels {
  std::vector<int> labels;
  std::size_t clamped = 0;  // rings outside [edges.front(), edges.back()) moved to an end bin
};

/// Monotone interval binning of ring counts into edges.size() - 1 classes.
inline BinnedLabels bin_rings(const std::vector<int>& rings, const std::vector<int>& edges) {
  if (edges.size() < 3) throw DomainError("bin_rings: need at least 2 intervals");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i] <= edges[i - 1]) throw DomainError("bin_rings: edges must be strictly increasing");
  const int k = static_cast<int>(edges.size()) - 1;
  BinnedLabels out;
  out.labels.reserve(rings.size());
  for (int r : rings) {
    if (r < edges.front() || r >= edges.back()) ++out.clamped;
    // number of interior edges <= r, plus one
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, r);
    out.labels.push_back(std::clamp(static_cast<int>(it - (edges.begin() + 1)) + 1, 1, k));
  }
  return out;
}

/// Every placement of k contiguous ring intervals whose class counts all lie in [lo, hi].
///
/// Intervals are unions of consecutive observed ring values; returned edges use the same
/// half-open convention as bin_rings, spanning [min ring, max ring + 1).
inline std::vector<std::vector<int>> search_ring_edges(const std::vector<int>& rings, int k, std::size_t lo,
                                                       std::size_t hi) {
  std::map<int, std::size_t> hist;
  for (int r : rings) ++hist[r];
  std::vector<int> values;
  std::vector<std::size_t> counts;
  for (const auto& [v, c] : hist) {
    values.push_back(v);
    counts.push_back(c);
  }
  std::vector<std::vector<int>> found;
  std::vector<int> cuts;  // index into values where each class starts
  const std::size_t n = values.size();
  // depth-first over start positions of each class
  auto recurse = [&](auto&& self, std::size_t start, int cls) -> void {
    if (cls == k) {
      if (start == n) {
        std::vector<int> edges;
        for (int c : cuts) edges.push_back(values[static_cast<std::size_t>(c)]);
        edges.push_back(values.back() + 1);
        found.push_back(std::move(edges));
      }
      return;
    }
    std::size_t total = 0;
    for (std::size_t end = start; end < n; ++end) {
      total += counts[end];
      if (total > hi) break;
      if (total >= lo) {
        cuts.push_back(static_cast<int>(start));
        self(self, end + 1, cls + 1);
        cuts.pop_back();
      }
    }
  };
  recurse(recurse, 0, 0);
  return found;
}

enum class SexEncoding { Drop, OneHot };

/// Features plus labels over k classes, with column names.
struct OrdinalDataset {
  LabeledSet data;
  std::vector<std::string> feature_names;
};

inline OrdinalDataset abalone_dataset(const AbaloneTable& t, const std::vector<int>& edges, SexEncoding sex,
                                      std::size_t* clamped = nullptr) {
  const BinnedLabels b = bin_rings(t.rings, edges);
  if (clamped) *clamped = b.clamped;
  OrdinalDataset ds;
  ds.data.k = static_cast<int>(edges.size()) - 1;
  ds.data.y = b.labels;
  ds.feature_names = abalone_numeric_columns();
  if (sex == SexEncoding::OneHot) {
    ds.feature_names.insert(ds.feature_names.end(), {"sex_m", "sex_f", "sex_i"});
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<double> row(t.numeric.row(i).begin(), t.numeric.row(i).end());
    if (sex == SexEncoding::OneHot) {
      row.push_back(t.sex[i] == 'M' ? 1.0 : 0.0);
      row.push_back(t.sex[i] == 'F' ? 1.0 : 0.0);
      row.push_back(t.sex[i] == 'I' ? 1.0 : 0.0);
    }
    ds.data.X.append_row(row);
  }
  ds.data.check();
  return ds;
}

/// CSV with a header row, numeric feature columns and an integer `label` column in 1..k.
inline OrdinalDataset load_labeled_csv(const std::string& path, int k = 0) {
  std::ifstream in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  const auto header = detail::split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw IoError("'" + path + "' has no 'label' column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  OrdinalDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) ds.feature_names.push_back(header[c]);
  std::size_t line_no = 1;
  int max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != header.size())
      throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
    std::vector<double> row;
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (c == label_col) continue;
      row.push_back(detail::parse_double(f[c], header[c], line_no));
    }
    const int label = detail::parse_int(f[label_col], "label", line_no);
    if (label < 1) throw IoError("line " + std::to_string(line_no) + ": column 'label' must be >= 1");
    max_label = std::max(max_label, label);
    ds.data.X.append_row(row);
    ds.data.y.push_back(label);
  }
  if (ds.data.y.empty()) throw IoError("'" + path + "' contains no records");
  ds.data.k = k > 0 ? k : max_label;
  if (ds.data.k < 2) throw IoError("'" + path + "': need at least 2 classes");
  ds.data.check();
  return ds;
}

struct SplitSpec {
  double train = 0.8, val = 0.1, test = 0.1;
  std::uint64_t seed = 1;
  bool stratified = true;

  void validate() const {
    if (!(train > 0.0 && val > 0.0 && test > 0.0)) throw ConfigError("SplitSpec: fractions must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("SplitSpec: fractions must sum to 1");
  }
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
  bool stratified = false;  // false when stratification was requested but impossible
  bool operator==(const SplitIndices&) const = default;
};

namespace detail {

inline void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(rng() % i)]);
}

inline void allot(const std::vector<std::size_t>& pool, const SplitSpec& spec, SplitIndices& out) {
  const auto n = pool.size();
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(spec.val * static_cast<double>(n))));
  out.train.insert(out.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.insert(out.val.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train),
                 pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.insert(out.test.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), pool.end());
}

}  // namespace detail

/// Disjoint train/val/test index sets, deterministic per seed. Index lists are sorted.
inline SplitIndices split(const LabeledSet& data, const SplitSpec& spec, std::string* warning = nullptr) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SplitIndices out;
  bool stratify = spec.stratified;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.k));
  for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data.y[i] - 1)].push_back(i);
  if (stratify) {
    for (const auto& members : by_class)
      if (!members.empty() && members.size() < 3) stratify = false;
    if (!stratify && warning) *warning = "a class has fewer than 3 members; falling back to an unstratified split";
  }
  if (stratify) {
    for (auto& members : by_class) {
      detail::seeded_shuffle(members, rng);
      detail::allot(members, spec, out);
    }
  } else {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    detail::seeded_shuffle(all, rng);
    detail::allot(all, spec, out);
  }
  out.stratified = stratify;
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Per-feature mean and standard deviation estimated on one index set.
struct Standardizer {
  std::vector<double> mean, stddev;

  static Standardizer fit(const Matrix& X, std::span<const std::size_t> rows) {
    if (rows.empty()) throw DomainError("Standardizer::fit: no rows");
    Standardizer s;
    const std::size_t d = X.cols();
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (std::size_t r : rows)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += X(r, c);
    for (double& m : s.mean) m /= static_cast<double>(rows.size());
    for (std::size_t r : rows)
      for (std::size_t c = 0; c < d; ++c) s.stddev[c] += (X(r, c) - s.mean[c]) * (X(r, c) - s.mean[c]);
    for (double& v : s.stddev) {
      v = std::sqrt(v / static_cast<double>(rows.size()));
      if (!(v > 0.0)) v = 1.0;  // constant column
    }
    return s;
  }

  Matrix apply(const Matrix& X) const {
    Matrix out = X;
    for (std::size_t r = 0; r < X.rows(); ++r)
      for (std::size_t c = 0; c < X.cols(); ++c) out(r, c) = (X(r, c) - mean[c]) / stddev[c];
    return out;
  }

  Matrix invert(const Matrix& Z) const {
    Matrix out = Z;
    for (std::size_t r = 0; r < Z.rows(); ++r)
      for (std::size_t c = 0; c < Z.cols(); ++c) out(r, c) = Z(r, c) * stddev[c] + mean[c];
    return out;
  }
};

/// Standardized train/val/test sets; statistics come from the training rows only.
struct PreparedSplit {
  LabeledSet train, val, test;
  Standardizer scaler;
  SplitIndices indices;
};

inline PreparedSplit prepare(const LabeledSet& data, const SplitIndices& idx) {
  PreparedSplit ps;
  ps.indices = idx;
  ps.scaler = Standardizer::fit(data.X, idx.train);
  const Matrix Z = ps.scaler.apply(data.X);
  const LabeledSet scaled{Z, data.y, data.k};
  ps.train = scaled.subset(idx.train);
  ps.val = scaled.subset(idx.val);
  ps.test = scaled.subset(idx.test);
  return ps;
}

// Sidecar split cache:
//   # uniord-splits v1
//   seed <s>
//   train <n> <i_1> ... <i_n>
//   val <n> ...
//   test <n> ...
// repeated once per seed.

inline void write_splits(const std::string& path, const std::map<std::uint64_t, SplitIndices>& splits) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "# uniord-splits v1\n";
  for (const auto& [seed, s] : splits) {
    out << "seed " << seed << '\n';
    const auto emit = [&out](const char* name, const std::vector<std::size_t>& v) {
      out << name << ' ' << v.size();
      for (std::size_t i : v) out << ' ' << i;
      out << '\n';
    };
    emit("train", s.train);
    emit("val", s.val);
    emit("test", s.test);
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::map<std::uint64_t, SplitIndices> read_splits(const std::string& path) {
  std::ifstream in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || line != "# uniord-splits v1") throw IoError("'" + path + "': not a split cache");
  std::map<std::uint64_t, SplitIndices> out;
  SplitIndices* current = nullptr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "seed") {
      std::uint64_t seed = 0;
      ss >> seed;
      current = &out[seed];
      continue;
    }
    if (!current) throw IoError("'" + path + "': index list before seed line");
    std::vector<std::size_t>* dst = tag == "train" ? &current->train : tag == "val" ? &current->val
                                  : tag == "test" ? &current->test : nullptr;
    if (!dst) throw IoError("'" + path + "': unknown tag '" + tag + "'");
    std::size_t n = 0;
    ss >> n;
    dst->resize(n);
    for (auto& i : *dst) ss >> i;
    if (!ss) throw IoError("'" + path + "': truncated '" + tag + "' list");
  }
  return out;
}

}  // namespace uniord::data
