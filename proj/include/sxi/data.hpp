#ifndef SXI_DATA_HPP
#define SXI_DATA_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sxi/common.hpp"

namespace sxi {

enum class ColumnKind { continuous, categorical, target, identifier };

inline std::string to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::target: return "target";
    case ColumnKind::identifier: return "identifier";
  }
  return "?";
}

inline ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "target") return ColumnKind::target;
  if (s == "identifier") return ColumnKind::identifier;
  throw DataError("unknown column kind: " + s);
}

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::vector<double> values;        // payload; meaningless where missing
  std::vector<char> missing;         // 1 = cell carries no value

  std::size_t n_missing() const {
    return static_cast<std::size_t>(
        std::count(missing.begin(), missing.end(), char(1)));
  }
  double missing_fraction() const {
    return values.empty() ? 0.0
                          : static_cast<double>(n_missing()) / values.size();
  }
};

// Row-major-view tabular dataset. Immutable by convention after construction;
// transforming operations return new tables.
struct DataTable {
  std::vector<Column> columns;

  std::size_t n_rows() const {
    return columns.empty() ? 0 : columns.front().values.size();
  }
  std::size_t n_cols() const { return columns.size(); }

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return static_cast<int>(i);
    return -1;
  }

  int target_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].kind == ColumnKind::target) return static_cast<int>(i);
    return -1;
  }

  // Modeled feature columns: everything except target and identifiers.
  std::vector<int> feature_indices() const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].kind == ColumnKind::continuous ||
          columns[i].kind == ColumnKind::categorical)
        idx.push_back(static_cast<int>(i));
    return idx;
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    for (int i : feature_indices()) names.push_back(columns[i].name);
    return names;
  }

  // Labels from the target column; masked target cells are an error.
  std::vector<int> labels() const {
    int t = target_index();
    if (t < 0) throw DataError("table has no target column");
    const Column& c = columns[t];
    std::vector<int> y(c.values.size());
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      if (c.missing[i]) throw DataError("missing target value at row " +
                                        std::to_string(i));
      y[i] = c.values[i] != 0.0 ? 1 : 0;
    }
    return y;
  }

  DataTable select_rows(const std::vector<std::size_t>& rows) const {
    DataTable out;
    out.columns.reserve(columns.size());
    for (const Column& c : columns) {
      Column nc;
      nc.name = c.name;
      nc.kind = c.kind;
      nc.values.reserve(rows.size());
      nc.missing.reserve(rows.size());
      for (std::size_t r : rows) {
        nc.values.push_back(c.values[r]);
        nc.missing.push_back(c.missing[r]);
      }
      out.columns.push_back(std::move(nc));
    }
    return out;
  }

  void validate(bool require_target = true) const {
    std::unordered_set<std::string> seen;
    int targets = 0;
    for (const Column& c : columns) {
      if (!seen.insert(c.name).second)
        throw DataError("duplicate column name: " + c.name);
      if (c.values.size() != n_rows() || c.missing.size() != n_rows())
        throw DataError("ragged column: " + c.name);
      if (c.kind == ColumnKind::target) {
        ++targets;
        for (std::size_t i = 0; i < c.values.size(); ++i)
          if (!c.missing[i] && c.values[i] != 0.0 && c.values[i] != 1.0)
            throw DataError("non-binary target");
      }
    }
    if (targets > 1) throw DataError("more than one target column");
    if (require_target && targets != 1)
      throw DataError("expected exactly one target column, got " +
                      std::to_string(targets));
  }
};

struct SchemaHints {
  std::string target_name = "SepsisLabel";
  std::vector<std::string> identifier_names = {"Patient_ID"};
  std::unordered_map<std::string, ColumnKind> overrides;
  bool require_target = true;  // off for score-only inputs
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool is_missing_token(const std::string& s) {
  if (s.empty()) return true;
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(c));
  return u == "NA" || u == "NAN";
}

// RFC-4180-ish field split; quoted fields with embedded commas supported.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace detail

inline DataTable load_csv(const std::string& path,
                          const SchemaHints& hints = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  auto header = detail::split_csv_line(line);

  DataTable table;
  for (auto& raw_name : header) {
    Column c;
    c.name = detail::trim(raw_name);
    if (c.name == hints.target_name) {
      c.kind = ColumnKind::target;
    } else if (std::find(hints.identifier_names.begin(),
                         hints.identifier_names.end(),
                         c.name) != hints.identifier_names.end()) {
      c.kind = ColumnKind::identifier;
    } else {
      c.kind = ColumnKind::continuous;
    }
    auto it = hints.overrides.find(c.name);
    if (it != hints.overrides.end()) c.kind = it->second;
    table.columns.push_back(std::move(c));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != table.columns.size())
      throw DataError("ragged row at line " + std::to_string(line_no) +
                      ": expected " + std::to_string(table.columns.size()) +
                      " cells, got " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      Column& c = table.columns[j];
      std::string cell = detail::trim(cells[j]);
      if (detail::is_missing_token(cell)) {
        c.values.push_back(0.0);
        c.missing.push_back(1);
        continue;
      }
      try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        c.values.push_back(v);
        c.missing.push_back(0);
      } catch (const std::exception&) {
        throw DataError("non-numeric cell '" + cell + "' in column " + c.name +
                        " at line " + std::to_string(line_no));
      }
    }
  }
  if (hints.require_target && table.target_index() < 0)
    throw DataError("target column '" + hints.target_name + "' absent");
  table.validate(hints.require_target);
  return table;
}

inline void save_csv(const DataTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    out << (j ? "," : "") << table.columns[j].name;
  out << "\n";
  std::ostringstream cell;
  cell.precision(17);
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j) out << ",";
      const Column& c = table.columns[j];
      if (!c.missing[i]) {
        cell.str("");
        cell << c.values[i];
        out << cell.str();
      }
    }
    out << "\n";
  }
}

// Drops feature columns whose missing fraction exceeds `threshold`.
// Target and identifier columns always survive.
inline std::pair<DataTable, std::vector<std::string>> drop_sparse_columns(
    const DataTable& table, double threshold = 0.40) {
  if (threshold <= 0.0 || threshold >= 1.0)
    throw DataError("sparse threshold must be in (0,1)");
  DataTable out;
  std::vector<std::string> dropped;
  for (const Column& c : table.columns) {
    bool protected_kind = c.kind == ColumnKind::target ||
                          c.kind == ColumnKind::identifier;
    if (!protected_kind && c.missing_fraction() > threshold)
      dropped.push_back(c.name);
    else
      out.columns.push_back(c);
  }
  if (out.feature_indices().empty())
    throw DataError("no features survive threshold");
  return {std::move(out), std::move(dropped)};
}

struct ImputationStats {
  // Per-column fill value, keyed by name; reused verbatim at scoring time.
  std::vector<std::pair<std::string, double>> fills;

  std::optional<double> fill_for(const std::string& name) const {
    for (const auto& [n, v] : fills)
      if (n == name) return v;
    return std::nullopt;
  }
};

inline std::pair<DataTable, ImputationStats> impute(const DataTable& table) {
  DataTable out = table;
  ImputationStats stats;
  for (Column& c : out.columns) {
    if (c.kind == ColumnKind::target || c.kind == ColumnKind::identifier)
      continue;
    double fill;
    if (c.kind == ColumnKind::continuous) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < c.values.size(); ++i)
        if (!c.missing[i]) {
          sum += c.values[i];
          ++n;
        }
      if (n == 0) throw DataError("fully-missing column: " + c.name);
      fill = sum / n;
    } else {
      std::map<double, std::size_t> counts;
      for (std::size_t i = 0; i < c.values.size(); ++i)
        if (!c.missing[i]) ++counts[c.values[i]];
      if (counts.empty()) throw DataError("fully-missing column: " + c.name);
      // Mode; ties resolved to the smallest value (map order).
      fill = counts.begin()->first;
      std::size_t best = counts.begin()->second;
      for (const auto& [v, n] : counts)
        if (n > best) {
          best = n;
          fill = v;
        }
    }
    for (std::size_t i = 0; i < c.values.size(); ++i)
      if (c.missing[i]) {
        c.values[i] = fill;
        c.missing[i] = 0;
      }
    stats.fills.emplace_back(c.name, fill);
  }
  return {std::move(out), std::move(stats)};
}

struct SplitSpec {
  double train_frac = 0.70;
  double test_frac = 0.20;
  double val_frac = 0.10;
  bool stratify = true;
  std::uint64_t seed = 0;

  void validate() const {
    auto in01 = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in01(train_frac) || !in01(test_frac) || !in01(val_frac))
      throw DataError("split fractions must each be in (0,1)");
    if (std::abs(train_frac + test_frac + val_frac - 1.0) > 1e-9)
      throw DataError("split fractions must sum to 1");
  }
};

namespace detail {

// Largest-remainder apportionment of `total` into parts by fraction.
inline std::vector<std::size_t> apportion(std::size_t total,
                                          const std::vector<double>& fracs) {
  std::vector<std::size_t> counts(fracs.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fracs.size(); ++i) {
    double exact = total * fracs[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    rema.emplace_back(-(exact - std::floor(exact)), i);
  }
  std::sort(rema.begin(), rema.end());
  for (std::size_t k = 0; assigned < total; ++k, ++assigned)
    ++counts[rema[k % rema.size()].second];
  return counts;
}

}  // namespace detail

struct SplitResult {
  DataTable train, test, validation;
  std::vector<std::size_t> train_rows, test_rows, validation_rows;
};

inline SplitResult split(const DataTable& table, const SplitSpec& spec) {
  spec.validate();
  std::size_t n = table.n_rows();
  if (n < 10) throw DataError("need at least 10 rows to split");
  auto y = table.labels();
  std::size_t n_pos = static_cast<std::size_t>(
      std::count(y.begin(), y.end(), 1));
  if (n_pos == 0 || n_pos == n) throw DataError("both classes required");

  std::vector<double> fracs = {spec.train_frac, spec.test_frac, spec.val_frac};
  std::vector<std::vector<std::size_t>> parts(3);
  Rng rng(derive_seed(spec.seed, "split"));

  if (spec.stratify) {
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < n; ++i)
        if (y[i] == cls) rows.push_back(i);
      if (rows.size() < 3) throw DataError("cannot stratify: class " +
                                           std::to_string(cls) +
                                           " has fewer rows than parts");
      std::shuffle(rows.begin(), rows.end(), rng);
      auto counts = detail::apportion(rows.size(), fracs);
      std::size_t off = 0;
      for (int p = 0; p < 3; ++p) {
        for (std::size_t k = 0; k < counts[p]; ++k)
          parts[p].push_back(rows[off + k]);
        off += counts[p];
      }
    }
  } else {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    auto counts = detail::apportion(n, fracs);
    std::size_t off = 0;
    for (int p = 0; p < 3; ++p) {
      for (std::size_t k = 0; k < counts[p]; ++k)
        parts[p].push_back(rows[off + k]);
      off += counts[p];
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  SplitResult res;
  res.train = table.select_rows(parts[0]);
  res.test = table.select_rows(parts[1]);
  res.validation = table.select_rows(parts[2]);
  res.train_rows = std::move(parts[0]);
  res.test_rows = std::move(parts[1]);
  res.validation_rows = std::move(parts[2]);
  return res;
}

// Patient-grouped variant: whole identifier groups go to one part. Class
// balance is best-effort only.
inline SplitResult split_grouped(const DataTable& table, const SplitSpec& spec,
                                 const std::string& group_column) {
  spec.validate();
  int g = table.column_index(group_column);
  if (g < 0) throw DataError("group column absent: " + group_column);
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < table.n_rows(); ++i)
    groups[table.columns[g].values[i]].push_back(i);
  std::vector<std::vector<std::size_t>> group_rows;
  for (auto& [k, v] : groups) group_rows.push_back(v);
  Rng rng(derive_seed(spec.seed, "split_grouped"));
  std::shuffle(group_rows.begin(), group_rows.end(), rng);

  std::size_t n = table.n_rows();
  double targets[3] = {spec.train_frac * n, spec.test_frac * n,
                       spec.val_frac * n};
  double filled[3] = {0, 0, 0};
  std::vector<std::vector<std::size_t>> parts(3);
  for (auto& rows : group_rows) {
    // Assign to the part with the largest remaining deficit.
    int best = 0;
    double best_deficit = targets[0] - filled[0];
    for (int p = 1; p < 3; ++p)
      if (targets[p] - filled[p] > best_deficit) {
        best = p;
        best_deficit = targets[p] - filled[p];
      }
    for (auto r : rows) parts[best].push_back(r);
    filled[best] += static_cast<double>(rows.size());
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  SplitResult res;
  res.train = table.select_rows(parts[0]);
  res.test = table.select_rows(parts[1]);
  res.validation = table.select_rows(parts[2]);
  res.train_rows = std::move(parts[0]);
  res.test_rows = std::move(parts[1]);
  res.validation_rows = std::move(parts[2]);
  return res;
}

// Stratified k-fold index pairs (train, holdout). Folds partition all rows.
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
stratified_kfold(const std::vector<int>& y, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("k must be >= 2");
  std::size_t n_pos = std::count(y.begin(), y.end(), 1);
  std::size_t n_neg = y.size() - n_pos;
  if (n_pos < static_cast<std::size_t>(k) ||
      n_neg < static_cast<std::size_t>(k))
    throw DataError("k exceeds minority-class count");

  Rng rng(derive_seed(seed, "kfold"));
  std::vector<std::vector<std::size_t>> folds(k);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) rows.push_back(i);
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < rows.size(); ++i)
      folds[i % k].push_back(rows[i]);
  }
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
      out;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> holdout = folds[f];
    std::sort(holdout.begin(), holdout.end());
    std::vector<std::size_t> train;
    for (int g = 0; g < k; ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    out.emplace_back(std::move(train), std::move(holdout));
  }
  return out;
}

inline std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
stratified_kfold(const DataTable& table, int k, std::uint64_t seed) {
  return stratified_kfold(table.labels(), k, seed);
}

// Two-class Gaussian synthetic table. Class means differ by `separation`
// pooled standard deviations along each of the first ceil(d/2) features;
// the rest are pure noise.
inline DataTable synth_generate(std::size_t n, std::size_t d,
                                double positive_frac, double separation,
                                std::uint64_t seed) {
  if (n < 2 || d < 1) throw DataError("synth: need n >= 2, d >= 1");
  if (positive_frac <= 0.0 || positive_frac >= 1.0)
    throw DataError("synth: positive_frac must be in (0,1)");
  if (separation < 0.0) throw DataError("synth: separation must be >= 0");

  std::size_t n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * positive_frac));
  n_pos = std::min(std::max<std::size_t>(n_pos, 1), n - 1);
  std::size_t informative = (d + 1) / 2;

  Rng rng(derive_seed(seed, "synth"));
  std::normal_distribution<double> gauss(0.0, 1.0);

  DataTable table;
  for (std::size_t j = 0; j < d; ++j) {
    Column c;
    c.name = "Feat" + std::to_string(j + 1);
    c.kind = ColumnKind::continuous;
    c.values.resize(n);
    c.missing.assign(n, 0);
    table.columns.push_back(std::move(c));
  }
  Column target;
  target.name = "SepsisLabel";
  target.kind = ColumnKind::target;
  target.values.resize(n);
  target.missing.assign(n, 0);
  table.columns.push_back(std::move(target));

  // Positive rows first, then shuffled assignment of labels to row slots.
  std::vector<int> y(n, 0);
  std::fill(y.begin(), y.begin() + n_pos, 1);
  std::shuffle(y.begin(), y.end(), rng);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = (y[i] == 1 && j < informative) ? separation : 0.0;
      table.columns[j].values[i] = mean + gauss(rng);
    }
    table.columns[d].values[i] = y[i];
  }
  return table;
}

}  // namespace sxi

#endif  // SXI_DATA_HPP
