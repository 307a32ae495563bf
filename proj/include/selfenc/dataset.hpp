#pragma once

// Dataset ingestion and handling: CSV + schema sidecar loading, one-hot
// encoding of categorical columns, min-max normalization, affine transforms
// of the feature space, and stratified k-fold splits. Datasets are immutable
// after loading; every operation returns a new value.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfenc/matrix.hpp"
#include "selfenc/rng.hpp"
#include "selfenc/self_encoder.hpp"
#include "selfenc/warn.hpp"

namespace selfenc {

enum class ColumnKind { kNumeric, kCategorical, kLabel };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<std::string> categories;  // categorical: vocabulary, first-appearance order
  std::size_t encoded_offset = 0;       // first encoded feature column
  std::size_t encoded_width = 1;        // 1 for numeric, vocabulary size for categorical
};

struct Dataset {
  std::string name;
  Matrix features;                       // n x d after encoding
  std::vector<int> labels;               // 0-based contiguous class ids
  std::vector<ColumnSchema> schema;      // feature columns only, in file order
  std::vector<std::string> class_names;  // first-appearance order

  std::size_t size() const { return features.rows; }
  std::size_t dim() const { return features.cols; }
  std::size_t class_count() const { return class_names.size(); }
};

// ---------------------------------------------------------------------------
// Schema sidecar: one `column = kind` line per CSV column, in file order,
// where kind is numeric, categorical or label. '#' starts a comment.

struct SchemaSpec {
  std::vector<std::pair<std::string, ColumnKind>> columns;
  std::size_t label_column = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline bool parse_cell_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

}  // namespace detail

inline SchemaSpec parse_schema(std::istream& is, const std::string& origin = "<schema>") {
  SchemaSpec spec;
  bool saw_label = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected 'column = kind'");
    const std::string name = detail::trim(line.substr(0, eq));
    const std::string kind_str = detail::trim(line.substr(eq + 1));
    ColumnKind kind;
    if (kind_str == "numeric")
      kind = ColumnKind::kNumeric;
    else if (kind_str == "categorical")
      kind = ColumnKind::kCategorical;
    else if (kind_str == "label")
      kind = ColumnKind::kLabel;
    else
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown kind '" +
                               kind_str + "' (want numeric, categorical or label)");
    if (name.empty())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty column name");
    if (kind == ColumnKind::kLabel) {
      if (saw_label)
        throw std::runtime_error(origin + ": more than one label column");
      saw_label = true;
      spec.label_column = spec.columns.size();
    }
    spec.columns.emplace_back(name, kind);
  }
  if (spec.columns.empty()) throw std::runtime_error(origin + ": empty schema");
  if (!saw_label) throw std::runtime_error(origin + ": schema names no label column");
  return spec;
}

inline SchemaSpec load_schema(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_schema: cannot open " + path);
  return parse_schema(is, path);
}

// ---------------------------------------------------------------------------
// One-hot block for a categorical column under a fixed vocabulary.

inline Matrix one_hot(const std::vector<std::string>& values,
                      const std::vector<std::string>& vocabulary) {
  if (values.empty()) throw std::invalid_argument("one_hot: no values");
  if (vocabulary.empty()) throw std::invalid_argument("one_hot: empty vocabulary");
  Matrix block(values.size(), vocabulary.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), values[i]);
    if (it == vocabulary.end())
      throw std::invalid_argument("one_hot: value '" + values[i] + "' not in vocabulary");
    block(i, static_cast<std::size_t>(it - vocabulary.begin())) = 1.0;
  }
  return block;
}

// ---------------------------------------------------------------------------
// CSV loading. Plain comma-separated files with a header row; cells holding
// '?' or nothing count as missing. Rows with missing or unparseable numeric
// cells are rejected with their file line number; ragged rows are a hard
// error.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream iss(line);
  while (std::getline(iss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

inline Dataset load_csv(std::istream& is, const SchemaSpec& spec,
                        const std::string& origin = "<csv>") {
  std::string header_line;
  if (!std::getline(is, header_line)) throw std::runtime_error(origin + ": empty file");
  const std::vector<std::string> header = detail::split_csv_line(header_line);
  if (header.size() != spec.columns.size())
    throw std::runtime_error(origin + ": header has " + std::to_string(header.size()) +
                             " columns, schema describes " +
                             std::to_string(spec.columns.size()));
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] != spec.columns[c].first)
      throw std::runtime_error(origin + ": column " + std::to_string(c + 1) + " is '" +
                               header[c] + "' but schema says '" + spec.columns[c].first + "'");

  const std::size_t n_cols = spec.columns.size();
  // Raw column stores, filled row by row from the accepted rows.
  std::vector<std::vector<double>> numeric_cols(n_cols);
  std::vector<std::vector<std::string>> string_cols(n_cols);

  Dataset ds;
  std::string line;
  std::size_t line_no = 1;
  std::size_t accepted = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != n_cols)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": ragged row with " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(n_cols));
    // Validate the whole row before committing any column.
    std::vector<double> numeric_row(n_cols, 0.0);
    bool reject = false;
    for (std::size_t c = 0; c < n_cols && !reject; ++c) {
      const std::string& cell = cells[c];
      if (cell.empty() || cell == "?") {
        warn("load_csv: " + origin + ":" + std::to_string(line_no) +
             ": rejected row (missing value in column '" + spec.columns[c].first + "')");
        reject = true;
      } else if (spec.columns[c].second == ColumnKind::kNumeric &&
                 !detail::parse_cell_double(cell, numeric_row[c])) {
        warn("load_csv: " + origin + ":" + std::to_string(line_no) +
             ": rejected row (cannot parse '" + cell + "' in numeric column '" +
             spec.columns[c].first + "')");
        reject = true;
      }
    }
    if (reject) continue;
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (spec.columns[c].second == ColumnKind::kNumeric)
        numeric_cols[c].push_back(numeric_row[c]);
      else
        string_cols[c].push_back(cells[c]);
    }
    ++accepted;
  }
  if (accepted == 0) throw std::runtime_error(origin + ": no usable data rows");

  // Labels: 0-based ids in first-appearance order.
  for (const std::string& v : string_cols[spec.label_column]) {
    auto it = std::find(ds.class_names.begin(), ds.class_names.end(), v);
    if (it == ds.class_names.end()) {
      ds.class_names.push_back(v);
      ds.labels.push_back(static_cast<int>(ds.class_names.size()) - 1);
    } else {
      ds.labels.push_back(static_cast<int>(it - ds.class_names.begin()));
    }
  }

  // Feature schema with vocabularies, then the encoded width.
  std::size_t width = 0;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (spec.columns[c].second == ColumnKind::kLabel) continue;
    ColumnSchema col;
    col.name = spec.columns[c].first;
    col.kind = spec.columns[c].second;
    col.encoded_offset = width;
    if (col.kind == ColumnKind::kCategorical) {
      for (const std::string& v : string_cols[c])
        if (std::find(col.categories.begin(), col.categories.end(), v) == col.categories.end())
          col.categories.push_back(v);
      col.encoded_width = col.categories.size();
    } else {
      col.encoded_width = 1;
    }
    width += col.encoded_width;
    ds.schema.push_back(std::move(col));
  }

  ds.features = Matrix(accepted, width);
  for (const ColumnSchema& col : ds.schema) {
    // Recover the raw store index: schema skips the label column.
    std::size_t c = 0;
    for (; c < n_cols; ++c)
      if (spec.columns[c].first == col.name && spec.columns[c].second != ColumnKind::kLabel) break;
    if (col.kind == ColumnKind::kNumeric) {
      for (std::size_t i = 0; i < accepted; ++i)
        ds.features(i, col.encoded_offset) = numeric_cols[c][i];
    } else {
      const Matrix block = one_hot(string_cols[c], col.categories);
      for (std::size_t i = 0; i < accepted; ++i)
        for (std::size_t j = 0; j < col.encoded_width; ++j)
          ds.features(i, col.encoded_offset + j) = block(i, j);
    }
  }
  return ds;
}

inline Dataset load_csv(const std::string& csv_path, const SchemaSpec& spec) {
  std::ifstream is(csv_path);
  if (!is) throw std::runtime_error("load_csv: cannot open " + csv_path);
  Dataset ds = load_csv(is, spec, csv_path);
  // Name = file stem.
  std::size_t slash = csv_path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? csv_path : csv_path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  ds.name = dot == std::string::npos ? base : base.substr(0, dot);
  return ds;
}

inline Dataset load_csv(const std::string& csv_path, const std::string& schema_path) {
  return load_csv(csv_path, load_schema(schema_path));
}

// ---------------------------------------------------------------------------

// Maps every numeric column to [0,1] by (x - min) / (max - min); constant
// columns map to 0. One-hot blocks pass through untouched. Idempotent.
inline Dataset min_max_normalize(const Dataset& d) {
  Dataset out = d;
  for (const ColumnSchema& col : d.schema) {
    if (col.kind != ColumnKind::kNumeric) continue;
    const std::size_t j = col.encoded_offset;
    double lo = d.features(0, j), hi = d.features(0, j);
    for (std::size_t i = 1; i < d.features.rows; ++i) {
      lo = std::min(lo, d.features(i, j));
      hi = std::max(hi, d.features(i, j));
    }
    for (std::size_t i = 0; i < d.features.rows; ++i)
      out.features(i, j) = hi > lo ? (d.features(i, j) - lo) / (hi - lo) : 0.0;
  }
  return out;
}

// Applies x -> Mx + v to every feature row; labels and schema unchanged.
inline Dataset affine_transform(const Dataset& d, const AffineTransform& t) {
  if (t.m.rows != d.dim() || t.m.cols != d.dim() || t.v.size() != d.dim())
    throw std::invalid_argument("affine_transform: transform is " + shape_str(t.m) +
                                ", dataset features are " + shape_str(d.features));
  Dataset out = d;
  for (std::size_t i = 0; i < d.features.rows; ++i) {
    const std::vector<double> image = t.apply(d.features.row_copy(i));
    std::copy(image.begin(), image.end(), out.features.row_ptr(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratified k-fold split.

struct FoldSplit {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> test_folds;  // ascending within each fold

  std::vector<std::size_t> train_indices(std::size_t fold, std::size_t n) const {
    std::vector<bool> in_test(n, false);
    for (std::size_t i : test_folds.at(fold)) in_test[i] = true;
    std::vector<std::size_t> train;
    train.reserve(n - test_folds[fold].size());
    for (std::size_t i = 0; i < n; ++i)
      if (!in_test[i]) train.push_back(i);
    return train;
  }
};

// Test folds partition the indices; fold sizes differ by at most one, and
// each fold holds floor or ceil of count/K samples of every class. Classes
// with fewer samples than K are spread as evenly as possible. Deterministic
// given the rng seed.
inline FoldSplit stratified_kfold(const Dataset& d, std::size_t k, Rng& rng) {
  const std::size_t n = d.size();
  if (k < 2) throw std::invalid_argument("stratified_kfold: need K >= 2");
  if (k > n)
    throw std::invalid_argument("stratified_kfold: K=" + std::to_string(k) + " exceeds " +
                                std::to_string(n) + " samples");
  FoldSplit split;
  split.k = k;
  split.test_folds.assign(k, {});

  // Per-class index pools, shuffled.
  std::vector<std::vector<std::size_t>> pools(d.class_count());
  for (std::size_t i = 0; i < n; ++i) pools[static_cast<std::size_t>(d.labels[i])].push_back(i);
  // Extras rotate across folds so total sizes stay within one of each other.
  std::size_t next_extra = 0;
  for (std::vector<std::size_t>& pool : pools) {
    rng.shuffle(pool);
    const std::size_t base = pool.size() / k;
    const std::size_t extra = pool.size() % k;
    std::size_t taken = 0;
    for (std::size_t f = 0; f < k; ++f) {
      std::size_t quota = base;
      // Folds next_extra .. next_extra+extra-1 (mod k) get one more.
      const std::size_t offset = (f + k - next_extra % k) % k;
      if (offset < extra) quota += 1;
      for (std::size_t q = 0; q < quota; ++q) split.test_folds[f].push_back(pool[taken++]);
    }
    next_extra = (next_extra + extra) % k;
  }
  for (std::vector<std::size_t>& fold : split.test_folds) std::sort(fold.begin(), fold.end());
  return split;
}

// Restricts a dataset to the given rows (keeps schema and class names).
inline Dataset select_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw std::invalid_argument("select_rows: no rows selected");
  Dataset out;
  out.name = d.name;
  out.schema = d.schema;
  out.class_names = d.class_names;
  out.features = Matrix(rows.size(), d.dim());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= d.size())
      throw std::invalid_argument("select_rows: index " + std::to_string(rows[i]) +
                                  " out of range");
    std::copy(d.features.row_ptr(rows[i]), d.features.row_ptr(rows[i]) + d.dim(),
              out.features.row_ptr(i));
    out.labels.push_back(d.labels[rows[i]]);
  }
  return out;
}

}  // namespace selfenc
