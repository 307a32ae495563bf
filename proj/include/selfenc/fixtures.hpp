#pragma once

// Small built-in datasets used by the demos and tests: two one-hot encoded
// categorical tables where Euclidean distance ties but the learned ranking
// does not, and the four corners of a square for region diagrams.

#include <string>
#include <vector>

#include "selfenc/dataset.hpp"
#include "selfenc/matrix.hpp"

namespace selfenc {
namespace fixtures {

// Five samples over two categorical variables, one-hot encoded. The first
// variable has two levels in the second table (columns 0-1) and the second
// variable three levels (last three columns). In the first table the first
// variable's leading level is dropped, leaving four columns.
inline Matrix categorical_x1() {
  return Matrix::from_rows({
      {0, 0, 0, 1},
      {0, 0, 1, 0},
      {0, 1, 0, 0},
      {1, 0, 0, 1},
      {1, 0, 1, 0},
  });
}

inline std::vector<double> x1_query() { return {1, 1, 0, 0}; }

inline Matrix categorical_x2() {
  return Matrix::from_rows({
      {1, 0, 0, 0, 1},
      {1, 0, 0, 1, 0},
      {1, 0, 1, 0, 0},
      {0, 1, 0, 0, 1},
      {0, 1, 0, 1, 0},
  });
}

inline std::vector<double> x2_query() { return {0, 1, 1, 0, 0}; }

// Corners of the axis-aligned square with side 2 centred at the origin.
inline Matrix square_points() {
  return Matrix::from_rows({
      {1, 1},
      {1, -1},
      {-1, 1},
      {-1, -1},
  });
}

// Wraps a plain matrix + labels as a Dataset with synthesized numeric
// columns f0..f{d-1}, for harness code that wants schema metadata.
inline Dataset make_dataset(std::string name, Matrix features, std::vector<int> labels) {
  if (features.rows != labels.size())
    throw std::invalid_argument("make_dataset: " + std::to_string(features.rows) +
                                " rows but " + std::to_string(labels.size()) + " labels");
  Dataset ds;
  ds.name = std::move(name);
  int max_label = -1;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("make_dataset: negative label");
    max_label = std::max(max_label, y);
  }
  for (int c = 0; c <= max_label; ++c) ds.class_names.push_back("class" + std::to_string(c));
  for (std::size_t j = 0; j < features.cols; ++j) {
    ColumnSchema col;
    col.name = "f" + std::to_string(j);
    col.kind = ColumnKind::kNumeric;
    col.encoded_offset = j;
    col.encoded_width = 1;
    ds.schema.push_back(std::move(col));
  }
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  return ds;
}

}  // namespace fixtures
}  // namespace selfenc
