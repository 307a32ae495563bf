#include "selfenc/voronoi.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "selfenc/fixtures.hpp"
#include "selfenc/matrix.hpp"
#include "selfenc/rng.hpp"
#include "selfenc/self_encoder.hpp"

namespace selfenc {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  EXPECT_TRUE(is.good()) << path;
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& suffix) {
  static int counter = 0;
  return testing::TempDir() + "selfenc_voronoi_" + std::to_string(++counter) + suffix;
}

SelfEncoderConfig quick_config(std::uint64_t seed) {
  SelfEncoderConfig cfg;
  cfg.schedule.initial_lr = 0.5;
  cfg.schedule.max_epochs = 400;
  cfg.seed = seed;
  return cfg;
}

// Zero-weight model: softmax output is uniform over the anchors everywhere.
SelfEncoderModel uniform_model(std::size_t n_anchors) {
  SelfEncoderModel model;
  DenseLayer layer;
  layer.weights = Matrix(n_anchors, 2);
  layer.bias.assign(n_anchors, 0.0);
  layer.activation = Activation::kSoftMax;
  model.network.layers.push_back(layer);
  model.anchor_features = Matrix(n_anchors, 2);
  for (std::size_t i = 0; i < n_anchors; ++i) {
    model.anchor_indices.push_back(i);
    model.anchor_features(i, 0) = static_cast<double>(i);
  }
  return model;
}

TEST(GridSpec, RejectsDegenerateGrids) {
  GridSpec g;
  g.width = 1;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.width = 2;
  g.height = 1;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.height = 2;
  EXPECT_NO_THROW(g.validate());
  g.x_min = 1.0;
  g.x_max = 1.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.x_max = 2.0;
  g.y_min = 5.0;
  g.y_max = -5.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(GridSpec, PixelCentersPinned) {
  GridSpec g;  // [-1,1] x [-1,1]
  g.width = 2;
  g.height = 2;
  const Matrix c = pixel_centers(g);
  ASSERT_EQ(c.rows, 4u);
  // Row-major, top row first.
  EXPECT_DOUBLE_EQ(c(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(c(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(c(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(c(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(c(2, 0), -0.5);
  EXPECT_DOUBLE_EQ(c(2, 1), -0.5);
  EXPECT_DOUBLE_EQ(c(3, 0), 0.5);
  EXPECT_DOUBLE_EQ(c(3, 1), -0.5);
}

TEST(GridSpec, AroundPointsPadsEachAxisByItsSpan) {
  const Matrix pts = Matrix::from_rows({{0.0, 0.0}, {2.0, 4.0}});
  const GridSpec g = GridSpec::around_points(pts, 0.25, 10, 10);
  EXPECT_DOUBLE_EQ(g.x_min, -0.5);
  EXPECT_DOUBLE_EQ(g.x_max, 2.5);
  EXPECT_DOUBLE_EQ(g.y_min, -1.0);
  EXPECT_DOUBLE_EQ(g.y_max, 5.0);
  EXPECT_EQ(g.width, 10u);
  EXPECT_EQ(g.height, 10u);
}

TEST(GridSpec, AroundPointsHandlesZeroSpan) {
  const Matrix pts = Matrix::from_rows({{1.0, 2.0}});
  const GridSpec g = GridSpec::around_points(pts, 0.25);
  EXPECT_DOUBLE_EQ(g.x_min, 0.75);
  EXPECT_DOUBLE_EQ(g.x_max, 1.25);
  EXPECT_DOUBLE_EQ(g.y_min, 1.75);
  EXPECT_DOUBLE_EQ(g.y_max, 2.25);
  EXPECT_THROW(GridSpec::around_points(Matrix(2, 3)), std::invalid_argument);
}

TEST(AssignEuclidean, SingleAnchorOwnsEverything) {
  const Matrix pt = Matrix::from_rows({{0.3, -0.7}});
  GridSpec g;
  g.width = 8;
  g.height = 8;
  for (std::uint32_t r : assign_euclidean(pt, pixel_centers(g))) EXPECT_EQ(r, 0u);
}

TEST(AssignEuclidean, SquareCornersSplitIntoQuadrants) {
  // Anchors (1,1), (1,-1), (-1,1), (-1,-1): the diagram is the four
  // quadrants, and no pixel center of an even-sized grid lies on an axis.
  const Matrix corners = fixtures::square_points();
  GridSpec g;
  g.x_min = -2.0;
  g.x_max = 2.0;
  g.y_min = -2.0;
  g.y_max = 2.0;
  g.width = 50;
  g.height = 50;
  const Matrix centers = pixel_centers(g);
  const std::vector<std::uint32_t> regions = assign_euclidean(corners, centers);
  for (std::size_t i = 0; i < centers.rows; ++i) {
    const double x = centers(i, 0), y = centers(i, 1);
    const std::uint32_t expect = x > 0.0 ? (y > 0.0 ? 0u : 1u) : (y > 0.0 ? 2u : 3u);
    ASSERT_EQ(regions[i], expect) << "pixel at (" << x << ", " << y << ")";
  }
}

TEST(AssignEuclidean, MatchesHalfPlaneOracleForTwoAnchors) {
  // A pixel belongs to anchor a over anchor b iff it lies on a's side of
  // their perpendicular bisector: 2 q.(b - a) < |b|^2 - |a|^2.
  const Matrix pts = Matrix::from_rows({{-0.5, 0.1}, {0.7, 0.3}});
  GridSpec g;
  g.width = 33;
  g.height = 29;
  const Matrix centers = pixel_centers(g);
  const std::vector<std::uint32_t> regions = assign_euclidean(pts, centers);
  const double rhs = (pts(1, 0) * pts(1, 0) + pts(1, 1) * pts(1, 1)) -
                     (pts(0, 0) * pts(0, 0) + pts(0, 1) * pts(0, 1));
  for (std::size_t i = 0; i < centers.rows; ++i) {
    const double lhs =
        2.0 * (centers(i, 0) * (pts(1, 0) - pts(0, 0)) + centers(i, 1) * (pts(1, 1) - pts(0, 1)));
    ASSERT_NE(lhs, rhs) << "oracle hit the bisector exactly; pick other anchors";
    ASSERT_EQ(regions[i], lhs < rhs ? 0u : 1u) << "pixel " << i;
  }
}

TEST(AssignEuclidean, TiesGoToTheLowestAnchorIndex) {
  // Duplicate anchors tie everywhere.
  const Matrix dup = Matrix::from_rows({{0.2, 0.4}, {0.2, 0.4}});
  GridSpec g;
  g.width = 5;
  g.height = 5;
  for (std::uint32_t r : assign_euclidean(dup, pixel_centers(g))) EXPECT_EQ(r, 0u);

  // Width 3 on [-1,1] puts the middle pixel column exactly on x = 0, the
  // bisector of (-1,0) and (1,0).
  const Matrix pair = Matrix::from_rows({{-1.0, 0.0}, {1.0, 0.0}});
  GridSpec g3;
  g3.width = 3;
  g3.height = 3;
  const Matrix centers = pixel_centers(g3);
  const std::vector<std::uint32_t> regions = assign_euclidean(pair, centers);
  for (std::size_t i = 0; i < centers.rows; ++i) {
    if (centers(i, 0) == 0.0) {
      EXPECT_EQ(regions[i], 0u) << "tie must resolve to the lower index";
    }
  }
}

TEST(AssignEuclidean, DimensionMismatchThrows) {
  EXPECT_THROW(assign_euclidean(Matrix(2, 3), Matrix(4, 2)), std::invalid_argument);
}

TEST(AssignSelfEncoder, MatchesPerRowArgmaxAcrossChunks) {
  const SelfEncoderModel model = fit(fixtures::square_points(), quick_config(3));
  Rng rng(17);
  const std::size_t n = 5000;  // crosses the internal batching boundary
  Matrix queries(n, 2);
  for (double& v : queries.data) v = rng.uniform(-2.0, 2.0);
  const std::vector<std::uint32_t> regions = assign_self_encoder(model, queries);
  ASSERT_EQ(regions.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix p = predict(model.network, Matrix::row_vector(queries.row_copy(i)));
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.cols; ++j)
      if (p(0, j) > p(0, best)) best = j;
    ASSERT_EQ(regions[i], best) << "query " << i;
  }
}

TEST(AssignSelfEncoder, UniformProbabilitiesResolveToIndexZero) {
  const SelfEncoderModel model = uniform_model(4);
  GridSpec g;
  g.width = 6;
  g.height = 6;
  for (std::uint32_t r : assign_self_encoder(model, pixel_centers(g))) EXPECT_EQ(r, 0u);
}

TEST(AssignSelfEncoder, DimensionMismatchThrows) {
  const SelfEncoderModel model = uniform_model(3);
  EXPECT_THROW(assign_self_encoder(model, Matrix(4, 5)), std::invalid_argument);
}

TEST(RegionMap, BuildersCarryGridAndAnchors) {
  const Matrix corners = fixtures::square_points();
  GridSpec g;
  g.width = 10;
  g.height = 12;
  const RegionMap map = region_map_euclidean(corners, g);
  EXPECT_EQ(map.region.size(), 120u);
  EXPECT_EQ(map.points.rows, 4u);
  EXPECT_EQ(map.grid.height, 12u);
  EXPECT_THROW(region_map_euclidean(Matrix(3, 4), g), std::invalid_argument);

  const RegionMap se = region_map_self_encoder(uniform_model(4), g);
  EXPECT_EQ(se.region.size(), 120u);
  EXPECT_EQ(se.points.rows, 4u);
}

TEST(RegionMap, SelfEncoderDiagramOfSeparatedAnchorsIsNearVoronoi) {
  // Far-apart anchors: the learned identity regions should essentially
  // reproduce the Euclidean diagram.
  const Matrix corners = fixtures::square_points();
  GridSpec g;
  g.x_min = -2.0;
  g.x_max = 2.0;
  g.y_min = -2.0;
  g.y_max = 2.0;
  g.width = 40;
  g.height = 40;
  const SelfEncoderModel model = fit(corners, quick_config(1));
  const double agree =
      region_agreement(region_map_self_encoder(model, g), region_map_euclidean(corners, g));
  EXPECT_GE(agree, 0.9);
}

TEST(RegionAgreement, CountsMatchingPixels) {
  GridSpec g;
  g.width = 4;
  g.height = 4;
  RegionMap a;
  a.grid = g;
  a.region.assign(16, 1);
  RegionMap b = a;
  EXPECT_DOUBLE_EQ(region_agreement(a, b), 1.0);
  b.region[5] = 2;
  EXPECT_DOUBLE_EQ(region_agreement(a, b), 15.0 / 16.0);
  RegionMap c;
  c.grid = g;
  c.grid.width = 8;
  c.region.assign(32, 1);
  EXPECT_THROW(region_agreement(a, c), std::invalid_argument);
}

TEST(TransferWeights, TransportedDiagramMatchesTheOriginal) {
  // Fit in original coordinates, transfer the first layer to shear-and-shift
  // coordinates, and evaluate the transferred model at the transported pixel
  // centers: probabilities match to float noise and the diagram is identical
  // away from region boundaries.
  const SelfEncoderModel model = fit(fixtures::square_points(), quick_config(7));
  AffineTransform t;
  t.m = Matrix::from_rows({{1.5, 0.5}, {0.5, 1.5}});
  t.v = {0.3, -0.2};
  const SelfEncoderModel moved = transfer_weights(model, t);

  GridSpec g;
  g.x_min = -2.0;
  g.x_max = 2.0;
  g.y_min = -2.0;
  g.y_max = 2.0;
  g.width = 60;
  g.height = 60;
  const Matrix centers = pixel_centers(g);
  Matrix transported(centers.rows, 2);
  for (std::size_t i = 0; i < centers.rows; ++i) {
    const std::vector<double> q = t.apply(centers.row_copy(i));
    transported(i, 0) = q[0];
    transported(i, 1) = q[1];
  }

  const Matrix p0 = predict(model.network, centers);
  const Matrix p1 = predict(moved.network, transported);
  EXPECT_LT(max_abs_diff(p0, p1), 1e-9);

  const std::vector<std::uint32_t> r0 = assign_self_encoder(model, centers);
  const std::vector<std::uint32_t> r1 = assign_self_encoder(moved, transported);
  std::size_t same = 0;
  for (std::size_t i = 0; i < r0.size(); ++i)
    if (r0[i] == r1[i]) ++same;
  EXPECT_GE(static_cast<double>(same) / static_cast<double>(r0.size()), 0.999);
}

TEST(RenderPpm, TwoByTwoBytesPinned) {
  RegionMap map;
  map.grid.width = 2;
  map.grid.height = 2;
  // map.points stays empty: no anchor dots
  map.region = {0, 1, 2, 3};
  std::ostringstream os;
  render_ppm(map, os);
  std::string expect = "P6\n2 2\n255\n";
  for (std::uint32_t r : map.region) {
    const Rgb c = kRegionPalette[r];
    expect.push_back(static_cast<char>(c.r));
    expect.push_back(static_cast<char>(c.g));
    expect.push_back(static_cast<char>(c.b));
  }
  EXPECT_EQ(os.str(), expect);
}

TEST(RenderPpm, AnchorDotPaintsTheAnchorColor) {
  RegionMap map;
  map.grid.width = 16;
  map.grid.height = 16;
  map.points = Matrix::from_rows({{0.0, 0.0}});
  map.region.assign(256, 0);
  std::ostringstream os;
  render_ppm(map, os);
  const std::string bytes = os.str();
  // Center pixel (8,8) of the raster lies under the dot.
  const std::size_t header = bytes.find("255\n") + 4;
  const std::size_t offset = header + (8 * 16 + 8) * 3;
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[offset]), kAnchorColor.r);
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[offset + 1]), kAnchorColor.g);
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[offset + 2]), kAnchorColor.b);
  // Corner pixel stays the region fill.
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[header]), kRegionPalette[0].r);
}

TEST(RenderSvg, RunLengthEncodesRows) {
  RegionMap map;
  map.grid.width = 4;
  map.grid.height = 2;
  // map.points stays empty: no anchor dots
  map.region.assign(8, 0);
  std::ostringstream os;
  render_svg(map, os);
  const std::string svg = os.str();
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("width=\"4\""), std::string::npos);
  std::size_t rects = 0;
  for (std::size_t pos = svg.find("<rect"); pos != std::string::npos;
       pos = svg.find("<rect", pos + 1))
    ++rects;
  EXPECT_EQ(rects, 2u);  // one full-width run per row
  EXPECT_NE(svg.find(detail::hex_color(kRegionPalette[0])), std::string::npos);
}

TEST(SaveRegionMap, DispatchesOnExtension) {
  RegionMap map;
  map.grid.width = 3;
  map.grid.height = 3;
  // map.points stays empty: no anchor dots
  map.region.assign(9, 2);

  const std::string ppm = temp_path(".ppm");
  save_region_map(map, ppm);
  EXPECT_EQ(read_file(ppm).substr(0, 2), "P6");
  std::remove(ppm.c_str());

  const std::string svg = temp_path(".svg");
  save_region_map(map, svg);
  EXPECT_EQ(read_file(svg).substr(0, 4), "<svg");
  std::remove(svg.c_str());

  EXPECT_THROW(save_region_map(map, temp_path(".png")), std::invalid_argument);
  EXPECT_THROW(save_region_map(map, "/nonexistent-dir/out.ppm"), std::runtime_error);
}

TEST(SaveRegionMap, RewritingProducesIdenticalBytes) {
  const Matrix corners = fixtures::square_points();
  GridSpec g;
  g.width = 20;
  g.height = 20;
  const RegionMap map = region_map_euclidean(corners, g);
  const std::string p1 = temp_path(".ppm");
  const std::string p2 = temp_path(".ppm");
  save_region_map(map, p1);
  save_region_map(map, p2);
  EXPECT_EQ(read_file(p1), read_file(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

}  // namespace
}  // namespace selfenc
