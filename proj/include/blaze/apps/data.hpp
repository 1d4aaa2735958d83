#pragma once

// Input formats and deterministic synthetic data for the example workloads.
//
//   text    newline-separated lines
//   graph   one edge per line: "src dst" (ASCII integers)
//   points  CSV, one point per row

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "blaze/dist_vector.hpp"

namespace blaze::apps {

using Point = std::vector<double>;
using Edge = std::pair<std::uint64_t, std::uint64_t>;

DistVector<Edge> load_edges(Context& ctx, const std::string& path);
DistVector<Point> load_points(Context& ctx, const std::string& path);

// Replicates the lines of the files in `base` `copies` times.
std::vector<std::string> replicate_text(const std::vector<std::string>& base_lines, std::size_t copies);

struct GraphSpec {
  std::uint64_t edges = 0;
  std::uint64_t pages = 1;
  std::uint64_t seed = 0;
};

// Edge i depends only on (seed, i), so a distributed generator yields the same
// list for any worker count.
Edge generate_edge(const GraphSpec& spec, std::uint64_t i);
std::vector<Edge> generate_edges(const GraphSpec& spec);
DistVector<Edge> generate_edges(Context& ctx, const GraphSpec& spec);

struct PointCloudSpec {
  std::uint64_t points = 0;
  int clusters = 5;
  int dim = 2;
  std::uint64_t seed = 0;
  // Centers are uniform in [-range, range]^dim; points are Gaussian around
  // them with this standard deviation per coordinate.
  double range = 10.0;
  double spread = 1.0;
};

std::vector<Point> cloud_centers(const PointCloudSpec& spec);
// Point i belongs to cluster i % clusters.
Point generate_point(const PointCloudSpec& spec, const std::vector<Point>& centers, std::uint64_t i);
std::vector<Point> generate_points(const PointCloudSpec& spec);
DistVector<Point> generate_points(Context& ctx, const PointCloudSpec& spec);

// Writers; throw InputError when the file cannot be written.
void write_lines(const std::string& path, const std::vector<std::string>& lines);
void write_edges(const std::string& path, const std::vector<Edge>& edges);
void write_points(const std::string& path, const std::vector<Point>& points);

// Bundled public-domain sample text (data/ directory of the source tree).
std::string sample_text_dir();
std::vector<std::string> read_lines(const std::string& path);

}  // namespace blaze::apps
