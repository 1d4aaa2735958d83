#include "blaze/apps/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string_view>

#include "blaze/detail/partition.hpp"
#include "blaze/error.hpp"
#include "blaze/load_file.hpp"
#include "blaze/random.hpp"

#ifndef BLAZE_DATA_DIR
#define BLAZE_DATA_DIR "data"
#endif

namespace blaze::apps {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && end == s.data() + s.size() && !s.empty();
}

[[noreturn]] void bad_line(const char* what, std::size_t index, std::string_view line) {
  throw InputError(std::string("malformed ") + what + " at line " + std::to_string(index + 1) + ": '" +
                   std::string(line.substr(0, 80)) + "'");
}

double gaussian(random::CounterRng& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw InputError("write failed for " + path);
}

// Stream keys for the generators, distinct from the per-thread streams.
constexpr std::uint64_t kEdgeStream = 0x65646765;
constexpr std::uint64_t kPointStream = 0x706f696e;
constexpr std::uint64_t kCenterStream = 0x63656e74;

}  // namespace

DistVector<Edge> load_edges(Context& ctx, const std::string& path) {
  auto lines = load_file(ctx, path);
  std::vector<Edge> edges;
  std::exception_ptr failure;
  try {
    edges.reserve(lines.local_size());
    for (std::size_t i = 0; i < lines.local_size(); ++i) {
      const std::string_view line = trim(lines.local()[i]);
      if (line.empty()) continue;
      const auto sep = line.find_first_of(" \t");
      Edge e;
      if (sep == std::string_view::npos || !parse_number(line.substr(0, sep), e.first) ||
          !parse_number(line.substr(sep + 1), e.second)) {
        bad_line("edge", lines.offset() + i, line);
      }
      edges.push_back(e);
    }
  } catch (...) {
    failure = std::current_exception();
  }
  ctx.check_job(failure);
  return DistVector<Edge>(ctx, std::move(edges));
}

DistVector<Point> load_points(Context& ctx, const std::string& path) {
  auto lines = load_file(ctx, path);
  std::vector<Point> points;
  std::exception_ptr failure;
  try {
    points.reserve(lines.local_size());
    std::size_t dim = 0;
    for (std::size_t i = 0; i < lines.local_size(); ++i) {
      const std::string_view line = trim(lines.local()[i]);
      if (line.empty()) continue;
      Point p;
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        double v = 0;
        if (!parse_number(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start), v)) {
          bad_line("point", lines.offset() + i, line);
        }
        p.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (dim == 0) dim = p.size();
      if (p.size() != dim) bad_line("point (dimension mismatch)", lines.offset() + i, line);
      points.push_back(std::move(p));
    }
  } catch (...) {
    failure = std::current_exception();
  }
  ctx.check_job(failure);
  return DistVector<Point>(ctx, std::move(points));
}

std::vector<std::string> replicate_text(const std::vector<std::string>& base_lines, std::size_t copies) {
  std::vector<std::string> out;
  out.reserve(base_lines.size() * copies);
  for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), base_lines.begin(), base_lines.end());
  return out;
}

Edge generate_edge(const GraphSpec& spec, std::uint64_t i) {
  if (spec.pages == 0) throw UsageError("graph needs at least one page");
  random::CounterRng rng(spec.seed, kEdgeStream, i);
  const std::uint64_t src = rng.next() % spec.pages;
  const std::uint64_t dst = rng.next() % spec.pages;
  return {src, dst};
}

std::vector<Edge> generate_edges(const GraphSpec& spec) {
  std::vector<Edge> out;
  out.reserve(spec.edges);
  for (std::uint64_t i = 0; i < spec.edges; ++i) out.push_back(generate_edge(spec, i));
  return out;
}

DistVector<Edge> generate_edges(Context& ctx, const GraphSpec& spec) {
  const auto [lo, hi] = detail::block_range(spec.edges, ctx.rank(), ctx.size());
  std::vector<Edge> local;
  local.reserve(hi - lo);
  for (std::uint64_t i = lo; i < hi; ++i) local.push_back(generate_edge(spec, i));
  return DistVector<Edge>(ctx, std::move(local));
}

std::vector<Point> cloud_centers(const PointCloudSpec& spec) {
  if (spec.clusters < 1 || spec.dim < 1) throw UsageError("point cloud needs clusters >= 1 and dim >= 1");
  random::CounterRng rng(spec.seed, kCenterStream, 0);
  std::vector<Point> centers(spec.clusters, Point(spec.dim));
  for (auto& c : centers) {
    for (auto& x : c) x = (2.0 * rng.uniform() - 1.0) * spec.range;
  }
  return centers;
}

Point generate_point(const PointCloudSpec& spec, const std::vector<Point>& centers, std::uint64_t i) {
  random::CounterRng rng(spec.seed, kPointStream, i);
  Point p = centers[i % centers.size()];
  for (auto& x : p) x += spec.spread * gaussian(rng);
  return p;
}

std::vector<Point> generate_points(const PointCloudSpec& spec) {
  const auto centers = cloud_centers(spec);
  std::vector<Point> out;
  out.reserve(spec.points);
  for (std::uint64_t i = 0; i < spec.points; ++i) out.push_back(generate_point(spec, centers, i));
  return out;
}

DistVector<Point> generate_points(Context& ctx, const PointCloudSpec& spec) {
  const auto centers = cloud_centers(spec);
  const auto [lo, hi] = detail::block_range(spec.points, ctx.rank(), ctx.size());
  std::vector<Point> local;
  local.reserve(hi - lo);
  for (std::uint64_t i = lo; i < hi; ++i) local.push_back(generate_point(spec, centers, i));
  return DistVector<Point>(ctx, std::move(local));
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  auto out = open_out(path);
  for (const auto& l : lines) out << l << '\n';
  finish(out, path);
}

void write_edges(const std::string& path, const std::vector<Edge>& edges) {
  auto out = open_out(path);
  for (const auto& [s, d] : edges) out << s << ' ' << d << '\n';
  finish(out, path);
}

void write_points(const std::string& path, const std::vector<Point>& points) {
  auto out = open_out(path);
  out.precision(17);
  for (const auto& p : points) {
    for (std::size_t j = 0; j < p.size(); ++j) out << (j ? "," : "") << p[j];
    out << '\n';
  }
  finish(out, path);
}

std::string sample_text_dir() { return BLAZE_DATA_DIR; }

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace blaze::apps
