#include "blaze/apps/nearest.hpp"

#include <cmath>

namespace blaze::apps {

namespace {

double sq_distance(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size() && j < b.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const DistVector<Point>& candidates, const Point& query, std::size_t k,
                                        TopkStats* stats) {
  const auto closer = [&query](const Point& a, const Point& b) { return sq_distance(a, query) < sq_distance(b, query); };
  std::vector<Neighbor> out;
  for (auto& [index, p] : topk_indexed(candidates, k, closer, stats)) {
    const double d = std::sqrt(sq_distance(p, query));
    out.push_back({index, d, std::move(p)});
  }
  return out;
}

}  // namespace blaze::apps
