#include "blaze/apps/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blaze/error.hpp"
#include "blaze/mapreduce.hpp"

namespace blaze::apps {

namespace {

double sq_distance(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

}  // namespace

void PointSum::serialize(WireBuffer& b) const {
  Codec<std::vector<double>>::encode(b, sum);
  b.put_varint(count);
  b.put_f64(sq_dist);
}

PointSum PointSum::parse(WireBuffer& b) {
  PointSum p;
  p.sum = Codec<std::vector<double>>::decode(b);
  p.count = b.get_varint();
  p.sq_dist = b.get_f64();
  return p;
}

void PointSum::merge(const PointSum& o) {
  if (sum.empty()) {
    sum = o.sum;
  } else if (!o.sum.empty()) {
    if (sum.size() != o.sum.size()) throw JobError("point dimension mismatch in k-means sums");
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += o.sum[j];
  }
  count += o.count;
  sq_dist += o.sq_dist;
}

std::size_t nearest_center(const std::vector<Point>& centers, const Point& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double dk = sq_distance(centers[k], p);
    if (dk < best_d) {
      best_d = dk;
      best = k;
    }
  }
  return best;
}

KMeansModel kmeans(const DistVector<Point>& points, std::vector<Point> initial_centers, const KMeansOptions& options) {
  if (initial_centers.empty()) throw UsageError("k-means needs at least one center");
  const std::size_t dim = initial_centers.front().size();
  for (const auto& c : initial_centers) {
    if (c.size() != dim) throw UsageError("k-means centers differ in dimension");
  }
  KMeansModel model;
  model.centers = std::move(initial_centers);
  const std::size_t k = model.centers.size();

  while (model.iterations < options.max_iters) {
    const auto& centers = model.centers;
    std::vector<PointSum> sums(k);
    mapreduce(
        points,
        [&](std::size_t i, const Point& p, const auto& emit) {
          if (p.size() != dim) {
            throw InputError("point " + std::to_string(i) + " has dimension " + std::to_string(p.size()) +
                             ", expected " + std::to_string(dim));
          }
          const std::size_t c = nearest_center(centers, p);
          emit(c, PointSum{p, 1, sq_distance(centers[c], p)});
        },
        [](PointSum& a, const PointSum& b) { a.merge(b); }, sums);

    double wcss = 0;
    double moved = 0;
    std::vector<Point> next = centers;
    for (std::size_t c = 0; c < k; ++c) {
      wcss += sums[c].sq_dist;
      if (sums[c].count == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) next[c][j] = sums[c].sum[j] / static_cast<double>(sums[c].count);
      moved = std::max(moved, std::sqrt(sq_distance(next[c], centers[c])));
    }
    model.wcss_history.push_back(wcss);
    model.centers = std::move(next);
    model.max_movement = moved;
    ++model.iterations;
    if (moved < options.tol) break;
  }
  return model;
}

std::string to_text(const KMeansModel& model) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"iterations\": " << model.iterations << ", \"centers\": [";
  for (std::size_t c = 0; c < model.centers.size(); ++c) {
    out << (c ? ", " : "") << "[";
    for (std::size_t j = 0; j < model.centers[c].size(); ++j) out << (j ? ", " : "") << model.centers[c][j];
    out << "]";
  }
  out << "]}\n";
  return out.str();
}

}  // namespace blaze::apps
