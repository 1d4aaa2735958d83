#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blaze/apps/data.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/wire.hpp"

namespace blaze::apps {

// Reduced assignment statistics of one cluster.
struct PointSum {
  std::vector<double> sum;
  std::uint64_t count = 0;
  double sq_dist = 0;

  void serialize(WireBuffer& b) const;
  static PointSum parse(WireBuffer& b);
  void merge(const PointSum& o);
};

struct KMeansModel {
  std::vector<Point> centers;
  int iterations = 0;
  // Largest center displacement in the last refinement.
  double max_movement = 0;
  // Within-cluster sum of squares of each assignment step.
  std::vector<double> wcss_history;
};

struct KMeansOptions {
  double tol = 1e-6;
  int max_iters = 1000;
};

// Index of the center nearest to p; ties go to the lowest index.
std::size_t nearest_center(const std::vector<Point>& centers, const Point& p);

// Lloyd iterations. The assignment step is one MapReduce job emitting
// (nearest center, PointSum); the refinement runs serially on every worker.
// A cluster left empty keeps its center. Stops when no center moves by tol or
// more. Collective.
KMeansModel kmeans(const DistVector<Point>& points, std::vector<Point> initial_centers,
                   const KMeansOptions& options = {});

std::string to_text(const KMeansModel& model);

}  // namespace blaze::apps
