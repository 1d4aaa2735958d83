#pragma once

#include <cstddef>
#include <vector>

#include "blaze/apps/data.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/topk.hpp"

namespace blaze::apps {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0;
  Point point;
};

// The k candidates closest to `query` by Euclidean distance, nearest first;
// equal distances are ordered by global index. Collective.
std::vector<Neighbor> nearest_neighbors(const DistVector<Point>& candidates, const Point& query, std::size_t k = 100,
                                        TopkStats* stats = nullptr);

}  // namespace blaze::apps
