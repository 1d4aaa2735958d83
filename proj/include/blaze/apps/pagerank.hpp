#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "blaze/apps/data.hpp"
#include "blaze/dist_vector.hpp"

namespace blaze::apps {

// Conventional formulations damp with 0.85; this default is taken literally
// from PR(p) = (1 - d) / N + d * sum(PR(q) / L(q)).
inline constexpr double kDefaultDamping = 0.15;

struct Graph {
  DistVector<Edge> edges;
  std::uint64_t pages = 0;
  // Out-degree L(p) of every page, replicated on each worker.
  std::vector<std::uint64_t> out_degree;
  double damping = kDefaultDamping;
};

// Validates page ids (InputError on an id >= pages) and damping (UsageError
// outside [0, 1]), and counts out-degrees.
// Collective.
Graph make_graph(DistVector<Edge> edges, std::uint64_t pages, double damping = kDefaultDamping);

struct PageRankState {
  std::vector<double> scores;
  std::vector<double> prev_scores;
  // Total score held by pages without outbound links before the update.
  double sink_mass = 0;
  double delta_max = 0;
  int iterations = 0;
};

struct PageRankOptions {
  double tol = 1e-5;
  int max_iters = 1000;
  // Called on every worker after each iteration.
  std::function<void(const PageRankState&)> observer;
};

// Iterates until the largest per-page change is below tol. Sinks are treated
// as linking to every page: their mass is spread uniformly as d * sink / N.
// Each iteration runs three MapReduce jobs: sink mass, score update, max
// change. Collective; every worker returns the full score vector.
PageRankState pagerank(const Graph& g, const PageRankOptions& options = {});

std::string to_text(const PageRankState& state);

}  // namespace blaze::apps
