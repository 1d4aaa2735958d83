#include "blaze/apps/pagerank.hpp"

#include <cmath>
#include <sstream>

#include "blaze/dist_range.hpp"
#include "blaze/error.hpp"
#include "blaze/mapreduce.hpp"

namespace blaze::apps {

Graph make_graph(DistVector<Edge> edges, std::uint64_t pages, double damping) {
  if (pages == 0) throw UsageError("graph needs at least one page");
  if (!(damping >= 0 && damping <= 1)) throw UsageError("damping must be in [0, 1]");
  Graph g{std::move(edges), pages, std::vector<std::uint64_t>(pages, 0), damping};
  mapreduce(
      g.edges,
      [pages](std::size_t i, const Edge& e, const auto& emit) {
        if (e.first >= pages || e.second >= pages) {
          throw InputError("edge " + std::to_string(i) + " (" + std::to_string(e.first) + " -> " +
                           std::to_string(e.second) + ") has a page id outside [0, " + std::to_string(pages) + ")");
        }
        emit(e.first, std::uint64_t{1});
      },
      "sum", g.out_degree);
  return g;
}

PageRankState pagerank(const Graph& g, const PageRankOptions& options) {
  if (options.tol <= 0) throw UsageError("pagerank tolerance must be positive");
  Context& ctx = g.edges.context();
  const std::uint64_t n = g.pages;
  const double d = g.damping;
  const DistRange<std::uint64_t> pages(ctx, 0, n);

  PageRankState st;
  st.scores.assign(n, 1.0 / static_cast<double>(n));
  while (st.iterations < options.max_iters) {
    const auto& pr = st.scores;

    std::vector<double> sink(1, 0.0);
    mapreduce(
        pages,
        [&](std::uint64_t p, const auto& emit) {
          if (g.out_degree[p] == 0) emit(0, pr[p]);
        },
        "sum", sink);

    const double base = (1.0 - d) / static_cast<double>(n) + d * sink[0] / static_cast<double>(n);
    std::vector<double> next(n, base);
    mapreduce(
        g.edges,
        [&](std::size_t, const Edge& e, const auto& emit) {
          emit(e.second, d * pr[e.first] / static_cast<double>(g.out_degree[e.first]));
        },
        "sum", next);

    std::vector<double> delta(1, 0.0);
    mapreduce(
        pages, [&](std::uint64_t p, const auto& emit) { emit(0, std::abs(next[p] - pr[p])); }, "max", delta);

    st.prev_scores = std::move(st.scores);
    st.scores = std::move(next);
    st.sink_mass = sink[0];
    st.delta_max = delta[0];
    ++st.iterations;
    if (options.observer) options.observer(st);
    if (st.delta_max < options.tol) break;
  }
  return st;
}

std::string to_text(const PageRankState& state) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"iterations\": " << state.iterations << ", \"delta_max\": " << state.delta_max << ", \"scores\": [";
  for (std::size_t i = 0; i < state.scores.size(); ++i) out << (i ? ", " : "") << state.scores[i];
  out << "]}\n";
  return out.str();
}

}  // namespace blaze::apps
