// Acceptance gate: one PASS / FAIL / SKIP line per criterion. Exits non-zero
// if any criterion fails. Multi-worker runs use the backend named by
// BLAZE_BACKEND (forked loopback-socket workers under ctest).

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "blaze/apps/data.hpp"
#include "blaze/apps/gmm.hpp"
#include "blaze/apps/kmeans.hpp"
#include "blaze/apps/nearest.hpp"
#include "blaze/apps/pagerank.hpp"
#include "blaze/apps/pi.hpp"
#include "blaze/apps/wordcount.hpp"
#include "blaze/bench/bench.hpp"
#include "blaze/cluster.hpp"
#include "blaze/distribute.hpp"
#include "blaze/random.hpp"
#include "blaze/topk.hpp"
#include "blaze/wire.hpp"
#include "oracles.hpp"

using namespace blaze;
using namespace blaze::apps;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { pass, fail, skip };

int g_failures = 0;

void report(int id, const char* title, Outcome o, const std::string& detail) {
  const char* tag = o == Outcome::pass ? "PASS" : o == Outcome::fail ? "FAIL" : "SKIP";
  if (o == Outcome::fail) ++g_failures;
  std::printf("%s  [%d] %s: %s\n", tag, id, title, detail.c_str());
  std::fflush(stdout);
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects the first failed expectation on one worker. `info` set on rank 0
// is carried back to the caller.
struct Checks {
  std::string first;
  std::string info;
  void expect(bool ok, const std::string& what) {
    if (!ok && first.empty()) first = what;
  }
};

struct ClusterVerdict {
  std::string failure;  // empty when every worker's checks held
  std::string info;
};

ClusterVerdict run_checked(int workers, int threads, const std::function<void(Context&, Checks&)>& job) {
  LocalClusterOptions opt;
  opt.workers = workers;
  opt.threads = threads;
  try {
    const std::string out = run_local_cluster(opt, [&](Context& ctx) {
      Checks c;
      try {
        job(ctx, c);
      } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
      }
      const auto bad = ctx.all_reduce_value<std::uint64_t>(c.first.empty() ? 0 : 1, std::plus<>{});
      if (bad == 0) return "P" + c.info;
      const std::string where = "workers=" + std::to_string(workers) + " threads=" + std::to_string(threads) + ": ";
      return "F" + where + (c.first.empty() ? std::to_string(bad) + " other worker(s) failed" : c.first);
    });
    if (out.front() == 'P') return {"", out.substr(1)};
    return {out.substr(1), ""};
  } catch (const std::exception& e) {
    return {std::string("cluster failed: ") + e.what(), ""};
  }
}

std::string on_cluster(int workers, int threads, const std::function<void(Context&, Checks&)>& job) {
  return run_checked(workers, threads, job).failure;
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

std::vector<std::string> sample_lines() {
  std::vector<std::string> lines;
  for (const char* f : {"genesis.txt", "sonnets.txt"}) {
    for (auto& l : read_lines(sample_text_dir() + "/" + f)) lines.push_back(std::move(l));
  }
  return lines;
}

std::vector<Point> integer_cloud(std::uint64_t n, int clusters, std::uint64_t seed) {
  auto pts = generate_points({n, clusters, 2, seed, 50.0, 4.0});
  for (auto& p : pts) {
    for (auto& x : p) x = std::round(x);
  }
  return pts;
}

GmmModel initial_mixture(const std::vector<Point>& pts, std::size_t k) {
  GmmModel m;
  for (std::size_t c = 0; c < k; ++c) {
    m.alpha.push_back(1.0 / static_cast<double>(k));
    m.mu.push_back(Eigen::Map<const Eigen::VectorXd>(pts[c].data(), 2));
    m.sigma.push_back(Eigen::MatrixXd::Identity(2, 2) * 4.0);
  }
  return m;
}

oracle::Mixture as_oracle(const GmmModel& m) {
  oracle::Mixture o;
  for (std::size_t c = 0; c < m.components(); ++c) {
    o.alpha.push_back(m.alpha[c]);
    o.mu.emplace_back(m.mu[c].data(), m.mu[c].data() + m.mu[c].size());
    oracle::Mat s(2, oracle::Vec(2));
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) s[a][b] = m.sigma[c](a, b);
    }
    o.sigma.push_back(std::move(s));
  }
  return o;
}

constexpr double kRel = 1e-8;

// ------------------------------------------------------------------------ 1

void criterion_oracle_equivalence() {
  const auto t0 = Clock::now();
  const auto text = replicate_text(sample_lines(), 3);
  const auto text_counts = oracle::wordcount(text);

  std::vector<std::pair<std::uint64_t, std::vector<Edge>>> graphs = {{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}}};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const std::uint64_t n = 15 * seed + 5;  // 20, 35, 50 pages
    graphs.emplace_back(n, generate_edges({3 * n, n, seed}));
  }
  std::vector<std::vector<double>> pr_expect;
  for (const auto& [n, e] : graphs) pr_expect.push_back(oracle::pagerank(n, e, kDefaultDamping));

  const auto km_points = integer_cloud(10000, 5, 11);
  const std::vector<Point> km_init = {km_points[0], km_points[1], km_points[2], km_points[3], km_points[5]};
  const auto km_steps = oracle::lloyd(km_points, km_init, 1e-6, 1000);

  const auto gmm_points = generate_points({1000, 2, 2, 5, 6.0, 1.5});
  const GmmModel gmm_init = initial_mixture(gmm_points, 2);
  const auto gmm_expect = oracle::em(gmm_points, as_oracle(gmm_init), 1e-6, 500);

  const PointCloudSpec nn_spec{100000, 5, 3, 17};
  const auto nn_points = generate_points(nn_spec);
  const Point query = {0.5, -1.0, 2.0};
  const auto nn_expect = oracle::knn(nn_points, query, 100);

  std::string failure;
  int runs = 0;
  for (int workers : {1, 2, 4}) {
    for (int threads : {1, 4}) {
      ++runs;
      const std::string err = on_cluster(workers, threads, [&](Context& ctx, Checks& c) {
        // wordcount: exact
        const auto counts = collect(wordcount(distribute(ctx, text)).counts);
        if (ctx.rank() == 0) {
          c.expect(std::map<std::string, std::uint64_t>(counts.begin(), counts.end()) == text_counts,
                   "wordcount differs from oracle");
        }
        // pagerank: <= 50 pages
        for (std::size_t g = 0; g < graphs.size(); ++g) {
          const auto& [n, edges] = graphs[g];
          const auto st = pagerank(make_graph(distribute(ctx, edges), n), {.tol = 1e-13});
          for (std::uint64_t p = 0; p < n; ++p) {
            c.expect(oracle::close(st.scores[p], pr_expect[g][p], kRel),
                     "pagerank graph " + std::to_string(g) + " page " + std::to_string(p));
          }
        }
        // kmeans: integer data, exact centers along the trajectory
        const auto km_in = distribute(ctx, km_points);
        const auto km = kmeans(km_in, km_init);
        c.expect(km.iterations == static_cast<int>(km_steps.size()), "kmeans iteration count");
        c.expect(km.centers == km_steps.back().centers, "kmeans final centers");
        for (std::size_t t = 0; t + 1 < km_steps.size(); ++t) {
          c.expect(kmeans(km_in, km_init, {.max_iters = static_cast<int>(t + 1)}).centers == km_steps[t].centers,
                   "kmeans centers at iteration " + std::to_string(t));
        }
        for (std::size_t t = 0; t < km.wcss_history.size() && t < km_steps.size(); ++t) {
          c.expect(oracle::close(km.wcss_history[t], km_steps[t].wcss, kRel), "kmeans wcss");
        }
        // gmm: 10^3 points, K = 2
        const auto gm = gmm_em(distribute(ctx, gmm_points), gmm_init);
        c.expect(gm.ll_history.size() == gmm_expect.ll_history.size(), "gmm iteration count");
        for (std::size_t t = 0; t < gm.ll_history.size() && t < gmm_expect.ll_history.size(); ++t) {
          c.expect(oracle::close(gm.ll_history[t], gmm_expect.ll_history[t], kRel),
                   "gmm log-likelihood at iteration " + std::to_string(t));
        }
        for (std::size_t k = 0; k < 2; ++k) {
          c.expect(oracle::close(gm.alpha[k], gmm_expect.model.alpha[k], kRel), "gmm alpha");
          for (int a = 0; a < 2; ++a) {
            c.expect(oracle::close(gm.mu[k][a], gmm_expect.model.mu[k][a], kRel), "gmm mu");
            for (int b = 0; b < 2; ++b) {
              c.expect(oracle::close(gm.sigma[k](a, b), gmm_expect.model.sigma[k][a][b], kRel), "gmm sigma");
            }
          }
        }
        // nearest 100 of 10^5
        const auto nn = nearest_neighbors(generate_points(ctx, nn_spec), query, 100);
        c.expect(nn.size() == nn_expect.size(), "nearest result size");
        for (std::size_t i = 0; i < nn.size() && i < nn_expect.size(); ++i) {
          c.expect(nn[i].index == nn_expect[i].first && nn[i].distance == nn_expect[i].second,
                   "nearest neighbor " + std::to_string(i));
        }
      });
      if (!err.empty() && failure.empty()) failure = err;
    }
  }
  const double secs = since(t0);
  const std::string detail = "5 apps x " + std::to_string(runs) + " shapes in " + fmt(secs) + " s (limit 120 s)";
  if (!failure.empty()) {
    report(1, "oracle equivalence", Outcome::fail, failure);
  } else if (secs >= 120) {
    report(1, "oracle equivalence", Outcome::fail, "results match but " + detail);
  } else {
    report(1, "oracle equivalence", Outcome::pass, detail);
  }
}

// ------------------------------------------------------------------------ 2

template <class T, class Gen, class Eq>
std::string round_trip(const char* name, int cases, Gen gen, Eq eq) {
  for (int i = 0; i < cases; ++i) {
    const T v = gen();
    WireBuffer b;
    Codec<T>::encode(b, v);
    WireBuffer r(b.release());
    const T back = Codec<T>::decode(r);
    if (!eq(v, back) || !r.exhausted()) return std::string(name) + " case " + std::to_string(i);
  }
  return "";
}

void criterion_wire() {
  constexpr int kCases = 10000;
  std::mt19937_64 rng(2024);
  const auto any_bits = [&] {
    const int width = static_cast<int>(rng() % 65);
    return width == 64 ? rng() : rng() & ((std::uint64_t{1} << width) - 1);
  };
  const auto same = [](const auto& a, const auto& b) { return a == b; };
  const auto same_bits_d = [](double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
  };
  const auto same_bits_f = [](float a, float b) {
    return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
  };
  const auto any_string = [&] {
    std::string s(rng() % 80, '\0');
    for (auto& ch : s) ch = static_cast<char>(rng());
    return s;
  };

  std::vector<std::string> errs = {
      round_trip<std::uint64_t>("u64", kCases, any_bits, same),
      round_trip<std::int64_t>("i64", kCases, [&] { return static_cast<std::int64_t>(any_bits()); }, same),
      round_trip<std::int32_t>("i32", kCases, [&] { return static_cast<std::int32_t>(rng()); }, same),
      round_trip<std::uint32_t>("u32", kCases, [&] { return static_cast<std::uint32_t>(any_bits()); }, same),
      round_trip<double>("f64", kCases, [&] { return std::bit_cast<double>(rng()); }, same_bits_d),
      round_trip<float>("f32", kCases, [&] { return std::bit_cast<float>(static_cast<std::uint32_t>(rng())); },
                        same_bits_f),
      round_trip<std::string>("string", kCases, any_string, same),
      round_trip<std::pair<std::int64_t, std::uint64_t>>(
          "pair", kCases, [&] { return std::pair{static_cast<std::int64_t>(any_bits()), any_bits()}; }, same),
      round_trip<std::vector<double>>(
          "vector<f64>", kCases,
          [&] {
            std::vector<double> v(rng() % 20);
            for (auto& x : v) x = static_cast<double>(static_cast<std::int64_t>(rng())) / 7.0;
            return v;
          },
          same),
      round_trip<std::tuple<std::string, std::int32_t, double>>(
          "tuple", kCases,
          [&] { return std::tuple{any_string(), static_cast<std::int32_t>(rng()), static_cast<double>(rng() % 1000)}; },
          same),
  };
  std::string failure;
  for (auto& e : errs) {
    if (!e.empty() && failure.empty()) failure = "round trip failed: " + e;
  }

  std::size_t pair_bytes = 0;
  for (int a = -63; a <= 63; ++a) {
    WireBuffer b;
    encode<std::pair<int, int>>(b, std::pair{a, -a / 2});
    pair_bytes = std::max(pair_bytes, b.size());
  }
  if (pair_bytes != 2 && failure.empty()) failure = "small-int pair took " + std::to_string(pair_bytes) + " bytes";

  // Fuzz: arbitrary bytes either decode or raise DecodeError.
  std::size_t fuzzed = 0, rejected = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes junk(rng() % 24);
    for (auto& x : junk) x = static_cast<std::uint8_t>(rng() % 5 == 0 ? 0xff : rng());
    const auto attempt = [&](auto tag) {
      using T = decltype(tag);
      ++fuzzed;
      try {
        WireBuffer b(junk);
        (void)Codec<T>::decode(b);
      } catch (const DecodeError&) {
        ++rejected;
      } catch (const std::exception& e) {
        if (failure.empty()) failure = std::string("fuzz decode raised a non-decode error: ") + e.what();
      }
    };
    attempt(std::uint64_t{});
    attempt(std::int32_t{});
    attempt(std::string{});
    attempt(std::vector<std::string>{});
    attempt(std::pair<double, std::vector<std::int64_t>>{});
  }
  const std::string detail = ">= 10^4 cases x 10 types, pair = " + std::to_string(pair_bytes) + " bytes, " +
                             std::to_string(fuzzed) + " fuzz decodes (" + std::to_string(rejected) + " rejected)";
  report(2, "wire format", failure.empty() ? Outcome::pass : Outcome::fail, failure.empty() ? detail : failure);
}

// ------------------------------------------------------------------------ 3

void criterion_eager_reduction() {
  const auto text = replicate_text(sample_lines(), 200);
  std::uint64_t tokens = 0;
  for (const auto& [w, c] : oracle::wordcount(text)) tokens += c;
  std::string failure, ratios;
  for (auto [workers, threads] : std::vector<std::pair<int, int>>{{1, 4}, {2, 2}, {4, 1}}) {
    const auto verdict = run_checked(workers, threads, [&](Context& ctx, Checks& c) {
      const auto r = wordcount(distribute(ctx, text));
      const auto emitted = ctx.all_reduce_value<std::uint64_t>(r.stats.pairs_emitted, std::plus<>{});
      const auto shuffled = ctx.all_reduce_value<std::uint64_t>(r.stats.pairs_shuffled, std::plus<>{});
      std::uint64_t local_total = 0;
      r.counts.for_each_local([&](const std::string&, std::uint64_t v) { local_total += v; });
      const auto total = ctx.all_reduce_value<std::uint64_t>(local_total, std::plus<>{});
      const double ratio = static_cast<double>(shuffled) / static_cast<double>(emitted);
      c.expect(emitted == tokens, "pairs_emitted " + std::to_string(emitted) + " != tokens " + std::to_string(tokens));
      c.expect(total == tokens, "sum of counts " + std::to_string(total) + " != tokens " + std::to_string(tokens));
      c.expect(ratio < 0.01, "shuffled/emitted = " + fmt(ratio));
      c.info = fmt(ratio);
    });
    if (!verdict.failure.empty() && failure.empty()) failure = verdict.failure;
    ratios += (ratios.empty() ? "" : ", ") + std::to_string(workers) + "x" + std::to_string(threads) + ": " +
              verdict.info;
  }
  const std::string detail =
      std::to_string(tokens) + " tokens, shuffled/emitted " + ratios + " (limit 0.01), counts conserved";
  report(3, "eager-reduction payoff", failure.empty() ? Outcome::pass : Outcome::fail,
         failure.empty() ? detail : failure);
}

// ------------------------------------------------------------------------ 4

// Hand-written parallel loop: each thread walks the samples it would own in
// the engine and draws from the same (seed, rank, thread) stream.
std::uint64_t pi_loop(Context& ctx, std::uint64_t n, std::uint64_t seed) {
  const int threads = ctx.threads();
  const auto [lo, hi] = detail::block_range(n, ctx.rank(), ctx.size());
  const std::uint64_t local = hi - lo;
  std::vector<std::uint64_t> hits(threads, 0);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      random::CounterRng rng(seed, static_cast<std::uint64_t>(ctx.rank()), static_cast<std::uint64_t>(t));
      std::uint64_t h = 0;
      const std::uint64_t chunk = detail::kThreadChunk;
      for (std::uint64_t c = chunk * t; c < local; c += chunk * threads) {
        for (std::uint64_t i = c; i < std::min(c + chunk, local); ++i) {
          const double x = rng.uniform();
          const double y = rng.uniform();
          h += x * x + y * y < 1;
        }
      }
      hits[t] = h;
    });
  }
  for (auto& th : pool) th.join();
  return ctx.all_reduce_value<std::uint64_t>(std::accumulate(hits.begin(), hits.end(), std::uint64_t{0}),
                                             std::plus<>{});
}

void criterion_dense_parity() {
  const auto t0 = Clock::now();
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t n = 100000000;
  std::string failure;
  // Bit-identical counts on several shapes at a smaller size.
  for (auto [workers, threads] : std::vector<std::pair<int, int>>{{1, 1}, {1, 3}, {2, 2}, {3, 1}}) {
    const std::string err = on_cluster(workers, threads, [&](Context& ctx, Checks& c) {
      for (std::uint64_t seed : {1, 99}) {
        const auto mr = monte_carlo_pi(ctx, 1000003, seed).hits;
        const auto loop = pi_loop(ctx, 1000003, seed);
        c.expect(mr == loop, "hits " + std::to_string(mr) + " vs loop " + std::to_string(loop));
      }
    });
    if (!err.empty() && failure.empty()) failure = err;
  }
  // Full size, one worker using every core.
  ClusterConfig cc;
  cc.threads_per_worker = static_cast<int>(cores);
  auto ctx = init(cc);
  monte_carlo_pi(*ctx, 1000000, 5);  // warm the pool
  const auto t1 = Clock::now();
  const auto mr = monte_carlo_pi(*ctx, n, 7);
  const double mr_secs = since(t1);
  const auto t2 = Clock::now();
  const auto loop = pi_loop(*ctx, n, 7);
  const double loop_secs = since(t2);
  if (mr.hits != loop && failure.empty()) {
    failure = "n=10^8 hits " + std::to_string(mr.hits) + " vs loop " + std::to_string(loop);
  }
  const double ratio = mr_secs / loop_secs;
  const double total = since(t0);
  std::string detail = "hits identical (" + std::to_string(loop) + " at n=10^8), mapreduce " + fmt(mr_secs) +
                       " s vs loop " + fmt(loop_secs) + " s, ratio " + fmt(ratio) + " (limit 1.25), " +
                       std::to_string(cores) + " core(s), " + fmt(total) + " s total";
  if (!failure.empty()) {
    report(4, "dense-path parity", Outcome::fail, failure);
  } else if (total >= 60) {
    report(4, "dense-path parity", Outcome::fail, "runtime over 60 s: " + detail);
  } else if (cores < 4) {
    report(4, "dense-path parity", Outcome::skip, "timing needs >= 4 cores; " + detail);
  } else {
    report(4, "dense-path parity", ratio <= 1.25 ? Outcome::pass : Outcome::fail, detail);
  }
}

// ------------------------------------------------------------------------ 5

void criterion_pi_accuracy() {
  ClusterConfig cc;
  cc.threads_per_worker = 2;
  auto ctx = init(cc);
  int within = 0;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const double err = std::abs(monte_carlo_pi(*ctx, 1000000, seed).estimate - std::numbers::pi);
    within += err < 0.005;
    worst = std::max(worst, err);
  }
  report(5, "pi accuracy", within >= 48 ? Outcome::pass : Outcome::fail,
         std::to_string(within) + " of 50 seeds within 0.005 at n=10^6 (need 48), worst " + fmt(worst));
}

// ------------------------------------------------------------------------ 6

double wordcount_seconds(int workers, std::uint64_t copies) {
  bench::BenchConfig cfg;
  cfg.task = "wordcount";
  cfg.workers = workers;
  cfg.threads = 1;
  cfg.size = copies;
  cfg.warmup = 1;
  cfg.reps = 3;
  cfg.backend = Backend::sockets;
  return bench::run_bench(cfg).back().seconds;
}

void criterion_scaling() {
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  if (cores < 4) {
    report(6, "scaling", Outcome::skip,
           "needs >= 4 cores for 2 workers and >= 8 for 4 workers; this machine has " + std::to_string(cores));
    return;
  }
  const std::uint64_t copies = 400;
  const double t1 = wordcount_seconds(1, copies);
  const double t2 = wordcount_seconds(2, copies);
  const double s2 = t1 / t2;
  std::string detail = "2 workers: " + fmt(s2) + "x (need 1.5)";
  bool ok = s2 >= 1.5;
  if (cores >= 8) {
    const double s4 = t1 / wordcount_seconds(4, copies);
    detail += ", 4 workers: " + fmt(s4) + "x (need 2.5)";
    ok = ok && s4 >= 2.5;
  } else {
    detail += ", 4-worker check skipped (needs >= 8 cores)";
  }
  report(6, "scaling", ok ? Outcome::pass : Outcome::fail, detail);
}

// ------------------------------------------------------------------------ 7

void criterion_invariants() {
  std::string failure;
  std::size_t pr_iters = 0, em_iters = 0, km_iters = 0, topk_cases = 0;
  // Rank 0 reports its iteration count through `info`.
  const auto note = [&](const ClusterVerdict& v, std::size_t* iters = nullptr) {
    if (!v.failure.empty() && failure.empty()) failure = v.failure;
    if (iters && !v.info.empty()) *iters += std::stoul(v.info);
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::uint64_t n = 10 * seed + 20;
    const auto edges = generate_edges({2 * n, n, seed + 100});
    note(run_checked(2, 2,
                     [&](Context& ctx, Checks& c) {
                       const auto check = [&](const PageRankState& s) {
                         const double sum = std::accumulate(s.scores.begin(), s.scores.end(), 0.0);
                         c.expect(std::abs(sum - 1) <= 1e-9, "pagerank mass " + fmt(sum, 17));
                       };
                       const auto st = pagerank(make_graph(distribute(ctx, edges), n), {.tol = 1e-12, .observer = check});
                       c.info = std::to_string(st.iterations);
                     }),
         &pr_iters);
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto pts = generate_points({1000, 3, 2, seed, 6.0, 2.0});
    note(run_checked(2, 2, [&](Context& ctx, Checks& c) {
      double prev = -std::numeric_limits<double>::infinity();
      const auto m = gmm_em(distribute(ctx, pts), initial_mixture(pts, 3),
                            {.observer = [&](const GmmModel& model, const DistVector<std::vector<double>>& w) {
                               for (const auto& row : w.local()) {
                                 c.expect(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1) <= 1e-12,
                                          "membership row does not sum to 1");
                               }
                               c.expect(std::abs(std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0) - 1) <=
                                            1e-12,
                                        "mixture weights do not sum to 1");
                               c.expect(model.log_likelihood >= prev - 1e-10,
                                        "log-likelihood fell from " + fmt(prev, 17) + " to " +
                                            fmt(model.log_likelihood, 17));
                               prev = model.log_likelihood;
                             }});
      c.info = std::to_string(m.iterations);
    }), &em_iters);
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto pts = generate_points({20000, 6, 3, seed});
    note(run_checked(2, 2, [&](Context& ctx, Checks& c) {
      const std::vector<Point> init = {pts[0], pts[1], pts[2], pts[3], pts[4], pts[7]};
      const auto m = kmeans(distribute(ctx, pts), init);
      for (std::size_t t = 1; t < m.wcss_history.size(); ++t) {
        c.expect(m.wcss_history[t] <= m.wcss_history[t - 1] * (1 + 1e-12), "wcss increased");
      }
      c.info = std::to_string(m.iterations);
    }), &km_iters);
  }
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 1000 + rng() % 50000;
    std::vector<std::int64_t> values(n);
    for (auto& v : values) v = static_cast<std::int64_t>(rng() % 5000);
    for (std::size_t k : {1, 10, 100, 1000}) {
      std::vector<std::pair<std::int64_t, std::size_t>> order;
      for (std::size_t i = 0; i < n; ++i) order.emplace_back(-values[i], i);
      std::sort(order.begin(), order.end());
      order.resize(std::min(k, n));
      const int threads = 1 + trial % 4;
      note(run_checked(1 + trial % 3, threads, [&](Context& ctx, Checks& c) {
        TopkStats st;
        const auto got = topk_indexed(distribute(ctx, values), k, std::greater<>{}, &st);
        c.expect(got.size() == order.size(), "topk size");
        for (std::size_t i = 0; i < got.size() && i < order.size(); ++i) {
          c.expect(got[i].first == order[i].second, "topk order at " + std::to_string(i));
        }
        c.expect(st.peak_aux_elements <= (static_cast<std::size_t>(threads) + 2) * k,
                 "topk held " + std::to_string(st.peak_aux_elements) + " elements for k=" + std::to_string(k));
      }));
      ++topk_cases;
    }
  }
  const std::string detail = "pagerank mass over " + std::to_string(pr_iters) + " iterations, gmm memberships, " +
                             "weights and log-likelihood over " + std::to_string(em_iters) +
                             " iterations, k-means wcss over " + std::to_string(km_iters) + " iterations, " +
                             std::to_string(topk_cases) + " topk instances with aux <= (threads + 2) k";
  report(7, "statistical and structural invariants", failure.empty() ? Outcome::pass : Outcome::fail,
         failure.empty() ? detail : failure);
}

// ------------------------------------------------------------------------ 8

void criterion_tree_rounds() {
  std::string failure, seen;
  for (int size = 1; size <= 8; ++size) {
    const int expect = size == 1 ? 0 : std::bit_width(static_cast<unsigned>(size - 1));
    const std::string err = on_cluster(size, 1, [&](Context& ctx, Checks& c) {
      WireBuffer mine;
      mine.put_varint(static_cast<std::uint64_t>(ctx.rank()) + 1);
      Bytes out = ctx.tree_reduce(mine.release(), [](Bytes a, Bytes b) {
        WireBuffer wa(std::move(a)), wb(std::move(b));
        WireBuffer s;
        s.put_varint(wa.get_varint() + wb.get_varint());
        return s.release();
      });
      if (ctx.rank() != 0) return;
      WireBuffer r(std::move(out));
      const auto sum = r.get_varint();
      c.expect(sum == static_cast<std::uint64_t>(size * (size + 1) / 2), "tree_reduce sum");
      const int rounds = ctx.stats().last_tree_rounds;
      c.expect(rounds == expect, "size " + std::to_string(size) + ": " + std::to_string(rounds) +
                                     " rounds, expected " + std::to_string(expect));
    });
    if (!err.empty() && failure.empty()) failure = err;
    seen += (seen.empty() ? "" : " ") + std::to_string(expect);
  }
  report(8, "tree_reduce rounds", failure.empty() ? Outcome::pass : Outcome::fail,
         failure.empty() ? "ceil(log2 size) for sizes 1..8: " + seen : failure);
}

}  // namespace

int main() {
  std::printf("backend: %s, cores: %u\n", to_string(backend_from_env()), std::thread::hardware_concurrency());
  criterion_oracle_equivalence();
  criterion_wire();
  criterion_eager_reduction();
  criterion_dense_parity();
  criterion_pi_accuracy();
  criterion_scaling();
  criterion_invariants();
  criterion_tree_rounds();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
