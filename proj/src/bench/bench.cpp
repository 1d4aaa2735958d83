#include "blaze/bench/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "blaze/apps/data.hpp"
#include "blaze/apps/gmm.hpp"
#include "blaze/apps/kmeans.hpp"
#include "blaze/apps/nearest.hpp"
#include "blaze/apps/pagerank.hpp"
#include "blaze/apps/pi.hpp"
#include "blaze/apps/wordcount.hpp"
#include "blaze/cluster.hpp"
#include "blaze/detail/partition.hpp"
#include "blaze/error.hpp"

namespace blaze::bench {

namespace {

constexpr int kClusters = 5;
constexpr int kDim = 2;

std::string fmt_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T>
T parse_field(std::string_view s, const char* name) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw InputError(std::string("bad CSV field ") + name + ": '" + std::string(s) + "'");
  }
  return v;
}

struct RunResult {
  double items = 0;
  JobStats stats;
};

// Per-worker task with untimed setup and a repeatable timed body.
struct Task {
  std::function<RunResult()> run;
};

std::size_t count_tokens(const std::string& line) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : line) {
    if (c == ' ') {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

apps::PointCloudSpec cloud(const BenchConfig& cfg, std::uint64_t n) {
  apps::PointCloudSpec spec;
  spec.points = n;
  spec.clusters = kClusters;
  spec.dim = kDim;
  spec.seed = cfg.seed;
  return spec;
}

std::vector<apps::Point> first_points(const apps::PointCloudSpec& spec, int k) {
  const auto centers = apps::cloud_centers(spec);
  std::vector<apps::Point> out;
  for (int i = 0; i < k; ++i) out.push_back(apps::generate_point(spec, centers, static_cast<std::uint64_t>(i)));
  return out;
}

Task make_task(Context& ctx, const BenchConfig& cfg, std::uint64_t size) {
  const std::string& t = cfg.task;
  if (t == "wordcount") {
    std::vector<std::string> base;
    for (const char* f : {"genesis.txt", "sonnets.txt"}) {
      auto lines = apps::read_lines(apps::sample_text_dir() + "/" + f);
      base.insert(base.end(), lines.begin(), lines.end());
    }
    std::size_t tokens = 0;
    for (const auto& l : base) tokens += count_tokens(l);
    const std::uint64_t total = base.size() * size;
    const auto [lo, hi] = detail::block_range(total, ctx.rank(), ctx.size());
    std::vector<std::string> local;
    local.reserve(hi - lo);
    for (std::uint64_t i = lo; i < hi; ++i) local.push_back(base[i % base.size()]);
    auto lines = std::make_shared<DistVector<std::string>>(ctx, std::move(local));
    const double items = static_cast<double>(tokens) * static_cast<double>(size);
    return {[lines, items] {
      auto r = apps::wordcount(*lines);
      return RunResult{items, r.stats};
    }};
  }
  if (t == "pagerank") {
    apps::GraphSpec spec{size, std::max<std::uint64_t>(1, size / 10), cfg.seed};
    auto g = std::make_shared<apps::Graph>(apps::make_graph(apps::generate_edges(ctx, spec), spec.pages, cfg.damping));
    return {[g, size] {
      const auto st = apps::pagerank(*g);
      return RunResult{static_cast<double>(size) * st.iterations, {}};
    }};
  }
  if (t == "kmeans" || t == "gmm") {
    const auto spec = cloud(cfg, size);
    auto points = std::make_shared<DistVector<apps::Point>>(apps::generate_points(ctx, spec));
    const auto init = first_points(spec, kClusters);
    if (t == "kmeans") {
      return {[points, init, size] {
        const auto m = apps::kmeans(*points, init);
        return RunResult{static_cast<double>(size) * m.iterations, {}};
      }};
    }
    return {[points, init, size] {
      apps::GmmModel m;
      for (const auto& p : init) {
        m.alpha.push_back(1.0 / kClusters);
        m.mu.push_back(Eigen::Map<const Eigen::VectorXd>(p.data(), kDim));
        m.sigma.push_back(Eigen::MatrixXd::Identity(kDim, kDim));
      }
      apps::GmmOptions opt;
      opt.tol = 1e-3;
      opt.max_iters = 100;
      const auto fit = apps::gmm_em(*points, m, opt);
      return RunResult{static_cast<double>(size) * fit.iterations, {}};
    }};
  }
  if (t == "nn") {
    auto points = std::make_shared<DistVector<apps::Point>>(apps::generate_points(ctx, cloud(cfg, size)));
    return {[points, size] {
      apps::nearest_neighbors(*points, apps::Point(kDim, 0.0), 100);
      return RunResult{static_cast<double>(size), {}};
    }};
  }
  if (t == "pi") {
    Context* c = &ctx;
    const std::uint64_t seed = cfg.seed;
    return {[c, size, seed] {
      const auto r = apps::monte_carlo_pi(*c, size, seed);
      return RunResult{static_cast<double>(size), r.stats};
    }};
  }
  throw UsageError("unknown task '" + t + "'");
}

std::vector<BenchRecord> bench_worker(Context& ctx, const BenchConfig& cfg) {
  const std::uint64_t size = cfg.size ? cfg.size : default_size(cfg.task);
  const bool lead = ctx.rank() == 0;
  const auto phase = [&](std::string_view p) {
    if (lead && cfg.phase_hook) cfg.phase_hook(p);
  };
  PeakMemorySampler sampler;
  phase("setup");
  Task task = make_task(ctx, cfg, size);
  ctx.barrier();

  for (int i = 0; i < cfg.warmup; ++i) task.run();

  std::vector<BenchRecord> rows;
  double items = 0;
  for (int rep = 0; rep < cfg.reps; ++rep) {
    sampler.reset();
    ctx.barrier();
    phase("start");
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = task.run();
    ctx.barrier();
    const auto t1 = std::chrono::steady_clock::now();
    phase("stop");
    const auto sum = [&](std::uint64_t v) { return ctx.all_reduce_value(v, std::plus<>()); };

    BenchRecord rec;
    rec.task = cfg.task;
    rec.workers = ctx.size();
    rec.threads = ctx.threads();
    rec.size = size;
    rec.rep = std::to_string(rep);
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.items_per_sec = rec.seconds > 0 ? r.items / rec.seconds : 0;
    sampler.sample();
    rec.peak_rss_bytes = sampler.peak();
    rec.pairs_emitted = sum(r.stats.pairs_emitted);
    rec.pairs_shuffled = sum(r.stats.pairs_shuffled);
    rec.wire_bytes_out = sum(r.stats.wire_bytes_out);
    items = r.items;
    rows.push_back(std::move(rec));
  }
  sampler.stop();
  rows.push_back(summarize(rows, items));
  return rows;
}

std::string rows_to_text(const std::vector<BenchRecord>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::vector<BenchRecord> rows_from_text(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

}  // namespace

void BenchConfig::validate() const {
  if (std::find(std::begin(kTasks), std::end(kTasks), task) == std::end(kTasks)) {
    throw UsageError("unknown task '" + task + "' (expected wordcount, pagerank, kmeans, gmm, nn, or pi)");
  }
  if (reps < 1) throw UsageError("reps must be at least 1");
  if (warmup < 0) throw UsageError("warmup must be non-negative");
  if (threads < 1) throw UsageError("threads must be at least 1");
  if (!(damping >= 0 && damping <= 1)) throw UsageError("damping must be in [0, 1]");
  if (hosts.empty() && workers < 1) throw UsageError("workers must be at least 1");
  if (!hosts.empty() && (rank < 0 || rank >= static_cast<int>(hosts.size()))) {
    throw UsageError("rank " + std::to_string(rank) + " out of range for " + std::to_string(hosts.size()) + " hosts");
  }
}

std::uint64_t default_size(std::string_view task) {
  if (task == "wordcount") return 200;
  if (task == "pagerank") return 100000;
  if (task == "kmeans") return 100000;
  if (task == "gmm") return 10000;
  if (task == "nn") return 1000000;
  if (task == "pi") return 10000000;
  throw UsageError("unknown task '" + std::string(task) + "'");
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  cfg.validate();
  std::vector<BenchRecord> rows;
  if (!cfg.hosts.empty()) {
    ClusterConfig cc;
    cc.backend = Backend::sockets;
    cc.rank = cfg.rank;
    cc.size = static_cast<int>(cfg.hosts.size());
    cc.threads_per_worker = cfg.threads;
    cc.peers = cfg.hosts;
    auto ctx = init(cc);
    rows = bench_worker(*ctx, cfg);
    if (ctx->rank() != 0) return rows;
  } else if (cfg.workers == 1 && !cfg.backend) {
    ClusterConfig cc;
    cc.threads_per_worker = cfg.threads;
    auto ctx = init(cc);
    rows = bench_worker(*ctx, cfg);
  } else {
    LocalClusterOptions opt;
    opt.workers = cfg.workers;
    opt.threads = cfg.threads;
    opt.backend = cfg.backend.value_or(Backend::sockets);
    rows = rows_from_text(run_local_cluster(opt, [&](Context& ctx) { return rows_to_text(bench_worker(ctx, cfg)); }));
  }
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out, std::ios::trunc);
    if (!out) throw InputError("cannot write " + cfg.out);
    write_csv(out, rows);
    if (!out.flush()) throw InputError("write failed for " + cfg.out);
  }
  return rows;
}

BenchRecord summarize(const std::vector<BenchRecord>& reps, double items_per_rep) {
  if (reps.empty()) throw UsageError("no repetitions to summarize");
  BenchRecord s = reps.back();
  s.rep = "summary";
  const double n = static_cast<double>(reps.size());
  double mean = 0;
  for (const auto& r : reps) mean += r.seconds;
  mean /= n;
  double var = 0;
  for (const auto& r : reps) var += (r.seconds - mean) * (r.seconds - mean);
  s.seconds = mean;
  s.seconds_stddev = reps.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  s.items_per_sec = mean > 0 ? items_per_rep / mean : 0;
  s.peak_rss_bytes.reset();
  for (const auto& r : reps) {
    if (r.peak_rss_bytes) s.peak_rss_bytes = std::max(s.peak_rss_bytes.value_or(0), *r.peak_rss_bytes);
  }
  return s;
}

std::string csv_header() {
  return "task,workers,threads,size,rep,seconds,items_per_sec,peak_rss_bytes,pairs_emitted,pairs_shuffled,"
         "wire_bytes_out";
}

std::string to_csv_row(const BenchRecord& r) {
  std::string seconds = fmt_double(r.seconds);
  if (r.seconds_stddev) seconds += "+-" + fmt_double(*r.seconds_stddev);
  std::ostringstream out;
  out << r.task << ',' << r.workers << ',' << r.threads << ',' << r.size << ',' << r.rep << ',' << seconds << ','
      << fmt_double(r.items_per_sec) << ',' << (r.peak_rss_bytes ? std::to_string(*r.peak_rss_bytes) : "NA") << ','
      << r.pairs_emitted << ',' << r.pairs_shuffled << ',' << r.wire_bytes_out;
  return out.str();
}

BenchRecord parse_csv_row(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> f;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    f.push_back(line.substr(start, comma == line.npos ? line.npos : comma - start));
    if (comma == line.npos) break;
    start = comma + 1;
  }
  if (f.size() != 11) throw InputError("CSV row has " + std::to_string(f.size()) + " fields, expected 11");
  BenchRecord r;
  r.task = std::string(f[0]);
  r.workers = parse_field<int>(f[1], "workers");
  r.threads = parse_field<int>(f[2], "threads");
  r.size = parse_field<std::uint64_t>(f[3], "size");
  r.rep = std::string(f[4]);
  if (const auto pm = f[5].find("+-"); pm != std::string_view::npos) {
    r.seconds = parse_field<double>(f[5].substr(0, pm), "seconds");
    r.seconds_stddev = parse_field<double>(f[5].substr(pm + 2), "seconds");
  } else {
    r.seconds = parse_field<double>(f[5], "seconds");
  }
  r.items_per_sec = parse_field<double>(f[6], "items_per_sec");
  if (f[7] != "NA") r.peak_rss_bytes = parse_field<std::uint64_t>(f[7], "peak_rss_bytes");
  r.pairs_emitted = parse_field<std::uint64_t>(f[8], "pairs_emitted");
  r.pairs_shuffled = parse_field<std::uint64_t>(f[9], "pairs_shuffled");
  r.wire_bytes_out = parse_field<std::uint64_t>(f[10], "wire_bytes_out");
  return r;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) out << to_csv_row(r) << '\n';
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::vector<BenchRecord> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw InputError("unexpected CSV header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_row(line));
  }
  return rows;
}

std::optional<std::uint64_t> current_rss_bytes() {
  std::ifstream statm("/proc/self/statm");
  std::uint64_t size = 0, resident = 0;
  if (!(statm >> size >> resident)) return std::nullopt;
  const long page = sysconf(_SC_PAGESIZE);
  if (page <= 0) return std::nullopt;
  return resident * static_cast<std::uint64_t>(page);
}

PeakMemorySampler::PeakMemorySampler(std::chrono::milliseconds period) : period_(period) {
  sample();
  thread_ = std::thread([this] {
    while (running_.load(std::memory_order_relaxed)) {
      std::this_thread::sleep_for(period_);
      sample();
    }
  });
}

PeakMemorySampler::~PeakMemorySampler() { stop(); }

void PeakMemorySampler::sample() noexcept {
  const auto rss = current_rss_bytes();
  if (!rss) {
    available_ = false;
    return;
  }
  std::uint64_t prev = peak_.load(std::memory_order_relaxed);
  while (prev < *rss && !peak_.compare_exchange_weak(prev, *rss)) {
  }
}

std::optional<std::uint64_t> PeakMemorySampler::stop() {
  if (thread_.joinable()) {
    running_ = false;
    thread_.join();
    sample();
  }
  return peak();
}

std::optional<std::uint64_t> PeakMemorySampler::peak() const {
  if (!available_) return std::nullopt;
  return peak_.load();
}

void PeakMemorySampler::reset() {
  peak_ = 0;
  sample();
}

}  // namespace blaze::bench
