#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <unistd.h>

#include "blaze/bench/bench.hpp"
#include "blaze/error.hpp"
#include "test_util.hpp"

using namespace blaze;
using namespace blaze::bench;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("blaze_bench_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

BenchConfig small(std::string task, std::uint64_t size) {
  BenchConfig cfg;
  cfg.task = std::move(task);
  cfg.size = size;
  cfg.warmup = 0;
  cfg.reps = 2;
  return cfg;
}

// Touches every page so the allocation is resident.
std::unique_ptr<char[]> hold(std::size_t bytes) {
  auto p = std::make_unique<char[]>(bytes);
  std::memset(p.get(), 1, bytes);
  return p;
}

constexpr std::uint64_t kMiB = 1024 * 1024;

}  // namespace

TEST(Bench, PiWritesOneRowPerRepPlusSummary) {
  BenchConfig cfg = small("pi", 1000000);
  cfg.reps = 3;
  cfg.out = scratch("pi.csv");
  const auto rows = run_bench(cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].rep, std::to_string(i));
    EXPECT_GT(rows[i].seconds, 0);
    EXPECT_NEAR(rows[i].items_per_sec, 1e6 / rows[i].seconds, 1e-6 * rows[i].items_per_sec);
  }
  const auto& s = rows[3];
  EXPECT_TRUE(s.is_summary());
  const double mean = (rows[0].seconds + rows[1].seconds + rows[2].seconds) / 3;
  double var = 0;
  for (int i = 0; i < 3; ++i) var += (rows[i].seconds - mean) * (rows[i].seconds - mean);
  EXPECT_NEAR(s.seconds, mean, 1e-12);
  ASSERT_TRUE(s.seconds_stddev);
  EXPECT_NEAR(*s.seconds_stddev, std::sqrt(var / 2), 1e-12);
  EXPECT_NEAR(s.items_per_sec, 1e6 / mean, 1e-6 * s.items_per_sec);

  std::ifstream in(cfg.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, csv_header());
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) lines += !l.empty();
  EXPECT_EQ(lines, 4u);
  std::ifstream again(cfg.out);
  const auto parsed = read_csv(again);
  ASSERT_EQ(parsed.size(), 4u);
  EXPECT_EQ(parsed[3].rep, "summary");
}

TEST(Bench, CsvRoundTrip) {
  BenchRecord r;
  r.task = "kmeans";
  r.workers = 3;
  r.threads = 2;
  r.size = 12345;
  r.rep = "1";
  r.seconds = 0.123456789012345;
  r.items_per_sec = 98765.4321;
  r.peak_rss_bytes = 1u << 30;
  r.pairs_emitted = 7;
  r.pairs_shuffled = 5;
  r.wire_bytes_out = 99;
  const auto back = parse_csv_row(to_csv_row(r));
  EXPECT_EQ(back.task, r.task);
  EXPECT_EQ(back.workers, 3);
  EXPECT_EQ(back.threads, 2);
  EXPECT_EQ(back.size, 12345u);
  EXPECT_EQ(back.rep, "1");
  EXPECT_DOUBLE_EQ(back.seconds, r.seconds);
  EXPECT_DOUBLE_EQ(back.items_per_sec, r.items_per_sec);
  EXPECT_EQ(back.peak_rss_bytes, r.peak_rss_bytes);
  EXPECT_EQ(back.pairs_emitted, 7u);
  EXPECT_EQ(back.pairs_shuffled, 5u);
  EXPECT_EQ(back.wire_bytes_out, 99u);

  r.rep = "summary";
  r.seconds_stddev = 0.01;
  r.peak_rss_bytes.reset();
  const std::string row = to_csv_row(r);
  EXPECT_NE(row.find("+-"), std::string::npos);
  EXPECT_NE(row.find(",NA,"), std::string::npos);
  const auto s = parse_csv_row(row);
  EXPECT_TRUE(s.is_summary());
  ASSERT_TRUE(s.seconds_stddev);
  EXPECT_DOUBLE_EQ(*s.seconds_stddev, 0.01);
  EXPECT_FALSE(s.peak_rss_bytes);

  std::stringstream csv;
  write_csv(csv, {back, s});
  const auto rows = read_csv(csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(to_csv_row(rows[0]), to_csv_row(back));
  EXPECT_EQ(to_csv_row(rows[1]), to_csv_row(s));

  EXPECT_THROW(parse_csv_row("pi,1,1"), InputError);
  EXPECT_THROW(parse_csv_row("pi,x,1,10,0,1,1,NA,0,0,0"), InputError);
  std::stringstream bad("task,seconds\n");
  EXPECT_THROW(read_csv(bad), InputError);
}

TEST(Bench, EveryTaskProducesParsableRows) {
  const std::pair<const char*, std::uint64_t> tasks[] = {{"wordcount", 2}, {"pagerank", 2000}, {"kmeans", 2000},
                                                         {"gmm", 500},     {"nn", 5000},       {"pi", 10000}};
  for (const auto& [task, size] : tasks) {
    BenchConfig cfg = small(task, size);
    cfg.threads = 2;
    const auto rows = run_bench(cfg);
    ASSERT_EQ(rows.size(), 3u) << task;
    for (const auto& r : rows) {
      EXPECT_EQ(r.task, task);
      EXPECT_EQ(r.size, size);
      EXPECT_EQ(r.threads, 2);
      EXPECT_GT(r.items_per_sec, 0) << task;
      std::stringstream line;
      write_csv(line, {r});
      EXPECT_EQ(read_csv(line).size(), 1u);
    }
  }
}

TEST(Bench, MultiWorkerCountersAreSummed) {
  for (Backend b : {Backend::in_process, Backend::sockets}) {
    BenchConfig cfg = small("wordcount", 3);
    cfg.workers = 2;
    cfg.backend = b;
    const auto rows = run_bench(cfg);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].workers, 2);
    EXPECT_GT(rows[0].pairs_emitted, rows[0].pairs_shuffled);
    EXPECT_GT(rows[0].pairs_shuffled, 0u);
    EXPECT_GT(rows[0].wire_bytes_out, 0u);
  }
}

TEST(Bench, TimedRegionExcludesSetup) {
  using clock = std::chrono::steady_clock;
  std::vector<std::pair<std::string, clock::time_point>> events;
  BenchConfig cfg = small("kmeans", 20000);
  cfg.warmup = 1;
  cfg.reps = 3;
  cfg.phase_hook = [&](std::string_view p) { events.emplace_back(std::string(p), clock::now()); };
  const auto rows = run_bench(cfg);
  ASSERT_EQ(events.size(), 7u);
  EXPECT_EQ(events[0].first, "setup");
  for (int rep = 0; rep < 3; ++rep) {
    const auto& start = events[1 + 2 * rep];
    const auto& stop = events[2 + 2 * rep];
    EXPECT_EQ(start.first, "start");
    EXPECT_EQ(stop.first, "stop");
    const double bracket = std::chrono::duration<double>(stop.second - start.second).count();
    EXPECT_LE(rows[rep].seconds, bracket);
    EXPECT_GT(rows[rep].seconds, 0);
  }
  // Setup and warmup happen before the first timer starts.
  EXPECT_GT(events[1].second - events[0].second, clock::duration::zero());
}

TEST(Bench, ConfigErrorsAreUsageErrors) {
  EXPECT_THROW(run_bench(small("sort", 1)), UsageError);
  BenchConfig cfg = small("pi", 10);
  cfg.reps = 0;
  EXPECT_THROW(run_bench(cfg), UsageError);
  cfg.reps = 1;
  cfg.warmup = -1;
  EXPECT_THROW(run_bench(cfg), UsageError);
  cfg.warmup = 0;
  cfg.threads = 0;
  EXPECT_THROW(run_bench(cfg), UsageError);
  cfg.threads = 1;
  cfg.damping = 1.01;
  EXPECT_THROW(run_bench(cfg), UsageError);
  EXPECT_THROW(default_size("sort"), UsageError);
  for (auto t : kTasks) EXPECT_GT(default_size(t), 0u);
}

TEST(Bench, UnwritableOutputIsReported) {
  BenchConfig cfg = small("pi", 100);
  cfg.out = "/nonexistent-dir/x/out.csv";
  EXPECT_THROW(run_bench(cfg), InputError);
}

TEST(PeakMemory, HeldAllocationIsSeen) {
  const auto baseline = current_rss_bytes();
  ASSERT_TRUE(baseline) << "resident set size not available on this platform";
  PeakMemorySampler sampler;
  {
    const auto block = hold(512 * kMiB);
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
  }
  const auto peak = sampler.stop();
  ASSERT_TRUE(peak);
  EXPECT_GE(*peak, 512 * kMiB);
  EXPECT_GE(*peak, *baseline + 500 * kMiB);
}

TEST(PeakMemory, IdleStaysNearBaseline) {
  const auto baseline = current_rss_bytes();
  ASSERT_TRUE(baseline);
  PeakMemorySampler sampler;
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  const auto peak = sampler.stop();
  ASSERT_TRUE(peak);
  EXPECT_LE(static_cast<double>(*peak), 1.2 * static_cast<double>(*baseline));
  EXPECT_GE(static_cast<double>(*peak), 0.8 * static_cast<double>(*baseline));
}

TEST(PeakMemory, PeakIsTheLargerOfTwoRegions) {
  PeakMemorySampler sampler;
  std::uint64_t after_first = 0;
  {
    const auto a = hold(256 * kMiB);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    after_first = sampler.peak().value();
  }
  {
    const auto b = hold(64 * kMiB);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  const auto peak = sampler.stop().value();
  EXPECT_GE(after_first, 256 * kMiB);
  EXPECT_GE(peak, after_first);
  EXPECT_LT(peak, after_first + 32 * kMiB);

  // After a reset only the second region counts.
  PeakMemorySampler fresh;
  {
    const auto big = hold(256 * kMiB);
    fresh.sample();
  }
  fresh.reset();
  {
    const auto b = hold(64 * kMiB);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  EXPECT_LT(fresh.stop().value(), after_first);
}

TEST(PeakMemory, GmmRunPeaksAboveBaseline) {
  const auto baseline = current_rss_bytes().value();
  BenchConfig cfg = small("gmm", 20000);
  cfg.reps = 1;
  const auto rows = run_bench(cfg);
  ASSERT_TRUE(rows[0].peak_rss_bytes);
  EXPECT_GT(*rows[0].peak_rss_bytes, baseline);
}
