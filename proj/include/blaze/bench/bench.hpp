#pragma once

// Benchmark harness: data generation, warmup, timed repetitions, throughput,
// peak resident memory and engine counters, written as CSV.
//
// CSV columns (header row first):
//   task, workers, threads, size, rep, seconds, items_per_sec, peak_rss_bytes,
//   pairs_emitted, pairs_shuffled, wire_bytes_out
// One row per measured repetition (rep = 0, 1, ...), then a summary row with
// rep = "summary" and seconds = "<mean>+-<sample stddev>". peak_rss_bytes is
// "NA" when the platform gives no reading.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "blaze/transport.hpp"

namespace blaze::bench {

inline constexpr std::string_view kTasks[] = {"wordcount", "pagerank", "kmeans", "gmm", "nn", "pi"};

struct BenchConfig {
  std::string task;
  int workers = 1;
  int threads = 1;
  // Task-specific size: text copies (wordcount), edges (pagerank), points
  // (kmeans, gmm, nn), samples (pi). 0 picks the task default.
  std::uint64_t size = 0;
  std::uint64_t seed = 1;
  int warmup = 1;
  int reps = 3;
  // PageRank d in x' = (1 - d)/N + d * A x.
  double damping = 0.15;
  // host:port per rank for a real cluster; empty runs `workers` local
  // processes over loopback.
  std::vector<std::string> hosts;
  int rank = 0;
  // Forces the backend of local runs (default: sockets when workers > 1).
  std::optional<Backend> backend;
  std::string out;
  // Observes "setup", "start" and "stop" on rank 0, in order, for each run.
  std::function<void(std::string_view)> phase_hook;

  void validate() const;
};

struct BenchRecord {
  std::string task;
  int workers = 1;
  int threads = 1;
  std::uint64_t size = 0;
  // Repetition index, or "summary".
  std::string rep;
  double seconds = 0;
  // Sample standard deviation of seconds; summary rows only.
  std::optional<double> seconds_stddev;
  double items_per_sec = 0;
  std::optional<std::uint64_t> peak_rss_bytes;
  std::uint64_t pairs_emitted = 0;
  std::uint64_t pairs_shuffled = 0;
  std::uint64_t wire_bytes_out = 0;

  bool is_summary() const noexcept { return rep == "summary"; }
};

std::uint64_t default_size(std::string_view task);

// Runs cfg.warmup untimed and cfg.reps timed repetitions. Returns the
// repetition rows followed by the summary row; writes them to cfg.out when set.
std::vector<BenchRecord> run_bench(const BenchConfig& cfg);

// Summary of measured rows: mean seconds, sample stddev, throughput at the
// mean, largest peak RSS, counters of the last repetition.
BenchRecord summarize(const std::vector<BenchRecord>& reps, double items_per_rep);

std::string csv_header();
std::string to_csv_row(const BenchRecord& r);
BenchRecord parse_csv_row(std::string_view line);
void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows);
std::vector<BenchRecord> read_csv(std::istream& in);

// Current resident set size in bytes, or nullopt if unavailable.
std::optional<std::uint64_t> current_rss_bytes();

// Samples the resident set size of this process on a background thread at
// 100 Hz while alive.
class PeakMemorySampler {
 public:
  explicit PeakMemorySampler(std::chrono::milliseconds period = std::chrono::milliseconds(10));
  ~PeakMemorySampler();

  PeakMemorySampler(const PeakMemorySampler&) = delete;
  PeakMemorySampler& operator=(const PeakMemorySampler&) = delete;

  // Takes a final sample and stops the thread. Returns the maximum observed.
  std::optional<std::uint64_t> stop();
  std::optional<std::uint64_t> peak() const;
  // Resets the running peak to the current reading.
  void reset();
  // Takes a reading now.
  void sample() noexcept;

 private:
  std::chrono::milliseconds period_;
  std::atomic<bool> running_{true};
  std::atomic<bool> available_{true};
  std::atomic<std::uint64_t> peak_{0};
  std::thread thread_;
};

}  // namespace blaze::bench
