#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "reca/device.hpp"
#include "reca/engine.hpp"
#include "reca/profiles.hpp"
#include "reca/trace.hpp"

namespace reca {

inline constexpr uint64_t kAutoWarmup = ~0ull;

struct RunConfig {
  double cache_fraction = 0.20;          // of the trace's unique pages
  uint64_t warmup_requests = kAutoWarmup;  // default min(200k, 20% of trace)
  uint64_t workload_check_threshold = 100000;
  bool per_process = false;
  uint64_t seed = 1;
  uint64_t baseline_line_size = 4096;
  DeviceParams devices;
};

struct Metrics {
  std::string engine;
  uint64_t requests = 0;  // measured (post-warmup)
  uint64_t warmup_requests = 0;
  double avg_response_us = 0;
  double p50_response_us = 0;
  double p95_response_us = 0;
  double p99_response_us = 0;
  double hit_ratio = 0;
  uint64_t blocks = 0;
  uint64_t hits = 0;
  uint64_t hits_partial = 0;
  uint64_t misses = 0;
  uint64_t bypasses = 0;
  uint64_t promotions = 0;
  uint64_t evictions = 0;
  uint64_t ssd_reads = 0;
  uint64_t ssd_writes = 0;
  uint64_t ssd_writes_bytes = 0;
  uint64_t ssd_user_write_bytes = 0;
  uint64_t hdd_reads = 0;
  uint64_t hdd_writes = 0;
  double background_us = 0;
  // full-run series, window of 10,000 requests: (window end index, hit ratio)
  std::vector<std::pair<uint64_t, double>> windowed_hit_ratio;
  // (request index, category name) whenever the active category changed
  std::vector<std::pair<uint64_t, std::string>> category_timeline;
};

struct EngineBundle {
  std::unique_ptr<DevicePair> devices;
  std::unique_ptr<Engine> engine;
};

/// Builds one of {reca, lru, larc, freq} sized at cache_fraction of the
/// trace's unique pages. Throws std::invalid_argument on an unknown name.
EngineBundle BuildEngine(const std::string& name, const Trace& trace, const RunConfig& cfg,
                         std::shared_ptr<const CharacteristicsTable> table);

/// Closed-loop replay of the whole trace through one engine.
Metrics Run(const Trace& trace, Engine& engine, const RunConfig& cfg,
            const CharacteristicsTable* table = nullptr);

Metrics RunEngine(const std::string& name, const Trace& trace, const RunConfig& cfg,
                  std::shared_ptr<const CharacteristicsTable> table);

/// Per-process characterization: one ReCA sub-cache per pid, capacity
/// partitioned by unique-page footprint per window (min 1% each).
Metrics RunPerProcess(const Trace& trace, const RunConfig& cfg,
                      std::shared_ptr<const CharacteristicsTable> table,
                      std::vector<std::pair<uint32_t, uint64_t>>* final_partition = nullptr);

/// Same trace and device parameters through each engine.
std::vector<Metrics> Compare(const Trace& trace, const std::vector<std::string>& engines,
                             const RunConfig& cfg,
                             std::shared_ptr<const CharacteristicsTable> table);

/// Raw replay against the bare HDD model (the interleaving experiment),
/// returns total time in microseconds.
double RawHddReplayTime(const Trace& trace, const DeviceParams& params);

/// Parses the run configuration file ([run] and [devices] sections).
RunConfig LoadRunConfig(std::istream& in);
RunConfig LoadRunConfigFile(const std::string& path);

// CSV emission; headers are stable, documented in the README.
void WriteMetricsCsv(const Metrics& m, std::ostream& out);
void WriteSeriesCsv(const Metrics& m, std::ostream& out);
void WriteTimelineCsv(const Metrics& m, std::ostream& out);
void WriteComparisonCsv(const std::vector<Metrics>& rows, std::ostream& out);

}  // namespace reca
