#include "reca/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "reca/baselines.hpp"
#include "reca/kvfile.hpp"
#include "reca/reca_engine.hpp"

namespace reca {

namespace {

constexpr uint64_t kSeriesWindow = 10000;

uint64_t DefaultWarmup(const Trace& trace) {
  return std::min<uint64_t>(200000, trace.requests.size() / 5);
}

uint64_t CapacityBytes(const Trace& trace, double fraction) {
  double pages = fraction * static_cast<double>(trace.unique_pages);
  uint64_t p = static_cast<uint64_t>(std::llround(pages));
  return std::max<uint64_t>(p, 1) * kPageBytes;
}

double Percentile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  if (rank == 0) rank = 1;
  return sorted[std::min(rank - 1, sorted.size() - 1)];
}

struct Snapshot {
  EngineStats es;
  uint64_t hdd_reads = 0, hdd_writes = 0, ssd_reads = 0, ssd_writes = 0, ssd_bytes = 0;

  static Snapshot Of(const Engine& e) {
    Snapshot s;
    s.es = e.stats();
    const DevicePair& d = e.devices();
    s.hdd_reads = d.hdd.reads();
    s.hdd_writes = d.hdd.writes();
    s.ssd_reads = d.ssd.reads();
    s.ssd_writes = d.ssd.writes();
    s.ssd_bytes = d.ssd.host_writes_bytes();
    return s;
  }
};

void FillCounters(Metrics& m, const Snapshot& warm, const Snapshot& fin) {
  m.blocks = fin.es.blocks - warm.es.blocks;
  m.hits = fin.es.hits - warm.es.hits;
  m.hits_partial = fin.es.hits_partial - warm.es.hits_partial;
  m.misses = fin.es.misses - warm.es.misses;
  m.bypasses = fin.es.bypasses - warm.es.bypasses;
  m.promotions = fin.es.promotions - warm.es.promotions;
  m.evictions = fin.es.evictions - warm.es.evictions;
  m.ssd_user_write_bytes = fin.es.ssd_user_write_bytes - warm.es.ssd_user_write_bytes;
  m.background_us = fin.es.background_us - warm.es.background_us;
  m.hdd_reads = fin.hdd_reads - warm.hdd_reads;
  m.hdd_writes = fin.hdd_writes - warm.hdd_writes;
  m.ssd_reads = fin.ssd_reads - warm.ssd_reads;
  m.ssd_writes = fin.ssd_writes - warm.ssd_writes;
  m.ssd_writes_bytes = fin.ssd_bytes - warm.ssd_bytes;
  m.hit_ratio = m.blocks > 0 ? static_cast<double>(m.hits) / static_cast<double>(m.blocks) : 0;
}

void FillResponses(Metrics& m, std::vector<double>& responses) {
  m.requests = responses.size();
  if (responses.empty()) return;
  double total = 0;
  for (double r : responses) total += r;
  m.avg_response_us = total / static_cast<double>(responses.size());
  std::sort(responses.begin(), responses.end());
  m.p50_response_us = Percentile(responses, 0.50);
  m.p95_response_us = Percentile(responses, 0.95);
  m.p99_response_us = Percentile(responses, 0.99);
}

std::string CategoryName(const CharacteristicsTable* table, size_t idx) {
  if (table && idx < table->size()) return table->at(idx).name;
  return std::to_string(idx);
}

}  // namespace

EngineBundle BuildEngine(const std::string& name, const Trace& trace, const RunConfig& cfg,
                         std::shared_ptr<const CharacteristicsTable> table) {
  EngineBundle b;
  b.devices = std::make_unique<DevicePair>(cfg.devices);
  uint64_t capacity = CapacityBytes(trace, cfg.cache_fraction);
  if (name == "reca") {
    RecaEngine::Config rc;
    rc.capacity_bytes = capacity;
    rc.table = table ? table : std::make_shared<const CharacteristicsTable>(DefaultTable());
    rc.workload_check_threshold = cfg.workload_check_threshold;
    b.engine = std::make_unique<RecaEngine>(rc, b.devices.get());
  } else if (name == "lru" || name == "larc" || name == "freq") {
    BaselineConfig bc;
    bc.capacity_bytes = capacity;
    bc.line_size = cfg.baseline_line_size;
    if (name == "lru") {
      b.engine = std::make_unique<LruEngine>(bc, b.devices.get());
    } else if (name == "larc") {
      b.engine = std::make_unique<LarcEngine>(bc, b.devices.get());
    } else {
      b.engine = std::make_unique<FreqEngine>(bc, b.devices.get());
    }
  } else {
    throw std::invalid_argument("unknown engine '" + name + "' (expected reca|lru|larc|freq)");
  }
  return b;
}

Metrics Run(const Trace& trace, Engine& engine, const RunConfig& cfg,
            const CharacteristicsTable* table) {
  Metrics m;
  m.engine = engine.name();
  uint64_t n = trace.requests.size();
  uint64_t warmup = cfg.warmup_requests == kAutoWarmup ? DefaultWarmup(trace) : cfg.warmup_requests;
  warmup = std::min(warmup, n);
  m.warmup_requests = warmup;

  std::vector<double> responses;
  responses.reserve(n - warmup);
  Snapshot warm_snap;
  uint64_t win_hits = 0, win_blocks = 0;
  Snapshot win_prev = Snapshot::Of(engine);

  for (uint64_t i = 0; i < n; ++i) {
    if (i == warmup) warm_snap = Snapshot::Of(engine);
    double sync_us = engine.OnRequest(trace.requests[i]);
    if (i >= warmup) responses.push_back(sync_us);
    if ((i + 1) % kSeriesWindow == 0) {
      Snapshot now = Snapshot::Of(engine);
      win_hits = now.es.hits - win_prev.es.hits;
      win_blocks = now.es.blocks - win_prev.es.blocks;
      win_prev = now;
      m.windowed_hit_ratio.emplace_back(
          i + 1, win_blocks > 0 ? static_cast<double>(win_hits) / win_blocks : 0.0);
    }
  }
  if (warmup == n) warm_snap = Snapshot::Of(engine);

  FillCounters(m, warm_snap, Snapshot::Of(engine));
  FillResponses(m, responses);
  for (const auto& [idx, cat] : engine.category_timeline()) {
    m.category_timeline.emplace_back(idx, CategoryName(table, cat));
  }
  return m;
}

Metrics RunEngine(const std::string& name, const Trace& trace, const RunConfig& cfg,
                  std::shared_ptr<const CharacteristicsTable> table) {
  EngineBundle b = BuildEngine(name, trace, cfg, table);
  return Run(trace, *b.engine, cfg, table.get());
}

std::vector<Metrics> Compare(const Trace& trace, const std::vector<std::string>& engines,
                             const RunConfig& cfg,
                             std::shared_ptr<const CharacteristicsTable> table) {
  std::vector<Metrics> rows;
  rows.reserve(engines.size());
  for (const std::string& name : engines) {
    rows.push_back(RunEngine(name, trace, cfg, table));
  }
  return rows;
}

Metrics RunPerProcess(const Trace& trace, const RunConfig& cfg,
                      std::shared_ptr<const CharacteristicsTable> table,
                      std::vector<std::pair<uint32_t, uint64_t>>* final_partition) {
  if (!table) table = std::make_shared<const CharacteristicsTable>(DefaultTable());

  // pids in order of first appearance
  std::vector<uint32_t> pids;
  {
    std::unordered_set<uint32_t> seen;
    for (const IoRequest& io : trace.requests) {
      if (seen.insert(io.pid).second) pids.push_back(io.pid);
    }
  }
  if (pids.empty()) throw std::invalid_argument("empty trace");

  uint64_t total_bytes = CapacityBytes(trace, cfg.cache_fraction);
  DevicePair devices(cfg.devices);

  struct Sub {
    std::unique_ptr<RecaEngine> engine;
    std::unordered_set<uint64_t> window_pages;
    uint64_t footprint = 1;  // last complete window, pages
    uint64_t analyzes = 0;
    size_t timeline_seen = 0;
  };
  std::unordered_map<uint32_t, Sub> subs;
  for (uint32_t pid : pids) {
    RecaEngine::Config rc;
    rc.capacity_bytes = std::max<uint64_t>(total_bytes / pids.size(), kPageBytes);
    rc.table = table;
    rc.workload_check_threshold = cfg.workload_check_threshold;
    subs[pid].engine = std::make_unique<RecaEngine>(rc, &devices);
  }

  auto rebalance = [&] {
    if (pids.size() < 2) return;
    double total_fp = 0;
    for (uint32_t pid : pids) total_fp += static_cast<double>(subs[pid].footprint);
    if (total_fp <= 0) return;
    double share_sum = 0;
    std::vector<double> shares(pids.size());
    for (size_t i = 0; i < pids.size(); ++i) {
      shares[i] = std::max(0.01, static_cast<double>(subs[pids[i]].footprint) / total_fp);
      share_sum += shares[i];
    }
    for (size_t i = 0; i < pids.size(); ++i) {
      uint64_t bytes = static_cast<uint64_t>(shares[i] / share_sum * total_bytes);
      subs[pids[i]].engine->Resize(std::max<uint64_t>(bytes, kPageBytes));
    }
  };

  Metrics m;
  m.engine = "reca-perproc";
  uint64_t n = trace.requests.size();
  uint64_t warmup = cfg.warmup_requests == kAutoWarmup ? DefaultWarmup(trace) : cfg.warmup_requests;
  warmup = std::min(warmup, n);
  m.warmup_requests = warmup;

  auto sum_stats = [&] {
    Snapshot s;
    for (uint32_t pid : pids) {
      const EngineStats& es = subs[pid].engine->stats();
      s.es.blocks += es.blocks;
      s.es.hits += es.hits;
      s.es.hits_partial += es.hits_partial;
      s.es.misses += es.misses;
      s.es.bypasses += es.bypasses;
      s.es.promotions += es.promotions;
      s.es.evictions += es.evictions;
      s.es.ssd_user_write_bytes += es.ssd_user_write_bytes;
      s.es.background_us += es.background_us;
    }
    s.hdd_reads = devices.hdd.reads();
    s.hdd_writes = devices.hdd.writes();
    s.ssd_reads = devices.ssd.reads();
    s.ssd_writes = devices.ssd.writes();
    s.ssd_bytes = devices.ssd.host_writes_bytes();
    return s;
  };

  std::vector<double> responses;
  responses.reserve(n - warmup);
  Snapshot warm_snap;
  Snapshot win_prev = sum_stats();

  for (uint64_t i = 0; i < n; ++i) {
    if (i == warmup) warm_snap = sum_stats();
    const IoRequest& io = trace.requests[i];
    Sub& sub = subs[io.pid];
    double sync_us = sub.engine->OnRequest(io);
    if (i >= warmup) responses.push_back(sync_us);

    uint64_t first = io.offset / kPageBytes;
    uint64_t last = (io.end() - 1) / kPageBytes;
    for (uint64_t p = first; p <= last; ++p) sub.window_pages.insert(p);

    // per-pid analyze boundary: footprint snapshot + capacity re-partition
    if (sub.engine->analyze_count() != sub.analyzes) {
      sub.analyzes = sub.engine->analyze_count();
      sub.footprint = std::max<uint64_t>(sub.window_pages.size(), 1);
      sub.window_pages.clear();
      rebalance();
    }
    const auto& tl = sub.engine->category_timeline();
    while (sub.timeline_seen < tl.size()) {
      const auto& entry = tl[sub.timeline_seen++];
      m.category_timeline.emplace_back(
          i, "pid" + std::to_string(io.pid) + ":" + CategoryName(table.get(), entry.second));
    }

    if ((i + 1) % kSeriesWindow == 0) {
      Snapshot now = sum_stats();
      uint64_t wh = now.es.hits - win_prev.es.hits;
      uint64_t wb = now.es.blocks - win_prev.es.blocks;
      win_prev = now;
      m.windowed_hit_ratio.emplace_back(i + 1,
                                        wb > 0 ? static_cast<double>(wh) / wb : 0.0);
    }
  }
  if (warmup == n) warm_snap = sum_stats();

  FillCounters(m, warm_snap, sum_stats());
  FillResponses(m, responses);
  if (final_partition) {
    final_partition->clear();
    for (uint32_t pid : pids) {
      final_partition->emplace_back(pid, subs[pid].engine->capacity_lines());
    }
  }
  return m;
}

double RawHddReplayTime(const Trace& trace, const DeviceParams& params) {
  HddModel hdd(params);
  double total = 0;
  for (const IoRequest& io : trace.requests) {
    total += hdd.Access(io.op, io.offset, io.len);
  }
  return total;
}

RunConfig LoadRunConfig(std::istream& in) {
  RunConfig cfg;
  for (const KvSection& sec : ParseKvStream(in)) {
    if (sec.name == "run") {
      for (const KvEntry& e : sec.entries) {
        if (e.key == "cache_fraction") cfg.cache_fraction = KvToDouble(e);
        else if (e.key == "warmup_requests") cfg.warmup_requests = KvToUint(e);
        else if (e.key == "workload_check_threshold") cfg.workload_check_threshold = KvToUint(e);
        else if (e.key == "per_process") cfg.per_process = KvToBool(e);
        else if (e.key == "seed") cfg.seed = KvToUint(e);
        else if (e.key == "baseline_line_size") cfg.baseline_line_size = KvToUint(e);
        else throw KvError(e.line, "unknown [run] key '" + e.key + "'");
      }
    } else if (sec.name == "devices") {
      DeviceParams& d = cfg.devices;
      for (const KvEntry& e : sec.entries) {
        if (e.key == "hdd_seq_bw") d.hdd_seq_bw = KvToDouble(e);
        else if (e.key == "hdd_rnd_read_iops") d.hdd_rnd_read_iops = KvToDouble(e);
        else if (e.key == "hdd_rnd_write_iops") d.hdd_rnd_write_iops = KvToDouble(e);
        else if (e.key == "hdd_strided_read_mult") d.hdd_strided_read_mult = KvToDouble(e);
        else if (e.key == "hdd_strided_write_mult") d.hdd_strided_write_mult = KvToDouble(e);
        else if (e.key == "ssd_seq_read_bw") d.ssd_seq_read_bw = KvToDouble(e);
        else if (e.key == "ssd_seq_write_bw") d.ssd_seq_write_bw = KvToDouble(e);
        else if (e.key == "ssd_rnd_read_iops") d.ssd_rnd_read_iops = KvToDouble(e);
        else if (e.key == "ssd_rnd_write_iops") d.ssd_rnd_write_iops = KvToDouble(e);
        else if (e.key == "ssd_strided_mult") d.ssd_strided_mult = KvToDouble(e);
        else throw KvError(e.line, "unknown [devices] key '" + e.key + "'");
      }
    } else {
      throw std::runtime_error("unknown section [" + sec.name + "] in run config");
    }
  }
  if (cfg.cache_fraction <= 0 || cfg.cache_fraction > 1) {
    throw std::runtime_error("cache_fraction must be in (0, 1]");
  }
  return cfg;
}

RunConfig LoadRunConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return LoadRunConfig(in);
}

// ------------------------------------------------------------- CSV

namespace {

void MetricsHeader(std::ostream& out) {
  out << "engine,requests,warmup_requests,avg_response_us,p50_response_us,p95_response_us,"
         "p99_response_us,hit_ratio,blocks,hits,hits_partial,misses,bypasses,promotions,"
         "evictions,ssd_reads,ssd_writes,ssd_writes_bytes,ssd_user_write_bytes,hdd_reads,"
         "hdd_writes,background_us";
}

void MetricsRow(const Metrics& m, std::ostream& out) {
  out << m.engine << ',' << m.requests << ',' << m.warmup_requests << ',' << m.avg_response_us
      << ',' << m.p50_response_us << ',' << m.p95_response_us << ',' << m.p99_response_us << ','
      << m.hit_ratio << ',' << m.blocks << ',' << m.hits << ',' << m.hits_partial << ','
      << m.misses << ',' << m.bypasses << ',' << m.promotions << ',' << m.evictions << ','
      << m.ssd_reads << ',' << m.ssd_writes << ',' << m.ssd_writes_bytes << ','
      << m.ssd_user_write_bytes << ',' << m.hdd_reads << ',' << m.hdd_writes << ','
      << m.background_us;
}

}  // namespace

void WriteMetricsCsv(const Metrics& m, std::ostream& out) {
  MetricsHeader(out);
  out << '\n';
  MetricsRow(m, out);
  out << '\n';
}

void WriteSeriesCsv(const Metrics& m, std::ostream& out) {
  out << "window_end,hit_ratio\n";
  for (const auto& [end, ratio] : m.windowed_hit_ratio) {
    out << end << ',' << ratio << '\n';
  }
}

void WriteTimelineCsv(const Metrics& m, std::ostream& out) {
  out << "request_index,category\n";
  for (const auto& [idx, cat] : m.category_timeline) {
    out << idx << ',' << cat << '\n';
  }
}

void WriteComparisonCsv(const std::vector<Metrics>& rows, std::ostream& out) {
  const Metrics* lru = nullptr;
  for (const Metrics& m : rows) {
    if (m.engine == "lru") lru = &m;
  }
  MetricsHeader(out);
  if (lru) out << ",avg_response_norm_lru,ssd_writes_bytes_norm_lru";
  out << '\n';
  for (const Metrics& m : rows) {
    MetricsRow(m, out);
    if (lru) {
      double rn = lru->avg_response_us > 0 ? m.avg_response_us / lru->avg_response_us : 0;
      double wn = lru->ssd_writes_bytes > 0
                      ? static_cast<double>(m.ssd_writes_bytes) / lru->ssd_writes_bytes
                      : 0;
      out << ',' << rn << ',' << wn;
    }
    out << '\n';
  }
}

}  // namespace reca
