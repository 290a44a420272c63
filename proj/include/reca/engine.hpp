#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "reca/device.hpp"
#include "reca/trace.hpp"

namespace reca {

enum class Route : uint8_t { kHit, kHitPartial, kMissPromote, kMissBypass };

struct BlockRoute {
  uint64_t disk_addr = 0;  // line-aligned
  Route route = Route::kMissBypass;
};

struct EngineStats {
  uint64_t blocks = 0;
  uint64_t hits = 0;          // includes partial hits
  uint64_t hits_partial = 0;
  uint64_t misses = 0;        // promote + bypass
  uint64_t bypasses = 0;
  uint64_t promotions = 0;
  uint64_t evictions = 0;
  uint64_t charged_ops = 0;   // every device op the engine issued
  uint64_t ssd_user_write_bytes = 0;  // SSD bytes written on behalf of user WRITEs
  double background_us = 0;   // async promotions, fills, and flushes
};

/// One cache line of a request: the line-aligned address plus the byte range
/// the request actually covers within that line.
struct BlockSpan {
  uint64_t line_addr = 0;
  uint64_t cover_begin = 0;
  uint64_t cover_end = 0;
};

/// Splits a request at line_size boundaries. All engines split identically.
void SplitBlocks(const IoRequest& io, uint64_t line_size, std::vector<BlockSpan>& out);

/// Per-request device charges. Contiguous same-kind charges merge into one
/// device op, so e.g. an all-bypass request reaches the HDD as a single
/// sequential access rather than one op per block.
class ChargeSet {
 public:
  void Clear() { charges_.clear(); }
  void Add(bool ssd, Op op, uint64_t offset, uint64_t len, bool sync, bool user_write = false);
  /// Issues everything in order; returns the synchronous microseconds and
  /// adds async time to stats.background_us.
  double Issue(DevicePair& dev, EngineStats& stats);

 private:
  struct Charge {
    bool ssd;
    Op op;
    uint64_t offset;
    uint64_t len;
    bool sync;
    bool user_write;
  };
  std::vector<Charge> charges_;
};

/// Common surface for the ReCA engine and the baselines. Engines do not own
/// their devices so that several engines (per-process sub-caches) can share
/// one physical pair.
class Engine {
 public:
  virtual ~Engine() = default;

  /// Processes one request and returns the synchronous response time in
  /// microseconds. Per-block routes are appended to *routes when given.
  virtual double OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes = nullptr) = 0;

  virtual const EngineStats& stats() const = 0;
  virtual const DevicePair& devices() const = 0;
  virtual std::string_view name() const = 0;
  virtual uint64_t line_size() const = 0;

  /// (request_index, table category index) entries, recorded when the active
  /// category changes. Empty for baselines.
  virtual const std::vector<std::pair<uint64_t, size_t>>& category_timeline() const {
    static const std::vector<std::pair<uint64_t, size_t>> kEmpty;
    return kEmpty;
  }
};

}  // namespace reca
