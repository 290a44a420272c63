#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "reca/classifier.hpp"
#include "reca/engine.hpp"
#include "reca/priority.hpp"
#include "reca/profiles.hpp"

namespace reca {

/// The reconfigurable cache: online classification feeding a priority table,
/// set-scoped priority admission/eviction, per-category write and eviction
/// policies, a sequential stream filter, and live line-size migration.
class RecaEngine : public Engine {
 public:
  struct Config {
    uint64_t capacity_bytes = 0;
    std::shared_ptr<const CharacteristicsTable> table;
    size_t initial_category = 0;
    uint64_t workload_check_threshold = 100000;
    uint32_t set_lines = 256;
    uint32_t promotion_queue_cap = 64;
    uint32_t reconfig_evict_budget = 128;   // per 1000 requests during recovery
    size_t priority_entries_per_line = 8;   // priority table cap multiplier
    uint64_t stream_run_threshold = 512 * 1024;
    bool audit_victims = false;             // re-verify victim minimality per eviction
  };

  RecaEngine(const Config& cfg, DevicePair* devices);

  double OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes = nullptr) override;
  /// Same, with the mapping-unit uncachable tag: all blocks bypass and any
  /// overlapping cached lines are invalidated.
  double OnRequestTagged(const IoRequest& io, bool uncachable,
                         std::vector<BlockRoute>* routes = nullptr);

  const EngineStats& stats() const override { return stats_; }
  const DevicePair& devices() const override { return *dev_; }
  std::string_view name() const override { return "reca"; }
  uint64_t line_size() const override { return line_size_; }
  const std::vector<std::pair<uint64_t, size_t>>& category_timeline() const override {
    return timeline_;
  }

  /// Publishes a new characteristics table; the next Analyze_Workload uses it.
  void SetTable(std::shared_ptr<const CharacteristicsTable> table);
  size_t current_category() const { return current_category_; }

  /// Applies the given category's configuration immediately (test hook and
  /// reconfiguration entry point).
  void Reconfigure(size_t category_id);

  /// Re-partitions the cache to a new capacity, evicting overflow.
  void Resize(uint64_t capacity_bytes);

  uint64_t capacity_lines() const { return capacity_lines_; }
  uint64_t capacity_bytes() const { return capacity_bytes_; }
  uint64_t occupied_lines() const { return index_.size(); }
  const PriorityTable& priority_table() const { return ptable_; }
  /// Instrumentation hook: lets harnesses seed page history directly instead
  /// of replaying 64+ requests through the classifier.
  PriorityTable& priority_table() { return ptable_; }
  /// Priority currently carried by the cached line, if resident.
  std::optional<double> CachedLinePriority(uint64_t line_addr) const;
  size_t pending_promotions() const { return promotions_.size(); }
  uint64_t requests_seen() const { return requests_seen_; }
  uint64_t analyze_count() const { return analyze_count_; }
  uint64_t reconfig_evictions() const { return reconfig_evictions_; }
  uint32_t max_recovery_evictions_per_1000() const { return max_recovery_window_evictions_; }
  uint64_t audit_violations() const { return audit_violations_; }

  /// Structural invariant check: index bijectivity, occupancy and promotion
  /// queue bounds, dirty-only-under-write-back, alignment. Throws
  /// std::logic_error on the first violation.
  void AuditInvariants() const;

 private:
  static constexpr uint64_t kNoAddr = ~0ull;

  struct Slot {
    uint64_t addr = kNoAddr;
    double priority = 0;
    uint64_t lru = 0;
    uint32_t freq = 0;
    uint32_t present = 0;  // one bit per 4 KiB subpage of the line
    bool dirty = false;
    bool valid() const { return addr != kNoAddr; }
  };

  struct Resident {  // slot contents detached from geometry, for migrations
    uint64_t addr;
    double priority;
    uint64_t lru;
    uint32_t freq;
    uint32_t present;
    bool dirty;
  };

  struct Promotion {
    uint64_t offset;
    uint64_t len;
    bool fetch;  // charge an HDD read before the SSD write
  };

  struct StreamState {
    uint64_t next_offset = 0;
    uint64_t run_bytes = 0;
  };

  // geometry
  uint32_t NumSets() const;
  uint32_t SetOf(uint64_t line_addr) const;
  void SetRange(uint32_t set, uint32_t* lo, uint32_t* hi) const;
  uint32_t FullMask() const;
  uint32_t SubpageMask(uint64_t line_addr, uint64_t begin, uint64_t end) const;
  uint32_t FullyCoveredMask(uint64_t line_addr, uint64_t begin, uint64_t end) const;

  // cache manager
  int FindSlot(uint64_t line_addr);  // -1 when not admitted
  int PickVictim(uint32_t set, uint64_t incoming_addr, bool* admit) const;
  void EvictSlot(uint32_t slot_idx, uint32_t set);
  void CountEviction();
  void InvalidateSlot(uint32_t slot_idx, bool flush_dirty);
  void AllocateInto(uint32_t slot_idx, uint64_t addr, uint32_t present, bool dirty);
  void FlushDirtyRuns(const std::vector<uint64_t>& addrs);  // merged ascending flush
  void FlushDirtyRunsForResident(const Resident& r);

  // request paths
  void RouteRead(const BlockSpan& b, bool cacheable, std::vector<BlockRoute>* routes);
  void RouteWrite(const IoRequest& io, bool cacheable, std::vector<BlockRoute>* routes);
  bool StreamFilterCacheable(const IoRequest& io);
  void OnClassified(const IoRequest& old_io, const RequestType& type);
  void AnalyzeWorkload();
  void DrainPromotions();
  bool EnqueuePromotion(uint64_t offset, uint64_t len, bool fetch);
  bool EnqueueSubpageRuns(uint64_t line_addr, uint32_t mask);

  void ApplyCategory(const CategoryRecord& rec);
  void RebuildGeometry(uint64_t new_line_size, uint64_t new_capacity_bytes);
  void PlaceResident(const Resident& r);
  void RecordEviction(uint32_t slot_idx, uint32_t set) const;
  double SlotScore(const Slot& s) const;

  Config cfg_;
  DevicePair* dev_;
  EngineStats stats_;
  ChargeSet charges_;

  std::shared_ptr<const CharacteristicsTable> table_;
  uint64_t applied_version_ = 0;
  size_t current_category_ = 0;
  PriorityWeights weights_;
  uint64_t line_size_ = 4096;
  WritePolicy write_policy_ = WritePolicy::kWriteThrough;
  EvictionPolicy eviction_ = EvictionPolicy::kRecency;
  bool stream_filter_on_ = false;

  uint64_t capacity_bytes_ = 0;
  uint64_t capacity_lines_ = 0;
  std::vector<Slot> slots_;
  std::vector<uint32_t> set_free_;  // invalid slots per set
  std::unordered_map<uint64_t, uint32_t> index_;

  PriorityTable ptable_;
  HistoryClassifier classifier_;
  std::vector<RequestType> io_list_;
  std::unordered_map<uint32_t, StreamState> streams_;
  std::deque<Promotion> promotions_;
  mutable std::vector<uint64_t> rank_lru_;
  mutable std::vector<uint64_t> rank_freq_;

  uint64_t stamp_ = 0;
  uint64_t requests_seen_ = 0;
  uint64_t analyze_count_ = 0;
  std::vector<std::pair<uint64_t, size_t>> timeline_;

  // reconfiguration recovery throttle
  bool in_recovery_ = false;
  uint64_t recovery_start_ = 0;
  uint64_t recovery_window_id_ = 0;
  uint32_t recovery_window_evictions_ = 0;
  uint32_t max_recovery_window_evictions_ = 0;
  uint64_t reconfig_evictions_ = 0;

  mutable uint64_t audit_violations_ = 0;
};

}  // namespace reca
