#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>

#include "reca/classifier.hpp"
#include "reca/profiles.hpp"

namespace reca {

/// Per-page access record: six (access, rw) counters plus an overlap counter.
/// The stored priority is the weight dot-product of the counters under the
/// active category weights, maintained incrementally and recomputed wholesale
/// on a category switch.
struct PriorityEntry {
  std::array<uint32_t, 6> counters{};
  uint32_t over_count = 0;
  double priority = 0;

  uint64_t access_count() const {
    uint64_t n = 0;
    for (uint32_t c : counters) n += c;
    return n;
  }
};

double PriorityCalc(const RequestType& type, const PriorityWeights& w);

/// Priority table keyed by cache-line-aligned address, ordered map per the
/// B-tree organization. Bounded: inserting past max_entries evicts the
/// minimum-priority entry.
class PriorityTable {
 public:
  explicit PriorityTable(size_t max_entries = std::numeric_limits<size_t>::max())
      : max_entries_(max_entries) {}

  /// Bumps the counters for page_addr and adds PriorityCalc to its priority.
  /// Returns the updated priority.
  double Accumulate(uint64_t page_addr, const RequestType& type, const PriorityWeights& w);

  double Get(uint64_t page_addr) const;
  uint64_t AccessCount(uint64_t page_addr) const;
  const PriorityEntry* Find(uint64_t page_addr) const;

  /// Recomputes every entry's priority from its counters under new weights.
  void SwitchCategory(const PriorityWeights& w);

  /// Re-grains the table for a new cache line size. Shrinking splits each
  /// entry into old/new children with priority parent/(old/new) each and
  /// counters divided with remainders on the first child; growing merges
  /// siblings by summation. Total priority mass is preserved.
  void RescaleForLineSize(uint64_t old_size, uint64_t new_size);

  double TotalPriority() const;
  size_t size() const { return entries_.size(); }
  size_t max_entries() const { return max_entries_; }
  void set_max_entries(size_t n) { max_entries_ = n; }
  const std::map<uint64_t, PriorityEntry>& entries() const { return entries_; }

 private:
  void EvictMin();

  std::map<uint64_t, PriorityEntry> entries_;
  std::set<std::pair<double, uint64_t>> by_priority_;  // min-priority eviction index
  size_t max_entries_;
};

}  // namespace reca
