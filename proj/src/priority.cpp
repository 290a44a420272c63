#include "reca/priority.hpp"

#include <stdexcept>

namespace reca {

double PriorityCalc(const RequestType& type, const PriorityWeights& w) {
  double result = 0;
  if (type.is_over) result += w.over;
  size_t a = static_cast<size_t>(type.access);
  result += w.acc[a];
  result += w.rw[a][type.rw == Op::kWrite ? 1 : 0];
  return result;
}

double PriorityTable::Accumulate(uint64_t page_addr, const RequestType& type,
                                 const PriorityWeights& w) {
  auto it = entries_.find(page_addr);
  if (it == entries_.end()) {
    if (entries_.size() >= max_entries_) EvictMin();
    it = entries_.emplace(page_addr, PriorityEntry{}).first;
    by_priority_.emplace(0.0, page_addr);
  }
  PriorityEntry& e = it->second;
  by_priority_.erase({e.priority, page_addr});
  e.counters[FeatureIndex(type.access, type.rw)]++;
  if (type.is_over) e.over_count++;
  e.priority += PriorityCalc(type, w);
  by_priority_.emplace(e.priority, page_addr);
  return e.priority;
}

double PriorityTable::Get(uint64_t page_addr) const {
  auto it = entries_.find(page_addr);
  return it == entries_.end() ? 0 : it->second.priority;
}

uint64_t PriorityTable::AccessCount(uint64_t page_addr) const {
  auto it = entries_.find(page_addr);
  return it == entries_.end() ? 0 : it->second.access_count();
}

const PriorityEntry* PriorityTable::Find(uint64_t page_addr) const {
  auto it = entries_.find(page_addr);
  return it == entries_.end() ? nullptr : &it->second;
}

void PriorityTable::SwitchCategory(const PriorityWeights& w) {
  by_priority_.clear();
  for (auto& [addr, e] : entries_) {
    double p = e.over_count * w.over;
    for (size_t a = 0; a < 3; ++a) {
      for (size_t rw = 0; rw < 2; ++rw) {
        p += e.counters[a * 2 + rw] * (w.acc[a] + w.rw[a][rw]);
      }
    }
    e.priority = p;
    by_priority_.emplace(p, addr);
  }
}

void PriorityTable::RescaleForLineSize(uint64_t old_size, uint64_t new_size) {
  if (old_size == new_size) return;
  std::map<uint64_t, PriorityEntry> fresh;
  if (new_size < old_size) {
    uint64_t k = old_size / new_size;
    for (const auto& [addr, e] : entries_) {
      for (uint64_t j = 0; j < k; ++j) {
        PriorityEntry child;
        child.priority = e.priority / static_cast<double>(k);
        for (size_t c = 0; c < 6; ++c) {
          child.counters[c] = e.counters[c] / k + (j == 0 ? e.counters[c] % k : 0);
        }
        child.over_count =
            static_cast<uint32_t>(e.over_count / k + (j == 0 ? e.over_count % k : 0));
        fresh.emplace(addr + j * new_size, child);
      }
    }
  } else {
    for (const auto& [addr, e] : entries_) {
      uint64_t base = addr / new_size * new_size;
      PriorityEntry& parent = fresh[base];
      parent.priority += e.priority;
      for (size_t c = 0; c < 6; ++c) parent.counters[c] += e.counters[c];
      parent.over_count += e.over_count;
    }
  }
  entries_ = std::move(fresh);
  by_priority_.clear();
  for (const auto& [addr, e] : entries_) by_priority_.emplace(e.priority, addr);
  // A shrink can leave the table over its cap; trim lowest first.
  while (entries_.size() > max_entries_) EvictMin();
}

double PriorityTable::TotalPriority() const {
  double sum = 0;
  for (const auto& [addr, e] : entries_) sum += e.priority;
  return sum;
}

void PriorityTable::EvictMin() {
  if (entries_.empty()) return;
  auto min_it = by_priority_.begin();
  entries_.erase(min_it->second);
  by_priority_.erase(min_it);
}

}  // namespace reca
