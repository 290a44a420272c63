#pragma once

#include <cstdint>
#include <list>
#include <set>
#include <unordered_map>

#include "reca/engine.hpp"

namespace reca {

struct BaselineConfig {
  uint64_t capacity_bytes = 0;
  uint64_t line_size = 4096;
};

/// Textbook LRU, write-through with write-allocate: every miss admits, the
/// globally least recently used line is the victim.
class LruEngine : public Engine {
 public:
  LruEngine(const BaselineConfig& cfg, DevicePair* devices);

  double OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes = nullptr) override;
  const EngineStats& stats() const override { return stats_; }
  const DevicePair& devices() const override { return *dev_; }
  std::string_view name() const override { return "lru"; }
  uint64_t line_size() const override { return line_size_; }

  uint64_t capacity_lines() const { return capacity_lines_; }
  uint64_t occupied_lines() const { return map_.size(); }

 private:
  void Admit(uint64_t addr, uint64_t covered_bytes);

  uint64_t line_size_;
  uint64_t capacity_lines_;
  DevicePair* dev_;
  EngineStats stats_;
  std::list<uint64_t> lru_;  // front = most recent
  std::unordered_map<uint64_t, std::list<uint64_t>::iterator> map_;
};

/// LARC: lazy admission through a ghost queue of addresses. A missed address
/// is admitted only when found in the ghost queue; the ghost target size
/// adapts within [0.1C, 0.9C] (shrink C/(C-Cq) on cache hit, grow C/Cq on
/// ghost hit). Cache body is LRU, write-through.
class LarcEngine : public Engine {
 public:
  LarcEngine(const BaselineConfig& cfg, DevicePair* devices);

  double OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes = nullptr) override;
  const EngineStats& stats() const override { return stats_; }
  const DevicePair& devices() const override { return *dev_; }
  std::string_view name() const override { return "larc"; }
  uint64_t line_size() const override { return line_size_; }

  uint64_t capacity_lines() const { return capacity_lines_; }
  uint64_t occupied_lines() const { return map_.size(); }
  size_t ghost_size() const { return ghost_map_.size(); }
  double ghost_target() const { return ghost_target_; }

 private:
  void Admit(uint64_t addr, uint64_t covered_bytes);
  void GhostInsert(uint64_t addr);

  uint64_t line_size_;
  uint64_t capacity_lines_;
  DevicePair* dev_;
  EngineStats stats_;
  double ghost_target_;
  std::list<uint64_t> lru_;
  std::unordered_map<uint64_t, std::list<uint64_t>::iterator> map_;
  std::list<uint64_t> ghost_;  // addresses only, no data bytes
  std::unordered_map<uint64_t, std::list<uint64_t>::iterator> ghost_map_;
};

/// Global access-frequency cache: counts accesses to every line in the
/// address space; a miss is admitted only if its count strictly exceeds the
/// minimum count among cached lines, which is also the victim.
class FreqEngine : public Engine {
 public:
  FreqEngine(const BaselineConfig& cfg, DevicePair* devices);

  double OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes = nullptr) override;
  const EngineStats& stats() const override { return stats_; }
  const DevicePair& devices() const override { return *dev_; }
  std::string_view name() const override { return "freq"; }
  uint64_t line_size() const override { return line_size_; }

  uint64_t capacity_lines() const { return capacity_lines_; }
  uint64_t occupied_lines() const { return cached_.size(); }

 private:
  void Admit(uint64_t addr, uint64_t count, uint64_t covered_bytes);

  uint64_t line_size_;
  uint64_t capacity_lines_;
  DevicePair* dev_;
  EngineStats stats_;
  std::unordered_map<uint64_t, uint64_t> count_;         // all lines ever seen
  std::unordered_map<uint64_t, uint64_t> cached_;        // addr -> cached count key
  std::set<std::pair<uint64_t, uint64_t>> by_count_;     // (count, addr), min = victim
};

}  // namespace reca
