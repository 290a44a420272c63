#include "reca/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace reca {

namespace {

uint64_t CapacityLines(const BaselineConfig& cfg) {
  uint64_t lines = cfg.capacity_bytes / cfg.line_size;
  return std::max<uint64_t>(lines, 2);
}

thread_local std::vector<BlockSpan> t_blocks;

}  // namespace

// ---------------------------------------------------------------- LRU

LruEngine::LruEngine(const BaselineConfig& cfg, DevicePair* devices)
    : line_size_(cfg.line_size), capacity_lines_(CapacityLines(cfg)), dev_(devices) {}

void LruEngine::Admit(uint64_t addr, uint64_t covered_bytes) {
  if (map_.size() >= capacity_lines_) {
    uint64_t victim = lru_.back();
    lru_.pop_back();
    map_.erase(victim);
    stats_.evictions++;  // write-through: victims are clean, nothing to flush
  }
  lru_.push_front(addr);
  map_[addr] = lru_.begin();
  (void)covered_bytes;
}

double LruEngine::OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes) {
  SplitBlocks(io, line_size_, t_blocks);
  ChargeSet charges;

  if (io.op == Op::kWrite) {
    // write-through: the whole request always lands on the HDD
    charges.Add(false, Op::kWrite, io.offset, io.len, true);
  }

  for (const BlockSpan& b : t_blocks) {
    stats_.blocks++;
    uint64_t cover = b.cover_end - b.cover_begin;
    auto it = map_.find(b.line_addr);
    bool hit = it != map_.end();
    if (hit) {
      lru_.splice(lru_.begin(), lru_, it->second);
      stats_.hits++;
      if (io.op == Op::kRead) {
        charges.Add(true, Op::kRead, b.cover_begin, cover, true);
      } else {
        charges.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
      }
      if (routes) routes->push_back({b.line_addr, Route::kHit});
      continue;
    }
    stats_.misses++;
    stats_.promotions++;  // write-allocate on every miss
    Admit(b.line_addr, cover);
    if (io.op == Op::kRead) {
      charges.Add(false, Op::kRead, b.cover_begin, cover, true);
      // async line fill
      charges.Add(false, Op::kRead, b.line_addr, line_size_, false);
      charges.Add(true, Op::kWrite, b.line_addr, line_size_, false);
    } else {
      charges.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
      if (cover < line_size_) {
        charges.Add(false, Op::kRead, b.line_addr, line_size_, false);
        charges.Add(true, Op::kWrite, b.line_addr, line_size_, false);
      }
    }
    if (routes) routes->push_back({b.line_addr, Route::kMissPromote});
  }
  return charges.Issue(*dev_, stats_);
}

// ---------------------------------------------------------------- LARC

LarcEngine::LarcEngine(const BaselineConfig& cfg, DevicePair* devices)
    : line_size_(cfg.line_size), capacity_lines_(CapacityLines(cfg)), dev_(devices) {
  ghost_target_ = 0.1 * static_cast<double>(capacity_lines_);
}

void LarcEngine::Admit(uint64_t addr, uint64_t covered_bytes) {
  if (map_.size() >= capacity_lines_) {
    uint64_t victim = lru_.back();
    lru_.pop_back();
    map_.erase(victim);
    stats_.evictions++;
  }
  lru_.push_front(addr);
  map_[addr] = lru_.begin();
  (void)covered_bytes;
}

void LarcEngine::GhostInsert(uint64_t addr) {
  ghost_.push_front(addr);
  ghost_map_[addr] = ghost_.begin();
  while (static_cast<double>(ghost_.size()) > ghost_target_ && !ghost_.empty()) {
    ghost_map_.erase(ghost_.back());
    ghost_.pop_back();
  }
}

double LarcEngine::OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes) {
  SplitBlocks(io, line_size_, t_blocks);
  ChargeSet charges;
  const double c = static_cast<double>(capacity_lines_);

  if (io.op == Op::kWrite) {
    charges.Add(false, Op::kWrite, io.offset, io.len, true);
  }

  for (const BlockSpan& b : t_blocks) {
    stats_.blocks++;
    uint64_t cover = b.cover_end - b.cover_begin;
    auto it = map_.find(b.line_addr);
    if (it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      stats_.hits++;
      ghost_target_ = std::max(0.1 * c, ghost_target_ - c / (c - ghost_target_));
      if (io.op == Op::kRead) {
        charges.Add(true, Op::kRead, b.cover_begin, cover, true);
      } else {
        charges.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
      }
      if (routes) routes->push_back({b.line_addr, Route::kHit});
      continue;
    }

    stats_.misses++;
    if (io.op == Op::kRead) {
      charges.Add(false, Op::kRead, b.cover_begin, cover, true);
    }

    auto ghost_it = ghost_map_.find(b.line_addr);
    if (ghost_it != ghost_map_.end()) {
      // second touch within the ghost window: admit
      ghost_target_ = std::min(0.9 * c, ghost_target_ + c / std::max(1.0, ghost_target_));
      ghost_.erase(ghost_it->second);
      ghost_map_.erase(ghost_it);
      stats_.promotions++;
      Admit(b.line_addr, cover);
      if (io.op == Op::kRead) {
        charges.Add(false, Op::kRead, b.line_addr, line_size_, false);
        charges.Add(true, Op::kWrite, b.line_addr, line_size_, false);
      } else {
        charges.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
        if (cover < line_size_) {
          charges.Add(false, Op::kRead, b.line_addr, line_size_, false);
          charges.Add(true, Op::kWrite, b.line_addr, line_size_, false);
        }
      }
      if (routes) routes->push_back({b.line_addr, Route::kMissPromote});
    } else {
      GhostInsert(b.line_addr);
      stats_.bypasses++;
      if (routes) routes->push_back({b.line_addr, Route::kMissBypass});
    }
  }
  return charges.Issue(*dev_, stats_);
}

// ---------------------------------------------------------------- FREQ

FreqEngine::FreqEngine(const BaselineConfig& cfg, DevicePair* devices)
    : line_size_(cfg.line_size), capacity_lines_(CapacityLines(cfg)), dev_(devices) {}

void FreqEngine::Admit(uint64_t addr, uint64_t count, uint64_t covered_bytes) {
  if (cached_.size() >= capacity_lines_) {
    auto victim = by_count_.begin();
    cached_.erase(victim->second);
    by_count_.erase(victim);
    stats_.evictions++;
  }
  cached_[addr] = count;
  by_count_.emplace(count, addr);
  (void)covered_bytes;
}

double FreqEngine::OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes) {
  SplitBlocks(io, line_size_, t_blocks);
  ChargeSet charges;

  if (io.op == Op::kWrite) {
    charges.Add(false, Op::kWrite, io.offset, io.len, true);
  }

  for (const BlockSpan& b : t_blocks) {
    stats_.blocks++;
    uint64_t cover = b.cover_end - b.cover_begin;
    uint64_t count = ++count_[b.line_addr];

    auto it = cached_.find(b.line_addr);
    if (it != cached_.end()) {
      by_count_.erase({it->second, b.line_addr});
      it->second = count;
      by_count_.emplace(count, b.line_addr);
      stats_.hits++;
      if (io.op == Op::kRead) {
        charges.Add(true, Op::kRead, b.cover_begin, cover, true);
      } else {
        charges.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
      }
      if (routes) routes->push_back({b.line_addr, Route::kHit});
      continue;
    }

    stats_.misses++;
    if (io.op == Op::kRead) {
      charges.Add(false, Op::kRead, b.cover_begin, cover, true);
    }

    bool admit = cached_.size() < capacity_lines_ ||
                 (!by_count_.empty() && count > by_count_.begin()->first);
    if (admit) {
      stats_.promotions++;
      Admit(b.line_addr, count, cover);
      if (io.op == Op::kRead) {
        charges.Add(false, Op::kRead, b.line_addr, line_size_, false);
        charges.Add(true, Op::kWrite, b.line_addr, line_size_, false);
      } else {
        charges.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
        if (cover < line_size_) {
          charges.Add(false, Op::kRead, b.line_addr, line_size_, false);
          charges.Add(true, Op::kWrite, b.line_addr, line_size_, false);
        }
      }
      if (routes) routes->push_back({b.line_addr, Route::kMissPromote});
    } else {
      stats_.bypasses++;
      if (routes) routes->push_back({b.line_addr, Route::kMissBypass});
    }
  }
  return charges.Issue(*dev_, stats_);
}

}  // namespace reca
