#include "reca/reca_engine.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace reca {

namespace {

constexpr uint64_t kNeighborLines = 8;  // cluster eviction window, +-8 lines

uint64_t FibHash(uint64_t x) {
  return (x * 0x9E3779B97F4A7C15ull) >> 17;
}

thread_local std::vector<BlockSpan> t_blocks;

}  // namespace

RecaEngine::RecaEngine(const Config& cfg, DevicePair* devices)
    : cfg_(cfg), dev_(devices), table_(cfg.table) {
  if (!table_ || table_->size() == 0) throw std::invalid_argument("empty characteristics table");
  if (cfg_.initial_category >= table_->size()) {
    throw std::invalid_argument("initial category out of range");
  }
  if (cfg_.capacity_bytes < kPageBytes) cfg_.capacity_bytes = kPageBytes;
  capacity_bytes_ = cfg_.capacity_bytes;
  current_category_ = cfg_.initial_category;
  applied_version_ = table_->version();
  ApplyCategory(table_->at(current_category_));
  timeline_.emplace_back(0, current_category_);
}

void RecaEngine::SetTable(std::shared_ptr<const CharacteristicsTable> table) {
  if (!table || table->size() == 0) throw std::invalid_argument("empty characteristics table");
  // Carry the active category across by name; fall back to record 0.
  int idx = table->Find(table_->at(current_category_).name);
  current_category_ = idx >= 0 ? static_cast<size_t>(idx) : 0;
  table_ = std::move(table);
}

// ------------------------------------------------------------ geometry

uint32_t RecaEngine::NumSets() const {
  return static_cast<uint32_t>((capacity_lines_ + cfg_.set_lines - 1) / cfg_.set_lines);
}

uint32_t RecaEngine::SetOf(uint64_t line_addr) const {
  return static_cast<uint32_t>(FibHash(line_addr / line_size_) % NumSets());
}

void RecaEngine::SetRange(uint32_t set, uint32_t* lo, uint32_t* hi) const {
  *lo = set * cfg_.set_lines;
  *hi = static_cast<uint32_t>(std::min<uint64_t>(capacity_lines_, *lo + cfg_.set_lines));
}

uint32_t RecaEngine::FullMask() const {
  uint32_t n = static_cast<uint32_t>(line_size_ / kPageBytes);
  return n >= 32 ? ~0u : ((1u << n) - 1);
}

uint32_t RecaEngine::SubpageMask(uint64_t line_addr, uint64_t begin, uint64_t end) const {
  uint32_t first = static_cast<uint32_t>((begin - line_addr) / kPageBytes);
  uint32_t last = static_cast<uint32_t>((end - 1 - line_addr) / kPageBytes);
  uint32_t mask = 0;
  for (uint32_t i = first; i <= last; ++i) mask |= 1u << i;
  return mask;
}

uint32_t RecaEngine::FullyCoveredMask(uint64_t line_addr, uint64_t begin, uint64_t end) const {
  uint32_t mask = 0;
  uint32_t n = static_cast<uint32_t>(line_size_ / kPageBytes);
  for (uint32_t i = 0; i < n; ++i) {
    uint64_t pb = line_addr + i * kPageBytes;
    if (begin <= pb && pb + kPageBytes <= end) mask |= 1u << i;
  }
  return mask;
}

// ------------------------------------------------------------ category

void RecaEngine::ApplyCategory(const CategoryRecord& rec) {
  line_size_ = rec.cache_line_size;
  write_policy_ = rec.write_policy;
  eviction_ = rec.eviction;
  stream_filter_on_ = rec.stream_filter;
  weights_ = rec.weights;
  capacity_lines_ = std::max<uint64_t>(1, capacity_bytes_ / line_size_);
  slots_.assign(capacity_lines_, Slot{});
  set_free_.assign(NumSets(), 0);
  for (uint32_t s = 0; s < NumSets(); ++s) {
    uint32_t lo, hi;
    SetRange(s, &lo, &hi);
    set_free_[s] = hi - lo;
  }
  index_.clear();
  ptable_.set_max_entries(cfg_.priority_entries_per_line * capacity_lines_);
}

void RecaEngine::Reconfigure(size_t category_id) {
  if (category_id >= table_->size()) throw std::invalid_argument("category out of range");
  bool changed = category_id != current_category_;
  if (!changed && applied_version_ == table_->version()) return;

  const CategoryRecord& rec = table_->at(category_id);

  // 1. re-prioritize existing history under the new weights
  ptable_.SwitchCategory(rec.weights);
  weights_ = rec.weights;

  // 2. no dirty line may survive outside write-back
  if (write_policy_ == WritePolicy::kWriteBack && rec.write_policy != WritePolicy::kWriteBack) {
    std::vector<uint64_t> dirty;
    for (Slot& s : slots_) {
      if (s.valid() && s.dirty) {
        dirty.push_back(s.addr);
        s.dirty = false;
      }
    }
    std::sort(dirty.begin(), dirty.end());
    FlushDirtyRuns(dirty);
  }
  write_policy_ = rec.write_policy;
  eviction_ = rec.eviction;
  stream_filter_on_ = rec.stream_filter;

  // 3. line-size migration
  if (rec.cache_line_size != line_size_) {
    ptable_.RescaleForLineSize(line_size_, rec.cache_line_size);
    RebuildGeometry(rec.cache_line_size, capacity_bytes_);
    // backfill merged lines with missing subpages, as far as the queue allows
    for (uint32_t i = 0; i < slots_.size(); ++i) {
      const Slot& s = slots_[i];
      if (!s.valid() || s.present == FullMask()) continue;
      uint32_t missing = FullMask() & ~s.present;
      if (!EnqueueSubpageRuns(s.addr, missing)) break;
    }
  }

  current_category_ = category_id;
  applied_version_ = table_->version();
  if (changed) timeline_.emplace_back(requests_seen_, category_id);

  // 4. eviction throttle for the recovery period
  in_recovery_ = true;
  recovery_start_ = requests_seen_;
  recovery_window_id_ = 0;
  recovery_window_evictions_ = 0;

  charges_.Issue(*dev_, stats_);  // flush/backfill charges are all background
}

void RecaEngine::Resize(uint64_t capacity_bytes) {
  if (capacity_bytes < line_size_) capacity_bytes = line_size_;
  uint64_t new_lines = std::max<uint64_t>(1, capacity_bytes / line_size_);
  if (new_lines == capacity_lines_) {
    capacity_bytes_ = capacity_bytes;
    return;
  }
  RebuildGeometry(line_size_, capacity_bytes);
  charges_.Issue(*dev_, stats_);
}

void RecaEngine::RebuildGeometry(uint64_t new_line_size, uint64_t new_capacity_bytes) {
  // Detach resident lines from the old geometry, re-grain, and re-place.
  std::vector<Resident> residents;
  residents.reserve(index_.size());
  for (const Slot& s : slots_) {
    if (s.valid()) residents.push_back({s.addr, s.priority, s.lru, s.freq, s.present, s.dirty});
  }
  std::sort(residents.begin(), residents.end(),
            [](const Resident& a, const Resident& b) { return a.addr < b.addr; });

  std::vector<Resident> regrained;
  if (new_line_size < line_size_) {
    uint64_t k = line_size_ / new_line_size;
    uint32_t child_pages = static_cast<uint32_t>(new_line_size / kPageBytes);
    uint32_t child_full = child_pages >= 32 ? ~0u : ((1u << child_pages) - 1);
    for (const Resident& r : residents) {
      for (uint64_t j = 0; j < k; ++j) {
        uint32_t mask = (r.present >> (j * child_pages)) & child_full;
        if (mask == 0) continue;
        regrained.push_back({r.addr + j * new_line_size, r.priority / static_cast<double>(k),
                             r.lru, r.freq, mask, r.dirty});
      }
    }
  } else if (new_line_size > line_size_) {
    std::map<uint64_t, Resident> merged;
    for (const Resident& r : residents) {
      uint64_t base = r.addr / new_line_size * new_line_size;
      uint32_t shift = static_cast<uint32_t>((r.addr - base) / kPageBytes);
      Resident& m = merged.try_emplace(base, Resident{base, 0, 0, 0, 0, false}).first->second;
      m.priority += r.priority;
      m.lru = std::max(m.lru, r.lru);
      uint64_t f = static_cast<uint64_t>(m.freq) + r.freq;
      m.freq = static_cast<uint32_t>(std::min<uint64_t>(f, ~0u));
      m.present |= r.present << shift;
      m.dirty = m.dirty || r.dirty;
    }
    for (auto& [base, r] : merged) regrained.push_back(r);
  } else {
    regrained = std::move(residents);
  }

  line_size_ = new_line_size;
  capacity_bytes_ = new_capacity_bytes;
  capacity_lines_ = std::max<uint64_t>(1, capacity_bytes_ / line_size_);
  slots_.assign(capacity_lines_, Slot{});
  set_free_.assign(NumSets(), 0);
  for (uint32_t s = 0; s < NumSets(); ++s) {
    uint32_t lo, hi;
    SetRange(s, &lo, &hi);
    set_free_[s] = hi - lo;
  }
  index_.clear();
  ptable_.set_max_entries(cfg_.priority_entries_per_line * capacity_lines_);

  for (const Resident& r : regrained) PlaceResident(r);
}

void RecaEngine::PlaceResident(const Resident& r) {
  uint32_t set = SetOf(r.addr);
  uint32_t lo, hi;
  SetRange(set, &lo, &hi);
  uint32_t target = hi;
  if (set_free_[set] > 0) {
    for (uint32_t i = lo; i < hi; ++i) {
      if (!slots_[i].valid()) {
        target = i;
        break;
      }
    }
    set_free_[set]--;
  } else {
    // set contention after re-graining: keep the higher-priority line
    uint32_t min_idx = lo;
    for (uint32_t i = lo + 1; i < hi; ++i) {
      if (slots_[i].priority < slots_[min_idx].priority) min_idx = i;
    }
    if (slots_[min_idx].priority >= r.priority) {
      if (r.dirty) FlushDirtyRunsForResident(r);
      return;
    }
    InvalidateSlot(min_idx, true);
    stats_.evictions++;
    set_free_[set]--;
    target = min_idx;
  }
  Slot& s = slots_[target];
  s.addr = r.addr;
  s.priority = r.priority;
  s.lru = r.lru;
  s.freq = r.freq;
  s.present = r.present;
  s.dirty = r.dirty;
  index_[r.addr] = target;
}

// ------------------------------------------------------------ scoring

double RecaEngine::SlotScore(const Slot& s) const {
  switch (eviction_) {
    case EvictionPolicy::kFrequency:
      return s.freq;
    case EvictionPolicy::kRecency:
      return static_cast<double>(s.lru);
    case EvictionPolicy::kPriorityReadFavor:
      return s.priority;
    case EvictionPolicy::kRecencyFrequency:
    case EvictionPolicy::kNeighborCluster:
      return s.priority;  // rank policies never use this directly
  }
  return s.priority;
}

int RecaEngine::PickVictim(uint32_t set, uint64_t incoming_addr, bool* admit) const {
  uint32_t lo, hi;
  SetRange(set, &lo, &hi);
  *admit = false;
  if (lo >= hi) return -1;

  if (eviction_ == EvictionPolicy::kRecencyFrequency ||
      eviction_ == EvictionPolicy::kNeighborCluster) {
    // Rank-sum of recency position and access count within the set.
    size_t n = hi - lo;
    rank_lru_.clear();
    rank_freq_.clear();
    for (uint32_t i = lo; i < hi; ++i) {
      rank_lru_.push_back(slots_[i].lru);
      rank_freq_.push_back(slots_[i].freq);
    }
    std::sort(rank_lru_.begin(), rank_lru_.end());
    std::sort(rank_freq_.begin(), rank_freq_.end());
    auto lru_rank = [&](uint64_t v) {
      return std::lower_bound(rank_lru_.begin(), rank_lru_.end(), v) - rank_lru_.begin();
    };
    auto freq_rank = [&](uint64_t v) {
      return std::lower_bound(rank_freq_.begin(), rank_freq_.end(), v) - rank_freq_.begin();
    };
    uint32_t victim = lo;
    int64_t victim_score = 0;
    bool first = true;
    for (uint32_t i = lo; i < hi; ++i) {
      int64_t score = lru_rank(slots_[i].lru) + freq_rank(slots_[i].freq);
      if (first || score < victim_score) {
        victim = i;
        victim_score = score;
        first = false;
      }
    }
    int64_t incoming_score =
        static_cast<int64_t>(n) + freq_rank(ptable_.AccessCount(incoming_addr));
    *admit = victim_score < incoming_score;
    return static_cast<int>(victim);
  }

  uint32_t victim = lo;
  for (uint32_t i = lo + 1; i < hi; ++i) {
    if (SlotScore(slots_[i]) < SlotScore(slots_[victim])) victim = i;
  }
  double vscore = SlotScore(slots_[victim]);
  switch (eviction_) {
    case EvictionPolicy::kFrequency:
      *admit = vscore < static_cast<double>(ptable_.AccessCount(incoming_addr));
      break;
    case EvictionPolicy::kRecency:
      *admit = true;  // the incoming access is the most recent by definition
      break;
    default:
      *admit = vscore < ptable_.Get(incoming_addr);
      break;
  }
  return static_cast<int>(victim);
}

void RecaEngine::RecordEviction(uint32_t slot_idx, uint32_t set) const {
  if (!cfg_.audit_victims) return;
  // Independent re-scan: the chosen victim must score minimal in its set.
  uint32_t lo, hi;
  SetRange(set, &lo, &hi);
  if (eviction_ == EvictionPolicy::kRecencyFrequency ||
      eviction_ == EvictionPolicy::kNeighborCluster) {
    auto score_of = [&](uint32_t idx) {
      int64_t r1 = 0, r2 = 0;
      for (uint32_t j = lo; j < hi; ++j) {
        if (slots_[j].lru < slots_[idx].lru) ++r1;
        if (slots_[j].freq < slots_[idx].freq) ++r2;
      }
      return r1 + r2;
    };
    int64_t vs = score_of(slot_idx);
    for (uint32_t j = lo; j < hi; ++j) {
      if (score_of(j) < vs) {
        ++audit_violations_;
        return;
      }
    }
    return;
  }
  double vs = SlotScore(slots_[slot_idx]);
  for (uint32_t j = lo; j < hi; ++j) {
    if (SlotScore(slots_[j]) < vs) {
      ++audit_violations_;
      return;
    }
  }
}

// ------------------------------------------------------------ eviction

void RecaEngine::FlushDirtyRuns(const std::vector<uint64_t>& addrs) {
  // One merged sequential HDD write per contiguous run of present subpages.
  for (uint64_t addr : addrs) {
    auto it = index_.find(addr);
    uint32_t present = it != index_.end() ? slots_[it->second].present : FullMask();
    uint32_t pages = static_cast<uint32_t>(line_size_ / kPageBytes);
    for (uint32_t i = 0; i < pages; ++i) {
      if (present & (1u << i)) {
        charges_.Add(false, Op::kWrite, addr + i * kPageBytes, kPageBytes, false);
      }
    }
  }
}

void RecaEngine::FlushDirtyRunsForResident(const Resident& r) {
  uint32_t pages = static_cast<uint32_t>(line_size_ / kPageBytes);
  for (uint32_t i = 0; i < pages; ++i) {
    if (r.present & (1u << i)) {
      charges_.Add(false, Op::kWrite, r.addr + i * kPageBytes, kPageBytes, false);
    }
  }
}

void RecaEngine::InvalidateSlot(uint32_t slot_idx, bool flush_dirty) {
  Slot& s = slots_[slot_idx];
  if (!s.valid()) return;
  if (flush_dirty && s.dirty) {
    std::vector<uint64_t> one{s.addr};
    FlushDirtyRuns(one);
  }
  index_.erase(s.addr);
  s = Slot{};
  set_free_[slot_idx / cfg_.set_lines]++;
}

void RecaEngine::CountEviction() {
  stats_.evictions++;
  if (in_recovery_) {
    reconfig_evictions_++;
    recovery_window_evictions_++;
    max_recovery_window_evictions_ =
        std::max(max_recovery_window_evictions_, recovery_window_evictions_);
  }
}

void RecaEngine::EvictSlot(uint32_t slot_idx, uint32_t set) {
  RecordEviction(slot_idx, set);
  std::vector<uint32_t> cluster{slot_idx};
  if (eviction_ == EvictionPolicy::kNeighborCluster) {
    uint64_t victim_addr = slots_[slot_idx].addr;
    uint64_t span = kNeighborLines * line_size_;
    uint64_t from = victim_addr > span ? victim_addr - span : 0;
    for (uint64_t a = from; a <= victim_addr + span; a += line_size_) {
      if (a == victim_addr) continue;
      auto it = index_.find(a);
      if (it != index_.end()) cluster.push_back(it->second);
    }
    if (in_recovery_) {
      uint32_t left = cfg_.reconfig_evict_budget - recovery_window_evictions_;
      if (cluster.size() > left) cluster.resize(1);  // stay within the budget
    }
  }

  std::vector<uint64_t> dirty;
  for (uint32_t idx : cluster) {
    if (slots_[idx].dirty) dirty.push_back(slots_[idx].addr);
  }
  std::sort(dirty.begin(), dirty.end());
  FlushDirtyRuns(dirty);
  for (uint32_t idx : cluster) {
    slots_[idx].dirty = false;
    InvalidateSlot(idx, false);
    CountEviction();
  }
}

int RecaEngine::FindSlot(uint64_t line_addr) {
  uint32_t set = SetOf(line_addr);
  uint32_t lo, hi;
  SetRange(set, &lo, &hi);
  if (set_free_[set] > 0) {
    for (uint32_t i = lo; i < hi; ++i) {
      if (!slots_[i].valid()) return static_cast<int>(i);
    }
  }
  if (in_recovery_ && recovery_window_evictions_ >= cfg_.reconfig_evict_budget) return -1;
  bool admit = false;
  int victim = PickVictim(set, line_addr, &admit);
  if (victim < 0 || !admit) return -1;
  EvictSlot(static_cast<uint32_t>(victim), set);
  return victim;
}

void RecaEngine::AllocateInto(uint32_t slot_idx, uint64_t addr, uint32_t present, bool dirty) {
  Slot& s = slots_[slot_idx];
  if (!s.valid()) set_free_[slot_idx / cfg_.set_lines]--;
  s.addr = addr;
  s.priority = ptable_.Get(addr);
  s.lru = ++stamp_;
  s.freq = static_cast<uint32_t>(std::min<uint64_t>(ptable_.AccessCount(addr), ~0u));
  s.present = present;
  s.dirty = dirty;
  index_[addr] = slot_idx;
}

// ------------------------------------------------------------ promotions

bool RecaEngine::EnqueuePromotion(uint64_t offset, uint64_t len, bool fetch) {
  if (promotions_.size() >= cfg_.promotion_queue_cap) return false;
  promotions_.push_back(Promotion{offset, len, fetch});
  return true;
}

bool RecaEngine::EnqueueSubpageRuns(uint64_t line_addr, uint32_t mask) {
  uint32_t pages = static_cast<uint32_t>(line_size_ / kPageBytes);
  uint32_t i = 0;
  while (i < pages) {
    if (!(mask & (1u << i))) {
      ++i;
      continue;
    }
    uint32_t j = i;
    while (j < pages && (mask & (1u << j))) ++j;
    if (!EnqueuePromotion(line_addr + i * kPageBytes,
                          static_cast<uint64_t>(j - i) * kPageBytes, true)) {
      return false;
    }
    i = j;
  }
  return true;
}

void RecaEngine::DrainPromotions() {
  while (!promotions_.empty()) {
    Promotion job = promotions_.front();
    promotions_.pop_front();
    if (job.fetch) charges_.Add(false, Op::kRead, job.offset, job.len, false);
    charges_.Add(true, Op::kWrite, job.offset, job.len, false);
  }
}

// ------------------------------------------------------------ stream filter

bool RecaEngine::StreamFilterCacheable(const IoRequest& io) {
  StreamState& st = streams_[io.pid];
  if (st.run_bytes > 0 && io.offset == st.next_offset) {
    st.run_bytes += io.len;
    st.next_offset = io.end();
    return st.run_bytes <= cfg_.stream_run_threshold;
  }
  st.run_bytes = io.len;
  st.next_offset = io.end();
  return true;
}

// ------------------------------------------------------------ classification

void RecaEngine::OnClassified(const IoRequest& old_io, const RequestType& type) {
  SplitBlocks(old_io, line_size_, t_blocks);
  for (const BlockSpan& b : t_blocks) {
    ptable_.Accumulate(b.line_addr, type, weights_);
  }
  io_list_.push_back(type);
  if (io_list_.size() >= cfg_.workload_check_threshold) AnalyzeWorkload();
}

void RecaEngine::AnalyzeWorkload() {
  analyze_count_++;
  FeatureVector fv = WindowFeatures(io_list_);
  io_list_.clear();
  size_t matched = MatchCategory(fv, *table_, current_category_);
  Reconfigure(matched);  // no-op when nothing changed
}

// ------------------------------------------------------------ request paths

void RecaEngine::RouteRead(const BlockSpan& b, bool cacheable, std::vector<BlockRoute>* routes) {
  stats_.blocks++;
  uint64_t cover = b.cover_end - b.cover_begin;
  auto it = index_.find(b.line_addr);
  if (it != index_.end()) {
    Slot& s = slots_[it->second];
    uint32_t needed = SubpageMask(b.line_addr, b.cover_begin, b.cover_end);
    uint32_t missing = needed & ~s.present;
    if (missing == 0) {
      charges_.Add(true, Op::kRead, b.cover_begin, cover, true);
      stats_.hits++;
      if (routes) routes->push_back({b.line_addr, Route::kHit});
    } else {
      // resident line with absent subpages: synchronous disk read, then the
      // retrieved pages fill the line
      uint32_t pages = static_cast<uint32_t>(line_size_ / kPageBytes);
      for (uint32_t i = 0; i < pages; ++i) {
        uint64_t pb = b.line_addr + i * kPageBytes;
        if (missing & (1u << i)) {
          charges_.Add(false, Op::kRead, pb, kPageBytes, true);
        } else if (needed & (1u << i)) {
          charges_.Add(true, Op::kRead, pb, kPageBytes, true);
        }
      }
      for (uint32_t i = 0; i < pages; ++i) {
        if (missing & (1u << i)) {
          charges_.Add(true, Op::kWrite, b.line_addr + i * kPageBytes, kPageBytes, false);
        }
      }
      s.present |= missing;
      stats_.hits++;
      stats_.hits_partial++;
      if (routes) routes->push_back({b.line_addr, Route::kHitPartial});
    }
    s.lru = ++stamp_;
    s.freq++;
    s.priority = ptable_.Get(b.line_addr);
    return;
  }

  stats_.misses++;
  charges_.Add(false, Op::kRead, b.cover_begin, cover, true);  // serve from HDD

  bool promoted = false;
  if (cacheable && promotions_.size() < cfg_.promotion_queue_cap) {
    int slot = FindSlot(b.line_addr);
    if (slot >= 0) {
      AllocateInto(static_cast<uint32_t>(slot), b.line_addr, FullMask(), false);
      EnqueuePromotion(b.line_addr, line_size_, true);
      stats_.promotions++;
      promoted = true;
    }
  }
  if (promoted) {
    if (routes) routes->push_back({b.line_addr, Route::kMissPromote});
  } else {
    stats_.bypasses++;
    if (routes) routes->push_back({b.line_addr, Route::kMissBypass});
  }
}

void RecaEngine::RouteWrite(const IoRequest& io, bool cacheable, std::vector<BlockRoute>* routes) {
  SplitBlocks(io, line_size_, t_blocks);

  if (!cacheable || write_policy_ == WritePolicy::kReadOnly) {
    // straight to disk; stale copies leave the cache
    for (const BlockSpan& b : t_blocks) {
      stats_.blocks++;
      auto it = index_.find(b.line_addr);
      if (it != index_.end()) InvalidateSlot(it->second, true);
      stats_.misses++;
      stats_.bypasses++;
      if (routes) routes->push_back({b.line_addr, Route::kMissBypass});
    }
    charges_.Add(false, Op::kWrite, io.offset, io.len, true);
    return;
  }

  if (write_policy_ == WritePolicy::kWriteThrough) {
    charges_.Add(false, Op::kWrite, io.offset, io.len, true);
    for (const BlockSpan& b : t_blocks) {
      stats_.blocks++;
      uint64_t cover = b.cover_end - b.cover_begin;
      auto it = index_.find(b.line_addr);
      if (it == index_.end()) {
        stats_.misses++;
        stats_.bypasses++;  // no write-allocate under write-through
        if (routes) routes->push_back({b.line_addr, Route::kMissBypass});
        continue;
      }
      Slot& s = slots_[it->second];
      charges_.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
      s.present |= FullyCoveredMask(b.line_addr, b.cover_begin, b.cover_end);
      s.lru = ++stamp_;
      s.freq++;
      s.priority = ptable_.Get(b.line_addr);
      stats_.hits++;
      if (routes) routes->push_back({b.line_addr, Route::kHit});
    }
    return;
  }

  // write-back
  for (const BlockSpan& b : t_blocks) {
    stats_.blocks++;
    uint64_t cover = b.cover_end - b.cover_begin;
    uint32_t full_cover = FullyCoveredMask(b.line_addr, b.cover_begin, b.cover_end);
    uint32_t touched = SubpageMask(b.line_addr, b.cover_begin, b.cover_end);
    auto it = index_.find(b.line_addr);
    if (it != index_.end()) {
      Slot& s = slots_[it->second];
      charges_.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
      uint32_t partial = touched & ~full_cover & ~s.present;
      if (partial) {
        // read-merge the partially written subpages
        uint32_t pages = static_cast<uint32_t>(line_size_ / kPageBytes);
        for (uint32_t i = 0; i < pages; ++i) {
          if (partial & (1u << i)) {
            charges_.Add(false, Op::kRead, b.line_addr + i * kPageBytes, kPageBytes, false);
          }
        }
      }
      s.present |= touched;
      s.dirty = true;
      s.lru = ++stamp_;
      s.freq++;
      s.priority = ptable_.Get(b.line_addr);
      stats_.hits++;
      if (routes) routes->push_back({b.line_addr, Route::kHit});
      continue;
    }
    stats_.misses++;
    int slot = FindSlot(b.line_addr);
    if (slot < 0) {
      stats_.bypasses++;
      charges_.Add(false, Op::kWrite, b.cover_begin, cover, true);
      if (routes) routes->push_back({b.line_addr, Route::kMissBypass});
      continue;
    }
    uint32_t partial = touched & ~full_cover;
    AllocateInto(static_cast<uint32_t>(slot), b.line_addr, touched, true);
    charges_.Add(true, Op::kWrite, b.cover_begin, cover, true, true);
    if (partial) {
      uint32_t pages = static_cast<uint32_t>(line_size_ / kPageBytes);
      for (uint32_t i = 0; i < pages; ++i) {
        if (partial & (1u << i)) {
          charges_.Add(false, Op::kRead, b.line_addr + i * kPageBytes, kPageBytes, false);
        }
      }
    }
    stats_.promotions++;
    if (routes) routes->push_back({b.line_addr, Route::kMissPromote});
  }
}

double RecaEngine::OnRequest(const IoRequest& io, std::vector<BlockRoute>* routes) {
  return OnRequestTagged(io, false, routes);
}

double RecaEngine::OnRequestTagged(const IoRequest& io, bool uncachable,
                                   std::vector<BlockRoute>* routes) {
  requests_seen_++;
  if (in_recovery_) {
    uint64_t elapsed = requests_seen_ - recovery_start_;
    if (elapsed >= cfg_.workload_check_threshold) {
      in_recovery_ = false;
    } else if (elapsed / 1000 != recovery_window_id_) {
      recovery_window_id_ = elapsed / 1000;
      recovery_window_evictions_ = 0;
    }
  }

  if (auto c = classifier_.Observe(io)) {
    OnClassified(c->old_io, c->type);
  }

  bool cacheable = !uncachable;
  if (uncachable) {
    // invalidate any overlap before the disk access
    SplitBlocks(io, line_size_, t_blocks);
    for (const BlockSpan& b : t_blocks) {
      auto it = index_.find(b.line_addr);
      if (it != index_.end()) InvalidateSlot(it->second, true);
    }
  } else if (stream_filter_on_) {
    cacheable = StreamFilterCacheable(io);
  }

  if (io.op == Op::kRead) {
    SplitBlocks(io, line_size_, t_blocks);
    for (const BlockSpan& b : t_blocks) RouteRead(b, cacheable, routes);
  } else {
    RouteWrite(io, cacheable, routes);
  }

  DrainPromotions();
  return charges_.Issue(*dev_, stats_);
}

std::optional<double> RecaEngine::CachedLinePriority(uint64_t line_addr) const {
  auto it = index_.find(line_addr);
  if (it == index_.end()) return std::nullopt;
  return slots_[it->second].priority;
}

// ------------------------------------------------------------ audit

void RecaEngine::AuditInvariants() const {
  auto fail = [](const std::string& msg) { throw std::logic_error("invariant: " + msg); };
  size_t valid = 0;
  std::vector<uint32_t> free_per_set(NumSets(), 0);
  for (uint32_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    if (!s.valid()) {
      free_per_set[i / cfg_.set_lines]++;
      if (s.dirty) fail("dirty invalid slot");
      continue;
    }
    ++valid;
    auto it = index_.find(s.addr);
    if (it == index_.end() || it->second != i) fail("index does not map slot address back");
    if (s.addr % line_size_ != 0) fail("unaligned slot address");
    if (s.present == 0) fail("valid slot with empty bitmap");
    if ((s.present & ~FullMask()) != 0) fail("bitmap exceeds line subpages");
    if (s.dirty && write_policy_ != WritePolicy::kWriteBack) fail("dirty outside write-back");
    if (SetOf(s.addr) != i / cfg_.set_lines) fail("slot outside its address set");
  }
  if (valid != index_.size()) fail("index size mismatch");
  if (valid > capacity_lines_) fail("occupancy over capacity");
  if (promotions_.size() > cfg_.promotion_queue_cap) fail("promotion queue over bound");
  for (uint32_t s = 0; s < NumSets(); ++s) {
    if (free_per_set[s] != set_free_[s]) fail("free-count drift");
  }
}

}  // namespace reca
