#include "reca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <random>

namespace reca {

namespace {

// mt19937_64 output is standardized; the helpers below keep draws portable
// (std distributions are not).
struct Rng {
  explicit Rng(uint64_t seed) : eng(seed) {}
  uint64_t U64() { return eng(); }
  uint64_t Below(uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(U64()) * n) >> 64);
  }
  double Unit() { return static_cast<double>(U64() >> 11) * 0x1.0p-53; }
  std::mt19937_64 eng;
};

// Inverse-CDF zipf over {0..n-1}: P(k) proportional to 1/(k+1)^s.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t n, double s) : n_(n), uniform_(s == 0.0) {
    if (uniform_ || n_ == 0) return;
    cdf_.resize(n_);
    double acc = 0;
    for (uint64_t k = 0; k < n_; ++k) {
      acc += std::pow(static_cast<double>(k + 1), -s);
      cdf_[k] = acc;
    }
    for (double& v : cdf_) v /= acc;
  }

  uint64_t Draw(Rng& rng) const {
    if (n_ == 0) return 0;
    if (uniform_) return rng.Below(n_);
    double u = rng.Unit();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return n_ - 1;
    return static_cast<uint64_t>(it - cdf_.begin());
  }

 private:
  uint64_t n_;
  bool uniform_;
  std::vector<double> cdf_;
};

// Scatters popularity ranks across the region so hot pages are not spatially
// adjacent (rank neighbors would otherwise classify sequential).
uint64_t ScatterRank(uint64_t rank, uint64_t n) {
  return (rank * 0x9E3779B97F4A7C15ull) % n;
}

struct Emitted {
  uint64_t slot;
  uint64_t offset;
  uint64_t len;
};

constexpr uint64_t kInterleaveCount = 20000;  // "F"; "H" is half
constexpr uint64_t kWRandPages = 1 << 20;
constexpr uint64_t kWSeqBaseA = 0;
constexpr uint64_t kWSeqBaseB = 2ull << 30;
constexpr uint64_t kWRandBase = 4ull << 30;

}  // namespace

CategoryProfile ProfileFromRecord(const CategoryRecord& rec) {
  CategoryProfile p;
  p.name = rec.name;
  p.target_mix = rec.signature;
  p.working_set_pages = rec.gen.working_set_pages;
  p.file_count = rec.gen.file_count;
  p.mean_file_pages = rec.gen.mean_file_pages;
  p.zipf_s = rec.gen.zipf_s;
  p.zipf_write_s = rec.gen.zipf_write_s;
  p.meta_fraction = rec.gen.meta_fraction;
  p.rnd_request_pages = rec.gen.rnd_request_pages;
  return p;
}

Trace GenerateCategoryTrace(const CategoryProfile& profile, uint64_t n_requests, uint64_t seed) {
  if (n_requests < 1000) throw GenerationError("n_requests must be at least 1000");

  const FeatureVector& mix = profile.target_mix;
  double sum = 0;
  for (double v : mix.f) {
    if (v < 0 || v > 1) throw GenerationError("mix fraction out of [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw GenerationError("mix fractions must sum to 1");
  if (mix.f_over < 0 || mix.f_over > 1) throw GenerationError("overlap fraction out of [0,1]");

  double seq_frac = mix.f[FeatureIndex(Access::kSequential, Op::kRead)] +
                    mix.f[FeatureIndex(Access::kSequential, Op::kWrite)];
  double str_frac = mix.f[FeatureIndex(Access::kStrided, Op::kRead)] +
                    mix.f[FeatureIndex(Access::kStrided, Op::kWrite)];
  double rnd_frac = mix.f[FeatureIndex(Access::kRandom, Op::kRead)] +
                    mix.f[FeatureIndex(Access::kRandom, Op::kWrite)];

  // Overlaps come from two mechanisms: duplicating a recent random request
  // (marks it overlapped, the duplicate itself classifies random) and a
  // shadow reader re-issuing the latest sequential interval (marks the lead
  // request, the shadow classifies sequential through the continuing lead).
  // Zipf re-draws of hot pages mark overlaps on their own; a deficit counter
  // feathers the intended mechanisms in on top of those natural ones.
  if (mix.f_over > 0.8 * rnd_frac + 0.45 * seq_frac + 1e-12) {
    throw GenerationError("infeasible mix: overlap fraction " + std::to_string(mix.f_over) +
                          " cannot be produced from rnd=" + std::to_string(rnd_frac) +
                          " seq=" + std::to_string(seq_frac));
  }

  // Address layout, all inside the working set: sequential files first, then
  // the strided walk region, then the random region.
  uint64_t ws = profile.working_set_pages;
  uint64_t seq_pages = seq_frac > 0 ? profile.file_count * profile.mean_file_pages : 0;
  uint64_t str_pages = str_frac > 0 ? std::max<uint64_t>(ws / 16, 64) : 0;
  if (seq_pages + str_pages > ws) {
    throw GenerationError("working_set_pages too small for the requested layout");
  }
  uint64_t rnd_pages = ws - seq_pages - str_pages;
  uint64_t rnd_units = rnd_frac > 0 ? rnd_pages / profile.rnd_request_pages : 0;
  if (rnd_frac > 0 && rnd_units < 16) {
    throw GenerationError("random region too small (working set vs request size)");
  }
  uint64_t seq_base = 0;
  uint64_t str_base = seq_pages * kPageBytes;
  uint64_t rnd_base = (seq_pages + str_pages) * kPageBytes;
  uint64_t rnd_req_bytes = profile.rnd_request_pages * kPageBytes;

  Rng rng(seed);
  ZipfSampler rnd_zipf(rnd_units, profile.zipf_s);
  double write_s = profile.zipf_write_s < 0 ? profile.zipf_s : profile.zipf_write_s;
  ZipfSampler rnd_write_zipf(rnd_units, write_s);
  ZipfSampler file_zipf(profile.file_count, 1.2);  // recency skew for file re-access

  // six-way class CDF
  std::array<double, 6> cdf;
  double acc = 0;
  for (size_t i = 0; i < 6; ++i) {
    acc += mix.f[i];
    cdf[i] = acc;
  }

  // sequential stream state: walk whole files, most-recently-used files are
  // re-accessed more often
  std::vector<uint32_t> file_mru(profile.file_count);
  for (uint32_t i = 0; i < profile.file_count; ++i) file_mru[i] = i;
  uint64_t cur_file = 0;
  uint64_t file_pos = 0;  // pages into the current file

  uint64_t str_pos = 0;  // pages into the strided region

  std::deque<Emitted> recent_rnd;  // candidates for overlap duplication
  Emitted last_lead{0, 0, 0};
  bool lead_valid = false;
  bool lead_shadowed = false;
  double over_produced = 0;  // overlaps manufactured or re-drawn so far

  // last 64 emissions, for detecting natural zipf duplicates
  std::deque<std::pair<uint64_t, uint64_t>> window64;
  std::unordered_map<uint64_t, uint32_t> window_counts;
  auto window_push = [&](uint64_t slot, uint64_t offset) {
    window64.emplace_back(slot, offset);
    window_counts[offset]++;
    if (window64.size() > 64) {
      auto [s, o] = window64.front();
      window64.pop_front();
      if (--window_counts[o] == 0) window_counts.erase(o);
    }
  };

  Trace trace;
  trace.requests.reserve(n_requests);

  auto emit = [&](uint64_t slot, Op op, uint64_t offset, uint64_t len) {
    IoRequest io;
    io.seq = slot + 1;
    io.pid = 100;
    io.op = op;
    io.offset = offset;
    io.len = len;
    io.is_meta = profile.meta_fraction > 0 && rng.Unit() < profile.meta_fraction;
    trace.requests.push_back(io);
    window_push(slot, offset);
  };

  for (uint64_t slot = 0; slot < n_requests; ++slot) {
    double u = rng.Unit();
    size_t cls = 0;
    while (cls < 5 && u >= cdf[cls]) ++cls;
    Op op = (cls % 2 == 1) ? Op::kWrite : Op::kRead;
    Access access = static_cast<Access>(cls / 2);
    bool want_over = over_produced < mix.f_over * static_cast<double>(slot + 1);

    if (access == Access::kSequential) {
      if (want_over && lead_valid && !lead_shadowed && slot - last_lead.slot <= 48) {
        // shadow: re-issue the latest lead interval; the lead request becomes
        // overlapped and this copy still classifies sequential because the
        // lead stream continues right behind it
        lead_shadowed = true;
        over_produced += 1;
        emit(slot, op, last_lead.offset, last_lead.len);
        continue;
      }
      if (file_pos >= profile.mean_file_pages) {
        uint64_t rank = file_zipf.Draw(rng);
        uint32_t idx = file_mru[rank];
        file_mru.erase(file_mru.begin() + static_cast<long>(rank));
        file_mru.insert(file_mru.begin(), idx);
        cur_file = idx;
        file_pos = 0;
      }
      uint64_t offset = seq_base + (cur_file * profile.mean_file_pages + file_pos) * kPageBytes;
      ++file_pos;
      last_lead = {slot, offset, kPageBytes};
      lead_valid = true;
      lead_shadowed = false;
      emit(slot, op, offset, kPageBytes);
      continue;
    }

    if (access == Access::kStrided) {
      if ((str_pos + 1) > str_pages) str_pos = 0;
      uint64_t offset = str_base + str_pos * kPageBytes;
      // 8 KiB gap to the next strided request
      str_pos += 3;
      if (str_pos >= str_pages) str_pos = 0;
      emit(slot, op, offset, kPageBytes);
      continue;
    }

    // random
    while (!recent_rnd.empty() && slot - recent_rnd.front().slot > 32) {
      recent_rnd.pop_front();
    }
    if (want_over && !recent_rnd.empty()) {
      size_t pick = recent_rnd.size() == 1 ? 0 : rng.Below(recent_rnd.size());
      Emitted e = recent_rnd[pick];
      recent_rnd.erase(recent_rnd.begin() + static_cast<long>(pick));
      over_produced += 1;
      emit(slot, op, e.offset, e.len);
      recent_rnd.push_back({slot, e.offset, e.len});
      continue;
    }
    uint64_t rank;
    if (op == Op::kWrite) {
      rank = rnd_units - 1 - rnd_write_zipf.Draw(rng);  // write-hot != read-hot
    } else {
      rank = rnd_zipf.Draw(rng);
    }
    uint64_t unit = ScatterRank(rank, rnd_units);
    uint64_t offset = rnd_base + unit * rnd_req_bytes;
    if (window_counts.count(offset)) over_produced += 1;  // natural duplicate
    emit(slot, op, offset, rnd_req_bytes);
    recent_rnd.push_back({slot, offset, rnd_req_bytes});
    if (recent_rnd.size() > 32) recent_rnd.pop_front();
  }

  trace.unique_pages = UniquePageCount(trace);
  return trace;
}

Workload ParseWorkloadName(const std::string& name) {
  if (name.size() == 2 && (name[0] == 'W' || name[0] == 'w') && name[1] >= '1' && name[1] <= '8') {
    return static_cast<Workload>(name[1] - '1');
  }
  throw std::invalid_argument("unknown workload '" + name + "' (expected W1..W8)");
}

Trace GenerateInterleavingWorkload(Workload w, uint64_t seed) {
  Rng rng(seed);
  const uint64_t full = kInterleaveCount;
  const uint64_t half = kInterleaveCount / 2;

  uint64_t seq_a = kWSeqBaseA;
  uint64_t seq_b = kWSeqBaseB;
  auto next_seq_a = [&] {
    uint64_t off = seq_a;
    seq_a += kPageBytes;
    return off;
  };
  auto next_seq_b = [&] {
    uint64_t off = seq_b;
    seq_b += kPageBytes;
    return off;
  };
  auto next_rand = [&] { return kWRandBase + rng.Below(kWRandPages) * kPageBytes; };

  using Gen = std::function<uint64_t()>;
  struct Stream {
    Gen next;
    uint64_t count;
  };

  // Stage layout per the two-stage scheme: "->" runs the streams back to
  // back, "," round-robins them request by request.
  std::vector<Stream> stages;
  bool interleave = false;
  switch (w) {
    case Workload::kW1: stages = {{next_seq_a, full}, {next_rand, full}}; break;
    case Workload::kW2: stages = {{next_seq_a, full}, {next_rand, full}}; interleave = true; break;
    case Workload::kW3: stages = {{next_seq_a, full}, {next_seq_b, full}}; break;
    case Workload::kW4: stages = {{next_seq_a, full}, {next_seq_b, full}}; interleave = true; break;
    case Workload::kW5: stages = {{next_seq_a, full}, {next_rand, half}}; interleave = true; break;
    case Workload::kW6: stages = {{next_seq_a, half}, {next_rand, half}}; interleave = true; break;
    case Workload::kW7: stages = {{next_seq_a, full}, {next_rand, half}}; break;
    case Workload::kW8: stages = {{next_seq_a, half}, {next_rand, half}}; break;
  }

  Trace trace;
  uint64_t seq_no = 0;
  auto emit = [&](uint64_t offset) {
    IoRequest io;
    io.seq = ++seq_no;
    io.pid = 100;
    io.op = Op::kRead;
    io.offset = offset;
    io.len = kPageBytes;
    trace.requests.push_back(io);
  };

  if (interleave) {
    uint64_t left0 = stages[0].count, left1 = stages[1].count;
    while (left0 > 0 || left1 > 0) {
      if (left0 > 0) {
        emit(stages[0].next());
        --left0;
      }
      if (left1 > 0) {
        emit(stages[1].next());
        --left1;
      }
    }
  } else {
    for (const Stream& st : stages) {
      for (uint64_t i = 0; i < st.count; ++i) emit(st.next());
    }
  }

  trace.unique_pages = UniquePageCount(trace);
  return trace;
}

Trace MixTraces(const Trace& a, const Trace& b, uint64_t b_addr_base) {
  Trace out;
  out.requests.reserve(a.requests.size() + b.requests.size());
  size_t ia = 0, ib = 0;
  uint64_t seq = 0;
  while (ia < a.requests.size() || ib < b.requests.size()) {
    if (ia < a.requests.size()) {
      IoRequest io = a.requests[ia++];
      io.seq = ++seq;
      out.requests.push_back(io);
    }
    if (ib < b.requests.size()) {
      IoRequest io = b.requests[ib++];
      io.offset += b_addr_base;
      io.seq = ++seq;
      out.requests.push_back(io);
    }
  }
  out.unique_pages = UniquePageCount(out);
  return out;
}

}  // namespace reca
