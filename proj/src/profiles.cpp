#include "reca/profiles.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "reca/kvfile.hpp"

namespace reca {

namespace {

constexpr double kMixTolerance = 1e-9;

bool IsPow2Multiple4K(uint64_t v) {
  if (v < 4096 || v % 4096 != 0) return false;
  uint64_t lines = v / 4096;
  return (lines & (lines - 1)) == 0;
}

int AccessFromName(std::string_view s) {
  if (s == "random") return static_cast<int>(Access::kRandom);
  if (s == "strided") return static_cast<int>(Access::kStrided);
  if (s == "sequential") return static_cast<int>(Access::kSequential);
  return -1;
}

void ValidateRecord(const CategoryRecord& rec) {
  auto fail = [&](const std::string& msg) {
    throw TableError("category '" + rec.name + "': " + msg);
  };
  double sum = 0;
  for (double v : rec.signature.f) {
    if (v < 0 || v > 1) fail("signature fraction out of [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMixTolerance) {
    fail("signature fractions sum to " + std::to_string(sum) + ", expected 1");
  }
  if (rec.signature.f_over < 0 || rec.signature.f_over > 1) fail("sig.over out of [0,1]");
  if (!IsPow2Multiple4K(rec.cache_line_size)) {
    fail("line_size " + std::to_string(rec.cache_line_size) +
         " not power-of-two multiple of 4096");
  }
  if (rec.gen.working_set_pages == 0) fail("gen.working_set_pages must be positive");
  if (rec.gen.file_count == 0) fail("gen.file_count must be positive");
  if (rec.gen.mean_file_pages == 0) fail("gen.mean_file_pages must be positive");
  if (rec.gen.zipf_s < 0) fail("gen.zipf_s must be non-negative");
  if (rec.gen.meta_fraction < 0 || rec.gen.meta_fraction > 1) {
    fail("gen.meta_fraction out of [0,1]");
  }
  if (rec.gen.rnd_request_pages == 0) fail("gen.rnd_request_pages must be positive");
}

void ApplyKey(CategoryRecord& rec, const KvEntry& e) {
  auto bad_enum = [&](const char* what) {
    throw KvError(e.line, std::string("bad ") + what + " '" + e.value + "' in category '" +
                              rec.name + "'");
  };
  const std::string& k = e.key;
  if (k == "sig.seqR") { rec.signature.f[FeatureIndex(Access::kSequential, Op::kRead)] = KvToDouble(e); return; }
  if (k == "sig.seqW") { rec.signature.f[FeatureIndex(Access::kSequential, Op::kWrite)] = KvToDouble(e); return; }
  if (k == "sig.strR") { rec.signature.f[FeatureIndex(Access::kStrided, Op::kRead)] = KvToDouble(e); return; }
  if (k == "sig.strW") { rec.signature.f[FeatureIndex(Access::kStrided, Op::kWrite)] = KvToDouble(e); return; }
  if (k == "sig.rndR") { rec.signature.f[FeatureIndex(Access::kRandom, Op::kRead)] = KvToDouble(e); return; }
  if (k == "sig.rndW") { rec.signature.f[FeatureIndex(Access::kRandom, Op::kWrite)] = KvToDouble(e); return; }
  if (k == "sig.over") { rec.signature.f_over = KvToDouble(e); return; }
  if (k == "pr.over") { rec.weights.over = KvToDouble(e); return; }
  if (k.rfind("pr.acc.", 0) == 0) {
    int a = AccessFromName(k.substr(7));
    if (a < 0) throw KvError(e.line, "unknown key '" + k + "'");
    rec.weights.acc[static_cast<size_t>(a)] = KvToDouble(e);
    return;
  }
  if (k.rfind("pr.rw.", 0) == 0) {
    std::string rest = k.substr(6);
    size_t dot = rest.find('.');
    if (dot == std::string::npos) throw KvError(e.line, "unknown key '" + k + "'");
    int a = AccessFromName(rest.substr(0, dot));
    std::string rw = rest.substr(dot + 1);
    if (a < 0 || (rw != "r" && rw != "w")) throw KvError(e.line, "unknown key '" + k + "'");
    rec.weights.rw[a][rw == "w" ? 1 : 0] = KvToDouble(e);
    return;
  }
  if (k == "line_size") { rec.cache_line_size = KvToUint(e); return; }
  if (k == "write_policy") {
    if (e.value == "read_only") rec.write_policy = WritePolicy::kReadOnly;
    else if (e.value == "write_through") rec.write_policy = WritePolicy::kWriteThrough;
    else if (e.value == "write_back") rec.write_policy = WritePolicy::kWriteBack;
    else bad_enum("write_policy");
    return;
  }
  if (k == "eviction") {
    if (e.value == "frequency") rec.eviction = EvictionPolicy::kFrequency;
    else if (e.value == "recency") rec.eviction = EvictionPolicy::kRecency;
    else if (e.value == "priority_read") rec.eviction = EvictionPolicy::kPriorityReadFavor;
    else if (e.value == "recency_frequency") rec.eviction = EvictionPolicy::kRecencyFrequency;
    else if (e.value == "neighbor") rec.eviction = EvictionPolicy::kNeighborCluster;
    else bad_enum("eviction");
    return;
  }
  if (k == "stream_filter") { rec.stream_filter = KvToBool(e); return; }
  if (k == "gen.working_set_pages") { rec.gen.working_set_pages = KvToUint(e); return; }
  if (k == "gen.file_count") { rec.gen.file_count = static_cast<uint32_t>(KvToUint(e)); return; }
  if (k == "gen.mean_file_pages") { rec.gen.mean_file_pages = KvToUint(e); return; }
  if (k == "gen.zipf_s") { rec.gen.zipf_s = KvToDouble(e); return; }
  if (k == "gen.zipf_write_s") { rec.gen.zipf_write_s = KvToDouble(e); return; }
  if (k == "gen.meta_fraction") { rec.gen.meta_fraction = KvToDouble(e); return; }
  if (k == "gen.rnd_request_pages") { rec.gen.rnd_request_pages = static_cast<uint32_t>(KvToUint(e)); return; }
  throw KvError(e.line, "unknown key '" + k + "' in category '" + rec.name + "'");
}

}  // namespace

const char* ToString(WritePolicy p) {
  switch (p) {
    case WritePolicy::kReadOnly: return "read_only";
    case WritePolicy::kWriteThrough: return "write_through";
    case WritePolicy::kWriteBack: return "write_back";
  }
  return "?";
}

const char* ToString(EvictionPolicy p) {
  switch (p) {
    case EvictionPolicy::kFrequency: return "frequency";
    case EvictionPolicy::kRecency: return "recency";
    case EvictionPolicy::kPriorityReadFavor: return "priority_read";
    case EvictionPolicy::kRecencyFrequency: return "recency_frequency";
    case EvictionPolicy::kNeighborCluster: return "neighbor";
  }
  return "?";
}

int CharacteristicsTable::Find(std::string_view name) const {
  for (size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

CharacteristicsTable LoadTable(std::istream& in) {
  CharacteristicsTable table;
  std::vector<KvSection> sections;
  try {
    sections = ParseKvStream(in);
  } catch (const KvError& e) {
    throw TableError(e.what());
  }
  std::set<std::string> names;
  for (const KvSection& sec : sections) {
    constexpr std::string_view kPrefix = "category ";
    if (sec.name.rfind(kPrefix, 0) != 0) {
      throw TableError("section '" + sec.name + "': expected [category <name>]");
    }
    CategoryRecord rec;
    rec.id = static_cast<uint32_t>(table.records_.size());
    rec.name = sec.name.substr(kPrefix.size());
    if (rec.name.empty()) throw TableError("empty category name");
    if (!names.insert(rec.name).second) {
      throw TableError("duplicate category name '" + rec.name + "'");
    }
    try {
      for (const KvEntry& e : sec.entries) ApplyKey(rec, e);
    } catch (const KvError& e) {
      throw TableError(e.what());
    }
    ValidateRecord(rec);
    table.records_.push_back(std::move(rec));
  }
  if (table.records_.empty()) throw TableError("table holds no categories");
  return table;
}

CharacteristicsTable LoadTableFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open table file: " + path);
  return LoadTable(in);
}

CharacteristicsTable ReloadTable(const CharacteristicsTable& old, std::istream& in) {
  CharacteristicsTable fresh = LoadTable(in);
  fresh.version_ = old.version_ + 1;
  return fresh;
}

std::string DefaultTableText() {
  // Signatures approximate the per-category request-type mixes; weights put
  // random above strided above sequential, with random reads favored. The
  // gen.* keys shape the synthetic generator only.
  return R"(# ReCA workload characteristics table.
# Priorities: random > strided > sequential, random reads favored over
# random writes. read_only for the two read-dominant categories.

[category random_consumers]
sig.seqR = 0.05
sig.seqW = 0.03
sig.strR = 0.01
sig.strW = 0.01
sig.rndR = 0.85
sig.rndW = 0.05
sig.over = 0.05
pr.over = 2
pr.acc.random = 8
pr.acc.strided = 4
pr.acc.sequential = 1
pr.rw.random.r = 4
pr.rw.random.w = 1
line_size = 8192
write_policy = read_only
eviction = frequency
stream_filter = 0
gen.working_set_pages = 480000
gen.file_count = 8
gen.mean_file_pages = 512
gen.zipf_s = 0.8
gen.rnd_request_pages = 2

[category sequential_producer_consumers]
sig.seqR = 0.45
sig.seqW = 0.40
sig.strR = 0.03
sig.strW = 0.02
sig.rndR = 0.05
sig.rndW = 0.05
sig.over = 0.15
pr.over = 2
pr.acc.random = 8
pr.acc.strided = 4
pr.acc.sequential = 1
pr.rw.random.r = 4
pr.rw.random.w = 1
line_size = 131072
write_policy = write_through
eviction = recency
stream_filter = 1
gen.working_set_pages = 140000
gen.file_count = 256
gen.mean_file_pages = 256
gen.zipf_s = 1.0
gen.rnd_request_pages = 1

[category random_producer_consumers]
sig.seqR = 0.05
sig.seqW = 0.05
sig.strR = 0.03
sig.strW = 0.02
sig.rndR = 0.45
sig.rndW = 0.40
sig.over = 0.10
pr.over = 2
pr.acc.random = 8
pr.acc.strided = 4
pr.acc.sequential = 1
pr.rw.random.r = 8
pr.rw.random.w = 1
line_size = 4096
write_policy = write_through
eviction = priority_read
stream_filter = 0
gen.working_set_pages = 400000
gen.file_count = 8
gen.mean_file_pages = 512
gen.zipf_s = 1.05
gen.zipf_write_s = 0.5
gen.rnd_request_pages = 1

[category archival_consumers]
sig.seqR = 0.75
sig.seqW = 0.03
sig.strR = 0.10
sig.strW = 0.01
sig.rndR = 0.10
sig.rndW = 0.01
sig.over = 0.30
pr.over = 2
pr.acc.random = 8
pr.acc.strided = 4
pr.acc.sequential = 1
pr.rw.random.r = 4
pr.rw.random.w = 1
line_size = 131072
write_policy = read_only
eviction = recency_frequency
stream_filter = 1
gen.working_set_pages = 360000
gen.file_count = 64
gen.mean_file_pages = 4096
gen.zipf_s = 1.1
gen.rnd_request_pages = 1

[category large_file_generators]
sig.seqR = 0.05
sig.seqW = 0.70
sig.strR = 0.01
sig.strW = 0.01
sig.rndR = 0.03
sig.rndW = 0.20
sig.over = 0.02
pr.over = 2
pr.acc.random = 8
pr.acc.strided = 4
pr.acc.sequential = 1
pr.rw.random.r = 4
pr.rw.random.w = 1
line_size = 131072
write_policy = write_back
eviction = neighbor
stream_filter = 0
gen.working_set_pages = 700000
gen.file_count = 1
gen.mean_file_pages = 600000
gen.zipf_s = 0.8
gen.rnd_request_pages = 1
)";
}

CharacteristicsTable DefaultTable() {
  std::istringstream in(DefaultTableText());
  return LoadTable(in);
}

size_t MatchCategory(const FeatureVector& features, const CharacteristicsTable& table,
                     size_t current) {
  double best = -1;
  size_t best_idx = 0;
  double current_d = -1;
  for (size_t i = 0; i < table.size(); ++i) {
    double d = FeatureDistance(features, table.at(i).signature);
    if (best < 0 || d < best) {
      best = d;
      best_idx = i;
    }
    if (i == current) current_d = d;
  }
  if (current < table.size() && current_d == best) return current;
  return best_idx;
}

}  // namespace reca
