#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "reca/classifier.hpp"

namespace reca {

enum class WritePolicy : uint8_t { kReadOnly, kWriteThrough, kWriteBack };

enum class EvictionPolicy : uint8_t {
  kFrequency,
  kRecency,
  kPriorityReadFavor,
  kRecencyFrequency,
  kNeighborCluster,
};

const char* ToString(WritePolicy p);
const char* ToString(EvictionPolicy p);

struct PriorityWeights {
  double over = 0;
  std::array<double, 3> acc{};    // indexed by Access
  double rw[3][2] = {};           // indexed by (Access, Op); read/write priority
                                  // is dependent on access type
};

/// Synthetic-generator parameters carried per category in the table file.
struct GeneratorParams {
  uint64_t working_set_pages = 262144;  // total 4 KiB footprint of the trace
  uint32_t file_count = 8;
  uint64_t mean_file_pages = 512;
  double zipf_s = 0.8;                  // page popularity skew in the random region
  double zipf_write_s = -1;             // write-side skew; < 0 follows zipf_s
  double meta_fraction = 0;
  uint32_t rnd_request_pages = 1;       // random request size, in pages
};

struct CategoryRecord {
  uint32_t id = 0;  // index in the table
  std::string name;
  FeatureVector signature;
  PriorityWeights weights;
  uint64_t cache_line_size = 4096;  // power-of-two multiple of 4096
  WritePolicy write_policy = WritePolicy::kWriteThrough;
  EvictionPolicy eviction = EvictionPolicy::kRecency;
  bool stream_filter = false;
  GeneratorParams gen;
};

class TableError : public std::runtime_error {
 public:
  explicit TableError(const std::string& what) : std::runtime_error(what) {}
};

class CharacteristicsTable {
 public:
  const std::vector<CategoryRecord>& records() const { return records_; }
  const CategoryRecord& at(size_t i) const { return records_.at(i); }
  size_t size() const { return records_.size(); }
  uint64_t version() const { return version_; }

  /// Index of the named category, or -1.
  int Find(std::string_view name) const;

  friend CharacteristicsTable LoadTable(std::istream& in);
  friend CharacteristicsTable ReloadTable(const CharacteristicsTable& old, std::istream& in);
  friend CharacteristicsTable DefaultTable();

 private:
  std::vector<CategoryRecord> records_;
  uint64_t version_ = 1;
};

/// Parses and validates the sectioned table format. Throws TableError naming
/// the section on any validation failure; unknown keys are errors.
CharacteristicsTable LoadTable(std::istream& in);
CharacteristicsTable LoadTableFile(const std::string& path);

/// Same as LoadTable but carries the version forward (+1). On error the
/// exception propagates and the old table remains usable.
CharacteristicsTable ReloadTable(const CharacteristicsTable& old, std::istream& in);

/// The five shipped categories with their default configurations.
CharacteristicsTable DefaultTable();

/// The shipped table rendered in the external file format.
std::string DefaultTableText();

/// Argmin of Euclidean distance between `features` and each record signature.
/// Ties resolve to `current` if tied, else the lowest record index.
size_t MatchCategory(const FeatureVector& features, const CharacteristicsTable& table,
                     size_t current);

}  // namespace reca
