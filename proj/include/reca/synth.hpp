#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "reca/profiles.hpp"
#include "reca/trace.hpp"

namespace reca {

class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

/// Workload shape for the five categories: the target classification mix plus
/// the address-space layout knobs.
struct CategoryProfile {
  std::string name;
  FeatureVector target_mix;  // six fractions + overlap fraction
  uint64_t working_set_pages = 262144;
  uint32_t file_count = 8;
  uint64_t mean_file_pages = 512;
  double zipf_s = 0.8;
  double zipf_write_s = -1;  // < 0 follows zipf_s
  double meta_fraction = 0;
  uint32_t rnd_request_pages = 1;
};

CategoryProfile ProfileFromRecord(const CategoryRecord& rec);

/// Deterministic trace whose measured classification mix lands within ±0.05
/// per component of the target for large n. Throws GenerationError on an
/// infeasible mix or layout.
Trace GenerateCategoryTrace(const CategoryProfile& profile, uint64_t n_requests, uint64_t seed);

/// The interleaving experiment workloads. "F" stages issue 20,000 requests
/// and "H" stages 10,000; staged workloads run the two streams back to back,
/// interleaved ones round-robin them request by request.
enum class Workload { kW1, kW2, kW3, kW4, kW5, kW6, kW7, kW8 };

/// Parses "W1".."W8" (case-insensitive). Throws std::invalid_argument.
Workload ParseWorkloadName(const std::string& name);

Trace GenerateInterleavingWorkload(Workload w, uint64_t seed);

/// Round-robin merge of two traces into one, rebasing b's addresses by
/// b_addr_base and renumbering seq. Used to build mixed multi-process traces.
Trace MixTraces(const Trace& a, const Trace& b, uint64_t b_addr_base);

}  // namespace reca
