#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>

#include "reca/trace.hpp"

namespace reca {

enum class Access : uint8_t { kSequential, kStrided, kRandom };

struct RequestType {
  Access access = Access::kRandom;
  bool is_over = false;
  Op rw = Op::kRead;
  bool operator==(const RequestType&) const = default;
};

/// Index into the six-component mix vector: seqR seqW strR strW rndR rndW.
inline size_t FeatureIndex(Access access, Op rw) {
  return static_cast<size_t>(access) * 2 + (rw == Op::kWrite ? 1 : 0);
}

struct FeatureVector {
  std::array<double, 6> f{};  // fractions per (access, rw), sum to 1 when window_len > 0
  double f_over = 0;
  uint64_t window_len = 0;
};

/// Euclidean distance over the 7 components (six mix fractions + f_over).
double FeatureDistance(const FeatureVector& a, const FeatureVector& b);

/// Fractions of each request type over a non-empty window. Throws
/// std::invalid_argument on an empty window.
FeatureVector WindowFeatures(std::span<const RequestType> types);

/// Online request classifier: a bounded FIFO of the most recent requests.
/// Pushing the 65th request pops the oldest and classifies it against the 64
/// requests that followed it.
class HistoryClassifier {
 public:
  struct Config {
    size_t queue_capacity = 64;
    uint64_t seq_threshold = 512 * 1024;     // a single larger request is sequential
    uint64_t stride_threshold = 16 * 1024;   // covers the 8 KiB benchmark stride
  };

  struct Classified {
    IoRequest old_io;
    RequestType type;
  };

  HistoryClassifier() = default;
  explicit HistoryClassifier(const Config& cfg) : cfg_(cfg) {}

  /// Pushes new_io; when the queue was full, pops and classifies the oldest.
  std::optional<Classified> Observe(const IoRequest& new_io);

  /// Classifies old_io against the current queue contents. SEQUENTIAL wins
  /// over STRIDED when both match; adjacency and stride gaps are checked in
  /// both directions. A request whose begin or end lies inside a queued
  /// request's interval is flagged overlapped (identical intervals count,
  /// via the begin test).
  RequestType Characterize(const IoRequest& old_io) const;

  const std::deque<IoRequest>& queue() const { return queue_; }
  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  std::deque<IoRequest> queue_;
};

}  // namespace reca
