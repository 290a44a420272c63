#include "reca/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace reca {

double FeatureDistance(const FeatureVector& a, const FeatureVector& b) {
  double d2 = 0;
  for (size_t i = 0; i < 6; ++i) {
    double d = a.f[i] - b.f[i];
    d2 += d * d;
  }
  double d = a.f_over - b.f_over;
  d2 += d * d;
  return std::sqrt(d2);
}

FeatureVector WindowFeatures(std::span<const RequestType> types) {
  if (types.empty()) throw std::invalid_argument("empty classification window");
  FeatureVector fv;
  fv.window_len = types.size();
  uint64_t over = 0;
  std::array<uint64_t, 6> counts{};
  for (const RequestType& t : types) {
    counts[FeatureIndex(t.access, t.rw)]++;
    if (t.is_over) ++over;
  }
  for (size_t i = 0; i < 6; ++i) {
    fv.f[i] = static_cast<double>(counts[i]) / static_cast<double>(fv.window_len);
  }
  fv.f_over = static_cast<double>(over) / static_cast<double>(fv.window_len);
  return fv;
}

std::optional<HistoryClassifier::Classified> HistoryClassifier::Observe(const IoRequest& new_io) {
  queue_.push_back(new_io);
  if (queue_.size() <= cfg_.queue_capacity) return std::nullopt;
  IoRequest old_io = queue_.front();
  queue_.pop_front();
  return Classified{old_io, Characterize(old_io)};
}

RequestType HistoryClassifier::Characterize(const IoRequest& old_io) const {
  RequestType result;
  result.rw = old_io.op;

  bool sequential = old_io.len > cfg_.seq_threshold;
  bool strided = false;
  bool over = false;

  for (const IoRequest& temp : queue_) {
    if (!sequential &&
        (old_io.end() == temp.begin() || temp.end() == old_io.begin())) {
      sequential = true;
    }
    if (!strided) {
      if (old_io.begin() > temp.end() && old_io.begin() - temp.end() < cfg_.stride_threshold) {
        strided = true;
      } else if (old_io.end() < temp.begin() &&
                 temp.begin() - old_io.end() < cfg_.stride_threshold) {
        strided = true;
      }
    }
    if (!over) {
      // Strict interior containment of an endpoint; identical intervals
      // count via the begin test.
      if ((old_io.begin() >= temp.begin() && old_io.begin() < temp.end()) ||
          (old_io.end() > temp.begin() && old_io.end() < temp.end())) {
        over = true;
      }
    }
    if (sequential && over) break;
  }

  result.access = sequential ? Access::kSequential
                 : strided   ? Access::kStrided
                             : Access::kRandom;
  result.is_over = over;
  return result;
}

}  // namespace reca
