#pragma once

#include <cstdint>

#include "reca/trace.hpp"

namespace reca {

/// Measured device rates (Table-1-style). Bandwidths in bytes/s.
struct DeviceParams {
  double hdd_seq_bw = 120e6;
  double hdd_rnd_read_iops = 80;
  double hdd_rnd_write_iops = 150;
  double hdd_strided_read_mult = 3.0;   // ~200% gap between strided and sequential reads
  double hdd_strided_write_mult = 1.3;  // ~30% gap on writes
  double ssd_seq_read_bw = 480e6;
  double ssd_seq_write_bw = 440e6;
  double ssd_rnd_read_iops = 20000;
  double ssd_rnd_write_iops = 30000;
  double ssd_strided_mult = 1.1;
};

inline constexpr uint64_t kNoPos = ~0ull;

/// HDD with positional state: a request adjacent to the previous access end is
/// sequential, a small forward gap (up to 16 KiB) is strided, anything else
/// pays the seek (1/IOPS) plus transfer. The single last_end is what makes
/// interleaved sequential streams appear random at the device.
class HddModel {
 public:
  explicit HddModel(const DeviceParams& p) : p_(p) {}

  double Read(uint64_t offset, uint64_t len) { return Access(Op::kRead, offset, len); }
  double Write(uint64_t offset, uint64_t len) { return Access(Op::kWrite, offset, len); }
  double Access(Op op, uint64_t offset, uint64_t len);

  uint64_t reads() const { return reads_; }
  uint64_t writes() const { return writes_; }

 private:
  DeviceParams p_;
  uint64_t last_end_ = kNoPos;
  uint64_t reads_ = 0;
  uint64_t writes_ = 0;
};

/// SSD: 4 KiB non-adjacent accesses cost 1/IOPS (the IOPS figure subsumes the
/// transfer), larger random accesses add the excess transfer; sequential runs
/// at bandwidth; strided within 16 KiB costs sequential x mult. Every write
/// adds to the host-write byte counter.
class SsdModel {
 public:
  explicit SsdModel(const DeviceParams& p) : p_(p) {}

  double Read(uint64_t offset, uint64_t len) { return Access(Op::kRead, offset, len); }
  double Write(uint64_t offset, uint64_t len) { return Access(Op::kWrite, offset, len); }
  double Access(Op op, uint64_t offset, uint64_t len);

  uint64_t reads() const { return reads_; }
  uint64_t writes() const { return writes_; }
  uint64_t host_writes_bytes() const { return host_writes_bytes_; }

 private:
  DeviceParams p_;
  uint64_t last_end_ = kNoPos;
  uint64_t reads_ = 0;
  uint64_t writes_ = 0;
  uint64_t host_writes_bytes_ = 0;
};

struct DevicePair {
  explicit DevicePair(const DeviceParams& p) : hdd(p), ssd(p) {}
  HddModel hdd;
  SsdModel ssd;

  uint64_t total_ops() const { return hdd.reads() + hdd.writes() + ssd.reads() + ssd.writes(); }
};

}  // namespace reca
