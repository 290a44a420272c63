#include "reca/device.hpp"

namespace reca {

namespace {

enum class DevAccess { kSequential, kStrided, kRandom };

DevAccess ClassifyAt(uint64_t last_end, uint64_t offset, uint64_t stride_limit) {
  if (last_end == kNoPos) return DevAccess::kRandom;
  if (offset == last_end) return DevAccess::kSequential;
  if (offset > last_end && offset - last_end <= stride_limit) return DevAccess::kStrided;
  return DevAccess::kRandom;
}

constexpr uint64_t kStrideLimit = 16 * 1024;

}  // namespace

double HddModel::Access(Op op, uint64_t offset, uint64_t len) {
  DevAccess a = ClassifyAt(last_end_, offset, kStrideLimit);
  last_end_ = offset + len;
  if (op == Op::kRead) ++reads_; else ++writes_;

  double transfer_us = static_cast<double>(len) / p_.hdd_seq_bw * 1e6;
  switch (a) {
    case DevAccess::kSequential:
      return transfer_us;
    case DevAccess::kStrided:
      return transfer_us * (op == Op::kRead ? p_.hdd_strided_read_mult : p_.hdd_strided_write_mult);
    case DevAccess::kRandom:
      break;
  }
  double seek_us = 1e6 / (op == Op::kRead ? p_.hdd_rnd_read_iops : p_.hdd_rnd_write_iops);
  return seek_us + transfer_us;
}

double SsdModel::Access(Op op, uint64_t offset, uint64_t len) {
  DevAccess a = ClassifyAt(last_end_, offset, kStrideLimit);
  last_end_ = offset + len;
  if (op == Op::kRead) {
    ++reads_;
  } else {
    ++writes_;
    host_writes_bytes_ += len;
  }

  double bw = op == Op::kRead ? p_.ssd_seq_read_bw : p_.ssd_seq_write_bw;
  double seq_us = static_cast<double>(len) / bw * 1e6;
  switch (a) {
    case DevAccess::kSequential:
      return seq_us;
    case DevAccess::kStrided:
      return seq_us * p_.ssd_strided_mult;
    case DevAccess::kRandom:
      break;
  }
  // The IOPS figure covers a 4 KiB access; larger requests add the excess
  // transfer at bandwidth.
  double base_us = 1e6 / (op == Op::kRead ? p_.ssd_rnd_read_iops : p_.ssd_rnd_write_iops);
  if (len > kPageBytes) base_us += static_cast<double>(len - kPageBytes) / bw * 1e6;
  return base_us;
}

}  // namespace reca
