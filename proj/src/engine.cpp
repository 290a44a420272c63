#include "reca/engine.hpp"

#include <algorithm>

namespace reca {

void SplitBlocks(const IoRequest& io, uint64_t line_size, std::vector<BlockSpan>& out) {
  out.clear();
  uint64_t first = io.offset / line_size * line_size;
  for (uint64_t line = first; line < io.end(); line += line_size) {
    BlockSpan b;
    b.line_addr = line;
    b.cover_begin = std::max(io.offset, line);
    b.cover_end = std::min(io.end(), line + line_size);
    out.push_back(b);
  }
}

void ChargeSet::Add(bool ssd, Op op, uint64_t offset, uint64_t len, bool sync, bool user_write) {
  if (len == 0) return;
  if (!charges_.empty()) {
    Charge& back = charges_.back();
    if (back.ssd == ssd && back.op == op && back.sync == sync &&
        back.user_write == user_write && back.offset + back.len == offset) {
      back.len += len;
      return;
    }
  }
  charges_.push_back(Charge{ssd, op, offset, len, sync, user_write});
}

double ChargeSet::Issue(DevicePair& dev, EngineStats& stats) {
  double sync_us = 0;
  for (const Charge& c : charges_) {
    double us = c.ssd ? dev.ssd.Access(c.op, c.offset, c.len)
                      : dev.hdd.Access(c.op, c.offset, c.len);
    stats.charged_ops++;
    if (c.ssd && c.op == Op::kWrite && c.user_write) stats.ssd_user_write_bytes += c.len;
    if (c.sync) {
      sync_us += us;
    } else {
      stats.background_us += us;
    }
  }
  charges_.clear();
  return sync_us;
}

}  // namespace reca
