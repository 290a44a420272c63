#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace reca {

inline constexpr uint64_t kSectorBytes = 512;
inline constexpr uint64_t kPageBytes = 4096;

enum class Op : uint8_t { kRead, kWrite };

/// One block-layer I/O request. Offsets and lengths are in bytes and must be
/// sector (512 B) aligned; caching operates at 4 KiB page granularity.
struct IoRequest {
  uint64_t seq = 0;     // strictly increasing within a trace
  uint64_t ts_us = 0;   // reporting metadata only; 0 if the trace has no timestamps
  uint32_t pid = 0;
  Op op = Op::kRead;
  uint64_t offset = 0;
  uint64_t len = 0;
  bool is_meta = false;

  uint64_t begin() const { return offset; }
  uint64_t end() const { return offset + len; }
  bool operator==(const IoRequest&) const = default;
};

struct Trace {
  std::vector<IoRequest> requests;
  uint64_t page_size = kPageBytes;
  uint64_t unique_pages = 0;  // cached result of UniquePageCount()
};

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

/// Parses the canonical CSV trace format. Header line names the columns
/// (`seq,ts_us,pid,op,offset,len,is_meta`); seq/ts_us/is_meta may be omitted,
/// in which case seq is assigned from record order. `#` lines are comments.
/// Throws ParseError with the offending line number.
Trace ParseTrace(std::istream& in);
Trace ParseTraceFile(const std::string& path);

void SerializeTrace(const Trace& trace, std::ostream& out);
void SerializeTraceFile(const Trace& trace, const std::string& path);

/// Exact count of distinct 4 KiB pages covered by any request.
uint64_t UniquePageCount(const Trace& trace);

/// Validates one request against the trace invariants (alignment, len > 0).
/// Returns an error message, or empty string if valid.
std::string ValidateRequest(const IoRequest& io);

}  // namespace reca
