#include "reca/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace reca {

namespace {

constexpr const char* kColumns[] = {"seq", "ts_us", "pid", "op", "offset", "len", "is_meta"};
constexpr size_t kNumColumns = 7;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

uint64_t ParseUint(std::string_view field, size_t line, const char* what) {
  field = Trim(field);
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || p != field.data() + field.size()) {
    throw ParseError(line, std::string("bad ") + what + " value '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string ValidateRequest(const IoRequest& io) {
  if (io.len == 0) return "len must be positive";
  if (io.offset % kSectorBytes != 0) {
    return "offset " + std::to_string(io.offset) + " not a 512 multiple";
  }
  if (io.len % kSectorBytes != 0) {
    return "len " + std::to_string(io.len) + " not a 512 multiple";
  }
  return {};
}

Trace ParseTrace(std::istream& in) {
  Trace trace;
  std::string line;
  size_t line_no = 0;

  // Header: a subset of the canonical columns in canonical order.
  // pid, op, offset and len are required; seq, ts_us and is_meta may be
  // absent (seq then comes from record order).
  std::vector<int> col_of(kNumColumns, -1);
  bool have_header = false;
  size_t n_cols = 0;

  auto parse_header = [&](std::string_view h) {
    size_t canon = 0;
    size_t col = 0;
    size_t start = 0;
    std::string hs(h);
    hs.push_back(',');
    for (size_t i = 0; i < hs.size(); ++i) {
      if (hs[i] != ',') continue;
      std::string_view name = Trim(std::string_view(hs).substr(start, i - start));
      start = i + 1;
      while (canon < kNumColumns && name != kColumns[canon]) ++canon;
      if (canon == kNumColumns) {
        throw ParseError(line_no, "unknown or out-of-order column '" + std::string(name) + "'");
      }
      col_of[canon] = static_cast<int>(col);
      ++canon;
      ++col;
    }
    for (const char* required : {"pid", "op", "offset", "len"}) {
      size_t idx = std::find(std::begin(kColumns), std::end(kColumns), std::string_view(required)) -
                   std::begin(kColumns);
      if (col_of[idx] < 0) {
        throw ParseError(line_no, std::string("missing required column '") + required + "'");
      }
    }
    n_cols = col;
  };

  uint64_t auto_seq = 0;
  uint64_t last_seq = 0;
  bool any = false;
  std::vector<std::string_view> fields;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = Trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!have_header) {
      parse_header(sv);
      have_header = true;
      continue;
    }

    fields.clear();
    size_t start = 0;
    for (size_t i = 0; i <= sv.size(); ++i) {
      if (i == sv.size() || sv[i] == ',') {
        fields.push_back(Trim(sv.substr(start, i - start)));
        start = i + 1;
      }
    }
    if (fields.size() != n_cols) {
      throw ParseError(line_no, "expected " + std::to_string(n_cols) + " fields, got " +
                                    std::to_string(fields.size()));
    }

    auto field = [&](size_t canon) -> std::string_view {
      return fields[static_cast<size_t>(col_of[canon])];
    };

    IoRequest io;
    ++auto_seq;
    io.seq = col_of[0] >= 0 ? ParseUint(field(0), line_no, "seq") : auto_seq;
    io.ts_us = col_of[1] >= 0 ? ParseUint(field(1), line_no, "ts_us") : 0;
    io.pid = static_cast<uint32_t>(ParseUint(field(2), line_no, "pid"));
    std::string_view op = field(3);
    if (op == "R" || op == "r") {
      io.op = Op::kRead;
    } else if (op == "W" || op == "w") {
      io.op = Op::kWrite;
    } else {
      throw ParseError(line_no, "op must be R or W, got '" + std::string(op) + "'");
    }
    io.offset = ParseUint(field(4), line_no, "offset");
    io.len = ParseUint(field(5), line_no, "len");
    if (col_of[6] >= 0) {
      uint64_t m = ParseUint(field(6), line_no, "is_meta");
      if (m > 1) throw ParseError(line_no, "is_meta must be 0 or 1");
      io.is_meta = m == 1;
    }

    if (std::string err = ValidateRequest(io); !err.empty()) {
      throw ParseError(line_no, err);
    }
    if (any && io.seq <= last_seq) {
      throw ParseError(line_no, "seq " + std::to_string(io.seq) + " not strictly increasing");
    }
    last_seq = io.seq;
    any = true;
    trace.requests.push_back(io);
  }
  if (!have_header) throw ParseError(line_no, "missing header line");

  trace.unique_pages = UniquePageCount(trace);
  return trace;
}

Trace ParseTraceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return ParseTrace(in);
}

void SerializeTrace(const Trace& trace, std::ostream& out) {
  out << "seq,ts_us,pid,op,offset,len,is_meta\n";
  char buf[160];
  for (const IoRequest& io : trace.requests) {
    int n = std::snprintf(buf, sizeof(buf), "%llu,%llu,%u,%c,%llu,%llu,%d\n",
                          static_cast<unsigned long long>(io.seq),
                          static_cast<unsigned long long>(io.ts_us), io.pid,
                          io.op == Op::kRead ? 'R' : 'W',
                          static_cast<unsigned long long>(io.offset),
                          static_cast<unsigned long long>(io.len), io.is_meta ? 1 : 0);
    out.write(buf, n);
  }
}

void SerializeTraceFile(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  SerializeTrace(trace, out);
}

uint64_t UniquePageCount(const Trace& trace) {
  std::unordered_set<uint64_t> pages;
  pages.reserve(trace.requests.size());
  for (const IoRequest& io : trace.requests) {
    uint64_t first = io.offset / kPageBytes;
    uint64_t last = (io.end() - 1) / kPageBytes;
    for (uint64_t p = first; p <= last; ++p) pages.insert(p);
  }
  return pages.size();
}

}  // namespace reca
