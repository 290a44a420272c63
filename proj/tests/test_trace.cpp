#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "reca/trace.hpp"

using namespace reca;

namespace {

Trace ParseString(const std::string& s) {
  std::istringstream in(s);
  return ParseTrace(in);
}

constexpr const char* kHeader = "seq,ts_us,pid,op,offset,len,is_meta\n";

}  // namespace

TEST_CASE("parse maps fields directly") {
  Trace t = ParseString(std::string(kHeader) + "1,0,100,R,4096,4096,0\n");
  REQUIRE(t.requests.size() == 1);
  const IoRequest& io = t.requests[0];
  CHECK(io.seq == 1);
  CHECK(io.pid == 100);
  CHECK(io.op == Op::kRead);
  CHECK(io.offset == 4096);
  CHECK(io.len == 4096);
  CHECK_FALSE(io.is_meta);
}

TEST_CASE("1024-byte length is accepted as a 512 multiple") {
  Trace t = ParseString(std::string(kHeader) + "2,5,100,W,0,1024,1\n");
  REQUIRE(t.requests.size() == 1);
  CHECK(t.requests[0].op == Op::kWrite);
  CHECK(t.requests[0].ts_us == 5);
  CHECK(t.requests[0].len == 1024);
  CHECK(t.requests[0].is_meta);
}

TEST_CASE("unaligned offset is a validation error naming the line") {
  try {
    ParseString(std::string(kHeader) + "3,0,1,R,100,512,0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("512") != std::string::npos);
  }
}

TEST_CASE("malformed line reports its number") {
  try {
    ParseString(std::string(kHeader) + "1,0,100,R,0,4096,0\n# comment\nbogus line\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("zero length rejected") {
  CHECK_THROWS_AS(ParseString(std::string(kHeader) + "1,0,1,R,0,0,0\n"), ParseError);
}

TEST_CASE("op must be R or W") {
  CHECK_THROWS_AS(ParseString(std::string(kHeader) + "1,0,1,X,0,512,0\n"), ParseError);
}

TEST_CASE("seq must be strictly increasing") {
  CHECK_THROWS_AS(
      ParseString(std::string(kHeader) + "2,0,1,R,0,512,0\n2,0,1,R,512,512,0\n"), ParseError);
}

TEST_CASE("seq assigned from record order when the column is absent") {
  Trace t = ParseString("pid,op,offset,len\n7,R,0,512\n7,W,512,512\n");
  REQUIRE(t.requests.size() == 2);
  CHECK(t.requests[0].seq == 1);
  CHECK(t.requests[1].seq == 2);
  CHECK(t.requests[1].op == Op::kWrite);
}

TEST_CASE("comments and blank lines are skipped") {
  Trace t = ParseString("# leading comment\n" + std::string(kHeader) +
                        "# another\n\n1,0,1,R,0,512,0\n");
  CHECK(t.requests.size() == 1);
}

TEST_CASE("round-trip: parse(serialize(trace)) == trace") {
  std::mt19937_64 rng(42);
  Trace t;
  for (uint64_t i = 0; i < 500; ++i) {
    IoRequest io;
    io.seq = i * 3 + 1;
    io.ts_us = rng() % 1000000;
    io.pid = static_cast<uint32_t>(rng() % 4);
    io.op = rng() % 2 ? Op::kWrite : Op::kRead;
    io.offset = (rng() % (1 << 20)) * 512;
    io.len = (1 + rng() % 16) * 512;
    io.is_meta = rng() % 8 == 0;
    t.requests.push_back(io);
  }
  t.unique_pages = UniquePageCount(t);

  std::ostringstream out;
  SerializeTrace(t, out);
  std::istringstream in(out.str());
  Trace back = ParseTrace(in);
  CHECK(back.requests == t.requests);
  CHECK(back.unique_pages == t.unique_pages);
}

TEST_CASE("unique page count: single, stacked, and adjacent requests") {
  auto mk = [](std::vector<std::pair<uint64_t, uint64_t>> spans) {
    Trace t;
    uint64_t seq = 0;
    for (auto [off, len] : spans) {
      IoRequest io;
      io.seq = ++seq;
      io.offset = off;
      io.len = len;
      t.requests.push_back(io);
    }
    return t;
  };
  CHECK(UniquePageCount(mk({{0, 4096}})) == 1);
  CHECK(UniquePageCount(mk({{0, 4096}, {0, 8192}})) == 2);
  CHECK(UniquePageCount(mk({{0, 4096}, {4096, 4096}})) == 2);
}

TEST_CASE("unique page count equals brute-force set construction") {
  std::mt19937_64 rng(7);
  Trace t;
  std::set<uint64_t> oracle;
  for (uint64_t i = 0; i < 2000; ++i) {
    IoRequest io;
    io.seq = i + 1;
    io.offset = (rng() % 5000) * 512;
    io.len = (1 + rng() % 64) * 512;
    t.requests.push_back(io);
    for (uint64_t b = io.offset / 4096; b <= (io.end() - 1) / 4096; ++b) oracle.insert(b);
  }
  CHECK(UniquePageCount(t) == oracle.size());
}
