#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <list>
#include <random>
#include <unordered_map>

#include "reca/baselines.hpp"

using namespace reca;

namespace {

IoRequest Io(uint64_t seq, uint64_t page, Op op = Op::kRead) {
  IoRequest io;
  io.seq = seq;
  io.pid = 1;
  io.op = op;
  io.offset = page * 4096;
  io.len = 4096;
  return io;
}

// Minimal reference LRU, independent of the engine code: a recency-ordered
// vector scanned linearly.
struct OracleLru {
  explicit OracleLru(size_t cap) : cap(cap) {}
  bool Access(uint64_t addr) {
    for (size_t i = 0; i < order.size(); ++i) {
      if (order[i] == addr) {
        order.erase(order.begin() + static_cast<long>(i));
        order.insert(order.begin(), addr);
        return true;
      }
    }
    order.insert(order.begin(), addr);
    if (order.size() > cap) order.pop_back();
    return false;
  }
  size_t cap;
  std::vector<uint64_t> order;
};

}  // namespace

TEST_CASE("lru: capacity 2, A B C evicts A") {
  DevicePair dev{DeviceParams{}};
  LruEngine lru({2 * 4096, 4096}, &dev);
  std::vector<BlockRoute> routes;
  lru.OnRequest(Io(1, 10), &routes);
  lru.OnRequest(Io(2, 20), &routes);
  lru.OnRequest(Io(3, 30), &routes);
  routes.clear();
  lru.OnRequest(Io(4, 10), &routes);  // A is gone
  CHECK(routes[0].route == Route::kMissPromote);
  routes.clear();
  lru.OnRequest(Io(5, 30), &routes);  // C survived
  CHECK(routes[0].route == Route::kHit);
}

TEST_CASE("lru: A B A C evicts B") {
  DevicePair dev{DeviceParams{}};
  LruEngine lru({2 * 4096, 4096}, &dev);
  std::vector<BlockRoute> routes;
  lru.OnRequest(Io(1, 10), &routes);
  lru.OnRequest(Io(2, 20), &routes);
  lru.OnRequest(Io(3, 10), &routes);
  lru.OnRequest(Io(4, 30), &routes);
  routes.clear();
  lru.OnRequest(Io(5, 10), &routes);
  CHECK(routes[0].route == Route::kHit);
  routes.clear();
  lru.OnRequest(Io(6, 20), &routes);
  CHECK(routes[0].route == Route::kMissPromote);
}

TEST_CASE("lru hit/miss sequence matches the reference oracle") {
  std::mt19937_64 rng(123);
  DevicePair dev{DeviceParams{}};
  const size_t cap = 64;
  LruEngine lru({cap * 4096, 4096}, &dev);
  OracleLru oracle(cap);
  std::vector<BlockRoute> routes;
  for (uint64_t i = 0; i < 10000; ++i) {
    uint64_t page = rng() % 256;
    Op op = rng() % 4 == 0 ? Op::kWrite : Op::kRead;
    routes.clear();
    lru.OnRequest(Io(i + 1, page, op), &routes);
    bool hit = oracle.Access(page * 4096);
    REQUIRE(routes.size() == 1);
    REQUIRE((routes[0].route == Route::kHit) == hit);
  }
}

TEST_CASE("larc: one touch goes to the ghost, the second admits") {
  DevicePair dev{DeviceParams{}};
  LarcEngine larc({64 * 4096, 4096}, &dev);
  std::vector<BlockRoute> routes;
  larc.OnRequest(Io(1, 10), &routes);
  CHECK(routes[0].route == Route::kMissBypass);
  CHECK(larc.occupied_lines() == 0);
  CHECK(larc.ghost_size() == 1);
  routes.clear();
  larc.OnRequest(Io(2, 10), &routes);
  CHECK(routes[0].route == Route::kMissPromote);
  CHECK(larc.occupied_lines() == 1);
  routes.clear();
  larc.OnRequest(Io(3, 10), &routes);
  CHECK(routes[0].route == Route::kHit);
}

TEST_CASE("larc: a one-touch scan never pollutes the cache") {
  DevicePair dev{DeviceParams{}};
  const size_t cap = 128;
  LarcEngine larc({cap * 4096, 4096}, &dev);
  // warm a small hot set; back-to-back touches keep the reuse distance
  // inside the ghost window so every page gets admitted on its second touch
  uint64_t seq = 0;
  for (uint64_t p = 0; p < 32; ++p) {
    larc.OnRequest(Io(++seq, p));
    larc.OnRequest(Io(++seq, p));
  }
  REQUIRE(larc.occupied_lines() == 32);
  uint64_t occupied = larc.occupied_lines();
  uint64_t evictions = larc.stats().evictions;
  // scan of distinct one-touch addresses, much larger than the cache
  for (uint64_t p = 0; p < 10 * cap; ++p) {
    std::vector<BlockRoute> routes;
    larc.OnRequest(Io(1000 + p, 100000 + p), &routes);
    REQUIRE(routes[0].route == Route::kMissBypass);
  }
  CHECK(larc.occupied_lines() == occupied);
  CHECK(larc.stats().evictions == evictions);
  // the hot set is still resident
  std::vector<BlockRoute> routes;
  larc.OnRequest(Io(999999, 5), &routes);
  CHECK(routes[0].route == Route::kHit);
}

TEST_CASE("larc ghost queue adapts within [0.1C, 0.9C]") {
  DevicePair dev{DeviceParams{}};
  const size_t cap = 100;
  LarcEngine larc({cap * 4096, 4096}, &dev);
  std::mt19937_64 rng(5);
  for (uint64_t i = 0; i < 20000; ++i) {
    larc.OnRequest(Io(i + 1, rng() % 300));
    REQUIRE(larc.ghost_target() >= 0.1 * cap - 1e-9);
    REQUIRE(larc.ghost_target() <= 0.9 * cap + 1e-9);
    REQUIRE(larc.ghost_size() <= static_cast<size_t>(0.9 * cap) + 1);
  }
}

TEST_CASE("freq: admit only when the count strictly beats the cached minimum") {
  DevicePair dev{DeviceParams{}};
  FreqEngine freq({2 * 4096, 4096}, &dev);
  std::vector<BlockRoute> routes;
  uint64_t seq = 0;
  // A touched 5 times, B twice; both admitted while there was room
  for (int i = 0; i < 5; ++i) freq.OnRequest(Io(++seq, 1));
  for (int i = 0; i < 2; ++i) freq.OnRequest(Io(++seq, 2));
  // C reaches count 3 > min(2): admitted, evicting B
  for (int i = 0; i < 2; ++i) {
    routes.clear();
    freq.OnRequest(Io(++seq, 3), &routes);
    CHECK(routes[0].route == Route::kMissBypass);
  }
  routes.clear();
  freq.OnRequest(Io(++seq, 3), &routes);
  CHECK(routes[0].route == Route::kMissPromote);
  routes.clear();
  freq.OnRequest(Io(++seq, 2), &routes);  // B was the victim
  CHECK(routes[0].route == Route::kMissBypass);
  routes.clear();
  freq.OnRequest(Io(++seq, 1), &routes);  // A survived
  CHECK(routes[0].route == Route::kHit);
}

TEST_CASE("freq: D with count 1 against cached min 2 bypasses") {
  DevicePair dev{DeviceParams{}};
  FreqEngine freq({2 * 4096, 4096}, &dev);
  uint64_t seq = 0;
  for (int i = 0; i < 2; ++i) freq.OnRequest(Io(++seq, 1));
  for (int i = 0; i < 2; ++i) freq.OnRequest(Io(++seq, 2));
  std::vector<BlockRoute> routes;
  freq.OnRequest(Io(++seq, 4), &routes);
  CHECK(routes[0].route == Route::kMissBypass);
  CHECK(freq.occupied_lines() == 2);
}

TEST_CASE("freq: round-robin over capacity+1 pages stabilizes without thrashing") {
  DevicePair dev{DeviceParams{}};
  const size_t cap = 3;
  FreqEngine freq({cap * 4096, 4096}, &dev);
  uint64_t seq = 0;
  // first pass fills the cache with pages 0..2; page 3 stays out forever
  for (int round = 0; round < 50; ++round) {
    for (uint64_t p = 0; p <= cap; ++p) {
      std::vector<BlockRoute> routes;
      freq.OnRequest(Io(++seq, p), &routes);
      if (round > 0) {
        if (p < cap) {
          REQUIRE(routes[0].route == Route::kHit);
        } else {
          REQUIRE(routes[0].route == Route::kMissBypass);
        }
      }
    }
  }
  CHECK(freq.stats().evictions == 0);
}

TEST_CASE("larc ghost entries charge no ssd bytes") {
  DevicePair dev{DeviceParams{}};
  LarcEngine larc({64 * 4096, 4096}, &dev);
  for (uint64_t p = 0; p < 1000; ++p) larc.OnRequest(Io(p + 1, 50000 + p));
  CHECK(larc.ghost_size() > 0);
  CHECK(dev.ssd.host_writes_bytes() == 0);  // nothing admitted, nothing written
}

TEST_CASE("all baselines split requests identically at line boundaries") {
  IoRequest io;
  io.seq = 1;
  io.op = Op::kRead;
  io.offset = 6144;
  io.len = 12288;
  DevicePair d1{DeviceParams{}}, d2{DeviceParams{}}, d3{DeviceParams{}};
  LruEngine lru({64 * 4096, 4096}, &d1);
  LarcEngine larc({64 * 4096, 4096}, &d2);
  FreqEngine freq({64 * 4096, 4096}, &d3);
  std::vector<BlockRoute> r1, r2, r3;
  lru.OnRequest(io, &r1);
  larc.OnRequest(io, &r2);
  freq.OnRequest(io, &r3);
  REQUIRE(r1.size() == 4);
  REQUIRE(r2.size() == 4);
  REQUIRE(r3.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(r1[i].disk_addr == r2[i].disk_addr);
    CHECK(r2[i].disk_addr == r3[i].disk_addr);
  }
  CHECK(r1[0].disk_addr == 4096);
}
