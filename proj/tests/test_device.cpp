#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "reca/device.hpp"

using namespace reca;

TEST_CASE("hdd random read 4 KiB: seek plus transfer") {
  HddModel h{DeviceParams{}};
  double us = h.Read(1 << 30, 4096);
  CHECK(us == doctest::Approx(12500.0 + 4096.0 / 120e6 * 1e6).epsilon(1e-9));
  CHECK(us == doctest::Approx(12534.13).epsilon(1e-4));
}

TEST_CASE("hdd sequential write 4 KiB runs at bandwidth") {
  HddModel h{DeviceParams{}};
  h.Write(0, 4096);
  double us = h.Write(4096, 4096);
  CHECK(us == doctest::Approx(4096.0 / 120e6 * 1e6).epsilon(1e-9));
  CHECK(us == doctest::Approx(34.13).epsilon(1e-3));
}

TEST_CASE("hdd strided read costs about three sequential reads") {
  HddModel h{DeviceParams{}};
  h.Read(0, 4096);
  double strided = h.Read(4096 + 8192, 4096);  // 8 KiB gap
  HddModel h2{DeviceParams{}};
  h2.Read(0, 4096);
  double seq = h2.Read(4096, 4096);
  CHECK(strided == doctest::Approx(3.0 * seq).epsilon(1e-9));
}

TEST_CASE("hdd backward jumps are random") {
  HddModel h{DeviceParams{}};
  h.Read(1 << 20, 4096);
  double us = h.Read(0, 4096);
  CHECK(us > 12000.0);
}

TEST_CASE("ssd random write 4 KiB and host write accounting") {
  SsdModel s{DeviceParams{}};
  double us = s.Write(1 << 30, 4096);
  CHECK(us == doctest::Approx(1e6 / 30000).epsilon(1e-9));
  CHECK(s.host_writes_bytes() == 4096);
  s.Read(0, 4096);
  CHECK(s.host_writes_bytes() == 4096);  // reads never count
}

TEST_CASE("ssd random read 4 KiB is 50 us") {
  SsdModel s{DeviceParams{}};
  CHECK(s.Read(1 << 30, 4096) == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("ssd sequential read 128 KiB at bandwidth") {
  SsdModel s{DeviceParams{}};
  s.Read(0, 4096);
  double us = s.Read(4096, 131072);
  CHECK(us == doctest::Approx(131072.0 / 480e6 * 1e6).epsilon(1e-9));
  CHECK(us == doctest::Approx(273.07).epsilon(1e-3));
}

TEST_CASE("hdd ordering: sequential < strided < random at every size") {
  for (uint64_t len : {4096ull, 8192ull, 65536ull, 131072ull}) {
    HddModel a{DeviceParams{}};
    a.Read(0, len);
    double seq = a.Read(len, len);

    HddModel b{DeviceParams{}};
    b.Read(0, len);
    double strided = b.Read(len + 8192, len);

    HddModel c{DeviceParams{}};
    c.Read(0, len);
    double random = c.Read(len + (1 << 26), len);

    CHECK(seq < strided);
    CHECK(strided < random);
  }
}

TEST_CASE("hdd random writes are faster than random reads (150 vs 80 IOPS)") {
  for (uint64_t len : {4096ull, 8192ull, 65536ull, 131072ull}) {
    HddModel a{DeviceParams{}};
    double rd = a.Read(1 << 30, len);
    HddModel b{DeviceParams{}};
    double wr = b.Write(1 << 30, len);
    CHECK(wr < rd);
  }
}

TEST_CASE("replaying the same op sequence gives identical totals") {
  std::mt19937_64 rng(17);
  std::vector<std::tuple<int, uint64_t, uint64_t>> ops;
  for (int i = 0; i < 5000; ++i) {
    ops.emplace_back(rng() % 2, (rng() % 100000) * 512, (1 + rng() % 64) * 512);
  }
  auto replay = [&ops] {
    DevicePair d{DeviceParams{}};
    double total = 0;
    for (auto [w, off, len] : ops) {
      total += w ? d.hdd.Write(off, len) : d.hdd.Read(off, len);
      total += w ? d.ssd.Write(off, len) : d.ssd.Read(off, len);
    }
    return total;
  };
  CHECK(replay() == replay());
}

TEST_CASE("device counters are monotonic and track ops exactly") {
  DevicePair d{DeviceParams{}};
  d.hdd.Read(0, 512);
  d.hdd.Write(512, 512);
  d.ssd.Read(0, 512);
  d.ssd.Read(512, 512);
  CHECK(d.hdd.reads() == 1);
  CHECK(d.hdd.writes() == 1);
  CHECK(d.ssd.reads() == 2);
  CHECK(d.ssd.writes() == 0);
  CHECK(d.total_ops() == 4);
}
