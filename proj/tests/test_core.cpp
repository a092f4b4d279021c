#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "core/binio.hpp"
#include "core/rng.hpp"
#include "core/vec3.hpp"

using namespace bg;

TEST_CASE("rng streams are deterministic and independent") {
  RngStream a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  bool differs = false;
  RngStream a2(42);
  for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
  CHECK(differs);

  RngStream parent(7);
  RngStream c1 = parent.child(1), c2 = parent.child(2);
  CHECK(c1.next_u64() != c2.next_u64());
}

TEST_CASE("rng snapshot and restore resume the exact sequence") {
  RngStream r(123);
  r.normal();
  const auto snap = r.snapshot();
  const double next1 = r.uniform01();
  RngStream s;
  s.restore(snap);
  CHECK(s.uniform01() == next1);
}

TEST_CASE("uniform stays in range, normal has sane moments") {
  RngStream r(9);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(0.7, 1.3);
    CHECK(u >= 0.7);
    CHECK(u < 1.3);
    const double g = r.normal();
    sum += g;
    sum2 += g * g;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(std::fabs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("crc32 known value and sensitivity") {
  const char* s = "123456789";
  CHECK(crc32(s, 9) == 0xCBF43926u);  // standard check value
  const char* t = "123456788";
  CHECK(crc32(s, 9) != crc32(t, 9));
}

TEST_CASE("binary writer/reader round trip and truncation") {
  BinWriter w;
  w.put_u32(7);
  w.put_string("hello");
  const float fs[3] = {1.5f, -2.0f, 3.25f};
  w.put_f32_array(fs, 3);
  w.put_f64(1.0 / 3.0);

  BinReader r(w.bytes());
  CHECK(r.get_u32() == 7);
  CHECK(r.get_string() == "hello");
  const auto arr = r.get_f32_array();
  REQUIRE(arr.size() == 3);
  CHECK(arr[1] == -2.0f);
  CHECK(r.get_f64() == 1.0 / 3.0);
  CHECK(r.remaining() == 0);

  BinReader trunc(w.bytes().data(), 6);
  trunc.get_u32();
  CHECK_THROWS_AS(trunc.get_string(), std::runtime_error);
}

TEST_CASE("quaternion rotate matches matrix form") {
  RngStream r(5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis{r.normal(), r.normal(), r.normal()};
    const Quat q = Quat::axis_angle(axis, r.uniform(-3, 3));
    const Vec3 v{r.normal(), r.normal(), r.normal()};
    const Vec3 a = q.rotate(v);
    const Vec3 b = q.to_mat3() * v;
    CHECK(norm(a - b) < 1e-12);
    CHECK(norm(q.rotate_inv(a) - v) < 1e-12);
  }
}
