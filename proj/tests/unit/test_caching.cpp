#include <set>

#include "doctest.h"

#include "cachendt/caching.hpp"
#include "cachendt/errors.hpp"
#include "support/gen.hpp"

using namespace cachendt;

namespace {

BitString file_bits_of(const FileLibrary& lib, int file, std::int64_t a, std::int64_t len) {
  const auto& f = lib.files[file - 1];
  return BitString(f.begin() + a, f.begin() + a + len);
}

}  // namespace

TEST_CASE("split placement N=2 M=2 L=8") {
  const auto c = validate_config(2, 2, 2, Rational(1, 2), 8);
  const auto lib = random_library(c, 1);
  const auto a = split_placement(lib, c);
  CHECK(a.policy == PlacementPolicy::Split);
  CHECK(a.split_point == 8);
  for (int m = 0; m < 2; ++m) {
    REQUIRE(a.per_en[m].size() == 2);
    for (const auto& f : a.per_en[m]) {
      CHECK(f.start_bit == 4 * m);
      CHECK(f.length == 4);
      CHECK(f.bits == file_bits_of(lib, f.file, f.start_bit, 4));
    }
    CHECK(a.stored_bits(m) == 8);
  }
  CHECK(verify_cache_budget(a, c));
}

TEST_CASE("split placement with a single EN stores everything") {
  const auto c = validate_config(1, 1, 2, Rational(1), 5);
  const auto lib = random_library(c, 2);
  const auto a = split_placement(lib, c);
  REQUIRE(a.per_en.size() == 1);
  CHECK(a.stored_bits(0) == 10);
  const auto d = assignment_for_demand(a, make_demand(c, {2}));
  REQUIRE(d.items.size() == 1);
  CHECK_FALSE(d.items[0].cooperative);
  CHECK(reassemble(d, 1) == lib.files[1]);
}

TEST_CASE("N=3 M=3 L=9 split: every user reassembles its file") {
  const auto c = validate_config(3, 3, 3, Rational(1, 3), 9);
  const auto lib = random_library(c, 3);
  const auto a = split_placement(lib, c);
  const auto d = assignment_for_demand(a, make_demand(c, {3, 1, 2}));
  CHECK(reassemble(d, 1) == lib.files[2]);
  CHECK(reassemble(d, 2) == lib.files[0]);
  CHECK(reassemble(d, 3) == lib.files[1]);
  CHECK(d.items.size() == 9);
  CHECK(d.cooperative_bits() == 0);
}

TEST_CASE("split placement rejects wrong mu or L") {
  const auto c = validate_config(2, 2, 2, Rational(1, 2), 9);
  CHECK_THROWS_AS(split_placement(random_library(c, 1), c), ArgumentError);
  const auto c1 = validate_config(2, 2, 2, Rational(1), 8);
  CHECK_THROWS_AS(split_placement(random_library(c1, 1), c1), ArgumentError);
  CHECK_THROWS_AS(full_placement(random_library(c, 1), c), ArgumentError);
}

TEST_CASE("full placement is cooperative") {
  const auto c = validate_config(2, 2, 2, Rational(1), 8);
  const auto lib = random_library(c, 4);
  const auto a = full_placement(lib, c);
  CHECK(a.stored_bits(0) == 16);
  CHECK(verify_cache_budget(a, c));
  const auto d = assignment_for_demand(a, make_demand(c, {1, 2}));
  REQUIRE(d.items.size() == 2);
  for (const auto& it : d.items) {
    CHECK(it.cooperative);
    CHECK(it.ens == std::vector<int>{1, 2});
    CHECK(it.length == 8);
  }
  CHECK(d.dedicated_bits() == 0);
  CHECK(reassemble(d, 2) == lib.files[1]);
}

TEST_CASE("shared placement mu=3/4 M=2") {
  const auto c = validate_config(2, 2, 2, Rational(3, 4), 1200);
  const auto lib = random_library(c, 5);
  const auto a = shared_placement(lib, c, Rational(3, 4));
  CHECK(a.alpha == Rational(1, 2));
  CHECK(a.split_point == 600);
  CHECK(a.stored_bits(0) == 1800);  // 3/4 * N * L
  CHECK(verify_cache_budget(a, c));
  const auto d = assignment_for_demand(a, make_demand(c, {1, 2}));
  // user 1: [0,300) from EN1, [300,600) from EN2, [600,1200) jointly
  REQUIRE(d.items.size() == 6);
  CHECK(d.items[0].ens == std::vector<int>{1});
  CHECK(d.items[1].ens == std::vector<int>{2});
  CHECK(d.items[2].cooperative);
  CHECK(d.items[2].length == 600);
  CHECK(d.dedicated_bits() == 1200);
  CHECK(d.cooperative_bits() == 1200);
  CHECK(reassemble(d, 1) == lib.files[0]);
  CHECK(reassemble(d, 2) == lib.files[1]);
  CHECK_THROWS_AS(shared_placement(lib, c, Rational(1)), ArgumentError);
  CHECK_THROWS_AS(shared_placement(lib, c, Rational(1, 2)), ArgumentError);
}

TEST_CASE("budget verification") {
  const auto c = validate_config(2, 2, 2, Rational(1, 2), 8);
  auto a = split_placement(random_library(c, 6), c);
  CHECK(verify_cache_budget(a, c));  // exactly at the budget
  a.per_en[0][0].bits.push_back(true);
  a.per_en[0][0].length += 1;
  CHECK_FALSE(verify_cache_budget(a, c));

  // alpha*L not a multiple of M: rounding must not break the budget
  const auto c2 = validate_config(2, 2, 2, Rational(3, 4), 1201);
  const auto s = shared_placement(random_library(c2, 7), c2, Rational(3, 4));
  CHECK(s.split_point % 2 == 0);
  CHECK(verify_cache_budget(s, c2));
}

TEST_CASE("assignment for D=(1,2) under split placement") {
  const auto c = validate_config(2, 2, 2, Rational(1, 2), 8);
  const auto lib = random_library(c, 8);
  const auto a = split_placement(lib, c);
  const auto d = assignment_for_demand(a, make_demand(c, {1, 2}));
  REQUIRE(d.items.size() == 4);
  CHECK(d.outstanding_bits == std::vector<std::int64_t>{8, 8});
  for (const auto& it : d.items) {
    CHECK(it.length == 4);
    CHECK(it.ens.size() == 1);
    CHECK(it.ens[0] == (it.start_bit == 0 ? 1 : 2));
    CHECK(it.bits == file_bits_of(lib, it.file, it.start_bit, 4));
  }
}

TEST_CASE("coverage failure and demand validation") {
  const auto c = validate_config(2, 2, 2, Rational(1, 2), 8);
  auto a = split_placement(random_library(c, 9), c);
  a.per_en[1].clear();  // EN2 lost its half of every file
  CHECK_THROWS_AS(assignment_for_demand(a, make_demand(c, {1, 2})), CoverageError);
  DemandVector bad;
  bad.demands = {1, 3};
  CHECK_THROWS_AS(assignment_for_demand(split_placement(random_library(c, 9), c), bad),
                  ArgumentError);
  CHECK_THROWS_AS(split_placement(FileLibrary{{BitString(8)}}, c), ArgumentError);
}

TEST_CASE("property: placement ignores demands, stays in budget and every demand round-trips") {
  testgen::Gen g(31);
  for (int it = 0; it < 200; ++it) {
    const int m = g.integer(1, 4);
    const int k = g.integer(1, 4);
    const int n = g.integer(k, 5);
    const int mode = g.integer(0, 2);
    Rational mu = mode == 0 ? Rational(1, m) : Rational(1);
    if (mode == 2 && m > 1) mu = g.rational_in(Rational(1, m) + Rational(1, 100), Rational(99, 100), 10);
    if (mode == 2 && (mu <= Rational(1, m) || mu >= Rational(1))) mu = Rational(1);
    const std::int64_t length = m * g.integer(3, 40);
    const auto c = validate_config(m, k, n, mu, length);
    const auto lib = random_library(c, static_cast<std::uint64_t>(it));
    CacheAllocation a;
    if (mu == Rational(1, m)) {
      a = split_placement(lib, c);
    } else if (mu == Rational(1)) {
      a = full_placement(lib, c);
    } else {
      try {
        a = shared_placement(lib, c, mu);
      } catch (const ArgumentError&) {
        continue;  // L too short for this alpha
      }
    }
    CHECK(verify_cache_budget(a, c));

    std::vector<int> dem(k);
    for (auto& x : dem) x = g.integer(1, n);
    const auto d = assignment_for_demand(a, make_demand(c, dem));
    std::int64_t total = 0;
    for (int u = 1; u <= k; ++u) {
      CHECK(reassemble(d, u) == lib.files[dem[u - 1] - 1]);
      CHECK(d.outstanding_bits[u - 1] == length);
      total += d.outstanding_bits[u - 1];
    }
    CHECK(d.dedicated_bits() + d.cooperative_bits() == total);
    for (const auto& item : d.items) {
      std::set<int> uniq(item.ens.begin(), item.ens.end());
      CHECK(uniq.size() == item.ens.size());
      CHECK(item.cooperative == (item.ens.size() == static_cast<std::size_t>(m) && m > 1));
    }
  }
}
