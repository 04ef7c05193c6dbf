#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "ibge/rng.hpp"

using namespace ibge;

TEST_CASE("identical seeds give identical streams", "[rng]") {
  Rng a(42), b(42), c(43);
  std::vector<double> xa, xb, xc;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a.normal());
    xb.push_back(b.normal());
    xc.push_back(c.normal());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
}

TEST_CASE("derived substreams differ from each other and from the parent", "[rng]") {
  std::set<std::uint64_t> seeds{7};
  for (std::uint64_t s = 0; s < 1000; ++s) seeds.insert(derive_seed(7, s));
  CHECK(seeds.size() == 1001);
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("permutation is a permutation", "[rng]") {
  Rng r(3);
  auto p = r.permutation(50);
  std::sort(p.begin(), p.end());
  for (int i = 0; i < 50; ++i) CHECK(p[i] == i);
}

TEST_CASE("index stays in range", "[rng]") {
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const int k = r.index(7);
    REQUIRE(k >= 0);
    REQUIRE(k < 7);
  }
}
