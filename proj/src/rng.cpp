#include "ibge/rng.hpp"

#include <numeric>

namespace ibge {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  // Fisher-Yates with our own index draws so the result does not depend on
  // the library's shuffle implementation.
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[index(i + 1)]);
  return p;
}

}  // namespace ibge
