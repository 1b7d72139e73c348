#include "mmue/random.hpp"

namespace mmue {

std::uint64_t mix64(std::uint64_t v) noexcept {
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

Seed derive_seed(Seed parent, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(parent) ^ a) ^ (b + 0x632be59bd9b4e019ULL));
}

}  // namespace mmue
