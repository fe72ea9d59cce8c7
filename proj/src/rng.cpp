#include "droplet/rng.hpp"

#include <cmath>

namespace droplet {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL; // golden ratio
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL; // sqrt(3)-1

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  __uint128_t p = static_cast<__uint128_t>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

} // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 2>& key,
                                        const std::array<std::uint64_t, 4>& ctr) {
  std::uint64_t k0 = key[0], k1 = key[1];
  std::array<std::uint64_t, 4> c = ctr;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return c;
}

double u64_to_unit(std::uint64_t x) {
  // 52 bits so the +0.5 offset stays exactly representable; 53 bits would let
  // the top value round to 1.0
  return (static_cast<double>(x >> 12) + 0.5) * 0x1p-52;
}

void NormalStream::normals(std::uint64_t step, double* out, int count) const {
  constexpr double two_pi = 6.283185307179586476925286766559;
  int produced = 0;
  std::uint64_t block = 0;
  while (produced < count) {
    auto words = philox4x64(key_, {step, block, 0, 0});
    // 4 words -> 2 Box-Muller pairs -> up to 4 normals
    for (int p = 0; p < 2 && produced < count; ++p) {
      double u1 = u64_to_unit(words[2 * p]);
      double u2 = u64_to_unit(words[2 * p + 1]);
      double r = std::sqrt(-2.0 * std::log(u1));
      out[produced++] = r * std::cos(two_pi * u2);
      if (produced < count) out[produced++] = r * std::sin(two_pi * u2);
    }
    ++block;
  }
}

double NormalStream::uniform(std::uint64_t step, std::uint32_t slot) const {
  // uniforms live in a counter region disjoint from the normals' blocks
  auto words = philox4x64(key_, {step, 0x8000000000000000ULL | slot, 0, 0});
  return u64_to_unit(words[0]);
}

std::uint64_t stream_id(std::uint32_t tag, std::uint64_t path, std::uint32_t particle) {
  return (static_cast<std::uint64_t>(tag) << 48) | (path << 8) |
         static_cast<std::uint64_t>(particle & 0xFF);
}

} // namespace droplet
