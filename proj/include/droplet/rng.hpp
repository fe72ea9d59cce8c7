#pragma once
#include <array>
#include <cstdint>

namespace droplet {

// Philox 4x64-10 counter-based generator. A draw is a pure function of
// (key, counter), so ensembles can hand every (path, particle) pair its own
// stream and replay any step independently of execution order.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 2>& key,
                                        const std::array<std::uint64_t, 4>& ctr);

// map a 64-bit word to (0,1): ((x >> 12) + 0.5) * 2^-52, never 0 or 1
double u64_to_unit(std::uint64_t x);

// One logical stream identified by (seed, stream). Draws are indexed by a
// step counter; each step owns as many blocks as it asks for.
class NormalStream {
public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream} {}

  // fill out[0..count) with standard normals for this step (Box-Muller)
  void normals(std::uint64_t step, double* out, int count) const;

  // one uniform in (0,1) for this step; slot separates draws within a step
  double uniform(std::uint64_t step, std::uint32_t slot) const;

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream() const { return key_[1]; }

private:
  std::array<std::uint64_t, 2> key_;
};

// stream-id layout helpers: (tag, path, particle) -> stream
std::uint64_t stream_id(std::uint32_t tag, std::uint64_t path, std::uint32_t particle);

} // namespace droplet
