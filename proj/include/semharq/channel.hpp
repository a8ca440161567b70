#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "semharq/bitstring.hpp"

namespace semharq {

// Counter-based randomness: stateless, so trials parallelize without shared
// generator state and identical keys reproduce identical noise.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t channel_key(uint64_t seed, uint64_t trial, uint64_t round) {
  uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (trial * 0xA24BAED4963EE407ULL));
  k = splitmix64(k ^ (round * 0x9FB21C651E98DF25ULL));
  return k;
}

inline double keyed_u01(uint64_t key, uint64_t counter) {
  uint64_t v = splitmix64(key ^ (counter * 0xD1B54A32D192ED03ULL));
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

struct ChannelSpec {
  enum class Kind { BitError, BitErasure };
  Kind kind = Kind::BitError;
  double p = 0.0;
  uint64_t seed = 0;
};

struct TransmitResult {
  BitString bits;
  std::vector<uint8_t> erased;  // nonempty only for the erasure channel
};

// Each bit is independently flipped (or erased) with probability p. Output
// length always equals input length; noise is a pure function of
// (spec, trial, round, bit index).
inline TransmitResult transmit(const BitString& input, const ChannelSpec& spec,
                               uint64_t trial, uint64_t round) {
  if (spec.p < 0.0 || spec.p > 1.0) throw std::invalid_argument("probability out of range");
  const uint64_t key = channel_key(spec.seed, trial, round);
  TransmitResult out;
  out.bits = input;
  if (spec.kind == ChannelSpec::Kind::BitErasure) out.erased.assign(input.size(), 0);
  for (size_t i = 0; i < input.size(); ++i) {
    if (keyed_u01(key, i) >= spec.p) continue;
    if (spec.kind == ChannelSpec::Kind::BitError) {
      out.bits.flip(i);
    } else {
      out.erased[i] = 1;
      out.bits.set(i, 0);
    }
  }
  return out;
}

}  // namespace semharq
