#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>

#include "vda/core/types.hpp"

namespace vda {

inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(s.data(), s.size(), h);
}

// Derives an independent stream seed from a base seed and a label, so that
// e.g. training and evaluation draws never share a stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
  std::uint64_t h = fnv1a(&base, sizeof(base));
  return fnv1a(stream, h);
}

// mt19937_64 with hand-rolled uniform draws; avoids the
// implementation-defined std distributions so sequences are reproducible
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi]. Spans here are tiny, so modulo bias is
  // far below anything observable.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool coin() { return (eng_() & 1u) != 0; }

 private:
  std::mt19937_64 eng_;
};

// Content hash of a profile, used to assert that evaluation samples were
// never seen during training.
inline std::uint64_t hash_profile(const BidProfile& profile) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& curve : profile.curves) {
    for (const Money p : curve.prices) {
      std::uint64_t bits;
      std::memcpy(&bits, &p, sizeof(bits));
      h = fnv1a(&bits, sizeof(bits), h);
    }
  }
  return h;
}

}  // namespace vda
