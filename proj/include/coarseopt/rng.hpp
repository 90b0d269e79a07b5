#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace coarseopt {

namespace detail {

// splitmix64 output function (Steele, Lea, Flood / MurmurHash3 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based 64-bit stream: output i is a pure function of (key, i), so
/// replica streams are reproducible regardless of thread scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + (++ctr_) * detail::kGolden); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard exponential deviate (rate 1).
  double exponential() { return -std::log(uniform_pos()); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_{0};
};

/// Identifies one replica's stream within a seeded ensemble.
struct RngSeed {
  std::uint64_t master_seed{0};
  std::uint64_t replica_index{0};
};

inline std::uint64_t derive_key(std::uint64_t master, std::uint64_t index) {
  return detail::mix64(master ^ detail::mix64(index + detail::kGolden));
}

/// Stage-scoped key: hash of (master, stage label, index). Used for the
/// documented per-stage seed derivation of the CLI and the rollout intervals.
inline std::uint64_t derive_key(std::uint64_t master, std::string_view label,
                                std::uint64_t index) {
  return detail::mix64(master ^ detail::fnv1a(label) ^
                       detail::mix64(index + detail::kGolden));
}

inline std::uint64_t stream_key(const RngSeed& s) {
  return derive_key(s.master_seed, s.replica_index);
}

}  // namespace coarseopt
