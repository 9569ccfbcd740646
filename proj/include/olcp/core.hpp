#pragma once

// Shared primitive types and the deterministic RNG substream contract.

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace olcp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Context of one round. Every entry must be finite.
using FeatureVector = Eigen::VectorXd;

/// Raised when a caller violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a runtime invariant that the algorithm guarantees is broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(RngSeed, RngSeed) = default;
};

/// Labels for substream path components. Values are part of the
/// reproducibility contract; never renumber.
enum class StreamTag : std::uint64_t {
  arm = 1,
  bootstrap = 2,
  round = 3,
  synth = 4,
  split = 5,
  refit = 6,
  cohort = 7,
  patient = 8,
};

struct PathStep {
  StreamTag tag;
  std::uint64_t index;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from (master, path). For each step the running
/// state h becomes mix64(h + 0x9e3779b97f4a7c15 * (tag + 1)) and then
/// mix64(that ^ mix64(index)). The empty path returns master unchanged.
RngSeed derive_substream(RngSeed master, std::span<const PathStep> path);

inline RngSeed derive_substream(RngSeed master, std::initializer_list<PathStep> path) {
  return derive_substream(master, std::span<const PathStep>(path.begin(), path.size()));
}

using Rng = std::mt19937_64;

inline Rng make_rng(RngSeed seed) { return Rng(seed.value); }

/// Uniform integer in [0, bound) by rejection on the raw 64-bit output, so
/// results do not depend on the standard library's distribution code.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Uniform real in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Standard normal deviate (Marsaglia polar method).
double standard_normal(Rng& rng);

bool all_finite(const Eigen::Ref<const Vector>& v);

}  // namespace olcp
