#include "olcp/core.hpp"

#include <cmath>
#include <limits>

namespace olcp {

RngSeed derive_substream(RngSeed master, std::span<const PathStep> path) {
  std::uint64_t h = master.value;
  for (const PathStep& step : path) {
    h = mix64(h + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(step.tag) + 1));
    h = mix64(h ^ mix64(step.index));
  }
  return RngSeed{h};
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform_index: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % bound;
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(Rng& rng) {
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform01(rng) - 1.0;
    v = 2.0 * uniform01(rng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

bool all_finite(const Eigen::Ref<const Vector>& v) { return v.allFinite(); }

}  // namespace olcp
