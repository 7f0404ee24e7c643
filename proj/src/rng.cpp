#include "tdid/rng.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace tdid {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  // Two rounds so that neighbouring counters under the same key decorrelate.
  return splitmix64(splitmix64(key_ + counter * 0xD1B54A32D192ED03ULL) ^ key_);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  const std::uint64_t top = bits(counter) >> 11;
  return (static_cast<double>(top) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  return standard_normal_quantile(uniform(counter));
}

double standard_normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace tdid
