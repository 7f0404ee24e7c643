#pragma once

#include <cstdint>

namespace tdid {

// Counter-based random stream: the value at position `counter` depends only on
// (key, counter), so draws can be evaluated in any order or on any thread and
// still reproduce a serial run bit for bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t bits(std::uint64_t counter) const noexcept;

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform(std::uint64_t counter) const noexcept;

  // Standard normal by inverse CDF of uniform(counter).
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Child seed for stream `stream` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

double standard_normal_quantile(double u);

}  // namespace tdid
