#include "siir/random.hpp"

#include <cmath>
#include <numbers>

namespace siir {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace {

// Uniform in the open interval (0, 1).
double to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(splitmix64(seed ^ splitmix64(stream))) {}

cdouble GaussianStream::operator[](std::uint64_t index) const noexcept {
  const double u1 = to_unit(splitmix64(key_ + 2 * index));
  const double u2 = to_unit(splitmix64(key_ + 2 * index + 1));
  const double radius = std::sqrt(-std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

void GaussianStream::fill(std::span<cdouble> out, std::uint64_t offset, double scale) const noexcept {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * (*this)[offset + i];
}

}  // namespace siir
