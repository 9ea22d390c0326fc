#pragma once

// Counter-based Gaussian streams. Sample i of stream s under seed k is a pure
// function of (k, s, i), so Monte-Carlo work can be split across threads in any
// order without changing results.

#include <cstdint>
#include <span>

#include "siir/linalg.hpp"

namespace siir {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  // Unit-variance circular complex Gaussian: E|z|^2 = 1.
  cdouble operator[](std::uint64_t index) const noexcept;

  // out[i] = scale * (*this)[offset + i]
  void fill(std::span<cdouble> out, std::uint64_t offset, double scale) const noexcept;

 private:
  std::uint64_t key_;
};

}  // namespace siir
