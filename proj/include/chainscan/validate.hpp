#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <type_traits>

#include "chainscan/operators.hpp"

namespace chainscan {

/// Relative tolerance for floating-point add, scaled by the running absolute
/// sum of the input: |got - expected| <= eps * sum_{i<=j} |x_i|.
template <Element T>
constexpr double relative_tolerance() {
  if constexpr (std::is_same_v<T, float>) return 1e-5;
  else if constexpr (std::is_same_v<T, double>) return 1e-12;
  else return 0.0;
}

template <Element T>
struct Mismatch {
  std::size_t index;
  T expected;
  T got;
};

/// First index where `got` disagrees with `expected`. Integers must match
/// exactly; floats may differ by the running-absolute-sum tolerance.
template <Element T>
std::optional<Mismatch<T>> first_mismatch(std::span<const T> x, std::span<const T> expected,
                                          std::span<const T> got) {
  if (expected.size() != got.size()) {
    return Mismatch<T>{std::min(expected.size(), got.size()), T{}, T{}};
  }
  double running_abs = 0.0;
  for (std::size_t j = 0; j < got.size(); ++j) {
    if constexpr (std::is_floating_point_v<T>) {
      running_abs += std::abs(static_cast<double>(x[j]));
      if (got[j] == expected[j]) continue;
      const double diff = std::abs(static_cast<double>(got[j]) - static_cast<double>(expected[j]));
      if (!(diff <= relative_tolerance<T>() * running_abs)) return Mismatch<T>{j, expected[j], got[j]};
    } else {
      if (got[j] != expected[j]) return Mismatch<T>{j, expected[j], got[j]};
    }
  }
  return std::nullopt;
}

}  // namespace chainscan
