#pragma once

// Sequential oracle and the three classic parallel scan formulations.
//
// Each baseline is executed single-threaded but keeps the step structure of
// its parallel form, so outputs and operator counts are exactly checkable.
// All functions compute an inclusive scan and accept `y` aliasing `x`.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chainscan/errors.hpp"
#include "chainscan/operators.hpp"

namespace chainscan {

namespace detail {

template <typename T>
void require_same_length(std::span<const T> x, std::span<T> y) {
  if (x.size() != y.size()) {
    throw ShapeError("output length " + std::to_string(y.size()) +
                     " does not match input length " + std::to_string(x.size()));
  }
}

}  // namespace detail

/// Left fold: y[0] = x[0], y[j] = op(y[j-1], x[j]). Performs max(N-1, 0) applies.
template <Element T, ScanOp<T> Op>
void sequential_scan(std::span<const T> x, std::span<T> y, const Op& op) {
  detail::require_same_length(x, y);
  if (x.empty()) return;
  T acc = x[0];
  y[0] = acc;
  for (std::size_t j = 1; j < x.size(); ++j) {
    acc = op(acc, x[j]);
    y[j] = acc;
  }
}

template <Element T, ScanOp<T> Op>
std::vector<T> sequential_scan(std::span<const T> x, const Op& op) {
  std::vector<T> y(x.size());
  sequential_scan(x, std::span<T>(y), op);
  return y;
}

/// Hillis-Steele scan: ceil(log2 N) lockstep steps. In the step with offset
/// d every index i >= d combines with index i-d of the previous step.
/// Double-buffered so no lane sees a value written in its own step.
template <Element T, ScanOp<T> Op>
void hillis_steele_scan(std::span<const T> x, std::span<T> y, const Op& op) {
  detail::require_same_length(x, y);
  const std::size_t n = x.size();
  std::vector<T> current(x.begin(), x.end());
  std::vector<T> next(n);
  for (std::size_t offset = 1; offset < n; offset <<= 1) {
    std::copy_n(current.begin(), offset, next.begin());
    for (std::size_t i = offset; i < n; ++i) next[i] = op(current[i - offset], current[i]);
    current.swap(next);
  }
  std::copy(current.begin(), current.end(), y.begin());
}

/// Exact apply count of hillis_steele_scan: sum over offsets 2^k < N of (N - 2^k).
constexpr std::uint64_t hillis_steele_applies(std::uint64_t n) {
  std::uint64_t total = 0;
  for (std::uint64_t offset = 1; offset < n; offset <<= 1) total += n - offset;
  return total;
}

/// Up-sweep over a complete binary tree; afterwards the last slot holds the
/// total reduction. Performs N-1 applies.
template <Element T, ScanOp<T> Op>
void blelloch_up_sweep(std::span<T> a, const Op& op) {
  const std::size_t n = a.size();
  if (!std::has_single_bit(n)) throw ShapeError("up-sweep requires a power-of-two length");
  for (std::size_t stride = 2; stride <= n; stride <<= 1) {
    const std::size_t half = stride / 2;
    for (std::size_t k = 0; k < n; k += stride) a[k + stride - 1] = op(a[k + half - 1], a[k + stride - 1]);
  }
}

/// Identity-seeded down-sweep; leaves the exclusive scan in `a`.
/// Performs N-1 applies (one per internal node, root included) and N-1 swaps.
template <Element T, ScanOp<T> Op>
void blelloch_down_sweep(std::span<T> a, const Op& op) {
  const std::size_t n = a.size();
  if (!std::has_single_bit(n)) throw ShapeError("down-sweep requires a power-of-two length");
  a[n - 1] = op.identity();
  for (std::size_t stride = n; stride >= 2; stride >>= 1) {
    const std::size_t half = stride / 2;
    for (std::size_t k = 0; k < n; k += stride) {
      T left = a[k + half - 1];
      a[k + half - 1] = a[k + stride - 1];
      a[k + stride - 1] = op(a[k + stride - 1], left);
    }
  }
}

/// Apply counts of work_efficient_scan, kept apart so the tree formula
/// 2(N-1) stays checkable on its own.
constexpr std::uint64_t work_efficient_tree_applies(std::uint64_t n) { return n == 0 ? 0 : 2 * (n - 1); }
constexpr std::uint64_t work_efficient_fixup_applies(std::uint64_t n) { return n; }

/// Work-efficient scan: up-sweep, exclusive down-sweep, then one pass that
/// folds x back in to produce the inclusive result.
/// N must be a power of two (see work_efficient_scan_padded).
template <Element T, ScanOp<T> Op>
void work_efficient_scan(std::span<const T> x, std::span<T> y, const Op& op) {
  detail::require_same_length(x, y);
  if (!std::has_single_bit(x.size())) {
    throw ShapeError("work-efficient scan requires a power-of-two length, got " +
                     std::to_string(x.size()));
  }
  std::vector<T> tree(x.begin(), x.end());
  blelloch_up_sweep(std::span<T>(tree), op);
  blelloch_down_sweep(std::span<T>(tree), op);
  for (std::size_t i = 0; i < tree.size(); ++i) y[i] = op(tree[i], x[i]);
}

/// Pads to the next power of two with the identity, scans, trims.
template <Element T, ScanOp<T> Op>
void work_efficient_scan_padded(std::span<const T> x, std::span<T> y, const Op& op) {
  detail::require_same_length(x, y);
  if (x.empty()) return;
  if (std::has_single_bit(x.size())) {
    work_efficient_scan(x, y, op);
    return;
  }
  std::vector<T> padded(std::bit_ceil(x.size()), op.identity());
  std::copy(x.begin(), x.end(), padded.begin());
  std::vector<T> out(padded.size());
  work_efficient_scan(std::span<const T>(padded), std::span<T>(out), op);
  std::copy_n(out.begin(), y.size(), y.begin());
}

/// Largest divisor of n not exceeding ceil(sqrt(n)); 1 for n <= 1.
inline std::size_t default_matrix_rows(std::size_t n) {
  if (n <= 1) return 1;
  auto target = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (std::size_t r = target; r > 1; --r) {
    if (n % r == 0) return r;
  }
  return 1;
}

/// Matrix-based scan over a rows x (N/rows) row-major view:
/// (i) scan each row and keep its reduction, (ii) scan the row reductions,
/// (iii) fold the preceding row prefix into every later row.
/// Performs 2N - cols - 1 applies for N > 0.
template <Element T, ScanOp<T> Op>
void matrix_scan(std::span<const T> x, std::span<T> y, const Op& op, std::size_t rows) {
  using RowMajorArray = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  detail::require_same_length(x, y);
  if (rows == 0) throw ShapeError("matrix scan needs at least one row");
  if (x.size() % rows != 0) {
    throw ShapeError("row count " + std::to_string(rows) + " does not divide length " +
                     std::to_string(x.size()));
  }
  if (x.empty()) return;
  const auto n_rows = static_cast<Eigen::Index>(rows);
  const auto cols = static_cast<Eigen::Index>(x.size() / rows);
  Eigen::Map<const RowMajorArray> in(x.data(), n_rows, cols);
  Eigen::Map<RowMajorArray> out(y.data(), n_rows, cols);

  Eigen::Array<T, Eigen::Dynamic, 1> row_totals(n_rows);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    T acc = in(r, 0);
    out(r, 0) = acc;
    for (Eigen::Index c = 1; c < cols; ++c) {
      acc = op(acc, in(r, c));
      out(r, c) = acc;
    }
    row_totals(r) = acc;
  }
  for (Eigen::Index r = 1; r < n_rows; ++r) row_totals(r) = op(row_totals(r - 1), row_totals(r));
  for (Eigen::Index r = 1; r < n_rows; ++r) {
    const T carry = row_totals(r - 1);
    out.row(r) = out.row(r).unaryExpr([&](T e) { return op(carry, e); });
  }
}

template <Element T, ScanOp<T> Op>
void matrix_scan(std::span<const T> x, std::span<T> y, const Op& op) {
  matrix_scan(x, y, op, default_matrix_rows(x.size()));
}

}  // namespace chainscan
