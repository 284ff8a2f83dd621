#pragma once

// Register-level scan on a virtual warp.
//
// A warp is W lanes executing in lockstep; each lane holds K registers. A
// tile of W*K consecutive elements is held as a K x W row-major array, so
// register row j, lane i holds tile[i + W*j]. Shuffles are modelled as pure
// lane permutations of one register row.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chainscan/errors.hpp"
#include "chainscan/operators.hpp"

namespace chainscan {

inline constexpr std::size_t kMaxLanes = 64;

/// Shape of a virtual thread block: W lanes per warp, K registers per lane,
/// and a number of warps. Validated on construction.
class WarpGeometry {
 public:
  /// Defaults: W=32, K=8, 32 warps (1024 lanes per block).
  WarpGeometry() : WarpGeometry(32, 8, 32) {}
  WarpGeometry(std::size_t lanes, std::size_t regs_per_lane, std::size_t warps_per_block);

  /// W=32, 32 warps, and K=44 for 32-bit or K=20 for 64-bit elements.
  static WarpGeometry register_saturating(ElemType type);

  std::size_t lanes() const noexcept { return lanes_; }
  std::size_t regs_per_lane() const noexcept { return regs_per_lane_; }
  std::size_t warps_per_block() const noexcept { return warps_per_block_; }
  std::size_t threads_per_block() const noexcept { return lanes_ * warps_per_block_; }
  std::size_t tile_length() const noexcept { return lanes_ * regs_per_lane_; }
  std::size_t block_length() const noexcept { return tile_length() * warps_per_block_; }

  friend bool operator==(const WarpGeometry&, const WarpGeometry&) = default;

 private:
  std::size_t lanes_;
  std::size_t regs_per_lane_;
  std::size_t warps_per_block_;
};

template <Element T>
using RegisterFile = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One register row across the lanes of a warp. Stack storage, at most 64 lanes.
template <Element T>
using LaneVector = Eigen::Array<T, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxLanes>;

template <Element T>
struct WarpState {
  RegisterFile<T> regs;  // K rows x W lanes

  std::size_t lanes() const noexcept { return static_cast<std::size_t>(regs.cols()); }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(regs.rows()); }
  /// Lane W-1 of the last row.
  T last() const { return regs(regs.rows() - 1, regs.cols() - 1); }
};

// ----------------------------------------------------------------------------
// Lane permutations
// ----------------------------------------------------------------------------

/// Lane i receives lane i-delta; lanes below delta keep their own value.
template <typename Derived>
auto shfl_up(const Eigen::ArrayBase<Derived>& row, Eigen::Index delta) {
  using T = typename Derived::Scalar;
  LaneVector<T> out = row;
  const Eigen::Index width = row.size();
  if (delta < width) out.tail(width - delta) = row.head(width - delta);
  return out;
}

/// Every lane receives the value held by `src_lane`.
template <typename Derived>
typename Derived::Scalar shfl(const Eigen::ArrayBase<Derived>& row, Eigen::Index src_lane) {
  return row(src_lane);
}

/// Hillis-Steele over one register row: for delta = 1, 2, 4, ... < W, lanes
/// i >= delta combine the shuffled-up value with their own. The shuffle is
/// taken before any lane updates, which is the lockstep guarantee.
template <typename Derived, typename Op>
void lockstep_row_scan(Eigen::ArrayBase<Derived>& row, const Op& op) {
  const Eigen::Index width = row.size();
  for (Eigen::Index delta = 1; delta < width; delta <<= 1) {
    const auto incoming = shfl_up(row, delta);
    const Eigen::Index active = width - delta;
    row.tail(active) = incoming.tail(active).binaryExpr(row.tail(active), op);
  }
}

// ----------------------------------------------------------------------------
// Warp / block stages
// ----------------------------------------------------------------------------

/// Coalesced load: regs(j, i) = tile[i + W*j]. Reuses the state's storage.
template <Element T>
void warp_load_into(WarpState<T>& state, std::span<const T> tile, const WarpGeometry& g) {
  if (tile.size() != g.tile_length()) {
    throw ShapeError("warp tile has " + std::to_string(tile.size()) + " elements, expected " +
                     std::to_string(g.tile_length()));
  }
  state.regs = Eigen::Map<const RegisterFile<T>>(tile.data(), static_cast<Eigen::Index>(g.regs_per_lane()),
                                                 static_cast<Eigen::Index>(g.lanes()));
}

template <Element T>
WarpState<T> warp_load(std::span<const T> tile, const WarpGeometry& g) {
  WarpState<T> state;
  warp_load_into(state, tile, g);
  return state;
}

/// Per-row lockstep scan, then each row's lane W-1 value is broadcast and
/// folded into the next row. Afterwards the row-major flattening of regs is
/// the inclusive scan of the tile.
template <Element T, ScanOp<T> Op>
void intra_warp_local_scan(WarpState<T>& state, const Op& op) {
  const Eigen::Index lanes = state.regs.cols();
  for (Eigen::Index j = 0; j < state.regs.rows(); ++j) {
    auto row = state.regs.row(j);
    lockstep_row_scan(row, op);
  }
  for (Eigen::Index j = 1; j < state.regs.rows(); ++j) {
    const T carry = shfl(state.regs.row(j - 1), lanes - 1);
    state.regs.row(j) = state.regs.row(j).unaryExpr([&](T e) { return op(carry, e); });
  }
}

/// Gathers each warp's reduction into an auxiliary row, scans it with one
/// virtual warp, and folds the preceding warps' prefix into every register
/// of each warp (warp 0 folds the identity). Returns the block reduction.
template <Element T, ScanOp<T> Op>
T intra_block_local_scan(std::span<WarpState<T>> warps, const Op& op, const WarpGeometry& g) {
  if (warps.size() != g.warps_per_block()) {
    throw ShapeError("block holds " + std::to_string(warps.size()) + " warps, expected " +
                     std::to_string(g.warps_per_block()));
  }
  const auto n_warps = static_cast<Eigen::Index>(warps.size());
  LaneVector<T> aux(n_warps);
  for (Eigen::Index w = 0; w < n_warps; ++w) aux(w) = warps[w].last();
  lockstep_row_scan(aux, op);

  for (Eigen::Index w = 0; w < n_warps; ++w) {
    const T carry = w == 0 ? op.identity() : aux(w - 1);
    warps[w].regs = warps[w].regs.unaryExpr([&](T e) { return op(carry, e); });
  }
  return aux(n_warps - 1);
}

/// Folds `left_prefix` into every register and writes the block back in
/// natural element order (the inverse of warp_load).
template <Element T, ScanOp<T> Op>
void intra_block_global_scan(std::span<WarpState<T>> warps, T left_prefix, const Op& op,
                             std::span<T> out_block) {
  std::size_t expected = 0;
  for (const auto& w : warps) expected += static_cast<std::size_t>(w.regs.size());
  if (out_block.size() != expected) {
    throw ShapeError("output block has " + std::to_string(out_block.size()) + " elements, expected " +
                     std::to_string(expected));
  }
  std::size_t offset = 0;
  for (auto& w : warps) {
    w.regs = w.regs.unaryExpr([&](T e) { return op(left_prefix, e); });
    Eigen::Map<RegisterFile<T>>(out_block.data() + offset, w.regs.rows(), w.regs.cols()) = w.regs;
    offset += static_cast<std::size_t>(w.regs.size());
  }
}

}  // namespace chainscan
