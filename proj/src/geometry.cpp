#include <bit>
#include <string>

#include "chainscan/simd_block_scan.hpp"

namespace chainscan {

WarpGeometry::WarpGeometry(std::size_t lanes, std::size_t regs_per_lane, std::size_t warps_per_block)
    : lanes_(lanes), regs_per_lane_(regs_per_lane), warps_per_block_(warps_per_block) {
  if (!std::has_single_bit(lanes) || lanes < 2 || lanes > kMaxLanes) {
    throw ShapeError("warp width must be a power of two in [2, 64], got " + std::to_string(lanes));
  }
  if (regs_per_lane == 0) throw ShapeError("registers per lane must be positive");
  if (warps_per_block == 0) throw ShapeError("warps per block must be positive");
  // The warp reductions are scanned by a single warp.
  if (warps_per_block > lanes) {
    throw ShapeError("warps per block (" + std::to_string(warps_per_block) +
                     ") exceeds the warp width (" + std::to_string(lanes) + ")");
  }
}

WarpGeometry WarpGeometry::register_saturating(ElemType type) {
  return WarpGeometry(32, elem_bits(type) == 32 ? 44 : 20, 32);
}

}  // namespace chainscan
