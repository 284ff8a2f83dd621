#pragma once

// Single-pass chained scan with cyclic block distribution.
//
// The input is cut into M data blocks of L elements. B persistent workers
// take blocks i = b, b+B, b+2B, ... in increasing order. Each block goes
// through the register pipeline (warp scan, block scan), waits for the
// prefix published by block i-1, publishes its own inclusive prefix for
// block i+1, and writes the final values.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "chainscan/comm_slot.hpp"
#include "chainscan/errors.hpp"
#include "chainscan/operators.hpp"
#include "chainscan/simd_block_scan.hpp"

namespace chainscan {

/// How a worker scans the inside of a data block.
enum class BlockStage {
  /// left_fold for floating-point types with a single worker, else registers.
  automatic,
  /// Warp scan, block scan, then the global fold.
  registers,
  /// Left fold seeded with the received prefix. Reproduces the association
  /// order of sequential_scan exactly, at the cost of chaining the whole
  /// block behind its left neighbour.
  left_fold,
};

/// Test hook observing the pipeline. Called concurrently from all workers.
class AccessProbe {
 public:
  virtual ~AccessProbe() = default;
  virtual void on_block(std::size_t /*worker*/, std::size_t /*block*/) {}
  /// Logical (unpadded) input range read for one block.
  virtual void on_load(std::size_t /*first*/, std::size_t /*count*/) {}
  /// Logical output range written for one block.
  virtual void on_store(std::size_t /*first*/, std::size_t /*count*/) {}
};

inline std::size_t hardware_workers() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

struct ChainConfig {
  std::size_t workers = hardware_workers();
  WarpGeometry geometry{};
  SpinPolicy spin{};
  BlockStage stage = BlockStage::automatic;
  AccessProbe* probe = nullptr;
  /// Fault injection: this block publishes the identity instead of its prefix.
  std::optional<std::size_t> corrupt_slot;
};

constexpr std::size_t block_count(std::size_t n, std::size_t block_length) {
  return (n + block_length - 1) / block_length;
}

/// The input seen as ceil(N/L) blocks of exactly L elements; the final block
/// is padded with the identity when L does not divide N.
template <Element T>
class PaddedBlocks {
 public:
  PaddedBlocks(std::span<const T> x, std::size_t block_length, T identity)
      : x_(x), block_length_(block_length), identity_(identity) {
    if (block_length == 0) throw ShapeError("block length must be positive");
  }

  std::size_t block_count() const noexcept { return chainscan::block_count(x_.size(), block_length_); }
  std::size_t logical_length() const noexcept { return x_.size(); }
  std::size_t block_length() const noexcept { return block_length_; }
  std::size_t first(std::size_t block) const noexcept { return block * block_length_; }

  /// Elements of `block` that lie inside the logical input.
  std::size_t valid_length(std::size_t block) const noexcept {
    return std::min(block_length_, x_.size() - first(block));
  }

  /// Full blocks are returned in place; the tail block is copied into
  /// `staging` (at least L elements) and padded.
  std::span<const T> block(std::size_t block, std::span<T> staging) const {
    const std::size_t valid = valid_length(block);
    auto source = x_.subspan(first(block), valid);
    if (valid == block_length_) return source;
    if (staging.size() < block_length_) throw ShapeError("staging buffer shorter than one block");
    std::copy(source.begin(), source.end(), staging.begin());
    std::fill(staging.begin() + static_cast<std::ptrdiff_t>(valid),
              staging.begin() + static_cast<std::ptrdiff_t>(block_length_), identity_);
    return staging.first(block_length_);
  }

 private:
  std::span<const T> x_;
  std::size_t block_length_;
  T identity_;
};

namespace detail {

template <Element T, ScanOp<T> Op>
class ChainedScanRun {
 public:
  ChainedScanRun(std::span<const T> x, std::span<T> y, const Op& op, const ChainConfig& config)
      : y_(y),
        op_(op),
        config_(config),
        blocks_(x, config.geometry.block_length(), op.identity()),
        slots_(std::make_unique<CommSlot<T>[]>(blocks_.block_count())),
        left_fold_(config.stage == BlockStage::left_fold ||
                   (config.stage == BlockStage::automatic && config.workers == 1 &&
                    std::is_floating_point_v<T>)) {}

  void run() {
    const std::size_t m = blocks_.block_count();
    const std::size_t active = std::min(config_.workers, m);
    {
      std::vector<std::jthread> pool;
      pool.reserve(active > 0 ? active - 1 : 0);
      for (std::size_t b = 1; b < active; ++b) pool.emplace_back([this, b] { guarded_worker(b); });
      guarded_worker(0);
    }
    if (failure_) std::rethrow_exception(failure_);
  }

 private:
  void guarded_worker(std::size_t worker) {
    try {
      run_worker(worker);
    } catch (const WaitCancelled&) {
    } catch (...) {
      std::lock_guard lock(failure_mutex_);
      if (!failure_) failure_ = std::current_exception();
      cancel_.store(true, std::memory_order_relaxed);
    }
  }

  void run_worker(std::size_t worker) {
    const WarpGeometry& g = config_.geometry;
    const std::size_t L = g.block_length();
    const std::size_t tile = g.tile_length();
    std::vector<T> staging(L);
    std::vector<WarpState<T>> warps(g.warps_per_block());
    const std::span<CommSlot<T>> slots(slots_.get(), blocks_.block_count());

    for (std::size_t i = worker; i < blocks_.block_count(); i += config_.workers) {
      if (config_.probe) config_.probe->on_block(worker, i);
      const std::size_t first = blocks_.first(i);
      const std::size_t valid = blocks_.valid_length(i);
      const auto in = blocks_.block(i, staging);
      if (config_.probe) config_.probe->on_load(first, valid);

      if (left_fold_) {
        const T left = receive_prefix(slots, i, op_, config_.spin, &cancel_);
        T acc = i == 0 ? in[0] : op_(left, in[0]);
        y_[first] = acc;
        for (std::size_t j = 1; j < valid; ++j) {
          acc = op_(acc, in[j]);
          y_[first + j] = acc;
        }
        publish(slots, i, acc);
      } else {
        for (std::size_t w = 0; w < warps.size(); ++w) {
          warp_load_into(warps[w], in.subspan(w * tile, tile), g);
          intra_warp_local_scan(warps[w], op_);
        }
        const T reduction = intra_block_local_scan(std::span<WarpState<T>>(warps), op_, g);
        T left;
        if (config_.corrupt_slot == i) {
          left = receive_prefix(slots, i, op_, config_.spin, &cancel_);
          publish(slots, i, op_.identity());
        } else {
          left = inter_block_comm(slots, i, reduction, op_, config_.spin, &cancel_);
        }
        auto out = valid == L ? y_.subspan(first, L) : std::span<T>(staging).first(L);
        intra_block_global_scan(std::span<WarpState<T>>(warps), left, op_, out);
        if (valid != L) std::copy_n(staging.begin(), valid, y_.begin() + static_cast<std::ptrdiff_t>(first));
      }
      if (config_.probe) config_.probe->on_store(first, valid);
    }
  }

  void publish(std::span<CommSlot<T>> slots, std::size_t i, T value) {
    slots[i].store(config_.corrupt_slot == i ? op_.identity() : value);
  }

  std::span<T> y_;
  const Op& op_;
  const ChainConfig& config_;
  PaddedBlocks<T> blocks_;
  std::unique_ptr<CommSlot<T>[]> slots_;
  bool left_fold_;
  std::atomic<bool> cancel_{false};
  std::mutex failure_mutex_;
  std::exception_ptr failure_;
};

}  // namespace detail

/// Inclusive scan of x into y with B persistent workers. `y` may alias `x`
/// exactly (in-place); any other overlap is rejected. Blocking; a given
/// output must not be scanned by two calls at once.
template <Element T, ScanOp<T> Op>
void chained_scan(std::span<const T> x, std::span<T> y, const Op& op, const ChainConfig& config = {}) {
  if (x.size() != y.size()) {
    throw ShapeError("output length " + std::to_string(y.size()) + " does not match input length " +
                     std::to_string(x.size()));
  }
  if (config.workers == 0) throw ShapeError("chained scan needs at least one worker");
  if (x.empty()) return;
  const T* x_begin = x.data();
  const T* y_begin = y.data();
  const bool overlap = x_begin < y_begin + y.size() && y_begin < x_begin + x.size();
  if (overlap && x_begin != y_begin) throw ShapeError("input and output overlap without aliasing exactly");

  detail::ChainedScanRun<T, Op> run(x, y, op, config);
  run.run();
}

template <Element T, ScanOp<T> Op>
std::vector<T> chained_scan(std::span<const T> x, const Op& op, const ChainConfig& config = {}) {
  std::vector<T> y(x.size());
  chained_scan(x, std::span<T>(y), op, config);
  return y;
}

}  // namespace chainscan
