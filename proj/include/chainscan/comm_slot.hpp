#pragma once

// Value/flag slot for passing a prefix reduction to the next data block.
//
// The (u, v) pair lives in one atomic word, so a writer publishes both with a
// single release store and a reader observes both with a single acquire load.
// There is no separate flag write and no read-modify-write.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <type_traits>

#include "chainscan/errors.hpp"
#include "chainscan/operators.hpp"

namespace chainscan {

inline constexpr std::size_t kSlotAlignment = 64;

/// Flag width matches the value width: 8-byte words for 32-bit elements and
/// 16-byte words for 64-bit elements, with no padding bytes.
template <Element T>
struct SlotWord {
  using flag_type = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  T u;
  flag_type v;
};

template <Element T>
class alignas(kSlotAlignment) CommSlot {
 public:
  CommSlot() noexcept : word_(SlotWord<T>{T{}, 0}) {}
  explicit CommSlot(T initial) noexcept : word_(SlotWord<T>{initial, 0}) {}
  CommSlot(const CommSlot&) = delete;
  CommSlot& operator=(const CommSlot&) = delete;

  /// Publishes (value, 1). Only the slot's owner may call this, once per run.
  void store(T value) {
    // Single writer: a relaxed look at our own slot is enough to catch a repeat.
    if (word_.load(std::memory_order_relaxed).v != 0) {
      throw ProtocolError("communication slot written twice in one run");
    }
    word_.store(SlotWord<T>{value, 1}, std::memory_order_release);
  }

  /// Consistent snapshot; if v == 1 then u is the published value.
  SlotWord<T> read() const noexcept { return word_.load(std::memory_order_acquire); }

  bool ready() const noexcept { return read().v != 0; }

  static constexpr bool is_always_lock_free = std::atomic<SlotWord<T>>::is_always_lock_free;

 private:
  std::atomic<SlotWord<T>> word_;
};

static_assert(sizeof(CommSlot<std::int32_t>) >= kSlotAlignment);
static_assert(sizeof(CommSlot<double>) >= kSlotAlignment);

template <Element T>
void slot_store(CommSlot<T>& slot, T value) {
  slot.store(value);
}

template <Element T>
SlotWord<T> slot_read(const CommSlot<T>& slot) noexcept {
  return slot.read();
}

// ----------------------------------------------------------------------------
// Busy-waiting
// ----------------------------------------------------------------------------

struct SpinPolicy {
  enum class Mode { spin, spin_then_yield };

  Mode mode = Mode::spin_then_yield;
  /// Spins before the first yield in spin_then_yield mode.
  std::uint32_t yield_threshold = 1024;
  /// Zero waits forever. Otherwise a wait longer than this raises LivenessFault.
  std::chrono::nanoseconds max_wait{0};
};

/// Thrown out of a wait when another worker has already failed.
struct WaitCancelled {};

/// Spins on `slot` until its flag is set and returns the published value.
template <Element T>
T wait_ready(const CommSlot<T>& slot, const SpinPolicy& policy,
             const std::atomic<bool>* cancel = nullptr) {
  using clock = std::chrono::steady_clock;
  auto word = slot.read();
  if (word.v != 0) return word.u;

  const bool bounded = policy.max_wait.count() > 0;
  const auto start = bounded ? clock::now() : clock::time_point{};
  std::uint64_t spins = 0;
  while (true) {
    word = slot.read();
    if (word.v != 0) return word.u;
    ++spins;
    if (policy.mode == SpinPolicy::Mode::spin_then_yield && spins >= policy.yield_threshold) {
      std::this_thread::yield();
    }
    if ((spins & 1023) == 0) {
      if (cancel != nullptr && cancel->load(std::memory_order_relaxed)) throw WaitCancelled{};
      if (bounded && clock::now() - start > policy.max_wait) {
        throw LivenessFault("busy-wait on a communication slot exceeded its budget");
      }
    }
  }
}

/// R_lt for `block_id`: the identity for block 0, otherwise the value
/// published by block_id-1 once it is ready.
template <Element T, ScanOp<T> Op>
T receive_prefix(std::span<CommSlot<T>> slots, std::size_t block_id, const Op& op, const SpinPolicy& policy,
                 const std::atomic<bool>* cancel = nullptr) {
  return block_id == 0 ? op.identity() : wait_ready(slots[block_id - 1], policy, cancel);
}

/// Receives R_lt from block_id-1 (identity for block 0) and publishes
/// R_lt (+) local_reduction into slots[block_id]. Returns R_lt.
template <Element T, ScanOp<T> Op>
T inter_block_comm(std::span<CommSlot<T>> slots, std::size_t block_id, T local_reduction, const Op& op,
                   const SpinPolicy& policy = {}, const std::atomic<bool>* cancel = nullptr) {
  if (block_id >= slots.size()) {
    throw ShapeError("block id " + std::to_string(block_id) + " out of range for " +
                     std::to_string(slots.size()) + " slots");
  }
  const T left = receive_prefix(slots, block_id, op, policy, cancel);
  slots[block_id].store(block_id == 0 ? local_reduction : op(left, local_reduction));
  return left;
}

}  // namespace chainscan
