#include "chainscan/comm_slot.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

namespace chainscan {
namespace {

using namespace std::chrono_literals;
using I32 = std::int32_t;
using I64 = std::int64_t;

TEST(CommSlot, FreshSlotIsEmpty) {
  CommSlot<I32> slot;
  EXPECT_EQ(slot_read(slot).v, 0u);
  EXPECT_FALSE(slot.ready());
}

TEST(CommSlot, StoreThenRead) {
  CommSlot<I32> slot;
  slot_store(slot, 7);
  const auto word = slot_read(slot);
  EXPECT_EQ(word.u, 7);
  EXPECT_EQ(word.v, 1u);
}

TEST(CommSlot, StoreIdentity) {
  CommSlot<double> slot;
  slot_store(slot, 0.0);
  EXPECT_EQ(slot_read(slot).u, 0.0);
  EXPECT_TRUE(slot.ready());
}

TEST(CommSlot, DoubleStoreIsAProtocolViolation) {
  CommSlot<I64> slot;
  slot_store(slot, I64{1});
  EXPECT_THROW(slot_store(slot, I64{2}), ProtocolError);
  EXPECT_EQ(slot_read(slot).u, 1);
}

TEST(CommSlot, SlotsDoNotShareCacheLines) {
  EXPECT_GE(sizeof(CommSlot<I32>), kSlotAlignment);
  EXPECT_EQ(alignof(CommSlot<I32>), kSlotAlignment);
  EXPECT_EQ(sizeof(SlotWord<I32>), 8u);
  EXPECT_EQ(sizeof(SlotWord<double>), 16u);
  EXPECT_TRUE(CommSlot<I32>::is_always_lock_free);
}

TEST(CommSlot, TwoThreadHandshake) {
  CommSlot<I32> slot;
  std::jthread writer([&] {
    std::this_thread::sleep_for(1ms);
    slot_store(slot, 42);
  });
  EXPECT_EQ(wait_ready(slot, SpinPolicy{}), 42);
}

TEST(WaitReady, BoundedWaitRaisesLivenessFault) {
  CommSlot<I32> slot;
  SpinPolicy policy;
  policy.max_wait = 5ms;
  EXPECT_THROW(wait_ready(slot, policy), LivenessFault);
}

TEST(WaitReady, CancellationUnblocksWaiter) {
  CommSlot<I32> slot;
  std::atomic<bool> cancel{true};
  EXPECT_THROW(wait_ready(slot, SpinPolicy{}, &cancel), WaitCancelled);
}

TEST(InterBlockComm, FirstBlockSendsItsReduction) {
  std::vector<CommSlot<I32>> storage(3);
  std::span<CommSlot<I32>> slots(storage);
  EXPECT_EQ(inter_block_comm(slots, 0, 5, Add<I32>{}), 0);
  EXPECT_EQ(slots[0].read().u, 5);
  EXPECT_EQ(slots[0].read().v, 1u);
  EXPECT_FALSE(slots[1].ready());
}

TEST(InterBlockComm, ChainOfOnesBlocks) {
  std::vector<CommSlot<I32>> storage(5);
  std::span<CommSlot<I32>> slots(storage);
  std::vector<I32> received;
  for (std::size_t b = 0; b < 5; ++b) received.push_back(inter_block_comm(slots, b, 4, Add<I32>{}));
  EXPECT_EQ(received, (std::vector<I32>{0, 4, 8, 12, 16}));
  std::vector<I32> published;
  for (auto& s : storage) published.push_back(s.read().u);
  EXPECT_EQ(published, (std::vector<I32>{4, 8, 12, 16, 20}));
}

TEST(InterBlockComm, SingleBlock) {
  std::vector<CommSlot<I64>> storage(1);
  EXPECT_EQ(inter_block_comm(std::span<CommSlot<I64>>(storage), 0, I64{9}, Max<I64>{}), Max<I64>::identity());
  EXPECT_EQ(storage[0].read().u, 9);
  EXPECT_THROW(inter_block_comm(std::span<CommSlot<I64>>(storage), 1, I64{9}, Max<I64>{}), ShapeError);
}

TEST(InterBlockComm, RightNeighbourWaitsForLeft) {
  std::vector<CommSlot<I32>> storage(2);
  std::span<CommSlot<I32>> slots(storage);
  I32 received = -1;
  {
    std::jthread right([&] { received = inter_block_comm(slots, 1, 3, Add<I32>{}); });
    std::this_thread::sleep_for(2ms);
    EXPECT_FALSE(slots[1].ready());
    inter_block_comm(slots, 0, 10, Add<I32>{});
  }
  EXPECT_EQ(received, 10);
  EXPECT_EQ(slots[1].read().u, 13);
}

// Values whose every bit pattern differs from the zero initial state, so a
// pair combining a stale u with a fresh v (or the reverse) is detectable.
template <typename T>
T pattern(std::uint64_t i) {
  std::uint64_t z = i + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  if constexpr (std::is_floating_point_v<T>) return static_cast<T>(1.0 + static_cast<double>(z >> 11));
  else return static_cast<T>(z | 1);
}

template <typename T>
class HandshakeStress : public ::testing::Test {};
using SlotTypes = ::testing::Types<I32, I64, float, double>;
TYPED_TEST_SUITE(HandshakeStress, SlotTypes);

TYPED_TEST(HandshakeStress, NoTornPairs) {
  using T = TypeParam;
  constexpr std::size_t kIterations = 200'000;
  constexpr std::size_t kBatch = 4096;
  std::size_t torn = 0;
  std::size_t regressions = 0;
  for (std::size_t base = 0; base < kIterations; base += kBatch) {
    const std::size_t count = std::min(kBatch, kIterations - base);
    auto slots = std::make_unique<CommSlot<T>[]>(count);
    std::jthread writer([&] {
      for (std::size_t i = 0; i < count; ++i) slots[i].store(pattern<T>(base + i));
    });
    for (std::size_t i = 0; i < count; ++i) {
      bool seen_ready = false;
      while (true) {
        const auto word = slots[i].read();
        if (word.v == 1) {
          if (word.u != pattern<T>(base + i)) ++torn;
          if (seen_ready) break;
          seen_ready = true;  // read once more to check the flag stays set
        } else {
          if (seen_ready) {
            ++regressions;
            break;
          }
          if (word.u != T{}) ++torn;
          std::this_thread::yield();
        }
      }
    }
  }
  EXPECT_EQ(torn, 0u);
  EXPECT_EQ(regressions, 0u);
}

}  // namespace
}  // namespace chainscan
