#pragma once

// Discrete simulation of bounded-residency block scheduling.
//
// Tasks (thread blocks) are admitted in a seeded random order into at most R
// resident slots and are never preempted. Data block i can only finish after
// block i-1 has finished. Under a one-to-one mapping task i owns data block i;
// under cyclic(B) task b owns blocks b, b+B, ... and processes them in order.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chainscan::sim {

struct OneToOne {
  friend bool operator==(const OneToOne&, const OneToOne&) = default;
};
struct Cyclic {
  std::size_t workers = 1;
  friend bool operator==(const Cyclic&, const Cyclic&) = default;
};
using Policy = std::variant<OneToOne, Cyclic>;

/// "one-to-one" or "cyclic:<B>". Throws std::invalid_argument.
Policy parse_policy(std::string_view text);
std::string to_string(const Policy& policy);

struct SimConfig {
  std::size_t blocks = 1;    // M
  std::size_t resident = 1;  // R
  Policy policy = OneToOne{};
  std::uint64_t seed = 0;
  /// Zero picks a bound that a terminating run can never reach.
  std::size_t max_steps = 0;
};

enum class Status { completed, deadlock };
enum class EventKind { admit, finish, block };

struct Event {
  std::size_t step;
  EventKind kind;
  std::size_t block;
  friend bool operator==(const Event&, const Event&) = default;
};

struct SimOutcome {
  Status status = Status::completed;
  std::size_t steps = 0;
  std::vector<std::size_t> blocked_set;  // ascending; empty when completed
  std::vector<Event> trace;
};

class SimulationInconclusive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Order in which tasks are offered to the scheduler for a given seed.
std::vector<std::size_t> admission_order(std::size_t tasks, std::uint64_t seed);

/// Throws std::invalid_argument for an invalid configuration (M or R zero,
/// cyclic with B > R or B zero) and SimulationInconclusive if max_steps runs
/// out first.
SimOutcome run_schedule(const SimConfig& config);

/// Replays the trace and checks the deadlock witness: the resident set is
/// full, every blocked block is resident and unfinished, and each wait chain
/// ends at a block whose owner has not been admitted.
bool verify_deadlock_certificate(const SimConfig& config, const SimOutcome& outcome);

/// Fraction of seeds first_seed .. first_seed+n_seeds-1 that deadlock.
double deadlock_probability_sweep(std::size_t blocks, std::size_t resident, const Policy& policy,
                                  std::size_t n_seeds, std::uint64_t first_seed = 0);

/// One line per event: "step=<n> event=<admit|finish|block> block=<id>".
std::string format_trace(const std::vector<Event>& trace);
std::string_view to_string(EventKind kind);

}  // namespace chainscan::sim
