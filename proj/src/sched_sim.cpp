#include "chainscan/sched_sim.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace chainscan::sim {

namespace {

std::size_t task_count(const SimConfig& c) {
  if (const auto* cyc = std::get_if<Cyclic>(&c.policy)) return std::min(cyc->workers, c.blocks);
  return c.blocks;
}

std::size_t stride(const SimConfig& c) {
  if (const auto* cyc = std::get_if<Cyclic>(&c.policy)) return cyc->workers;
  return c.blocks;  // one block per task
}

std::size_t owner(const SimConfig& c, std::size_t block) { return block % stride(c); }

void validate(const SimConfig& c) {
  if (c.blocks == 0) throw std::invalid_argument("simulation needs at least one block");
  if (c.resident == 0) throw std::invalid_argument("resident capacity must be positive");
  if (const auto* cyc = std::get_if<Cyclic>(&c.policy)) {
    if (cyc->workers == 0) throw std::invalid_argument("cyclic policy needs at least one worker");
    if (cyc->workers > c.resident) {
      throw std::invalid_argument("cyclic policy with " + std::to_string(cyc->workers) +
                                  " workers exceeds resident capacity " + std::to_string(c.resident));
    }
  }
}

// Task state shared by the simulator and the certificate replay.
struct Tasks {
  explicit Tasks(const SimConfig& c) : config(c), cursor(task_count(c)), finished(c.blocks, false) {
    for (std::size_t t = 0; t < cursor.size(); ++t) cursor[t] = t;
  }

  // Data block the task is working on; >= blocks once it is done.
  std::size_t current(std::size_t task) const { return cursor[task]; }
  bool done(std::size_t task) const { return cursor[task] >= config.blocks; }
  bool ready(std::size_t task) const {
    const std::size_t b = cursor[task];
    return b == 0 || finished[b - 1];
  }
  void finish(std::size_t task) {
    finished[cursor[task]] = true;
    cursor[task] += stride(config);
  }

  const SimConfig& config;
  std::vector<std::size_t> cursor;
  std::vector<bool> finished;
};

}  // namespace

Policy parse_policy(std::string_view text) {
  if (text == "one-to-one") return OneToOne{};
  constexpr std::string_view prefix = "cyclic:";
  if (text.starts_with(prefix)) {
    auto digits = text.substr(prefix.size());
    std::size_t workers = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), workers);
    if (ec == std::errc{} && end == digits.data() + digits.size() && workers > 0) return Cyclic{workers};
  }
  throw std::invalid_argument("policy must be 'one-to-one' or 'cyclic:<workers>', got '" + std::string(text) + "'");
}

std::string to_string(const Policy& policy) {
  if (const auto* cyc = std::get_if<Cyclic>(&policy)) return "cyclic:" + std::to_string(cyc->workers);
  return "one-to-one";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::admit: return "admit";
    case EventKind::finish: return "finish";
    case EventKind::block: return "block";
  }
  return "?";
}

std::vector<std::size_t> admission_order(std::size_t tasks, std::uint64_t seed) {
  std::vector<std::size_t> order(tasks);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

SimOutcome run_schedule(const SimConfig& config) {
  validate(config);
  const std::size_t n_tasks = task_count(config);
  const std::size_t max_steps = config.max_steps > 0 ? config.max_steps : config.blocks + 1;

  const auto order = admission_order(n_tasks, config.seed);
  // The finish pick draws from a stream independent of the admission order.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  Tasks tasks(config);
  std::vector<std::size_t> resident;
  std::size_t next_admit = 0;
  std::size_t finished_blocks = 0;
  SimOutcome out;

  for (std::size_t step = 0; step < max_steps; ++step) {
    out.steps = step + 1;
    while (resident.size() < config.resident && next_admit < order.size()) {
      const std::size_t t = order[next_admit++];
      resident.push_back(t);
      out.trace.push_back({step, EventKind::admit, tasks.current(t)});
    }

    std::vector<std::size_t> ready;
    for (std::size_t t : resident) {
      if (tasks.ready(t)) ready.push_back(t);
    }
    if (ready.empty()) {
      // Residents only leave when they finish, so nothing can change any more.
      out.status = Status::deadlock;
      for (std::size_t t : resident) out.blocked_set.push_back(tasks.current(t));
      std::sort(out.blocked_set.begin(), out.blocked_set.end());
      for (std::size_t b : out.blocked_set) out.trace.push_back({step, EventKind::block, b});
      return out;
    }

    std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
    const std::size_t t = ready[pick(rng)];
    out.trace.push_back({step, EventKind::finish, tasks.current(t)});
    tasks.finish(t);
    ++finished_blocks;
    if (tasks.done(t)) resident.erase(std::find(resident.begin(), resident.end(), t));
    if (finished_blocks == config.blocks) {
      out.status = Status::completed;
      return out;
    }
  }
  throw SimulationInconclusive("simulation reached " + std::to_string(max_steps) +
                               " steps without completing or deadlocking");
}

bool verify_deadlock_certificate(const SimConfig& config, const SimOutcome& outcome) {
  if (outcome.status != Status::deadlock || outcome.blocked_set.empty()) return false;
  Tasks tasks(config);
  std::set<std::size_t> resident;
  std::set<std::size_t> admitted;
  std::vector<std::size_t> blocked_events;

  for (const Event& e : outcome.trace) {
    const std::size_t t = owner(config, e.block);
    switch (e.kind) {
      case EventKind::admit:
        if (admitted.contains(t) || tasks.current(t) != e.block) return false;
        admitted.insert(t);
        resident.insert(t);
        break;
      case EventKind::finish:
        if (!resident.contains(t) || tasks.current(t) != e.block || !tasks.ready(t)) return false;
        tasks.finish(t);
        if (tasks.done(t)) resident.erase(t);
        break;
      case EventKind::block:
        blocked_events.push_back(e.block);
        break;
    }
  }
  // No admission is possible without preempting someone.
  if (resident.size() != config.resident || admitted.size() == task_count(config)) return false;

  std::vector<std::size_t> expected;
  for (std::size_t t : resident) expected.push_back(tasks.current(t));
  std::sort(expected.begin(), expected.end());
  if (expected != outcome.blocked_set || blocked_events != outcome.blocked_set) return false;

  for (std::size_t b : outcome.blocked_set) {
    if (b == 0 || tasks.finished[b] || tasks.finished[b - 1]) return false;
    // Follow the wait chain through resident tasks until it leaves them.
    std::size_t waited = b - 1;
    std::set<std::size_t> seen;
    while (true) {
      const std::size_t t = owner(config, waited);
      if (!admitted.contains(t)) break;  // owner never got a slot
      if (!resident.contains(t) || !seen.insert(t).second) return false;
      const std::size_t c = tasks.current(t);
      if (c == 0 || tasks.finished[c - 1]) return false;
      waited = c - 1;
    }
  }
  return true;
}

double deadlock_probability_sweep(std::size_t blocks, std::size_t resident, const Policy& policy,
                                  std::size_t n_seeds, std::uint64_t first_seed) {
  if (n_seeds == 0) throw std::invalid_argument("sweep needs at least one seed");
  std::size_t deadlocks = 0;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    SimConfig c{blocks, resident, policy, first_seed + i, 0};
    if (run_schedule(c).status == Status::deadlock) ++deadlocks;
  }
  return static_cast<double>(deadlocks) / static_cast<double>(n_seeds);
}

std::string format_trace(const std::vector<Event>& trace) {
  std::ostringstream os;
  for (const Event& e : trace) {
    os << "step=" << e.step << " event=" << to_string(e.kind) << " block=" << e.block << '\n';
  }
  return os.str();
}

}  // namespace chainscan::sim
