// chainscan: benchmark / validation driver and scheduler simulator.
//
// Exit codes: 0 ok, 1 validation failure, 2 usage error, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainscan/bench.hpp"
#include "chainscan/sched_sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct BenchOptions {
  std::vector<std::string> algorithms{"chained"};
  std::vector<std::string> dtypes{"i32"};
  std::string op = "add";
  std::vector<std::size_t> sizes;
  std::string size_preset;
  std::size_t workers = chainscan::hardware_workers();
  std::size_t warp_width = 32;
  std::size_t k = 8;
  std::size_t warps_per_block = 32;
  std::size_t runs = 3;
  std::uint64_t seed = 1;
  bool in_place = false;
  bool no_validate = false;
  std::string output;
  std::string format = "csv";
  std::optional<std::size_t> corrupt_slot;
};

struct SimOptions {
  std::size_t blocks = 0;
  std::size_t resident = 0;
  std::string policy;
  std::size_t seeds = 1000;
  std::uint64_t first_seed = 0;
};

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << '\n';
  return kExitUsage;
}

int run_bench(const BenchOptions& opt) {
  using namespace chainscan;
  std::vector<bench::CellSpec> cells;
  bench::Format format;
  try {
    format = bench::parse_format(opt.format);
    if (!opt.sizes.empty() && !opt.size_preset.empty()) return usage_error("--n and --n-preset are exclusive");
    if (!opt.size_preset.empty() && opt.size_preset != "paper") {
      return usage_error("unknown --n-preset '" + opt.size_preset + "' (expected 'paper')");
    }
    if (opt.workers == 0) return usage_error("--workers must be positive");
    const auto sizes = !opt.sizes.empty()          ? opt.sizes
                       : opt.size_preset == "paper" ? bench::paper_sizes()
                                                    : bench::desk_sizes();
    const WarpGeometry geometry(opt.warp_width, opt.k, opt.warps_per_block);
    const OpKind op = parse_op_kind(opt.op);
    for (const auto& a : opt.algorithms) {
      const Algorithm algo = parse_algorithm(a);
      if (opt.corrupt_slot && algo != Algorithm::chained) {
        return usage_error("slot fault injection only applies to --algo chained");
      }
      for (const auto& d : opt.dtypes) {
        const ElemType dtype = parse_elem_type(d);
        for (std::size_t n : sizes) {
          bench::CellSpec cell;
          cell.algorithm = algo;
          cell.dtype = dtype;
          cell.op = op;
          cell.n = n;
          cell.workers = opt.workers;
          cell.geometry = geometry;
          cell.runs = opt.runs;
          cell.seed = opt.seed;
          cell.in_place = opt.in_place;
          cell.validate = !opt.no_validate;
          cell.corrupt_slot = opt.corrupt_slot;
          cells.push_back(cell);
        }
      }
    }
  } catch (const std::invalid_argument& e) {
    return usage_error(e.what());
  }

  std::vector<bench::BenchRecord> records;
  bool all_valid = true;
  // Cells run strictly one after another.
  for (const auto& cell : cells) {
    auto result = bench::run_cell(cell);
    if (result.mismatch) {
      all_valid = false;
      std::cerr << "validation failed: algorithm=" << result.record.algorithm << " dtype=" << result.record.dtype
                << " op=" << result.record.op << " n=" << result.record.n << ": " << *result.mismatch << '\n';
      continue;
    }
    records.push_back(std::move(result.record));
  }

  try {
    if (opt.output.empty()) {
      if (format == bench::Format::csv) {
        bench::write_csv(std::cout, records);
      } else {
        std::cout << bench::records_to_json(records) << '\n';
      }
    } else {
      bench::emit_results(records, format, opt.output);
    }
  } catch (const bench::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return all_valid ? kExitOk : kExitValidation;
}

int run_simulate(const SimOptions& opt) {
  namespace sim = chainscan::sim;
  sim::Policy policy;
  try {
    policy = sim::parse_policy(opt.policy);
    // Validates B <= R and the sizes before sweeping.
    sim::run_schedule({opt.blocks, opt.resident, policy, opt.first_seed, 0});
  } catch (const std::invalid_argument& e) {
    return usage_error(e.what());
  }
  if (opt.seeds == 0) return usage_error("--seeds must be positive");

  std::size_t deadlocks = 0;
  std::optional<std::pair<sim::SimConfig, sim::SimOutcome>> witness;
  for (std::size_t i = 0; i < opt.seeds; ++i) {
    sim::SimConfig config{opt.blocks, opt.resident, policy, opt.first_seed + i, 0};
    auto outcome = sim::run_schedule(config);
    if (outcome.status == sim::Status::deadlock) {
      ++deadlocks;
      if (!witness) witness.emplace(config, std::move(outcome));
    }
  }
  const double fraction = static_cast<double>(deadlocks) / static_cast<double>(opt.seeds);
  std::printf("blocks=%zu resident=%zu policy=%s seeds=%zu\n", opt.blocks, opt.resident,
              sim::to_string(policy).c_str(), opt.seeds);
  std::printf("deadlock_fraction=%.3f\n", fraction);
  if (witness) {
    const auto& [config, outcome] = *witness;
    const bool verified = sim::verify_deadlock_certificate(config, outcome);
    std::printf("witness_seed=%llu verified=%s blocked=", static_cast<unsigned long long>(config.seed),
                verified ? "true" : "false");
    for (std::size_t i = 0; i < outcome.blocked_set.size(); ++i) {
      std::printf("%s%zu", i == 0 ? "" : ",", outcome.blocked_set[i]);
    }
    std::printf("\n%s", sim::format_trace(outcome.trace).c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel inclusive scan benchmark, validator and scheduler simulator"};
  app.require_subcommand(0, 1);

  BenchOptions bench;
  app.add_option("--algo", bench.algorithms, "sequential, hillis-steele, blelloch, matrix or chained")
      ->capture_default_str();
  app.add_option("--dtype", bench.dtypes, "i32, i64, f32 or f64")->capture_default_str();
  app.add_option("--op", bench.op, "add, max or min")->capture_default_str();
  app.add_option("--n", bench.sizes, "element count (repeatable)");
  app.add_option("--n-preset", bench.size_preset, "'paper' for 32M..512M");
  app.add_option("--workers", bench.workers, "worker count B")->envname("CHAINSCAN_WORKERS")->capture_default_str();
  app.add_option("--warp-width", bench.warp_width, "lanes per warp W")->capture_default_str();
  app.add_option("--k", bench.k, "registers per lane K")->capture_default_str();
  app.add_option("--warps-per-block", bench.warps_per_block)->capture_default_str();
  app.add_option("--runs", bench.runs, "timed repetitions")->capture_default_str();
  app.add_option("--seed", bench.seed, "input generator seed")->capture_default_str();
  app.add_flag("--in-place", bench.in_place, "scan with the output aliasing the input");
  app.add_flag("--no-validate", bench.no_validate, "skip the oracle comparison");
  app.add_option("--output", bench.output, "write results to this file instead of stdout");
  app.add_option("--format", bench.format, "csv or json")->capture_default_str();
#ifdef CHAINSCAN_FAULT_INJECTION
  app.add_option("--inject-slot-fault", bench.corrupt_slot, "publish the identity from this block's slot")
      ->group("Testing");
#endif

  SimOptions simopt;
  auto* simulate = app.add_subcommand("simulate", "bounded-residency scheduling simulation");
  simulate->add_option("--blocks", simopt.blocks, "data blocks M")->required();
  simulate->add_option("--resident", simopt.resident, "resident capacity R")->required();
  simulate->add_option("--policy", simopt.policy, "one-to-one or cyclic:<B>")->required();
  simulate->add_option("--seeds", simopt.seeds, "number of seeds")->capture_default_str();
  simulate->add_option("--first-seed", simopt.first_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (simulate->parsed()) return run_simulate(simopt);
  return run_bench(bench);
}
