#include "chainscan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "chainscan/validate.hpp"

namespace chainscan {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sequential: return "sequential";
    case Algorithm::hillis_steele: return "hillis-steele";
    case Algorithm::blelloch: return "blelloch";
    case Algorithm::matrix: return "matrix";
    case Algorithm::chained: return "chained";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

}  // namespace chainscan

namespace chainscan::bench {

namespace {

using clock_type = std::chrono::steady_clock;

template <typename T>
std::string format_value(T v) {
  std::ostringstream os;
  if constexpr (std::is_floating_point_v<T>) os << std::setprecision(std::numeric_limits<T>::max_digits10);
  os << v;
  return os.str();
}

template <Element T, ScanOp<T> Op>
CellResult run_typed(const CellSpec& spec, const Op& op) {
  const auto x = generate_input<T>(spec.n, spec.seed);
  std::vector<T> y(spec.n);

  ChainConfig config;
  config.workers = spec.workers;
  config.geometry = spec.geometry;
  config.corrupt_slot = spec.corrupt_slot;

  auto once = [&] {
    if (spec.in_place) {
      std::copy(x.begin(), x.end(), y.begin());
      const auto t0 = clock_type::now();
      run_scan(spec.algorithm, std::span<const T>(y), std::span<T>(y), op, config);
      return std::chrono::duration<double>(clock_type::now() - t0).count();
    }
    const auto t0 = clock_type::now();
    run_scan(spec.algorithm, std::span<const T>(x), std::span<T>(y), op, config);
    return std::chrono::duration<double>(clock_type::now() - t0).count();
  };

  once();  // warm-up
  std::vector<double> times;
  times.reserve(spec.runs);
  for (std::size_t r = 0; r < spec.runs; ++r) times.push_back(once());

  CellResult result;
  BenchRecord& rec = result.record;
  rec.algorithm = std::string(to_string(spec.algorithm));
  rec.dtype = std::string(to_string(spec.dtype));
  rec.op = std::string(to_string(spec.op));
  rec.n = spec.n;
  rec.runs = spec.runs;
  rec.in_place = spec.in_place;
  if (spec.algorithm == Algorithm::chained) {
    rec.workers = spec.workers;
    rec.warp_width = spec.geometry.lanes();
    rec.k = spec.geometry.regs_per_lane();
    rec.warps_per_block = spec.geometry.warps_per_block();
  }
  if (!times.empty()) {
    rec.best_seconds = *std::min_element(times.begin(), times.end());
    rec.mean_seconds = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
    // A zero reading would report no throughput for a non-empty scan.
    rec.best_seconds = spec.n > 0 ? std::max(rec.best_seconds, 1e-9) : rec.best_seconds;
    rec.geps = geps(spec.n, rec.best_seconds);
  }

  if (spec.validate) {
    const auto expected = sequential_scan(std::span<const T>(x), op);
    const auto bad = first_mismatch(std::span<const T>(x), std::span<const T>(expected), std::span<const T>(y));
    rec.validated = !bad.has_value();
    if (bad) {
      result.mismatch = "first mismatch at index " + std::to_string(bad->index) + ": expected " +
                        format_value(bad->expected) + ", got " + format_value(bad->got);
    }
  }
  return result;
}

nlohmann::json to_json(const BenchRecord& r) {
  return nlohmann::json{{"algorithm", r.algorithm},
                        {"dtype", r.dtype},
                        {"op", r.op},
                        {"n", r.n},
                        {"workers", r.workers},
                        {"warp_width", r.warp_width},
                        {"k", r.k},
                        {"warps_per_block", r.warps_per_block},
                        {"runs", r.runs},
                        {"best_seconds", r.best_seconds},
                        {"mean_seconds", r.mean_seconds},
                        {"geps", r.geps},
                        {"validated", r.validated},
                        {"in_place", r.in_place}};
}

}  // namespace

CellResult run_cell(const CellSpec& spec) {
  return dispatch_elem(spec.dtype, [&](auto tag) {
    using T = typename decltype(tag)::type;
    return dispatch_operator<T>(spec.op, [&](auto op) { return run_typed<T>(spec, op); });
  });
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "'");
}

void write_csv(std::ostream& os, std::span<const BenchRecord> records) {
  os << kCsvHeader << '\n';
  const auto old_precision = os.precision(17);
  for (const auto& r : records) {
    os << r.algorithm << ',' << r.dtype << ',' << r.op << ',' << r.n << ',' << r.workers << ','
       << r.warp_width << ',' << r.k << ',' << r.warps_per_block << ',' << r.runs << ',' << r.best_seconds
       << ',' << r.mean_seconds << ',' << r.geps << ',' << (r.validated ? "true" : "false") << ','
       << (r.in_place ? "true" : "false") << '\n';
  }
  os.precision(old_precision);
}

std::string records_to_json(std::span<const BenchRecord> records) {
  auto arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr.dump(2);
}

std::vector<BenchRecord> records_from_json(std::string_view text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<BenchRecord> out;
  for (const auto& j : arr) {
    BenchRecord r;
    j.at("algorithm").get_to(r.algorithm);
    j.at("dtype").get_to(r.dtype);
    j.at("op").get_to(r.op);
    j.at("n").get_to(r.n);
    j.at("workers").get_to(r.workers);
    j.at("warp_width").get_to(r.warp_width);
    j.at("k").get_to(r.k);
    j.at("warps_per_block").get_to(r.warps_per_block);
    j.at("runs").get_to(r.runs);
    j.at("best_seconds").get_to(r.best_seconds);
    j.at("mean_seconds").get_to(r.mean_seconds);
    j.at("geps").get_to(r.geps);
    j.at("validated").get_to(r.validated);
    j.at("in_place").get_to(r.in_place);
    out.push_back(std::move(r));
  }
  return out;
}

void emit_results(std::span<const BenchRecord> records, Format format, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::out | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  if (format == Format::csv) {
    write_csv(file, records);
  } else {
    file << records_to_json(records) << '\n';
  }
  file.flush();
  if (!file) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::size_t> paper_sizes() {
  return {std::size_t{32} << 20, std::size_t{64} << 20, std::size_t{128} << 20, std::size_t{256} << 20,
          std::size_t{512} << 20};
}

std::vector<std::size_t> desk_sizes() {
  return {std::size_t{1} << 20, std::size_t{1} << 22, std::size_t{1} << 24, std::size_t{1} << 26};
}

}  // namespace chainscan::bench
