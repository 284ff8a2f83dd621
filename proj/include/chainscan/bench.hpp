#pragma once

// Benchmark cells, seeded input generation and result emission.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "chainscan/algorithms.hpp"
#include "chainscan/operators.hpp"
#include "chainscan/simd_block_scan.hpp"

namespace chainscan::bench {

struct BenchRecord {
  std::string algorithm;
  std::string dtype;
  std::string op;
  std::uint64_t n = 0;
  std::size_t workers = 1;
  std::size_t warp_width = 0;
  std::size_t k = 0;
  std::size_t warps_per_block = 0;
  std::size_t runs = 0;
  double best_seconds = 0.0;
  double mean_seconds = 0.0;
  double geps = 0.0;
  bool validated = false;
  bool in_place = false;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "algorithm,dtype,op,n,workers,warp_width,k,warps_per_block,runs,best_seconds,mean_seconds,geps,validated,in_place";

/// Billions of elements per second: N / t * 1e-9.
inline double geps(std::uint64_t n, double seconds) {
  return seconds > 0.0 ? static_cast<double>(n) / seconds * 1e-9 : 0.0;
}

/// Integers uniform over the full type range; floats uniform in [-1, 1].
template <Element T>
std::vector<T> generate_input(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<T> x(n);
  if constexpr (std::is_integral_v<T>) {
    std::uniform_int_distribution<T> dist(std::numeric_limits<T>::min(), std::numeric_limits<T>::max());
    for (auto& v : x) v = dist(rng);
  } else {
    std::uniform_real_distribution<T> dist(T(-1), T(1));
    for (auto& v : x) v = dist(rng);
  }
  return x;
}

struct CellSpec {
  Algorithm algorithm = Algorithm::chained;
  ElemType dtype = ElemType::i32;
  OpKind op = OpKind::add;
  std::size_t n = 0;
  std::size_t workers = 1;
  WarpGeometry geometry{};
  std::size_t runs = 3;
  std::uint64_t seed = 1;
  bool in_place = false;
  bool validate = true;
  std::optional<std::size_t> corrupt_slot;
};

struct CellResult {
  BenchRecord record;
  /// Set when validation failed: first mismatching index, expected, got.
  std::optional<std::string> mismatch;
};

/// Generates the input, warms up once, times `runs` repetitions of the scan
/// alone and validates the last output against sequential_scan.
CellResult run_cell(const CellSpec& spec);

enum class Format { csv, json };
Format parse_format(std::string_view name);

void write_csv(std::ostream& os, std::span<const BenchRecord> records);
std::string records_to_json(std::span<const BenchRecord> records);
std::vector<BenchRecord> records_from_json(std::string_view text);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes all records to `path`; throws IoError if the file cannot be written.
void emit_results(std::span<const BenchRecord> records, Format format, const std::filesystem::path& path);

/// 32M, 64M, 128M, 256M, 512M elements (binary millions).
std::vector<std::size_t> paper_sizes();
/// 2^20, 2^22, 2^24, 2^26.
std::vector<std::size_t> desk_sizes();

}  // namespace chainscan::bench
