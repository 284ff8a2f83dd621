#pragma once

// Uniform entry point over every scan algorithm in the library.

#include <span>
#include <string_view>

#include "chainscan/chained_scan.hpp"
#include "chainscan/reference_scans.hpp"

namespace chainscan {

enum class Algorithm { sequential, hillis_steele, blelloch, matrix, chained };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::sequential, Algorithm::hillis_steele,
                                               Algorithm::blelloch, Algorithm::matrix, Algorithm::chained};

std::string_view to_string(Algorithm a);
/// Accepts sequential, hillis-steele, blelloch, matrix, chained.
Algorithm parse_algorithm(std::string_view name);

/// Runs `algo`. The work-efficient scan is padded to a power of two and the
/// matrix scan uses default_matrix_rows; `config` only affects chained.
template <Element T, ScanOp<T> Op>
void run_scan(Algorithm algo, std::span<const T> x, std::span<T> y, const Op& op,
              const ChainConfig& config = {}) {
  switch (algo) {
    case Algorithm::sequential: return sequential_scan(x, y, op);
    case Algorithm::hillis_steele: return hillis_steele_scan(x, y, op);
    case Algorithm::blelloch: return work_efficient_scan_padded(x, y, op);
    case Algorithm::matrix: return matrix_scan(x, y, op);
    case Algorithm::chained: return chained_scan(x, y, op, config);
  }
}

}  // namespace chainscan
