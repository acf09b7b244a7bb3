#pragma once

#include "hasse/int_matrix.hpp"

#include <cstdint>
#include <random>

namespace hasse {

// Total non-singularity enumerates every minor; the cost is exponential in
// min(rows, cols), so inputs beyond this are rejected.
inline constexpr std::size_t kMaxMinorDimension = 12;

// Column subsets examined by is_highly_non_singular are capped at this many.
inline constexpr std::uint64_t kMaxColumnSubsets = 20'000'000;

/// True iff every choice of rows() columns gives a non-singular square
/// submatrix. Requires rows() <= cols().
bool is_highly_non_singular(const IntMatrix &m);

/// True iff no minor of any order vanishes. Minors of order k are built from
/// those of order k-1 by Laplace expansion along the last row, so each minor
/// is computed once.
bool is_totally_non_singular(const IntMatrix &m);

// Rejection samplers; entries uniform in [lo, hi]. Throw std::runtime_error
// when max_tries draws all fail.
IntMatrix random_totally_non_singular(std::size_t rows, std::size_t cols, std::mt19937_64 &rng,
                                      long lo = 1, long hi = 9, std::size_t max_tries = 100000);
IntMatrix random_highly_non_singular(std::size_t rows, std::size_t cols, std::mt19937_64 &rng,
                                     long lo = 1, long hi = 9, std::size_t max_tries = 100000);

} // namespace hasse
