#pragma once

// Exact counts of integer points on diagonal cubic/quadratic systems.

#include "hasse/auxiliary.hpp"
#include "hasse/int_matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hasse {

/// System C3 x^3 = 0, C2 x^2 = 0 (componentwise powers) in s variables.
struct MixedSystem {
    IntMatrix c2;  // r2 x s
    IntMatrix c3;  // r3 x s

    std::size_t s() const { return c3.cols() > c2.cols() ? c3.cols() : c2.cols(); }
    std::size_t r2() const { return c2.rows(); }
    std::size_t r3() const { return c3.rows(); }

    // Column counts agree (an empty c2 or c3 may have zero rows).
    void validate() const;
    // r3 >= 2 r2 > 0 and s >= 6 r3 + floor(14 r2 / 3) + 1.
    bool in_theorem_regime() const;
    // Both coefficient matrices highly non-singular.
    bool coefficients_highly_non_singular() const;
    // Exponent s - 2 r2 - 3 r3 of the expected main term.
    long expected_exponent() const;
};

/// Each |f|^{2m} factor of a moment integral attached to a coefficient
/// column becomes m plus-signed and m minus-signed copies of that column.
struct MomentTerm {
    std::size_t column;  // 0-based
    unsigned power;      // even, positive
};

struct MomentPattern {
    std::vector<MomentTerm> terms;
};

// Pattern of I(P, D): power 2 on the first `diagonal_columns` columns and
// power 4 on the rest.
MomentPattern pattern_I(std::size_t columns, std::size_t diagonal_columns);
// Pattern of J_n for a cubic matrix of type (n, r, 0)_{r, l}.
MomentPattern pattern_J(std::size_t n, std::size_t r, std::size_t l);

/// The generic counting problem: each variable x in [-P, P] contributes
/// cubic[j] * x^3 to cubic equation j and quad[j] * x^2 to quadratic
/// equation j. Signs of moment expansions are folded into the coefficients.
struct DiagonalProblem {
    std::size_t cubic_rows = 0;
    std::size_t quad_rows = 0;
    // Coefficient vector per variable: cubic rows first, then quadratic.
    std::vector<std::vector<std::int64_t>> variables;

    std::size_t equations() const { return cubic_rows + quad_rows; }
};

DiagonalProblem problem_from_system(const MixedSystem &sys);
// quad may have zero rows, in which case the problem is purely cubic.
DiagonalProblem problem_from_pattern(const IntMatrix &cubic, const IntMatrix &quad, const MomentPattern &pattern);

enum class CountMethod { naive, mitm };

std::string to_string(CountMethod m);
CountMethod parse_count_method(const std::string &text);

struct CountOptions {
    CountMethod method = CountMethod::mitm;
    double budget_gib = 8.0;
    unsigned threads = 0;  // 0: hardware concurrency
    // Naive enumeration refuses problems with more tuples than this.
    double naive_tuple_limit = 2e12;
};

struct CountRecord {
    long P = 0;
    BigInt count;
    CountMethod method = CountMethod::mitm;
    double seconds = 0.0;
};

CountRecord count_problem(const DiagonalProblem &problem, long P, const CountOptions &opts = {});

CountRecord count_N(const MixedSystem &sys, long P, const CountOptions &opts = {});

CountRecord count_mean_value_I(const AuxMatrix &d, long P, const CountOptions &opts = {});
// Variant for a plain matrix: power 2 on the first diagonal_columns columns,
// power 4 on the remaining ones.
CountRecord count_mean_value_I(const IntMatrix &d, std::size_t diagonal_columns, long P,
                               const CountOptions &opts = {});

CountRecord count_mean_value_J(const IntMatrix &d2, const AuxMatrix &d3, std::size_t n, long P,
                               const CountOptions &opts = {});

// x1^k + ... + x5^k = x6^k + ... + x10^k for k = 2 and k = 3.
CountRecord count_tenth_moment(long P, const CountOptions &opts = {});

struct GrowthFit {
    double slope;
    double intercept;
    double max_residual;
};

/// Least-squares fit of log(count) against log(P).
GrowthFit estimate_growth_exponent(const std::vector<CountRecord> &records);

// Upper estimate of the bytes the meet-in-the-middle tables would need.
double mitm_stored_bytes(const DiagonalProblem &problem, long P);

} // namespace hasse
