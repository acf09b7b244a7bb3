#pragma once

// Major and minor arcs. The one-dimensional cubic arcs use q <= P^{3/4} and
// |q eta - a| <= P^{-9/4}; the multi-dimensional M level uses q <= P^{3/4},
// |q alpha_k - a_k| <= P^{3/4-k}; the N level uses q <= X = P^{1/(6w)},
// |alpha_k - a_k/q| <= X P^{-k}.

#include <cstdint>
#include <string>
#include <vector>

namespace hasse {

enum class ArcLevel { cubic_1d, M_level, N_level };

std::string to_string(ArcLevel level);
ArcLevel parse_arc_level(const std::string &text);

struct ArcParams {
    double P;
    ArcLevel level = ArcLevel::cubic_1d;
    std::size_t w = 1;   // r2 + r3, used for X at the N level
    std::size_t r3 = 1;  // leading coordinates that are cubic

    // Throws std::invalid_argument unless P >= 2 and, for multi levels,
    // r3 <= w.
    void validate() const;

    double X() const;           // P^{1/(6w)}
    std::int64_t max_q() const; // largest admissible denominator
    // Radius on |q alpha - a| for a coordinate of degree k (1d uses k = 3).
    double radius(unsigned degree) const;
};

struct ArcLabel {
    bool major = false;
    std::int64_t q = 0;
    // 1 <= a_i <= q; a residue 0 is reported as q.
    std::vector<std::int64_t> a;
};

/// Smallest-q witness via continued-fraction convergents of eta.
ArcLabel classify_1d(double eta, const ArcParams &params);
// Reference scan over every q up to the bound.
ArcLabel classify_1d_scan(double eta, const ArcParams &params);

/// Simultaneous approximation: one q must serve every coordinate. alpha lists
/// the r3 cubic coordinates first, then the quadratic ones.
ArcLabel classify_multi(const std::vector<double> &alpha, const ArcParams &params);
ArcLabel classify_multi_scan(const std::vector<double> &alpha, const ArcParams &params);

/// Every q that admits a witness, for dual-witness checks.
std::vector<std::int64_t> all_witness_denominators(const std::vector<double> &alpha, const ArcParams &params);

struct ArcMeasure {
    double measure;
    bool exact;  // false: the boxes may overlap and measure is an upper bound
};

// Optional exponent overrides: q_exponent replaces 3/4 (1d, M) and
// radius_exponent replaces -9/4 (1d only).
struct ArcMeasureOverrides {
    double q_exponent = 0.75;
    double radius_exponent = -2.25;
};

ArcMeasure arc_measure(const ArcParams &params, const ArcMeasureOverrides &overrides = {});

// Euler totient and gcd helpers shared with the density code.
std::int64_t euler_phi(std::int64_t n);
std::int64_t gcd64(std::int64_t a, std::int64_t b);

} // namespace hasse
