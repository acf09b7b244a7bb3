#pragma once

// Cubic and mixed Weyl sums, complete rational sums and the oscillatory
// integral. Phases are reduced mod 1 exactly before any trig call.

#include "hasse/counting.hpp"
#include "hasse/int_matrix.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace hasse {

using Complex = std::complex<double>;

inline constexpr long kMaxSumP = 1'000'000;

/// Coordinates on R^k / Z^k, stored in [0, 1).
class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(std::vector<double> coords);

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<double> &coords() const noexcept { return coords_; }

private:
    std::vector<double> coords_;
};

// Reduces t mod 1 into [0, 1).
double wrap_unit(double t);

// Fractional part of eta * n, computed from the exact binary value of eta.
long double frac_product(double eta, std::int64_t n);

// e(t) = exp(2 pi i t) for t already reduced mod 1.
Complex unit_phase(long double t);

/// g(eta) = sum over |x| <= P of e(eta x^3).
Complex eval_g(double eta, long P);

/// f(alpha, beta) = sum over |x| <= P of e(alpha x^3 + beta x^2).
Complex eval_f(double alpha, double beta, long P);

/// theta_j = sum_i d_{ij} eta_i mod 1, one output per column of d.
TorusPoint eval_theta(const IntMatrix &d, const TorusPoint &eta);

struct GammaPair {
    double cubic;
    double quad;
};

/// gamma_{k,j} = sum_i c^{(k)}_{ij} alpha_{k,i} mod 1; alpha lists the cubic
/// coordinates first, then the quadratic ones.
std::vector<GammaPair> eval_gamma(const MixedSystem &sys, const TorusPoint &alpha);

/// S(q, a) = sum_{x=1}^{q} e((a3 x^3 + a2 x^2) / q).
Complex complete_sum_S(std::int64_t q, std::int64_t a3, std::int64_t a2);

struct QuadratureResult {
    Complex value;
    double error_estimate;
    std::size_t panels;
};
using OscillatoryResult = QuadratureResult;

/// Globally adaptive G7-K15 on [a, b], starting from initial_panels equal
/// panels and always splitting the worst one. Throws ConvergenceError with the
/// best estimate when max_panels is reached above tol.
QuadratureResult integrate_adaptive(const std::function<Complex(double)> &f, double a, double b, double tol,
                                    std::size_t initial_panels = 1, std::size_t max_panels = 100'000);

/// v(beta, P) = integral over [-P, P] of e(beta3 z^3 + beta2 z^2) dz, by
/// adaptive Gauss-Kronrod panels. Throws ConvergenceError once the panel
/// budget is spent without reaching tol.
OscillatoryResult oscillatory_v(double beta3, double beta2, double P, double tol = 1e-10,
                                std::size_t max_panels = 2'000'000);

/// Constant term of (g(z) g(1/z))^{power/2} with g(z) = sum_{|x|<=P} z^{c x^3}:
/// the moment of |g(c eta)|^power over the torus, expanded exactly.
BigInt even_moment_by_expansion(long coefficient, unsigned power, long P);

struct MinorArcSample {
    double max_abs_g;
    double argmax_eta;
    double p34;  // P^{3/4}
    std::size_t minor_points;
    std::size_t rejected_major;
};

/// Largest |g| over the minor-arc points among the given etas.
MinorArcSample minor_arc_sup_check(long P, const std::vector<double> &etas);
/// Same over sample_count seeded uniform draws.
MinorArcSample minor_arc_sup_check(long P, std::size_t sample_count, std::uint64_t seed = 1);

} // namespace hasse
