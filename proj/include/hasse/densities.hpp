#pragma once

// Local densities of a mixed diagonal system: truncated singular series,
// p-adic densities by congruence counting and by complete sums, the real
// density, the truncated singular integral, and the product constant.

#include "hasse/counting.hpp"
#include "hasse/int_matrix.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hasse {

std::vector<std::int64_t> primes_up_to(std::int64_t n);
bool is_prime(std::int64_t n);

// ---------------------------------------------------------------- series

struct SeriesOptions {
    // Largest q^w (tuples a mod q) a single term may enumerate.
    double work_limit = 3e7;
    unsigned threads = 0;
};

/// A(q) = sum over a mod q with (q, a) = 1 of prod_j q^{-1} S(q, Lambda_j(a)).
/// The imaginary part must cancel to 1e-8 relative or NumericalIntegrityError
/// is thrown.
double series_term(const MixedSystem &sys, std::int64_t q, const SeriesOptions &opts = {});

struct SeriesValue {
    double value = 0;
    double imag_residue = 0;  // largest |Im| seen over all partial sums
    std::int64_t Y = 0;
    std::vector<double> terms;  // A(1), ..., A(Y)
};

/// Truncated singular series: sum of A(q) over q <= Y.
SeriesValue singular_series(const MixedSystem &sys, double Y, const SeriesOptions &opts = {});

// ------------------------------------------------------------ congruences

struct CongruenceCount {
    std::int64_t p = 0;
    unsigned i = 0;
    BigInt M;  // solutions mod p^i
    std::string method;
};

enum class CongruenceMethod { automatic, exhaustive, lifting, residue_dp };

std::string to_string(CongruenceMethod m);
CongruenceMethod parse_congruence_method(const std::string &text);

struct CongruenceOptions {
    CongruenceMethod method = CongruenceMethod::automatic;
    double work_limit = 2e8;
};

/// Number of x mod p^i with C3 x^3 = 0 and C2 x^2 = 0 mod p^i. Exhaustive
/// enumeration, Hensel lifting that only expands residues where the
/// Jacobian has rank < w mod p, or a convolution over residue vectors of the
/// w forms. Throws ResourceError when the chosen method is over budget.
CongruenceCount count_congruence(const MixedSystem &sys, std::int64_t p, unsigned i,
                                 const CongruenceOptions &opts = {});

/// Rank of the Jacobian (rows: 3 c3 x^2, then 2 c2 x) reduced mod p.
std::size_t jacobian_rank_mod_p(const MixedSystem &sys, const std::vector<std::int64_t> &x, std::int64_t p);

// ------------------------------------------------------------------ chi_p

enum class ChiRoute { congruence, exponential_sum };

std::string to_string(ChiRoute r);

struct ChiPOptions {
    ChiRoute route = ChiRoute::exponential_sum;
    double stabilization_tol = 1e-9;
    // Levels above the largest i with p^{i w} (sums) or the congruence
    // budget are dropped and reported through i_used.
    double work_limit = 3e7;
    unsigned threads = 0;
};

struct ChiP {
    std::int64_t p = 0;
    double value = 0;
    unsigned i_requested = 0;
    unsigned i_used = 0;
    bool stabilized = false;
    ChiRoute route = ChiRoute::exponential_sum;
    // Value at each level 1..i_used: p^{-i(s-w)} M(p^i), or the partial sums
    // of A(p^k) over k <= i.
    std::vector<double> sequence;
};

ChiP chi_p(const MixedSystem &sys, std::int64_t p, unsigned i_max, const ChiPOptions &opts = {});

// ------------------------------------------------------------ chi_infinity

struct ChiInfinityOptions {
    std::vector<double> eps = {1.0, 0.7, 0.5};  // strictly decreasing
    std::size_t samples = 10'000'000;
    unsigned strata = 64;
    std::uint64_t seed = 7;
    // Leading power of eps in the bias; 2 for a smooth density at 0.
    double bias_order = 2.0;
    unsigned threads = 0;
};

struct ChiInfinityResult {
    double value = 0;
    double error = 0;  // sqrt(mc_sigma^2 + extrapolation_residual^2)
    double mc_sigma = 0;
    double extrapolation_residual = 0;
    std::vector<double> eps;
    std::vector<double> estimates;  // (2 eps)^{-w} vol at each eps
    std::vector<double> sigmas;
    bool monotone = true;
    bool flagged = false;
    std::size_t samples = 0;
};

/// lim (2 eps)^{-w} vol{zeta in [-1, 1]^s : |Theta_{k,i}(zeta)| <= eps}. The
/// last coordinate is integrated exactly; the rest is stratified Monte Carlo
/// over the first coordinate with one seed per stratum, then extrapolated to
/// eps = 0 by least squares in eps^bias_order.
ChiInfinityResult chi_infinity(const MixedSystem &sys, const ChiInfinityOptions &opts = {});

// ------------------------------------------------------- singular integral

struct SingularIntegral {
    double value = 0;
    double imag = 0;
    double error = 0;
    double normalized = 0;  // value / P^{s - 2 r2 - 3 r3}
    double Y = 0;
    double P = 0;
};

/// J(Y): integral over |beta_2| <= Y P^{-2}, |beta_3| <= Y P^{-3} of
/// prod_j v(delta_j, P), by nested adaptive quadrature. Needs w <= 4.
SingularIntegral singular_integral_J(const MixedSystem &sys, double Y, double P, double tol = 1e-8);

// --------------------------------------------------------- local witnesses

struct LocalWitness {
    std::int64_t place = 0;  // prime, or 0 for the real place
    std::vector<std::int64_t> residues;  // x mod p^m
    unsigned m = 0;
    unsigned delta = 0;  // least p-adic valuation of a maximal Jacobian minor
    std::vector<double> point;  // real witness
    double residual = 0;
    double sigma_min = 0;
};

struct WitnessOptions {
    unsigned max_level = 7;                 // largest m tried at a prime
    double exhaustive_limit = 2e6;          // enumerate x mod p^m below this
    std::size_t random_samples = 4'000'000;  // otherwise sample this many
    std::size_t newton_starts = 200;
    std::uint64_t seed = 11;
};

/// place = prime p: some x mod p^m with F(x) = 0 mod p^m and a maximal
/// Jacobian minor of valuation delta, m >= 2 delta + 1, so x lifts to a
/// non-singular p-adic zero. place = 0: a real zero in (-1, 1)^s with
/// residual < 1e-10 and smallest singular value of the Jacobian > 1e-6.
std::optional<LocalWitness> find_nonsingular_local_solution(const MixedSystem &sys, std::int64_t place,
                                                            const WitnessOptions &opts = {});

// --------------------------------------------------------------- constant

struct DensityOptions {
    std::int64_t prime_bound = 97;
    unsigned i_max = 6;
    ChiPOptions chi_p;
    ChiInfinityOptions chi_infinity;
    // Primes above this feed the tail constant.
    std::int64_t tail_from = 20;
    bool search_witnesses = true;
    WitnessOptions witness;
};

struct DensityReport {
    ChiInfinityResult chi_infinity;
    std::vector<ChiP> chi_p;
    double prime_product = 1;
    double tail_constant = 0;  // C in |chi_p - 1| <= C / p^2
    double tail_relative = 0;  // exp(C / prime_bound) - 1
    double c = 0;
    double c_error = 0;
    bool real_witness = false;
    std::vector<std::int64_t> primes_without_witness;
    bool flagged = false;
    std::vector<std::string> flags;
    std::optional<SeriesValue> series;
    std::optional<SingularIntegral> integral;
    DensityOptions options;
};

using ChiPProvider = std::function<ChiP(std::int64_t p)>;

DensityReport compute_constant_c(const MixedSystem &sys, const DensityOptions &opts = {});
/// Same, with chi_p supplied by the caller.
DensityReport compute_constant_c(const MixedSystem &sys, const DensityOptions &opts, const ChiPProvider &provider);

} // namespace hasse
