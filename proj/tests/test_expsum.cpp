#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hasse/counting.hpp"
#include "hasse/errors.hpp"
#include "hasse/expsum.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hasse;

namespace {

// Straight summation of e(alpha x^3 + beta x^2) with no phase reduction.
Complex direct_f(long double alpha, long double beta, long P) {
    long double re = 0, im = 0;
    for (long x = -P; x <= P; ++x) {
        const long double t = alpha * x * x * x + beta * x * x;
        re += std::cos(2 * std::numbers::pi_v<long double> * t);
        im += std::sin(2 * std::numbers::pi_v<long double> * t);
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

double torus_distance(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

} // namespace

TEST_CASE("exact fractional parts") {
    CHECK(frac_product(0.5, 3) == 0.5L);
    CHECK(frac_product(0.25, -1) == 0.75L);
    CHECK(frac_product(3.0, 7) == 0.0L);
    CHECK(frac_product(0.0, 12345) == 0.0L);
    // 2^-60 * 2^61 = 2 exactly
    CHECK(frac_product(std::ldexp(1.0, -60), std::int64_t{1} << 61) == 0.0L);
    CHECK(frac_product(std::ldexp(1.0, -200), 8) == doctest::Approx(std::ldexp(1.0, -197)));
    CHECK(wrap_unit(-0.25) == 0.75);
    CHECK(wrap_unit(3.5) == 0.5);
}

TEST_CASE("g and f at simple points") {
    CHECK(eval_g(0.0, 5) == Complex(11, 0));
    for (long P : {0L, 1L, 7L, 40L}) {
        const Complex v = eval_g(1.0, P);
        CHECK(v.real() == doctest::Approx(2 * P + 1));
        CHECK(std::fabs(v.imag()) < 1e-9);
    }
    const Complex half = eval_g(0.5, 2);
    CHECK(half.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(half.imag()) < 1e-12);

    CHECK(eval_f(0.0, 0.0, 3) == Complex(7, 0));
    const Complex f = eval_f(1.0 / 3.0, 0.5, 2);
    const Complex ref = direct_f(1.0L / 3.0L, 0.5L, 2);
    CHECK(std::abs(f - ref) < 1e-12);
    CHECK(std::abs(eval_f(0.3, 0.0, 9) - eval_g(0.3, 9)) < 1e-13);
    CHECK_THROWS_AS(eval_g(0.1, -1), std::invalid_argument);
    CHECK_THROWS_AS(eval_g(0.1, kMaxSumP + 1), std::invalid_argument);
}

TEST_CASE("phase reduction keeps large P accurate") {
    // eta = 1/2^20: the phase of x^3 / 2^20 is exactly representable
    const double eta = std::ldexp(1.0, -20);
    const long P = 5000;
    long double re = 0, im = 0;
    for (long x = -P; x <= P; ++x) {
        const __int128 x3 = static_cast<__int128>(x) * x * x;
        const long r = static_cast<long>(((x3 % (1 << 20)) + (1 << 20)) % (1 << 20));
        re += std::cos(2 * std::numbers::pi_v<long double> * r / (1 << 20));
        im += std::sin(2 * std::numbers::pi_v<long double> * r / (1 << 20));
    }
    const Complex v = eval_g(eta, P);
    CHECK(std::fabs(v.real() - static_cast<double>(re)) < 1e-8);
    CHECK(std::fabs(v.imag() - static_cast<double>(im)) < 1e-8);
}

TEST_CASE("trivial bound and conjugate law on random points") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_int_distribution<long> p(0, 12);
    for (int i = 0; i < 100000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        const long P = p(rng);
        const Complex f = eval_f(a, b, P);
        CHECK(std::abs(f) <= 2 * P + 1 + 1e-9);
        if (i % 100 == 0) {
            CHECK(std::abs(eval_g(a, P)) <= 2 * P + 1 + 1e-9);
            CHECK(std::abs(eval_f(-a, -b, P) - std::conj(f)) < 1e-11);
        }
    }
}

TEST_CASE("linear substitutions") {
    const IntMatrix id = IntMatrix::identity(3);
    const TorusPoint eta({0.125, 0.7, 0.999});
    const TorusPoint same = eval_theta(id, eta);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(same[i] == eta[i]);
    }
    const TorusPoint zero = eval_theta(IntMatrix{{3, -4}, {5, 9}}, TorusPoint({0.0, 0.0}));
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);
    CHECK_THROWS_AS(eval_theta(id, TorusPoint({0.1})), std::invalid_argument);

    std::mt19937_64 rng(73);
    std::uniform_int_distribution<long> num(0, 1023);
    for (int trial = 0; trial < 200; ++trial) {
        const IntMatrix d = oracle::random_matrix(3, 4, -50, 50, rng);
        long n[3];
        std::vector<double> coords;
        for (long &v : n) {
            v = num(rng);
            coords.push_back(v / 1024.0);
        }
        const TorusPoint theta = eval_theta(d, TorusPoint(coords));
        for (std::size_t j = 0; j < 4; ++j) {
            long acc = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                acc += d(i, j).get_si() * n[i];
            }
            const long r = ((acc % 1024) + 1024) % 1024;
            CHECK(theta[j] == r / 1024.0);  // dyadic inputs give exact outputs
        }
        // thirds are not dyadic; compare on the torus
        const TorusPoint thirds = eval_theta(d, TorusPoint({1.0 / 3, 2.0 / 3, 1.0 / 3}));
        for (std::size_t j = 0; j < 4; ++j) {
            const long acc = d(0, j).get_si() + 2 * d(1, j).get_si() + d(2, j).get_si();
            const double expected = static_cast<double>(((acc % 3) + 3) % 3) / 3.0;
            CHECK(torus_distance(thirds[j], expected) < 1e-12);
        }
    }

    MixedSystem sys{IntMatrix{{1, 2, 3}}, IntMatrix{{1, 1, 1}, {0, 1, -1}}};
    const auto gamma = eval_gamma(sys, TorusPoint({0.25, 0.5, 0.125}));
    REQUIRE(gamma.size() == 3);
    CHECK(gamma[0].cubic == 0.25);
    CHECK(gamma[1].cubic == 0.75);
    CHECK(gamma[2].cubic == 0.75);
    CHECK(gamma[0].quad == 0.125);
    CHECK(gamma[1].quad == 0.25);
    CHECK(gamma[2].quad == 0.375);
    CHECK_THROWS_AS(eval_gamma(sys, TorusPoint({0.1, 0.2})), std::invalid_argument);
}

TEST_CASE("complete sums") {
    for (std::int64_t q : {1, 2, 9, 31}) {
        CHECK(complete_sum_S(q, 0, 0).real() == doctest::Approx(static_cast<double>(q)));
    }
    CHECK(complete_sum_S(1, 5, -7).real() == doctest::Approx(1.0));
    CHECK(std::abs(complete_sum_S(2, 0, 1)) < 1e-15);
    CHECK(std::fabs(std::abs(complete_sum_S(7, 0, 1)) - std::sqrt(7.0)) < 1e-9);
    CHECK_THROWS_AS(complete_sum_S(0, 1, 1), std::invalid_argument);

    std::mt19937_64 rng(79);
    std::uniform_int_distribution<std::int64_t> qd(1, 50);
    std::uniform_int_distribution<std::int64_t> ad(-1000, 1000);
    for (int trial = 0; trial < 500; ++trial) {
        const std::int64_t q = qd(rng);
        const std::int64_t a3 = ad(rng);
        const std::int64_t a2 = ad(rng);
        const Complex base = complete_sum_S(q, a3, a2);
        CHECK(complete_sum_S(q, a3 + q, a2) == base);
        CHECK(complete_sum_S(q, a3, a2 - 3 * q) == base);
        // direct sum with unreduced phases
        long double re = 0, im = 0;
        for (std::int64_t x = 1; x <= q; ++x) {
            const long double t = static_cast<long double>(a3 * x * x * x + a2 * x * x) / q;
            re += std::cos(2 * std::numbers::pi_v<long double> * t);
            im += std::sin(2 * std::numbers::pi_v<long double> * t);
        }
        CHECK(std::fabs(base.real() - static_cast<double>(re)) < 1e-9);
        CHECK(std::fabs(base.imag() - static_cast<double>(im)) < 1e-9);
    }
}

TEST_CASE("oscillatory integral") {
    const OscillatoryResult flat = oscillatory_v(0.0, 0.0, 3.0);
    CHECK(flat.value.real() == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(std::fabs(flat.value.imag()) < 1e-13);
    CHECK(oscillatory_v(1.0, 1.0, 0.0).value == Complex(0, 0));

    // composite Simpson with 10^6 intervals
    const int n = 1000000;
    const long double h = 2.0L / n;
    long double re = 0, im = 0;
    for (int i = 0; i <= n; ++i) {
        const long double z = -1.0L + i * h;
        const long double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        re += w * std::cos(2 * std::numbers::pi_v<long double> * z * z);
        im += w * std::sin(2 * std::numbers::pi_v<long double> * z * z);
    }
    re *= h / 3;
    im *= h / 3;
    const OscillatoryResult v = oscillatory_v(0.0, 1.0, 1.0, 1e-12);
    CHECK(std::fabs(v.value.real() - static_cast<double>(re)) < 1e-10);
    CHECK(std::fabs(v.value.imag() - static_cast<double>(im)) < 1e-10);
    CHECK(v.value.real() == doctest::Approx(0.48825340607534).epsilon(1e-11));

    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> beta(-0.05, 0.05);
    for (int trial = 0; trial < 10; ++trial) {
        const double b3 = beta(rng);
        const double b2 = beta(rng);
        const double tol = 1e-9;
        const OscillatoryResult a = oscillatory_v(b3, b2, 8.0, tol);
        const OscillatoryResult b = oscillatory_v(-b3, -b2, 8.0, tol);
        CHECK(std::abs(a.value - std::conj(b.value)) < 4 * tol);
        CHECK(a.error_estimate <= tol);
        const OscillatoryResult fine = oscillatory_v(b3, b2, 8.0, tol / 10);
        CHECK(std::abs(a.value - fine.value) <= 2 * tol);
    }

    CHECK_THROWS_AS(oscillatory_v(0.0, 0.0, 1.0, 0.0), std::invalid_argument);
    try {
        oscillatory_v(0.001, 0.002, 10.0, 1e-18, 40);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError &e) {
        CHECK(std::isfinite(e.best_estimate()));
        CHECK(e.error_estimate() > 1e-18);
    }
    // too many oscillations for the panel budget: no estimate at all
    try {
        oscillatory_v(0.3, 0.2, 50.0, 1e-10, 3000);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError &e) {
        CHECK(std::isnan(e.best_estimate()));
    }
}

TEST_CASE("fourth moment by expansion equals the lattice count") {
    for (long P : {1L, 2L, 3L}) {
        const BigInt expanded = even_moment_by_expansion(1, 4, P);
        CHECK(expanded == count_mean_value_I(IntMatrix{{1}}, 0, P).count);
        CHECK(expanded == oracle::brute_count({{1, 1, -1, -1}}, {}, 4, P));
    }
    CHECK(even_moment_by_expansion(1, 2, 4) == 9);  // |g|^2 averages to 2P+1
    CHECK_THROWS_AS(even_moment_by_expansion(1, 3, 2), std::invalid_argument);
}

TEST_CASE("minor arc supremum") {
    const MinorArcSample s64 = minor_arc_sup_check(64, 10000, 1);
    CHECK(s64.minor_points > 9000);
    CHECK(s64.max_abs_g <= 40 * s64.p34);
    CHECK(s64.max_abs_g <= 129.0);
    CHECK(s64.p34 == doctest::Approx(std::pow(64.0, 0.75)));

    const MinorArcSample s16 = minor_arc_sup_check(16, 2000, 3);
    CHECK(std::isfinite(s16.max_abs_g));
    CHECK(s16.max_abs_g <= 33.0);

    CHECK_THROWS_AS(minor_arc_sup_check(16, std::vector<double>{0.5, 0.0, 1.0 / 3}), std::runtime_error);
    CHECK_THROWS_AS(minor_arc_sup_check(16, 0), std::runtime_error);
    CHECK_THROWS_AS(minor_arc_sup_check(8, 10), std::invalid_argument);
}
