#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hasse/densities.hpp"
#include "hasse/errors.hpp"
#include "hasse/expsum.hpp"
#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

using namespace hasse;

namespace {

using Rows = std::vector<std::vector<long>>;

// Rows in the library's order: cubic first, then quadratic.
struct Toy {
    Rows cubic;
    Rows quad;
    std::size_t s;

    MixedSystem system() const {
        auto build = [&](const Rows &rows) {
            IntMatrix m(rows.size(), s);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t j = 0; j < s; ++j) {
                    m(i, j) = rows[i][j];
                }
            }
            return m;
        };
        return MixedSystem{build(quad), build(cubic)};
    }
    std::size_t w() const { return cubic.size() + quad.size(); }
};

Toy random_toy(std::mt19937_64 &rng, std::size_t r2, std::size_t r3, std::size_t s) {
    auto row = [&] {
        std::vector<long> r(s);
        for (long &c : r) {
            c = static_cast<long>(rng() % 9) + 1;
            if (rng() & 1) {
                c = -c;
            }
        }
        return r;
    };
    Toy t{{}, {}, s};
    for (std::size_t i = 0; i < r3; ++i) {
        t.cubic.push_back(row());
    }
    for (std::size_t i = 0; i < r2; ++i) {
        t.quad.push_back(row());
    }
    return t;
}

long mod(long a, long m) {
    return ((a % m) + m) % m;
}

// Values of the forms at x mod m.
std::vector<long> forms_mod(const Toy &t, const std::vector<long> &x, long m) {
    std::vector<long> v;
    for (const auto &row : t.cubic) {
        long acc = 0;
        for (std::size_t j = 0; j < t.s; ++j) {
            acc = mod(acc + row[j] * mod(x[j] * x[j] % m * x[j], m), m);
        }
        v.push_back(acc);
    }
    for (const auto &row : t.quad) {
        long acc = 0;
        for (std::size_t j = 0; j < t.s; ++j) {
            acc = mod(acc + row[j] * (x[j] * x[j] % m), m);
        }
        v.push_back(acc);
    }
    return v;
}

// Runs fn over every x in [0, m)^s.
void each_residue(std::size_t s, long m, const std::function<void(const std::vector<long> &)> &fn) {
    std::vector<long> x(s, 0);
    while (true) {
        fn(x);
        std::size_t k = 0;
        while (k < s && x[k] == m - 1) {
            x[k++] = 0;
        }
        if (k == s) {
            return;
        }
        ++x[k];
    }
}

std::uint64_t brute_congruence(const Toy &t, long m) {
    std::uint64_t hits = 0;
    each_residue(t.s, m, [&](const std::vector<long> &x) {
        const auto v = forms_mod(t, x, m);
        hits += std::all_of(v.begin(), v.end(), [](long e) { return e == 0; });
    });
    return hits;
}

std::complex<long double> e_q(long num, long q) {
    const long double t = 2 * std::numbers::pi_v<long double> * static_cast<long double>(mod(num, q)) / q;
    return {std::cos(t), std::sin(t)};
}

// A(q) summed straight from the definition.
double direct_term(const Toy &t, long q) {
    std::complex<long double> total = 0;
    each_residue(t.w(), q, [&](const std::vector<long> &a) {
        long g = q;
        for (long v : a) {
            g = std::gcd(g, v);
        }
        if (g != 1) {
            return;
        }
        std::complex<long double> prod = 1;
        for (std::size_t j = 0; j < t.s; ++j) {
            long l3 = 0, l2 = 0;
            for (std::size_t i = 0; i < t.cubic.size(); ++i) {
                l3 += t.cubic[i][j] * a[i];
            }
            for (std::size_t i = 0; i < t.quad.size(); ++i) {
                l2 += t.quad[i][j] * a[t.cubic.size() + i];
            }
            std::complex<long double> S = 0;
            for (long x = 0; x < q; ++x) {
                S += e_q(mod(l3 * (x * x % q * x % q), q) + mod(l2 * (x * x % q), q), q);
            }
            prod *= S / static_cast<long double>(q);
        }
        total += prod;
    });
    return static_cast<double>(total.real());
}

// Rank over F_p of the Jacobian rows 3 c x^2 and 2 c x.
std::size_t rank_mod(const Toy &t, const std::vector<long> &x, long p) {
    std::vector<std::vector<long>> a;
    for (const auto &row : t.cubic) {
        std::vector<long> r(t.s);
        for (std::size_t j = 0; j < t.s; ++j) {
            r[j] = mod(3 * row[j] * mod(x[j] * x[j], p), p);
        }
        a.push_back(r);
    }
    for (const auto &row : t.quad) {
        std::vector<long> r(t.s);
        for (std::size_t j = 0; j < t.s; ++j) {
            r[j] = mod(2 * row[j] * x[j], p);
        }
        a.push_back(r);
    }
    std::size_t rank = 0;
    for (std::size_t c = 0; c < t.s && rank < a.size(); ++c) {
        std::size_t piv = rank;
        while (piv < a.size() && a[piv][c] == 0) {
            ++piv;
        }
        if (piv == a.size()) {
            continue;
        }
        std::swap(a[piv], a[rank]);
        long inv = 1;
        while (mod(inv * a[rank][c], p) != 1) {
            ++inv;
        }
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (r != rank && a[r][c] != 0) {
                const long f = mod(a[r][c] * inv, p);
                for (std::size_t k = 0; k < t.s; ++k) {
                    a[r][k] = mod(a[r][k] - f * a[rank][k], p);
                }
            }
        }
        ++rank;
    }
    return rank;
}

// Least p-adic valuation over the maximal minors of the integer Jacobian at x.
unsigned min_minor_valuation(const Toy &t, const std::vector<long> &x, long p) {
    const std::size_t w = t.w();
    IntMatrix J(w, t.s);
    for (std::size_t j = 0; j < t.s; ++j) {
        for (std::size_t i = 0; i < t.cubic.size(); ++i) {
            J(i, j) = 3 * t.cubic[i][j] * x[j] * x[j];
        }
        for (std::size_t i = 0; i < t.quad.size(); ++i) {
            J(t.cubic.size() + i, j) = 2 * t.quad[i][j] * x[j];
        }
    }
    unsigned best = 1000;
    oracle::subsets(t.s, w, [&](const std::vector<std::size_t> &cols) {
        BigInt d = oracle::cofactor_det(select_columns(J, cols));
        if (d == 0) {
            return;
        }
        unsigned v = 0;
        while (d % p == 0) {
            d /= p;
            ++v;
        }
        best = std::min(best, v);
    });
    return best;
}

const MixedSystem kCone{IntMatrix{{1, 1, -1}}, IntMatrix(0, 3)};
const Toy kSix{{}, {{1, 1, 1, -1, -1, -1}}, 6};

} // namespace

TEST_CASE("singular series basics") {
    std::mt19937_64 rng(3);
    const Toy t = random_toy(rng, 1, 1, 5);
    const SeriesValue one = singular_series(t.system(), 1);
    CHECK(one.value == 1.0);
    CHECK(one.terms.size() == 1);
    CHECK_THROWS_AS(singular_series(t.system(), 0.5), std::invalid_argument);

    const SeriesValue twenty = singular_series(t.system(), 20);
    CHECK(twenty.imag_residue <= 1e-8 * std::max(1.0, std::fabs(twenty.value)));
    CHECK(twenty.terms.size() == 20);
    double sum = 0;
    for (double a : twenty.terms) {
        sum += a;
    }
    CHECK(sum == doctest::Approx(twenty.value).epsilon(1e-12));
}

TEST_CASE("series terms against the definition") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        const Toy t = random_toy(rng, trial % 2, 1, 4 + trial % 3);
        const MixedSystem sys = t.system();
        for (long q : {2L, 3L, 4L, 6L}) {
            CAPTURE(trial);
            CAPTURE(q);
            CHECK(series_term(sys, q) == doctest::Approx(direct_term(t, q)).epsilon(1e-10).scale(1));
        }
        // multiplicativity in q
        CHECK(series_term(sys, 6) == doctest::Approx(series_term(sys, 2) * series_term(sys, 3)).epsilon(1e-10).scale(1));
        CHECK(series_term(sys, 15) == doctest::Approx(series_term(sys, 3) * series_term(sys, 5)).epsilon(1e-10).scale(1));
    }
}

TEST_CASE("congruence counts") {
    std::mt19937_64 rng(9);
    const Toy t = random_toy(rng, 1, 1, 5);
    const MixedSystem sys = t.system();
    const CongruenceCount zero = count_congruence(sys, 2, 0);
    CHECK(zero.M == 1);
    CHECK(count_congruence(sys, 2, 1, {CongruenceMethod::exhaustive}).M == brute_congruence(t, 2));
    CHECK(count_congruence(sys, 3, 2).M == brute_congruence(t, 9));
    CHECK_THROWS_AS(count_congruence(sys, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(count_congruence(sys, 3, 3, {CongruenceMethod::exhaustive, 1e3}), ResourceError);

    CHECK(parse_congruence_method("lifting") == CongruenceMethod::lifting);
    CHECK(to_string(CongruenceMethod::residue_dp) == "residue_dp");
    CHECK_THROWS_AS(parse_congruence_method("guess"), std::invalid_argument);
}

TEST_CASE("congruence methods agree") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t s = 3 + trial % 3;
        const Toy t = random_toy(rng, trial % 2, 1 + (trial % 4 == 0), s);
        const MixedSystem sys = t.system();
        for (long p : {2L, 3L, 5L}) {
            for (unsigned i = 1; i <= 3; ++i) {
                CAPTURE(trial);
                CAPTURE(p);
                CAPTURE(i);
                const double m = std::pow(static_cast<double>(p), static_cast<double>(i));
                const BigInt lift = count_congruence(sys, p, i, {CongruenceMethod::lifting, 1e9}).M;
                const BigInt dp = count_congruence(sys, p, i, {CongruenceMethod::residue_dp, 1e9}).M;
                CHECK(lift == dp);
                if (std::pow(m, static_cast<double>(s)) <= 2e6) {
                    CHECK(count_congruence(sys, p, i, {CongruenceMethod::exhaustive, 1e9}).M == dp);
                }
                CHECK(dp <= BigInt(static_cast<long>(std::pow(m, static_cast<double>(s)))));
            }
        }
    }
}

TEST_CASE("jacobian rank mod p") {
    std::mt19937_64 rng(23);
    const Toy t = random_toy(rng, 1, 1, 4);
    each_residue(4, 3, [&](const std::vector<long> &x) {
        const std::vector<std::int64_t> xi(x.begin(), x.end());
        CHECK(jacobian_rank_mod_p(t.system(), xi, 3) == rank_mod(t, x, 3));
    });
}

TEST_CASE("both chi_p routes give the same sequence") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Toy t = random_toy(rng, trial % 2, 1, 4 + trial % 2);
        const MixedSystem sys = t.system();
        for (long p : {2L, 3L, 5L, 7L}) {
            const ChiP a = chi_p(sys, p, 3, {ChiRoute::congruence, 1e-9, 1e9});
            const ChiP b = chi_p(sys, p, 3, {ChiRoute::exponential_sum, 1e-9, 1e9});
            REQUIRE(a.i_used == 3);
            REQUIRE(b.i_used == 3);
            for (std::size_t i = 0; i < a.sequence.size(); ++i) {
                CAPTURE(p);
                CAPTURE(i);
                CHECK(std::fabs(a.sequence[i] - b.sequence[i]) <= 1e-8);
            }
            CHECK(a.sequence.front() == 1.0);
            CHECK(a.value == a.sequence.back());
        }
    }
}

TEST_CASE("chi_p near 1 at large primes") {
    std::mt19937_64 rng(37);
    const Toy t = random_toy(rng, 0, 1, 8);
    for (long p : {53L, 59L, 61L, 67L}) {
        const ChiP c = chi_p(t.system(), p, 2);
        CAPTURE(p);
        CHECK(c.value >= 0.5);
        CHECK(c.value <= 1.5);
    }
    CHECK_THROWS_AS(chi_p(t.system(), 9, 2), std::invalid_argument);
    CHECK_THROWS_AS(chi_p(t.system(), 5, 0), std::invalid_argument);
}

TEST_CASE("chi_p when only the zero solution exists") {
    // -1 is not a square mod 3, so every solution of x^2 + y^2 mod 3^i lies over 0
    const Toy t{{}, {{1, 1}}, 2};
    const ChiP c = chi_p(t.system(), 3, 6, {ChiRoute::congruence, 1e-9, 1e9});
    REQUIRE(c.i_used == 6);
    for (unsigned i = 1; i <= 6; ++i) {
        const long m = static_cast<long>(std::pow(3.0, i));
        std::uint64_t over_zero = 0;
        each_residue(2, m, [&](const std::vector<long> &x) {
            over_zero += forms_mod(t, x, m)[0] == 0 && x[0] % 3 == 0 && x[1] % 3 == 0;
        });
        CHECK(over_zero == brute_congruence(t, m));
        CHECK(c.sequence[i] == doctest::Approx(static_cast<double>(over_zero) / static_cast<double>(m)).epsilon(1e-14));
    }
    CHECK_FALSE(c.stabilized);
    CHECK_FALSE(find_nonsingular_local_solution(t.system(), 3).has_value());
    const ChiP d = chi_p(t.system(), 3, 6);
    CHECK(d.sequence.back() == doctest::Approx(c.sequence.back()).epsilon(1e-9));
}

TEST_CASE("euler product against the truncated series") {
    const Toy t{{{1, 2, 3, -4, -5, 6}}, {}, 6};
    const MixedSystem sys = t.system();
    for (double Y : {10.0, 20.0, 40.0}) {
        double product = 1;
        for (std::int64_t p : primes_up_to(static_cast<std::int64_t>(Y))) {
            unsigned i = 0;
            for (std::int64_t q = p; q <= Y; q *= p) {
                ++i;
            }
            product *= chi_p(sys, p, i).value;
        }
        CAPTURE(Y);
        CHECK(std::fabs(singular_series(sys, Y).value - product) <= 1e-3 * product);
    }
}

TEST_CASE("chi_infinity of the cone") {
    // x^2 + y^2 - z^2 on [-1, 1]^3: the density of the zero set is 2 pi
    ChiInfinityOptions o;
    o.eps = {0.02, 0.01, 0.005};
    o.samples = 2'000'000;
    o.bias_order = 0.5;
    const ChiInfinityResult r = chi_infinity(kCone, o);
    CHECK(std::fabs(r.value - 2 * std::numbers::pi) <= 3 * r.error);
    CHECK(r.error < 0.05);
    CHECK(r.estimates.size() == 3);
    CHECK_FALSE(r.flagged);
}

TEST_CASE("chi_infinity is reproducible and its sigma scales") {
    ChiInfinityOptions o;
    o.eps = {0.2, 0.14, 0.1};
    o.samples = 200'000;
    const ChiInfinityResult a = chi_infinity(kSix.system(), o);
    const ChiInfinityResult again = chi_infinity(kSix.system(), o);
    CHECK(a.value == again.value);
    CHECK(a.estimates == again.estimates);
    o.samples = 400'000;
    const ChiInfinityResult b = chi_infinity(kSix.system(), o);
    const double ratio = b.mc_sigma / a.mc_sigma;
    CHECK(ratio > 0.6);
    CHECK(ratio < 0.82);

    o.eps = {0.1, 0.2};
    CHECK_THROWS_AS(chi_infinity(kSix.system(), o), std::invalid_argument);
    o.eps = {0.1};
    CHECK_THROWS_AS(chi_infinity(kSix.system(), o), std::invalid_argument);
}

TEST_CASE("singular integral") {
    SUBCASE("tiny box") {
        const double Y = 1e-3;
        const SingularIntegral J = singular_integral_J(kCone, Y, 10.0);
        CHECK(J.normalized == doctest::Approx(8.0 * 2 * Y).epsilon(1e-4));
        CHECK(J.value == doctest::Approx(J.normalized * 10.0).epsilon(1e-12));
    }
    SUBCASE("single cubic form against a fixed grid") {
        const Toy t{{{1, -2}}, {}, 2};
        const double Y = 1.5;
        const int n = 2000;
        // v(beta, 0) = 2 int_0^1 cos(2 pi beta x^3) dx by composite Simpson
        auto v = [&](double beta) {
            const double h = 1.0 / n;
            double acc = 0;
            for (int k = 0; k <= n; ++k) {
                const double x = k * h;
                const double wk = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
                acc += wk * std::cos(2 * std::numbers::pi * beta * x * x * x);
            }
            return 2 * acc * h / 3;
        };
        const double h = 2 * Y / n;
        double outer = 0;
        for (int k = 0; k <= n; ++k) {
            const double g = -Y + k * h;
            const double wk = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
            outer += wk * v(g) * v(-2 * g);
        }
        outer *= h / 3;
        const SingularIntegral J = singular_integral_J(t.system(), Y, 3.0);
        CHECK(J.normalized == doctest::Approx(outer).epsilon(1e-6));
        CHECK(std::fabs(J.imag) < 1e-8);
    }
    SUBCASE("approaches chi_infinity") {
        const SingularIntegral J = singular_integral_J(kSix.system(), 20, 1.0, 1e-6);
        ChiInfinityOptions o;
        o.eps = {0.2, 0.14, 0.1};
        o.samples = 2'000'000;
        const ChiInfinityResult c = chi_infinity(kSix.system(), o);
        // the tail beyond Y decays like Y^-2 for six squares
        const double tail = J.normalized / (20.0 * 20.0);
        CHECK(std::fabs(J.normalized - c.value) <= 3 * std::hypot(c.error, tail));
    }
    SUBCASE("dimension guard") {
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(singular_integral_J(random_toy(rng, 2, 3, 20).system(), 1, 1), std::invalid_argument);
        CHECK_THROWS_AS(singular_integral_J(kCone, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("p-adic witnesses") {
    SUBCASE("component trick") {
        // x1 = x2 = 1 solves every row with c1 = -c2
        const Toy t{{{4, -4, 3, 5}}, {{2, -2, 7, 1}}, 4};
        for (long p : {3L, 5L, 7L}) {
            const auto w = find_nonsingular_local_solution(t.system(), p);
            REQUIRE(w.has_value());
            CHECK(w->place == p);
        }
    }
    SUBCASE("exhaustive agreement at p = 3") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 12; ++trial) {
            const Toy t = random_toy(rng, trial % 2, 1, 3 + trial % 4);
            bool brute = false;
            each_residue(t.s, 3, [&](const std::vector<long> &x) {
                const auto v = forms_mod(t, x, 3);
                if (std::all_of(v.begin(), v.end(), [](long e) { return e == 0; }) && rank_mod(t, x, 3) == t.w()) {
                    brute = true;
                }
            });
            const auto w = find_nonsingular_local_solution(t.system(), 3);
            CAPTURE(trial);
            if (brute) {
                REQUIRE(w.has_value());
                CHECK(w->m == 1);
                CHECK(w->delta == 0);
            }
            if (w) {
                const long pm = static_cast<long>(std::pow(3.0, w->m));
                const std::vector<long> x(w->residues.begin(), w->residues.end());
                const auto v = forms_mod(t, x, pm);
                CHECK(std::all_of(v.begin(), v.end(), [](long e) { return e == 0; }));
                CHECK(min_minor_valuation(t, x, 3) == w->delta);
                CHECK(2 * w->delta + 1 <= w->m);
                CHECK((w->m == 1) == brute);
            }
        }
    }
}

TEST_CASE("real witnesses") {
    std::mt19937_64 rng(43);
    const Toy t = random_toy(rng, 1, 0, 5);
    bool indefinite = false;
    for (long c : t.quad[0]) {
        indefinite = indefinite || (c * t.quad[0][0] < 0);
    }
    REQUIRE(indefinite);
    const auto w = find_nonsingular_local_solution(t.system(), 0);
    REQUIRE(w.has_value());
    CHECK(w->place == 0);
    double value = 0, grad = 0;
    for (std::size_t j = 0; j < t.s; ++j) {
        CHECK(std::fabs(w->point[j]) < 1);
        value += t.quad[0][j] * w->point[j] * w->point[j];
        grad += std::pow(2 * t.quad[0][j] * w->point[j], 2);
    }
    CHECK(std::fabs(value) < 1e-10);
    CHECK(std::sqrt(grad) > 1e-6);

    // x^2 + 2 y^2 + 3 z^2 vanishes only at 0
    const MixedSystem definite{IntMatrix{{1, 2, 3}}, IntMatrix(0, 3)};
    CHECK_FALSE(find_nonsingular_local_solution(definite, 0).has_value());
}

TEST_CASE("assembling c") {
    ChiPProvider unit = [](std::int64_t p) {
        ChiP c;
        c.p = p;
        c.value = 1;
        c.i_requested = c.i_used = 1;
        c.sequence = {1, 1};
        c.stabilized = true;
        return c;
    };
    DensityOptions o;
    o.prime_bound = 30;
    o.chi_infinity.eps = {0.2, 0.14, 0.1};
    o.chi_infinity.samples = 200'000;

    SUBCASE("unit local factors give c = chi_infinity") {
        const DensityReport r = compute_constant_c(kSix.system(), o, unit);
        CHECK(r.prime_product == 1.0);
        CHECK(r.tail_constant == 0.0);
        CHECK(r.c == r.chi_infinity.value);
        CHECK(r.real_witness);
        CHECK(r.primes_without_witness.empty());
        CHECK(r.chi_p.size() == primes_up_to(30).size());
        CHECK(r.c > 0);
    }
    SUBCASE("missing real zero is flagged") {
        const MixedSystem definite{IntMatrix{{1, 2, 3}}, IntMatrix(0, 3)};
        const DensityReport r = compute_constant_c(definite, o, unit);
        CHECK_FALSE(r.real_witness);
        CHECK(r.flagged);
        bool found = false;
        for (const auto &f : r.flags) {
            found = found || f.find("real zero") != std::string::npos;
        }
        CHECK(found);
    }
    SUBCASE("tail constant from large primes") {
        ChiPProvider bumped = [&](std::int64_t p) {
            ChiP c = unit(p);
            c.value = 1 + 2.0 / static_cast<double>(p * p);
            return c;
        };
        o.search_witnesses = false;
        const DensityReport r = compute_constant_c(kSix.system(), o, bumped);
        CHECK(r.tail_constant == doctest::Approx(2.0));
        CHECK(r.tail_relative == doctest::Approx(std::expm1(2.0 / 30)));
        CHECK(r.c_error >= r.c * r.tail_relative);
    }
    SUBCASE("parameter checks") {
        o.prime_bound = 1;
        CHECK_THROWS_AS(compute_constant_c(kSix.system(), o, unit), std::invalid_argument);
    }
}
