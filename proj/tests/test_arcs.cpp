#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hasse/arcs.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace hasse;

namespace {

ArcParams one_d(double P) {
    return ArcParams{P, ArcLevel::cubic_1d};
}

// A point near a/q at a distance drawn around the arc radius, so that both
// outcomes occur.
double near_rational(std::mt19937_64 &rng, std::int64_t qmax, double radius) {
    std::uniform_int_distribution<std::int64_t> qd(1, std::max<std::int64_t>(1, qmax));
    const std::int64_t q = qd(rng);
    std::uniform_int_distribution<std::int64_t> ad(0, q - 1);
    std::uniform_real_distribution<double> off(-2.0, 2.0);
    const double x = static_cast<double>(ad(rng)) / static_cast<double>(q) + off(rng) * radius / static_cast<double>(q);
    return x - std::floor(x);
}

} // namespace

TEST_CASE("parameters") {
    CHECK(one_d(16).max_q() == 8);
    CHECK(one_d(81).max_q() == 27);
    CHECK(one_d(80).max_q() == 26);
    CHECK(one_d(10000).max_q() == 1000);
    CHECK_THROWS_AS(classify_1d(0.5, one_d(1.5)), std::invalid_argument);
    ArcParams n{4096, ArcLevel::N_level, 2, 1};
    CHECK(n.X() == doctest::Approx(2.0));
    CHECK(n.max_q() == 2);
    CHECK(parse_arc_level("M") == ArcLevel::M_level);
    CHECK_THROWS_AS(parse_arc_level("Q"), std::invalid_argument);
    CHECK(euler_phi(1) == 1);
    CHECK(euler_phi(12) == 4);
    CHECK(euler_phi(97) == 96);
}

TEST_CASE("one-dimensional examples") {
    const ArcLabel half = classify_1d(0.5, one_d(256));
    CHECK(half.major);
    CHECK(half.q == 2);
    CHECK(half.a == std::vector<std::int64_t>{1});

    CHECK_FALSE(classify_1d(0.6180339887, one_d(10000)).major);
    CHECK_FALSE(classify_1d_scan(0.6180339887, one_d(10000)).major);

    const double radius = std::pow(1000.0, -2.25);
    const ArcLabel third = classify_1d(1.0 / 3.0 + 0.5 * radius / 3.0, one_d(1000));
    CHECK(third.major);
    CHECK(third.q == 3);
    CHECK(third.a == std::vector<std::int64_t>{1});

    // near zero the numerator is reported as q
    const ArcLabel zero = classify_1d(1e-12, one_d(100));
    CHECK(zero.major);
    CHECK(zero.q == 1);
    CHECK(zero.a == std::vector<std::int64_t>{1});
    CHECK(classify_1d(1.0 - 1e-12, one_d(100)).q == 1);
}

TEST_CASE("boundary ties are major") {
    // P = 16: radius 2^-9 exactly, so 1/2 + 2^-10 sits on the boundary for q = 2
    const double eta = 0.5 + std::ldexp(1.0, -10);
    const ArcLabel label = classify_1d(eta, one_d(16));
    CHECK(label.major);
    CHECK(label.q == 2);
    CHECK_FALSE(classify_1d(0.5 + std::ldexp(1.0, -10) + 1e-12, one_d(16)).q == 2);
}

TEST_CASE("continued fractions agree with the exhaustive scan") {
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double P : {2.0, 5.0, 16.0, 37.0, 64.0}) {
        const ArcParams params = one_d(P);
        const double radius = std::pow(P, -2.25);
        int majors = 0;
        for (int i = 0; i < 5000; ++i) {
            const double eta = i % 2 ? u(rng) : near_rational(rng, params.max_q(), radius);
            const ArcLabel fast = classify_1d(eta, params);
            const ArcLabel slow = classify_1d_scan(eta, params);
            REQUIRE(fast.major == slow.major);
            majors += fast.major;
            if (fast.major) {
                CHECK(fast.q == slow.q);
                CHECK(fast.a == slow.a);
                CHECK(fast.a[0] >= 1);
                CHECK(fast.a[0] <= fast.q);
                CHECK(std::gcd(fast.q, fast.a[0]) == 1);
            }
        }
        CHECK(majors > 100);
    }
}

TEST_CASE("multi-dimensional classification") {
    ArcParams m{1e6, ArcLevel::M_level, 3, 2};
    const ArcLabel thirds = classify_multi({1.0 / 3, 2.0 / 3, 1.0 / 3}, m);
    CHECK(thirds.major);
    CHECK(thirds.q == 3);
    CHECK(thirds.a == std::vector<std::int64_t>{1, 2, 1});

    ArcParams n{1e4, ArcLevel::N_level, 2, 1};
    const std::vector<double> golden{0.6180339887498949, 0.0};
    CHECK_FALSE(classify_multi(golden, n).major);
    CHECK_FALSE(classify_multi_scan(golden, n).major);
    CHECK_THROWS_AS(classify_multi({0.1}, n), std::invalid_argument);

    // a = 0 coordinates are reported as q
    const ArcLabel origin = classify_multi({0.0, 0.0}, n);
    CHECK(origin.major);
    CHECK(origin.q == 1);
    CHECK(origin.a == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("multi-dimensional fast path matches the scan") {
    std::mt19937_64 rng(97);
    for (double P : {5.0, 20.0, 300.0, 5000.0}) {
        for (ArcLevel level : {ArcLevel::M_level, ArcLevel::N_level}) {
            ArcParams params{P, level, 3, 2};
            const std::int64_t qmax = params.max_q();
            std::uniform_int_distribution<std::int64_t> qd(1, std::max<std::int64_t>(1, qmax));
            std::uniform_real_distribution<double> off(-1.5, 1.5);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            int majors = 0;
            for (int i = 0; i < 2000; ++i) {
                const std::int64_t q = qd(rng);
                std::uniform_int_distribution<std::int64_t> ad(0, q - 1);
                std::vector<double> alpha;
                for (std::size_t k = 0; k < 3; ++k) {
                    const unsigned deg = k < 2 ? 3 : 2;
                    double r = params.radius(deg);
                    if (level == ArcLevel::M_level) {
                        r /= static_cast<double>(q);
                    }
                    alpha.push_back(i % 5 == 0 ? u(rng) : static_cast<double>(ad(rng)) / q + off(rng) * r);
                }
                const ArcLabel fast = classify_multi(alpha, params);
                const ArcLabel slow = classify_multi_scan(alpha, params);
                REQUIRE(fast.major == slow.major);
                majors += fast.major;
                if (fast.major) {
                    CHECK(fast.q == slow.q);
                    CHECK(fast.a == slow.a);
                }
                // integer shifts do not matter
                std::vector<double> shifted = alpha;
                shifted[0] += 3.0;
                shifted[2] -= 2.0;
                CHECK(classify_multi(shifted, params).major == fast.major);
            }
            CHECK(majors > 50);
        }
    }
}

TEST_CASE("N arcs lie inside M arcs") {
    const double P = 1e4;
    ArcParams n{P, ArcLevel::N_level, 2, 1};
    ArcParams m{P, ArcLevel::M_level, 2, 1};
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::int64_t> qd(1, n.max_q());
    std::uniform_real_distribution<double> off(-1.2, 1.2);
    int inside = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::int64_t q = qd(rng);
        std::uniform_int_distribution<std::int64_t> ad(0, q - 1);
        const std::vector<double> alpha{static_cast<double>(ad(rng)) / q + off(rng) * n.radius(3),
                                        static_cast<double>(ad(rng)) / q + off(rng) * n.radius(2)};
        if (classify_multi(alpha, n).major) {
            ++inside;
            CHECK(classify_multi(alpha, m).major);
        }
    }
    CHECK(inside > 1000);
}

TEST_CASE("no point has two witnesses when boxes are separated") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double P : {16.0, 64.0}) {
        const ArcParams params = one_d(P);
        REQUIRE(2.0 * std::pow(P, -2.25) * params.max_q() < 1.0);
        for (int i = 0; i < 3000; ++i) {
            const double eta = near_rational(rng, params.max_q(), std::pow(P, -2.25));
            CHECK(all_witness_denominators({eta}, params).size() <= 1);
        }
    }
    ArcParams n{1e6, ArcLevel::N_level, 1, 1};
    REQUIRE(2 * std::pow(n.X(), 3) * std::pow(1e6, -3) < 1);
    for (int i = 0; i < 3000; ++i) {
        CHECK(all_witness_denominators({u(rng)}, n).size() <= 1);
    }
}

TEST_CASE("arc measure") {
    const ArcMeasure m16 = arc_measure(one_d(16));
    CHECK(m16.exact);
    CHECK(m16.measure == doctest::Approx(0.0201).epsilon(0.01));

    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int samples = 1000000;
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        hits += classify_1d(u(rng), one_d(16)).major;
    }
    const double freq = static_cast<double>(hits) / samples;
    const double sigma = std::sqrt(m16.measure * (1 - m16.measure) / samples);
    CHECK(std::fabs(freq - m16.measure) <= 3 * sigma);

    double prev = 0;
    for (double e : {-2.6, -2.25, -2.0, -1.8}) {
        ArcMeasureOverrides o;
        o.radius_exponent = e;
        const ArcMeasure m = arc_measure(one_d(16), o);
        CHECK(m.measure >= prev);
        CHECK(m.measure <= 1.0);
        prev = m.measure;
    }
    ArcMeasureOverrides wide;
    wide.radius_exponent = 0.0;
    const ArcMeasure capped = arc_measure(one_d(16), wide);
    CHECK(capped.measure == 1.0);
    CHECK_FALSE(capped.exact);

    const ArcMeasure mm = arc_measure(ArcParams{1e4, ArcLevel::M_level, 2, 1});
    CHECK(mm.measure > 0);
    CHECK(mm.measure <= 1);
    const ArcMeasure nn = arc_measure(ArcParams{1e4, ArcLevel::N_level, 2, 1});
    CHECK(nn.measure <= mm.measure);
}
