#include "hasse/arcs.hpp"

#include "hasse/expsum.hpp"
#include "hasse/int_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hasse {

std::string to_string(ArcLevel level) {
    switch (level) {
    case ArcLevel::cubic_1d:
        return "1d";
    case ArcLevel::M_level:
        return "M";
    case ArcLevel::N_level:
        return "N";
    }
    return "?";
}

ArcLevel parse_arc_level(const std::string &text) {
    if (text == "1d") {
        return ArcLevel::cubic_1d;
    }
    if (text == "M") {
        return ArcLevel::M_level;
    }
    if (text == "N") {
        return ArcLevel::N_level;
    }
    throw std::invalid_argument("unknown arc level '" + text + "' (expected 1d, M or N)");
}

void ArcParams::validate() const {
    if (!(P >= 2) || !std::isfinite(P)) {
        throw std::invalid_argument("ArcParams: P must be at least 2");
    }
    if (level != ArcLevel::cubic_1d && (w == 0 || r3 > w)) {
        throw std::invalid_argument("ArcParams: need w >= 1 and r3 <= w");
    }
}

double ArcParams::X() const {
    return std::pow(P, 1.0 / (6.0 * static_cast<double>(w)));
}

namespace {

// floor(P^{3/4}), exact when P is an integer.
std::int64_t floor_p34(double P) {
    auto q = static_cast<std::int64_t>(std::floor(std::pow(P, 0.75)));
    if (P == std::floor(P) && P < 1e9) {
        const auto p = static_cast<__int128>(P);
        const __int128 p3 = p * p * p;
        auto fourth = [](std::int64_t v) { return static_cast<__int128>(v) * v * v * v; };
        while (fourth(q + 1) <= p3) {
            ++q;
        }
        while (q > 0 && fourth(q) > p3) {
            --q;
        }
    }
    return q;
}

} // namespace

std::int64_t ArcParams::max_q() const {
    if (level == ArcLevel::N_level) {
        return static_cast<std::int64_t>(std::floor(X()));
    }
    return floor_p34(P);
}

double ArcParams::radius(unsigned degree) const {
    switch (level) {
    case ArcLevel::cubic_1d:
        return std::pow(P, -2.25);
    case ArcLevel::M_level:
        return std::pow(P, 0.75 - static_cast<double>(degree));
    case ArcLevel::N_level:
        return X() * std::pow(P, -static_cast<double>(degree));
    }
    return 0.0;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    return std::gcd(a, b);
}

std::int64_t euler_phi(std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("euler_phi: n must be positive");
    }
    std::int64_t result = n;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) {
                n /= p;
            }
            result -= result / p;
        }
    }
    if (n > 1) {
        result -= result / n;
    }
    return result;
}

namespace {

// |q eta - a| for the nearest integer a, from the exact binary value of eta.
long double dist_to_int(double eta, std::int64_t q) {
    const long double f = frac_product(eta, q);
    return std::min(f, 1.0L - f);
}

// Nearest integer to q * eta for eta in [0, 1), exactly.
std::int64_t nearest_numerator(double eta, std::int64_t q) {
    if (eta == 0.0) {
        return 0;
    }
    int e = 0;
    const double m = std::frexp(eta, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    const int k = 53 - e;
    const __int128 prod = static_cast<__int128>(mant) * q;
    const __int128 whole = k <= 126 ? (prod >> k) : 0;
    return static_cast<std::int64_t>(whole) + (frac_product(eta, q) > 0.5L ? 1 : 0);
}

std::int64_t normalize_numerator(std::int64_t a, std::int64_t q) {
    a %= q;
    if (a <= 0) {
        a += q;
    }
    return a;
}

// Denominators of the continued-fraction convergents of eta, ascending and
// capped at qmax. Computed on the exact dyadic value of eta.
template <class Int>
std::vector<std::int64_t> convergent_denominators_impl(Int num, Int den, std::int64_t qmax) {
    std::vector<std::int64_t> out;
    Int k_prev2 = 1, k_prev1 = 0;
    while (true) {
        const Int a = num / den;
        const Int k = a * k_prev1 + k_prev2;
        if (k > Int(qmax)) {
            break;
        }
        if constexpr (std::is_same_v<Int, BigInt>) {
            out.push_back(k.get_si());
        } else {
            out.push_back(static_cast<std::int64_t>(k));
        }
        const Int rem = num - a * den;
        if (rem == 0) {
            break;
        }
        num = den;
        den = rem;
        k_prev2 = k_prev1;
        k_prev1 = k;
    }
    return out;
}

std::vector<std::int64_t> convergent_denominators(double eta, std::int64_t qmax) {
    if (eta == 0.0) {
        return {1};
    }
    int e = 0;
    const double m = std::frexp(eta, &e);
    std::int64_t mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    e -= 53;
    if (e >= 0) {
        return {1};
    }
    int k = -e;
    while (k > 0 && mant % 2 == 0) {
        mant /= 2;
        --k;
    }
    if (k <= 120) {
        return convergent_denominators_impl<__int128>(mant, static_cast<__int128>(1) << k, qmax);
    }
    BigInt den = 1;
    den <<= k;
    return convergent_denominators_impl<BigInt>(BigInt(static_cast<long>(mant)), den, qmax);
}

// Least q <= qmax with ||q eta|| <= radius, or 0. Such a q beats every
// smaller denominator, so it is a convergent denominator.
std::int64_t least_denominator(double eta, std::int64_t qmax, long double radius) {
    for (std::int64_t q : convergent_denominators(eta, qmax)) {
        if (q >= 1 && dist_to_int(eta, q) <= radius) {
            return q;
        }
    }
    return 0;
}

std::vector<unsigned> degrees(const ArcParams &params, std::size_t coords) {
    if (coords != params.w) {
        throw std::invalid_argument("classify_multi: expected " + std::to_string(params.w) + " coordinates, got " +
                                    std::to_string(coords));
    }
    std::vector<unsigned> out(coords, 2);
    for (std::size_t i = 0; i < params.r3; ++i) {
        out[i] = 3;
    }
    return out;
}

// Checks one q against every coordinate, filling the numerators.
bool witness_at(const std::vector<double> &alpha, const std::vector<unsigned> &deg, const ArcParams &params,
                std::int64_t q, std::vector<std::int64_t> &a) {
    a.assign(alpha.size(), 0);
    std::int64_t g = q;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        long double bound = params.radius(deg[i]);
        if (params.level == ArcLevel::N_level) {
            bound *= static_cast<long double>(q);
        }
        if (dist_to_int(alpha[i], q) > bound) {
            return false;
        }
        a[i] = normalize_numerator(nearest_numerator(alpha[i], q), q);
        g = std::gcd(g, a[i]);
    }
    return g == 1;
}

std::vector<double> wrapped(const std::vector<double> &alpha) {
    std::vector<double> out(alpha.size());
    std::transform(alpha.begin(), alpha.end(), out.begin(), wrap_unit);
    return out;
}

} // namespace

ArcLabel classify_1d(double eta, const ArcParams &params) {
    params.validate();
    eta = wrap_unit(eta);
    const std::int64_t q = least_denominator(eta, params.max_q(), std::pow(static_cast<long double>(params.P), -2.25L));
    if (q == 0) {
        return {};
    }
    return {true, q, {normalize_numerator(nearest_numerator(eta, q), q)}};
}

ArcLabel classify_1d_scan(double eta, const ArcParams &params) {
    params.validate();
    eta = wrap_unit(eta);
    const long double radius = std::pow(static_cast<long double>(params.P), -2.25L);
    for (std::int64_t q = 1; q <= params.max_q(); ++q) {
        if (dist_to_int(eta, q) <= radius) {
            return {true, q, {normalize_numerator(nearest_numerator(eta, q), q)}};
        }
    }
    return {};
}

ArcLabel classify_multi_scan(const std::vector<double> &alpha_in, const ArcParams &params) {
    params.validate();
    const auto alpha = wrapped(alpha_in);
    const auto deg = degrees(params, alpha.size());
    std::vector<std::int64_t> a;
    for (std::int64_t q = 1; q <= params.max_q(); ++q) {
        if (witness_at(alpha, deg, params, q, a)) {
            return {true, q, a};
        }
    }
    return {};
}

ArcLabel classify_multi(const std::vector<double> &alpha_in, const ArcParams &params) {
    params.validate();
    if (params.level == ArcLevel::cubic_1d) {
        if (alpha_in.size() != 1) {
            throw std::invalid_argument("classify_multi: the 1d level takes one coordinate");
        }
        return classify_1d(alpha_in[0], params);
    }
    const auto alpha = wrapped(alpha_in);
    const auto deg = degrees(params, alpha.size());
    const std::int64_t qmax = params.max_q();
    if (params.level == ArcLevel::N_level) {
        return classify_multi_scan(alpha, params);  // X is tiny
    }
    for (unsigned d : deg) {
        if (2.0L * params.radius(d) * qmax >= 1.0L) {
            return classify_multi_scan(alpha, params);
        }
    }
    // With 2 R qmax < 1 every admissible q for a coordinate is a multiple of
    // that coordinate's least denominator, and larger multiples only move
    // further away, so the lcm is the only candidate.
    std::int64_t q = 1;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const std::int64_t qi = least_denominator(alpha[i], qmax, params.radius(deg[i]));
        if (qi == 0) {
            return {};
        }
        q = std::lcm(q, qi);
        if (q > qmax) {
            return {};
        }
    }
    std::vector<std::int64_t> a;
    if (witness_at(alpha, deg, params, q, a)) {
        return {true, q, a};
    }
    return {};
}

std::vector<std::int64_t> all_witness_denominators(const std::vector<double> &alpha_in, const ArcParams &params) {
    params.validate();
    std::vector<std::int64_t> out;
    if (params.level == ArcLevel::cubic_1d) {
        if (alpha_in.size() != 1) {
            throw std::invalid_argument("all_witness_denominators: the 1d level takes one coordinate");
        }
        const double eta = wrap_unit(alpha_in[0]);
        const long double radius = std::pow(static_cast<long double>(params.P), -2.25L);
        for (std::int64_t q = 1; q <= params.max_q(); ++q) {
            const std::int64_t a = nearest_numerator(eta, q);
            if (dist_to_int(eta, q) <= radius && std::gcd(q, normalize_numerator(a, q)) == 1) {
                out.push_back(q);
            }
        }
        return out;
    }
    const auto alpha = wrapped(alpha_in);
    const auto deg = degrees(params, alpha.size());
    std::vector<std::int64_t> a;
    for (std::int64_t q = 1; q <= params.max_q(); ++q) {
        if (witness_at(alpha, deg, params, q, a)) {
            out.push_back(q);
        }
    }
    return out;
}

namespace {

// Number of a in [1, q]^w with gcd(q, a) = 1.
long double jordan_totient(std::int64_t q, std::size_t w) {
    long double result = std::pow(static_cast<long double>(q), static_cast<long double>(w));
    std::int64_t n = q;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) {
                n /= p;
            }
            result *= 1.0L - std::pow(static_cast<long double>(p), -static_cast<long double>(w));
        }
    }
    if (n > 1) {
        result *= 1.0L - std::pow(static_cast<long double>(n), -static_cast<long double>(w));
    }
    return result;
}

} // namespace

ArcMeasure arc_measure(const ArcParams &params, const ArcMeasureOverrides &overrides) {
    params.validate();
    long double total = 0;
    bool exact = true;
    const long double P = params.P;
    if (params.level == ArcLevel::cubic_1d) {
        const auto qmax = static_cast<std::int64_t>(std::floor(std::pow(P, static_cast<long double>(overrides.q_exponent))));
        const long double delta = std::pow(P, static_cast<long double>(overrides.radius_exponent));
        for (std::int64_t q = 1; q <= qmax; ++q) {
            total += static_cast<long double>(euler_phi(q)) * 2.0L * delta / q;
        }
        exact = 2.0L * delta * qmax < 1.0L;
    } else if (params.level == ArcLevel::M_level) {
        const auto qmax = static_cast<std::int64_t>(std::floor(std::pow(P, static_cast<long double>(overrides.q_exponent))));
        std::vector<long double> radii;
        for (std::size_t i = 0; i < params.w; ++i) {
            const unsigned k = i < params.r3 ? 3u : 2u;
            radii.push_back(std::pow(P, static_cast<long double>(overrides.q_exponent) - k));
            exact = exact && 2.0L * radii.back() * qmax < 1.0L;
        }
        for (std::int64_t q = 1; q <= qmax; ++q) {
            long double box = 1;
            for (long double r : radii) {
                box *= std::min(1.0L, 2.0L * r / q);
            }
            total += jordan_totient(q, params.w) * box;
        }
    } else {
        const long double X = params.X();
        const auto qmax = static_cast<std::int64_t>(std::floor(X));
        long double box = 1;
        for (std::size_t i = 0; i < params.w; ++i) {
            const unsigned k = i < params.r3 ? 3u : 2u;
            const long double side = 2.0L * X * std::pow(P, -static_cast<long double>(k));
            box *= std::min(1.0L, side);
            exact = exact && side * X * X < 1.0L;
        }
        for (std::int64_t q = 1; q <= qmax; ++q) {
            total += jordan_totient(q, params.w) * box;
        }
    }
    if (total > 1.0L) {
        total = 1.0L;
        exact = false;
    }
    return {static_cast<double>(total), exact};
}

} // namespace hasse
