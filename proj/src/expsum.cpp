#include "hasse/expsum.hpp"

#include "hasse/arcs.hpp"
#include "hasse/errors.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <stdexcept>

namespace hasse {

TorusPoint::TorusPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    for (double &c : coords_) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("TorusPoint: non-finite coordinate");
        }
        c = wrap_unit(c);
    }
}

double wrap_unit(double t) {
    double r = t - std::floor(t);
    if (r >= 1.0) {
        r = 0.0;
    }
    return r;
}

long double frac_product(double eta, std::int64_t n) {
    if (eta == 0.0 || n == 0) {
        return 0.0L;
    }
    if (!std::isfinite(eta)) {
        throw std::invalid_argument("frac_product: non-finite argument");
    }
    int e = 0;
    const double m = std::frexp(eta, &e);
    const std::int64_t mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    e -= 53;
    if (e >= 0) {
        return 0.0L;  // eta is an integer
    }
    const int k = -e;
    const __int128 prod = static_cast<__int128>(mant) * n;
    long double r;
    if (k <= 126) {
        const __int128 mask = (static_cast<__int128>(1) << k) - 1;
        r = std::ldexp(static_cast<long double>(prod & mask), -k);
    } else {
        r = std::ldexp(static_cast<long double>(prod), -k);
        if (r < 0) {
            r += 1.0L;
        }
    }
    if (r >= 1.0L) {
        r -= 1.0L;
    }
    return r;
}

Complex unit_phase(long double t) {
    if (t > 0.5L) {
        t -= 1.0L;
    }
    const long double angle = 2.0L * std::numbers::pi_v<long double> * t;
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

namespace {

void check_sum_P(long P) {
    if (P < 0 || P > kMaxSumP) {
        throw std::invalid_argument("Weyl sum: P must lie in [0, " + std::to_string(kMaxSumP) + "]");
    }
}

long double wrap_ld(long double t) {
    t -= std::floor(t);
    return t >= 1.0L ? 0.0L : t;
}

} // namespace

Complex eval_g(double eta, long P) {
    return eval_f(eta, 0.0, P);
}

Complex eval_f(double alpha, double beta, long P) {
    check_sum_P(P);
    long double re = 0, im = 0;
    for (long x = -P; x <= P; ++x) {
        const std::int64_t x2 = static_cast<std::int64_t>(x) * x;
        const long double t = wrap_ld(frac_product(alpha, x2 * x) + frac_product(beta, x2));
        const Complex z = unit_phase(t);
        re += z.real();
        im += z.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

TorusPoint eval_theta(const IntMatrix &d, const TorusPoint &eta) {
    if (eta.size() != d.rows()) {
        throw std::invalid_argument("eval_theta: " + std::to_string(eta.size()) + " coordinates for " +
                                    std::to_string(d.rows()) + " rows");
    }
    std::vector<double> out(d.cols());
    for (std::size_t j = 0; j < d.cols(); ++j) {
        long double t = 0;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            t += frac_product(eta[i], d.entry_i64(i, j));
        }
        out[j] = static_cast<double>(wrap_ld(t));
    }
    return TorusPoint(std::move(out));
}

std::vector<GammaPair> eval_gamma(const MixedSystem &sys, const TorusPoint &alpha) {
    sys.validate();
    if (alpha.size() != sys.r3() + sys.r2()) {
        throw std::invalid_argument("eval_gamma: expected " + std::to_string(sys.r3() + sys.r2()) +
                                    " coordinates, got " + std::to_string(alpha.size()));
    }
    const std::size_t s = std::max(sys.c3.cols(), sys.c2.cols());
    std::vector<GammaPair> out(s);
    for (std::size_t j = 0; j < s; ++j) {
        long double t3 = 0, t2 = 0;
        for (std::size_t i = 0; i < sys.r3(); ++i) {
            t3 += frac_product(alpha[i], sys.c3.entry_i64(i, j));
        }
        for (std::size_t i = 0; i < sys.r2(); ++i) {
            t2 += frac_product(alpha[sys.r3() + i], sys.c2.entry_i64(i, j));
        }
        out[j] = {static_cast<double>(wrap_ld(t3)), static_cast<double>(wrap_ld(t2))};
    }
    return out;
}

Complex complete_sum_S(std::int64_t q, std::int64_t a3, std::int64_t a2) {
    if (q < 1) {
        throw std::invalid_argument("complete_sum_S: q must be at least 1");
    }
    const __int128 Q = q;
    const __int128 b3 = ((a3 % Q) + Q) % Q;
    const __int128 b2 = ((a2 % Q) + Q) % Q;
    long double re = 0, im = 0;
    for (std::int64_t x = 1; x <= q; ++x) {
        const __int128 x2 = static_cast<__int128>(x) * x % Q;
        const __int128 x3 = x2 * x % Q;
        const __int128 num = (b3 * x3 + b2 * x2) % Q;
        const Complex z = unit_phase(static_cast<long double>(num) / static_cast<long double>(q));
        re += z.real();
        im += z.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

namespace {

// 15-point Kronrod nodes on [-1, 1] with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    Complex value;
    double error;
    bool operator<(const Panel &o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod(F &&f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const Complex fc = f(c);
    Complex k = fc * kWgk[7];
    Complex g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const Complex sum = f(c - dx) + f(c + dx);
        k += sum * kWgk[j];
        if (j % 2 == 1) {
            g += sum * kWg[j / 2];
        }
    }
    k *= h;
    g *= h;
    return {a, b, k, std::abs(k - g)};
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<Complex(double)> &f, double a, double b, double tol,
                                    std::size_t initial_panels, std::size_t max_panels) {
    if (!(tol > 0)) {
        throw std::invalid_argument("integrate_adaptive: tol must be positive");
    }
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("integrate_adaptive: need finite a <= b");
    }
    if (a == b) {
        return {Complex(0, 0), 0.0, 0};
    }
    if (initial_panels == 0 || initial_panels > max_panels) {
        throw ConvergenceError("integrate_adaptive: initial subdivision exceeds the panel budget",
                               std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity());
    }
    const std::size_t n0 = initial_panels;
    std::priority_queue<Panel> heap;
    double total_error = 0;
    for (std::size_t i = 0; i < n0; ++i) {
        const double lo = a + (b - a) * static_cast<double>(i) / static_cast<double>(n0);
        const double hi = i + 1 == n0 ? b : a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n0);
        Panel p = gauss_kronrod(f, lo, hi);
        total_error += p.error;
        heap.push(p);
    }
    std::size_t panels = n0;
    while (total_error > tol && panels < max_panels) {
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;  // cannot split further in double precision
        }
        Panel left = gauss_kronrod(f, worst.a, mid);
        Panel right = gauss_kronrod(f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }

    Complex value = 0;
    double error = 0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    if (error > tol) {
        throw ConvergenceError("integrate_adaptive: tolerance not reached within the panel budget", value.real(),
                               error, value.imag());
    }
    return {value, error, panels};
}

OscillatoryResult oscillatory_v(double beta3, double beta2, double P, double tol, std::size_t max_panels) {
    if (!(tol > 0)) {
        throw std::invalid_argument("oscillatory_v: tol must be positive");
    }
    if (!(P >= 0) || !std::isfinite(beta3) || !std::isfinite(beta2)) {
        throw std::invalid_argument("oscillatory_v: need finite beta and P >= 0");
    }
    if (P == 0) {
        return {Complex(0, 0), 0.0, 0};
    }
    auto integrand = [&](double z) {
        const long double zl = z;
        const long double phase = (static_cast<long double>(beta3) * zl + beta2) * zl * zl;
        return unit_phase(wrap_ld(phase));
    };

    // about one oscillation per initial panel
    const double width = 1.0 / (3.0 * std::fabs(beta3) * P * P + 2.0 * std::fabs(beta2) * P + 1.0);
    const double initial = std::ceil(2.0 * P / width);
    if (initial > static_cast<double>(max_panels)) {
        throw ConvergenceError("oscillatory_v: initial subdivision exceeds the panel budget",
                               std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity());
    }
    try {
        return integrate_adaptive(integrand, -P, P, tol, static_cast<std::size_t>(initial), max_panels);
    } catch (const ConvergenceError &e) {
        throw ConvergenceError("oscillatory_v: tolerance not reached within the panel budget", e.best_estimate(),
                               e.error_estimate(), e.best_imag());
    }
}

namespace {

using LaurentPoly = std::map<long, BigInt>;

LaurentPoly multiply(const LaurentPoly &a, const LaurentPoly &b) {
    LaurentPoly out;
    for (const auto &[ea, ca] : a) {
        for (const auto &[eb, cb] : b) {
            out[ea + eb] += ca * cb;
        }
    }
    return out;
}

} // namespace

BigInt even_moment_by_expansion(long coefficient, unsigned power, long P) {
    if (power == 0 || power % 2 != 0) {
        throw std::invalid_argument("even_moment_by_expansion: power must be even and positive");
    }
    if (P < 0 || P > 200) {
        throw std::invalid_argument("even_moment_by_expansion: P must lie in [0, 200]");
    }
    LaurentPoly g, gbar;
    for (long x = -P; x <= P; ++x) {
        g[coefficient * x * x * x] += 1;
        gbar[-coefficient * x * x * x] += 1;
    }
    const LaurentPoly h = multiply(g, gbar);  // |g|^2
    LaurentPoly acc = h;
    for (unsigned k = 1; k < power / 2; ++k) {
        acc = multiply(acc, h);
    }
    auto it = acc.find(0);
    return it == acc.end() ? BigInt(0) : it->second;
}

MinorArcSample minor_arc_sup_check(long P, const std::vector<double> &etas) {
    if (P < 16) {
        throw std::invalid_argument("minor_arc_sup_check: P must be at least 16");
    }
    ArcParams params{static_cast<double>(P), ArcLevel::cubic_1d};
    MinorArcSample out{0.0, 0.0, std::pow(static_cast<double>(P), 0.75), 0, 0};
    for (double eta : etas) {
        const double t = wrap_unit(eta);
        if (classify_1d(t, params).major) {
            ++out.rejected_major;
            continue;
        }
        ++out.minor_points;
        const double mag = std::abs(eval_g(t, P));
        if (mag > out.max_abs_g) {
            out.max_abs_g = mag;
            out.argmax_eta = t;
        }
    }
    if (out.minor_points == 0) {
        throw std::runtime_error("minor_arc_sup_check: no sample lies on the minor arcs");
    }
    return out;
}

MinorArcSample minor_arc_sup_check(long P, std::size_t sample_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> etas(sample_count);
    for (double &e : etas) {
        e = u(rng);
    }
    return minor_arc_sup_check(P, etas);
}

} // namespace hasse
