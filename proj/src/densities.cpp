#include "hasse/densities.hpp"

#include "hasse/errors.hpp"
#include "hasse/expsum.hpp"
#include "hasse/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hasse {

std::vector<std::int64_t> primes_up_to(std::int64_t n) {
    std::vector<std::int64_t> out;
    if (n < 2) {
        return out;
    }
    std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
    for (std::int64_t i = 2; i <= n; ++i) {
        if (composite[static_cast<std::size_t>(i)]) {
            continue;
        }
        out.push_back(i);
        for (std::int64_t j = i * i; j <= n; j += i) {
            composite[static_cast<std::size_t>(j)] = true;
        }
    }
    return out;
}

bool is_prime(std::int64_t n) {
    if (n < 2) {
        return false;
    }
    for (std::int64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            return false;
        }
    }
    return true;
}

namespace {

std::int64_t mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

std::int64_t mod128(__int128 a, std::int64_t m) {
    const __int128 r = a % m;
    return static_cast<std::int64_t>(r < 0 ? r + m : r);
}

// p^e, or -1 when it exceeds limit.
std::int64_t bounded_pow(std::int64_t p, unsigned e, std::int64_t limit) {
    std::int64_t r = 1;
    for (unsigned k = 0; k < e; ++k) {
        if (r > limit / p) {
            return -1;
        }
        r *= p;
    }
    return r;
}

// The w forms as rows of (degree, coefficients): cubic rows first.
struct Forms {
    std::size_t s = 0;
    std::vector<int> degree;
    std::vector<std::vector<std::int64_t>> coef;

    std::size_t w() const { return degree.size(); }
};

Forms forms_of(const MixedSystem &sys) {
    sys.validate();
    Forms f;
    f.s = sys.s();
    for (std::size_t i = 0; i < sys.r3(); ++i) {
        f.degree.push_back(3);
        std::vector<std::int64_t> row(f.s);
        for (std::size_t j = 0; j < f.s; ++j) {
            row[j] = sys.c3.entry_i64(i, j);
        }
        f.coef.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < sys.r2(); ++i) {
        f.degree.push_back(2);
        std::vector<std::int64_t> row(f.s);
        for (std::size_t j = 0; j < f.s; ++j) {
            row[j] = sys.c2.entry_i64(i, j);
        }
        f.coef.push_back(std::move(row));
    }
    return f;
}

// c x^k mod m for every row, as a vector.
std::vector<std::int64_t> contribution(const Forms &f, std::size_t j, std::int64_t x, std::int64_t m) {
    std::vector<std::int64_t> v(f.w());
    const __int128 x2 = static_cast<__int128>(x) * x % m;
    const __int128 x3 = x2 * x % m;
    for (std::size_t r = 0; r < f.w(); ++r) {
        v[r] = mod128(static_cast<__int128>(mod(f.coef[r][j], m)) * (f.degree[r] == 3 ? x3 : x2), m);
    }
    return v;
}

void check_imag(double re, double im, const std::string &where) {
    if (std::fabs(im) > 1e-8 * std::max(1.0, std::fabs(re))) {
        std::ostringstream os;
        os << where << ": imaginary residue " << im << " against real part " << re;
        throw NumericalIntegrityError(os.str());
    }
}

} // namespace

// ---------------------------------------------------------------- series

double series_term(const MixedSystem &sys, std::int64_t q, const SeriesOptions &opts) {
    const Forms f = forms_of(sys);
    if (q < 1) {
        throw std::invalid_argument("series_term: q must be at least 1");
    }
    if (q == 1) {
        return 1.0;
    }
    const std::size_t w = f.w();
    const std::size_t s = f.s;
    const double qd = static_cast<double>(q);
    if (std::pow(qd, static_cast<double>(w)) > opts.work_limit || qd * qd > opts.work_limit ||
        qd * qd * qd > 20 * opts.work_limit) {
        throw ResourceError("series_term: q = " + std::to_string(q) + " exceeds the work limit");
    }

    std::vector<Complex> root(static_cast<std::size_t>(q));
    for (std::int64_t k = 0; k < q; ++k) {
        root[static_cast<std::size_t>(k)] = unit_phase(static_cast<long double>(k) / static_cast<long double>(q));
    }
    // distinct (x^3, x^2) residues with multiplicity
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> pairs;
    for (std::int64_t x = 0; x < q; ++x) {
        const __int128 x2 = static_cast<__int128>(x) * x % q;
        pairs[{static_cast<std::int64_t>(x2 * x % q), static_cast<std::int64_t>(x2)}] += 1;
    }
    // T[b3 q + b2] = S(q, b3, b2) / q
    std::vector<Complex> T(static_cast<std::size_t>(q * q));
    for (std::int64_t b3 = 0; b3 < q; ++b3) {
        for (std::int64_t b2 = 0; b2 < q; ++b2) {
            long double re = 0, im = 0;
            for (const auto &[xp, mult] : pairs) {
                const std::int64_t k = mod128(static_cast<__int128>(b3) * xp.first + static_cast<__int128>(b2) * xp.second, q);
                re += mult * static_cast<long double>(root[static_cast<std::size_t>(k)].real());
                im += mult * static_cast<long double>(root[static_cast<std::size_t>(k)].imag());
            }
            T[static_cast<std::size_t>(b3 * q + b2)] = Complex(static_cast<double>(re / q), static_cast<double>(im / q));
        }
    }

    // step[t][j]: change of (Lambda3_j, Lambda2_j) when a_t grows by one
    std::vector<std::vector<std::int64_t>> step3(w, std::vector<std::int64_t>(s, 0));
    std::vector<std::vector<std::int64_t>> step2(w, std::vector<std::int64_t>(s, 0));
    for (std::size_t t = 0; t < w; ++t) {
        for (std::size_t j = 0; j < s; ++j) {
            (f.degree[t] == 3 ? step3 : step2)[t][j] = mod(f.coef[t][j], q);
        }
    }

    struct Partial {
        long double re = 0;
        long double im = 0;
    };
    const auto partials = parallel_map<Partial>(static_cast<std::size_t>(q), opts.threads, [&](std::size_t a0i) {
        const std::int64_t a0 = static_cast<std::int64_t>(a0i);
        std::vector<std::int64_t> a(w, 0);
        a[0] = a0;
        std::vector<std::int64_t> L3(s, 0), L2(s, 0);
        for (std::size_t j = 0; j < s; ++j) {
            L3[j] = mod128(static_cast<__int128>(step3[0][j]) * a0, q);
            L2[j] = mod128(static_cast<__int128>(step2[0][j]) * a0, q);
        }
        const std::int64_t g0 = std::gcd(q, a0);
        Partial out;
        while (true) {
            std::int64_t g = g0;
            for (std::size_t t = 1; t < w && g != 1; ++t) {
                g = std::gcd(g, a[t]);
            }
            if (g == 1) {
                Complex prod(1, 0);
                for (std::size_t j = 0; j < s; ++j) {
                    prod *= T[static_cast<std::size_t>(L3[j] * q + L2[j])];
                }
                out.re += prod.real();
                out.im += prod.imag();
            }
            // odometer over a_1 .. a_{w-1}; each changed digit moves by +1 mod q
            std::size_t t = w;
            while (t > 1) {
                --t;
                for (std::size_t j = 0; j < s; ++j) {
                    L3[j] += step3[t][j];
                    if (L3[j] >= q) {
                        L3[j] -= q;
                    }
                    L2[j] += step2[t][j];
                    if (L2[j] >= q) {
                        L2[j] -= q;
                    }
                }
                if (++a[t] < q) {
                    break;
                }
                a[t] = 0;
                if (t == 1) {
                    return out;
                }
            }
            if (w <= 1) {
                return out;
            }
        }
    });
    long double re = 0, im = 0;
    for (const Partial &p : partials) {
        re += p.re;
        im += p.im;
    }
    check_imag(static_cast<double>(re), static_cast<double>(im), "series_term(q=" + std::to_string(q) + ")");
    return static_cast<double>(re);
}

SeriesValue singular_series(const MixedSystem &sys, double Y, const SeriesOptions &opts) {
    if (!(Y >= 1)) {
        throw std::invalid_argument("singular_series: Y must be at least 1");
    }
    SeriesValue out;
    out.Y = static_cast<std::int64_t>(std::floor(Y));
    long double total = 0;
    for (std::int64_t q = 1; q <= out.Y; ++q) {
        const double a = series_term(sys, q, opts);
        out.terms.push_back(a);
        total += a;
    }
    out.value = static_cast<double>(total);
    return out;
}

// ------------------------------------------------------------ congruences

std::string to_string(CongruenceMethod m) {
    switch (m) {
    case CongruenceMethod::automatic: return "auto";
    case CongruenceMethod::exhaustive: return "exhaustive";
    case CongruenceMethod::lifting: return "lifting";
    case CongruenceMethod::residue_dp: return "residue_dp";
    }
    return "?";
}

CongruenceMethod parse_congruence_method(const std::string &text) {
    for (CongruenceMethod m : {CongruenceMethod::automatic, CongruenceMethod::exhaustive, CongruenceMethod::lifting,
                               CongruenceMethod::residue_dp}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw std::invalid_argument("unknown congruence method '" + text + "'");
}

std::size_t jacobian_rank_mod_p(const MixedSystem &sys, const std::vector<std::int64_t> &x, std::int64_t p) {
    const Forms f = forms_of(sys);
    if (x.size() != f.s) {
        throw std::invalid_argument("jacobian_rank_mod_p: point has the wrong length");
    }
    std::vector<std::vector<std::int64_t>> J(f.w(), std::vector<std::int64_t>(f.s));
    for (std::size_t r = 0; r < f.w(); ++r) {
        for (std::size_t j = 0; j < f.s; ++j) {
            const std::int64_t xj = mod(x[j], p);
            const __int128 d = f.degree[r] == 3 ? static_cast<__int128>(3) * f.coef[r][j] * xj % p * xj
                                                : static_cast<__int128>(2) * f.coef[r][j] * xj;
            J[r][j] = mod128(d, p);
        }
    }
    auto inverse = [p](std::int64_t a) {
        std::int64_t result = 1, base = a % p, e = p - 2;
        while (e > 0) {
            if (e & 1) {
                result = static_cast<std::int64_t>(static_cast<__int128>(result) * base % p);
            }
            base = static_cast<std::int64_t>(static_cast<__int128>(base) * base % p);
            e >>= 1;
        }
        return result;
    };
    std::size_t rank = 0;
    for (std::size_t col = 0; col < f.s && rank < f.w(); ++col) {
        std::size_t pivot = rank;
        while (pivot < f.w() && J[pivot][col] == 0) {
            ++pivot;
        }
        if (pivot == f.w()) {
            continue;
        }
        std::swap(J[pivot], J[rank]);
        const std::int64_t inv = inverse(J[rank][col]);
        for (std::size_t r = 0; r < f.w(); ++r) {
            if (r == rank || J[r][col] == 0) {
                continue;
            }
            const std::int64_t factor = static_cast<std::int64_t>(static_cast<__int128>(J[r][col]) * inv % p);
            for (std::size_t c = col; c < f.s; ++c) {
                J[r][c] = mod128(J[r][c] - static_cast<__int128>(factor) * J[rank][c], p);
            }
        }
        ++rank;
    }
    return rank;
}

namespace {

BigInt count_exhaustive(const Forms &f, std::int64_t m) {
    const std::size_t s = f.s;
    const std::size_t w = f.w();
    // contributions[j][x] flattened over rows
    std::vector<std::vector<std::int64_t>> contrib(s);
    for (std::size_t j = 0; j < s; ++j) {
        contrib[j].reserve(static_cast<std::size_t>(m) * w);
        for (std::int64_t x = 0; x < m; ++x) {
            const auto v = contribution(f, j, x, m);
            contrib[j].insert(contrib[j].end(), v.begin(), v.end());
        }
    }
    std::vector<std::vector<std::int64_t>> partial(s + 1, std::vector<std::int64_t>(w, 0));
    std::vector<std::int64_t> x(s, 0);
    std::uint64_t count = 0;
    std::size_t depth = 0;
    // iterative depth-first walk with running sums per depth
    while (true) {
        if (depth == s) {
            bool zero = true;
            for (std::size_t r = 0; r < w; ++r) {
                zero = zero && partial[s][r] == 0;
            }
            count += zero;
            // backtrack
            while (depth > 0) {
                --depth;
                if (++x[depth] < m) {
                    break;
                }
                x[depth] = 0;
                if (depth == 0) {
                    return BigInt(std::to_string(count));
                }
            }
            if (depth == 0 && x[0] == 0) {
                return BigInt(std::to_string(count));
            }
        }
        const std::int64_t *v = &contrib[depth][static_cast<std::size_t>(x[depth]) * w];
        for (std::size_t r = 0; r < w; ++r) {
            std::int64_t t = partial[depth][r] + v[r];
            partial[depth + 1][r] = t >= m ? t - m : t;
        }
        ++depth;
    }
}

template <class Count>
BigInt count_residue_dp(const Forms &f, std::int64_t m) {
    const std::size_t w = f.w();
    std::size_t states = 1;
    for (std::size_t r = 0; r < w; ++r) {
        states *= static_cast<std::size_t>(m);
    }
    std::vector<Count> cur(states, Count(0)), next(states, Count(0));
    cur[0] = Count(1);
    std::vector<std::size_t> radix(w, 1);
    for (std::size_t r = 1; r < w; ++r) {
        radix[r] = radix[r - 1] * static_cast<std::size_t>(m);
    }
    for (std::size_t j = 0; j < f.s; ++j) {
        std::map<std::vector<std::int64_t>, std::uint64_t> values;
        for (std::int64_t x = 0; x < m; ++x) {
            values[contribution(f, j, x, m)] += 1;
        }
        std::fill(next.begin(), next.end(), Count(0));
        std::vector<std::vector<std::size_t>> shifted(w, std::vector<std::size_t>(static_cast<std::size_t>(m)));
        for (const auto &[v, mult] : values) {
            for (std::size_t r = 0; r < w; ++r) {
                for (std::int64_t d = 0; d < m; ++d) {
                    shifted[r][static_cast<std::size_t>(d)] = static_cast<std::size_t>((d + v[r]) % m) * radix[r];
                }
            }
            const Count weight = Count(static_cast<unsigned long>(mult));
            std::vector<std::size_t> digit(w, 0);
            for (std::size_t idx = 0; idx < states; ++idx) {
                if (cur[idx] != Count(0)) {
                    std::size_t target = 0;
                    for (std::size_t r = 0; r < w; ++r) {
                        target += shifted[r][digit[r]];
                    }
                    next[target] += cur[idx] * weight;
                }
                for (std::size_t r = 0; r < w; ++r) {
                    if (++digit[r] < static_cast<std::size_t>(m)) {
                        break;
                    }
                    digit[r] = 0;
                }
            }
        }
        std::swap(cur, next);
    }
    if constexpr (std::is_same_v<Count, BigInt>) {
        return cur[0];
    } else {
        // unsigned __int128 to decimal
        Count v = cur[0];
        if (v == 0) {
            return BigInt(0);
        }
        std::string digits;
        while (v > 0) {
            digits.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        }
        std::reverse(digits.begin(), digits.end());
        return BigInt(digits);
    }
}

struct Lifter {
    const MixedSystem &sys;
    const Forms &f;
    std::int64_t p;
    unsigned target;
    double work_limit;
    double work = 0;

    bool solves(const std::vector<std::int64_t> &x, std::int64_t modulus) const {
        for (std::size_t r = 0; r < f.w(); ++r) {
            __int128 acc = 0;
            for (std::size_t j = 0; j < f.s; ++j) {
                const __int128 xj = x[j];
                const __int128 xk = f.degree[r] == 3 ? xj * xj % modulus * xj : xj * xj;
                acc = (acc + f.coef[r][j] * (xk % modulus)) % modulus;
            }
            if (acc != 0) {
                return false;
            }
        }
        return true;
    }

    void charge(double units) {
        work += units;
        if (work > work_limit) {
            throw ResourceError("count_congruence: lifting exceeded the work limit");
        }
    }

    // x solves the system mod p^k and is singular mod p.
    BigInt lifts(std::vector<std::int64_t> &x, unsigned k, std::int64_t pk) {
        if (k == target) {
            return 1;
        }
        BigInt total = 0;
        std::vector<std::int64_t> y(f.s, 0);
        const std::vector<std::int64_t> base = x;
        const std::int64_t next = pk * p;
        while (true) {
            charge(static_cast<double>(f.s * f.w()));
            for (std::size_t j = 0; j < f.s; ++j) {
                x[j] = base[j] + pk * y[j];
            }
            if (solves(x, next)) {
                total += lifts(x, k + 1, next);
            }
            std::size_t j = 0;
            while (j < f.s && ++y[j] == p) {
                y[j] = 0;
                ++j;
            }
            if (j == f.s) {
                break;
            }
        }
        x = base;
        return total;
    }

    BigInt run() {
        const std::size_t w = f.w();
        BigInt total = 0;
        BigInt closed;
        const long exponent = (static_cast<long>(target) - 1) * (static_cast<long>(f.s) - static_cast<long>(w));
        if (exponent >= 0) {
            mpz_ui_pow_ui(closed.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(exponent));
        }
        std::vector<std::int64_t> x(f.s, 0);
        while (true) {
            charge(static_cast<double>(f.s * f.w()));
            if (solves(x, p)) {
                if (jacobian_rank_mod_p(sys, x, p) == w) {
                    total += closed;  // Hensel: p^{(i-1)(s-w)} lifts
                } else {
                    total += lifts(x, 1, p);
                }
            }
            std::size_t j = 0;
            while (j < f.s && ++x[j] == p) {
                x[j] = 0;
                ++j;
            }
            if (j == f.s) {
                break;
            }
        }
        return total;
    }
};

} // namespace

CongruenceCount count_congruence(const MixedSystem &sys, std::int64_t p, unsigned i, const CongruenceOptions &opts) {
    const Forms f = forms_of(sys);
    if (!is_prime(p)) {
        throw std::invalid_argument("count_congruence: " + std::to_string(p) + " is not prime");
    }
    CongruenceCount out;
    out.p = p;
    out.i = i;
    if (i == 0) {
        out.M = 1;
        out.method = "trivial";
        return out;
    }
    const std::int64_t m = bounded_pow(p, i, std::int64_t{1} << 31);
    if (m < 0) {
        throw ResourceError("count_congruence: modulus p^i too large");
    }
    const double md = static_cast<double>(m);
    const double s = static_cast<double>(f.s);
    const double w = static_cast<double>(f.w());
    const double exhaustive_work = std::pow(md, s);
    const bool fits128 = s * std::log2(md) < 126;
    const double dp_work = std::pow(md, w) * md * std::max(1.0, s) * (fits128 ? 1 : 10);

    CongruenceMethod method = opts.method;
    if (method == CongruenceMethod::automatic) {
        if (dp_work <= opts.work_limit) {
            method = CongruenceMethod::residue_dp;
        } else if (exhaustive_work <= opts.work_limit) {
            method = CongruenceMethod::exhaustive;
        } else {
            method = CongruenceMethod::lifting;
        }
    }
    out.method = to_string(method);
    switch (method) {
    case CongruenceMethod::exhaustive:
        if (exhaustive_work > opts.work_limit) {
            throw ResourceError("count_congruence: exhaustive enumeration of p^(i s) residues over budget");
        }
        out.M = count_exhaustive(f, m);
        break;
    case CongruenceMethod::residue_dp:
        if (dp_work > opts.work_limit) {
            throw ResourceError("count_congruence: residue convolution over budget");
        }
        out.M = fits128 ? count_residue_dp<unsigned __int128>(f, m) : count_residue_dp<BigInt>(f, m);
        break;
    case CongruenceMethod::lifting: {
        Lifter lifter{sys, f, p, i, opts.work_limit};
        out.M = lifter.run();
        break;
    }
    case CongruenceMethod::automatic:
        break;
    }
    return out;
}

// ------------------------------------------------------------------ chi_p

std::string to_string(ChiRoute r) {
    return r == ChiRoute::congruence ? "congruence" : "exponential_sum";
}

ChiP chi_p(const MixedSystem &sys, std::int64_t p, unsigned i_max, const ChiPOptions &opts) {
    const Forms f = forms_of(sys);
    if (i_max < 1) {
        throw std::invalid_argument("chi_p: i_max must be at least 1");
    }
    if (!is_prime(p)) {
        throw std::invalid_argument("chi_p: " + std::to_string(p) + " is not prime");
    }
    ChiP out;
    out.p = p;
    out.i_requested = i_max;
    out.route = opts.route;
    out.sequence.push_back(1.0);  // level 0

    if (opts.route == ChiRoute::exponential_sum) {
        SeriesOptions so{opts.work_limit, opts.threads};
        long double total = 1;
        std::int64_t q = 1;
        for (unsigned i = 1; i <= i_max; ++i) {
            q = bounded_pow(p, i, std::int64_t{1} << 31);
            if (q < 0) {
                break;
            }
            double a;
            try {
                a = series_term(sys, q, so);
            } catch (const ResourceError &) {
                break;
            }
            total += a;
            out.sequence.push_back(static_cast<double>(total));
            out.i_used = i;
        }
    } else {
        CongruenceOptions co;
        co.work_limit = opts.work_limit;
        const long excess = static_cast<long>(f.s) - static_cast<long>(f.w());
        for (unsigned i = 1; i <= i_max; ++i) {
            CongruenceCount cc;
            try {
                cc = count_congruence(sys, p, i, co);
            } catch (const ResourceError &) {
                break;
            }
            BigInt scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), static_cast<unsigned long>(p),
                          static_cast<unsigned long>(std::labs(excess) * i));
            mpq_class ratio = excess >= 0 ? mpq_class(cc.M, scale) : mpq_class(cc.M * scale, 1);
            ratio.canonicalize();
            out.sequence.push_back(ratio.get_d());
            out.i_used = i;
        }
    }
    out.value = out.sequence.back();
    if (out.i_used >= 1) {
        const std::size_t n = out.sequence.size();
        out.stabilized = std::fabs(out.sequence[n - 1] - out.sequence[n - 2]) <= opts.stabilization_tol;
    }
    return out;
}

// ------------------------------------------------------------ chi_infinity

namespace {

using Intervals = std::vector<std::pair<double, double>>;

Intervals intersect(const Intervals &a, const Intervals &b) {
    Intervals out;
    for (const auto &[lo1, hi1] : a) {
        for (const auto &[lo2, hi2] : b) {
            const double lo = std::max(lo1, lo2);
            const double hi = std::min(hi1, hi2);
            if (lo < hi) {
                out.emplace_back(lo, hi);
            }
        }
    }
    return out;
}

// {z in [-1, 1] : |A + c z^k| <= eps}
Intervals row_set(double A, double c, int k, double eps) {
    if (c == 0) {
        return std::fabs(A) <= eps ? Intervals{{-1.0, 1.0}} : Intervals{};
    }
    double lo = (-eps - A) / c;
    double hi = (eps - A) / c;
    if (lo > hi) {
        std::swap(lo, hi);
    }
    if (k == 3) {
        const double a = std::max(-1.0, std::cbrt(lo));
        const double b = std::min(1.0, std::cbrt(hi));
        return a < b ? Intervals{{a, b}} : Intervals{};
    }
    if (hi < 0) {
        return {};
    }
    const double outer = std::min(1.0, std::sqrt(hi));
    if (lo <= 0) {
        return Intervals{{-outer, outer}};
    }
    const double inner = std::sqrt(lo);
    if (inner >= outer) {
        return {};
    }
    return Intervals{{-outer, -inner}, {inner, outer}};
}

double measure(const Intervals &set) {
    double total = 0;
    for (const auto &[lo, hi] : set) {
        total += hi - lo;
    }
    return total;
}

} // namespace

ChiInfinityResult chi_infinity(const MixedSystem &sys, const ChiInfinityOptions &opts) {
    const Forms f = forms_of(sys);
    const std::size_t w = f.w();
    const std::size_t s = f.s;
    const std::size_t ne = opts.eps.size();
    if (ne < 2) {
        throw std::invalid_argument("chi_infinity: need at least two eps values");
    }
    for (std::size_t e = 0; e < ne; ++e) {
        if (!(opts.eps[e] > 0) || (e > 0 && !(opts.eps[e] < opts.eps[e - 1]))) {
            throw std::invalid_argument("chi_infinity: eps must be positive and strictly decreasing");
        }
    }
    if (s == 0 || w == 0) {
        throw std::invalid_argument("chi_infinity: need at least one variable and one form");
    }
    if (opts.samples == 0 || opts.strata == 0) {
        throw std::invalid_argument("chi_infinity: samples and strata must be positive");
    }

    // least-squares intercept weights for y = chi + a eps^order
    std::vector<double> lambda(ne);
    {
        double sx = 0, sxx = 0;
        std::vector<double> xs(ne);
        for (std::size_t e = 0; e < ne; ++e) {
            xs[e] = std::pow(opts.eps[e], opts.bias_order);
            sx += xs[e];
            sxx += xs[e] * xs[e];
        }
        const double n = static_cast<double>(ne);
        const double det = n * sxx - sx * sx;
        for (std::size_t e = 0; e < ne; ++e) {
            lambda[e] = (sxx - sx * xs[e]) / det;
        }
    }
    std::vector<double> scale(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        scale[e] = std::pow(2.0, static_cast<double>(s) - 1) / std::pow(2 * opts.eps[e], static_cast<double>(w));
    }

    const std::size_t strata = s >= 2 ? opts.strata : 1;
    const std::size_t per = s >= 2 ? std::max<std::size_t>(2, opts.samples / strata) : 1;
    // moments per stratum: sum and sum of squares of each eps estimate and of
    // the combined intercept estimate
    struct Moments {
        std::vector<double> sum, sq;
    };
    const auto moments = parallel_map<Moments>(strata, opts.threads, [&](std::size_t k) {
        std::seed_seq seq{static_cast<std::uint64_t>(opts.seed), static_cast<std::uint64_t>(k)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Moments m{std::vector<double>(ne + 1, 0.0), std::vector<double>(ne + 1, 0.0)};
        std::vector<double> A(w);
        std::vector<double> g(ne + 1);
        for (std::size_t n = 0; n < per; ++n) {
            std::fill(A.begin(), A.end(), 0.0);
            for (std::size_t j = 0; j + 1 < s; ++j) {
                double x;
                if (j == 0) {
                    x = -1.0 + 2.0 * (static_cast<double>(k) + unit(rng)) / static_cast<double>(strata);
                } else {
                    x = -1.0 + 2.0 * unit(rng);
                }
                const double x2 = x * x;
                for (std::size_t r = 0; r < w; ++r) {
                    A[r] += static_cast<double>(f.coef[r][j]) * (f.degree[r] == 3 ? x2 * x : x2);
                }
            }
            double combined = 0;
            for (std::size_t e = 0; e < ne; ++e) {
                Intervals set{{-1.0, 1.0}};
                for (std::size_t r = 0; r < w && !set.empty(); ++r) {
                    set = intersect(set, row_set(A[r], static_cast<double>(f.coef[r][s - 1]), f.degree[r], opts.eps[e]));
                }
                g[e] = measure(set) * scale[e];
                combined += lambda[e] * g[e];
            }
            g[ne] = combined;
            for (std::size_t e = 0; e <= ne; ++e) {
                m.sum[e] += g[e];
                m.sq[e] += g[e] * g[e];
            }
        }
        return m;
    });

    ChiInfinityResult out;
    out.eps = opts.eps;
    out.samples = strata * per;
    std::vector<double> mean(ne + 1, 0.0), var(ne + 1, 0.0);
    const double K = static_cast<double>(strata);
    const double N = static_cast<double>(per);
    for (const Moments &m : moments) {
        for (std::size_t e = 0; e <= ne; ++e) {
            const double mu = m.sum[e] / N;
            const double sv = N > 1 ? std::max(0.0, (m.sq[e] - N * mu * mu) / (N - 1)) : 0.0;
            mean[e] += mu / K;
            var[e] += sv / N / (K * K);
        }
    }
    for (std::size_t e = 0; e < ne; ++e) {
        out.estimates.push_back(mean[e]);
        out.sigmas.push_back(std::sqrt(var[e]));
    }
    out.value = mean[ne];
    out.mc_sigma = std::sqrt(var[ne]);
    if (ne >= 3) {
        // slope from the same weights' companion fit
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t e = 0; e < ne; ++e) {
            const double x = std::pow(opts.eps[e], opts.bias_order);
            sx += x;
            sy += mean[e];
            sxx += x * x;
            sxy += x * mean[e];
        }
        const double n = static_cast<double>(ne);
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        for (std::size_t e = 0; e < ne; ++e) {
            const double fit = out.value + slope * std::pow(opts.eps[e], opts.bias_order);
            out.extrapolation_residual = std::max(out.extrapolation_residual, std::fabs(mean[e] - fit));
        }
    }
    out.error = std::hypot(out.mc_sigma, out.extrapolation_residual);

    // nested eps: estimates move one way, up to 3 sigma
    const double direction = out.estimates.back() - out.estimates.front();
    for (std::size_t e = 1; e < ne; ++e) {
        const double step = out.estimates[e] - out.estimates[e - 1];
        const double band = 3 * std::hypot(out.sigmas[e], out.sigmas[e - 1]);
        if (step * (direction >= 0 ? 1 : -1) < -band) {
            out.monotone = false;
        }
    }
    out.flagged = !out.monotone || !std::isfinite(out.value);
    return out;
}

// ------------------------------------------------------- singular integral

SingularIntegral singular_integral_J(const MixedSystem &sys, double Y, double P, double tol) {
    const Forms f = forms_of(sys);
    const std::size_t w = f.w();
    const std::size_t s = f.s;
    if (w == 0 || w > 4) {
        throw std::invalid_argument("singular_integral_J: needs 1 <= w <= 4 forms, got " + std::to_string(w));
    }
    if (!(Y > 0) || !(P > 0) || !(tol > 0)) {
        throw std::invalid_argument("singular_integral_J: Y, P and tol must be positive");
    }
    // In gamma = (beta_3 P^3, beta_2 P^2) the integral is P^{s-2r2-3r3}
    // times the integral over [-Y, Y]^w of prod_j v(delta_j(gamma), 1).
    std::vector<double> gamma(w, 0.0);
    std::vector<std::size_t> panels(w);
    for (std::size_t r = 0; r < w; ++r) {
        double weight = 0;
        for (std::size_t j = 0; j < s; ++j) {
            weight += std::fabs(static_cast<double>(f.coef[r][j]));
        }
        panels[r] = static_cast<std::size_t>(std::max(2.0, std::ceil(Y * weight)));
    }
    const double vtol = 1e-12;
    auto integrand = [&]() {
        Complex prod(1, 0);
        for (std::size_t j = 0; j < s; ++j) {
            double d3 = 0, d2 = 0;
            for (std::size_t r = 0; r < w; ++r) {
                (f.degree[r] == 3 ? d3 : d2) += static_cast<double>(f.coef[r][j]) * gamma[r];
            }
            prod *= oscillatory_v(d3, d2, 1.0, vtol).value;
        }
        return prod;
    };
    double total_error = 0;
    std::function<Complex(std::size_t, double)> level = [&](std::size_t dim, double dim_tol) -> Complex {
        if (dim == w) {
            return integrand();
        }
        const double inner_tol = dim_tol / (2 * Y) * 0.5;
        const QuadratureResult r = integrate_adaptive(
            [&](double x) {
                gamma[dim] = x;
                return level(dim + 1, inner_tol);
            },
            -Y, Y, dim_tol, panels[dim], 20'000);
        if (dim == 0) {
            total_error = r.error_estimate;
        }
        return r.value;
    };
    const Complex I = level(0, tol);

    SingularIntegral out;
    out.Y = Y;
    out.P = P;
    out.normalized = I.real();
    out.imag = I.imag();
    out.error = total_error;
    const double e = static_cast<double>(sys.expected_exponent());
    out.value = I.real() * std::pow(P, e);
    return out;
}

// --------------------------------------------------------- local witnesses

namespace {

// Valuation of v mod p^cap, capped at cap (v = 0 gives cap).
unsigned valuation_mod(std::int64_t v, std::int64_t p, unsigned cap) {
    unsigned k = 0;
    while (k < cap && v != 0 && v % p == 0) {
        v /= p;
        ++k;
    }
    return v == 0 ? cap : k;
}

// Determinant mod M by Laplace expansion along the first row.
std::int64_t det_mod(const std::vector<std::vector<std::int64_t>> &a, std::int64_t M) {
    const std::size_t n = a.size();
    if (n == 1) {
        return a[0][0];
    }
    std::int64_t total = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (a[0][c] == 0) {
            continue;
        }
        std::vector<std::vector<std::int64_t>> minor(n - 1, std::vector<std::int64_t>(n - 1));
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0, k = 0; j < n; ++j) {
                if (j != c) {
                    minor[i - 1][k++] = a[i][j];
                }
            }
        }
        const std::int64_t term = mod128(static_cast<__int128>(a[0][c]) * det_mod(minor, M), M);
        total = (c % 2 == 0) ? (total + term) % M : mod(total - term, M);
    }
    return total;
}

// Least p-adic valuation, capped at cap, over the maximal minors of the
// Jacobian at x; stops once one is at most enough. Only x mod p^cap matters.
unsigned min_minor_valuation(const Forms &f, const std::vector<std::int64_t> &x, std::int64_t p, unsigned cap,
                             unsigned enough) {
    const std::size_t w = f.w();
    const std::size_t s = f.s;
    if (s < w) {
        return cap;
    }
    const std::int64_t M = bounded_pow(p, cap, std::int64_t{1} << 31);
    std::vector<std::vector<std::int64_t>> J(w, std::vector<std::int64_t>(s));
    for (std::size_t r = 0; r < w; ++r) {
        for (std::size_t j = 0; j < s; ++j) {
            const __int128 xj = mod(x[j], M);
            const __int128 d = f.degree[r] == 3 ? 3 * f.coef[r][j] * (xj * xj % M) : 2 * f.coef[r][j] * xj;
            J[r][j] = mod128(d, M);
        }
    }
    unsigned best = cap;
    std::vector<std::size_t> cols(w);
    std::iota(cols.begin(), cols.end(), 0);
    std::vector<std::vector<std::int64_t>> sq(w, std::vector<std::int64_t>(w));
    while (true) {
        for (std::size_t r = 0; r < w; ++r) {
            for (std::size_t k = 0; k < w; ++k) {
                sq[r][k] = J[r][cols[k]];
            }
        }
        best = std::min(best, valuation_mod(det_mod(sq, M), p, cap));
        if (best <= enough) {
            return best;
        }
        std::size_t k = w;
        while (k > 0 && cols[k - 1] == s - w + k - 1) {
            --k;
        }
        if (k == 0) {
            return best;
        }
        ++cols[k - 1];
        for (std::size_t t = k; t < w; ++t) {
            cols[t] = cols[t - 1] + 1;
        }
    }
}

std::vector<std::int64_t> residues_of(const Forms &f, const std::vector<std::int64_t> &x, std::size_t from,
                                      std::size_t to, std::int64_t m) {
    std::vector<std::int64_t> acc(f.w(), 0);
    for (std::size_t j = from; j < to; ++j) {
        const auto v = contribution(f, j, x[j], m);
        for (std::size_t r = 0; r < f.w(); ++r) {
            acc[r] = (acc[r] + v[r]) % m;
        }
    }
    return acc;
}

struct VecHash {
    std::size_t operator()(const std::vector<std::int64_t> &v) const {
        std::size_t h = 1469598103934665603ull;
        for (std::int64_t x : v) {
            h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
        }
        return h;
    }
};

std::optional<LocalWitness> padic_witness(const Forms &f, std::int64_t p, const WitnessOptions &opts) {
    const std::size_t s = f.s;
    const std::size_t w = f.w();
    for (unsigned m = 1; m <= opts.max_level; ++m) {
        const std::int64_t M = bounded_pow(p, m, std::int64_t{1} << 31);
        if (M < 0) {
            break;
        }
        auto accept = [&](const std::vector<std::int64_t> &x) -> std::optional<LocalWitness> {
            const unsigned delta = min_minor_valuation(f, x, p, m, (m - 1) / 2);
            if (2 * delta + 1 <= m) {
                LocalWitness wit;
                wit.place = p;
                wit.residues = x;
                wit.m = m;
                wit.delta = delta;
                return wit;
            }
            return std::nullopt;
        };
        const double space = std::pow(static_cast<double>(M), static_cast<double>(s));
        if (space <= opts.exhaustive_limit) {
            std::vector<std::int64_t> x(s, 0);
            while (true) {
                bool zero = true;
                for (std::int64_t v : residues_of(f, x, 0, s, M)) {
                    zero = zero && v == 0;
                }
                if (zero) {
                    if (auto wit = accept(x)) {
                        return wit;
                    }
                }
                std::size_t j = 0;
                while (j < s && ++x[j] == M) {
                    x[j] = 0;
                    ++j;
                }
                if (j == s) {
                    break;
                }
            }
            continue;
        }
        // sampled meet in the middle: random halves matched on residues
        const std::size_t half = s / 2;
        const double target = std::pow(static_cast<double>(M), static_cast<double>(w));
        const std::size_t n = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(opts.random_samples) / 2, std::max(2000.0, 8 * std::sqrt(target))));
        std::seed_seq seq{opts.seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(m)};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::int64_t> digit(0, M - 1);
        std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, VecHash> table;
        std::vector<std::vector<std::int64_t>> left(n, std::vector<std::int64_t>(s, 0));
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < half; ++j) {
                left[k][j] = digit(rng);
            }
            table[residues_of(f, left[k], 0, half, M)].push_back(k);
        }
        std::size_t checks = 0;
        std::vector<std::int64_t> x(s);
        for (std::size_t k = 0; k < n && checks < 5000; ++k) {
            for (std::size_t j = half; j < s; ++j) {
                x[j] = digit(rng);
            }
            auto need = residues_of(f, x, half, s, M);
            for (auto &v : need) {
                v = (M - v) % M;
            }
            const auto it = table.find(need);
            if (it == table.end()) {
                continue;
            }
            for (std::size_t idx : it->second) {
                std::copy(left[idx].begin(), left[idx].begin() + static_cast<std::ptrdiff_t>(half), x.begin());
                ++checks;
                if (auto wit = accept(x)) {
                    return wit;
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<LocalWitness> real_witness(const Forms &f, const WitnessOptions &opts) {
    const std::size_t s = f.s;
    const std::size_t w = f.w();
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> start(-0.9, 0.9);
    auto eval = [&](const Eigen::VectorXd &x, Eigen::VectorXd &F, Eigen::MatrixXd &J) {
        F.setZero(static_cast<Eigen::Index>(w));
        J.setZero(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(s));
        for (std::size_t r = 0; r < w; ++r) {
            for (std::size_t j = 0; j < s; ++j) {
                const double c = static_cast<double>(f.coef[r][j]);
                const double xj = x[static_cast<Eigen::Index>(j)];
                const auto ri = static_cast<Eigen::Index>(r);
                const auto ji = static_cast<Eigen::Index>(j);
                if (f.degree[r] == 3) {
                    F[ri] += c * xj * xj * xj;
                    J(ri, ji) = 3 * c * xj * xj;
                } else {
                    F[ri] += c * xj * xj;
                    J(ri, ji) = 2 * c * xj;
                }
            }
        }
    };
    Eigen::VectorXd F, Fn;
    Eigen::MatrixXd J, Jn;
    for (std::size_t attempt = 0; attempt < opts.newton_starts; ++attempt) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(s));
        for (std::size_t j = 0; j < s; ++j) {
            x[static_cast<Eigen::Index>(j)] = start(rng);
        }
        eval(x, F, J);
        for (int iter = 0; iter < 100 && F.norm() > 1e-14; ++iter) {
            // minimum-norm Gauss-Newton step with halving line search
            const Eigen::VectorXd dx = J.completeOrthogonalDecomposition().solve(F);
            double t = 1.0;
            bool improved = false;
            for (int h = 0; h < 30; ++h, t *= 0.5) {
                const Eigen::VectorXd trial = x - t * dx;
                eval(trial, Fn, Jn);
                if (Fn.norm() < F.norm()) {
                    x = trial;
                    F = Fn;
                    J = Jn;
                    improved = true;
                    break;
                }
            }
            if (!improved) {
                break;
            }
        }
        if (x.cwiseAbs().maxCoeff() >= 1.0) {
            continue;
        }
        const double residual = F.cwiseAbs().maxCoeff();
        if (!(residual < 1e-10)) {
            continue;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
        const double sigma = svd.singularValues().minCoeff();
        if (svd.singularValues().size() < static_cast<Eigen::Index>(w) || !(sigma > 1e-6)) {
            continue;
        }
        LocalWitness wit;
        wit.place = 0;
        wit.point.assign(x.data(), x.data() + x.size());
        wit.residual = residual;
        wit.sigma_min = sigma;
        return wit;
    }
    return std::nullopt;
}

} // namespace

std::optional<LocalWitness> find_nonsingular_local_solution(const MixedSystem &sys, std::int64_t place,
                                                            const WitnessOptions &opts) {
    const Forms f = forms_of(sys);
    if (f.w() == 0) {
        throw std::invalid_argument("find_nonsingular_local_solution: system has no forms");
    }
    if (place == 0) {
        return real_witness(f, opts);
    }
    if (!is_prime(place)) {
        throw std::invalid_argument("find_nonsingular_local_solution: place must be 0 or a prime");
    }
    return padic_witness(f, place, opts);
}

// --------------------------------------------------------------- constant

DensityReport compute_constant_c(const MixedSystem &sys, const DensityOptions &opts) {
    return compute_constant_c(sys, opts, [&](std::int64_t p) { return chi_p(sys, p, opts.i_max, opts.chi_p); });
}

DensityReport compute_constant_c(const MixedSystem &sys, const DensityOptions &opts, const ChiPProvider &provider) {
    sys.validate();
    if (opts.prime_bound < 2 || opts.i_max < 1) {
        throw std::invalid_argument("compute_constant_c: need prime_bound >= 2 and i_max >= 1");
    }
    DensityReport report;
    report.options = opts;
    const auto primes = primes_up_to(opts.prime_bound);
    report.chi_p = parallel_map<ChiP>(primes.size(), opts.chi_p.threads, [&](std::size_t k) { return provider(primes[k]); });

    long double product = 1;
    double C = 0;
    bool tail_from_large = false;
    for (const ChiP &cp : report.chi_p) {
        product *= cp.value;
        if (!cp.stabilized) {
            report.flags.push_back("chi_p(" + std::to_string(cp.p) + ") not stabilized at i = " +
                                   std::to_string(cp.i_used));
        }
        if (cp.p > opts.tail_from) {
            C = std::max(C, static_cast<double>(cp.p) * static_cast<double>(cp.p) * std::fabs(cp.value - 1));
            tail_from_large = true;
        }
    }
    if (!tail_from_large) {
        const ChiP &last = report.chi_p.back();
        C = static_cast<double>(last.p) * static_cast<double>(last.p) * std::fabs(last.value - 1);
        report.flags.push_back("tail constant taken from p = " + std::to_string(last.p));
    }
    report.prime_product = static_cast<double>(product);
    report.tail_constant = C;
    report.tail_relative = std::expm1(C / static_cast<double>(opts.prime_bound));

    report.chi_infinity = chi_infinity(sys, opts.chi_infinity);
    if (report.chi_infinity.flagged) {
        report.flags.push_back("chi_infinity extrapolation not monotone");
    }
    report.c = report.chi_infinity.value * report.prime_product;
    const double rel_inf =
        report.chi_infinity.value != 0 ? report.chi_infinity.error / std::fabs(report.chi_infinity.value) : INFINITY;
    report.c_error = std::fabs(report.c) * std::hypot(rel_inf, report.tail_relative);

    if (opts.search_witnesses) {
        report.real_witness = find_nonsingular_local_solution(sys, 0, opts.witness).has_value();
        if (!report.real_witness) {
            report.flags.push_back("no non-singular real zero found; c may vanish");
        }
        for (std::int64_t p : primes) {
            if (!find_nonsingular_local_solution(sys, p, opts.witness)) {
                report.primes_without_witness.push_back(p);
            }
        }
        if (!report.primes_without_witness.empty()) {
            report.flags.push_back("no non-singular p-adic zero found at " +
                                   std::to_string(report.primes_without_witness.size()) + " primes");
        }
    }
    report.flagged = !report.flags.empty();
    return report;
}

} // namespace hasse
