#include "hasse/counting.hpp"

#include "hasse/errors.hpp"
#include "hasse/nonsingular.hpp"
#include "hasse/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace hasse {

void MixedSystem::validate() const {
    if (c2.rows() > 0 && c3.rows() > 0 && c2.cols() != c3.cols()) {
        throw std::invalid_argument("MixedSystem: C2 has " + std::to_string(c2.cols()) + " columns, C3 has " +
                                    std::to_string(c3.cols()));
    }
    if (c3.rows() == 0 && c2.rows() == 0) {
        throw std::invalid_argument("MixedSystem: no equations");
    }
}

bool MixedSystem::in_theorem_regime() const {
    const std::size_t s_ = std::max(c2.cols(), c3.cols());
    return r3() >= 2 * r2() && r2() > 0 && s_ >= 6 * r3() + (14 * r2()) / 3 + 1;
}

bool MixedSystem::coefficients_highly_non_singular() const {
    return is_highly_non_singular(c2) && is_highly_non_singular(c3);
}

long MixedSystem::expected_exponent() const {
    const long s_ = static_cast<long>(std::max(c2.cols(), c3.cols()));
    return s_ - 2 * static_cast<long>(r2()) - 3 * static_cast<long>(r3());
}

MomentPattern pattern_I(std::size_t columns, std::size_t diagonal_columns) {
    if (diagonal_columns > columns) {
        throw std::invalid_argument("pattern_I: more diagonal columns than columns");
    }
    MomentPattern p;
    for (std::size_t c = 0; c < columns; ++c) {
        p.terms.push_back({c, c < diagonal_columns ? 2u : 4u});
    }
    return p;
}

MomentPattern pattern_J(std::size_t n, std::size_t r, std::size_t l) {
    if (n < 1 || r < 2 * l) {
        throw std::invalid_argument("pattern_J: need n >= 1 and r >= 2l");
    }
    MomentPattern p;
    auto add = [&](std::size_t first, std::size_t last, unsigned power) {
        for (std::size_t c = first; c <= last; ++c) {
            p.terms.push_back({c - 1, power});
        }
    };
    if (n == 1) {
        add(1, r, 2);
        add(r + 1, r + l, 12);
        add(r + l + 1, 2 * r - l, 4);
    } else {
        const std::size_t rho = n * (r - l);
        add(1, rho + l, 2);
        add(rho + l + 1, rho + 2 * l, 8);
        add(rho + 2 * l + 1, 2 * rho, 4);
        add(2 * rho + 1, 2 * rho + l, 8);
    }
    return p;
}

DiagonalProblem problem_from_system(const MixedSystem &sys) {
    sys.validate();
    DiagonalProblem p;
    p.cubic_rows = sys.r3();
    p.quad_rows = sys.r2();
    const std::size_t s = std::max(sys.c2.cols(), sys.c3.cols());
    for (std::size_t i = 0; i < s; ++i) {
        std::vector<std::int64_t> coef;
        for (std::size_t j = 0; j < sys.r3(); ++j) {
            coef.push_back(sys.c3.entry_i64(j, i));
        }
        for (std::size_t j = 0; j < sys.r2(); ++j) {
            coef.push_back(sys.c2.entry_i64(j, i));
        }
        p.variables.push_back(std::move(coef));
    }
    return p;
}

DiagonalProblem problem_from_pattern(const IntMatrix &cubic, const IntMatrix &quad, const MomentPattern &pattern) {
    if (quad.rows() > 0 && quad.cols() != cubic.cols()) {
        throw std::invalid_argument("problem_from_pattern: cubic and quadratic column counts differ");
    }
    DiagonalProblem p;
    p.cubic_rows = cubic.rows();
    p.quad_rows = quad.rows();
    for (const MomentTerm &term : pattern.terms) {
        if (term.power == 0 || term.power % 2 != 0) {
            throw std::invalid_argument("problem_from_pattern: powers must be even and positive");
        }
        if (term.column >= cubic.cols()) {
            throw std::out_of_range("problem_from_pattern: column " + std::to_string(term.column) + " out of range");
        }
        std::vector<std::int64_t> plus;
        for (std::size_t j = 0; j < cubic.rows(); ++j) {
            plus.push_back(cubic.entry_i64(j, term.column));
        }
        for (std::size_t j = 0; j < quad.rows(); ++j) {
            plus.push_back(quad.entry_i64(j, term.column));
        }
        std::vector<std::int64_t> minus = plus;
        for (auto &v : minus) {
            v = -v;
        }
        for (unsigned k = 0; k < term.power / 2; ++k) {
            p.variables.push_back(plus);
        }
        for (unsigned k = 0; k < term.power / 2; ++k) {
            p.variables.push_back(minus);
        }
    }
    return p;
}

std::string to_string(CountMethod m) {
    return m == CountMethod::naive ? "naive" : "mitm";
}

CountMethod parse_count_method(const std::string &text) {
    if (text == "naive") {
        return CountMethod::naive;
    }
    if (text == "mitm") {
        return CountMethod::mitm;
    }
    throw std::invalid_argument("unknown count method '" + text + "'");
}

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr long kMaxP = 1'000'000;

std::string format_gib(double bytes) {
    std::ostringstream os;
    os.precision(3);
    os << bytes / double(1ULL << 30) << " GiB";
    return os.str();
}

BigInt to_bigint(u128 v) {
    const std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
    const std::uint64_t lo = static_cast<std::uint64_t>(v);
    BigInt out = BigInt(static_cast<unsigned long>(hi));
    out <<= 64;
    out += BigInt(static_cast<unsigned long>(lo));
    return out;
}

long double pow_ld(long double base, std::size_t e) {
    long double r = 1;
    for (std::size_t i = 0; i < e; ++i) {
        r *= base;
    }
    return r;
}

// Mixed-radix weights turning the vector of partial form values into one
// scalar. Each equation j gets a digit in [-B_j, B_j], where B_j bounds the
// sum over all variables, so the encoding is additive and injective on every
// partial sum.
struct Encoding {
    std::vector<i128> radix;
    long double span = 1;  // product of (2 B_j + 1)
};

Encoding make_encoding(const DiagonalProblem &p, long P) {
    Encoding enc;
    const long double p2 = static_cast<long double>(P) * P;
    const long double p3 = p2 * P;
    i128 weight = 1;
    for (std::size_t j = 0; j < p.equations(); ++j) {
        long double bound = 0;
        for (const auto &v : p.variables) {
            bound += std::fabs(static_cast<long double>(v[j])) * (j < p.cubic_rows ? p3 : p2);
        }
        enc.radix.push_back(weight);
        const long double width = 2 * bound + 1;
        enc.span *= width;
        if (enc.span > std::ldexp(1.0L, 125)) {
            throw ResourceError("counting: packed key would exceed 125 bits");
        }
        weight *= static_cast<i128>(width);
    }
    return enc;
}

template <class K>
std::vector<std::vector<K>> variable_keys(const DiagonalProblem &p, long P, const Encoding &enc) {
    std::vector<std::vector<K>> keys(p.variables.size(), std::vector<K>(2 * P + 1));
    for (std::size_t i = 0; i < p.variables.size(); ++i) {
        for (long x = -P; x <= P; ++x) {
            const i128 x2 = static_cast<i128>(x) * x;
            const i128 x3 = x2 * x;
            i128 key = 0;
            for (std::size_t j = 0; j < p.equations(); ++j) {
                const i128 value = static_cast<i128>(p.variables[i][j]) * (j < p.cubic_rows ? x3 : x2);
                key += value * enc.radix[j];
            }
            keys[i][x + P] = static_cast<K>(key);
        }
    }
    return keys;
}

template <class K>
struct Entry {
    K key;
    std::uint64_t count;
};

// Sorted (key, multiplicity) table of all partial sums over vars.
template <class K>
std::vector<Entry<K>> build_table(const std::vector<std::vector<K>> &keys, std::size_t first, std::size_t last) {
    std::vector<Entry<K>> table{{K(0), 1}};
    for (std::size_t v = first; v < last; ++v) {
        const auto &kv = keys[v];
        std::vector<Entry<K>> next;
        next.reserve(table.size() * kv.size());
        for (const auto &e : table) {
            for (K k : kv) {
                next.push_back({e.key + k, e.count});
            }
        }
        table.clear();
        table.shrink_to_fit();
        std::sort(next.begin(), next.end(), [](const Entry<K> &a, const Entry<K> &b) { return a.key < b.key; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (out > 0 && next[out - 1].key == next[i].key) {
                next[out - 1].count += next[i].count;
            } else {
                next[out++] = next[i];
            }
        }
        next.resize(out);
        next.shrink_to_fit();
        table = std::move(next);
    }
    return table;
}

// Sum over b in inner of inner[b] * stored[-(o + b)].
template <class K>
u128 join(const std::vector<Entry<K>> &stored, const std::vector<Entry<K>> &inner, K o) {
    u128 total = 0;
    const double merge_cost = double(stored.size() + inner.size());
    const double search_cost = double(inner.size()) * std::log2(double(stored.size()) + 2.0);
    if (search_cost < merge_cost) {
        for (const auto &b : inner) {
            const K target = -(o + b.key);
            auto it = std::lower_bound(stored.begin(), stored.end(), target,
                                       [](const Entry<K> &e, K t) { return e.key < t; });
            if (it != stored.end() && it->key == target) {
                total += static_cast<u128>(it->count) * b.count;
            }
        }
        return total;
    }
    // targets decrease as inner keys increase
    std::size_t ia = stored.size();
    for (const auto &b : inner) {
        const K target = -(o + b.key);
        while (ia > 0 && stored[ia - 1].key > target) {
            --ia;
        }
        if (ia == 0) {
            break;
        }
        if (stored[ia - 1].key == target) {
            total += static_cast<u128>(stored[ia - 1].count) * b.count;
        }
    }
    return total;
}

long double binomial_ld(long double n, std::size_t k) {
    long double r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

// Upper bound on the distinct partial sums over variables [first, last).
long double distinct_estimate(const DiagonalProblem &p, long P, std::size_t first, std::size_t last) {
    const long double values = 2.0L * P + 1;
    const long double tuples = pow_ld(values, last - first);
    long double box = 1;
    for (std::size_t j = 0; j < p.equations(); ++j) {
        long double bound = 0;
        for (std::size_t v = first; v < last; ++v) {
            bound += std::fabs(static_cast<long double>(p.variables[v][j])) *
                     pow_ld(static_cast<long double>(P), j < p.cubic_rows ? 3 : 2);
        }
        box *= 2 * bound + 1;
    }
    std::map<std::vector<std::int64_t>, std::size_t> groups;
    for (std::size_t v = first; v < last; ++v) {
        ++groups[p.variables[v]];
    }
    long double multisets = 1;
    for (const auto &[coef, k] : groups) {
        multisets *= binomial_ld(values + k - 1, k);
    }
    return std::min({tuples, box, multisets});
}

// Peak bytes while building the table over [first, last).
long double build_peak_bytes(const DiagonalProblem &p, long P, std::size_t first, std::size_t last,
                             std::size_t entry_bytes) {
    const long double values = 2.0L * P + 1;
    long double peak = entry_bytes;
    long double prev = 1;
    for (std::size_t v = first; v < last; ++v) {
        const long double cur = distinct_estimate(p, P, first, v + 1);
        peak = std::max(peak, (prev * values + cur) * entry_bytes);
        prev = cur;
    }
    return peak;
}

template <class K>
u128 count_mitm(const DiagonalProblem &p, long P, const CountOptions &opts, const Encoding &enc) {
    const std::size_t n = p.variables.size();
    const auto keys = variable_keys<K>(p, P, enc);
    const long double budget = opts.budget_gib * std::ldexp(1.0L, 30);
    const std::size_t entry_bytes = sizeof(Entry<K>);
    const long double values = 2.0L * P + 1;

    const std::size_t stored_vars = n / 2;
    if (pow_ld(values, stored_vars) >= std::ldexp(1.0L, 64) ||
        pow_ld(values, n - stored_vars) >= std::ldexp(1.0L, 64)) {
        throw ResourceError("meet-in-the-middle: multiplicities overflow 64 bits");
    }
    const long double stored_peak = build_peak_bytes(p, P, 0, stored_vars, entry_bytes);
    if (stored_peak > budget) {
        throw ResourceError("meet-in-the-middle stored side needs about " + format_gib(double(stored_peak)) +
                            ", budget is " + format_gib(double(budget)));
    }
    const long double stored_bytes = distinct_estimate(p, P, 0, stored_vars) * entry_bytes;

    // Largest suffix whose table fits next to the stored one; the rest of the
    // streamed side is enumerated tuple by tuple.
    std::size_t inner_first = n;
    while (inner_first > stored_vars &&
           build_peak_bytes(p, P, inner_first - 1, n, entry_bytes) + stored_bytes <= budget) {
        --inner_first;
    }

    const auto stored = build_table(keys, 0, stored_vars);
    const auto inner = build_table(keys, inner_first, n);

    const std::size_t outer_vars = inner_first - stored_vars;
    const long double outer_tuples_ld = pow_ld(values, outer_vars);
    if (outer_tuples_ld > 1e15L) {
        throw ResourceError("meet-in-the-middle streamed side has too many outer tuples");
    }
    const std::uint64_t outer_tuples = static_cast<std::uint64_t>(outer_tuples_ld);
    const std::uint64_t tasks = std::min<std::uint64_t>(outer_tuples, 4096);
    const unsigned base = static_cast<unsigned>(2 * P + 1);

    auto partials = parallel_map<u128>(tasks, opts.threads, [&](std::size_t task) {
        const std::uint64_t lo = outer_tuples * task / tasks;
        const std::uint64_t hi = outer_tuples * (task + 1) / tasks;
        u128 sum = 0;
        for (std::uint64_t idx = lo; idx < hi; ++idx) {
            std::uint64_t rest = idx;
            K o = 0;
            for (std::size_t v = stored_vars; v < inner_first; ++v) {
                o += keys[v][rest % base];
                rest /= base;
            }
            sum += join(stored, inner, o);
        }
        return sum;
    });
    u128 total = 0;
    for (u128 part : partials) {
        total += part;
    }
    return total;
}

template <class K>
u128 count_naive(const DiagonalProblem &p, long P, const CountOptions &opts, const Encoding &enc) {
    const std::size_t n = p.variables.size();
    const auto keys = variable_keys<K>(p, P, enc);
    const std::size_t base = static_cast<std::size_t>(2 * P + 1);

    // The last few variables are tabulated so the innermost step is a lookup;
    // every other variable is walked value by value.
    std::size_t tail = 0;
    std::size_t tail_size = 1;
    while (tail < n && tail_size * base <= 65536 && (tail + 1 < n || n == 1)) {
        ++tail;
        tail_size *= base;
    }
    const std::size_t head = n - tail;
    const auto tail_table = build_table(keys, head, n);

    std::size_t split = std::min<std::size_t>(head, 2);
    std::size_t tasks = 1;
    for (std::size_t i = 0; i < split; ++i) {
        tasks *= base;
    }

    auto lookup = [&](K partial) -> u128 {
        const K target = -partial;
        auto it = std::lower_bound(tail_table.begin(), tail_table.end(), target,
                                   [](const Entry<K> &e, K t) { return e.key < t; });
        return (it != tail_table.end() && it->key == target) ? it->count : 0;
    };

    auto partials = parallel_map<u128>(tasks, opts.threads, [&](std::size_t task) {
        std::vector<K> partial(head + 1, K(0));
        std::size_t rest = task;
        for (std::size_t v = 0; v < split; ++v) {
            partial[v + 1] = partial[v] + keys[v][rest % base];
            rest /= base;
        }
        if (split == head) {
            return lookup(partial[head]);
        }
        // odometer over variables split..head-1
        std::vector<std::size_t> digit(head, 0);
        for (std::size_t v = split; v < head; ++v) {
            partial[v + 1] = partial[v] + keys[v][0];
        }
        u128 sum = 0;
        while (true) {
            sum += lookup(partial[head]);
            std::size_t v = head;
            bool exhausted = true;
            while (v > split) {
                --v;
                if (++digit[v] < base) {
                    exhausted = false;
                    break;
                }
                digit[v] = 0;
            }
            if (exhausted) {
                break;
            }
            for (std::size_t w = v; w < head; ++w) {
                partial[w + 1] = partial[w] + keys[w][digit[w]];
            }
        }
        return sum;
    });
    u128 total = 0;
    for (u128 part : partials) {
        total += part;
    }
    return total;
}

} // namespace

double mitm_stored_bytes(const DiagonalProblem &problem, long P) {
    return static_cast<double>(build_peak_bytes(problem, P, 0, problem.variables.size() / 2, 16));
}

CountRecord count_problem(const DiagonalProblem &problem, long P, const CountOptions &opts) {
    if (P < 0 || P > kMaxP) {
        throw std::invalid_argument("count: P must lie in [0, " + std::to_string(kMaxP) + "]");
    }
    for (const auto &v : problem.variables) {
        if (v.size() != problem.equations()) {
            throw std::invalid_argument("count: coefficient vector length mismatch");
        }
    }
    if (opts.budget_gib <= 0) {
        throw std::invalid_argument("count: budget must be positive");
    }
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = problem.variables.size();
    if (pow_ld(2.0L * P + 1, n) >= std::ldexp(1.0L, 127)) {
        throw ResourceError("count: tuple count exceeds 127 bits");
    }
    if (opts.method == CountMethod::naive && pow_ld(2.0L * P + 1, n) > opts.naive_tuple_limit) {
        throw ResourceError("naive enumeration of " + std::to_string(n) + " variables at P=" + std::to_string(P) +
                            " exceeds the tuple limit");
    }

    const Encoding enc = make_encoding(problem, P);
    const bool narrow = enc.span < std::ldexp(1.0L, 62);
    u128 total;
    if (opts.method == CountMethod::naive) {
        total = narrow ? count_naive<std::int64_t>(problem, P, opts, enc) : count_naive<i128>(problem, P, opts, enc);
    } else {
        total = narrow ? count_mitm<std::int64_t>(problem, P, opts, enc) : count_mitm<i128>(problem, P, opts, enc);
    }

    CountRecord rec;
    rec.P = P;
    rec.count = to_bigint(total);
    rec.method = opts.method;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

CountRecord count_N(const MixedSystem &sys, long P, const CountOptions &opts) {
    return count_problem(problem_from_system(sys), P, opts);
}

CountRecord count_mean_value_I(const AuxMatrix &d, long P, const CountOptions &opts) {
    if (auto defect = auxiliary_defect(d.matrix, d.spec)) {
        throw std::invalid_argument("count_mean_value_I: " + *defect);
    }
    return count_mean_value_I(d.matrix, d.spec.R(), P, opts);
}

CountRecord count_mean_value_I(const IntMatrix &d, std::size_t diagonal_columns, long P, const CountOptions &opts) {
    return count_problem(problem_from_pattern(d, IntMatrix(0, d.cols()), pattern_I(d.cols(), diagonal_columns)), P,
                         opts);
}

CountRecord count_mean_value_J(const IntMatrix &d2, const AuxMatrix &d3, std::size_t n, long P,
                               const CountOptions &opts) {
    const AuxSpec &spec = d3.spec;
    if (spec.n != n || spec.t != spec.r || spec.omega != 0) {
        throw std::invalid_argument("count_mean_value_J: cubic matrix must be of type (n,r,0)_{r,l}");
    }
    if (auto defect = auxiliary_defect(d3.matrix, spec)) {
        throw std::invalid_argument("count_mean_value_J: " + *defect);
    }
    const std::size_t rho = n * (spec.r - spec.l);
    if (d2.rows() != spec.l || d2.cols() != 2 * rho + spec.l) {
        throw std::invalid_argument("count_mean_value_J: quadratic matrix must be " + std::to_string(spec.l) + "x" +
                                    std::to_string(2 * rho + spec.l));
    }
    return count_problem(problem_from_pattern(d3.matrix, d2, pattern_J(n, spec.r, spec.l)), P, opts);
}

CountRecord count_tenth_moment(long P, const CountOptions &opts) {
    DiagonalProblem p;
    p.cubic_rows = 1;
    p.quad_rows = 1;
    for (int i = 0; i < 5; ++i) {
        p.variables.push_back({1, 1});
    }
    for (int i = 0; i < 5; ++i) {
        p.variables.push_back({-1, -1});
    }
    return count_problem(p, P, opts);
}

GrowthFit estimate_growth_exponent(const std::vector<CountRecord> &records) {
    if (records.size() < 3) {
        throw std::invalid_argument("estimate_growth_exponent: need at least 3 records");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto &r = records[i];
        if (r.P <= 0 || r.count <= 0) {
            throw std::invalid_argument("estimate_growth_exponent: P and counts must be positive");
        }
        if (i > 0 && r.P <= records[i - 1].P) {
            throw std::invalid_argument("estimate_growth_exponent: P must be strictly increasing");
        }
        xs.push_back(std::log(static_cast<double>(r.P)));
        // log of a GMP integer without overflow
        long exp2 = 0;
        const double mant = mpz_get_d_2exp(&exp2, r.count.get_mpz_t());
        ys.push_back(std::log(mant) + static_cast<double>(exp2) * std::log(2.0));
    }
    const double k = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / k;
    const double my = sy / k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    GrowthFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.max_residual = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        fit.max_residual = std::max(fit.max_residual, std::fabs(ys[i] - (fit.intercept + fit.slope * xs[i])));
    }
    return fit;
}

} // namespace hasse
