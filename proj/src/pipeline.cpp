#include "hasse/pipeline.hpp"

#include "hasse/errors.hpp"
#include "hasse/nonsingular.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hasse {

namespace {

// Regime bound s >= 6 r3 + floor(14 r2 / 3) + 1.
std::size_t regime_min_s(std::size_t r2, std::size_t r3) {
    return 6 * r3 + (14 * r2) / 3 + 1;
}

IntMatrix signed_draw(std::size_t rows, std::size_t cols, std::mt19937_64 &rng) {
    IntMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const long magnitude = static_cast<long>(rng() % 9) + 1;
            m(i, j) = (rng() & 1) ? -magnitude : magnitude;
        }
    }
    return m;
}

bool rows_indefinite(const IntMatrix &m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        bool pos = false, neg = false;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            pos = pos || sgn(m(i, j)) > 0;
            neg = neg || sgn(m(i, j)) < 0;
        }
        if (!pos || !neg) {
            return false;
        }
    }
    return true;
}

double power(long P, long e) {
    return std::pow(static_cast<double>(P), static_cast<double>(e));
}

} // namespace

MixedSystem generate_system(std::size_t r2, std::size_t r3, std::size_t s, std::uint64_t seed,
                            const GenerateOptions &opts) {
    if (!opts.allow_out_of_regime) {
        if (!(r3 >= 2 * r2 && r2 > 0)) {
            throw std::invalid_argument("generate_system: (r2, r3) = (" + std::to_string(r2) + ", " +
                                        std::to_string(r3) + ") violates r3 >= 2 r2 > 0");
        }
        if (s < regime_min_s(r2, r3)) {
            throw std::invalid_argument("generate_system: s = " + std::to_string(s) + " is below " +
                                        std::to_string(regime_min_s(r2, r3)));
        }
    }
    if (r2 + r3 == 0 || r2 > s || r3 > s) {
        throw std::invalid_argument("generate_system: need 1 <= r2 + r3 and r2, r3 <= s");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t attempt = 0; attempt < opts.max_tries; ++attempt) {
        MixedSystem sys{signed_draw(r2, s, rng), signed_draw(r3, s, rng)};
        if (rows_indefinite(sys.c2) && is_highly_non_singular(sys.c2) && is_highly_non_singular(sys.c3)) {
            return sys;
        }
    }
    throw std::runtime_error("generate_system: no admissible system within " + std::to_string(opts.max_tries) +
                             " draws");
}

void ExperimentConfig::validate() const {
    system.validate();
    if (P_list.empty()) {
        throw std::invalid_argument("ExperimentConfig: empty P list");
    }
    for (std::size_t k = 0; k < P_list.size(); ++k) {
        if (P_list[k] < 1 || (k > 0 && P_list[k] <= P_list[k - 1])) {
            throw std::invalid_argument("ExperimentConfig: P list must be positive and strictly increasing");
        }
    }
    if (!(budget_gib > 0)) {
        throw std::invalid_argument("ExperimentConfig: budget must be positive");
    }
    if (!(band > 1)) {
        throw std::invalid_argument("ExperimentConfig: band must exceed 1");
    }
}

AsymptoticReport verify_asymptotic(const ExperimentConfig &cfg) {
    cfg.validate();
    return verify_asymptotic(cfg, compute_constant_c(cfg.system, cfg.density));
}

AsymptoticReport verify_asymptotic(const ExperimentConfig &cfg, const DensityReport &density) {
    cfg.validate();
    AsymptoticReport report;
    report.exponent = cfg.system.expected_exponent();
    report.density = density;
    report.c = density.c;
    report.c_error = density.c_error;
    report.c_flagged = density.flagged;

    CountOptions opts;
    opts.method = cfg.method;
    opts.budget_gib = cfg.budget_gib;
    opts.threads = cfg.threads;
    const DiagonalProblem problem = problem_from_system(cfg.system);
    for (long P : cfg.P_list) {
        if (cfg.method == CountMethod::mitm && mitm_stored_bytes(problem, P) > cfg.budget_gib * 1073741824.0) {
            report.warnings.push_back("P = " + std::to_string(P) + " skipped: tables exceed the memory budget");
            continue;
        }
        try {
            const CountRecord rec = count_problem(problem, P, opts);
            AsymptoticRow row;
            row.P = P;
            row.N = rec.count;
            row.seconds = rec.seconds;
            row.method = to_string(rec.method);
            row.ratio = rec.count.get_d() / power(P, report.exponent);
            report.rows.push_back(row);
        } catch (const ResourceError &e) {
            report.warnings.push_back("P = " + std::to_string(P) + " skipped: " + e.what());
        }
    }

    if (report.rows.empty() || !(report.c > 0)) {
        report.verdict = "undetermined";
        return report;
    }
    const double last = report.rows.back().ratio;
    report.within_band = last >= report.c / cfg.band && last <= report.c * cfg.band;
    report.shrinking = true;
    double previous = INFINITY;
    for (const AsymptoticRow &row : report.rows) {
        const double deviation = std::fabs(row.ratio - report.c);
        report.shrinking = report.shrinking && deviation <= previous;
        previous = deviation;
    }
    report.verdict = report.within_band && report.shrinking ? "consistent" : "inconsistent";
    return report;
}

std::string to_string(Suite s) {
    switch (s) {
    case Suite::prop22: return "prop22";
    case Suite::hua: return "hua";
    case Suite::mv23: return "mv23";
    }
    return "?";
}

Suite parse_suite(const std::string &text) {
    for (Suite s : {Suite::prop22, Suite::hua, Suite::mv23}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw std::invalid_argument("unknown suite '" + text + "'");
}

double suite_ceiling(Suite which, const AuxSpec &spec) {
    switch (which) {
    case Suite::prop22:
        return 3.0 * static_cast<double>((spec.n - 1) * (spec.r - spec.l) + spec.t + spec.omega) -
               2.0 * static_cast<double>(spec.l);
    case Suite::hua: return 2.0;
    case Suite::mv23: return 31.0 / 6.0;
    }
    return 0;
}

double suite_default_slack(Suite which) {
    switch (which) {
    case Suite::prop22: return 0.1;
    case Suite::hua: return 0.3;
    case Suite::mv23: return 0.4;
    }
    return 0;
}

std::vector<long> suite_default_sizes(Suite which) {
    if (which == Suite::mv23) {
        return {4, 8, 16, 32};
    }
    return {8, 16, 32, 64, 128};
}

AuxMatrix random_auxiliary(const AuxSpec &spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::vector<IntMatrix> blocks;
    for (std::size_t k = 1; k <= spec.n; ++k) {
        const std::size_t rows = spec.block_rows(k);
        const std::size_t cols = spec.block_cols(k);
        blocks.push_back(cols == 0 ? IntMatrix(rows, 0) : random_totally_non_singular(rows, cols, rng));
    }
    std::vector<BigInt> diag;
    for (std::size_t i = 0; i < spec.R(); ++i) {
        diag.emplace_back(static_cast<long>(rng() % 9) + 1);
    }
    return build_auxiliary(blocks, diag, spec);
}

SuiteReport exponent_suite(Suite which, const SuiteOptions &opts) {
    SuiteReport report;
    report.which = which;
    report.slack = opts.slack.value_or(suite_default_slack(which));
    report.ceiling = suite_ceiling(which, opts.spec);
    const std::vector<long> sizes = opts.sizes.empty() ? suite_default_sizes(which) : opts.sizes;
    if (sizes.size() < 3) {
        throw std::invalid_argument("exponent_suite: need at least three P values");
    }
    std::ostringstream desc;
    std::optional<AuxMatrix> aux;
    switch (which) {
    case Suite::prop22:
        aux = random_auxiliary(opts.spec, opts.seed);
        desc << "I(P, D) for a type " << to_string(opts.spec) << " auxiliary matrix";
        break;
    case Suite::hua: desc << "x^3 + y^3 = u^3 + v^3"; break;
    case Suite::mv23: desc << "five-against-five squares and cubes"; break;
    }
    report.description = desc.str();
    for (long P : sizes) {
        switch (which) {
        case Suite::prop22: report.records.push_back(count_mean_value_I(*aux, P, opts.count)); break;
        case Suite::hua: report.records.push_back(count_mean_value_I(IntMatrix{{1}}, 0, P, opts.count)); break;
        case Suite::mv23: report.records.push_back(count_tenth_moment(P, opts.count)); break;
        }
    }
    report.fit = estimate_growth_exponent(report.records);
    report.pass = report.fit.slope <= report.ceiling + report.slack;
    return report;
}

} // namespace hasse
