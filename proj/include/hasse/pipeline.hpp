#pragma once

// Experiment plumbing: seeded systems in the theorem regime, the N(P)
// normalization table against c, and the growth-exponent suites.

#include "hasse/auxiliary.hpp"
#include "hasse/counting.hpp"
#include "hasse/densities.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hasse {

struct GenerateOptions {
    bool allow_out_of_regime = false;
    std::size_t max_tries = 100'000;
};

/// Coefficients of magnitude 1..9 with random signs from mt19937_64(seed),
/// redrawn until both matrices are highly non-singular and every quadratic
/// row has coefficients of both signs. Throws std::invalid_argument outside
/// r3 >= 2 r2 > 0, s >= 6 r3 + floor(14 r2 / 3) + 1 unless allowed.
MixedSystem generate_system(std::size_t r2, std::size_t r3, std::size_t s, std::uint64_t seed,
                            const GenerateOptions &opts = {});

struct ExperimentConfig {
    MixedSystem system;
    std::string system_source;
    std::vector<long> P_list;
    CountMethod method = CountMethod::mitm;
    double budget_gib = 3.0;
    unsigned threads = 0;
    DensityOptions density;
    double band = 2.0;

    // P list strictly increasing and non-empty, budget > 0, band > 1.
    void validate() const;
};

struct AsymptoticRow {
    long P = 0;
    BigInt N;
    double ratio = 0;  // N(P) / P^{s - 2 r2 - 3 r3}
    double seconds = 0;
    std::string method;
};

struct AsymptoticReport {
    std::vector<AsymptoticRow> rows;
    long exponent = 0;
    double c = 0;
    double c_error = 0;
    bool c_flagged = false;
    bool within_band = false;  // last ratio in [c / band, c * band]
    bool shrinking = false;
    std::string verdict;  // consistent, inconsistent or undetermined
    std::vector<std::string> warnings;
    std::optional<DensityReport> density;
};

AsymptoticReport verify_asymptotic(const ExperimentConfig &cfg);
/// Same with c taken from an existing report.
AsymptoticReport verify_asymptotic(const ExperimentConfig &cfg, const DensityReport &density);

enum class Suite { prop22, hua, mv23 };

std::string to_string(Suite s);
Suite parse_suite(const std::string &text);

struct SuiteOptions {
    std::vector<long> sizes;  // empty: the suite's default
    std::optional<double> slack;
    AuxSpec spec{1, 1, 0, 2, 1};  // prop22 only
    std::uint64_t seed = 7;
    CountOptions count;
};

struct SuiteReport {
    Suite which = Suite::hua;
    std::string description;
    std::vector<CountRecord> records;
    GrowthFit fit{};
    double ceiling = 0;
    double slack = 0;
    bool pass = false;  // slope <= ceiling + slack
};

/// prop22: I(P, D) for a seeded auxiliary matrix of the given type against
/// 3((n-1)(r-l) + t + omega) - 2l. hua: the fourth moment of g against 2.
/// mv23: the mixed tenth moment against 31/6.
SuiteReport exponent_suite(Suite which, const SuiteOptions &opts = {});

double suite_ceiling(Suite which, const AuxSpec &spec);
double suite_default_slack(Suite which);
std::vector<long> suite_default_sizes(Suite which);

// Seeded auxiliary matrix of the given type: totally non-singular blocks
// with entries in [1, 9] and diagonal entries in [1, 9].
AuxMatrix random_auxiliary(const AuxSpec &spec, std::uint64_t seed);

} // namespace hasse
