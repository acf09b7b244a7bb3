// Command-line front end. Every run prints the effective configuration and
// the git blob ids of the files it read before the results.

#include "hasse/arcs.hpp"
#include "hasse/auxiliary.hpp"
#include "hasse/counting.hpp"
#include "hasse/densities.hpp"
#include "hasse/errors.hpp"
#include "hasse/expsum.hpp"
#include "hasse/io.hpp"
#include "hasse/nonsingular.hpp"
#include "hasse/pipeline.hpp"

#include "CLI11.hpp"

#include <iomanip>
#include <iostream>
#include <sstream>

using namespace hasse;

namespace {

struct Globals {
    double budget_gib = 8.0;
    unsigned threads = 0;
    std::uint64_t seed = 7;
    std::string out = "csv";
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    char sep = ',';
    bool show_header = true;
};

class Run {
public:
    Run(const CLI::App &app, std::string command) : app_(app), command_(std::move(command)) {}

    std::string load(const std::string &path) {
        std::string content = read_file(path);
        inputs_.push_back({{"path", path}, {"git_blob_sha1", git_blob_sha1(content)}});
        return content;
    }

    void emit(const Globals &g, const Json &result, const Table &table) const {
        const Json config = collect(app_);
        if (g.out == "json") {
            Json doc{{"command", command_}, {"config", config}, {"inputs", inputs_}, {"result", result}};
            std::cout << doc.dump(2) << '\n';
            return;
        }
        std::cout << "# command: " << command_ << '\n';
        std::cout << "# config: " << config.dump() << '\n';
        for (const Json &in : inputs_) {
            std::cout << "# input: " << in["path"].get<std::string>() << ' ' << in["git_blob_sha1"].get<std::string>()
                      << '\n';
        }
        auto line = [&](const std::vector<std::string> &cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                std::cout << (i ? std::string(1, table.sep) : "") << cells[i];
            }
            std::cout << '\n';
        };
        if (table.show_header) {
            line(table.header);
        }
        for (const auto &row : table.rows) {
            line(row);
        }
    }

private:
    // Effective value of every option along the parsed subcommand chain.
    static Json collect(const CLI::App &app) {
        Json j = Json::object();
        for (const CLI::Option *opt : app.get_options()) {
            if (opt->get_lnames().empty() && opt->get_name().empty()) {
                continue;
            }
            const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
            if (name == "help" || name == "config") {
                continue;
            }
            if (opt->count() > 0) {
                const auto &res = opt->results();
                j[name] = res.size() == 1 ? Json(res.front()) : Json(res);
            } else if (!opt->get_default_str().empty()) {
                j[name] = opt->get_default_str();
            }
        }
        for (const CLI::App *sub : app.get_subcommands()) {
            j[sub->get_name()] = collect(*sub);
        }
        return j;
    }

    const CLI::App &app_;
    std::string command_;
    Json inputs_ = Json::array();
};

std::string fmt(double v, int digits = 17) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::string join(const std::vector<std::int64_t> &v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
    }
    return out;
}

std::vector<double> read_numbers(const std::string &line) {
    std::istringstream in(line);
    std::vector<double> v;
    double x;
    while (in >> x) {
        v.push_back(x);
    }
    return v;
}

// Positional arguments, or one point per non-empty stdin line.
std::vector<std::vector<double>> points(const std::vector<double> &args, std::size_t arity) {
    std::vector<std::vector<double>> out;
    if (!args.empty()) {
        if (args.size() % arity != 0) {
            throw std::invalid_argument("expected a multiple of " + std::to_string(arity) + " numbers");
        }
        for (std::size_t i = 0; i < args.size(); i += arity) {
            out.emplace_back(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i + arity));
        }
        return out;
    }
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') {
            continue;
        }
        std::vector<double> v = read_numbers(line);
        if (arity != 0 && v.size() != arity) {
            throw std::invalid_argument("line '" + line + "' needs " + std::to_string(arity) + " numbers");
        }
        out.push_back(std::move(v));
    }
    return out;
}

struct SystemSource {
    std::string path;
    std::vector<std::size_t> generate;  // r2, r3, s
    bool allow_out_of_regime = false;

    void add(CLI::App *cmd) {
        cmd->add_option("--system", path, "system file (text or JSON)");
        cmd->add_option("--generate", generate, "r2,r3,s for a seeded system")->delimiter(',')->expected(3);
        cmd->add_flag("--allow-out-of-regime", allow_out_of_regime);
    }

    MixedSystem get(Run &run, std::uint64_t seed) const {
        if (!path.empty()) {
            return parse_system(run.load(path));
        }
        if (generate.size() == 3) {
            GenerateOptions go;
            go.allow_out_of_regime = allow_out_of_regime;
            return generate_system(generate[0], generate[1], generate[2], seed, go);
        }
        throw std::invalid_argument("need --system FILE or --generate r2,r3,s");
    }
};

struct DensityFlags {
    std::int64_t pmax = 97;
    unsigned imax = 6;
    std::string route = "expsum";
    double work_limit = 3e7;
    std::size_t samples = 10'000'000;
    std::vector<double> eps = {1.0, 0.7, 0.5};
    unsigned strata = 64;
    double bias_order = 2.0;
    bool no_witnesses = false;

    void add(CLI::App *cmd) {
        cmd->add_option("--pmax", pmax, "largest prime in the product")->capture_default_str();
        cmd->add_option("--imax", imax, "largest level p^i")->capture_default_str();
        cmd->add_option("--route", route, "chi_p route")->check(CLI::IsMember({"expsum", "congruence"}))->capture_default_str();
        cmd->add_option("--work-limit", work_limit)->capture_default_str();
        cmd->add_option("--samples", samples, "Monte Carlo samples per eps")->capture_default_str();
        cmd->add_option("--eps", eps, "decreasing box half-widths")->delimiter(',')->capture_default_str();
        cmd->add_option("--strata", strata)->capture_default_str();
        cmd->add_option("--bias-order", bias_order)->capture_default_str();
        cmd->add_flag("--no-witnesses", no_witnesses);
    }

    DensityOptions get(const Globals &g) const {
        DensityOptions o;
        o.prime_bound = pmax;
        o.i_max = imax;
        o.chi_p.route = route == "congruence" ? ChiRoute::congruence : ChiRoute::exponential_sum;
        o.chi_p.work_limit = work_limit;
        o.chi_p.threads = g.threads;
        o.chi_infinity.samples = samples;
        o.chi_infinity.eps = eps;
        o.chi_infinity.strata = strata;
        o.chi_infinity.bias_order = bias_order;
        o.chi_infinity.seed = g.seed;
        o.chi_infinity.threads = g.threads;
        o.search_witnesses = !no_witnesses;
        o.witness.seed = g.seed;
        return o;
    }
};

Table count_table(const std::vector<CountRecord> &recs) {
    Table t{{"P", "count", "method", "seconds"}, {}};
    for (const CountRecord &r : recs) {
        t.rows.push_back({std::to_string(r.P), r.count.get_str(), to_string(r.method), fmt(r.seconds, 6)});
    }
    return t;
}

Json count_json(const std::vector<CountRecord> &recs) {
    Json j = Json::array();
    for (const CountRecord &r : recs) {
        j.push_back(to_json(r));
    }
    return j;
}

Table density_table(const DensityReport &r) {
    Table t{{"quantity", "value", "detail"}, {}};
    t.rows.push_back({"chi_infinity", fmt(r.chi_infinity.value), "error " + fmt(r.chi_infinity.error, 6)});
    for (const ChiP &c : r.chi_p) {
        t.rows.push_back({"chi_" + std::to_string(c.p), fmt(c.value),
                          "i_used " + std::to_string(c.i_used) + (c.stabilized ? "" : " unstabilized")});
    }
    t.rows.push_back({"prime_product", fmt(r.prime_product), ""});
    t.rows.push_back({"tail_relative", fmt(r.tail_relative, 6), "C " + fmt(r.tail_constant, 6)});
    t.rows.push_back({"c", fmt(r.c), "error " + fmt(r.c_error, 6)});
    if (r.series) {
        t.rows.push_back({"S(Y)", fmt(r.series->value), "Y " + fmt(r.series->Y, 6)});
    }
    for (const std::string &f : r.flags) {
        t.rows.push_back({"flag", "", f});
    }
    return t;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Counting and local-density tools for diagonal cubic and quadratic systems"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value file; command-line flags take precedence");
    Globals g;
    app.add_option("--budget-gib", g.budget_gib, "memory budget for counting tables")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads, 0 for all cores")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for generators and sampling")->capture_default_str();
    app.add_option("--out", g.out, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    std::string command;
    for (int i = 0; i < argc; ++i) {
        command += (i ? " " : "") + std::string(argv[i]);
    }
    Run run(app, command);

    // matrix check
    auto *matrix = app.add_subcommand("matrix", "matrix classifiers");
    matrix->require_subcommand(1);
    auto *check = matrix->add_subcommand("check", "test a matrix file");
    std::string kind, spec_text, matrix_file;
    check->add_option("--kind", kind)->required()->check(CLI::IsMember({"hns", "tns", "aux"}));
    check->add_option("--spec", spec_text, "n,t,omega,r,l (aux only)");
    check->add_option("file", matrix_file)->required();
    check->callback([&] {
        const IntMatrix m = parse_matrix(run.load(matrix_file));
        bool ok = false;
        std::string reason;
        if (kind == "hns") {
            ok = is_highly_non_singular(m);
        } else if (kind == "tns") {
            ok = is_totally_non_singular(m);
        } else {
            if (spec_text.empty()) {
                throw std::invalid_argument("--kind aux needs --spec n,t,omega,r,l");
            }
            const auto defect = auxiliary_defect(m, parse_aux_spec(spec_text));
            ok = !defect;
            reason = defect.value_or("");
        }
        Json j{{"kind", kind}, {"rows", m.rows()}, {"cols", m.cols()}, {"pass", ok}};
        if (!reason.empty()) {
            j["reason"] = reason;
        }
        run.emit(g, j, Table{{"kind", "rows", "cols", "pass", "reason"},
                             {{kind, std::to_string(m.rows()), std::to_string(m.cols()), ok ? "true" : "false", reason}}});
    });

    // count
    auto *count = app.add_subcommand("count", "exact integer point counts");
    std::string count_what, method = "mitm", quad_file;
    std::vector<long> Ps;
    std::size_t diagonal_columns = 0;
    SystemSource count_system;
    count->add_option("what", count_what)->required()->check(CLI::IsMember({"N", "meanI", "meanJ", "moment10"}));
    count->add_option("--P", Ps, "box sizes")->required()->delimiter(',');
    count->add_option("--method", method)->check(CLI::IsMember({"naive", "mitm"}))->capture_default_str();
    count_system.add(count);
    count->add_option("--matrix", matrix_file, "cubic coefficient matrix (meanI, meanJ)");
    count->add_option("--spec", spec_text, "auxiliary type n,t,omega,r,l of --matrix");
    count->add_option("--diagonal-columns", diagonal_columns, "meanI on a plain matrix: columns with power 2");
    count->add_option("--quad", quad_file, "quadratic matrix for meanJ");
    count->callback([&] {
        CountOptions co;
        co.method = parse_count_method(method);
        co.budget_gib = g.budget_gib;
        co.threads = g.threads;
        std::vector<CountRecord> recs;
        if (count_what == "N") {
            const MixedSystem sys = count_system.get(run, g.seed);
            for (long P : Ps) {
                recs.push_back(count_N(sys, P, co));
            }
        } else if (count_what == "moment10") {
            for (long P : Ps) {
                recs.push_back(count_tenth_moment(P, co));
            }
        } else {
            if (matrix_file.empty()) {
                throw std::invalid_argument(count_what + " needs --matrix FILE");
            }
            const IntMatrix m = parse_matrix(run.load(matrix_file));
            if (count_what == "meanI" && spec_text.empty()) {
                for (long P : Ps) {
                    recs.push_back(count_mean_value_I(m, diagonal_columns, P, co));
                }
            } else {
                if (spec_text.empty()) {
                    throw std::invalid_argument(count_what + " needs --spec n,t,omega,r,l");
                }
                const AuxSpec spec = parse_aux_spec(spec_text);
                if (auto defect = auxiliary_defect(m, spec)) {
                    throw std::invalid_argument("--matrix: " + *defect);
                }
                const AuxMatrix aux{m, spec, block_corners(spec)};
                IntMatrix quad;
                if (count_what == "meanJ") {
                    if (quad_file.empty()) {
                        throw std::invalid_argument("meanJ needs --quad FILE");
                    }
                    quad = parse_matrix(run.load(quad_file));
                }
                for (long P : Ps) {
                    recs.push_back(count_what == "meanI" ? count_mean_value_I(aux, P, co)
                                                         : count_mean_value_J(quad, aux, spec.n, P, co));
                }
            }
        }
        run.emit(g, Json{{"counts", count_json(recs)}}, count_table(recs));
    });

    // expsum
    auto *expsum = app.add_subcommand("expsum", "exponential sums and the oscillatory integral");
    std::string sum_what;
    std::vector<double> sum_args;
    double sum_P = 0, tol = 1e-10;
    expsum->add_option("what", sum_what)->required()->check(CLI::IsMember({"g", "f", "S", "v"}));
    expsum->add_option("args", sum_args, "g: eta; f: alpha beta; S: q a3 a2; v: beta3 beta2. Omitted: read stdin")
        ->allow_extra_args();
    expsum->add_option("--P", sum_P, "box size (g, f, v)");
    expsum->add_option("--tol", tol, "quadrature tolerance (v)")->capture_default_str();
    expsum->callback([&] {
        const std::size_t arity = sum_what == "g" ? 1 : sum_what == "S" ? 3 : 2;
        if (sum_what != "S" && !(sum_P >= 1)) {
            throw std::invalid_argument(sum_what + " needs --P >= 1");
        }
        Table t{{"re", "im"}, {}, ' ', false};
        Json values = Json::array();
        for (const auto &x : points(sum_args, arity)) {
            Complex z;
            double err = 0;
            if (sum_what == "g") {
                z = eval_g(x[0], static_cast<long>(sum_P));
            } else if (sum_what == "f") {
                z = eval_f(x[0], x[1], static_cast<long>(sum_P));
            } else if (sum_what == "S") {
                z = complete_sum_S(static_cast<std::int64_t>(x[0]), static_cast<std::int64_t>(x[1]),
                                   static_cast<std::int64_t>(x[2]));
            } else {
                const OscillatoryResult r = oscillatory_v(x[0], x[1], sum_P, tol);
                z = r.value;
                err = r.error_estimate;
            }
            t.rows.push_back({fmt(z.real()), fmt(z.imag())});
            Json v{{"point", x}, {"re", z.real()}, {"im", z.imag()}};
            if (sum_what == "v") {
                v["error_estimate"] = err;
            }
            values.push_back(v);
        }
        run.emit(g, Json{{"values", values}}, t);
    });

    // arcs classify
    auto *arcs = app.add_subcommand("arcs", "major and minor arcs");
    arcs->require_subcommand(1);
    auto *classify = arcs->add_subcommand("classify", "label points read from stdin");
    std::string level = "1d";
    double arc_P = 0;
    std::size_t arc_w = 1, arc_r3 = 1;
    classify->add_option("--level", level)->check(CLI::IsMember({"1d", "M", "N"}))->capture_default_str();
    classify->add_option("--P", arc_P)->required();
    classify->add_option("--w", arc_w, "coordinates per point (M, N)")->capture_default_str();
    classify->add_option("--r3", arc_r3, "leading cubic coordinates")->capture_default_str();
    classify->callback([&] {
        ArcParams params{arc_P, parse_arc_level(level), arc_w, arc_r3};
        params.validate();
        const std::size_t arity = params.level == ArcLevel::cubic_1d ? 1 : arc_w;
        Table t{{"label", "q", "a"}, {}};
        Json labels = Json::array();
        for (const auto &x : points({}, arity)) {
            const ArcLabel l = params.level == ArcLevel::cubic_1d ? classify_1d(x[0], params) : classify_multi(x, params);
            t.rows.push_back({l.major ? "major" : "minor", l.major ? std::to_string(l.q) : "", join(l.a, ';')});
            Json j = to_json(l);
            j["point"] = x;
            labels.push_back(j);
        }
        run.emit(g, Json{{"labels", labels}}, t);
    });

    // density
    auto *density = app.add_subcommand("density", "singular series, local densities and c");
    std::string density_what;
    double Y = 0;
    std::int64_t single_p = 0;
    SystemSource density_system;
    DensityFlags dflags;
    density->add_option("what", density_what)->required()->check(CLI::IsMember({"series", "chip", "chiinf", "constant"}));
    density_system.add(density);
    dflags.add(density);
    density->add_option("--Y", Y, "truncation of the singular series");
    density->add_option("--p", single_p, "one prime instead of all p <= pmax (chip)");
    density->callback([&] {
        const MixedSystem sys = density_system.get(run, g.seed);
        const DensityOptions opts = dflags.get(g);
        SeriesOptions so;
        so.threads = g.threads;
        if (density_what == "series") {
            const SeriesValue v = singular_series(sys, Y > 0 ? Y : 20, so);
            Table t{{"q", "A(q)"}, {}};
            for (std::size_t q = 0; q < v.terms.size(); ++q) {
                t.rows.push_back({std::to_string(q + 1), fmt(v.terms[q])});
            }
            t.rows.push_back({"sum", fmt(v.value)});
            run.emit(g, to_json(v), t);
        } else if (density_what == "chip") {
            Table t{{"p", "value", "i_used", "stabilized", "route"}, {}};
            Json arr = Json::array();
            const std::vector<std::int64_t> ps =
                single_p > 0 ? std::vector<std::int64_t>{single_p} : primes_up_to(opts.prime_bound);
            for (std::int64_t p : ps) {
                const ChiP c = chi_p(sys, p, opts.i_max, opts.chi_p);
                t.rows.push_back({std::to_string(p), fmt(c.value), std::to_string(c.i_used),
                                  c.stabilized ? "true" : "false", to_string(c.route)});
                arr.push_back(to_json(c));
            }
            run.emit(g, Json{{"parameters", to_json(opts)}, {"chi_p", arr}}, t);
        } else if (density_what == "chiinf") {
            const ChiInfinityResult r = chi_infinity(sys, opts.chi_infinity);
            Table t{{"eps", "estimate", "sigma"}, {}};
            for (std::size_t k = 0; k < r.eps.size(); ++k) {
                t.rows.push_back({fmt(r.eps[k], 6), fmt(r.estimates[k]), fmt(r.sigmas[k], 6)});
            }
            t.rows.push_back({"0", fmt(r.value), fmt(r.error, 6)});
            run.emit(g, Json{{"parameters", to_json(opts)}, {"chi_infinity", to_json(r)}}, t);
        } else {
            DensityReport r = compute_constant_c(sys, opts);
            if (Y > 0) {
                r.series = singular_series(sys, Y, so);
            }
            run.emit(g, to_json(r), density_table(r));
        }
    });

    // verify
    auto *verify = app.add_subcommand("verify", "N(P) / P^(s - 2 r2 - 3 r3) against c");
    SystemSource verify_system;
    verify_system.generate = {1, 2, 17};
    DensityFlags vflags;
    std::vector<long> verify_P = {2, 3, 4};
    double band = 2.0;
    verify_system.add(verify);
    vflags.add(verify);
    verify->add_option("--P", verify_P)->delimiter(',')->capture_default_str();
    verify->add_option("--method", method)->check(CLI::IsMember({"naive", "mitm"}))->capture_default_str();
    verify->add_option("--band", band, "ratios must lie in [c / band, c * band]")->capture_default_str();
    verify->callback([&] {
        ExperimentConfig cfg;
        cfg.system = verify_system.get(run, g.seed);
        cfg.system_source = verify_system.path.empty() ? "generated" : verify_system.path;
        cfg.P_list = verify_P;
        cfg.method = parse_count_method(method);
        cfg.budget_gib = g.budget_gib;
        cfg.threads = g.threads;
        cfg.density = vflags.get(g);
        cfg.band = band;
        const AsymptoticReport r = verify_asymptotic(cfg);
        Table t{{"P", "N", "ratio", "c", "seconds"}, {}};
        for (const AsymptoticRow &row : r.rows) {
            t.rows.push_back({std::to_string(row.P), row.N.get_str(), fmt(row.ratio, 8), fmt(r.c, 8), fmt(row.seconds, 4)});
        }
        t.rows.push_back({"verdict", r.verdict, "", "", ""});
        for (const std::string &w : r.warnings) {
            t.rows.push_back({"warning", w, "", "", ""});
        }
        Json j = to_json(r);
        j["system"] = system_to_json(cfg.system);
        run.emit(g, j, t);
    });

    // suite
    auto *suite = app.add_subcommand("suite", "growth-exponent checks");
    std::string suite_name;
    std::vector<long> sizes;
    double slack = -1;
    std::string suite_spec = "1,1,0,2,1";
    suite->add_option("which", suite_name)->required()->check(CLI::IsMember({"prop22", "hua", "mv23"}));
    suite->add_option("--sizes", sizes, "P values, default per suite")->delimiter(',');
    suite->add_option("--slack", slack, "added to the ceiling, default per suite");
    suite->add_option("--spec", suite_spec, "auxiliary type for prop22")->capture_default_str();
    suite->add_option("--method", method)->check(CLI::IsMember({"naive", "mitm"}))->capture_default_str();
    suite->callback([&] {
        SuiteOptions so;
        so.sizes = sizes;
        if (slack >= 0) {
            so.slack = slack;
        }
        so.spec = parse_aux_spec(suite_spec);
        so.seed = g.seed;
        so.count.method = parse_count_method(method);
        so.count.budget_gib = g.budget_gib;
        so.count.threads = g.threads;
        const SuiteReport r = exponent_suite(parse_suite(suite_name), so);
        Table t = count_table(r.records);
        t.rows.push_back({"slope", fmt(r.fit.slope, 6), "ceiling " + fmt(r.ceiling + r.slack, 6), r.pass ? "pass" : "fail"});
        run.emit(g, to_json(r), t);
    });

    // generate
    auto *generate = app.add_subcommand("generate", "seeded system in the theorem regime");
    std::size_t r2 = 1, r3 = 2, s = 17;
    bool allow = false;
    generate->add_option("--r2", r2)->capture_default_str();
    generate->add_option("--r3", r3)->capture_default_str();
    generate->add_option("--s", s)->capture_default_str();
    generate->add_flag("--allow-out-of-regime", allow);
    generate->callback([&] {
        GenerateOptions go;
        go.allow_out_of_regime = allow;
        const MixedSystem sys = generate_system(r2, r3, s, g.seed, go);
        Table t{{}, {}, ' ', false};
        std::istringstream text(format_system(sys));
        for (std::string line; std::getline(text, line);) {
            t.rows.push_back({line});
        }
        run.emit(g, system_to_json(sys), t);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    } catch (const ResourceError &e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
