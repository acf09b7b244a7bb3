#include "hasse/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hasse {

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

std::string strip_comments(const std::string &text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        out << line << '\n';
    }
    return out.str();
}

bool looks_like_json(const std::string &text) {
    const auto pos = text.find_first_not_of(" \t\r\n");
    return pos != std::string::npos && text[pos] == '{';
}

BigInt read_entry(std::istream &in) {
    std::string token;
    if (!(in >> token)) {
        throw std::invalid_argument("matrix: fewer entries than announced");
    }
    BigInt v;
    if (v.set_str(token, 10) != 0) {
        throw std::invalid_argument("matrix: '" + token + "' is not an integer");
    }
    return v;
}

IntMatrix read_matrix_body(std::istream &in, std::size_t rows, std::size_t cols) {
    IntMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m(i, j) = read_entry(in);
        }
    }
    return m;
}

BigInt entry_from_json(const Json &e) {
    if (e.is_number_integer()) {
        return BigInt(std::to_string(e.get<long long>()));
    }
    if (e.is_string()) {
        BigInt v;
        if (v.set_str(e.get<std::string>(), 10) == 0) {
            return v;
        }
    }
    throw std::invalid_argument("matrix: JSON entry is not an integer");
}

Json entry_to_json(const BigInt &v) {
    if (v.fits_slong_p()) {
        return Json(v.get_si());
    }
    return Json(v.get_str());
}

Json finite(double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

} // namespace

IntMatrix parse_matrix(const std::string &text) {
    if (looks_like_json(text)) {
        return matrix_from_json(Json::parse(text));
    }
    std::istringstream in(strip_comments(text));
    long rows = -1, cols = -1;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
        throw std::invalid_argument("matrix: expected 'rows cols' header");
    }
    IntMatrix m = read_matrix_body(in, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    std::string extra;
    if (in >> extra) {
        throw std::invalid_argument("matrix: trailing token '" + extra + "'");
    }
    return m;
}

Json matrix_to_json(const IntMatrix &m) {
    Json entries = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            entries.push_back(entry_to_json(m(i, j)));
        }
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

IntMatrix matrix_from_json(const Json &j) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const Json &e = j.at("entries");
    IntMatrix m(rows, cols);
    const bool nested = !e.empty() && e.front().is_array();
    if (nested) {
        if (e.size() != rows) {
            throw std::invalid_argument("matrix: JSON row count mismatch");
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (e[i].size() != cols) {
                throw std::invalid_argument("matrix: JSON row " + std::to_string(i) + " has the wrong length");
            }
            for (std::size_t c = 0; c < cols; ++c) {
                m(i, c) = entry_from_json(e[i][c]);
            }
        }
    } else {
        if (e.size() != rows * cols) {
            throw std::invalid_argument("matrix: JSON entry count mismatch");
        }
        for (std::size_t k = 0; k < e.size(); ++k) {
            m(k / cols, k % cols) = entry_from_json(e[k]);
        }
    }
    return m;
}

MixedSystem parse_system(const std::string &text) {
    MixedSystem sys{IntMatrix(0, 0), IntMatrix(0, 0)};
    if (looks_like_json(text)) {
        const Json j = Json::parse(text);
        if (j.contains("cubic")) {
            sys.c3 = matrix_from_json(j.at("cubic"));
        }
        if (j.contains("quadratic")) {
            sys.c2 = matrix_from_json(j.at("quadratic"));
        }
    } else {
        std::istringstream in(strip_comments(text));
        std::string kind;
        bool seen_cubic = false, seen_quad = false;
        while (in >> kind) {
            long rows = -1, cols = -1;
            if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
                throw std::invalid_argument("system: expected '" + kind + " rows cols'");
            }
            IntMatrix m = read_matrix_body(in, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
            if (kind == "cubic" && !seen_cubic) {
                sys.c3 = std::move(m);
                seen_cubic = true;
            } else if (kind == "quadratic" && !seen_quad) {
                sys.c2 = std::move(m);
                seen_quad = true;
            } else {
                throw std::invalid_argument("system: unexpected block '" + kind + "'");
            }
        }
    }
    // an absent block becomes a 0 x s matrix
    const std::size_t s = sys.s();
    if (sys.c3.rows() == 0) {
        sys.c3 = IntMatrix(0, s);
    }
    if (sys.c2.rows() == 0) {
        sys.c2 = IntMatrix(0, s);
    }
    sys.validate();
    return sys;
}

std::string format_system(const MixedSystem &sys) {
    std::ostringstream os;
    auto block = [&](const char *name, const IntMatrix &m) {
        os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                os << (j ? " " : "") << m(i, j).get_str();
            }
            os << '\n';
        }
    };
    block("cubic", sys.c3);
    block("quadratic", sys.c2);
    return os.str();
}

Json system_to_json(const MixedSystem &sys) {
    return Json{{"cubic", matrix_to_json(sys.c3)}, {"quadratic", matrix_to_json(sys.c2)}};
}

std::string git_blob_sha1(const std::string &content) {
    const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX *ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &length) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("git_blob_sha1: digest failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < length; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return os.str();
}

Json to_json(const CountRecord &r) {
    return Json{{"P", r.P}, {"count", r.count.get_str()}, {"method", to_string(r.method)}, {"seconds", r.seconds}};
}

Json to_json(const GrowthFit &f) {
    return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"max_residual", f.max_residual}};
}

Json to_json(const ArcLabel &l) {
    Json j{{"major", l.major}};
    if (l.major) {
        j["q"] = l.q;
        j["a"] = l.a;
    }
    return j;
}

Json to_json(const SeriesValue &v) {
    return Json{{"Y", v.Y}, {"value", v.value}, {"imag_residue", v.imag_residue}, {"terms", v.terms}};
}

Json to_json(const CongruenceCount &c) {
    return Json{{"p", c.p}, {"i", c.i}, {"M", c.M.get_str()}, {"method", c.method}};
}

Json to_json(const ChiP &c) {
    return Json{{"p", c.p},
                {"value", c.value},
                {"i_requested", c.i_requested},
                {"i_used", c.i_used},
                {"stabilized", c.stabilized},
                {"route", to_string(c.route)},
                {"sequence", c.sequence}};
}

Json to_json(const ChiInfinityResult &r) {
    return Json{{"value", finite(r.value)},
                {"error", finite(r.error)},
                {"mc_sigma", finite(r.mc_sigma)},
                {"extrapolation_residual", finite(r.extrapolation_residual)},
                {"eps", r.eps},
                {"estimates", r.estimates},
                {"sigmas", r.sigmas},
                {"samples", r.samples},
                {"monotone", r.monotone},
                {"flagged", r.flagged}};
}

Json to_json(const SingularIntegral &j) {
    return Json{{"Y", j.Y},       {"P", j.P},         {"value", finite(j.value)}, {"imag", j.imag},
                {"error", j.error}, {"normalized", j.normalized}};
}

Json to_json(const LocalWitness &w) {
    Json j{{"place", w.place}};
    if (w.place == 0) {
        j["point"] = w.point;
        j["residual"] = w.residual;
        j["sigma_min"] = w.sigma_min;
    } else {
        j["residues"] = w.residues;
        j["m"] = w.m;
        j["delta"] = w.delta;
    }
    return j;
}

Json to_json(const DensityOptions &o) {
    return Json{{"prime_bound", o.prime_bound},
                {"i_max", o.i_max},
                {"chi_p_route", to_string(o.chi_p.route)},
                {"chi_p_work_limit", o.chi_p.work_limit},
                {"stabilization_tol", o.chi_p.stabilization_tol},
                {"eps", o.chi_infinity.eps},
                {"samples", o.chi_infinity.samples},
                {"strata", o.chi_infinity.strata},
                {"seed", o.chi_infinity.seed},
                {"bias_order", o.chi_infinity.bias_order},
                {"tail_from", o.tail_from},
                {"search_witnesses", o.search_witnesses}};
}

Json to_json(const DensityReport &r) {
    Json chi = Json::array();
    for (const ChiP &c : r.chi_p) {
        chi.push_back(to_json(c));
    }
    Json j{{"parameters", to_json(r.options)},
           {"chi_infinity", to_json(r.chi_infinity)},
           {"chi_p", chi},
           {"prime_product", r.prime_product},
           {"tail_constant", r.tail_constant},
           {"tail_relative", r.tail_relative},
           {"c", finite(r.c)},
           {"c_error", finite(r.c_error)},
           {"real_witness", r.real_witness},
           {"primes_without_witness", r.primes_without_witness},
           {"flagged", r.flagged},
           {"flags", r.flags}};
    if (r.series) {
        j["S_truncated"] = to_json(*r.series);
    }
    if (r.integral) {
        j["J_truncated"] = to_json(*r.integral);
    }
    return j;
}

Json to_json(const AsymptoticReport &r) {
    Json rows = Json::array();
    for (const AsymptoticRow &row : r.rows) {
        rows.push_back(Json{{"P", row.P},
                            {"N", row.N.get_str()},
                            {"ratio", row.ratio},
                            {"seconds", row.seconds},
                            {"method", row.method}});
    }
    Json j{{"exponent", r.exponent}, {"rows", rows},           {"c", r.c},
           {"c_error", r.c_error},   {"c_flagged", r.c_flagged}, {"within_band", r.within_band},
           {"shrinking", r.shrinking}, {"verdict", r.verdict},   {"warnings", r.warnings}};
    if (r.density) {
        j["density"] = to_json(*r.density);
    }
    return j;
}

Json to_json(const SuiteReport &r) {
    Json records = Json::array();
    for (const CountRecord &rec : r.records) {
        records.push_back(to_json(rec));
    }
    return Json{{"suite", to_string(r.which)}, {"description", r.description}, {"records", records},
                {"fit", to_json(r.fit)},       {"ceiling", r.ceiling},         {"slack", r.slack},
                {"pass", r.pass}};
}

} // namespace hasse
