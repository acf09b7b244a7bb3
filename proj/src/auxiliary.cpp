#include "hasse/auxiliary.hpp"

#include "hasse/nonsingular.hpp"

#include <sstream>
#include <stdexcept>

namespace hasse {

void AuxSpec::validate() const {
    if (n < 1) {
        throw std::invalid_argument("AuxSpec: n must be at least 1");
    }
    if (r < 2 * l) {
        throw std::invalid_argument("AuxSpec: need r >= 2l, got r=" + std::to_string(r) +
                                    " l=" + std::to_string(l));
    }
    if (t < l) {
        throw std::invalid_argument("AuxSpec: need t >= l, got t=" + std::to_string(t) +
                                    " l=" + std::to_string(l));
    }
    if (omega > l) {
        throw std::invalid_argument("AuxSpec: need omega <= l, got omega=" + std::to_string(omega) +
                                    " l=" + std::to_string(l));
    }
}

AuxSpec parse_aux_spec(const std::string &text) {
    std::vector<long> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(item, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != item.size() || v < 0) {
            throw std::invalid_argument("parse_aux_spec: bad field '" + item + "'");
        }
        parts.push_back(v);
    }
    if (parts.size() != 5) {
        throw std::invalid_argument("parse_aux_spec: expected n,t,omega,r,l");
    }
    AuxSpec spec{static_cast<std::size_t>(parts[0]), static_cast<std::size_t>(parts[1]),
                 static_cast<std::size_t>(parts[2]), static_cast<std::size_t>(parts[3]),
                 static_cast<std::size_t>(parts[4])};
    spec.validate();
    return spec;
}

std::string to_string(const AuxSpec &spec) {
    return "(" + std::to_string(spec.n) + "," + std::to_string(spec.t) + "," + std::to_string(spec.omega) +
           ")_{" + std::to_string(spec.r) + "," + std::to_string(spec.l) + "}";
}

std::vector<BlockCorner> block_corners(const AuxSpec &spec) {
    spec.validate();
    std::vector<BlockCorner> out;
    out.reserve(spec.n);
    BlockCorner c{spec.t, spec.t - spec.l + spec.omega};
    out.push_back(c);
    for (std::size_t m = 2; m <= spec.n; ++m) {
        c.i += spec.r - spec.l;
        c.j += spec.r - spec.l;
        out.push_back(c);
    }
    return out;
}

namespace {

// 0-based row and V-column ranges of block k (1-based).
struct BlockSpan {
    Range rows;
    Range cols;
};

BlockSpan block_span(const AuxSpec &spec, const std::vector<BlockCorner> &corners, std::size_t k) {
    const BlockCorner &c = corners[k - 1];
    const std::size_t prev_j = k == 1 ? 0 : corners[k - 2].j;
    return {Range{c.i - spec.block_rows(k), c.i}, Range{prev_j, c.j}};
}

} // namespace

AuxMatrix build_auxiliary(const std::vector<IntMatrix> &blocks, const std::vector<BigInt> &diag,
                          const AuxSpec &spec) {
    spec.validate();
    if (blocks.size() != spec.n) {
        throw std::invalid_argument("build_auxiliary: expected " + std::to_string(spec.n) + " blocks, got " +
                                    std::to_string(blocks.size()));
    }
    const std::size_t R = spec.R();
    if (diag.size() != R) {
        throw std::invalid_argument("build_auxiliary: diagonal length " + std::to_string(diag.size()) +
                                    " != R = " + std::to_string(R));
    }
    for (const BigInt &d : diag) {
        if (d == 0) {
            throw std::invalid_argument("build_auxiliary: zero diagonal entry");
        }
    }
    for (std::size_t k = 1; k <= spec.n; ++k) {
        const IntMatrix &b = blocks[k - 1];
        if (b.rows() != spec.block_rows(k) || b.cols() != spec.block_cols(k)) {
            throw std::invalid_argument("build_auxiliary: block " + std::to_string(k) + " is " +
                                        std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                                        ", expected " + std::to_string(spec.block_rows(k)) + "x" +
                                        std::to_string(spec.block_cols(k)));
        }
        if (!is_totally_non_singular(b)) {
            throw std::invalid_argument("build_auxiliary: block " + std::to_string(k) +
                                        " is not totally non-singular");
        }
    }

    const auto corners = block_corners(spec);
    IntMatrix m(R, spec.S());
    for (std::size_t i = 0; i < R; ++i) {
        m(i, i) = diag[i];
    }
    for (std::size_t k = 1; k <= spec.n; ++k) {
        const BlockSpan span = block_span(spec, corners, k);
        const IntMatrix &b = blocks[k - 1];
        for (std::size_t i = 0; i < b.rows(); ++i) {
            for (std::size_t j = 0; j < b.cols(); ++j) {
                m(span.rows.begin + i, R + span.cols.begin + j) = b(i, j);
            }
        }
    }
    return AuxMatrix{std::move(m), spec, corners};
}

std::optional<std::string> auxiliary_defect(const IntMatrix &m, const AuxSpec &spec) {
    spec.validate();
    const std::size_t R = spec.R();
    const std::size_t S = spec.S();
    if (m.rows() != R || m.cols() != S) {
        return "format " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " != " +
               std::to_string(R) + "x" + std::to_string(S);
    }
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            if (i == j && m(i, j) == 0) {
                return "zero diagonal entry at row " + std::to_string(i + 1);
            }
            if (i != j && m(i, j) != 0) {
                return "left part not diagonal at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            }
        }
    }

    const auto corners = block_corners(spec);
    std::vector<char> covered(R * (S - R), 0);
    for (std::size_t k = 1; k <= spec.n; ++k) {
        const BlockSpan span = block_span(spec, corners, k);
        for (std::size_t i = span.rows.begin; i < span.rows.end; ++i) {
            for (std::size_t j = span.cols.begin; j < span.cols.end; ++j) {
                covered[i * (S - R) + j] = 1;
            }
        }
        const IntMatrix block = submatrix(m, span.rows, Range{R + span.cols.begin, R + span.cols.end});
        if (!is_totally_non_singular(block)) {
            return "block " + std::to_string(k) + " is not totally non-singular";
        }
    }
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < S - R; ++j) {
            if (!covered[i * (S - R) + j] && m(i, R + j) != 0) {
                return "non-zero entry outside blocks at (" + std::to_string(i + 1) + "," +
                       std::to_string(R + j + 1) + ")";
            }
        }
    }
    return std::nullopt;
}

bool verify_auxiliary(const IntMatrix &m, const AuxSpec &spec) {
    return !auxiliary_defect(m, spec).has_value();
}

IntMatrix extract_block(const IntMatrix &m, const AuxSpec &spec, std::size_t k) {
    if (k < 1 || k > spec.n) {
        throw std::out_of_range("extract_block: block index out of range");
    }
    const auto corners = block_corners(spec);
    const BlockSpan span = block_span(spec, corners, k);
    const std::size_t R = spec.R();
    return submatrix(m, span.rows, Range{R + span.cols.begin, R + span.cols.end});
}

ComplifySource complify_source(std::size_t rho, std::size_t l, std::size_t i) {
    if (i >= 1 && i <= rho + l) {
        return {i, false};
    }
    if (i <= 2 * rho + l) {
        return {2 * rho + l + 1 - i, true};
    }
    if (i <= 3 * rho + l) {
        return {i - rho, false};
    }
    if (i <= 4 * rho + l) {
        return {5 * rho + 2 * l + 1 - i, true};
    }
    throw std::out_of_range("complify_source: column " + std::to_string(i) + " out of range");
}

ComplifyResult complify(const IntMatrix &d2, const AuxMatrix &d3) {
    const AuxSpec &spec = d3.spec;
    spec.validate();
    if (spec.t != spec.r || spec.omega != 0) {
        throw std::invalid_argument("complify: input must be of type (n,r,0)_{r,l}, got " + to_string(spec));
    }
    if (auto defect = auxiliary_defect(d3.matrix, spec)) {
        throw std::invalid_argument("complify: input is not auxiliary: " + *defect);
    }
    const std::size_t l = spec.l;
    const std::size_t rho = spec.n * (spec.r - l);
    if (d2.rows() != l || d2.cols() != 2 * rho + l) {
        throw std::invalid_argument("complify: quadratic matrix must be " + std::to_string(l) + "x" +
                                    std::to_string(2 * rho + l));
    }

    const std::size_t new_cols = 4 * rho + l;
    const std::size_t new_rows = 2 * rho + l;
    IntMatrix n3(new_rows, new_cols);
    IntMatrix n2(l, new_cols);
    for (std::size_t i = 1; i <= new_cols; ++i) {
        const ComplifySource src = complify_source(rho, l, i);
        for (std::size_t row = 1; row <= rho + l; ++row) {
            const BigInt &v = d3.matrix(row - 1, src.column - 1);
            if (v == 0) {
                continue;
            }
            // Rows 1..rho carry the tilde variables; the reflected copy lists
            // them in reverse after the dagger rows.
            std::size_t target = row;
            if (src.reflected && row <= rho) {
                target = 2 * rho + l + 1 - row;
            }
            n3(target - 1, i - 1) = v;
        }
        for (std::size_t row = 0; row < l; ++row) {
            n2(row, i - 1) = d2(row, src.column - 1);
        }
    }

    AuxSpec out_spec{2 * spec.n, spec.r, 0, spec.r, l};
    if (auto defect = auxiliary_defect(n3, out_spec)) {
        throw std::logic_error("complify: doubled matrix failed verification: " + *defect);
    }
    return ComplifyResult{std::move(n2), AuxMatrix{std::move(n3), out_spec, block_corners(out_spec)}};
}

} // namespace hasse
