#pragma once

#include "hasse/int_matrix.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hasse {

/// Type (n, t, omega)_{r, l} of an auxiliary matrix.
struct AuxSpec {
    std::size_t n;
    std::size_t t;
    std::size_t omega;
    std::size_t r;
    std::size_t l;

    // Throws std::invalid_argument unless n >= 1, r >= 2l, t >= l, omega <= l.
    void validate() const;

    std::size_t R() const { return (n - 1) * (r - l) + t; }
    std::size_t S() const { return 2 * R() - l + omega; }

    // Format of block k (1-based).
    std::size_t block_rows(std::size_t k) const { return k == 1 ? t : r; }
    std::size_t block_cols(std::size_t k) const { return k == 1 ? t - l + omega : r - l; }

    bool operator==(const AuxSpec &) const = default;
};

// Parses "n,t,omega,r,l".
AuxSpec parse_aux_spec(const std::string &text);
std::string to_string(const AuxSpec &spec);

/// Lower-right corner of a block, 1-based; j is counted within the V part.
struct BlockCorner {
    std::size_t i;
    std::size_t j;
    bool operator==(const BlockCorner &) const = default;
};

std::vector<BlockCorner> block_corners(const AuxSpec &spec);

struct AuxMatrix {
    IntMatrix matrix;
    AuxSpec spec;
    std::vector<BlockCorner> corners;
};

AuxMatrix build_auxiliary(const std::vector<IntMatrix> &blocks, const std::vector<BigInt> &diag,
                          const AuxSpec &spec);

// Reason m fails to be auxiliary of the given type, or nullopt if it is.
std::optional<std::string> auxiliary_defect(const IntMatrix &m, const AuxSpec &spec);
bool verify_auxiliary(const IntMatrix &m, const AuxSpec &spec);

// Block k (1-based) of the V part of an auxiliary matrix.
IntMatrix extract_block(const IntMatrix &m, const AuxSpec &spec, std::size_t k);

struct ComplifyResult {
    IntMatrix d2;
    AuxMatrix d3;
};

// Column of the input matrices feeding column i (1-based) of the doubled
// matrices, and whether the rows go through the reflected copy.
struct ComplifySource {
    std::size_t column;
    bool reflected;
};
ComplifySource complify_source(std::size_t rho, std::size_t l, std::size_t i);

/// Doubling step: from (D2, D3) with D3 of type (n, r, 0)_{r, l} builds the
/// pair for 2n blocks.
ComplifyResult complify(const IntMatrix &d2, const AuxMatrix &d3);

} // namespace hasse
