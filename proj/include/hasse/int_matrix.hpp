#pragma once

// Exact integer matrices. Entries are GMP integers; nothing in this header
// touches floating point.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hasse {

using BigInt = mpz_class;

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols);
    IntMatrix(std::size_t rows, std::size_t cols, std::vector<BigInt> entries);
    IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

    static IntMatrix identity(std::size_t n);
    static IntMatrix diagonal(std::span<const BigInt> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    const BigInt &operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    BigInt &operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const BigInt &at(std::size_t i, std::size_t j) const;

    const std::vector<BigInt> &entries() const noexcept { return entries_; }

    // Throws std::overflow_error if an entry does not fit.
    std::int64_t entry_i64(std::size_t i, std::size_t j) const;
    std::vector<std::int64_t> column_i64(std::size_t j) const;

    bool operator==(const IntMatrix &other) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<BigInt> entries_;
};

// Half-open index range [begin, end).
struct Range {
    std::size_t begin;
    std::size_t end;
    std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
};

/// Exact determinant by fraction-free (Bareiss) elimination.
BigInt det(const IntMatrix &m);

IntMatrix submatrix(const IntMatrix &m, Range rows, Range cols);
IntMatrix select(const IntMatrix &m, std::span<const std::size_t> rows, std::span<const std::size_t> cols);
IntMatrix select_columns(const IntMatrix &m, std::span<const std::size_t> cols);
IntMatrix hstack(const IntMatrix &left, const IntMatrix &right);
IntMatrix augment_identity(const IntMatrix &b);  // (Id_r | B)

IntMatrix delete_column(const IntMatrix &m, std::size_t j);
IntMatrix remove_column_and_row(const IntMatrix &m, std::size_t j, std::size_t i);

// Row index of the single non-zero entry in column j, or npos when the
// column has zero or several non-zero entries.
std::size_t unit_column_row(const IntMatrix &m, std::size_t j);

struct RowOp {
    enum class Kind { swap, scale, add_multiple };
    Kind kind;
    std::size_t target;
    std::size_t source = 0;  // swap partner / row added from
    BigInt factor = 1;       // scale factor or multiple; scale requires non-zero

    static RowOp swap(std::size_t a, std::size_t b) { return {Kind::swap, a, b, 1}; }
    static RowOp scale(std::size_t row, BigInt f) { return {Kind::scale, row, 0, std::move(f)}; }
    static RowOp add_multiple(std::size_t target, std::size_t source, BigInt f) {
        return {Kind::add_multiple, target, source, std::move(f)};
    }
};

// Applies elementary row operations in order. These preserve the rank of
// every column subset over Q, hence high non-singularity.
IntMatrix row_reduce_preserving(const IntMatrix &m, std::span<const RowOp> ops);

std::string to_string(const IntMatrix &m);

} // namespace hasse
