#include "hasse/int_matrix.hpp"

#include <sstream>
#include <stdexcept>
#include <utility>

namespace hasse {

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, BigInt(0)) {}

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols, std::vector<BigInt> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
        throw std::invalid_argument("IntMatrix: entry count " + std::to_string(entries_.size()) +
                                    " does not match " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
    }
}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto &row : rows) {
        if (row.size() != cols_) {
            throw std::invalid_argument("IntMatrix: ragged initializer");
        }
        for (long v : row) {
            entries_.emplace_back(v);
        }
    }
}

IntMatrix IntMatrix::identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1;
    }
    return m;
}

IntMatrix IntMatrix::diagonal(std::span<const BigInt> diag) {
    IntMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

const BigInt &IntMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) {
        throw std::out_of_range("IntMatrix::at: (" + std::to_string(i) + "," + std::to_string(j) +
                                ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    return (*this)(i, j);
}

std::int64_t IntMatrix::entry_i64(std::size_t i, std::size_t j) const {
    const BigInt &v = at(i, j);
    if (!v.fits_slong_p()) {
        throw std::overflow_error("IntMatrix: entry does not fit in 64 bits");
    }
    return v.get_si();
}

std::vector<std::int64_t> IntMatrix::column_i64(std::size_t j) const {
    std::vector<std::int64_t> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        out[i] = entry_i64(i, j);
    }
    return out;
}

bool IntMatrix::operator==(const IntMatrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && entries_ == other.entries_;
}

BigInt det(const IntMatrix &m) {
    if (!m.is_square()) {
        throw std::invalid_argument("det: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", not square");
    }
    const std::size_t n = m.rows();
    if (n == 0) {
        return 1;
    }
    std::vector<BigInt> a = m.entries();
    auto el = [&](std::size_t i, std::size_t j) -> BigInt & { return a[i * n + j]; };

    int sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (el(k, k) == 0) {
            std::size_t swap_row = k + 1;
            while (swap_row < n && el(swap_row, k) == 0) {
                ++swap_row;
            }
            if (swap_row == n) {
                return 0;
            }
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(el(k, j), el(swap_row, j));
            }
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                // exact division: Bareiss invariant
                el(i, j) = (el(i, j) * el(k, k) - el(i, k) * el(k, j)) / prev;
            }
            el(i, k) = 0;
        }
        prev = el(k, k);
    }
    BigInt result = el(n - 1, n - 1);
    return sign < 0 ? BigInt(-result) : result;
}

IntMatrix submatrix(const IntMatrix &m, Range rows, Range cols) {
    if (rows.end > m.rows() || cols.end > m.cols() || rows.begin > rows.end || cols.begin > cols.end) {
        throw std::out_of_range("submatrix: range outside " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
    }
    IntMatrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(i, j) = m(rows.begin + i, cols.begin + j);
        }
    }
    return out;
}

IntMatrix select(const IntMatrix &m, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
    IntMatrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(i, j) = m.at(rows[i], cols[j]);
        }
    }
    return out;
}

IntMatrix select_columns(const IntMatrix &m, std::span<const std::size_t> cols) {
    std::vector<std::size_t> rows(m.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    return select(m, rows, cols);
}

IntMatrix hstack(const IntMatrix &left, const IntMatrix &right) {
    if (left.rows() != right.rows()) {
        throw std::invalid_argument("hstack: row counts differ");
    }
    IntMatrix out(left.rows(), left.cols() + right.cols());
    for (std::size_t i = 0; i < left.rows(); ++i) {
        for (std::size_t j = 0; j < left.cols(); ++j) {
            out(i, j) = left(i, j);
        }
        for (std::size_t j = 0; j < right.cols(); ++j) {
            out(i, left.cols() + j) = right(i, j);
        }
    }
    return out;
}

IntMatrix augment_identity(const IntMatrix &b) {
    return hstack(IntMatrix::identity(b.rows()), b);
}

IntMatrix delete_column(const IntMatrix &m, std::size_t j) {
    if (j >= m.cols()) {
        throw std::out_of_range("delete_column: column " + std::to_string(j) + " out of range");
    }
    IntMatrix out(m.rows(), m.cols() - 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t c = 0, k = 0; c < m.cols(); ++c) {
            if (c != j) {
                out(i, k++) = m(i, c);
            }
        }
    }
    return out;
}

IntMatrix remove_column_and_row(const IntMatrix &m, std::size_t j, std::size_t i) {
    if (j >= m.cols() || i >= m.rows()) {
        throw std::out_of_range("remove_column_and_row: index out of range");
    }
    IntMatrix out(m.rows() - 1, m.cols() - 1);
    for (std::size_t r = 0, ro = 0; r < m.rows(); ++r) {
        if (r == i) {
            continue;
        }
        for (std::size_t c = 0, co = 0; c < m.cols(); ++c) {
            if (c != j) {
                out(ro, co++) = m(r, c);
            }
        }
        ++ro;
    }
    return out;
}

std::size_t unit_column_row(const IntMatrix &m, std::size_t j) {
    if (j >= m.cols()) {
        throw std::out_of_range("unit_column_row: column out of range");
    }
    std::size_t found = npos;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (m(i, j) != 0) {
            if (found != npos) {
                return npos;
            }
            found = i;
        }
    }
    return found;
}

IntMatrix row_reduce_preserving(const IntMatrix &m, std::span<const RowOp> ops) {
    IntMatrix out = m;
    for (const RowOp &op : ops) {
        if (op.target >= out.rows() || op.source >= out.rows()) {
            throw std::out_of_range("row_reduce_preserving: row index out of range");
        }
        switch (op.kind) {
        case RowOp::Kind::swap:
            for (std::size_t c = 0; c < out.cols(); ++c) {
                std::swap(out(op.target, c), out(op.source, c));
            }
            break;
        case RowOp::Kind::scale:
            if (op.factor == 0) {
                throw std::invalid_argument("row_reduce_preserving: zero scale factor");
            }
            for (std::size_t c = 0; c < out.cols(); ++c) {
                out(op.target, c) *= op.factor;
            }
            break;
        case RowOp::Kind::add_multiple:
            if (op.target == op.source) {
                throw std::invalid_argument("row_reduce_preserving: row added to itself");
            }
            for (std::size_t c = 0; c < out.cols(); ++c) {
                out(op.target, c) += op.factor * out(op.source, c);
            }
            break;
        }
    }
    return out;
}

std::string to_string(const IntMatrix &m) {
    std::ostringstream os;
    os << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            os << (j ? " " : "") << m(i, j).get_str();
        }
        os << '\n';
    }
    return os.str();
}

} // namespace hasse
