#include "hasse/nonsingular.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace hasse {
namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > UINT64_MAX) {
            return UINT64_MAX;
        }
    }
    return static_cast<std::uint64_t>(r);
}

// Visits each k-subset of {0..n-1} in lexicographic order; stops early when
// fn returns false. Returns false iff stopped early.
template <class Fn>
bool for_each_subset(std::size_t n, std::size_t k, Fn &&fn) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) {
        idx[i] = i;
    }
    if (k > n) {
        return true;
    }
    while (true) {
        if (!fn(idx)) {
            return false;
        }
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) {
            --i;
        }
        if (i == 0) {
            return true;
        }
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct MaskPair {
    std::uint64_t rows;
    std::uint64_t cols;
    bool operator==(const MaskPair &) const = default;
};

struct MaskPairHash {
    std::size_t operator()(const MaskPair &k) const noexcept {
        std::uint64_t h = k.rows * 0x9E3779B97F4A7C15ULL;
        h ^= k.cols + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

std::uint64_t to_mask(const std::vector<std::size_t> &idx) {
    std::uint64_t m = 0;
    for (std::size_t i : idx) {
        m |= std::uint64_t{1} << i;
    }
    return m;
}

} // namespace

bool is_highly_non_singular(const IntMatrix &m) {
    if (m.rows() > m.cols()) {
        throw std::invalid_argument("is_highly_non_singular: " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + " has more rows than columns");
    }
    if (binomial(m.cols(), m.rows()) > kMaxColumnSubsets) {
        throw std::invalid_argument("is_highly_non_singular: too many column subsets");
    }
    return for_each_subset(m.cols(), m.rows(), [&](const std::vector<std::size_t> &cols) {
        return det(select_columns(m, cols)) != 0;
    });
}

bool is_totally_non_singular(const IntMatrix &m) {
    const std::size_t depth = std::min(m.rows(), m.cols());
    if (depth > kMaxMinorDimension) {
        throw std::invalid_argument("is_totally_non_singular: min dimension " + std::to_string(depth) +
                                    " exceeds cap " + std::to_string(kMaxMinorDimension));
    }
    if (m.rows() > 64 || m.cols() > 64) {
        throw std::invalid_argument("is_totally_non_singular: at most 64 rows and columns");
    }
    for (const BigInt &v : m.entries()) {
        if (v == 0) {
            return false;
        }
    }

    using Level = std::unordered_map<MaskPair, BigInt, MaskPairHash>;
    Level prev;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            prev.emplace(MaskPair{std::uint64_t{1} << i, std::uint64_t{1} << j}, m(i, j));
        }
    }

    for (std::size_t k = 2; k <= depth; ++k) {
        Level cur;
        cur.reserve(static_cast<std::size_t>(binomial(m.rows(), k) * binomial(m.cols(), k)));
        bool ok = for_each_subset(m.rows(), k, [&](const std::vector<std::size_t> &rows) {
            const std::uint64_t row_mask = to_mask(rows);
            const std::size_t last = rows.back();
            const std::uint64_t sub_rows = row_mask & ~(std::uint64_t{1} << last);
            return for_each_subset(m.cols(), k, [&](const std::vector<std::size_t> &cols) {
                const std::uint64_t col_mask = to_mask(cols);
                BigInt value = 0;
                for (std::size_t p = 0; p < k; ++p) {
                    const std::uint64_t sub_cols = col_mask & ~(std::uint64_t{1} << cols[p]);
                    const BigInt &minor = prev.at(MaskPair{sub_rows, sub_cols});
                    // cofactor sign (-1)^{(k-1)+p}
                    if ((k - 1 + p) % 2 == 0) {
                        value += m(last, cols[p]) * minor;
                    } else {
                        value -= m(last, cols[p]) * minor;
                    }
                }
                if (value == 0) {
                    return false;
                }
                cur.emplace(MaskPair{row_mask, col_mask}, std::move(value));
                return true;
            });
        });
        if (!ok) {
            return false;
        }
        prev = std::move(cur);
    }
    return true;
}

namespace {

template <class Pred>
IntMatrix sample_until(std::size_t rows, std::size_t cols, std::mt19937_64 &rng, long lo, long hi,
                       std::size_t max_tries, Pred &&pred, const char *what) {
    std::uniform_int_distribution<long> dist(lo, hi);
    for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
        IntMatrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                m(i, j) = dist(rng);
            }
        }
        if (pred(m)) {
            return m;
        }
    }
    throw std::runtime_error(std::string(what) + ": rejection budget exhausted");
}

} // namespace

IntMatrix random_totally_non_singular(std::size_t rows, std::size_t cols, std::mt19937_64 &rng, long lo,
                                      long hi, std::size_t max_tries) {
    return sample_until(rows, cols, rng, lo, hi, max_tries,
                        [](const IntMatrix &m) { return is_totally_non_singular(m); },
                        "random_totally_non_singular");
}

IntMatrix random_highly_non_singular(std::size_t rows, std::size_t cols, std::mt19937_64 &rng, long lo,
                                     long hi, std::size_t max_tries) {
    return sample_until(rows, cols, rng, lo, hi, max_tries,
                        [](const IntMatrix &m) { return is_highly_non_singular(m); },
                        "random_highly_non_singular");
}

} // namespace hasse
