/// @file oracles.hpp
/// @brief Independent reference implementations used only by the test suite.
///
/// Each oracle recomputes a quantity through a different route than the
/// library (exact elimination instead of SVD, the textbook MMD formula
/// instead of the weight-vector identity, exhaustive enumeration instead of
/// greedy repair) so that agreement is evidence, not tautology.
#pragma once

#include <gauntlet/rational.hpp>
#include <gauntlet/windowing.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using gauntlet::Rational;

/// Null-space basis of the given rows via Gauss-Jordan elimination over
/// exact rationals. Rows are dense length-n vectors; one basis vector per
/// free column.
inline std::vector<std::vector<Rational>> rational_nullspace(std::vector<std::vector<Rational>> rows,
                                                             int n) {
    int pivot_row = 0;
    std::vector<int> pivot_cols;
    std::vector<bool> is_pivot_col(static_cast<std::size_t>(n), false);
    for (int col = 0; col < n && pivot_row < static_cast<int>(rows.size()); ++col) {
        int sel = -1;
        for (int r = pivot_row; r < static_cast<int>(rows.size()); ++r) {
            if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != Rational(0)) {
                sel = r;
                break;
            }
        }
        if (sel < 0) continue;
        std::swap(rows[static_cast<std::size_t>(pivot_row)], rows[static_cast<std::size_t>(sel)]);
        auto& prow = rows[static_cast<std::size_t>(pivot_row)];
        const Rational inv = Rational(1) / prow[static_cast<std::size_t>(col)];
        for (int c = col; c < n; ++c) prow[static_cast<std::size_t>(c)] *= inv;
        for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
            if (r == pivot_row) continue;
            auto& row = rows[static_cast<std::size_t>(r)];
            const Rational f = row[static_cast<std::size_t>(col)];
            if (f == Rational(0)) continue;
            for (int c = col; c < n; ++c) row[static_cast<std::size_t>(c)] -= f * prow[static_cast<std::size_t>(c)];
        }
        is_pivot_col[static_cast<std::size_t>(col)] = true;
        pivot_cols.push_back(col);
        ++pivot_row;
    }
    std::vector<std::vector<Rational>> basis;
    for (int free_col = 0; free_col < n; ++free_col) {
        if (is_pivot_col[static_cast<std::size_t>(free_col)]) continue;
        std::vector<Rational> v(static_cast<std::size_t>(n), Rational(0));
        v[static_cast<std::size_t>(free_col)] = Rational(1);
        for (std::size_t r = 0; r < pivot_cols.size(); ++r) {
            v[static_cast<std::size_t>(pivot_cols[r])] = -rows[r][static_cast<std::size_t>(free_col)];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Dense exact rows of a weight matrix, for feeding the elimination oracle.
inline std::vector<std::vector<Rational>> dense_rational_rows(const gauntlet::WeightMatrix& W,
                                                              bool include_ones_row) {
    std::vector<std::vector<Rational>> rows;
    for (int r = include_ones_row ? 0 : 1; r < W.rows(); ++r) {
        std::vector<Rational> dense(static_cast<std::size_t>(W.n()), Rational(0));
        for (const auto& [i, val] : W.row(r)) dense[static_cast<std::size_t>(i)] = val;
        rows.push_back(std::move(dense));
    }
    return rows;
}

/// Distance of v from the span of the given basis vectors, via least squares.
/// Zero (up to tolerance) means v lies in the span.
inline double distance_from_span(const std::vector<Eigen::VectorXd>& basis, const Eigen::VectorXd& v) {
    if (basis.empty()) return v.norm();
    Eigen::MatrixXd B(v.size(), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = basis[j];
    Eigen::VectorXd coef = B.colPivHouseholderQr().solve(v);
    return (B * coef - v).norm();
}

/// Textbook biased MMD^2: mean of k over X-block + mean over Y-block
/// - 2 * cross mean, each kernel value evaluated pointwise.
template <typename KernelFn>
double mmd2_direct(const std::vector<std::array<double, 2>>& xs,
                   const std::vector<std::array<double, 2>>& ys, KernelFn k) {
    const auto m = static_cast<double>(xs.size());
    const auto n = static_cast<double>(ys.size());
    double kxx = 0.0, kyy = 0.0, kxy = 0.0;
    for (const auto& a : xs)
        for (const auto& b : xs) kxx += k(a, b);
    for (const auto& a : ys)
        for (const auto& b : ys) kyy += k(a, b);
    for (const auto& a : xs)
        for (const auto& b : ys) kxy += k(a, b);
    return kxx / (m * m) + kyy / (n * n) - 2.0 * kxy / (m * n);
}

/// All binary vectors of length n (n <= ~20) whose exact residual against the
/// difference rows of W is zero. Constants are included; callers filter.
inline std::vector<std::vector<Rational>> binary_nullspace_members(const gauntlet::WeightMatrix& W) {
    const int n = W.n();
    std::vector<std::vector<Rational>> hits;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        std::vector<Rational> v(static_cast<std::size_t>(n), Rational(0));
        for (int i = 0; i < n; ++i) {
            if ((bits >> i) & 1u) v[static_cast<std::size_t>(i)] = Rational(1);
        }
        bool ok = true;
        for (int r = 1; r < W.rows() && ok; ++r) {
            ok = W.row_dot_exact(r, v) == Rational(0);
        }
        if (ok) hits.push_back(std::move(v));
    }
    return hits;
}

}  // namespace oracle
