/// @file kernel.hpp
/// @brief Point storage, kernel specifications, kernel matrices, and the
///        weighted biased-MMD quadratic form.
#pragma once

#include <gauntlet/errors.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gauntlet {

/// Fixed-dimension point collection stored flat (dim doubles per point,
/// contiguous) so kernel construction streams through memory.
class PointSet {
public:
    explicit PointSet(int dim) : dim_(dim) {
        if (dim < 1) throw InvalidSpecError("points need dimension >= 1");
    }

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(flat_.size()) / dim_; }

    void push(std::span<const double> x) {
        if (static_cast<int>(x.size()) != dim_) {
            throw DimensionMismatchError("point of dimension " + std::to_string(x.size()) +
                                         " pushed into set of dimension " + std::to_string(dim_));
        }
        flat_.insert(flat_.end(), x.begin(), x.end());
    }

    const double* at(int i) const { return flat_.data() + static_cast<std::size_t>(i) * dim_; }

    std::span<const double> point(int i) const { return {at(i), static_cast<std::size_t>(dim_)}; }

    /// New set holding the points at the given indices, in order.
    PointSet gather(std::span<const int> indices) const {
        PointSet out(dim_);
        out.flat_.reserve(indices.size() * static_cast<std::size_t>(dim_));
        for (int i : indices) out.push(point(i));
        return out;
    }

private:
    int dim_;
    std::vector<double> flat_;
};

struct KernelSpec {
    enum class Kind { RBF, Linear };

    Kind kind = Kind::RBF;
    std::optional<double> bandwidth;  ///< RBF only; empty selects the median heuristic

    static KernelSpec rbf_median() { return {Kind::RBF, std::nullopt}; }

    static KernelSpec rbf(double h) {
        if (!(h > 0.0)) throw InvalidSpecError("RBF bandwidth must be positive");
        return {Kind::RBF, h};
    }

    static KernelSpec linear() { return {Kind::Linear, std::nullopt}; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["kind"] = kind == Kind::RBF ? "rbf" : "linear";
        if (kind == Kind::RBF) {
            if (bandwidth) {
                j["bandwidth"] = *bandwidth;
            } else {
                j["bandwidth"] = "median";
            }
        }
        return j;
    }

    static KernelSpec from_json(const nlohmann::json& j) {
        const std::string kind = j.value("kind", "rbf");
        if (kind == "linear") return linear();
        if (kind != "rbf") throw ParseError("unknown kernel kind \"" + kind + "\"");
        if (j.contains("bandwidth") && j["bandwidth"].is_number()) {
            return rbf(j["bandwidth"].get<double>());
        }
        return rbf_median();
    }
};

inline double squared_distance(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

/// Median of the nonzero pairwise Euclidean distances; 1.0 when all points
/// coincide. Even counts average the two central order statistics.
inline double median_heuristic(const PointSet& points) {
    const int m = points.size();
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const double d2 = squared_distance(points.at(i), points.at(j), points.dim());
            if (d2 > 0.0) dists.push_back(std::sqrt(d2));
        }
    }
    if (dists.empty()) return 1.0;
    // Selection instead of a full sort: this sits on the detector's hot path.
    const std::size_t k = dists.size();
    const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(k / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    if (k % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(dists.begin(), mid);
    return 0.5 * (lower + upper);
}

/// Bandwidth this KernelSpec resolves to on the given point set.
inline double resolve_bandwidth(const KernelSpec& spec, const PointSet& points) {
    if (spec.kind != KernelSpec::Kind::RBF) return 0.0;
    return spec.bandwidth ? *spec.bandwidth : median_heuristic(points);
}

/// Symmetric kernel matrix K_ij = k(x_i, x_j). RBF uses
/// exp(-|x_i - x_j|^2 / (2 h^2)) with h fixed by `bandwidth`; Linear uses
/// the inner product.
inline Eigen::MatrixXd kernel_matrix(const PointSet& points, KernelSpec::Kind kind,
                                     double bandwidth = 1.0) {
    const int m = points.size();
    const int dim = points.dim();
    Eigen::MatrixXd K(m, m);
    if (kind == KernelSpec::Kind::Linear) {
        for (int i = 0; i < m; ++i) {
            const double* xi = points.at(i);
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                const double* xj = points.at(j);
                for (int k = 0; k < dim; ++k) s += xi[k] * xj[k];
                K(i, j) = s;
                K(j, i) = s;
            }
        }
        return K;
    }
    const double scale = -0.5 / (bandwidth * bandwidth);
    for (int i = 0; i < m; ++i) {
        const double* xi = points.at(i);
        K(i, i) = 1.0;
        for (int j = i + 1; j < m; ++j) {
            const double v = std::exp(scale * squared_distance(xi, points.at(j), dim));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

/// Convenience overload resolving the bandwidth from the same point set.
inline Eigen::MatrixXd kernel_matrix(const PointSet& points, const KernelSpec& spec) {
    return kernel_matrix(points, spec.kind, resolve_bandwidth(spec, points));
}

/// Biased MMD^2 as the quadratic form w^T K w, clamped at zero. w is the
/// pair's difference vector restricted to the union indices (1/m1 on the
/// reference block, -1/m2 on the test block).
inline double mmd2_weighted(const Eigen::VectorXd& w, const Eigen::MatrixXd& K) {
    return std::max(0.0, w.dot(K * w));
}

}  // namespace gauntlet
