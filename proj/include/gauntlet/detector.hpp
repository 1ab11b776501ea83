/// @file detector.hpp
/// @brief Permutation MMD two-sample test and the two-window streaming
///        detector (no memory management), including detector combination.
#pragma once

#include <gauntlet/errors.hpp>
#include <gauntlet/kernel.hpp>
#include <gauntlet/rng.hpp>
#include <gauntlet/windowing.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

namespace gauntlet {

/// Permutation statistics tie tolerance: permuted and observed statistics are
/// computed through the same code path, so only accumulation-order noise
/// remains.
inline constexpr double kTieEps = 1e-12;

struct TestResult {
    WindowPair pair{};
    double mmd2 = 0.0;
    double p_value = 1.0;
};

/// Permutation MMD test on pooled samples whose canonical split is the first
/// m1 points (reference) versus the last m2 (test). The kernel matrix is
/// computed once; the RBF bandwidth is resolved once from the pooled sample
/// and held fixed across permutations; only the weight labeling is permuted.
/// p uses the add-one convention (never exactly zero).
///
/// The per-permutation statistic w^T K w is expanded around the smaller
/// window's index set A: with gamma = 1/m1 + 1/m2 and `big` the other side's
/// count,
///     w^T K w = T/big^2 - (2 gamma / big) * sum_{i in A} r_i
///               + gamma^2 * sum_{i,j in A} K_ij,
/// where r = K 1 and T = 1^T K 1 are precomputed. This touches O(|A|^2)
/// entries per permutation instead of O(u^2).
inline TestResult permutation_test(const PointSet& pooled, int m1, int m2, const KernelSpec& spec,
                                   int M, Rng& rng) {
    const int u = pooled.size();
    if (m1 < 1 || m2 < 1 || m1 + m2 != u) {
        throw InvalidSpecError("window sizes must be positive and sum to the pooled count");
    }
    if (M < 1) throw InvalidSpecError("permutation count must be >= 1");

    const Eigen::MatrixXd K = kernel_matrix(pooled, spec);
    const Eigen::VectorXd r = K.rowwise().sum();
    const double T = r.sum();

    const bool a_is_reference = m1 <= m2;
    const int small = a_is_reference ? m1 : m2;
    const int big = a_is_reference ? m2 : m1;
    const double gamma = 1.0 / m1 + 1.0 / m2;
    const double c0 = T / (static_cast<double>(big) * big);
    const double c1 = 2.0 * gamma / big;
    const double c2 = gamma * gamma;

    const auto stat_of = [&](const int* idx) {
        double R = 0.0;
        double S = 0.0;
        for (int a = 0; a < small; ++a) {
            const int i = idx[a];
            R += r[i];
            double row = 0.0;
            for (int b = 0; b < small; ++b) row += K(i, idx[b]);
            S += row;
        }
        return c0 - c1 * R + c2 * S;
    };

    std::vector<int> idx(static_cast<std::size_t>(u));
    std::iota(idx.begin(), idx.end(), 0);
    if (!a_is_reference) {
        // Canonical A = test-window indices m1..u-1; rotate them to the front.
        std::rotate(idx.begin(), idx.begin() + m1, idx.end());
    }
    const double observed = stat_of(idx.data());

    int at_least = 0;
    for (int perm = 0; perm < M; ++perm) {
        for (int a = 0; a < small; ++a) {
            const int j = a + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(u - a)));
            std::swap(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(j)]);
        }
        if (stat_of(idx.data()) >= observed - kTieEps) ++at_least;
    }

    TestResult result;
    result.mmd2 = std::max(0.0, observed);
    result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + M);
    return result;
}

struct DetectionReport {
    std::vector<TestResult> results;  ///< in pair time order
    double min_p = 1.0;
    double theta = 0.0;
    nlohmann::ordered_json config;

    int alarm_count() const {
        int c = 0;
        for (const auto& t : results) c += t.p_value < theta ? 1 : 0;
        return c;
    }

    std::vector<WindowPair> alarms() const {
        std::vector<WindowPair> out;
        for (const auto& t : results) {
            if (t.p_value < theta) out.push_back(t.pair);
        }
        return out;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["config"] = config;
        j["min_p"] = min_p;
        j["alarm_count"] = alarm_count();
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : results) {
            nlohmann::ordered_json row;
            row["w1"] = {t.pair.w1.begin, t.pair.w1.end};
            row["w2"] = {t.pair.w2.begin, t.pair.w2.end};
            row["mmd2"] = t.mmd2;
            row["p"] = t.p_value;
            row["alarm"] = t.p_value < theta;
            arr.push_back(std::move(row));
        }
        j["results"] = std::move(arr);
        return j;
    }

    /// CSV rows keyed by the test window (detection time lives there).
    std::string to_csv() const {
        std::string out = "pair_start,pair_end,mmd2,p\n";
        char buf[128];
        for (const auto& t : results) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", t.pair.w2.begin, t.pair.w2.end,
                          t.mmd2, t.p_value);
            out += buf;
        }
        return out;
    }
};

/// Algorithm: enumerate the scheme's window pairs in time order and run the
/// permutation MMD test on each, alarming when p < theta. Each pair draws
/// its permutations from a substream derived from (seed, test-window start),
/// so striding or parallel evaluation cannot change an individual outcome.
inline DetectionReport run_detector(const PointSet& points, const WindowScheme& scheme, double theta,
                                    const KernelSpec& spec, int M, std::uint64_t seed) {
    const int n = points.size();
    const auto pairs = enumerate_pairs(scheme, n);

    DetectionReport report;
    report.theta = theta;
    report.config = {{"n", n},
                     {"scheme", scheme.to_json()},
                     {"kernel", spec.to_json()},
                     {"permutations", M},
                     {"theta", theta},
                     {"seed", seed}};
    report.results.reserve(pairs.size());

    std::vector<int> union_idx;
    for (const auto& pair : pairs) {
        union_idx.clear();
        for (int i = pair.w1.begin; i < pair.w1.end; ++i) union_idx.push_back(i);
        for (int i = pair.w2.begin; i < pair.w2.end; ++i) union_idx.push_back(i);
        const PointSet pooled = points.gather(union_idx);
        Rng sub(derive_seed(seed, {static_cast<std::uint64_t>(pair.w2.begin)}));
        TestResult t = permutation_test(pooled, pair.w1.size(), pair.w2.size(), spec, M, sub);
        t.pair = pair;
        report.min_p = std::min(report.min_p, t.p_value);
        report.results.push_back(t);
    }
    return report;
}

/// Combination of detectors = detector of the union scheme: one alarm set,
/// pairs deduplicated across members.
inline DetectionReport run_combined(const PointSet& points, std::vector<WindowScheme> schemes,
                                    double theta, const KernelSpec& spec, int M,
                                    std::uint64_t seed) {
    return run_detector(points, union_scheme(std::move(schemes)), theta, spec, M, seed);
}

}  // namespace gauntlet
