/// @file adversary.hpp
/// @brief Finite-sample adversarial profiles: null-space construction,
///        binarization, named generator families, and residual certification.
///
/// A profile v in [0,1]^n is adversarial for a scheme when it is not constant
/// yet every pair difference row of the scheme's weight matrix annihilates it.
/// Such a v hides genuine drift (the sample at position i follows the mixture
/// v_i*P + (1-v_i)*Q) behind windows whose mixture means always agree.
///
/// Certification is two-tier: float residuals (<= kSolveEps) for solver
/// output, exact rational zero for profiles whose entries are representable
/// rationals (all generator families, binarized profiles).
#pragma once

#include <gauntlet/errors.hpp>
#include <gauntlet/rational.hpp>
#include <gauntlet/rng.hpp>
#include <gauntlet/windowing.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gauntlet {

/// Relative singular-value cutoff for rank decisions.
inline constexpr double kRankEps = 1e-10;
/// Float residual bound certifying solver output.
inline constexpr double kSolveEps = 1e-9;
/// Below this spread, min-max normalization would amplify noise; treat as constant.
inline constexpr double kDegenerateRange = 1e-12;

struct Provenance {
    enum class Kind { NullSpaceSolve, FamilyGenerator, UserSupplied };

    Kind kind = Kind::UserSupplied;
    std::string family;             ///< generator name when kind == FamilyGenerator
    nlohmann::ordered_json params;  ///< generator/solver parameters
    std::string note;               ///< free-form, e.g. binarization repair summary

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        switch (kind) {
            case Kind::NullSpaceSolve: j["kind"] = "nullspace_solve"; break;
            case Kind::FamilyGenerator: j["kind"] = "family"; break;
            case Kind::UserSupplied: j["kind"] = "user"; break;
        }
        if (!family.empty()) j["family"] = family;
        if (!params.empty()) j["params"] = params;
        if (!note.empty()) j["note"] = note;
        return j;
    }

    static Provenance from_json(const nlohmann::json& j) {
        Provenance p;
        const std::string kind = j.value("kind", "user");
        if (kind == "nullspace_solve") {
            p.kind = Kind::NullSpaceSolve;
        } else if (kind == "family") {
            p.kind = Kind::FamilyGenerator;
        } else if (kind == "user") {
            p.kind = Kind::UserSupplied;
        } else {
            throw ParseError("unknown provenance kind \"" + kind + "\"");
        }
        p.family = j.value("family", "");
        if (j.contains("params")) p.params = j["params"];
        p.note = j.value("note", "");
        return p;
    }
};

/// Mixture-weight vector v in [0,1]^n, optionally with exact rational entries.
class AdversarialProfile {
public:
    AdversarialProfile(std::vector<double> v, Provenance prov)
        : v_(std::move(v)), provenance_(std::move(prov)) {
        validate_range();
    }

    AdversarialProfile(std::vector<Rational> exact, Provenance prov)
        : exact_(std::move(exact)), provenance_(std::move(prov)) {
        v_.reserve(exact_->size());
        for (const auto& r : *exact_) v_.push_back(to_double(r));
        validate_range();
    }

    int n() const { return static_cast<int>(v_.size()); }
    const std::vector<double>& values() const { return v_; }
    bool has_exact() const { return exact_.has_value(); }
    const std::vector<Rational>& exact_values() const { return *exact_; }
    const Provenance& provenance() const { return provenance_; }

    bool is_nonconstant() const {
        if (exact_) {
            for (const auto& r : *exact_) {
                if (r != exact_->front()) return true;
            }
            return false;
        }
        for (double x : v_) {
            if (std::abs(x - v_.front()) > kDegenerateRange) return true;
        }
        return false;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["n"] = n();
        j["v"] = v_;
        j["provenance"] = provenance_.to_json();
        j["exact"] = has_exact();
        return j;
    }

    /// Inverse of to_json. When the exactness flag is set, entries are
    /// reconstructed as small-denominator rationals (all serializers that set
    /// the flag emit such values; %.17g round-trips them bit-exactly).
    static AdversarialProfile from_json(const nlohmann::json& j) {
        if (!j.contains("n") || !j.contains("v") || !j["v"].is_array()) {
            throw ParseError("profile needs fields \"n\" and \"v\"");
        }
        std::vector<double> v = j["v"].get<std::vector<double>>();
        if (static_cast<int>(v.size()) != j["n"].get<int>()) {
            throw ParseError("profile length does not match field \"n\"");
        }
        Provenance prov =
            j.contains("provenance") ? Provenance::from_json(j["provenance"]) : Provenance{};
        if (j.value("exact", false)) {
            std::vector<Rational> exact;
            exact.reserve(v.size());
            for (double x : v) {
                auto r = rational_from_double(x);
                if (!r) throw ParseError("profile flagged exact but entries do not reconstruct");
                exact.push_back(*r);
            }
            return {std::move(exact), std::move(prov)};
        }
        return {std::move(v), std::move(prov)};
    }

private:
    void validate_range() const {
        for (std::size_t i = 0; i < v_.size(); ++i) {
            if (!(v_[i] >= 0.0 && v_[i] <= 1.0)) {
                throw RangeViolationError("profile entry " + std::to_string(i) + " = " +
                                          std::to_string(v_[i]) + " outside [0,1]");
            }
        }
    }

    std::vector<double> v_;
    std::optional<std::vector<Rational>> exact_;
    Provenance provenance_;
};

/// Basis of the difference-row null space (floats), for inspection tooling.
struct NullspaceBasis {
    int dimension = 0;
    std::vector<Eigen::VectorXd> vectors;
    bool has_nonconstant = false;
};

inline NullspaceBasis nullspace_basis(const WeightMatrix& W) {
    const int n = W.n();
    const Eigen::MatrixXd diff = W.dense(false);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? kRankEps * sv(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++rank;
    }
    NullspaceBasis basis;
    basis.dimension = n - rank;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    for (int j = rank; j < n; ++j) {
        Eigen::VectorXd v = svd.matrixV().col(j);
        if ((v - (ones.dot(v)) * ones).norm() > 1e-8) basis.has_nonconstant = true;
        basis.vectors.push_back(std::move(v));
    }
    return basis;
}

/// Solves W x = 0 (all-ones row included as a hard constraint, so any
/// solution is orthogonal to constants) and min-max normalizes into [0,1].
///
/// The all-ones row forces mean zero before normalization; it is excluded
/// from the adversariality certificate afterwards, which rests on the
/// difference rows alone — those annihilate constants, so the affine
/// normalization preserves their residual.
///
/// Throws NoAdversarialError when the difference rows admit only constant
/// solutions (the scheme sees every drift at this n).
inline AdversarialProfile solve_nullspace(const WeightMatrix& W) {
    const int n = W.n();
    const Eigen::MatrixXd m = W.dense(true);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = kRankEps * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++rank;
    }
    if (rank >= n) {
        throw NoAdversarialError("difference rows admit only constant solutions for scheme at n = " +
                                 std::to_string(n));
    }
    Eigen::VectorXd v = svd.matrixV().col(n - 1);

    double residual = 0.0;
    std::vector<double> raw(v.data(), v.data() + n);
    for (int r = 1; r < W.rows(); ++r) residual = std::max(residual, std::abs(W.row_dot(r, raw)));
    if (residual > kSolveEps) {
        throw NoAdversarialError("null-space candidate failed residual certification (" +
                                 std::to_string(residual) + ")");
    }

    const double lo = *std::min_element(raw.begin(), raw.end());
    const double hi = *std::max_element(raw.begin(), raw.end());
    if (hi - lo <= kDegenerateRange) {
        throw NoAdversarialError("null-space candidate is numerically constant");
    }
    for (double& x : raw) x = (x - lo) / (hi - lo);

    Provenance prov;
    prov.kind = Provenance::Kind::NullSpaceSolve;
    prov.params = {{"n", n}, {"pairs", W.pair_count()}};
    return {std::move(raw), std::move(prov)};
}

/// Rounds v at 0.5 and greedily repairs flips until the exact rational
/// residual over all difference rows reaches zero. Constant vectors satisfy
/// every difference row trivially but carry no drift, so they are rejected
/// as repair states. Throws BinarizationInfeasibleError when no non-constant
/// binary null-space member is reachable.
inline AdversarialProfile binarize_profile(const AdversarialProfile& profile, const WeightMatrix& W) {
    const int n = W.n();
    if (profile.n() != n) {
        throw DimensionMismatchError("profile length " + std::to_string(profile.n()) +
                                     " does not match weight matrix n = " + std::to_string(n));
    }

    std::vector<Rational> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = profile.values()[static_cast<std::size_t>(i)] >= 0.5
                                             ? Rational(1)
                                             : Rational(0);
    }
    int ones = 0;
    for (const auto& x : v) ones += (x == Rational(1)) ? 1 : 0;

    // Column index: which difference rows touch position i, with what weight.
    std::vector<std::vector<std::pair<int, Rational>>> touching(static_cast<std::size_t>(n));
    std::vector<Rational> row_residual(static_cast<std::size_t>(W.rows()), Rational(0));
    for (int r = 1; r < W.rows(); ++r) {
        for (const auto& [i, coef] : W.row(r)) {
            touching[static_cast<std::size_t>(i)].emplace_back(r, coef);
        }
        row_residual[static_cast<std::size_t>(r)] = W.row_dot_exact(r, v);
    }
    auto total = [&] {
        Rational t(0);
        for (int r = 1; r < W.rows(); ++r) t += boost::abs(row_residual[static_cast<std::size_t>(r)]);
        return t;
    };

    Rational current = total();
    int flips = 0;
    const int flip_budget = 4 * n;
    while (current != Rational(0) && flips < flip_budget) {
        int best = -1;
        Rational best_delta(0);
        for (int i = 0; i < n; ++i) {
            const bool to_one = v[static_cast<std::size_t>(i)] == Rational(0);
            // Skip flips that would collapse the vector to a constant.
            if ((to_one && ones == n - 1) || (!to_one && ones == 1)) continue;
            const Rational step = to_one ? Rational(1) : Rational(-1);
            Rational delta(0);
            for (const auto& [r, coef] : touching[static_cast<std::size_t>(i)]) {
                const Rational before = row_residual[static_cast<std::size_t>(r)];
                delta += boost::abs(before + coef * step) - boost::abs(before);
            }
            if (delta < best_delta) {
                best_delta = delta;
                best = i;
            }
        }
        if (best < 0) break;
        const bool to_one = v[static_cast<std::size_t>(best)] == Rational(0);
        const Rational step = to_one ? Rational(1) : Rational(-1);
        v[static_cast<std::size_t>(best)] += step;
        ones += to_one ? 1 : -1;
        for (const auto& [r, coef] : touching[static_cast<std::size_t>(best)]) {
            row_residual[static_cast<std::size_t>(r)] += coef * step;
        }
        current = total();
        ++flips;
    }

    if (current != Rational(0) || ones == 0 || ones == n) {
        throw BinarizationInfeasibleError(
            "no non-constant binary vector satisfies the difference rows (stopped after " +
            std::to_string(flips) + " flips)");
    }

    int changed = 0;
    for (int i = 0; i < n; ++i) {
        const Rational rounded =
            profile.values()[static_cast<std::size_t>(i)] >= 0.5 ? Rational(1) : Rational(0);
        if (v[static_cast<std::size_t>(i)] != rounded) ++changed;
    }
    if (changed == 0 && profile.has_exact() && profile.exact_values() == v) {
        return profile;  // already binary and exact: fixed point
    }

    Provenance prov = profile.provenance();
    prov.note = prov.note.empty() ? "" : prov.note + "; ";
    prov.note += "binarized (" + std::to_string(changed) + " entries changed from rounding)";
    return {std::move(v), std::move(prov)};
}

/// Binary square wave: `duty` ones then l-duty zeros, repeated. Long blocks
/// rather than fast alternation keep the finite-sample drift visible to the
/// eye while staying invisible to sliding pairs of length l.
inline AdversarialProfile gen_periodic(int l, int duty, int n) {
    if (!(1 <= duty && duty < l && l <= n)) {
        throw InvalidSpecError("gen_periodic needs 1 <= duty < l <= n");
    }
    std::vector<Rational> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v.emplace_back((i % l) < duty ? 1 : 0);
    }
    Provenance prov;
    prov.kind = Provenance::Kind::FamilyGenerator;
    prov.family = "periodic";
    prov.params = {{"l", l}, {"duty", duty}, {"n", n}};
    return {std::move(v), std::move(prov)};
}

/// Random balanced binary head of even length a, then the constant 1/2 (the
/// head mean, kept exact). Member of every fixed/growing reference scheme
/// whose reference covers the head or a head-mean-preserving prefix.
inline AdversarialProfile gen_rand_const(int a, int n, Rng& rng) {
    if (!(1 <= a && a < n)) throw InvalidSpecError("gen_rand_const needs 1 <= a < n");
    if (a % 2 != 0) {
        throw OddHeadError("gen_rand_const needs even head length, got a = " + std::to_string(a));
    }
    std::vector<Rational> v(static_cast<std::size_t>(n), Rational(1, 2));
    std::vector<int> head(static_cast<std::size_t>(a), 0);
    std::fill(head.begin(), head.begin() + a / 2, 1);
    rng.shuffle(head);
    for (int i = 0; i < a; ++i) v[static_cast<std::size_t>(i)] = Rational(head[static_cast<std::size_t>(i)]);
    Provenance prov;
    prov.kind = Provenance::Kind::FamilyGenerator;
    prov.family = "rand_const";
    prov.params = {{"a", a}, {"n", n}};
    return {std::move(v), std::move(prov)};
}

/// Binary cousin of gen_rand_const for stream-level benchmarks. The head is
/// a random cyclic rotation of a/2 ones followed by a/2 zeros; the tail
/// alternates 0,1. Every window of even length and every even-length prefix
/// is exactly balanced, so the profile solves the same even-offset reference
/// constraints as gen_rand_const while staying binary: each sample is a pure
/// P or Q draw, with no mixture noise drowning the finite-sample signature.
/// The long-block head keeps prefix deviations large, which is what straddle
/// pairs of a sliding scheme latch onto.
inline AdversarialProfile gen_rand_const_binary(int a, int n, Rng& rng) {
    if (!(1 <= a && a < n)) throw InvalidSpecError("gen_rand_const_binary needs 1 <= a < n");
    if (a % 2 != 0) {
        throw OddHeadError("gen_rand_const_binary needs even head length, got a = " +
                           std::to_string(a));
    }
    std::vector<Rational> v;
    v.reserve(static_cast<std::size_t>(n));
    const int rot = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(a)));
    for (int i = 0; i < a; ++i) {
        v.emplace_back((i + rot) % a < a / 2 ? 1 : 0);
    }
    for (int i = a; i < n; ++i) v.emplace_back((i - a) % 2);
    Provenance prov;
    prov.kind = Provenance::Kind::FamilyGenerator;
    prov.family = "rand_const_binary";
    prov.params = {{"a", a}, {"n", n}};
    return {std::move(v), std::move(prov)};
}

/// Random binary head of length a with k ones, then an l-periodic block
/// pattern with m = l*k/a ones per period, so head mean and period mean
/// agree exactly. k is chosen nearest a/2 subject to m being integral.
inline AdversarialProfile gen_rand_periodic(int a, int l, int n, Rng& rng) {
    if (!(1 <= a && a < n && 1 <= l && l <= n - a)) {
        throw InvalidSpecError("gen_rand_periodic needs 1 <= a < n and 1 <= l <= n - a");
    }
    int k = -1, m = -1;
    long best_dist = -1;
    for (int cand = 1; cand < a; ++cand) {
        const long long lm = static_cast<long long>(l) * cand;
        if (lm % a != 0) continue;
        const int cm = static_cast<int>(lm / a);
        if (cm < 1 || cm > l - 1) continue;
        const long dist = std::labs(2L * cand - a);  // |cand - a/2| without halves
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            k = cand;
            m = cm;
        }
    }
    if (k < 0) {
        throw NoFeasibleDutyError("no head count k in [1, " + std::to_string(a - 1) +
                                  "] makes l*k/a integral with a feasible period duty");
    }
    std::vector<Rational> v(static_cast<std::size_t>(n), Rational(0));
    std::vector<int> head(static_cast<std::size_t>(a), 0);
    std::fill(head.begin(), head.begin() + k, 1);
    rng.shuffle(head);
    for (int i = 0; i < a; ++i) v[static_cast<std::size_t>(i)] = Rational(head[static_cast<std::size_t>(i)]);
    for (int i = a; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = Rational(((i - a) % l) < m ? 1 : 0);
    }
    Provenance prov;
    prov.kind = Provenance::Kind::FamilyGenerator;
    prov.family = "rand_periodic";
    prov.params = {{"a", a}, {"l", l}, {"n", n}, {"k", k}, {"m", m}};
    return {std::move(v), std::move(prov)};
}

struct ProfileReport {
    double max_residual = 0.0;               ///< float route, over difference rows
    bool exact_checked = false;               ///< rational route was available
    bool exact_zero = false;                  ///< rational residual is exactly 0
    std::optional<Rational> exact_max;        ///< largest |row . v| when exact
    bool is_nonconstant = false;
    bool is_adversarial = false;
};

/// Residual certificate of v against the scheme's difference rows at length n.
/// Adversarial means non-constant and residual zero at the strongest
/// available tier (exact rational zero when entries are exact, float
/// residual <= kSolveEps otherwise).
inline ProfileReport verify_profile(const AdversarialProfile& profile, const WindowScheme& scheme,
                                    int n) {
    if (profile.n() != n) {
        throw DimensionMismatchError("profile length " + std::to_string(profile.n()) +
                                     " does not match n = " + std::to_string(n));
    }
    const WeightMatrix W = build_weight_matrix(scheme, n);
    ProfileReport report;
    for (int r = 1; r < W.rows(); ++r) {
        report.max_residual = std::max(report.max_residual, std::abs(W.row_dot(r, profile.values())));
    }
    report.is_nonconstant = profile.is_nonconstant();
    if (profile.has_exact()) {
        report.exact_checked = true;
        Rational worst(0);
        for (int r = 1; r < W.rows(); ++r) {
            worst = std::max(worst, boost::abs(W.row_dot_exact(r, profile.exact_values())));
        }
        report.exact_max = worst;
        report.exact_zero = worst == Rational(0);
        report.is_adversarial = report.is_nonconstant && report.exact_zero;
    } else {
        report.is_adversarial = report.is_nonconstant && report.max_residual <= kSolveEps;
    }
    return report;
}

}  // namespace gauntlet
