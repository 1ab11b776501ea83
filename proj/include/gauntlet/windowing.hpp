/// @file windowing.hpp
/// @brief Windowing schemes, the window pairs they induce on a finite stream,
///        and their weight-matrix encoding.
///
/// A scheme describes which (reference, test) window pairs a two-window
/// detector compares. On a stream of length n the pairs are enumerated at
/// integer time points (sample i lives at time t = i, unit spacing) and
/// encoded as a matrix whose rows are pair difference vectors plus an
/// all-ones row. Entries are exact rationals; floating conversion happens
/// only at solve time.
#pragma once

#include <gauntlet/errors.hpp>
#include <gauntlet/rational.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gauntlet {

/// Half-open index interval [begin, end).
struct Interval {
    int begin = 0;
    int end = 0;

    int size() const { return end - begin; }
    bool contains(int i) const { return i >= begin && i < end; }

    friend bool operator==(const Interval&, const Interval&) = default;
    friend auto operator<=>(const Interval&, const Interval&) = default;
};

/// Reference window w1 and test window w2, both within [0, n), disjoint.
struct WindowPair {
    Interval w1;
    Interval w2;

    friend bool operator==(const WindowPair&, const WindowPair&) = default;

    /// Orders by test-window time, then by reference window.
    friend bool operator<(const WindowPair& a, const WindowPair& b) {
        return std::tie(a.w2.begin, a.w2.end, a.w1.begin, a.w1.end) <
               std::tie(b.w2.begin, b.w2.end, b.w1.begin, b.w1.end);
    }
};

class WindowScheme {
public:
    enum class Kind { Sliding, Fixed, Growing, Chunked, Union };

    /// Two adjacent windows of length l: ([t-l, t), [t, t+l)).
    static WindowScheme sliding(int l, int stride = 1) {
        WindowScheme s(Kind::Sliding);
        s.l_ = l;
        s.stride_ = stride;
        s.validate();
        return s;
    }

    /// Fixed reference [0, a) against [t, t+l) for t >= a.
    static WindowScheme fixed(int a, int l, int stride = 1) {
        WindowScheme s(Kind::Fixed);
        s.a_ = a;
        s.l_ = l;
        s.stride_ = stride;
        s.validate();
        return s;
    }

    /// Growing reference [0, t) against [t, t+l) for t >= a.
    static WindowScheme growing(int a, int l, int stride = 1) {
        WindowScheme s(Kind::Growing);
        s.a_ = a;
        s.l_ = l;
        s.stride_ = stride;
        s.validate();
        return s;
    }

    /// Inner scheme updated only at chunk boundaries: keeps pairs with t = 0 mod c.
    static WindowScheme chunked(WindowScheme inner, int c) {
        WindowScheme s(Kind::Chunked);
        s.c_ = c;
        s.members_.push_back(std::move(inner));
        s.validate();
        return s;
    }

    static WindowScheme union_of(std::vector<WindowScheme> members) {
        WindowScheme s(Kind::Union);
        // Unions stay flat: nested unions are spliced into the member list.
        for (auto& m : members) {
            if (m.kind() == Kind::Union) {
                for (auto& inner : m.members_) s.members_.push_back(std::move(inner));
            } else {
                s.members_.push_back(std::move(m));
            }
        }
        s.validate();
        return s;
    }

    Kind kind() const { return kind_; }
    int length() const { return l_; }
    int reference_length() const { return a_; }
    int chunk() const { return c_; }
    int stride() const { return stride_; }
    const std::vector<WindowScheme>& members() const { return members_; }

    /// Copy with the stride replaced on every base node. Used by CLI/config overrides.
    WindowScheme with_stride(int stride) const {
        WindowScheme s = *this;
        if (s.kind_ == Kind::Chunked || s.kind_ == Kind::Union) {
            for (auto& m : s.members_) m = m.with_stride(stride);
        } else {
            s.stride_ = stride;
        }
        s.validate();
        return s;
    }

    /// Short display name: "sliding", "fixed (100)", "grow (100)", ...
    std::string label() const {
        switch (kind_) {
            case Kind::Sliding: return "sliding";
            case Kind::Fixed: return "fixed (" + std::to_string(a_) + ")";
            case Kind::Growing: return "grow (" + std::to_string(a_) + ")";
            case Kind::Chunked: return "chunked(" + members_[0].label() + ", " + std::to_string(c_) + ")";
            case Kind::Union: {
                std::string out = "union(";
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    if (i > 0) out += ", ";
                    out += members_[i].label();
                }
                return out + ")";
            }
        }
        return {};
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        switch (kind_) {
            case Kind::Sliding:
                j["type"] = "sliding";
                j["l"] = l_;
                break;
            case Kind::Fixed:
                j["type"] = "fixed";
                j["a"] = a_;
                j["l"] = l_;
                break;
            case Kind::Growing:
                j["type"] = "growing";
                j["a"] = a_;
                j["l"] = l_;
                break;
            case Kind::Chunked: {
                j["type"] = "chunked";
                j["c"] = c_;
                j["members"] = nlohmann::ordered_json::array({members_[0].to_json()});
                break;
            }
            case Kind::Union: {
                j["type"] = "union";
                auto arr = nlohmann::ordered_json::array();
                for (const auto& m : members_) arr.push_back(m.to_json());
                j["members"] = std::move(arr);
                break;
            }
        }
        if (kind_ != Kind::Chunked && kind_ != Kind::Union) j["stride"] = stride_;
        return j;
    }

    static WindowScheme from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
            throw ParseError("scheme spec must be an object with a \"type\" field");
        }
        const std::string type = j["type"].get<std::string>();
        const int stride = j.value("stride", 1);
        auto require_int = [&](const char* key) {
            if (!j.contains(key) || !j[key].is_number_integer()) {
                throw ParseError("scheme type \"" + type + "\" needs integer field \"" + key + "\"");
            }
            return j[key].get<int>();
        };
        try {
            if (type == "sliding") return sliding(require_int("l"), stride);
            if (type == "fixed") return fixed(require_int("a"), require_int("l"), stride);
            if (type == "growing") return growing(require_int("a"), require_int("l"), stride);
            if (type == "chunked") {
                if (!j.contains("members") || !j["members"].is_array() || j["members"].size() != 1) {
                    throw ParseError("chunked scheme needs a one-element \"members\" array");
                }
                return chunked(from_json(j["members"][0]), require_int("c"));
            }
            if (type == "union") {
                if (!j.contains("members") || !j["members"].is_array() || j["members"].empty()) {
                    throw ParseError("union scheme needs a non-empty \"members\" array");
                }
                std::vector<WindowScheme> members;
                for (const auto& m : j["members"]) members.push_back(from_json(m));
                return union_of(std::move(members));
            }
        } catch (const InvalidSpecError& e) {
            throw ParseError(std::string("invalid scheme parameters: ") + e.what());
        }
        throw ParseError("unknown scheme type \"" + type + "\"");
    }

private:
    explicit WindowScheme(Kind kind) : kind_(kind) {}

    void validate() const {
        if (stride_ < 1) throw InvalidSpecError("stride must be >= 1");
        switch (kind_) {
            case Kind::Sliding:
                if (l_ < 1) throw InvalidSpecError("sliding: l must be >= 1");
                break;
            case Kind::Fixed:
            case Kind::Growing:
                if (a_ < 1 || l_ < 1) throw InvalidSpecError("reference schemes need a >= 1 and l >= 1");
                break;
            case Kind::Chunked:
                if (c_ < 1) throw InvalidSpecError("chunked: c must be >= 1");
                if (members_.size() != 1) throw InvalidSpecError("chunked: exactly one inner scheme");
                break;
            case Kind::Union:
                if (members_.empty()) throw InvalidSpecError("union: at least one member");
                for (const auto& m : members_) {
                    if (m.kind() == Kind::Union) throw InvalidSpecError("union: must be flat");
                }
                break;
        }
    }

    Kind kind_;
    int l_ = 0;
    int a_ = 0;
    int c_ = 0;
    int stride_ = 1;
    std::vector<WindowScheme> members_;
};

namespace detail {

inline void enumerate_into(const WindowScheme& s, int n, std::vector<WindowPair>& out) {
    switch (s.kind()) {
        case WindowScheme::Kind::Sliding: {
            const int l = s.length();
            for (int t = l; t <= n - l; t += s.stride()) {
                out.push_back({{t - l, t}, {t, t + l}});
            }
            break;
        }
        case WindowScheme::Kind::Fixed: {
            const int a = s.reference_length();
            const int l = s.length();
            for (int t = a; t <= n - l; t += s.stride()) {
                out.push_back({{0, a}, {t, t + l}});
            }
            break;
        }
        case WindowScheme::Kind::Growing: {
            const int a = s.reference_length();
            const int l = s.length();
            for (int t = a; t <= n - l; t += s.stride()) {
                out.push_back({{0, t}, {t, t + l}});
            }
            break;
        }
        case WindowScheme::Kind::Chunked: {
            std::vector<WindowPair> inner;
            enumerate_into(s.members()[0], n, inner);
            for (const auto& p : inner) {
                if (p.w2.begin % s.chunk() == 0) out.push_back(p);
            }
            break;
        }
        case WindowScheme::Kind::Union: {
            for (const auto& m : s.members()) enumerate_into(m, n, out);
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            break;
        }
    }
}

}  // namespace detail

/// All window pairs the scheme evaluates on a stream of length n, in time order.
/// Throws EmptySchemeError when none fit.
inline std::vector<WindowPair> enumerate_pairs(const WindowScheme& scheme, int n) {
    std::vector<WindowPair> pairs;
    detail::enumerate_into(scheme, n, pairs);
    if (pairs.empty()) {
        throw EmptySchemeError("no window pair fits into a stream of length " + std::to_string(n) +
                               " for scheme " + scheme.label());
    }
    return pairs;
}

inline WindowScheme union_scheme(std::vector<WindowScheme> schemes) {
    if (schemes.empty()) throw InvalidSpecError("union of zero schemes");
    return WindowScheme::union_of(std::move(schemes));
}

/// Pair difference vectors plus an all-ones row, indexed over [0, n).
///
/// Row 0 is the all-ones vector. Row r >= 1 carries |w1|^-1 on w1 and
/// -|w2|^-1 on w2 of pair r-1, zero elsewhere; every such row sums to zero
/// exactly and annihilates constant vectors.
class WeightMatrix {
public:
    WeightMatrix(int n, std::vector<WindowPair> pairs) : n_(n), pairs_(std::move(pairs)) {}

    int n() const { return n_; }
    int rows() const { return 1 + static_cast<int>(pairs_.size()); }
    int pair_count() const { return static_cast<int>(pairs_.size()); }
    const std::vector<WindowPair>& pairs() const { return pairs_; }

    /// Pair encoded by row r (r >= 1).
    const WindowPair& pair(int row) const { return pairs_.at(static_cast<std::size_t>(row) - 1); }

    /// Sparse entries of a row as (index, value).
    std::vector<std::pair<int, Rational>> row(int r) const {
        std::vector<std::pair<int, Rational>> entries;
        if (r == 0) {
            entries.reserve(static_cast<std::size_t>(n_));
            for (int i = 0; i < n_; ++i) entries.emplace_back(i, Rational(1));
            return entries;
        }
        const WindowPair& p = pair(r);
        const Rational pos(1, p.w1.size());
        const Rational neg(-1, p.w2.size());
        for (int i = p.w1.begin; i < p.w1.end; ++i) entries.emplace_back(i, pos);
        for (int i = p.w2.begin; i < p.w2.end; ++i) entries.emplace_back(i, neg);
        return entries;
    }

    double row_dot(int r, std::span<const double> v) const {
        if (r == 0) {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += v[static_cast<std::size_t>(i)];
            return s;
        }
        const WindowPair& p = pair(r);
        double s1 = 0.0, s2 = 0.0;
        for (int i = p.w1.begin; i < p.w1.end; ++i) s1 += v[static_cast<std::size_t>(i)];
        for (int i = p.w2.begin; i < p.w2.end; ++i) s2 += v[static_cast<std::size_t>(i)];
        return s1 / p.w1.size() - s2 / p.w2.size();
    }

    Rational row_dot_exact(int r, std::span<const Rational> v) const {
        if (r == 0) {
            Rational s(0);
            for (int i = 0; i < n_; ++i) s += v[static_cast<std::size_t>(i)];
            return s;
        }
        const WindowPair& p = pair(r);
        Rational s1(0), s2(0);
        for (int i = p.w1.begin; i < p.w1.end; ++i) s1 += v[static_cast<std::size_t>(i)];
        for (int i = p.w2.begin; i < p.w2.end; ++i) s2 += v[static_cast<std::size_t>(i)];
        return s1 / Rational(p.w1.size()) - s2 / Rational(p.w2.size());
    }

    /// Dense float copy; include_ones_row selects whether row 0 is emitted.
    Eigen::MatrixXd dense(bool include_ones_row) const {
        const int offset = include_ones_row ? 1 : 0;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(offset + pair_count(), n_);
        if (include_ones_row) m.row(0).setOnes();
        for (int r = 0; r < pair_count(); ++r) {
            const WindowPair& p = pairs_[static_cast<std::size_t>(r)];
            m.row(offset + r).segment(p.w1.begin, p.w1.size()).setConstant(1.0 / p.w1.size());
            m.row(offset + r).segment(p.w2.begin, p.w2.size()).setConstant(-1.0 / p.w2.size());
        }
        return m;
    }

private:
    int n_;
    std::vector<WindowPair> pairs_;
};

/// Encodes the scheme's pairs on a stream of length n. Throws EmptySchemeError.
inline WeightMatrix build_weight_matrix(const WindowScheme& scheme, int n) {
    return WeightMatrix(n, enumerate_pairs(scheme, n));
}

}  // namespace gauntlet
