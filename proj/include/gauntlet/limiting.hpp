/// @file limiting.hpp
/// @brief Limiting-case adversarial functions and their integral-constraint
///        verifier.
///
/// In the limit of dense sampling a profile becomes a function f: T -> [0,1]
/// and the two-window detector compares window integrals: f is invisible to a
/// scheme exactly when |W2| * int_{W1} f = |W1| * int_{W2} f for every window
/// pair (W1, W2) the scheme evaluates (Lebesgue measure on T). The families
/// below parameterize the known solution sets per scheme kind:
///
///   - Periodic(l):               l-periodic f, invisible to sliding pairs.
///   - PeriodicAfterMatchedMean:  head on [0,a), then l-periodic tail whose
///                                period mean equals the head mean; invisible
///                                to a fixed reference of length a.
///   - ConstantAfter:             head on [0,a), then the constant equal to
///                                the head mean; invisible to a growing
///                                reference.
///   - BoundaryEffect:            f(t) = p + t*q(t) with q l-periodic and
///                                mean zero. Solves the sliding constraint on
///                                all of R yet leaves [0,1] for large |t| —
///                                a constraint-set member that is not a
///                                realizable profile.
///
/// The matched-mean / matched-constant identities are the adversariality
/// conditions; they are measured by verify_function_limiting rather than
/// enforced at construction so that near-misses can be built and diagnosed.
#pragma once

#include <gauntlet/adversary.hpp>
#include <gauntlet/errors.hpp>
#include <gauntlet/windowing.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace gauntlet {

/// Scalar building block for function families. Square waves use the value
/// `hi` on the first `duty` fraction of each period and `lo` on the rest.
struct Waveform {
    enum class Kind { Const, Sine, Square };

    Kind kind = Kind::Const;
    double c = 0.0;       ///< Const value
    double mean = 0.0;    ///< Sine offset
    double amp = 0.0;     ///< Sine amplitude
    double period = 1.0;  ///< Sine/Square period
    double duty = 0.5;    ///< Square high fraction in (0,1)
    double hi = 1.0;      ///< Square high value
    double lo = 0.0;      ///< Square low value

    static Waveform constant(double value) {
        Waveform w;
        w.kind = Kind::Const;
        w.c = value;
        return w;
    }

    static Waveform sine(double period, double mean, double amp) {
        if (period <= 0.0) throw InvalidSpecError("sine waveform needs period > 0");
        Waveform w;
        w.kind = Kind::Sine;
        w.period = period;
        w.mean = mean;
        w.amp = amp;
        return w;
    }

    static Waveform square(double period, double duty, double hi = 1.0, double lo = 0.0) {
        if (period <= 0.0 || duty <= 0.0 || duty >= 1.0) {
            throw InvalidSpecError("square waveform needs period > 0 and duty in (0,1)");
        }
        Waveform w;
        w.kind = Kind::Square;
        w.period = period;
        w.duty = duty;
        w.hi = hi;
        w.lo = lo;
        return w;
    }

    double eval(double t) const {
        switch (kind) {
            case Kind::Const: return c;
            case Kind::Sine: return mean + amp * std::sin(2.0 * std::numbers::pi * t / period);
            case Kind::Square: {
                double phase = std::fmod(t, period);
                if (phase < 0.0) phase += period;
                return phase < duty * period ? hi : lo;
            }
        }
        return 0.0;
    }

    /// Exact mean over one period (the Const value for constants).
    double period_mean() const {
        switch (kind) {
            case Kind::Const: return c;
            case Kind::Sine: return mean;
            case Kind::Square: return duty * hi + (1.0 - duty) * lo;
        }
        return 0.0;
    }

    /// Appends jump locations inside (lo_t, hi_t); smooth kinds contribute none.
    void jump_points(double lo_t, double hi_t, std::vector<double>& out) const {
        if (kind != Kind::Square) return;
        const double first = std::floor(lo_t / period) - 1.0;
        const double last = std::ceil(hi_t / period) + 1.0;
        for (double k = first; k <= last; k += 1.0) {
            for (double b : {k * period, (k + duty) * period}) {
                if (b > lo_t && b < hi_t) out.push_back(b);
            }
        }
    }

    double min_jump_spacing() const {
        if (kind != Kind::Square) return std::numeric_limits<double>::infinity();
        return std::min(duty, 1.0 - duty) * period;
    }

    nlohmann::ordered_json describe() const {
        switch (kind) {
            case Kind::Const: return {{"kind", "const"}, {"value", c}};
            case Kind::Sine: return {{"kind", "sine"}, {"period", period}, {"mean", mean}, {"amp", amp}};
            case Kind::Square:
                return {{"kind", "square"}, {"period", period}, {"duty", duty}, {"hi", hi}, {"lo", lo}};
        }
        return {};
    }
};

class AdversarialFunction {
public:
    enum class Family { Periodic, PeriodicAfterMatchedMean, ConstantAfter, BoundaryEffect };

    /// l-periodic wave on all of R.
    static AdversarialFunction periodic(Waveform wave) {
        if (wave.kind == Waveform::Kind::Const) {
            throw InvalidSpecError("periodic family needs a non-constant waveform");
        }
        AdversarialFunction f(Family::Periodic);
        f.head_ = wave;
        f.l_ = wave.period;
        return f;
    }

    /// head on [0,a), then tail(t - a) for t >= a. Adversarial for a fixed
    /// reference of length a exactly when tail period mean = head mean on [0,a).
    static AdversarialFunction periodic_after(double a, Waveform head, Waveform tail) {
        if (a <= 0.0) throw InvalidSpecError("periodic_after needs a > 0");
        if (tail.kind == Waveform::Kind::Const) {
            throw InvalidSpecError("periodic_after tail must be periodic, use constant_after instead");
        }
        AdversarialFunction f(Family::PeriodicAfterMatchedMean);
        f.a_ = a;
        f.head_ = head;
        f.tail_ = tail;
        f.l_ = tail.period;
        return f;
    }

    /// head on [0,a), then the constant c (default: the head's period mean,
    /// exact when a is a whole number of head periods).
    static AdversarialFunction constant_after(double a, Waveform head, double c) {
        if (a <= 0.0) throw InvalidSpecError("constant_after needs a > 0");
        AdversarialFunction f(Family::ConstantAfter);
        f.a_ = a;
        f.head_ = head;
        f.tail_ = Waveform::constant(c);
        return f;
    }

    static AdversarialFunction constant_after(double a, Waveform head) {
        return constant_after(a, head, head.period_mean());
    }

    /// f(t) = p + t * q(t) with q(t) = q_amp * sin(2 pi t / l): the q-part is
    /// l-periodic with zero period mean, so f solves the sliding constraint
    /// identically while drifting out of [0,1] as |t| grows.
    static AdversarialFunction boundary_effect(double p, double q_amp, double l) {
        AdversarialFunction f(Family::BoundaryEffect);
        f.head_ = Waveform::constant(p);
        f.tail_ = Waveform::sine(l, 0.0, q_amp);
        f.l_ = l;
        return f;
    }

    Family family() const { return family_; }
    double switch_point() const { return a_; }
    double period() const { return l_; }

    /// Lowest admissible time (families with a head start at 0).
    double domain_min() const {
        return (family_ == Family::Periodic || family_ == Family::BoundaryEffect)
                   ? -std::numeric_limits<double>::infinity()
                   : 0.0;
    }

    double operator()(double t) const {
        switch (family_) {
            case Family::Periodic: return head_.eval(t);
            case Family::PeriodicAfterMatchedMean:
            case Family::ConstantAfter: return t < a_ ? head_.eval(t) : tail_.eval(t - a_);
            case Family::BoundaryEffect: return head_.c + t * tail_.eval(t);
        }
        return 0.0;
    }

    /// Interior points of (lo, hi) where f is not smooth: waveform jumps plus
    /// the head/tail switch. Quadrature splits panels here.
    std::vector<double> breakpoints_in(double lo, double hi) const {
        std::vector<double> pts;
        switch (family_) {
            case Family::Periodic:
                head_.jump_points(lo, hi, pts);
                break;
            case Family::PeriodicAfterMatchedMean:
            case Family::ConstantAfter:
                head_.jump_points(lo, std::min(hi, a_), pts);
                if (a_ > lo && a_ < hi) pts.push_back(a_);
                if (hi > a_) {
                    std::vector<double> tail_pts;
                    tail_.jump_points(std::max(lo, a_) - a_, hi - a_, tail_pts);
                    for (double b : tail_pts) pts.push_back(b + a_);
                }
                break;
            case Family::BoundaryEffect:
                break;
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

    /// Smallest spacing between jump discontinuities; infinity when f has none.
    double min_discontinuity_spacing() const {
        return std::min(head_.min_jump_spacing(), tail_.min_jump_spacing());
    }

    nlohmann::ordered_json describe() const {
        nlohmann::ordered_json j;
        switch (family_) {
            case Family::Periodic:
                j["family"] = "periodic";
                j["wave"] = head_.describe();
                break;
            case Family::PeriodicAfterMatchedMean:
                j["family"] = "periodic_after";
                j["a"] = a_;
                j["head"] = head_.describe();
                j["tail"] = tail_.describe();
                break;
            case Family::ConstantAfter:
                j["family"] = "constant_after";
                j["a"] = a_;
                j["head"] = head_.describe();
                j["c"] = tail_.c;
                break;
            case Family::BoundaryEffect:
                j["family"] = "boundary_effect";
                j["p"] = head_.c;
                j["q"] = tail_.describe();
                break;
        }
        return j;
    }

private:
    explicit AdversarialFunction(Family family) : family_(family) {}

    Family family_;
    Waveform head_;
    Waveform tail_;
    double a_ = 0.0;
    double l_ = 0.0;
};

namespace detail {

/// Composite Simpson over one smooth piece; panels is made even internally.
/// Piece boundaries may sit exactly on jump points of the full integrand, so
/// the two endpoint evaluations are nudged into the interior — a negligible
/// perturbation for smooth pieces and the correct branch for constants.
template <typename F>
double simpson_piece(const F& f, double lo, double hi, int panels) {
    if (hi <= lo) return 0.0;
    if (panels < 2) panels = 2;
    if (panels % 2 != 0) ++panels;
    const double h = (hi - lo) / panels;
    const double nudge = (hi - lo) * 1e-12;
    double acc = f(lo + nudge) + f(hi - nudge);
    for (int i = 1; i < panels; ++i) {
        acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

/// Simpson with panel boundaries pinned to the integrand's breakpoints, so
/// piecewise-smooth families integrate at full order.
inline double integrate(const AdversarialFunction& f, double lo, double hi, int panels) {
    if (hi <= lo) return 0.0;
    std::vector<double> cuts = f.breakpoints_in(lo, hi);
    cuts.insert(cuts.begin(), lo);
    cuts.push_back(hi);
    const double total = hi - lo;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double piece = cuts[i + 1] - cuts[i];
        if (piece <= 0.0) continue;
        const int alloc = std::max(2, static_cast<int>(std::lround(panels * piece / total)));
        acc += simpson_piece(f, cuts[i], cuts[i + 1], alloc);
    }
    return acc;
}

}  // namespace detail

struct LimitingReport {
    double max_violation = 0.0;  ///< max over the grid of |W2|*int_{W1}f - |W1|*int_{W2}f|
    double argmax_t = 0.0;
    bool range_ok = true;        ///< f stayed in [0,1] over all windows scanned
    double range_min = std::numeric_limits<double>::infinity();
    double range_max = -std::numeric_limits<double>::infinity();
};

namespace detail {

struct RealWindows {
    double w1_lo, w1_hi, w2_lo, w2_hi;
};

inline RealWindows real_windows(const WindowScheme& s, double t) {
    switch (s.kind()) {
        case WindowScheme::Kind::Sliding: {
            const double l = s.length();
            return {t - l, t, t, t + l};
        }
        case WindowScheme::Kind::Fixed:
        case WindowScheme::Kind::Growing: {
            const double a = s.reference_length();
            const double l = s.length();
            if (t < a - 1e-12) {
                throw InvalidSpecError("t = " + std::to_string(t) +
                                       " is below the scheme's first admissible time a = " +
                                       std::to_string(a));
            }
            if (s.kind() == WindowScheme::Kind::Fixed) return {0.0, a, t, t + l};
            return {0.0, t, t, t + l};
        }
        default:
            throw InvalidSpecError("limiting verification supports sliding/fixed/growing bases");
    }
}

inline void verify_against_base(const AdversarialFunction& f, const WindowScheme& scheme,
                                const std::vector<double>& t_grid, int quad_points,
                                LimitingReport& report) {
    const double spacing = f.min_discontinuity_spacing();
    for (double t : t_grid) {
        const RealWindows w = real_windows(scheme, t);
        if (w.w1_lo < f.domain_min() - 1e-12) {
            throw InvalidSpecError("grid point t = " + std::to_string(t) +
                                   " reaches below the function domain");
        }
        if (std::isfinite(spacing)) {
            const double longest = std::max(w.w1_hi - w.w1_lo, w.w2_hi - w.w2_lo);
            const int floor_panels = static_cast<int>(std::ceil(4.0 * longest / spacing));
            if (quad_points < floor_panels) {
                throw QuadratureUnstableError("discontinuous integrand needs at least " +
                                              std::to_string(floor_panels) + " panels, got " +
                                              std::to_string(quad_points));
            }
        }
        const double len1 = w.w1_hi - w.w1_lo;
        const double len2 = w.w2_hi - w.w2_lo;
        const double i1 = integrate(f, w.w1_lo, w.w1_hi, quad_points);
        const double i2 = integrate(f, w.w2_lo, w.w2_hi, quad_points);
        const double violation = std::abs(len2 * i1 - len1 * i2);
        if (violation > report.max_violation) {
            report.max_violation = violation;
            report.argmax_t = t;
        }
        // Range scan over both windows at quadrature resolution.
        for (const auto& [lo, hi] : {std::pair{w.w1_lo, w.w1_hi}, std::pair{w.w2_lo, w.w2_hi}}) {
            const int samples = std::max(quad_points, 64);
            for (int i = 0; i <= samples; ++i) {
                const double x = lo + (hi - lo) * i / samples;
                const double y = f(x);
                report.range_min = std::min(report.range_min, y);
                report.range_max = std::max(report.range_max, y);
            }
        }
    }
}

}  // namespace detail

/// Checks the window-integral identity |W2| * int_{W1} f = |W1| * int_{W2} f
/// over the given grid of times (Lebesgue measure; composite Simpson with the
/// given panel count). Union schemes take the worst member; chunked schemes
/// defer to their inner scheme (chunking only thins the evaluated t's).
inline LimitingReport verify_function_limiting(const AdversarialFunction& f,
                                               const WindowScheme& scheme,
                                               const std::vector<double>& t_grid,
                                               int quad_points = 512) {
    if (t_grid.empty()) throw InvalidSpecError("t_grid must be non-empty");
    if (quad_points < 2) throw InvalidSpecError("quad_points must be >= 2");
    LimitingReport report;
    switch (scheme.kind()) {
        case WindowScheme::Kind::Union:
            for (const auto& m : scheme.members()) {
                detail::verify_against_base(f, m.kind() == WindowScheme::Kind::Chunked ? m.members()[0] : m,
                                            t_grid, quad_points, report);
            }
            break;
        case WindowScheme::Kind::Chunked:
            detail::verify_against_base(f, scheme.members()[0], t_grid, quad_points, report);
            break;
        default:
            detail::verify_against_base(f, scheme, t_grid, quad_points, report);
            break;
    }
    report.range_ok = report.range_min >= -1e-9 && report.range_max <= 1.0 + 1e-9;
    return report;
}

/// Equidistant samples of f over [t0, t1]: v_i = f(t0 + i*(t1-t0)/(n-1)).
/// Entries that reconstruct as small rationals (square waves, constants) are
/// kept exact so downstream residual certificates stay rational.
inline AdversarialProfile sample_function_to_profile(const AdversarialFunction& f, int n, double t0,
                                                     double t1) {
    if (n < 2 || t1 <= t0) throw InvalidSpecError("sampling needs n >= 2 and t1 > t0");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = t0 + (t1 - t0) * i / (n - 1);
        double y = f(t);
        if (y < -1e-12 || y > 1.0 + 1e-12) {
            throw RangeViolationError("f(" + std::to_string(t) + ") = " + std::to_string(y) +
                                      " outside [0,1]");
        }
        v[static_cast<std::size_t>(i)] = std::clamp(y, 0.0, 1.0);
    }

    Provenance prov;
    prov.kind = Provenance::Kind::FamilyGenerator;
    prov.family = "sampled_function";
    prov.params = f.describe();
    prov.params["n"] = n;
    prov.params["t0"] = t0;
    prov.params["t1"] = t1;

    std::vector<Rational> exact;
    exact.reserve(v.size());
    for (double x : v) {
        auto r = rational_from_double(x);
        if (!r) break;
        exact.push_back(*r);
    }
    if (exact.size() == v.size()) return {std::move(exact), std::move(prov)};
    return {std::move(v), std::move(prov)};
}

}  // namespace gauntlet
