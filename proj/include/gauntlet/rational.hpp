/// @file rational.hpp
/// @brief Exact rational scalar used for residual certificates.
#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>

namespace gauntlet {

// Window lengths and profile denominators are small integers, so int64
// numerators/denominators never overflow in the dot products we form.
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Recovers p/q from a double that is *exactly* representable with a small
/// denominator (sampled square waves, halves). Returns nullopt otherwise.
inline std::optional<Rational> rational_from_double(double x, std::int64_t max_den = 16) {
    for (std::int64_t q = 1; q <= max_den; ++q) {
        const double scaled = x * static_cast<double>(q);
        const auto p = static_cast<std::int64_t>(scaled >= 0 ? scaled + 0.5 : scaled - 0.5);
        if (static_cast<double>(p) / static_cast<double>(q) == x) {
            return Rational(p, q);
        }
    }
    return std::nullopt;
}

}  // namespace gauntlet
