/// @file test_limiting.cpp
/// @brief Limiting-case families against the window-integral constraints.

#include <gauntlet/limiting.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace gauntlet;

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
}

}  // namespace

TEST(Quadrature, SimpsonIsExactOnPiecewiseConstants) {
    const auto f = AdversarialFunction::periodic(Waveform::square(1.0, 0.5));
    // One full period integrates to the duty fraction.
    EXPECT_NEAR(detail::integrate(f, 0.0, 1.0, 64), 0.5, 1e-14);
    EXPECT_NEAR(detail::integrate(f, 0.25, 1.25, 64), 0.5, 1e-14);
    EXPECT_NEAR(detail::integrate(f, 0.0, 0.25, 64), 0.25, 1e-14);
}

TEST(Quadrature, SimpsonConvergesOnSmoothWaves) {
    const auto f = AdversarialFunction::periodic(Waveform::sine(1.0, 0.5, 0.25));
    EXPECT_NEAR(detail::integrate(f, 0.0, 1.0, 512), 0.5, 1e-12);
    const double quarter = 0.125 + 0.25 / (2.0 * std::numbers::pi);
    EXPECT_NEAR(detail::integrate(f, 0.0, 0.25, 512), quarter, 1e-12);
}

TEST(VerifyLimiting, PeriodicFamilyPassesSlidingConstraint) {
    const auto grid = linspace(2.0, 12.0, 50);
    const auto sine = AdversarialFunction::periodic(Waveform::sine(1.0, 0.5, 0.25));
    const auto rs = verify_function_limiting(sine, WindowScheme::sliding(1), grid, 512);
    EXPECT_LE(rs.max_violation, 1e-8);
    EXPECT_TRUE(rs.range_ok);

    const auto square = AdversarialFunction::periodic(Waveform::square(1.0, 0.5));
    const auto rq = verify_function_limiting(square, WindowScheme::sliding(1), grid, 512);
    EXPECT_LE(rq.max_violation, 1e-10);
    EXPECT_TRUE(rq.range_ok);
}

TEST(VerifyLimiting, PeriodicFamilyFailsGrowingConstraint) {
    const auto sine = AdversarialFunction::periodic(Waveform::sine(1.0, 0.5, 0.25));
    const auto r = verify_function_limiting(sine, WindowScheme::growing(1, 1),
                                            linspace(1.25, 9.25, 30), 512);
    EXPECT_GE(r.max_violation, 1e-3);
}

TEST(VerifyLimiting, MatchedMeanPeriodicAfterPassesFixedConstraint) {
    const auto f = AdversarialFunction::periodic_after(1.0, Waveform::sine(1.0, 0.5, 0.25),
                                                       Waveform::sine(1.0, 0.5, 0.2));
    const auto r =
        verify_function_limiting(f, WindowScheme::fixed(1, 1), linspace(1.0, 9.0, 50), 512);
    EXPECT_LE(r.max_violation, 1e-8);
    EXPECT_TRUE(r.range_ok);

    const auto square = AdversarialFunction::periodic_after(1.0, Waveform::square(1.0, 0.5),
                                                            Waveform::square(1.0, 0.5));
    const auto rq =
        verify_function_limiting(square, WindowScheme::fixed(1, 1), linspace(1.0, 9.0, 50), 512);
    EXPECT_LE(rq.max_violation, 1e-10);
}

TEST(VerifyLimiting, MismatchedMeanFailsWithClearMargin) {
    const auto f = AdversarialFunction::periodic_after(1.0, Waveform::sine(1.0, 0.5, 0.25),
                                                       Waveform::sine(1.0, 0.75, 0.2));
    const auto r =
        verify_function_limiting(f, WindowScheme::fixed(1, 1), linspace(1.0, 9.0, 50), 512);
    EXPECT_GE(r.max_violation, 1e-3);
}

TEST(VerifyLimiting, ConstantAfterPassesGrowingConstraint) {
    const auto f = AdversarialFunction::constant_after(1.0, Waveform::sine(1.0, 0.5, 0.25));
    const auto r =
        verify_function_limiting(f, WindowScheme::growing(1, 1), linspace(1.0, 9.0, 50), 512);
    EXPECT_LE(r.max_violation, 1e-8);
    EXPECT_TRUE(r.range_ok);

    const auto off = AdversarialFunction::constant_after(1.0, Waveform::sine(1.0, 0.5, 0.25), 0.6);
    const auto ro =
        verify_function_limiting(off, WindowScheme::growing(1, 1), linspace(1.0, 9.0, 50), 512);
    EXPECT_GE(ro.max_violation, 1e-3);
}

TEST(VerifyLimiting, BoundaryEffectSolvesSlidingButLeavesRange) {
    const auto f = AdversarialFunction::boundary_effect(0.5, 0.25, 1.0);
    const auto r =
        verify_function_limiting(f, WindowScheme::sliding(1), linspace(-10.0, 10.0, 50), 512);
    EXPECT_LE(r.max_violation, 1e-6);
    EXPECT_FALSE(r.range_ok);
    EXPECT_GT(r.range_max, 1.0);
    EXPECT_LT(r.range_min, 0.0);
}

TEST(VerifyLimiting, UnionTakesWorstMember) {
    const auto sine = AdversarialFunction::periodic(Waveform::sine(1.0, 0.5, 0.25));
    const auto grid = linspace(1.25, 9.25, 30);
    const auto on_sliding = verify_function_limiting(sine, WindowScheme::sliding(1), grid, 512);
    const auto on_union = verify_function_limiting(
        sine, union_scheme({WindowScheme::sliding(1), WindowScheme::growing(1, 1)}), grid, 512);
    EXPECT_GE(on_union.max_violation, 1e-3);
    EXPECT_GE(on_union.max_violation, on_sliding.max_violation);
}

TEST(VerifyLimiting, DiscontinuousIntegrandNeedsEnoughPanels) {
    const auto square = AdversarialFunction::periodic(Waveform::square(1.0, 0.5));
    // Floor is 4 panels per unit of jump spacing: windows of length 1 with
    // spacing 1/2 need at least 8.
    EXPECT_THROW(
        verify_function_limiting(square, WindowScheme::sliding(1), linspace(2.0, 8.0, 10), 4),
        QuadratureUnstableError);
    EXPECT_NO_THROW(
        verify_function_limiting(square, WindowScheme::sliding(1), linspace(2.0, 8.0, 10), 8));
}

TEST(VerifyLimiting, GridBelowDomainIsRejected) {
    const auto f = AdversarialFunction::constant_after(1.0, Waveform::sine(1.0, 0.5, 0.25));
    EXPECT_THROW(verify_function_limiting(f, WindowScheme::growing(1, 1), {0.5}, 128),
                 InvalidSpecError);
}

TEST(SampleFunction, ConstantFunctionSamplesExactly) {
    const auto f = AdversarialFunction::constant_after(1.0, Waveform::constant(0.5), 0.5);
    const auto p = sample_function_to_profile(f, 5, 0.0, 4.0);
    ASSERT_TRUE(p.has_exact());
    for (const auto& x : p.exact_values()) EXPECT_EQ(x, Rational(1, 2));
}

TEST(SampleFunction, AlignedSquareWaveMatchesGenerator) {
    const auto f = AdversarialFunction::periodic(Waveform::square(100.0, 0.5));
    const auto sampled = sample_function_to_profile(f, 1000, 0.0, 999.0);
    ASSERT_TRUE(sampled.has_exact());
    EXPECT_EQ(sampled.exact_values(), gen_periodic(100, 50, 1000).exact_values());
    EXPECT_TRUE(verify_profile(sampled, WindowScheme::sliding(100), 1000).exact_zero);
}

TEST(SampleFunction, SmoothFamiliesStayNearNullSpaceAtIntegerSampling) {
    // A sine of period 10 sampled at unit spacing sums to zero over any ten
    // consecutive samples, so the finite residual collapses as well.
    const auto f = AdversarialFunction::periodic(Waveform::sine(10.0, 0.5, 0.25));
    const auto p = sample_function_to_profile(f, 200, 0.0, 199.0);
    EXPECT_FALSE(p.has_exact());
    const auto report = verify_profile(p, WindowScheme::sliding(10), 200);
    EXPECT_LE(report.max_residual, 1e-6);
    EXPECT_TRUE(report.is_adversarial);
}

TEST(SampleFunction, BoundaryEffectOverWideSpanViolatesRange) {
    // Span chosen so that samples land off the sine's zeros.
    const auto f = AdversarialFunction::boundary_effect(0.5, 0.25, 1.0);
    EXPECT_THROW(sample_function_to_profile(f, 101, 0.0, 50.5), RangeViolationError);
}

TEST(FunctionFamilies, DescribeAndValidate) {
    EXPECT_THROW(AdversarialFunction::periodic(Waveform::constant(0.5)), InvalidSpecError);
    EXPECT_THROW(AdversarialFunction::periodic_after(0.0, Waveform::constant(0.5),
                                                     Waveform::sine(1.0, 0.5, 0.1)),
                 InvalidSpecError);
    EXPECT_THROW(Waveform::square(1.0, 1.5), InvalidSpecError);
    const auto f = AdversarialFunction::periodic_after(2.0, Waveform::square(2.0, 0.5),
                                                       Waveform::square(1.0, 0.5));
    const auto j = f.describe();
    EXPECT_EQ(j["family"], "periodic_after");
    EXPECT_EQ(j["a"], 2.0);
    EXPECT_EQ(j["tail"]["kind"], "square");
}
