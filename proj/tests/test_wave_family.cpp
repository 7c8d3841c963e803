#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rchwave/errors.hpp"
#include "rchwave/wave_family.hpp"
#include "support.hpp"

using namespace rchwave;
using rchwave::testing::wave;

namespace {

// Profile equation evaluated pointwise from the cosine series, away from the
// collocation grid.
double ode_residual_off_grid(const WavePoint& w, int samples = 200)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, kTwoPi);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const CosSeriesValue p = eval_cos_series(w.phi.cos_coeffs, ux(rng));
        const double r = -(w.c - p.f) * p.d2f + (w.c - w.omega) * p.f - 1.5 * p.f * p.f + 0.5 * p.df * p.df + w.A;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

// A from its integral definition, by quadrature on a fine grid.
double A_by_quadrature(const WaveProfile& phi)
{
    const Grid fine(4 * phi.n_modes());
    Vec a = Vec::Zero(fine.n_modes());
    a.head(phi.n_modes()) = phi.cos_coeffs;
    const Field f = synthesize(WaveProfile(a, fine));
    const Field fx = differentiate(f, 1);
    return (inner(fx, fx) + 3.0 * inner(f, f)) / (4.0 * kPi);
}

}  // namespace

TEST(ConstantA, MatchesIntegralDefinition)
{
    Grid g(16);
    Vec a = Vec::Zero(16);
    a[0] = 0.2;
    a[1] = -0.05;
    a[4] = 0.01;
    const WaveProfile p(a, g);
    EXPECT_NEAR(constant_A(p), A_by_quadrature(p), 1e-15);
}

TEST(StokesSeed, TwoTermProfile)
{
    const WavePoint s = stokes_seed(0.1, 1.0);
    EXPECT_DOUBLE_EQ(s.phi.cos_coeffs[0], 0.1);
    EXPECT_NEAR(s.phi.cos_coeffs[1], 0.01, 1e-16);
    EXPECT_EQ(s.phi.cos_coeffs.tail(s.phi.n_modes() - 2).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(s.A, constant_A(s.phi), 1e-16);
    EXPECT_NEAR(s.A, 0.01, 3e-4);
}

TEST(StokesSeed, SpeedSatisfiesFirstHarmonicSolvability)
{
    // For phi = a cos x + b cos 2x the cos x coefficient of the residual is
    // a (2c - omega) - 3ab, by expanding the products by hand.  With
    // b = a^2/omega it vanishes exactly at c = omega/2 + 3a^2/(2 omega).
    for (double omega : {1.0, 2.5}) {
        for (double a : {0.01 * omega, 0.05 * omega}) {
            const WavePoint s = stokes_seed(a, omega);
            auto first_harmonic = [&](double c) {
                return TrigCoeffs::from_grid(residual(s.phi, c, omega).values).a[1];
            };
            const double b = a * a / omega;
            EXPECT_NEAR(first_harmonic(s.c), 0.0, 1e-16 * omega * omega);
            const double c_other = 0.5 * omega + 6.0 * a * a / omega;
            EXPECT_NEAR(first_harmonic(c_other), a * (2.0 * c_other - omega) - 3.0 * a * b, 1e-15 * omega * omega);
            EXPECT_DOUBLE_EQ(s.c, 0.5 * omega + 1.5 * a * a / omega);
        }
    }
}

TEST(StokesSeed, VanishingAmplitudeSitsAtBifurcation)
{
    const WavePoint s = stokes_seed(1e-9, 2.0);
    EXPECT_NEAR(s.c, 1.0, 1e-15);
    EXPECT_LT(s.A, 1e-17);
    EXPECT_LT(s.phi.cos_coeffs.norm(), 2e-9);
    EXPECT_THROW(stokes_seed(0.1, 0.0), DomainError);
    EXPECT_THROW(stokes_seed(-0.1, 1.0), DomainError);
}

TEST(StokesAmplitude, InvertsSpeed)
{
    for (double a : {0.01, 0.05, 0.2}) EXPECT_NEAR(stokes_amplitude(stokes_speed(a, 1.3), 1.3), a, 1e-14);
}

TEST(Residual, ZeroProfileHasZeroResidual)
{
    const Grid g(32);
    EXPECT_EQ(residual(WaveProfile(g), 0.8, 1.0).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Residual, StokesSeedIsThirdOrderSmall)
{
    const WavePoint s = stokes_seed(0.05, 1.0);
    EXPECT_LE(residual(s.phi, s.c, 1.0).values.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Residual, GapViolationWhenSpeedBelowCrest)
{
    Vec a = Vec::Zero(16);
    a[0] = 0.3;
    EXPECT_THROW(residual(WaveProfile(a, Grid(16)), 0.2, 1.0), GapViolation);
}

TEST(NewtonRefine, QuadraticFromStokesSeed)
{
    const WavePoint s = stokes_seed(0.05, 1.0);
    const WavePoint w = newton_refine(s.phi, s.c, 1.0, 1e-12);
    EXPECT_LE(w.iterations, 6);
    EXPECT_LE(w.residual_norm, 1e-12);
    EXPECT_LE(residual(w.phi, w.c, 1.0).values.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(ode_residual_off_grid(w), 1e-11);
    EXPECT_NEAR(w.A, A_by_quadrature(w.phi), 1e-15);
}

TEST(NewtonRefine, CorrectionIsThirdOrder)
{
    std::vector<double> amps{0.02, 0.04, 0.08}, corr;
    for (double a : amps) {
        const WavePoint s = stokes_seed(a, 1.0);
        const WavePoint w = newton_refine(s.phi, s.c, 1.0, 1e-13);
        corr.push_back((synthesize(w.phi).values - synthesize(s.phi).values).cwiseAbs().maxCoeff());
    }
    const double slope = std::log(corr[2] / corr[0]) / std::log(amps[2] / amps[0]);
    EXPECT_GE(slope, 2.7);
    EXPECT_LE(slope, 3.3);
    for (std::size_t i = 0; i < amps.size(); ++i) EXPECT_LE(corr[i], 2.0 * std::pow(amps[i], 3));
}

TEST(NewtonRefine, RejectsTrivialSeed)
{
    EXPECT_THROW(newton_refine(WaveProfile(Grid(32)), 0.8, 1.0, 1e-12), TrivialCollapse);
}

TEST(NewtonRefine, RejectsSpeedAtBifurcation)
{
    const WavePoint s = stokes_seed(0.05, 1.0);
    EXPECT_THROW(newton_refine(s.phi, 0.5, 1.0, 1e-12), DomainError);
    EXPECT_THROW(newton_refine(s.phi, 0.3, 1.0, 1e-12), DomainError);
}

TEST(ContinueFamily, BranchFromOnsetIsConvergedAndOrdered)
{
    const FamilyCurve curve = continue_family(1.0, 0.51, 3.0, 0.01);
    ASSERT_GT(curve.points.size(), 30u);
    double prev_c = 0.0, prev_amp = 0.0;
    for (const WavePoint& w : curve.points) {
        EXPECT_LE(w.residual_norm, 1e-10) << "c = " << w.c;
        EXPECT_GT(w.c, prev_c);
        EXPECT_GT(w.min_gap, 0.0);
        const double amp = w.phi.cos_coeffs[0];
        EXPECT_GT(amp, prev_amp) << "c = " << w.c;
        prev_c = w.c;
        prev_amp = amp;
    }
    for (std::size_t i = 0; i < curve.points.size(); ++i) EXPECT_EQ(curve.points[i].c, 0.51 + i * 0.01);
    // The smooth branch is followed until the profile is no longer resolved
    // by 128 modes; the stop is reported instead of extrapolated past.
    EXPECT_EQ(curve.stop, StopReason::resolution_limit);
    EXPECT_GT(curve.stop_c, curve.points.back().c);
    EXPECT_FALSE(curve.message.empty());
}

TEST(ContinueFamily, RejectsStartBelowOnset)
{
    EXPECT_THROW(continue_family(1.0, 0.4, 1.0, 0.01), DomainError);
    EXPECT_THROW(continue_family(0.0, 0.6, 1.0, 0.01), DomainError);
}

TEST(ContinueFamily, StartingAwayFromOnsetMatchesDirectSolve)
{
    const FamilyCurve curve = continue_family(2.0, 1.3, 1.4, 0.05);
    ASSERT_FALSE(curve.points.empty());
    EXPECT_NEAR(curve.points.front().c, 1.3, 1e-14);
    const WavePoint& direct = wave(1.3, 2.0);
    EXPECT_LT((curve.points.front().phi.cos_coeffs - direct.phi.cos_coeffs).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(SolveWave, OmegaScaling)
{
    // phi -> omega phi, c -> omega c maps solutions at omega = 1 to solutions at omega.
    const WavePoint& w1 = wave(0.7, 1.0);
    const WavePoint& w3 = wave(2.1, 3.0);
    EXPECT_LT((w3.phi.cos_coeffs - 3.0 * w1.phi.cos_coeffs).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_NEAR(w3.A, 9.0 * w1.A, 1e-11);
}

TEST(Conserved, ZeroProfile)
{
    const ConservedTriple t = conserved(WaveProfile(Grid(16)), 1.0);
    EXPECT_EQ(t.M, 0.0);
    EXPECT_EQ(t.E, 0.0);
    EXPECT_EQ(t.F, 0.0);
}

TEST(Conserved, SingleCosine)
{
    const double a = 0.3, omega = 1.7;
    Vec c = Vec::Zero(16);
    c[0] = a;
    const ConservedTriple t = conserved(WaveProfile(c, Grid(16)), omega);
    EXPECT_NEAR(t.M, 0.0, 1e-15);
    EXPECT_NEAR(t.E, a * a * kPi, 1e-14);
    // cubic terms integrate to zero; the drift term gives omega a^2 pi / 2
    EXPECT_NEAR(t.F, 0.5 * omega * a * a * kPi, 1e-14);
}

TEST(Conserved, GridDoublingInvariance)
{
    const WavePoint& w = wave(0.8, 1.0, 128);
    const ConservedTriple t1 = conserved(w.phi, 1.0);
    const WavePoint& w2 = wave(0.8, 1.0, 256);
    const ConservedTriple t2 = conserved(w2.phi, 1.0);
    EXPECT_NEAR(t1.E, t2.E, 1e-10 * t1.E);
    EXPECT_NEAR(t1.F, t2.F, 1e-10 * t1.F);
}

TEST(FamilyScalars, OnsetLimitFromStokesExpansion)
{
    // Near onset A ~ a^2 and c - omega/2 ~ 3a^2/(2 omega), so dA/dc -> 2 omega/3
    // and d_c -> -omega^2/2 + (2 omega)(2 omega/3) = 5 omega^2/6.
    for (double omega : {1.0, 2.0}) {
        const WavePoint& w = wave(0.501 * omega, omega);
        const FamilyScalars s = family_scalars(w);
        EXPECT_NEAR(s.dA_dc, 2.0 * omega / 3.0, 0.01 * omega);
        EXPECT_NEAR(s.d_c, 5.0 * omega * omega / 6.0, 0.02 * omega * omega);
    }
}

TEST(FamilyScalars, DerivativesAgreeWithWideSecant)
{
    const WavePoint& w = wave(0.8);
    const FamilyScalars s = family_scalars(w);
    const double h = 0.01;
    const WavePoint& lo = wave(0.8 - h);
    const WavePoint& hi = wave(0.8 + h);
    const double secant_A = (hi.A - lo.A) / (2 * h);
    const double secant_E = (conserved(hi.phi, 1.0).E - conserved(lo.phi, 1.0).E) / (2 * h);
    EXPECT_NEAR(s.dA_dc, secant_A, 1e-3 * std::abs(secant_A));
    EXPECT_NEAR(s.dE_dc, secant_E, 1e-3 * std::abs(secant_E));
    EXPECT_NEAR(s.d_c, d_c_value(0.8, 1.0, w.A, s.dA_dc), 1e-15);
    const Vec secant_phi = (hi.phi.cos_coeffs - lo.phi.cos_coeffs) / (2 * h);
    EXPECT_LT((s.dphi_dc.cos_coeffs - secant_phi).cwiseAbs().maxCoeff(), 1e-3 * secant_phi.cwiseAbs().maxCoeff());
}

TEST(FamilyScalars, IndexOutOfRange)
{
    FamilyCurve empty;
    EXPECT_THROW(family_scalars(empty, 0), DomainError);
}
