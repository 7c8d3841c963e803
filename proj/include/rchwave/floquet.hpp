#pragma once

// Fundamental solutions of L y = 0 and the Floquet constant theta.
//
// y2 = phi' solves L y = 0 by translation invariance.  y1 is the even
// solution with y1(0) = 1/phi''(0), y1'(0) = 0, so that W(y1, y2)(0) = 1.
// Over one period y1(x + 2pi) = y1(x) + theta phi'(x); the sign of theta
// locates the zero eigenvalue in the ordered spectrum.

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Eigenvalues>

#include "rchwave/errors.hpp"
#include "rchwave/linear_operators.hpp"
#include "rchwave/spectral_core.hpp"
#include "rchwave/wave_family.hpp"

namespace rchwave {

enum class FloquetClass { simple_second, double_zero, simple_third };

inline const char* to_string(FloquetClass k)
{
    switch (k) {
    case FloquetClass::simple_second: return "simple_second";
    case FloquetClass::double_zero: return "double";
    case FloquetClass::simple_third: return "simple_third";
    }
    return "?";
}

struct FloquetOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    int samples_per_period = 256;
    double theta_scale = 1.0;       // running magnitude of theta along a curve
    double theta_zero_tol = 1e-6;
    double theta_agreement = 1e-5;  // relative agreement of the two theta routes
};

/// Samples of y1, y2 and their derivatives on [0, 4pi].
struct FundamentalSolutions {
    std::vector<double> x;
    std::vector<double> y1, dy1, int_y1;  // int_y1 = integral of y1 from 0 to x
    std::vector<double> y2, dy2;
    double phi2pp0 = 0.0;
    int samples_per_period = 0;
};

struct FloquetReport {
    double theta = 0.0;
    double theta_fit = 0.0;
    double y1_deriv_2pi = 0.0;
    double phi2pp0 = 0.0;
    double wronskian_drift = 0.0;
    double integral_y1 = 0.0;  // integral of y1 over one period
    FloquetClass classification = FloquetClass::simple_second;
};

inline FundamentalSolutions fundamental_solutions(const WavePoint& w, const FloquetOptions& opt = {})
{
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 3>;

    const Vec& a = w.phi.cos_coeffs;
    const double c = w.c, om = w.omega;
    const CosSeriesValue at0 = eval_cos_series(a, 0.0);
    if (std::abs(at0.d2f) < 1e-12) throw DomainError("fundamental_solutions: phi''(0) vanishes (trivial wave)");

    auto system = [&](const State& s, State& ds, double x) {
        const CosSeriesValue p = eval_cos_series(a, x);
        const double q = c - om - 3.0 * p.f + p.d2f;
        ds[0] = s[1];
        ds[1] = (p.df * s[1] + q * s[0]) / (c - p.f);
        ds[2] = s[0];
    };

    const int spp = opt.samples_per_period;
    FundamentalSolutions fs;
    fs.phi2pp0 = at0.d2f;
    fs.samples_per_period = spp;
    std::vector<double> times(2 * spp + 1);
    for (int i = 0; i <= 2 * spp; ++i) times[i] = kTwoPi * i / spp;

    State s{1.0 / at0.d2f, 0.0, 0.0};
    auto stepper = odeint::make_controlled(opt.atol, opt.rtol, odeint::runge_kutta_fehlberg78<State>());
    auto observer = [&](const State& st, double x) {
        const CosSeriesValue p = eval_cos_series(a, x);
        fs.x.push_back(x);
        fs.y1.push_back(st[0]);
        fs.dy1.push_back(st[1]);
        fs.int_y1.push_back(st[2]);
        fs.y2.push_back(p.df);
        fs.dy2.push_back(p.d2f);
    };
    try {
        odeint::integrate_times(stepper, system, s, times.begin(), times.end(), 1e-3, observer);
    } catch (const std::exception& e) {
        throw IntegrationFailure(std::string("fundamental_solutions: ") + e.what());
    }
    if (fs.x.size() != times.size()) throw IntegrationFailure("fundamental_solutions: integration stopped early");
    return fs;
}

inline FloquetClass classify_theta(double theta, const FloquetOptions& opt = {})
{
    if (std::abs(theta) < opt.theta_zero_tol * (1.0 + std::abs(opt.theta_scale))) return FloquetClass::double_zero;
    return theta > 0.0 ? FloquetClass::simple_second : FloquetClass::simple_third;
}

inline FloquetReport extract_theta(const WavePoint& w, const FundamentalSolutions& fs, const FloquetOptions& opt = {})
{
    const int spp = fs.samples_per_period;
    const double c = w.c;
    const double g0 = c - eval_cos_series(w.phi.cos_coeffs, 0.0).f;

    FloquetReport r;
    r.phi2pp0 = fs.phi2pp0;
    r.y1_deriv_2pi = fs.dy1[spp];
    r.theta = r.y1_deriv_2pi / r.phi2pp0;
    r.integral_y1 = fs.int_y1[spp];

    // Abel: W(y1, y2)(s) (c - phi(s)) = c - phi(0)
    for (std::size_t i = 0; i < fs.x.size(); ++i) {
        const double gs = c - eval_cos_series(w.phi.cos_coeffs, fs.x[i]).f;
        const double wr = fs.y1[i] * fs.dy2[i] - fs.dy1[i] * fs.y2[i];
        r.wronskian_drift = std::max(r.wronskian_drift, std::abs(wr * gs / g0 - 1.0));
    }

    // Hill route: phi_k = ((c - phi(0)) / (c - phi))^{-1/2} y_k satisfies
    // phi_1(x + 2pi) = phi_1(x) + theta phi_2(x); fit theta by least squares.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < spp; ++i) {
        const double gs = c - eval_cos_series(w.phi.cos_coeffs, fs.x[i]).f;
        const double m = std::sqrt(gs / g0);
        const double d = m * (fs.y1[i + spp] - fs.y1[i]);
        const double p2 = m * fs.y2[i];
        num += d * p2;
        den += p2 * p2;
    }
    r.theta_fit = num / den;
    r.classification = classify_theta(r.theta, opt);

    const double scale = std::max(std::abs(r.theta), opt.theta_zero_tol);
    if (std::abs(r.theta - r.theta_fit) > opt.theta_agreement * scale) {
        std::ostringstream os;
        os << "theta routes disagree: derivative " << r.theta << ", monodromy fit " << r.theta_fit;
        throw InconsistentTheta(os.str());
    }
    return r;
}

inline FloquetReport floquet_report(const WavePoint& w, const FloquetOptions& opt = {})
{
    return extract_theta(w, fundamental_solutions(w, opt), opt);
}

/// Position of the zero eigenvalue in the weighted Hill problem
/// M_tau v = lambda (c - phi)^{-1} v, from a dense generalized eigensolve.
struct HillZeroPosition {
    int position = 0;  // 1-based index of the eigenvalue closest to zero
    int n_zero = 0;
    int n_negative = 0;
    Vec leading;       // the few lowest eigenvalues
};

inline HillZeroPosition hill_zero_position(const WavePoint& w, double tol_zero = 1e-7)
{
    const LiouvilleData ld = liouville(w);
    const OperatorMatrix hill = assemble_hill(ld);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hill.entries, weight_matrix(ld), Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    const double thr = tol_zero * std::max(1.0, ev.cwiseAbs().maxCoeff());
    HillZeroPosition h;
    Eigen::Index imin = 0;
    ev.cwiseAbs().minCoeff(&imin);
    h.position = static_cast<int>(imin) + 1;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) <= thr)
            ++h.n_zero;
        else if (ev[i] < 0.0)
            ++h.n_negative;
    }
    h.leading = ev.head(std::min<Eigen::Index>(5, ev.size()));
    return h;
}

/// Classification implied by the direct eigensolve.
inline FloquetClass classify_by_eigensolve(const HillZeroPosition& h)
{
    if (h.n_zero >= 2) return FloquetClass::double_zero;
    return h.position <= 2 ? FloquetClass::simple_second : FloquetClass::simple_third;
}

}  // namespace rchwave
