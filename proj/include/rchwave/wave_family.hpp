#pragma once

// Even zero-mean periodic traveling waves of
//     u_t - u_txx + omega u_x + 3 u u_x = 2 u_x u_xx + u u_xxx
// written as the profile equation
//     -(c - phi) phi'' + (c - omega) phi - 3/2 phi^2 + 1/2 phi'^2 + A = 0,
// where the zero-mean condition fixes A = (1/4pi) int phi'^2 + (3/4pi) int phi^2.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "rchwave/errors.hpp"
#include "rchwave/galerkin.hpp"
#include "rchwave/spectral_core.hpp"

namespace rchwave {

struct WavePoint {
    WaveProfile phi;
    double c = 0.0;
    double omega = 0.0;
    double A = 0.0;
    double residual_norm = 0.0;
    double min_gap = 0.0;
    int iterations = 0;
};

struct ConservedTriple {
    double M = 0.0;
    double E = 0.0;
    double F = 0.0;
};

enum class StopReason { reached_end, gap_limit, resolution_limit };

inline const char* to_string(StopReason r)
{
    switch (r) {
    case StopReason::reached_end: return "reached_end";
    case StopReason::gap_limit: return "gap_limit";
    case StopReason::resolution_limit: return "resolution_limit";
    }
    return "?";
}

struct FamilyCurve {
    std::vector<WavePoint> points;
    double omega = 0.0;
    double max_step = 0.0;
    StopReason stop = StopReason::reached_end;
    double stop_c = 0.0;   // first speed that could not be added
    std::string message;
};

struct SolverOptions {
    int n_modes = 128;
    double newton_tol = 1e-12;
    int max_iter = 50;
    double a_max_factor = 0.1;    // raw Stokes seeds trusted for a <= a_max_factor * omega
    double tail_tol = 1e-10;      // resolution limit on the spectral tail
    int max_halvings = 8;
    double min_step = 1e-8;
};

/// Zero-mean constant A[phi] = 1/4 sum_k (k^2 + 3) a_k^2.
inline double constant_A(const WaveProfile& phi)
{
    double s = 0.0;
    for (int k = 1; k <= phi.n_modes(); ++k) {
        const double a = phi.cos_coeffs[k - 1];
        s += (k * k + 3.0) * a * a;
    }
    return 0.25 * s;
}

/// Stokes amplitude a with c = omega/2 + 3 a^2 / (2 omega).
inline double stokes_amplitude(double c, double omega)
{
    return std::sqrt(std::max(0.0, 2.0 * omega * (c - 0.5 * omega) / 3.0));
}

inline double stokes_speed(double a, double omega) { return 0.5 * omega + 1.5 * a * a / omega; }

namespace detail {

struct ProfileSamples {
    Vec f, df, d2f;
};

inline ProfileSamples sample_profile(const WaveProfile& phi, int m)
{
    const TrigCoeffs t = TrigCoeffs::from_profile(phi);
    return {t.to_grid(m), t.derivative(1).to_grid(m), t.derivative(2).to_grid(m)};
}

inline double min_gap_on(const Vec& f, double c) { return c - f.maxCoeff(); }

/// Residual of the profile equation, projected onto modes 0..N.
inline TrigCoeffs residual_coeffs(const WaveProfile& phi, double c, double omega, double* gap = nullptr)
{
    const int n = phi.n_modes();
    const int m = padded_size(n);
    const ProfileSamples s = sample_profile(phi, m);
    const double g = min_gap_on(s.f, c);
    if (gap) *gap = g;
    if (g <= 0.0) {
        std::ostringstream os;
        os << "c - phi vanishes on the grid (min gap " << g << " at c = " << c << ")";
        throw GapViolation(os.str());
    }
    const double A = constant_A(phi);
    Vec r(m);
    for (int j = 0; j < m; ++j)
        r[j] = -(c - s.f[j]) * s.d2f[j] + (c - omega) * s.f[j] - 1.5 * s.f[j] * s.f[j] + 0.5 * s.df[j] * s.df[j] + A;
    return TrigCoeffs::from_grid(r).resized(n);
}

/// Jacobian of the cosine residual with respect to a_1..a_N.  The constant
/// contributed by the variation of A lies outside the cosine block.
inline Mat newton_jacobian(const WaveProfile& phi, double c, double omega)
{
    const BasisSamples& bs = padded_basis(phi.n_modes());
    const ProfileSamples s = sample_profile(phi, bs.points);
    const Vec p = (c - s.f.array()).matrix();
    const Vec q = ((c - omega) - 3.0 * s.f.array() + s.d2f.array()).matrix();
    return sturm_liouville_matrix(bs, p, q, BasisKind::even_zero_mean);
}

inline double residual_sup(const TrigCoeffs& r, int grid_points) { return r.to_grid(grid_points).cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Pointwise residual on the profile grid (products dealiased on a padded grid).
inline Field residual(const WaveProfile& phi, double c, double omega)
{
    return Field(detail::residual_coeffs(phi, c, omega).to_grid(phi.grid.size()));
}

/// Absolute Newton tolerance used for a given omega.  Under the scaling
/// phi -> omega phi, c -> omega c the residual picks up a factor omega^2.
inline double effective_tolerance(double tol, double omega) { return tol * std::max(1.0, omega * omega); }

inline WavePoint make_point(const WaveProfile& phi, double c, double omega, int iterations = 0)
{
    WavePoint w;
    w.phi = phi;
    w.c = c;
    w.omega = omega;
    w.A = constant_A(phi);
    double gap = 0.0;
    const TrigCoeffs r = detail::residual_coeffs(phi, c, omega, &gap);
    w.residual_norm = detail::residual_sup(r, phi.grid.size());
    w.min_gap = gap;
    w.iterations = iterations;
    return w;
}

/// Two-term Stokes expansion at amplitude a.  The residual norm is recorded
/// but not enforced.
inline WavePoint stokes_seed(double a, double omega, const SolverOptions& opt = {})
{
    if (!(omega > 0.0)) throw DomainError("stokes_seed: omega must be positive");
    if (a < 0.0) throw DomainError("stokes_seed: amplitude must be non-negative");
    if (a > opt.a_max_factor * omega * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "stokes_seed: amplitude " << a << " exceeds a_max = " << opt.a_max_factor * omega;
        throw DomainError(os.str());
    }
    Grid g(opt.n_modes);
    WaveProfile phi(g);
    phi.cos_coeffs[0] = a;
    phi.cos_coeffs[1] = a * a / omega;
    return make_point(phi, stokes_speed(a, omega), omega);
}

inline WavePoint newton_refine(const WaveProfile& seed, double c, double omega, double tol, int max_iter = 50)
{
    if (!(c > 0.5 * omega)) {
        std::ostringstream os;
        os << "newton_refine: c = " << c << " must exceed omega/2 = " << 0.5 * omega;
        throw DomainError(os.str());
    }
    const double tol_eff = effective_tolerance(tol, omega);
    WaveProfile phi = seed;
    if (phi.cos_coeffs.norm() < 1e-12) throw TrivialCollapse("newton_refine: seed is the trivial solution");
    double res = 0.0;
    for (int it = 0; it <= max_iter; ++it) {
        const TrigCoeffs r = detail::residual_coeffs(phi, c, omega);
        res = detail::residual_sup(r, phi.grid.size());
        if (res <= tol_eff) return make_point(phi, c, omega, it);
        if (it == max_iter) break;
        const Mat J = detail::newton_jacobian(phi, c, omega);
        const Vec delta = J.partialPivLu().solve(Vec(r.a.tail(phi.n_modes())));
        phi.cos_coeffs -= delta;
        if (!phi.cos_coeffs.allFinite()) break;
        if (phi.cos_coeffs.norm() < 1e-12) {
            std::ostringstream os;
            os << "newton_refine: iterate collapsed onto phi = 0 at c = " << c;
            throw TrivialCollapse(os.str());
        }
    }
    std::ostringstream os;
    os << "newton_refine: no convergence at c = " << c << " (residual " << res << ")";
    throw NoConvergence(os.str(), c);
}

inline WavePoint newton_refine(const WaveProfile& seed, double c, double omega, const SolverOptions& opt)
{
    return newton_refine(seed, c, omega, opt.newton_tol, opt.max_iter);
}

/// Converged wave at speed c, reached from the bifurcation point if needed.
inline WavePoint solve_wave(double c, double omega, const SolverOptions& opt = {});

namespace detail {

inline double amplitude(const WavePoint& w) { return w.phi.cos_coeffs.cwiseAbs().maxCoeff(); }

/// Predictor for speed c from the most recent points of a branch.
inline WaveProfile predict(const std::vector<WavePoint>& hist, double c)
{
    const WavePoint& p1 = hist.back();
    WaveProfile guess = p1.phi;
    if (hist.size() >= 2) {
        const WavePoint& p0 = hist[hist.size() - 2];
        const double t = (c - p1.c) / (p1.c - p0.c);
        guess.cos_coeffs = p1.phi.cos_coeffs + t * (p1.phi.cos_coeffs - p0.phi.cos_coeffs);
    } else {
        // square-root growth from the bifurcation point
        const double h = 0.5 * p1.omega;
        guess.cos_coeffs *= std::sqrt((c - h) / (p1.c - h));
    }
    return guess;
}

enum class StepOutcome { ok, gap, failed };

inline StepOutcome try_step(const std::vector<WavePoint>& hist, double c, const SolverOptions& opt, WavePoint& out,
                            std::string& why)
{
    try {
        out = newton_refine(predict(hist, c), c, hist.back().omega, opt);
        // reject a jump onto a much smaller wave (incipient collapse)
        if (amplitude(out) < 0.5 * amplitude(hist.back())) {
            why = "amplitude dropped";
            return StepOutcome::failed;
        }
        return StepOutcome::ok;
    } catch (const GapViolation& e) {
        why = e.what();
        return StepOutcome::gap;
    } catch (const NoConvergence& e) {
        why = e.what();
    } catch (const TrivialCollapse& e) {
        why = e.what();
    }
    return StepOutcome::failed;
}

/// Starting point of a continuation at c_start: either a direct Stokes seed
/// or a march out from the bifurcation point.
inline std::vector<WavePoint> start_branch(double omega, double c_start, double step, const SolverOptions& opt)
{
    const double a_max = opt.a_max_factor * omega;
    const double a = stokes_amplitude(c_start, omega);
    if (a <= a_max) return {newton_refine(stokes_seed(a, omega, opt).phi, c_start, omega, opt)};

    const double a0 = 0.5 * a_max;
    std::vector<WavePoint> hist{newton_refine(stokes_seed(a0, omega, opt).phi, stokes_speed(a0, omega), omega, opt)};
    double h = std::min(step, 0.005 * omega);
    while (hist.back().c < c_start) {
        const double target = std::min(hist.back().c + h, c_start);
        WavePoint w;
        std::string why;
        const StepOutcome o = try_step(hist, target, opt, w, why);
        if (o == StepOutcome::ok) {
            hist.push_back(std::move(w));
            if (hist.size() > 2) hist.erase(hist.begin());
            continue;
        }
        h *= 0.5;
        if (h < opt.min_step) throw StepUnderflow("continue_family: step underflow before c_start: " + why, target);
    }
    return {hist.back()};
}

}  // namespace detail

/// Continue the branch in c from c_start to c_end with spacing at most `step`.
/// The march stops early, with a report, when the wave stops being resolved
/// or the gap c - phi closes.
inline FamilyCurve continue_family(double omega, double c_start, double c_end, double step, const SolverOptions& opt = {})
{
    if (!(omega > 0.0)) throw DomainError("continue_family: omega must be positive");
    if (!(c_start > 0.5 * omega)) {
        std::ostringstream os;
        os << "continue_family: c_start = " << c_start << " must exceed omega/2 = " << 0.5 * omega;
        throw DomainError(os.str());
    }
    if (c_end < c_start) throw DomainError("continue_family: c_end must not be below c_start");
    if (!(step > 0.0)) throw DomainError("continue_family: step must be positive");

    FamilyCurve curve;
    curve.omega = omega;
    curve.max_step = step;

    std::vector<WavePoint> hist = detail::start_branch(omega, c_start, step, opt);
    if (spectral_tail(hist.back().phi.cos_coeffs) > opt.tail_tol) {
        curve.stop = StopReason::resolution_limit;
        curve.stop_c = c_start;
        curve.message = "wave at c_start is not resolved with the chosen number of modes";
        return curve;
    }
    curve.points.push_back(hist.back());

    const double eps = 1e-12 * std::max(1.0, std::abs(c_end));
    while (curve.points.back().c < c_end - eps) {
        const double c_prev = curve.points.back().c;
        double h = step;
        int halvings = 0;
        WavePoint w;
        std::string why;
        for (;;) {
            double target = std::min(c_prev + h, c_end);
            // keep full steps on the lattice c_start + i * step, free of accumulated rounding
            const double lattice = c_start + std::round((target - c_start) / step) * step;
            if (std::abs(target - lattice) < 1e-9 * step && lattice <= c_end) target = lattice;
            const detail::StepOutcome o = detail::try_step(hist, target, opt, w, why);
            if (o == detail::StepOutcome::ok) break;
            if (halvings == opt.max_halvings) {
                if (o == detail::StepOutcome::gap) {
                    curve.stop = StopReason::gap_limit;
                    curve.stop_c = target;
                    curve.message = why;
                    return curve;
                }
                throw NoConvergence("continue_family: " + why, target);
            }
            h *= 0.5;
            ++halvings;
            if (h < opt.min_step) throw StepUnderflow("continue_family: step underflow: " + why, target);
        }
        if (spectral_tail(w.phi.cos_coeffs) > opt.tail_tol) {
            curve.stop = StopReason::resolution_limit;
            curve.stop_c = w.c;
            std::ostringstream os;
            os << "spectral tail " << spectral_tail(w.phi.cos_coeffs) << " exceeds " << opt.tail_tol << " at c = " << w.c
               << "; increase the number of modes";
            curve.message = os.str();
            return curve;
        }
        hist.push_back(w);
        if (hist.size() > 2) hist.erase(hist.begin());
        curve.points.push_back(std::move(w));
    }
    return curve;
}

inline WavePoint solve_wave(double c, double omega, const SolverOptions& opt)
{
    FamilyCurve curve = continue_family(omega, c, c, 0.01 * omega, opt);
    if (curve.points.empty()) throw NoConvergence("solve_wave: " + curve.message, c);
    return curve.points.front();
}

/// Mass, energy and the Hamiltonian functional, integrated exactly on the
/// padded grid.
inline ConservedTriple conserved(const WaveProfile& phi, double omega)
{
    const int m = padded_size(phi.n_modes());
    const detail::ProfileSamples s = detail::sample_profile(phi, m);
    const Eigen::ArrayXd f = s.f.array(), df = s.df.array();
    ConservedTriple t;
    t.M = quadrature(s.f);
    t.E = 0.5 * quadrature(Vec((df * df + f * f).matrix()));
    t.F = 0.5 * quadrature(Vec((f * f * f + f * df * df + omega * f * f).matrix()));
    return t;
}

struct FamilyScalars {
    double c = 0.0;
    double A = 0.0;
    double E = 0.0;
    double dA_dc = 0.0;
    double dE_dc = 0.0;
    double d_c = 0.0;
    double delta = 0.0;
    WaveProfile dphi_dc;
};

inline double d_c_value(double c, double omega, double A, double dA_dc)
{
    return omega * (c - omega) + (omega + 2.0 * c) * dA_dc - 4.0 * A;
}

/// Derivatives in c by fourth-order centered differences from re-solves at
/// c +- delta and c +- 2 delta.
inline FamilyScalars family_scalars(const WavePoint& w, const SolverOptions& opt = {})
{
    const double delta = std::min(1e-4, 0.25 * (w.c - 0.5 * w.omega));
    const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
    const double weights[4] = {1.0, -8.0, 8.0, -1.0};
    FamilyScalars s;
    s.c = w.c;
    s.A = w.A;
    s.E = conserved(w.phi, w.omega).E;
    s.delta = delta;
    s.dphi_dc = WaveProfile(w.phi.grid);
    for (int i = 0; i < 4; ++i) {
        const WavePoint p = newton_refine(w.phi, w.c + offsets[i] * delta, w.omega, opt);
        const double wt = weights[i] / (12.0 * delta);
        s.dA_dc += wt * p.A;
        s.dE_dc += wt * conserved(p.phi, w.omega).E;
        s.dphi_dc.cos_coeffs += wt * p.phi.cos_coeffs;
    }
    s.d_c = d_c_value(w.c, w.omega, w.A, s.dA_dc);
    return s;
}

inline FamilyScalars family_scalars(const FamilyCurve& curve, std::size_t i, const SolverOptions& opt = {})
{
    if (i >= curve.points.size()) throw DomainError("family_scalars: index out of range");
    return family_scalars(curve.points[i], opt);
}

}  // namespace rchwave
