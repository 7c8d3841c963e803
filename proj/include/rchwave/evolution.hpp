#pragma once

// Pseudo-spectral time integration of the Hamiltonian form
//     u_t = J F'(u),   J = -(1 - d_xx)^{-1} d_x,
//     F'(u) = 3/2 u^2 - u u_xx - 1/2 u_x^2 + omega u,
// with products formed on a padded grid and the Nyquist mode removed.  The
// truncated system conserves M, E and F exactly, so any drift is time
// discretization error.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "rchwave/errors.hpp"
#include "rchwave/spectral_core.hpp"
#include "rchwave/wave_family.hpp"

namespace rchwave {

struct EvolutionState {
    Field u;
    double t = 0.0;
    ConservedTriple conserved0;
    bool aliasing_warning = false;  // set once the spectral tail exceeded 1e-6
};

namespace detail {

/// Coefficients of a state, modes 0..N-1 (the Nyquist mode is dropped).
inline TrigCoeffs state_coeffs(const Field& u)
{
    TrigCoeffs t = TrigCoeffs::from_grid(u.values);
    t.a[t.kmax()] = 0.0;
    t.b[t.kmax()] = 0.0;
    return t;
}

inline double coeff_tail(const TrigCoeffs& t, int width = 8)
{
    Vec mag(t.kmax());
    for (int k = 1; k <= t.kmax(); ++k) mag[k - 1] = std::hypot(t.a[k], t.b[k]);
    // the Nyquist slot is always empty for states, skip it
    return spectral_tail(mag.head(std::max<Eigen::Index>(1, mag.size() - 1)), width);
}

/// -(1 - d_xx)^{-1} d_x applied to coefficients.
inline TrigCoeffs apply_J(const TrigCoeffs& f)
{
    TrigCoeffs r(f.kmax());
    for (int k = 1; k <= f.kmax(); ++k) {
        const double s = k / (1.0 + double(k) * k);
        r.a[k] = -s * f.b[k];
        r.b[k] = s * f.a[k];
    }
    return r;
}

inline TrigCoeffs rhs_coeffs(const TrigCoeffs& u, double omega, int n_modes)
{
    const int m = padded_size(n_modes);
    const Eigen::ArrayXd f = u.to_grid(m).array();
    const Eigen::ArrayXd fx = u.derivative(1).to_grid(m).array();
    const Eigen::ArrayXd fxx = u.derivative(2).to_grid(m).array();
    const Vec fp = (1.5 * f * f - f * fxx - 0.5 * fx * fx + omega * f).matrix();
    TrigCoeffs g = TrigCoeffs::from_grid(fp).resized(n_modes);
    g.a[n_modes] = 0.0;
    g.b[n_modes] = 0.0;
    return apply_J(g);
}

}  // namespace detail

/// Right-hand side J F'(u) on the grid of u.  `aliasing` (optional) is set
/// when the spectral tail of u exceeds 1e-6 of the peak.
inline Field rhs(const Field& u, double omega, bool* aliasing = nullptr)
{
    const int m = static_cast<int>(u.size());
    const int n = m / 2;
    const TrigCoeffs t = detail::state_coeffs(u);
    if (aliasing && detail::coeff_tail(t) > 1e-6) *aliasing = true;
    return Field(detail::rhs_coeffs(t, omega, n).to_grid(m));
}

/// Conserved quantities of a general (not necessarily even) field.
inline ConservedTriple conserved_field(const Field& u, double omega)
{
    const int n = static_cast<int>(u.size()) / 2;
    const int m = padded_size(n);
    const TrigCoeffs t = TrigCoeffs::from_grid(u.values);
    const Eigen::ArrayXd f = t.to_grid(m).array();
    TrigCoeffs tx = t;
    tx.a[tx.kmax()] = 0.0;
    const Eigen::ArrayXd fx = tx.derivative(1).to_grid(m).array();
    ConservedTriple c;
    c.M = quadrature(Vec(f.matrix()));
    c.E = 0.5 * quadrature(Vec((f * f + fx * fx).matrix()));
    c.F = 0.5 * quadrature(Vec((f * f * f + f * fx * fx + omega * f * f).matrix()));
    return c;
}

inline EvolutionState make_state(const Field& u0, double omega)
{
    EvolutionState s;
    s.u = u0;
    s.conserved0 = conserved_field(u0, omega);
    return s;
}

/// Largest admissible step for the explicit scheme.
inline double dt_max(const Field& u, double omega)
{
    const double n = static_cast<double>(u.size()) / 2.0;
    return 0.5 / (u.values.cwiseAbs().maxCoeff() * n + omega * n / (1.0 + n * n));
}

/// One classical Runge-Kutta step of size dt (negative dt integrates backwards).
inline EvolutionState step(const EvolutionState& s, double dt, double omega)
{
    const double lim = dt_max(s.u, omega);
    if (std::abs(dt) > lim) {
        std::ostringstream os;
        os << "step: |dt| = " << std::abs(dt) << " exceeds the stability bound " << lim;
        throw DomainError(os.str());
    }
    bool alias = false;
    const Field& u = s.u;
    const Vec k1 = rhs(u, omega, &alias).values;
    const Vec k2 = rhs(Field(u.values + 0.5 * dt * k1), omega).values;
    const Vec k3 = rhs(Field(u.values + 0.5 * dt * k2), omega).values;
    const Vec k4 = rhs(Field(u.values + dt * k3), omega).values;
    EvolutionState r = s;
    r.u.values = u.values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    r.t = s.t + dt;
    r.aliasing_warning = s.aliasing_warning || alias;
    const double peak = r.u.values.cwiseAbs().maxCoeff();
    if (!std::isfinite(peak) || peak > 1e6) {
        std::ostringstream os;
        os << "solution blew up at t = " << r.t << " (sup norm " << peak << ")";
        throw BlowupDetected(os.str());
    }
    return r;
}

/// Field values of f(x + s) for a grid field f.
inline Field shift_field(const Field& f, double s)
{
    TrigCoeffs t = TrigCoeffs::from_grid(f.values);
    const int h = t.kmax();
    for (int k = 1; k < h; ++k) {
        const double ck = std::cos(k * s), sk = std::sin(k * s);
        const double a = t.a[k], b = t.b[k];
        // a cos k(x+s) + b sin k(x+s)
        t.a[k] = a * ck + b * sk;
        t.b[k] = b * ck - a * sk;
    }
    t.a[h] = 0.0;
    return Field(t.to_grid(static_cast<int>(f.size())));
}

struct OrbitalDistance {
    double distance = 0.0;
    double shift = 0.0;  // minimizing l in ||u - phi(. + l)||
};

/// inf over l of ||u - phi(. + l)|| in H^1, found on a 4x oversampled shift
/// grid by FFT cross-correlation and refined by golden section, then Newton.
/// The Nyquist mode is left out of both fields, as in the evolution itself.
inline OrbitalDistance orbital_distance(const Field& u, const WaveProfile& phi)
{
    using cd = std::complex<double>;
    const int n = phi.n_modes();
    if (u.size() != phi.grid.size()) throw DomainError("orbital_distance: field and profile grids differ");
    const TrigCoeffs tu = TrigCoeffs::from_grid(u.values);

    // complex Fourier coefficients for k = 1..N-1
    std::vector<cd> uh(n), ph(n), s(n);
    for (int k = 1; k < n; ++k) {
        uh[k] = cd(0.5 * tu.a[k], -0.5 * tu.b[k]);
        ph[k] = cd(0.5 * phi.cos_coeffs[k - 1], 0.0);
        s[k] = (1.0 + double(k) * k) * uh[k] * std::conj(ph[k]);
    }

    // g(l) = sum_k 2 Re(s_k e^{-ikl}) = <u, phi(. + l)>_{H^1} / (2 pi)
    auto g = [&](double l) {
        double v = 0.0;
        for (int k = 1; k < n; ++k) v += 2.0 * std::real(s[k] * std::polar(1.0, -k * l));
        return v;
    };

    const int L = 4 * phi.grid.size();
    std::vector<cd> x(L, 0.0), X;
    for (int k = 1; k < n; ++k) x[k] = s[k];
    detail::fft_engine().fwd(X, x);
    int best = 0;
    for (int m = 1; m < L; ++m)
        if (X[m].real() > X[best].real()) best = m;
    const double dl = kTwoPi / L;

    double lo = (best - 1) * dl, hi = (best + 1) * dl;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
        if (g1 > g2) {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - gr * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + gr * (hi - lo);
            g2 = g(x2);
        }
    }
    // golden section stalls near sqrt(eps); finish with Newton on g'(l) = 0
    double l = 0.5 * (lo + hi);
    for (int it = 0; it < 5; ++it) {
        double d1 = 0.0, d2 = 0.0;
        for (int k = 1; k < n; ++k) {
            const cd e = s[k] * std::polar(1.0, -k * l);
            d1 += 2.0 * k * std::imag(e);
            d2 -= 2.0 * double(k) * k * std::real(e);
        }
        if (d2 >= 0.0) break;
        const double step = -d1 / d2;
        if (std::abs(step) > dl) break;
        l += step;
        if (std::abs(step) < 1e-15) break;
    }

    double d2 = kTwoPi * tu.a[0] * tu.a[0];
    for (int k = 1; k < n; ++k)
        d2 += 2.0 * kTwoPi * (1.0 + double(k) * k) * std::norm(uh[k] - ph[k] * std::polar(1.0, k * l));
    OrbitalDistance r;
    r.distance = std::sqrt(d2);
    r.shift = std::remainder(l, kTwoPi);
    return r;
}

/// H^1 norm of a grid field, the Nyquist cosine included.
inline double h1_norm(const Field& u)
{
    const TrigCoeffs t = TrigCoeffs::from_grid(u.values);
    const int h = t.kmax();
    double s = kTwoPi * t.a[0] * t.a[0];
    for (int k = 1; k <= h; ++k) s += kPi * (1.0 + double(k) * k) * (t.a[k] * t.a[k] + t.b[k] * t.b[k]);
    return std::sqrt(s);
}

/// Smooth zero-mean random perturbation with unit H^1 norm.
inline Field random_perturbation(const Grid& g, std::uint64_t seed, int modes = 6)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    TrigCoeffs t(g.n_modes());
    for (int k = 1; k <= std::min(modes, g.n_modes() - 1); ++k) {
        t.a[k] = nd(rng) / (k * k);
        t.b[k] = nd(rng) / (k * k);
    }
    Field v(t.to_grid(g.size()));
    v.values /= h1_norm(v);
    return v;
}

struct OrbitalSample {
    double t, distance, M, E, F;
};

struct OrbitalRun {
    std::vector<OrbitalSample> series;
    double initial_distance = 0.0;
    double max_distance = 0.0;
    double drift_M = 0.0;  // relative to the L1 norm of the initial data
    double drift_E = 0.0;
    double drift_F = 0.0;
    bool aliasing_warning = false;
    std::uint64_t seed = 0;
};

struct EvolutionOptions {
    double dt = 1e-3;
    double dt_out = 0.1;
    std::uint64_t seed = 20240601;
};

inline OrbitalRun run_orbital_experiment(const WavePoint& w, double perturbation_size, double T,
                                         const EvolutionOptions& opt = {})
{
    if (!(T >= 0.0) || !(opt.dt > 0.0)) throw DomainError("run_orbital_experiment: T and dt must be positive");
    const Field phi = synthesize(w.phi);
    Field u0 = phi;
    if (perturbation_size != 0.0) {
        const Field v = random_perturbation(w.phi.grid, opt.seed);
        u0.values += perturbation_size * h1_norm(phi) * v.values;
    }
    EvolutionState s = make_state(u0, w.omega);
    OrbitalRun run;
    run.seed = opt.seed;
    const double l1 = quadrature(Vec(u0.values.cwiseAbs()));
    const ConservedTriple c0 = s.conserved0;

    auto record = [&]() {
        const OrbitalDistance d = orbital_distance(s.u, w.phi);
        const ConservedTriple c = conserved_field(s.u, w.omega);
        run.series.push_back({s.t, d.distance, c.M, c.E, c.F});
        run.max_distance = std::max(run.max_distance, d.distance);
        run.drift_M = std::max(run.drift_M, std::abs(c.M - c0.M) / std::max(l1, 1e-300));
        run.drift_E = std::max(run.drift_E, std::abs(c.E - c0.E) / std::max(std::abs(c0.E), 1e-300));
        run.drift_F = std::max(run.drift_F, std::abs(c.F - c0.F) / std::max(std::abs(c0.F), 1e-300));
    };
    record();
    run.initial_distance = run.series.front().distance;

    const long n_steps = std::lround(T / opt.dt);
    const long every = std::max(1L, std::lround(opt.dt_out / opt.dt));
    for (long i = 1; i <= n_steps; ++i) {
        s = step(s, opt.dt, w.omega);
        if (i % every == 0 || i == n_steps) record();
    }
    run.aliasing_warning = s.aliasing_warning;
    return run;
}

/// Linearization about the wave in the frame moving with speed c:
///   v_t = -J L v = c v_x + J F''(phi) v.
inline Field linearized_rhs(const Field& v, const WavePoint& w)
{
    const int n = w.phi.n_modes();
    const int m = padded_size(n);
    const TrigCoeffs tv = detail::state_coeffs(v);
    const TrigCoeffs tp = TrigCoeffs::from_profile(w.phi);
    const Eigen::ArrayXd p = tp.to_grid(m).array(), px = tp.derivative(1).to_grid(m).array(),
                         pxx = tp.derivative(2).to_grid(m).array();
    const Eigen::ArrayXd f = tv.to_grid(m).array(), fx = tv.derivative(1).to_grid(m).array(),
                         fxx = tv.derivative(2).to_grid(m).array();
    const Vec fpp = (3.0 * p * f - f * pxx - p * fxx - px * fx + w.omega * f).matrix();
    TrigCoeffs g = TrigCoeffs::from_grid(fpp).resized(n);
    g.a[n] = 0.0;
    g.b[n] = 0.0;
    TrigCoeffs r = detail::apply_J(g);
    const TrigCoeffs vx = tv.derivative(1);
    r.a += w.c * vx.a;
    r.b += w.c * vx.b;
    return Field(r.to_grid(static_cast<int>(v.size())));
}

}  // namespace rchwave
