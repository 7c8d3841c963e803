#pragma once

// Fourier infrastructure on the periodic interval [0, 2*pi].
//
// A Grid with n_modes = N carries M = 2N equispaced nodes.  Even zero-mean
// profiles are stored as cosine coefficients a_1..a_N.  General real
// trigonometric polynomials are handled through TrigCoeffs, which keeps
// the a_k and b_k of  f = a_0 + sum_k (a_k cos kx + b_k sin kx).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "rchwave/errors.hpp"

namespace rchwave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Relative tolerance for evenness checks.
inline constexpr double kTolSym = 1e-10;

class Grid {
public:
    explicit Grid(int n_modes = 64) : n_modes_(n_modes)
    {
        if (n_modes < 8) throw DomainError("Grid: n_modes must be at least 8");
        nodes_.resize(2 * n_modes);
        for (int j = 0; j < 2 * n_modes; ++j) nodes_[j] = kPi * j / n_modes;
    }

    int n_modes() const noexcept { return n_modes_; }
    int size() const noexcept { return 2 * n_modes_; }
    const Vec& nodes() const noexcept { return nodes_; }

    bool operator==(const Grid& o) const noexcept { return n_modes_ == o.n_modes_; }

private:
    int n_modes_;
    Vec nodes_;
};

/// Even, zero-mean profile phi(x) = sum_{k=1}^{N} a_k cos(kx).
struct WaveProfile {
    Vec cos_coeffs;  // cos_coeffs[k-1] = a_k
    Grid grid;

    WaveProfile() : cos_coeffs(Vec::Zero(64)), grid(64) {}
    explicit WaveProfile(const Grid& g) : cos_coeffs(Vec::Zero(g.n_modes())), grid(g) {}
    WaveProfile(Vec a, const Grid& g) : cos_coeffs(std::move(a)), grid(g)
    {
        if (cos_coeffs.size() != g.n_modes())
            throw DomainError("WaveProfile: coefficient count does not match grid");
    }

    int n_modes() const noexcept { return grid.n_modes(); }
};

/// Grid values of a general real function.
struct Field {
    Vec values;

    Field() = default;
    explicit Field(Vec v) : values(std::move(v)) {}

    Eigen::Index size() const noexcept { return values.size(); }
};

namespace detail {

inline Eigen::FFT<double>& fft_engine()
{
    thread_local Eigen::FFT<double> fft = [] {
        Eigen::FFT<double> f;
        f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
        return f;
    }();
    return fft;
}

}  // namespace detail

/// Real trigonometric polynomial  a[0] + sum_{k>=1} a[k] cos kx + b[k] sin kx.
struct TrigCoeffs {
    Vec a;  // a[0] is the mean
    Vec b;  // b[0] is unused and kept at zero

    TrigCoeffs() = default;
    explicit TrigCoeffs(int kmax) : a(Vec::Zero(kmax + 1)), b(Vec::Zero(kmax + 1)) {}

    int kmax() const noexcept { return static_cast<int>(a.size()) - 1; }

    static TrigCoeffs from_profile(const WaveProfile& p)
    {
        TrigCoeffs t(p.n_modes());
        t.a.tail(p.n_modes()) = p.cos_coeffs;
        return t;
    }

    /// Interpolating polynomial of grid values on M equispaced nodes (M even).
    /// The highest mode M/2 is a pure cosine.
    static TrigCoeffs from_grid(const Vec& values)
    {
        const auto m = static_cast<int>(values.size());
        std::vector<double> in(values.data(), values.data() + m);
        std::vector<std::complex<double>> spec;
        detail::fft_engine().fwd(spec, in);
        const int h = m / 2;
        TrigCoeffs t(h);
        t.a[0] = spec[0].real() / m;
        for (int k = 1; k < h; ++k) {
            t.a[k] = 2.0 * spec[k].real() / m;
            t.b[k] = -2.0 * spec[k].imag() / m;
        }
        t.a[h] = spec[h].real() / m;
        return t;
    }

    /// Values on M equispaced nodes.  Requires kmax <= M/2; at k = M/2 the
    /// sine part is invisible on the grid and is dropped.
    Vec to_grid(int m) const
    {
        const int h = m / 2;
        if (kmax() > h) throw DomainError("TrigCoeffs::to_grid: grid too coarse");
        std::vector<std::complex<double>> spec(h + 1, {0.0, 0.0});
        spec[0] = {a[0] * m, 0.0};
        for (int k = 1; k <= kmax(); ++k) {
            if (k == h)
                spec[k] = {a[k] * m, 0.0};
            else
                spec[k] = {0.5 * a[k] * m, -0.5 * b[k] * m};
        }
        std::vector<double> out;
        detail::fft_engine().inv(out, spec, m);
        return Eigen::Map<Vec>(out.data(), m);
    }

    TrigCoeffs derivative(int order = 1) const
    {
        TrigCoeffs t = *this;
        for (int o = 0; o < order; ++o) {
            TrigCoeffs d(kmax());
            for (int k = 1; k <= kmax(); ++k) {
                d.a[k] = k * t.b[k];
                d.b[k] = -k * t.a[k];
            }
            t = std::move(d);
        }
        return t;
    }

    /// Copy with kmax changed (zero-extended or truncated).
    TrigCoeffs resized(int kmax_new) const
    {
        TrigCoeffs t(kmax_new);
        const int k = std::min(kmax(), kmax_new);
        t.a.head(k + 1) = a.head(k + 1);
        t.b.head(k + 1) = b.head(k + 1);
        return t;
    }

    double max_abs() const { return std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()); }
};

/// Smallest even integer >= n with no prime factor above 5.
inline int fft_friendly_size(int n)
{
    for (int m = std::max(n, 2);; ++m) {
        if (m % 2) continue;
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

/// Quadrature size used for products of up to three fields with N modes.
/// Any P > 3N makes such products alias-free on modes 0..N.
inline int padded_size(int n_modes) { return fft_friendly_size(3 * n_modes + 1); }

inline Field synthesize(const WaveProfile& p)
{
    return Field(TrigCoeffs::from_profile(p).to_grid(p.grid.size()));
}

/// Values of the profile on m equispaced nodes (m >= 2N).
inline Vec synthesize_on(const WaveProfile& p, int m) { return TrigCoeffs::from_profile(p).to_grid(m); }

/// Cosine coefficients of an even field, with the mean discarded.
inline WaveProfile analyze_even(const Field& f, const Grid& g)
{
    const auto m = g.size();
    if (f.size() != m) throw DomainError("analyze_even: field size does not match grid");
    const double scale = f.values.cwiseAbs().maxCoeff();
    double odd = 0.0;
    for (int j = 1; j < m; ++j) odd = std::max(odd, 0.5 * std::abs(f.values[j] - f.values[m - j]));
    if (odd > kTolSym * scale) throw SymmetryViolation("analyze_even: field has an odd component");
    const TrigCoeffs t = TrigCoeffs::from_grid(f.values);
    return WaveProfile(t.a.tail(g.n_modes()), g);
}

/// Spectral derivative of order 1, 2 or 3.  For odd orders the Nyquist
/// mode is dropped, since its derivative is not representable on the grid.
inline Field differentiate(const Field& f, int order)
{
    if (order < 1 || order > 3) throw DomainError("differentiate: order must be 1, 2 or 3");
    TrigCoeffs t = TrigCoeffs::from_grid(f.values);
    if (order % 2 == 1) t.a[t.kmax()] = 0.0;
    return Field(t.derivative(order).to_grid(static_cast<int>(f.size())));
}

/// Trapezoid rule on the uniform periodic grid.
inline double quadrature(const Vec& values) { return kTwoPi * values.mean(); }
inline double quadrature(const Field& f) { return quadrature(f.values); }

inline double inner(const Field& f, const Field& g)
{
    if (f.size() != g.size()) throw DomainError("inner: fields live on different grids");
    return quadrature(Vec(f.values.cwiseProduct(g.values)));
}

/// Value and first two derivatives of sum_k a_k cos(kx) at an arbitrary x.
struct CosSeriesValue {
    double f, df, d2f;
};

inline CosSeriesValue eval_cos_series(const Vec& a, double x)
{
    const double c1 = std::cos(x), s1 = std::sin(x);
    double ck = c1, sk = s1;
    CosSeriesValue v{0.0, 0.0, 0.0};
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        v.f += a[i] * ck;
        v.df -= k * a[i] * sk;
        v.d2f -= k * k * a[i] * ck;
        const double cn = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = cn;
    }
    return v;
}

/// Ratio of the largest coefficient among the top `width` modes to the
/// largest coefficient overall; a cheap resolution indicator.
inline double spectral_tail(const Vec& a, int width = 8)
{
    const double top = a.cwiseAbs().maxCoeff();
    if (top == 0.0) return 0.0;
    width = std::min<int>(width, static_cast<int>(a.size()));
    return a.tail(width).cwiseAbs().maxCoeff() / top;
}

}  // namespace rchwave
