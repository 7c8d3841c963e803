#pragma once

// Orthonormal trigonometric basis used for all operator matrices.
//
// With N retained modes the basis has 2N+1 functions, ordered
//   index 0        : 1/sqrt(2 pi)
//   index k        : cos(kx)/sqrt(pi),   k = 1..N
//   index N + k    : sin(kx)/sqrt(pi),   k = 1..N
// Keeping sin(Nx) next to cos(Nx) means the derivative of any retained
// cosine is again representable, so phi' lies exactly in the span.

#include <cmath>
#include <map>
#include <memory>

#include "rchwave/spectral_core.hpp"

namespace rchwave {

enum class BasisKind { full, zero_mean, even_zero_mean };

inline const char* to_string(BasisKind b)
{
    switch (b) {
    case BasisKind::full: return "full";
    case BasisKind::zero_mean: return "zero_mean";
    case BasisKind::even_zero_mean: return "even_zero_mean";
    }
    return "?";
}

inline int basis_offset(BasisKind b) { return b == BasisKind::full ? 0 : 1; }

inline int basis_dim(BasisKind b, int n_modes)
{
    switch (b) {
    case BasisKind::full: return 2 * n_modes + 1;
    case BasisKind::zero_mean: return 2 * n_modes;
    case BasisKind::even_zero_mean: return n_modes;
    }
    return 0;
}

/// Basis functions and their derivatives sampled on a padded grid.
struct BasisSamples {
    int n_modes;
    int points;    // quadrature nodes
    double weight; // 2 pi / points
    Mat B;         // points x (2N+1)
    Mat dB;
};

inline BasisSamples sample_basis(int n_modes, int points)
{
    BasisSamples s{n_modes, points, kTwoPi / points, Mat(points, 2 * n_modes + 1), Mat(points, 2 * n_modes + 1)};
    const double r2 = 1.0 / std::sqrt(kTwoPi), r1 = 1.0 / std::sqrt(kPi);
    for (int j = 0; j < points; ++j) {
        const double x = kTwoPi * j / points;
        s.B(j, 0) = r2;
        s.dB(j, 0) = 0.0;
        for (int k = 1; k <= n_modes; ++k) {
            const double ck = std::cos(k * x), sk = std::sin(k * x);
            s.B(j, k) = ck * r1;
            s.dB(j, k) = -k * sk * r1;
            s.B(j, n_modes + k) = sk * r1;
            s.dB(j, n_modes + k) = k * ck * r1;
        }
    }
    return s;
}

/// Full-basis coordinates of a trigonometric polynomial (modes above N are dropped).
inline Vec to_modal(const TrigCoeffs& t, int n_modes)
{
    Vec v = Vec::Zero(2 * n_modes + 1);
    v[0] = t.a[0] * std::sqrt(kTwoPi);
    const double r = std::sqrt(kPi);
    for (int k = 1; k <= std::min(n_modes, t.kmax()); ++k) {
        v[k] = t.a[k] * r;
        v[n_modes + k] = t.b[k] * r;
    }
    return v;
}

inline Vec to_modal(const WaveProfile& p) { return to_modal(TrigCoeffs::from_profile(p), p.n_modes()); }

inline TrigCoeffs from_modal(const Vec& v, int n_modes)
{
    TrigCoeffs t(n_modes);
    t.a[0] = v[0] / std::sqrt(kTwoPi);
    const double r = 1.0 / std::sqrt(kPi);
    for (int k = 1; k <= n_modes; ++k) {
        t.a[k] = v[k] * r;
        t.b[k] = v[n_modes + k] * r;
    }
    return t;
}

/// Embed coordinates of a sub-basis into the full basis.
inline Vec embed(const Vec& sub, BasisKind b, int n_modes)
{
    Vec v = Vec::Zero(2 * n_modes + 1);
    v.segment(basis_offset(b), sub.size()) = sub;
    return v;
}

/// Restrict full-basis coordinates to a sub-basis.
inline Vec restrict_to(const Vec& full, BasisKind b, int n_modes)
{
    return full.segment(basis_offset(b), basis_dim(b, n_modes));
}

/// Grid field of full-basis coordinates on m equispaced nodes.
inline Field modal_to_field(const Vec& v, int n_modes, int m)
{
    return Field(from_modal(v, n_modes).to_grid(m));
}

/// Galerkin matrix of multiplication by f, i.e. <f b_j, b_i>, with f sampled
/// on the quadrature nodes of `s`.
inline Mat multiplication_matrix(const BasisSamples& s, const Vec& f_samples)
{
    return s.weight * (s.B.transpose() * f_samples.asDiagonal() * s.B);
}

/// Basis samples on the padded quadrature grid for n_modes, cached per thread.
inline const BasisSamples& padded_basis(int n_modes)
{
    thread_local std::map<int, std::unique_ptr<BasisSamples>> cache;
    auto& slot = cache[n_modes];
    if (!slot) slot = std::make_unique<BasisSamples>(sample_basis(n_modes, padded_size(n_modes)));
    return *slot;
}

/// Galerkin matrix of  v -> -((p v')') + q v  on a sub-basis, for coefficient
/// samples p and q on the padded grid of `s`.
inline Mat sturm_liouville_matrix(const BasisSamples& s, const Vec& p, const Vec& q, BasisKind kind)
{
    const int off = basis_offset(kind), dim = basis_dim(kind, s.n_modes);
    const auto B = s.B.middleCols(off, dim);
    const auto dB = s.dB.middleCols(off, dim);
    Mat m = s.weight * (dB.transpose() * p.asDiagonal() * dB + B.transpose() * q.asDiagonal() * B);
    return 0.5 * (m + m.transpose());
}

}  // namespace rchwave
