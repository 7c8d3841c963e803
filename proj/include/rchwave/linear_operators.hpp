#pragma once

// Linearized operators around a traveling wave, as Galerkin matrices in the
// orthonormal trigonometric basis of galerkin.hpp.
//
//   L      = -d/dx (c - phi) d/dx + (c - omega - 3 phi + phi'')
//   L_Pi   = P L P, P the projector onto zero-mean functions
//   M_tau  = -d^2/dx^2 + Q           (Hill operator after the Liouville change)
//   S M S  with S = (c - phi)^{1/2}

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "rchwave/errors.hpp"
#include "rchwave/galerkin.hpp"
#include "rchwave/spectral_core.hpp"
#include "rchwave/wave_family.hpp"

namespace rchwave {

enum class OperatorKind { L, L_Pi, Hill, WeightedSymmetrized };

inline const char* to_string(OperatorKind k)
{
    switch (k) {
    case OperatorKind::L: return "L";
    case OperatorKind::L_Pi: return "L_Pi";
    case OperatorKind::Hill: return "Hill";
    case OperatorKind::WeightedSymmetrized: return "SMS";
    }
    return "?";
}

struct OperatorMatrix {
    Mat entries;
    OperatorKind kind = OperatorKind::L;
    BasisKind basis = BasisKind::full;
    int n_modes = 0;

    Eigen::Index dim() const noexcept { return entries.rows(); }

    /// Coordinates of a trigonometric polynomial in this operator's basis.
    Vec coords(const TrigCoeffs& t) const { return restrict_to(to_modal(t, n_modes), basis, n_modes); }

    /// Trigonometric polynomial with the given coordinates.
    TrigCoeffs function(const Vec& v) const { return from_modal(embed(v, basis, n_modes), n_modes); }

    Vec apply(const Vec& v) const { return entries * v; }
};

/// Sampled coefficient functions of the Liouville change of variables, on the
/// padded quadrature grid of the wave.
struct LiouvilleData {
    Field D;           // ln((c - phi) / (c - phi(0)))
    Field Q;           // Hill potential
    Field weight;      // (c - phi)^{-1}
    Field half_power;  // ((c - phi(0)) / (c - phi))^{1/2}
    int n_modes = 0;
};

namespace detail {

inline void check_gap(const Vec& f, double c)
{
    const double g = c - f.maxCoeff();
    if (g <= 0.0) {
        std::ostringstream os;
        os << "c - phi vanishes on the grid (min gap " << g << ")";
        throw GapViolation(os.str());
    }
}

}  // namespace detail

inline OperatorMatrix assemble_L(const WavePoint& w, BasisKind basis = BasisKind::full)
{
    const BasisSamples& bs = padded_basis(w.phi.n_modes());
    const detail::ProfileSamples s = detail::sample_profile(w.phi, bs.points);
    detail::check_gap(s.f, w.c);
    const Vec p = (w.c - s.f.array()).matrix();
    const Vec q = ((w.c - w.omega) - 3.0 * s.f.array() + s.d2f.array()).matrix();
    return {sturm_liouville_matrix(bs, p, q, basis), OperatorKind::L, basis, w.phi.n_modes()};
}

/// L_Pi on the zero-mean subspace.  The two rank-one terms of L_Pi map into
/// the constants, so on zero-mean functions L_Pi coincides with P L P.
inline OperatorMatrix assemble_L_pi(const WavePoint& w)
{
    OperatorMatrix m = assemble_L(w, BasisKind::zero_mean);
    m.kind = OperatorKind::L_Pi;
    return m;
}

inline LiouvilleData liouville(const WavePoint& w)
{
    const int n = w.phi.n_modes();
    const int m = padded_size(n);
    const detail::ProfileSamples s = detail::sample_profile(w.phi, m);
    detail::check_gap(s.f, w.c);
    const double g0 = w.c - s.f[0];
    const Eigen::ArrayXd g = w.c - s.f.array();
    const Eigen::ArrayXd r = s.df.array() / g;
    LiouvilleData ld;
    ld.n_modes = n;
    ld.D = Field((g / g0).log().matrix());
    ld.Q = Field((((w.c - w.omega) - 3.0 * s.f.array()) / g + s.d2f.array() / (2.0 * g) - 0.25 * r * r).matrix());
    ld.weight = Field(g.inverse().matrix());
    ld.half_power = Field((g0 / g).sqrt().matrix());
    return ld;
}

/// M_tau = -d^2/dx^2 + Q on the full basis.
inline OperatorMatrix assemble_hill(const LiouvilleData& ld)
{
    const BasisSamples& bs = padded_basis(ld.n_modes);
    const Vec one = Vec::Ones(bs.points);
    return {sturm_liouville_matrix(bs, one, ld.Q.values, BasisKind::full), OperatorKind::Hill, BasisKind::full,
            ld.n_modes};
}

/// Gram matrix of the weight (c - phi)^{-1}; the Hill problem reads
/// M_tau w = lambda W w.
inline Mat weight_matrix(const LiouvilleData& ld)
{
    Mat m = multiplication_matrix(padded_basis(ld.n_modes), ld.weight.values);
    return 0.5 * (m + m.transpose());
}

/// S M_tau S with S the Galerkin matrix of multiplication by (c - phi)^{1/2}.
inline OperatorMatrix assemble_weighted_symmetrized(const WavePoint& w, const OperatorMatrix& hill)
{
    if (hill.kind != OperatorKind::Hill || hill.n_modes != w.phi.n_modes())
        throw DomainError("assemble_weighted_symmetrized: expects the Hill matrix of the same wave");
    const BasisSamples& bs = padded_basis(w.phi.n_modes());
    const Vec f = synthesize_on(w.phi, bs.points);
    detail::check_gap(f, w.c);
    const Vec sroot = (w.c - f.array()).sqrt().matrix();
    const Mat S = multiplication_matrix(bs, sroot);
    Mat m = S * hill.entries * S;
    return {0.5 * (m + m.transpose()), OperatorKind::WeightedSymmetrized, BasisKind::full, hill.n_modes};
}

/// Solver for L x = rhs on the orthogonal complement of a known kernel.
/// The kernel is deflated by a rank-k shift and the shifted matrix is
/// factored once, so repeated right-hand sides are cheap.
class ComplementSolver {
public:
    ComplementSolver(const OperatorMatrix& op, const std::vector<Vec>& kernel) : L_(op.entries)
    {
        const Eigen::Index n = op.dim();
        K_ = Mat(n, static_cast<Eigen::Index>(kernel.size()));
        for (std::size_t i = 0; i < kernel.size(); ++i) K_.col(static_cast<Eigen::Index>(i)) = kernel[i];
        if (K_.cols() > 0) {
            Eigen::HouseholderQR<Mat> qr(K_);
            K_ = qr.householderQ() * Mat::Identity(n, K_.cols());
        }
        const double sigma = std::max(1.0, op.entries.diagonal().cwiseAbs().mean());
        lu_.compute(op.entries + sigma * K_ * K_.transpose());
        const double rc = lu_.rcond();
        condition_ = rc > 0.0 ? 1.0 / rc : INFINITY;
        if (condition_ > 1e12) {
            std::ostringstream os;
            os << "deflated operator is numerically singular (condition " << condition_ << ")";
            throw NearSingular(os.str());
        }
    }

    /// Estimated 1-norm condition number of the deflated matrix.
    double condition() const noexcept { return condition_; }

    Vec solve(const Vec& rhs) const
    {
        const double nr = rhs.norm();
        for (Eigen::Index i = 0; i < K_.cols(); ++i) {
            const double proj = std::abs(K_.col(i).dot(rhs));
            if (proj > 1e-8 * std::max(nr, 1e-300)) {
                std::ostringstream os;
                os << "right-hand side not orthogonal to the kernel (relative projection " << proj / nr << ")";
                throw SolvabilityViolation(os.str());
            }
        }
        const Vec b = project(rhs);
        Vec x = lu_.solve(b);
        x = project(x);
        const double res = (L_ * x - b).norm();
        if (res > 1e-8 * std::max(nr, 1e-300)) {
            std::ostringstream os;
            os << "complement solve residual " << res / nr << " exceeds tolerance";
            throw NearSingular(os.str());
        }
        return x;
    }

    Vec project(const Vec& v) const { return v - K_ * (K_.transpose() * v); }

private:
    Mat L_;
    Mat K_;
    Eigen::PartialPivLU<Mat> lu_;
    double condition_ = 0.0;
};

/// Minimum-norm solution of L x = rhs orthogonal to the given kernel vectors.
inline Vec solve_on_complement(const OperatorMatrix& op, const Vec& rhs, const std::vector<Vec>& kernel)
{
    return ComplementSolver(op, kernel).solve(rhs);
}

/// Coordinates (full basis) of phi', the translation mode.
inline Vec translation_mode(const WavePoint& w)
{
    return to_modal(TrigCoeffs::from_profile(w.phi).derivative(1), w.phi.n_modes());
}

/// Coordinates (full basis) of the constant function 1.
inline Vec constant_mode(int n_modes)
{
    TrigCoeffs t(n_modes);
    t.a[0] = 1.0;
    return to_modal(t, n_modes);
}

}  // namespace rchwave
