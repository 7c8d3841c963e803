#pragma once

// Eigenvalue counts, the 2x2 index matrix of the constraints {phi - phi'', 1},
// and the stability decision for a single traveling wave.

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rchwave/errors.hpp"
#include "rchwave/floquet.hpp"
#include "rchwave/linear_operators.hpp"
#include "rchwave/wave_family.hpp"

namespace rchwave {

inline constexpr double kTolZero = 1e-7;
inline constexpr double kTolSign = 1e-8;

inline double fold_tolerance(double c, double omega) { return 1e-6 * (1.0 + std::abs(omega * (c - omega))); }

struct SpectrumReport {
    Vec eigenvalues;  // ascending
    int n_neg = 0;
    int n_zero = 0;
    std::vector<Vec> kernel_vectors;  // coordinates in the operator's basis
    OperatorKind operator_kind = OperatorKind::L;
    double zero_threshold = 0.0;
};

inline SpectrumReport spectrum(const OperatorMatrix& op, double tol_zero = kTolZero)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(op.entries);
    SpectrumReport r;
    r.operator_kind = op.kind;
    r.eigenvalues = es.eigenvalues();
    r.zero_threshold = tol_zero * std::max(1.0, r.eigenvalues.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
        const double l = r.eigenvalues[i];
        if (std::abs(l) <= r.zero_threshold) {
            ++r.n_zero;
            r.kernel_vectors.push_back(es.eigenvectors().col(i).normalized());
        } else if (l < 0.0) {
            ++r.n_neg;
        }
    }
    return r;
}

struct IndexMatrix {
    Eigen::Matrix2d entries = Eigen::Matrix2d::Zero();
    double det = 0.0;
    int n0 = 0;
    int z0 = 0;
    int p0 = 0;
    int z_inf = 0;
    Vec L_inv_g;    // L^{-1}(phi - phi''), full-basis coordinates
    Vec L_inv_one;  // L^{-1} 1, i.e. the function h

    double inner_L_inv_1_1() const { return entries(1, 1); }
};

/// Coordinates of phi - phi'' in the full basis.
inline Vec phi_minus_phi2(const WavePoint& w)
{
    const TrigCoeffs t = TrigCoeffs::from_profile(w.phi);
    TrigCoeffs g = t;
    g.a -= t.derivative(2).a;
    return to_modal(g, w.phi.n_modes());
}

/// A(0) with entries <L^{-1} v_i, v_j> for v = (phi - phi'', 1).  L must be
/// on the full basis with kernel spanned by phi'; a fold raises NearSingular.
inline IndexMatrix index_matrix(const WavePoint& w, const OperatorMatrix& L, const std::vector<Vec>& kernel)
{
    if (L.basis != BasisKind::full) throw DomainError("index_matrix: L must be assembled on the full basis");
    const ComplementSolver solver(L, kernel);
    const Vec v1 = phi_minus_phi2(w);
    const Vec v2 = constant_mode(w.phi.n_modes());
    IndexMatrix m;
    m.L_inv_g = solver.solve(v1);
    m.L_inv_one = solver.solve(v2);
    m.entries(0, 0) = m.L_inv_g.dot(v1);
    m.entries(0, 1) = m.entries(1, 0) = 0.5 * (m.L_inv_g.dot(v2) + m.L_inv_one.dot(v1));
    m.entries(1, 1) = m.L_inv_one.dot(v2);
    m.det = m.entries.determinant();
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m.entries).eigenvalues();
    const double thr = 1e-8 * m.entries.norm();
    for (int i = 0; i < 2; ++i) {
        if (std::abs(ev[i]) <= thr)
            ++m.z0;
        else if (ev[i] < 0.0)
            ++m.n0;
        else
            ++m.p0;
    }
    m.z_inf = 2 - m.n0 - m.z0 - m.p0;
    return m;
}

struct ConstrainedCount {
    int n_constrained = 0;  // n(L restricted to {1, phi - phi''}^perp)
    int n_LPi = 0;          // n(L_Pi) predicted from the single constraint {1}
    int z_LPi_shift = 0;    // zero-count correction of the single constraint
};

inline ConstrainedCount constrained_count(int n_L, int z_L, const IndexMatrix& idx)
{
    (void)z_L;
    ConstrainedCount cc;
    cc.n_constrained = n_L - idx.n0 - idx.z0;
    const double a11 = idx.inner_L_inv_1_1();
    const double thr = 1e-8 * std::max(1.0, std::abs(a11));
    const int n0s = a11 < -thr ? 1 : 0;
    const int z0s = std::abs(a11) <= thr ? 1 : 0;
    cc.n_LPi = n_L - n0s - z0s;
    cc.z_LPi_shift = z0s;
    if (cc.n_constrained < 0 || cc.n_LPi < 0) {
        std::ostringstream os;
        os << "constrained count is negative (n_L = " << n_L << ", n0 = " << idx.n0 << ", z0 = " << idx.z0 << ")";
        throw NegativeCount(os.str());
    }
    return cc;
}

enum class Decision { spectrally_stable, inconclusive, flagged_fold };
enum class Criterion { dE_positive, dc_dA, none };

inline const char* to_string(Decision d)
{
    switch (d) {
    case Decision::spectrally_stable: return "spectrally_stable";
    case Decision::inconclusive: return "inconclusive";
    case Decision::flagged_fold: return "flagged_fold";
    }
    return "?";
}

inline const char* to_string(Criterion c)
{
    switch (c) {
    case Criterion::dE_positive: return "dE_positive";
    case Criterion::dc_dA: return "dc_dA";
    case Criterion::none: return "none";
    }
    return "?";
}

struct StabilityVerdict {
    double c = 0.0;
    double omega = 0.0;
    int n_L = 0;
    int z_L = 0;
    int n_LPi = 0;
    int z_LPi = 0;
    double theta = 0.0;
    double d_c = 0.0;
    double dA_dc = 0.0;
    double dE_dc = 0.0;
    double det_A0 = std::numeric_limits<double>::quiet_NaN();
    double inner_L_inv_1_1 = std::numeric_limits<double>::quiet_NaN();
    int n_constrained = -1;  // -1 when the index matrix is unavailable (fold)
    bool de_route = false;
    bool dc_da_route = false;
    Decision decision = Decision::inconclusive;
    Criterion criterion = Criterion::none;
};

/// Everything the decision table looks at.
struct VerdictInputs {
    double c = 0.0;
    double omega = 0.0;
    int n_L = 0, z_L = 0, n_LPi = 0, z_LPi = 0;
    double theta = 0.0;
    FamilyScalars scalars;
    std::optional<IndexMatrix> index;
    std::optional<ConstrainedCount> constrained;
};

inline StabilityVerdict verdict(const VerdictInputs& in)
{
    StabilityVerdict v;
    v.c = in.c;
    v.omega = in.omega;
    v.n_L = in.n_L;
    v.z_L = in.z_L;
    v.n_LPi = in.n_LPi;
    v.z_LPi = in.z_LPi;
    v.theta = in.theta;
    v.d_c = in.scalars.d_c;
    v.dA_dc = in.scalars.dA_dc;
    v.dE_dc = in.scalars.dE_dc;
    if (in.index) {
        v.det_A0 = in.index->det;
        v.inner_L_inv_1_1 = in.index->inner_L_inv_1_1();
    }
    if (in.constrained) v.n_constrained = in.constrained->n_constrained;

    const bool fold = std::abs(v.d_c) <= fold_tolerance(in.c, in.omega);
    v.de_route = v.dE_dc > kTolSign;
    v.dc_da_route = !fold && v.dA_dc > kTolSign && v.n_constrained == 0;

    if (v.de_route)
        v.criterion = Criterion::dE_positive;
    else if (v.dc_da_route)
        v.criterion = Criterion::dc_dA;

    if (fold)
        v.decision = Decision::flagged_fold;
    else if (v.criterion != Criterion::none)
        v.decision = Decision::spectrally_stable;
    else
        v.decision = Decision::inconclusive;
    return v;
}

/// Vakhitov-Kolokolov quantity <L_Pi^{-1}(phi - phi''), phi - phi''> from an
/// independent solve on the zero-mean subspace.
inline double vakhitov_kolokolov(const WavePoint& w)
{
    const OperatorMatrix Lp = assemble_L_pi(w);
    const int n = w.phi.n_modes();
    const Vec g = restrict_to(phi_minus_phi2(w), BasisKind::zero_mean, n);
    const Vec k = restrict_to(translation_mode(w), BasisKind::zero_mean, n);
    const Vec x = solve_on_complement(Lp, g, {k});
    return x.dot(g);
}

/// Complete per-point analysis.
struct PointAnalysis {
    WavePoint wave;
    FamilyScalars scalars;
    SpectrumReport spec_L;
    SpectrumReport spec_LPi;
    FloquetReport floquet;
    std::optional<IndexMatrix> index;
    std::optional<ConstrainedCount> constrained;
    std::string fold_message;
    StabilityVerdict verdict;
};

struct AnalysisOptions {
    SolverOptions solver;
    FloquetOptions floquet;
    double tol_zero = kTolZero;
};

inline PointAnalysis analyze_point(const WavePoint& w, const AnalysisOptions& opt = {})
{
    PointAnalysis pa;
    pa.wave = w;
    pa.scalars = family_scalars(w, opt.solver);
    const OperatorMatrix L = assemble_L(w);
    pa.spec_L = spectrum(L, opt.tol_zero);
    pa.spec_LPi = spectrum(assemble_L_pi(w), opt.tol_zero);
    pa.floquet = floquet_report(w, opt.floquet);
    try {
        pa.index = index_matrix(w, L, {translation_mode(w).normalized()});
        pa.constrained = constrained_count(pa.spec_L.n_neg, pa.spec_L.n_zero, *pa.index);
    } catch (const NearSingular& e) {
        pa.fold_message = e.what();
    }
    VerdictInputs in;
    in.c = w.c;
    in.omega = w.omega;
    in.n_L = pa.spec_L.n_neg;
    in.z_L = pa.spec_L.n_zero;
    in.n_LPi = pa.spec_LPi.n_neg;
    in.z_LPi = pa.spec_LPi.n_zero;
    in.theta = pa.floquet.theta;
    in.scalars = pa.scalars;
    in.index = pa.index;
    in.constrained = pa.constrained;
    pa.verdict = verdict(in);
    return pa;
}

}  // namespace rchwave
