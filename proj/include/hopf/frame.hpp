#pragma once

// Critical eigendata at a Hopf point: the Jacobian A with eigenpair
// +- i omega0, right eigenvector q, left eigenvector p of A^T, normalized
// so <p,q> = sum conj(p_i) q_i = 1.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <optional>

#include "hopf/jet.hpp"

namespace hopf {

/// Fixes the scale of q: q(component) = value.  The default matches the
/// convention used throughout the WGSS application (first component = -i).
struct EigenvectorConvention {
    int component = 0;
    Cplx value = Cplx{0.0, -1.0};
};

struct MakeFrameOptions {
    EigenvectorConvention convention{};
    /// |Re lambda| below this (relative to spectral scale) counts as critical.
    double imag_axis_tol = 1e-8;
};

/// Immutable bundle: jet + critical eigenstructure.
struct HopfFrame {
    VectorFieldJet jet;
    RMat A;
    double omega0 = 0.0;
    CVec q;
    CVec p;
    CVec eigenvalues; // full spectrum of A
    EigenvectorConvention convention{};

    /// Largest invariant-equation residual of the eigenpair, relative.
    double eigen_residual() const {
        const Cplx iw{0.0, omega0};
        const double r1 = (A.cast<Cplx>() * q - iw * q).norm() / q.norm();
        const double r2 = (A.transpose().cast<Cplx>() * p + iw * p).norm() / p.norm();
        return std::max(r1, r2) / std::max(1.0, A.norm());
    }
};

/// Extract the critical frame from a jet whose Jacobian carries exactly one
/// conjugate pair on the imaginary axis.
inline HopfFrame make_frame(const VectorFieldJet& jet, const MakeFrameOptions& opts = {}) {
    const RMat A = jet.jacobian();
    const int n = jet.dim();
    Eigen::EigenSolver<RMat> es(A);
    if (es.info() != Eigen::Success) throw NumericError("make_frame: eigensolver failed");
    const CVec lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

    int pos = -1;
    int critical = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(lam(i).real()) <= opts.imag_axis_tol * scale &&
            std::abs(lam(i).imag()) > opts.imag_axis_tol * scale) {
            ++critical;
            if (lam(i).imag() > 0.0) pos = i;
        } else if (std::abs(lam(i).real()) <= opts.imag_axis_tol * scale) {
            ++critical; // zero eigenvalue also sits on the axis
        }
    }
    if (critical == 0 || pos < 0)
        throw NotHopfPointError("make_frame: no purely imaginary eigenvalue pair");
    if (critical > 2)
        throw DegenerateSpectrumError("make_frame: additional eigenvalues on the imaginary axis");

    const double w0 = lam(pos).imag();
    CVec q = es.eigenvectors().col(pos);
    const Cplx qc = q(opts.convention.component);
    if (std::abs(qc) < 1e-12 * q.norm())
        throw NumericError("make_frame: eigenvector convention component vanishes");
    q *= opts.convention.value / qc;

    Eigen::EigenSolver<RMat> esT(RMat(A.transpose()));
    if (esT.info() != Eigen::Success) throw NumericError("make_frame: eigensolver failed (transpose)");
    int neg = -1;
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(esT.eigenvalues()(i) - Cplx{0.0, -w0});
        if (d < best) { best = d; neg = i; }
    }
    CVec p = esT.eigenvectors().col(neg);
    const Cplx c = inner(p, q);
    if (std::abs(c) < 1e-12) throw NumericError("make_frame: <p,q> numerically zero");
    p /= std::conj(c);

    return HopfFrame{jet, A, w0, std::move(q), std::move(p), lam, opts.convention};
}

} // namespace hopf
