#pragma once

// Degenerate-Hopf loci on the critical hypersurface eps = eps_c(beta,
// alpha, kappa): the l1 = 0 surface, the curves where l2 also vanishes,
// the codimension-4 point where l3 vanishes as well, and transversality
// data (coefficient gradients, eigenvalue crossing speed).

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "hopf/ladder.hpp"
#include "hopf/wgss.hpp"

namespace hopf::wgss {

/// Ladder at the critical point for (beta, alpha, kappa).
inline CoefficientLadder ladder_at(double beta, double alpha, double kappa, int order) {
    const auto params = critical_params(beta, alpha, kappa);
    const auto jet = analytic_jet(params, 2 * order + 1);
    return run_ladder(make_frame(jet), order);
}

/// First three Lyapunov coefficients on the critical hypersurface.
inline std::array<double, 3> l123(double beta, double alpha, double kappa) {
    const auto lad = ladder_at(beta, alpha, kappa, 3);
    return {lad.l1(), lad.l2(), lad.l3()};
}

struct CriticalPoint {
    double beta = 0, alpha = 0, kappa = 0;
    double epsilon_c = 0;
    std::array<double, 4> l{0, 0, 0, 0};
    int codim = 1; // l_1..l_{codim-1} below tolerance, l_codim above
};

/// Classify the Hopf point; |l_j| < zero_tol counts as vanished.
inline CriticalPoint classify_critical_point(double beta, double alpha, double kappa,
                                             double zero_tol = 1e-6) {
    const auto lad = ladder_at(beta, alpha, kappa, 4);
    CriticalPoint cp;
    cp.beta = beta;
    cp.alpha = alpha;
    cp.kappa = kappa;
    cp.epsilon_c = epsilon_critical(beta, alpha, kappa);
    cp.l = {lad.l1(), lad.l2(), lad.l3(), lad.l4()};
    cp.codim = 1;
    for (int m = 1; m <= 3; ++m) {
        if (std::abs(cp.l[static_cast<std::size_t>(m - 1)]) < zero_tol)
            cp.codim = m + 1;
        else
            break;
    }
    return cp;
}

// ---------------------------------------------------------------------------
// l1 = 0 surface scan
// ---------------------------------------------------------------------------

struct GridAxis {
    double lo = 0, hi = 0;
    int n = 1;
    double at(int i) const { return n <= 1 ? lo : lo + (hi - lo) * i / (n - 1.0); }
};

struct ScanPoint {
    double beta, alpha, kappa;
    double g1;  // sign polynomial value
    int sign;   // sign(l1) = sign(g1); 0 inside the zero band
};

struct ZeroPoint {
    double beta, alpha, kappa;
};

struct ScanResult {
    std::vector<ScanPoint> field;  // row-major over (kappa, alpha, beta)
    std::vector<ZeroPoint> zeros;  // bisection-refined crossings along beta
    GridAxis beta, alpha, kappa;
};

/// Sign field of l1 over a grid (via the closed-form G1 oracle) and the
/// refined zero set along the beta axis.  Regions: S = {l1 < 0},
/// U = {l1 > 0}.  The optional `ladder_check` cross-checks the oracle
/// against sign(l1) from the ladder on that many pseudo-random grid points.
inline ScanResult scan_l1_surface(const GridAxis& beta, const GridAxis& alpha,
                                  const GridAxis& kappa, int ladder_check = 0,
                                  double bisect_tol = 1e-10) {
    if (beta.n < 1 || alpha.n < 1 || kappa.n < 1)
        throw std::invalid_argument("scan_l1_surface: empty grid");
    ScanResult res;
    res.beta = beta;
    res.alpha = alpha;
    res.kappa = kappa;
    res.field.reserve(static_cast<std::size_t>(beta.n) * alpha.n * kappa.n);
    for (int ik = 0; ik < kappa.n; ++ik)
        for (int ia = 0; ia < alpha.n; ++ia) {
            double prev_g = 0.0;
            for (int ib = 0; ib < beta.n; ++ib) {
                const double b = beta.at(ib), a = alpha.at(ia), k = kappa.at(ik);
                const double g = g1_polynomial(b, a, k);
                res.field.push_back({b, a, k, g, g > 0 ? 1 : (g < 0 ? -1 : 0)});
                if (ib > 0 && prev_g * g < 0.0) {
                    double lo = beta.at(ib - 1), hi = b;
                    double glo = prev_g;
                    while (hi - lo > 1e-15) {
                        const double mid = 0.5 * (lo + hi);
                        const double gm = g1_polynomial(mid, a, k);
                        if (std::abs(gm) < bisect_tol) { lo = hi = mid; break; }
                        if (glo * gm < 0.0) hi = mid;
                        else { lo = mid; glo = gm; }
                    }
                    res.zeros.push_back({0.5 * (lo + hi), a, k});
                }
                prev_g = g;
            }
        }
    if (ladder_check > 0) {
        std::uint64_t state = 0x9e3779b97f4a7c15ull;
        const auto rnd = [&] {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            return static_cast<double>(state % 1000000ull) / 1000000.0;
        };
        for (int i = 0; i < ladder_check; ++i) {
            const auto& pt = res.field[static_cast<std::size_t>(rnd() * (res.field.size() - 1))];
            if (std::abs(pt.g1) < 1e-6) continue;
            const auto l = l123(pt.beta, pt.alpha, pt.kappa);
            const int ladder_sign = l[0] > 0 ? 1 : -1;
            if (ladder_sign != pt.sign)
                throw NumericError("scan_l1_surface: sign oracle disagrees with ladder");
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Newton machinery (damped, step halving on residual increase)
// ---------------------------------------------------------------------------

namespace detail_locus {

using VecN = Eigen::VectorXd;

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 25;
    int max_halvings = 8;
    double fd_rel_step = 1e-5;
};

inline VecN fd_newton(const std::function<VecN(const VecN&)>& F, VecN x,
                      const NewtonOptions& opt, std::vector<double>* residuals = nullptr) {
    VecN Fx = F(x);
    for (int it = 0; it < opt.max_iter; ++it) {
        const double res = Fx.cwiseAbs().maxCoeff();
        if (residuals) residuals->push_back(res);
        if (res < opt.tol) return x;
        const int n = static_cast<int>(x.size());
        Eigen::MatrixXd J(Fx.size(), n);
        for (int c = 0; c < n; ++c) {
            const double h = opt.fd_rel_step * std::max(std::abs(x(c)), 1e-3);
            VecN xp = x, xm = x;
            xp(c) += h;
            xm(c) -= h;
            J.col(c) = (F(xp) - F(xm)) / (2.0 * h);
        }
        VecN step = J.fullPivLu().solve(-Fx);
        bool accepted = false;
        for (int halve = 0; halve <= opt.max_halvings; ++halve) {
            const VecN cand = x + step;
            const VecN Fc = F(cand);
            if (Fc.cwiseAbs().maxCoeff() < res || halve == opt.max_halvings) {
                x = cand;
                Fx = Fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    if (Fx.cwiseAbs().maxCoeff() >= opt.tol)
        throw ContinuationError("newton: no convergence within iteration budget");
    return x;
}

} // namespace detail_locus

// ---------------------------------------------------------------------------
// Curve tracing: l1 = l2 = 0 at fixed kappa, continued in kappa
// ---------------------------------------------------------------------------

struct CurvePoint {
    double kappa, beta, alpha;
    std::array<double, 3> l; // l1, l2 (both ~0 on the curve) and l3
};

struct TraceOptions {
    double tol = 1e-8;
    double kappa_step = 0.05;
    int max_newton = 25;
};

/// Solve (l1, l2)(beta, alpha) = 0 at one kappa from the given seed.
inline CurvePoint solve_curve_point(double kappa, double beta_seed, double alpha_seed,
                                    double tol = 1e-10) {
    detail_locus::NewtonOptions nopt;
    nopt.tol = tol;
    Eigen::VectorXd x(2);
    x << beta_seed, alpha_seed;
    const auto F = [kappa](const Eigen::VectorXd& v) {
        const auto l = l123(v(0), v(1), kappa);
        Eigen::VectorXd out(2);
        out << l[0], l[1];
        return out;
    };
    x = detail_locus::fd_newton(F, x, nopt);
    const auto l = l123(x(0), x(1), kappa);
    return {kappa, x(0), x(1), {l[0], l[1], l[2]}};
}

/// Trace one l1 = l2 = 0 curve across a kappa range by continuation from
/// the seed; each accepted point satisfies |l1|, |l2| < tol.
inline std::vector<CurvePoint> trace_l2_zero_curve(double kappa_from, double kappa_to,
                                                   double beta_seed, double alpha_seed,
                                                   const TraceOptions& opt = {}) {
    std::vector<CurvePoint> curve;
    double b = beta_seed, a = alpha_seed;
    const double dir = (kappa_to >= kappa_from) ? 1.0 : -1.0;
    const double step = std::abs(opt.kappa_step);
    for (double k = kappa_from; dir * (kappa_to - k) >= -1e-12; k += dir * step) {
        try {
            const auto pt = solve_curve_point(k, b, a, opt.tol);
            curve.push_back(pt);
            b = pt.beta;
            a = pt.alpha;
        } catch (const ContinuationError&) {
            if (curve.empty()) throw;
            throw ContinuationError(
                "trace_l2_zero_curve: continuation step failed after kappa = " +
                std::to_string(curve.back().kappa));
        }
        if (std::abs(k - kappa_to) < 1e-12) break;
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Eigenvalue crossing speed
// ---------------------------------------------------------------------------

/// d(Re lambda)/d(eps) at eps = eps_c by central differences, tracking the
/// positive-imaginary eigenvalue branch.
inline double crossing_speed(double beta, double alpha, double kappa, double rel_step = 1e-6) {
    const double ec = epsilon_critical(beta, alpha, kappa);
    const double h = rel_step * ec;
    const auto re_part = [&](double eps) {
        const WgssParams p(beta, alpha, eps, kappa);
        const auto jet = analytic_jet(p, 1);
        const Eigen::EigenSolver<RMat> es(jet.jacobian());
        int best = -1;
        double most = -1.0;
        for (int i = 0; i < 3; ++i)
            if (es.eigenvalues()(i).imag() > most) {
                most = es.eigenvalues()(i).imag();
                best = i;
            }
        if (most <= 0.0) throw NumericError("crossing_speed: complex pair lost while tracking");
        return es.eigenvalues()(best).real();
    };
    return (re_part(ec + h) - re_part(ec - h)) / (2.0 * h);
}

/// Closed-form value of the same derivative from the characteristic
/// polynomial: -omega0^2 / (2 (omega0^2 + eps_c^2)).
inline double crossing_speed_analytic(double beta, double alpha, double kappa) {
    const double w2 = (1.0 - beta * beta) / beta;
    const double ec = epsilon_critical(beta, alpha, kappa);
    return -w2 / (2.0 * (w2 + ec * ec));
}

// ---------------------------------------------------------------------------
// Codimension-4 point
// ---------------------------------------------------------------------------

struct TransversalityReport {
    // gradient components ordered (beta, alpha, kappa)
    Eigen::Vector3d grad_l1{0, 0, 0};
    Eigen::Vector3d grad_l2{0, 0, 0};
    Eigen::Vector3d grad_l3{0, 0, 0};
    /// Determinant of the gradient matrix with rows ordered (beta, kappa,
    /// alpha), the component order of the reference data this is compared
    /// against.  Row permutations only flip the sign.
    double det_bka = 0.0;
    double crossing_speed = 0.0;
};

struct QResult {
    CriticalPoint point;
    TransversalityReport transversality;
    int iterations = 0;
    std::vector<double> residual_history;
};

struct FindQOptions {
    double tol = 1e-8;
    int max_iter = 50;
    double fd_rel_step = 1e-5;
};

/// Newton on (l1, l2, l3)(beta, alpha, kappa) from the seed; reports the
/// refined point, l4 there, coefficient gradients and the transversality
/// determinant.
inline QResult find_codim4_point(double beta_seed, double alpha_seed, double kappa_seed,
                                 const FindQOptions& opt = {}) {
    detail_locus::NewtonOptions nopt;
    nopt.tol = opt.tol;
    nopt.max_iter = opt.max_iter;
    nopt.fd_rel_step = opt.fd_rel_step;
    const auto F = [](const Eigen::VectorXd& v) {
        const auto l = l123(v(0), v(1), v(2));
        Eigen::VectorXd out(3);
        out << l[0], l[1], l[2];
        return out;
    };
    Eigen::VectorXd x(3);
    x << beta_seed, alpha_seed, kappa_seed;
    QResult qr;
    x = detail_locus::fd_newton(F, x, nopt, &qr.residual_history);
    qr.iterations = static_cast<int>(qr.residual_history.size());
    qr.point = classify_critical_point(x(0), x(1), x(2));

    // central-difference gradients of l1..l3 in (beta, alpha, kappa)
    Eigen::Matrix3d J;
    for (int c = 0; c < 3; ++c) {
        const double h = opt.fd_rel_step * std::max(std::abs(x(c)), 1e-3);
        Eigen::VectorXd xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        const auto lp = l123(xp(0), xp(1), xp(2));
        const auto lm = l123(xm(0), xm(1), xm(2));
        for (int r = 0; r < 3; ++r) J(r, c) = (lp[static_cast<std::size_t>(r)] - lm[static_cast<std::size_t>(r)]) / (2.0 * h);
    }
    qr.transversality.grad_l1 = J.row(0);
    qr.transversality.grad_l2 = J.row(1);
    qr.transversality.grad_l3 = J.row(2);
    Eigen::Matrix3d M; // columns = gradients, rows ordered (beta, kappa, alpha)
    for (int g = 0; g < 3; ++g) {
        M(0, g) = J(g, 0);
        M(1, g) = J(g, 2);
        M(2, g) = J(g, 1);
    }
    qr.transversality.det_bka = M.determinant();
    qr.transversality.crossing_speed = crossing_speed(x(0), x(1), x(2));
    return qr;
}

} // namespace hopf::wgss
