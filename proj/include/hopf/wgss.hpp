#pragma once

// Watt governor with spring: nondimensional model, equilibrium and spectral
// data, critical damping, the closed-form first-coefficient sign polynomial,
// and the analytic Taylor jet at the equilibrium up to order 9.
//
// State (x, y, z) in (0, pi/2) x R x [0, inf), parameters
// (beta, alpha, epsilon, kappa) in (0,1) x (0,inf) x (0,inf) x [0,1):
//   x' = y
//   y' = (z^2 + kappa) sin x cos x - sin x - epsilon y
//   z' = alpha (cos x - beta)

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "hopf/jet.hpp"

namespace hopf::wgss {

using Vec3 = Eigen::Vector3d;

/// Nondimensional parameter record.  Domain bounds are enforced here once;
/// evaluation code stays branch-free.
struct WgssParams {
    double beta;
    double alpha;
    double epsilon;
    double kappa;

    WgssParams(double beta_, double alpha_, double epsilon_, double kappa_)
        : beta(beta_), alpha(alpha_), epsilon(epsilon_), kappa(kappa_) {
        if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("WgssParams: beta must be in (0,1)");
        if (!(alpha > 0.0)) throw std::domain_error("WgssParams: alpha must be positive");
        if (!(epsilon > 0.0)) throw std::domain_error("WgssParams: epsilon must be positive");
        if (!(kappa >= 0.0 && kappa < 1.0)) throw std::domain_error("WgssParams: kappa must be in [0,1)");
    }
};

/// Physical constants of the governor-engine system.
struct PhysicalParams {
    double m;   // ball mass
    double l;   // arm length
    double b;   // friction coefficient
    double g;   // gravity
    double c;   // transmission ratio
    double mu;  // torque constant
    double I;   // flywheel inertia
    double F;   // load torque
    double k;   // spring constant (>= 0)

    /// Map to (beta, alpha, epsilon, kappa).
    WgssParams to_nondimensional() const {
        if (!(m > 0 && l > 0 && b > 0 && g > 0 && c > 0 && mu > 0 && I > 0 && F > 0))
            throw std::domain_error("PhysicalParams: all constants except k must be positive");
        if (k < 0) throw std::domain_error("PhysicalParams: spring constant must be >= 0");
        const double denom = 2.0 * k * l + m * g;
        const double u = m * l / denom; // squared time unit
        return WgssParams(F / mu,
                          (c * mu / I) * u,
                          (b / m) * std::sqrt(u),
                          2.0 * k * l / denom);
    }

    /// Engine speed at equilibrium as a function of load, Omega0(F).
    double equilibrium_speed() const {
        const double u = m * l / (2.0 * k * l + m * g);
        const double kap = 2.0 * k * l / (2.0 * k * l + m * g);
        return std::sqrt(mu / F - kap) / (c * std::sqrt(u));
    }

    /// |d Omega0 / d F|: sensitivity of engine speed to load.
    double nonuniformity_physical() const {
        const double u = m * l / (2.0 * k * l + m * g);
        const double beta = F / mu;
        const double kap = 2.0 * k * l / (2.0 * k * l + m * g);
        return 1.0 / (2.0 * mu * std::pow(beta, 1.5) * std::sqrt(1.0 - kap * beta)) /
               (c * std::sqrt(u));
    }
};

/// The admissible equilibrium P0 = (arccos beta, 0, sqrt(1/beta - kappa)).
struct Equilibrium {
    double x0, y0, z0;
    static Equilibrium of(const WgssParams& p) {
        return {std::acos(p.beta), 0.0, std::sqrt(1.0 / p.beta - p.kappa)};
    }
    Vec3 state() const { return {x0, y0, z0}; }
};

inline Vec3 vector_field(const Vec3& s, const WgssParams& p) {
    const double sx = std::sin(s(0));
    const double cx = std::cos(s(0));
    return {s(1),
            (s(2) * s(2) + p.kappa) * sx * cx - sx - p.epsilon * s(1),
            p.alpha * (cx - p.beta)};
}

/// Flow divergence is constant: trace Df = -epsilon everywhere.
inline double divergence(const WgssParams& p) { return -p.epsilon; }

/// Critical frequency at the Hopf hypersurface.
inline double omega0(double beta) { return std::sqrt((1.0 - beta * beta) / beta); }

/// Critical damping: below it P0 is unstable, above it asymptotically stable.
inline double epsilon_critical(double beta, double alpha, double kappa) {
    return 2.0 * alpha * std::pow(beta, 1.5) * std::sqrt(1.0 - kappa * beta);
}

/// Params with epsilon pinned to the critical hypersurface.
inline WgssParams critical_params(double beta, double alpha, double kappa) {
    return WgssParams(beta, alpha, epsilon_critical(beta, alpha, kappa), kappa);
}

/// Monic cubic lambda^3 + p1 lambda^2 + p2 lambda + p3: all roots in the
/// open left half-plane iff p1, p2, p3 > 0 and p1 p2 > p3.
inline bool routh_hurwitz_stable(double p1, double p2, double p3) {
    return p1 > 0.0 && p2 > 0.0 && p3 > 0.0 && p1 * p2 > p3;
}

/// Coefficients (p1, p2, p3) of the characteristic polynomial of Df(P0).
inline std::array<double, 3> char_poly_coeffs(const WgssParams& p) {
    const double w2 = (1.0 - p.beta * p.beta) / p.beta;
    return {p.epsilon, w2, epsilon_critical(p.beta, p.alpha, p.kappa) * w2};
}

/// Non-uniformity of engine performance, nondimensional form.
inline double nonuniformity(double beta, double kappa) {
    return 1.0 / (2.0 * std::pow(beta, 1.5) * std::sqrt(1.0 - kappa * beta));
}

/// Sign polynomial of the first Lyapunov coefficient on the critical
/// hypersurface: sign(l1) = sign(G1).  Its zero set is the l1 = 0 surface.
inline double g1_polynomial(double beta, double alpha, double kappa) {
    const double a2 = alpha * alpha;
    const double a4 = a2 * a2;
    const double b = beta;
    const double b2 = b * b, b3 = b2 * b, b4 = b2 * b2, b6 = b3 * b3, b7 = b6 * b;
    const double k2 = kappa * kappa;
    return -3.0 + 5.0 * kappa * b - (a2 - 5.0) * b2 + kappa * (a2 - 7.0) * b3 -
           2.0 * a2 * k2 * b4 - (a4 - 2.0 * a2 * k2) * b6 + a4 * kappa * b7;
}

/// Closed-form sign oracle for l1 at epsilon = epsilon_c.
/// Returns -1, 0, +1; |G1| below `zero_tol` counts as zero.
inline int l1_closed_form_sign(double beta, double alpha, double kappa,
                               double zero_tol = 0.0) {
    const double g = g1_polynomial(beta, alpha, kappa);
    if (std::abs(g) <= zero_tol) return 0;
    return g > 0.0 ? 1 : -1;
}

/// Analytic Taylor jet of the field at P0, orders 1..max_order (<= 9).
/// Derivatives come from the sin/cos cycle in x and the quadratic z
/// dependence; every entry is closed-form exact.
inline VectorFieldJet analytic_jet(const WgssParams& p, int max_order = kMaxJetOrder) {
    const Equilibrium eq = Equilibrium::of(p);
    const double s1 = std::sin(eq.x0), c1 = std::cos(eq.x0);
    const double s2 = std::sin(2.0 * eq.x0), c2 = std::cos(2.0 * eq.x0);
    const double z0 = eq.z0;
    // d^a/dx^a sin(x) -> cycle [s, c, -s, -c]; cos(x) -> cycle [c, -s, -c, s]
    const auto cyc = [](double s, double c, int a) {
        switch (a & 3) {
            case 0: return s;
            case 1: return c;
            case 2: return -s;
            default: return -c;
        }
    };
    return VectorFieldJet::from_entries(3, max_order, [&](int order, std::span<const int> idx, std::span<double> out) {
        int a = 0, b = 0, c = 0;
        for (int v : idx) {
            if (v == 0) ++a;
            else if (v == 1) ++b;
            else ++c;
        }
        out[0] = (order == 1 && b == 1) ? 1.0 : 0.0;
        double f2 = 0.0;
        if (b == 1 && a == 0 && c == 0) {
            f2 = -p.epsilon;
        } else if (b == 0) {
            // f2 = (z^2+kappa)/2 sin 2x - sin x  (minus the y term)
            if (c == 0) f2 = (z0 * z0 + p.kappa) / 2.0 * std::pow(2.0, a) * cyc(s2, c2, a) - cyc(s1, c1, a);
            else if (c == 1) f2 = z0 * std::pow(2.0, a) * cyc(s2, c2, a);
            else if (c == 2) f2 = std::pow(2.0, a) * cyc(s2, c2, a);
        }
        out[1] = f2;
        out[2] = (b == 0 && c == 0) ? p.alpha * cyc(c1, -s1, a) : 0.0;
    });
}

} // namespace hopf::wgss
