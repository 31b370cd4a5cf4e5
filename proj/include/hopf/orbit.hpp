#pragma once

// Direct numerical study of the governor dynamics: trajectories, the
// Poincare section x = x0 with upward crossings, return-map cycle location
// (forward or reverse time), attractor census, amplitude scaling, and the
// radial drift profile that resolves weakly-hierarchical cycle stacks.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hopf/ladder.hpp"
#include "hopf/ode.hpp"
#include "hopf/wgss.hpp"

namespace hopf::wgss {

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    long max_steps = 200'000'000;
};

enum class ExitFlag { completed, left_domain, step_limit };

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec3> y;
    ExitFlag exit = ExitFlag::completed;
};

inline bool in_phase_domain(const Vec3& s) {
    return s(0) > 0.0 && s(0) < M_PI / 2.0 && s(2) >= 0.0;
}

namespace detail_orbit {

inline auto rhs(const WgssParams& p, bool backward) {
    const double sgn = backward ? -1.0 : 1.0;
    return [p, sgn](double, const Vec3& s) -> Vec3 { return sgn * vector_field(s, p); };
}

} // namespace detail_orbit

/// Integrate from `y0` for `t_end` time units; samples every `sample_dt`
/// (0 keeps every accepted step).  Leaving the phase domain truncates the
/// trajectory with an exit flag.
inline Trajectory integrate(const WgssParams& p, const Vec3& y0, double t_end,
                            const IntegrateOptions& opt = {}, double sample_dt = 0.0) {
    Trajectory out;
    ode::Options o{opt.rtol, opt.atol, 0.0, std::numeric_limits<double>::infinity(), opt.max_steps};
    out.t.push_back(0.0);
    out.y.push_back(y0);
    double next_sample = sample_dt;
    const auto ex = ode::integrate<Vec3>(
        detail_orbit::rhs(p, false), 0.0, y0, t_end, o,
        [&](const ode::StepInterp<Vec3>& s) {
            if (sample_dt <= 0.0) {
                out.t.push_back(s.t1);
                out.y.push_back(s.y1);
            } else {
                while (next_sample <= s.t1) {
                    out.t.push_back(next_sample);
                    out.y.push_back(s(next_sample));
                    next_sample += sample_dt;
                }
            }
            return true;
        },
        in_phase_domain);
    switch (ex) {
        case ode::Exit::completed: out.exit = ExitFlag::completed; break;
        case ode::Exit::left_domain: out.exit = ExitFlag::left_domain; break;
        case ode::Exit::step_limit: out.exit = ExitFlag::step_limit; break;
    }
    return out;
}

struct SectionCrossing {
    double t;
    Vec3 y;
};

/// Stream crossings of the plane x = x_section with dx/dt > 0 (in the
/// integration's own time variable).  `on_cross` returning false stops.
template <typename OnCross>
ExitFlag integrate_with_section(const WgssParams& p, const Vec3& y0, double x_section,
                                double t_max, const IntegrateOptions& opt, OnCross&& on_cross,
                                bool backward = false) {
    ode::Options o{opt.rtol, opt.atol, 0.0, std::numeric_limits<double>::infinity(), opt.max_steps};
    const auto ex = ode::integrate<Vec3>(
        detail_orbit::rhs(p, backward), 0.0, y0, t_max, o,
        [&](const ode::StepInterp<Vec3>& s) {
            const double g0 = s.y0(0) - x_section;
            const double g1 = s.y1(0) - x_section;
            if (g0 < 0.0 && g1 >= 0.0) {
                // bisection on the Hermite interpolant
                double lo = s.t0, hi = s.t1;
                for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    ((s(mid)(0) - x_section) < 0.0 ? lo : hi) = mid;
                }
                const double tc = 0.5 * (lo + hi);
                const Vec3 yc = s(tc);
                const double xdot = backward ? -yc(1) : yc(1);
                if (xdot > 0.0 && !on_cross(SectionCrossing{tc, yc})) return false;
            }
            return true;
        },
        in_phase_domain);
    switch (ex) {
        case ode::Exit::completed: return ExitFlag::completed;
        case ode::Exit::left_domain: return ExitFlag::left_domain;
        default: return ExitFlag::step_limit;
    }
}

/// One application of the Poincare return map from a section point (y, z).
/// Returns the next upward crossing of x = x_section together with the
/// return time, or nothing if the orbit leaves the domain first.
inline std::optional<std::pair<Eigen::Vector2d, double>> return_map(
    const WgssParams& p, double x_section, const Eigen::Vector2d& yz, bool backward,
    const IntegrateOptions& opt, double t_budget = 400.0) {
    const Vec3 start{x_section, yz(0), yz(1)};
    std::optional<std::pair<Eigen::Vector2d, double>> hit;
    int count = 0;
    integrate_with_section(p, start, x_section, t_budget, opt,
                           [&](const SectionCrossing& c) {
                               // skip the t = 0 crossing itself
                               if (c.t < 1e-8) return true;
                               ++count;
                               hit = {{Eigen::Vector2d{c.y(1), c.y(2)}, c.t}};
                               return false;
                           },
                           backward);
    (void)count;
    return hit;
}

struct CycleInfo {
    double amplitude = 0.0;           // section-plane distance from (0, z0)
    double period = 0.0;
    Eigen::Vector2d section_point{0, 0}; // (y, z) on x = x0
    std::array<Cplx, 2> multipliers{};   // nontrivial Floquet multipliers
    bool stable = false;
    bool multipliers_reliable = true;    // false when |mu|-1 sits below FD noise
};

struct CycleSearchOptions {
    IntegrateOptions integ{1e-12, 1e-14};
    int max_newton = 40;
    double tol = 1e-10;         // fixed-point residual in section coordinates
    double fd_step = 1e-7;      // Jacobian finite-difference step
    double t_budget = 600.0;
    bool backward = false;      // locate via reverse-time return map
};

/// Newton iteration on the (forward or reverse time) return map.
inline std::optional<CycleInfo> find_cycle(const WgssParams& p, const Eigen::Vector2d& guess,
                                           const CycleSearchOptions& opt = {}) {
    const Equilibrium eq = Equilibrium::of(p);
    const double xs = eq.x0;
    Eigen::Vector2d r = guess;
    double resid = std::numeric_limits<double>::max();
    for (int it = 0; it < opt.max_newton; ++it) {
        const auto Pr = return_map(p, xs, r, opt.backward, opt.integ, opt.t_budget);
        if (!Pr) return std::nullopt;
        const Eigen::Vector2d F = Pr->first - r;
        resid = F.norm();
        if (resid < opt.tol * std::max(1.0, r.norm())) break;
        Eigen::Matrix2d J;
        for (int c = 0; c < 2; ++c) {
            Eigen::Vector2d rp = r, rm = r;
            const double h = opt.fd_step * std::max(1.0, std::abs(r(c)));
            rp(c) += h;
            rm(c) -= h;
            const auto Pp = return_map(p, xs, rp, opt.backward, opt.integ, opt.t_budget);
            const auto Pm = return_map(p, xs, rm, opt.backward, opt.integ, opt.t_budget);
            if (!Pp || !Pm) return std::nullopt;
            J.col(c) = (Pp->first - Pm->first) / (2.0 * h);
        }
        const Eigen::Matrix2d M = J - Eigen::Matrix2d::Identity();
        Eigen::Vector2d step = M.fullPivLu().solve(-F);
        // damped update: halve on residual increase
        for (int halve = 0; halve < 8; ++halve) {
            const Eigen::Vector2d cand = r + step;
            const auto Pc = return_map(p, xs, cand, opt.backward, opt.integ, opt.t_budget);
            if (Pc && (Pc->first - cand).norm() < resid) {
                r = cand;
                break;
            }
            step *= 0.5;
            if (halve == 7) r = r + step;
        }
    }
    if (!(resid < 100 * opt.tol * std::max(1.0, r.norm()))) return std::nullopt;

    // forward-time multipliers regardless of search direction
    Eigen::Matrix2d Jf;
    const auto P0 = return_map(p, xs, r, false, opt.integ, opt.t_budget);
    if (!P0) return std::nullopt;
    for (int c = 0; c < 2; ++c) {
        Eigen::Vector2d rp = r, rm = r;
        const double h = opt.fd_step * std::max(1.0, std::abs(r(c)));
        rp(c) += h;
        rm(c) -= h;
        const auto Pp = return_map(p, xs, rp, false, opt.integ, opt.t_budget);
        const auto Pm = return_map(p, xs, rm, false, opt.integ, opt.t_budget);
        if (!Pp || !Pm) return std::nullopt;
        Jf.col(c) = (Pp->first - Pm->first) / (2.0 * h);
    }
    const Eigen::EigenSolver<Eigen::Matrix2d> es(Jf);
    CycleInfo info;
    info.section_point = r;
    info.period = P0->second;
    info.amplitude = std::hypot(r(0), r(1) - eq.z0);
    info.multipliers = {es.eigenvalues()(0), es.eigenvalues()(1)};
    const double mu = std::max(std::abs(info.multipliers[0]), std::abs(info.multipliers[1]));
    info.stable = mu < 1.0;
    info.multipliers_reliable = std::abs(mu - 1.0) > 5e-6;
    return info;
}

struct CensusOptions {
    IntegrateOptions integ{1e-10, 1e-12};
    double transient_time = 400.0;
    double max_time = 4000.0;
    double cluster_tol = 1e-5;     // returns within this are one cycle
    double equilibrium_tol = 1e-6; // section amplitude below this means P0
    int settle_crossings = 6;      // consecutive near-identical returns
};

struct OrbitCensus {
    explicit OrbitCensus(const WgssParams& p) : params(p) {}
    WgssParams params;
    bool equilibrium_stable = false;
    std::vector<CycleInfo> cycles;
    bool inconclusive = false; // an initial condition produced no crossings
    int ic_count = 0;
};

/// Eigenvalue verdict on P0 for the supplied (possibly off-critical) params.
inline bool equilibrium_is_stable(const WgssParams& p) {
    const auto jet = analytic_jet(p, 1);
    const Eigen::EigenSolver<RMat> es(jet.jacobian());
    for (int i = 0; i < 3; ++i)
        if (es.eigenvalues()(i).real() >= 0.0) return false;
    return true;
}

/// Attractor census by forward integration from a grid of initial
/// conditions; converged return sequences are deduplicated, Newton-polished
/// and classified by their forward multipliers.
inline OrbitCensus poincare_census(const WgssParams& p, const std::vector<Vec3>& ics,
                                   const CensusOptions& opt = {}) {
    const Equilibrium eq = Equilibrium::of(p);
    OrbitCensus census(p);
    census.ic_count = static_cast<int>(ics.size());
    census.equilibrium_stable = equilibrium_is_stable(p);

    std::vector<Eigen::Vector2d> candidates;
    for (const Vec3& ic : ics) {
        std::vector<SectionCrossing> tail;
        const auto flag = integrate_with_section(
            p, ic, eq.x0, opt.max_time, opt.integ,
            [&](const SectionCrossing& c) {
                if (c.t < opt.transient_time) return true;
                tail.push_back(c);
                if (static_cast<int>(tail.size()) < opt.settle_crossings + 1) return true;
                const auto& a = tail[tail.size() - 1];
                bool settled = true;
                for (int m = 1; m <= opt.settle_crossings; ++m) {
                    const auto& bb = tail[tail.size() - 1 - m];
                    if ((Eigen::Vector2d{a.y(1), a.y(2)} - Eigen::Vector2d{bb.y(1), bb.y(2)}).norm() >
                        opt.cluster_tol)
                        settled = false;
                }
                return !settled;
            },
            false);
        if (tail.empty()) {
            if (flag == ExitFlag::completed) census.inconclusive = true;
            continue;
        }
        const auto& last = tail.back();
        const Eigen::Vector2d r{last.y(1), last.y(2)};
        if (std::hypot(r(0), r(1) - eq.z0) < opt.equilibrium_tol) continue; // fell into P0
        bool dup = false;
        for (const auto& c : candidates)
            if ((c - r).norm() < 10 * opt.cluster_tol) dup = true;
        if (!dup) candidates.push_back(r);
    }

    for (const auto& cand : candidates) {
        CycleSearchOptions cs;
        cs.integ = IntegrateOptions{1e-12, 1e-14};
        if (auto info = find_cycle(p, cand, cs)) {
            bool dup = false;
            for (const auto& c : census.cycles)
                if ((c.section_point - info->section_point).norm() < 10 * opt.cluster_tol) dup = true;
            if (!dup) census.cycles.push_back(*info);
        }
    }
    return census;
}

/// Fit of amplitude ~ C (eps_c - eps)^nu for the stable cycle born at a
/// supercritical point: returns the exponent nu over the given fractions
/// eps = frac * eps_c.
struct ScalingFit {
    double exponent = 0.0;
    std::vector<double> amplitudes;
};

inline ScalingFit amplitude_scaling_exponent(double beta, double alpha, double kappa,
                                             std::span<const double> eps_fracs,
                                             const CensusOptions& opt = {}) {
    const double ec = epsilon_critical(beta, alpha, kappa);
    ScalingFit fit;
    std::vector<double> lx, ly;
    for (const double frac : eps_fracs) {
        const WgssParams p(beta, alpha, frac * ec, kappa);
        const Equilibrium eq = Equilibrium::of(p);
        // seed from a small kick along the section, let the census settle it
        Vec3 ic{eq.x0, 0.02, eq.z0 + 0.02};
        std::vector<Vec3> ics{ic};
        const auto census = poincare_census(p, ics, opt);
        if (census.cycles.empty()) {
            fit.amplitudes.push_back(0.0);
            continue;
        }
        const double amp = census.cycles.front().amplitude;
        fit.amplitudes.push_back(amp);
        lx.push_back(std::log(ec - frac * ec));
        ly.push_back(std::log(amp));
    }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Radial drift profile.
//
// Near a weakly hierarchical Hopf point the nontrivial return-map
// multipliers sit within 1e-6 of unity and finite differences cannot
// classify stability.  The drift of u = |w|^2 per turn, measured in the
// center-manifold chart w recovered by inverting the immersion
// x = P0 + w q + conj(w q) + sum c_jk w^j wbar^k, resolves the radial
// dynamics du/dt = 2u (eta + l1 u + l2 u^2 + ...) directly: the sign
// pattern of the drift across a radius range exhibits every cycle and its
// stability.
// ---------------------------------------------------------------------------

struct DriftMeasurement {
    double u = 0.0;              // mean |w|^2 over the run
    double drift_per_turn = 0.0; // relative change of u per return
    int turns = 0;
};

class ChartUnwinder {
public:
    ChartUnwinder(const HopfFrame& frame, const CoefficientLadder& ladder, const Vec3& origin)
        : origin_(origin), p_(frame.p), q_(frame.q) {
        for (const auto& [j, k] : ladder.levels())
            tail_.push_back({j, k, ladder.c(j, k)});
    }

    Cplx operator()(const Vec3& x) const {
        const CVec d = (x - origin_).cast<Cplx>();
        Cplx w = p_.dot(d);
        for (int it = 0; it < 60; ++it) {
            const Cplx wn = p_.dot(CVec(d - tail(w)));
            if (std::abs(wn - w) < 1e-16) return wn;
            w += 0.7 * (wn - w);
        }
        return w;
    }

    Vec3 immersion(Cplx w) const {
        CVec x = w * q_ + std::conj(w) * q_.conjugate() + tail(w);
        return origin_ + x.real();
    }

private:
    CVec tail(Cplx w) const {
        CVec s = CVec::Zero(q_.size());
        const Cplx wb = std::conj(w);
        for (const auto& term : tail_)
            s += std::pow(w, term.j) * std::pow(wb, term.k) * term.c;
        return s;
    }
    struct Term {
        int j, k;
        CVec c;
    };
    Vec3 origin_;
    CVec p_, q_;
    std::vector<Term> tail_;
};

/// Measure the per-turn relative drift of u = |w|^2 starting at radius
/// sqrt(u0).  Phase-locked sampling: u is recorded at Im w = 0, Re w > 0.
inline DriftMeasurement measure_radial_drift(const WgssParams& p, const ChartUnwinder& chart,
                                             double u0, int turns,
                                             const IntegrateOptions& opt = {1e-12, 1e-14}) {
    const Vec3 start = chart.immersion(Cplx{std::sqrt(u0), 0.0});
    std::vector<double> us;
    std::vector<double> ts;
    double prev_im = 0.0;
    bool have_prev = false;
    double prev_t = 0.0;
    Cplx prev_w;

    const double t_max = (turns + 4) * 64.0; // generous; crossings terminate earlier
    ode::Options o{opt.rtol, opt.atol, 0.0, std::numeric_limits<double>::infinity(), opt.max_steps};
    ode::integrate<Vec3>(
        detail_orbit::rhs(p, false), 0.0, start, t_max, o,
        [&](const ode::StepInterp<Vec3>& s) {
            const Cplx w1 = chart(s.y1);
            if (have_prev && prev_im < 0.0 && w1.imag() >= 0.0 && w1.real() > 0.0) {
                double lo = prev_t, hi = s.t1;
                for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const Vec3 ym = (mid >= s.t0) ? s(mid) : s.y0; // previous step boundary edge case
                    (chart(ym).imag() < 0.0 ? lo : hi) = mid;
                }
                const double tc = 0.5 * (lo + hi);
                const Vec3 yc = (tc >= s.t0) ? s(tc) : s.y0;
                const Cplx wc = chart(yc);
                us.push_back(std::norm(wc));
                ts.push_back(tc);
            }
            prev_im = w1.imag();
            prev_w = w1;
            have_prev = true;
            prev_t = s.t1;
            return static_cast<int>(us.size()) < turns + 3;
        },
        in_phase_domain);

    DriftMeasurement m;
    if (us.size() < 8) return m;
    // discard the first few returns: transverse transients
    const std::size_t skip = 3;
    const double u_first = us[skip], u_last = us.back();
    m.turns = static_cast<int>(us.size() - 1 - skip);
    double mean = 0.0;
    for (std::size_t i = skip; i < us.size(); ++i) mean += us[i];
    mean /= static_cast<double>(us.size() - skip);
    m.u = mean;
    m.drift_per_turn = (u_last - u_first) / u_first / static_cast<double>(m.turns);
    return m;
}

} // namespace hopf::wgss
