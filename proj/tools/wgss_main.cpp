// Command-line front end for the governor bifurcation engine.
//
// Subcommands:
//   coeffs     Lyapunov coefficients and center-manifold data at one point
//   stability  equilibrium, critical damping and spectrum at one point
//   locus      scan | curves | find-q on the critical hypersurface
//   orbits     trajectories, attractor census, cycle search, drift profile
//
// Exit codes: 0 success, 1 usage error, 2 mathematical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "hopf/io.hpp"
#include "hopf/parallel.hpp"

namespace fs = std::filesystem;
using namespace hopf;
using namespace hopf::wgss;

namespace {

struct ParamFlags {
    double beta = -1, alpha = -1, epsilon = -1, kappa = -1;
    bool eps_critical = false;
    std::string config;

    void attach(CLI::App* cmd) {
        cmd->add_option("--beta", beta, "beta in (0,1)");
        cmd->add_option("--alpha", alpha, "alpha > 0");
        cmd->add_option("--epsilon", epsilon, "epsilon > 0");
        cmd->add_flag("--eps-critical", eps_critical,
                      "use epsilon = eps_c(beta, alpha, kappa)");
        cmd->add_option("--kappa", kappa, "kappa in [0,1)");
        cmd->add_option("--config", config, "JSON parameter file (nondimensional or physical)");
    }

    WgssParams resolve() const {
        if (!config.empty()) {
            if (beta >= 0 || alpha >= 0 || epsilon >= 0 || kappa >= 0 || eps_critical)
                throw std::invalid_argument("--config excludes inline parameter flags");
            return load_params(config).params;
        }
        if (beta < 0 || alpha < 0 || kappa < 0)
            throw std::invalid_argument("need --beta, --alpha, --kappa (or --config)");
        double eps = epsilon;
        if (eps_critical) {
            if (epsilon >= 0)
                throw std::invalid_argument("--epsilon conflicts with --eps-critical");
            eps = epsilon_critical(beta, alpha, kappa);
        }
        if (eps < 0) throw std::invalid_argument("need --epsilon or --eps-critical");
        return WgssParams(beta, alpha, eps, kappa);
    }
};

void cmd_coeffs(const ParamFlags& pf, int order, bool dump_h, const std::string& json_path) {
    const WgssParams p = pf.resolve();
    const auto jet = analytic_jet(p, 2 * order + 1);
    const auto frame = make_frame(jet);
    const auto lad = run_ladder(frame, order);

    std::printf("beta = %s  alpha = %s  kappa = %s\n", fmt_human(p.beta).c_str(),
                fmt_human(p.alpha).c_str(), fmt_human(p.kappa).c_str());
    std::printf("epsilon = %s  (eps_c = %s)\n", fmt_human(p.epsilon).c_str(),
                fmt_human(epsilon_critical(p.beta, p.alpha, p.kappa)).c_str());
    std::printf("omega0 = %s\n", fmt_human(lad.omega0()).c_str());
    static const char* gname[5] = {nullptr, "G21", "G32", "G43", "G54"};
    for (int m = 1; m <= order; ++m) {
        const Cplx g = lad.G(m);
        std::printf("%s = %s %si\n", gname[m], fmt_human(g.real()).c_str(),
                    fmt_signed(g.imag()).c_str());
    }
    if (dump_h) {
        for (const auto& [j, k] : lad.levels()) {
            const CVec h = lad.h(j, k);
            std::printf("h%d%d =", j, k);
            for (int i = 0; i < h.size(); ++i)
                std::printf(" (%s %si)", fmt_human(h(i).real()).c_str(),
                            fmt_signed(h(i).imag()).c_str());
            std::printf("\n");
        }
    }
    for (int m = 1; m <= order; ++m) std::printf("l%d = %s\n", m, fmt_human(lad.l(m)).c_str());
    if (!json_path.empty()) {
        write_file(json_path, ladder_to_json(lad).dump(2) + "\n");
        std::printf("ladder dump written to %s\n", json_path.c_str());
    }
}

void cmd_stability(const ParamFlags& pf) {
    const WgssParams p = pf.resolve();
    const double ec = epsilon_critical(p.beta, p.alpha, p.kappa);
    const auto cpc = char_poly_coeffs(p);
    const bool stable = routh_hurwitz_stable(cpc[0], cpc[1], cpc[2]);
    const auto jet = analytic_jet(p, 1);
    const Eigen::EigenSolver<RMat> es(jet.jacobian());
    const Equilibrium eq = Equilibrium::of(p);
    std::printf("P0 = (%s, 0, %s)\n", fmt_human(eq.x0).c_str(), fmt_human(eq.z0).c_str());
    std::printf("epsilon = %s  eps_c = %s\n", fmt_human(p.epsilon).c_str(), fmt_human(ec).c_str());
    std::printf("equilibrium: %s (Routh-Hurwitz)\n", stable ? "stable" : "unstable");
    for (int i = 0; i < 3; ++i)
        std::printf("lambda_%d = %s %si\n", i + 1, fmt_human(es.eigenvalues()(i).real()).c_str(),
                    fmt_signed(es.eigenvalues()(i).imag()).c_str());
    std::printf("nonuniformity eta = %s\n", fmt_human(nonuniformity(p.beta, p.kappa)).c_str());
}

GridAxis parse_axis(const std::vector<double>& v, const char* name) {
    if (v.size() != 3 || v[2] < 1)
        throw std::invalid_argument(std::string(name) + " expects LO HI N");
    return GridAxis{v[0], v[1], static_cast<int>(v[2])};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hopf bifurcation analysis of the spring-loaded governor"};
    app.require_subcommand(1);
    std::string out_dir = ".";
    int workers = 0;
    double tol = 1e-8;
    app.add_option("--out-dir", out_dir, "directory for output artifacts")->capture_default_str();
    app.add_option("--workers", workers, "worker threads (0: WGSS_WORKERS env or all cores)");
    app.add_option("--tol", tol, "convergence tolerance for Newton-based commands")
        ->capture_default_str();

    auto* coeffs = app.add_subcommand("coeffs", "Lyapunov coefficients at one parameter point");
    ParamFlags coeffs_params;
    coeffs_params.attach(coeffs);
    int order = 4;
    bool dump_h = false;
    std::string coeffs_json;
    coeffs->add_option("--order", order, "highest coefficient l_order (1..4)")
        ->check(CLI::Range(1, 4))
        ->capture_default_str();
    coeffs->add_flag("--dump-h", dump_h, "print every computed h_jk");
    coeffs->add_option("--json", coeffs_json, "write the ladder dump JSON here");

    auto* stability = app.add_subcommand("stability", "equilibrium stability at one point");
    ParamFlags stability_params;
    stability_params.attach(stability);

    auto* locus = app.add_subcommand("locus", "degenerate-Hopf loci on eps = eps_c");
    locus->require_subcommand(1);

    auto* scan = locus->add_subcommand("scan", "sign field of l1 over a grid");
    std::vector<double> ax_beta, ax_alpha, ax_kappa;
    int scan_order = 0, ladder_check = 0;
    scan->add_option("--beta-range", ax_beta, "LO HI N")->expected(3)->required();
    scan->add_option("--alpha-range", ax_alpha, "LO HI N")->expected(3)->required();
    scan->add_option("--kappa-range", ax_kappa, "LO HI N")->expected(3)->required();
    scan->add_option("--order", scan_order, "also compute l1..l_order per point (0: oracle only)")
        ->check(CLI::Range(0, 4));
    scan->add_option("--ladder-check", ladder_check,
                     "cross-check the sign oracle against the ladder on N random points");

    auto* curves = locus->add_subcommand("curves", "trace the l1 = l2 = 0 curves");
    double k_from = 0.45, k_to = 0.95, k_step = 0.05;
    std::vector<double> seed_c1{0.72216, 0.33319}, seed_c2{0.86828, 0.85050};
    double c2_from = 0.0, c2_to = 0.98;
    curves->add_option("--kappa-from", k_from, "C1 start kappa")->capture_default_str();
    curves->add_option("--kappa-to", k_to, "C1 end kappa")->capture_default_str();
    curves->add_option("--c2-kappa-from", c2_from, "C2 start kappa")->capture_default_str();
    curves->add_option("--c2-kappa-to", c2_to, "C2 end kappa")->capture_default_str();
    curves->add_option("--kappa-step", k_step, "continuation step")->capture_default_str();
    curves->add_option("--seed-c1", seed_c1, "BETA ALPHA seed for C1")->expected(2);
    curves->add_option("--seed-c2", seed_c2, "BETA ALPHA seed for C2")->expected(2);

    auto* findq = locus->add_subcommand("find-q", "Newton search for the codimension-4 point");
    std::vector<double> q_seed{0.93592, 1.02731, 0.9};
    std::string q_json;
    findq->add_option("--seed", q_seed, "BETA ALPHA KAPPA seed")->expected(3);
    findq->add_option("--json", q_json, "write the full report JSON here");

    auto* orbits = app.add_subcommand("orbits", "numerical integration and attractor census");
    ParamFlags orbit_params;
    orbit_params.attach(orbits);
    bool do_census = false;
    std::vector<double> ic_flat;
    double t_end = 1000.0, sample_dt = 0.1, rtol = 1e-10;
    std::string traj_csv;
    std::vector<double> cycle_guess;
    bool backward = false;
    std::vector<double> drift_radii;
    int drift_turns = 250;
    orbits->add_flag("--census", do_census, "cluster attractors from the initial conditions");
    orbits->add_option("--ic", ic_flat, "initial condition X Y Z (repeatable triple)");
    orbits->add_option("--t-end", t_end, "integration horizon")->capture_default_str();
    orbits->add_option("--sample-dt", sample_dt, "trajectory sampling step")->capture_default_str();
    orbits->add_option("--rtol", rtol, "integrator relative tolerance")->capture_default_str();
    orbits->add_option("--trajectory", traj_csv, "integrate the first IC and write CSV here");
    orbits->add_option("--find-cycle", cycle_guess, "Y Z section guess for Newton cycle search")
        ->expected(2);
    orbits->add_flag("--backward", backward, "search with the reverse-time return map");
    orbits->add_option("--drift-profile", drift_radii,
                       "radial drift of |w|^2 at these u values");
    orbits->add_option("--drift-turns", drift_turns, "returns per drift sample")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*coeffs) cmd_coeffs(coeffs_params, order, dump_h, coeffs_json);

        if (*stability) cmd_stability(stability_params);

        if (*scan) {
            const auto gb = parse_axis(ax_beta, "--beta-range");
            const auto ga = parse_axis(ax_alpha, "--alpha-range");
            const auto gk = parse_axis(ax_kappa, "--kappa-range");
            auto result = scan_l1_surface(gb, ga, gk, ladder_check);
            std::string csv;
            if (scan_order > 0) {
                std::vector<std::array<double, 4>> ls(result.field.size());
                parallel_for(result.field.size(), workers, [&](std::size_t i) {
                    const auto& pt = result.field[i];
                    const auto lad = ladder_at(pt.beta, pt.alpha, pt.kappa, scan_order);
                    for (int m = 1; m <= scan_order; ++m)
                        ls[i][static_cast<std::size_t>(m - 1)] = lad.l(m);
                });
                std::ostringstream os;
                os << "beta,alpha,kappa,epsilon_c,l1,l2,l3,l4,g1,sign_l1\n";
                for (std::size_t i = 0; i < result.field.size(); ++i) {
                    const auto& pt = result.field[i];
                    os << fmt_full(pt.beta) << ',' << fmt_full(pt.alpha) << ','
                       << fmt_full(pt.kappa) << ','
                       << fmt_full(epsilon_critical(pt.beta, pt.alpha, pt.kappa));
                    for (int m = 0; m < 4; ++m)
                        os << ',' << (m < scan_order ? fmt_full(ls[i][static_cast<std::size_t>(m)]) : "");
                    os << ',' << fmt_full(pt.g1) << ',' << pt.sign << '\n';
                }
                csv = os.str();
            } else {
                csv = scan_to_csv(result);
            }
            fs::create_directories(out_dir);
            write_file((fs::path(out_dir) / "l1_scan.csv").string(), csv);
            write_file((fs::path(out_dir) / "l1_zero_mesh.json").string(),
                       scan_mesh_to_json(result).dump(2) + "\n");
            std::printf("scan: %zu grid points, %zu zero crossings -> %s\n", result.field.size(),
                        result.zeros.size(), out_dir.c_str());
        }

        if (*curves) {
            TraceOptions topt;
            topt.kappa_step = k_step;
            topt.tol = tol;
            const auto c1 = trace_l2_zero_curve(k_from, k_to, seed_c1[0], seed_c1[1], topt);
            const auto c2 = trace_l2_zero_curve(c2_from, c2_to, seed_c2[0], seed_c2[1], topt);
            fs::create_directories(out_dir);
            write_file((fs::path(out_dir) / "curve_c1.csv").string(), curve_to_csv(c1));
            write_file((fs::path(out_dir) / "curve_c2.csv").string(), curve_to_csv(c2));
            std::printf("curves: C1 %zu points, C2 %zu points -> %s\n", c1.size(), c2.size(),
                        out_dir.c_str());
        }

        if (*findq) {
            FindQOptions fq;
            fq.tol = tol;
            const auto qr = find_codim4_point(q_seed[0], q_seed[1], q_seed[2], fq);
            std::printf("Q: beta = %.5f  alpha = %.5f  kappa = %.5f  eps_c = %.5f\n", qr.point.beta,
                        qr.point.alpha, qr.point.kappa, qr.point.epsilon_c);
            std::printf("l = (%s, %s, %s, %s)  codim = %d\n", fmt_human(qr.point.l[0]).c_str(),
                        fmt_human(qr.point.l[1]).c_str(), fmt_human(qr.point.l[2]).c_str(),
                        fmt_human(qr.point.l[3]).c_str(), qr.point.codim);
            std::printf("grad l1 = (%s, %s, %s)  [beta, alpha, kappa]\n",
                        fmt_human(qr.transversality.grad_l1(0)).c_str(),
                        fmt_human(qr.transversality.grad_l1(1)).c_str(),
                        fmt_human(qr.transversality.grad_l1(2)).c_str());
            std::printf("det(grad l1, grad l2, grad l3) = %s   d(Re lambda)/d eps = %s\n",
                        fmt_human(qr.transversality.det_bka).c_str(),
                        fmt_human(qr.transversality.crossing_speed).c_str());
            if (!q_json.empty()) write_file(q_json, q_result_to_json(qr).dump(2) + "\n");
        }

        if (*orbits) {
            const WgssParams p = orbit_params.resolve();
            const Equilibrium eq = Equilibrium::of(p);
            if (ic_flat.size() % 3 != 0)
                throw std::invalid_argument("--ic expects triples X Y Z");
            std::vector<Vec3> ics;
            for (std::size_t i = 0; i + 2 < ic_flat.size(); i += 3)
                ics.push_back(Vec3{ic_flat[i], ic_flat[i + 1], ic_flat[i + 2]});
            IntegrateOptions iopt;
            iopt.rtol = rtol;
            iopt.atol = rtol * 1e-2;

            if (!traj_csv.empty()) {
                const Vec3 ic = ics.empty() ? Vec3{eq.x0 + 0.05, 0.0, eq.z0} : ics.front();
                const auto tr = integrate(p, ic, t_end, iopt, sample_dt);
                const auto parent = fs::path(traj_csv).parent_path();
                if (!parent.empty()) fs::create_directories(parent);
                write_file(traj_csv, trajectory_to_csv(tr));
                std::printf("trajectory: %zu samples, exit %s -> %s\n", tr.t.size(),
                            tr.exit == ExitFlag::completed        ? "completed"
                            : tr.exit == ExitFlag::left_domain ? "left-domain"
                                                               : "step-limit",
                            traj_csv.c_str());
            }

            if (!cycle_guess.empty()) {
                CycleSearchOptions copt;
                copt.backward = backward;
                const auto cyc =
                    find_cycle(p, Eigen::Vector2d{cycle_guess[0], cycle_guess[1]}, copt);
                if (!cyc) throw ContinuationError("find-cycle: no fixed point from this guess");
                std::printf("cycle: amplitude = %s period = %s stable = %s  |mu| = (%s, %s)\n",
                            fmt_human(cyc->amplitude).c_str(), fmt_human(cyc->period).c_str(),
                            cyc->stable ? "yes" : "no",
                            fmt_human(std::abs(cyc->multipliers[0])).c_str(),
                            fmt_human(std::abs(cyc->multipliers[1])).c_str());
            }

            if (do_census) {
                if (ics.empty())
                    for (const double r : {0.02, 0.05, 0.1, 0.2})
                        ics.push_back(Vec3{eq.x0 + r, 0.0, eq.z0});
                CensusOptions copt;
                copt.integ = iopt;
                copt.max_time = t_end;
                const auto census = poincare_census(p, ics, copt);
                fs::create_directories(out_dir);
                write_file((fs::path(out_dir) / "census.json").string(),
                           census_to_json(census).dump(2) + "\n");
                std::printf("census: equilibrium %s, %zu cycle(s)%s -> %s\n",
                            census.equilibrium_stable ? "stable" : "unstable",
                            census.cycles.size(),
                            census.inconclusive ? " (inconclusive ICs present)" : "",
                            out_dir.c_str());
                for (const auto& c : census.cycles)
                    std::printf("  cycle amplitude=%s period=%s stable=%s\n",
                                fmt_human(c.amplitude).c_str(), fmt_human(c.period).c_str(),
                                c.stable ? "yes" : "no");
            }

            if (!drift_radii.empty()) {
                const double ec = epsilon_critical(p.beta, p.alpha, p.kappa);
                const auto jet_c = analytic_jet(WgssParams(p.beta, p.alpha, ec, p.kappa), 9);
                const auto frame_c = make_frame(jet_c);
                const auto lad_c = run_ladder(frame_c, 4);
                const ChartUnwinder chart(frame_c, lad_c, eq.state());
                for (const double u : drift_radii) {
                    const auto m = measure_radial_drift(p, chart, u, drift_turns, iopt);
                    std::printf("drift u=%s: per-turn relative drift = %s (%d turns)\n",
                                fmt_human(u).c_str(), fmt_human(m.drift_per_turn).c_str(),
                                m.turns);
                }
            }
        }
        return 0;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
