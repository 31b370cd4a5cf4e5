#pragma once

// Serialization: parameter files, ladder dumps, locus CSV/JSON artifacts,
// trajectory CSV and census JSON.  Machine outputs carry full double
// precision and a schema tag; nothing here writes timestamps, so identical
// inputs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hopf/ladder.hpp"
#include "hopf/locus.hpp"
#include "hopf/orbit.hpp"
#include "hopf/wgss.hpp"

namespace hopf::wgss {

using nlohmann::json;

inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_human(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string fmt_signed(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%+.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Parameter files: either nondimensional {beta, alpha, epsilon, kappa} or
// the nine physical constants {m, l, b, g, c, mu, I, F, k}.
// ---------------------------------------------------------------------------

enum class ParamSource { nondimensional, physical };

struct LoadedParams {
    WgssParams params;
    ParamSource source;
};

inline LoadedParams params_from_json(const json& j) {
    if (j.contains("beta")) {
        double eps;
        if (j.contains("epsilon")) {
            eps = j.at("epsilon").get<double>();
        } else if (j.value("eps_critical", false)) {
            eps = epsilon_critical(j.at("beta").get<double>(), j.at("alpha").get<double>(),
                                   j.at("kappa").get<double>());
        } else {
            throw std::invalid_argument("parameter file: need epsilon or eps_critical: true");
        }
        return {WgssParams(j.at("beta").get<double>(), j.at("alpha").get<double>(), eps,
                           j.at("kappa").get<double>()),
                ParamSource::nondimensional};
    }
    if (j.contains("m")) {
        PhysicalParams ph{j.at("m").get<double>(), j.at("l").get<double>(), j.at("b").get<double>(),
                          j.at("g").get<double>(), j.at("c").get<double>(), j.at("mu").get<double>(),
                          j.at("I").get<double>(), j.at("F").get<double>(), j.at("k").get<double>()};
        return {ph.to_nondimensional(), ParamSource::physical};
    }
    throw std::invalid_argument("parameter file: expected nondimensional or physical keys");
}

inline LoadedParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open parameter file: " + path);
    json j;
    in >> j;
    return params_from_json(j);
}

// ---------------------------------------------------------------------------
// Ladder dump
// ---------------------------------------------------------------------------

inline json ladder_to_json(const CoefficientLadder& lad) {
    json j;
    j["schema"] = "wgss-hopf/ladder-dump/1";
    j["order"] = lad.order();
    j["omega0"] = lad.omega0();
    j["convention"] = {{"component", lad.convention().component},
                       {"value", {lad.convention().value.real(), lad.convention().value.imag()}}};
    json hs = json::object();
    for (const auto& [jj, kk] : lad.levels()) {
        const CVec h = lad.h(jj, kk);
        json arr = json::array();
        for (int i = 0; i < h.size(); ++i) arr.push_back({h(i).real(), h(i).imag()});
        hs["h" + std::to_string(jj) + std::to_string(kk)] = arr;
    }
    j["h"] = hs;
    static const char* gnames[5] = {nullptr, "G21", "G32", "G43", "G54"};
    static const char* lnames[5] = {nullptr, "l1", "l2", "l3", "l4"};
    for (int m = 1; m <= lad.order(); ++m) {
        const Cplx g = lad.G(m);
        j[gnames[m]] = {g.real(), g.imag()};
        j[lnames[m]] = lad.l(m);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Locus artifacts
// ---------------------------------------------------------------------------

/// CSV of a grid scan: one row per grid point.
inline std::string scan_to_csv(const ScanResult& scan) {
    std::ostringstream os;
    os << "beta,alpha,kappa,epsilon_c,g1,sign_l1\n";
    for (const auto& pt : scan.field)
        os << fmt_full(pt.beta) << ',' << fmt_full(pt.alpha) << ',' << fmt_full(pt.kappa) << ','
           << fmt_full(epsilon_critical(pt.beta, pt.alpha, pt.kappa)) << ',' << fmt_full(pt.g1)
           << ',' << pt.sign << '\n';
    return os.str();
}

/// JSON mesh of the refined l1 = 0 zero set with region labels.
inline json scan_mesh_to_json(const ScanResult& scan) {
    json j;
    j["schema"] = "wgss-hopf/l1-zero-mesh/1";
    j["regions"] = {{"S", "l1 < 0"}, {"U", "l1 > 0"}};
    json zs = json::array();
    for (const auto& z : scan.zeros)
        zs.push_back({{"beta", z.beta}, {"alpha", z.alpha}, {"kappa", z.kappa},
                      {"epsilon_c", epsilon_critical(z.beta, z.alpha, z.kappa)}});
    j["zeros"] = zs;
    return j;
}

/// CSV of traced curve points (or any list of critical points with l data).
inline std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream os;
    os << "kappa,beta,alpha,epsilon_c,l1,l2,l3\n";
    for (const auto& pt : curve)
        os << fmt_full(pt.kappa) << ',' << fmt_full(pt.beta) << ',' << fmt_full(pt.alpha) << ','
           << fmt_full(epsilon_critical(pt.beta, pt.alpha, pt.kappa)) << ',' << fmt_full(pt.l[0])
           << ',' << fmt_full(pt.l[1]) << ',' << fmt_full(pt.l[2]) << '\n';
    return os.str();
}

inline json q_result_to_json(const QResult& qr) {
    json j;
    j["schema"] = "wgss-hopf/codim4-point/1";
    j["point"] = {{"beta", qr.point.beta},     {"alpha", qr.point.alpha},
                  {"kappa", qr.point.kappa},   {"epsilon_c", qr.point.epsilon_c},
                  {"l1", qr.point.l[0]},       {"l2", qr.point.l[1]},
                  {"l3", qr.point.l[2]},       {"l4", qr.point.l[3]},
                  {"codim", qr.point.codim}};
    const auto& tr = qr.transversality;
    j["gradients"] = {{"l1", {tr.grad_l1(0), tr.grad_l1(1), tr.grad_l1(2)}},
                      {"l2", {tr.grad_l2(0), tr.grad_l2(1), tr.grad_l2(2)}},
                      {"l3", {tr.grad_l3(0), tr.grad_l3(1), tr.grad_l3(2)}},
                      {"order", {"beta", "alpha", "kappa"}}};
    j["det_beta_kappa_alpha"] = tr.det_bka;
    j["crossing_speed"] = tr.crossing_speed;
    j["iterations"] = qr.iterations;
    j["residual_history"] = qr.residual_history;
    return j;
}

// ---------------------------------------------------------------------------
// Orbit artifacts
// ---------------------------------------------------------------------------

inline std::string trajectory_to_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "t,x,y,z\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        os << fmt_full(tr.t[i]) << ',' << fmt_full(tr.y[i](0)) << ',' << fmt_full(tr.y[i](1))
           << ',' << fmt_full(tr.y[i](2)) << '\n';
    return os.str();
}

inline json census_to_json(const OrbitCensus& census) {
    json j;
    j["schema"] = "wgss-hopf/orbit-census/1";
    j["params"] = {{"beta", census.params.beta},
                   {"alpha", census.params.alpha},
                   {"epsilon", census.params.epsilon},
                   {"kappa", census.params.kappa}};
    j["equilibrium_stable"] = census.equilibrium_stable;
    j["inconclusive"] = census.inconclusive;
    j["initial_conditions"] = census.ic_count;
    json cycles = json::array();
    for (const auto& c : census.cycles) {
        cycles.push_back({{"amplitude", c.amplitude},
                          {"period", c.period},
                          {"section_y", c.section_point(0)},
                          {"section_z", c.section_point(1)},
                          {"multipliers", {{c.multipliers[0].real(), c.multipliers[0].imag()},
                                           {c.multipliers[1].real(), c.multipliers[1].imag()}}},
                          {"stable", c.stable},
                          {"multipliers_reliable", c.multipliers_reliable}});
    }
    j["cycles"] = cycles;
    return j;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace hopf::wgss
