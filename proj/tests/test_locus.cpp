#include "test_support.hpp"

#include "hopf/io.hpp"

using namespace hopf;
using namespace testutil;
using Catch::Approx;

namespace {

struct TableRow {
    double kappa, alpha, beta, l3;
};

// published curve data used as seeds and as expected values
const std::vector<TableRow> kC1Rows = {
    {0.45, 0.33319, 0.72216, -0.91310}, {0.70, 0.70113, 0.69201, -0.70006},
    {0.95, 0.96114, 0.63600, -0.52217}};
const std::vector<TableRow> kC2Rows = {
    {0.00, 0.85050, 0.86828, 0.39050}, {0.50, 0.97602, 0.90042, 0.60637},
    {0.90, 1.02731, 0.93592, 0.01665}, {0.92, 1.03020, 0.93585, -0.20674},
    {0.98, 1.04319, 0.93201, -1.09289}};

/// alpha on the l1 = 0 surface at given (beta, kappa), from the G1 root.
double alpha_on_l1_zero(double beta, double kappa) {
    double lo = 1e-3, hi = 3.0;
    double glo = wgss::g1_polynomial(beta, lo, kappa);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = wgss::g1_polynomial(beta, mid, kappa);
        if (glo * gm <= 0.0) hi = mid;
        else { lo = mid; glo = gm; }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("curve points reproduce the reference rows", "[locus][golden]") {
    for (const auto& row : kC1Rows) {
        const auto pt = wgss::solve_curve_point(row.kappa, row.beta, row.alpha);
        CHECK(pt.beta == Approx(row.beta).margin(2e-5));
        CHECK(pt.alpha == Approx(row.alpha).margin(2e-5));
        CHECK(std::abs(pt.l[0]) < 1e-8);
        CHECK(std::abs(pt.l[1]) < 1e-8);
        CHECK(pt.l[2] == Approx(row.l3).epsilon(5e-3));
    }
    for (const auto& row : kC2Rows) {
        const auto pt = wgss::solve_curve_point(row.kappa, row.beta, row.alpha);
        CHECK(pt.beta == Approx(row.beta).margin(2e-5));
        CHECK(pt.alpha == Approx(row.alpha).margin(2e-5));
        CHECK(pt.l[2] == Approx(row.l3).epsilon(5e-3));
    }
}

TEST_CASE("continuation traces a curve segment", "[locus]") {
    wgss::TraceOptions opt;
    opt.kappa_step = 0.05;
    const auto curve = wgss::trace_l2_zero_curve(0.45, 0.7, 0.72216, 0.33319, opt);
    REQUIRE(curve.size() == 6);
    for (const auto& pt : curve) {
        CHECK(std::abs(pt.l[0]) < 1e-8);
        CHECK(std::abs(pt.l[1]) < 1e-8);
        CHECK(pt.l[2] < 0.0); // negative branch throughout
    }
    CHECK(curve.back().beta == Approx(0.69201).margin(2e-5));
    CHECK(curve.back().alpha == Approx(0.70113).margin(2e-5));
}

TEST_CASE("codimension-4 point search", "[locus][golden]") {
    const auto& qr = refined_q();
    CHECK(qr.point.beta == Approx(0.93593).margin(1e-4));
    CHECK(qr.point.alpha == Approx(1.02753).margin(1e-4));
    CHECK(qr.point.kappa == Approx(0.90164).margin(1e-4));
    CHECK(qr.point.epsilon_c == Approx(0.73522).margin(1e-4));
    CHECK(qr.point.codim == 4);
    CHECK(qr.point.l[3] < 0.0);
    CHECK(qr.iterations <= 50);
    REQUIRE(qr.residual_history.size() >= 2);
    CHECK(qr.residual_history.back() < 1e-8);

    // gradient of l1, reference components ordered (beta, kappa, alpha)
    const auto& g1 = qr.transversality.grad_l1;
    CHECK(g1(0) == Approx(-0.46264).epsilon(1e-2));
    CHECK(g1(2) == Approx(0.13437).epsilon(1e-2));
    CHECK(g1(1) == Approx(-0.97565).epsilon(1e-2));
    CHECK(qr.transversality.det_bka == Approx(-33.31133).epsilon(1e-2));
    CHECK(qr.transversality.crossing_speed < 0.0);
}

TEST_CASE("uniqueness of the l3 zero along the traced curves", "[locus][slow]") {
    wgss::TraceOptions opt;
    opt.kappa_step = 0.05;
    const auto c1 = wgss::trace_l2_zero_curve(0.45, 0.95, 0.72216, 0.33319, opt);
    int c1_changes = 0;
    for (std::size_t i = 1; i < c1.size(); ++i)
        if (c1[i - 1].l[2] * c1[i].l[2] < 0.0) ++c1_changes;
    CHECK(c1_changes == 0); // one sign throughout (negative)

    const auto c2 = wgss::trace_l2_zero_curve(0.0, 0.95, 0.86828, 0.85050, opt);
    int c2_changes = 0;
    for (std::size_t i = 1; i < c2.size(); ++i)
        if (c2[i - 1].l[2] * c2[i].l[2] < 0.0) ++c2_changes;
    CHECK(c2_changes == 1); // exactly the codimension-4 crossing
}

TEST_CASE("second coefficient signs across the curves", "[locus]") {
    // Along the l1 = 0 surface at fixed kappa the curve crossings split the
    // surface into negative / positive / negative l2 segments.
    const double kappa = 0.6;
    const auto c1 = wgss::solve_curve_point(kappa, 0.70665, 0.57913);
    const auto c2 = wgss::solve_curve_point(kappa, 0.91029, 0.99330);
    REQUIRE(c1.beta < c2.beta);

    const auto l2_at = [&](double beta) {
        const double alpha = alpha_on_l1_zero(beta, kappa);
        const auto l = wgss::l123(beta, alpha, kappa);
        REQUIRE(std::abs(l[0]) < 1e-7);
        return l[1];
    };
    CHECK(l2_at(c1.beta - 0.02) < 0.0); // beyond the first curve
    CHECK(l2_at(0.5 * (c1.beta + c2.beta)) > 0.0); // between the curves
    CHECK(l2_at(c2.beta + 0.02) < 0.0); // beyond the second curve
}

TEST_CASE("eigenvalue crossing speed", "[locus]") {
    for (int trial = 0; trial < 50; ++trial) {
        const double b = uniform(0.15, 0.95), a = uniform(0.15, 1.5), k = uniform(0.0, 0.9);
        const double fd = wgss::crossing_speed(b, a, k);
        const double an = wgss::crossing_speed_analytic(b, a, k);
        REQUIRE(std::abs(fd - an) < 1e-6 * std::abs(an));
        CHECK(fd < 0.0);
        CHECK(std::abs(fd) > 1e-3);
    }
    // criticality: the pair sits exactly on the axis at eps_c
    const auto p = wgss::critical_params(0.7, 0.8, 0.3);
    const Eigen::EigenSolver<RMat> es(wgss::analytic_jet(p, 1).jacobian());
    for (int i = 0; i < 3; ++i)
        if (std::abs(es.eigenvalues()(i).imag()) > 1e-9)
            CHECK(std::abs(es.eigenvalues()(i).real()) < 1e-10);
}

TEST_CASE("surface scan", "[locus]") {
    SECTION("grid size and determinism") {
        const wgss::GridAxis gb{0.3, 0.9, 2}, ga{0.5, 1.0, 2}, gk{0.0, 0.5, 2};
        const auto scan = wgss::scan_l1_surface(gb, ga, gk);
        CHECK(scan.field.size() == 8);
        const auto scan2 = wgss::scan_l1_surface(gb, ga, gk);
        REQUIRE(wgss::scan_to_csv(scan) == wgss::scan_to_csv(scan2));
    }
    SECTION("zero crossings are refined") {
        const wgss::GridAxis gb{0.6, 0.95, 30}, ga{0.8505, 0.8505, 1}, gk{0.0, 0.0, 1};
        const auto scan = wgss::scan_l1_surface(gb, ga, gk);
        REQUIRE_FALSE(scan.zeros.empty());
        for (const auto& z : scan.zeros)
            CHECK(std::abs(wgss::g1_polynomial(z.beta, z.alpha, z.kappa)) < 1e-10);
        // the known root near beta = 0.86828 is among them
        bool found = false;
        for (const auto& z : scan.zeros)
            if (std::abs(z.beta - 0.86828) < 1e-3) found = true;
        CHECK(found);
    }
    SECTION("ladder cross-check passes") {
        const wgss::GridAxis gb{0.3, 0.9, 4}, ga{0.4, 1.2, 3}, gk{0.0, 0.8, 3};
        CHECK_NOTHROW(wgss::scan_l1_surface(gb, ga, gk, 10));
    }
    SECTION("empty grid rejected") {
        CHECK_THROWS_AS(wgss::scan_l1_surface({0.1, 0.2, 0}, {0.5, 1.0, 2}, {0.0, 0.5, 2}),
                        std::invalid_argument);
    }
}

TEST_CASE("codimension classification honors the zero band", "[locus]") {
    // a generic point on neither surface
    const auto generic = wgss::classify_critical_point(0.5, 0.5, 0.0);
    CHECK(generic.codim == 1);
    // a traced curve point has two vanished coefficients
    const auto pt = wgss::solve_curve_point(0.7, 0.69201, 0.70113);
    const auto cp = wgss::classify_critical_point(pt.beta, pt.alpha, pt.kappa);
    CHECK(cp.codim == 3);
    // the refined codimension-4 point
    const auto& qr = refined_q();
    CHECK(qr.point.codim == 4);
}
