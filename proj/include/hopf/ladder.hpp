#pragma once

// The center-manifold coefficient ladder.
//
// With x = H(w, wbar) = w q + wbar conj(q) + sum_{2<=j+k} h_jk w^j wbar^k / (j! k!)
// and the chart equation
//   w' = i omega0 w + sum_m G_{m+1,m} w^{m+1} wbar^m / ((m+1)! m!),
// matching coefficients of w^j wbar^k in  H_w w' + H_wbar wbar' = F(H)
// yields, per level (j,k) in increasing total order,
//   ((j-k) i omega0 I - A) c_jk = N_jk - t_jk            (c_jk = h_jk/(j!k!))
// where N_jk is the formal-series composition coefficient of F(H) and t_jk
// the transport sum_m [gamma_m (j-m) + conj(gamma_m)(k-m)] c_{j-m,k-m},
// gamma_m = G_{m+1,m}/((m+1)! m!).  Resonant levels j = k+1 are solved by the
// bordered (n+1) system with <p, h> = 0 and G_{j,k} = j!k! <p, N - t>.
// Diagonal levels have real right-hand sides and real solutions.
//
// Lyapunov coefficients: l1 = Re G21 / 2, l2 = Re G32 / 12,
// l3 = Re G43 / 144, l4 = Re G54 / 2880.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hopf/frame.hpp"

namespace hopf {

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Enumerates multisets of r bidegree pairs (a,b), each with a+b >= 1,
/// summing to (j,k); pairs are drawn non-increasingly from `pairs`.
/// Calls `emit(pairs_of_multiset, multiplicity_factor)` where the factor is
/// prod_t 1/m_t! over repeated pairs.
template <typename Emit>
void for_each_composition(int j, int k, int r, const Emit& emit) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a <= j; ++a)
        for (int b = 0; b <= k; ++b)
            if (a + b >= 1 && a + b <= j + k - (r - 1)) pairs.emplace_back(a, b);
    std::vector<std::pair<int, int>> cur;
    cur.reserve(static_cast<std::size_t>(r));
    const auto rec = [&](auto&& self, std::size_t start, int slots, int rj, int rk) -> void {
        if (slots == 0) {
            if (rj == 0 && rk == 0) {
                double fac = 1.0;
                for (std::size_t s = 0; s < cur.size();) {
                    std::size_t e = s;
                    while (e < cur.size() && cur[e] == cur[s]) ++e;
                    fac /= factorial(static_cast<int>(e - s));
                    s = e;
                }
                emit(cur, fac);
            }
            return;
        }
        if (rj + rk < slots) return;
        for (std::size_t t = start; t < pairs.size(); ++t) {
            const auto [a, b] = pairs[t];
            if (a > rj || b > rk) continue;
            cur.push_back(pairs[t]);
            self(self, t, slots - 1, rj - a, rk - b);
            cur.pop_back();
        }
    };
    rec(rec, 0, r, j, k);
}

} // namespace detail

/// Center-manifold coefficients and Lyapunov coefficients at a Hopf point.
/// h(j,k) is stored for every 2 <= j+k <= 2*order; the top resonant scalar
/// G_{order+1, order} is extracted from the solvability condition alone.
class CoefficientLadder {
public:
    int order() const { return order_; }
    double omega0() const { return omega0_; }
    const EigenvectorConvention& convention() const { return convention_; }

    bool has_h(int j, int k) const { return coeff_.count({j, k}) > 0 || coeff_.count({k, j}) > 0; }

    /// h_jk; conjugate symmetry h_jk = conj(h_kj) is built in.
    CVec h(int j, int k) const {
        const double scale = detail::factorial(j) * detail::factorial(k);
        auto it = coeff_.find({j, k});
        if (it != coeff_.end()) return scale * it->second;
        it = coeff_.find({k, j});
        if (it != coeff_.end()) return scale * it->second.conjugate();
        throw std::invalid_argument("CoefficientLadder::h: level not computed");
    }

    /// Plain series coefficient c_jk = h_jk / (j! k!); c_10 = q, c_01 = conj q.
    CVec c(int j, int k) const {
        auto it = coeff_.find({j, k});
        if (it != coeff_.end()) return it->second;
        it = coeff_.find({k, j});
        if (it != coeff_.end()) return it->second.conjugate();
        throw std::invalid_argument("CoefficientLadder::c: level not computed");
    }

    /// Resonant scalar G_{m+1,m} (m = 1..order).
    Cplx G(int m) const {
        if (m < 1 || m > order_) throw std::invalid_argument("CoefficientLadder::G: index outside 1..order");
        return gamma_[static_cast<std::size_t>(m)] * detail::factorial(m + 1) * detail::factorial(m);
    }
    Cplx G21() const { return G(1); }
    Cplx G32() const { return G(2); }
    Cplx G43() const { return G(3); }
    Cplx G54() const { return G(4); }

    double l(int m) const {
        static constexpr double den[5] = {0.0, 2.0, 12.0, 144.0, 2880.0};
        return G(m).real() / den[m];
    }
    double l1() const { return l(1); }
    double l2() const { return l(2); }
    double l3() const { return l(3); }
    double l4() const { return l(4); }

    /// Levels stored, ordered by total order then j.
    std::vector<std::pair<int, int>> levels() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& [jk, v] : coeff_)
            if (jk.first + jk.second >= 2) out.push_back(jk);
        std::sort(out.begin(), out.end(), [](auto a, auto b) {
            const int sa = a.first + a.second, sb = b.first + b.second;
            return sa != sb ? sa < sb : a.first > b.first;
        });
        return out;
    }

private:
    friend CoefficientLadder run_ladder(const HopfFrame&, int);
    friend CVec assemble_rhs(const HopfFrame&, const CoefficientLadder&, int, int);
    friend class LadderDiagnostics;

    int order_ = 0;
    double omega0_ = 0.0;
    EigenvectorConvention convention_{};
    std::map<std::pair<int, int>, CVec> coeff_; // plain coefficients, includes (1,0), (0,1)
    std::vector<Cplx> gamma_;                   // gamma_[m] = G_{m+1,m}/((m+1)! m!)
};

namespace detail {

/// Composition coefficient N_jk of F(H) (the part beyond A c_jk), from the
/// plain coefficients accumulated so far.
inline CVec composition_coefficient(const VectorFieldJet& jet,
                                    const std::map<std::pair<int, int>, CVec>& c,
                                    int j, int k) {
    CVec res = CVec::Zero(jet.dim());
    std::vector<CVec> args;
    const int rmax = std::min(jet.max_order(), j + k);
    for (int r = 2; r <= rmax; ++r) {
        for_each_composition(j, k, r, [&](const std::vector<std::pair<int, int>>& parts, double fac) {
            args.clear();
            for (const auto& ab : parts) {
                const auto it = c.find(ab);
                if (it == c.end()) throw std::logic_error("ladder: missing prerequisite coefficient");
                args.push_back(it->second);
            }
            res += fac * jet.eval(r, std::span<const CVec>(args));
        });
    }
    return res;
}

/// Transport term t_jk; `skip_resonant_current` drops the m = k term of a
/// resonant level (that term is the G_{j,k} q unknown handled separately).
inline CVec transport_term(const std::map<std::pair<int, int>, CVec>& c,
                           const std::vector<Cplx>& gamma, int j, int k,
                           bool skip_resonant_current) {
    CVec t = CVec::Zero(c.at({1, 0}).size());
    for (int m = 1; m <= std::min(j, k); ++m) {
        if ((j - m) + (k - m) == 0) continue;
        if (skip_resonant_current && j == k + 1 && m == k) continue;
        if (m >= static_cast<int>(gamma.size())) continue;
        const Cplx g = gamma[static_cast<std::size_t>(m)];
        const Cplx coef = g * static_cast<double>(j - m) + std::conj(g) * static_cast<double>(k - m);
        t += coef * c.at({j - m, k - m});
    }
    return t;
}

} // namespace detail

/// Right-hand side of the level-(j,k) homological equation in the h
/// normalization: j!k! (N_jk - t_jk).  For resonant levels this is the
/// vector whose <p, .> projection is G_{j,k}.
inline CVec assemble_rhs(const HopfFrame& frame, const CoefficientLadder& ladder, int j, int k) {
    if (j < 0 || k < 0 || j + k < 2) throw std::invalid_argument("assemble_rhs: need j+k >= 2");
    const CVec n = detail::composition_coefficient(frame.jet, ladder.coeff_, j, k);
    const CVec t = detail::transport_term(ladder.coeff_, ladder.gamma_, j, k, true);
    return detail::factorial(j) * detail::factorial(k) * (n - t);
}

/// Run the ladder far enough for l_1..l_{up_to}.  Requires the jet populated
/// through order 2*up_to + 1.
inline CoefficientLadder run_ladder(const HopfFrame& frame, int up_to = 4) {
    if (up_to < 1 || up_to > 4) throw std::invalid_argument("run_ladder: up_to must be in 1..4");
    if (frame.jet.max_order() < 2 * up_to + 1)
        throw std::invalid_argument("run_ladder: jet order too low for requested coefficient");
    const int n = frame.jet.dim();
    const RMat& A = frame.A;
    const double w0 = frame.omega0;

    CoefficientLadder lad;
    lad.order_ = up_to;
    lad.omega0_ = w0;
    lad.convention_ = frame.convention;
    lad.gamma_.assign(static_cast<std::size_t>(up_to) + 1, Cplx{0.0, 0.0});
    lad.coeff_[{1, 0}] = frame.q;
    lad.coeff_[{0, 1}] = frame.q.conjugate();

    const double spectral_scale = std::max(1.0, frame.eigenvalues.cwiseAbs().maxCoeff());

    for (int s = 2; s <= 2 * up_to + 1; ++s) {
        for (int j = s; j >= (s + 1) / 2; --j) {
            const int k = s - j;
            const bool resonant = (j == k + 1);
            if (s == 2 * up_to + 1 && !resonant) continue; // top order: solvability only
            const CVec nl = detail::composition_coefficient(frame.jet, lad.coeff_, j, k);
            const CVec tr = detail::transport_term(lad.coeff_, lad.gamma_, j, k, true);
            const CVec rhs = nl - tr;

            if (resonant) {
                const Cplx g_plain = inner(frame.p, rhs);
                lad.gamma_[static_cast<std::size_t>(k)] = g_plain;
                if (s == 2 * up_to + 1) continue;
                CMat bordered = CMat::Zero(n + 1, n + 1);
                bordered.topLeftCorner(n, n) = Cplx{0.0, w0} * CMat::Identity(n, n) - A.cast<Cplx>();
                bordered.block(0, n, n, 1) = frame.q;
                bordered.block(n, 0, 1, n) = frame.p.conjugate().transpose();
                CVec full = CVec::Zero(n + 1);
                full.head(n) = rhs - g_plain * frame.q;
                const CVec sol = bordered.partialPivLu().solve(full);
                lad.coeff_[{j, k}] = sol.head(n);
                lad.coeff_[{k, j}] = sol.head(n).conjugate();
            } else if (j == k) {
                // Real level: imaginary content is roundoff by conjugate symmetry.
                const double imn = rhs.imag().norm();
                const double ren = rhs.real().norm();
                if (imn > 1e-9 * std::max(ren, 1.0) + 1e-12)
                    throw NumericError("run_ladder: diagonal right-hand side not real");
                Eigen::PartialPivLU<RMat> lu(-A);
                const RVec sol = lu.solve(rhs.real());
                lad.coeff_[{j, k}] = sol.cast<Cplx>();
            } else {
                const Cplx shift{0.0, (j - k) * w0};
                double gap = std::numeric_limits<double>::max();
                for (int e = 0; e < frame.eigenvalues.size(); ++e)
                    gap = std::min(gap, std::abs(shift - frame.eigenvalues(e)));
                if (gap < 1e-9 * spectral_scale)
                    throw ResonanceError(j, k,
                        "run_ladder: homological matrix singular at level (" + std::to_string(j) +
                        "," + std::to_string(k) + "): eigenvalue at (j-k) i omega0");
                const CMat M = shift * CMat::Identity(n, n) - A.cast<Cplx>();
                lad.coeff_[{j, k}] = M.partialPivLu().solve(rhs);
                lad.coeff_[{k, j}] = lad.coeff_[{j, k}].conjugate();
            }
        }
    }
    return lad;
}

/// Diagnostic recomputation of the equations the ladder solved.
class LadderDiagnostics {
public:
    struct LevelResidual {
        int j, k;
        double residual;   // equation residual, h normalization
        double scale;      // largest |h| of the same total order
    };

    /// Residual of every solved level plus the top solvability condition.
    static std::vector<LevelResidual> homological_residuals(const HopfFrame& frame,
                                                            const CoefficientLadder& lad) {
        std::vector<LevelResidual> out;
        const RMat& A = frame.A;
        const double w0 = lad.omega0();
        std::map<int, double> order_scale;
        for (const auto& [j, k] : lad.levels())
            order_scale[j + k] = std::max(order_scale[j + k], lad.h(j, k).norm());

        for (const auto& [j, k] : lad.levels()) {
            const CVec rhs = assemble_rhs(frame, lad, j, k);
            CVec lhs = (Cplx{0.0, (j - k) * w0} * CMat::Identity(A.rows(), A.cols()) - A.cast<Cplx>()) * lad.h(j, k);
            if (j == k + 1) lhs += lad.G(k) * frame.q;
            out.push_back({j, k, (lhs - rhs).norm(), order_scale[j + k]});
        }
        // top-order solvability: <p, rhs - G q> = 0
        const int m = lad.order();
        const int j = m + 1, k = m;
        const CVec rhs = assemble_rhs(frame, lad, j, k);
        const double res = std::abs(inner(frame.p, rhs) - lad.G(m));
        out.push_back({j, k, res, std::abs(lad.G(m))});
        return out;
    }

    /// |<p, RHS - G q>| for each resonant level, relative to |G|.
    static std::vector<double> solvability_residuals(const HopfFrame& frame,
                                                     const CoefficientLadder& lad) {
        std::vector<double> out;
        for (int m = 1; m <= lad.order(); ++m) {
            const CVec rhs = assemble_rhs(frame, lad, m + 1, m);
            out.push_back(std::abs(inner(frame.p, rhs - lad.G(m) * frame.q)) /
                          std::max(std::abs(lad.G(m)), 1e-300));
        }
        return out;
    }
};

} // namespace hopf
