#pragma once

// Taylor jets of vector fields stored as symmetric multilinear forms.
//
// A VectorFieldJet holds the derivative tensors of F at an equilibrium,
//   F(x) = A x + 1/2! T2(x,x) + 1/3! T3(x,x,x) + ... ,
// each T_r symmetric in its r slots.  Only the sorted-multi-index
// representative of every entry is stored; evaluation contracts the form
// one argument at a time over sorted multisets, which keeps both storage
// and work polynomial in n at any order.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hopf/errors.hpp"

namespace hopf {

using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

inline constexpr int kMaxJetOrder = 9;

namespace detail {

/// Binomial table sized for multiset ranking at order <= kMaxJetOrder.
class Binomials {
public:
    explicit Binomials(int nmax) : nmax_(nmax), c_((nmax + 1) * (nmax + 1), 0.0) {
        for (int n = 0; n <= nmax; ++n) {
            at(n, 0) = 1;
            for (int k = 1; k <= n; ++k)
                at(n, k) = at(n - 1, k - 1) + (k <= n - 1 ? at(n - 1, k) : 0);
        }
    }
    std::int64_t operator()(int n, int k) const {
        if (k < 0 || k > n || n < 0) return 0;
        return c_[static_cast<std::size_t>(n) * (nmax_ + 1) + k];
    }

private:
    std::int64_t& at(int n, int k) { return c_[static_cast<std::size_t>(n) * (nmax_ + 1) + k]; }
    int nmax_;
    std::vector<std::int64_t> c_;
};

/// Number of sorted index multisets of size r over n symbols: C(n+r-1, r).
inline std::int64_t multiset_count(const Binomials& bin, int n, int r) {
    return bin(n + r - 1, r);
}

/// Colex rank of a sorted multi-index (i_1 <= ... <= i_r), each in [0, n).
inline std::int64_t multiset_rank(const Binomials& bin, std::span<const int> idx) {
    std::int64_t rank = 0;
    for (int t = 0; t < static_cast<int>(idx.size()); ++t)
        rank += bin(idx[t] + t, t + 1);
    return rank;
}

/// Advance a sorted multi-index to its successor; false when exhausted.
inline bool next_multiset(std::span<int> idx, int n) {
    const int r = static_cast<int>(idx.size());
    for (int t = r - 1; t >= 0; --t) {
        if (idx[t] + 1 < n) {
            const int v = idx[t] + 1;
            for (int s = t; s < r; ++s) idx[s] = v;
            return true;
        }
    }
    return false;
}

} // namespace detail

/// Symmetric derivative tensors of a smooth vector field at a point,
/// orders 1..max_order.  tensors[1] is the Jacobian.  Immutable once built.
class VectorFieldJet {
public:
    /// Build from a callback producing the n derivative values
    /// d^r F / dx_{idx} for every sorted multi-index `idx` of each order.
    static VectorFieldJet from_entries(
        int dim, int max_order,
        const std::function<void(int order, std::span<const int> idx, std::span<double> out)>& entry) {
        if (dim < 1) throw std::invalid_argument("VectorFieldJet: dim must be positive");
        if (max_order < 1 || max_order > kMaxJetOrder)
            throw std::invalid_argument("VectorFieldJet: order must be in 1..9");
        VectorFieldJet jet(dim, max_order);
        std::vector<int> idx;
        std::vector<double> vals(static_cast<std::size_t>(dim));
        for (int r = 1; r <= max_order; ++r) {
            idx.assign(static_cast<std::size_t>(r), 0);
            do {
                entry(r, idx, vals);
                const auto rank = detail::multiset_rank(jet.bin_, idx);
                for (int i = 0; i < dim; ++i) {
                    const double v = vals[static_cast<std::size_t>(i)];
                    if (!std::isfinite(v)) throw NumericError("VectorFieldJet: non-finite derivative entry");
                    jet.data_[static_cast<std::size_t>(r)][static_cast<std::size_t>(rank) * dim + i] = v;
                }
            } while (detail::next_multiset(idx, dim));
        }
        return jet;
    }

    /// Build by central finite differences of f around x0.  Orders above 4
    /// are rejected: the stencil accuracy collapses beyond that.
    static VectorFieldJet from_finite_differences(
        const std::function<RVec(const RVec&)>& f, const RVec& x0, int max_order,
        double step_scale = 0.03);

    int dim() const { return dim_; }
    int max_order() const { return max_order_; }

    /// Jacobian as a dense matrix.
    RMat jacobian() const {
        RMat A(dim_, dim_);
        std::vector<int> idx(1);
        for (int j = 0; j < dim_; ++j) {
            idx[0] = j;
            const auto rank = detail::multiset_rank(bin_, idx);
            for (int i = 0; i < dim_; ++i)
                A(i, j) = data_[1][static_cast<std::size_t>(rank) * dim_ + i];
        }
        return A;
    }

    /// Stored entry for a sorted multi-index (returns the n output values).
    RVec entry(int order, std::span<const int> sorted_idx) const {
        check_order(order);
        const auto rank = detail::multiset_rank(bin_, sorted_idx);
        RVec out(dim_);
        for (int i = 0; i < dim_; ++i)
            out(i) = data_[static_cast<std::size_t>(order)][static_cast<std::size_t>(rank) * dim_ + i];
        return out;
    }

    /// Apply the order-r symmetric multilinear form to r complex vectors.
    /// Real tensors: eval(conj args) == conj(eval(args)).
    CVec eval(int order, std::span<const CVec> args) const {
        check_order(order);
        if (static_cast<int>(args.size()) != order)
            throw std::invalid_argument("VectorFieldJet::eval: argument count must equal order");
        for (const auto& a : args)
            if (a.size() != dim_)
                throw std::invalid_argument("VectorFieldJet::eval: argument dimension mismatch");

        // Contract the last argument first, walking down to order zero.
        const int n = dim_;
        std::vector<Cplx> cur, nxt;
        {
            const auto& T = data_[static_cast<std::size_t>(order)];
            const auto cnt = detail::multiset_count(bin_, n, order);
            cur.resize(static_cast<std::size_t>(cnt) * n);
            for (std::int64_t e = 0; e < cnt; ++e)
                for (int i = 0; i < n; ++i)
                    cur[static_cast<std::size_t>(e) * n + i] = T[static_cast<std::size_t>(e) * n + i];
        }
        std::vector<int> idx, ext;
        for (int r = order; r >= 1; --r) {
            const CVec& x = args[static_cast<std::size_t>(r - 1)];
            const auto cnt_lo = detail::multiset_count(bin_, n, r - 1);
            nxt.assign(static_cast<std::size_t>(cnt_lo) * n, Cplx{0.0, 0.0});
            idx.assign(static_cast<std::size_t>(r - 1), 0);
            ext.assign(static_cast<std::size_t>(r), 0);
            while (true) {
                const auto lo = detail::multiset_rank(bin_, idx);
                for (int add = 0; add < n; ++add) {
                    // sorted insertion of `add` into idx
                    int t = 0;
                    for (int s = 0; s < r - 1; ++s) {
                        if (idx[static_cast<std::size_t>(s)] <= add) { ext[static_cast<std::size_t>(t++)] = idx[static_cast<std::size_t>(s)]; }
                    }
                    ext[static_cast<std::size_t>(t++)] = add;
                    for (int s = 0; s < r - 1; ++s)
                        if (idx[static_cast<std::size_t>(s)] > add) ext[static_cast<std::size_t>(t++)] = idx[static_cast<std::size_t>(s)];
                    const auto hi = detail::multiset_rank(bin_, ext);
                    const Cplx w = x(add);
                    for (int i = 0; i < n; ++i)
                        nxt[static_cast<std::size_t>(lo) * n + i] += cur[static_cast<std::size_t>(hi) * n + i] * w;
                }
                if (r == 1 || !detail::next_multiset(idx, n)) break;
            }
            cur.swap(nxt);
            if (r == 1) break;
        }
        CVec out(n);
        for (int i = 0; i < n; ++i) out(i) = cur[static_cast<std::size_t>(i)];
        return out;
    }

    CVec eval(int order, std::initializer_list<CVec> args) const {
        std::vector<CVec> v(args);
        return eval(order, std::span<const CVec>(v));
    }

private:
    VectorFieldJet(int dim, int max_order)
        : dim_(dim), max_order_(max_order), bin_(dim + kMaxJetOrder) {
        data_.resize(static_cast<std::size_t>(max_order) + 1);
        for (int r = 1; r <= max_order; ++r)
            data_[static_cast<std::size_t>(r)].assign(
                static_cast<std::size_t>(detail::multiset_count(bin_, dim, r)) * dim_, 0.0);
    }

    void check_order(int order) const {
        if (order < 1 || order > max_order_)
            throw std::invalid_argument("VectorFieldJet: order outside 1..max_order");
    }

    int dim_;
    int max_order_;
    detail::Binomials bin_;
    std::vector<std::vector<double>> data_; // data_[r][rank*n + i]
};

namespace detail {

/// Fornberg finite-difference weights for derivative `m` on offsets `pts`
/// around 0.  Exact rational-free implementation of the classical recursion.
inline std::vector<double> fd_weights(int m, std::span<const double> pts) {
    const int nd = static_cast<int>(pts.size());
    std::vector<double> delta(static_cast<std::size_t>(nd) * nd * (m + 1), 0.0);
    auto D = [&](int i, int j, int k) -> double& {
        return delta[(static_cast<std::size_t>(i) * nd + j) * (m + 1) + k];
    };
    D(0, 0, 0) = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < nd; ++i) {
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c3 = pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)];
            c2 *= c3;
            for (int k = 0; k <= std::min(i, m); ++k)
                D(i, j, k) = (pts[static_cast<std::size_t>(i)] * D(i - 1, j, k) -
                              (k > 0 ? k * D(i - 1, j, k - 1) : 0.0)) / c3;
        }
        for (int k = 0; k <= std::min(i, m); ++k)
            D(i, i, k) = c1 / c2 * ((k > 0 ? k * D(i - 1, i - 1, k - 1) : 0.0) -
                                    pts[static_cast<std::size_t>(i - 1)] * D(i - 1, i - 1, k));
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(nd));
    for (int j = 0; j < nd; ++j) w[static_cast<std::size_t>(j)] = D(nd - 1, j, m);
    return w;
}

} // namespace detail

inline VectorFieldJet VectorFieldJet::from_finite_differences(
    const std::function<RVec(const RVec&)>& f, const RVec& x0, int max_order,
    double step_scale) {
    if (max_order > 4)
        throw std::invalid_argument(
            "VectorFieldJet::from_finite_differences: orders above 4 rejected");
    const int n = static_cast<int>(x0.size());

    // Per-derivative-order symmetric stencils, 4th-order accurate.
    auto offsets_for = [](int m) {
        const int half = (m <= 2) ? 2 : 3;
        std::vector<double> o;
        for (int i = -half; i <= half; ++i) o.push_back(static_cast<double>(i));
        return o;
    };

    return from_entries(n, max_order, [&](int /*order*/, std::span<const int> idx, std::span<double> out) {
        // multiplicities per variable
        std::vector<int> mult(static_cast<std::size_t>(n), 0);
        for (int v : idx) ++mult[static_cast<std::size_t>(v)];
        std::vector<int> vars;
        for (int v = 0; v < n; ++v)
            if (mult[static_cast<std::size_t>(v)] > 0) vars.push_back(v);

        struct Axis {
            int var;
            std::vector<double> offs;
            std::vector<double> w;
            double h;
        };
        std::vector<Axis> axes;
        for (int v : vars) {
            Axis ax;
            ax.var = v;
            ax.offs = offsets_for(mult[static_cast<std::size_t>(v)]);
            ax.w = detail::fd_weights(mult[static_cast<std::size_t>(v)], ax.offs);
            ax.h = step_scale * std::max(1.0, std::abs(x0(v)));
            axes.push_back(std::move(ax));
        }
        RVec acc = RVec::Zero(n);
        std::vector<std::size_t> pos(axes.size(), 0);
        while (true) {
            double wprod = 1.0;
            RVec x = x0;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const auto& ax = axes[a];
                wprod *= ax.w[pos[a]] / std::pow(ax.h, mult[static_cast<std::size_t>(ax.var)]);
                x(ax.var) += ax.offs[pos[a]] * ax.h;
            }
            // skip zero-weight stencil points
            if (wprod != 0.0) acc += wprod * f(x);
            std::size_t a = 0;
            for (; a < axes.size(); ++a) {
                if (++pos[a] < axes[a].offs.size()) break;
                pos[a] = 0;
            }
            if (a == axes.size()) break;
        }
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(acc(i))) throw NumericError("finite-difference jet: non-finite value");
            out[static_cast<std::size_t>(i)] = acc(i);
        }
    });
}

/// Inner product with the left-argument conjugated: <p,q> = sum conj(p_i) q_i.
inline Cplx inner(const CVec& p, const CVec& q) { return p.dot(q); }

} // namespace hopf
