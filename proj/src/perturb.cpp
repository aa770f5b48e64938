#include "nrange/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace nrange {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double pencil_scale(const HermitianPencil& p) { return std::max(p.scale(), 1.0); }

double spread(const RVec& v) { return v.size() ? v.maxCoeff() - v.minCoeff() : 0.0; }

struct GroupSample {
    RVec values;   // ascending
    CMat vectors;
};

// The m eigenpairs at theta that project most strongly onto span(q).
GroupSample sample_group(const HermitianPencil& pencil, double theta, const CMat& q) {
    Eigen::SelfAdjointEigenSolver<CMat> es(pencil.at(theta).data());
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed while sampling a branch group");
    const Eigen::Index n = pencil.size();
    const Eigen::Index m = q.cols();
    RVec w = (q.adjoint() * es.eigenvectors()).colwise().squaredNorm().transpose();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) { return w(x) > w(y); });
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());  // ascending eigenvalue order
    GroupSample gs{RVec(m), CMat(n, m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        gs.values(i) = es.eigenvalues()(idx[static_cast<std::size_t>(i)]);
        gs.vectors.col(i) = es.eigenvectors().col(idx[static_cast<std::size_t>(i)]);
    }
    return gs;
}

// perm[label] = column of cur that continues label of prev.
std::vector<Eigen::Index> match(const CMat& prev, const CMat& cur) {
    const Eigen::Index m = prev.cols();
    RMat ov = (prev.adjoint() * cur).cwiseAbs2();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m), -1);
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    struct Cand {
        double w;
        Eigen::Index a, b;
    };
    std::vector<Cand> cands;
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) cands.push_back({ov(a, b), a, b});
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.w > y.w; });
    for (const auto& c : cands) {
        if (perm[static_cast<std::size_t>(c.a)] >= 0 || used[static_cast<std::size_t>(c.b)]) continue;
        perm[static_cast<std::size_t>(c.a)] = c.b;
        used[static_cast<std::size_t>(c.b)] = true;
    }
    return perm;
}

// Coefficients of the same polynomials expanded about s instead of 0.
RMat shift_expansion(const RMat& c, double s) {
    const Eigen::Index cols = c.cols();
    RMat out = RMat::Zero(c.rows(), cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = j; i < cols; ++i) {
            double binom = 1.0;
            for (Eigen::Index t = 0; t < j; ++t) binom = binom * static_cast<double>(i - t) / static_cast<double>(t + 1);
            out.col(j) += binom * std::pow(s, static_cast<double>(i - j)) * c.col(i);
        }
    return out;
}

// The expansion angle is usually only known to ~1e-8 (it comes from
// minimizing a gap that is flat to second order). A contact of order k at
// theta0 + s shows up at theta0 as differences of size ~ k dc_k s^(k-1) at
// order k-1, far above the fit noise. Try each higher order: put s at the
// root of the (k-1)-th derivative of the most separated pair, and accept the
// largest k for which every lower order then agrees within its threshold.
void recenter_at_contact(SplitReport& rep, double radius) {
    const RMat& c = rep.coefficients;
    const Eigen::Index cols = c.cols();
    for (Eigen::Index k = cols - 1; k > *rep.split_order; --k) {
        Eigen::Index ia = 0, ib = 0;
        c.col(k).maxCoeff(&ia);
        c.col(k).minCoeff(&ib);
        if (c(ia, k) - c(ib, k) <= rep.order_threshold(k)) continue;
        const RVec d = (c.row(ia) - c.row(ib)).transpose();
        // p(s) = d^(k-1)(s) / (k-1)!
        auto p = [&](double x, double& dp) {
            double v = 0.0;
            dp = 0.0;
            for (Eigen::Index i = k - 1; i < cols; ++i) {
                double binom = 1.0;
                for (Eigen::Index t = 0; t < k - 1; ++t) binom = binom * static_cast<double>(i - t) / static_cast<double>(t + 1);
                const auto e = static_cast<double>(i - k + 1);
                v += binom * d(i) * std::pow(x, e);
                if (e > 0) dp += binom * d(i) * e * std::pow(x, e - 1.0);
            }
            return v;
        };
        double x = 0.0;
        for (int it = 0; it < 8; ++it) {
            double dp = 0.0;
            const double v = p(x, dp);
            if (dp == 0.0) break;
            x -= v / dp;
        }
        if (!(std::abs(x) <= radius)) continue;
        const RMat moved = shift_expansion(c, x);
        bool ok = true;
        for (Eigen::Index j = 1; j < k && ok; ++j) ok = spread(moved.col(j)) <= rep.order_threshold(j);
        if (!ok) continue;
        rep.coefficients = moved;
        rep.theta0 += x;
        rep.split_order = static_cast<int>(k);
        rep.flags.emplace_back("recentered-at-contact");
        return;
    }
}

}  // namespace

const char* to_string(Parity p) {
    switch (p) {
        case Parity::Odd: return "odd";
        case Parity::Even: return "even";
        case Parity::None: return "none";
    }
    return "none";
}

NormalForm normal_form(const ComplexMatrix& a, Complex z, double theta0) {
    const Eigen::Index n = a.size();
    const HermitianPencil pa = hermitian_parts(a);
    const double scale = pencil_scale(pa);
    const Complex rot = std::polar(1.0, -theta0);
    const ComplexMatrix b(rot * (a.data() - z * CMat::Identity(n, n)));
    const HermitianPencil pb = hermitian_parts(b);

    EigenDecomposition ed = eig_hermitian(pb.H);
    if (std::abs(ed.values(0)) > 1e-7 * scale) {
        std::ostringstream os;
        os << "point is not on the support line at theta=" << theta0
           << " (offset " << ed.values(0) << ")";
        throw PreconditionError(os.str());
    }
    const double ctol = kClusterRelTol * scale;
    Eigen::Index m = 1;
    while (m < n && ed.values(m) - ed.values(0) <= ctol) ++m;

    NormalForm nf;
    nf.theta0 = theta0;
    nf.shift = z;
    nf.lambda_min = ed.values(0);
    nf.m = m;
    nf.k = n - m;
    nf.basis = ed.vectors;
    nf.basis.leftCols(m) = canonical_basis(ed.vectors.leftCols(m));

    RVec hdiag = RVec::Zero(n);
    for (Eigen::Index i = m; i < n; ++i) hdiag(i) = ed.values(i) - ed.values(0);
    if (nf.k > 0 && !(hdiag.tail(nf.k).minCoeff() > 1e-9 * std::max(1.0, hdiag.maxCoeff())))
        throw NotPositiveDefiniteError("normal form block H1 is not positive definite");
    nf.h_prime = HermitianMatrix(CMat(hdiag.cast<Complex>().asDiagonal()));
    nf.k_prime = HermitianMatrix(nf.basis.adjoint() * pb.K.data() * nf.basis);
    nf.upper_left_zero = nf.k_upper_left().norm() <= 1e-8 * scale;
    return nf;
}

ReductionChain reduction_chain(const NormalForm& nf) {
    const Eigen::Index n = nf.m + nf.k;
    const Eigen::Index m = nf.m;
    ReductionChain rc;
    rc.m = m;
    rc.projection = CMat::Zero(n, n);
    rc.projection.topLeftCorner(m, m).setIdentity();
    rc.pseudo_inverse = CMat::Zero(n, n);
    if (nf.k > 0) rc.pseudo_inverse.bottomRightCorner(nf.k, nf.k) = pd_inverse(HermitianMatrix(nf.h1())).data();
    const CMat& kp = nf.k_prime.data();
    const CMat& p = rc.projection;
    const CMat& s = rc.pseudo_inverse;
    rc.first = p * kp * p;
    rc.second = -(p * kp * s * kp * p);
    const Complex mu1 = rc.first.topLeftCorner(m, m).trace() / static_cast<double>(m);
    rc.third = p * kp * s * (kp - mu1 * CMat::Identity(n, n)) * s * kp * p;
    return rc;
}

ExactCoefficients exact_low_order_coefficients(const ReductionChain& chain) {
    const Eigen::Index m = chain.m;
    ExactCoefficients out;
    out.branches.resize(static_cast<std::size_t>(m));

    auto eq_tol = [](const CMat& block) { return 1e-8 * std::max(1.0, block.norm()); };

    const CMat b1 = chain.first_block();
    const RVec v1 = eig_hermitian(HermitianMatrix(b1)).values;
    for (Eigen::Index i = 0; i < m; ++i) out.branches[static_cast<std::size_t>(i)].order1 = v1(i);
    if (spread(v1) > eq_tol(b1)) {
        out.split_order = 1;
        for (Eigen::Index i = 0; i < m; ++i) out.branches[static_cast<std::size_t>(i)].subgroup = static_cast<int>(i);
        return out;
    }
    const double mu1 = v1.mean();
    for (auto& b : out.branches) b.order1 = mu1;

    const CMat b2 = chain.second_block();
    const RVec v2 = eig_hermitian(HermitianMatrix(b2)).values;
    const double t2 = eq_tol(b2);
    int sub = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (i > 0 && v2(i) - v2(i - 1) > t2) ++sub;
        out.branches[static_cast<std::size_t>(i)].order2 = v2(i);
        out.branches[static_cast<std::size_t>(i)].subgroup = sub;
    }
    if (spread(v2) > t2) {
        out.split_order = 2;
        if (m > 1 && v2(1) - v2(0) <= t2)
            throw UnsupportedExactOrderError(
                "smallest second-order coefficient is repeated on part of the group; exact chain stops");
        return out;
    }

    const CMat b3 = chain.third_block();
    const RVec v3 = eig_hermitian(HermitianMatrix(b3)).values;
    const double t3 = eq_tol(b3);
    sub = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (i > 0 && v3(i) - v3(i - 1) > t3) ++sub;
        out.branches[static_cast<std::size_t>(i)].order3 = v3(i);
        out.branches[static_cast<std::size_t>(i)].subgroup = sub;
    }
    if (spread(v3) > t3) out.split_order = 3;
    return out;
}

RMat exact_theta_coefficients(const NormalForm& nf, const ExactCoefficients& ex) {
    const Complex w = std::polar(1.0, -nf.theta0) * nf.shift;
    const double r = nf.lambda_min + w.real();
    const double im = w.imag();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    RMat c(static_cast<Eigen::Index>(ex.branches.size()), 4);
    for (std::size_t i = 0; i < ex.branches.size(); ++i) {
        const auto& b = ex.branches[i];
        const auto row = static_cast<Eigen::Index>(i);
        // lambda(theta0 + s) = cos s * (r + mu(tan s)) + Im(w) sin s, mu(t) = a1 t + a2 t^2 + a3 t^3.
        c(row, 0) = r;
        c(row, 1) = b.order1 + im;
        c(row, 2) = b.order2 ? *b.order2 - r / 2.0 : nan;
        c(row, 3) = b.order3 ? *b.order3 - b.order1 / 6.0 - im / 6.0 : nan;
    }
    return c;
}

SplitReport fit_split_order(const HermitianPencil& pencil, double theta0, const CMat& group_basis,
                            int max_order, double delta) {
    if (max_order < 3) throw InputError("max_order must be at least 3");
    if (!(delta > 0.0 && delta <= 0.1)) throw InputError("fit delta must lie in (0, 0.1]");
    const Eigen::Index m = group_basis.cols();
    const int reach = max_order + 2;
    const Eigen::Index samples = 2 * reach;

    // Row order: +delta .. +reach*delta, then -delta .. -reach*delta.
    RVec s(samples);
    RMat y(samples, m);
    GroupSample plus1 = sample_group(pencil, theta0 + delta, group_basis);
    CMat prev = plus1.vectors;
    s(0) = delta;
    y.row(0) = plus1.values.transpose();
    for (int j = 2; j <= reach; ++j) {
        GroupSample gs = sample_group(pencil, theta0 + j * delta, group_basis);
        auto perm = match(prev, gs.vectors);
        CMat next(prev.rows(), m);
        for (Eigen::Index l = 0; l < m; ++l) {
            y(j - 1, l) = gs.values(perm[static_cast<std::size_t>(l)]);
            next.col(l) = gs.vectors.col(perm[static_cast<std::size_t>(l)]);
        }
        s(j - 1) = j * delta;
        prev = std::move(next);
    }
    prev = plus1.vectors;
    for (int j = 1; j <= reach; ++j) {
        GroupSample gs = sample_group(pencil, theta0 - j * delta, group_basis);
        auto perm = match(prev, gs.vectors);
        CMat next(prev.rows(), m);
        const Eigen::Index row = reach + j - 1;
        for (Eigen::Index l = 0; l < m; ++l) {
            y(row, l) = gs.values(perm[static_cast<std::size_t>(l)]);
            next.col(l) = gs.vectors.col(perm[static_cast<std::size_t>(l)]);
        }
        s(row) = -j * delta;
        prev = std::move(next);
    }

    // Least squares in u = s / (reach * delta) for column scaling.
    const double h = reach * delta;
    const Eigen::Index cols = max_order + 1;
    RMat v(samples, cols);
    for (Eigen::Index i = 0; i < samples; ++i) {
        double p = 1.0;
        for (Eigen::Index k = 0; k < cols; ++k) {
            v(i, k) = p;
            p *= s(i) / h;
        }
    }
    Eigen::HouseholderQR<RMat> qr(v);
    RMat b = qr.solve(y);
    RMat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    RMat rinv = r.triangularView<Eigen::Upper>().solve(RMat::Identity(cols, cols));
    RVec cov_diag = rinv.rowwise().squaredNorm();

    const double dof = static_cast<double>(samples - cols);
    double resid = 0.0;
    for (Eigen::Index l = 0; l < m; ++l)
        resid = std::max(resid, std::sqrt((v * b.col(l) - y.col(l)).squaredNorm() / dof));
    const double floor = 8.0 * kEps * std::max(y.cwiseAbs().maxCoeff(), 1e-300);
    const double resid_scale = std::max(resid, floor);
    const double lead = b.cwiseAbs().maxCoeff();
    if (resid > 1e-4 * lead) {
        std::ostringstream os;
        os << "Taylor fit is ill-conditioned (residual " << resid << " vs leading coefficient " << lead
           << "); adjust delta or refine";
        throw IllConditionedFitError(os.str());
    }

    SplitReport rep;
    rep.theta0 = theta0;
    rep.delta = delta;
    rep.max_order = max_order;
    rep.residual_scale = resid_scale;
    rep.coefficients.resize(m, cols);
    rep.order_threshold.resize(cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
        const double scale = std::pow(h, static_cast<double>(k));
        for (Eigen::Index l = 0; l < m; ++l) rep.coefficients(l, k) = b(k, l) / scale;
        rep.order_threshold(k) = 10.0 * resid_scale * std::sqrt(cov_diag(k)) / scale;
    }
    for (Eigen::Index k = 1; k < cols && m > 1; ++k) {
        if (spread(rep.coefficients.col(k)) > rep.order_threshold(k)) {
            rep.split_order = static_cast<int>(k);
            break;
        }
    }
    if (rep.split_order) recenter_at_contact(rep, kContactRadius);
    if (m > 1 && spread(rep.coefficients.col(0)) > rep.order_threshold(0))
        rep.flags.emplace_back("group-not-coincident");
    rep.parity = !rep.split_order ? Parity::None : (*rep.split_order % 2 ? Parity::Odd : Parity::Even);

    if (rep.split_order) {
        Eigen::Index lo_plus = 0, lo_minus = 0;
        y.row(0).minCoeff(&lo_plus);
        y.row(reach).minCoeff(&lo_minus);
        auto margin = [&](Eigen::Index row) {
            RVec r2 = y.row(row).transpose();
            std::sort(r2.data(), r2.data() + r2.size());
            return r2(1) - r2(0);
        };
        const double noise = 100.0 * kEps * std::max(y.cwiseAbs().maxCoeff(), 1.0);
        if (margin(0) <= noise || margin(reach) <= noise) {
            rep.flags.emplace_back("minimal-branch-unresolved");
            rep.minimal_branch_same_both_sides = rep.parity == Parity::Even;
        } else {
            rep.minimal_branch_same_both_sides = lo_plus == lo_minus;
        }
        if ((rep.parity == Parity::Odd) == rep.minimal_branch_same_both_sides)
            rep.flags.emplace_back("parity-minimal-branch-disagreement");
    }
    return rep;
}

SplitReport fit_split_order(const EigenBranchSet& set, const ExceptionalPoint& ep, int max_order, double delta) {
    const auto m = static_cast<Eigen::Index>(ep.group.size());
    EigenDecomposition ed = eig_hermitian(set.pencil.at(ep.theta0));
    CMat q = canonical_basis(ed.vectors.middleCols(ep.sorted_index, m));
    SplitReport rep = fit_split_order(set.pencil, ep.theta0, q, max_order, delta);
    rep.group = ep.group;
    if (!ep.minimal()) return rep;

    // the exact chain is expanded at the (possibly re-centered) fit angle
    const double theta0 = rep.theta0;
    SupportData sd = support_data(set.pencil, theta0);
    if (sd.multiplicity != m) return rep;
    CMat c = minimal_slope_compression(set.pencil, sd, theta0);
    RVec mu = eig_hermitian(HermitianMatrix(c)).values;
    if (spread(mu) > kClusterRelTol * pencil_scale(set.pencil)) return rep;

    const Complex z = std::polar(1.0, theta0) * Complex(sd.lambda_min, mu.mean());
    const ComplexMatrix a(set.pencil.H.data() + Complex(0.0, 1.0) * set.pencil.K.data());
    try {
        NormalForm nf = normal_form(a, z, theta0);
        ExactCoefficients ex = exact_low_order_coefficients(reduction_chain(nf));
        RMat exact = exact_theta_coefficients(nf, ex);
        // Best assignment of fitted branches to exact rows.
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double dev = 0.0;
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index k = 0; k < 4 && k < rep.coefficients.cols(); ++k) {
                    const double e = exact(i, k);
                    if (std::isnan(e)) continue;
                    const double fit = rep.coefficients(perm[static_cast<std::size_t>(i)], k);
                    dev = std::max(dev, std::abs(fit - e) / std::max(1.0, std::abs(e)));
                }
            best = std::min(best, dev);
        } while (m <= 6 && std::next_permutation(perm.begin(), perm.end()));
        rep.exact_max_deviation = best;
        if (best > 1e-6) rep.flags.emplace_back("exact-fit-mismatch");
    } catch (const UnsupportedExactOrderError&) {
        rep.flags.emplace_back("exact-chain-unsupported");
    }
    return rep;
}

Theorem3Result theorem3_check(const ComplexMatrix& a, Complex z, double theta0) {
    NormalForm nf = normal_form(a, z, theta0);
    if (!nf.upper_left_zero)
        throw PreconditionError("normal form has a nonzero upper-left block: point is not a fully round "
                                "multiply generated point");
    Theorem3Result out;
    if (nf.k == 0) {
        out.block = CMat::Zero(nf.m, nf.m);
    } else {
        const CMat h1inv = pd_inverse(HermitianMatrix(nf.h1())).data();
        out.block = nf.k0() * h1inv * nf.k0().adjoint();
    }
    RVec v = eig_hermitian(HermitianMatrix(out.block)).values;
    const Eigen::Index m = v.size();
    out.largest_eig_gap = m > 1 ? v(m - 1) - v(m - 2) : std::numeric_limits<double>::infinity();
    out.sufficient_weak = out.largest_eig_gap > 1e-8 * std::max(1.0, out.block.norm());
    out.exact = a.size() == 4 && is_unitarily_irreducible(a);
    return out;
}

}  // namespace nrange
