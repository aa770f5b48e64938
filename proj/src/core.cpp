#include "nrange/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace nrange {

namespace {

constexpr double kPhaseThreshold = 1e-8;
constexpr double kTieTol = 1e-12;

}  // namespace

ComplexMatrix::ComplexMatrix(CMat entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) {
        std::ostringstream os;
        os << "matrix must be square, got " << m_.rows() << "x" << m_.cols();
        throw DimensionError(os.str());
    }
    if (m_.rows() == 0) throw DimensionError("matrix must have positive dimension");
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
        for (Eigen::Index j = 0; j < m_.cols(); ++j)
            if (!std::isfinite(m_(i, j).real()) || !std::isfinite(m_(i, j).imag()))
                throw InputError("matrix entries must be finite");
}

HermitianMatrix::HermitianMatrix(const CMat& m) {
    if (m.rows() != m.cols()) throw DimensionError("Hermitian matrix must be square");
    m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) { return HermitianMatrix(CMat::Zero(n, n)); }

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
    return HermitianMatrix(CMat::Identity(n, n));
}

double HermitianMatrix::norm() const {
    if (m_.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

HermitianMatrix HermitianPencil::at(double theta) const {
    return HermitianMatrix(H.data() * std::cos(theta) + K.data() * std::sin(theta));
}

HermitianMatrix HermitianPencil::derivative_at(double theta) const {
    return HermitianMatrix(-H.data() * std::sin(theta) + K.data() * std::cos(theta));
}

double HermitianPencil::scale() const { return H.norm() + K.norm(); }

HermitianPencil hermitian_parts(const ComplexMatrix& a) {
    const CMat& m = a.data();
    const Complex two_i(0.0, 2.0);
    return HermitianPencil{HermitianMatrix(0.5 * (m + m.adjoint())),
                           HermitianMatrix((m - m.adjoint()) / two_i)};
}

void fix_phase(Eigen::Ref<CVec> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > kPhaseThreshold) {
            v *= std::conj(v(i)) / mag;
            v(i) = Complex(mag, 0.0);
            return;
        }
    }
}

CMat canonical_basis(const CMat& q) {
    const Eigen::Index n = q.rows();
    const Eigen::Index m = q.cols();
    CMat proj = q * q.adjoint();
    CMat out(n, m);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Eigen::Index k = 0; k < m; ++k) {
        // Residual of every projector column against the basis built so far.
        Eigen::Index best = -1;
        double best_norm = -1.0;
        CVec best_vec;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            CVec r = proj.col(j);
            for (Eigen::Index p = 0; p < k; ++p) r -= out.col(p) * out.col(p).dot(r);
            for (Eigen::Index p = 0; p < k; ++p) r -= out.col(p) * out.col(p).dot(r);
            const double nr = r.norm();
            if (nr > best_norm * (1.0 + 1e-12) + 1e-14) {
                best = j;
                best_norm = nr;
                best_vec = r;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        CVec v = best_vec / best_norm;
        fix_phase(v);
        out.col(k) = v;
    }
    return out;
}

EigenDecomposition eig_hermitian(const HermitianMatrix& m) {
    const Eigen::Index n = m.size();
    if (n == 0) throw DimensionError("empty matrix");
    Eigen::SelfAdjointEigenSolver<CMat> es(m.data());
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "Hermitian eigensolver did not converge (n=" << n
           << ", ||M||_F=" << m.data().norm() << ")";
        throw NumericError(os.str());
    }
    EigenDecomposition out{es.eigenvalues(), es.eigenvectors()};
    const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && out.values(stop) - out.values(stop - 1) <= kTieTol * scale) ++stop;
        if (stop - start > 1) {
            out.vectors.middleCols(start, stop - start) =
                canonical_basis(out.vectors.middleCols(start, stop - start));
        } else {
            fix_phase(out.vectors.col(start));
        }
        start = stop;
    }
    return out;
}

int commutant_dimension(const HermitianPencil& pencil, double tol) {
    const Eigen::Index n = pencil.size();
    const CMat& h = pencil.H.data();
    const CMat& k = pencil.K.data();
    const Eigen::Index params = n * n;
    RMat op(4 * n * n, params);
    Eigen::Index col = 0;
    auto push = [&](const CMat& x) {
        CMat ch = x * h - h * x;
        CMat ck = x * k - k * x;
        Eigen::Index row = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                op(row++, col) = ch(i, j).real();
                op(row++, col) = ch(i, j).imag();
                op(row++, col) = ck(i, j).real();
                op(row++, col) = ck(i, j).imag();
            }
        ++col;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        CMat x = CMat::Zero(n, n);
        x(i, i) = 1.0;
        push(x);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            CMat re = CMat::Zero(n, n);
            re(i, j) = re(j, i) = 1.0;
            push(re);
            CMat im = CMat::Zero(n, n);
            im(i, j) = Complex(0.0, 1.0);
            im(j, i) = Complex(0.0, -1.0);
            push(im);
        }
    }
    Eigen::BDCSVD<RMat> svd(op);
    const RVec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    // The identity is always in the commutant, so an all-zero operator (scalar
    // H and K) still counts every parameter as a null direction.
    const double cut = tol * std::max(smax, 1.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return static_cast<int>(params) - rank;
}

bool is_unitarily_irreducible(const ComplexMatrix& a, double tol) {
    if (a.size() == 1) return true;
    return commutant_dimension(hermitian_parts(a), tol) == 1;
}

HermitianMatrix pd_inverse(const HermitianMatrix& m, double tol) {
    EigenDecomposition ed = eig_hermitian(m);
    const double norm = ed.values.cwiseAbs().maxCoeff();
    const double lo = ed.values(0);
    if (!(lo > tol * norm)) {
        std::ostringstream os;
        os << "matrix is not positive definite: smallest eigenvalue " << lo << " vs norm " << norm;
        throw NotPositiveDefiniteError(os.str());
    }
    const RVec inv = ed.values.cwiseInverse();
    return HermitianMatrix(ed.vectors * inv.asDiagonal() * ed.vectors.adjoint());
}

Complex quadratic_form(const CMat& a, const CVec& x) { return x.dot(a * x); }

double spectral_norm(const CMat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

double phase_distance(const CVec& x, const CVec& y) {
    // ||x - e^{i phi} y||^2 = |x|^2 + |y|^2 - 2 Re(e^{i phi} <x,y>), minimized at |<x,y>|.
    const double v = x.squaredNorm() + y.squaredNorm() - 2.0 * std::abs(x.dot(y));
    return std::sqrt(std::max(0.0, v));
}

double subspace_distance(const CMat& q1, const CMat& q2) {
    const CMat& small = q1.cols() <= q2.cols() ? q1 : q2;
    const CMat& big = q1.cols() <= q2.cols() ? q2 : q1;
    CMat r = small - big * (big.adjoint() * small);
    if (r.size() == 0) return 0.0;
    return std::min(1.0, spectral_norm(r));
}

}  // namespace nrange
