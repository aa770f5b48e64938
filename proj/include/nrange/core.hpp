#pragma once

// Dense complex linear algebra used by every analysis stage: Hermitian parts,
// the Hermitian pencil H cos(theta) + K sin(theta), Hermitian eigensolves with
// deterministic vector normalization, positive-definite inverses and the
// unitary irreducibility test.

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "nrange/errors.hpp"

namespace nrange {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Tolerance used wherever a caller does not supply one.
inline constexpr double kDefaultTol = 1e-9;

/// A finite square complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(CMat entries);

    Eigen::Index size() const { return m_.rows(); }
    const CMat& data() const { return m_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    CMat m_;
};

/// A Hermitian matrix. Input is replaced by (M + M*)/2 on construction, so the
/// stored entries are exactly Hermitian.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(const CMat& m);

    static HermitianMatrix zero(Eigen::Index n);
    static HermitianMatrix identity(Eigen::Index n);

    Eigen::Index size() const { return m_.rows(); }
    const CMat& data() const { return m_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    /// Spectral norm (largest absolute eigenvalue).
    double norm() const;

private:
    CMat m_;
};

/// H = Re A and K = Im A; the member at angle theta is Re(e^{-i theta} A).
struct HermitianPencil {
    HermitianMatrix H;
    HermitianMatrix K;

    Eigen::Index size() const { return H.size(); }

    /// H cos(theta) + K sin(theta).
    HermitianMatrix at(double theta) const;
    /// d/dtheta of at(theta): -H sin(theta) + K cos(theta) = Im(e^{-i theta} A).
    HermitianMatrix derivative_at(double theta) const;
    /// ||H||_2 + ||K||_2, the scale used for cluster and continuity bounds.
    double scale() const;
};

struct EigenDecomposition {
    RVec values;   // ascending
    CMat vectors;  // orthonormal columns, vectors.col(j) belongs to values(j)
};

/// Splits A into its Hermitian parts; A = H + iK.
HermitianPencil hermitian_parts(const ComplexMatrix& a);

/// Eigendecomposition with ascending values. Every vector has its first
/// component of magnitude above 1e-8 made real and positive; inside a set of
/// tied eigenvalues the basis is replaced by canonical_basis() of the
/// eigenspace, so the output depends only on the matrix.
EigenDecomposition eig_hermitian(const HermitianMatrix& m);

/// Orthonormal basis of the column space of q (q must have orthonormal
/// columns). Built by pivoted Gram-Schmidt over the columns of the projector
/// q q*, so it depends on the subspace only, not on the given basis.
CMat canonical_basis(const CMat& q);

/// Rotates v so that its first component above 1e-8 in magnitude is real positive.
void fix_phase(Eigen::Ref<CVec> v);

/// True iff no nontrivial orthogonal projection commutes with both Re A and Im A.
bool is_unitarily_irreducible(const ComplexMatrix& a, double tol = kDefaultTol);

/// Dimension of the real space of Hermitian X with [X,H] = [X,K] = 0.
int commutant_dimension(const HermitianPencil& pencil, double tol = kDefaultTol);

/// Inverse of a positive definite matrix. Throws NotPositiveDefiniteError when
/// the smallest eigenvalue is not above tol * ||M||_2.
HermitianMatrix pd_inverse(const HermitianMatrix& m, double tol = kDefaultTol);

/// f_A(x) = x* A x.
Complex quadratic_form(const CMat& a, const CVec& x);
inline Complex quadratic_form(const ComplexMatrix& a, const CVec& x) {
    return quadratic_form(a.data(), x);
}

double spectral_norm(const CMat& m);

/// min over phases phi of ||x - e^{i phi} y||.
double phase_distance(const CVec& x, const CVec& y);

/// Sine of the largest principal angle between the column spaces of two
/// matrices with orthonormal columns (0 when one space contains the other).
double subspace_distance(const CMat& q1, const CMat& q2);

}  // namespace nrange
