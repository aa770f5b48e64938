#pragma once

// Local perturbation analysis of a group of eigenvalue branches meeting at a
// support angle: block normal form, the reduction chain up to third order,
// and least-squares Taylor fits that locate the splitting order.

#include <optional>
#include <string>
#include <vector>

#include "nrange/branches.hpp"
#include "nrange/core.hpp"

namespace nrange {

inline constexpr int kDefaultMaxSplitOrder = 7;
inline constexpr double kDefaultFitDelta = 2.5e-3;

/// e^{-i theta0}(A - z I) rewritten in a basis whose first m vectors span the
/// minimal eigenspace of its real part:
///   H' = diag(0_m, H1) with H1 positive definite,
///   K' = [[K_ul, K0], [K0*, K1]].
/// K_ul vanishes exactly when z is the point generated by the whole minimal
/// eigenspace (fully round, multiply generated case).
struct NormalForm {
    double theta0 = 0.0;
    Complex shift;
    double lambda_min = 0.0;     // smallest eigenvalue of Re(e^{-i theta0}(A - zI)) before removal
    HermitianMatrix h_prime;
    HermitianMatrix k_prime;
    CMat basis;                  // U, columns: minimal eigenspace first
    Eigen::Index m = 0;          // multiplicity of the minimal eigenvalue
    Eigen::Index k = 0;          // n - m
    bool upper_left_zero = false;

    CMat h1() const { return h_prime.data().bottomRightCorner(k, k); }
    CMat k_upper_left() const { return k_prime.data().topLeftCorner(m, m); }
    CMat k0() const { return k_prime.data().topRightCorner(m, k); }
    CMat k1() const { return k_prime.data().bottomRightCorner(k, k); }
};

struct ReductionChain {
    Eigen::Index m = 0;
    CMat projection;      // P = diag(I_m, 0)
    CMat pseudo_inverse;  // S = diag(0, H1^{-1})
    CMat first;           // P K' P
    CMat second;          // -P K' S K' P
    CMat third;           // P K' S (K' - mu1 I) S K' P, mu1 the scalar first-order value

    CMat first_block() const { return first.topLeftCorner(m, m); }
    /// -K0 H1^{-1} K0*
    CMat second_block() const { return second.topLeftCorner(m, m); }
    /// K0 H1^{-1} K1 H1^{-1} K0* (with K1 shifted by the first-order value)
    CMat third_block() const { return third.topLeftCorner(m, m); }
};

/// Taylor coefficients of the eigenvalue group of H' + t K' at t = 0.
struct ExactCoefficients {
    struct Branch {
        double order1 = 0.0;
        std::optional<double> order2;
        std::optional<double> order3;
        int subgroup = 0;
    };
    std::vector<Branch> branches;
    /// First order (1..3) at which the coefficients differ; nullopt if they
    /// agree through order 3.
    std::optional<int> split_order;
};

enum class Parity { Odd, Even, None };

const char* to_string(Parity p);

struct SplitReport {
    double theta0 = 0.0;
    std::vector<int> group;
    /// coefficients(b, j): order-j Taylor coefficient in theta of branch b about theta0.
    RMat coefficients;
    std::optional<int> split_order;
    Parity parity = Parity::None;
    bool minimal_branch_same_both_sides = true;
    /// Per-order decision threshold: 10x the coefficient uncertainty implied by
    /// the fit residual.
    RVec order_threshold;
    double residual_scale = 0.0;
    double delta = kDefaultFitDelta;
    int max_order = kDefaultMaxSplitOrder;
    /// Largest relative deviation from the exact coefficients (orders <= 3),
    /// when the exact chain applies.
    std::optional<double> exact_max_deviation;
    std::vector<std::string> flags;
};

struct Theorem3Result {
    bool sufficient_weak = false;
    double largest_eig_gap = 0.0;   // +inf when the block is 1x1
    bool exact = false;             // n == 4 and A unitarily irreducible
    CMat block;                     // K0 H1^{-1} K0*
};

/// Throws PreconditionError when z is not on the support line at theta0
/// (tolerance 1e-7 of the pencil scale) and NumericError when H1 is not
/// positive definite.
NormalForm normal_form(const ComplexMatrix& a, Complex z, double theta0);

ReductionChain reduction_chain(const NormalForm& nf);

/// Throws UnsupportedExactOrderError when the smallest second-order value is
/// repeated on a proper part of the group.
ExactCoefficients exact_low_order_coefficients(const ReductionChain& chain);

/// Theta-parametrized coefficients c0..c3 of the branches of A at
/// theta0 + s, from the t-parametrized exact coefficients of a normal form.
RMat exact_theta_coefficients(const NormalForm& nf, const ExactCoefficients& ex);

/// Fits the group whose eigenspace at theta0 is spanned by group_basis.
/// Samples theta0 +- j delta, j = 1..max_order+2.
SplitReport fit_split_order(const HermitianPencil& pencil, double theta0, const CMat& group_basis,
                            int max_order = kDefaultMaxSplitOrder, double delta = kDefaultFitDelta);

/// Same, for an exceptional point found on a branch set; cross-checks against
/// the exact chain when the group is minimal with scalar first-order part.
SplitReport fit_split_order(const EigenBranchSet& set, const ExceptionalPoint& ep,
                            int max_order = kDefaultMaxSplitOrder, double delta = kDefaultFitDelta);

Theorem3Result theorem3_check(const ComplexMatrix& a, Complex z, double theta0);

}  // namespace nrange
