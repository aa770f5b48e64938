#pragma once

// Eigenvalue branches of the pencil Re(e^{-i theta} A) over a periodic angle
// grid, the critical curves z_k(theta) = f_A(x_k(theta)), exceptional angles
// where distinct branches meet, and flat portions of the boundary.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "nrange/core.hpp"

namespace nrange {

inline constexpr std::size_t kDefaultGridCount = 2048;
inline constexpr std::size_t kMinGridCount = 360;
/// Multiplicity clusters: eigenvalues within this fraction of ||H|| + ||K||.
inline constexpr double kClusterRelTol = 1e-7;

/// Uniform periodic grid theta_j = 2 pi j / count on [0, 2 pi).
class AngleGrid {
public:
    explicit AngleGrid(std::size_t count = kDefaultGridCount);

    std::size_t count() const { return count_; }
    double step() const { return step_; }
    double operator[](std::size_t j) const { return step_ * static_cast<double>(j); }
    /// Nearest grid index to theta (taken modulo 2 pi).
    std::size_t nearest(double theta) const;

private:
    std::size_t count_;
    double step_;
};

/// Analytic branches sampled on a grid. Branch k at grid index j has value
/// values(j, k) and unit eigenvector vectors[j].col(k); sorted_position(j, k)
/// is the position of that value in the ascending spectrum at theta_j.
struct EigenBranchSet {
    AngleGrid grid;
    HermitianPencil pencil;
    RMat values;
    std::vector<CMat> vectors;
    Eigen::MatrixXi sorted_position;
    // grid index where tracing began; branches may be permuted across
    // (trace_start - 1, trace_start) after a full turn
    std::size_t trace_start = 0;

    Eigen::Index branch_count() const { return values.cols(); }
};

struct ExceptionalPoint {
    double theta0 = 0.0;
    std::vector<int> group;       // branch indices meeting at theta0
    double gap_residual = 0.0;    // largest gap inside the group at theta0
    double value = 0.0;           // common eigenvalue at theta0
    int sorted_index = 0;         // position of the group's lowest member in the spectrum
    bool minimal() const { return sorted_index == 0; }
};

struct FlatPortion {
    double theta = 0.0;
    Complex start;                // endpoint generated by the smallest slope
    Complex end;                  // endpoint generated by the largest slope
    std::vector<int> branches;
};

struct SupportData {
    double lambda_min = 0.0;
    CMat basis;                   // orthonormal basis of the minimal eigenspace
    int multiplicity = 0;
};

/// H cos(theta) + K sin(theta).
HermitianMatrix pencil_at(const HermitianPencil& pencil, double theta);

/// Tracks branches across the grid by eigenvector overlap. Inside clusters of
/// numerically equal eigenvalues the previous vectors are projected onto the
/// cluster eigenspace and orthonormalized symmetrically. Throws
/// GridTooCoarseError when a branch overlaps two clusters equally (within 1e-6).
EigenBranchSet trace_branches(const HermitianPencil& pencil, const AngleGrid& grid);

/// z_k(theta_j) = x_k(theta_j)* A x_k(theta_j) for every grid angle.
std::vector<Complex> critical_curve(const EigenBranchSet& set, const ComplexMatrix& a, int k);

SupportData support_data(const HermitianPencil& pencil, double theta);

/// Compression of Im(e^{-i theta} A) onto the minimal eigenspace, i.e. the
/// first-order coefficients of the minimal branches at theta.
CMat minimal_slope_compression(const HermitianPencil& pencil, const SupportData& sd, double theta);

/// Golden-section minimum of the slope spread of the m lowest branches, i.e.
/// the eigenvalue spread of the derivative compressed onto the m lowest
/// eigenvectors, over [theta - radius, theta + radius]. Returns the angle and
/// the spread. An angle found by minimizing an eigenvalue gap is only good to
/// about the square root of machine precision; at a tangential contact the
/// spread vanishes linearly and this recovers the contact angle, while a
/// genuine flat portion keeps its spread across the whole window.
std::pair<double, double> slope_spread_minimum(const HermitianPencil& pencil, double theta, Eigen::Index m,
                                               double radius);

/// Window used with slope_spread_minimum when screening flat portions.
inline constexpr double kContactRadius = 1e-6;

/// Point where the minimal branch touches the support line at theta:
/// f_A of a minimal eigenvector.
Complex boundary_point(const ComplexMatrix& a, const HermitianPencil& pencil, double theta);

/// Pairs of branches that agree within tol on at least a quarter of the grid.
std::vector<std::pair<int, int>> find_identical_branches(const EigenBranchSet& set, double tol);

/// Angles where distinct branches meet. Candidates are local minima of the
/// gaps of the sorted spectrum, refined by golden-section search until the gap
/// is at most tol; gaps that stay below tol on a quarter of the grid belong to
/// identical branches and are skipped.
std::vector<ExceptionalPoint> find_exceptional_points(const EigenBranchSet& set, double tol = kDefaultTol);

/// Flat portions: angles where the minimal eigenvalue is repeated and its
/// branches split at first order. Checked at every minimal exceptional point
/// and at every grid angle with a repeated minimal eigenvalue.
std::vector<FlatPortion> find_flat_portions(const ComplexMatrix& a, const EigenBranchSet& set,
                                            const std::vector<ExceptionalPoint>& points);
std::vector<FlatPortion> find_flat_portions(const ComplexMatrix& a, const EigenBranchSet& set);

/// Permutation tau with lambda_k(theta + pi) = -lambda_tau(k)(theta) on the
/// first half of the grid, and the largest residual of that identity.
/// Empty when the grid count is odd.
std::optional<std::pair<std::vector<int>, double>> branch_symmetry(const EigenBranchSet& set);

/// CSV rows k,theta,lambda,re_z,im_z with 17 significant digits.
void write_branches_csv(std::ostream& os, const EigenBranchSet& set, const ComplexMatrix& a);

/// Sampled boundary of F(A): boundary_point at every grid angle.
std::vector<Complex> trace_boundary(const ComplexMatrix& a, const AngleGrid& grid);

}  // namespace nrange
