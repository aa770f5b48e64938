#pragma once

// Boundary-point taxonomy (flat interior, flat endpoint, corner, fully round),
// multiply generated points, and strong/weak continuity verdicts for the
// inverse of f_A(x) = x* A x.

#include <optional>
#include <string>
#include <vector>

#include "nrange/branches.hpp"
#include "nrange/core.hpp"
#include "nrange/perturb.hpp"

namespace nrange {

enum class PointKind { FlatInterior, FlatEndpoint, Corner, FullyRound };
const char* to_string(PointKind k);

struct BoundaryPointRecord {
    Complex z;
    double theta0 = 0.0;
    PointKind kind = PointKind::FullyRound;
    int multiplicity = 1;
    bool multiply_generated = false;
    bool isolated_mg = false;
    std::optional<std::size_t> flat_index;  // into the flat portion list, for flat kinds
    /// Orthonormal basis of the branches passing through z (the minimal
    /// eigenspace, or its part with the extreme slope at a flat endpoint).
    CMat group_basis;
    std::vector<std::string> flags;
};

enum class Clause {
    NonRound,
    FlatInterior,
    FlatEndpoint,
    NoSplit,
    EvenSplit,
    OddSplit,
    Theorem3Sufficient,
    Theorem3NecessaryN4,
    NonRoundOrGeneric,
};
const char* to_string(Clause c);

struct ContinuityVerdict {
    Complex z;
    bool strong = true;
    bool weak = true;
    Clause clause = Clause::NonRoundOrGeneric;
    std::optional<SplitReport> split;
    std::vector<std::string> flags;
};

struct AnalysisOptions {
    std::size_t grid_count = kDefaultGridCount;
    double tol = kDefaultTol;
    int max_split_order = kDefaultMaxSplitOrder;
    double fit_delta = kDefaultFitDelta;
};

struct Candidate {
    BoundaryPointRecord record;
    ContinuityVerdict verdict;
};

struct AnalysisReport {
    ComplexMatrix matrix;
    AnalysisOptions options;
    bool irreducible = false;
    std::vector<ExceptionalPoint> exceptional_points;
    std::vector<FlatPortion> flat_portions;
    std::vector<Candidate> candidates;
    double diameter = 0.0;

    std::size_t failure_count() const;
};

/// Largest distance between two sampled boundary points.
double boundary_diameter(const std::vector<Complex>& boundary);

/// Classifies z, attained at support angle theta0. Throws PreconditionError
/// when z is not on the support line at theta0 or is not attained there.
BoundaryPointRecord classify_boundary_point(const ComplexMatrix& a, Complex z, double theta0,
                                            const EigenBranchSet& set,
                                            const std::vector<FlatPortion>& flat_portions);

/// Group fit appropriate for a record: the whole minimal group for fully round
/// multiply generated points, the extreme-slope subgroup at flat endpoints.
/// Empty when the group has a single branch.
std::optional<SplitReport> split_for_record(const EigenBranchSet& set, const BoundaryPointRecord& record,
                                            const AnalysisOptions& options = {});

/// Throws PreconditionError when a round point with a repeated group comes
/// without a split report.
ContinuityVerdict continuity_verdict(const ComplexMatrix& a, const BoundaryPointRecord& record,
                                     const std::optional<SplitReport>& split);

AnalysisReport analyze_all(const ComplexMatrix& a, const AnalysisOptions& options = {});

/// Every isolated, fully round, multiply generated candidate must fail strong
/// continuity; returns a description of each one that does not.
std::vector<std::string> theorem2_crosscheck(const AnalysisReport& report);

/// Full single-point analysis: support angle, classification and verdict.
/// Throws PreconditionError naming the nearest boundary point when z is not
/// on the boundary of F(A) (tolerance 1e-7 of ||H|| + ||K||).
Candidate analyze_point(const ComplexMatrix& a, Complex z, const AnalysisOptions& options = {});

/// Support angle of a boundary point z. Throws PreconditionError naming the
/// nearest boundary point when z is inside or outside F(A).
double boundary_support_angle(const ComplexMatrix& a, Complex z, std::size_t grid_count = kDefaultGridCount);

/// Support angle at which z touches the boundary: minimizes
/// Re(e^{-i theta} z) - lambda_min(theta). Returns the angle and that minimum
/// (zero for boundary points, positive inside, negative outside).
std::pair<double, double> locate_support_angle(const HermitianPencil& pencil, Complex z,
                                               std::size_t grid_count = kDefaultGridCount);

}  // namespace nrange
