#pragma once

// Empirical checks on f_A(x) = x* A x: preimage fibers of boundary points,
// openness of f_A at a preimage (does the image of a small ball reach both
// one-sided boundary arcs?), and convexity of images of spherical caps.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nrange/core.hpp"

namespace nrange {

inline constexpr double kFiberTol = 1e-9;
/// Coverage tolerance, relative to epsilon^2 ||A||_2.
inline constexpr double kDefaultCoverageRel = 1e-5;

struct PreimageSample {
    Complex z;
    double theta0 = 0.0;
    std::vector<CVec> points;
    /// "eigenspace-parametrized", "one-sided-limit" or "refined-by-projection" per point.
    std::vector<std::string> construction;
    double fiber_tol = kFiberTol;
};

/// Reference point on one of the two boundary arcs leaving z.
struct ArcTarget {
    int side = 1;            // +1: arc reached as theta increases, -1: as it decreases
    Complex target;
    bool segment = false;    // the arc is a flat portion
    double reference_theta = 0.0;
};

struct OpennessResult {
    CVec x;
    double epsilon = 0.0;
    bool covers_left_arc = false;   // side -1
    bool covers_right_arc = false;  // side +1
    double left_distance = 0.0;
    double right_distance = 0.0;
    double coverage_tol = 0.0;
};

struct ProbeOptions {
    double epsilon = 0.05;
    std::size_t samples = 20000;
    std::uint64_t seed = 1;
    std::size_t fiber_count = 8;
    double coverage_rel = kDefaultCoverageRel;
};

struct ProbeReport {
    Complex z;
    double theta0 = 0.0;
    PreimageSample fiber;
    std::array<ArcTarget, 2> targets;  // left, right
    std::vector<OpennessResult> results;
    bool empirical_strong = false;
    bool empirical_weak = false;
};

/// Unit vectors x in the minimal eigenspace at theta0 with f_A(x) = z, up to
/// global phase. Throws PreconditionError when z is not on the support line
/// at theta0 and SearchFailureError when no preimage is found.
PreimageSample preimage_fiber(const ComplexMatrix& a, Complex z, double theta0, std::size_t count,
                              std::uint64_t seed);

/// Boundary points on each arc leaving z whose preimages lie about epsilon/2
/// from the limiting preimage of that arc.
std::array<ArcTarget, 2> arc_targets(const ComplexMatrix& a, Complex z, double theta0, double epsilon);

/// Maps `samples` quasi-random unit vectors within distance epsilon of x
/// (modulo phase) through f_A, refines the closest image to each target by a
/// damped Newton search inside the ball, and reports coverage.
OpennessResult openness_test(const ComplexMatrix& a, const CVec& x, const std::array<ArcTarget, 2>& targets,
                             double epsilon, std::size_t samples, std::uint64_t seed,
                             double coverage_rel = kDefaultCoverageRel);

/// Same, locating the support angle of z and its arc targets first.
OpennessResult openness_test(const ComplexMatrix& a, Complex z, const CVec& x, double epsilon, std::size_t samples,
                             std::uint64_t seed, double coverage_rel = kDefaultCoverageRel);

/// Fiber plus openness at every fiber point. Empirical weak continuity: some
/// fiber point covers both arcs; strong: every sampled fiber point does.
ProbeReport probe_point(const ComplexMatrix& a, Complex z, const ProbeOptions& options = {});

struct ConvexityResult {
    double max_hull_violation = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::size_t probes = 0;
};

/// Images of the cap {y unit : ||y - x|| <= r} must fill the convex hull of
/// their sampled cloud: every probe point inside the hull has to be hit by a
/// cap image within tol = 1e-3 ||A||_2 r.
ConvexityResult convexity_check(const ComplexMatrix& a, const CVec& x, double r, std::size_t samples,
                                std::uint64_t seed);

/// Quasi-random points: Halton sequence with a seeded Cranley-Patterson
/// rotation. Falls back to a seeded Mersenne twister beyond 64 dimensions.
class QuasiRandom {
public:
    QuasiRandom(std::size_t dims, std::uint64_t seed);
    /// Point with index i, coordinates in [0, 1).
    void point(std::size_t i, double* out) const;
    std::size_t dims() const { return dims_; }

private:
    std::size_t dims_;
    std::vector<double> shift_;
    std::uint64_t seed_;
};

/// Planar convex hull (counter-clockwise, no collinear points).
std::vector<Complex> convex_hull(std::vector<Complex> pts);

}  // namespace nrange
