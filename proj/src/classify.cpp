#include "nrange/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace nrange {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCornerStep = 1e-4;
constexpr int kCollinearWindow = 9;
constexpr double kCollinearRelTol = 1e-7;
constexpr double kIsolationRel = 1e-3;
constexpr double kOnLineRelTol = 1e-7;

double angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

double lambda_min(const HermitianPencil& pencil, double theta) {
    Eigen::SelfAdjointEigenSolver<CMat> es(pencil.at(theta).data(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double segment_distance(Complex p, Complex a, Complex b) {
    const Complex d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    const double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

// Boundary samples from the already traced minimal branch.
std::vector<Complex> boundary_from_set(const ComplexMatrix& a, const EigenBranchSet& set) {
    std::vector<Complex> out;
    out.reserve(set.grid.count());
    for (std::size_t j = 0; j < set.grid.count(); ++j) {
        const auto row = static_cast<Eigen::Index>(j);
        Eigen::Index k = 0;
        for (Eigen::Index c = 0; c < set.branch_count(); ++c)
            if (set.sorted_position(row, c) == 0) k = c;
        out.push_back(quadratic_form(a, CVec(set.vectors[j].col(k))));
    }
    return out;
}

std::vector<int> group_indices(const EigenBranchSet& set, double theta, const CMat& basis) {
    const std::size_t j = set.grid.nearest(theta);
    RVec w = (basis.adjoint() * set.vectors[j]).colwise().squaredNorm().transpose();
    std::vector<int> idx(static_cast<std::size_t>(set.branch_count()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return w(x) > w(y); });
    idx.resize(static_cast<std::size_t>(basis.cols()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

const char* to_string(PointKind k) {
    switch (k) {
        case PointKind::FlatInterior: return "flat_interior";
        case PointKind::FlatEndpoint: return "flat_endpoint";
        case PointKind::Corner: return "corner";
        case PointKind::FullyRound: return "fully_round";
    }
    return "fully_round";
}

const char* to_string(Clause c) {
    switch (c) {
        case Clause::NonRound: return "non-round";
        case Clause::FlatInterior: return "flat-interior";
        case Clause::FlatEndpoint: return "flat-endpoint";
        case Clause::NoSplit: return "no-split";
        case Clause::EvenSplit: return "even-split";
        case Clause::OddSplit: return "odd-split";
        case Clause::Theorem3Sufficient: return "theorem3-sufficient";
        case Clause::Theorem3NecessaryN4: return "theorem3-necessary-n4";
        case Clause::NonRoundOrGeneric: return "non-round-or-generic";
    }
    return "non-round-or-generic";
}

std::size_t AnalysisReport::failure_count() const {
    return static_cast<std::size_t>(
        std::count_if(candidates.begin(), candidates.end(), [](const Candidate& c) { return !c.verdict.strong; }));
}

double boundary_diameter(const std::vector<Complex>& boundary) {
    double d = 0.0;
    for (std::size_t i = 0; i < boundary.size(); ++i)
        for (std::size_t j = i + 1; j < boundary.size(); ++j) d = std::max(d, std::abs(boundary[i] - boundary[j]));
    return d;
}

BoundaryPointRecord classify_boundary_point(const ComplexMatrix& a, Complex z, double theta0,
                                            const EigenBranchSet& set,
                                            const std::vector<FlatPortion>& flat_portions) {
    const HermitianPencil& pencil = set.pencil;
    const double scale = std::max(pencil.scale(), 1.0);
    const double ctol = kClusterRelTol * scale;
    const Complex w = std::polar(1.0, -theta0) * z;

    SupportData sd = support_data(pencil, theta0);
    if (std::abs(w.real() - sd.lambda_min) > kOnLineRelTol * scale) {
        std::ostringstream os;
        os << "point (" << z.real() << ", " << z.imag() << ") is not on the support line at theta=" << theta0;
        throw PreconditionError(os.str());
    }
    CMat c = minimal_slope_compression(pencil, sd, theta0);
    EigenDecomposition ec = eig_hermitian(HermitianMatrix(c));
    const Eigen::Index m = ec.values.size();
    const double mu = w.imag();
    const double lo = ec.values(0), hi = ec.values(m - 1);
    if (mu < lo - kOnLineRelTol * scale || mu > hi + kOnLineRelTol * scale)
        throw PreconditionError("point lies on the support line but outside F(A)");

    BoundaryPointRecord rec;
    rec.z = z;
    rec.theta0 = theta0;
    rec.multiplicity = sd.multiplicity;

    const bool flat = hi - lo > ctol && slope_spread_minimum(pencil, theta0, m, kContactRadius).second > ctol;
    const double here = 1e-9 * scale;
    const bool stationary = std::abs(boundary_point(a, pencil, theta0 + kCornerStep) - z) <= here ||
                            std::abs(boundary_point(a, pencil, theta0 - kCornerStep) - z) <= here;

    // Branches through z: eigenvectors of the compression with slope mu.
    std::vector<Eigen::Index> through;
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(ec.values(i) - mu) <= kOnLineRelTol * scale) through.push_back(i);
    auto basis_of = [&](const std::vector<Eigen::Index>& cols) {
        CMat q(sd.basis.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) q.col(static_cast<Eigen::Index>(i)) = sd.basis * ec.vectors.col(cols[i]);
        return cols.size() > 1 ? canonical_basis(q) : q;
    };

    if (flat) {
        const bool endpoint = !through.empty();
        rec.kind = stationary ? PointKind::Corner : endpoint ? PointKind::FlatEndpoint : PointKind::FlatInterior;
        rec.group_basis = endpoint ? basis_of(through) : sd.basis;
        for (std::size_t i = 0; i < flat_portions.size(); ++i) {
            const auto& fp = flat_portions[i];
            if (angle_gap(fp.theta, theta0) <= 1e-6 && segment_distance(z, fp.start, fp.end) <= kOnLineRelTol * scale) {
                rec.flat_index = i;
                break;
            }
        }
        if (!rec.flat_index) rec.flags.emplace_back("flat-portion-not-listed");
    } else {
        rec.kind = stationary ? PointKind::Corner : PointKind::FullyRound;
        rec.group_basis = sd.basis;
    }

    rec.multiply_generated =
        sd.multiplicity >= 2 && (rec.kind == PointKind::FlatInterior || through.size() >= 2);

    if (rec.multiply_generated && rec.kind != PointKind::FlatInterior) {
        // A high-order touch leaves gaps far below the cluster tolerance next
        // to theta0, so only exact repetition marks a continuum.
        const double h = set.grid.step();
        auto repeated = [&](double t) {
            Eigen::SelfAdjointEigenSolver<CMat> es(pencil.at(t).data(), Eigen::EigenvaluesOnly);
            return es.eigenvalues()(1) - es.eigenvalues()(0) <= 1e-12 * scale;
        };
        const bool repeated_nearby = repeated(theta0 + h) || repeated(theta0 - h);
        rec.isolated_mg = !repeated_nearby;
    }

    if (rec.kind == PointKind::FullyRound) {
        // Neither one-sided neighbourhood may be a segment.
        std::vector<Complex> boundary = boundary_from_set(a, set);
        const double diam = std::max(boundary_diameter(boundary), 1e-300);
        const double h = set.grid.step();
        for (int side : {1, -1}) {
            std::vector<Complex> pts;
            for (int j = 0; j < kCollinearWindow; ++j) pts.push_back(boundary_point(a, pencil, theta0 + side * j * h));
            double dev = 0.0;
            for (const auto& p : pts) dev = std::max(dev, segment_distance(p, pts.front(), pts.back()));
            if (dev <= kCollinearRelTol * diam) rec.flags.emplace_back(side > 0 ? "collinear-plus-side" : "collinear-minus-side");
        }
    }
    return rec;
}

std::optional<SplitReport> split_for_record(const EigenBranchSet& set, const BoundaryPointRecord& record,
                                            const AnalysisOptions& options) {
    if (record.group_basis.cols() < 2) return std::nullopt;
    if (record.kind == PointKind::FlatInterior || record.kind == PointKind::Corner) return std::nullopt;
    const std::vector<int> group = group_indices(set, record.theta0, record.group_basis);
    if (record.kind == PointKind::FullyRound) {
        ExceptionalPoint ep;
        ep.theta0 = record.theta0;
        ep.group = group;
        ep.sorted_index = 0;
        return fit_split_order(set, ep, options.max_split_order, options.fit_delta);
    }
    SplitReport rep =
        fit_split_order(set.pencil, record.theta0, record.group_basis, options.max_split_order, options.fit_delta);
    rep.group = group;
    return rep;
}

ContinuityVerdict continuity_verdict(const ComplexMatrix& a, const BoundaryPointRecord& record,
                                     const std::optional<SplitReport>& split) {
    ContinuityVerdict v;
    v.z = record.z;
    v.split = split;
    const bool group = record.group_basis.cols() >= 2;
    switch (record.kind) {
        case PointKind::Corner:
            v.clause = Clause::NonRound;
            return v;
        case PointKind::FlatInterior:
            v.clause = Clause::FlatInterior;
            return v;
        case PointKind::FlatEndpoint:
        case PointKind::FullyRound:
            break;
    }
    if (!group) {
        v.clause = Clause::NoSplit;
        return v;
    }
    if (!split) throw PreconditionError("a repeated branch group needs a split report");
    for (const auto& f : split->flags)
        if (f == "parity-minimal-branch-disagreement" || f == "exact-fit-mismatch") v.flags.push_back("review:" + f);
    if (!split->split_order) {
        v.clause = Clause::NoSplit;
        return v;
    }
    v.strong = false;
    if (record.kind == PointKind::FlatEndpoint) {
        // The segment side is always reachable, so only strong continuity is at stake.
        v.clause = Clause::FlatEndpoint;
        return v;
    }
    v.weak = split->minimal_branch_same_both_sides;
    v.clause = split->parity == Parity::Odd ? Clause::OddSplit : Clause::EvenSplit;
    if (record.multiply_generated) {
        try {
            const Theorem3Result t3 = theorem3_check(a, record.z, record.theta0);
            if (t3.exact) {
                v.clause = Clause::Theorem3NecessaryN4;
                if (t3.sufficient_weak != v.weak) v.flags.emplace_back("review:theorem3-disagreement");
            } else if (t3.sufficient_weak) {
                v.clause = Clause::Theorem3Sufficient;
                if (!v.weak) v.flags.emplace_back("review:theorem3-disagreement");
            }
        } catch (const PreconditionError&) {
            v.flags.emplace_back("theorem3-not-applicable");
        }
    }
    return v;
}

AnalysisReport analyze_all(const ComplexMatrix& a, const AnalysisOptions& options) {
    if (options.max_split_order < 3) throw InputError("max_split_order must be at least 3");
    if (!(options.fit_delta > 0.0 && options.fit_delta <= 0.1)) throw InputError("fit_delta must lie in (0, 0.1]");
    AnalysisReport rep;
    rep.matrix = a;
    rep.options = options;
    const HermitianPencil pencil = hermitian_parts(a);
    const AngleGrid grid(options.grid_count);
    const EigenBranchSet set = trace_branches(pencil, grid);
    rep.exceptional_points = find_exceptional_points(set, options.tol);
    rep.flat_portions = find_flat_portions(a, set, rep.exceptional_points);
    rep.irreducible = is_unitarily_irreducible(a, options.tol);
    rep.diameter = boundary_diameter(boundary_from_set(a, set));

    const double scale = std::max(pencil.scale(), 1.0);
    const double ctol = kClusterRelTol * scale;
    std::vector<std::pair<Complex, double>> points;
    for (const auto& ep : rep.exceptional_points) {
        if (!ep.minimal()) continue;
        SupportData sd = support_data(pencil, ep.theta0);
        if (sd.multiplicity < 2) continue;
        // Sharpen the angle to the contact point of the group's branches.
        const auto [theta, sp] = slope_spread_minimum(pencil, ep.theta0, sd.multiplicity, kContactRadius);
        if (sp > ctol) continue;  // a flat portion; its endpoints come below
        sd = support_data(pencil, theta);
        if (sd.multiplicity < 2) continue;
        RVec mu = eig_hermitian(HermitianMatrix(minimal_slope_compression(pencil, sd, theta))).values;
        points.emplace_back(std::polar(1.0, theta) * Complex(sd.lambda_min, mu.mean()), theta);
    }
    for (const auto& fp : rep.flat_portions) {
        points.emplace_back(fp.start, fp.theta);
        points.emplace_back(fp.end, fp.theta);
    }
    std::vector<std::pair<Complex, double>> unique;
    for (const auto& p : points) {
        const bool dup = std::any_of(unique.begin(), unique.end(),
                                     [&](const auto& q) { return std::abs(q.first - p.first) <= 1e-8 * scale; });
        if (!dup) unique.push_back(p);
    }

    for (const auto& [z, theta] : unique) {
        Candidate c;
        c.record = classify_boundary_point(a, z, theta, set, rep.flat_portions);
        if (c.record.kind == PointKind::Corner) continue;
        c.verdict = continuity_verdict(a, c.record, split_for_record(set, c.record, options));
        rep.candidates.push_back(std::move(c));
    }

    const double radius = kIsolationRel * rep.diameter;
    for (auto& c : rep.candidates) {
        if (!c.record.isolated_mg) continue;
        for (const auto& other : rep.candidates) {
            if (&other == &c || !other.record.multiply_generated) continue;
            if (std::abs(other.record.z - c.record.z) <= radius) c.record.isolated_mg = false;
        }
    }
    return rep;
}

std::vector<std::string> theorem2_crosscheck(const AnalysisReport& report) {
    std::vector<std::string> out;
    for (const auto& c : report.candidates) {
        const auto& r = c.record;
        if (r.isolated_mg && r.kind == PointKind::FullyRound && r.multiply_generated && c.verdict.strong) {
            std::ostringstream os;
            os << "isolated fully round multiply generated point (" << r.z.real() << ", " << r.z.imag()
               << ") at theta=" << r.theta0 << " reported strongly continuous";
            out.push_back(os.str());
        }
    }
    return out;
}

double boundary_support_angle(const ComplexMatrix& a, Complex z, std::size_t grid_count) {
    const HermitianPencil pencil = hermitian_parts(a);
    const double scale = std::max(pencil.scale(), 1.0);
    const auto [theta0, gap] = locate_support_angle(pencil, z, grid_count);
    if (std::abs(gap) <= kOnLineRelTol * scale) return theta0;
    const std::vector<Complex> boundary = trace_boundary(a, AngleGrid(grid_count));
    Complex nearest = boundary.front();
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const Complex p0 = boundary[i];
        const Complex p1 = boundary[(i + 1) % boundary.size()];
        const Complex d = p1 - p0;
        const double len2 = std::norm(d);
        const double t = len2 > 0.0 ? std::clamp(((z - p0) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
        const Complex q = p0 + t * d;
        if (std::abs(q - z) < std::abs(nearest - z)) nearest = q;
    }
    std::ostringstream os;
    os.precision(10);
    os << "point (" << z.real() << ", " << z.imag() << ") is " << (gap > 0 ? "inside" : "outside")
       << " F(A), not on its boundary; nearest boundary point is (" << nearest.real() << ", " << nearest.imag()
       << ")";
    throw PreconditionError(os.str());
}

Candidate analyze_point(const ComplexMatrix& a, Complex z, const AnalysisOptions& options) {
    const HermitianPencil pencil = hermitian_parts(a);
    double theta0 = boundary_support_angle(a, z, options.grid_count);
    const SupportData sd = support_data(pencil, theta0);
    if (sd.multiplicity >= 2) {
        // The support angle comes from minimizing a function that is flat to
        // second order; at a tangential contact the slope spread pins it down.
        const auto [theta, sp] = slope_spread_minimum(pencil, theta0, sd.multiplicity, kContactRadius);
        const double scale = std::max(pencil.scale(), 1.0);
        const double tol = kOnLineRelTol * scale;
        const Complex w = std::polar(1.0, -theta) * z;
        const SupportData at = support_data(pencil, theta);
        // z must stay on the new support line and inside its slope range; on a
        // round boundary the spread is zero everywhere and the search is blind.
        if (sp <= kClusterRelTol * scale && std::abs(w.real() - at.lambda_min) <= tol && at.multiplicity >= 2) {
            const RVec mu = eig_hermitian(HermitianMatrix(minimal_slope_compression(pencil, at, theta))).values;
            if (w.imag() >= mu(0) - tol && w.imag() <= mu(mu.size() - 1) + tol) theta0 = theta;
        }
    }
    const EigenBranchSet set = trace_branches(pencil, AngleGrid(options.grid_count));
    const auto eps = find_exceptional_points(set, options.tol);
    const auto flats = find_flat_portions(a, set, eps);
    Candidate c;
    c.record = classify_boundary_point(a, z, theta0, set, flats);
    c.verdict = continuity_verdict(a, c.record, split_for_record(set, c.record, options));
    return c;
}

std::pair<double, double> locate_support_angle(const HermitianPencil& pencil, Complex z, std::size_t grid_count) {
    const AngleGrid grid(grid_count);
    auto g = [&](double t) { return (std::polar(1.0, -t) * z).real() - lambda_min(pencil, t); };
    std::size_t best = 0;
    double best_val = g(0.0);
    for (std::size_t j = 1; j < grid.count(); ++j) {
        const double v = g(grid[j]);
        if (v < best_val) {
            best_val = v;
            best = j;
        }
    }
    // Golden-section refinement on the bracketing cell pair.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = grid[best] - grid.step(), hi = grid[best] + grid.step();
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        }
    }
    double theta = 0.5 * (lo + hi);
    double val = g(theta);
    if (best_val < val) {
        theta = grid[best];
        val = best_val;
    }
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    return {theta, val};
}

}  // namespace nrange
