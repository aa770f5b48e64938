#include "nrange/branches.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace nrange {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kAmbiguity = 1e-6;

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

double angle_distance(double a, double b) {
    const double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, kTwoPi - d);
}

double cluster_tol(const HermitianPencil& pencil) {
    return kClusterRelTol * std::max(pencil.scale(), 1e-300);
}

// [begin, end) index ranges of eigenvalues that agree within tol.
std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters(const RVec& values, double tol) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    Eigen::Index start = 0;
    const Eigen::Index n = values.size();
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && values(stop) - values(stop - 1) <= tol) ++stop;
        out.emplace_back(start, stop);
        start = stop;
    }
    return out;
}

// Closest matrix with orthonormal columns to y (polar factor).
CMat lowdin(const CMat& y) {
    Eigen::JacobiSVD<CMat> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

RVec eigenvalues_at(const HermitianPencil& pencil, double theta) {
    Eigen::SelfAdjointEigenSolver<CMat> es(pencil.at(theta).data(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

AngleGrid::AngleGrid(std::size_t count) : count_(count), step_(kTwoPi / static_cast<double>(count)) {
    if (count < kMinGridCount) {
        std::ostringstream os;
        os << "angle grid needs at least " << kMinGridCount << " samples, got " << count;
        throw InputError(os.str());
    }
}

std::size_t AngleGrid::nearest(double theta) const {
    const auto j = static_cast<std::size_t>(std::llround(wrap_angle(theta) / step_));
    return j % count_;
}

HermitianMatrix pencil_at(const HermitianPencil& pencil, double theta) { return pencil.at(theta); }

EigenBranchSet trace_branches(const HermitianPencil& pencil, const AngleGrid& grid) {
    const Eigen::Index n = pencil.size();
    const std::size_t count = grid.count();
    const double ctol = cluster_tol(pencil);

    EigenBranchSet set{grid, pencil, RMat(count, n), std::vector<CMat>(count), Eigen::MatrixXi(count, n)};

    std::vector<EigenDecomposition> eds;
    eds.reserve(count);
    for (std::size_t j = 0; j < count; ++j) eds.push_back(eig_hermitian(pencil.at(grid[j])));

    // Start where the spectrum is best separated, so the initial vectors are
    // the analytic ones rather than an arbitrary basis of a crossing.
    std::size_t start = 0;
    double best_gap = -1.0;
    for (std::size_t j = 0; j < count && n > 1; ++j) {
        const RVec& v = eds[j].values;
        const double gap = (v.tail(n - 1) - v.head(n - 1)).minCoeff();
        if (gap > best_gap * (1.0 + 1e-12)) {
            best_gap = gap;
            start = j;
        }
    }
    set.trace_start = start;
    set.values.row(static_cast<Eigen::Index>(start)) = eds[start].values.transpose();
    set.vectors[start] = eds[start].vectors;
    for (Eigen::Index k = 0; k < n; ++k) set.sorted_position(static_cast<Eigen::Index>(start), k) = static_cast<int>(k);

    for (std::size_t step = 1; step < count; ++step) {
        const std::size_t j = (start + step) % count;
        const CMat& prev = set.vectors[(j + count - 1) % count];
        const EigenDecomposition& ed = eds[j];
        auto groups = clusters(ed.values, ctol);

        // weight(k, c) = squared norm of the projection of branch k onto cluster c.
        RMat weight(n, static_cast<Eigen::Index>(groups.size()));
        for (std::size_t c = 0; c < groups.size(); ++c) {
            const auto [b, e] = groups[c];
            CMat q = ed.vectors.middleCols(b, e - b);
            weight.col(static_cast<Eigen::Index>(c)) = (q.adjoint() * prev).colwise().squaredNorm().transpose();
        }
        for (Eigen::Index k = 0; k < n && groups.size() > 1; ++k) {
            RVec w = weight.row(k).transpose();
            std::sort(w.data(), w.data() + w.size(), std::greater<>());
            if (w(0) - w(1) < kAmbiguity) {
                std::ostringstream os;
                os << "branch matching is ambiguous at theta=" << grid[j]
                   << "; refine the angle grid (current count " << count << ")";
                throw GridTooCoarseError(os.str());
            }
        }

        // Greedy assignment by descending weight, honoring cluster sizes.
        struct Pair {
            double w;
            Eigen::Index k;
            std::size_t c;
        };
        std::vector<Pair> pairs;
        for (Eigen::Index k = 0; k < n; ++k)
            for (std::size_t c = 0; c < groups.size(); ++c)
                pairs.push_back({weight(k, static_cast<Eigen::Index>(c)), k, c});
        std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.w > y.w; });
        std::vector<std::vector<Eigen::Index>> members(groups.size());
        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        for (const auto& p : pairs) {
            const auto [b, e] = groups[p.c];
            if (taken[static_cast<std::size_t>(p.k)] ||
                static_cast<Eigen::Index>(members[p.c].size()) >= e - b)
                continue;
            taken[static_cast<std::size_t>(p.k)] = true;
            members[p.c].push_back(p.k);
        }

        CMat next(n, n);
        RVec next_values(n);
        for (std::size_t c = 0; c < groups.size(); ++c) {
            const auto [b, e] = groups[c];
            auto& mem = members[c];
            std::sort(mem.begin(), mem.end());
            const Eigen::Index m = e - b;
            if (m == 1) {
                const Eigen::Index k = mem[0];
                CVec v = ed.vectors.col(b);
                const Complex ov = prev.col(k).dot(v);
                if (std::abs(ov) > 0) v *= std::conj(ov) / std::abs(ov);
                next.col(k) = v;
                next_values(k) = ed.values(b);
                set.sorted_position(static_cast<Eigen::Index>(j), k) = static_cast<int>(b);
                continue;
            }
            CMat q = ed.vectors.middleCols(b, m);
            CMat y(n, m);
            for (Eigen::Index i = 0; i < m; ++i) y.col(i) = q * (q.adjoint() * prev.col(mem[static_cast<std::size_t>(i)]));
            CMat orth = lowdin(y);
            // Cluster eigenvalues go to members in the order of their Rayleigh quotients.
            const HermitianMatrix at = pencil.at(grid[j]);
            std::vector<std::pair<double, Eigen::Index>> rq;
            for (Eigen::Index i = 0; i < m; ++i)
                rq.emplace_back(orth.col(i).dot(at.data() * orth.col(i)).real(), i);
            std::stable_sort(rq.begin(), rq.end());
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::Index i = rq[static_cast<std::size_t>(r)].second;
                const Eigen::Index k = mem[static_cast<std::size_t>(i)];
                next.col(k) = orth.col(i);
                next_values(k) = ed.values(b + r);
                set.sorted_position(static_cast<Eigen::Index>(j), k) = static_cast<int>(b + r);
            }
        }
        set.vectors[j] = std::move(next);
        set.values.row(static_cast<Eigen::Index>(j)) = next_values.transpose();
    }

    // Label branches by their sorted position at theta = 0.
    std::vector<Eigen::Index> label(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) label[static_cast<std::size_t>(set.sorted_position(0, k))] = k;
    EigenBranchSet out{grid, pencil, RMat(count, n), std::vector<CMat>(count, CMat(n, n)), Eigen::MatrixXi(count, n)};
    out.trace_start = set.trace_start;
    for (std::size_t j = 0; j < count; ++j) {
        const auto row = static_cast<Eigen::Index>(j);
        for (Eigen::Index k = 0; k < n; ++k) {
            const Eigen::Index old = label[static_cast<std::size_t>(k)];
            out.values(row, k) = set.values(row, old);
            out.vectors[j].col(k) = set.vectors[j].col(old);
            out.sorted_position(row, k) = set.sorted_position(row, old);
        }
    }
    return out;
}

std::vector<Complex> critical_curve(const EigenBranchSet& set, const ComplexMatrix& a, int k) {
    if (k < 0 || k >= set.branch_count()) throw InputError("branch index out of range");
    std::vector<Complex> out;
    out.reserve(set.grid.count());
    for (std::size_t j = 0; j < set.grid.count(); ++j) out.push_back(quadratic_form(a, set.vectors[j].col(k)));
    return out;
}

SupportData support_data(const HermitianPencil& pencil, double theta) {
    EigenDecomposition ed = eig_hermitian(pencil.at(theta));
    const double ctol = cluster_tol(pencil);
    Eigen::Index m = 1;
    while (m < ed.values.size() && ed.values(m) - ed.values(0) <= ctol) ++m;
    SupportData sd;
    sd.lambda_min = ed.values(0);
    sd.multiplicity = static_cast<int>(m);
    sd.basis = m > 1 ? canonical_basis(ed.vectors.leftCols(m)) : CMat(ed.vectors.leftCols(1));
    return sd;
}

CMat minimal_slope_compression(const HermitianPencil& pencil, const SupportData& sd, double theta) {
    CMat c = sd.basis.adjoint() * pencil.derivative_at(theta).data() * sd.basis;
    return 0.5 * (c + c.adjoint());
}

std::pair<double, double> slope_spread_minimum(const HermitianPencil& pencil, double theta, Eigen::Index m,
                                               double radius) {
    auto spread_at = [&](double t) {
        const EigenDecomposition ed = eig_hermitian(pencil.at(t));
        const CMat q = ed.vectors.leftCols(m);
        const CMat c = q.adjoint() * pencil.derivative_at(t).data() * q;
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(m - 1) - es.eigenvalues()(0);
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = theta - radius, hi = theta + radius;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = spread_at(x1), f2 = spread_at(x2);
    while (hi - lo > 4.0 * kEps * std::max(std::abs(theta), 1.0)) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = spread_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = spread_at(x2);
        }
    }
    std::pair<double, double> best{theta, spread_at(theta)};
    for (double t : {x1, x2, 0.5 * (lo + hi)}) {
        const double v = spread_at(t);
        if (v < best.second) best = {t, v};
    }
    return best;
}

Complex boundary_point(const ComplexMatrix& a, const HermitianPencil& pencil, double theta) {
    Eigen::SelfAdjointEigenSolver<CMat> es(pencil.at(theta).data());
    return quadratic_form(a, es.eigenvectors().col(0));
}

std::vector<std::pair<int, int>> find_identical_branches(const EigenBranchSet& set, double tol) {
    std::vector<std::pair<int, int>> out;
    const auto count = static_cast<double>(set.grid.count());
    for (Eigen::Index a = 0; a < set.branch_count(); ++a)
        for (Eigen::Index b = a + 1; b < set.branch_count(); ++b) {
            const auto close = ((set.values.col(a) - set.values.col(b)).cwiseAbs().array() <= tol).count();
            if (static_cast<double>(close) >= 0.25 * count)
                out.emplace_back(static_cast<int>(a), static_cast<int>(b));
        }
    return out;
}

std::vector<ExceptionalPoint> find_exceptional_points(const EigenBranchSet& set, double tol) {
    const std::size_t count = set.grid.count();
    const Eigen::Index n = set.branch_count();
    std::vector<ExceptionalPoint> out;
    if (n < 2) return out;

    RMat sorted = set.values;
    for (Eigen::Index j = 0; j < sorted.rows(); ++j) {
        RVec row = sorted.row(j).transpose();
        std::sort(row.data(), row.data() + row.size());
        sorted.row(j) = row.transpose();
    }
    const double scale = std::max(set.pencil.scale(), 1e-300);
    // A first-order crossing leaves a grid gap of at most |slope difference| * step / 2.
    const double screen = scale * set.grid.step() + tol;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;

    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        RVec gap = sorted.col(i + 1) - sorted.col(i);
        const auto small = (gap.array() <= tol).count();
        if (static_cast<double>(small) >= 0.25 * static_cast<double>(count)) continue;
        for (std::size_t j = 0; j < count; ++j) {
            const double g = gap(static_cast<Eigen::Index>(j));
            const double gl = gap(static_cast<Eigen::Index>((j + count - 1) % count));
            const double gn = gap(static_cast<Eigen::Index>((j + 1) % count));
            if (!(g <= gl && g < gn) || g > screen) continue;

            auto gap_at = [&](double theta) {
                RVec v = eigenvalues_at(set.pencil, theta);
                return v(i + 1) - v(i);
            };
            double lo = set.grid[j] - set.grid.step();
            double hi = set.grid[j] + set.grid.step();
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            double f1 = gap_at(x1), f2 = gap_at(x2);
            double best_x = set.grid[j], best_f = g;
            for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                if (f1 <= f2) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - gr * (hi - lo);
                    f1 = gap_at(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + gr * (hi - lo);
                    f2 = gap_at(x2);
                }
                if (f1 < best_f) { best_f = f1; best_x = x1; }
                if (f2 < best_f) { best_f = f2; best_x = x2; }
                if (best_f <= 1e-3 * tol) break;
            }
            if (best_f > tol) continue;

            const double theta0 = wrap_angle(best_x);
            // Group: the run of eigenvalues around position i that agree within tol.
            EigenDecomposition ed = eig_hermitian(set.pencil.at(theta0));
            Eigen::Index b = i, e = i + 2;
            while (b > 0 && ed.values(b) - ed.values(b - 1) <= tol) --b;
            while (e < n && ed.values(e) - ed.values(e - 1) <= tol) ++e;
            const Eigen::Index m = e - b;
            CMat q = ed.vectors.middleCols(b, m);
            const std::size_t jn = set.grid.nearest(theta0);
            RVec w = (q.adjoint() * set.vectors[jn]).colwise().squaredNorm().transpose();
            std::vector<int> idx(static_cast<std::size_t>(n));
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return w(x) > w(y); });
            std::vector<int> group(idx.begin(), idx.begin() + m);
            std::sort(group.begin(), group.end());

            ExceptionalPoint ep;
            ep.theta0 = theta0;
            ep.group = std::move(group);
            ep.gap_residual = ed.values(e - 1) - ed.values(b);
            ep.value = ed.values.segment(b, m).mean();
            ep.sorted_index = static_cast<int>(b);

            bool merged = false;
            for (auto& other : out) {
                if (angle_distance(other.theta0, ep.theta0) < 1e-8 && other.sorted_index <= e - 1 &&
                    ep.sorted_index <= other.sorted_index + static_cast<int>(other.group.size()) - 1) {
                    if (ep.group.size() > other.group.size()) other = ep;
                    merged = true;
                    break;
                }
            }
            if (!merged) out.push_back(std::move(ep));
        }
    }
    std::sort(out.begin(), out.end(), [](const ExceptionalPoint& x, const ExceptionalPoint& y) {
        return x.theta0 != y.theta0 ? x.theta0 < y.theta0 : x.sorted_index < y.sorted_index;
    });
    return out;
}

std::vector<FlatPortion> find_flat_portions(const ComplexMatrix& a, const EigenBranchSet& set,
                                            const std::vector<ExceptionalPoint>& points) {
    const double ctol = cluster_tol(set.pencil);
    const double diam_scale = std::max(set.pencil.scale(), 1e-300);
    std::vector<double> angles;
    for (const auto& ep : points)
        if (ep.minimal()) angles.push_back(ep.theta0);
    for (std::size_t j = 0; j < set.grid.count(); ++j) {
        RVec row = set.values.row(static_cast<Eigen::Index>(j)).transpose();
        std::sort(row.data(), row.data() + row.size());
        // Only exact repetitions count here: a high-order touch leaves a gap
        // below the cluster tolerance on neighbouring grid angles as well.
        if (row.size() > 1 && row(1) - row(0) <= 1e-12 * diam_scale) angles.push_back(set.grid[j]);
    }

    std::vector<FlatPortion> out;
    for (double theta : angles) {
        SupportData sd = support_data(set.pencil, theta);
        if (sd.multiplicity < 2) continue;
        CMat c = minimal_slope_compression(set.pencil, sd, theta);
        EigenDecomposition ec = eig_hermitian(HermitianMatrix(c));
        const Eigen::Index m = ec.values.size();
        if (ec.values(m - 1) - ec.values(0) <= ctol) continue;
        // a tangential contact located slightly off its angle looks split at first order
        if (slope_spread_minimum(set.pencil, theta, m, kContactRadius).second <= ctol) continue;

        FlatPortion fp;
        fp.theta = theta;
        fp.start = quadratic_form(a, CVec(sd.basis * ec.vectors.col(0)));
        fp.end = quadratic_form(a, CVec(sd.basis * ec.vectors.col(m - 1)));
        const std::size_t jn = set.grid.nearest(theta);
        RVec w = (sd.basis.adjoint() * set.vectors[jn]).colwise().squaredNorm().transpose();
        std::vector<int> idx(static_cast<std::size_t>(set.branch_count()));
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return w(x) > w(y); });
        fp.branches.assign(idx.begin(), idx.begin() + sd.multiplicity);
        std::sort(fp.branches.begin(), fp.branches.end());

        const double same = 1e-8 * diam_scale;
        bool dup = false;
        for (const auto& other : out) {
            const bool direct = std::abs(other.start - fp.start) <= same && std::abs(other.end - fp.end) <= same;
            const bool swapped = std::abs(other.start - fp.end) <= same && std::abs(other.end - fp.start) <= same;
            if (direct || swapped) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(std::move(fp));
    }
    return out;
}

std::vector<FlatPortion> find_flat_portions(const ComplexMatrix& a, const EigenBranchSet& set) {
    return find_flat_portions(a, set, find_exceptional_points(set));
}

std::optional<std::pair<std::vector<int>, double>> branch_symmetry(const EigenBranchSet& set) {
    const std::size_t count = set.grid.count();
    if (count % 2 != 0) return std::nullopt;
    const std::size_t half = count / 2;
    const Eigen::Index n = set.branch_count();
    std::vector<int> tau(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = -1;
        for (Eigen::Index l = 0; l < n; ++l) {
            if (used[static_cast<std::size_t>(l)]) continue;
            double r = 0.0;
            for (std::size_t j = 0; j < half; ++j)
                r = std::max(r, std::abs(set.values(static_cast<Eigen::Index>(j + half), k) +
                                         set.values(static_cast<Eigen::Index>(j), l)));
            if (r < best) {
                best = r;
                arg = l;
            }
        }
        used[static_cast<std::size_t>(arg)] = true;
        tau[static_cast<std::size_t>(k)] = static_cast<int>(arg);
        worst = std::max(worst, best);
    }
    return std::make_pair(std::move(tau), worst);
}

void write_branches_csv(std::ostream& os, const EigenBranchSet& set, const ComplexMatrix& a) {
    os << "k,theta,lambda,re_z,im_z\n";
    char buf[160];
    for (Eigen::Index k = 0; k < set.branch_count(); ++k) {
        const auto curve = critical_curve(set, a, static_cast<int>(k));
        for (std::size_t j = 0; j < set.grid.count(); ++j) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", static_cast<int>(k), set.grid[j],
                          set.values(static_cast<Eigen::Index>(j), k), curve[j].real(), curve[j].imag());
            os << buf;
        }
    }
}

std::vector<Complex> trace_boundary(const ComplexMatrix& a, const AngleGrid& grid) {
    const HermitianPencil pencil = hermitian_parts(a);
    std::vector<Complex> out;
    out.reserve(grid.count());
    for (std::size_t j = 0; j < grid.count(); ++j) out.push_back(boundary_point(a, pencil, grid[j]));
    return out;
}

}  // namespace nrange
