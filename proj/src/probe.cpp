#include "nrange/probe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "nrange/branches.hpp"
#include "nrange/classify.hpp"
#include "nrange/kernels.hpp"

namespace nrange {

namespace {

constexpr std::array<unsigned, 64> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,  61,  67,  71,  73,  79,
    83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double radical_inverse(std::size_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

double scale_of(const HermitianPencil& p) { return std::max(p.scale(), 1.0); }

// Unit vector orthogonal to x built from a complex Gaussian drawn with
// Box-Muller from uniforms u[0..2n).
CVec orthogonal_direction(const CVec& x, const double* u) {
    const Eigen::Index n = x.size();
    CVec g(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double rad = std::sqrt(-2.0 * std::log(1.0 - u[2 * k]));
        g(k) = std::polar(rad, kTwoPi * u[2 * k + 1]);
    }
    g -= x * x.dot(g);
    double nrm = g.norm();
    if (nrm < 1e-12) {
        // Degenerate draw: use the coordinate direction least aligned with x.
        Eigen::Index k = 0;
        x.cwiseAbs().minCoeff(&k);
        g = CVec::Unit(n, k);
        g -= x * x.dot(g);
        nrm = g.norm();
    }
    return g / nrm;
}

struct Refined {
    CVec y;
    double dist = 0.0;
};

// Real symmetric form of a Hermitian matrix acting on u = (Re x, Im x).
RMat real_form(const CMat& m) {
    const Eigen::Index n = m.rows();
    RMat r(2 * n, 2 * n);
    r.topLeftCorner(n, n) = m.real();
    r.topRightCorner(n, n) = -m.imag();
    r.bottomLeftCorner(n, n) = m.imag();
    r.bottomRightCorner(n, n) = m.real();
    return r;
}

RVec to_real(const CVec& x) {
    RVec u(2 * x.size());
    u << x.real(), x.imag();
    return u;
}

CVec to_complex(const RVec& u) {
    const Eigen::Index n = u.size() / 2;
    CVec x(n);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = Complex(u(k), u(n + k));
    return x;
}

// Riemannian Newton on psi(u) = |f_A(u) - t|^2 / 2 over the unit sphere.
// Boundary targets are fold values of f_A, where the Jacobian loses rank and
// Gauss-Newton stalls; the exact Hessian of the two Rayleigh quotients keeps
// the iteration moving (linearly at worst). The shift keeps the model
// positive definite and adapts like a Levenberg-Marquardt parameter.
class Refiner {
public:
    explicit Refiner(const ComplexMatrix& a) {
        const HermitianPencil p = hermitian_parts(a);
        mh_ = real_form(p.H.data());
        mk_ = real_form(p.K.data());
        scale_ = std::max(p.scale(), 1.0);
    }

    Refined operator()(const CVec& y0, Complex t, const std::function<bool(const CVec&)>& inside) const {
        RVec u = to_real(y0.normalized());
        auto value = [&](const RVec& v, double& fr, double& fi) {
            fr = v.dot(mh_ * v) - t.real();
            fi = v.dot(mk_ * v) - t.imag();
            return std::hypot(fr, fi);
        };
        double rr = 0.0, ri = 0.0;
        double dist = value(u, rr, ri);
        double shift = 1e-6;
        const Eigen::Index d = u.size();
        for (int it = 0; it < 200 && dist > 1e-15 * scale_; ++it) {
            const RVec hu = mh_ * u, ku = mk_ * u;
            const double qh = u.dot(hu), qk = u.dot(ku);
            const RVec gh = 2.0 * (hu - qh * u), gk = 2.0 * (ku - qk * u);
            const RVec grad = rr * gh + ri * gk;
            const RMat proj = RMat::Identity(d, d) - u * u.transpose();
            RMat hess = gh * gh.transpose() + gk * gk.transpose() +
                        2.0 * rr * (proj * mh_ * proj - qh * proj) + 2.0 * ri * (proj * mk_ * proj - qk * proj);
            hess = 0.5 * (hess + hess.transpose());
            Eigen::SelfAdjointEigenSolver<RMat> es(hess);
            const double lo = es.eigenvalues()(0);
            const double base = std::max(0.0, -lo);
            const double size = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);

            bool accepted = false;
            for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
                const double mu = base + shift * size;
                RVec step = RVec::Zero(d);
                for (Eigen::Index i = 0; i < d; ++i) {
                    const RVec v = es.eigenvectors().col(i);
                    step -= (v.dot(grad) / (es.eigenvalues()(i) + mu)) * v;
                }
                step = proj * step;
                RVec cand = (u + step).normalized();
                for (int shrink = 0; shrink < 30 && !inside(to_complex(cand)); ++shrink) {
                    step *= 0.5;
                    cand = (u + step).normalized();
                }
                double cr = 0.0, ci = 0.0;
                const double cd = inside(to_complex(cand)) ? value(cand, cr, ci) : dist;
                if (cd < dist) {
                    u = cand;
                    rr = cr;
                    ri = ci;
                    dist = cd;
                    accepted = true;
                    shift = std::max(shift / 4.0, 1e-14);
                } else {
                    shift *= 4.0;
                    if (shift > 1e8) break;
                }
            }
            if (!accepted) break;
        }
        return {to_complex(u), dist};
    }

private:
    RMat mh_, mk_;
    double scale_ = 1.0;
};

// Nearest `k` image indices to t.
std::vector<std::size_t> nearest(const std::vector<Complex>& img, Complex t, std::size_t k) {
    std::vector<std::size_t> idx(img.size());
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t p, std::size_t q) { return std::abs(img[p] - t) < std::abs(img[q] - t); });
    idx.resize(k);
    return idx;
}

// Best vector y in span{y1, y2} with |x* y| >= c0 and f_A(y) as close to
// target as possible. On a two-dimensional span the projectors yy* form a
// 2-sphere on which both f_A and |x* y|^2 are affine, so the preimage of a
// point is a line meeting the sphere in at most two points and the cap is a
// half-space: both are checked directly.
struct SpanSolution {
    CVec y;
    double dist = std::numeric_limits<double>::infinity();
};

SpanSolution solve_in_span(const CMat& a, const CVec& x, double c0, const CVec& y1, const CVec& y2, Complex target) {
    SpanSolution best;
    auto consider = [&](const CVec& y) {
        const double d = std::abs(quadratic_form(a, y) - target);
        if (d < best.dist) best = {y, d};
    };
    consider(y1);
    consider(y2);
    CVec u2 = y2 - y1.dot(y2) * y1;
    if (u2.norm() < 1e-12) return best;
    u2.normalize();
    CMat u(x.size(), 2);
    u.col(0) = y1;
    u.col(1) = u2;
    const CMat b = u.adjoint() * a * u;
    const CVec px = u.adjoint() * x;

    // tr(B yy*) = mean + sum_k s_k beta_k and |x* y|^2 = w0 + s . w for yy* = (I + s . sigma) / 2
    const Complex mean = 0.5 * (b(0, 0) + b(1, 1));
    const Complex beta[3] = {0.5 * (b(0, 1) + b(1, 0)), 0.5 * Complex(0.0, 1.0) * (b(0, 1) - b(1, 0)),
                             0.5 * (b(0, 0) - b(1, 1))};
    const double w0 = 0.5 * px.squaredNorm();
    const Eigen::Vector3d w(std::real(px(0) * std::conj(px(1))), std::imag(px(1) * std::conj(px(0))),
                            0.5 * (std::norm(px(0)) - std::norm(px(1))));
    const double need = c0 > 0.0 ? c0 * c0 * (1.0 - 1e-12) : -1.0;
    auto lift = [&](const Eigen::Vector3d& sv) {
        const Eigen::Vector3d sn = sv.normalized();
        const double half = 0.5 * std::acos(std::clamp(sn(2), -1.0, 1.0));
        const double phase = std::atan2(sn(1), sn(0));
        CVec y2d(2);
        y2d << std::cos(half), std::polar(std::sin(half), phase);
        return CVec(u * y2d);
    };
    auto try_point = [&](const Eigen::Vector3d& sv) {
        if (sv.norm() == 0.0 || w0 + sv.normalized().dot(w) < need) return;
        consider(lift(sv));
    };

    const Eigen::Vector3d re(beta[0].real(), beta[1].real(), beta[2].real());
    const Eigen::Vector3d im(beta[0].imag(), beta[1].imag(), beta[2].imag());
    const Eigen::Vector3d dir = re.cross(im);
    if (dir.norm() > 1e-12 * std::max(re.squaredNorm() + im.squaredNorm(), 1e-300)) {
        Eigen::Matrix<double, 2, 3> m;
        m.row(0) = re.transpose();
        m.row(1) = im.transpose();
        const Eigen::Vector2d rhs((target - mean).real(), (target - mean).imag());
        const Eigen::Vector3d s0 = m.transpose() * (m * m.transpose()).inverse() * rhs;
        const Eigen::Vector3d d = dir.normalized();
        if (s0.squaredNorm() <= 1.0) {
            const double tau = std::sqrt(1.0 - s0.squaredNorm());
            try_point(s0 + tau * d);
            try_point(s0 - tau * d);
        }
        if (best.dist > 0.0) try_point(s0);
    }
    // Degenerate image or the exact points are outside the cap: fall back to a
    // Fibonacci lattice on the sphere.
    if (best.dist > 1e-12 * std::max(std::abs(target), 1.0)) {
        constexpr int kLattice = 4096;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < kLattice; ++k) {
            const double zc = 1.0 - 2.0 * (k + 0.5) / kLattice;
            const double rho = std::sqrt(1.0 - zc * zc);
            try_point(Eigen::Vector3d(rho * std::cos(golden * k), rho * std::sin(golden * k), zc));
        }
    }
    return best;
}

ArcTarget one_side(const ComplexMatrix& a, const HermitianPencil& pencil, Complex z, double theta0, int side,
                   double epsilon) {
    const double scale = scale_of(pencil);
    const double here = 1e-9 * scale;
    ArcTarget out;
    out.side = side;
    double theta_r = theta0;

    // Corner: the boundary point stays at z for a range of angles.
    auto stationary = [&](double t) { return std::abs(boundary_point(a, pencil, t) - z) <= here; };
    if (stationary(theta0 + side * 1e-4)) {
        double lo = 1e-4, hi = 2e-4;
        while (hi < std::numbers::pi && stationary(theta0 + side * hi)) {
            lo = hi;
            hi *= 2.0;
        }
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (stationary(theta0 + side * mid) ? lo : hi) = mid;
        }
        theta_r = theta0 + side * lo;
    }
    out.reference_theta = theta_r;

    // Flat portion leaving z at theta_r.
    SupportData sd = support_data(pencil, theta_r);
    if (sd.multiplicity > 1) {
        EigenDecomposition ec = eig_hermitian(HermitianMatrix(minimal_slope_compression(pencil, sd, theta_r)));
        const Eigen::Index m = ec.values.size();
        if (ec.values(m - 1) - ec.values(0) > kClusterRelTol * scale) {
            const Complex limit = quadratic_form(a, CVec(sd.basis * ec.vectors.col(side > 0 ? 0 : m - 1)));
            if (std::abs(limit - z) > here) {
                const double frac = std::pow(std::sin(0.5 * epsilon), 2);
                out.target = z + frac * (limit - z);
                out.segment = true;
                return out;
            }
        }
    }

    // Round arc: step so that the minimal eigenspace moves by about epsilon/2.
    const double h = 1e-3;
    const CMat e1 = support_data(pencil, theta_r + side * h).basis;
    const CMat e2 = support_data(pencil, theta_r + 2 * side * h).basis;
    const double speed = subspace_distance(e1, e2) / h;
    const double dtheta = speed > 1e-12 ? std::min(0.5 * epsilon / speed, 0.25) : 0.25;
    out.target = boundary_point(a, pencil, theta_r + side * dtheta);
    return out;
}

}  // namespace

QuasiRandom::QuasiRandom(std::size_t dims, std::uint64_t seed) : dims_(dims), shift_(dims), seed_(seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& s : shift_) s = uni(rng);
}

void QuasiRandom::point(std::size_t i, double* out) const {
    if (dims_ <= kPrimes.size()) {
        for (std::size_t d = 0; d < dims_; ++d) {
            double v = radical_inverse(i + 1, kPrimes[d]) + shift_[d];
            out[d] = v - std::floor(v);
        }
        return;
    }
    std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t d = 0; d < dims_; ++d) out[d] = uni(rng);
}

std::vector<Complex> convex_hull(std::vector<Complex> pts) {
    auto less = [](Complex p, Complex q) { return p.real() < q.real() || (p.real() == q.real() && p.imag() < q.imag()); };
    std::sort(pts.begin(), pts.end(), less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](Complex o, Complex p, Complex q) {
        return (p.real() - o.real()) * (q.imag() - o.imag()) - (p.imag() - o.imag()) * (q.real() - o.real());
    };
    std::vector<Complex> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

PreimageSample preimage_fiber(const ComplexMatrix& a, Complex z, double theta0, std::size_t count,
                              std::uint64_t seed) {
    if (count == 0) throw InputError("fiber count must be positive");
    const HermitianPencil pencil = hermitian_parts(a);
    const double scale = scale_of(pencil);
    const Complex w = std::polar(1.0, -theta0) * z;
    const SupportData sd = support_data(pencil, theta0);
    if (std::abs(w.real() - sd.lambda_min) > 1e-7 * scale) {
        std::ostringstream os;
        os << "point (" << z.real() << ", " << z.imag() << ") is not on the support line at theta=" << theta0;
        throw PreconditionError(os.str());
    }
    const CMat& q = sd.basis;
    const Eigen::Index m = q.cols();
    const CMat g = minimal_slope_compression(pencil, sd, theta0) - w.imag() * CMat::Identity(m, m);
    const EigenDecomposition eg = eig_hermitian(HermitianMatrix(g));
    const double gtol = 1e-8 * scale;

    std::vector<std::pair<CVec, std::string>> cands;
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(eg.values(i)) <= gtol) cands.emplace_back(eg.vectors.col(i), "eigenspace-parametrized");
    for (int side : {1, -1}) {
        Eigen::SelfAdjointEigenSolver<CMat> es(pencil.at(theta0 + side * 1e-6).data());
        CVec c = q.adjoint() * es.eigenvectors().col(0);
        if (c.norm() > 0.5) cands.emplace_back(c / c.norm(), "one-sided-limit");
    }
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double gi = eg.values(i), gj = eg.values(j);
            if (!(gi < -gtol && gj > gtol)) continue;
            CVec c = std::sqrt(gj / (gj - gi)) * eg.vectors.col(i) + std::sqrt(-gi / (gj - gi)) * eg.vectors.col(j);
            cands.emplace_back(c, "eigenspace-parametrized");
        }

    PreimageSample out;
    out.z = z;
    out.theta0 = theta0;
    auto accept = [&](CVec c, const std::string& how) {
        // Newton steps on the single real constraint c* G c = 0 over the unit sphere.
        for (int it = 0; it < 60; ++it) {
            const CVec gc = g * c;
            const double qv = c.dot(gc).real();
            if (std::abs(qv) <= 1e-15 * scale) break;
            const double d = gc.squaredNorm();
            if (d <= 1e-300) break;
            c -= (qv / (2.0 * d)) * gc;
            c.normalize();
        }
        CVec x = q * c;
        x.normalize();
        fix_phase(x);
        if (std::abs(quadratic_form(a, x) - z) > out.fiber_tol * scale) return;
        for (const auto& p : out.points)
            if (std::abs(p.dot(x)) > 1.0 - 1e-8) return;
        out.points.push_back(x);
        out.construction.push_back(how);
    };
    for (const auto& [c, how] : cands) {
        if (out.points.size() >= count) break;
        accept(c, how);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t tries = 0; out.points.size() < count && tries < 50 * count; ++tries) {
        CVec c(m);
        for (Eigen::Index i = 0; i < m; ++i) c(i) = Complex(normal(rng), normal(rng));
        c.normalize();
        accept(c, "refined-by-projection");
    }
    if (out.points.empty()) {
        std::ostringstream os;
        os << "no preimage of (" << z.real() << ", " << z.imag() << ") found in the minimal eigenspace at theta="
           << theta0;
        throw SearchFailureError(os.str());
    }
    return out;
}

std::array<ArcTarget, 2> arc_targets(const ComplexMatrix& a, Complex z, double theta0, double epsilon) {
    const HermitianPencil pencil = hermitian_parts(a);
    return {one_side(a, pencil, z, theta0, -1, epsilon), one_side(a, pencil, z, theta0, 1, epsilon)};
}

OpennessResult openness_test(const ComplexMatrix& a, const CVec& x_in, const std::array<ArcTarget, 2>& targets,
                             double epsilon, std::size_t samples, std::uint64_t seed, double coverage_rel) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw InputError("epsilon must lie in (0, 0.5]");
    if (samples == 0) throw InputError("sample count must be positive");
    const Eigen::Index n = a.size();
    if (x_in.size() != n) throw DimensionError("preimage dimension does not match matrix");
    const CVec x = x_in.normalized();
    const double anorm = spectral_norm(a.data());

    OpennessResult res;
    res.x = x;
    res.epsilon = epsilon;
    res.coverage_tol = coverage_rel * epsilon * epsilon * anorm;

    // Geodesic ball of radius phi_max around x modulo phase: ||y - x|| <= epsilon.
    const double phi_max = 2.0 * std::asin(0.5 * epsilon);
    const auto dim = static_cast<double>(2 * n - 1);
    QuasiRandom qr(static_cast<std::size_t>(2 * n + 1), seed);
    SampleBatch batch(static_cast<std::size_t>(n), samples);
    std::vector<double> u(qr.dims());
    for (std::size_t s = 0; s < samples; ++s) {
        qr.point(s, u.data());
        const CVec v = orthogonal_direction(x, u.data() + 1);
        const double phi = phi_max * std::pow(u[0], 1.0 / dim);
        batch.set(s, std::cos(phi) * x + std::sin(phi) * v);
    }
    const std::vector<Complex> img = quadratic_forms(a.data(), batch);
    auto inside = [&](const CVec& y) { return phase_distance(y, x) <= epsilon; };
    const Refiner refiner(a);

    for (const auto& t : targets) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t idx : nearest(img, t.target, 3)) {
            best = std::min(best, refiner(batch.get(idx), t.target, inside).dist);
            if (best <= res.coverage_tol) break;
        }
        if (t.side < 0) {
            res.left_distance = best;
            res.covers_left_arc = best <= res.coverage_tol;
        } else {
            res.right_distance = best;
            res.covers_right_arc = best <= res.coverage_tol;
        }
    }
    return res;
}

OpennessResult openness_test(const ComplexMatrix& a, Complex z, const CVec& x, double epsilon, std::size_t samples,
                             std::uint64_t seed, double coverage_rel) {
    const HermitianPencil pencil = hermitian_parts(a);
    if (std::abs(quadratic_form(a, x.normalized()) - z) > kFiberTol * scale_of(pencil))
        throw PreconditionError("x is not a preimage of z");
    const double theta0 = locate_support_angle(pencil, z).first;
    return openness_test(a, x, arc_targets(a, z, theta0, epsilon), epsilon, samples, seed, coverage_rel);
}

ProbeReport probe_point(const ComplexMatrix& a, Complex z, const ProbeOptions& options) {
    ProbeReport rep;
    rep.z = z;
    rep.theta0 = boundary_support_angle(a, z);
    rep.fiber = preimage_fiber(a, z, rep.theta0, options.fiber_count, options.seed);
    rep.targets = arc_targets(a, z, rep.theta0, options.epsilon);
    rep.empirical_weak = false;
    rep.empirical_strong = true;
    for (const auto& x : rep.fiber.points) {
        OpennessResult r = openness_test(a, x, rep.targets, options.epsilon, options.samples, options.seed,
                                         options.coverage_rel);
        const bool both = r.covers_left_arc && r.covers_right_arc;
        rep.empirical_weak = rep.empirical_weak || both;
        rep.empirical_strong = rep.empirical_strong && both;
        rep.results.push_back(std::move(r));
    }
    return rep;
}

ConvexityResult convexity_check(const ComplexMatrix& a, const CVec& x_in, double r, std::size_t samples,
                                std::uint64_t seed) {
    if (!(r > 0.0 && r <= 2.0)) throw InputError("cap radius must lie in (0, 2]");
    if (samples < 16) throw InputError("convexity check needs at least 16 samples");
    const Eigen::Index n = a.size();
    if (x_in.size() != n) throw DimensionError("center dimension does not match matrix");
    const CVec x = x_in.normalized();

    ConvexityResult out;
    out.tol = 1e-3 * spectral_norm(a.data()) * r;

    // y = e^{i alpha} cos(phi) x + sin(phi) v lies in the cap iff cos(alpha) cos(phi) >= 1 - r^2/2.
    const double c0 = 1.0 - 0.5 * r * r;
    const double phi_max = c0 > 0.0 ? std::acos(c0) : 0.5 * std::numbers::pi;
    const auto dim = static_cast<double>(2 * n - 1);
    auto cloud = [&](std::uint64_t s, SampleBatch& batch) {
        QuasiRandom qr(static_cast<std::size_t>(2 * n + 2), s);
        std::vector<double> u(qr.dims());
        for (std::size_t i = 0; i < samples; ++i) {
            qr.point(i, u.data());
            const CVec v = orthogonal_direction(x, u.data() + 2);
            const double phi = phi_max * std::pow(u[0], 1.0 / dim);
            const double cphi = std::cos(phi);
            double alpha_max = std::numbers::pi;
            if (cphi > 0.0 && c0 / cphi > -1.0) alpha_max = std::acos(std::min(1.0, c0 / cphi));
            const double alpha = alpha_max * (2.0 * u[1] - 1.0);
            batch.set(i, std::polar(cphi, alpha) * x + std::sin(phi) * v);
        }
        return quadratic_forms(a.data(), batch);
    };
    SampleBatch first(static_cast<std::size_t>(n), samples);
    const std::vector<Complex> img = cloud(seed, first);
    const std::vector<Complex> hull = convex_hull(img);

    std::vector<Complex> probes;
    if (hull.size() >= 3) {
        Complex centroid = 0.0;
        for (const auto& v : hull) centroid += v;
        centroid /= static_cast<double>(hull.size());
        probes.push_back(centroid);
        for (std::size_t i = 0; i < hull.size(); ++i) {
            const Complex mid = 0.5 * (hull[i] + hull[(i + 1) % hull.size()]);
            probes.push_back(centroid + 0.98 * (mid - centroid));
            probes.push_back(centroid + 0.5 * (hull[i] - centroid));
        }
    } else if (hull.size() == 2) {
        for (int k = 1; k < 10; ++k) probes.push_back(hull[0] + 0.1 * k * (hull[1] - hull[0]));
    } else {
        probes.push_back(hull.front());
    }

    SampleBatch second(static_cast<std::size_t>(n), samples);
    const std::vector<Complex> img2 = cloud(seed ^ 0x5DEECE66DULL, second);
    // f_A forgets the phase, so the cap is taken up to phase: y ~ e^{i a} y
    // is inside iff some rotation of it lies in the ball, i.e. |x* y| >= c0.
    auto inside = [&](const CVec& y) { return std::abs(x.dot(y)) >= c0 * (1.0 - 1e-12); };

    // Preimages of the hull vertices, for the constructive witness below.
    std::vector<CVec> vertex_pre;
    for (const Complex& h : hull) {
        const auto at = std::find(img.begin(), img.end(), h);
        vertex_pre.push_back(first.get(static_cast<std::size_t>(at - img.begin())));
    }
    // Witness through hull vertex 0: p lies in a fan triangle (h0, hi, hi+1);
    // the ray h0 -> p meets the edge hi hi+1 at q. Solve for q inside
    // span{yi, yi+1}, then for p inside span{y0, yq}.
    auto constructive = [&](Complex p) {
        double best = std::numeric_limits<double>::infinity();
        if (hull.size() < 3) return best;
        const Complex h0 = hull[0];
        for (std::size_t i = 1; i + 1 < hull.size(); ++i) {
            const Complex e = hull[i + 1] - hull[i], dp = p - h0;
            const double den = (std::conj(dp) * e).imag();
            if (den == 0.0) continue;
            // h0 + s dp = hull[i] + t e
            const double t = (std::conj(dp) * (h0 - hull[i])).imag() / den;
            const double sray = (std::conj(e) * (h0 - hull[i])).imag() / den;
            if (t < -1e-12 || t > 1.0 + 1e-12 || sray < 1.0 - 1e-12) continue;
            const Complex q = hull[i] + std::clamp(t, 0.0, 1.0) * e;
            const SpanSolution sq = solve_in_span(a.data(), x, c0, vertex_pre[i], vertex_pre[i + 1], q);
            const SpanSolution sp = solve_in_span(a.data(), x, c0, vertex_pre[0], sq.y, p);
            if (inside(sp.y)) best = std::min(best, sp.dist);
        }
        return best;
    };

    const Refiner refiner(a);
    for (const auto& p : probes) {
        double best = constructive(p);
        for (std::size_t idx : nearest(img2, p, 3)) {
            if (best <= 1e-3 * out.tol) break;
            best = std::min(best, refiner(second.get(idx), p, inside).dist);
        }
        out.max_hull_violation = std::max(out.max_hull_violation, best);
    }
    out.probes = probes.size();
    out.pass = out.max_hull_violation <= out.tol;
    return out;
}

}  // namespace nrange
