#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nrange/classify.hpp"
#include "nrange/corpus.hpp"
#include "nrange/kernels.hpp"
#include "nrange/probe.hpp"
#include "support/fixtures.hpp"

using namespace nrange;

namespace {

CVec unit(Eigen::Index n, Eigen::Index k) {
    CVec e = CVec::Zero(n);
    e(k) = 1.0;
    return e;
}

bool contains(const PreimageSample& s, const CVec& x, double tol = 1e-7) {
    for (const auto& p : s.points)
        if (phase_distance(p, x) < tol) return true;
    return false;
}

}  // namespace

TEST_SUITE("probe") {

TEST_CASE("fiber of the jordan block at 1/2 is a single point") {
    const ComplexMatrix a = corpus::jordan2();
    const PreimageSample s = preimage_fiber(a, Complex(0.5, 0.0), M_PI, 8, 1);
    REQUIRE(s.points.size() == 1);
    CVec want(2);
    want << 1.0, 1.0;
    CHECK(phase_distance(s.points.front(), want / std::sqrt(2.0)) < 1e-8);
}

TEST_CASE("fiber of a hermitian matrix at its minimum") {
    CMat d = CMat::Zero(2, 2);
    d(1, 1) = 1.0;
    const PreimageSample s = preimage_fiber(ComplexMatrix(d), Complex(0.0, 0.0), 0.0, 8, 1);
    REQUIRE(s.points.size() == 1);
    CHECK(phase_distance(s.points.front(), unit(2, 0)) < 1e-10);
}

TEST_CASE("example 1 fiber spans the two-dimensional eigenspace") {
    const ComplexMatrix a = corpus::example1();
    const PreimageSample s = preimage_fiber(a, Complex(0.0, 0.0), 0.0, 8, 1);
    CHECK(s.points.size() >= 3);
    CHECK(contains(s, unit(4, 0)));
    CHECK(contains(s, unit(4, 1)));
    for (const auto& x : s.points) {
        CHECK(std::abs(quadratic_form(a, x)) <= kFiberTol);
        CHECK(std::abs(x(2)) + std::abs(x(3)) < 1e-12);
    }
    // deduplicated up to global phase
    for (std::size_t i = 0; i < s.points.size(); ++i)
        for (std::size_t j = i + 1; j < s.points.size(); ++j)
            CHECK(std::abs(s.points[i].dot(s.points[j])) <= 1.0 - 1e-8);
    CHECK(s.construction.size() == s.points.size());
}

TEST_CASE("fiber is deterministic and phase invariant") {
    const ComplexMatrix a = corpus::example1();
    const PreimageSample s1 = preimage_fiber(a, Complex(0.0, 0.0), 0.0, 6, 7);
    const PreimageSample s2 = preimage_fiber(a, Complex(0.0, 0.0), 0.0, 6, 7);
    REQUIRE(s1.points.size() == s2.points.size());
    for (std::size_t i = 0; i < s1.points.size(); ++i) {
        CHECK((s1.points[i] - s2.points[i]).norm() == 0.0);
        const CVec rotated = std::polar(1.0, 0.9) * s1.points[i];
        CHECK(std::abs(quadratic_form(a, rotated) - quadratic_form(a, s1.points[i])) < 1e-15);
    }
}

TEST_CASE("fiber preconditions") {
    CHECK_THROWS_AS(preimage_fiber(corpus::jordan2(), Complex(0.3, 0.0), M_PI, 4, 1), PreconditionError);
}

TEST_CASE("openness at the worked examples") {
    const ComplexMatrix a1 = corpus::example1();
    // e2 generates the flatter branch and its ball misses both arcs; e1's
    // ball contains the preimages of both
    const OpennessResult r1 = openness_test(a1, Complex(0.0, 0.0), unit(4, 0), 0.05, 20000, 1);
    CHECK(r1.covers_left_arc);
    CHECK(r1.covers_right_arc);
    const OpennessResult r2 = openness_test(a1, Complex(0.0, 0.0), unit(4, 1), 0.05, 20000, 1);
    CHECK_FALSE(r2.covers_left_arc);
    CHECK_FALSE(r2.covers_right_arc);
    CHECK(r2.left_distance > r2.coverage_tol);
    CHECK(r1.coverage_tol == doctest::Approx(kDefaultCoverageRel * 0.05 * 0.05 * spectral_norm(a1.data())));

    const ProbeReport j = probe_point(corpus::jordan2(), Complex(0.0, 0.5), {});
    CHECK(j.empirical_strong);
    CHECK(j.empirical_weak);

    ProbeOptions opt;
    opt.samples = 5000;
    const ProbeReport e2 = probe_point(corpus::example2(), Complex(0.0, 0.0), opt);
    CHECK_FALSE(e2.empirical_weak);
    // each generating vector reaches one side only; mixtures of them reach neither
    bool left = false, right = false;
    for (const auto& r : e2.results) {
        CHECK_FALSE((r.covers_left_arc && r.covers_right_arc));
        left = left || r.covers_left_arc;
        right = right || r.covers_right_arc;
    }
    CHECK(left);
    CHECK(right);
}

TEST_CASE("openness input checks") {
    const ComplexMatrix a = corpus::jordan2();
    CVec x(2);
    x << 1.0, 1.0;
    CHECK_THROWS_AS(openness_test(a, Complex(0.5, 0.0), x, 0.0, 100, 1), InputError);
    CHECK_THROWS_AS(openness_test(a, Complex(0.5, 0.0), x, 0.6, 100, 1), InputError);
    CHECK_THROWS_AS(openness_test(a, Complex(0.5, 0.0), unit(2, 0), 0.05, 100, 1), PreconditionError);
}

TEST_CASE("arc targets lie on the boundary on both sides") {
    const ComplexMatrix a = corpus::example3();
    const double t0 = boundary_support_angle(a, Complex(1.0, 0.0));
    const auto targets = arc_targets(a, Complex(1.0, 0.0), t0, 0.05);
    CHECK(targets[0].side == -1);
    CHECK(targets[1].side == 1);
    for (const auto& t : targets) {
        CHECK(std::abs(std::abs(t.target) - 1.0) < 1e-9);
        CHECK_FALSE(t.segment);
        CHECK(std::abs(t.target - 1.0) > 1e-4);
    }
    CHECK(targets[0].target.imag() * targets[1].target.imag() < 0.0);
}

TEST_CASE("convexity of cap images") {
    std::mt19937_64 rng(51);
    const ComplexMatrix a(testing::gaussian(4, 4, rng));
    const ConvexityResult r = convexity_check(a, unit(4, 0), 0.3, 4000, 3);
    CHECK(r.pass);
    CHECK(r.max_hull_violation <= r.tol);
    CHECK(r.probes > 0);

    const ComplexMatrix h(testing::random_hermitian(3, rng));
    CHECK(convexity_check(h, unit(3, 1), 0.5, 2000, 4).pass);
    // the whole sphere: the image is F(A) itself
    CHECK(convexity_check(a, unit(4, 2), 2.0, 4000, 5).pass);
    CHECK_THROWS_AS(convexity_check(a, unit(4, 0), 2.5, 100, 1), InputError);
}

TEST_CASE("convex hull") {
    std::vector<Complex> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}, {0.2, 0.7}};
    const auto hull = convex_hull(pts);
    REQUIRE(hull.size() == 4);
    double area = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Complex p = hull[i], q = hull[(i + 1) % hull.size()];
        area += p.real() * q.imag() - q.real() * p.imag();
    }
    CHECK(area / 2.0 == doctest::Approx(1.0));
}

TEST_CASE("quasi-random points") {
    const QuasiRandom q(5, 9), q2(5, 9), q3(5, 10);
    std::vector<double> a(5), b(5), c(5);
    double mean = 0.0;
    bool differs = false;
    for (std::size_t i = 0; i < 2000; ++i) {
        q.point(i, a.data());
        q2.point(i, b.data());
        q3.point(i, c.data());
        for (int k = 0; k < 5; ++k) {
            CHECK(a[k] >= 0.0);
            CHECK(a[k] < 1.0);
            CHECK(a[k] == b[k]);
            if (a[k] != c[k]) differs = true;
        }
        mean += a[0];
    }
    CHECK(differs);
    CHECK(mean / 2000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("scalar and AVX2 kernels agree") {
    std::mt19937_64 rng(52);
    for (Eigen::Index n : {1, 2, 3, 5, 6, 9}) {
        const CMat a = testing::gaussian(n, n, rng);
        const std::size_t count = 37;  // not a multiple of the vector width
        SampleBatch batch(static_cast<std::size_t>(n), count);
        std::vector<CVec> xs;
        for (std::size_t s = 0; s < count; ++s) {
            xs.push_back(testing::gaussian(n, 1, rng).col(0).normalized());
            batch.set(s, xs.back());
            CHECK((batch.get(s) - xs.back()).norm() == 0.0);
        }
        std::vector<double> sr(count), si(count), vr(count), vi(count);
        quadratic_forms_scalar(a, batch, sr.data(), si.data());
        for (std::size_t s = 0; s < count; ++s)
            CHECK(std::abs(Complex(sr[s], si[s]) - quadratic_form(a, xs[s])) < 1e-12);
        if (avx2_supported()) {
            quadratic_forms_avx2(a, batch, vr.data(), vi.data());
            for (std::size_t s = 0; s < count; ++s) {
                CHECK(std::abs(vr[s] - sr[s]) <= 1e-12 * (1.0 + std::abs(sr[s])));
                CHECK(std::abs(vi[s] - si[s]) <= 1e-12 * (1.0 + std::abs(si[s])));
            }
        }
        const auto dispatched = quadratic_forms(a, batch);
        for (std::size_t s = 0; s < count; ++s) CHECK(std::abs(dispatched[s] - Complex(sr[s], si[s])) < 1e-12);
    }
    CHECK((to_string(active_kernel()) == "avx2" || to_string(active_kernel()) == "scalar"));
}

}  // TEST_SUITE
