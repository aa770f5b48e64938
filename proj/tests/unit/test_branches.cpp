#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "nrange/branches.hpp"
#include "nrange/corpus.hpp"
#include "support/fixtures.hpp"

using namespace nrange;

TEST_SUITE("branches") {

TEST_CASE("angle grid") {
    const AngleGrid g(720);
    CHECK(g.count() == 720);
    CHECK(g.step() == doctest::Approx(2.0 * M_PI / 720.0));
    CHECK(g.nearest(0.0) == 0);
    CHECK(g.nearest(2.0 * M_PI - 1e-9) == 0);
    CHECK(g.nearest(-g.step()) == 719);
    CHECK(g.nearest(10.4 * g.step()) == 10);
}

TEST_CASE("jordan block: circle of radius one half") {
    const ComplexMatrix a = corpus::jordan2();
    const HermitianPencil p = hermitian_parts(a);
    const EigenBranchSet set = trace_branches(p, AngleGrid(1024));
    CHECK(set.branch_count() == 2);
    CHECK((set.values.col(0).array() + 0.5).abs().maxCoeff() < 1e-12);
    CHECK((set.values.col(1).array() - 0.5).abs().maxCoeff() < 1e-12);
    // the minimal branch traces the boundary, a circle of radius 1/2
    const auto z = critical_curve(set, a, 0);
    for (std::size_t j = 0; j < z.size(); ++j) {
        CHECK(std::abs(z[j]) == doctest::Approx(0.5).epsilon(1e-12));
        // the minimizer at theta touches the support line in direction e^{i theta}
        CHECK(std::abs(z[j] + 0.5 * std::polar(1.0, set.grid[j])) < 1e-12);
    }
    CHECK(find_exceptional_points(set).empty());
    CHECK(find_flat_portions(a, set).empty());
}

TEST_CASE("branches are smooth and continuous through an exact crossing") {
    // Re A = diag(0,0,1,1): the two lowest branches cross at theta = 0
    const ComplexMatrix a = corpus::example1();
    const EigenBranchSet set = trace_branches(hermitian_parts(a), AngleGrid(2048));
    const double h = set.grid.step();
    for (Eigen::Index k = 0; k < set.branch_count(); ++k)
        for (std::size_t j = 0; j < set.grid.count(); ++j) {
            // branches may permute once around the circle, so the seam is skipped
            const std::size_t c = set.grid.count(), prev = (j + c - 1) % c, next = (j + 1) % c;
            if (j == set.trace_start || next == set.trace_start) continue;
            const double second = set.values(next, k) - 2.0 * set.values(j, k) + set.values(prev, k);
            if (std::abs(second) >= 100.0 * h * h * hermitian_parts(a).scale()) FAIL_CHECK("kink in branch " << k << " at " << j);
        }
    // eigenpairs stay eigenpairs of the pencil member
    for (std::size_t j = 0; j < set.grid.count(); j += 97) {
        const CMat m = set.pencil.at(set.grid[j]).data();
        for (Eigen::Index k = 0; k < set.branch_count(); ++k)
            CHECK((m * set.vectors[j].col(k) - set.values(j, k) * set.vectors[j].col(k)).norm() < 1e-10);
    }

    const auto eps = find_exceptional_points(set);
    bool at_zero = false;
    for (const auto& ep : eps)
        if (std::min(ep.theta0, 2.0 * M_PI - ep.theta0) < 1e-9 && ep.minimal() && ep.group.size() == 2) at_zero = true;
    CHECK(at_zero);
}

TEST_CASE("sorted positions index the ascending spectrum") {
    std::mt19937_64 rng(21);
    const EigenBranchSet set = trace_branches(hermitian_parts(ComplexMatrix(testing::gaussian(4, 4, rng))), AngleGrid(512));
    for (std::size_t j = 0; j < set.grid.count(); j += 31)
        for (Eigen::Index k = 0; k < 4; ++k) {
            const int pos = set.sorted_position(static_cast<Eigen::Index>(j), k);
            int below = 0;
            for (Eigen::Index l = 0; l < 4; ++l)
                if (set.values(j, l) < set.values(j, k)) ++below;
            CHECK(pos == below);
        }
}

TEST_CASE("branch symmetry lambda(theta + pi) = -lambda") {
    std::mt19937_64 rng(22);
    const EigenBranchSet set = trace_branches(hermitian_parts(ComplexMatrix(testing::gaussian(5, 5, rng))), AngleGrid(1024));
    const auto sym = branch_symmetry(set);
    REQUIRE(sym.has_value());
    CHECK(sym->second < 1e-10);
    CHECK_FALSE(branch_symmetry(trace_branches(set.pencil, AngleGrid(1023))).has_value());
}

TEST_CASE("hermitian matrix: the range is one segment") {
    CMat d = CMat::Zero(2, 2);
    d(1, 1) = 1.0;
    const ComplexMatrix a(d);
    const EigenBranchSet set = trace_branches(hermitian_parts(a), AngleGrid(720));
    // supported from both sides, at theta = pi/2 and 3 pi/2, but reported once
    CHECK(find_exceptional_points(set).size() == 2);
    const auto flats = find_flat_portions(a, set);
    REQUIRE(flats.size() == 1);
    for (const auto& f : flats) {
        CHECK(std::abs(std::abs(f.theta - M_PI) - M_PI / 2.0) < 1e-9);
        const double lo = std::min(f.start.real(), f.end.real());
        const double hi = std::max(f.start.real(), f.end.real());
        CHECK(lo == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(hi == doctest::Approx(1.0));
    }
}

TEST_CASE("normal matrix: flat portions are the polygon edges") {
    const ComplexMatrix a = corpus::normal4();
    const EigenBranchSet set = trace_branches(hermitian_parts(a), AngleGrid(2048));
    const auto flats = find_flat_portions(a, set);
    REQUIRE(flats.size() == 4);
    for (const auto& f : flats) {
        CHECK(std::abs(f.start - f.end) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
        CHECK(std::abs(std::abs(f.start) - 1.0) < 1e-9);
        CHECK(std::abs(std::abs(f.end) - 1.0) < 1e-9);
    }
}

TEST_CASE("example 3: branches do not depend on the angle") {
    const EigenBranchSet set = trace_branches(hermitian_parts(corpus::example3()), AngleGrid(1024));
    for (Eigen::Index k = 0; k < set.branch_count(); ++k)
        CHECK(set.values.col(k).maxCoeff() - set.values.col(k).minCoeff() < 1e-8);
    const auto identical = find_identical_branches(set, 1e-9);
    CHECK(identical.size() >= 2);
    // constant branches never meet: the identical pairs are not exceptional points
    CHECK(find_exceptional_points(set).empty());
}

TEST_CASE("boundary sampling and support data") {
    const ComplexMatrix a = corpus::example2();
    const HermitianPencil p = hermitian_parts(a);
    const SupportData sd = support_data(p, 0.0);
    CHECK(sd.multiplicity == 2);
    CHECK(std::abs(sd.lambda_min) < 1e-12);
    const CMat c = minimal_slope_compression(p, sd, 0.0);
    CHECK(c.norm() < 1e-12);
    CHECK(std::abs(boundary_point(a, p, 0.0)) < 1e-12);

    const auto b = trace_boundary(a, AngleGrid(400));
    CHECK(b.size() == 400);
    // every traced point is extremal in its direction
    for (std::size_t j = 0; j < b.size(); j += 17) {
        const double t = 2.0 * M_PI * static_cast<double>(j) / 400.0;
        const double support = (std::polar(1.0, -t) * b[j]).real();
        for (const Complex q : b) CHECK((std::polar(1.0, -t) * q).real() >= support - 1e-9);
    }
}

TEST_CASE("csv output") {
    const ComplexMatrix a = corpus::jordan2();
    const EigenBranchSet set = trace_branches(hermitian_parts(a), AngleGrid(360));
    std::ostringstream os;
    write_branches_csv(os, set, a);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "k,theta,lambda,re_z,im_z");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2 * 360);
}

TEST_CASE("grid size is validated") {
    CHECK_THROWS_AS(AngleGrid(10), InputError);
}

}  // TEST_SUITE
