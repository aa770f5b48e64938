#pragma once

// Seeded random matrices shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/QR>

#include "nrange/core.hpp"

namespace nrange::testing {

inline CMat gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline CMat random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    const CMat g = gaussian(n, n, rng);
    return 0.5 * (g + g.adjoint());
}

/// Haar-distributed unitary: QR of a complex Gaussian with the phases of R's
/// diagonal moved into Q.
inline CMat random_unitary(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<CMat> qr(gaussian(n, n, rng));
    CMat q = qr.householderQ() * CMat::Identity(n, n);
    const CMat r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

struct Planted {
    ComplexMatrix a;
    Complex z;      // the planted multiply generated point
    double theta0;  // its support angle
};

/// H = diag(0, 0, H1) with H1 positive definite, K = [[0, K0], [K0*, K1]]:
/// the origin is generated by the whole two-dimensional kernel of H with zero
/// compression of K. The result is e^{i phi} U (H + iK) U* + c.
inline Planted planted_degeneracy(Eigen::Index k, std::mt19937_64& rng) {
    const Eigen::Index m = 2;
    const Eigen::Index n = m + k;
    const CMat b = gaussian(k, k, rng);
    const CMat h1 = b.adjoint() * b + CMat::Identity(k, k);
    CMat h = CMat::Zero(n, n);
    h.bottomRightCorner(k, k) = h1;
    CMat kk = CMat::Zero(n, n);
    const CMat k0 = gaussian(m, k, rng);
    kk.topRightCorner(m, k) = k0;
    kk.bottomLeftCorner(k, m) = k0.adjoint();
    kk.bottomRightCorner(k, k) = random_hermitian(k, rng);

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double phi = 3.0 * u(rng);
    const Complex c(u(rng), u(rng));
    const CMat v = random_unitary(n, rng);
    const Complex rot = std::polar(1.0, phi);
    CMat a = rot * (v * (h + Complex(0.0, 1.0) * kk) * v.adjoint());
    a += c * CMat::Identity(n, n);
    double theta = phi;
    while (theta < 0.0) theta += 2.0 * M_PI;
    while (theta >= 2.0 * M_PI) theta -= 2.0 * M_PI;
    return {ComplexMatrix(a), c, theta};
}

/// Direct sum of a planted block with a diagonal block pushed to the far
/// side of the support line, so the planted point stays on the boundary.
inline Planted planted_direct_sum(Eigen::Index k, Eigen::Index extra, std::mt19937_64& rng) {
    std::mt19937_64 inner(rng());
    const Eigen::Index m = 2;
    const Eigen::Index n = m + k;
    const CMat b = gaussian(k, k, inner);
    CMat h = CMat::Zero(n, n);
    h.bottomRightCorner(k, k) = b.adjoint() * b + CMat::Identity(k, k);
    CMat kk = CMat::Zero(n, n);
    const CMat k0 = gaussian(m, k, inner);
    kk.topRightCorner(m, k) = k0;
    kk.bottomLeftCorner(k, m) = k0.adjoint();
    kk.bottomRightCorner(k, k) = random_hermitian(k, inner);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    CMat a = CMat::Zero(n + extra, n + extra);
    a.topLeftCorner(n, n) = h + Complex(0.0, 1.0) * kk;
    for (Eigen::Index j = 0; j < extra; ++j)
        a(n + j, n + j) = Complex(1.0 + 2.0 * u(rng), 4.0 * u(rng) - 2.0);
    return {ComplexMatrix(a), Complex(0.0, 0.0), 0.0};
}

}  // namespace nrange::testing
