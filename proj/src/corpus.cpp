#include "nrange/corpus.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nrange/matrix_io.hpp"

namespace nrange::corpus {

namespace {

constexpr Complex kI(0.0, 1.0);

}  // namespace

ComplexMatrix example1(const Example1Params& p) {
    if (!(p.k1 > p.k2 && p.k2 > 0.0 && p.r > 0.0))
        throw InputError("example1 requires k1 > k2 > 0 and r > 0");
    CMat a = CMat::Zero(4, 4);
    a(0, 2) = a(2, 0) = kI * p.k1;
    a(1, 3) = a(3, 1) = kI * p.k2;
    a(2, 3) = a(3, 2) = kI * p.r;
    a(2, 2) = a(3, 3) = 1.0;
    return ComplexMatrix(std::move(a));
}

ComplexMatrix example2() {
    CMat a(4, 4);
    a << 0.0, 0.0, kI, 0.0,
         0.0, 0.0, 0.0, 2.0 * kI,
         kI, 0.0, 1.0 + kI, 2.0 * kI,
         0.0, 2.0 * kI, 2.0 * kI, 4.0 + 3.0 * kI;
    return ComplexMatrix(std::move(a));
}

ComplexMatrix example3(const Example3Params& p) {
    if (!(p.w > 0 && p.y > 0 && p.xi > 0 && p.eta > 0 && p.c > 0 && p.c < 1))
        throw InputError("example3 requires w, y, xi, eta, c > 0 and c < 1");
    if (std::abs(p.w * p.w + p.y * p.y - 4.0) > 1e-12 ||
        std::abs(p.xi * p.xi + p.eta * p.eta - 4.0) > 1e-12)
        throw InputError("example3 requires w^2 + y^2 = xi^2 + eta^2 = 4");
    CMat a = CMat::Zero(6, 6);
    a(0, 1) = p.w;
    a(0, 3) = p.c * p.y;
    a(1, 2) = p.y;
    a(3, 2) = -p.c * p.w;
    a(3, 4) = std::sqrt(1.0 - p.c * p.c) * p.xi;
    a(4, 5) = p.eta;
    return ComplexMatrix(std::move(a));
}

ComplexMatrix jordan2() {
    CMat a = CMat::Zero(2, 2);
    a(0, 1) = 1.0;
    return ComplexMatrix(std::move(a));
}

ComplexMatrix normal4() {
    // Unitary DFT basis: U_{jk} = w^{jk}/2, w = i.
    CMat u(4, 4);
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) u(j, k) = std::pow(kI, j * k) / 2.0;
    CVec d(4);
    d << 1.0, kI, -1.0, -kI;
    return ComplexMatrix(u * d.asDiagonal() * u.adjoint());
}

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names{"example1", "example2", "example3", "jordan2",
                                                "normal4"};
    return names;
}

nlohmann::json example_json(const std::string& name, const Example1Params& p1,
                            const Example3Params& p3) {
    nlohmann::json out;
    if (name == "example1") {
        out = matrix_to_json(example1(p1));
        out["params"] = {{"k1", p1.k1}, {"k2", p1.k2}, {"r", p1.r}};
    } else if (name == "example2") {
        out = matrix_to_json(example2());
    } else if (name == "example3") {
        out = matrix_to_json(example3(p3));
        out["params"] = {{"w", p3.w}, {"y", p3.y}, {"xi", p3.xi}, {"eta", p3.eta}, {"c", p3.c}};
        out["notes"] = "the first parameter, written x in the matrix display, is w";
    } else if (name == "jordan2") {
        out = matrix_to_json(jordan2());
    } else if (name == "normal4") {
        out = matrix_to_json(normal4());
        out["notes"] = "normal, eigenvalues 1, i, -1, -i";
    } else {
        std::ostringstream os;
        os << "unknown example '" << name << "'; valid names:";
        for (const auto& n : example_names()) os << ' ' << n;
        throw InputError(os.str());
    }
    out["name"] = name;
    return out;
}

ComplexMatrix example_matrix(const std::string& name) { return matrix_from_json(example_json(name)); }

}  // namespace nrange::corpus
