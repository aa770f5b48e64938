#pragma once

// Built-in matrices: the worked examples plus two simple reference cases.

#include <string>
#include <vector>

#include <json.hpp>

#include "nrange/core.hpp"

namespace nrange::corpus {

struct Example1Params {
    double k1 = 2.0;
    double k2 = 1.0;
    double r = 1.0;
};

/// 6x6 example whose numerical range is the unit disk. The matrix displays
/// its first parameter as x; it is the same quantity as w here.
struct Example3Params {
    double w = 1.4142135623730951;
    double y = 1.4142135623730951;
    double xi = 1.4142135623730951;
    double eta = 1.4142135623730951;
    double c = 0.5;
};

/// Re A = diag(0,0,1,1); multiply generated fully round point at 0.
/// Requires k1 > k2 > 0 and r > 0.
ComplexMatrix example1(const Example1Params& p = {});

/// Re A = diag(0,0,1,4); weak continuity fails at 0.
ComplexMatrix example2();

/// Requires w,y,xi,eta,c > 0, c < 1 and w^2+y^2 = xi^2+eta^2 = 4.
ComplexMatrix example3(const Example3Params& p = {});

/// [[0,1],[0,0]], numerical range the disk of radius 1/2.
ComplexMatrix jordan2();

/// Normal matrix with eigenvalues 1, i, -1, -i in a non-standard unitary basis.
ComplexMatrix normal4();

const std::vector<std::string>& example_names();

/// Matrix JSON (n, entries) plus name/params/notes metadata. Throws InputError
/// for an unknown name, listing the valid ones.
nlohmann::json example_json(const std::string& name, const Example1Params& p1 = {},
                            const Example3Params& p3 = {});

ComplexMatrix example_matrix(const std::string& name);

}  // namespace nrange::corpus
