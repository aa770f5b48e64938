#pragma once

// Plain-array kernel entry points. The AVX2 translation unit is compiled with
// extra ISA flags, so it must not instantiate any inline library code that
// other translation units also use; it only sees this header.

#include <cstddef>

namespace nrange::raw {

/// a_re/a_im row-major n x n; samples SoA with stride cnt. Handles samples
/// [0, cnt - cnt % 4) and returns how many it processed.
std::size_t quadratic_forms_avx2(std::size_t n, std::size_t cnt, const double* a_re, const double* a_im,
                                 const double* re, const double* im, double* out_re, double* out_im);

}  // namespace nrange::raw
