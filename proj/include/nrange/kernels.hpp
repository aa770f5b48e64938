#pragma once

// Batched quadratic forms f_A(x) = x* A x over many sample vectors. Samples
// are stored structure-of-arrays: component i of sample s lives at
// re[i * stride + s] / im[i * stride + s]. A scalar reference kernel and an
// AVX2 kernel are provided; the dispatcher picks AVX2 when the CPU has it.

#include <cstddef>
#include <string_view>
#include <vector>

#include "nrange/core.hpp"

namespace nrange {

struct SampleBatch {
    std::size_t n = 0;       // vector dimension
    std::size_t count = 0;   // number of samples
    std::vector<double> re;  // n * count
    std::vector<double> im;

    SampleBatch() = default;
    SampleBatch(std::size_t dim, std::size_t samples)
        : n(dim), count(samples), re(dim * samples, 0.0), im(dim * samples, 0.0) {}

    void set(std::size_t s, const CVec& x);
    CVec get(std::size_t s) const;
};

enum class KernelIsa { Scalar, Avx2 };

/// out_re[s] + i out_im[s] = f_A(sample s).
void quadratic_forms_scalar(const CMat& a, const SampleBatch& batch, double* out_re, double* out_im);
void quadratic_forms_avx2(const CMat& a, const SampleBatch& batch, double* out_re, double* out_im);

/// Best kernel available on this CPU (overridable with NRANGE_KERNEL=scalar).
KernelIsa active_kernel();
std::string_view to_string(KernelIsa isa);
bool avx2_supported();

void quadratic_forms(const CMat& a, const SampleBatch& batch, double* out_re, double* out_im);
std::vector<Complex> quadratic_forms(const CMat& a, const SampleBatch& batch);

}  // namespace nrange
