#include <cstdlib>
#include <cstring>

#include "nrange/kernels.hpp"
#include "raw.hpp"

namespace nrange {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

KernelIsa active_kernel() {
    static const KernelIsa isa = [] {
        const char* env = std::getenv("NRANGE_KERNEL");
        if (env && std::strcmp(env, "scalar") == 0) return KernelIsa::Scalar;
        return avx2_supported() ? KernelIsa::Avx2 : KernelIsa::Scalar;
    }();
    return isa;
}

std::string_view to_string(KernelIsa isa) { return isa == KernelIsa::Avx2 ? "avx2" : "scalar"; }

void quadratic_forms_avx2(const CMat& a, const SampleBatch& batch, double* out_re, double* out_im) {
    const std::size_t n = batch.n;
    std::vector<double> a_re(n * n), a_im(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Complex v = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            a_re[i * n + j] = v.real();
            a_im[i * n + j] = v.imag();
        }
    std::size_t done = 0;
    if (avx2_supported())
        done = raw::quadratic_forms_avx2(n, batch.count, a_re.data(), a_im.data(), batch.re.data(), batch.im.data(),
                                         out_re, out_im);
    if (done == batch.count) return;
    SampleBatch tail(n, batch.count - done);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < tail.count; ++t) {
            tail.re[i * tail.count + t] = batch.re[i * batch.count + done + t];
            tail.im[i * tail.count + t] = batch.im[i * batch.count + done + t];
        }
    quadratic_forms_scalar(a, tail, out_re + done, out_im + done);
}

void quadratic_forms(const CMat& a, const SampleBatch& batch, double* out_re, double* out_im) {
    if (static_cast<std::size_t>(a.rows()) != batch.n) throw DimensionError("sample dimension does not match matrix");
    if (active_kernel() == KernelIsa::Avx2)
        quadratic_forms_avx2(a, batch, out_re, out_im);
    else
        quadratic_forms_scalar(a, batch, out_re, out_im);
}

std::vector<Complex> quadratic_forms(const CMat& a, const SampleBatch& batch) {
    std::vector<double> r(batch.count), i(batch.count);
    quadratic_forms(a, batch, r.data(), i.data());
    std::vector<Complex> out(batch.count);
    for (std::size_t s = 0; s < batch.count; ++s) out[s] = Complex(r[s], i[s]);
    return out;
}

}  // namespace nrange
