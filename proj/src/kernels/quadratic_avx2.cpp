#include "raw.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif

namespace nrange::raw {

#if defined(__x86_64__) || defined(_M_X64)

// Four samples per register. Per-sample summation order matches the scalar
// kernel; only the fused multiply-adds round differently.
std::size_t quadratic_forms_avx2(std::size_t n, std::size_t cnt, const double* a_re, const double* a_im,
                                 const double* re, const double* im, double* out_re, double* out_im) {
    std::size_t s = 0;
    for (; s + 4 <= cnt; s += 4) {
        __m256d acc_re = _mm256_setzero_pd();
        __m256d acc_im = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n; ++i) {
            __m256d y_re = _mm256_setzero_pd();
            __m256d y_im = _mm256_setzero_pd();
            for (std::size_t j = 0; j < n; ++j) {
                const __m256d ar = _mm256_set1_pd(a_re[i * n + j]);
                const __m256d ai = _mm256_set1_pd(a_im[i * n + j]);
                const __m256d xr = _mm256_loadu_pd(re + j * cnt + s);
                const __m256d xi = _mm256_loadu_pd(im + j * cnt + s);
                y_re = _mm256_fmadd_pd(ar, xr, y_re);
                y_re = _mm256_fnmadd_pd(ai, xi, y_re);
                y_im = _mm256_fmadd_pd(ar, xi, y_im);
                y_im = _mm256_fmadd_pd(ai, xr, y_im);
            }
            const __m256d xr = _mm256_loadu_pd(re + i * cnt + s);
            const __m256d xi = _mm256_loadu_pd(im + i * cnt + s);
            acc_re = _mm256_fmadd_pd(xr, y_re, acc_re);
            acc_re = _mm256_fmadd_pd(xi, y_im, acc_re);
            acc_im = _mm256_fmadd_pd(xr, y_im, acc_im);
            acc_im = _mm256_fnmadd_pd(xi, y_re, acc_im);
        }
        _mm256_storeu_pd(out_re + s, acc_re);
        _mm256_storeu_pd(out_im + s, acc_im);
    }
    return s;
}

#else

std::size_t quadratic_forms_avx2(std::size_t, std::size_t, const double*, const double*, const double*,
                                 const double*, double*, double*) {
    return 0;
}

#endif

}  // namespace nrange::raw
