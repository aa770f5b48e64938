#include "nrange/kernels.hpp"

namespace nrange {

void SampleBatch::set(std::size_t s, const CVec& x) {
    for (std::size_t i = 0; i < n; ++i) {
        re[i * count + s] = x(static_cast<Eigen::Index>(i)).real();
        im[i * count + s] = x(static_cast<Eigen::Index>(i)).imag();
    }
}

CVec SampleBatch::get(std::size_t s) const {
    CVec x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = Complex(re[i * count + s], im[i * count + s]);
    return x;
}

void quadratic_forms_scalar(const CMat& a, const SampleBatch& batch, double* out_re, double* out_im) {
    const std::size_t n = batch.n;
    const std::size_t cnt = batch.count;
    for (std::size_t s = 0; s < cnt; ++s) {
        double acc_re = 0.0, acc_im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double y_re = 0.0, y_im = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const Complex aij = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                const double xr = batch.re[j * cnt + s];
                const double xi = batch.im[j * cnt + s];
                y_re += aij.real() * xr - aij.imag() * xi;
                y_im += aij.real() * xi + aij.imag() * xr;
            }
            // conj(x_i) * y_i
            const double xr = batch.re[i * cnt + s];
            const double xi = batch.im[i * cnt + s];
            acc_re += xr * y_re + xi * y_im;
            acc_im += xr * y_im - xi * y_re;
        }
        out_re[s] = acc_re;
        out_im[s] = acc_im;
    }
}

}  // namespace nrange
