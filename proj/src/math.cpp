#include "mlmc/math.hpp"

#include <algorithm>
#include <complex>

namespace mlmc {

Mat2 expm(const Mat2& a) {
    using cplx = std::complex<double>;
    const double tr = a.a00 + a.a11;
    const double det = a.a00 * a.a11 - a.a01 * a.a10;

    // Eigenvalues tr/2 +- delta; delta may be imaginary (underdamped case).
    const cplx delta = std::sqrt(cplx(0.25 * tr * tr - det, 0.0));
    const cplx em = std::exp(cplx(0.5 * tr, 0.0));

    // sinh(delta)/delta with a series fallback near the repeated-eigenvalue case.
    cplx sinch;
    if (std::abs(delta) < 1e-5) {
        const cplx d2 = delta * delta;
        sinch = 1.0 + d2 / 6.0 + d2 * d2 / 120.0;
    } else {
        sinch = std::sinh(delta) / delta;
    }
    // exp(A) = c0 I + c1 A with c1 = em*sinch, c0 = em*(cosh(delta) - (tr/2)*sinch).
    const cplx c1 = em * sinch;
    const cplx c0 = em * (std::cosh(delta) - 0.5 * tr * sinch);

    const double r0 = c0.real(), r1 = c1.real();
    return {r0 + r1 * a.a00, r1 * a.a01, r1 * a.a10, r0 + r1 * a.a11};
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace mlmc
