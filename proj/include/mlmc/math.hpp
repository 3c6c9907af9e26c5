#ifndef MLMC_MATH_HPP
#define MLMC_MATH_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mlmc {

/// Compensated (Kahan) accumulator.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

/// 2x2 real matrix, row major.
struct Mat2 {
    double a00 = 0, a01 = 0, a10 = 0, a11 = 0;

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.a00 * b.a00 + a.a01 * b.a10, a.a00 * b.a01 + a.a01 * b.a11,
                a.a10 * b.a00 + a.a11 * b.a10, a.a10 * b.a01 + a.a11 * b.a11};
    }
    std::array<double, 2> operator*(const std::array<double, 2>& v) const {
        return {a00 * v[0] + a01 * v[1], a10 * v[0] + a11 * v[1]};
    }
    Mat2 scaled(double s) const { return {s * a00, s * a01, s * a10, s * a11}; }
};

/// Matrix exponential of a real 2x2 matrix (eigenvalue closed form,
/// complex-safe divided difference; handles repeated eigenvalues).
Mat2 expm(const Mat2& a);

/// Adaptive Gauss-Kronrod (G7,K15) quadrature of a vector-valued integrand
/// on [a,b] to componentwise absolute tolerance abs_tol.
/// F: double -> std::array<double,N>
template <std::size_t N, class F>
std::array<double, N> gk_adaptive(F&& f, double a, double b, double abs_tol);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

// --- implementation -------------------------------------------------------

namespace detail {

// QUADPACK (G7,K15) nodes and weights on [0,1] half interval.
inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGaussW = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <std::size_t N, class F>
void gk15(F& f, double a, double b, std::array<double, N>& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, N> gauss{};
    kronrod.fill(0.0);
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kGkNodes[i];
        std::array<double, N> v = f(c + dx);
        if (i < 7) {
            const std::array<double, N> w = f(c - dx);
            for (std::size_t k = 0; k < N; ++k) v[k] += w[k];
        }
        for (std::size_t k = 0; k < N; ++k) kronrod[k] += kKronrodW[i] * v[k];
        if (i % 2 == 1 || i == 7) {
            const double gw = kGaussW[i / 2];
            for (std::size_t k = 0; k < N; ++k) gauss[k] += gw * v[k];
        }
    }
    err = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        kronrod[k] *= half;
        err = std::max(err, std::abs(kronrod[k] - half * gauss[k]));
    }
}

} // namespace detail

template <std::size_t N, class F>
std::array<double, N> gk_adaptive(F&& f, double a, double b, double abs_tol) {
    struct Segment {
        double a, b, err;
        std::array<double, N> val;
    };
    if (a == b) return std::array<double, N>{};

    // Seed with panels of bounded width so narrow features cannot hide
    // between the nodes of one wide panel.
    std::vector<Segment> segs;
    const int n0 = std::min(std::max(1, (int)std::ceil(std::abs(b - a))), 64);
    for (int i = 0; i < n0; ++i) {
        Segment s{a + (b - a) * i / n0, a + (b - a) * (i + 1) / n0, 0.0, {}};
        detail::gk15<N>(f, s.a, s.b, s.val, s.err);
        segs.push_back(s);
    }

    const int max_segments = 4000;
    while (true) {
        double total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total_err += segs[i].err;
            if (segs[i].err > segs[worst].err) worst = i;
        }
        if (total_err <= abs_tol || (int)segs.size() >= max_segments) break;

        Segment parent = segs[worst];
        const double mid = 0.5 * (parent.a + parent.b);
        Segment left{parent.a, mid, 0.0, {}}, right{mid, parent.b, 0.0, {}};
        detail::gk15<N>(f, left.a, left.b, left.val, left.err);
        detail::gk15<N>(f, right.a, right.b, right.val, right.err);
        segs[worst] = left;
        segs.push_back(right);
    }

    // Merge in interval order so the result does not depend on split history.
    std::sort(segs.begin(), segs.end(),
              [](const Segment& x, const Segment& y) { return x.a < y.a; });
    std::array<double, N> out{};
    std::array<Kahan, N> acc{};
    for (const Segment& s : segs)
        for (std::size_t k = 0; k < N; ++k) acc[k].add(s.val[k]);
    for (std::size_t k = 0; k < N; ++k) out[k] = acc[k].value();
    return out;
}

} // namespace mlmc

#endif
