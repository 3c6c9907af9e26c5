#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mlmc/increments.hpp"
#include "oracles.hpp"

using namespace mlmc;

namespace {

double sample_moment(std::span<const double> xs, int order) {
    double m = 0;
    for (double x : xs) m += std::pow(x, order);
    return m / double(xs.size());
}

// Direct atom sum, independent of moment().
double atom_moment(DistributionKind kind, int order) {
    const double c = 0.5 * (1.0 - (3.0 + std::sqrt(6.0)) / 6.0);
    const double a = std::sqrt(3.0 + std::sqrt(6.0));
    const double b = std::sqrt(3.0 - std::sqrt(6.0));
    const double r3 = std::sqrt(3.0);
    double m = 0;
    if (kind == DistributionKind::ThreePoint) {
        m = (2.0 / 3.0) * std::pow(0.0, order) / 1.0; // zero atom
        m += (1.0 / 6.0) * (std::pow(r3, order) + std::pow(-r3, order));
    } else {
        m = c * (std::pow(a, order) + std::pow(-a, order)) +
            (0.5 - c) * (std::pow(b, order) + std::pow(-b, order));
    }
    return m;
}

} // namespace

TEST_CASE("sources are deterministic and streams are distinct") {
    for (DistributionKind kind : {DistributionKind::Gaussian,
                                  DistributionKind::ThreePoint,
                                  DistributionKind::FourPoint}) {
        IncrementSource a(kind, 42, 7), b(kind, 42, 7);
        const std::vector<double> xa = a.draw(1000);
        const std::vector<double> xb = b.draw(1000);
        CHECK(xa == xb);

        IncrementSource c(kind, 42, 8), d(kind, 43, 7);
        CHECK(c.draw(1000) != xa);
        CHECK(d.draw(1000) != xa);
    }
}

TEST_CASE("distinct streams look independent (gaussian cross-correlation)") {
    IncrementSource a(DistributionKind::Gaussian, 5, 1);
    IncrementSource b(DistributionKind::Gaussian, 5, 2);
    const int n = 200000;
    double dot = 0;
    for (int i = 0; i < n; ++i) dot += a.next() * b.next();
    CHECK(std::abs(dot / n) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("three-point law: support and sample moments") {
    IncrementSource src(DistributionKind::ThreePoint, 11, 0);
    const int n = 1000000;
    std::vector<double> xs = src.draw(n);
    const double r3 = std::sqrt(3.0);
    for (double x : xs)
        CHECK((x == 0.0 || x == r3 || x == -r3));
    CHECK(std::abs(sample_moment(xs, 1)) < 4e-3);
    CHECK(sample_moment(xs, 4) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("four-point law: exactly the four atoms of the printed distribution") {
    IncrementSource src(DistributionKind::FourPoint, 11, 0);
    const double a = std::sqrt(3.0 + std::sqrt(6.0));
    const double b = std::sqrt(3.0 - std::sqrt(6.0));
    std::set<double> seen;
    for (int i = 0; i < 200000; ++i) seen.insert(src.next());
    CHECK(seen == std::set<double>{-a, -b, b, a});
}

TEST_CASE("gaussian draws: two-sided moments") {
    IncrementSource src(DistributionKind::Gaussian, 3, 9);
    const int n = 1000000;
    std::vector<double> xs = src.draw(n);
    CHECK(std::abs(sample_moment(xs, 1)) < 4.0 / std::sqrt(double(n)));
    CHECK(sample_moment(xs, 2) == doctest::Approx(1.0).epsilon(0.005));
    CHECK(sample_moment(xs, 4) == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("moments: discrete laws match the Gaussian exactly through order 5") {
    const double gauss[] = {1, 0, 1, 0, 3, 0};
    for (int k = 0; k <= 5; ++k) {
        CHECK(moment(DistributionKind::Gaussian, k) == gauss[k]);
        CHECK(moment(DistributionKind::ThreePoint, k) == doctest::Approx(gauss[k]).epsilon(1e-14));
        CHECK(moment(DistributionKind::FourPoint, k) == doctest::Approx(gauss[k]).epsilon(1e-14));
    }
    // matching stops at order 6 for three points, at order 8 for four points
    CHECK(moment(DistributionKind::ThreePoint, 6) == doctest::Approx(9.0));
    CHECK(moment(DistributionKind::Gaussian, 6) == doctest::Approx(15.0));
    CHECK(moment(DistributionKind::FourPoint, 6) == doctest::Approx(15.0).epsilon(1e-13));
    CHECK(moment(DistributionKind::FourPoint, 7) == 0.0);
    CHECK(moment(DistributionKind::FourPoint, 8) == doctest::Approx(81.0).epsilon(1e-13));
    CHECK(moment(DistributionKind::Gaussian, 8) == doctest::Approx(105.0));

    for (DistributionKind kind :
         {DistributionKind::ThreePoint, DistributionKind::FourPoint})
        for (int k = 0; k <= 8; ++k)
            CHECK(moment(kind, k) == doctest::Approx(atom_moment(kind, k)).epsilon(1e-13));
}

TEST_CASE("OuCoupling: alpha_h^2 (1 + r^2) = alpha_2h^2") {
    oracles::XorShift rng(101);
    for (int trial = 0; trial < 500; ++trial) {
        const double lambda = std::exp(rng.uniform(-6, 3));
        const double h = std::exp(rng.uniform(-12, 2));
        const OuCoupling cpl(lambda, h);
        const double lhs = cpl.alpha_h * cpl.alpha_h * (1.0 + cpl.r * cpl.r);
        const double rhs = cpl.alpha_2h * cpl.alpha_2h;
        CHECK(std::abs(lhs - rhs) <= 1e-14 * rhs);
        CHECK(cpl.r > 0.0);
        CHECK(cpl.r < 1.0);
        CHECK(cpl.alpha_h > 0.0);
    }
}

TEST_CASE("combine_brownian: fixed points and scaling") {
    const std::vector<double> zero{0.0};
    CHECK(combine_brownian(zero, zero)[0] == 0.0);
    CHECK(combine_brownian(std::vector{1.0}, std::vector{1.0})[0] ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(combine_brownian(std::vector{1.0}, std::vector{-1.0})[0] == 0.0);
    CHECK_THROWS_AS((void)combine_brownian(std::vector{1.0, 2.0}, std::vector{1.0}),
                    input_error);
}

TEST_CASE("combine_ou: degenerate and hand-evaluated cases") {
    const std::vector<double> zero{0.0};
    const OuCoupling cpl(1.0, 0.5);
    CHECK(combine_ou(zero, zero, cpl)[0] == 0.0);

    // lambda -> 0: r -> 1 and the OU rule degenerates to the Brownian one
    const OuCoupling flat(1e-12, 0.5);
    const double brn = combine_brownian(std::vector{0.3}, std::vector{-1.1})[0];
    CHECK(combine_ou(std::vector{0.3}, std::vector{-1.1}, flat)[0] ==
          doctest::Approx(brn).epsilon(1e-9));

    // direct evaluation of the coefficients: r/sqrt(1+r^2) with r = e^{-1/2}
    const double expected = std::exp(-0.5) / std::sqrt(1.0 + std::exp(-1.0));
    const double got = combine_ou(std::vector{1.0}, std::vector{0.0}, cpl)[0];
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.5185956241330958).epsilon(1e-5));

    CHECK_THROWS_AS((void)combine_ou(std::vector{1.0, 2.0}, zero, cpl), input_error);
}

TEST_CASE("two OU steps compose into one double step through combine_ou") {
    oracles::XorShift rng(55);
    for (int trial = 0; trial < 500; ++trial) {
        const double lambda = std::exp(rng.uniform(-4, 2));
        const double h = std::exp(rng.uniform(-8, 1));
        const double sigma = rng.uniform(0.1, 3.0);
        const double p = rng.uniform(-5, 5);
        const double xi1 = rng.uniform(-3, 3);
        const double xi2 = rng.uniform(-3, 3);
        const OuCoupling cpl(lambda, h);

        const double r = cpl.r;
        const double two_steps =
            r * (r * p + sigma * cpl.alpha_h * xi1) + sigma * cpl.alpha_h * xi2;
        const double combined =
            combine_ou(std::vector{xi1}, std::vector{xi2}, cpl)[0];
        const double one_step = r * r * p + sigma * cpl.alpha_2h * combined;
        CHECK(std::abs(two_steps - one_step) <=
              1e-13 * std::max(1.0, std::abs(two_steps)));
    }
}

TEST_CASE("combine_ou of standard gaussians is standard gaussian") {
    IncrementSource src(DistributionKind::Gaussian, 77, 0);
    const OuCoupling cpl(2.0, 0.25);
    const double w1 = cpl.w_first(), w2 = cpl.w_second();
    const int n = 1000000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = w1 * src.next() + w2 * src.next();
        sum += z;
        sum2 += z * z;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(1.0).epsilon(0.005));
}

TEST_CASE("alpha_h: cancellation-safe for tiny lambda h") {
    // (1 - e^{-2x})/(2x) -> 1 as x -> 0, so alpha_h -> sqrt(h)
    CHECK(ou_alpha(1e-300, 1.0) == doctest::Approx(1.0));
    CHECK(ou_alpha(1.0, 1e-300) == doctest::Approx(std::sqrt(1e-300)));
    CHECK(std::isfinite(ou_alpha(1e-8, 1e-8)));
}
