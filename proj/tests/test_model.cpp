#include <doctest.h>

#include <cmath>

#include "mlmc/model.hpp"
#include "oracles.hpp"

using namespace mlmc;

namespace {

double potential_value(const Potential& pot, double q) {
    if (const Harmonic* h = std::get_if<Harmonic>(&pot))
        return 0.5 * h->omega0 * h->omega0 * q * q;
    const DoubleWell& dw = std::get<DoubleWell>(pot);
    const double z = q * q - dw.qmin * dw.qmin;
    return dw.omega0 * dw.omega0 / (8.0 * dw.qmin * dw.qmin) * z * z;
}

LangevinModel set1() { return make_model_1d(4.0, 2.0, Harmonic{1.0}, -1, -1, 1.0); }
LangevinModel set2() { return make_model_1d(9.0, 3.0, Harmonic{1.0}, -1, -1, 1.0); }

double cov_min_eigenvalue(const std::array<double, 4>& m) {
    const double tr = m[0] + m[3];
    const double det = m[0] * m[3] - m[1] * m[2];
    return 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
}

} // namespace

TEST_CASE("grad_potential: stationary points and a hand value") {
    CHECK(grad_potential_1d(Harmonic{1.0}, 0.0) == 0.0);
    CHECK(grad_potential_1d(DoubleWell{1.0, 1.0}, 1.0) == 0.0);
    CHECK(grad_potential_1d(DoubleWell{1.0, 1.0}, -1.0) == 0.0);
    // (1/2)(4-1)*2 = 3
    CHECK(grad_potential_1d(DoubleWell{1.0, 1.0}, 2.0) == doctest::Approx(3.0));

    const std::vector<double> q{0.0, 1.0, 2.0};
    const std::vector<double> g = grad_potential(DoubleWell{1.0, 1.0}, q);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == doctest::Approx(3.0));

    // model-aware variant rejects mismatched dimensions
    const LangevinModel m = set1();
    CHECK(grad_potential(m, std::vector{2.0})[0] == doctest::Approx(2.0));
    CHECK_THROWS_AS(grad_potential(m, q), input_error);
}

TEST_CASE("grad_potential agrees with central finite differences") {
    oracles::XorShift rng(31);
    for (const Potential& pot :
         {Potential(Harmonic{1.3}), Potential(DoubleWell{1.2, 0.8})}) {
        for (int i = 0; i < 100; ++i) {
            const double q = rng.uniform(-3, 3);
            const double fd =
                oracles::central_diff([&](double x) { return potential_value(pot, x); }, q);
            const double g = grad_potential_1d(pot, q);
            CHECK(std::abs(g - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(make_model_1d(0.0, 1.0, Harmonic{1.0}, 0, 0, 1.0), input_error);
    CHECK_THROWS_AS(make_model_1d(1.0, -1.0, Harmonic{1.0}, 0, 0, 1.0), input_error);
    CHECK_THROWS_AS(make_model_1d(1.0, 1.0, Harmonic{1.0}, 0, 0, 0.0), input_error);
    CHECK_THROWS_AS(make_model_1d(1.0, 1.0, DoubleWell{1.0, 0.0}, 0, 0, 1.0),
                    input_error);
    // sigma = 0 and omega0 = 0 are allowed (deterministic / free-momentum runs)
    CHECK_NOTHROW(make_model_1d(1.0, 0.0, Harmonic{0.0}, 0, 0, 1.0));

    LangevinModel bad = set1();
    bad.q0 = {1.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), input_error);
}

TEST_CASE("harmonic_exact_law: zero time, domain errors") {
    const GaussianLaw law = harmonic_exact_law(set1(), 0.0);
    CHECK(law.mean[0] == doctest::Approx(-1.0));
    CHECK(law.mean[1] == doctest::Approx(-1.0));
    for (double c : law.cov) CHECK(c == 0.0);

    CHECK_THROWS_AS(harmonic_exact_law(
                        make_model_1d(1, 1, DoubleWell{1.0, 1.0}, 0, 0, 1.0), 1.0),
                    unsupported_error);
    LangevinModel sigma0 = set1();
    sigma0.sigma = 0.0;
    CHECK_THROWS_AS(harmonic_exact_law(sigma0, 1.0), input_error);
    LangevinModel d2 = set1();
    d2.dim = 2;
    d2.q0 = {0, 0};
    d2.p0 = {0, 0};
    CHECK_THROWS_AS(harmonic_exact_law(d2, 1.0), unsupported_error);
}

TEST_CASE("harmonic_exact_law: frozen quadrature cross-check for set 1") {
    const GaussianLaw law = harmonic_exact_law(set1(), 1.0);
    CHECK(law.mean[0] == doctest::Approx(-1.0361725541620863).epsilon(1e-11));
    CHECK(law.mean[1] == doctest::Approx(0.24728222739957753).epsilon(1e-11));
    CHECK(law.cov_qq() == doctest::Approx(0.13906287285228131).epsilon(1e-9));
    CHECK(law.cov_qp() == doctest::Approx(0.091514232017419511).epsilon(1e-9));
    CHECK(law.cov_pp() == doctest::Approx(0.47656456018931048).epsilon(1e-9));
}

TEST_CASE("harmonic_exact_law: free momentum (omega0 = 0) has closed-form covariance") {
    const double lambda = 1.7, sigma = 0.8, t = 2.3;
    const LangevinModel m = make_model_1d(lambda, sigma, Harmonic{0.0}, 0.5, -0.25, 4.0);
    const GaussianLaw law = harmonic_exact_law(m, t);

    const double el = std::exp(-lambda * t);
    const double var_p = sigma * sigma * (1.0 - el * el) / (2.0 * lambda);
    const double cov_qp = sigma * sigma * (1.0 - el) * (1.0 - el) / (2.0 * lambda * lambda);
    const double var_q = sigma * sigma / (lambda * lambda) *
                         (t - 2.0 * (1.0 - el) / lambda + (1.0 - el * el) / (2.0 * lambda));
    CHECK(law.cov_pp() == doctest::Approx(var_p).epsilon(1e-10));
    CHECK(law.cov_qp() == doctest::Approx(cov_qp).epsilon(1e-10));
    CHECK(law.cov_qq() == doctest::Approx(var_q).epsilon(1e-10));
    CHECK(law.mean[1] == doctest::Approx(-0.25 * el).epsilon(1e-12));
    CHECK(law.mean[0] == doctest::Approx(0.5 - 0.25 * (1.0 - el) / lambda).epsilon(1e-10));
}

TEST_CASE("covariance grows monotonically in the Loewner order") {
    const LangevinModel m = set1();
    GaussianLaw prev = harmonic_exact_law(m, 0.05);
    for (double t : {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
        const GaussianLaw cur = harmonic_exact_law(m, t);
        const std::array<double, 4> diff = {
            cur.cov[0] - prev.cov[0], cur.cov[1] - prev.cov[1],
            cur.cov[2] - prev.cov[2], cur.cov[3] - prev.cov[3]};
        CHECK(cov_min_eigenvalue(diff) >= -1e-10);
        prev = cur;
    }
}

TEST_CASE("covariance approaches the stationary momentum variance") {
    // Underdamped parameters (lambda <= 2 w0), where the state relaxes at
    // rate lambda/2 and t = 50/lambda is deep in the stationary regime.
    const LangevinModel m = make_model_1d(1.0, 0.4, Harmonic{1.0}, -1, -1, 1.0);
    const double stat = m.sigma * m.sigma / (2.0 * m.lambda);
    const double c50 = harmonic_exact_law(m, 50.0 / m.lambda).cov_pp();
    const double c100 = harmonic_exact_law(m, 100.0 / m.lambda).cov_pp();
    CHECK(std::abs(c50 - c100) < 1e-6);
    CHECK(c50 == doctest::Approx(stat).epsilon(1e-6));

    // The overdamped set-1 parameters relax at rate 2 - sqrt(3); allow the
    // matching horizon.
    const LangevinModel m1 = set1();
    const double rate = 2.0 - std::sqrt(3.0);
    const double s1 = m1.sigma * m1.sigma / (2.0 * m1.lambda);
    CHECK(harmonic_exact_law(m1, 50.0 / rate).cov_pp() ==
          doctest::Approx(s1).epsilon(1e-6));
}

TEST_CASE("exact_qoi_expectation: point masses") {
    GaussianLaw point;
    point.mean = {0.0, 0.5};
    // the bump's peak value is sqrt(2/pi)
    CHECK(exact_qoi_expectation(point, GaussianBump{}) ==
          doctest::Approx(std::sqrt(2.0 / std::acos(-1.0))).epsilon(1e-15));

    GaussianLaw well;
    well.mean = {-1.0, 0.0};
    CHECK(exact_qoi_expectation(well, ShiftedSquare{1.0}) == 0.0);

    CHECK_THROWS_AS(exact_qoi_expectation(point, CustomQoI{}), unsupported_error);
}

TEST_CASE("exact_qoi_expectation: reference values for both parameter sets") {
    const double v1 =
        exact_qoi_expectation(harmonic_exact_law(set1(), 1.0), GaussianBump{});
    const double v2 =
        exact_qoi_expectation(harmonic_exact_law(set2(), 1.0), GaussianBump{});
    CHECK(std::abs(v1 - 0.447904416997582) < 1e-9);
    CHECK(std::abs(v2 - 0.418086875513087) < 1e-9);
}

TEST_CASE("exact_qoi_expectation: bump expectation lies in (0, 1]") {
    oracles::XorShift rng(13);
    for (int i = 0; i < 300; ++i) {
        GaussianLaw law;
        law.mean = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
        const double a = rng.uniform(0, 2), b = rng.uniform(0, 2);
        const double c = rng.uniform(-1, 1) * std::sqrt(a * b);
        law.cov = {a, c, c, b};
        const double v = exact_qoi_expectation(law, GaussianBump{});
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("exact_qoi_expectation: shifted square against direct moments") {
    GaussianLaw law;
    law.mean = {0.7, -0.3};
    law.cov = {0.5, 0.1, 0.1, 0.25};
    // E[(Q+1)^2 + P^2] = (mu_Q+1)^2 + var_Q + mu_P^2 + var_P
    const double expected = (0.7 + 1.0) * (0.7 + 1.0) + 0.5 + 0.09 + 0.25;
    CHECK(exact_qoi_expectation(law, ShiftedSquare{1.0}) ==
          doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("eval_qoi: direct evaluations and custom callable") {
    const std::vector<double> q{0.25}, p{0.5};
    CHECK(eval_qoi(GaussianBump{}, q, p) ==
          doctest::Approx(std::sqrt(2.0 / std::acos(-1.0))));
    CHECK(eval_qoi(ShiftedSquare{1.0}, q, p) ==
          doctest::Approx(1.25 * 1.25 + 0.25));
    const CustomQoI custom{[](std::span<const double> qq, std::span<const double> pp) {
        return qq[0] + 2.0 * pp[0];
    }};
    CHECK(eval_qoi(custom, q, p) == doctest::Approx(1.25));
    CHECK_THROWS_AS(eval_qoi(GaussianBump{}, q, std::vector<double>{1.0, 2.0}),
                    input_error);
}
