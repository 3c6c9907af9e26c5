#include <doctest.h>

#include <cmath>
#include <string>

#include "mlmc/exact_coarse.hpp"
#include "mlmc/math.hpp"
#include "mlmc/parallel.hpp"
#include "oracles.hpp"

using namespace mlmc;

namespace {

LangevinModel small_noise() {
    return make_model_1d(1.0, 0.4, Harmonic{1.0}, -1, -1, 1.0);
}

// Enumerate every increment sequence with an odometer, re-simulating each
// path from scratch, with the same atom order and summation order as the
// tree traversal.
double naive_enumeration(const LangevinModel& m, Scheme scheme, const QoI& qoi,
                         int coarse_steps, const EnumerationPlan& plan) {
    const int slots = m.dim * plan.draws_per_step;
    const int total_slots = slots * coarse_steps;
    std::uint64_t total = 1;
    for (int i = 0; i < total_slots; ++i) total *= (std::uint64_t)plan.atom_count;

    std::vector<std::uint64_t> place(total_slots);
    std::uint64_t p = 1;
    for (int j = total_slots - 1; j >= 0; --j) {
        place[j] = p;
        p *= (std::uint64_t)plan.atom_count;
    }

    const Stepper stepper(scheme, m, m.T / coarse_steps);
    std::vector<double> xi(slots);
    Kahan acc;
    for (std::uint64_t leaf = 0; leaf < total; ++leaf) {
        State x{m.q0, m.p0};
        double prob = 1.0;
        for (int s = 0; s < coarse_steps; ++s) {
            for (int j = 0; j < slots; ++j) {
                const int digit =
                    (int)((leaf / place[s * slots + j]) % (std::uint64_t)plan.atom_count);
                xi[j] = plan.atom_value[digit];
                prob *= plan.atom_prob[digit];
            }
            stepper(x, xi);
        }
        acc.add(prob * eval_qoi(qoi, x.q, x.p));
    }
    return acc.value();
}

} // namespace

TEST_CASE("enumeration plan: atoms, probabilities, leaf counts") {
    const EnumerationPlan p3 = EnumerationPlan::make(
        DistributionKind::ThreePoint, Scheme::SymplecticEulerOU, 1, 4, 1000000);
    CHECK(p3.atom_count == 3);
    CHECK(p3.draws_per_step == 1);
    CHECK(p3.total_leaves == 81);
    double sum3 = 0;
    for (double q : p3.atom_prob) sum3 += q;
    CHECK(sum3 == doctest::Approx(1.0).epsilon(1e-15));

    const EnumerationPlan p4 = EnumerationPlan::make(
        DistributionKind::FourPoint, Scheme::StormerVerletOU, 1, 3, 1000000);
    CHECK(p4.atom_count == 4);
    CHECK(p4.draws_per_step == 2);
    CHECK(p4.total_leaves == 4096); // 4^(1*2*3)
    double sum4 = 0;
    for (double q : p4.atom_prob) sum4 += q;
    CHECK(std::abs(sum4 - 1.0) < 1e-15);

    CHECK_THROWS_AS(EnumerationPlan::make(DistributionKind::Gaussian,
                                          Scheme::SymplecticEulerOU, 1, 4, 1000000),
                    unsupported_error);
}

TEST_CASE("budget guard names the leaf count") {
    try {
        exact_expectation(small_noise(), Scheme::SymplecticEulerOU, GaussianBump{}, 4,
                          DistributionKind::ThreePoint, 10);
        FAIL("expected resource_error");
    } catch (const resource_error& e) {
        CHECK(std::string(e.what()).find("81") != std::string::npos);
    }
    // far beyond 64-bit range still reports cleanly
    CHECK_THROWS_AS(exact_expectation(small_noise(), Scheme::SymplecticEulerOU,
                                      GaussianBump{}, 64,
                                      DistributionKind::ThreePoint, 1000),
                    resource_error);
}

TEST_CASE("single-step enumeration is the defining three-term sum") {
    const LangevinModel m = small_noise();
    const ExactCoarseResult res = exact_expectation(
        m, Scheme::SymplecticEulerOU, GaussianBump{}, 1, DistributionKind::ThreePoint);

    const double r3 = std::sqrt(3.0);
    auto phi_of = [&](double xi) {
        const State out = step(Scheme::SymplecticEulerOU, m, State{m.q0, m.p0}, 1.0,
                               std::vector{xi});
        return eval_qoi(GaussianBump{}, out.q, out.p);
    };
    const double expect =
        (2.0 / 3.0) * phi_of(0.0) + (1.0 / 6.0) * phi_of(r3) + (1.0 / 6.0) * phi_of(-r3);
    CHECK(res.value == doctest::Approx(expect).epsilon(1e-15));
    CHECK(res.leaves == 3);
}

TEST_CASE("tree traversal equals naive enumeration bit for bit on small trees") {
    const LangevinModel m = small_noise();
    struct Case {
        Scheme scheme;
        DistributionKind dist;
        int steps;
    };
    for (const Case c : {Case{Scheme::SymplecticEulerOU, DistributionKind::ThreePoint, 4},
                         Case{Scheme::StormerVerletOU, DistributionKind::ThreePoint, 3},
                         Case{Scheme::SymplecticEulerOU, DistributionKind::FourPoint, 5},
                         Case{Scheme::StormerVerletOU, DistributionKind::FourPoint, 2},
                         Case{Scheme::EulerMaruyama, DistributionKind::ThreePoint, 6}}) {
        const ExactCoarseResult res =
            exact_expectation(m, c.scheme, GaussianBump{}, c.steps, c.dist);
        const double naive =
            naive_enumeration(m, c.scheme, GaussianBump{}, c.steps, res.plan);
        CHECK(res.value == naive); // identical summation order
        CHECK(res.leaves == res.plan.total_leaves);
        CHECK(std::abs(res.leaf_probability_sum - 1.0) < 1e-12);
    }
}

TEST_CASE("larger tree agrees with the naive sum to relative 1e-13") {
    const LangevinModel m = small_noise();
    const ExactCoarseResult res = exact_expectation(
        m, Scheme::SymplecticEulerOU, GaussianBump{}, 9, DistributionKind::ThreePoint);
    const double naive =
        naive_enumeration(m, Scheme::SymplecticEulerOU, GaussianBump{}, 9, res.plan);
    CHECK(std::abs(res.value - naive) <= 1e-13 * std::abs(naive));
    CHECK(res.leaves == 19683);
}

TEST_CASE("noise-free enumeration collapses to the deterministic path value") {
    const LangevinModel m = make_model_1d(1.0, 0.0, Harmonic{1.0}, -1, -1, 1.0);
    IncrementSource unused(DistributionKind::ThreePoint, 1, 1);
    const double det =
        single_path(Scheme::SymplecticEulerOU, m, 4, unused, GaussianBump{});
    for (DistributionKind dist :
         {DistributionKind::ThreePoint, DistributionKind::FourPoint}) {
        const ExactCoarseResult res =
            exact_expectation(m, Scheme::SymplecticEulerOU, GaussianBump{}, 4, dist);
        CHECK(res.value == doctest::Approx(det).epsilon(1e-14));
    }
}

TEST_CASE("repeated enumeration is bitwise identical (no sampling involved)") {
    const LangevinModel m = small_noise();
    const ExactCoarseResult a = exact_expectation(
        m, Scheme::StormerVerletOU, GaussianBump{}, 4, DistributionKind::ThreePoint);
    const ExactCoarseResult b = exact_expectation(
        m, Scheme::StormerVerletOU, GaussianBump{}, 4, DistributionKind::ThreePoint);
    CHECK(a.value == b.value);
    CHECK(a.leaves == b.leaves);
    CHECK(a.leaves == 6561); // 3^(2*4)
}

TEST_CASE("enumeration matches a discrete-increment Monte Carlo estimate") {
    const LangevinModel m = small_noise();
    const ExactCoarseResult res = exact_expectation(
        m, Scheme::SymplecticEulerOU, GaussianBump{}, 4, DistributionKind::ThreePoint);

    const SampleSums mc = sample_in_parallel_ctx(
        0, 1000000, 2,
        [&] {
            return SinglePathSampler(Scheme::SymplecticEulerOU, m, 4, GaussianBump{});
        },
        [&](SinglePathSampler& path, long long i, double& v, double& c) {
            IncrementSource src(DistributionKind::ThreePoint, 4242, (std::uint64_t)i);
            v = path(src);
            c = 0;
        });
    CHECK(std::abs(res.value - mc.mean()) < 4.0 * mc.std_error());
}
