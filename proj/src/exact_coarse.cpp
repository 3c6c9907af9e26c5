#include "mlmc/exact_coarse.hpp"

#include <cmath>
#include <string>

#include "mlmc/math.hpp"

namespace mlmc {

EnumerationPlan EnumerationPlan::make(DistributionKind dist, Scheme scheme, int dim,
                                      int coarse_steps, std::uint64_t leaf_budget) {
    if (dist == DistributionKind::Gaussian)
        throw unsupported_error("exact_coarse: Gaussian increments form a continuum");
    if (coarse_steps < 1 || dim < 1)
        throw input_error("exact_coarse: dim and coarse step count must be positive");

    EnumerationPlan plan;
    plan.dim = dim;
    plan.steps = coarse_steps;
    plan.draws_per_step = mlmc::draws_per_step(scheme);
    if (dist == DistributionKind::ThreePoint) {
        const double root3 = std::sqrt(3.0);
        plan.atom_count = 3;
        plan.atom_value = {0.0, root3, -root3};
        plan.atom_prob = {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};
    } else {
        const double c = 0.5 * (1.0 - (3.0 + std::sqrt(6.0)) / 6.0);
        const double a = std::sqrt(3.0 + std::sqrt(6.0));
        const double b = std::sqrt(3.0 - std::sqrt(6.0));
        plan.atom_count = 4;
        plan.atom_value = {a, -a, b, -b};
        plan.atom_prob = {c, c, 0.5 - c, 0.5 - c};
    }

    // total_leaves = q^(dim * r * M0), overflow-checked against the budget.
    const int slots = dim * plan.draws_per_step * coarse_steps;
    const unsigned __int128 u64_max = ~(std::uint64_t)0;
    unsigned __int128 leaves = 1;
    bool huge = false;
    for (int i = 0; i < slots; ++i) {
        leaves *= (unsigned __int128)plan.atom_count;
        if (leaves > u64_max) {
            huge = true;
            break;
        }
    }
    if (huge || leaves > (unsigned __int128)leaf_budget) {
        const std::string count =
            huge ? "more than 2^64" : std::to_string((unsigned long long)leaves);
        throw resource_error("exact_coarse: " + count +
                             " leaves exceed the budget of " +
                             std::to_string(leaf_budget));
    }
    plan.total_leaves = (std::uint64_t)leaves;
    return plan;
}

namespace {

struct Traversal {
    const EnumerationPlan& plan;
    const Stepper& stepper;
    const QoI& qoi;
    int slots_per_step;
    std::vector<State> stack;      // one workspace state per depth
    std::vector<double> xi;        // per-depth draw slots: steps * slots_per_step
    Kahan acc;
    Kahan prob_acc;
    std::uint64_t leaves = 0;
    std::uint64_t nodes = 0;

    void at_step(int step_idx, double prob) {
        if (step_idx == plan.steps) {
            const State& x = stack[step_idx];
            acc.add(prob * eval_qoi(qoi, x.q, x.p));
            prob_acc.add(prob);
            ++leaves;
            return;
        }
        expand_slot(step_idx, 0, prob);
    }

    void expand_slot(int step_idx, int slot, double prob) {
        if (slot == slots_per_step) {
            State& next = stack[step_idx + 1];
            next = stack[step_idx];
            stepper(next, std::span<const double>(xi).subspan(
                              (std::size_t)step_idx * slots_per_step, slots_per_step));
            ++nodes;
            at_step(step_idx + 1, prob);
            return;
        }
        for (int a = 0; a < plan.atom_count; ++a) {
            xi[(std::size_t)step_idx * slots_per_step + slot] = plan.atom_value[a];
            expand_slot(step_idx, slot + 1, prob * plan.atom_prob[a]);
        }
    }
};

} // namespace

ExactCoarseResult exact_expectation(const LangevinModel& model, Scheme scheme,
                                    const QoI& qoi, int coarse_steps,
                                    DistributionKind dist,
                                    std::uint64_t leaf_budget) {
    model.validate();
    EnumerationPlan plan =
        EnumerationPlan::make(dist, scheme, model.dim, coarse_steps, leaf_budget);
    const Stepper stepper(scheme, model, model.T / coarse_steps);

    Traversal tr{plan, stepper, qoi, model.dim * plan.draws_per_step, {}, {}, {}, {},
                 0, 0};
    tr.stack.assign(coarse_steps + 1, State{model.q0, model.p0});
    tr.xi.assign((std::size_t)tr.slots_per_step * coarse_steps, 0.0);
    tr.at_step(0, 1.0);

    ExactCoarseResult out;
    out.value = tr.acc.value();
    out.leaves = tr.leaves;
    out.nodes = tr.nodes;
    out.leaf_probability_sum = tr.prob_acc.value();
    out.plan = std::move(plan);
    return out;
}

} // namespace mlmc
