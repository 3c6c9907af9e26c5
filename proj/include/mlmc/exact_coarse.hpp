#ifndef MLMC_EXACT_COARSE_HPP
#define MLMC_EXACT_COARSE_HPP

#include <cstdint>
#include <vector>

#include "mlmc/integrators.hpp"

namespace mlmc {

/// Shape of the discrete-increment probability tree for one coarse level.
struct EnumerationPlan {
    int atom_count = 0;      ///< q: 3 or 4
    int dim = 1;
    int steps = 0;           ///< coarse step count M0
    int draws_per_step = 1;  ///< r: 1, or 2 for Stormer-Verlet
    std::uint64_t total_leaves = 0; ///< q^(dim * r * M0)
    std::vector<double> atom_value;
    std::vector<double> atom_prob;

    /// Throws resource_error (naming the leaf count) if the tree exceeds
    /// the budget, unsupported_error for the Gaussian kind.
    static EnumerationPlan make(DistributionKind dist, Scheme scheme, int dim,
                                int coarse_steps, std::uint64_t leaf_budget);
};

struct ExactCoarseResult {
    double value = 0;               ///< exact E[phi(X_M0)] under the discrete law
    std::uint64_t leaves = 0;       ///< leaves visited (== plan.total_leaves)
    std::uint64_t nodes = 0;        ///< internal step nodes expanded
    double leaf_probability_sum = 0;///< accumulated leaf probabilities (== 1)
    EnumerationPlan plan;
};

/// Sampling-free evaluation of E[phi(X_M0)] when the increments follow a
/// discrete law: depth-first traversal of the probability tree, reusing the
/// partial state at every internal node. Deterministic; no RNG involved.
ExactCoarseResult exact_expectation(const LangevinModel& model, Scheme scheme,
                                    const QoI& qoi, int coarse_steps,
                                    DistributionKind dist,
                                    std::uint64_t leaf_budget = 100000000ULL);

} // namespace mlmc

#endif
