#ifndef MLMC_DRIVER_HPP
#define MLMC_DRIVER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlmc/exact_coarse.hpp"
#include "mlmc/integrators.hpp"

namespace mlmc {

/// Inputs of the adaptive multilevel driver. Level ell uses M0 * 2^ell steps
/// of size h_ell = T / (M0 * 2^ell); the finest level is ell = L.
struct MlmcConfig {
    double eps_max = 1e-3;   ///< target RMS accuracy
    int M0 = 4;              ///< coarsest-level step count
    int L = 3;               ///< finest level index
    int N_min = 100;         ///< initial samples per level
    Scheme scheme = Scheme::SymplecticEulerOU;
    DistributionKind dist = DistributionKind::Gaussian;
    bool extrapolate = false;
    bool exact_coarse = false;
    double weak_order = 1.0; ///< alpha, >= 1/2
    std::uint64_t leaf_budget = 100000000ULL; ///< for the exact coarse level

    void validate() const;
};

/// Per-level running sums of the correction samples.
struct LevelStats {
    int level = 0;
    double h = 0;
    long long N = 0;
    double sum_y = 0;
    double sum_y2 = 0;
    double cost = 0;      ///< work units: integrator steps executed
    bool exact = false;   ///< level evaluated by enumeration (variance 0)
    double exact_value = 0;

    double yhat() const;
    double vhat() const;  ///< (sum_y2 - sum_y^2/N)/(N-1), clipped at 0
};

struct MlmcResult {
    double estimate = 0;   ///< sum of level estimators (+ extrapolation term)
    std::vector<LevelStats> per_level;
    double bias_est = 0;   ///< |Yhat_L| / (2^alpha - 1)
    double stat_error_est = 0;
    double total_cost = 0; ///< work units
    double wall_time = 0;  ///< seconds
    int rounds = 0;        ///< refinement sweeps executed
    std::optional<double> inter_level_bias; ///< filled by the discrete harness
};

/// Refinement loop did not settle within the round cap; carries the state
/// reached so far.
struct convergence_error : std::runtime_error {
    convergence_error(const std::string& what, MlmcResult partial_)
        : std::runtime_error(what), partial(std::move(partial_)) {}
    MlmcResult partial;
};

/// Optimal per-level sample targets before rounding:
/// 2 eps^-2 sqrt(V_l h_l) sum_j sqrt(V_j / h_j). With an exact coarse level,
/// level 0 drops out of both the targets and the sum.
std::vector<double> optimal_n_raw(std::span<const LevelStats> stats, double eps,
                                  bool exact_coarse);

/// Ceiling of optimal_n_raw.
std::vector<long long> optimal_n(std::span<const LevelStats> stats, double eps,
                                 bool exact_coarse);

/// Adaptive MLMC estimator. Level 0 samples single paths (or is enumerated
/// exactly when config.exact_coarse is set); levels >= 1 sample coupled
/// fine/coarse pairs. Sample i on level l always draws from the stream
/// derived from (l, i), so the result is reproducible for a fixed seed
/// independent of the worker count.
MlmcResult run(const MlmcConfig& config, const LangevinModel& model, const QoI& qoi,
               std::uint64_t seed, int threads = 1);

/// Richardson extrapolation of a finished result: alpha = 1 adds Yhat_L
/// (2 P_L - P_{L-1}); alpha = 2 adds Yhat_L / 3 ((4 P_L - P_{L-1})/3).
double extrapolate(const MlmcResult& result, int alpha);

/// Bias model c1 h^order calibrated from pilot level estimators.
struct Calibration {
    double c1_tilde = 0;  ///< signed leading coefficient
    double c1 = 0;        ///< |c1_tilde|
    double order = 1;     ///< bias order the model was fitted with
    double bias_split = 0;///< bias budget eps/split: sqrt(2), or sqrt(3) discrete
    double T = 1;
    int M0 = 4;
    int min_level = 0;

    double h_of_level(int L) const;
    /// Smallest L with c1 h_L^order <= eps / bias_split.
    int level_for_eps(double eps) const;
    /// eps implied by running at level L: bias_split * c1 * h_L^order.
    double eps_for_level(int L) const;
    /// Smallest coarse step count with c1 h^order <= eps/bias_split at fixed L.
    int coarsest_steps_for_eps(double eps, int fixed_L) const;
};

/// Estimate the bias constant from pilot runs of coupled pairs at two
/// adjacent levels via Yhat_l ~ c1 (1 - 2^alpha) h_l^alpha (the extrapolated
/// variants difference out the leading term and calibrate the next order).
/// Throws calibration_error when the pilot means are statistically
/// indistinguishable from zero.
Calibration calibrate_levels(const MlmcConfig& config, const LangevinModel& model,
                             const QoI& qoi, long long pilot_samples,
                             std::uint64_t seed, int threads = 1,
                             int pilot_level = 2);

struct InterLevelBiasResult {
    double bias = 0;      ///< sample mean of P_hat - P_tilde
    double std_error = 0;
    long long samples = 0;
    bool gaussian_identity = false; ///< true when the combination is exact in law
};

/// Monte Carlo estimate of E[P_hat_l - P_tilde_l]: P_hat drives a step-h_l
/// path with direct draws; P_tilde drives the same discretization with
/// increments combined from two half-step draws. The first half-step draw is
/// shared with P_hat (common random numbers). For Gaussian increments the
/// per-sample difference vanishes identically; the result is flagged.
InterLevelBiasResult inter_level_bias(const MlmcConfig& config,
                                      const LangevinModel& model, const QoI& qoi,
                                      int level, long long samples,
                                      std::uint64_t seed, int threads = 1);

namespace streams {
// Stream-id namespaces keep RNG draws of different estimators disjoint.
inline constexpr std::uint64_t kDriver = 1;
inline constexpr std::uint64_t kPilot = 2;
inline constexpr std::uint64_t kBias = 3;
inline constexpr std::uint64_t kBaseline = 4;

inline std::uint64_t id(std::uint64_t ns, int level, long long index) {
    return (ns << 56) | (std::uint64_t(level & 0xff) << 48) | std::uint64_t(index);
}
} // namespace streams

} // namespace mlmc

#endif
