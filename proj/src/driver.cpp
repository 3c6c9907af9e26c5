#include "mlmc/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mlmc/parallel.hpp"

namespace mlmc {

void MlmcConfig::validate() const {
    if (!(eps_max > 0.0)) throw input_error("MlmcConfig: eps_max must be positive");
    if (M0 < 1) throw input_error("MlmcConfig: M0 must be positive");
    if (L < 0) throw input_error("MlmcConfig: L must be nonnegative");
    if (N_min < 2) throw input_error("MlmcConfig: N_min must be at least 2");
    if (!(weak_order >= 0.5)) throw input_error("MlmcConfig: weak_order must be >= 1/2");
    if (extrapolate && L < 1)
        throw input_error("MlmcConfig: extrapolation needs L >= 1");
    if (exact_coarse && dist == DistributionKind::Gaussian)
        throw input_error("MlmcConfig: exact coarse level needs a discrete distribution");
}

double LevelStats::yhat() const {
    if (exact) return exact_value;
    if (N < 1) throw state_error("LevelStats: no samples");
    return sum_y / double(N);
}

double LevelStats::vhat() const {
    if (exact) return 0.0;
    if (N < 2) throw state_error("LevelStats: variance needs at least two samples");
    const double v = (sum_y2 - sum_y * sum_y / double(N)) / double(N - 1);
    if (!std::isfinite(v)) return v; // overflowing paths must not hide as 0
    return v > 0.0 ? v : 0.0;
}

std::vector<double> optimal_n_raw(std::span<const LevelStats> stats, double eps,
                                  bool exact_coarse) {
    if (!(eps > 0.0)) throw input_error("optimal_n: eps must be positive");
    const std::size_t first = exact_coarse ? 1 : 0;
    double sum = 0.0;
    for (std::size_t j = first; j < stats.size(); ++j) {
        const double v = stats[j].vhat();
        if (!std::isfinite(v))
            throw state_error("optimal_n: level variance is not finite "
                              "(integrator unstable at this step size?)");
        sum += std::sqrt(v / stats[j].h);
    }
    std::vector<double> out(stats.size(), 0.0);
    const double pref = 2.0 / (eps * eps);
    for (std::size_t l = first; l < stats.size(); ++l)
        out[l] = pref * std::sqrt(stats[l].vhat() * stats[l].h) * sum;
    return out;
}

std::vector<long long> optimal_n(std::span<const LevelStats> stats, double eps,
                                 bool exact_coarse) {
    const std::vector<double> raw = optimal_n_raw(stats, eps, exact_coarse);
    std::vector<long long> out(raw.size());
    for (std::size_t l = 0; l < raw.size(); ++l)
        out[l] = (long long)std::ceil(raw[l]);
    return out;
}

namespace {

struct LevelAccum {
    Kahan sum, sum2, cost;
    long long n = 0;
};

void write_back(LevelStats& s, const LevelAccum& a) {
    s.N = a.n;
    s.sum_y = a.sum.value();
    s.sum_y2 = a.sum2.value();
    s.cost = a.cost.value();
}

} // namespace

MlmcResult run(const MlmcConfig& config, const LangevinModel& model, const QoI& qoi,
               std::uint64_t seed, int threads) {
    config.validate();
    model.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const int L = config.L;
    std::vector<LevelStats> stats((std::size_t)L + 1);
    std::vector<LevelAccum> accum((std::size_t)L + 1);
    for (int l = 0; l <= L; ++l) {
        stats[l].level = l;
        stats[l].h = model.T / double(config.M0 << l);
    }

    if (config.exact_coarse) {
        const ExactCoarseResult ec = exact_expectation(
            model, config.scheme, qoi, config.M0, config.dist, config.leaf_budget);
        stats[0].exact = true;
        stats[0].exact_value = ec.value;
        stats[0].cost = double(ec.nodes); // one integrator step per tree node
    }

    const int first_level = config.exact_coarse ? 1 : 0;
    std::vector<long long> target((std::size_t)L + 1, 0);
    for (int l = first_level; l <= L; ++l) target[l] = config.N_min;

    auto sample_level = [&](int l, long long lo, long long hi) {
        SampleSums sums;
        if (l == 0) {
            const double cost_per = double(config.M0);
            sums = sample_in_parallel_ctx(
                lo, hi, threads,
                [&] { return SinglePathSampler(config.scheme, model, config.M0, qoi); },
                [&](SinglePathSampler& path, long long i, double& v, double& c) {
                    IncrementSource src(config.dist, seed,
                                        streams::id(streams::kDriver, 0, i));
                    v = path(src);
                    c = cost_per;
                });
        } else {
            const int steps = config.M0 << l;
            const double cost_per = 1.5 * double(steps);
            sums = sample_in_parallel_ctx(
                lo, hi, threads,
                [&] { return CoupledPairSampler(config.scheme, model, steps, qoi); },
                [&](CoupledPairSampler& pair, long long i, double& v, double& c) {
                    IncrementSource src(config.dist, seed,
                                        streams::id(streams::kDriver, l, i));
                    v = pair(src).y;
                    c = cost_per;
                });
        }
        accum[l].sum.add(sums.sum);
        accum[l].sum2.add(sums.sum_sq);
        accum[l].cost.add(sums.cost);
        accum[l].n += sums.n;
        write_back(stats[l], accum[l]);
    };

    // Remaining-bias estimate of the returned estimator: |Yhat_L|/(2^a - 1)
    // for the plain telescope; the next-order difference for extrapolation.
    auto bias_estimate = [&]() -> double {
        if (L < 1 || stats[L].N < 1) return 0.0;
        if (!config.extrapolate) {
            const double denom = std::pow(2.0, config.weak_order) - 1.0;
            return std::abs(stats[L].yhat()) / denom;
        }
        if (stats[L - 1].N < 1 && !stats[L - 1].exact) return 0.0;
        if (config.weak_order >= 2.0)
            return std::abs(4.0 * stats[L].yhat() - stats[L - 1].yhat()) / 3.0 / 15.0;
        return std::abs(2.0 * stats[L].yhat() - stats[L - 1].yhat()) / 3.0;
    };

    // The sample-count formula is fed an eps matched to the error budget left
    // after the running bias estimate: sigma_target = (eps_max - bias)/3 keeps
    // |error| + one standard deviation below eps_max with about 2 sigma to
    // spare. Re-evaluated each sweep as the level estimators improve.
    auto formula_eps = [&]() -> double {
        const double b = std::min(bias_estimate(), config.eps_max);
        const double sigma_target =
            std::max((config.eps_max - b) / 3.0, config.eps_max / 6.0);
        return std::min(std::sqrt(2.0) * sigma_target, config.eps_max);
    };

    const int round_cap = 1000;
    int rounds = 0;
    auto finish = [&](int rounds_done) {
        MlmcResult res;
        res.per_level = stats;
        res.rounds = rounds_done;
        Kahan est;
        for (const LevelStats& s : stats) est.add(s.yhat());
        res.estimate = est.value();
        if (config.extrapolate)
            res.estimate = extrapolate(res, config.weak_order >= 2.0 ? 2 : 1);

        res.bias_est = bias_estimate();

        double var = 0.0;
        for (int l = 0; l <= L; ++l) {
            if (stats[l].exact || stats[l].N < 1) continue;
            double w = 1.0;
            if (config.extrapolate && l == L)
                w = config.weak_order >= 2.0 ? 4.0 / 3.0 : 2.0;
            var += w * w * stats[l].vhat() / double(stats[l].N);
        }
        res.stat_error_est = std::sqrt(var);

        Kahan cost;
        for (const LevelStats& s : stats) cost.add(s.cost);
        res.total_cost = cost.value();
        res.wall_time = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
        return res;
    };

    while (true) {
        bool more = false;
        for (int l = first_level; l <= L; ++l)
            if (stats[l].N < target[l]) more = true;
        if (!more) break;
        if (++rounds > round_cap)
            throw convergence_error("mlmc::run: refinement did not settle within " +
                                        std::to_string(round_cap) + " rounds",
                                    finish(rounds));

        for (int l = L; l >= first_level; --l)
            if (stats[l].N < target[l]) sample_level(l, stats[l].N, target[l]);

        // Recompute targets after the full sweep.
        std::vector<long long> opt;
        try {
            opt = optimal_n(stats, formula_eps(), config.exact_coarse);
        } catch (const state_error& e) {
            throw convergence_error(std::string("mlmc::run: ") + e.what(),
                                    finish(rounds));
        }
        const long long sane_cap = 1LL << 40;
        for (int l = first_level; l <= L; ++l) {
            if (opt[l] > sane_cap)
                throw convergence_error(
                    "mlmc::run: sample target exceeded 2^40 on level " +
                        std::to_string(l) + " (eps unreachable at this setup)",
                    finish(rounds));
            target[l] = std::max(target[l], opt[l]);
        }
    }

    return finish(rounds);
}

double extrapolate(const MlmcResult& result, int alpha) {
    if (result.per_level.size() < 2)
        throw input_error("extrapolate: needs L >= 1");
    if (alpha != 1 && alpha != 2)
        throw unsupported_error("extrapolate: alpha must be 1 or 2");
    Kahan est;
    for (const LevelStats& s : result.per_level) est.add(s.yhat());
    const double y_top = result.per_level.back().yhat();
    return est.value() + (alpha == 1 ? y_top : y_top / 3.0);
}

double Calibration::h_of_level(int L) const { return T / double(M0) / std::pow(2.0, L); }

int Calibration::level_for_eps(double eps) const {
    if (!(eps > 0.0)) throw input_error("level_for_eps: eps must be positive");
    if (c1 <= 0.0) return min_level;
    const double h_max = std::pow(eps / (bias_split * c1), 1.0 / order);
    const double ratio = T / double(M0) / h_max;
    int L = ratio <= 1.0 ? 0 : (int)std::ceil(std::log2(ratio) - 1e-12);
    return std::max(L, min_level);
}

double Calibration::eps_for_level(int L) const {
    return bias_split * c1 * std::pow(h_of_level(L), order);
}

int Calibration::coarsest_steps_for_eps(double eps, int fixed_L) const {
    if (!(eps > 0.0)) throw input_error("coarsest_steps_for_eps: eps must be positive");
    if (c1 <= 0.0) return 1;
    const double h_max = std::pow(eps / (bias_split * c1), 1.0 / order);
    const double m0 = T / (h_max * std::pow(2.0, fixed_L));
    return std::max(1, (int)std::ceil(m0 - 1e-12));
}

Calibration calibrate_levels(const MlmcConfig& config, const LangevinModel& model,
                             const QoI& qoi, long long pilot_samples,
                             std::uint64_t seed, int threads, int pilot_level) {
    model.validate();
    if (pilot_samples < 100)
        throw input_error("calibrate_levels: need at least 100 pilot samples");
    if (pilot_level < 1) throw input_error("calibrate_levels: pilot level must be >= 1");

    const double alpha = config.weak_order;
    double mean[2], se[2], h[2];
    for (int k = 0; k < 2; ++k) {
        const int l = pilot_level + k;
        const int steps = config.M0 << l;
        h[k] = model.T / double(steps);
        const SampleSums sums = sample_in_parallel_ctx(
            0, pilot_samples, threads,
            [&] { return CoupledPairSampler(config.scheme, model, steps, qoi); },
            [&](CoupledPairSampler& pair, long long i, double& v, double& c) {
                IncrementSource src(config.dist, seed,
                                    streams::id(streams::kPilot, l, i));
                v = pair(src).y;
                c = 0.0;
            });
        mean[k] = sums.mean();
        se[k] = sums.std_error();
    }

    Calibration cal;
    cal.T = model.T;
    cal.M0 = config.M0;
    cal.bias_split = config.dist == DistributionKind::Gaussian ? std::sqrt(2.0)
                                                               : std::sqrt(3.0);
    if (!config.extrapolate) {
        cal.order = alpha;
        cal.min_level = 0;
        double acc = 0.0;
        for (int k = 0; k < 2; ++k) {
            if (std::abs(mean[k]) < 2.0 * se[k])
                throw calibration_error(
                    "calibrate_levels: pilot level estimator indistinguishable from 0");
            acc += mean[k] / ((1.0 - std::pow(2.0, alpha)) * std::pow(h[k], alpha));
        }
        cal.c1_tilde = 0.5 * acc;
    } else {
        // Difference of consecutive extrapolated estimators isolates the
        // next-order term: D = 2 Y_{l+1} - Y_l (alpha=1), (4 Y_{l+1} - Y_l)/3
        // (alpha=2), with E[D] = c' (1 - 2^order) h_{l+1}^order.
        const double order = alpha >= 2.0 ? 4.0 : 2.0;
        cal.order = order;
        cal.min_level = 1;
        double d, se_d;
        if (alpha >= 2.0) {
            d = (4.0 * mean[1] - mean[0]) / 3.0;
            se_d = std::sqrt(16.0 * se[1] * se[1] + se[0] * se[0]) / 3.0;
        } else {
            d = 2.0 * mean[1] - mean[0];
            se_d = std::sqrt(4.0 * se[1] * se[1] + se[0] * se[0]);
        }
        if (std::abs(d) < 2.0 * se_d)
            throw calibration_error(
                "calibrate_levels: extrapolated pilot difference indistinguishable from 0");
        cal.c1_tilde = d / ((1.0 - std::pow(2.0, order)) * std::pow(h[1], order));
    }
    cal.c1 = std::abs(cal.c1_tilde);
    return cal;
}

InterLevelBiasResult inter_level_bias(const MlmcConfig& config,
                                      const LangevinModel& model, const QoI& qoi,
                                      int level, long long samples,
                                      std::uint64_t seed, int threads) {
    model.validate();
    if (level < 0) throw input_error("inter_level_bias: level must be nonnegative");
    if (samples < 2) throw input_error("inter_level_bias: need at least two samples");

    if (config.dist == DistributionKind::Gaussian) {
        // Combining two Gaussian increments reproduces the coarse law exactly,
        // so the two estimators coincide in distribution and the bias is zero.
        InterLevelBiasResult out;
        out.gaussian_identity = true;
        return out;
    }

    const int steps = config.M0 << level;
    const double h = model.T / double(steps);

    struct Ctx {
        Stepper stepper;
        double w1, w2;
        State xa, xb;
        std::vector<double> xi_a, xi_b, xi_c;
        std::vector<double> q0, p0;
        QoI qoi;
    };
    auto make_ctx = [&] {
        Ctx ctx{Stepper(config.scheme, model, h),
                0,
                0,
                {model.q0, model.p0},
                {model.q0, model.p0},
                {},
                {},
                {},
                model.q0,
                model.p0,
                qoi};
        // The combined route mimics the coarse member of a pair whose fine
        // step is h/2.
        std::tie(ctx.w1, ctx.w2) =
            coupling_weights(config.scheme, model.lambda, 0.5 * h);
        const int n = ctx.stepper.draws();
        ctx.xi_a.assign(n, 0.0);
        ctx.xi_b.assign(n, 0.0);
        ctx.xi_c.assign(n, 0.0);
        return ctx;
    };

    const SampleSums sums = sample_in_parallel_ctx(
        0, samples, threads, make_ctx,
        [&](Ctx& ctx, long long i, double& v, double& c) {
            IncrementSource src(config.dist, seed,
                                streams::id(streams::kBias, level, i));
            ctx.xa.q = ctx.q0;
            ctx.xa.p = ctx.p0;
            ctx.xb.q = ctx.q0;
            ctx.xb.p = ctx.p0;
            const int n = (int)ctx.xi_a.size();
            for (int s = 0; s < steps; ++s) {
                src.fill(ctx.xi_a);
                src.fill(ctx.xi_b);
                for (int j = 0; j < n; ++j)
                    ctx.xi_c[j] = ctx.w1 * ctx.xi_a[j] + ctx.w2 * ctx.xi_b[j];
                ctx.stepper(ctx.xa, ctx.xi_a);
                ctx.stepper(ctx.xb, ctx.xi_c);
            }
            v = eval_qoi(ctx.qoi, ctx.xa.q, ctx.xa.p) -
                eval_qoi(ctx.qoi, ctx.xb.q, ctx.xb.p);
            c = 2.0 * double(steps);
        });

    InterLevelBiasResult out;
    out.bias = sums.mean();
    out.std_error = sums.std_error();
    out.samples = sums.n;
    out.gaussian_identity = config.dist == DistributionKind::Gaussian;
    return out;
}

} // namespace mlmc
