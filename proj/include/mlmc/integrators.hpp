#ifndef MLMC_INTEGRATORS_HPP
#define MLMC_INTEGRATORS_HPP

#include <span>
#include <vector>

#include "mlmc/increments.hpp"
#include "mlmc/model.hpp"

namespace mlmc {

enum class Scheme { EulerMaruyama, SymplecticEulerOU, StormerVerletOU };

const char* to_string(Scheme s);

/// Increment vectors consumed per time step (Stormer-Verlet draws xi_n and
/// xi_{n+1/2}).
inline int draws_per_step(Scheme s) {
    return s == Scheme::StormerVerletOU ? 2 : 1;
}

/// Phase-space state, dim components each.
struct State {
    std::vector<double> q;
    std::vector<double> p;
};

/// One-step map with the step-size dependent coefficients precomputed.
/// Pure: the only state it touches is the one passed in.
class Stepper {
  public:
    Stepper(Scheme scheme, const LangevinModel& model, double h);

    Scheme scheme() const { return scheme_; }
    double h() const { return h_; }
    int dim() const { return dim_; }
    /// Total scalar draws consumed per step: dim * draws_per_step(scheme).
    int draws() const { return dim_ * draws_per_step(scheme_); }

    /// Advance the state by one step. xi must hold draws() standardized
    /// increments; for Stormer-Verlet the first dim entries are xi_n and the
    /// last dim entries xi_{n+1/2}.
    void operator()(State& x, std::span<const double> xi) const;

  private:
    double grad(double q) const {
        return harmonic_ ? w2_ * q : dw_a_ * (q * q - dw_qmin2_) * q;
    }

    Scheme scheme_;
    int dim_;
    double h_;
    double lambda_;
    // precomputed coefficients
    double r_h_ = 0;      // e^{-lambda h}
    double sa_h_ = 0;     // sigma * alpha_h
    double r_half_ = 0;   // e^{-lambda h/2}
    double sa_half_ = 0;  // sigma * alpha_{h/2}
    double s_sqrth_ = 0;  // sigma * sqrt(h)
    bool harmonic_ = true;
    double w2_ = 0;       // omega0^2
    double dw_a_ = 0;     // omega0^2 / (2 qmin^2)
    double dw_qmin2_ = 0; // qmin^2
};

/// Single step as a pure function (convenience wrapper over Stepper).
/// xi_b is only read for StormerVerletOU.
State step(Scheme scheme, const LangevinModel& model, const State& state, double h,
           std::span<const double> xi_a, std::span<const double> xi_b = {});

/// Exact OU update e^{-lambda h} p + sigma alpha_h xi, componentwise.
std::vector<double> ou_exact_step(std::span<const double> p, double h, double lambda,
                                  double sigma, std::span<const double> xi);

/// A fine/coarse pair of end-time QoI values driven by consistent noise.
struct CoupledSample {
    double fine_value = 0;
    double coarse_value = 0;
    double y = 0; ///< fine_value - coarse_value
};

/// Weights (w1, w2) such that w1*xi1 + w2*xi2 turns two consecutive fine-step
/// increments into the matching coarse-step increment for the scheme:
/// Brownian 1/sqrt(2) each for Euler-Maruyama, the OU rule otherwise
/// (per half-step family for Stormer-Verlet).
std::pair<double, double> coupling_weights(Scheme scheme, double lambda, double fine_h);

/// Repeated single-path sampling with the step coefficients set up once.
class SinglePathSampler {
  public:
    SinglePathSampler(Scheme scheme, const LangevinModel& model, int steps, QoI qoi);

    int steps() const { return steps_; }
    double operator()(IncrementSource& src);

  private:
    Stepper stepper_;
    int steps_;
    QoI qoi_;
    std::vector<double> q0_, p0_;
    State x_;
    std::vector<double> xi_;
};

/// Repeated coupled fine/coarse sampling for one level.
class CoupledPairSampler {
  public:
    CoupledPairSampler(Scheme scheme, const LangevinModel& model, int level_steps,
                       QoI qoi);

    int fine_steps() const { return steps_; }
    CoupledSample operator()(IncrementSource& fine_src);

  private:
    Stepper fine_, coarse_;
    int steps_;
    double w1_, w2_;
    QoI qoi_;
    std::vector<double> q0_, p0_;
    State xf_, xc_;
    std::vector<double> xi_a_, xi_b_, xi_c_;
};

/// Evolve a fine path (M steps of h = T/M) and a coarse path (M/2 steps of 2h)
/// from the same increment stream; the coarse increments are combined from
/// consecutive fine ones. Returns the QoI at time T for both paths.
CoupledSample coupled_pair(Scheme scheme, const LangevinModel& model, int level_steps,
                           IncrementSource& fine_src, const QoI& qoi);

/// QoI of one path with M steps of size T/M.
double single_path(Scheme scheme, const LangevinModel& model, int steps,
                   IncrementSource& src, const QoI& qoi);

/// Level discretization: steps * h = T to relative error 1e-14.
struct PathConfig {
    Scheme scheme;
    int steps;
    double h;
    const LangevinModel* model;

    PathConfig(Scheme s, const LangevinModel& model_, int steps_);
};

} // namespace mlmc

#endif
