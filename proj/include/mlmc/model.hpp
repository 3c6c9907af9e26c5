#ifndef MLMC_MODEL_HPP
#define MLMC_MODEL_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "mlmc/errors.hpp"

namespace mlmc {

/// V(Q) = 1/2 w0^2 Q^2 componentwise.
struct Harmonic {
    double omega0 = 1.0;
};

/// V(Q) = w0^2/(8 qmin^2) (Q^2 - qmin^2)^2 componentwise.
struct DoubleWell {
    double omega0 = 1.0;
    double qmin = 1.0;
};

using Potential = std::variant<Harmonic, DoubleWell>;

/// Gradient of one component; both supported potentials act componentwise.
double grad_potential_1d(const Potential& pot, double q);

/// Componentwise gradient of V.
std::vector<double> grad_potential(const Potential& pot, std::span<const double> q);

struct LangevinModel;
/// As above, but checks q against the model dimension.
std::vector<double> grad_potential(const LangevinModel& model, std::span<const double> q);

/// phi(Q,P) = sqrt(2/pi) exp(-2 (P - 1/2)^2); product over components for d > 1.
struct GaussianBump {};

/// phi(Q,P) = (Q + qmin)^2 + P^2, summed over components.
struct ShiftedSquare {
    double qmin = 1.0;
};

struct CustomQoI {
    std::function<double(std::span<const double> q, std::span<const double> p)> fn;
};

using QoI = std::variant<GaussianBump, ShiftedSquare, CustomQoI>;

double eval_qoi(const QoI& qoi, std::span<const double> q, std::span<const double> p);

/// The Langevin system dP = -lambda P dt - grad V(Q) dt + sigma dW, dQ = P dt,
/// together with end time and initial data. Immutable after construction.
struct LangevinModel {
    int dim = 1;
    double lambda = 1.0;
    double sigma = 1.0; ///< >= 0; zero noise is allowed for deterministic checks
    Potential potential = Harmonic{};
    std::vector<double> q0;
    std::vector<double> p0;
    double T = 1.0;

    void validate() const;
};

/// Convenience constructor for the one-dimensional case.
LangevinModel make_model_1d(double lambda, double sigma, Potential pot,
                            double q0, double p0, double T);

/// Joint Gaussian law of (Q, P) for d = 1.
struct GaussianLaw {
    std::array<double, 2> mean{};   ///< (mean Q, mean P)
    std::array<double, 4> cov{};    ///< row-major 2x2
    double cov_qq() const { return cov[0]; }
    double cov_qp() const { return cov[1]; }
    double cov_pp() const { return cov[3]; }
};

/// Exact law of the harmonic-oscillator Langevin solution at time t:
/// mean exp(-Lambda t) X0 with Lambda = [[0,-1],[w0^2,lambda]], covariance
/// B(t) = int_0^t exp(-Lambda u) Sigma Sigma^T exp(-Lambda^T u) du evaluated
/// by adaptive quadrature to absolute error < 1e-12.
GaussianLaw harmonic_exact_law(const LangevinModel& model, double t);

/// Closed-form expectation of the QoI against a Gaussian phase-space law.
double exact_qoi_expectation(const GaussianLaw& law, const QoI& qoi);

} // namespace mlmc

#endif
