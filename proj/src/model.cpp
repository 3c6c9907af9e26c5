#include "mlmc/model.hpp"

#include <cmath>

#include "mlmc/math.hpp"

namespace mlmc {

double grad_potential_1d(const Potential& pot, double q) {
    return std::visit(
        [q](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Harmonic>) {
                return p.omega0 * p.omega0 * q;
            } else {
                const double a = p.omega0 * p.omega0 / (2.0 * p.qmin * p.qmin);
                return a * (q * q - p.qmin * p.qmin) * q;
            }
        },
        pot);
}

std::vector<double> grad_potential(const Potential& pot, std::span<const double> q) {
    std::vector<double> g(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) g[i] = grad_potential_1d(pot, q[i]);
    return g;
}

std::vector<double> grad_potential(const LangevinModel& model, std::span<const double> q) {
    if ((int)q.size() != model.dim)
        throw input_error("grad_potential: q length must match the model dimension");
    return grad_potential(model.potential, q);
}

double eval_qoi(const QoI& qoi, std::span<const double> q, std::span<const double> p) {
    if (q.size() != p.size()) throw input_error("eval_qoi: q/p length mismatch");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GaussianBump>) {
                static const double scale = std::sqrt(2.0 / std::acos(-1.0));
                double out = 1.0;
                for (double pi : p)
                    out *= scale * std::exp(-2.0 * (pi - 0.5) * (pi - 0.5));
                return out;
            } else if constexpr (std::is_same_v<T, ShiftedSquare>) {
                double out = 0.0;
                for (std::size_t i = 0; i < q.size(); ++i) {
                    const double dq = q[i] + f.qmin;
                    out += dq * dq + p[i] * p[i];
                }
                return out;
            } else {
                return f.fn(q, p);
            }
        },
        qoi);
}

void LangevinModel::validate() const {
    if (dim < 1) throw input_error("LangevinModel: dim must be positive");
    if (!(lambda > 0.0)) throw input_error("LangevinModel: lambda must be positive");
    if (!(sigma >= 0.0)) throw input_error("LangevinModel: sigma must be nonnegative");
    if (!(T > 0.0)) throw input_error("LangevinModel: T must be positive");
    if ((int)q0.size() != dim || (int)p0.size() != dim)
        throw input_error("LangevinModel: initial state length must match dim");
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Harmonic>) {
                if (!(p.omega0 >= 0.0))
                    throw input_error("Harmonic: omega0 must be nonnegative");
            } else {
                if (!(p.omega0 > 0.0) || !(p.qmin > 0.0))
                    throw input_error("DoubleWell: omega0 and qmin must be positive");
            }
        },
        potential);
}

LangevinModel make_model_1d(double lambda, double sigma, Potential pot,
                            double q0, double p0, double T) {
    LangevinModel m;
    m.dim = 1;
    m.lambda = lambda;
    m.sigma = sigma;
    m.potential = pot;
    m.q0 = {q0};
    m.p0 = {p0};
    m.T = T;
    m.validate();
    return m;
}

GaussianLaw harmonic_exact_law(const LangevinModel& model, double t) {
    model.validate();
    const Harmonic* harm = std::get_if<Harmonic>(&model.potential);
    if (!harm || model.dim != 1)
        throw unsupported_error("harmonic_exact_law: requires a harmonic potential and d = 1");
    if (!(model.sigma > 0.0))
        throw input_error("harmonic_exact_law: requires sigma > 0");
    if (t < 0.0) throw input_error("harmonic_exact_law: t must be nonnegative");

    const double w2 = harm->omega0 * harm->omega0;
    const Mat2 lam{0.0, -1.0, w2, model.lambda};

    GaussianLaw law;
    law.mean = expm(lam.scaled(-t)) * std::array<double, 2>{model.q0[0], model.p0[0]};
    if (t == 0.0) return law;

    // B(t) = int_0^t v(u) v(u)^T du with v(u) = exp(-Lambda u) (0, sigma)^T.
    const double sigma = model.sigma;
    auto integrand = [&](double u) -> std::array<double, 3> {
        const Mat2 e = expm(lam.scaled(-u));
        const double v0 = e.a01 * sigma;
        const double v1 = e.a11 * sigma;
        return {v0 * v0, v0 * v1, v1 * v1};
    };
    const std::array<double, 3> b = gk_adaptive<3>(integrand, 0.0, t, 1e-13);
    law.cov = {b[0], b[1], b[1], b[2]};
    return law;
}

double exact_qoi_expectation(const GaussianLaw& law, const QoI& qoi) {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GaussianBump>) {
                const double mu = law.mean[1];
                const double s2 = law.cov_pp();
                if (s2 < -1e-12)
                    throw input_error("exact_qoi_expectation: negative P variance");
                const double denom = 1.0 + 4.0 * std::max(s2, 0.0);
                static const double scale = std::sqrt(2.0 / std::acos(-1.0));
                return scale / std::sqrt(denom) *
                       std::exp(-2.0 * (mu - 0.5) * (mu - 0.5) / denom);
            } else if constexpr (std::is_same_v<T, ShiftedSquare>) {
                const double dq = law.mean[0] + f.qmin;
                return dq * dq + law.cov_qq() + law.mean[1] * law.mean[1] + law.cov_pp();
            } else {
                throw unsupported_error("exact_qoi_expectation: custom QoI has no closed form");
            }
        },
        qoi);
}

} // namespace mlmc
