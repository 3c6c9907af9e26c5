#include "mlmc/integrators.hpp"

#include <cmath>

namespace mlmc {

const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::EulerMaruyama: return "euler_maruyama";
    case Scheme::SymplecticEulerOU: return "symplectic_euler_ou";
    case Scheme::StormerVerletOU: return "stormer_verlet_ou";
    }
    return "?";
}

Stepper::Stepper(Scheme scheme, const LangevinModel& model, double h)
    : scheme_(scheme), dim_(model.dim), h_(h), lambda_(model.lambda) {
    if (!(h > 0.0)) throw input_error("Stepper: h must be positive");
    model.validate();

    r_h_ = std::exp(-lambda_ * h);
    sa_h_ = model.sigma * ou_alpha(lambda_, h);
    r_half_ = std::exp(-0.5 * lambda_ * h);
    sa_half_ = model.sigma * ou_alpha(lambda_, 0.5 * h);
    s_sqrth_ = model.sigma * std::sqrt(h);

    if (const Harmonic* harm = std::get_if<Harmonic>(&model.potential)) {
        harmonic_ = true;
        w2_ = harm->omega0 * harm->omega0;
    } else {
        const DoubleWell& dw = std::get<DoubleWell>(model.potential);
        harmonic_ = false;
        dw_a_ = dw.omega0 * dw.omega0 / (2.0 * dw.qmin * dw.qmin);
        dw_qmin2_ = dw.qmin * dw.qmin;
    }
}

void Stepper::operator()(State& x, std::span<const double> xi) const {
    if ((int)xi.size() != draws())
        throw input_error("Stepper: wrong number of increments");
    switch (scheme_) {
    case Scheme::EulerMaruyama:
        for (int i = 0; i < dim_; ++i) {
            const double qn = x.q[i];
            const double pn = x.p[i];
            x.q[i] = qn + pn * h_;
            x.p[i] = pn - (lambda_ * pn + grad(qn)) * h_ + s_sqrth_ * xi[i];
        }
        break;
    case Scheme::SymplecticEulerOU:
        for (int i = 0; i < dim_; ++i) {
            const double pstar = r_h_ * x.p[i] + sa_h_ * xi[i];
            const double pnew = pstar - h_ * grad(x.q[i]);
            x.p[i] = pnew;
            x.q[i] += pnew * h_;
        }
        break;
    case Scheme::StormerVerletOU:
        for (int i = 0; i < dim_; ++i) {
            double ph = r_half_ * x.p[i] + sa_half_ * xi[i];
            ph -= 0.5 * h_ * grad(x.q[i]);
            x.q[i] += h_ * ph;
            ph -= 0.5 * h_ * grad(x.q[i]);
            x.p[i] = r_half_ * ph + sa_half_ * xi[dim_ + i];
        }
        break;
    }
}

State step(Scheme scheme, const LangevinModel& model, const State& state, double h,
           std::span<const double> xi_a, std::span<const double> xi_b) {
    Stepper st(scheme, model, h);
    State out = state;
    if ((int)state.q.size() != model.dim || (int)state.p.size() != model.dim)
        throw input_error("step: state length must match dim");
    if (scheme == Scheme::StormerVerletOU) {
        if ((int)xi_a.size() != model.dim || (int)xi_b.size() != model.dim)
            throw input_error("step: Stormer-Verlet needs two increment vectors");
        std::vector<double> xi(2 * model.dim);
        std::copy(xi_a.begin(), xi_a.end(), xi.begin());
        std::copy(xi_b.begin(), xi_b.end(), xi.begin() + model.dim);
        st(out, xi);
    } else {
        if ((int)xi_a.size() != model.dim)
            throw input_error("step: increment length must match dim");
        st(out, xi_a);
    }
    return out;
}

std::vector<double> ou_exact_step(std::span<const double> p, double h, double lambda,
                                  double sigma, std::span<const double> xi) {
    if (p.size() != xi.size()) throw input_error("ou_exact_step: length mismatch");
    const double r = std::exp(-lambda * h);
    const double sa = sigma * ou_alpha(lambda, h);
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = r * p[i] + sa * xi[i];
    return out;
}

std::pair<double, double> coupling_weights(Scheme scheme, double lambda, double fine_h) {
    if (scheme == Scheme::EulerMaruyama) {
        const double w = 1.0 / std::sqrt(2.0);
        return {w, w};
    }
    // OU family: full-step draws for symplectic Euler, half-step draws for
    // Stormer-Verlet.
    const double step = scheme == Scheme::StormerVerletOU ? 0.5 * fine_h : fine_h;
    const OuCoupling cpl(lambda, step);
    return {cpl.w_first(), cpl.w_second()};
}

SinglePathSampler::SinglePathSampler(Scheme scheme, const LangevinModel& model,
                                     int steps, QoI qoi)
    : stepper_(scheme, model, model.T / std::max(steps, 1)), steps_(steps),
      qoi_(std::move(qoi)), q0_(model.q0), p0_(model.p0), x_{model.q0, model.p0},
      xi_(stepper_.draws()) {
    if (steps < 1) throw input_error("single_path: need at least one step");
}

double SinglePathSampler::operator()(IncrementSource& src) {
    x_.q = q0_;
    x_.p = p0_;
    for (int k = 0; k < steps_; ++k) {
        src.fill(xi_);
        stepper_(x_, xi_);
    }
    return eval_qoi(qoi_, x_.q, x_.p);
}

CoupledPairSampler::CoupledPairSampler(Scheme scheme, const LangevinModel& model,
                                       int level_steps, QoI qoi)
    : fine_(scheme, model, model.T / std::max(level_steps, 2)),
      coarse_(scheme, model, 2.0 * model.T / std::max(level_steps, 2)),
      steps_(level_steps), qoi_(std::move(qoi)), q0_(model.q0), p0_(model.p0),
      xf_{model.q0, model.p0}, xc_{model.q0, model.p0}, xi_a_(fine_.draws()),
      xi_b_(fine_.draws()), xi_c_(fine_.draws()) {
    if (level_steps <= 0 || level_steps % 2 != 0)
        throw input_error("coupled_pair: step count must be positive and even");
    std::tie(w1_, w2_) = coupling_weights(scheme, model.lambda, model.T / level_steps);
}

CoupledSample CoupledPairSampler::operator()(IncrementSource& fine_src) {
    xf_.q = q0_;
    xf_.p = p0_;
    xc_.q = q0_;
    xc_.p = p0_;
    const int n = (int)xi_a_.size();
    for (int k = 0; k < steps_ / 2; ++k) {
        fine_src.fill(xi_a_);
        fine_(xf_, xi_a_);
        fine_src.fill(xi_b_);
        fine_(xf_, xi_b_);
        for (int j = 0; j < n; ++j) xi_c_[j] = w1_ * xi_a_[j] + w2_ * xi_b_[j];
        coarse_(xc_, xi_c_);
    }
    CoupledSample out;
    out.fine_value = eval_qoi(qoi_, xf_.q, xf_.p);
    out.coarse_value = eval_qoi(qoi_, xc_.q, xc_.p);
    out.y = out.fine_value - out.coarse_value;
    return out;
}

CoupledSample coupled_pair(Scheme scheme, const LangevinModel& model, int level_steps,
                           IncrementSource& fine_src, const QoI& qoi) {
    CoupledPairSampler sampler(scheme, model, level_steps, qoi);
    return sampler(fine_src);
}

double single_path(Scheme scheme, const LangevinModel& model, int steps,
                   IncrementSource& src, const QoI& qoi) {
    SinglePathSampler sampler(scheme, model, steps, qoi);
    return sampler(src);
}

PathConfig::PathConfig(Scheme s, const LangevinModel& model_, int steps_)
    : scheme(s), steps(steps_), h(model_.T / steps_), model(&model_) {
    if (steps_ < 1) throw input_error("PathConfig: steps must be positive");
    if (std::abs(steps * h - model_.T) > 1e-14 * model_.T)
        throw input_error("PathConfig: steps * h must reproduce T");
}

} // namespace mlmc
