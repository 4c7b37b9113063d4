#include "dsmc/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsmc/error.hpp"

namespace dsmc {

double sliding_variable(double x, double x_desired) noexcept { return x - x_desired; }

double xi_variable(double s_next, double s, double beta) noexcept { return s_next + beta * s; }

double euler_step(const ScalarAffinePlant& plant, double x, double u, double sampling_time) {
    if (!(sampling_time > 0.0)) {
        throw DsmcError(ErrorKind::InvalidArgument, "sampling time must be positive");
    }
    const double g = plant.g(x);
    if (g == 0.0) {
        throw DsmcError(ErrorKind::ZeroInputGain, "input gain g(x) vanished");
    }
    const double next = x + sampling_time * plant.alpha_true * plant.f(x) + sampling_time * g * u;
    if (!std::isfinite(next)) {
        throw DsmcError(ErrorKind::NonFiniteState, "euler step produced a non-finite state");
    }
    return next;
}

DsmcChannel::DsmcChannel(double beta, double rho, double sampling_time, double alpha_hat,
                         bool adaptation_enabled)
    : beta_(beta),
      rho_(rho),
      sampling_time_(sampling_time),
      alpha_hat_(alpha_hat),
      adaptation_enabled_(adaptation_enabled) {
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw DsmcError(ErrorKind::InvalidArgument,
                        "beta must lie in [0, 1); got " + std::to_string(beta));
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw DsmcError(ErrorKind::InvalidArgument, "adaptation gain rho must be positive");
    }
    if (!(sampling_time > 0.0) || !std::isfinite(sampling_time)) {
        throw DsmcError(ErrorKind::InvalidArgument, "sampling time must be positive");
    }
    if (!std::isfinite(alpha_hat)) {
        throw DsmcError(ErrorKind::NonFiniteEstimate, "initial alpha_hat is not finite");
    }
}

void DsmcChannel::set_alpha_hat(double alpha_hat) {
    if (!std::isfinite(alpha_hat)) {
        throw DsmcError(ErrorKind::NonFiniteEstimate, "alpha_hat is not finite");
    }
    alpha_hat_ = alpha_hat;
}

void DsmcChannel::set_input_limits(double lower, double upper) {
    if (!(lower <= upper)) {
        throw DsmcError(ErrorKind::InvalidArgument, "input limits must satisfy lower <= upper");
    }
    limits_ = Limits{lower, upper};
}

double DsmcChannel::compute_control(double x, double s, double x_desired_next, double f_value,
                                    double g_value) const {
    if (g_value == 0.0) {
        throw DsmcError(ErrorKind::ZeroInputGain, "input gain vanished in control law");
    }
    const double T = sampling_time_;
    double u = (1.0 / (g_value * T)) * (-T * alpha_hat_ * f_value - x + x_desired_next - beta_ * s);
    if (limits_) {
        u = std::clamp(u, limits_->lower, limits_->upper);
    }
    return u;
}

double DsmcChannel::update_adaptation(double s, double f_value) {
    if (!adaptation_enabled_) {
        return alpha_hat_;
    }
    const double next = alpha_hat_ + s * sampling_time_ * f_value / rho_;
    if (!std::isfinite(next)) {
        throw DsmcError(ErrorKind::NonFiniteEstimate, "adaptation update overflowed");
    }
    alpha_hat_ = next;
    return alpha_hat_;
}

ChannelStepResult channel_step(const ScalarAffinePlant& plant, DsmcChannel& channel, double x,
                               double x_desired, double x_desired_next) {
    const double s = sliding_variable(x, x_desired);
    const double f_value = plant.f(x);
    const double g_value = plant.g(x);
    const double u = channel.compute_control(x, s, x_desired_next, f_value, g_value);
    const double alpha_hat_after = channel.update_adaptation(s, f_value);
    const double x_next = euler_step(plant, x, u, channel.sampling_time());

    ChannelStepResult result;
    result.u = u;
    result.x_next = x_next;
    result.record.s = s;
    result.record.xi = xi_variable(sliding_variable(x_next, x_desired_next), s, channel.beta());
    result.record.u = u;
    result.record.f_value = f_value;
    result.record.alpha_hat_after = alpha_hat_after;
    return result;
}

DivergenceGuard::DivergenceGuard(double initial_s, double magnitude_scale, double factor) {
    const double floor = 1e-3 * std::abs(magnitude_scale);
    double reference = std::max(std::abs(initial_s), floor);
    if (reference == 0.0) {
        reference = 1e-12;
    }
    limit_ = factor * reference;
}

void DivergenceGuard::check(double s, std::size_t step, const char* channel_name) const {
    if (!std::isfinite(s) || std::abs(s) > limit_) {
        throw DsmcError(ErrorKind::DivergedRun,
                        std::string("sliding variable of channel '") + channel_name +
                            "' left the divergence bound",
                        step);
    }
}

std::vector<double> ChannelTrace::sliding() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.s);
    return out;
}

std::vector<double> ChannelTrace::alpha_hat() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.alpha_hat);
    return out;
}

ChannelTrace run_channel(const ScalarAffinePlant& plant, DsmcChannel channel, double x0,
                         const std::function<double(std::size_t)>& desired, std::size_t steps) {
    ChannelTrace trace;
    trace.beta = channel.beta();
    trace.rho = channel.rho();
    trace.alpha_true = plant.alpha_true;
    trace.sampling_time = channel.sampling_time();
    trace.records.reserve(steps + 1);

    const DivergenceGuard guard(sliding_variable(x0, desired(0)),
                                std::max(std::abs(x0), std::abs(desired(0))));
    double x = x0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double x_d = desired(k);
        const double x_d_next = desired(k + 1);
        ChannelRecord rec;
        rec.x = x;
        rec.x_desired = x_d;
        rec.s = sliding_variable(x, x_d);
        rec.alpha_hat = channel.alpha_hat();
        guard.check(rec.s, k, "scalar");
        try {
            if (k == steps) {
                rec.f_value = plant.f(x);
                rec.u = channel.compute_control(x, rec.s, x_d_next, rec.f_value, plant.g(x));
            } else {
                const auto step = channel_step(plant, channel, x, x_d, x_d_next);
                rec.u = step.u;
                rec.f_value = step.record.f_value;
                x = step.x_next;
            }
        } catch (const DsmcError& e) {
            if (e.step()) throw;
            throw e.at_step(k);
        }
        trace.records.push_back(rec);
    }
    return trace;
}

}  // namespace dsmc
