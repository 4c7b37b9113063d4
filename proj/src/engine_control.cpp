#include "dsmc/engine_control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsmc/error.hpp"

namespace dsmc::engine {

namespace {

constexpr double kTorquePerAirMass = 30000.0;
constexpr double kMinAfi = 1e-9;

std::array<DsmcChannel, 4> make_channels(const BankGains& gains, double T, bool adaptation) {
    auto make = [&](Channel c) {
        const auto& g = gains[static_cast<std::size_t>(c)];
        return DsmcChannel(g.beta, g.rho, T, g.alpha_hat0, adaptation);
    };
    return {make(Channel::Texh), make(Channel::Fuel), make(Channel::Speed), make(Channel::Air)};
}

}  // namespace

std::size_t DesiredTrajectories::size() const noexcept {
    return std::min({t_exh_d.size(), omega_d.size(), afr_d.size()});
}

void DesiredTrajectories::require_lookahead(std::size_t steps) const {
    if (size() < steps + 3) {
        throw DsmcError(ErrorKind::InvalidArgument,
                        "desired trajectories need " + std::to_string(steps + 3) +
                            " samples (horizon plus two-step lookahead)");
    }
}

double desired_fuel(double mdot_air_out, double afr_d) {
    if (!(afr_d > 0.0)) {
        throw DsmcError(ErrorKind::InvalidDesiredAfr, "desired AFR must be positive");
    }
    return mdot_air_out / afr_d;
}

EngineControllerBank::EngineControllerBank(const BankGains& gains, double sampling_time,
                                           EngineParams params, bool adaptation_enabled,
                                           SpeedLookahead lookahead)
    : channels_(make_channels(gains, sampling_time, adaptation_enabled)),
      sampling_time_(sampling_time),
      params_(params),
      lookahead_(lookahead) {
    params_.validate();
}

double EngineControllerBank::control_texh(const EngineState& state, double t_exh_d_now,
                                          double t_exh_d_next) const {
    const auto& ch = channel(Channel::Texh);
    const double T = sampling_time_;
    const double a = afi(state.afr);
    if (std::abs(a) < kMinAfi) {
        throw DsmcError(ErrorKind::ZeroInputGain, "AFI vanished at AFR " + std::to_string(state.afr));
    }
    const double tau = tau_e(state.omega_e);
    const double s1 = state.t_exh - t_exh_d_now;
    return (tau / (7.5 * a * T)) * (-ch.alpha_hat() * (T / tau) * (600.0 * a - state.t_exh) -
                                     (ch.beta() + 1.0) * s1 + t_exh_d_next - t_exh_d_now);
}

double EngineControllerBank::adapt_texh(const EngineState& state, double s1) {
    return channel(Channel::Texh).update_adaptation(s1, channel_drift(Channel::Texh, state, params_));
}

double EngineControllerBank::control_fuel(const EngineState& state, double mdot_f_d_now,
                                          double mdot_f_d_next) const {
    const auto& ch = channel(Channel::Fuel);
    const double T = sampling_time_;
    const double tau_f = params_.tau_f;
    const double s2 = state.mdot_f - mdot_f_d_now;
    return (tau_f / T) * (ch.alpha_hat() * (T / tau_f) * state.mdot_f - (ch.beta() + 1.0) * s2 +
                          mdot_f_d_next - mdot_f_d_now);
}

double EngineControllerBank::adapt_fuel(const EngineState& state, double s2) {
    return channel(Channel::Fuel).update_adaptation(s2, channel_drift(Channel::Fuel, state, params_));
}

double EngineControllerBank::speed_law(double omega, double s3, double omega_d_now,
                                       double omega_d_next) const {
    const auto& ch = channel(Channel::Speed);
    const double T = sampling_time_;
    const double J = params_.j_inertia;
    return (J / (kTorquePerAirMass * T)) *
           (ch.alpha_hat() * (T / J) * (100.0 + 0.4 * omega) - (ch.beta() + 1.0) * s3 +
            omega_d_next - omega_d_now);
}

double EngineControllerBank::control_speed(const EngineState& state, double omega_d_now,
                                           double omega_d_next) const {
    return speed_law(state.omega_e, state.omega_e - omega_d_now, omega_d_now, omega_d_next);
}

double EngineControllerBank::control_speed_ahead(const EngineState& state, double omega_d_now,
                                                 double omega_d_next,
                                                 double omega_d_after) const {
    const auto& ch = channel(Channel::Speed);
    if (lookahead_ == SpeedLookahead::Sliding) {
        const double s3_next = -ch.beta() * (state.omega_e - omega_d_now);
        return speed_law(omega_d_next + s3_next, s3_next, omega_d_next, omega_d_after);
    }
    const double omega_next =
        state.omega_e + sampling_time_ * (ch.alpha_hat() * channel_drift(Channel::Speed, state, params_) +
                                          channel_gain(Channel::Speed, state, params_) * state.m_a);
    return speed_law(omega_next, omega_next - omega_d_next, omega_d_next, omega_d_after);
}

double EngineControllerBank::adapt_speed(const EngineState& state, double s3) {
    return channel(Channel::Speed)
        .update_adaptation(s3, channel_drift(Channel::Speed, state, params_));
}

double EngineControllerBank::control_air(const EngineState& state, double m_a_d_now,
                                         double m_a_d_next) const {
    const auto& ch = channel(Channel::Air);
    const double T = sampling_time_;
    const double s4 = state.m_a - m_a_d_now;
    const double air_out = mdot_ao(state.m_a, state.omega_e, params_);
    return (1.0 / T) *
           (ch.alpha_hat() * air_out * T - (ch.beta() + 1.0) * s4 + m_a_d_next - m_a_d_now);
}

double EngineControllerBank::adapt_air(const EngineState& state, double s4) {
    return channel(Channel::Air).update_adaptation(s4, channel_drift(Channel::Air, state, params_));
}

CascadeStep EngineControllerBank::cascade_step(const EngineState& state,
                                               const DesiredTrajectories& traj, std::size_t k,
                                               bool adapt) {
    if (traj.size() < k + 3) {
        throw DsmcError(ErrorKind::InvalidArgument, "desired trajectories too short for lookahead");
    }
    const double T = sampling_time_;
    CascadeStep out;
    for (Channel c : kChannels) {
        out.alpha_hat[static_cast<std::size_t>(c)] = channel(c).alpha_hat();
        out.drift[static_cast<std::size_t>(c)] = channel_drift(c, state, params_);
    }

    out.afr_d = traj.afr_d[k];
    out.mdot_f_d = desired_fuel(mdot_ao(state.m_a, state.omega_e, params_), out.afr_d);

    out.t_exh_d = traj.t_exh_d[k];
    out.inputs.delta_spark = control_texh(state, traj.t_exh_d[k], traj.t_exh_d[k + 1]);

    out.omega_d = traj.omega_d[k];
    out.m_a_d = control_speed(state, traj.omega_d[k], traj.omega_d[k + 1]);
    out.m_a_d_next =
        control_speed_ahead(state, traj.omega_d[k], traj.omega_d[k + 1], traj.omega_d[k + 2]);
    out.inputs.mdot_ai = control_air(state, out.m_a_d, out.m_a_d_next);

    // Desired fuel one step ahead needs the cylinder air flow at k+1, which
    // the model predicts from the air and speed channels with current estimates.
    const auto& speed = channel(Channel::Speed);
    const auto& air = channel(Channel::Air);
    const double m_a_next =
        state.m_a + T * (air.alpha_hat() * out.drift[3] + out.inputs.mdot_ai);
    const double omega_next =
        state.omega_e + T * (speed.alpha_hat() * out.drift[2] +
                             channel_gain(Channel::Speed, state, params_) * state.m_a);
    out.mdot_f_d_next =
        desired_fuel(mdot_ao(m_a_next, omega_next, params_), traj.afr_d[k + 1]);
    out.inputs.mdot_fc = control_fuel(state, out.mdot_f_d, out.mdot_f_d_next);

    out.sliding = {state.t_exh - out.t_exh_d, state.mdot_f - out.mdot_f_d,
                   state.omega_e - out.omega_d, state.m_a - out.m_a_d};

    if (adapt) {
        adapt_texh(state, out.sliding[0]);
        adapt_fuel(state, out.sliding[1]);
        adapt_speed(state, out.sliding[2]);
        adapt_air(state, out.sliding[3]);
    }
    return out;
}

}  // namespace dsmc::engine
