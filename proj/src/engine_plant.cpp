#include "dsmc/engine_plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dsmc/error.hpp"

namespace dsmc::engine {

namespace {

constexpr double kTorquePerAirMass = 30000.0;
constexpr double kExhaustBase = 600.0;
constexpr double kSparkGain = 7.5;

double checked_afr(double mdot_air_out, double mdot_f) {
    if (!(mdot_f > 0.0)) {
        throw DsmcError(ErrorKind::NonFiniteState, "AFR undefined for non-positive fuel flow");
    }
    return mdot_air_out / mdot_f;
}

}  // namespace

void EngineParams::validate() const {
    if (!(j_inertia > 0.0) || !(tau_f > 0.0) || !(k1 > 0.0)) {
        throw DsmcError(ErrorKind::InvalidArgument, "engine constants must be strictly positive");
    }
}

EngineState make_engine_state(double t_exh, double mdot_f, double omega_e, double m_a,
                              const EngineParams& params) {
    if (!(omega_e > 0.0)) {
        throw DsmcError(ErrorKind::NonPositiveSpeed, "engine speed must be positive");
    }
    EngineState s;
    s.t_exh = t_exh;
    s.mdot_f = mdot_f;
    s.omega_e = omega_e;
    s.m_a = m_a;
    s.afr = checked_afr(mdot_ao(m_a, omega_e, params), mdot_f);
    return s;
}

double afi(double afr) noexcept { return std::cos(0.13 * (afr - 13.5)); }

double tau_e(double omega_e) {
    if (!(omega_e > 0.0)) {
        throw DsmcError(ErrorKind::SingularTimeConstant, "tau_e undefined for omega_e <= 0");
    }
    return 2.0 * std::numbers::pi / omega_e;
}

double engine_torque(double m_a, double omega_e) noexcept {
    return kTorquePerAirMass * m_a - 0.4 * omega_e - 100.0;
}

double torque_loss(double omega_e) noexcept { return 0.4 * omega_e + 100.0; }

double eta_vol(double m_a, double omega_e) noexcept {
    const double w = omega_e;
    const double w2 = w * w;
    return m_a * m_a * (-0.1636 * w2 - 7.093 * w - 1750.0) +
           m_a * (0.0029 * w2 - 0.4033 * w + 85.38) - (1.06e-5 * w2 - 0.0021 * w - 0.2719);
}

double mdot_ao(double m_a, double omega_e, const EngineParams& params) {
    double eta = eta_vol(m_a, omega_e);
    if (params.clamp_eta_vol) {
        eta = std::clamp(eta, 0.05, 1.2);
    }
    return params.k1 * m_a * omega_e * eta;
}

EngineState step_engine(const EngineState& state, const EngineInputs& inputs,
                        const EngineUncertainty& unc, const EngineParams& params,
                        double sampling_time) {
    if (!(sampling_time > 0.0)) {
        throw DsmcError(ErrorKind::InvalidArgument, "sampling time must be positive");
    }
    const double T = sampling_time;
    const double tau = tau_e(state.omega_e);
    const double a = afi(state.afr);
    const double air_out = mdot_ao(state.m_a, state.omega_e, params);

    EngineState next;
    next.t_exh = state.t_exh + T * unc.alpha_texh * (1.0 / tau) * (kExhaustBase * a - state.t_exh) +
                 T * (kSparkGain * a / tau) * inputs.delta_spark;
    next.mdot_f = state.mdot_f + T * unc.alpha_mf * (-state.mdot_f / params.tau_f) +
                  (T / params.tau_f) * inputs.mdot_fc;
    next.omega_e = state.omega_e + (T / params.j_inertia) * kTorquePerAirMass * state.m_a -
                   T * unc.alpha_we * torque_loss(state.omega_e) / params.j_inertia;
    next.m_a = state.m_a + T * inputs.mdot_ai - T * unc.alpha_ma * air_out;

    if (!std::isfinite(next.t_exh) || !std::isfinite(next.mdot_f) ||
        !std::isfinite(next.omega_e) || !std::isfinite(next.m_a)) {
        throw DsmcError(ErrorKind::NonFiniteState, "engine step produced a non-finite state");
    }
    if (!(next.omega_e > 0.0)) {
        throw DsmcError(ErrorKind::NonPositiveSpeed,
                        "engine speed fell to " + std::to_string(next.omega_e) + " rad/s");
    }
    next.afr = checked_afr(mdot_ao(next.m_a, next.omega_e, params), next.mdot_f);
    return next;
}

std::string_view channel_name(Channel channel) noexcept {
    switch (channel) {
        case Channel::Texh: return "texh";
        case Channel::Fuel: return "mdot_f";
        case Channel::Speed: return "omega_e";
        case Channel::Air: return "m_a";
    }
    return "?";
}

double channel_state(Channel channel, const EngineState& state) noexcept {
    switch (channel) {
        case Channel::Texh: return state.t_exh;
        case Channel::Fuel: return state.mdot_f;
        case Channel::Speed: return state.omega_e;
        case Channel::Air: return state.m_a;
    }
    return 0.0;
}

double channel_drift(Channel channel, const EngineState& state, const EngineParams& params) {
    switch (channel) {
        case Channel::Texh:
            return (1.0 / tau_e(state.omega_e)) * (kExhaustBase * afi(state.afr) - state.t_exh);
        case Channel::Fuel: return -state.mdot_f / params.tau_f;
        case Channel::Speed: return -torque_loss(state.omega_e) / params.j_inertia;
        case Channel::Air: return -mdot_ao(state.m_a, state.omega_e, params);
    }
    return 0.0;
}

double channel_gain(Channel channel, const EngineState& state, const EngineParams& params) {
    switch (channel) {
        case Channel::Texh: return kSparkGain * afi(state.afr) / tau_e(state.omega_e);
        case Channel::Fuel: return 1.0 / params.tau_f;
        case Channel::Speed: return kTorquePerAirMass / params.j_inertia;
        case Channel::Air: return 1.0;
    }
    return 0.0;
}

double channel_input(Channel channel, const EngineState& state,
                     const EngineInputs& inputs) noexcept {
    switch (channel) {
        case Channel::Texh: return inputs.delta_spark;
        case Channel::Fuel: return inputs.mdot_fc;
        case Channel::Speed: return state.m_a;
        case Channel::Air: return inputs.mdot_ai;
    }
    return 0.0;
}

double channel_alpha(Channel channel, const EngineUncertainty& unc) noexcept {
    switch (channel) {
        case Channel::Texh: return unc.alpha_texh;
        case Channel::Fuel: return unc.alpha_mf;
        case Channel::Speed: return unc.alpha_we;
        case Channel::Air: return unc.alpha_ma;
    }
    return 1.0;
}

}  // namespace dsmc::engine
