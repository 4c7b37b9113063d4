#pragma once

#include <array>
#include <string_view>

namespace dsmc::engine {

/// Model constants of the mean-value spark-ignition engine.
struct EngineParams {
    double j_inertia = 0.1454;  ///< crankshaft inertia [m^2 kg]
    double tau_f = 0.06;        ///< fuel evaporation time constant [s]
    double k1 = 0.0254;         ///< cylinder air-flow coefficient
    /// Clamp volumetric efficiency to [0.05, 1.2]. Off for faithful runs.
    bool clamp_eta_vol = false;

    void validate() const;
};

/// Multiplicative errors on each state's drift term. 1.0 is nominal.
struct EngineUncertainty {
    double alpha_texh = 1.0;
    double alpha_mf = 1.0;
    double alpha_we = 1.0;
    double alpha_ma = 1.0;
};

struct EngineInputs {
    double delta_spark = 0.0;  ///< exhaust-temperature control input
    double mdot_fc = 0.0;      ///< commanded fuel flow [kg/s]
    double mdot_ai = 0.0;      ///< intake air inflow [kg/s]
};

struct EngineState {
    double t_exh = 25.0;     ///< exhaust gas temperature [degC]
    double mdot_f = 0.0005;  ///< fuel flow into the cylinders [kg/s]
    double omega_e = 90.0;   ///< engine speed [rad/s]
    double m_a = 0.0;        ///< intake-manifold air mass [kg]
    double afr = 0.0;        ///< mdot_ao / mdot_f, kept in sync by make_engine_state/step_engine
};

/// Builds a state and derives its AFR. Throws NonPositiveSpeed for
/// omega_e <= 0 and NonFiniteState when the AFR is undefined (mdot_f <= 0).
[[nodiscard]] EngineState make_engine_state(double t_exh, double mdot_f, double omega_e,
                                            double m_a, const EngineParams& params = {});

// Appendix functions of the engine model.
[[nodiscard]] double afi(double afr) noexcept;
[[nodiscard]] double tau_e(double omega_e);
[[nodiscard]] double engine_torque(double m_a, double omega_e) noexcept;
[[nodiscard]] double torque_loss(double omega_e) noexcept;
[[nodiscard]] double eta_vol(double m_a, double omega_e) noexcept;
[[nodiscard]] double mdot_ao(double m_a, double omega_e, const EngineParams& params = {});

[[nodiscard]] inline double rad_per_s_to_rpm(double omega) noexcept {
    return omega * 60.0 / (2.0 * 3.14159265358979323846);
}

/// Advances all four states by one Euler step with the uncertainties applied
/// to the drift terms only.
[[nodiscard]] EngineState step_engine(const EngineState& state, const EngineInputs& inputs,
                                      const EngineUncertainty& uncertainty,
                                      const EngineParams& params, double sampling_time);

/// The four SISO channels. Speed is driven by the synthetic input m_a.
enum class Channel { Texh = 0, Fuel = 1, Speed = 2, Air = 3 };

inline constexpr std::array<Channel, 4> kChannels{Channel::Texh, Channel::Fuel, Channel::Speed,
                                                  Channel::Air};

[[nodiscard]] std::string_view channel_name(Channel channel) noexcept;

/// Affine decomposition used by the controllers: each channel evolves as
///   x(k+1) = x + T alpha drift(x) + T gain(x) u
[[nodiscard]] double channel_state(Channel channel, const EngineState& state) noexcept;
[[nodiscard]] double channel_drift(Channel channel, const EngineState& state,
                                   const EngineParams& params);
[[nodiscard]] double channel_gain(Channel channel, const EngineState& state,
                                  const EngineParams& params);
[[nodiscard]] double channel_input(Channel channel, const EngineState& state,
                                   const EngineInputs& inputs) noexcept;
[[nodiscard]] double channel_alpha(Channel channel, const EngineUncertainty& uncertainty) noexcept;

}  // namespace dsmc::engine
