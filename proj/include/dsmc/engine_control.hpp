#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dsmc/core.hpp"
#include "dsmc/engine_plant.hpp"

namespace dsmc::engine {

/// How the cascade predicts the speed sliding variable one step ahead when it
/// evaluates m_a,d(k+1).
enum class SpeedLookahead {
    Model,    ///< ω(k+1) from the nominal model with the measured air mass
    Sliding,  ///< s3(k+1) taken as -beta3 s3(k)
};

/// Gains of one engine channel.
struct ChannelGains {
    double beta = 0.5;
    double rho = 1.0;
    double alpha_hat0 = 1.0;
};

/// Gains indexed by Channel (Texh, Fuel, Speed, Air).
using BankGains = std::array<ChannelGains, 4>;

/// Reference trajectories sampled at the controller rate. Index k is time k*T.
struct DesiredTrajectories {
    std::vector<double> t_exh_d;  ///< [degC]
    std::vector<double> omega_d;  ///< [rad/s]
    std::vector<double> afr_d;    ///< [-]

    /// Number of samples usable for control at step k: the cascade reads k+2.
    [[nodiscard]] std::size_t size() const noexcept;
    /// Throws InvalidArgument unless every sequence holds at least `steps + 3` samples.
    void require_lookahead(std::size_t steps) const;
};

/// ṁf,d = ṁao / AFR_d. Throws InvalidDesiredAfr for afr_d <= 0.
[[nodiscard]] double desired_fuel(double mdot_air_out, double afr_d);

/// Everything the cascade evaluated at one step, before the plant advances.
struct CascadeStep {
    EngineInputs inputs;
    std::array<double, 4> sliding{};    ///< s1..s4
    std::array<double, 4> drift{};      ///< nominal f per channel at step k
    std::array<double, 4> alpha_hat{};  ///< estimates used for the inputs
    double t_exh_d = 0.0;
    double mdot_f_d = 0.0;
    double mdot_f_d_next = 0.0;
    double omega_d = 0.0;
    double m_a_d = 0.0;
    double m_a_d_next = 0.0;
    double afr_d = 0.0;
};

/// The four adaptive discrete sliding-mode controllers of the engine.
///
/// Speed has no direct actuator: its law yields a desired air mass m_a,d,
/// which the air-flow channel tracks with the intake inflow. Desired fuel
/// follows from the desired AFR and the current cylinder air flow.
class EngineControllerBank {
public:
    EngineControllerBank(const BankGains& gains, double sampling_time, EngineParams params = {},
                         bool adaptation_enabled = true,
                         SpeedLookahead lookahead = SpeedLookahead::Model);

    [[nodiscard]] const DsmcChannel& channel(Channel c) const {
        return channels_[static_cast<std::size_t>(c)];
    }
    [[nodiscard]] DsmcChannel& channel(Channel c) { return channels_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] double sampling_time() const noexcept { return sampling_time_; }
    [[nodiscard]] const EngineParams& params() const noexcept { return params_; }

    /// Spark input Δ. Throws ZeroInputGain when |AFI| < 1e-9.
    [[nodiscard]] double control_texh(const EngineState& state, double t_exh_d_now,
                                      double t_exh_d_next) const;
    double adapt_texh(const EngineState& state, double s1);

    /// Commanded fuel flow ṁfc.
    [[nodiscard]] double control_fuel(const EngineState& state, double mdot_f_d_now,
                                      double mdot_f_d_next) const;
    double adapt_fuel(const EngineState& state, double s2);

    /// Desired air mass m_a,d (synthetic input of the speed channel).
    [[nodiscard]] double control_speed(const EngineState& state, double omega_d_now,
                                       double omega_d_next) const;
    /// m_a,d one step ahead from ω_d(k+1), ω_d(k+2) and the predicted s3(k+1).
    [[nodiscard]] double control_speed_ahead(const EngineState& state, double omega_d_now,
                                             double omega_d_next, double omega_d_after) const;
    double adapt_speed(const EngineState& state, double s3);

    /// Intake air inflow ṁai.
    [[nodiscard]] double control_air(const EngineState& state, double m_a_d_now,
                                     double m_a_d_next) const;
    double adapt_air(const EngineState& state, double s4);

    /// Evaluates every channel at step k and, when `adapt` is set, applies the
    /// four adaptation updates with the step-k sliding variables.
    CascadeStep cascade_step(const EngineState& state, const DesiredTrajectories& trajectories,
                             std::size_t k, bool adapt = true);

private:
    [[nodiscard]] double speed_law(double omega, double s3, double omega_d_now,
                                   double omega_d_next) const;

    std::array<DsmcChannel, 4> channels_;
    double sampling_time_;
    EngineParams params_;
    SpeedLookahead lookahead_;
};

}  // namespace dsmc::engine
