#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dsmc/core.hpp"

namespace dsmc::lyapunov {

/// V = 1/2 (s(k+1)^2 + beta s(k)^2) + 1/2 rho (at(k+1)^2 + beta at(k)^2)
/// where `at` is the estimation error alpha_true - alpha_hat.
[[nodiscard]] double lyapunov_value(double s_next, double s, double atilde_next, double atilde,
                                    double beta, double rho) noexcept;

/// Difference function once the estimation error has vanished:
///   dV = -1/2 beta (-beta^3 - beta^2 + beta + 1) s^2
[[nodiscard]] double delta_v_closed_form(double beta, double s) noexcept;

/// True iff 0 < beta < 1, the range where the closed-form difference is negative.
[[nodiscard]] bool certify_beta(double beta) noexcept;

/// Threshold and persistence used to decide when an estimate has converged.
struct ConvergenceCriterion {
    double relative_tolerance = 0.05;
    std::size_t persistence_steps = 50;
};

struct StabilityReport {
    bool beta_certified = false;
    std::vector<double> delta_v_series;  ///< length = record count - 2
    double max_delta_v_after_transient = 0.0;
    std::size_t transient_steps = 0;
    std::optional<std::size_t> adaptation_convergence_step;
    double final_alpha_tilde = 0.0;
};

/// Sliding-variable and estimate history of one channel together with the
/// gains it ran under.
struct ChannelSeries {
    std::span<const double> sliding;
    std::span<const double> alpha_hat;
    double beta = 0.0;
    double rho = 1.0;
    double alpha_true = 1.0;
};

/// First k such that |alpha_true - alpha_hat(j)| < tol |alpha_true| for the
/// `persistence_steps` samples j = k .. k + persistence_steps - 1.
[[nodiscard]] std::optional<std::size_t> convergence_step(std::span<const double> alpha_hat,
                                                          double alpha_true,
                                                          const ConvergenceCriterion& criterion = {});

/// Empirical dV(k) = V(k+1) - V(k) over the logged series. When
/// `transient_steps` is empty the transient is taken to end at the
/// adaptation-convergence step (0 if the estimate never converges).
/// Throws LogTooShort for fewer than 3 samples.
[[nodiscard]] StabilityReport analyze_trajectory(const ChannelSeries& series,
                                                 std::optional<std::size_t> transient_steps = {},
                                                 const ConvergenceCriterion& criterion = {});

[[nodiscard]] StabilityReport analyze_trajectory(const ChannelTrace& trace,
                                                 std::optional<std::size_t> transient_steps = {},
                                                 const ConvergenceCriterion& criterion = {});

}  // namespace dsmc::lyapunov
