#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace dsmc {

/// One uncertain SISO channel in affine form:
///   x' = alpha_true * f(x) + g(x) * u
/// `f` is the nominal drift and `g` the input gain. `alpha_true` is the
/// unknown multiplicative error on the drift that the controller estimates.
struct ScalarAffinePlant {
    std::function<double(double)> f;
    std::function<double(double)> g;
    double alpha_true = 1.0;
};

[[nodiscard]] double sliding_variable(double x, double x_desired) noexcept;

/// s(k+1) + beta * s(k). Zero on the second-order sliding manifold.
[[nodiscard]] double xi_variable(double s_next, double s, double beta) noexcept;

/// Forward Euler step of the affine plant with the true uncertainty applied.
/// Throws ZeroInputGain when g(x) == 0 and NonFiniteState on overflow.
[[nodiscard]] double euler_step(const ScalarAffinePlant& plant, double x, double u,
                                double sampling_time);

/// Controller state for one channel of the adaptive discrete sliding-mode law.
///
/// `beta == 0` selects the first-order law (deadbeat target s(k+1) = 0);
/// `0 < beta < 1` is the second-order law with target s(k+1) = -beta s(k).
/// The estimate `alpha_hat` is the controller's belief about the plant's
/// multiplicative drift error and is only changed by update_adaptation().
class DsmcChannel {
public:
    DsmcChannel(double beta, double rho, double sampling_time, double alpha_hat = 1.0,
                bool adaptation_enabled = true);

    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }
    [[nodiscard]] double alpha_hat() const noexcept { return alpha_hat_; }
    [[nodiscard]] double sampling_time() const noexcept { return sampling_time_; }
    [[nodiscard]] bool adaptation_enabled() const noexcept { return adaptation_enabled_; }
    [[nodiscard]] bool is_first_order() const noexcept { return beta_ == 0.0; }

    void set_alpha_hat(double alpha_hat);
    void set_adaptation_enabled(bool enabled) noexcept { adaptation_enabled_ = enabled; }

    /// Optional actuator clamp. Off unless set.
    void set_input_limits(double lower, double upper);
    void clear_input_limits() noexcept { limits_.reset(); }

    /// u(k) = (-T alpha_hat f - x + x_d(k+1) - beta s) / (g T)
    [[nodiscard]] double compute_control(double x, double s, double x_desired_next,
                                         double f_value, double g_value) const;

    /// alpha_hat <- alpha_hat + s T f / rho. No-op with adaptation disabled.
    double update_adaptation(double s, double f_value);

private:
    struct Limits {
        double lower;
        double upper;
    };

    double beta_;
    double rho_;
    double sampling_time_;
    double alpha_hat_;
    bool adaptation_enabled_;
    std::optional<Limits> limits_;
};

struct ChannelStep {
    double s = 0.0;
    double xi = 0.0;
    double u = 0.0;
    double f_value = 0.0;
    double alpha_hat_after = 0.0;
};

struct ChannelStepResult {
    double u = 0.0;
    double x_next = 0.0;
    ChannelStep record;
};

/// One closed-loop step: sense s(k), control with alpha_hat(k), adapt with
/// s(k), then advance the plant with the true alpha.
[[nodiscard]] ChannelStepResult channel_step(const ScalarAffinePlant& plant, DsmcChannel& channel,
                                             double x, double x_desired, double x_desired_next);

/// Aborts a run when |s| grows past `factor` times its reference magnitude.
/// The reference is |s(0)|, floored at 1e-3 of the channel's magnitude scale
/// so that channels starting on the manifold are still guarded.
class DivergenceGuard {
public:
    static constexpr double kDefaultFactor = 1e6;

    DivergenceGuard() = default;
    DivergenceGuard(double initial_s, double magnitude_scale, double factor = kDefaultFactor);

    [[nodiscard]] double limit() const noexcept { return limit_; }

    /// Throws DivergedRun carrying `step` when |s| exceeds the limit or is not finite.
    void check(double s, std::size_t step, const char* channel_name) const;

private:
    double limit_ = 0.0;
};

struct ChannelRecord {
    double x = 0.0;
    double x_desired = 0.0;
    double s = 0.0;
    double u = 0.0;
    double f_value = 0.0;
    double alpha_hat = 0.0;  ///< estimate used for u at this step, before the update
};

/// Per-step history of a single-channel closed-loop run. `records[k]` holds
/// the state at step k and the input applied at step k.
struct ChannelTrace {
    double beta = 0.0;
    double rho = 1.0;
    double alpha_true = 1.0;
    double sampling_time = 0.0;
    std::vector<ChannelRecord> records;

    [[nodiscard]] std::vector<double> sliding() const;
    [[nodiscard]] std::vector<double> alpha_hat() const;
};

/// Runs `steps` closed-loop steps from x0. The returned trace has steps + 1
/// records; the last one carries the control that would be applied next
/// without advancing the plant or the estimate.
[[nodiscard]] ChannelTrace run_channel(const ScalarAffinePlant& plant, DsmcChannel channel,
                                       double x0, const std::function<double(std::size_t)>& desired,
                                       std::size_t steps);

}  // namespace dsmc
