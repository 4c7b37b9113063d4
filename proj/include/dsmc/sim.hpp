#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsmc/engine_control.hpp"
#include "dsmc/engine_plant.hpp"
#include "dsmc/lyapunov.hpp"

namespace dsmc::sim {

/// Piecewise reference profile through time-stamped setpoints. Values hold
/// at the first/last setpoint outside the covered interval.
class TrajectoryProfile {
public:
    enum class Shape { Constant, Ramp, Smoothstep };

    struct Setpoint {
        double time = 0.0;   ///< [s]
        double value = 0.0;
    };

    TrajectoryProfile() = default;
    TrajectoryProfile(Shape shape, std::vector<Setpoint> setpoints);

    [[nodiscard]] static TrajectoryProfile constant(double value);
    [[nodiscard]] static TrajectoryProfile ramp(double from, double to, double t0, double t1);
    [[nodiscard]] static TrajectoryProfile smoothstep(double from, double to, double t0, double t1);

    /// Parses "constant 14.6", "ramp 90@0 105@5" or "smoothstep 25@0 400@10 300@14".
    [[nodiscard]] static TrajectoryProfile parse(std::string_view text);

    [[nodiscard]] double at(double time) const;
    [[nodiscard]] std::vector<double> sample(double sampling_time, std::size_t count) const;

    /// Shortest time between consecutive setpoints; infinity for constants.
    [[nodiscard]] double shortest_feature_period() const;

    [[nodiscard]] Shape shape() const noexcept { return shape_; }
    [[nodiscard]] const std::vector<Setpoint>& setpoints() const noexcept { return setpoints_; }
    [[nodiscard]] std::string to_string() const;

private:
    Shape shape_ = Shape::Constant;
    std::vector<Setpoint> setpoints_{{0.0, 0.0}};
};

struct TrajectorySet {
    TrajectoryProfile t_exh_d = TrajectoryProfile::ramp(25.0, 400.0, 0.0, 10.0);
    TrajectoryProfile omega_d = TrajectoryProfile::ramp(90.0, 105.0, 0.0, 5.0);
    TrajectoryProfile afr_d = TrajectoryProfile::constant(14.6);
};

enum class ControllerOrder { First, Second };
enum class RateMode { SingleRate, Multirate };

struct InitialConditions {
    double t_exh = 25.0;
    double mdot_f = 0.0005;
    double omega_e = 90.0;
    /// Empty: start the air mass at the value the speed law demands at k = 0,
    /// so the speed/air cascade starts consistent.
    std::optional<double> m_a;
};

/// Gains of one channel as configured. An empty rho is taken from
/// scheduled_rho() for the run's sampling time.
struct GainSettings {
    double beta = 0.5;
    std::optional<double> rho;
    double alpha_hat0 = 1.0;
};

/// Adaptation gain used when none is configured. Tuned at 10 ms and 40 ms and
/// interpolated log-log in between (extrapolated outside).
[[nodiscard]] double scheduled_rho(engine::Channel channel, double sampling_time);

struct SimConfig {
    double sampling_time = 0.01;  ///< [s]
    double horizon = 10.0;        ///< [s]
    ControllerOrder order = ControllerOrder::Second;
    bool adaptation = true;
    engine::EngineUncertainty uncertainty;
    std::array<GainSettings, 4> gains{};
    TrajectorySet trajectories;
    RateMode rate_mode = RateMode::SingleRate;
    std::size_t plant_substeps = 1;
    engine::SpeedLookahead speed_lookahead = engine::SpeedLookahead::Model;
    InitialConditions initial;
    engine::EngineParams params;
    double settling_exclusion = 0.0;  ///< [s] skipped by mean_tracking_error

    /// Throws ConfigError on invalid settings; returns non-fatal warnings.
    std::vector<std::string> validate() const;

    /// Number of controller steps; the log holds steps() + 1 records.
    [[nodiscard]] std::size_t steps() const;
    /// Resolved gains: scheduled rho filled in, beta forced to 0 for first-order runs.
    [[nodiscard]] engine::BankGains effective_gains() const;
};

struct LogRecord {
    double time = 0.0;
    engine::EngineState state;
    double t_exh_d = 0.0;
    double mdot_f_d = 0.0;
    double omega_d = 0.0;
    double m_a_d = 0.0;
    double afr_d = 0.0;
    std::array<double, 4> sliding{};
    std::array<double, 4> alpha_hat{};
    engine::EngineInputs inputs;
    std::array<double, 4> drift{};  ///< not part of the CSV schema
};

struct TrajectoryLog {
    double sampling_time = 0.0;
    std::vector<LogRecord> records;

    [[nodiscard]] std::vector<double> sliding(engine::Channel channel) const;
    [[nodiscard]] std::vector<double> alpha_hat(engine::Channel channel) const;
};

/// Deterministic closed-loop run. Throws DivergedRun (with step index) when a
/// sliding variable escapes its guard or the plant leaves its valid domain.
[[nodiscard]] TrajectoryLog run(const SimConfig& config);

enum class TrackedOutput { Afr = 0, Texh = 1, EngineSpeedRpm = 2 };
inline constexpr std::array<TrackedOutput, 3> kTrackedOutputs{
    TrackedOutput::Afr, TrackedOutput::Texh, TrackedOutput::EngineSpeedRpm};

[[nodiscard]] std::string_view output_label(TrackedOutput output) noexcept;
[[nodiscard]] std::string_view output_unit(TrackedOutput output) noexcept;

/// Mean |measured - desired| over records with time >= settling_exclusion.
[[nodiscard]] double mean_tracking_error(const TrajectoryLog& log, TrackedOutput output,
                                         double settling_exclusion = 0.0);

struct MetricsReport {
    std::array<double, 3> mean_error{};  ///< indexed by TrackedOutput
    [[nodiscard]] double operator[](TrackedOutput o) const {
        return mean_error[static_cast<std::size_t>(o)];
    }
};

[[nodiscard]] MetricsReport metrics(const TrajectoryLog& log, double settling_exclusion = 0.0);

/// 100 (e_a - e_b) / e_a per output; positive means b tracks better.
/// Throws ZeroBaseline when a baseline error is zero.
[[nodiscard]] std::array<double, 3> improvement(const MetricsReport& a, const MetricsReport& b);
[[nodiscard]] std::array<double, 3> compare(const TrajectoryLog& a, const TrajectoryLog& b,
                                            double settling_exclusion = 0.0);

/// Stability analysis of one engine channel under the gains of `config`.
[[nodiscard]] lyapunov::StabilityReport analyze_channel(
    const TrajectoryLog& log, const SimConfig& config, engine::Channel channel,
    std::optional<std::size_t> transient_steps = {});

enum class SweepAxis {
    SamplingTimeMs,
    AlphaTexh,
    AlphaMf,
    AlphaWe,
    AlphaMa,
    AlphaAll,
    BetaAll,
};

[[nodiscard]] SweepAxis parse_sweep_axis(std::string_view name);
[[nodiscard]] std::string_view sweep_axis_name(SweepAxis axis) noexcept;
[[nodiscard]] SimConfig apply_sweep_value(SimConfig config, SweepAxis axis, double value);

struct SweepPoint {
    double value = 0.0;
    SimConfig config;
    TrajectoryLog log;
    MetricsReport metrics;
    std::array<std::optional<std::size_t>, 4> convergence_step{};
};

/// One run per value, results in input order. Runs execute concurrently.
/// A failing run is rethrown with the offending value in its message.
[[nodiscard]] std::vector<SweepPoint> sweep(const SimConfig& base, SweepAxis axis,
                                            const std::vector<double>& values);

/// Mean errors of the {first, second} x {10 ms, 40 ms} grid.
struct Table1 {
    struct Column {
        double sampling_time = 0.0;
        MetricsReport first;
        MetricsReport second;
        std::array<double, 3> improvement{};
    };
    std::vector<Column> columns;
};

/// Runs each sampling time with both orders on identical trajectories.
/// `orders` lets both columns use the same order (improvements then vanish).
[[nodiscard]] Table1 run_table1(const SimConfig& base,
                                const std::vector<double>& sampling_times = {0.010, 0.040},
                                std::array<ControllerOrder, 2> orders = {ControllerOrder::First,
                                                                         ControllerOrder::Second});

// Serialization.
inline constexpr std::string_view kCsvHeader =
    "time,texh,texh_d,mdot_f,mdot_f_d,omega_e,omega_d,m_a,m_a_d,afr,afr_d,s1,s2,s3,s4,"
    "alpha_hat_texh,alpha_hat_mf,alpha_hat_we,alpha_hat_ma,delta,mdot_fc,mdot_ai";

void write_csv(const TrajectoryLog& log, std::ostream& out);
/// Throws SchemaMismatch on a foreign header or malformed row.
[[nodiscard]] TrajectoryLog read_csv(std::istream& in);

/// Locale-independent shortest round-trip decimal form.
[[nodiscard]] std::string format_number(double value);

[[nodiscard]] std::string format_metrics(const MetricsReport& report);
[[nodiscard]] std::string format_comparison(const MetricsReport& a, const MetricsReport& b,
                                            const std::array<double, 3>& improvement);
[[nodiscard]] std::string format_table1(const Table1& table);
[[nodiscard]] std::string format_stability(const std::array<lyapunov::StabilityReport, 4>& reports,
                                           const SimConfig& config);

/// gnuplot-ready whitespace-separated columns plus a matching script.
void write_plot_data(const TrajectoryLog& log, std::ostream& out);
[[nodiscard]] std::string plot_script(std::string_view data_file);

}  // namespace dsmc::sim
