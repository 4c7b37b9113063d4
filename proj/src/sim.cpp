#include "dsmc/sim.hpp"

#include <cmath>
#include <future>
#include <string>

#include "dsmc/error.hpp"

namespace dsmc::sim {

using engine::Channel;

double scheduled_rho(Channel channel, double sampling_time) {
    struct Anchor {
        double at_10ms;
        double at_40ms;
    };
    static constexpr Anchor kAnchors[] = {
        {2.2e4, 2.5e5}, {4.2e-8, 2.5e-7}, {1.0e3, 1.2e4}, {3.3e-6, 9.0e-6}};
    const auto& a = kAnchors[static_cast<std::size_t>(channel)];
    const double slope = std::log(a.at_40ms / a.at_10ms) / std::log(4.0);
    return a.at_10ms * std::pow(sampling_time / 0.010, slope);
}

namespace {

void config_error(const std::string& message) { throw DsmcError(ErrorKind::ConfigError, message); }

void check_profile_positive(const TrajectoryProfile& profile, const char* name) {
    for (const auto& p : profile.setpoints()) {
        if (!(p.value > 0.0)) {
            config_error(std::string(name) + " must stay positive");
        }
    }
}

}  // namespace

std::vector<std::string> SimConfig::validate() const {
    if (!(sampling_time > 0.0) || !std::isfinite(sampling_time)) {
        config_error("sampling time must be positive");
    }
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
        config_error("horizon must be non-negative");
    }
    if (horizon > 0.0 && horizon < sampling_time) {
        config_error("horizon must be zero or at least one sampling period");
    }
    if (plant_substeps < 1) {
        config_error("plant substep count must be at least 1");
    }
    if (rate_mode == RateMode::SingleRate && plant_substeps != 1) {
        config_error("plant substeps require the multirate mode");
    }
    if (!(settling_exclusion >= 0.0)) {
        config_error("settling exclusion window must be non-negative");
    }
    for (Channel c : engine::kChannels) {
        const auto& g = gains[static_cast<std::size_t>(c)];
        const std::string name(engine::channel_name(c));
        if (order == ControllerOrder::Second && !lyapunov::certify_beta(g.beta)) {
            config_error("beta for channel " + name + " is " + format_number(g.beta) +
                         "; the second-order law is only stable for 0 < beta < 1");
        }
        if (g.rho && (!(*g.rho > 0.0) || !std::isfinite(*g.rho))) {
            config_error("adaptation gain rho for channel " + name + " must be positive");
        }
        if (!std::isfinite(g.alpha_hat0)) {
            config_error("initial estimate for channel " + name + " must be finite");
        }
        if (!std::isfinite(engine::channel_alpha(c, uncertainty))) {
            config_error("uncertainty for channel " + name + " must be finite");
        }
    }
    if (!(initial.omega_e > 0.0)) config_error("initial engine speed must be positive");
    if (!(initial.mdot_f > 0.0)) config_error("initial fuel flow must be positive");
    if (initial.m_a && !(*initial.m_a >= 0.0)) config_error("initial air mass must be >= 0");
    check_profile_positive(trajectories.afr_d, "desired AFR");
    check_profile_positive(trajectories.omega_d, "desired engine speed");
    try {
        params.validate();
    } catch (const DsmcError& e) {
        config_error(e.detail());
    }

    std::vector<std::string> warnings;
    const std::pair<const char*, const TrajectoryProfile*> profiles[] = {
        {"texh_d", &trajectories.t_exh_d},
        {"omega_d", &trajectories.omega_d},
        {"afr_d", &trajectories.afr_d}};
    for (const auto& [name, profile] : profiles) {
        const double period = profile->shortest_feature_period();
        if (sampling_time > 0.5 * period) {
            warnings.push_back(std::string("sampling time ") + format_number(sampling_time) +
                               " s exceeds half of the shortest feature of " + name + " (" +
                               format_number(period) + " s); the reference is under-sampled");
        }
    }
    return warnings;
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / sampling_time));
}

engine::BankGains SimConfig::effective_gains() const {
    engine::BankGains out;
    for (Channel c : engine::kChannels) {
        const auto i = static_cast<std::size_t>(c);
        const auto& g = gains[i];
        out[i] = {order == ControllerOrder::First ? 0.0 : g.beta,
                  g.rho.value_or(scheduled_rho(c, sampling_time)), g.alpha_hat0};
    }
    return out;
}

std::vector<double> TrajectoryLog::sliding(Channel channel) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.sliding[static_cast<std::size_t>(channel)]);
    return out;
}

std::vector<double> TrajectoryLog::alpha_hat(Channel channel) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.alpha_hat[static_cast<std::size_t>(channel)]);
    return out;
}

TrajectoryLog run(const SimConfig& config) {
    config.validate();
    const double T = config.sampling_time;
    const std::size_t steps = config.steps();

    engine::DesiredTrajectories traj;
    traj.t_exh_d = config.trajectories.t_exh_d.sample(T, steps + 3);
    traj.omega_d = config.trajectories.omega_d.sample(T, steps + 3);
    traj.afr_d = config.trajectories.afr_d.sample(T, steps + 3);

    engine::EngineControllerBank bank(config.effective_gains(), T, config.params, config.adaptation,
                                      config.speed_lookahead);

    const auto& ic = config.initial;
    double m_a0 = 0.0;
    if (ic.m_a) {
        m_a0 = *ic.m_a;
    } else {
        const auto probe = engine::make_engine_state(ic.t_exh, ic.mdot_f, ic.omega_e, 0.0, config.params);
        m_a0 = bank.control_speed(probe, traj.omega_d[0], traj.omega_d[1]);
    }
    engine::EngineState state =
        engine::make_engine_state(ic.t_exh, ic.mdot_f, ic.omega_e, m_a0, config.params);

    TrajectoryLog log;
    log.sampling_time = T;
    log.records.reserve(steps + 1);
    std::array<DivergenceGuard, 4> guards;

    for (std::size_t k = 0; k <= steps; ++k) {
        try {
            const auto step = bank.cascade_step(state, traj, k, k < steps);
            if (k == 0) {
                for (Channel c : engine::kChannels) {
                    const auto i = static_cast<std::size_t>(c);
                    guards[i] = DivergenceGuard(step.sliding[i], engine::channel_state(c, state));
                }
            }
            for (Channel c : engine::kChannels) {
                const auto i = static_cast<std::size_t>(c);
                guards[i].check(step.sliding[i], k, engine::channel_name(c).data());
            }

            LogRecord rec;
            rec.time = static_cast<double>(k) * T;
            rec.state = state;
            rec.t_exh_d = step.t_exh_d;
            rec.mdot_f_d = step.mdot_f_d;
            rec.omega_d = step.omega_d;
            rec.m_a_d = step.m_a_d;
            rec.afr_d = step.afr_d;
            rec.sliding = step.sliding;
            rec.alpha_hat = step.alpha_hat;
            rec.inputs = step.inputs;
            rec.drift = step.drift;
            log.records.push_back(rec);

            if (k == steps) break;
            if (config.rate_mode == RateMode::SingleRate) {
                state = engine::step_engine(state, step.inputs, config.uncertainty, config.params, T);
            } else {
                const double h = T / static_cast<double>(config.plant_substeps);
                for (std::size_t i = 0; i < config.plant_substeps; ++i) {
                    state = engine::step_engine(state, step.inputs, config.uncertainty,
                                                config.params, h);
                }
            }
        } catch (const DsmcError& e) {
            if (e.kind() == ErrorKind::DivergedRun) throw;
            throw DsmcError(ErrorKind::DivergedRun,
                            std::string(to_string(e.kind())) + ": " + e.detail(), k);
        }
    }
    return log;
}

std::string_view output_label(TrackedOutput output) noexcept {
    switch (output) {
        case TrackedOutput::Afr: return "AFR";
        case TrackedOutput::Texh: return "Texh";
        case TrackedOutput::EngineSpeedRpm: return "N";
    }
    return "?";
}

std::string_view output_unit(TrackedOutput output) noexcept {
    switch (output) {
        case TrackedOutput::Afr: return "[-]";
        case TrackedOutput::Texh: return "[degC]";
        case TrackedOutput::EngineSpeedRpm: return "[RPM]";
    }
    return "";
}

double mean_tracking_error(const TrajectoryLog& log, TrackedOutput output,
                           double settling_exclusion) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : log.records) {
        if (r.time + 1e-12 < settling_exclusion) continue;
        double err = 0.0;
        switch (output) {
            case TrackedOutput::Afr: err = r.state.afr - r.afr_d; break;
            case TrackedOutput::Texh: err = r.state.t_exh - r.t_exh_d; break;
            case TrackedOutput::EngineSpeedRpm:
                err = engine::rad_per_s_to_rpm(r.state.omega_e) - engine::rad_per_s_to_rpm(r.omega_d);
                break;
        }
        sum += std::abs(err);
        ++count;
    }
    if (count == 0) {
        throw DsmcError(ErrorKind::EmptyLog, "no records to average");
    }
    return sum / static_cast<double>(count);
}

MetricsReport metrics(const TrajectoryLog& log, double settling_exclusion) {
    MetricsReport m;
    for (auto o : kTrackedOutputs) {
        m.mean_error[static_cast<std::size_t>(o)] = mean_tracking_error(log, o, settling_exclusion);
    }
    return m;
}

std::array<double, 3> improvement(const MetricsReport& a, const MetricsReport& b) {
    std::array<double, 3> out{};
    for (auto o : kTrackedOutputs) {
        const auto i = static_cast<std::size_t>(o);
        if (a.mean_error[i] == 0.0) {
            throw DsmcError(ErrorKind::ZeroBaseline,
                            "baseline mean error of " + std::string(output_label(o)) + " is zero");
        }
        out[i] = 100.0 * (a.mean_error[i] - b.mean_error[i]) / a.mean_error[i];
    }
    return out;
}

std::array<double, 3> compare(const TrajectoryLog& a, const TrajectoryLog& b,
                              double settling_exclusion) {
    return improvement(metrics(a, settling_exclusion), metrics(b, settling_exclusion));
}

lyapunov::StabilityReport analyze_channel(const TrajectoryLog& log, const SimConfig& config,
                                          Channel channel,
                                          std::optional<std::size_t> transient_steps) {
    const auto gains = config.effective_gains()[static_cast<std::size_t>(channel)];
    const auto s = log.sliding(channel);
    const auto a = log.alpha_hat(channel);
    return lyapunov::analyze_trajectory(
        lyapunov::ChannelSeries{s, a, gains.beta, gains.rho,
                                engine::channel_alpha(channel, config.uncertainty)},
        transient_steps);
}

SweepAxis parse_sweep_axis(std::string_view name) {
    for (auto axis : {SweepAxis::SamplingTimeMs, SweepAxis::AlphaTexh, SweepAxis::AlphaMf,
                      SweepAxis::AlphaWe, SweepAxis::AlphaMa, SweepAxis::AlphaAll,
                      SweepAxis::BetaAll}) {
        if (sweep_axis_name(axis) == name) return axis;
    }
    throw DsmcError(ErrorKind::ConfigError, "unknown sweep axis '" + std::string(name) + "'");
}

std::string_view sweep_axis_name(SweepAxis axis) noexcept {
    switch (axis) {
        case SweepAxis::SamplingTimeMs: return "sampling_time_ms";
        case SweepAxis::AlphaTexh: return "alpha_texh";
        case SweepAxis::AlphaMf: return "alpha_mf";
        case SweepAxis::AlphaWe: return "alpha_we";
        case SweepAxis::AlphaMa: return "alpha_ma";
        case SweepAxis::AlphaAll: return "alpha_all";
        case SweepAxis::BetaAll: return "beta_all";
    }
    return "?";
}

SimConfig apply_sweep_value(SimConfig config, SweepAxis axis, double value) {
    auto& u = config.uncertainty;
    switch (axis) {
        case SweepAxis::SamplingTimeMs: config.sampling_time = value * 1e-3; break;
        case SweepAxis::AlphaTexh: u.alpha_texh = value; break;
        case SweepAxis::AlphaMf: u.alpha_mf = value; break;
        case SweepAxis::AlphaWe: u.alpha_we = value; break;
        case SweepAxis::AlphaMa: u.alpha_ma = value; break;
        case SweepAxis::AlphaAll: u = {value, value, value, value}; break;
        case SweepAxis::BetaAll:
            for (auto& g : config.gains) g.beta = value;
            break;
    }
    return config;
}

std::vector<SweepPoint> sweep(const SimConfig& base, SweepAxis axis,
                              const std::vector<double>& values) {
    if (values.empty()) {
        throw DsmcError(ErrorKind::InvalidArgument, "sweep needs at least one value");
    }
    std::vector<std::future<SweepPoint>> jobs;
    jobs.reserve(values.size());
    for (double v : values) {
        jobs.push_back(std::async(std::launch::async, [&base, axis, v] {
            SweepPoint p;
            p.value = v;
            p.config = apply_sweep_value(base, axis, v);
            p.log = run(p.config);
            p.metrics = metrics(p.log, p.config.settling_exclusion);
            for (Channel c : engine::kChannels) {
                p.convergence_step[static_cast<std::size_t>(c)] = lyapunov::convergence_step(
                    p.log.alpha_hat(c), engine::channel_alpha(c, p.config.uncertainty));
            }
            return p;
        }));
    }
    std::vector<SweepPoint> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            out.push_back(jobs[i].get());
        } catch (const DsmcError& e) {
            throw DsmcError(e.kind(),
                            std::string(sweep_axis_name(axis)) + " = " + format_number(values[i]) +
                                ": " + e.detail(),
                            e.step());
        }
    }
    return out;
}

Table1 run_table1(const SimConfig& base, const std::vector<double>& sampling_times,
                  std::array<ControllerOrder, 2> orders) {
    Table1 table;
    for (double T : sampling_times) {
        Table1::Column col;
        col.sampling_time = T;
        std::array<MetricsReport, 2> m;
        for (std::size_t i = 0; i < 2; ++i) {
            SimConfig cfg = base;
            cfg.sampling_time = T;
            cfg.order = orders[i];
            m[i] = metrics(run(cfg), cfg.settling_exclusion);
        }
        col.first = m[0];
        col.second = m[1];
        col.improvement = improvement(col.first, col.second);
        table.columns.push_back(col);
    }
    return table;
}

}  // namespace dsmc::sim
