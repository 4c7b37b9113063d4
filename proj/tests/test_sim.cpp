#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dsmc/error.hpp"
#include "dsmc/lyapunov.hpp"
#include "dsmc/sim.hpp"

using Catch::Approx;
using namespace dsmc;
using namespace dsmc::sim;
using engine::Channel;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DsmcError& e) {
        return e.kind();
    }
    FAIL("expected a DsmcError");
    return ErrorKind::InvalidArgument;
}

SimConfig short_config(double horizon = 1.0) {
    SimConfig c;
    c.horizon = horizon;
    return c;
}

LogRecord record(double time, double afr, double afr_d, double texh, double texh_d, double omega,
                 double omega_d) {
    LogRecord r;
    r.time = time;
    r.state.afr = afr;
    r.afr_d = afr_d;
    r.state.t_exh = texh;
    r.t_exh_d = texh_d;
    r.state.omega_e = omega;
    r.omega_d = omega_d;
    return r;
}

std::string csv_of(const TrajectoryLog& log) {
    std::ostringstream out;
    write_csv(log, out);
    return out.str();
}

double max_state_deviation(const TrajectoryLog& a, const TrajectoryLog& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        d = std::max(d, std::abs(a.records[k].state.t_exh - b.records[k].state.t_exh) / 400.0 +
                            std::abs(a.records[k].state.omega_e - b.records[k].state.omega_e) / 100.0);
    }
    return d;
}

}  // namespace

TEST_CASE("profiles interpolate and hold", "[sim][profile]") {
    const auto ramp = TrajectoryProfile::ramp(90.0, 105.0, 0.0, 5.0);
    CHECK(ramp.at(-1.0) == 90.0);
    CHECK(ramp.at(2.5) == Approx(97.5).epsilon(1e-15));
    CHECK(ramp.at(7.0) == 105.0);

    const auto smooth = TrajectoryProfile::smoothstep(0.0, 1.0, 0.0, 1.0);
    CHECK(smooth.at(0.5) == Approx(0.5).epsilon(1e-15));
    CHECK(smooth.at(0.25) == Approx(0.15625).epsilon(1e-15));

    const auto samples = ramp.sample(0.5, 4);
    REQUIRE(samples.size() == 4);
    CHECK(samples[3] == Approx(94.5).epsilon(1e-15));

    CHECK(std::isinf(TrajectoryProfile::constant(14.6).shortest_feature_period()));
    CHECK(TrajectoryProfile::parse("smoothstep 25@0 400@10 300@14").shortest_feature_period() ==
          Approx(4.0));
}

TEST_CASE("profile text round trip and errors", "[sim][profile]") {
    for (const char* text : {"constant 14.6", "ramp 90@0 105@5", "smoothstep 25@0 400@10 300@14"}) {
        const auto p = TrajectoryProfile::parse(text);
        CHECK(p.to_string() == text);
        CHECK(TrajectoryProfile::parse(p.to_string()).to_string() == text);
    }
    CHECK(kind_of([] { (void)TrajectoryProfile::parse("sine 1@0 2@1"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)TrajectoryProfile::parse("ramp 1@0"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)TrajectoryProfile::parse("ramp 1@2 2@1"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)TrajectoryProfile::parse("ramp 1:0 2@1"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)TrajectoryProfile::parse("constant x"); }) == ErrorKind::ConfigError);
}

TEST_CASE("validation rejects beta outside the open unit interval", "[sim][config]") {
    SimConfig c;
    c.gains[2].beta = 1.2;
    try {
        (void)c.validate();
        FAIL("expected ConfigError");
    } catch (const DsmcError& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        const std::string msg = e.detail();
        CHECK(msg.find("omega_e") != std::string::npos);
        CHECK(msg.find("1.2") != std::string::npos);
        CHECK(msg.find("0 < beta < 1") != std::string::npos);
    }
    c.order = ControllerOrder::First;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("validation of rates and gains", "[sim][config]") {
    SimConfig c;
    CHECK(c.validate().empty());

    c.plant_substeps = 4;
    CHECK(kind_of([&] { (void)c.validate(); }) == ErrorKind::ConfigError);
    c.rate_mode = RateMode::Multirate;
    CHECK_NOTHROW(c.validate());
    c.plant_substeps = 0;
    CHECK(kind_of([&] { (void)c.validate(); }) == ErrorKind::ConfigError);

    SimConfig r;
    r.gains[0].rho = -1.0;
    CHECK(kind_of([&] { (void)r.validate(); }) == ErrorKind::ConfigError);

    SimConfig t;
    t.sampling_time = 0.0;
    CHECK(kind_of([&] { (void)t.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("under-sampled reference produces a warning", "[sim][config]") {
    SimConfig c;
    c.trajectories.omega_d = TrajectoryProfile::parse("ramp 90@0 100@0.05");
    c.sampling_time = 0.04;
    const auto warnings = c.validate();
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("omega_d") != std::string::npos);
}

TEST_CASE("effective gains follow the order and the schedule", "[sim][config]") {
    SimConfig c;
    c.gains[1].rho = 7.0;
    auto g = c.effective_gains();
    CHECK(g[0].beta == 0.5);
    CHECK(g[1].rho == 7.0);
    CHECK(g[0].rho == Approx(scheduled_rho(Channel::Texh, 0.01)));
    c.order = ControllerOrder::First;
    g = c.effective_gains();
    for (const auto& ch : g) CHECK(ch.beta == 0.0);

    CHECK(scheduled_rho(Channel::Texh, 0.01) == Approx(2.2e4));
    CHECK(scheduled_rho(Channel::Texh, 0.04) == Approx(2.5e5));
    CHECK(scheduled_rho(Channel::Air, 0.02) > scheduled_rho(Channel::Air, 0.01));
    CHECK(scheduled_rho(Channel::Air, 0.02) < scheduled_rho(Channel::Air, 0.04));
}

TEST_CASE("log length and spacing", "[sim]") {
    auto zero = short_config(0.0);
    const auto z = run(zero);
    CHECK(z.records.size() == 1);

    const auto log = run(short_config(0.5));
    REQUIRE(log.records.size() == 51);
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        CHECK(log.records[k].time == Approx(0.01 * static_cast<double>(k)).margin(1e-12));
    }
}

TEST_CASE("runs are deterministic", "[sim]") {
    SimConfig c = short_config(1.0);
    c.uncertainty = {1.25, 0.8, 1.1, 0.9};
    CHECK(csv_of(run(c)) == csv_of(run(c)));
}

TEST_CASE("matched engine run keeps the difference function non-positive", "[sim][lyapunov]") {
    SimConfig c = short_config(2.0);
    c.adaptation = false;
    const auto log = run(c);
    for (Channel ch : engine::kChannels) {
        const auto r = analyze_channel(log, c, ch, std::size_t{0});
        CHECK(r.beta_certified);
        for (double dv : r.delta_v_series) CHECK(dv <= 1e-9);
    }
}

TEST_CASE("mean tracking error on hand-built logs", "[sim][metrics]") {
    TrajectoryLog perfect;
    perfect.records = {record(0.0, 14.6, 14.6, 300, 300, 100, 100),
                       record(0.01, 14.6, 14.6, 300, 300, 100, 100)};
    CHECK(mean_tracking_error(perfect, TrackedOutput::Afr) == 0.0);

    TrajectoryLog offset;
    offset.records = {record(0.0, 15.1, 14.6, 300, 300, 100, 100),
                      record(0.01, 14.1, 14.6, 300, 300, 100, 100)};
    CHECK(mean_tracking_error(offset, TrackedOutput::Afr) == Approx(0.5).epsilon(1e-12));

    TrajectoryLog spread;
    spread.records = {record(0.0, 14.6, 14.6, 300, 300, 100, 100),
                      record(0.01, 14.6, 14.6, 301, 300, 100, 100),
                      record(0.02, 14.6, 14.6, 298, 300, 100, 100)};
    CHECK(mean_tracking_error(spread, TrackedOutput::Texh) == Approx(1.0).epsilon(1e-12));
    CHECK(mean_tracking_error(spread, TrackedOutput::Texh, 0.015) == Approx(2.0).epsilon(1e-12));

    TrajectoryLog rpm;
    rpm.records = {record(0.0, 14.6, 14.6, 300, 300, 100.0 + M_PI / 30.0, 100)};
    CHECK(mean_tracking_error(rpm, TrackedOutput::EngineSpeedRpm) == Approx(1.0).epsilon(1e-12));

    CHECK(kind_of([] { (void)mean_tracking_error(TrajectoryLog{}, TrackedOutput::Afr); }) ==
          ErrorKind::EmptyLog);
    CHECK(kind_of([&] { (void)mean_tracking_error(spread, TrackedOutput::Afr, 1.0); }) ==
          ErrorKind::EmptyLog);
}

TEST_CASE("percentage improvement", "[sim][metrics]") {
    const MetricsReport a{{0.28, 9.0, 10.0}};
    const MetricsReport b{{0.10, 1.0, 10.0}};
    const auto impr = improvement(a, b);
    CHECK(impr[0] == Approx(64.2857).margin(1e-3));
    CHECK(impr[1] == Approx(88.8889).margin(1e-3));
    CHECK(impr[2] == 0.0);
    CHECK(improvement(a, a) == std::array<double, 3>{0.0, 0.0, 0.0});
    const MetricsReport zero{{0.0, 1.0, 1.0}};
    CHECK(kind_of([&] { (void)improvement(zero, b); }) == ErrorKind::ZeroBaseline);
}

TEST_CASE("sweep of one value equals a plain run", "[sim][sweep]") {
    const SimConfig base = short_config(0.5);
    const auto points = sweep(base, SweepAxis::AlphaTexh, {1.0});
    REQUIRE(points.size() == 1);
    CHECK(csv_of(points[0].log) == csv_of(run(base)));
}

TEST_CASE("sweep reports adaptation convergence per value", "[sim][sweep]") {
    SimConfig base = short_config(3.0);
    const auto points = sweep(base, SweepAxis::AlphaTexh, {1.0, 1.25});
    REQUIRE(points.size() == 2);
    CHECK(points[0].value == 1.0);
    CHECK(points[1].value == 1.25);
    REQUIRE(points[0].convergence_step[0]);
    CHECK(*points[0].convergence_step[0] == 0);
    REQUIRE(points[1].convergence_step[0]);
    CHECK(*points[1].convergence_step[0] > 0);
}

TEST_CASE("sweep failures name the offending value", "[sim][sweep]") {
    const SimConfig base = short_config(0.5);
    try {
        (void)sweep(base, SweepAxis::BetaAll, {0.5, 1.5});
        FAIL("expected ConfigError");
    } catch (const DsmcError& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        CHECK(e.detail().rfind("beta_all = 1.5:", 0) == 0);
    }
    CHECK(kind_of([&] { (void)sweep(base, SweepAxis::BetaAll, {}); }) == ErrorKind::InvalidArgument);
    CHECK(parse_sweep_axis("alpha_ma") == SweepAxis::AlphaMa);
    CHECK(kind_of([] { (void)parse_sweep_axis("gamma"); }) == ErrorKind::ConfigError);
}

TEST_CASE("multirate with one substep equals single rate", "[sim][multirate]") {
    for (auto order : {ControllerOrder::First, ControllerOrder::Second}) {
        SimConfig single = short_config(1.0);
        single.order = order;
        SimConfig multi = single;
        multi.rate_mode = RateMode::Multirate;
        CHECK(csv_of(run(single)) == csv_of(run(multi)));
    }
}

TEST_CASE("multirate deviation grows monotonically with the substep count", "[sim][multirate]") {
    struct Case {
        ControllerOrder order;
        engine::SpeedLookahead lookahead;
    };
    for (const auto& c : {Case{ControllerOrder::First, engine::SpeedLookahead::Model},
                          Case{ControllerOrder::Second, engine::SpeedLookahead::Sliding}}) {
        SimConfig single = short_config(2.0);
        single.order = c.order;
        single.adaptation = false;
        single.speed_lookahead = c.lookahead;
        const auto ref = run(single);
        double previous = 0.0;
        for (std::size_t n : {2, 4, 8}) {
            SimConfig multi = single;
            multi.rate_mode = RateMode::Multirate;
            multi.plant_substeps = n;
            const double d = max_state_deviation(ref, run(multi));
            CHECK(d > previous);
            CHECK(d < 1e-2);
            previous = d;
        }
    }
}

TEST_CASE("table with equal orders shows no improvement", "[sim][table]") {
    SimConfig base = short_config(1.0);
    const auto t = run_table1(base, {0.01, 0.04}, {ControllerOrder::Second, ControllerOrder::Second});
    REQUIRE(t.columns.size() == 2);
    CHECK(t.columns[0].sampling_time == 0.01);
    CHECK(t.columns[1].sampling_time == 0.04);
    for (const auto& col : t.columns) {
        for (double v : col.improvement) CHECK(v == 0.0);
    }
    const auto text = format_table1(t);
    CHECK(text.find("T = 10 ms") != std::string::npos);
    CHECK(text.find("T = 40 ms") != std::string::npos);
}

TEST_CASE("diverging run reports the step", "[sim][errors]") {
    SimConfig c = short_config(2.0);
    for (auto& g : c.gains) g.rho = 1e-30;
    try {
        (void)run(c);
        FAIL("expected DivergedRun");
    } catch (const DsmcError& e) {
        CHECK(e.kind() == ErrorKind::DivergedRun);
        CHECK(e.step().has_value());
    }
}
