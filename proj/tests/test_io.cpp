#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "dsmc/config.hpp"
#include "dsmc/error.hpp"
#include "dsmc/sim.hpp"

using Catch::Approx;
using namespace dsmc;
using namespace dsmc::sim;

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

TrajectoryLog sample_log() {
    SimConfig c;
    c.horizon = 0.5;
    c.uncertainty = {1.25, 1.0, 1.0, 1.0};
    return run(c);
}

}  // namespace

TEST_CASE("config parses every section", "[config]") {
    const auto cfg = cli::parse_config(R"(
[simulation]
sampling_time_ms = 40
horizon_s = 3
order = 1
adaptation = off
rate_mode = multirate
plant_substeps = 4
speed_lookahead = sliding
settling_exclusion_s = 0.5

[uncertainty]
alpha_texh = 1.25

[gains]
beta_we = 0.3
rho_mf = 2e-7
rho_ma = auto

[initial]
texh_degc = 30
m_a_kg = 0.004

[trajectories]
omega_d_rad_s = constant 100

[output]
log_csv = run.csv
)");
    const auto& s = cfg.sim;
    CHECK(s.sampling_time == Approx(0.04));
    CHECK(s.horizon == 3.0);
    CHECK(s.order == ControllerOrder::First);
    CHECK_FALSE(s.adaptation);
    CHECK(s.rate_mode == RateMode::Multirate);
    CHECK(s.plant_substeps == 4);
    CHECK(s.speed_lookahead == engine::SpeedLookahead::Sliding);
    CHECK(s.settling_exclusion == 0.5);
    CHECK(s.uncertainty.alpha_texh == 1.25);
    CHECK(s.gains[2].beta == 0.3);
    CHECK(s.gains[1].rho == 2e-7);
    CHECK_FALSE(s.gains[3].rho);
    CHECK(s.initial.t_exh == 30.0);
    CHECK(s.initial.m_a == 0.004);
    CHECK(s.trajectories.omega_d.to_string() == "constant 100");
    CHECK(cfg.output.log_csv == "run.csv");
}

TEST_CASE("config render round trip", "[config]") {
    cli::ExperimentConfig cfg;
    cfg.sim.sampling_time = 0.02;
    cfg.sim.uncertainty = {1.1, 0.9, 1.2, 0.8};
    cfg.sim.gains[0].rho = 123.0;
    cfg.sim.initial.m_a = 0.005;
    cfg.sim.trajectories.t_exh_d = TrajectoryProfile::parse("smoothstep 25@0 400@10 300@14");
    const auto text = cli::render_config(cfg);
    const auto back = cli::parse_config(text);
    CHECK(cli::render_config(back) == text);
    CHECK(back.sim.gains[0].rho == 123.0);
    CHECK_FALSE(back.sim.gains[1].rho);
    CHECK(back.sim.sampling_time == 0.02);

    const auto defaults = cli::parse_config("");
    CHECK(cli::render_config(defaults) == cli::render_config(cli::ExperimentConfig{}));
}

TEST_CASE("config rejects unknown and malformed entries", "[config][errors]") {
    CHECK(kind_of([] { (void)cli::parse_config("[simulation]\nspeed = 3\n"); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)cli::parse_config("[plant]\nx = 1\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)cli::parse_config("[simulation]\norder = 3\n"); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)cli::parse_config("[simulation]\nhorizon_s = ten\n"); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)cli::parse_config("[simulation]\nadaptation = maybe\n"); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)cli::parse_config("[trajectories]\nafr_d = wave 1\n"); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { (void)cli::load_config("/nonexistent/dsmc.ini"); }) ==
          ErrorKind::ConfigError);
}

TEST_CASE("csv round trip preserves every field and metric", "[report]") {
    const auto log = sample_log();
    std::stringstream buf;
    write_csv(log, buf);
    const auto back = read_csv(buf);
    REQUIRE(back.records.size() == log.records.size());
    CHECK(back.sampling_time == Approx(log.sampling_time).epsilon(1e-12));
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const auto& a = log.records[k];
        const auto& b = back.records[k];
        CHECK(a.state.t_exh == b.state.t_exh);
        CHECK(a.state.afr == b.state.afr);
        CHECK(a.sliding == b.sliding);
        CHECK(a.alpha_hat == b.alpha_hat);
        CHECK(a.inputs.mdot_ai == b.inputs.mdot_ai);
    }
    const auto m1 = metrics(log);
    const auto m2 = metrics(back);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m2.mean_error[i] == Approx(m1.mean_error[i]).epsilon(1e-12));
    }
}

TEST_CASE("csv reader rejects foreign data", "[report][errors]") {
    std::istringstream bad_header("time,x\n0,1\n");
    CHECK(kind_of([&] { (void)read_csv(bad_header); }) == ErrorKind::SchemaMismatch);

    std::string row = "0";
    for (int i = 1; i < 22; ++i) row += ",1";
    std::istringstream good(std::string(kCsvHeader) + "\n" + row + "\n");
    CHECK(read_csv(good).records.size() == 1);

    std::istringstream short_row(std::string(kCsvHeader) + "\n0,1,2\n");
    CHECK(kind_of([&] { (void)read_csv(short_row); }) == ErrorKind::SchemaMismatch);

    std::istringstream bad_number(std::string(kCsvHeader) + "\n" + row + "x\n");
    CHECK(kind_of([&] { (void)read_csv(bad_number); }) == ErrorKind::SchemaMismatch);
}

TEST_CASE("number formatting is shortest round trip", "[report]") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(14.6) == "14.6");
    CHECK(format_number(1e-7) == "1e-07");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("text reports list every output", "[report]") {
    const MetricsReport m{{0.25, 3.5, 12.0}};
    const auto text = format_metrics(m);
    CHECK(text.find("AFR") != std::string::npos);
    CHECK(text.find("Texh") != std::string::npos);
    CHECK(text.find("[RPM]") != std::string::npos);
    CHECK(text.find("0.25") != std::string::npos);

    const auto cmp = format_comparison(m, m, {0.0, 0.0, 0.0});
    CHECK(cmp.find("0.0%") != std::string::npos);

    std::ostringstream plot;
    write_plot_data(sample_log(), plot);
    CHECK(plot.str().rfind("# time", 0) == 0);
    CHECK(plot_script("trajectory.dat").find("'trajectory.dat'") != std::string::npos);
}
