// Command-line front end: run, sweep, compare, table1, validate.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical divergence.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dsmc/config.hpp"
#include "dsmc/error.hpp"
#include "dsmc/lyapunov.hpp"
#include "dsmc/sim.hpp"

namespace fs = std::filesystem;
using dsmc::DsmcError;
using dsmc::ErrorKind;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

struct Overrides {
    std::optional<int> order;
    std::optional<double> sampling_ms;
    bool no_adaptation = false;
    bool seedless = true;

    void attach(CLI::App& cmd) {
        cmd.add_option("--order", order, "controller order (1 or 2)")
            ->check(CLI::IsMember({1, 2}));
        cmd.add_option("--sampling-ms", sampling_ms, "sampling time override [ms]")
            ->check(CLI::PositiveNumber);
        cmd.add_flag("--no-adaptation", no_adaptation, "disable the adaptation laws");
        cmd.add_flag("--seedless", seedless, "deterministic run without noise (default)");
    }

    void apply(dsmc::sim::SimConfig& cfg) const {
        if (order) {
            cfg.order = *order == 1 ? dsmc::sim::ControllerOrder::First
                                    : dsmc::sim::ControllerOrder::Second;
        }
        if (sampling_ms) cfg.sampling_time = *sampling_ms * 1e-3;
        if (no_adaptation) cfg.adaptation = false;
    }
};

dsmc::cli::ExperimentConfig load(const std::string& path, const Overrides& overrides) {
    auto cfg = path.empty() ? dsmc::cli::ExperimentConfig{} : dsmc::cli::load_config(path);
    overrides.apply(cfg.sim);
    for (const auto& w : cfg.sim.validate()) {
        std::cerr << "warning: " << w << '\n';
    }
    return cfg;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DsmcError(ErrorKind::ConfigError, "cannot create output directory " + dir.string());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DsmcError(ErrorKind::ConfigError, "cannot write " + path.string());
    }
    return out;
}

dsmc::sim::TrajectoryLog read_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DsmcError(ErrorKind::ConfigError, "cannot read log " + path);
    }
    return dsmc::sim::read_csv(in);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    in.imbue(std::locale::classic());
    for (std::string tok; std::getline(in, tok, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DsmcError(ErrorKind::ConfigError, "bad sweep value '" + tok + "'");
        }
    }
    if (out.empty()) throw DsmcError(ErrorKind::ConfigError, "no sweep values given");
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const Overrides& ov) {
    const auto cfg = load(config_path, ov);
    const fs::path dir(out_dir);
    ensure_dir(dir);

    const auto log = dsmc::sim::run(cfg.sim);
    {
        auto out = open_out(dir / cfg.output.log_csv);
        dsmc::sim::write_csv(log, out);
    }
    const auto m = dsmc::sim::metrics(log, cfg.sim.settling_exclusion);
    {
        auto out = open_out(dir / cfg.output.metrics_txt);
        out << dsmc::sim::format_metrics(m);
    }
    std::array<dsmc::lyapunov::StabilityReport, 4> reports;
    if (log.records.size() >= 3) {
        for (auto c : dsmc::engine::kChannels) {
            reports[static_cast<std::size_t>(c)] = dsmc::sim::analyze_channel(log, cfg.sim, c);
        }
    }
    {
        auto out = open_out(dir / cfg.output.stability_txt);
        out << dsmc::sim::format_stability(reports, cfg.sim);
    }
    {
        auto out = open_out(dir / cfg.output.plot_dat);
        dsmc::sim::write_plot_data(log, out);
        auto script = open_out(dir / cfg.output.plot_script);
        script << dsmc::sim::plot_script(cfg.output.plot_dat);
    }
    std::cout << dsmc::sim::format_metrics(m);
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name,
              const std::string& values_text, const std::string& out_dir, const Overrides& ov) {
    const auto cfg = load(config_path, ov);
    const auto axis = dsmc::sim::parse_sweep_axis(axis_name);
    const auto values = parse_values(values_text);
    const auto points = dsmc::sim::sweep(cfg.sim, axis, values);

    std::string table = fmt::format("{:>16} {:>12} {:>12} {:>12}   convergence [s] texh/mf/we/ma\n",
                                    axis_name, "AFR", "Texh", "N");
    for (const auto& p : points) {
        std::string conv;
        for (const auto& c : p.convergence_step) {
            conv += c ? fmt::format(" {:.2f}", static_cast<double>(*c) * p.config.sampling_time)
                      : std::string(" -");
        }
        table += fmt::format("{:>16g} {:>12.5g} {:>12.5g} {:>12.5g}  {}\n", p.value,
                             p.metrics.mean_error[0], p.metrics.mean_error[1],
                             p.metrics.mean_error[2], conv);
    }
    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        ensure_dir(dir);
        auto summary = open_out(dir / "sweep.txt");
        summary << table;
        for (const auto& p : points) {
            auto out = open_out(dir / fmt::format("log_{}_{}.csv", axis_name, p.value));
            dsmc::sim::write_csv(p.log, out);
        }
    }
    std::cout << table;
    return kExitOk;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double settle) {
    const auto a = read_log(a_path);
    const auto b = read_log(b_path);
    const auto ma = dsmc::sim::metrics(a, settle);
    const auto mb = dsmc::sim::metrics(b, settle);
    std::array<double, 3> impr{};
    for (std::size_t i = 0; i < 3; ++i) {
        const double ea = ma.mean_error[i];
        const double eb = mb.mean_error[i];
        if (ea == eb) continue;
        if (ea == 0.0) {
            throw DsmcError(ErrorKind::ZeroBaseline, "baseline log tracks perfectly");
        }
        impr[i] = 100.0 * (ea - eb) / ea;
    }
    std::cout << dsmc::sim::format_comparison(ma, mb, impr);
    return kExitOk;
}

int cmd_table1(const std::string& config_path, const std::string& out_dir,
               const std::string& orders_text, const Overrides& ov) {
    const auto cfg = load(config_path, ov);
    std::array<dsmc::sim::ControllerOrder, 2> orders{};
    const auto parsed = parse_values(orders_text);
    if (parsed.size() != 2) {
        throw DsmcError(ErrorKind::ConfigError, "--orders takes two values, e.g. 1,2");
    }
    for (std::size_t i = 0; i < 2; ++i) {
        if (parsed[i] != 1.0 && parsed[i] != 2.0) {
            throw DsmcError(ErrorKind::ConfigError, "orders must be 1 or 2");
        }
        orders[i] = parsed[i] == 1.0 ? dsmc::sim::ControllerOrder::First
                                     : dsmc::sim::ControllerOrder::Second;
    }
    std::optional<std::ofstream> file;
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        file = open_out(fs::path(out_dir) / "table1.txt");
    }
    const auto table = dsmc::sim::run_table1(cfg.sim, {0.010, 0.040}, orders);
    const auto text = dsmc::sim::format_table1(table);
    if (file) *file << text;
    std::cout << text;
    return kExitOk;
}

int cmd_validate(const std::string& config_path, const Overrides& ov) {
    const auto cfg = load(config_path, ov);
    std::cout << "config ok: " << cfg.sim.steps() << " steps of "
              << dsmc::sim::format_number(cfg.sim.sampling_time * 1e3) << " ms\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive discrete sliding-mode control simulator for a four-state SI engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    Overrides ov;

    auto* run = app.add_subcommand("run", "simulate one experiment and write log, metrics, report");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory");
    ov.attach(*run);

    std::string axis;
    std::string values;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "repeat a run over values of one parameter");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--axis", axis,
                      "sampling_time_ms | alpha_texh | alpha_mf | alpha_we | alpha_ma | "
                      "alpha_all | beta_all")
        ->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--out", sweep_out, "optional directory for logs and summary");
    ov.attach(*sweep);

    std::string log_a;
    std::string log_b;
    double settle = 0.0;
    auto* compare = app.add_subcommand("compare", "compare mean tracking errors of two logs");
    compare->add_option("log_a", log_a, "baseline log (CSV)")->required();
    compare->add_option("log_b", log_b, "candidate log (CSV)")->required();
    compare->add_option("--settle-s", settle, "exclude records before this time [s]")
        ->check(CLI::NonNegativeNumber);

    std::string table_out;
    std::string orders = "1,2";
    auto* table1 = app.add_subcommand("table1", "first vs second order at 10 ms and 40 ms");
    table1->add_option("--config", config_path, "experiment config file")->required();
    table1->add_option("--out", table_out, "optional directory for table1.txt");
    table1->add_option("--orders", orders, "the two controller orders to compare");
    ov.attach(*table1);

    auto* validate = app.add_subcommand("validate", "check a config file and print warnings");
    validate->add_option("--config", config_path, "experiment config file")->required();
    ov.attach(*validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir, ov);
        if (*sweep) return cmd_sweep(config_path, axis, values, sweep_out, ov);
        if (*compare) return cmd_compare(log_a, log_b, settle);
        if (*table1) return cmd_table1(config_path, table_out, orders, ov);
        if (*validate) return cmd_validate(config_path, ov);
    } catch (const DsmcError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::DivergedRun ? kExitDiverged : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
