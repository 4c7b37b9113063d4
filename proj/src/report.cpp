#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <fmt/format.h>

#include "dsmc/error.hpp"
#include "dsmc/sim.hpp"

namespace dsmc::sim {

namespace {

constexpr std::size_t kCsvColumns = 22;

double parse_field(std::string_view field, std::size_t line) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw DsmcError(ErrorKind::SchemaMismatch,
                        "malformed number '" + std::string(field) + "' on line " +
                            std::to_string(line));
    }
    return value;
}

std::string_view chomp(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    return line;
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_csv(const TrajectoryLog& log, std::ostream& out) {
    out << kCsvHeader << '\n';
    std::string line;
    for (const auto& r : log.records) {
        const double row[kCsvColumns] = {
            r.time,          r.state.t_exh,     r.t_exh_d,         r.state.mdot_f,
            r.mdot_f_d,      r.state.omega_e,   r.omega_d,         r.state.m_a,
            r.m_a_d,         r.state.afr,       r.afr_d,           r.sliding[0],
            r.sliding[1],    r.sliding[2],      r.sliding[3],      r.alpha_hat[0],
            r.alpha_hat[1],  r.alpha_hat[2],    r.alpha_hat[3],    r.inputs.delta_spark,
            r.inputs.mdot_fc, r.inputs.mdot_ai};
        line.clear();
        for (std::size_t i = 0; i < kCsvColumns; ++i) {
            if (i) line += ',';
            line += format_number(row[i]);
        }
        out << line << '\n';
    }
}

TrajectoryLog read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || chomp(line) != kCsvHeader) {
        throw DsmcError(ErrorKind::SchemaMismatch, "CSV header does not match the log schema");
    }
    TrajectoryLog log;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = chomp(line);
        if (text.empty()) continue;
        std::vector<double> v;
        v.reserve(kCsvColumns);
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            v.push_back(parse_field(text.substr(start, comma - start), line_no));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (v.size() != kCsvColumns) {
            throw DsmcError(ErrorKind::SchemaMismatch,
                            "expected " + std::to_string(kCsvColumns) + " fields on line " +
                                std::to_string(line_no));
        }
        LogRecord r;
        r.time = v[0];
        r.state.t_exh = v[1];
        r.t_exh_d = v[2];
        r.state.mdot_f = v[3];
        r.mdot_f_d = v[4];
        r.state.omega_e = v[5];
        r.omega_d = v[6];
        r.state.m_a = v[7];
        r.m_a_d = v[8];
        r.state.afr = v[9];
        r.afr_d = v[10];
        r.sliding = {v[11], v[12], v[13], v[14]};
        r.alpha_hat = {v[15], v[16], v[17], v[18]};
        r.inputs = {v[19], v[20], v[21]};
        log.records.push_back(r);
    }
    if (log.records.size() >= 2) {
        log.sampling_time = log.records[1].time - log.records[0].time;
    }
    return log;
}

std::string format_metrics(const MetricsReport& report) {
    std::string out = fmt::format("{:<6} {:<8} {:>14}\n", "output", "unit", "mean |e|");
    for (auto o : kTrackedOutputs) {
        out += fmt::format("{:<6} {:<8} {:>14.6g}\n", output_label(o), output_unit(o), report[o]);
    }
    return out;
}

std::string format_comparison(const MetricsReport& a, const MetricsReport& b,
                              const std::array<double, 3>& improvement) {
    std::string out = fmt::format("{:<6} {:<8} {:>14} {:>14} {:>12}\n", "output", "unit",
                                  "mean |e| (a)", "mean |e| (b)", "change");
    for (auto o : kTrackedOutputs) {
        const auto i = static_cast<std::size_t>(o);
        out += fmt::format("{:<6} {:<8} {:>14.6g} {:>14.6g} {:>11.1f}%\n", output_label(o),
                           output_unit(o), a[o], b[o], -improvement[i]);
    }
    return out;
}

std::string format_table1(const Table1& table) {
    std::string out = "Mean tracking errors; parentheses: change of the 2nd-order DSMC "
                      "relative to the 1st-order reference\n";
    out += fmt::format("{:<14}", "");
    for (const auto& col : table.columns) {
        out += fmt::format("| {:^33} ", fmt::format("T = {:g} ms", col.sampling_time * 1e3));
    }
    out += '\n';
    out += fmt::format("{:<14}", "");
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += fmt::format("| {:>12} {:>20} ", "1st-order", "2nd-order");
    }
    out += '\n';
    for (auto o : kTrackedOutputs) {
        const auto idx = static_cast<std::size_t>(o);
        out += fmt::format("{:<14}", fmt::format("{} {}", output_label(o), output_unit(o)));
        for (const auto& col : table.columns) {
            out += fmt::format("| {:>12.4g} {:>10.4g} ({:>+6.1f}%) ", col.first[o], col.second[o],
                               -col.improvement[idx]);
        }
        out += '\n';
    }
    return out;
}

std::string format_stability(const std::array<lyapunov::StabilityReport, 4>& reports,
                             const SimConfig& config) {
    const auto gains = config.effective_gains();
    std::string out = fmt::format("{:<8} {:>6} {:>10} {:>12} {:>14} {:>16} {:>14}\n", "channel",
                                  "beta", "certified", "converged_s", "final_atilde",
                                  "max_dV_after_tr", "transient");
    for (engine::Channel c : engine::kChannels) {
        const auto i = static_cast<std::size_t>(c);
        const auto& r = reports[i];
        const std::string converged =
            r.adaptation_convergence_step
                ? fmt::format("{:.3f}", static_cast<double>(*r.adaptation_convergence_step) *
                                            config.sampling_time)
                : std::string("never");
        out += fmt::format("{:<8} {:>6.3g} {:>10} {:>12} {:>14.6g} {:>16.6g} {:>14}\n",
                           engine::channel_name(c), gains[i].beta,
                           r.beta_certified ? "yes" : "no", converged, r.final_alpha_tilde,
                           r.max_delta_v_after_transient, r.transient_steps);
    }
    return out;
}

void write_plot_data(const TrajectoryLog& log, std::ostream& out) {
    out << "# time texh texh_d afr afr_d rpm rpm_d mdot_f mdot_f_d m_a m_a_d "
           "alpha_hat_texh alpha_hat_mf alpha_hat_we alpha_hat_ma\n";
    for (const auto& r : log.records) {
        const double row[] = {r.time,
                              r.state.t_exh,
                              r.t_exh_d,
                              r.state.afr,
                              r.afr_d,
                              engine::rad_per_s_to_rpm(r.state.omega_e),
                              engine::rad_per_s_to_rpm(r.omega_d),
                              r.state.mdot_f,
                              r.mdot_f_d,
                              r.state.m_a,
                              r.m_a_d,
                              r.alpha_hat[0],
                              r.alpha_hat[1],
                              r.alpha_hat[2],
                              r.alpha_hat[3]};
        std::string line;
        for (double v : row) {
            if (!line.empty()) line += ' ';
            line += format_number(v);
        }
        out << line << '\n';
    }
}

std::string plot_script(std::string_view data_file) {
    return fmt::format(
        "# gnuplot -persist {0}.gp\n"
        "set multiplot layout 4,1\n"
        "set xlabel 'time [s]'\n"
        "set ylabel 'AFR [-]'\n"
        "plot '{0}' using 1:4 with lines title 'AFR', '' using 1:5 with lines dt 2 title 'AFR_d'\n"
        "set ylabel 'Texh [degC]'\n"
        "plot '{0}' using 1:2 with lines title 'Texh', '' using 1:3 with lines dt 2 title 'Texh_d'\n"
        "set ylabel 'N [RPM]'\n"
        "plot '{0}' using 1:6 with lines title 'N', '' using 1:7 with lines dt 2 title 'N_d'\n"
        "set ylabel 'alpha_hat [-]'\n"
        "plot '{0}' using 1:12 with lines title 'texh', '' using 1:13 with lines title 'mdot_f', "
        "'' using 1:14 with lines title 'omega_e', '' using 1:15 with lines title 'm_a'\n"
        "unset multiplot\n",
        data_file);
}

}  // namespace dsmc::sim
