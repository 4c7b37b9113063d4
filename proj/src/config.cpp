#include "dsmc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dsmc/error.hpp"

namespace dsmc::cli {

namespace {

using engine::Channel;
using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Section = std::map<std::string, Setter, std::less<>>;

[[noreturn]] void fail(const std::string& message) {
    throw DsmcError(ErrorKind::ConfigError, message);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    double v = 0.0;
    in >> v;
    if (in.fail() || !in.eof() || !std::isfinite(v)) {
        fail(key + ": expected a number, got '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "on" || text == "true" || text == "yes" || text == "1") return true;
    if (text == "off" || text == "false" || text == "no" || text == "0") return false;
    fail(key + ": expected on/off, got '" + text + "'");
}

std::size_t to_count(const std::string& key, const std::string& text) {
    const double v = to_double(key, text);
    if (v < 1.0 || v != std::floor(v)) fail(key + ": expected a positive integer");
    return static_cast<std::size_t>(v);
}

sim::TrajectoryProfile to_profile(const std::string& key, const std::string& text) {
    try {
        return sim::TrajectoryProfile::parse(text);
    } catch (const DsmcError& e) {
        fail(key + ": " + e.detail());
    }
}

sim::GainSettings& gains_of(ExperimentConfig& c, Channel ch) {
    return c.sim.gains[static_cast<std::size_t>(ch)];
}

constexpr std::pair<const char*, Channel> kChannelKeys[] = {
    {"texh", Channel::Texh}, {"mf", Channel::Fuel}, {"we", Channel::Speed}, {"ma", Channel::Air}};

const std::map<std::string, Section, std::less<>>& schema() {
    static const auto table = [] {
        std::map<std::string, Section, std::less<>> t;
        auto& simulation = t["simulation"];
        simulation["sampling_time_ms"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.sampling_time = to_double("sampling_time_ms", v) * 1e-3;
        };
        simulation["horizon_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.horizon = to_double("horizon_s", v);
        };
        simulation["order"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "1" || v == "first") {
                c.sim.order = sim::ControllerOrder::First;
            } else if (v == "2" || v == "second") {
                c.sim.order = sim::ControllerOrder::Second;
            } else {
                fail("order: expected 1 or 2, got '" + v + "'");
            }
        };
        simulation["adaptation"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.adaptation = to_bool("adaptation", v);
        };
        simulation["rate_mode"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "single") {
                c.sim.rate_mode = sim::RateMode::SingleRate;
            } else if (v == "multirate") {
                c.sim.rate_mode = sim::RateMode::Multirate;
            } else {
                fail("rate_mode: expected single or multirate, got '" + v + "'");
            }
        };
        simulation["plant_substeps"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.plant_substeps = to_count("plant_substeps", v);
        };
        simulation["speed_lookahead"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "model") {
                c.sim.speed_lookahead = engine::SpeedLookahead::Model;
            } else if (v == "sliding") {
                c.sim.speed_lookahead = engine::SpeedLookahead::Sliding;
            } else {
                fail("speed_lookahead: expected model or sliding, got '" + v + "'");
            }
        };
        simulation["settling_exclusion_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.settling_exclusion = to_double("settling_exclusion_s", v);
        };
        simulation["clamp_eta_vol"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.params.clamp_eta_vol = to_bool("clamp_eta_vol", v);
        };

        auto& uncertainty = t["uncertainty"];
        auto& gains = t["gains"];
        for (const auto& [suffix, ch] : kChannelKeys) {
            const std::string s(suffix);
            const Channel channel = ch;
            uncertainty["alpha_" + s] = [channel, s](ExperimentConfig& c, const std::string& v) {
                const double a = to_double("alpha_" + s, v);
                auto& u = c.sim.uncertainty;
                switch (channel) {
                    case Channel::Texh: u.alpha_texh = a; break;
                    case Channel::Fuel: u.alpha_mf = a; break;
                    case Channel::Speed: u.alpha_we = a; break;
                    case Channel::Air: u.alpha_ma = a; break;
                }
            };
            gains["beta_" + s] = [channel, s](ExperimentConfig& c, const std::string& v) {
                gains_of(c, channel).beta = to_double("beta_" + s, v);
            };
            gains["rho_" + s] = [channel, s](ExperimentConfig& c, const std::string& v) {
                if (v == "auto") {
                    gains_of(c, channel).rho.reset();
                } else {
                    gains_of(c, channel).rho = to_double("rho_" + s, v);
                }
            };
            gains["alpha_hat0_" + s] = [channel, s](ExperimentConfig& c, const std::string& v) {
                gains_of(c, channel).alpha_hat0 = to_double("alpha_hat0_" + s, v);
            };
        }

        auto& initial = t["initial"];
        initial["texh_degc"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.initial.t_exh = to_double("texh_degc", v);
        };
        initial["mdot_f_kg_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.initial.mdot_f = to_double("mdot_f_kg_s", v);
        };
        initial["omega_e_rad_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.initial.omega_e = to_double("omega_e_rad_s", v);
        };
        initial["m_a_kg"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "consistent") {
                c.sim.initial.m_a.reset();
            } else {
                c.sim.initial.m_a = to_double("m_a_kg", v);
            }
        };

        auto& traj = t["trajectories"];
        traj["texh_d_degc"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.trajectories.t_exh_d = to_profile("texh_d_degc", v);
        };
        traj["omega_d_rad_s"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.trajectories.omega_d = to_profile("omega_d_rad_s", v);
        };
        traj["afr_d"] = [](ExperimentConfig& c, const std::string& v) {
            c.sim.trajectories.afr_d = to_profile("afr_d", v);
        };

        auto& output = t["output"];
        output["log_csv"] = [](ExperimentConfig& c, const std::string& v) { c.output.log_csv = v; };
        output["metrics_txt"] = [](ExperimentConfig& c, const std::string& v) {
            c.output.metrics_txt = v;
        };
        output["stability_txt"] = [](ExperimentConfig& c, const std::string& v) {
            c.output.stability_txt = v;
        };
        output["plot_dat"] = [](ExperimentConfig& c, const std::string& v) { c.output.plot_dat = v; };
        output["plot_script"] = [](ExperimentConfig& c, const std::string& v) {
            c.output.plot_script = v;
        };
        return t;
    }();
    return table;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(std::string("malformed config: ") + e.message() + " (line " +
             std::to_string(e.line()) + ")");
    }

    ExperimentConfig config;
    const auto& sections = schema();
    for (const auto& [section_name, section] : tree) {
        const auto found = sections.find(section_name);
        if (found == sections.end()) {
            if (section.empty() && !section.data().empty()) {
                fail("key '" + section_name + "' appears outside any section");
            }
            fail("unknown section [" + section_name + "]");
        }
        for (const auto& [key, node] : section) {
            const auto setter = found->second.find(key);
            if (setter == found->second.end()) {
                fail("unknown key '" + key + "' in section [" + section_name + "]");
            }
            setter->second(config, trim(node.data()));
        }
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const ExperimentConfig& config) {
    const auto& s = config.sim;
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "[simulation]\n"
        << "sampling_time_ms = " << sim::format_number(s.sampling_time * 1e3) << '\n'
        << "horizon_s = " << sim::format_number(s.horizon) << '\n'
        << "order = " << (s.order == sim::ControllerOrder::First ? 1 : 2) << '\n'
        << "adaptation = " << (s.adaptation ? "on" : "off") << '\n'
        << "rate_mode = " << (s.rate_mode == sim::RateMode::SingleRate ? "single" : "multirate")
        << '\n'
        << "plant_substeps = " << s.plant_substeps << '\n'
        << "speed_lookahead = "
        << (s.speed_lookahead == engine::SpeedLookahead::Model ? "model" : "sliding") << '\n'
        << "settling_exclusion_s = " << sim::format_number(s.settling_exclusion) << '\n'
        << "clamp_eta_vol = " << (s.params.clamp_eta_vol ? "on" : "off") << "\n\n";

    out << "[uncertainty]\n";
    for (const auto& [suffix, ch] : kChannelKeys) {
        out << "alpha_" << suffix << " = "
            << sim::format_number(engine::channel_alpha(ch, s.uncertainty)) << '\n';
    }
    out << "\n[gains]\n";
    for (const auto& [suffix, ch] : kChannelKeys) {
        const auto& g = s.gains[static_cast<std::size_t>(ch)];
        out << "beta_" << suffix << " = " << sim::format_number(g.beta) << '\n'
            << "rho_" << suffix << " = " << (g.rho ? sim::format_number(*g.rho) : "auto") << '\n'
            << "alpha_hat0_" << suffix << " = " << sim::format_number(g.alpha_hat0) << '\n';
    }
    out << "\n[initial]\n"
        << "texh_degc = " << sim::format_number(s.initial.t_exh) << '\n'
        << "mdot_f_kg_s = " << sim::format_number(s.initial.mdot_f) << '\n'
        << "omega_e_rad_s = " << sim::format_number(s.initial.omega_e) << '\n'
        << "m_a_kg = " << (s.initial.m_a ? sim::format_number(*s.initial.m_a) : "consistent")
        << "\n\n";
    out << "[trajectories]\n"
        << "texh_d_degc = " << s.trajectories.t_exh_d.to_string() << '\n'
        << "omega_d_rad_s = " << s.trajectories.omega_d.to_string() << '\n'
        << "afr_d = " << s.trajectories.afr_d.to_string() << "\n\n";
    out << "[output]\n"
        << "log_csv = " << config.output.log_csv << '\n'
        << "metrics_txt = " << config.output.metrics_txt << '\n'
        << "stability_txt = " << config.output.stability_txt << '\n'
        << "plot_dat = " << config.output.plot_dat << '\n'
        << "plot_script = " << config.output.plot_script << '\n';
    return out.str();
}

}  // namespace dsmc::cli
