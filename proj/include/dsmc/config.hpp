#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dsmc/sim.hpp"

namespace dsmc::cli {

/// Output file names, relative to the run's output directory.
struct OutputSpec {
    std::string log_csv = "log.csv";
    std::string metrics_txt = "metrics.txt";
    std::string stability_txt = "stability.txt";
    std::string plot_dat = "trajectory.dat";
    std::string plot_script = "trajectory.gp";
};

struct ExperimentConfig {
    sim::SimConfig sim;
    OutputSpec output;
};

/// Parses the sectioned key-value experiment format. Unknown sections or keys
/// are ConfigError. Missing keys keep their defaults.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Renders a config back into the file format; parse_config() of the result
/// reproduces the same settings.
[[nodiscard]] std::string render_config(const ExperimentConfig& config);

}  // namespace dsmc::cli
