#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dsmc/error.hpp"
#include "dsmc/sim.hpp"

namespace dsmc::sim {

namespace {

double parse_double(std::string_view token) {
    std::string text(token);
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    double value = 0.0;
    in >> value;
    if (in.fail() || !in.eof() || !std::isfinite(value)) {
        throw DsmcError(ErrorKind::ConfigError, "not a number: '" + text + "'");
    }
    return value;
}

}  // namespace

TrajectoryProfile::TrajectoryProfile(Shape shape, std::vector<Setpoint> setpoints)
    : shape_(shape), setpoints_(std::move(setpoints)) {
    if (setpoints_.empty()) {
        throw DsmcError(ErrorKind::ConfigError, "trajectory profile needs at least one setpoint");
    }
    if (shape_ == Shape::Constant && setpoints_.size() != 1) {
        throw DsmcError(ErrorKind::ConfigError, "constant profile takes exactly one value");
    }
    for (std::size_t i = 1; i < setpoints_.size(); ++i) {
        if (!(setpoints_[i].time > setpoints_[i - 1].time)) {
            throw DsmcError(ErrorKind::ConfigError,
                            "trajectory setpoint times must be strictly increasing");
        }
    }
}

TrajectoryProfile TrajectoryProfile::constant(double value) {
    return TrajectoryProfile(Shape::Constant, {{0.0, value}});
}

TrajectoryProfile TrajectoryProfile::ramp(double from, double to, double t0, double t1) {
    return TrajectoryProfile(Shape::Ramp, {{t0, from}, {t1, to}});
}

TrajectoryProfile TrajectoryProfile::smoothstep(double from, double to, double t0, double t1) {
    return TrajectoryProfile(Shape::Smoothstep, {{t0, from}, {t1, to}});
}

TrajectoryProfile TrajectoryProfile::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string kind;
    in >> kind;
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);

    if (kind == "constant") {
        if (tokens.size() != 1) {
            throw DsmcError(ErrorKind::ConfigError, "constant profile takes exactly one value");
        }
        return constant(parse_double(tokens[0]));
    }
    Shape shape;
    if (kind == "ramp") {
        shape = Shape::Ramp;
    } else if (kind == "smoothstep") {
        shape = Shape::Smoothstep;
    } else {
        throw DsmcError(ErrorKind::ConfigError,
                        "unknown profile kind '" + kind + "' (constant, ramp, smoothstep)");
    }
    if (tokens.size() < 2) {
        throw DsmcError(ErrorKind::ConfigError, kind + " profile needs at least two value@time points");
    }
    std::vector<Setpoint> points;
    for (const auto& tok : tokens) {
        const auto at = tok.find('@');
        if (at == std::string::npos) {
            throw DsmcError(ErrorKind::ConfigError, "expected value@time, got '" + tok + "'");
        }
        points.push_back({parse_double(std::string_view(tok).substr(at + 1)),
                          parse_double(std::string_view(tok).substr(0, at))});
    }
    return TrajectoryProfile(shape, std::move(points));
}

double TrajectoryProfile::at(double time) const {
    if (time <= setpoints_.front().time) return setpoints_.front().value;
    if (time >= setpoints_.back().time) return setpoints_.back().value;
    const auto upper = std::upper_bound(
        setpoints_.begin(), setpoints_.end(), time,
        [](double t, const Setpoint& p) { return t < p.time; });
    const auto& b = *upper;
    const auto& a = *(upper - 1);
    const double u = (time - a.time) / (b.time - a.time);
    const double w = shape_ == Shape::Smoothstep ? u * u * (3.0 - 2.0 * u) : u;
    return a.value + (b.value - a.value) * w;
}

std::vector<double> TrajectoryProfile::sample(double sampling_time, std::size_t count) const {
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = at(static_cast<double>(k) * sampling_time);
    }
    return out;
}

double TrajectoryProfile::shortest_feature_period() const {
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < setpoints_.size(); ++i) {
        shortest = std::min(shortest, setpoints_[i].time - setpoints_[i - 1].time);
    }
    return shortest;
}

std::string TrajectoryProfile::to_string() const {
    std::string out;
    switch (shape_) {
        case Shape::Constant: return "constant " + format_number(setpoints_.front().value);
        case Shape::Ramp: out = "ramp"; break;
        case Shape::Smoothstep: out = "smoothstep"; break;
    }
    for (const auto& p : setpoints_) {
        out += ' ';
        out += format_number(p.value);
        out += '@';
        out += format_number(p.time);
    }
    return out;
}

}  // namespace dsmc::sim
