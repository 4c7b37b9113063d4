#include "dsmc/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsmc/error.hpp"

namespace dsmc::lyapunov {

double lyapunov_value(double s_next, double s, double atilde_next, double atilde, double beta,
                      double rho) noexcept {
    return 0.5 * (s_next * s_next + beta * s * s) +
           0.5 * rho * (atilde_next * atilde_next + beta * atilde * atilde);
}

double delta_v_closed_form(double beta, double s) noexcept {
    const double poly = -beta * beta * beta - beta * beta + beta + 1.0;
    return -0.5 * beta * poly * s * s;
}

bool certify_beta(double beta) noexcept { return beta > 0.0 && beta < 1.0; }

std::optional<std::size_t> convergence_step(std::span<const double> alpha_hat, double alpha_true,
                                            const ConvergenceCriterion& criterion) {
    const double tol = criterion.relative_tolerance * std::abs(alpha_true);
    const std::size_t need = std::max<std::size_t>(criterion.persistence_steps, 1);
    std::size_t run = 0;
    for (std::size_t k = 0; k < alpha_hat.size(); ++k) {
        if (std::abs(alpha_true - alpha_hat[k]) < tol) {
            if (++run == need) return k + 1 - need;
        } else {
            run = 0;
        }
    }
    return std::nullopt;
}

StabilityReport analyze_trajectory(const ChannelSeries& series,
                                   std::optional<std::size_t> transient_steps,
                                   const ConvergenceCriterion& criterion) {
    const std::size_t n = series.sliding.size();
    if (n < 3 || series.alpha_hat.size() != n) {
        throw DsmcError(ErrorKind::LogTooShort,
                        "stability analysis needs at least 3 aligned samples");
    }

    StabilityReport report;
    report.beta_certified = certify_beta(series.beta);
    report.adaptation_convergence_step =
        convergence_step(series.alpha_hat, series.alpha_true, criterion);
    report.final_alpha_tilde = series.alpha_true - series.alpha_hat[n - 1];

    // V(k) is defined for k = 0 .. n-2 since it looks one sample ahead.
    std::vector<double> v(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double at = series.alpha_true - series.alpha_hat[k];
        const double at_next = series.alpha_true - series.alpha_hat[k + 1];
        v[k] = lyapunov_value(series.sliding[k + 1], series.sliding[k], at_next, at, series.beta,
                              series.rho);
    }
    report.delta_v_series.resize(n - 2);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        report.delta_v_series[k] = v[k + 1] - v[k];
    }

    report.transient_steps =
        transient_steps.value_or(report.adaptation_convergence_step.value_or(0));
    double max_dv = -std::numeric_limits<double>::infinity();
    for (std::size_t k = report.transient_steps; k < report.delta_v_series.size(); ++k) {
        max_dv = std::max(max_dv, report.delta_v_series[k]);
    }
    report.max_delta_v_after_transient = std::isfinite(max_dv) ? max_dv : 0.0;
    return report;
}

StabilityReport analyze_trajectory(const ChannelTrace& trace,
                                   std::optional<std::size_t> transient_steps,
                                   const ConvergenceCriterion& criterion) {
    const auto s = trace.sliding();
    const auto a = trace.alpha_hat();
    return analyze_trajectory(ChannelSeries{s, a, trace.beta, trace.rho, trace.alpha_true},
                              transient_steps, criterion);
}

}  // namespace dsmc::lyapunov
