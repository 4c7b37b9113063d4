#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dsmc/core.hpp"
#include "dsmc/error.hpp"
#include "oracles.hpp"

using Catch::Approx;
using dsmc::DsmcChannel;
using dsmc::DsmcError;
using dsmc::ErrorKind;
using dsmc::ScalarAffinePlant;

namespace {

ScalarAffinePlant decay_plant(double alpha_true = 1.0) {
    return {[](double x) { return -x; }, [](double) { return 1.0; }, alpha_true};
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DsmcError& e) {
        return e.kind();
    }
    FAIL("expected a DsmcError");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("sliding variable is the tracking error", "[core]") {
    CHECK(dsmc::sliding_variable(5.0, 5.0) == 0.0);
    CHECK(dsmc::sliding_variable(7.5, 5.0) == 2.5);
    CHECK(dsmc::sliding_variable(-1.0, 2.0) == -3.0);
}

TEST_CASE("xi combines consecutive sliding values", "[core]") {
    CHECK(dsmc::xi_variable(0.0, 0.0, 0.5) == 0.0);
    CHECK(dsmc::xi_variable(-0.5, 1.0, 0.5) == 0.0);
    CHECK(dsmc::xi_variable(0.2, 0.4, 0.25) == Approx(0.3).epsilon(1e-15));
}

TEST_CASE("euler step of the affine plant", "[core]") {
    ScalarAffinePlant still{[](double) { return 0.0; }, [](double) { return 1.0; }, 1.0};
    CHECK(dsmc::euler_step(still, 3.7, 0.0, 0.1) == 3.7);

    const auto plant = decay_plant();
    CHECK(dsmc::euler_step(plant, 1.0, 0.0, 0.1) == Approx(0.9).epsilon(1e-15));
    CHECK(dsmc::euler_step(plant, 1.0, 10.0, 0.1) == Approx(1.9).epsilon(1e-15));
}

TEST_CASE("euler step rejects a vanishing gain and overflow", "[core][errors]") {
    ScalarAffinePlant no_gain{[](double x) { return -x; }, [](double) { return 0.0; }, 1.0};
    CHECK(kind_of([&] { (void)dsmc::euler_step(no_gain, 1.0, 1.0, 0.1); }) ==
          ErrorKind::ZeroInputGain);
    CHECK(kind_of([&] { (void)dsmc::euler_step(decay_plant(), 1.0, 1e308, 10.0); }) ==
          ErrorKind::NonFiniteState);
    CHECK(kind_of([&] { (void)dsmc::euler_step(decay_plant(), 1.0, 0.0, 0.0); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("channel construction validates gains", "[core][errors]") {
    CHECK_NOTHROW(DsmcChannel(0.0, 1.0, 0.01));
    CHECK(kind_of([] { DsmcChannel(1.0, 1.0, 0.01); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { DsmcChannel(-0.1, 1.0, 0.01); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { DsmcChannel(0.5, 0.0, 0.01); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { DsmcChannel(0.5, 1.0, -0.01); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { DsmcChannel(0.5, 1.0, 0.01, NAN); }) == ErrorKind::NonFiniteEstimate);
}

TEST_CASE("control law worked example", "[core]") {
    DsmcChannel ch(0.5, 1.0, 0.1, 1.0);
    CHECK(ch.compute_control(1.0, 0.0, 1.0, 2.0, 1.0) == Approx(-2.0).epsilon(1e-14));
    CHECK(kind_of([&] { (void)ch.compute_control(1.0, 0.0, 1.0, 2.0, 0.0); }) ==
          ErrorKind::ZeroInputGain);
}

TEST_CASE("input clamp is off by default and limits when set", "[core]") {
    DsmcChannel ch(0.5, 1.0, 0.1);
    CHECK(ch.compute_control(0.0, 0.0, 100.0, 0.0, 1.0) == Approx(1000.0));
    ch.set_input_limits(-5.0, 5.0);
    CHECK(ch.compute_control(0.0, 0.0, 100.0, 0.0, 1.0) == 5.0);
    ch.clear_input_limits();
    CHECK(ch.compute_control(0.0, 0.0, 100.0, 0.0, 1.0) == Approx(1000.0));
    CHECK_THROWS_AS(ch.set_input_limits(1.0, -1.0), DsmcError);
}

TEST_CASE("adaptation update", "[core]") {
    DsmcChannel ch(0.5, 0.5, 0.01, 0.8);
    CHECK(ch.update_adaptation(0.0, 2.0) == 0.8);
    CHECK(ch.update_adaptation(0.1, 2.0) == Approx(0.804).epsilon(1e-14));

    DsmcChannel frozen(0.5, 0.5, 0.01, 0.8, false);
    CHECK(frozen.update_adaptation(0.1, 2.0) == 0.8);

    DsmcChannel wild(0.5, 1e-300, 1.0, 0.0);
    CHECK(kind_of([&] { (void)wild.update_adaptation(1e300, 1e300); }) ==
          ErrorKind::NonFiniteEstimate);
}

TEST_CASE("perfect model lands on the second-order manifold", "[core][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> x_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> beta_dist(0.0, 0.99);
    std::uniform_real_distribution<double> alpha_dist(0.5, 1.5);
    for (int i = 0; i < 500; ++i) {
        const double alpha = alpha_dist(rng);
        const auto plant = decay_plant(alpha);
        DsmcChannel ch(beta_dist(rng), 1.0, 0.01, alpha);
        const double x = x_dist(rng);
        const double xd = x_dist(rng);
        const double xd_next = x_dist(rng);
        const auto r = dsmc::channel_step(plant, ch, x, xd, xd_next);
        const double s = x - xd;
        const double s_next = r.x_next - xd_next;
        CHECK(std::abs(s_next + ch.beta() * s) <= 1e-12 * (std::abs(x) + std::abs(xd_next) + 1.0));
    }
}

TEST_CASE("first-order law equals an independent deadbeat law", "[core][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> val(-100.0, 100.0);
    std::uniform_real_distribution<double> gain(0.1, 10.0);
    std::uniform_real_distribution<double> alpha(0.5, 1.5);
    std::uniform_real_distribution<double> period(1e-3, 0.1);
    for (int i = 0; i < 1000; ++i) {
        const double x = val(rng);
        const double xd = val(rng);
        const double xd_next = val(rng);
        const double f = val(rng);
        const double g = (i % 2 ? 1.0 : -1.0) * gain(rng);
        const double a = alpha(rng);
        const double T = period(rng);
        DsmcChannel ch(0.0, 1.0, T, a);
        const double u = ch.compute_control(x, x - xd, xd_next, f, g);
        const double expected = oracle::first_order_control(x, xd_next, f, g, a, T);
        CHECK(oracle::close_rel(u, expected, 1e-12));
    }
}

TEST_CASE("xi equals the drift-estimation residual", "[core][property]") {
    const double alpha_true = 1.3;
    const auto plant = decay_plant(alpha_true);
    DsmcChannel ch(0.4, 2.0, 0.02, 0.9);
    double x = 2.0;
    for (std::size_t k = 0; k < 50; ++k) {
        const double xd = std::sin(0.1 * static_cast<double>(k));
        const double xd_next = std::sin(0.1 * static_cast<double>(k + 1));
        const double alpha_hat = ch.alpha_hat();
        const auto r = dsmc::channel_step(plant, ch, x, xd, xd_next);
        const double expected = 0.02 * r.record.f_value * (alpha_true - alpha_hat);
        CHECK(r.record.xi == Approx(expected).epsilon(1e-9).margin(1e-15));
        x = r.x_next;
    }
}

TEST_CASE("matched closed loop decays geometrically", "[core]") {
    const auto plant = decay_plant();
    DsmcChannel ch(0.5, 1.0, 0.01, 1.0, false);
    const auto trace = dsmc::run_channel(plant, ch, 1.0, [](std::size_t) { return 0.0; }, 40);
    REQUIRE(trace.records.size() == 41);
    for (std::size_t k = 0; k <= 40; ++k) {
        const double s = trace.records[k].s;
        CHECK(std::abs(s - std::pow(-0.5, static_cast<double>(k))) <= 1e-12);
        if (k > 0) {
            CHECK(std::signbit(s) != std::signbit(trace.records[k - 1].s));
            CHECK(std::abs(s) < std::abs(trace.records[k - 1].s));
        }
    }
}

TEST_CASE("flat on-target trajectory holds the state", "[core]") {
    const auto plant = decay_plant(1.2);
    DsmcChannel ch(0.5, 1.0, 0.01, 1.2);
    const auto trace = dsmc::run_channel(plant, ch, 3.0, [](std::size_t) { return 3.0; }, 20);
    for (const auto& r : trace.records) {
        CHECK(r.s == Approx(0.0).margin(1e-14));
        CHECK(r.x == Approx(3.0).epsilon(1e-14));
    }
}

TEST_CASE("adaptive closed loop identifies the drift error", "[core]") {
    const auto plant = decay_plant(1.25);
    DsmcChannel ch(0.5, 0.02, 0.01, 1.0);
    const auto trace = dsmc::run_channel(
        plant, ch, 1.0, [](std::size_t k) { return std::cos(0.05 * static_cast<double>(k)); }, 3000);
    CHECK(trace.records.back().alpha_hat == Approx(1.25).margin(0.01));
}

TEST_CASE("adaptation is an exact discrete integrator", "[core][property]") {
    const auto plant = decay_plant(0.8);
    DsmcChannel ch(0.3, 0.2, 0.01, 1.0);
    const auto trace = dsmc::run_channel(
        plant, ch, 0.5, [](std::size_t k) { return 0.1 * static_cast<double>(k % 17); }, 400);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        sum += r.s * 0.01 * r.f_value / 0.2;
        const double drift = trace.records[k + 1].alpha_hat - trace.records[0].alpha_hat;
        CHECK(sum == Approx(drift).epsilon(1e-12).margin(1e-15));
    }
}

TEST_CASE("divergence guard trips with the step index", "[core][errors]") {
    const dsmc::DivergenceGuard guard(1.0, 1.0);
    CHECK(guard.limit() == 1e6);
    CHECK_NOTHROW(guard.check(9e5, 3, "x"));
    try {
        guard.check(2e6, 17, "x");
        FAIL("guard did not trip");
    } catch (const DsmcError& e) {
        CHECK(e.kind() == ErrorKind::DivergedRun);
        REQUIRE(e.step());
        CHECK(*e.step() == 17);
    }
    CHECK_THROWS_AS(guard.check(NAN, 0, "x"), DsmcError);

    const dsmc::DivergenceGuard on_manifold(0.0, 400.0);
    CHECK(on_manifold.limit() == Approx(1e6 * 0.4));
}

TEST_CASE("unstable closed loop aborts as a diverged run", "[core][errors]") {
    ScalarAffinePlant plant{[](double x) { return x; }, [](double) { return 1.0; }, 50.0};
    DsmcChannel ch(0.5, 1.0, 0.1, 1.0, false);
    try {
        (void)dsmc::run_channel(plant, ch, 1.0, [](std::size_t) { return 0.0; }, 1000);
        FAIL("run did not diverge");
    } catch (const DsmcError& e) {
        CHECK(e.kind() == ErrorKind::DivergedRun);
        CHECK(e.step().has_value());
    }
}
