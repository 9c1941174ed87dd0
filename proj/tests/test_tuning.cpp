#include <doctest.h>

#include <cmath>
#include <random>

#include "aml/error.hpp"
#include "aml/rng.hpp"
#include "aml/tuning.hpp"

using namespace aml;

namespace {

std::vector<Vector> path_1d(std::initializer_list<double> xs) {
    std::vector<Vector> out;
    for (double x : xs) out.push_back({x});
    return out;
}

}  // namespace

TEST_CASE("student_t_cdf") {
    for (double df : {0.5, 1.0, 3.0, 30.0, 1e6}) CHECK(student_t_cdf(0.0, df) == doctest::Approx(0.5));
    CHECK(student_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(student_t_cdf(INFINITY, 4.0) == 1.0);
    CHECK(student_t_cdf(-INFINITY, 4.0) == 0.0);
    CHECK(student_t_cdf(1e300, 4.0) == doctest::Approx(1.0));
    CHECK_THROWS(student_t_cdf(1.0, 0.0));
    CHECK_THROWS(student_t_cdf(1.0, -2.0));
    for (double df : {1.0, 2.5, 10.0, 200.0}) {
        for (double t : {0.1, 0.7, 1.96, 4.0, 12.0}) {
            CHECK(std::abs(student_t_cdf(-t, df) + student_t_cdf(t, df) - 1.0) < 1e-9);
        }
        // df = 2 closed form: 1/2 + t / (2 sqrt(t^2 + 2))
        CHECK(student_t_cdf(1.5, 2.0) == doctest::Approx(0.5 + 1.5 / (2.0 * std::sqrt(4.25))));
    }
}

TEST_CASE("trend_test") {
    CHECK_THROWS(trend_test(path_1d({1.0, 2.0}), 0.05));

    std::vector<Vector> constant(50, Vector{3.0, -1.0});
    const auto none = trend_test(constant, 0.05);
    CHECK_FALSE(none.detected[0]);
    CHECK_FALSE(none.detected[1]);

    std::vector<Vector> drift;
    for (int k = 0; k < 100; ++k) drift.push_back({0.01 * k, 5.0});
    const auto hit = trend_test(drift, 0.05);
    CHECK(hit.detected[0]);
    CHECK_FALSE(hit.detected[1]);

    // shift invariance
    Stream rng(4);
    std::normal_distribution<double> z;
    std::vector<Vector> walk{{0.0, 0.0}};
    for (int k = 0; k < 200; ++k) walk.push_back({walk.back()[0] + z(rng) + 0.2, walk.back()[1] + z(rng)});
    auto shifted = walk;
    for (auto& v : shifted) {
        v[0] += 123.0;
        v[1] -= 7.0;
    }
    const auto a = trend_test(walk, 0.05);
    const auto b = trend_test(shifted, 0.05);
    CHECK(a.detected == b.detected);
    CHECK(a.p_values[0] == doctest::Approx(b.p_values[0]));
}

TEST_CASE("range_test") {
    const ParameterSpace box({0.0}, {10.0});
    CHECK(range_test(path_1d({4.0, 4.0, 4.0}), box, 0.7) == std::vector<bool>{false});
    CHECK(range_test(path_1d({1.0, 5.0, 8.5}), box, 0.7) == std::vector<bool>{true});
    CHECK(range_test(path_1d({1.0, 5.0, 8.0}), box, 0.7) == std::vector<bool>{false});
    CHECK(range_test(path_1d({101.0, 105.0, 108.5}), box, 0.7) == std::vector<bool>{true});
}

TEST_CASE("convergence_test") {
    const Vector same{1.0, 2.0, 3.0, 4.0};
    CHECK_FALSE(convergence_test(same, same, 0.05).growth_detected);
    CHECK_THROWS(convergence_test(Vector{1.0}, Vector{2.0, 3.0}, 0.05));

    CHECK(convergence_test(Vector{1.0, 1.0}, Vector{2.0, 2.0}, 0.05).growth_detected);
    CHECK_FALSE(convergence_test(Vector{2.0, 2.0}, Vector{1.0, 1.0}, 0.05).growth_detected);

    Stream rng(9);
    std::normal_distribution<double> z;
    int power = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Vector old(100);
        Vector now(100);
        for (double& v : old) v = z(rng);
        for (double& v : now) v = 5.0 + z(rng);
        power += convergence_test(old, now, 0.05).growth_detected ? 1 : 0;
        Vector lower = old;
        for (double& v : lower) v -= 10.0;
        CHECK_FALSE(convergence_test(old, lower, 0.05).growth_detected);
    }
    CHECK(power == 200);
}

TEST_CASE("apply_adjustments") {
    GainSchedule s;
    s.a = {3.0, 1.0, 2.0};
    s.A = 7;
    s.c = 0.02;
    const auto none = apply_adjustments({false, false, false}, {false, false, false}, s, 1.5);
    CHECK_FALSE(none.a_adjusted);
    CHECK(none.schedule.a == s.a);

    const auto trend = apply_adjustments({false, true, false}, {false, false, false}, s, 1.5);
    CHECK(trend.a_adjusted);
    CHECK(trend.schedule.a[1] == doctest::Approx(1.5));

    const auto both = apply_adjustments({true, false, false}, {true, false, true}, s, 1.5);
    CHECK(both.schedule.a[0] == doctest::Approx(2.0));
    CHECK(both.schedule.a[2] == doctest::Approx(2.0 / 1.5));
    CHECK(both.schedule.c == s.c);
    CHECK(both.schedule.A == s.A);
    CHECK(both.schedule.alpha == s.alpha);
    CHECK(both.schedule.gamma == s.gamma);
}

TEST_CASE("calibrate_gains") {
    const ParameterSpace box({0.0}, {1.0});
    TuningConfig cfg;
    cfg.K = 10000;
    cfg.b = {0.1};
    Stream rng(1);
    const PairEvaluator linear = [](std::span<const double> plus, std::span<const double> minus,
                                    Stream&) { return std::pair{2.0 * plus[0], 2.0 * minus[0]}; };
    CHECK(calibrate_gains(Vector{0.5}, box, cfg, linear, rng).schedule.A == 1000);

    cfg.K = 90;
    const auto cal = calibrate_gains(Vector{0.5}, box, cfg, linear, rng);
    CHECK(cal.schedule.A == 9);
    CHECK(cal.median_gradient[0] == doctest::Approx(2.0));
    CHECK(cal.schedule.a[0] == doctest::Approx(0.5));
    CHECK(cal.schedule.c == doctest::Approx(0.02));

    const PairEvaluator flat = [](std::span<const double>, std::span<const double>, Stream&) {
        return std::pair{0.0, 0.0};
    };
    CHECK(calibrate_gains(Vector{0.5}, box, cfg, flat, rng).schedule.a[0] == doctest::Approx(1.0));
}

TEST_CASE("convergence tracker three-in-a-row") {
    ConvergenceTracker t;
    t.record(false, false);
    t.record(false, false);
    CHECK_FALSE(t.converged());
    t.record(false, true);
    CHECK(t.consecutive() == 0);
    t.record(false, false);
    t.record(true, false);
    CHECK(t.consecutive() == 0);
    t.record(false, false);
    t.record(false, false);
    t.record(false, false);
    CHECK(t.converged());
}

TEST_CASE("tuning config validation") {
    TuningConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.f = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TuningConfig{};
    cfg.K0 = cfg.K + 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TuningConfig{};
    cfg.range_span_threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
