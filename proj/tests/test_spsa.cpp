#include <doctest.h>

#include <cmath>
#include <set>

#include "aml/error.hpp"
#include "aml/rng.hpp"
#include "aml/spsa.hpp"
#include "oracles.hpp"

using namespace aml;

TEST_CASE("stream determinism and child independence") {
    Stream a(42);
    Stream b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());

    const Stream root(7);
    CHECK(root.child(1).key() == root.child(1).key());
    CHECK(root.child(1).key() != root.child(2).key());
    CHECK(root.child(1, 2).key() == root.child(1).child(2).key());
    CHECK(root.child(1, 2).key() != root.child(2, 1).key());

    std::set<std::uint64_t> keys;
    for (std::uint64_t t = 0; t < 1000; ++t) keys.insert(root.child(t).key());
    CHECK(keys.size() == 1000);

    Stream u(3);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        sum += x;
    }
    // mean of U(0,1): se = sqrt(1/12/1e5) ~ 9.1e-4
    CHECK(std::abs(sum / 100000.0 - 0.5) < 4e-3);
}

TEST_CASE("parameter space") {
    const ParameterSpace space({0.0, -10.0}, {10.0, 30.0});
    CHECK(space.range(1) == 40.0);
    CHECK(space.contains(Vector{0.0, 30.0}));
    CHECK_FALSE(space.contains(Vector{-1e-9, 0.0}));
    const Vector theta{2.5, 7.3};
    const Vector back = space.from_unit(space.to_unit(theta));
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(back[i] - theta[i]) <= 1e-12 * 40.0);
    CHECK_THROWS(ParameterSpace({1.0}, {1.0}));
    CHECK_THROWS(ParameterSpace({0.0, 0.0}, {1.0}));
}

TEST_CASE("gain_at") {
    GainSchedule s;
    s.a = {1.0};
    s.A = 9;
    s.c = 2.0;
    CHECK(gain_at(s, 1).a_k[0] == doctest::Approx(0.1));
    CHECK(gain_at(s, 1).c_k == doctest::Approx(2.0));
    CHECK(gain_at(s, 64).c_k == doctest::Approx(1.0));
    CHECK_THROWS(gain_at(s, 0));

    s.a = {0.3, 2.0, 7.0};
    for (std::uint64_t k = 1; k < 500; ++k) {
        const Gains now = gain_at(s, k);
        const Gains next = gain_at(s, k + 1);
        CHECK(next.c_k < now.c_k);
        for (std::size_t i = 0; i < 3; ++i) CHECK(next.a_k[i] < now.a_k[i]);
    }
}

TEST_CASE("sample_perturbation") {
    Stream a(99);
    Stream b(99);
    const auto d1 = sample_perturbation(a, 3);
    CHECK(d1 == sample_perturbation(b, 3));
    for (double v : d1.signs()) CHECK((v == 1.0 || v == -1.0));

    Stream rng(5);
    const int draws = 20000;
    std::vector<int> plus(4, 0);
    for (int i = 0; i < draws; ++i) {
        const auto d = sample_perturbation(rng, 4);
        for (std::size_t j = 0; j < 4; ++j) plus[j] += d[j] > 0 ? 1 : 0;
    }
    // fair coin: se = sqrt(0.25 / 20000) ~ 0.0035
    for (int c : plus) CHECK(std::abs(c / static_cast<double>(draws) - 0.5) < 0.015);
}

TEST_CASE("gradient_estimate") {
    const PerturbationVector d({1, -1});
    CHECK(gradient_estimate(d, 0.7, 0.7, 0.3).g == Vector{0.0, 0.0});
    const auto g = gradient_estimate(d, 1.0, 0.0, 0.5);
    CHECK(g.g[0] == doctest::Approx(1.0));
    CHECK(g.g[1] == doctest::Approx(-1.0));
    CHECK_THROWS(gradient_estimate(d, std::nan(""), 0.0, 0.5));
    CHECK_THROWS(gradient_estimate(d, -INFINITY, 0.0, 0.5));
    CHECK_THROWS(gradient_estimate(d, 1.0, 0.0, 0.0));
}

TEST_CASE("projection and clamp") {
    const ParameterSpace box({0.0}, {10.0});
    CHECK(project_to_feasible(Vector{4.0}, box, 1.0) == Vector{4.0});
    CHECK(project_to_feasible(Vector{9.5}, box, 1.0)[0] == doctest::Approx(9.0));
    CHECK(project_to_feasible(Vector{0.2}, box, 1.0)[0] == doctest::Approx(1.0));
    const ParameterSpace narrow({0.0}, {1.0});
    for (double t : {-3.0, 0.0, 0.5, 0.9, 7.0}) {
        CHECK(project_to_feasible(Vector{t}, narrow, 0.6)[0] == doctest::Approx(0.5));
    }

    CHECK(clamp_step(Vector{0.5}, box) == Vector{0.5});
    CHECK(clamp_step(Vector{3.0}, box)[0] == doctest::Approx(1.0));
    CHECK(clamp_step(Vector{-3.0}, box)[0] == doctest::Approx(-1.0));
}

TEST_CASE("update_iterate") {
    const ParameterSpace box({0.0}, {10.0});
    const PerturbationVector d({1});
    GradientEstimate zero;
    zero.g = {0.0};
    CHECK(update_iterate(Vector{9.9}, zero, Vector{1.0}, box, 0.5)[0] == doctest::Approx(9.5));

    GradientEstimate two;
    two.g = {2.0};
    CHECK(update_iterate(Vector{5.0}, two, Vector{0.1}, box, 0.5)[0] == doctest::Approx(5.2));
    CHECK(update_iterate(Vector{5.0}, two, Vector{10.0}, box, 0.5)[0] == doctest::Approx(6.0));
}

TEST_CASE("random updates stay feasible and bounded") {
    const ParameterSpace box({-1.0, 0.0, 5.0}, {1.0, 100.0, 6.0});
    Stream rng(17);
    Vector theta{0.0, 50.0, 5.5};
    for (int k = 1; k <= 2000; ++k) {
        const double c = 0.05 / std::pow(k, 1.0 / 6.0);
        const auto delta = sample_perturbation(rng, 3);
        const double jump = (rng.uniform01() - 0.5) * 1e4;
        const auto g = gradient_estimate(delta, jump, 0.0, c);
        const Vector next = update_iterate(theta, g, Vector{0.01, 1.0, 0.001}, box, c);
        CHECK(is_feasible(next, box, c));
        double max_range = 0.0;
        double max_move = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            max_range = std::max(max_range, box.range(i));
            max_move = std::max(max_move, std::abs(next[i] - theta[i]));
        }
        CHECK(max_move <= 0.1 * max_range + 1e-12);
        theta = next;
    }
}

TEST_CASE("spsa gradient mean over all perturbations equals the quadratic gradient") {
    Stream rng(123);
    for (std::size_t p : {1u, 2u, 3u, 5u, 8u}) {
        for (int rep = 0; rep < 10; ++rep) {
            oracle::Quadratic q{Vector(p), Vector(p)};
            Vector theta(p);
            for (std::size_t i = 0; i < p; ++i) {
                q.mu[i] = 10.0 * (rng.uniform01() - 0.5);
                q.D[i] = 0.1 + 3.0 * rng.uniform01();
                theta[i] = 10.0 * (rng.uniform01() - 0.5);
            }
            const double c = 1e-3 + rng.uniform01();
            const Vector got = oracle::enumerated_spsa_mean(q, theta, c);
            CHECK(oracle::relative_error(got, q.gradient(theta)) <= 1e-10);
        }
    }
}
