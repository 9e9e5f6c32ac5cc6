#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "relaxsim/errors.hpp"
#include "relaxsim/model.hpp"
#include "relaxsim/normal.hpp"

using namespace relaxsim;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

FeedbackPolicy constant_policy(double mean, double std) {
    FeedbackPolicy p;
    p.mean_fn = [mean](const Vector& x) { return Vector::Constant(x.size(), mean); };
    p.std = std;
    return p;
}

} // namespace

TEST_CASE("builtin settings reproduce the benchmark coefficients") {
    const ModelSpec s1 = builtin_setting("setting1");
    CHECK(s1.drift(scalar(2.0), scalar(0.4))(0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(s1.volatility(scalar(2.0), scalar(0.4))(0, 0) == 0.1);
    CHECK(s1.uncontrolled_volatility);
    CHECK_FALSE(s1.drift_bound.has_value());

    const ModelSpec s2 = builtin_setting("setting2");
    CHECK(s2.drift(scalar(3.0), scalar(0.0))(0) == 0.0);
    CHECK(s2.drift(scalar(3.0), scalar(2.0))(0) == doctest::Approx(std::tanh(2.0)));
    CHECK(s2.drift_bound == 1.0);

    const ModelSpec s3 = builtin_setting("setting3", 0.2);
    CHECK(s3.volatility(scalar(0.0), scalar(1.0))(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_FALSE(s3.uncontrolled_volatility);
}

TEST_CASE("unknown setting id is a configuration error") {
    CHECK_THROWS_AS(builtin_setting("setting4"), ConfigError);
    CHECK_THROWS_AS(builtin_setting(""), ConfigError);
}

TEST_CASE("setting3 with zero control constant matches setting2 pathwise") {
    const ModelSpec a = builtin_setting("setting2");
    const ModelSpec b = builtin_setting("setting3", 0.0);
    oracle::TestRng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Vector x = scalar(rng.uniform(-5.0, 5.0));
        const Vector act = scalar(rng.uniform(-5.0, 5.0));
        CHECK(a.drift(x, act)(0) == b.drift(x, act)(0));
        CHECK(a.volatility(x, act)(0, 0) == b.volatility(x, act)(0, 0));
    }
}

TEST_CASE("time grid nodes are uniform and span the horizon") {
    const TimeGrid grid(5.0, 1000);
    CHECK(grid.node(0) == 0.0);
    CHECK(grid.node(1000) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(grid.dt() == doctest::Approx(0.005).epsilon(1e-15));
    for (int n = 0; n < 1000; ++n) {
        CHECK(grid.node(n + 1) - grid.node(n) == doctest::Approx(grid.dt()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(TimeGrid(0.0, 10), ConfigError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), ConfigError);
}

TEST_CASE("policy_at returns the state-dependent mean and the spread") {
    const FeedbackPolicy policy = default_policy(0.2);
    const auto [mean0, std0] = policy_at(policy, scalar(0.0));
    CHECK(mean0(0) == 1.0);
    CHECK(std0 == 0.2);
    const auto [mean1, std1] = policy_at(policy, scalar(1.0));
    CHECK(mean1(0) == 0.0);

    const FeedbackPolicy dirac = default_policy(0.0);
    const auto [mean_half, std_half] = policy_at(dirac, scalar(0.5));
    CHECK(mean_half(0) == 0.5);
    CHECK(std_half == 0.0);
}

TEST_CASE("sample_action realizes the inverse-CDF map") {
    const FeedbackPolicy standard = constant_policy(0.0, 1.0);
    const Vector x = scalar(0.0);
    CHECK(sample_action(standard, x, 0.5)(0) == 0.0);

    // Frozen quantile oracle: Phi^{-1}(0.975) = 1.9599639845400542.
    CHECK(sample_action(standard, x, 0.975)(0) ==
          doctest::Approx(1.9599639845400542).epsilon(1e-6));

    const FeedbackPolicy dirac = constant_policy(0.7, 0.0);
    CHECK(sample_action(dirac, x, 0.123)(0) == 0.7);
    CHECK(sample_action(dirac, x, 0.999)(0) == 0.7);

    CHECK_THROWS_AS(sample_action(standard, x, 0.0), DomainError);
    CHECK_THROWS_AS(sample_action(standard, x, 1.0), DomainError);
    CHECK_THROWS_AS(sample_action(standard, x, -0.25), DomainError);
}

TEST_CASE("normal quantile is accurate against frozen references") {
    // scipy.stats.norm.ppf, 17 digits.
    const std::pair<double, double> refs[] = {
        {0.001, -3.0902323061678135},
        {0.02425, -1.9735979693402077},
        {0.3, -0.52440051270804078},
        {0.5, 0.0},
        {0.975, 1.9599639845400542},
        {0.9999, 3.7190164854556804},
    };
    for (const auto& [u, z] : refs) {
        CHECK(std::abs(norm_quantile(u) - z) <= 1e-9);
    }
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(norm_quantile(0.31)) == doctest::Approx(0.31).epsilon(1e-12));
}

TEST_CASE("sample_action is strictly increasing in the uniform") {
    const FeedbackPolicy policy = constant_policy(-0.3, 0.8);
    const Vector x = scalar(2.0);
    double prev = sample_action(policy, x, 1e-6)(0);
    for (double u = 0.05; u < 1.0; u += 0.05) {
        const double next = sample_action(policy, x, u)(0);
        CHECK(next > prev);
        prev = next;
    }
}

TEST_CASE("push-forward of uniforms matches the policy law") {
    const double mean = 0.7;
    const double spread = 0.3;
    const FeedbackPolicy policy = constant_policy(mean, spread);
    const Vector x = scalar(0.0);
    const std::size_t n = 100000;
    oracle::TestRng rng(42);
    std::vector<double> samples(n);
    for (auto& s : samples) {
        s = sample_action(policy, x, rng.uniform())(0);
    }
    const auto stats = oracle::sample_stats(samples);
    const double mean_se = spread / std::sqrt(static_cast<double>(n));
    const double var_se = spread * spread * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(stats.mean - mean) < 4.0 * mean_se);
    CHECK(std::abs(stats.variance - spread * spread) < 4.0 * var_se);
}

TEST_CASE("per-component uniforms drive independent action components") {
    FeedbackPolicy policy;
    policy.mean_fn = [](const Vector&) { return Vector::Zero(2); };
    policy.std = 1.0;
    Vector u(2);
    u << 0.25, 0.75;
    const Vector a = sample_action(policy, Vector::Zero(1), Eigen::Ref<const Vector>(u));
    CHECK(a(0) == doctest::Approx(-a(1)).epsilon(1e-12));
    CHECK(a(1) > 0.0);
    Vector bad(1);
    bad << 0.5;
    CHECK_THROWS_AS(sample_action(policy, Vector::Zero(1), Eigen::Ref<const Vector>(bad)),
                    ConfigError);
}

TEST_CASE("default costs are the documented quadratics") {
    const CostSpec costs = default_costs();
    CHECK(costs.running(0.0, scalar(1.0), scalar(0.0)) == 0.0);
    CHECK(costs.running(0.0, scalar(3.0), scalar(2.0)) == doctest::Approx(4.0 + 0.4));
    CHECK(costs.terminal(scalar(-2.0)) == 4.0);
    CHECK(costs.discount_rate == 0.0);
}
