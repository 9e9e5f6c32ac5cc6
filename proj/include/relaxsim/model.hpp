#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "relaxsim/types.hpp"

namespace relaxsim {

struct LipschitzHints {
    std::optional<double> drift;
    std::optional<double> volatility;
};

// Controlled SDE model dX = b(X,a) dt + sigma(X,a) dW.
// Coefficients must be total over finite inputs. For uncontrolled-volatility
// models, volatility(x, a1) == volatility(x, a2) for all actions.
struct ModelSpec {
    int state_dim = 1;
    int action_dim = 1;
    std::function<Vector(const Vector&, const Vector&)> drift;
    std::function<Matrix(const Vector&, const Vector&)> volatility;
    std::optional<double> drift_bound;   // nullopt means unbounded
    LipschitzHints lipschitz_hints;
    bool uncontrolled_volatility = false;
    std::string name;
};

// State-feedback action distribution N(mean_fn(x), std^2 I).
// std == 0 is the degenerate policy concentrated at mean_fn(x).
struct FeedbackPolicy {
    std::function<Vector(const Vector&)> mean_fn;
    double std = 0.0;
};

// Uniform grid 0 = t_0 < ... < t_N = T with t_n = n T / N.
struct TimeGrid {
    TimeGrid(double horizon, int steps);

    double horizon;
    int steps;

    double dt() const { return horizon / steps; }
    double node(int n) const { return n * horizon / steps; }
};

struct CostSpec {
    std::function<double(double, const Vector&, const Vector&)> running;   // f(t, x, a)
    std::function<double(const Vector&)> terminal;                         // g(x)
    double discount_rate = 0.0;                                            // beta
};

// The three benchmark models. c_sigma is used only by setting3.
//   setting1: b(x,a) = a,       sigma = 0.1
//   setting2: b(x,a) = tanh(a), sigma = 0.1
//   setting3: b(x,a) = tanh(a), sigma = 0.1 + c_sigma * a
ModelSpec builtin_setting(const std::string& id, double c_sigma = 0.0);

// Policy N(1 - x, sigma_pi^2 I) used by the benchmark settings.
FeedbackPolicy default_policy(double sigma_pi);

// f(t,x,a) = |x - 1|^2 + 0.1 |a|^2, g(x) = |x|^2, beta = 0.
CostSpec default_costs();

// f = 0, g = 0.
CostSpec zero_costs();

// (mean_fn(x), std) of the action law at state x.
std::pair<Vector, double> policy_at(const FeedbackPolicy& policy, const Vector& x);

// Inverse-CDF sample from the action law: mean + std * Phi^{-1}(u) componentwise.
// Throws DomainError unless 0 < u < 1.
Vector sample_action(const FeedbackPolicy& policy, const Vector& x, double u);

// Per-component uniforms; u must have one entry per action component.
Vector sample_action(const FeedbackPolicy& policy, const Vector& x,
                     const Eigen::Ref<const Vector>& u);

} // namespace relaxsim
