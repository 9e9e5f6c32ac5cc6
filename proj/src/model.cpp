#include "relaxsim/model.hpp"

#include <cmath>

#include "relaxsim/errors.hpp"
#include "relaxsim/normal.hpp"

namespace relaxsim {

TimeGrid::TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ConfigError("TimeGrid: horizon must be a positive finite real");
    }
    if (steps < 1) {
        throw ConfigError("TimeGrid: steps must be a positive integer");
    }
}

ModelSpec builtin_setting(const std::string& id, double c_sigma) {
    ModelSpec m;
    m.state_dim = 1;
    m.action_dim = 1;
    m.name = id;
    if (id == "setting1") {
        m.drift = [](const Vector& /*x*/, const Vector& a) { return a; };
        m.volatility = [](const Vector&, const Vector&) {
            return Matrix::Constant(1, 1, 0.1);
        };
        m.drift_bound = std::nullopt;
        m.lipschitz_hints = {1.0, 0.0};
        m.uncontrolled_volatility = true;
    } else if (id == "setting2") {
        m.drift = [](const Vector&, const Vector& a) {
            return Vector::Constant(1, std::tanh(a(0)));
        };
        m.volatility = [](const Vector&, const Vector&) {
            return Matrix::Constant(1, 1, 0.1);
        };
        m.drift_bound = 1.0;
        m.lipschitz_hints = {1.0, 0.0};
        m.uncontrolled_volatility = true;
    } else if (id == "setting3") {
        m.drift = [](const Vector&, const Vector& a) {
            return Vector::Constant(1, std::tanh(a(0)));
        };
        m.volatility = [c_sigma](const Vector&, const Vector& a) {
            return Matrix::Constant(1, 1, 0.1 + c_sigma * a(0));
        };
        m.drift_bound = 1.0;
        m.lipschitz_hints = {1.0, std::abs(c_sigma)};
        m.uncontrolled_volatility = (c_sigma == 0.0);
    } else {
        throw ConfigError("builtin_setting: unknown id '" + id +
                          "' (expected setting1, setting2 or setting3)");
    }
    return m;
}

FeedbackPolicy default_policy(double sigma_pi) {
    if (sigma_pi < 0.0) {
        throw ConfigError("default_policy: sigma_pi must be nonnegative");
    }
    FeedbackPolicy p;
    p.mean_fn = [](const Vector& x) { return Vector(Vector::Ones(x.size()) - x); };
    p.std = sigma_pi;
    return p;
}

CostSpec default_costs() {
    CostSpec c;
    c.running = [](double, const Vector& x, const Vector& a) {
        return (x.array() - 1.0).matrix().squaredNorm() + 0.1 * a.squaredNorm();
    };
    c.terminal = [](const Vector& x) { return x.squaredNorm(); };
    c.discount_rate = 0.0;
    return c;
}

CostSpec zero_costs() {
    CostSpec c;
    c.running = [](double, const Vector&, const Vector&) { return 0.0; };
    c.terminal = [](const Vector&) { return 0.0; };
    c.discount_rate = 0.0;
    return c;
}

std::pair<Vector, double> policy_at(const FeedbackPolicy& policy, const Vector& x) {
    return {policy.mean_fn(x), policy.std};
}

Vector sample_action(const FeedbackPolicy& policy, const Vector& x, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("sample_action: uniform must lie strictly in (0,1)");
    }
    Vector mean = policy.mean_fn(x);
    if (policy.std == 0.0) {
        return mean;
    }
    return mean.array() + policy.std * norm_quantile(u);
}

Vector sample_action(const FeedbackPolicy& policy, const Vector& x,
                     const Eigen::Ref<const Vector>& u) {
    Vector mean = policy.mean_fn(x);
    if (u.size() != mean.size()) {
        throw ConfigError("sample_action: need one uniform per action component");
    }
    if (policy.std == 0.0) {
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            if (!(u(j) > 0.0 && u(j) < 1.0)) {
                throw DomainError("sample_action: uniform must lie strictly in (0,1)");
            }
        }
        return mean;
    }
    Vector out(mean.size());
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
        if (!(u(j) > 0.0 && u(j) < 1.0)) {
            throw DomainError("sample_action: uniform must lie strictly in (0,1)");
        }
        out(j) = mean(j) + policy.std * norm_quantile(u(j));
    }
    return out;
}

} // namespace relaxsim
