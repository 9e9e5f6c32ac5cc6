#include "relaxsim/integrators.hpp"

#include <cstdio>
#include <string>

#include "relaxsim/errors.hpp"

namespace relaxsim {

namespace {

void check_inputs(const ModelSpec& model, const TimeGrid& grid,
                  const Eigen::Ref<const Matrix>& increments, const Vector& x0,
                  const char* what) {
    if (increments.rows() != grid.steps || increments.cols() != model.state_dim) {
        throw ConfigError(std::string(what) + ": increments must be steps x state_dim (" +
                          std::to_string(grid.steps) + " x " + std::to_string(model.state_dim) +
                          "), got " + std::to_string(increments.rows()) + " x " +
                          std::to_string(increments.cols()));
    }
    if (x0.size() != model.state_dim || !x0.allFinite()) {
        throw ConfigError(std::string(what) + ": x0 must be a finite state vector");
    }
}

// Both schemes advance through this expression so that they are bit-identical
// whenever their coefficients are.
inline Vector euler_step(const Vector& x, double dt, const Vector& drift, const Matrix& vol,
                         const Eigen::Ref<const Eigen::RowVectorXd>& dw) {
    return x + dt * drift + vol * dw.transpose();
}

inline void check_state(const Vector& x, int step, const char* what) {
    if (!x.allFinite()) {
        throw DivergenceError(std::string(what) + ": non-finite state at step " +
                                  std::to_string(step),
                              static_cast<std::size_t>(step));
    }
}

} // namespace

Trajectory simulate_relaxed(const ModelSpec& model, const FeedbackPolicy& policy,
                            const TimeGrid& grid, const Eigen::Ref<const Matrix>& increments,
                            const Vector& x0, VolMode vol_mode, const GaussHermiteRule& rule) {
    check_inputs(model, grid, increments, x0, "simulate_relaxed");
    Trajectory out{grid, Matrix(grid.steps + 1, model.state_dim), std::nullopt};
    const double dt = grid.dt();
    Vector x = x0;
    out.states.row(0) = x.transpose();
    for (int n = 0; n < grid.steps; ++n) {
        const Vector drift = relaxed_drift(model, policy, x, rule);
        const Matrix vol = relaxed_volatility(model, policy, x, vol_mode, rule);
        x = euler_step(x, dt, drift, vol, increments.row(n));
        check_state(x, n + 1, "simulate_relaxed");
        out.states.row(n + 1) = x.transpose();
    }
    return out;
}

Trajectory simulate_mixed(const ModelSpec& model, const FeedbackPolicy& policy,
                          const TimeGrid& grid, const Eigen::Ref<const Matrix>& increments,
                          const Eigen::Ref<const Matrix>& uniforms, const Vector& x0) {
    check_inputs(model, grid, increments, x0, "simulate_mixed");
    if (uniforms.rows() != grid.steps || uniforms.cols() != model.action_dim) {
        throw ConfigError("simulate_mixed: uniforms must be steps x action_dim");
    }
    Trajectory out{grid, Matrix(grid.steps + 1, model.state_dim),
                   Matrix(grid.steps, model.action_dim)};
    const double dt = grid.dt();
    Vector x = x0;
    out.states.row(0) = x.transpose();
    for (int m = 0; m < grid.steps; ++m) {
        const Vector action = sample_action(policy, x, uniforms.row(m).transpose());
        const Vector drift = model.drift(x, action);
        const Matrix vol = model.volatility(x, action);
        out.actions->row(m) = action.transpose();
        x = euler_step(x, dt, drift, vol, increments.row(m));
        check_state(x, m + 1, "simulate_mixed");
        out.states.row(m + 1) = x.transpose();
    }
    return out;
}

Trajectory simulate_martingale_form(const ModelSpec& model, const FeedbackPolicy& policy,
                                    const TimeGrid& grid,
                                    const Eigen::Ref<const Matrix>& increments_w,
                                    const Eigen::Ref<const Matrix>& increments_b,
                                    const Vector& x0, const GaussHermiteRule& rule) {
    check_inputs(model, grid, increments_w, x0, "simulate_martingale_form");
    if (increments_b.rows() != grid.steps || increments_b.cols() != model.state_dim) {
        throw ConfigError("simulate_martingale_form: second increment stream must match the grid");
    }
    Trajectory out{grid, Matrix(grid.steps + 1, model.state_dim), std::nullopt};
    const double dt = grid.dt();
    Vector x = x0;
    out.states.row(0) = x.transpose();
    for (int n = 0; n < grid.steps; ++n) {
        const Vector drift = relaxed_drift(model, policy, x, rule);
        const Matrix vol = relaxed_volatility(model, policy, x, VolMode::naive, rule);
        const Matrix residual = residual_volatility(model, policy, x, rule);
        x = euler_step(x, dt, drift, vol, increments_w.row(n)) +
            residual * increments_b.row(n).transpose();
        check_state(x, n + 1, "simulate_martingale_form");
        out.states.row(n + 1) = x.transpose();
    }
    return out;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os) {
    const int d = static_cast<int>(trajectory.states.cols());
    const int k = trajectory.actions ? static_cast<int>(trajectory.actions->cols()) : 0;
    os << "t";
    for (int j = 0; j < d; ++j) {
        os << ",x" << j;
    }
    for (int j = 0; j < k; ++j) {
        os << ",a" << j;
    }
    os << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (int n = 0; n <= trajectory.grid.steps; ++n) {
        put(trajectory.grid.node(n));
        for (int j = 0; j < d; ++j) {
            os << ",";
            put(trajectory.states(n, j));
        }
        for (int j = 0; j < k; ++j) {
            os << ",";
            if (n < trajectory.grid.steps) {
                put((*trajectory.actions)(n, j));
            }
        }
        os << "\n";
    }
}

} // namespace relaxsim
