#pragma once

#include <optional>
#include <ostream>

#include "relaxsim/model.hpp"
#include "relaxsim/quadrature.hpp"
#include "relaxsim/types.hpp"

namespace relaxsim {

// States on a time grid, row n = state at t_n; actions row m = action applied
// on [t_m, t_{m+1}) (present only for the randomized-action scheme). Every
// entry is finite; integrators reject non-finite states instead of
// propagating them.
struct Trajectory {
    TimeGrid grid;
    Matrix states;                   // (N+1) x state_dim
    std::optional<Matrix> actions;   // N x action_dim
};

// Explicit Euler-Maruyama step for the relaxed dynamics: coefficients are the
// policy averages, evaluated at the left endpoint. No action stream is
// consumed. Throws DivergenceError at the first non-finite state.
Trajectory simulate_relaxed(const ModelSpec& model, const FeedbackPolicy& policy,
                            const TimeGrid& grid, const Eigen::Ref<const Matrix>& increments,
                            const Vector& x0, VolMode vol_mode, const GaussHermiteRule& rule);

// Randomized-action scheme: at each step an action is drawn from the policy
// at the current state via the inverse CDF of the supplied uniforms (one per
// step and action component), then the raw coefficients are applied.
Trajectory simulate_mixed(const ModelSpec& model, const FeedbackPolicy& policy,
                          const TimeGrid& grid, const Eigen::Ref<const Matrix>& increments,
                          const Eigen::Ref<const Matrix>& uniforms, const Vector& x0);

// Two-noise form: policy-mean volatility drives the first Brownian motion and
// the residual volatility drives the second, so the per-step diffusion second
// moment matches the policy average of sigma sigma^T.
Trajectory simulate_martingale_form(const ModelSpec& model, const FeedbackPolicy& policy,
                                    const TimeGrid& grid,
                                    const Eigen::Ref<const Matrix>& increments_w,
                                    const Eigen::Ref<const Matrix>& increments_b,
                                    const Vector& x0, const GaussHermiteRule& rule);

// CSV dump: t, state components, then action components when present.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os);

} // namespace relaxsim
