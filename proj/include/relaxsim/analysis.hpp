#pragma once

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "relaxsim/integrators.hpp"
#include "relaxsim/model.hpp"
#include "relaxsim/quadrature.hpp"

namespace relaxsim {

// Monte Carlo protocol shared by the error and cost studies. Trajectories are
// numbered run * trajectories_per_run + j, and that number keys the noise
// streams, so results do not depend on scheduling or thread count.
struct StudyParams {
    double horizon = 5.0;
    int fine_steps = 1000;
    double x0 = 0.0;                 // broadcast over state components
    int runs = 10;
    int trajectories_per_run = 10000;
    std::uint64_t master_seed = 1234;
    VolMode vol_mode = VolMode::uncontrolled;
    int quadrature_order = 10;
    int threads = 1;                 // 0 = hardware concurrency
};

// Estimate of E[max_n |X_relaxed(t_n) - X_mixed(t_n)|^2] at one step count.
struct ConvergenceRecord {
    int steps = 0;
    double mean_sup_sq_error = 0.0;  // mean over runs of per-run Monte Carlo means
    double std_across_runs = 0.0;    // sample std of the per-run means
    int runs = 0;
    int trajectories_per_run = 0;
};

// Least-squares line through (log N, log error).
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;
};

struct CostGapRecord {
    int steps = 0;
    double gap = 0.0;                // |E[discrete cost] - E[relaxed cost]|
    double mean_discrete_cost = 0.0;
    double mean_relaxed_cost = 0.0;
    double std_across_runs = 0.0;    // sample std of the per-run gap means
    int runs = 0;
    int trajectories_per_run = 0;
};

// Max over grid nodes of the squared distance between states. Grids must match.
double sup_sq_error(const Trajectory& a, const Trajectory& b);

// Couples the two schemes on shared Brownian increments (coarsened from the
// fine lattice) and estimates the expected sup-square error at step count N,
// which must divide fine_steps.
ConvergenceRecord estimate_error(const ModelSpec& model, const FeedbackPolicy& policy,
                                 int steps, const StudyParams& params);

// One record per N, in the order given; all N share the same per-trajectory
// Brownian paths.
std::vector<ConvergenceRecord> convergence_study(const ModelSpec& model,
                                                 const FeedbackPolicy& policy,
                                                 const std::vector<int>& step_list,
                                                 const StudyParams& params);

// Ordinary least squares of log(mean_sup_sq_error) on log(N). Needs at least
// two records with strictly positive errors.
RateFit fit_rate(const std::vector<ConvergenceRecord>& records);

// Riemann-sum cost of a randomized-action trajectory:
// g(x_N) + dt * sum_n exp(-beta t_n) f(t_n, x_n, a_n). Requires actions.
double discrete_cost(const Trajectory& trajectory, const CostSpec& costs);

// Same sum with the running cost averaged over the policy at each state.
double relaxed_cost(const Trajectory& trajectory, const FeedbackPolicy& policy,
                    const CostSpec& costs, const GaussHermiteRule& rule);

// Per-N gap between the two expected costs, computed on coupled trajectories.
std::vector<CostGapRecord> cost_gap_study(const ModelSpec& model, const FeedbackPolicy& policy,
                                          const CostSpec& costs,
                                          const std::vector<int>& step_list,
                                          const StudyParams& params);

// CSV with header N,mean_sup_sq_error,std_across_runs,runs,trajectories_per_run.
void write_convergence_csv(const std::vector<ConvergenceRecord>& records, std::ostream& os);

// JSON object {slope, intercept, r_squared, points}.
void write_rate_fit_json(const RateFit& fit, std::ostream& os);

void write_cost_gap_csv(const std::vector<CostGapRecord>& records, std::ostream& os);

} // namespace relaxsim
