#include "relaxsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "relaxsim/errors.hpp"
#include "relaxsim/noise.hpp"

namespace relaxsim {

namespace {

// Neumaier compensated accumulator; the aggregation order is fixed by the
// caller, so study results are invariant to the worker count.
class CompensatedSum {
public:
    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            comp_ += (sum_ - t) + value;
        } else {
            comp_ += (value - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Applies fn(index) for index in [0, count), spread over the requested number
// of workers. Exceptions are re-thrown for the lowest failing index.
template <typename Fn>
void parallel_for_index(std::int64_t count, int threads, Fn&& fn) {
    threads = std::min<std::int64_t>(resolve_threads(threads), std::max<std::int64_t>(count, 1));
    if (threads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::pair<std::int64_t, std::exception_ptr>> failures(
        static_cast<std::size_t>(threads), {count, nullptr});
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (std::int64_t i = w; i < count; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = {i, std::current_exception()};
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    const auto worst = std::min_element(failures.begin(), failures.end(),
                                        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (worst->second) {
        std::rethrow_exception(worst->second);
    }
}

struct RunStats {
    double mean = 0.0;
    double std_across_runs = 0.0;
};

// Per-run compensated means in ascending trajectory order, then mean and
// sample standard deviation across runs.
RunStats reduce_runs(const std::vector<double>& values, int runs, int per_run) {
    std::vector<double> run_means(static_cast<std::size_t>(runs));
    for (int r = 0; r < runs; ++r) {
        CompensatedSum acc;
        for (int j = 0; j < per_run; ++j) {
            acc.add(values[static_cast<std::size_t>(r) * per_run + j]);
        }
        run_means[static_cast<std::size_t>(r)] = acc.value() / per_run;
    }
    CompensatedSum total;
    for (double m : run_means) {
        total.add(m);
    }
    RunStats stats;
    stats.mean = total.value() / runs;
    if (runs > 1) {
        CompensatedSum sq;
        for (double m : run_means) {
            const double d = m - stats.mean;
            sq.add(d * d);
        }
        stats.std_across_runs = std::sqrt(sq.value() / (runs - 1));
    }
    return stats;
}

void check_study_params(const StudyParams& params, int steps) {
    if (params.runs < 1 || params.trajectories_per_run < 1) {
        throw ConfigError("study: runs and trajectories_per_run must be >= 1");
    }
    if (steps < 1 || params.fine_steps % steps != 0) {
        throw ConfigError("study: step count " + std::to_string(steps) +
                          " must divide fine_steps " + std::to_string(params.fine_steps));
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double sup_sq_error(const Trajectory& a, const Trajectory& b) {
    if (a.grid.steps != b.grid.steps || a.grid.horizon != b.grid.horizon) {
        throw ConfigError("sup_sq_error: trajectories live on different grids");
    }
    double worst = 0.0;
    for (int n = 0; n <= a.grid.steps; ++n) {
        worst = std::max(worst, (a.states.row(n) - b.states.row(n)).squaredNorm());
    }
    return worst;
}

ConvergenceRecord estimate_error(const ModelSpec& model, const FeedbackPolicy& policy,
                                 int steps, const StudyParams& params) {
    check_study_params(params, steps);
    const GaussHermiteRule rule = build_rule(params.quadrature_order);
    const TimeGrid grid(params.horizon, steps);
    const Vector x0 = Vector::Constant(model.state_dim, params.x0);
    const std::int64_t total =
        static_cast<std::int64_t>(params.runs) * params.trajectories_per_run;

    std::vector<double> errors(static_cast<std::size_t>(total));
    parallel_for_index(total, params.threads, [&](std::int64_t idx) {
        const auto traj = static_cast<std::uint64_t>(idx);
        try {
            const BrownianLattice lattice = generate_lattice(
                params.master_seed, traj, params.fine_steps, params.horizon, model.state_dim);
            const Matrix increments = coarsen(lattice, steps);
            const Matrix uniforms =
                action_uniforms(params.master_seed, traj, steps, model.action_dim);
            const Trajectory relaxed =
                simulate_relaxed(model, policy, grid, increments, x0, params.vol_mode, rule);
            const Trajectory mixed =
                simulate_mixed(model, policy, grid, increments, uniforms, x0);
            errors[static_cast<std::size_t>(idx)] = sup_sq_error(relaxed, mixed);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " (trajectory " +
                                      std::to_string(idx) + ", N=" + std::to_string(steps) + ")",
                                  e.step());
        }
    });

    const RunStats stats = reduce_runs(errors, params.runs, params.trajectories_per_run);
    return {steps, stats.mean, stats.std_across_runs, params.runs, params.trajectories_per_run};
}

std::vector<ConvergenceRecord> convergence_study(const ModelSpec& model,
                                                 const FeedbackPolicy& policy,
                                                 const std::vector<int>& step_list,
                                                 const StudyParams& params) {
    std::vector<ConvergenceRecord> records;
    records.reserve(step_list.size());
    for (int steps : step_list) {
        records.push_back(estimate_error(model, policy, steps, params));
    }
    return records;
}

RateFit fit_rate(const std::vector<ConvergenceRecord>& records) {
    if (records.size() < 2) {
        throw ConfigError("fit_rate: need at least two records");
    }
    RateFit fit;
    fit.points.reserve(records.size());
    for (const auto& record : records) {
        if (!(record.mean_sup_sq_error > 0.0)) {
            throw ConfigError("fit_rate: record N=" + std::to_string(record.steps) +
                              " has non-positive error " +
                              std::to_string(record.mean_sup_sq_error));
        }
        fit.points.emplace_back(std::log(static_cast<double>(record.steps)),
                                std::log(record.mean_sup_sq_error));
    }
    const double n = static_cast<double>(fit.points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : fit.points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if (!(sxx > 0.0)) {
        throw ConfigError("fit_rate: need at least two distinct step counts");
    }
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    if (syy > 0.0) {
        double residual = 0.0;
        for (const auto& [x, y] : fit.points) {
            const double r = y - (fit.intercept + fit.slope * x);
            residual += r * r;
        }
        fit.r_squared = std::clamp(1.0 - residual / syy, 0.0, 1.0);
    } else {
        fit.r_squared = 1.0;
    }
    return fit;
}

double discrete_cost(const Trajectory& trajectory, const CostSpec& costs) {
    if (!trajectory.actions) {
        throw ConfigError("discrete_cost: trajectory carries no actions");
    }
    const double dt = trajectory.grid.dt();
    CompensatedSum running;
    for (int n = 0; n < trajectory.grid.steps; ++n) {
        const double t = trajectory.grid.node(n);
        const double discount =
            costs.discount_rate > 0.0 ? std::exp(-costs.discount_rate * t) : 1.0;
        running.add(discount * costs.running(t, trajectory.states.row(n).transpose(),
                                             trajectory.actions->row(n).transpose()));
    }
    return costs.terminal(trajectory.states.row(trajectory.grid.steps).transpose()) +
           dt * running.value();
}

double relaxed_cost(const Trajectory& trajectory, const FeedbackPolicy& policy,
                    const CostSpec& costs, const GaussHermiteRule& rule) {
    const double dt = trajectory.grid.dt();
    CompensatedSum running;
    for (int n = 0; n < trajectory.grid.steps; ++n) {
        const double t = trajectory.grid.node(n);
        const double discount =
            costs.discount_rate > 0.0 ? std::exp(-costs.discount_rate * t) : 1.0;
        const Vector x = trajectory.states.row(n).transpose();
        const Vector mean = policy.mean_fn(x);
        const Vector averaged = gaussian_expectation(
            [&](const Vector& a) {
                return Vector::Constant(1, costs.running(t, x, a));
            },
            mean, policy.std, rule);
        running.add(discount * averaged(0));
    }
    return costs.terminal(trajectory.states.row(trajectory.grid.steps).transpose()) +
           dt * running.value();
}

std::vector<CostGapRecord> cost_gap_study(const ModelSpec& model, const FeedbackPolicy& policy,
                                          const CostSpec& costs,
                                          const std::vector<int>& step_list,
                                          const StudyParams& params) {
    const GaussHermiteRule rule = build_rule(params.quadrature_order);
    const Vector x0 = Vector::Constant(model.state_dim, params.x0);
    std::vector<CostGapRecord> records;
    records.reserve(step_list.size());
    for (int steps : step_list) {
        check_study_params(params, steps);
        const TimeGrid grid(params.horizon, steps);
        const std::int64_t total =
            static_cast<std::int64_t>(params.runs) * params.trajectories_per_run;
        std::vector<double> discrete(static_cast<std::size_t>(total));
        std::vector<double> relaxed(static_cast<std::size_t>(total));
        parallel_for_index(total, params.threads, [&](std::int64_t idx) {
            const auto traj = static_cast<std::uint64_t>(idx);
            const BrownianLattice lattice = generate_lattice(
                params.master_seed, traj, params.fine_steps, params.horizon, model.state_dim);
            const Matrix increments = coarsen(lattice, steps);
            const Matrix uniforms =
                action_uniforms(params.master_seed, traj, steps, model.action_dim);
            const Trajectory relaxed_traj =
                simulate_relaxed(model, policy, grid, increments, x0, params.vol_mode, rule);
            const Trajectory mixed_traj =
                simulate_mixed(model, policy, grid, increments, uniforms, x0);
            discrete[static_cast<std::size_t>(idx)] = discrete_cost(mixed_traj, costs);
            relaxed[static_cast<std::size_t>(idx)] =
                relaxed_cost(relaxed_traj, policy, costs, rule);
        });

        std::vector<double> gaps(static_cast<std::size_t>(total));
        for (std::int64_t i = 0; i < total; ++i) {
            gaps[static_cast<std::size_t>(i)] =
                discrete[static_cast<std::size_t>(i)] - relaxed[static_cast<std::size_t>(i)];
        }
        const RunStats gap_stats = reduce_runs(gaps, params.runs, params.trajectories_per_run);
        const RunStats discrete_stats =
            reduce_runs(discrete, params.runs, params.trajectories_per_run);
        const RunStats relaxed_stats =
            reduce_runs(relaxed, params.runs, params.trajectories_per_run);
        records.push_back({steps, std::abs(gap_stats.mean), discrete_stats.mean,
                           relaxed_stats.mean, gap_stats.std_across_runs, params.runs,
                           params.trajectories_per_run});
    }
    return records;
}

void write_convergence_csv(const std::vector<ConvergenceRecord>& records, std::ostream& os) {
    os << "N,mean_sup_sq_error,std_across_runs,runs,trajectories_per_run\n";
    for (const auto& r : records) {
        os << r.steps << "," << format_double(r.mean_sup_sq_error) << ","
           << format_double(r.std_across_runs) << "," << r.runs << ","
           << r.trajectories_per_run << "\n";
    }
}

void write_rate_fit_json(const RateFit& fit, std::ostream& os) {
    nlohmann::ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    auto points = nlohmann::ordered_json::array();
    for (const auto& [x, y] : fit.points) {
        points.push_back({x, y});
    }
    j["points"] = points;
    os << j.dump(2) << "\n";
}

void write_cost_gap_csv(const std::vector<CostGapRecord>& records, std::ostream& os) {
    os << "N,cost_gap,mean_discrete_cost,mean_relaxed_cost,std_across_runs,runs,"
          "trajectories_per_run\n";
    for (const auto& r : records) {
        os << r.steps << "," << format_double(r.gap) << ","
           << format_double(r.mean_discrete_cost) << "," << format_double(r.mean_relaxed_cost)
           << "," << format_double(r.std_across_runs) << "," << r.runs << ","
           << r.trajectories_per_run << "\n";
    }
}

} // namespace relaxsim
