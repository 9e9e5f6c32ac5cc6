#include "relaxsim/quadrature.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "relaxsim/errors.hpp"

namespace relaxsim {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
const double kSqrtPi = std::sqrt(M_PI);

void check_finite_scalar(double value, double point, const char* what) {
    if (!std::isfinite(value)) {
        throw EvaluationError(std::string(what) + ": non-finite value at evaluation point " +
                                  std::to_string(point),
                              point);
    }
}

// Walks the tensor-product index set [0, order)^k in lexicographic order.
// Returns false once the index set is exhausted.
bool advance(std::vector<int>& idx, int order) {
    for (std::size_t j = idx.size(); j-- > 0;) {
        if (++idx[j] < order) {
            return true;
        }
        idx[j] = 0;
    }
    return false;
}

// Accumulates sum of weight * fn(action node) over the tensor grid, where
// Accum is called as accum(weight, action). Normalization by pi^{k/2} is the
// caller's job.
template <typename Accum>
void tensor_sum(const Vector& mean, double std, const GaussHermiteRule& rule,
                Accum&& accum) {
    const int k = static_cast<int>(mean.size());
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    Vector a(k);
    do {
        double w = 1.0;
        for (int j = 0; j < k; ++j) {
            w *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            a(j) = mean(j) + kSqrt2 * std * rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        }
        accum(w, a);
    } while (advance(idx, rule.order));
}

} // namespace

GaussHermiteRule build_rule(int order) {
    if (order < 1 || order > 64) {
        throw ConfigError("build_rule: order must lie in 1..64, got " + std::to_string(order));
    }
    GaussHermiteRule rule;
    rule.order = order;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));

    if (order == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = kSqrtPi;
        return rule;
    }

    Matrix jacobi = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(0.5 * k);
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    for (int i = 0; i < order; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = kSqrtPi * v0 * v0;
    }

    // Enforce the exact symmetry the rule has analytically.
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double node = 0.5 * (rule.nodes[static_cast<std::size_t>(i)] -
                                   rule.nodes[static_cast<std::size_t>(j)]);
        rule.nodes[static_cast<std::size_t>(i)] = node;
        rule.nodes[static_cast<std::size_t>(j)] = -node;
        const double weight = 0.5 * (rule.weights[static_cast<std::size_t>(i)] +
                                     rule.weights[static_cast<std::size_t>(j)]);
        rule.weights[static_cast<std::size_t>(i)] = weight;
        rule.weights[static_cast<std::size_t>(j)] = weight;
    }
    if (order % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    }
    return rule;
}

double gaussian_expectation(const std::function<double(double)>& fn, double mean,
                            double std, const GaussHermiteRule& rule) {
    if (std < 0.0) {
        throw DomainError("gaussian_expectation: std must be nonnegative");
    }
    if (std == 0.0) {
        const double value = fn(mean);
        check_finite_scalar(value, mean, "gaussian_expectation");
        return value;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double point = mean + kSqrt2 * std * rule.nodes[i];
        const double value = fn(point);
        check_finite_scalar(value, point, "gaussian_expectation");
        acc += rule.weights[i] * value;
    }
    return acc / kSqrtPi;
}

Vector gaussian_expectation(const std::function<Vector(const Vector&)>& fn,
                            const Vector& mean, double std, const GaussHermiteRule& rule) {
    if (std < 0.0) {
        throw DomainError("gaussian_expectation: std must be nonnegative");
    }
    if (std == 0.0) {
        Vector value = fn(mean);
        if (!value.allFinite()) {
            throw EvaluationError("gaussian_expectation: non-finite value at policy mean",
                                  mean.size() > 0 ? mean(0) : 0.0);
        }
        return value;
    }
    Vector acc;
    tensor_sum(mean, std, rule, [&](double w, const Vector& a) {
        Vector value = fn(a);
        if (!value.allFinite()) {
            throw EvaluationError("gaussian_expectation: non-finite value at evaluation point " +
                                      std::to_string(a(0)),
                                  a(0));
        }
        if (acc.size() == 0) {
            acc = Vector::Zero(value.size());
        }
        acc += w * value;
    });
    const int k = static_cast<int>(mean.size());
    return acc / std::pow(kSqrtPi, k);
}

Vector relaxed_drift(const ModelSpec& model, const FeedbackPolicy& policy,
                     const Vector& x, const GaussHermiteRule& rule) {
    const Vector mean = policy.mean_fn(x);
    return gaussian_expectation(
        [&](const Vector& a) { return model.drift(x, a); }, mean, policy.std, rule);
}

Matrix relaxed_volatility(const ModelSpec& model, const FeedbackPolicy& policy,
                          const Vector& x, VolMode mode, const GaussHermiteRule& rule) {
    switch (mode) {
    case VolMode::uncontrolled: {
        if (!model.uncontrolled_volatility) {
            throw ConfigError(
                "relaxed_volatility: uncontrolled mode requires an action-independent "
                "volatility (model '" + model.name + "' is controlled)");
        }
        return model.volatility(x, policy.mean_fn(x));
    }
    case VolMode::naive: {
        const Vector mean = policy.mean_fn(x);
        if (policy.std == 0.0) {
            return model.volatility(x, mean);
        }
        Matrix acc;
        tensor_sum(mean, policy.std, rule, [&](double w, const Vector& a) {
            Matrix value = model.volatility(x, a);
            if (!value.allFinite()) {
                throw EvaluationError("relaxed_volatility: non-finite volatility at action " +
                                          std::to_string(a(0)),
                                      a(0));
            }
            if (acc.size() == 0) {
                acc = Matrix::Zero(value.rows(), value.cols());
            }
            acc += w * value;
        });
        return acc / std::pow(kSqrtPi, static_cast<int>(mean.size()));
    }
    case VolMode::sqrt:
        return psd_sqrt(diffusion_matrix(model, policy, x, rule));
    }
    throw ConfigError("relaxed_volatility: unknown mode");
}

Matrix diffusion_matrix(const ModelSpec& model, const FeedbackPolicy& policy,
                        const Vector& x, const GaussHermiteRule& rule) {
    const Vector mean = policy.mean_fn(x);
    if (policy.std == 0.0) {
        const Matrix s = model.volatility(x, mean);
        return s * s.transpose();
    }
    Matrix acc;
    tensor_sum(mean, policy.std, rule, [&](double w, const Vector& a) {
        Matrix s = model.volatility(x, a);
        if (!s.allFinite()) {
            throw EvaluationError("diffusion_matrix: non-finite volatility at action " +
                                      std::to_string(a(0)),
                                  a(0));
        }
        if (acc.size() == 0) {
            acc = Matrix::Zero(s.rows(), s.rows());
        }
        acc += w * (s * s.transpose());
    });
    acc /= std::pow(kSqrtPi, static_cast<int>(mean.size()));
    return 0.5 * (acc + acc.transpose());
}

Matrix psd_sqrt(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw ConfigError("psd_sqrt: matrix must be square");
    }
    const double scale = m.norm();
    const double tol = 1e-10 * scale;
    if (m.rows() == 1) {
        const double v = m(0, 0);
        if (v < -tol) {
            throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(v) +
                                  " below tolerance " + std::to_string(-tol),
                              v);
        }
        return Matrix::Constant(1, 1, std::sqrt(std::max(v, 0.0)));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    Vector lambda = es.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -tol) {
            throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(lambda(i)) +
                                  " below tolerance " + std::to_string(-tol),
                              lambda(i));
        }
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    Matrix root = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (root + root.transpose());
}

Matrix residual_volatility(const ModelSpec& model, const FeedbackPolicy& policy,
                           const Vector& x, const GaussHermiteRule& rule) {
    // Constant-in-action volatility or a degenerate policy has zero variance.
    if (model.uncontrolled_volatility) {
        return Matrix::Zero(model.state_dim, model.state_dim);
    }
    const Matrix mean_vol = relaxed_volatility(model, policy, x, VolMode::naive, rule);
    if (policy.std == 0.0) {
        return Matrix::Zero(mean_vol.rows(), mean_vol.rows());
    }
    const Matrix excess =
        diffusion_matrix(model, policy, x, rule) - mean_vol * mean_vol.transpose();
    return psd_sqrt(excess);
}

} // namespace relaxsim
