#pragma once

#include <functional>
#include <vector>

#include "relaxsim/model.hpp"
#include "relaxsim/types.hpp"

namespace relaxsim {

// Physicists' Gauss-Hermite rule: integrates f(t) exp(-t^2) dt exactly for
// polynomials of degree <= 2*order - 1. Nodes ascending, symmetric about 0;
// weights positive, summing to sqrt(pi).
struct GaussHermiteRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Builds the rule via eigendecomposition of the symmetric tridiagonal Jacobi
// matrix. Valid orders are 1..64; anything else is a ConfigError.
GaussHermiteRule build_rule(int order);

// E[fn(A)] for A ~ N(mean, std^2) as (1/sqrt(pi)) sum_i w_i fn(mean + sqrt(2) std t_i).
// std == 0 returns fn(mean) exactly. Non-finite fn values raise EvaluationError
// carrying the offending evaluation point.
double gaussian_expectation(const std::function<double(double)>& fn, double mean,
                            double std, const GaussHermiteRule& rule);

// Tensor-product expectation over an isotropic Gaussian action law.
// fn maps an action vector to a state vector.
Vector gaussian_expectation(const std::function<Vector(const Vector&)>& fn,
                            const Vector& mean, double std, const GaussHermiteRule& rule);

// How the diffusion coefficient of the relaxed dynamics is formed.
//   uncontrolled: the model volatility, which must not depend on the action
//   naive:        entrywise policy mean of sigma(x, .)
//   sqrt:         symmetric PSD square root of E[sigma sigma^T]
enum class VolMode { uncontrolled, naive, sqrt };

// Policy average of the drift: component-wise E[b(x, A)], A ~ pi(x).
Vector relaxed_drift(const ModelSpec& model, const FeedbackPolicy& policy,
                     const Vector& x, const GaussHermiteRule& rule);

// Relaxed volatility in the requested mode. Requesting uncontrolled on a
// controlled-volatility model is a ConfigError.
Matrix relaxed_volatility(const ModelSpec& model, const FeedbackPolicy& policy,
                          const Vector& x, VolMode mode, const GaussHermiteRule& rule);

// E[sigma(x,A) sigma(x,A)^T], symmetric by construction.
Matrix diffusion_matrix(const ModelSpec& model, const FeedbackPolicy& policy,
                        const Vector& x, const GaussHermiteRule& rule);

// Symmetric PSD square root by eigendecomposition. Eigenvalues in
// [-1e-10*||M||_F, 0) are clamped to zero; anything lower raises NotPsdError.
Matrix psd_sqrt(const Matrix& m);

// Square root of the excess diffusion E[sigma sigma^T] - E[sigma] E[sigma]^T.
// In one dimension this is the standard deviation of sigma(x, A).
Matrix residual_volatility(const ModelSpec& model, const FeedbackPolicy& policy,
                           const Vector& x, const GaussHermiteRule& rule);

} // namespace relaxsim
