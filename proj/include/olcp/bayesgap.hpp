#pragma once

// Linear-Gaussian reward model shared across arms: GP-prior design
// factorization, closed-form posterior, per-arm marginals and the
// mean +/- beta * sd confidence bounds used by the Gaussian baseline.

#include "olcp/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace olcp::bayes {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct PriorSpec {
  Scalar sigma2 = Scalar(1);  // observation noise variance
  Scalar tau2 = Scalar(1);    // prior variance of each parameter coordinate
};

template <typename Scalar>
struct GaussianPosterior {
  VectorX<Scalar> mean;        // psi_hat
  MatrixX<Scalar> covariance;  // Sigma_hat
};

template <typename Scalar>
struct ArmMarginal {
  Scalar mean = Scalar(0);
  Scalar variance = Scalar(0);
};

template <typename Scalar>
struct Bounds {
  Scalar lower = Scalar(0);
  Scalar upper = Scalar(0);
};

/// Rows of the returned K x K matrix are the arm feature vectors c_j with
/// C C^T = G. Eigenpairs are taken in descending eigenvalue order (stable
/// for ties), negative eigenvalues are clipped to zero and each eigenvector
/// is signed so that its largest-magnitude entry is positive.
template <typename Derived>
MatrixX<typename Derived::Scalar> factor_design(const Eigen::MatrixBase<Derived>& kernel) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> g = kernel;
  if (g.rows() != g.cols() || g.rows() == 0) throw InvalidArgument("factor_design: kernel must be square");
  if (((g - g.transpose()).cwiseAbs().array() > Scalar(1e-12)).any())
    throw InvalidArgument("factor_design: kernel is not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(g);
  if (eig.info() != Eigen::Success) throw InvalidArgument("factor_design: eigendecomposition failed");
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();
  const Eigen::Index k = g.rows();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });

  MatrixX<Scalar> c(k, k);
  for (Eigen::Index col = 0; col < k; ++col) {
    const Eigen::Index src = order[static_cast<std::size_t>(col)];
    Scalar lambda = values(src);
    if (lambda < Scalar(-1e-6)) throw InvalidArgument("factor_design: kernel is not positive semidefinite");
    lambda = std::max(lambda, Scalar(0));

    VectorX<Scalar> v = vectors.col(src);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < Scalar(0)) v = -v;
    c.col(col) = v * std::sqrt(lambda);
  }
  return c;
}

/// Closed-form posterior of psi under the prior N(0, tau2 I) after observing
/// rewards(i) for the chosen-arm features contexts.row(i). Precision is
/// sigma^-2 C^T C + tau^-2 I; both moments come from its Cholesky factor.
template <typename DerivedC, typename DerivedY>
GaussianPosterior<typename DerivedC::Scalar> posterior_update(const PriorSpec<typename DerivedC::Scalar>& prior,
                                                              const Eigen::MatrixBase<DerivedC>& contexts,
                                                              const Eigen::MatrixBase<DerivedY>& rewards,
                                                              Eigen::Index dimension) {
  using Scalar = typename DerivedC::Scalar;
  if (!(prior.sigma2 > Scalar(0)) || !(prior.tau2 > Scalar(0)))
    throw InvalidArgument("posterior_update: sigma2 and tau2 must be positive");
  if (contexts.rows() != rewards.size()) throw InvalidArgument("posterior_update: contexts and rewards differ in length");
  if (contexts.rows() > 0 && contexts.cols() != dimension) throw InvalidArgument("posterior_update: dimension mismatch");

  GaussianPosterior<Scalar> post;
  if (contexts.rows() == 0) {
    post.mean = VectorX<Scalar>::Zero(dimension);
    post.covariance = MatrixX<Scalar>::Identity(dimension, dimension) * prior.tau2;
    return post;
  }

  const Scalar inv_sigma2 = Scalar(1) / prior.sigma2;
  MatrixX<Scalar> precision = inv_sigma2 * (contexts.transpose() * contexts);
  precision.diagonal().array() += Scalar(1) / prior.tau2;

  const Eigen::LLT<MatrixX<Scalar>> llt(precision);
  if (llt.info() != Eigen::Success) throw InvariantViolation("posterior_update: precision not positive definite");
  post.mean = llt.solve(inv_sigma2 * (contexts.transpose() * rewards));
  post.covariance = llt.solve(MatrixX<Scalar>::Identity(dimension, dimension));
  post.covariance = Scalar(0.5) * (post.covariance + post.covariance.transpose()).eval();
  return post;
}

template <typename Scalar, typename Derived>
ArmMarginal<Scalar> arm_marginal(const GaussianPosterior<Scalar>& post, const Eigen::MatrixBase<Derived>& arm) {
  if (arm.size() != post.mean.size()) throw InvalidArgument("arm_marginal: dimension mismatch");
  ArmMarginal<Scalar> out;
  out.mean = arm.dot(post.mean);
  out.variance = std::max(Scalar(0), Scalar(arm.dot(post.covariance * arm)));
  return out;
}

/// mean -/+ beta * sd; the width is 2 beta sd.
template <typename Scalar>
Bounds<Scalar> gauss_bounds(const ArmMarginal<Scalar>& m, Scalar beta) {
  if (!(beta >= Scalar(0))) throw InvalidArgument("gauss_bounds: beta must be >= 0");
  const Scalar half = beta * std::sqrt(m.variance);
  return {m.mean - half, m.mean + half};
}

/// Gaussian bounds for every arm (rows of `arms`), ready for gap_quantities.
template <typename Scalar, typename Derived>
std::vector<Bounds<Scalar>> arm_bounds(const GaussianPosterior<Scalar>& post, const Eigen::MatrixBase<Derived>& arms,
                                       Scalar beta) {
  std::vector<Bounds<Scalar>> out;
  out.reserve(static_cast<std::size_t>(arms.rows()));
  for (Eigen::Index k = 0; k < arms.rows(); ++k) {
    out.push_back(gauss_bounds(arm_marginal(post, arms.row(k).transpose()), beta));
  }
  return out;
}

}  // namespace olcp::bayes
