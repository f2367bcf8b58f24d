#pragma once

// First-order optimality measures for inequality-constrained problems
//   minimize f(y)  s.t.  c_i(y) <= 0.
// Multipliers are recovered by nonnegative least squares on the active set,
// so the measure does not depend on how the point was produced.

#include <Eigen/Core>
#include <Eigen/QR>

#include <limits>
#include <vector>

namespace mmpc {

/// Lawson-Hanson active-set NNLS: argmin_{x >= 0} ||A x - b||_2.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nnls(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, int max_iterations = 0) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = A.cols();
  if (max_iterations <= 0) max_iterations = 3 * static_cast<int>(n) + 10;
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const Scalar tol = Scalar(10) * std::numeric_limits<Scalar>::epsilon() *
                     A.cwiseAbs().sum() * std::max<Scalar>(Scalar(1), b.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Vector& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Matrix Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    const Vector zp = Ap.colPivHouseholderQr().solve(b);
    z.setZero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(static_cast<Eigen::Index>(c));
  };

  for (int outer = 0; outer < max_iterations; ++outer) {
    const Vector w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    Scalar best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Vector z;
    for (int inner = 0; inner < max_iterations; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= Scalar(0)) feasible = false;
      if (feasible) break;
      Scalar alpha = Scalar(1);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= Scalar(0))
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = Scalar(0);
        }
    }
    x = z.cwiseMax(Scalar(0));
  }
  return x;
}

template <typename Scalar>
struct KktMeasure {
  Scalar stationarity{};  // ||grad f + J_A^T mu||_inf at the NNLS multipliers
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> multipliers;  // over all constraints, zero if inactive
};

/// Stationarity of the Lagrangian using only constraints whose value is
/// within `active_tolerance` of zero. `jacobian` holds one constraint
/// gradient per row.
template <typename Scalar>
KktMeasure<Scalar> kkt_stationarity(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& objective_gradient,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& jacobian,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& constraint_values, Scalar active_tolerance) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < constraint_values.size(); ++i)
    if (constraint_values(i) >= -active_tolerance) active.push_back(i);

  KktMeasure<Scalar> out;
  out.multipliers = Vector::Zero(constraint_values.size());
  Vector residual = objective_gradient;
  if (!active.empty()) {
    Matrix A(objective_gradient.size(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c)
      A.col(static_cast<Eigen::Index>(c)) = jacobian.row(active[c]).transpose();
    const Vector mu = nnls<Scalar>(A, Vector(-objective_gradient));
    residual += A * mu;
    for (std::size_t c = 0; c < active.size(); ++c)
      out.multipliers(active[c]) = mu(static_cast<Eigen::Index>(c));
  }
  out.stationarity = residual.template lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace mmpc
