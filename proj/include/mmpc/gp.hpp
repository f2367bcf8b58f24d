#pragma once

// Geometric programs over monomials and posynomials. Problems are solved in
// log space with a primal barrier method. The tangent monomial of a
// posynomial, used by successive convex approximation, also lives here.

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmpc::gp {

using VarId = Eigen::Index;

/// c * prod_i x_i^{a_i} with c > 0. The coefficient is stored as log c so
/// products and powers stay exact in log space.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(double coeff);
  Monomial(double coeff, std::initializer_list<std::pair<const VarId, double>> exponents);

  static Monomial variable(VarId v, double exponent = 1.0);
  static Monomial from_log_coeff(double log_coeff, std::map<VarId, double> exponents);

  double coeff() const;
  double log_coeff() const { return log_coeff_; }
  /// Zero exponents are never stored.
  const std::map<VarId, double>& exponents() const { return exponents_; }
  double exponent(VarId v) const;
  /// Largest variable id referenced, or -1 for a constant.
  VarId max_variable() const;

  Monomial& operator*=(const Monomial& rhs);
  Monomial& operator/=(const Monomial& rhs);
  Monomial& operator*=(double c);
  Monomial pow(double p) const;

  friend Monomial operator*(Monomial a, const Monomial& b) { return a *= b; }
  friend Monomial operator/(Monomial a, const Monomial& b) { return a /= b; }
  friend Monomial operator*(Monomial a, double c) { return a *= c; }
  friend Monomial operator*(double c, Monomial a) { return a *= c; }

 private:
  double log_coeff_ = 0.0;
  std::map<VarId, double> exponents_;
};

/// Nonempty sum of monomials.
class Posynomial {
 public:
  Posynomial() = default;
  Posynomial(Monomial m);  // NOLINT(google-explicit-constructor)
  explicit Posynomial(std::vector<Monomial> terms);

  const std::vector<Monomial>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  VarId max_variable() const;

  Posynomial& operator+=(const Monomial& m);
  Posynomial& operator+=(const Posynomial& p);
  Posynomial& operator*=(const Monomial& m);

  friend Posynomial operator+(Posynomial a, const Posynomial& b) { return a += b; }
  friend Posynomial operator*(Posynomial a, const Monomial& m) { return a *= m; }
  friend Posynomial operator*(const Monomial& m, Posynomial a) { return a *= m; }

 private:
  std::vector<Monomial> terms_;
};

/// Throws std::domain_error if any referenced coordinate is not strictly positive.
double evaluate(const Monomial& m, const Eigen::VectorXd& x);
double evaluate(const Posynomial& p, const Eigen::VectorXd& x);
/// d p / d x at a positive point.
Eigen::VectorXd gradient(const Posynomial& p, const Eigen::VectorXd& x);

struct VariableBounds {
  std::optional<double> lower;
  std::optional<double> upper;
};

/// minimize objective(x)  s.t.  constraint_i(x) <= 1,  lower <= x <= upper.
class GpProblem {
 public:
  VarId add_variable(std::string name, std::optional<double> lower = {},
                     std::optional<double> upper = {});
  void set_objective(Monomial objective) { objective_ = std::move(objective); }
  void add_constraint(Posynomial p);

  Eigen::Index num_variables() const { return static_cast<Eigen::Index>(names_.size()); }
  const Monomial& objective() const { return objective_; }
  const std::vector<Posynomial>& constraints() const { return constraints_; }
  const VariableBounds& bounds(VarId v) const { return bounds_.at(static_cast<std::size_t>(v)); }
  const std::string& name(VarId v) const { return names_.at(static_cast<std::size_t>(v)); }
  std::size_t num_bound_constraints() const;

  /// Posynomial constraints followed by bounds written as monomial
  /// constraints x/u <= 1 and l/x <= 1.
  std::vector<Posynomial> standard_constraints() const;

  /// Throws std::invalid_argument on unknown variables or bad bounds.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::vector<VariableBounds> bounds_;
  Monomial objective_;
  std::vector<Posynomial> constraints_;
};

/// log sum_j exp(a_j^T y + b_j); the log-space image of a posynomial.
class LogSumExp {
 public:
  LogSumExp() = default;
  LogSumExp(const Posynomial& p, Eigen::Index num_variables);

  /// Appends a term with the given offset and sparse exponent row.
  void add_term(double offset, std::vector<std::pair<Eigen::Index, double>> row);
  /// Adds `coefficient` to variable v in every term (shifts f by coefficient * y_v).
  void shift_all_terms(Eigen::Index v, double coefficient);

  double value(const Eigen::VectorXd& y) const;
  /// Value and gradient. When `second_moment` is given, adds
  /// scale * sum_j w_j a_j a_j^T, the softmax-weighted term curvature.
  double evaluate(const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                  Eigen::MatrixXd* second_moment = nullptr, double scale = 1.0) const;

  std::size_t num_terms() const { return offsets_.size(); }

 private:
  std::vector<double> offsets_;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows_;

  double term_exponent(std::size_t j, const Eigen::VectorXd& y) const;
};

/// Convex program in y = log x: minimize objective_offset + objective_gradient^T y
/// subject to constraints[i](y) <= 0.
struct LogSpaceProgram {
  Eigen::Index num_variables = 0;
  double objective_offset = 0.0;
  Eigen::VectorXd objective_gradient;
  std::vector<LogSumExp> constraints;

  double objective(const Eigen::VectorXd& y) const {
    return objective_offset + objective_gradient.dot(y);
  }
  double constraint(std::size_t i, const Eigen::VectorXd& y) const {
    return constraints[i].value(y);
  }
  Eigen::VectorXd constraint_gradient(std::size_t i, const Eigen::VectorXd& y) const;
  double max_constraint(const Eigen::VectorXd& y) const;
};

/// Exact convexification: objective becomes affine, each posynomial constraint
/// becomes a log-sum-exp of affine functions, bounds become affine.
LogSpaceProgram log_transform(const GpProblem& problem);

enum class GpStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(GpStatus s);

struct SolverOptions {
  double gap_tolerance = 1e-9;  // stop when m / t <= gap_tolerance
  int max_newton_steps = 200;   // per phase
  double line_search_alpha = 0.25;
  double line_search_beta = 0.5;
  double barrier_growth = 10.0;
  double initial_barrier = 1.0;
  double newton_tolerance = 1e-16;  // on half the squared Newton decrement
};

struct GpSolution {
  Eigen::VectorXd x;
  double objective_value = 0.0;
  GpStatus status = GpStatus::MaxIterations;
  int iterations = 0;         // Newton steps, main phase
  int phase1_iterations = 0;  // Newton steps spent finding a strictly feasible point
  double max_constraint_violation = 0.0;
  /// Duality gap of the final barrier iterate divided by the number of
  /// constraints (1/t); bounds both complementarity and suboptimality.
  double kkt_residual = 0.0;
  /// Infinity norm of the log-space Lagrangian gradient, with multipliers
  /// fitted by nonnegative least squares over the active constraints.
  double stationarity = 0.0;
  /// Log-space multipliers, one per entry of GpProblem::standard_constraints().
  Eigen::VectorXd duals;
};

/// Barrier method on the log-transformed problem. A phase-I search runs when
/// `initial_point` is absent or not strictly feasible.
GpSolution solve_gp(const GpProblem& problem, const SolverOptions& options = {},
                    const std::optional<Eigen::VectorXd>& initial_point = std::nullopt);

/// Tangent under-estimator of g at x0:
///   g~(x) = prod_i (m_i(x) / alpha_i)^{alpha_i},  alpha_i = m_i(x0) / g(x0).
/// g~(x0) = g(x0), grad g~(x0) = grad g(x0), and g~ <= g on the positive orthant.
/// Terms whose weight underflows below 1e-300 are left out; their indices are
/// appended to `dropped_terms` when given.
Monomial monomial_approximation(const Posynomial& g, const Eigen::VectorXd& x0,
                                std::vector<std::size_t>* dropped_terms = nullptr);

}  // namespace mmpc::gp
