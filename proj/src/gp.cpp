#include "mmpc/gp.hpp"

#include "mmpc/kkt.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace mmpc::gp {

namespace {
// Log-space slack below which a constraint counts as active for the
// stationarity measure.
constexpr double kActiveSlack = 1e-6;
}  // namespace

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(double coeff) {
  if (!(coeff > 0.0) || !std::isfinite(coeff))
    throw std::invalid_argument("monomial coefficient must be positive and finite");
  log_coeff_ = std::log(coeff);
}

Monomial::Monomial(double coeff,
                   std::initializer_list<std::pair<const VarId, double>> exponents)
    : Monomial(coeff) {
  for (const auto& [v, a] : exponents) {
    if (v < 0) throw std::invalid_argument("negative variable id");
    if (a != 0.0) exponents_[v] += a;
  }
}

Monomial Monomial::variable(VarId v, double exponent) { return Monomial(1.0, {{v, exponent}}); }

Monomial Monomial::from_log_coeff(double log_coeff, std::map<VarId, double> exponents) {
  if (!std::isfinite(log_coeff)) throw std::invalid_argument("log coefficient must be finite");
  Monomial m;
  m.log_coeff_ = log_coeff;
  for (auto it = exponents.begin(); it != exponents.end();) {
    if (it->first < 0) throw std::invalid_argument("negative variable id");
    it = it->second == 0.0 ? exponents.erase(it) : std::next(it);
  }
  m.exponents_ = std::move(exponents);
  return m;
}

double Monomial::coeff() const { return std::exp(log_coeff_); }

double Monomial::exponent(VarId v) const {
  const auto it = exponents_.find(v);
  return it == exponents_.end() ? 0.0 : it->second;
}

VarId Monomial::max_variable() const {
  return exponents_.empty() ? VarId{-1} : exponents_.rbegin()->first;
}

Monomial& Monomial::operator*=(const Monomial& rhs) {
  log_coeff_ += rhs.log_coeff_;
  for (const auto& [v, a] : rhs.exponents_) {
    const double e = (exponents_[v] += a);
    if (e == 0.0) exponents_.erase(v);
  }
  return *this;
}

Monomial& Monomial::operator/=(const Monomial& rhs) { return *this *= rhs.pow(-1.0); }

Monomial& Monomial::operator*=(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("monomial scale must be positive");
  log_coeff_ += std::log(c);
  return *this;
}

Monomial Monomial::pow(double p) const {
  Monomial m;
  if (p == 0.0) return m;
  m.log_coeff_ = log_coeff_ * p;
  for (const auto& [v, a] : exponents_) m.exponents_[v] = a * p;
  return m;
}

// ---------------------------------------------------------------------------
// Posynomial

Posynomial::Posynomial(Monomial m) { terms_.push_back(std::move(m)); }

Posynomial::Posynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("posynomial needs at least one term");
}

VarId Posynomial::max_variable() const {
  VarId v = -1;
  for (const auto& t : terms_) v = std::max(v, t.max_variable());
  return v;
}

Posynomial& Posynomial::operator+=(const Monomial& m) {
  terms_.push_back(m);
  return *this;
}

Posynomial& Posynomial::operator+=(const Posynomial& p) {
  terms_.insert(terms_.end(), p.terms_.begin(), p.terms_.end());
  return *this;
}

Posynomial& Posynomial::operator*=(const Monomial& m) {
  for (auto& t : terms_) t *= m;
  return *this;
}

namespace {

double log_monomial(const Monomial& m, const Eigen::VectorXd& x) {
  double s = m.log_coeff();
  for (const auto& [v, a] : m.exponents()) {
    if (v >= x.size()) throw std::domain_error("point has too few coordinates");
    if (!(x(v) > 0.0)) throw std::domain_error("posynomial evaluated at a nonpositive point");
    s += a * std::log(x(v));
  }
  return s;
}

}  // namespace

double evaluate(const Monomial& m, const Eigen::VectorXd& x) {
  return std::exp(log_monomial(m, x));
}

double evaluate(const Posynomial& p, const Eigen::VectorXd& x) {
  if (p.empty()) throw std::invalid_argument("empty posynomial");
  double s = 0.0;
  for (const auto& t : p.terms()) s += evaluate(t, x);
  return s;
}

Eigen::VectorXd gradient(const Posynomial& p, const Eigen::VectorXd& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& t : p.terms()) {
    const double value = evaluate(t, x);
    for (const auto& [v, a] : t.exponents()) g(v) += a * value / x(v);
  }
  return g;
}

// ---------------------------------------------------------------------------
// GpProblem

VarId GpProblem::add_variable(std::string name, std::optional<double> lower,
                              std::optional<double> upper) {
  names_.push_back(std::move(name));
  bounds_.push_back({lower, upper});
  return static_cast<VarId>(names_.size()) - 1;
}

void GpProblem::add_constraint(Posynomial p) {
  if (p.empty()) throw std::invalid_argument("constraint posynomial is empty");
  constraints_.push_back(std::move(p));
}

std::size_t GpProblem::num_bound_constraints() const {
  std::size_t n = 0;
  for (const auto& b : bounds_) n += (b.lower ? 1 : 0) + (b.upper ? 1 : 0);
  return n;
}

std::vector<Posynomial> GpProblem::standard_constraints() const {
  std::vector<Posynomial> out = constraints_;
  for (VarId v = 0; v < num_variables(); ++v) {
    const auto& b = bounds_[static_cast<std::size_t>(v)];
    if (b.upper) out.emplace_back(Monomial(1.0 / *b.upper, {{v, 1.0}}));
    if (b.lower) out.emplace_back(Monomial(*b.lower, {{v, -1.0}}));
  }
  return out;
}

void GpProblem::validate() const {
  const VarId n = num_variables();
  if (objective_.max_variable() >= n)
    throw std::invalid_argument("objective references an unknown variable");
  for (std::size_t i = 0; i < constraints_.size(); ++i)
    if (constraints_[i].max_variable() >= n)
      throw std::invalid_argument("constraint " + std::to_string(i) +
                                  " references an unknown variable");
  for (VarId v = 0; v < n; ++v) {
    const auto& b = bounds_[static_cast<std::size_t>(v)];
    if (b.lower && !(*b.lower > 0.0))
      throw std::invalid_argument("lower bound of " + name(v) + " must be positive");
    if (b.upper && !(*b.upper > 0.0))
      throw std::invalid_argument("upper bound of " + name(v) + " must be positive");
    if (b.lower && b.upper && !(*b.lower < *b.upper))
      throw std::invalid_argument("empty bound interval for " + name(v));
  }
}

// ---------------------------------------------------------------------------
// Log-space image

LogSumExp::LogSumExp(const Posynomial& p, Eigen::Index num_variables) {
  if (p.empty()) throw std::invalid_argument("empty posynomial");
  for (const auto& t : p.terms()) {
    std::vector<std::pair<Eigen::Index, double>> row;
    row.reserve(t.exponents().size());
    for (const auto& [v, a] : t.exponents()) {
      if (v >= num_variables) throw std::invalid_argument("term references unknown variable");
      row.emplace_back(v, a);
    }
    add_term(t.log_coeff(), std::move(row));
  }
}

void LogSumExp::add_term(double offset, std::vector<std::pair<Eigen::Index, double>> row) {
  offsets_.push_back(offset);
  rows_.push_back(std::move(row));
}

void LogSumExp::shift_all_terms(Eigen::Index v, double coefficient) {
  for (auto& row : rows_) {
    auto it = std::find_if(row.begin(), row.end(), [v](const auto& e) { return e.first == v; });
    if (it == row.end())
      row.emplace_back(v, coefficient);
    else
      it->second += coefficient;
  }
}

double LogSumExp::term_exponent(std::size_t j, const Eigen::VectorXd& y) const {
  double z = offsets_[j];
  for (const auto& [v, a] : rows_[j]) z += a * y(v);
  return z;
}

double LogSumExp::value(const Eigen::VectorXd& y) const {
  if (offsets_.size() == 1) return term_exponent(0, y);
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < offsets_.size(); ++j) zmax = std::max(zmax, term_exponent(j, y));
  double s = 0.0;
  for (std::size_t j = 0; j < offsets_.size(); ++j) s += std::exp(term_exponent(j, y) - zmax);
  return zmax + std::log(s);
}

double LogSumExp::evaluate(const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                           Eigen::MatrixXd* second_moment, double scale) const {
  const double f = value(y);
  grad.setZero(y.size());
  for (std::size_t j = 0; j < offsets_.size(); ++j) {
    const double w = std::exp(term_exponent(j, y) - f);
    for (const auto& [v, a] : rows_[j]) grad(v) += w * a;
    if (second_moment) {
      const double ws = w * scale;
      for (const auto& [u, au] : rows_[j])
        for (const auto& [v, av] : rows_[j]) (*second_moment)(u, v) += ws * au * av;
    }
  }
  return f;
}

Eigen::VectorXd LogSpaceProgram::constraint_gradient(std::size_t i,
                                                     const Eigen::VectorXd& y) const {
  Eigen::VectorXd g;
  constraints[i].evaluate(y, g);
  return g;
}

double LogSpaceProgram::max_constraint(const Eigen::VectorXd& y) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) m = std::max(m, c.value(y));
  return m;
}

LogSpaceProgram log_transform(const GpProblem& problem) {
  problem.validate();
  LogSpaceProgram prog;
  prog.num_variables = problem.num_variables();
  prog.objective_offset = problem.objective().log_coeff();
  prog.objective_gradient = Eigen::VectorXd::Zero(prog.num_variables);
  for (const auto& [v, a] : problem.objective().exponents()) prog.objective_gradient(v) = a;
  for (const auto& p : problem.standard_constraints())
    prog.constraints.emplace_back(p, prog.num_variables);
  return prog;
}

const char* to_string(GpStatus s) {
  switch (s) {
    case GpStatus::Optimal: return "Optimal";
    case GpStatus::Infeasible: return "Infeasible";
    case GpStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Barrier method

namespace {

constexpr double kQuadraticRegion = 1e-2;  // squared Newton decrement

struct BarrierRun {
  Eigen::VectorXd y;
  double t = 0.0;
  int newton_steps = 0;
  bool converged = false;  // reached m / t <= gap tolerance
  bool stopped = false;    // the outer-iteration predicate asked to stop
};

// Newton direction for H d = -g, regularizing if the factorization breaks down.
Eigen::VectorXd newton_direction(Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
  Eigen::VectorXd d = H.partialPivLu().solve(-g);
  if (d.allFinite()) return d;
  const double shift = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
  H.diagonal().array() += shift;
  return H.partialPivLu().solve(-g);
}

// Minimizes t * c^T y - sum_i log(-f_i(y)) from a strictly feasible y, then
// grows t until m / t <= tolerance. `stop` is consulted after each centering.
BarrierRun barrier_method(const LogSpaceProgram& prog, Eigen::VectorXd y,
                          const SolverOptions& opts,
                          const std::function<bool(const Eigen::VectorXd&)>& stop) {
  const Eigen::Index n = prog.num_variables;
  const auto m = static_cast<double>(prog.constraints.size());
  const std::size_t nc = prog.constraints.size();

  BarrierRun run;
  run.t = opts.initial_barrier;

  Eigen::VectorXd grad(n), gi(n), d(n), y_trial(n);
  Eigen::MatrixXd H(n, n);
  std::vector<double> f(nc), f_trial(nc);

  auto eval_constraints = [&](const Eigen::VectorXd& point, std::vector<double>& out) {
    for (std::size_t i = 0; i < nc; ++i) {
      out[i] = prog.constraints[i].value(point);
      if (!(out[i] < 0.0)) return false;
    }
    return true;
  };

  if (!eval_constraints(y, f)) throw std::logic_error("barrier start is not strictly feasible");

  for (;;) {
    // Centering.
    double best_decrement2 = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (;;) {
      grad = run.t * prog.objective_gradient;
      H.setZero();
      for (std::size_t i = 0; i < nc; ++i) {
        const double fi = prog.constraints[i].value(y);
        const double s = -fi;
        prog.constraints[i].evaluate(y, gi, &H, 1.0 / s);
        grad += gi / s;
        H.noalias() += (1.0 / (s * s) - 1.0 / s) * gi * gi.transpose();
        f[i] = fi;
      }
      d = newton_direction(H, grad);
      const double slope = grad.dot(d);
      const double decrement2 = -slope;
      if (!(decrement2 > 0.0) || decrement2 / 2.0 <= opts.newton_tolerance) break;
      if (run.newton_steps >= opts.max_newton_steps) {
        run.y = y;
        return run;
      }
      ++run.newton_steps;

      if (decrement2 < kQuadraticRegion) {
        // Barrier values near active constraints carry relative noise far above
        // the predicted decrease here, so take the pure Newton step and stop
        // once the decrement has stopped shrinking (roundoff floor).
        if (decrement2 > 0.5 * best_decrement2) {
          if (++stalled >= 3) break;
        } else {
          best_decrement2 = decrement2;
        }
        y_trial = y + d;
        if (eval_constraints(y_trial, f_trial)) {
          y = y_trial;
          continue;
        }
      }

      double step = 1.0;
      bool accepted = false;
      while (step > 1e-20) {
        y_trial = y + step * d;
        if (eval_constraints(y_trial, f_trial)) {
          double change = run.t * step * prog.objective_gradient.dot(d);
          for (std::size_t i = 0; i < nc; ++i) change -= std::log(f_trial[i] / f[i]);
          if (change <= opts.line_search_alpha * step * slope) {
            accepted = true;
            break;
          }
        }
        step *= opts.line_search_beta;
      }
      if (!accepted) break;  // no representable decrease left; treat as centered
      y = y_trial;
    }

    if (stop && stop(y)) {
      run.stopped = true;
      break;
    }
    if (m / run.t <= opts.gap_tolerance) {
      run.converged = true;
      break;
    }
    run.t *= opts.barrier_growth;
  }
  run.y = y;
  return run;
}

constexpr double kPhaseOneBox = 40.0;  // half-width of the log-space search box

// Phase I: minimize s subject to f_i(y) <= s and s >= -1, started from
// (y0, max_i f_i(y0) + 1) inside |y - y0| < kPhaseOneBox. Stops as soon as a centered iterate is strictly
// feasible for the original constraints.
struct PhaseOneResult {
  std::optional<Eigen::VectorXd> y;
  int newton_steps = 0;
  bool exhausted = false;
};

PhaseOneResult phase_one(const LogSpaceProgram& prog, const Eigen::VectorXd& y0,
                         const SolverOptions& opts) {
  const Eigen::Index n = prog.num_variables;
  LogSpaceProgram aux;
  aux.num_variables = n + 1;
  aux.objective_gradient = Eigen::VectorXd::Zero(n + 1);
  aux.objective_gradient(n) = 1.0;
  for (const auto& c : prog.constraints) {
    LogSumExp shifted = c;
    shifted.shift_all_terms(n, -1.0);
    aux.constraints.push_back(std::move(shifted));
  }
  LogSumExp floor_bound;
  floor_bound.add_term(-1.0, {{n, -1.0}});
  aux.constraints.push_back(std::move(floor_bound));
  // Keeps the auxiliary problem bounded when the feasible set is not.
  for (Eigen::Index v = 0; v < n; ++v) {
    LogSumExp upper, lower;
    upper.add_term(-y0(v) - kPhaseOneBox, {{v, 1.0}});
    lower.add_term(y0(v) - kPhaseOneBox, {{v, -1.0}});
    aux.constraints.push_back(std::move(upper));
    aux.constraints.push_back(std::move(lower));
  }

  Eigen::VectorXd z(n + 1);
  z.head(n) = y0;
  z(n) = std::max(prog.max_constraint(y0), -0.5) + 1.0;

  auto feasible = [&](const Eigen::VectorXd& point) {
    return prog.max_constraint(point.head(n)) < 0.0;
  };
  BarrierRun run = barrier_method(aux, z, opts, feasible);
  PhaseOneResult out;
  out.newton_steps = run.newton_steps;
  if (run.stopped) out.y = run.y.head(n);
  out.exhausted = !run.stopped && !run.converged;
  return out;
}

}  // namespace

GpSolution solve_gp(const GpProblem& problem, const SolverOptions& options,
                    const std::optional<Eigen::VectorXd>& initial_point) {
  const LogSpaceProgram prog = log_transform(problem);
  const Eigen::Index n = prog.num_variables;
  const std::vector<Posynomial> constraints = problem.standard_constraints();

  GpSolution sol;
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(n);
  if (initial_point) {
    if (initial_point->size() != n)
      throw std::invalid_argument("initial point has the wrong dimension");
    if (!(initial_point->array() > 0.0).all())
      throw std::domain_error("initial point must be strictly positive");
    y0 = initial_point->array().log().matrix();
  }

  auto finish = [&](const Eigen::VectorXd& y) {
    sol.x = y.array().exp().matrix();
    sol.objective_value = std::exp(prog.objective(y));
    double violation = 0.0;
    for (std::size_t i = 0; i < prog.constraints.size(); ++i)
      violation = std::max(violation, std::expm1(prog.constraint(i, y)));
    sol.max_constraint_violation = violation;
  };

  if (!constraints.empty() && !(prog.max_constraint(y0) < 0.0)) {
    PhaseOneResult p1 = phase_one(prog, y0, options);
    sol.phase1_iterations = p1.newton_steps;
    if (!p1.y) {
      sol.status = p1.exhausted ? GpStatus::MaxIterations : GpStatus::Infeasible;
      finish(y0);
      return sol;
    }
    y0 = *p1.y;
  }

  if (constraints.empty()) {
    // Nothing bounds an affine objective unless it is constant.
    sol.status = prog.objective_gradient.isZero() ? GpStatus::Optimal : GpStatus::MaxIterations;
    sol.duals = Eigen::VectorXd(0);
    finish(y0);
    return sol;
  }

  BarrierRun run = barrier_method(prog, y0, options, {});
  sol.iterations = run.newton_steps;
  finish(run.y);

  const std::size_t nc = prog.constraints.size();
  sol.duals.resize(static_cast<Eigen::Index>(nc));
  Eigen::MatrixXd jacobian(static_cast<Eigen::Index>(nc), prog.num_variables);
  Eigen::VectorXd values(static_cast<Eigen::Index>(nc));
  for (std::size_t i = 0; i < nc; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    values(r) = prog.constraint(i, run.y);
    sol.duals(r) = 1.0 / (run.t * -values(r));
    jacobian.row(r) = prog.constraint_gradient(i, run.y).transpose();
  }
  sol.kkt_residual = 1.0 / run.t;
  sol.stationarity =
      kkt_stationarity<double>(prog.objective_gradient, jacobian, values, kActiveSlack).stationarity;
  sol.status = run.converged ? GpStatus::Optimal : GpStatus::MaxIterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Tangent monomial approximation

Monomial monomial_approximation(const Posynomial& g, const Eigen::VectorXd& x0,
                                std::vector<std::size_t>* dropped_terms) {
  if (g.empty()) throw std::invalid_argument("empty posynomial");
  const std::size_t nt = g.size();
  std::vector<double> log_terms(nt);
  double lmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nt; ++i) {
    log_terms[i] = log_monomial(g.terms()[i], x0);
    lmax = std::max(lmax, log_terms[i]);
  }
  double s = 0.0;
  for (double l : log_terms) s += std::exp(l - lmax);
  const double log_g = lmax + std::log(s);

  // log g~ = sum_i alpha_i (log c_i - log alpha_i) + sum_i alpha_i a_i^T log x
  double log_coeff = 0.0;
  std::map<VarId, double> exps;
  for (std::size_t i = 0; i < nt; ++i) {
    const double log_alpha = log_terms[i] - log_g;
    const double alpha = std::exp(log_alpha);
    if (!(alpha >= 1e-300)) {
      if (dropped_terms) dropped_terms->push_back(i);
      continue;
    }
    const Monomial& m = g.terms()[i];
    log_coeff += alpha * (m.log_coeff() - log_alpha);
    for (const auto& [v, a] : m.exponents()) exps[v] += alpha * a;
  }
  return Monomial::from_log_coeff(log_coeff, std::move(exps));
}

}  // namespace mmpc::gp
