#include "uotkit/barycenter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "uotkit/entropies.hpp"
#include "uotkit/ot1d.hpp"

namespace uot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tuple_product(const std::vector<DiscreteMeasure>& inputs) {
  double p = 1.0;
  for (const auto& a : inputs) p *= static_cast<double>(a.size());
  return p;
}

MultiDual combine(const MultiDual& a, double wa, const MultiDual& b, double wb) {
  MultiDual out;
  for (std::size_t k = 0; k < a.f.size(); ++k) out.f.push_back(wa * a.f[k] + wb * b.f[k]);
  return out;
}

double kl_divergence(const Vector& mu, const Vector& nu) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (nu[i] == 0.0) {
      if (mu[i] > 0.0) return kInf;
      continue;
    }
    acc += (mu[i] > 0.0 ? mu[i] * std::log(mu[i] / nu[i]) : 0.0) - mu[i] + nu[i];
  }
  return acc;
}

void check_dual_shape(const std::vector<DiscreteMeasure>& inputs, const MultiDual& d) {
  if (d.f.size() != inputs.size()) throw std::invalid_argument("dual count does not match K");
  for (std::size_t k = 0; k < inputs.size(); ++k)
    if (d.f[k].size() != inputs[k].size())
      throw std::invalid_argument("dual length does not match its input");
}

}  // namespace

void BarycenterProblem::validate() const {
  if (inputs.size() < 2) throw std::invalid_argument("barycenter needs K >= 2 inputs");
  if (static_cast<std::size_t>(omega.size()) != inputs.size())
    throw std::invalid_argument("one weight per input expected");
  if ((omega.array() <= 0.0).any() || std::abs(omega.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("barycentric weights must be positive and sum to 1");
  if (!balanced && !(rho > 0.0 && std::isfinite(rho)))
    throw std::invalid_argument("rho must be positive");
}

double MultiPlan::mass() const {
  double m = 0.0;
  for (const auto& e : entries) m += e.mass;
  return m;
}

Vector MultiPlan::marginal(std::size_t k, Eigen::Index n) const {
  Vector out = Vector::Zero(n);
  for (const auto& e : entries) out[e.idx[k]] += e.mass;
  return out;
}

MultiDual MultiDual::zeros(const std::vector<DiscreteMeasure>& inputs) {
  MultiDual d;
  for (const auto& a : inputs) d.f.push_back(Vector::Zero(a.size()));
  return d;
}

BarycentricCost multimarginal_cost(const Vector& x, const Vector& w) {
  if (x.size() != w.size()) throw std::invalid_argument("point and weight counts differ");
  const double b = w.dot(x);
  return {w.dot((x.array() - b).square().matrix()), b};
}

double tuple_cost(const std::vector<DiscreteMeasure>& inputs, const Vector& omega,
                  const std::vector<Eigen::Index>& idx) {
  Vector x(static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t k = 0; k < inputs.size(); ++k) x[k] = inputs[k].points()[idx[k]];
  return multimarginal_cost(x, omega).cost;
}

MotResult solve_mot_1d(const std::vector<Vector>& weights,
                       const std::vector<DiscreteMeasure>& inputs, const Vector& omega) {
  const std::size_t K = inputs.size();
  if (K == 0 || weights.size() != K || static_cast<std::size_t>(omega.size()) != K)
    throw std::invalid_argument("solve_mot_1d: shape mismatch");
  double m0 = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (weights[k].size() != inputs[k].size())
      throw std::invalid_argument("solve_mot_1d: weight length mismatch");
    if ((weights[k].array() < 0.0).any()) throw std::invalid_argument("negative weight");
    const double m = weights[k].sum();
    if (k == 0) m0 = m;
    if (!(m > 0.0) || std::abs(m - m0) > kMassBalanceTol * std::max(m, m0))
      throw std::invalid_argument("solve_mot_1d needs equal masses");
  }
  std::vector<Vector> a(K);
  for (std::size_t k = 0; k < K; ++k) a[k] = weights[k] * (m0 / weights[k].sum());

  MotResult out;
  out.duals = MultiDual::zeros(inputs);
  std::vector<Eigen::Index> idx(K, 0);
  std::vector<double> rem(K);
  for (std::size_t k = 0; k < K; ++k) rem[k] = a[k][0];
  out.duals.f[0][0] = tuple_cost(inputs, omega, idx);

  auto emit = [&](double mass) {
    if (mass > 0.0) out.plan.entries.push_back({idx, mass});
  };
  for (;;) {
    std::size_t p = K;
    for (std::size_t k = 0; k < K; ++k) {
      if (idx[k] + 1 >= inputs[k].size()) continue;
      if (p == K || rem[k] < rem[p]) p = k;
    }
    if (p == K) break;
    const double moved = rem[p];
    emit(moved);
    for (std::size_t k = 0; k < K; ++k)
      if (k != p) rem[k] = std::max(rem[k] - moved, 0.0);
    ++idx[p];
    rem[p] = a[p][idx[p]];
    double others = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      if (k != p) others += out.duals.f[k][idx[k]];
    out.duals.f[p][idx[p]] = tuple_cost(inputs, omega, idx) - others;
  }
  emit(*std::min_element(rem.begin(), rem.end()));

  for (const auto& e : out.plan.entries) out.primal += e.mass * tuple_cost(inputs, omega, e.idx);
  for (std::size_t k = 0; k < K; ++k) out.dual += a[k].dot(out.duals.f[k]);
  return out;
}

MotResult solve_mot_1d(const std::vector<DiscreteMeasure>& inputs, const Vector& omega) {
  std::vector<Vector> w;
  for (const auto& a : inputs) w.push_back(a.weights());
  return solve_mot_1d(w, inputs, omega);
}

double max_multidual_violation(const std::vector<DiscreteMeasure>& inputs, const Vector& omega,
                               const MultiDual& d, double limit) {
  check_dual_shape(inputs, d);
  if (tuple_product(inputs) > limit)
    throw std::invalid_argument("too many tuples for an exhaustive check");
  const std::size_t K = inputs.size();
  std::vector<Eigen::Index> idx(K, 0);
  double worst = -kInf;
  for (;;) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += d.f[k][idx[k]];
    worst = std::max(worst, s - tuple_cost(inputs, omega, idx));
    std::size_t k = 0;
    while (k < K && ++idx[k] == inputs[k].size()) idx[k++] = 0;
    if (k == K) break;
  }
  return worst;
}

double support_multidual_violation(const std::vector<DiscreteMeasure>& inputs,
                                   const Vector& omega, const MultiDual& d,
                                   const MultiPlan& plan) {
  check_dual_shape(inputs, d);
  double worst = -kInf;
  for (const auto& e : plan.entries) {
    double s = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) s += d.f[k][e.idx[k]];
    worst = std::max(worst, s - tuple_cost(inputs, omega, e.idx));
  }
  return worst;
}

Vector multimarginal_lambda(const MultiDual& d, const std::vector<DiscreteMeasure>& inputs,
                            const Vector& omega, double rho) {
  check_dual_shape(inputs, d);
  const auto K = static_cast<Eigen::Index>(inputs.size());
  Vector q(K), r(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!(inputs[k].mass() > 0.0)) throw std::invalid_argument("zero-mass input");
    r[k] = omega[k] * rho;
    q[k] = log_sum_exp(log_weights(inputs[k].weights()) - d.f[k] / r[k]);
  }
  const double avg = r.dot(q) / r.sum();
  Vector lam(K);
  for (Eigen::Index k = 0; k < K; ++k) lam[k] = r[k] * q[k] - r[k] * avg;
  return lam;
}

std::vector<Vector> multimarginal_updated_weights(const MultiDual& d,
                                                  const std::vector<DiscreteMeasure>& inputs,
                                                  const Vector& omega, double rho,
                                                  const Vector& lambda) {
  std::vector<Vector> out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const double r = omega[static_cast<Eigen::Index>(k)] * rho;
    const double l = lambda[static_cast<Eigen::Index>(k)];
    out.push_back(
        (inputs[k].weights().array() * (-(d.f[k].array() + l) / r).exp()).matrix());
  }
  return out;
}

double multimarginal_dual_value(const BarycenterProblem& prob, const MultiDual& d) {
  const Vector lam = multimarginal_lambda(d, prob.inputs, prob.omega, prob.rho);
  double acc = 0.0;
  for (std::size_t k = 0; k < prob.K(); ++k) {
    const double r = prob.rho_k(k);
    const double l = lam[static_cast<Eigen::Index>(k)];
    const double mt = std::exp(log_sum_exp(log_weights(prob.inputs[k].weights()) -
                                           (d.f[k].array() + l).matrix() / r));
    acc += r * (prob.inputs[k].mass() - mt);
  }
  return acc;
}

double multimarginal_primal(const BarycenterProblem& prob, const MultiPlan& plan) {
  double acc = 0.0;
  for (const auto& e : plan.entries) acc += e.mass * tuple_cost(prob.inputs, prob.omega, e.idx);
  for (std::size_t k = 0; k < prob.K(); ++k) {
    const Vector gk = plan.marginal(k, prob.inputs[k].size());
    if (prob.balanced) {
      if ((gk - prob.inputs[k].weights()).cwiseAbs().maxCoeff() >
          1e-9 * std::max(1.0, prob.inputs[k].mass()))
        return kInf;
      continue;
    }
    acc += prob.rho_k(k) * kl_divergence(gk, prob.inputs[k].weights());
  }
  return acc;
}

DiscreteMeasure extract_barycenter(const MultiPlan& plan, const std::vector<DiscreteMeasure>& inputs,
                                   const Vector& omega) {
  if (plan.entries.empty()) throw std::invalid_argument("empty plan");
  const auto n = static_cast<Eigen::Index>(plan.entries.size());
  Vector pts(n), w(n);
  Vector x(static_cast<Eigen::Index>(inputs.size()));
  for (Eigen::Index e = 0; e < n; ++e) {
    const auto& entry = plan.entries[static_cast<std::size_t>(e)];
    for (std::size_t k = 0; k < inputs.size(); ++k) x[k] = inputs[k].points()[entry.idx[k]];
    pts[e] = omega.dot(x);
    w[e] = entry.mass;
  }
  return DiscreteMeasure(pts, w);
}

BarycenterResult fw_barycenter(const BarycenterProblem& prob, const FwConfig& config,
                               const std::optional<MultiDual>& init) {
  prob.validate();
  if (!(config.gap_tol > 0.0)) throw std::invalid_argument("gap_tol must be positive");
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  const bool exhaustive = tuple_product(prob.inputs) <= 1e5;
  BarycenterResult out;

  if (prob.balanced) {
    MotResult mot = solve_mot_1d(prob.inputs, prob.omega);
    const double viol =
        exhaustive ? max_multidual_violation(prob.inputs, prob.omega, mot.duals)
                   : support_multidual_violation(prob.inputs, prob.omega, mot.duals, mot.plan);
    IterRecord rec;
    rec.h0 = mot.dual;
    rec.pd_gap = mot.primal - mot.dual;
    out.trace.push_back(rec);
    out.iterations = 1;
    out.converged = true;
    out.final = mot.duals;
    out.certificate = assemble_certificate(mot.primal, mot.dual, viol, config.gap_tol);
    out.barycenter = extract_barycenter(mot.plan, prob.inputs, prob.omega);
    out.plan = std::move(mot.plan);
    return out;
  }

  MultiDual d = init ? *init : MultiDual::zeros(prob.inputs);
  check_dual_shape(prob.inputs, d);
  if (exhaustive && max_multidual_violation(prob.inputs, prob.omega, d) > kDualFeasibilityTol)
    throw std::invalid_argument("infeasible init");

  const auto start = std::chrono::steady_clock::now();
  auto H = [&](const MultiDual& x) { return multimarginal_dual_value(prob, x); };
  Vector lam;
  MotResult lmo;
  double h = 0.0, primal = 0.0;
  bool fresh = false;
  auto linearize = [&](const MultiDual& x) {
    lam = multimarginal_lambda(x, prob.inputs, prob.omega, prob.rho);
    const auto at = multimarginal_updated_weights(x, prob.inputs, prob.omega, prob.rho, lam);
    lmo = solve_mot_1d(at, prob.inputs, prob.omega);
    h = H(x);
    primal = multimarginal_primal(prob, lmo.plan);
    double lin = 0.0;
    for (std::size_t k = 0; k < prob.K(); ++k) lin += at[k].dot(x.f[k]);
    return lmo.dual - lin;
  };

  for (int t = 0; t < config.max_iters; ++t) {
    IterRecord rec;
    rec.fw_gap = linearize(d);
    fresh = true;
    rec.h0 = h;
    rec.pd_gap = primal - h;
    if (!out.trace.empty()) rec.delta_f = std::abs(h - out.trace.back().h0);
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    out.trace.push_back(rec);
    out.iterations = t + 1;
    if (rec.pd_gap < config.gap_tol) {
      out.converged = true;
      break;
    }
    double gamma;
    if (config.step == FwStep::Harmonic) {
      gamma = 2.0 / (2.0 + t);
    } else {
      gamma = line_search_concave(
          [&](double s) { return H(combine(d, 1.0 - s, lmo.duals, s)); }, 0.0, 1.0);
    }
    d = combine(d, 1.0 - gamma, lmo.duals, gamma);
    fresh = false;
  }
  if (!fresh) linearize(d);

  out.final = d;
  for (std::size_t k = 0; k < prob.K(); ++k)
    out.final.f[k].array() += lam[static_cast<Eigen::Index>(k)];
  const double viol = exhaustive
                          ? max_multidual_violation(prob.inputs, prob.omega, d)
                          : support_multidual_violation(prob.inputs, prob.omega, d, lmo.plan);
  out.certificate = assemble_certificate(primal, h, std::max(0.0, viol), config.gap_tol);
  out.barycenter = extract_barycenter(lmo.plan, prob.inputs, prob.omega);
  out.plan = std::move(lmo.plan);
  return out;
}

}  // namespace uot
