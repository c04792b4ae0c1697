#include "uotkit/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// -eps <alpha x beta, e^{(f + g - C)/eps} - 1>; zero when eps = 0.
double entropic_term(const UotProblem& prob, const Vector& f, const Vector& g) {
  const double eps = prob.eps();
  if (eps == 0.0) return 0.0;
  const Vector& a = prob.alpha().weights();
  const Vector& b = prob.beta().weights();
  const Matrix& C = prob.C();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    if (b[j] == 0.0) continue;
    double col = 0.0;
    for (Eigen::Index i = 0; i < C.rows(); ++i)
      col += a[i] * std::expm1((f[i] + g[j] - C(i, j)) / eps);
    acc += b[j] * col;
  }
  return -eps * acc;
}

double weighted_neg_conj(const Entropy& e, const Vector& w, const Vector& pot) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (e.kind == Entropy::Kind::Berg && !(-pot[i] < e.rho)) return -kInf;
    acc += w[i] * -conj(e, -pot[i]);
  }
  return acc;
}

// Derivative of lam -> G(f, g, lam): <alpha, grad phi1*(-f - lam)> - <beta,
// grad phi2*(-g + lam)>.  `scale` receives the sum of both (positive) terms.
double g_slope(const UotProblem& p, const DualPair& d, double lam, double* scale = nullptr,
               double* curvature = nullptr) {
  const Vector& a = p.alpha().weights();
  const Vector& b = p.beta().weights();
  double s1 = 0.0, s2 = 0.0, h = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    s1 += a[i] * conj_grad(p.ent1(), -d.f[i] - lam);
    if (curvature) h += a[i] * conj_hess(p.ent1(), -d.f[i] - lam);
  }
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b[j] == 0.0) continue;
    s2 += b[j] * conj_grad(p.ent2(), -d.g[j] + lam);
    if (curvature) h += b[j] * conj_hess(p.ent2(), -d.g[j] + lam);
  }
  if (scale) *scale = s1 + s2;
  if (curvature) *curvature = h;
  return s1 - s2;
}

double min_over_support(const Vector& w, const Vector& pot) {
  double m = kInf;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) m = std::min(m, pot[i]);
  return m;
}

double lambda_star_newton(const UotProblem& p, const DualPair& d, std::optional<double> warm) {
  // Open domain (lower, upper) of lam where both conjugates are finite.
  double lower = -kInf, upper = kInf;
  if (p.ent1().kind == Entropy::Kind::Berg)
    lower = -p.ent1().rho - min_over_support(p.alpha().weights(), d.f);
  if (p.ent2().kind == Entropy::Kind::Berg)
    upper = p.ent2().rho + min_over_support(p.beta().weights(), d.g);
  if (!(lower < upper)) throw std::runtime_error("lambda_star: empty translation domain");

  double mid;
  if (std::isfinite(lower) && std::isfinite(upper)) mid = 0.5 * (lower + upper);
  else if (std::isfinite(lower)) mid = lower + 1.0;
  else if (std::isfinite(upper)) mid = upper - 1.0;
  else mid = 0.0;
  if (warm && *warm > lower && *warm < upper) mid = *warm;

  // The slope is decreasing in lam: find lo with slope > 0, hi with slope < 0.
  double lo = mid, hi = mid;
  double s = g_slope(p, d, mid);
  if (s == 0.0) return mid;
  auto probe = [&](double from, double bound, int dir) {
    double step = 1.0;
    for (int k = 0; k < 2100; ++k) {
      const double cand = std::isfinite(bound) ? bound + (from - bound) * std::ldexp(1.0, -(k + 1))
                                               : from + dir * step;
      step *= 2.0;
      const double sc = g_slope(p, d, cand);
      if ((dir < 0 && sc > 0.0) || (dir > 0 && sc < 0.0)) return cand;
    }
    throw std::runtime_error("lambda_star: cannot bracket the optimal translation");
  };
  if (s > 0.0) hi = probe(mid, upper, +1);
  else lo = probe(mid, lower, -1);

  double lam = 0.5 * (lo + hi);
  if (warm && *warm > lo && *warm < hi) lam = *warm;
  for (int it = 0; it < 200; ++it) {
    double scale = 0.0, curv = 0.0;
    const double sl = g_slope(p, d, lam, &scale, &curv);
    if (std::abs(sl) <= 1e-11 * std::max(1.0, scale)) return lam;
    if (sl > 0.0) lo = lam; else hi = lam;
    double next = lam + sl / curv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lam || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lam))
      return next;
    lam = next;
  }
  throw std::runtime_error("lambda_star: Newton did not converge");
}

}  // namespace

double SparsePlan::mass() const {
  double m = 0.0;
  for (const auto& e : entries) m += e.mass;
  return m;
}

Vector SparsePlan::row_sums(Eigen::Index n) const {
  Vector r = Vector::Zero(n);
  for (const auto& e : entries) r[e.i] += e.mass;
  return r;
}

Vector SparsePlan::col_sums(Eigen::Index m) const {
  Vector c = Vector::Zero(m);
  for (const auto& e : entries) c[e.j] += e.mass;
  return c;
}

double SparsePlan::cost(const Matrix& C) const {
  double acc = 0.0;
  for (const auto& e : entries) acc += e.mass * C(e.i, e.j);
  return acc;
}

Matrix SparsePlan::dense(Eigen::Index n, Eigen::Index m) const {
  Matrix P = Matrix::Zero(n, m);
  for (const auto& e : entries) P(e.i, e.j) += e.mass;
  return P;
}

UotProblem::UotProblem(DiscreteMeasure alpha, DiscreteMeasure beta, CostSpec cost,
                       Entropy ent1, Entropy ent2, double eps)
    : alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      cost_spec_(std::move(cost)),
      ent1_(ent1),
      ent2_(ent2),
      eps_(eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("eps must be nonnegative and finite");
  C_ = build_cost_matrix(alpha_, beta_, cost_spec_);
  Ct_ = C_.transpose();
  log_alpha_ = log_weights(alpha_.weights());
  log_beta_ = log_weights(beta_.weights());
}

UotProblem UotProblem::with_eps(double eps) const {
  UotProblem copy = *this;
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("eps must be nonnegative and finite");
  copy.eps_ = eps;
  return copy;
}

double max_constraint_violation(const Matrix& C, const Vector& f, const Vector& g) {
  double worst = -kInf;
  for (Eigen::Index j = 0; j < C.cols(); ++j)
    for (Eigen::Index i = 0; i < C.rows(); ++i)
      worst = std::max(worst, f[i] + g[j] - C(i, j));
  return worst;
}

double marginal_dual_terms(const UotProblem& prob, const Vector& f, const Vector& g) {
  return weighted_neg_conj(prob.ent1(), prob.alpha().weights(), f) +
         weighted_neg_conj(prob.ent2(), prob.beta().weights(), g);
}

double eval_F(const UotProblem& prob, const DualPair& d) {
  if (d.f.size() != prob.alpha().size() || d.g.size() != prob.beta().size())
    throw std::invalid_argument("dual pair does not match the problem size");
  if (prob.eps() == 0.0 && max_constraint_violation(prob.C(), d.f, d.g) > kDualFeasibilityTol)
    throw std::domain_error("infeasible dual: f + g exceeds C");
  return marginal_dual_terms(prob, d.f, d.g) + entropic_term(prob, d.f, d.g);
}

double eval_G(const UotProblem& prob, const DualPair& d, double lam) {
  return eval_F(prob, d.translated(lam));
}

double lambda_star(const UotProblem& prob, const DualPair& d, std::optional<double> warm_start) {
  if (!prob.ent1().strictly_convex_conjugate() || !prob.ent2().strictly_convex_conjugate())
    throw std::invalid_argument("optimal translation is not unique for balanced entropies");
  if (prob.both_kl()) {
    const double r1 = prob.ent1().rho, r2 = prob.ent2().rho;
    const double la = log_sum_exp(prob.log_alpha() - d.f / r1);
    const double lb = log_sum_exp(prob.log_beta() - d.g / r2);
    return r1 * r2 / (r1 + r2) * (la - lb);
  }
  return lambda_star_newton(prob, d, warm_start);
}

double eval_H(const UotProblem& prob, const DualPair& d) {
  if (prob.both_kl()) {
    const double r1 = prob.ent1().rho, r2 = prob.ent2().rho;
    const double t1 = r1 / (r1 + r2), t2 = r2 / (r1 + r2);
    const double la = log_sum_exp(prob.log_alpha() - d.f / r1);
    const double lb = log_sum_exp(prob.log_beta() - d.g / r2);
    return r1 * prob.alpha().mass() + r2 * prob.beta().mass() -
           (r1 + r2) * std::exp(t1 * la + t2 * lb) + entropic_term(prob, d.f, d.g);
  }
  const double lam = lambda_star(prob, d);
  const DualPair t = d.translated(lam);
  return marginal_dual_terms(prob, t.f, t.g) + entropic_term(prob, d.f, d.g);
}

std::pair<Vector, Vector> updated_marginals(const UotProblem& prob, const DualPair& d,
                                            double lam) {
  const Vector& a = prob.alpha().weights();
  const Vector& b = prob.beta().weights();
  Vector at(a.size()), bt(b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    at[i] = a[i] == 0.0 ? 0.0 : a[i] * conj_grad(prob.ent1(), -d.f[i] - lam);
  for (Eigen::Index j = 0; j < b.size(); ++j)
    bt[j] = b[j] == 0.0 ? 0.0 : b[j] * conj_grad(prob.ent2(), -d.g[j] + lam);
  return {std::move(at), std::move(bt)};
}

std::pair<Vector, Vector> updated_marginals(const UotProblem& prob, const DualPair& d) {
  return updated_marginals(prob, d, lambda_star(prob, d));
}

double eval_primal(const UotProblem& prob, const Matrix& plan) {
  const Matrix& C = prob.C();
  if (plan.rows() != C.rows() || plan.cols() != C.cols())
    throw std::invalid_argument("plan does not match the cost size");
  if ((plan.array() < 0.0).any()) throw std::invalid_argument("plan has negative mass");

  double value = (plan.array() * C.array()).sum();
  if (prob.eps() > 0.0) {
    const Matrix ref = prob.alpha().weights() * prob.beta().weights().transpose();
    const Eigen::Map<const Vector> pv(plan.data(), plan.size());
    const Eigen::Map<const Vector> rv(ref.data(), ref.size());
    value += prob.eps() * divergence(Entropy::kl(1.0), pv, rv);
  }
  value += divergence(prob.ent1(), plan.rowwise().sum(), prob.alpha().weights());
  value += divergence(prob.ent2(), plan.colwise().sum().transpose(), prob.beta().weights());
  return value;
}

double eval_primal(const UotProblem& prob, const SparsePlan& plan) {
  const Matrix& C = prob.C();
  const Vector& a = prob.alpha().weights();
  const Vector& b = prob.beta().weights();
  double value = 0.0;
  double kl = a.sum() * b.sum();
  for (const auto& e : plan.entries) {
    if (e.mass < 0.0) throw std::invalid_argument("plan has negative mass");
    if (e.i < 0 || e.i >= C.rows() || e.j < 0 || e.j >= C.cols())
      throw std::invalid_argument("plan index out of range");
    value += e.mass * C(e.i, e.j);
    if (e.mass > 0.0) {
      const double ref = a[e.i] * b[e.j];
      if (ref == 0.0) kl = kInf;
      else kl += e.mass * std::log(e.mass / ref) - e.mass;
    }
  }
  if (prob.eps() > 0.0) value += prob.eps() * kl;
  value += divergence(prob.ent1(), plan.row_sums(C.rows()), a);
  value += divergence(prob.ent2(), plan.col_sums(C.cols()), b);
  return value;
}

}  // namespace uot
