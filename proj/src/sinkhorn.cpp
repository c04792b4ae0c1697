#include "uotkit/sinkhorn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "uotkit/certify.hpp"

namespace uot {

namespace {

void require_eps(const UotProblem& prob) {
  if (!(prob.eps() > 0.0)) throw std::invalid_argument("sinkhorn iterations need eps > 0");
}

void require_kl(const UotProblem& prob) {
  if (!prob.both_kl()) throw std::invalid_argument("h-sinkhorn requires kl entropies");
}

Vector apply_aprox(const Entropy& e, double eps, const Vector& smin) {
  if (e.kind == Entropy::Kind::KL) return (e.rho / (eps + e.rho)) * smin;
  if (e.kind == Entropy::Kind::Balanced) return smin;
  Vector out(smin.size());
  for (Eigen::Index i = 0; i < smin.size(); ++i) out[i] = -aprox(e, eps, -smin[i]);
  return out;
}

Vector concat(const DualPair& d) {
  Vector x(d.f.size() + d.g.size());
  x << d.f, d.g;
  return x;
}

DualPair split(const Vector& x, Eigen::Index n) {
  return {x.head(n), x.tail(x.size() - n)};
}

}  // namespace

Vector sinkhorn_update_g(const UotProblem& prob, const Vector& f) {
  require_eps(prob);
  const Vector s = softmin_cols(prob.log_alpha(), prob.eps(), prob.C(), f);
  return apply_aprox(prob.ent2(), prob.eps(), s);
}

Vector sinkhorn_update_f(const UotProblem& prob, const Vector& g) {
  require_eps(prob);
  const Vector s = softmin_cols(prob.log_beta(), prob.eps(), prob.Ct(), g);
  return apply_aprox(prob.ent1(), prob.eps(), s);
}

DualPair f_sinkhorn_step(const UotProblem& prob, const DualPair& d) {
  DualPair out;
  out.g = sinkhorn_update_g(prob, d.f);
  out.f = sinkhorn_update_f(prob, out.g);
  return out;
}

std::pair<DualPair, double> g_sinkhorn_step(const UotProblem& prob, const DualPair& d,
                                            double lam) {
  DualPair out;
  // Coordinate maximization of G over gbar with (fbar, lam) fixed is the
  // F-update of g = gbar - lam against f = fbar + lam.
  out.g = (sinkhorn_update_g(prob, (d.f.array() + lam).matrix()).array() + lam).matrix();
  out.f = (sinkhorn_update_f(prob, (out.g.array() - lam).matrix()).array() - lam).matrix();
  const double next = lambda_star(prob, out, lam);
  return {std::move(out), next};
}

Vector h_update_f(const UotProblem& prob, const Vector& gbar) {
  require_eps(prob);
  require_kl(prob);
  const double eps = prob.eps(), r1 = prob.ent1().rho, r2 = prob.ent2().rho;
  const Vector s = softmin_cols(prob.log_beta(), eps, prob.Ct(), gbar);
  const double shift = softmin_log(prob.log_beta(), r2, gbar);
  Vector fhat = (r1 / (r1 + eps)) * s;
  fhat.array() -= eps / (eps + r1) * r1 / (r1 + r2) * shift;
  const double k = eps / (eps + r1) * r2 / (r1 + r2);
  fhat.array() += k / (1.0 - k) * softmin_log(prob.log_alpha(), r1, fhat);
  return fhat;
}

Vector h_update_g(const UotProblem& prob, const Vector& fbar) {
  require_eps(prob);
  require_kl(prob);
  const double eps = prob.eps(), r1 = prob.ent1().rho, r2 = prob.ent2().rho;
  const Vector s = softmin_cols(prob.log_alpha(), eps, prob.C(), fbar);
  const double shift = softmin_log(prob.log_alpha(), r1, fbar);
  Vector ghat = (r2 / (r2 + eps)) * s;
  ghat.array() -= eps / (eps + r2) * r2 / (r1 + r2) * shift;
  const double k = eps / (eps + r2) * r1 / (r1 + r2);
  ghat.array() += k / (1.0 - k) * softmin_log(prob.log_beta(), r2, ghat);
  return ghat;
}

DualPair h_sinkhorn_step(const UotProblem& prob, const DualPair& d) {
  DualPair out;
  out.g = h_update_g(prob, d.f);
  out.f = h_update_f(prob, out.g);
  return out;
}

double h_optimality_residual_f(const UotProblem& prob, const DualPair& d) {
  require_eps(prob);
  const double eps = prob.eps();
  const double lam = lambda_star(prob, d);
  const Vector s = softmin_cols(prob.log_beta(), eps, prob.Ct(), d.g);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d.f.size(); ++i) {
    if (prob.alpha().weights()[i] == 0.0) continue;
    const double lhs = (d.f[i] - s[i]) / eps;
    const double rhs = log_conj_grad(prob.ent1(), -d.f[i] - lam);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double h_optimality_residual_g(const UotProblem& prob, const DualPair& d) {
  require_eps(prob);
  const double eps = prob.eps();
  const double lam = lambda_star(prob, d);
  const Vector s = softmin_cols(prob.log_alpha(), eps, prob.C(), d.f);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < d.g.size(); ++j) {
    if (prob.beta().weights()[j] == 0.0) continue;
    const double lhs = (d.g[j] - s[j]) / eps;
    const double rhs = log_conj_grad(prob.ent2(), -d.g[j] + lam);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

DualPair translate_optimal(const UotProblem& prob, const DualPair& d) {
  return d.translated(lambda_star(prob, d));
}

SolverReport run_sinkhorn(const UotProblem& prob, const SinkhornConfig& config,
                          const DualPair& init, const std::optional<DualPair>& reference) {
  require_eps(prob);
  if (!(config.tol > 0.0)) throw std::invalid_argument("sinkhorn tol must be positive");
  if (config.max_iters < 1) throw std::invalid_argument("sinkhorn max_iters must be >= 1");
  if (config.anderson && config.anderson->depth < 1)
    throw std::invalid_argument("anderson depth must be >= 1");
  if (config.variant == SinkhornVariant::H) require_kl(prob);

  const Eigen::Index n = prob.alpha().size();
  const auto start = std::chrono::steady_clock::now();

  DualPair state = init;
  double lam = 0.0;
  const bool translating = config.variant != SinkhornVariant::F;
  if (translating) lam = lambda_star(prob, state);

  auto step = [&](const DualPair& d) -> DualPair {
    switch (config.variant) {
      case SinkhornVariant::F: return f_sinkhorn_step(prob, d);
      case SinkhornVariant::G: {
        auto [next, next_lam] = g_sinkhorn_step(prob, d, lam);
        lam = next_lam;
        return next;
      }
      case SinkhornVariant::H: return h_sinkhorn_step(prob, d);
    }
    return d;
  };
  auto translated = [&](const DualPair& d) {
    if (!translating) return d;
    if (config.variant == SinkhornVariant::H) lam = lambda_star(prob, d, lam);
    return d.translated(lam);
  };

  std::deque<std::pair<Vector, Vector>> history;  // (x_k, T(x_k))
  SolverReport report;
  DualPair current = translated(state);
  for (int it = 1; it <= config.max_iters; ++it) {
    DualPair next = step(state);
    if (config.anderson) {
      const int depth = config.anderson->depth;
      history.emplace_back(concat(state), concat(next));
      if (static_cast<int>(history.size()) > depth) history.pop_front();
      if (static_cast<int>(history.size()) == depth) {
        Matrix U(history.front().first.size(), depth);
        for (int k = 0; k < depth; ++k) U.col(k) = history[k].second - history[k].first;
        const Matrix gram = U.transpose() * U;
        // Regularization relative to the residual scale.
        const double scale = std::max(gram.norm(), 1e-300);
        try {
          const Vector c = anderson_weights(U, config.anderson->reg * scale);
          Vector x = Vector::Zero(U.rows());
          for (int k = 0; k < depth; ++k) x += c[k] * history[k].second;
          if (x.allFinite()) {
            next = split(x, n);
            if (config.variant == SinkhornVariant::G) lam = lambda_star(prob, next, lam);
          }
        } catch (const std::runtime_error&) {
          // Singular residual system: keep the plain step.
        }
      }
    }
    state = std::move(next);
    DualPair moved = translated(state);

    IterRecord rec;
    rec.delta_f = sup_distance(moved.f, current.f);
    if (reference) {
      rec.err_f = sup_distance(moved.f, reference->f);
      rec.err_g = sup_distance(moved.g, reference->g);
    }
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    report.trace.push_back(rec);
    current = std::move(moved);
    report.iterations = it;
    if (!std::isfinite(rec.delta_f)) break;
    if (rec.delta_f < config.tol) {
      report.converged = true;
      break;
    }
  }
  report.final = current;
  return report;
}

Vector anderson_weights(const Matrix& U, double reg) {
  const Eigen::Index k = U.cols();
  if (k < 1) throw std::invalid_argument("anderson needs at least one residual");
  const Matrix A = U.transpose() * U + reg * Matrix::Identity(k, k);
  Eigen::FullPivLU<Matrix> lu(A);
  lu.setThreshold(1e-14);
  if (!lu.isInvertible()) throw std::runtime_error("anderson system is singular");
  const Vector z = lu.solve(Vector::Ones(k));
  const double s = z.sum();
  if (!std::isfinite(s) || s == 0.0) throw std::runtime_error("anderson system is singular");
  return z / s;
}

double estimate_rate(const std::vector<double>& errors) {
  std::vector<double> logs;
  for (double e : errors) {
    if (!(e >= 1e-13)) break;
    logs.push_back(std::log(e));
  }
  if (logs.size() < 3) throw std::invalid_argument("estimate_rate needs at least 2 ratios");
  std::vector<double> diffs;
  for (std::size_t t = 0; t + 1 < logs.size(); ++t) diffs.push_back(logs[t + 1] - logs[t]);
  std::sort(diffs.begin(), diffs.end());
  const std::size_t h = diffs.size() / 2;
  const double med = diffs.size() % 2 ? diffs[h] : 0.5 * (diffs[h - 1] + diffs[h]);
  return std::exp(med);
}

double birkhoff_rate_bound(const UotProblem& prob) {
  require_eps(prob);
  return std::tanh(cost_quadruple_diameter(prob.C()) / (4.0 * prob.eps()));
}

}  // namespace uot
