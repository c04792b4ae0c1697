#include "uotkit/fw.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "uotkit/ot1d.hpp"

namespace uot {

namespace {

DualPair combine(const DualPair& a, double wa, const DualPair& b, double wb) {
  return {wa * a.f + wb * b.f, wa * a.g + wb * b.g};
}

// Everything the solver needs at one iterate.
struct Linearization {
  double lam = 0.0;
  Vector at, bt;
  Ot1dResult lmo;
  double h0 = 0.0;
  double fw_gap = 0.0;
  double primal = 0.0;
  double pd_gap = 0.0;
};

Linearization linearize(const UotProblem& prob, const DualPair& d, std::optional<double> warm) {
  Linearization L;
  L.lam = lambda_star(prob, d, warm);
  std::tie(L.at, L.bt) = updated_marginals(prob, d, L.lam);
  L.lmo = solve_ot_1d(L.at, L.bt, prob.C());
  L.h0 = eval_H(prob, d);
  L.fw_gap = L.lmo.dual - L.at.dot(d.f) - L.bt.dot(d.g);
  L.primal = eval_primal(prob, L.lmo.plan);
  L.pd_gap = L.primal - L.h0;
  return L;
}

void require_fw_problem(const UotProblem& prob) {
  if (prob.eps() != 0.0) throw std::invalid_argument("frank-wolfe solves the eps = 0 problem");
  if (!prob.ent1().strictly_convex_conjugate() || !prob.ent2().strictly_convex_conjugate())
    throw std::invalid_argument("frank-wolfe needs kl or berg entropies");
}

double dot_grad(const Vector& at, const Vector& bt, const DualPair& s) {
  return at.dot(s.f) + bt.dot(s.g);
}

}  // namespace

AtomStore AtomStore::single(DualPair atom) {
  AtomStore s;
  s.atoms.push_back(std::move(atom));
  s.weights.push_back(1.0);
  return s;
}

DualPair AtomStore::iterate() const {
  if (atoms.empty()) throw std::invalid_argument("empty atom store");
  DualPair d{Vector::Zero(atoms[0].f.size()), Vector::Zero(atoms[0].g.size())};
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    d.f += weights[k] * atoms[k].f;
    d.g += weights[k] * atoms[k].g;
  }
  return d;
}

std::size_t AtomStore::add(const DualPair& atom, double w) {
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (sup_distance(atoms[k].f, atom.f) < 1e-12 && sup_distance(atoms[k].g, atom.g) < 1e-12) {
      weights[k] += w;
      return k;
    }
  }
  atoms.push_back(atom);
  weights.push_back(w);
  return atoms.size() - 1;
}

void AtomStore::prune() {
  std::size_t out = 0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] > 0.0) {
      if (out != k) {
        atoms[out] = std::move(atoms[k]);
        weights[out] = weights[k];
      }
      ++out;
    }
  }
  atoms.resize(out);
  weights.resize(out);
}

DualPair fw_default_init(const Matrix& C) {
  DualPair d = DualPair::zeros(C.rows(), C.cols());
  if (C.minCoeff() < 0.0) d.f = C.rowwise().minCoeff();
  return d;
}

double line_search_concave(const std::function<double(double)>& objective, double lo,
                           double hi) {
  double a = lo, b = hi;
  for (int it = 0; it < 60; ++it) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (objective(m1) < objective(m2)) a = m1;
    else b = m2;
  }
  double best = 0.5 * (a + b), best_val = objective(best);
  for (double x : {lo, hi}) {
    const double v = objective(x);
    if (v > best_val) {
      best = x;
      best_val = v;
    }
  }
  return best;
}

double line_search_slope(const std::function<double(double)>& slope, double lo, double hi) {
  if (!(slope(lo) > 0.0)) return lo;
  if (slope(hi) >= 0.0) return hi;
  double a = lo, b = hi;
  for (int it = 0; it < 60 && b - a > 0.0; ++it) {
    const double m = 0.5 * (a + b);
    if (slope(m) > 0.0) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

double h0_slope(const UotProblem& prob, const DualPair& d, const DualPair& dir) {
  const auto [at, bt] = updated_marginals(prob, d);
  return dot_grad(at, bt, dir);
}

double line_search_h0(const UotProblem& prob, const DualPair& current, const DualPair& target) {
  const DualPair dir{target.f - current.f, target.g - current.g};
  return line_search_slope(
      [&](double gamma) { return h0_slope(prob, combine(current, 1.0, dir, gamma), dir); }, 0.0,
      1.0);
}

AtomStore pfw_step(const UotProblem& prob, const AtomStore& store) {
  if (store.atoms.empty()) throw std::invalid_argument("pfw_step on an empty atom store");
  const DualPair d = store.iterate();
  const auto [at, bt] = updated_marginals(prob, d);
  const Ot1dResult lmo = solve_ot_1d(at, bt, prob.C());

  std::size_t away = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < store.atoms.size(); ++k) {
    if (store.weights[k] <= 0.0) continue;
    const double v = dot_grad(at, bt, store.atoms[k]);
    if (v < worst) {
      worst = v;
      away = k;
    }
  }
  AtomStore next = store;
  if (lmo.dual - worst <= 0.0) return next;

  const double wmax = store.weights[away];
  const DualPair dir{lmo.duals.f - store.atoms[away].f, lmo.duals.g - store.atoms[away].g};
  const double gamma = line_search_slope(
      [&](double s) { return h0_slope(prob, combine(d, 1.0, dir, s), dir); }, 0.0, wmax);
  if (!(gamma > 0.0)) return next;
  next.weights[away] = gamma >= wmax ? 0.0 : wmax - gamma;
  next.add(lmo.duals, gamma);
  next.prune();
  return next;
}

FwResult fw_solve(const UotProblem& prob, const FwConfig& config,
                  const std::optional<DualPair>& init, const std::optional<DualPair>& reference) {
  require_fw_problem(prob);
  if (!(config.gap_tol > 0.0)) throw std::invalid_argument("gap_tol must be positive");
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

  DualPair d = init ? *init : fw_default_init(prob.C());
  if (d.f.size() != prob.alpha().size() || d.g.size() != prob.beta().size())
    throw std::invalid_argument("init has the wrong dimensions");
  if (max_constraint_violation(prob.C(), d.f, d.g) > kDualFeasibilityTol)
    throw std::invalid_argument("infeasible init: f + g exceeds C");

  const auto start = std::chrono::steady_clock::now();
  AtomStore store = AtomStore::single(d);
  FwResult out;
  SolverReport& rep = out.report;
  std::optional<double> warm;
  Linearization L;
  bool fresh = false;  // L describes the current d

  for (int t = 0; t < config.max_iters; ++t) {
    L = linearize(prob, d, warm);
    warm = L.lam;
    fresh = true;

    IterRecord rec;
    rec.h0 = L.h0;
    rec.fw_gap = L.fw_gap;
    rec.pd_gap = L.pd_gap;
    if (reference) {
      const DualPair moved = d.translated(L.lam);
      rec.err_f = sup_distance(moved.f, reference->f);
      rec.err_g = sup_distance(moved.g, reference->g);
    }
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    if (!rep.trace.empty()) {
      const auto& prev = rep.trace.back();
      rec.delta_f = std::abs(rec.h0 - prev.h0);
    }
    rep.trace.push_back(rec);
    rep.iterations = t + 1;
    if (L.pd_gap < config.gap_tol) {
      rep.converged = true;
      break;
    }

    switch (config.step) {
      case FwStep::Harmonic: {
        const double gamma = 2.0 / (2.0 + t);
        d = combine(d, 1.0 - gamma, L.lmo.duals, gamma);
        break;
      }
      case FwStep::LineSearch: {
        const double gamma = line_search_h0(prob, d, L.lmo.duals);
        d = combine(d, 1.0 - gamma, L.lmo.duals, gamma);
        break;
      }
      case FwStep::Pairwise:
        store = pfw_step(prob, store);
        d = store.iterate();
        break;
    }
    fresh = false;
  }
  if (!fresh) L = linearize(prob, d, warm);

  out.plan = L.lmo.plan;
  rep.final = d.translated(L.lam);
  const double viol = std::max(0.0, max_constraint_violation(prob.C(), d.f, d.g));
  out.certificate = assemble_certificate(L.primal, L.h0, viol, config.gap_tol);
  return out;
}

}  // namespace uot
