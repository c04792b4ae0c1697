#include "uotkit/ot1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uot {

namespace {

Ot1dResult sweep(const Vector& a, const Vector& b, const Matrix& C) {
  const Eigen::Index n = a.size(), m = b.size();
  Ot1dResult out;
  out.duals = DualPair::zeros(n, m);
  Vector& f = out.duals.f;
  Vector& g = out.duals.g;
  auto& entries = out.plan.entries;
  entries.reserve(static_cast<std::size_t>(n + m - 1));

  Eigen::Index i = 0, j = 0;
  double ra = a[0], rb = b[0];
  f[0] = 0.0;
  g[0] = C(0, 0);
  auto emit = [&](double mass) {
    if (mass > 0.0) entries.push_back({i, j, mass});
  };
  while (i < n - 1 || j < m - 1) {
    if ((ra <= rb && i < n - 1) || j == m - 1) {
      emit(ra);
      rb = std::max(rb - ra, 0.0);
      ++i;
      f[i] = C(i, j) - g[j];
      ra = a[i];
    } else {
      emit(rb);
      ra = std::max(ra - rb, 0.0);
      ++j;
      g[j] = C(i, j) - f[i];
      rb = b[j];
    }
  }
  // Last cell takes what is left of the source.
  emit(ra);

  out.primal = out.plan.cost(C);
  out.dual = a.dot(f) + b.dot(g);
  return out;
}

}  // namespace

Ot1dResult solve_ot_1d(const Vector& a, const Vector& b, const Matrix& C) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("empty marginal");
  if (C.rows() != a.size() || C.cols() != b.size())
    throw std::invalid_argument("cost matrix does not match the marginals");
  if ((a.array() < 0.0).any() || (b.array() < 0.0).any())
    throw std::invalid_argument("negative marginal weight");
  const double ma = a.sum(), mb = b.sum();
  if (!(ma > 0.0) || std::abs(ma - mb) > kMassBalanceTol * std::max(ma, mb))
    throw std::invalid_argument("solve_ot_1d needs balanced marginals");
  // Absorb the rounding-level mismatch into the target weights.
  const Vector bb = b * (ma / mb);
  return sweep(a, bb, C);
}

Ot1dResult solve_ot_1d(const DiscreteMeasure& a, const DiscreteMeasure& b,
                       const CostSpec& cost) {
  const Matrix C = build_cost_matrix(a, b, cost);
  if (std::holds_alternative<ExplicitCost>(cost)) {
    const double scale = 1.0 + C.cwiseAbs().maxCoeff();
    if (!is_submodular(C, 1e-12 * scale))
      throw std::invalid_argument("explicit cost is not submodular; monotone plan not optimal");
  }
  return solve_ot_1d(a.weights(), b.weights(), C);
}

bool check_complementary_slackness(const SparsePlan& plan, const DualPair& d, const Matrix& C,
                                   double tol) {
  if (d.f.size() != C.rows() || d.g.size() != C.cols()) return false;
  for (const auto& e : plan.entries)
    if (std::abs(d.f[e.i] + d.g[e.j] - C(e.i, e.j)) > tol) return false;
  return max_constraint_violation(C, d.f, d.g) <= tol;
}

}  // namespace uot
