#ifndef UOTKIT_FW_HPP
#define UOTKIT_FW_HPP

#include <functional>
#include <optional>
#include <vector>

#include "uotkit/certify.hpp"
#include "uotkit/duality.hpp"
#include "uotkit/report.hpp"

namespace uot {

enum class FwStep { Harmonic, LineSearch, Pairwise };

struct FwConfig {
  FwStep step = FwStep::LineSearch;
  int max_iters = 5000;
  double gap_tol = 1e-6;  // on the primal-dual gap
};

// Convex combination of feasible dual pairs (pairwise variant).
struct AtomStore {
  std::vector<DualPair> atoms;
  std::vector<double> weights;

  static AtomStore single(DualPair atom);
  DualPair iterate() const;
  // Adds `atom` with weight w, merging into an existing atom closer than
  // 1e-12 in sup distance.  Returns the index it landed on.
  std::size_t add(const DualPair& atom, double w);
  // Drops atoms whose weight is <= 0.
  void prune();
};

struct FwResult {
  SolverReport report;  // final pair translated by lam*
  SparsePlan plan;      // LMO plan at the last evaluated iterate
  Certificate certificate;
};

// Feasible starting pair for f + g <= C: zero when C >= 0, else
// f_i = min_j C_ij and g = 0.
DualPair fw_default_init(const Matrix& C);

// Maximizes H_0 over {f + g <= C} for eps = 0.  Each iteration takes the
// updated marginals (alpha~, beta~) at the current pair, solves the balanced
// 1-D problem between them, and records
//   fw_gap = OT(alpha~, beta~) - <f, alpha~> - <g, beta~>
//   pd_gap = primal(LMO plan) - H_0(f, g)
// before stepping.  Stops once pd_gap < gap_tol.
// Throws std::invalid_argument on eps != 0, a Balanced entropy, or an
// infeasible init.
FwResult fw_solve(const UotProblem& prob, const FwConfig& config,
                  const std::optional<DualPair>& init = std::nullopt,
                  const std::optional<DualPair>& reference = std::nullopt);

// Ternary search for the maximum of a concave function on [lo, hi]:
// 60 shrink steps, then the best of the two endpoints and the midpoint.
double line_search_concave(const std::function<double(double)>& objective, double lo,
                           double hi);

// Bisection on the sign of a decreasing derivative over [lo, hi], 60 halvings.
// Returns an endpoint when the slope does not change sign there.
double line_search_slope(const std::function<double(double)>& slope, double lo, double hi);

// <grad H_0(d), dir> = <alpha~, dir.f> + <beta~, dir.g>.
double h0_slope(const UotProblem& prob, const DualPair& d, const DualPair& dir);

// argmax over gamma in [0, 1] of H_0((1 - gamma) current + gamma target),
// located through the directional derivative.
double line_search_h0(const UotProblem& prob, const DualPair& current, const DualPair& target);

// One pairwise step: moves weight from the active atom with the smallest
// <grad H_0, s> (lowest index on ties) to the LMO atom, with a line search
// over [0, w_away].  Throws std::invalid_argument on an empty store.
AtomStore pfw_step(const UotProblem& prob, const AtomStore& store);

}  // namespace uot

#endif  // UOTKIT_FW_HPP
