#ifndef UOTKIT_OT1D_HPP
#define UOTKIT_OT1D_HPP

#include <utility>

#include "uotkit/duality.hpp"
#include "uotkit/measures.hpp"

namespace uot {

// Relative mass mismatch absorbed by the 1-D solvers.
inline constexpr double kMassBalanceTol = 1e-9;

struct Ot1dResult {
  SparsePlan plan;
  DualPair duals;
  double primal = 0.0;  // <pi, C>
  double dual = 0.0;    // <a, f> + <b, g>
};

// Exact balanced 1-D OT by the monotone (north-west corner) sweep, O(N + M).
//
// The sweep assigns min(remaining source, remaining target) to the current
// cell and advances the exhausted side, the source on ties.  Duals follow the
// staircase: g_0 = C(0, 0), f_0 = 0, then f_i = C(i, j) - g_j when the source
// advances and g_j = C(i, j) - f_i when the target advances.  For a
// submodular cost every staircase yields feasible duals, so zero-weight atoms
// are swept like the others and simply never enter the plan.
//
// Throws std::invalid_argument when masses differ by more than
// kMassBalanceTol (relative) or an explicit cost is not submodular.
Ot1dResult solve_ot_1d(const Vector& a, const Vector& b, const Matrix& C);
Ot1dResult solve_ot_1d(const DiscreteMeasure& a, const DiscreteMeasure& b,
                       const CostSpec& cost);

// f_i + g_j == C_ij (within tol) on the plan support and f + g <= C + tol
// everywhere.
bool check_complementary_slackness(const SparsePlan& plan, const DualPair& d, const Matrix& C,
                                   double tol = 1e-9);

}  // namespace uot

#endif  // UOTKIT_OT1D_HPP
