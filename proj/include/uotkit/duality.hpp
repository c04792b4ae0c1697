#ifndef UOTKIT_DUALITY_HPP
#define UOTKIT_DUALITY_HPP

#include <optional>
#include <utility>
#include <vector>

#include "uotkit/entropies.hpp"
#include "uotkit/measures.hpp"

namespace uot {

// Dual potentials attached to the two marginals.  The same type holds the
// translated pair (f + lambda, g - lambda) and the invariant pair (fbar, gbar).
struct DualPair {
  Vector f;
  Vector g;

  static DualPair zeros(Eigen::Index n, Eigen::Index m) {
    return {Vector::Zero(n), Vector::Zero(m)};
  }
  // (f + lam, g - lam)
  DualPair translated(double lam) const {
    return {(f.array() + lam).matrix(), (g.array() - lam).matrix()};
  }
};

// Sparse transport plan entry.
struct PlanEntry {
  Eigen::Index i;
  Eigen::Index j;
  double mass;
};

// Monotone plan: entries sorted with i and j nondecreasing.
struct SparsePlan {
  std::vector<PlanEntry> entries;

  double mass() const;
  Vector row_sums(Eigen::Index n) const;
  Vector col_sums(Eigen::Index m) const;
  double cost(const Matrix& C) const;
  Matrix dense(Eigen::Index n, Eigen::Index m) const;
};

// Entropic UOT problem between two 1-D measures.  The cost matrix is built
// once at construction.
class UotProblem {
 public:
  UotProblem(DiscreteMeasure alpha, DiscreteMeasure beta, CostSpec cost, Entropy ent1,
             Entropy ent2, double eps);

  const DiscreteMeasure& alpha() const { return alpha_; }
  const DiscreteMeasure& beta() const { return beta_; }
  const CostSpec& cost_spec() const { return cost_spec_; }
  const Entropy& ent1() const { return ent1_; }
  const Entropy& ent2() const { return ent2_; }
  double eps() const { return eps_; }

  const Matrix& C() const { return C_; }
  const Matrix& Ct() const { return Ct_; }
  const Vector& log_alpha() const { return log_alpha_; }
  const Vector& log_beta() const { return log_beta_; }

  // Copy of the problem with a different regularization.
  UotProblem with_eps(double eps) const;

  bool both_kl() const {
    return ent1_.kind == Entropy::Kind::KL && ent2_.kind == Entropy::Kind::KL;
  }

 private:
  DiscreteMeasure alpha_, beta_;
  CostSpec cost_spec_;
  Entropy ent1_, ent2_;
  double eps_;
  Matrix C_, Ct_;
  Vector log_alpha_, log_beta_;
};

// Absolute tolerance on max(f_i + g_j - C_ij) when eps = 0.
inline constexpr double kDualFeasibilityTol = 1e-9;

// max_ij (f_i + g_j - C_ij); positive means infeasible for eps = 0.
double max_constraint_violation(const Matrix& C, const Vector& f, const Vector& g);

// <alpha, -phi1*(-f)> + <beta, -phi2*(-g)>: the marginal part of F.  Atoms of
// zero weight do not contribute.
double marginal_dual_terms(const UotProblem& prob, const Vector& f, const Vector& g);

// F_eps(f, g).  For eps = 0 the pair must satisfy f + g <= C within
// kDualFeasibilityTol, else std::domain_error is thrown.
double eval_F(const UotProblem& prob, const DualPair& d);

// G_eps(f, g, lam) = F_eps(f + lam, g - lam).
double eval_G(const UotProblem& prob, const DualPair& d, double lam);

// argmax_lam G_eps(f, g, lam).  Closed form for KL/KL, safeguarded Newton
// otherwise (optional warm start).  Throws std::invalid_argument for
// Balanced entropies and std::runtime_error if Newton fails.
double lambda_star(const UotProblem& prob, const DualPair& d,
                   std::optional<double> warm_start = std::nullopt);

// H_eps(fbar, gbar) = sup_lam G_eps.  KL/KL uses the closed form; the eps = 0
// constraint is not checked here.
double eval_H(const UotProblem& prob, const DualPair& d);

// (grad phi1*(-f - lam*) alpha, grad phi2*(-g + lam*) beta); both share one
// mass at the optimal translation.
std::pair<Vector, Vector> updated_marginals(const UotProblem& prob, const DualPair& d);
std::pair<Vector, Vector> updated_marginals(const UotProblem& prob, const DualPair& d,
                                            double lam);

// <pi, C> + eps KL(pi | alpha x beta) + D_phi1(pi_1 | alpha) + D_phi2(pi_2 | beta).
// Throws std::invalid_argument on negative plan mass.
double eval_primal(const UotProblem& prob, const Matrix& plan);
double eval_primal(const UotProblem& prob, const SparsePlan& plan);

}  // namespace uot

#endif  // UOTKIT_DUALITY_HPP
