#ifndef UOTKIT_BARYCENTER_HPP
#define UOTKIT_BARYCENTER_HPP

#include <utility>
#include <vector>

#include "uotkit/certify.hpp"
#include "uotkit/fw.hpp"
#include "uotkit/measures.hpp"
#include "uotkit/report.hpp"

namespace uot {

// K inputs with barycentric weights omega (positive, summing to 1) under the
// squared Euclidean cost.  KL penalties use rho_k = omega_k rho; with
// `balanced` the marginals are hard constraints and rho is ignored.
struct BarycenterProblem {
  std::vector<DiscreteMeasure> inputs;
  Vector omega;
  double rho = 1.0;
  bool balanced = false;

  // Throws std::invalid_argument when K < 2, sizes differ, omega is not a
  // positive probability vector (1e-12), or rho <= 0 for the KL case.
  void validate() const;
  std::size_t K() const { return inputs.size(); }
  double rho_k(std::size_t k) const { return omega[static_cast<Eigen::Index>(k)] * rho; }
};

struct MultiPlanEntry {
  std::vector<Eigen::Index> idx;
  double mass;
};

struct MultiPlan {
  std::vector<MultiPlanEntry> entries;

  double mass() const;
  // k-th marginal of the plan, length n.
  Vector marginal(std::size_t k, Eigen::Index n) const;
};

struct MultiDual {
  std::vector<Vector> f;

  static MultiDual zeros(const std::vector<DiscreteMeasure>& inputs);
};

struct BarycentricCost {
  double cost;
  double point;
};

// B = sum_k w_k x_k and cost = sum_k w_k (x_k - B)^2.
BarycentricCost multimarginal_cost(const Vector& x, const Vector& w);

// Cost of one index tuple.
double tuple_cost(const std::vector<DiscreteMeasure>& inputs, const Vector& omega,
                  const std::vector<Eigen::Index>& idx);

struct MotResult {
  MultiPlan plan;
  MultiDual duals;
  double primal = 0.0;  // <gamma, Cc>
  double dual = 0.0;    // sum_k <a_k, f_k>
};

// Monotone multimarginal sweep on the barycentric cost.  At each step the
// advanceable coordinate with the least remaining mass (lowest k on ties)
// gives up its mass to the current tuple and moves on; its new dual entry is
// Cc(tuple) - sum_{k != p} f_k.  Starts from f_1 = Cc(0,...,0), f_k = 0.
// Throws std::invalid_argument on unequal masses (relative 1e-9) or shape
// mismatch.
MotResult solve_mot_1d(const std::vector<Vector>& weights,
                       const std::vector<DiscreteMeasure>& inputs, const Vector& omega);
MotResult solve_mot_1d(const std::vector<DiscreteMeasure>& inputs, const Vector& omega);

// max over all tuples of sum_k f_k(i_k) - Cc(i).  Exhaustive; throws
// std::invalid_argument when prod N_k exceeds `limit`.
double max_multidual_violation(const std::vector<DiscreteMeasure>& inputs, const Vector& omega,
                               const MultiDual& d, double limit = 1e5);

// Same maximum restricted to the support of a plan.
double support_multidual_violation(const std::vector<DiscreteMeasure>& inputs,
                                   const Vector& omega, const MultiDual& d,
                                   const MultiPlan& plan);

// lambda_i = rho_i q_i - (rho_i / rho_tot) sum_k rho_k q_k with
// q_k = log <alpha_k, e^{-f_k / rho_k}> and rho_k = omega_k rho.
Vector multimarginal_lambda(const MultiDual& d, const std::vector<DiscreteMeasure>& inputs,
                            const Vector& omega, double rho);

// alpha~_k = e^{-(f_k + lambda_k) / rho_k} alpha_k.
std::vector<Vector> multimarginal_updated_weights(const MultiDual& d,
                                                  const std::vector<DiscreteMeasure>& inputs,
                                                  const Vector& omega, double rho,
                                                  const Vector& lambda);

// sup over sum lambda = 0 of the KL dual: sum_k rho_k (m(alpha_k) - m(alpha~_k)).
double multimarginal_dual_value(const BarycenterProblem& prob, const MultiDual& d);

// <gamma, Cc> + sum_k rho_k KL(gamma_k | alpha_k).
double multimarginal_primal(const BarycenterProblem& prob, const MultiPlan& plan);

// One atom per plan entry at the barycentric point of its tuple; equal
// locations merge.
DiscreteMeasure extract_barycenter(const MultiPlan& plan, const std::vector<DiscreteMeasure>& inputs,
                                   const Vector& omega);

struct BarycenterResult {
  std::vector<IterRecord> trace;
  int iterations = 0;
  bool converged = false;
  MultiDual final;  // translated by the multimarginal lambda
  MultiPlan plan;
  Certificate certificate;
  DiscreteMeasure barycenter;
};

// Frank-Wolfe on the translation-invariant multimarginal dual (KL) with the
// solve_mot_1d LMO on the updated weights.  Pairwise steps are not supported
// here and fall back to line search.  Balanced problems are solved directly
// by solve_mot_1d.  Feasibility in the certificate is exhaustive when
// prod N_k <= 1e5, else checked on the plan support only.
BarycenterResult fw_barycenter(const BarycenterProblem& prob, const FwConfig& config,
                               const std::optional<MultiDual>& init = std::nullopt);

}  // namespace uot

#endif  // UOTKIT_BARYCENTER_HPP
