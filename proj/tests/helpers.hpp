// Random instance builders shared by the unit tests.
#ifndef UOTKIT_TESTS_HELPERS_HPP
#define UOTKIT_TESTS_HELPERS_HPP

#include "oracles.hpp"
#include "uotkit/duality.hpp"

namespace th {

inline uot::DiscreteMeasure random_measure(Eigen::Index n, double wlo = 0.1, double whi = 1.0,
                                           double lo = 0.0, double hi = 1.0) {
  return {oracle::sorted_points(n, lo, hi), oracle::uniform_vec(n, wlo, whi)};
}

inline uot::DiscreteMeasure atom(double x, double mass) {
  return {Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, mass)};
}

inline uot::UotProblem kl_problem(Eigen::Index n, Eigen::Index m, double rho1, double rho2,
                                  double eps, double p = 2.0) {
  return {random_measure(n), random_measure(m), uot::PowerCost{p}, uot::Entropy::kl(rho1),
          uot::Entropy::kl(rho2), eps};
}

inline uot::DualPair random_pair(Eigen::Index n, Eigen::Index m, double lo = -1.0,
                                 double hi = 1.0) {
  return {oracle::uniform_vec(n, lo, hi), oracle::uniform_vec(m, lo, hi)};
}

// Feasible pair for f + g <= C: random values pushed below the constraint.
inline uot::DualPair feasible_pair(const Eigen::MatrixXd& C) {
  uot::DualPair d = random_pair(C.rows(), C.cols(), -0.5, 0.5);
  for (Eigen::Index i = 0; i < C.rows(); ++i)
    d.f[i] = std::min(d.f[i], (C.row(i).transpose() - d.g).minCoeff());
  return d;
}

}  // namespace th

#endif  // UOTKIT_TESTS_HELPERS_HPP
