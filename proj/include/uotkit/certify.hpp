#ifndef UOTKIT_CERTIFY_HPP
#define UOTKIT_CERTIFY_HPP

#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace uot {

// ||f||_* = inf_t ||f + t||_inf = (max f - min f) / 2.
template <typename Derived>
typename Derived::Scalar hilbert_norm(const Eigen::MatrixBase<Derived>& f) {
  return (f.maxCoeff() - f.minCoeff()) / typename Derived::Scalar(2);
}

// ||(f, g)||_** = min_t ||f + t||_inf + ||g - t||_inf = ||f (+) g||_inf
//              = max(max f + max g, -(min f + min g)).
template <typename DerivedF, typename DerivedG>
typename DerivedF::Scalar double_star_norm(const Eigen::MatrixBase<DerivedF>& f,
                                           const Eigen::MatrixBase<DerivedG>& g) {
  using std::max;
  return max(f.maxCoeff() + g.maxCoeff(), -(f.minCoeff() + g.minCoeff()));
}

template <typename DerivedF, typename DerivedG>
typename DerivedF::Scalar sup_distance(const Eigen::MatrixBase<DerivedF>& f,
                                       const Eigen::MatrixBase<DerivedG>& g) {
  return (f - g).cwiseAbs().maxCoeff();
}

struct ScalarMax {
  double argmax;
  double value;
};

// Golden-section maximization of a concave function on [lo, hi] down to an
// interval of width tol.  Throws std::invalid_argument when the interval is
// empty or the objective increases at both ends (not concave there).
ScalarMax scalar_max_oracle(const std::function<double(double)>& objective, double lo,
                            double hi, double tol = 1e-10);

// Minimization of a convex function by a uniform grid on [lo, hi] followed by
// a refinement grid around the best node.  Used to check closed forms.
ScalarMax grid_min_oracle(const std::function<double(double)>& objective, double lo, double hi,
                          double coarse_step, double fine_step);

inline constexpr double kWeakDualityTol = 1e-8;

struct Certificate {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double feasibility_violation = 0.0;
  bool passed = false;
  bool weak_duality_breach = false;
};

// gap = primal - dual; passes when gap <= tol, the violation is <= tol and
// the gap is not below -kWeakDualityTol.
Certificate assemble_certificate(double primal, double dual, double feas_violation, double tol);

std::string to_json(const Certificate& c);

}  // namespace uot

#endif  // UOTKIT_CERTIFY_HPP
