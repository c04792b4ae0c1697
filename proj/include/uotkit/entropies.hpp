#ifndef UOTKIT_ENTROPIES_HPP
#define UOTKIT_ENTROPIES_HPP

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "uotkit/measures.hpp"

namespace uot {

// Relative slack on x = 1 for the balanced indicator.
inline constexpr double kBalancedTol = 1e-9;

// Csiszar entropy phi generating the marginal penalty D_phi.
//   KL:       phi(x) = rho (x log x - x + 1),  phi*(x) = rho (e^{x/rho} - 1)
//   Berg:     phi(x) = rho (x - 1 - log x),    phi*(x) = -rho log(1 - x/rho)
//   Balanced: indicator of {1},                phi*(x) = x
struct Entropy {
  enum class Kind { KL, Berg, Balanced };

  Kind kind = Kind::KL;
  double rho = 1.0;

  static Entropy kl(double rho);
  static Entropy berg(double rho);
  static Entropy balanced();

  // phi* smooth and strictly convex, so the optimal translation is unique.
  bool strictly_convex_conjugate() const { return kind != Kind::Balanced; }

  // lim phi(x)/x; +inf for KL and Balanced, rho for Berg.
  double recession_slope() const;

  std::string name() const;
};

inline bool operator==(const Entropy& l, const Entropy& r) {
  return l.kind == r.kind && (l.kind == Entropy::Kind::Balanced || l.rho == r.rho);
}

// phi(x) for x >= 0; +inf outside the effective domain.
double entropy_value(const Entropy& e, double x);

// Legendre conjugate phi*(x).  Throws std::domain_error for Berg when x >= rho.
double conj(const Entropy& e, double x);
double conj_grad(const Entropy& e, double x);
double conj_hess(const Entropy& e, double x);

// log of conj_grad, finite wherever conj_grad > 0 (never for Balanced: 0).
double log_conj_grad(const Entropy& e, double x);

// D_phi(mu | nu).  Returns +inf when a singular term carries infinite slope.
// Throws std::invalid_argument on length mismatch or negative entries.
double divergence(const Entropy& e, const Vector& mu, const Vector& nu);

// argmin_y eps e^{(x - y)/eps} + phi*(y).
// Throws std::runtime_error if the Berg Newton solve fails in 100 iterations.
double aprox(const Entropy& e, double eps, double x);

// log sum_i exp(v_i), shifted by the max; -inf entries are ignored.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.derived().array() - mx).exp().sum());
}

// Elementwise log of nonnegative weights (log 0 = -inf).
inline Vector log_weights(const Vector& w) { return w.array().log().matrix(); }

// -eps log <w, e^{-f/eps}>.  Throws std::invalid_argument on zero mass or
// length mismatch.
double softmin(const Vector& weights, double eps, const Vector& f);
double softmin(const DiscreteMeasure& a, double eps, const Vector& f);

// Same reduction from precomputed log weights, no validation.
double softmin_log(const Vector& log_w, double eps, const Vector& f);

// Column-wise softmin of C - f against the row measure:
//   out_j = -eps log sum_i w_i exp((f_i - C_ij) / eps).
Vector softmin_cols(const Vector& log_w, double eps, const Matrix& C, const Vector& f);

// Row-wise softmin of C - g against the column measure:
//   out_i = -eps log sum_j w_j exp((g_j - C_ij) / eps).
Vector softmin_rows(const Vector& log_w, double eps, const Matrix& C, const Vector& g);

}  // namespace uot

#endif  // UOTKIT_ENTROPIES_HPP
