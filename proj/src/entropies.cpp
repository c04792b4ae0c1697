#include "uotkit/entropies.hpp"

#include <algorithm>
#include <stdexcept>

namespace uot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("entropy rho must be positive and finite");
}

// Root of r(y) = log(rho) - log(rho - y) - (x - y)/eps on (-inf, rho).
// r is increasing and convex, so Newton from the right of the root is
// monotone; bisection on the bracket catches the other side.
double berg_aprox(double rho, double eps, double x) {
  auto residual = [&](double y) { return std::log(rho) - std::log(rho - y) - (x - y) / eps; };
  auto slope = [&](double y) { return 1.0 / (rho - y) + 1.0 / eps; };

  double hi = rho;
  double lo = std::min(x, rho) - 1.0;
  double step = 1.0;
  while (residual(lo) > 0.0) {
    step *= 2.0;
    lo = std::min(x, rho) - step;
    if (step > 1e300) throw std::runtime_error("berg aprox: cannot bracket root");
  }

  double y = std::min(x, 0.5 * (lo + hi));
  if (!(y > lo)) y = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double r = residual(y);
    if (std::abs(r) < 1e-12) return y;
    if (r > 0.0) hi = y; else lo = y;
    double next = y - r / slope(y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y) return y;
    y = next;
  }
  throw std::runtime_error("berg aprox: Newton did not converge in 100 iterations");
}

}  // namespace

Entropy Entropy::kl(double rho) {
  check_rho(rho);
  return {Kind::KL, rho};
}

Entropy Entropy::berg(double rho) {
  check_rho(rho);
  return {Kind::Berg, rho};
}

Entropy Entropy::balanced() { return {Kind::Balanced, kInf}; }

double Entropy::recession_slope() const {
  switch (kind) {
    case Kind::KL: return kInf;
    case Kind::Berg: return rho;
    case Kind::Balanced: return kInf;
  }
  return kInf;
}

std::string Entropy::name() const {
  switch (kind) {
    case Kind::KL: return "kl(" + std::to_string(rho) + ")";
    case Kind::Berg: return "berg(" + std::to_string(rho) + ")";
    case Kind::Balanced: return "balanced";
  }
  return "?";
}

double entropy_value(const Entropy& e, double x) {
  if (x < 0.0) return kInf;
  switch (e.kind) {
    case Entropy::Kind::KL:
      return x == 0.0 ? e.rho : e.rho * (x * std::log(x) - x + 1.0);
    case Entropy::Kind::Berg:
      return x == 0.0 ? kInf : e.rho * (x - 1.0 - std::log(x));
    case Entropy::Kind::Balanced:
      return std::abs(x - 1.0) <= kBalancedTol ? 0.0 : kInf;
  }
  return kInf;
}

double conj(const Entropy& e, double x) {
  switch (e.kind) {
    case Entropy::Kind::KL:
      return e.rho * std::expm1(x / e.rho);
    case Entropy::Kind::Berg:
      if (!(x < e.rho)) throw std::domain_error("berg conjugate needs x < rho");
      return -e.rho * std::log1p(-x / e.rho);
    case Entropy::Kind::Balanced:
      return x;
  }
  return x;
}

double conj_grad(const Entropy& e, double x) {
  switch (e.kind) {
    case Entropy::Kind::KL:
      return std::exp(x / e.rho);
    case Entropy::Kind::Berg:
      if (!(x < e.rho)) throw std::domain_error("berg conjugate needs x < rho");
      return e.rho / (e.rho - x);
    case Entropy::Kind::Balanced:
      return 1.0;
  }
  return 1.0;
}

double conj_hess(const Entropy& e, double x) {
  switch (e.kind) {
    case Entropy::Kind::KL:
      return std::exp(x / e.rho) / e.rho;
    case Entropy::Kind::Berg: {
      if (!(x < e.rho)) throw std::domain_error("berg conjugate needs x < rho");
      const double d = e.rho - x;
      return e.rho / (d * d);
    }
    case Entropy::Kind::Balanced:
      return 0.0;
  }
  return 0.0;
}

double log_conj_grad(const Entropy& e, double x) {
  switch (e.kind) {
    case Entropy::Kind::KL:
      return x / e.rho;
    case Entropy::Kind::Berg:
      if (!(x < e.rho)) throw std::domain_error("berg conjugate needs x < rho");
      return std::log(e.rho) - std::log(e.rho - x);
    case Entropy::Kind::Balanced:
      return 0.0;
  }
  return 0.0;
}

double divergence(const Entropy& e, const Vector& mu, const Vector& nu) {
  if (mu.size() != nu.size()) throw std::invalid_argument("divergence: length mismatch");
  if ((mu.array() < 0.0).any() || (nu.array() < 0.0).any())
    throw std::invalid_argument("divergence: negative entry");

  double total = 0.0;
  double singular = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (nu[i] > 0.0) {
      const double v = entropy_value(e, mu[i] / nu[i]);
      if (!std::isfinite(v)) return kInf;
      total += v * nu[i];
    } else {
      singular += mu[i];
    }
  }
  if (singular > 0.0) {
    const double slope = e.recession_slope();
    if (!std::isfinite(slope)) return kInf;
    total += slope * singular;
  }
  return total;
}

double aprox(const Entropy& e, double eps, double x) {
  switch (e.kind) {
    case Entropy::Kind::KL:
      return e.rho / (eps + e.rho) * x;
    case Entropy::Kind::Balanced:
      return x;
    case Entropy::Kind::Berg:
      return berg_aprox(e.rho, eps, x);
  }
  return x;
}

double softmin_log(const Vector& log_w, double eps, const Vector& f) {
  return -eps * log_sum_exp(log_w - f / eps);
}

double softmin(const Vector& weights, double eps, const Vector& f) {
  if (weights.size() != f.size()) throw std::invalid_argument("softmin: length mismatch");
  if (!(weights.sum() > 0.0)) throw std::invalid_argument("softmin: zero mass");
  return softmin_log(log_weights(weights), eps, f);
}

double softmin(const DiscreteMeasure& a, double eps, const Vector& f) {
  return softmin(a.weights(), eps, f);
}

Vector softmin_cols(const Vector& log_w, double eps, const Matrix& C, const Vector& f) {
  const Eigen::Index n = C.rows(), m = C.cols();
  Vector out(m);
  Vector v(n);
  const Vector base = log_w + f / eps;
  for (Eigen::Index j = 0; j < m; ++j) {
    v = base - C.col(j) / eps;
    out[j] = -eps * log_sum_exp(v);
  }
  return out;
}

Vector softmin_rows(const Vector& log_w, double eps, const Matrix& C, const Vector& g) {
  // Column-major storage: transpose once so the inner loop stays contiguous.
  const Matrix Ct = C.transpose();
  return softmin_cols(log_w, eps, Ct, g);
}

}  // namespace uot
