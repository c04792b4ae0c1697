#include "uotkit/certify.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace uot {

ScalarMax scalar_max_oracle(const std::function<double(double)>& objective, double lo,
                            double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("scalar_max_oracle: empty interval");
  const double h = 1e-7 * std::max(1.0, hi - lo);
  const bool rising_left = objective(lo + h) > objective(lo);
  const bool rising_right = objective(hi) > objective(hi - h);
  if (rising_left && rising_right)
    throw std::invalid_argument("scalar_max_oracle: objective increases across the bracket");

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  ScalarMax best{0.5 * (a + b), objective(0.5 * (a + b))};
  for (double x : {lo, hi}) {
    const double v = objective(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

ScalarMax grid_min_oracle(const std::function<double(double)>& objective, double lo, double hi,
                          double coarse_step, double fine_step) {
  ScalarMax best{lo, objective(lo)};
  const auto coarse = static_cast<long>(std::ceil((hi - lo) / coarse_step));
  for (long k = 1; k <= coarse; ++k) {
    const double x = std::min(hi, lo + static_cast<double>(k) * coarse_step);
    const double v = objective(x);
    if (v < best.value) best = {x, v};
  }
  const double flo = std::max(lo, best.argmax - coarse_step);
  const double fhi = std::min(hi, best.argmax + coarse_step);
  const auto fine = static_cast<long>(std::ceil((fhi - flo) / fine_step));
  for (long k = 0; k <= fine; ++k) {
    const double x = std::min(fhi, flo + static_cast<double>(k) * fine_step);
    const double v = objective(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

Certificate assemble_certificate(double primal, double dual, double feas_violation, double tol) {
  Certificate c;
  c.primal = primal;
  c.dual = dual;
  c.gap = primal - dual;
  c.feasibility_violation = std::max(0.0, feas_violation);
  c.weak_duality_breach = c.gap < -kWeakDualityTol;
  c.passed = std::isfinite(c.gap) && c.gap <= tol && !c.weak_duality_breach &&
             c.feasibility_violation <= tol;
  return c;
}

std::string to_json(const Certificate& c) {
  nlohmann::ordered_json j;
  j["primal"] = c.primal;
  j["dual"] = c.dual;
  j["gap"] = c.gap;
  j["feasibility_violation"] = c.feasibility_violation;
  j["passed"] = c.passed;
  return j.dump();
}

}  // namespace uot
