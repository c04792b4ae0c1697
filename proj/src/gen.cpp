#include "uotkit/gen.hpp"

#include <random>
#include <stdexcept>

namespace uot {

void MixtureParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(mu1_lo <= mu1_hi) || !(mu2_lo <= mu2_hi))
    throw std::invalid_argument("empty mean range");
  if (!(ab_lo > 0.0) || !(ab_lo <= ab_hi))
    throw std::invalid_argument("mixture amplitudes need 0 < lo <= hi");
}

MixtureSample sample_mixture(int n, std::uint64_t seed, const MixtureParams& params) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  params.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  MixtureSample s{};
  s.mu1 = uniform(params.mu1_lo, params.mu1_hi);
  s.mu2 = uniform(params.mu2_lo, params.mu2_hi);
  s.a = uniform(params.ab_lo, params.ab_hi);
  s.b = uniform(params.ab_lo, params.ab_hi);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) {
    const bool first = u01(rng) * (s.a + s.b) < s.a;
    x[i] = (first ? s.mu1 : s.mu2) + params.sigma * z(rng);
  }
  s.measure = DiscreteMeasure::empirical(x, s.a + s.b);
  return s;
}

DiscreteMeasure sample_uniform(int n, std::uint64_t seed, double lo, double hi, double mass) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("empty interval");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * u01(rng);
  return DiscreteMeasure::empirical(x, mass);
}

}  // namespace uot
