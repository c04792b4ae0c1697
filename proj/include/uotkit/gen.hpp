#ifndef UOTKIT_GEN_HPP
#define UOTKIT_GEN_HPP

#include <cstdint>
#include <string>

#include "uotkit/measures.hpp"

namespace uot {

// a N(mu1, sigma) + b N(mu2, sigma) with mu1 ~ U[mu1_lo, mu1_hi],
// mu2 ~ U[mu2_lo, mu2_hi] and a, b ~ U[ab_lo, ab_hi] independently.
struct MixtureParams {
  double sigma = 0.03;
  double mu1_lo = 0.1, mu1_hi = 0.4;
  double mu2_lo = 0.6, mu2_hi = 0.9;
  double ab_lo = 0.1, ab_hi = 0.8;

  void validate() const;
};

struct MixtureSample {
  DiscreteMeasure measure;
  double mu1, mu2, a, b;
};

// n samples, each drawn from the first component with probability a/(a+b);
// each atom carries (a + b) / n.  Deterministic per seed (mt19937_64).
MixtureSample sample_mixture(int n, std::uint64_t seed, const MixtureParams& params = {});

// n points ~ U[lo, hi], each with weight mass / n.
DiscreteMeasure sample_uniform(int n, std::uint64_t seed, double lo = 0.0, double hi = 1.0,
                               double mass = 1.0);

}  // namespace uot

#endif  // UOTKIT_GEN_HPP
