#ifndef UOTKIT_SINKHORN_HPP
#define UOTKIT_SINKHORN_HPP

#include <optional>
#include <utility>

#include "uotkit/duality.hpp"
#include "uotkit/report.hpp"

namespace uot {

enum class SinkhornVariant { F, G, H };

struct AndersonConfig {
  int depth = 4;
  double reg = 1e-7;
};

struct SinkhornConfig {
  SinkhornVariant variant = SinkhornVariant::F;
  int max_iters = 100000;
  double tol = 1e-9;  // sup-norm change of the translated f per iteration
  std::optional<AndersonConfig> anderson;
};

// Exact maximizers of F_eps in one potential, the other fixed:
//   g = -aprox_phi2(-Smin_alpha(C - f)),  f = -aprox_phi1(-Smin_beta(C - g)).
Vector sinkhorn_update_g(const UotProblem& prob, const Vector& f);
Vector sinkhorn_update_f(const UotProblem& prob, const Vector& g);

// One F-Sinkhorn iteration: g from f, then f from the new g.
DualPair f_sinkhorn_step(const UotProblem& prob, const DualPair& d);

// One alternate maximization sweep on G_eps over (gbar, fbar, lambda).
// Input and output pairs are untranslated; the new lambda is returned.
std::pair<DualPair, double> g_sinkhorn_step(const UotProblem& prob, const DualPair& d,
                                            double lam);

// Exact maximizers of H_eps in one potential (KL only):
//   fhat = r1/(r1+eps) Smin_beta^eps(C - gbar)
//          - eps/(eps+r1) * r1/(r1+r2) Smin_beta^r2(gbar)
//   fbar = fhat + k/(1-k) Smin_alpha^r1(fhat),  k = eps/(eps+r1) * r2/(r1+r2)
// and symmetrically for gbar.  Throws std::invalid_argument for non-KL input.
Vector h_update_f(const UotProblem& prob, const Vector& gbar);
Vector h_update_g(const UotProblem& prob, const Vector& fbar);

// One H-Sinkhorn iteration: gbar from fbar, then fbar from the new gbar.
DualPair h_sinkhorn_step(const UotProblem& prob, const DualPair& d);

// Sup-norm residual of the log form of the first-order condition of H_eps in
// fbar (resp. gbar):
//   fbar/eps + log <beta, e^{(gbar - C)/eps}> = log grad phi1*(-fbar - lam*).
double h_optimality_residual_f(const UotProblem& prob, const DualPair& d);
double h_optimality_residual_g(const UotProblem& prob, const DualPair& d);

// (f + lam*, g - lam*).
DualPair translate_optimal(const UotProblem& prob, const DualPair& d);

// Iterates the chosen variant from `init` until the translated f moves less
// than tol in sup-norm, or max_iters.  With a reference, the trace also holds
// the sup distances of the translated iterates to it.
SolverReport run_sinkhorn(const UotProblem& prob, const SinkhornConfig& config,
                          const DualPair& init,
                          const std::optional<DualPair>& reference = std::nullopt);

// c = (U^T U + r I)^{-1} 1 / (1^T (U^T U + r I)^{-1} 1).
// Throws std::runtime_error when the system is singular.
Vector anderson_weights(const Matrix& U, double reg);

// exp(median_t log(e_{t+1} / e_t)).  The sequence is cut at the first entry
// below 1e-13.  Throws std::invalid_argument with fewer than 2 usable ratios.
double estimate_rate(const std::vector<double>& errors);

// Birkhoff-Hopf contraction bound tanh(Delta / (4 eps)) of the softmin for
// the cost's quadruple diameter Delta.
double birkhoff_rate_bound(const UotProblem& prob);

}  // namespace uot

#endif  // UOTKIT_SINKHORN_HPP
