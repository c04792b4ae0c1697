#ifndef UOTKIT_REPORT_HPP
#define UOTKIT_REPORT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "uotkit/duality.hpp"

namespace uot {

// One solver iteration.  Sinkhorn runs fill delta_f and the optional
// reference errors; Frank-Wolfe runs fill h0 and the two gaps.
struct IterRecord {
  double delta_f = 0.0;
  std::optional<double> err_f;
  std::optional<double> err_g;
  double h0 = 0.0;
  double fw_gap = 0.0;
  double pd_gap = 0.0;
  std::int64_t wall_ns = 0;
};

struct SolverReport {
  DualPair final;
  int iterations = 0;
  std::vector<IterRecord> trace;
  bool converged = false;
};

}  // namespace uot

#endif  // UOTKIT_REPORT_HPP
