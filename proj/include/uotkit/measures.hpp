#ifndef UOTKIT_MEASURES_HPP
#define UOTKIT_MEASURES_HPP

#include <variant>

#include <Eigen/Dense>

namespace uot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Discrete measure on the real line.  Support points are strictly
// increasing; weights are nonnegative with positive finite total mass.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  // Sorts the support and merges duplicate points by summing their weights.
  // Throws std::invalid_argument on length mismatch, empty input, negative or
  // non-finite weights, non-finite points or zero total mass.
  DiscreteMeasure(Vector points, Vector weights);

  // Uniform empirical measure: each point carries mass / n.
  static DiscreteMeasure empirical(const Vector& samples, double mass = 1.0);

  const Vector& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  Eigen::Index size() const { return points_.size(); }
  double mass() const { return weights_.sum(); }

  // Same support, new weights (e.g. a reweighted marginal).  The weights go
  // through the same validation as the constructor.
  DiscreteMeasure with_weights(Vector weights) const;

  // Drops atoms of zero weight.
  DiscreteMeasure prune_zeros() const;

 private:
  Vector points_;
  Vector weights_;
};

// c(x, y) = |x - y|^p with p >= 1.
struct PowerCost {
  double p = 2.0;
};

// Caller supplied N x M cost matrix.
struct ExplicitCost {
  Matrix C;
};

using CostSpec = std::variant<PowerCost, ExplicitCost>;

double power_cost(double x, double y, double p);

// Entry (i, j) is c(x_i, y_j).  Throws std::invalid_argument when p < 1, on
// dimension mismatch of an explicit matrix, or on non-finite entries.
Matrix build_cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b,
                         const CostSpec& cost);

// max_{i,j,k,l} C(j,k) + C(i,l) - C(j,l) - C(i,k).
//
// For a fixed row pair (i, j) the quantity splits into
// max_k D(k) - min_l D(l) with D = C(j,:) - C(i,:), so the exact maximum
// costs O(N^2 M) instead of the O(N^2 M^2) enumeration.
double cost_quadruple_diameter(const Matrix& C);

// True when C(i,j) + C(i+1,j+1) <= C(i,j+1) + C(i+1,j) + tol for all
// adjacent cells (Monge property).  Monotone plans are optimal for such
// costs and the staircase duals are feasible.
bool is_submodular(const Matrix& C, double tol = 1e-12);

}  // namespace uot

#endif  // UOTKIT_MEASURES_HPP
