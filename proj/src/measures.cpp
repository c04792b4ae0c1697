#include "uotkit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace uot {

namespace {

void validate_weights(const Vector& weights) {
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]))
      throw std::invalid_argument("measure weight is not finite");
    if (weights[i] < 0.0)
      throw std::invalid_argument("measure weight is negative");
  }
  const double m = weights.sum();
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("measure must have positive finite mass");
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Vector points, Vector weights) {
  if (points.size() != weights.size())
    throw std::invalid_argument("points and weights differ in length");
  if (points.size() == 0)
    throw std::invalid_argument("measure needs at least one atom");
  for (Eigen::Index i = 0; i < points.size(); ++i)
    if (!std::isfinite(points[i]))
      throw std::invalid_argument("support point is not finite");
  validate_weights(weights);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return points[l] < points[r]; });

  std::vector<double> xs, ws;
  xs.reserve(order.size());
  ws.reserve(order.size());
  for (auto idx : order) {
    if (!xs.empty() && xs.back() == points[idx]) {
      ws.back() += weights[idx];
    } else {
      xs.push_back(points[idx]);
      ws.push_back(weights[idx]);
    }
  }
  points_ = Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  weights_ = Eigen::Map<Vector>(ws.data(), static_cast<Eigen::Index>(ws.size()));
}

DiscreteMeasure DiscreteMeasure::empirical(const Vector& samples, double mass) {
  if (samples.size() == 0) throw std::invalid_argument("no samples");
  Vector w = Vector::Constant(samples.size(), mass / static_cast<double>(samples.size()));
  return DiscreteMeasure(samples, std::move(w));
}

DiscreteMeasure DiscreteMeasure::with_weights(Vector weights) const {
  if (weights.size() != points_.size())
    throw std::invalid_argument("weights do not match the support size");
  validate_weights(weights);
  DiscreteMeasure out;
  out.points_ = points_;
  out.weights_ = std::move(weights);
  return out;
}

DiscreteMeasure DiscreteMeasure::prune_zeros() const {
  std::vector<double> xs, ws;
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (weights_[i] > 0.0) {
      xs.push_back(points_[i]);
      ws.push_back(weights_[i]);
    }
  }
  DiscreteMeasure out;
  out.points_ = Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  out.weights_ = Eigen::Map<Vector>(ws.data(), static_cast<Eigen::Index>(ws.size()));
  return out;
}

double power_cost(double x, double y, double p) {
  const double d = std::abs(x - y);
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

Matrix build_cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b,
                         const CostSpec& cost) {
  const Eigen::Index n = a.size(), m = b.size();
  Matrix C;
  if (const auto* pc = std::get_if<PowerCost>(&cost)) {
    if (!(pc->p >= 1.0)) throw std::invalid_argument("power cost exponent must be >= 1");
    C.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        C(i, j) = power_cost(a.points()[i], b.points()[j], pc->p);
  } else {
    const auto& ec = std::get<ExplicitCost>(cost);
    if (ec.C.rows() != n || ec.C.cols() != m)
      throw std::invalid_argument("explicit cost is " + std::to_string(ec.C.rows()) + "x" +
                                  std::to_string(ec.C.cols()) + ", expected " +
                                  std::to_string(n) + "x" + std::to_string(m));
    C = ec.C;
  }
  if (!C.allFinite()) throw std::invalid_argument("cost matrix has non-finite entries");
  return C;
}

double cost_quadruple_diameter(const Matrix& C) {
  double best = 0.0;
  const Eigen::Index n = C.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      // The (j, i) ordering gives the same range with opposite sign.
      const Eigen::RowVectorXd d = C.row(j) - C.row(i);
      best = std::max(best, d.maxCoeff() - d.minCoeff());
    }
  }
  return best;
}

bool is_submodular(const Matrix& C, double tol) {
  for (Eigen::Index j = 0; j + 1 < C.cols(); ++j)
    for (Eigen::Index i = 0; i + 1 < C.rows(); ++i)
      if (C(i, j) + C(i + 1, j + 1) > C(i, j + 1) + C(i + 1, j) + tol) return false;
  return true;
}

}  // namespace uot
