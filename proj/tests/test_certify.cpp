#include "doctest.h"
#include "oracles.hpp"
#include "uotkit/certify.hpp"
#include "uotkit/measures.hpp"

using namespace uot;

TEST_SUITE("certify") {

TEST_CASE("hilbert norm examples") {
  Vector f(3);
  f << 1, 3, 5;
  CHECK(hilbert_norm(f) == 2.0);
  CHECK(hilbert_norm(Vector::Constant(4, -2.5)) == 0.0);
}

TEST_CASE("double star norm examples") {
  Vector f(2), g(2);
  f << 0, 1;
  g << 0, 2;
  CHECK(double_star_norm(f, g) == 3.0);
  const Vector h = oracle::uniform_vec(6, -2, 2);
  CHECK(double_star_norm(h, (-h).eval()) == doctest::Approx(2.0 * hilbert_norm(h)));
}

TEST_CASE("norms match the lambda grid oracles") {
  for (int rep = 0; rep < 20; ++rep) {
    const Vector f = oracle::uniform_vec(7, -3, 3), g = oracle::uniform_vec(5, -3, 3);
    CHECK(std::abs(hilbert_norm(f) - oracle::hilbert_grid(f)) < 1e-5);
    CHECK(std::abs(double_star_norm(f, g) - oracle::double_star_grid(f, g)) < 1e-5);
    double brute = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
      for (Eigen::Index j = 0; j < g.size(); ++j) brute = std::max(brute, std::abs(f[i] + g[j]));
    CHECK(double_star_norm(f, g) == brute);
  }
}

TEST_CASE("norm invariances and bounds") {
  for (int rep = 0; rep < 50; ++rep) {
    const Vector f = oracle::uniform_vec(6, -3, 3), g = oracle::uniform_vec(4, -3, 3);
    const double c = std::ldexp(oracle::uniform(-1, 1), 3);  // dyadic-friendly shift
    const Vector fs = (f.array() + c).matrix(), gs = (g.array() - c).matrix();
    CHECK(hilbert_norm(f) <= f.cwiseAbs().maxCoeff());
    CHECK(double_star_norm(f, g) <= f.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff());
    CHECK(hilbert_norm(fs) == doctest::Approx(hilbert_norm(f)).epsilon(1e-15));
    CHECK(double_star_norm(fs, gs) == doctest::Approx(double_star_norm(f, g)).epsilon(1e-15));
  }
}

TEST_CASE("scalar_max_oracle examples") {
  const auto q = scalar_max_oracle([](double l) { return -(l - 0.3) * (l - 0.3); }, -1, 1, 1e-10);
  CHECK(q.argmax == doctest::Approx(0.3).epsilon(1e-9));
  const auto d = scalar_max_oracle([](double l) { return -2.0 * l; }, -1, 1, 1e-10);
  CHECK(d.argmax == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK_THROWS_AS(scalar_max_oracle([](double l) { return l; }, 1, 0), std::invalid_argument);
}

TEST_CASE("grid_min_oracle") {
  const auto r = grid_min_oracle([](double x) { return (x - 1.234567) * (x - 1.234567); }, -5, 5,
                                 1e-2, 1e-6);
  CHECK(r.argmax == doctest::Approx(1.234567).epsilon(1e-6));
}

TEST_CASE("assemble_certificate examples") {
  const auto ok = assemble_certificate(1.0, 1.0, 0.0, 1e-6);
  CHECK(ok.passed);
  CHECK(ok.gap == 0.0);
  const auto wide = assemble_certificate(1.0 + 1e-3, 1.0, 0.0, 1e-6);
  CHECK_FALSE(wide.passed);
  const auto breach = assemble_certificate(1.0, 1.0 + 1e-6, 0.0, 1e-6);
  CHECK_FALSE(breach.passed);
  CHECK(breach.weak_duality_breach);
  CHECK_FALSE(assemble_certificate(1.0, 1.0, 1e-3, 1e-6).passed);
}

TEST_CASE("certificate json keys") {
  const std::string js = to_json(assemble_certificate(2.0, 1.5, 0.0, 1.0));
  for (const char* key : {"\"primal\"", "\"dual\"", "\"gap\"", "\"feasibility_violation\"",
                          "\"passed\":true"})
    CHECK(js.find(key) != std::string::npos);
}

}
