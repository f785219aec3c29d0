#include <doctest.h>

#include <cmath>
#include <random>

#include "gascert/control.hpp"
#include "gascert/errors.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gascert;
using namespace gascert::control;
using helpers::mat;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (const double x : v) out(k++) = x;
  return out;
}

Vector random_vector(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(n);
  for (int k = 0; k < n; ++k) v(k) = nd(rng);
  return v;
}

// Random point with ‖θ‖ = r·θ_max in a random direction.
Vector at_radius(std::mt19937_64& rng, int n, double r, double theta_max) {
  Vector v = random_vector(rng, n, 1.0);
  return r * theta_max * v / v.norm();
}

}  // namespace

TEST_CASE("reference_model structure") {
  const Matrix Am = reference_model(mat({{1}}), mat({{1}}), mat({{1}}), mat({{4}}), mat({{2}}));
  CHECK(Am == mat({{-3, 2}, {-1, 0}}));
  std::mt19937_64 rng(61);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 4, m = 1 + k % 2, q = 1 + k % 2;
    const Matrix C = oracle::random_matrix(rng, q, n);
    const Matrix M = reference_model(oracle::random_matrix(rng, n, n), oracle::random_matrix(rng, n, m), C,
                                     oracle::random_matrix(rng, m, n), oracle::random_matrix(rng, m, q));
    CHECK(M.bottomLeftCorner(q, n) == -C);
    CHECK(M.bottomRightCorner(q, q).isZero(0.0));
  }
  CHECK_THROWS_AS(reference_model(mat({{1}}), mat({{1}}), mat({{1}}), mat({{4, 1}}), mat({{2}})), DimensionError);
}

TEST_CASE("baseline_control and mrac_control") {
  CHECK(baseline_control(mat({{0, 0}}), vec({1, 1})).isZero(0.0));
  CHECK(baseline_control(mat({{1, 2}}), vec({1, 1}))(0) == -3.0);
  CHECK(baseline_control(mat({{1, 2}}), vec({2.5, -1}))(0) == doctest::Approx(2.5 * baseline_control(mat({{1, 2}}), vec({1, -0.4}))(0)));
  CHECK(mrac_control(mat({{0}, {0}}), vec({2, 5})).isZero(0.0));
  CHECK(mrac_control(mat({{1}, {0}}), vec({2, 5}))(0) == -2.0);
  // θ̂ = θ cancels the uncertainty term exactly.
  const Matrix theta = mat({{0.3}, {-1.7}});
  const Vector x = vec({0.4, 2.2});
  CHECK((mrac_control(theta, x) + theta.transpose() * x).isZero(0.0));
  CHECK_THROWS_AS(baseline_control(mat({{1, 2}}), vec({1})), DimensionError);
  CHECK_THROWS_AS(mrac_control(mat({{1}}), vec({1, 2})), DimensionError);
}

TEST_CASE("predictor_rate") {
  const Matrix Am = mat({{-1}}), B = mat({{1}}), th = mat({{0}});
  const Vector z = vec({0}), one = vec({1});
  CHECK(predictor_rate(Mode::decentralized, Am, B, z, z, z, th, z).isZero(0.0));
  CHECK(predictor_rate(Mode::decentralized, Am, B, one, z, z, th, z)(0) == -1.0);

  std::mt19937_64 rng(67);
  for (int k = 0; k < 50; ++k) {
    const int d = 1 + k % 4;
    const Matrix A = oracle::random_matrix(rng, d, d), Bb = oracle::random_matrix(rng, d, 1);
    const Matrix T = oracle::random_matrix(rng, d, 1);
    const Vector xh = random_vector(rng, d, 1), xb = random_vector(rng, d, 1), u = random_vector(rng, 1, 1);
    const Vector exo = random_vector(rng, d, 1);
    const Matrix A1 = oracle::random_matrix(rng, d, 2), A2 = oracle::random_matrix(rng, d, 3);
    const Vector x1 = random_vector(rng, 2, 1), x2 = random_vector(rng, 3, 1);
    const std::vector<NeighborEstimate> nb{{&A1, &x1}, {&A2, &x2}};
    const Vector dec = predictor_rate(Mode::decentralized, A, Bb, xh, xb, u, T, exo);
    const Vector dist = predictor_rate(Mode::distributed, A, Bb, xh, xb, u, T, exo, nb);
    CHECK(((dist - dec) - (A1 * x1 + A2 * x2)).norm() <= 1e-14 * (1 + dist.norm()));
  }
  CHECK_THROWS_AS(predictor_rate(Mode::distributed, Am, B, z, z, z, th, z), ConfigError);
  CHECK(predictor_rate(Mode::distributed, Am, B, one, z, z, th, z, std::span<const NeighborEstimate>{})(0) == -1.0);
  CHECK_THROWS_AS(predictor_rate(Mode::decentralized, Am, B, vec({1, 2}), z, z, th, z), DimensionError);
}

TEST_CASE("update_normalized") {
  CHECK(update_normalized(vec({0}), mat({{1}}), mat({{1}}), vec({2}), 1.0).isZero(0.0));
  CHECK(update_normalized(vec({1}), mat({{1}}), mat({{1}}), vec({2}), 1.0)(0, 0) == doctest::Approx(-1.0));
  // Homogeneous of degree zero in e above the floor.
  std::mt19937_64 rng(71);
  for (int k = 0; k < 100; ++k) {
    const int d = 1 + k % 4;
    const Matrix R = oracle::random_matrix(rng, d, d);
    const Matrix P = R * R.transpose() + Matrix::Identity(d, d);
    const Matrix B = oracle::random_matrix(rng, d, 1 + k % 2);
    const Vector e = random_vector(rng, d, 1), xh = random_vector(rng, d, 1);
    const double c = std::pow(10.0, -4 + (k % 9));
    const Matrix a = update_normalized(e, P, B, xh, 2.0), b = update_normalized(c * e, P, B, xh, 2.0);
    CHECK((a - b).norm() <= 1e-12 * (1 + a.norm()));
  }
}

TEST_CASE("g_convex and g_gradient") {
  CHECK(g_convex(vec({0, 0}), 2.0, 0.1) == doctest::Approx(-10.0));
  CHECK(g_convex(vec({2, 0}), 2.0, 0.1) == doctest::Approx(1.0));
  CHECK(g_convex(vec({0, 2.0 / std::sqrt(1.1)}), 2.0, 0.1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(g_convex(vec({0}), 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(g_convex(vec({0}), 1.0, 0.0), DomainError);
  // Gradient against central differences.
  std::mt19937_64 rng(73);
  for (int k = 0; k < 50; ++k) {
    const Vector t = random_vector(rng, 3, 1);
    const Vector g = g_gradient(t, 1.5, 0.2);
    for (int i = 0; i < 3; ++i) {
      Vector e = Vector::Zero(3);
      e(i) = 1e-6;
      const double fd = (g_convex(t + e, 1.5, 0.2) - g_convex(t - e, 1.5, 0.2)) / 2e-6;
      CHECK(std::abs(fd - g(i)) <= 1e-6 * (1 + std::abs(g(i))));
    }
  }
}

TEST_CASE("projection: cases") {
  const double tm = 1.0, e0 = 0.1;
  CHECK(projection(vec({0.1, 0}), vec({5, 7}), tm, e0) == vec({5, 7}));
  // Boundary g = 1, outward radial: the radial part is removed completely.
  const Vector out = projection(vec({1, 0}), vec({3, 2}), tm, e0);
  CHECK(std::abs(out(0)) < 1e-14);
  CHECK(out(1) == 2.0);
  // Boundary, inward drive: unchanged.
  CHECK(projection(vec({1, 0}), vec({-3, 2}), tm, e0) == vec({-3, 2}));
  // Column-wise on matrices.
  const Matrix th = mat({{0.1, 1}, {0, 0}}), y = mat({{5, 3}, {7, 2}});
  const Matrix p = projection(th, y, tm, e0);
  CHECK(p.col(0) == y.col(0));
  CHECK(std::abs(p(0, 1)) < 1e-14);
  CHECK_THROWS_AS(projection(vec({1, 0}), vec({1}), tm, e0), DimensionError);
}

TEST_CASE("property 1: interior points leave the input unchanged exactly") {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 5;
    const double tm = 0.1 + 10 * u(rng), e0 = 0.01 + u(rng);
    const Vector th = at_radius(rng, n, u(rng) / std::sqrt(1 + e0) * 0.999, tm);
    REQUIRE(g_convex(th, tm, e0) < 0.0);
    const Vector y = random_vector(rng, n, 10);
    CHECK(projection(th, y, tm, e0) == y);
  }
}

TEST_CASE("property 2: (θ̂ − θ*)ᵀ(Proj(θ̂, y) − y) ≤ 0") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 5;
    const double tm = 0.1 + 10 * u(rng), e0 = 0.01 + u(rng);
    const Vector star = at_radius(rng, n, u(rng) / std::sqrt(1 + e0), tm);
    const Vector th = at_radius(rng, n, u(rng), tm);
    const Vector y = random_vector(rng, n, 10);
    const double v = (th - star).dot(projection(th, y, tm, e0) - y);
    CHECK(v <= 1e-12 * (1 + y.norm() * tm));
  }
}

TEST_CASE("update_projection") {
  const Matrix P = mat({{2, 0}, {0, 1}}), B = mat({{1}, {0.5}}), th = mat({{0.1}, {0.0}});
  CHECK(update_projection(Vector::Zero(2), P, B, vec({1, 2}), 3.0, th, 1.0, 0.1).isZero(0.0));
  const Vector xt = vec({0.2, -0.4}), xb = vec({1, 2});
  const Matrix raw = 3.0 * xb * (xt.transpose() * P * B);
  CHECK(update_projection(xt, P, B, xb, 3.0, th, 1.0, 0.1) == raw);
}

TEST_CASE("property: small Euler steps keep the estimate inside the projection set") {
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 4;
    const double tm = 0.5 + 2 * u(rng), e0 = 0.05 + 0.2 * u(rng), gamma = 5.0;
    Vector th = at_radius(rng, n, u(rng) / std::sqrt(1 + e0), tm);
    double worst = -1e300;
    for (int s = 0; s < 20000; ++s) {
      // Drive with a persistent outward component plus a random part.
      Vector dir = th.norm() > 0 ? Vector(th / th.norm()) : random_vector(rng, n, 1);
      const Vector y = dir + 0.3 * random_vector(rng, n, 1);
      const double h = 0.01 * tm / (gamma * y.norm());
      th += h * gamma * projection(th, y, tm, e0);
      worst = std::max(worst, g_convex(th, tm, e0));
    }
    // Tangential motion adds an O(h) overshoot above g = 1.
    CHECK(worst <= 1.05);
    CHECK(th.norm() <= tm * 1.01);
  }
}
