#include "gascert/control.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gascert/errors.hpp"

namespace gascert::control {

namespace {

void expect(bool ok, std::string_view what) {
  if (!ok) throw DimensionError(std::string(what));
}

void check_set(double theta_max, double eps0) {
  if (!(theta_max > 0.0)) throw DomainError("projection: theta_max must be > 0");
  if (!(eps0 > 0.0)) throw DomainError("projection: eps0 must be > 0");
}

}  // namespace

Matrix reference_model(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& K_x, const Matrix& K_xi) {
  numerics::require_square(A, "reference_model.A");
  const auto n = A.rows(), m = B.cols(), q = C.rows();
  expect(B.rows() == n, "reference_model: B rows must match A");
  expect(C.cols() == n, "reference_model: C columns must match A");
  expect(K_x.rows() == m && K_x.cols() == n, "reference_model: K_x must be m x n");
  expect(K_xi.rows() == m && K_xi.cols() == q, "reference_model: K_xi must be m x q");
  Matrix Am = Matrix::Zero(n + q, n + q);
  Am.topLeftCorner(n, n) = A - B * K_x;
  Am.topRightCorner(n, q) = B * K_xi;
  Am.bottomLeftCorner(q, n) = -C;
  return Am;
}

Vector baseline_control(const Matrix& K_bl, const Vector& x_bar) {
  expect(K_bl.cols() == x_bar.size(), "baseline_control: K_bl columns must match x_bar");
  return -(K_bl * x_bar);
}

Vector mrac_control(const Matrix& theta_hat, const Vector& x_bar) {
  expect(theta_hat.rows() == x_bar.size(), "mrac_control: theta_hat rows must match x_bar");
  return -(theta_hat.transpose() * x_bar);
}

Vector predictor_rate(Mode mode, const Matrix& Am_hat, const Matrix& B_bar, const Vector& x_hat, const Vector& x_bar,
                      const Vector& u, const Matrix& theta_hat, const Vector& exo,
                      std::optional<std::span<const NeighborEstimate>> neighbors) {
  const auto d = Am_hat.rows();
  expect(Am_hat.cols() == d && x_hat.size() == d && x_bar.size() == d && exo.size() == d,
         "predictor_rate: state dimensions differ");
  expect(B_bar.rows() == d && u.size() == B_bar.cols(), "predictor_rate: B_bar does not fit");
  expect(theta_hat.rows() == d && theta_hat.cols() == B_bar.cols(), "predictor_rate: theta_hat does not fit");
  Vector rate = Am_hat * x_hat + B_bar * (u + theta_hat.transpose() * x_bar) + exo;
  if (mode == Mode::distributed) {
    if (!neighbors) throw ConfigError("predictor_rate: distributed mode needs neighbor predictor states");
    for (const NeighborEstimate& nb : *neighbors) {
      if (nb.A_ij == nullptr || nb.x_hat_j == nullptr) {
        throw ConfigError("predictor_rate: incomplete neighbor data");
      }
      expect(nb.A_ij->rows() == d && nb.A_ij->cols() == nb.x_hat_j->size(), "predictor_rate: A_ij does not fit");
      rate.noalias() += *nb.A_ij * *nb.x_hat_j;
    }
  }
  return rate;
}

Matrix update_normalized(const Vector& e, const Matrix& P, const Matrix& B_bar, const Vector& x_hat, double gamma,
                         double e_floor) {
  const auto d = e.size();
  expect(P.rows() == d && P.cols() == d && B_bar.rows() == d && x_hat.size() == d,
         "update_normalized: dimensions differ");
  const double ePe = e.dot(P * e);
  if (ePe <= e_floor * e_floor) return Matrix::Zero(d, B_bar.cols());
  const Eigen::RowVectorXd ePB = e.transpose() * P * B_bar;
  return -gamma * (x_hat * ePB) / (2.0 * std::sqrt(ePe));
}

double g_convex(const Vector& theta, double theta_max, double eps0) {
  check_set(theta_max, eps0);
  const double t2 = theta_max * theta_max;
  return ((eps0 + 1.0) * theta.squaredNorm() - t2) / (eps0 * t2);
}

Vector g_gradient(const Vector& theta, double theta_max, double eps0) {
  check_set(theta_max, eps0);
  return 2.0 * (eps0 + 1.0) * theta / (eps0 * theta_max * theta_max);
}

Vector projection(const Vector& theta, const Vector& y, double theta_max, double eps0) {
  expect(theta.size() == y.size(), "projection: theta and y differ in length");
  const double g = g_convex(theta, theta_max, eps0);
  if (g < 0.0) return y;
  const Vector grad = g_gradient(theta, theta_max, eps0);
  if (grad.dot(y) <= 0.0) return y;
  const double gn = grad.norm();
  if (!(gn > 0.0)) throw DomainError("projection: zero gradient on the boundary layer");
  const Vector unit = grad / gn;
  return y - unit * unit.dot(y) * g;
}

Matrix projection(const Matrix& theta, const Matrix& y, double theta_max, double eps0) {
  expect(theta.rows() == y.rows() && theta.cols() == y.cols(), "projection: theta and y differ in shape");
  Matrix out(y.rows(), y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    out.col(c) = projection(Vector(theta.col(c)), Vector(y.col(c)), theta_max, eps0);
  }
  return out;
}

Matrix update_projection(const Vector& x_tilde, const Matrix& P, const Matrix& B_bar, const Vector& x_bar,
                         double gamma, const Matrix& theta_hat, double theta_max, double eps0) {
  const auto d = x_tilde.size();
  expect(P.rows() == d && P.cols() == d && B_bar.rows() == d && x_bar.size() == d, "update_projection: dimensions");
  expect(theta_hat.rows() == d && theta_hat.cols() == B_bar.cols(), "update_projection: theta_hat does not fit");
  const Eigen::RowVectorXd xPB = x_tilde.transpose() * P * B_bar;
  const Matrix drive = x_bar * xPB;
  return gamma * projection(theta_hat, drive, theta_max, eps0);
}

}  // namespace gascert::control
