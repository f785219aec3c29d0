#pragma once

#include <initializer_list>
#include <string>

#include "gascert/control.hpp"
#include "gascert/model.hpp"

namespace helpers {

using gascert::numerics::Matrix;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const double v : row) M(r, c++) = v;
    ++r;
  }
  return M;
}

/// Node with raw (A, B, C), optional E, and the given Âm; Q = I, K_bl = 0.
inline gascert::model::Node node(const std::string& id, const Matrix& A, const Matrix& B, const Matrix& C,
                                 const Matrix& Am_hat, Matrix E = {}) {
  gascert::model::Node nd;
  nd.raw.id = id;
  nd.raw.A = A;
  nd.raw.B = B;
  nd.raw.C = C;
  nd.raw.D = Matrix::Zero(C.rows(), B.cols());
  nd.raw.E = E.size() == 0 ? Matrix::Zero(A.rows(), 0) : E;
  nd.plant = gascert::model::augment(nd.raw);
  nd.Am_hat = Am_hat;
  nd.K_bl = Matrix::Zero(B.cols(), nd.plant.dim());
  nd.tuning.Q = Matrix::Identity(nd.plant.dim(), nd.plant.dim());
  return nd;
}

/// Scalar node (n = 1, no tracked output) with Âm = [a].
inline gascert::model::Node scalar_node(const std::string& id, double a) {
  return node(id, mat({{0.0}}), mat({{1.0}}), Matrix::Zero(0, 1), mat({{a}}));
}

/// Integrator-type node x' = x + u + d, y = x, with Âm from K_x = 4, K_ξ = 2.
inline gascert::model::Node loop_node(const std::string& id) {
  const Matrix A = mat({{1.0}}), B = mat({{1.0}}), C = mat({{1.0}});
  return node(id, A, B, C, gascert::control::reference_model(A, B, C, mat({{4.0}}), mat({{2.0}})), mat({{1.0}}));
}

inline gascert::model::Edge edge(const std::string& from, const std::string& to, const Matrix& A_ij) {
  gascert::model::Edge e;
  e.raw.from = from;
  e.raw.to = to;
  e.raw.A_ij = A_ij;
  return e;
}

}  // namespace helpers
