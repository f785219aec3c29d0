#include "gascert/connective.hpp"

#include <cmath>
#include <future>
#include <limits>

#include <fmt/format.h>

#include "gascert/errors.hpp"

namespace gascert::connective {

using model::NetworkModel;

double theta_max(double theta_l1_bound) {
  if (!(theta_l1_bound >= 0.0)) throw DomainError("theta_max: bound must be >= 0");
  return 4.0 * theta_l1_bound * theta_l1_bound;
}

LocalLyapunov local_lyapunov(const Matrix& P, const Matrix& Q) {
  numerics::require_square(P, "local_lyapunov.P");
  numerics::require_square(Q, "local_lyapunov.Q");
  const Eigen::SelfAdjointEigenSolver<Matrix> ep(0.5 * (P + P.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Matrix> eq(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
  LocalLyapunov l;
  l.P = P;
  l.lambda_min_P = ep.eigenvalues().minCoeff();
  l.lambda_max_P = ep.eigenvalues().maxCoeff();
  l.lambda_min_Q = eq.eigenvalues().minCoeff();
  if (!(l.lambda_min_P > 0.0)) throw DomainError("local_lyapunov: P is not positive definite");
  if (!(l.lambda_min_Q > 0.0)) throw DomainError("local_lyapunov: Q is not positive definite");
  return l;
}

std::vector<LocalLyapunov> solve_local(const NetworkModel& net, const std::map<model::SubsystemId, Matrix>& overrides) {
  std::vector<std::future<LocalLyapunov>> tasks;
  tasks.reserve(net.size());
  for (const model::Node& nd : net.nodes()) {
    const auto it = overrides.find(nd.raw.id);
    const Matrix* supplied = it == overrides.end() ? nullptr : &it->second;
    tasks.push_back(std::async(std::launch::async, [&nd, supplied] {
      if (supplied != nullptr) {
        if (supplied->rows() != nd.plant.dim() || supplied->cols() != nd.plant.dim()) {
          throw DimensionError(fmt::format("subsystem '{}': supplied P has the wrong shape", nd.raw.id));
        }
        return local_lyapunov(*supplied, nd.tuning.Q);
      }
      return local_lyapunov(numerics::solve_lyapunov(nd.Am_hat, nd.tuning.Q), nd.tuning.Q);
    }));
  }
  std::vector<LocalLyapunov> out;
  out.reserve(tasks.size());
  for (auto& t : tasks) out.push_back(t.get());
  return out;
}

Matrix aggregate_M(const NetworkModel& net, std::span<const LocalLyapunov> local) {
  if (local.size() != net.size()) throw DimensionError("aggregate_M: one P per subsystem required");
  const auto n = static_cast<Eigen::Index>(net.size());
  Matrix M = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LocalLyapunov& li = local[i];
    if (!(li.lambda_min_P > 0.0)) throw DomainError("aggregate_M: P is not positive definite");
    M(i, i) = -li.lambda_min_Q / (2.0 * li.lambda_max_P);
    for (const std::size_t k : net.incoming(i)) {
      const model::Edge& e = net.edges()[k];
      const LocalLyapunov& lj = local[e.from];
      M(i, e.from) = li.lambda_max_P / std::sqrt(li.lambda_min_P * lj.lambda_min_P) * e.gain();
    }
  }
  return M;
}

Vector aggregate_Phi(const NetworkModel& net, std::span<const LocalLyapunov> local,
                     std::optional<double> theta_max_override) {
  if (local.size() != net.size()) throw DimensionError("aggregate_Phi: one P per subsystem required");
  Vector Phi = Vector::Zero(static_cast<Eigen::Index>(net.size()));
  for (std::size_t i = 0; i < net.size(); ++i) {
    const model::Node& nd = net.node(i);
    const LocalLyapunov& li = local[i];
    const double tmax = theta_max_override.value_or(nd.tuning.theta_max);
    if (!(nd.tuning.gamma > 0.0)) throw DomainError("aggregate_Phi: Gamma must be > 0");
    double value = li.lambda_min_Q / (2.0 * nd.tuning.gamma * li.lambda_max_P);
    for (const std::size_t k : net.incoming(i)) {
      const std::size_t j = net.edges()[k].from;
      const model::Edge* back = net.find_edge(i, j);  // Ā_ji
      if (back == nullptr) continue;
      const double gamma_j = net.node(j).tuning.gamma;
      if (!(gamma_j > 0.0)) throw DomainError("aggregate_Phi: Gamma must be > 0");
      value -= li.lambda_max_P * back->gain() / (gamma_j * std::sqrt(li.lambda_min_P * local[j].lambda_min_P));
    }
    Phi(static_cast<Eigen::Index>(i)) = tmax * value;
  }
  return Phi;
}

Conditions check_conditions(const Matrix& M, const Vector& Phi) {
  numerics::require_square(M, "check_conditions");
  if (Phi.size() != M.rows()) throw DimensionError("check_conditions: Phi length must match M");
  Conditions c;
  c.cond_diag = true;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j != i) off += M(i, j);
    }
    const bool row_ok = std::abs(M(i, i)) > off;
    c.cond_diag_rows.push_back(row_ok);
    c.cond_diag = c.cond_diag && row_ok;
  }
  c.norm1_M = M.size() == 0 ? 0.0 : M.cwiseAbs().colwise().sum().maxCoeff();
  c.max_abs_Phi = Phi.size() == 0 ? 0.0 : Phi.cwiseAbs().maxCoeff();
  c.cond_norm = c.norm1_M > c.max_abs_Phi;
  c.M_stable = M.rows() > 0 && numerics::eigenvalues(M).all_stable();
  return c;
}

bool homogeneous_condition(double lambda_min_Q, double lambda_max_P, double lambda_min_P, int neighbor_count,
                           double gain) {
  return lambda_min_Q / (2.0 * lambda_max_P) > lambda_max_P / lambda_min_P * neighbor_count * gain;
}

TransientBound decay_and_rho(const LocalLyapunov& local, double theta_max, double gamma, double V0, double t) {
  if (!(gamma > 0.0)) throw DomainError("decay_and_rho: Gamma must be > 0");
  if (!(t >= 0.0)) throw DomainError("decay_and_rho: t must be >= 0");
  if (!(local.lambda_min_P > 0.0) || !(local.lambda_min_Q > 0.0)) {
    throw DomainError("decay_and_rho: P and Q must be positive definite");
  }
  TransientBound b;
  b.alpha = local.lambda_min_Q / local.lambda_max_P;
  const double floor_term = theta_max / gamma;
  const double radicand =
      (V0 - floor_term) * std::exp(-b.alpha * t) / local.lambda_min_P + floor_term / local.lambda_min_P;
  if (radicand < 0.0) throw DomainError("decay_and_rho: negative radicand, bound is invalid");
  b.rho = std::sqrt(radicand);
  return b;
}

SmallGainResult small_gain_check(const Matrix& A12, const Matrix& A21, const Matrix& Am) {
  return small_gain_check(A12, A21, Am, Am);
}

SmallGainResult small_gain_check(const Matrix& A12, const Matrix& A21, const Matrix& Am1, const Matrix& Am2) {
  SmallGainResult r;
  r.raw_gain_product = numerics::spectral_norm(A12) * numerics::spectral_norm(A21);
  r.subsystems_stable = numerics::is_hurwitz(Am1) && numerics::is_hurwitz(Am2);
  if (!r.subsystems_stable) {
    r.hinf_product = std::numeric_limits<double>::infinity();
    r.pass = false;
    return r;
  }
  r.hinf_product = numerics::hinf_gain(A12, Am2) * numerics::hinf_gain(A21, Am1);
  r.pass = r.hinf_product < 1.0;
  return r;
}

Report analyze(const NetworkModel& net, const std::map<model::SubsystemId, Matrix>& overrides) {
  Report r;
  r.local = solve_local(net, overrides);
  r.M = aggregate_M(net, r.local);
  r.Phi = aggregate_Phi(net, r.local);
  r.conditions = check_conditions(r.M, r.Phi);
  for (const LocalLyapunov& l : r.local) r.alpha.push_back(l.lambda_min_Q / l.lambda_max_P);
  r.pass = r.conditions.cond_diag && r.conditions.cond_norm;
  return r;
}

}  // namespace gascert::connective
