#include "gascert/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/format.h>

#include "gascert/errors.hpp"

namespace gascert::riccati {

double xi_squared(const model::NetworkModel& net, std::size_t i, bool strict) {
  if (i >= net.size()) throw DomainError(fmt::format("xi_squared: no subsystem with index {}", i));
  auto sum = [&net](const std::vector<std::size_t>& edges) {
    double s = 0.0;
    for (const std::size_t k : edges) {
      const double g = net.edges()[k].gain();
      s += g * g;
    }
    return s;
  };
  const double in = sum(net.incoming(i));
  return strict ? std::max(in, sum(net.outgoing(i))) : in;
}

double gas_margin(const Matrix& Am, int neighbor_count, double xi2, double tol) {
  if (neighbor_count < 1) throw DomainError("gas_margin: neighbor count must be >= 1");
  if (!(xi2 >= 0.0)) throw DomainError("gas_margin: Xi^2 must be >= 0");
  const double gamma = numerics::distance_to_instability(Am, neighbor_count, tol);
  return gamma - std::sqrt(neighbor_count * xi2);
}

namespace {

double epsilon_from(double gamma, int n, double xi2) { return 0.5 * (gamma * gamma / n - xi2); }

}  // namespace

double epsilon_margin(const Matrix& Am, int neighbor_count, double xi2, double tol) {
  const double margin = gas_margin(Am, neighbor_count, xi2, tol);
  if (!(margin > 0.0)) {
    throw DomainError(fmt::format("epsilon_margin: margin {:.6g} <= 0, no admissible epsilon", margin));
  }
  return epsilon_from(margin + std::sqrt(neighbor_count * xi2), neighbor_count, xi2);
}

const SubsystemCertificate* GasCertificate::find(const model::SubsystemId& id) const {
  for (const auto& s : subsystems) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

namespace {

SubsystemCertificate certify_one(const model::NetworkModel& net, std::size_t i, const CertifyOptions& opts) {
  const model::Node& nd = net.node(i);
  SubsystemCertificate c;
  c.id = nd.raw.id;
  c.neighbor_count = net.neighbor_count(i);
  c.effective_count = std::max(c.neighbor_count, 1);
  c.xi2 = xi_squared(net, i, opts.strict_xi);
  try {
    if (!numerics::is_hurwitz(nd.Am_hat)) {
      c.failure = "Am_hat is not Hurwitz";
      return c;
    }
    const double tol = opts.tol > 0.0 ? opts.tol : numerics::default_distance_tolerance(nd.Am_hat);
    c.gamma = numerics::distance_to_instability(nd.Am_hat, c.effective_count, tol);
    c.margin = c.gamma - std::sqrt(c.effective_count * c.xi2);
    if (!(c.margin > 0.0)) {
      c.failure = fmt::format("distance margin {:.6g} <= 0", c.margin);
      return c;
    }
    c.epsilon = epsilon_from(c.gamma, c.effective_count, c.xi2);
    const numerics::AreSolution are = numerics::solve_are(nd.Am_hat, c.effective_count, c.xi2 + c.epsilon);
    c.P = are.P;
    c.are_residual = are.residual_norm;
    c.lambda_min_P = Eigen::SelfAdjointEigenSolver<Matrix>(c.P, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const double p2 = numerics::spectral_norm(c.P);
    if (c.are_residual > opts.residual_rel * std::max(1.0, p2 * p2)) {
      c.failure = fmt::format("ARE residual {:.6g} above tolerance", c.are_residual);
      return c;
    }
    if (!(c.lambda_min_P > 0.0)) {
      c.failure = "P is not positive definite";
      return c;
    }
    c.certified = true;
  } catch (const Error& e) {
    c.failure = e.what();
  }
  return c;
}

}  // namespace

GasCertificate certify_gas(const model::NetworkModel& net, const CertifyOptions& opts) {
  std::vector<std::future<SubsystemCertificate>> tasks;
  tasks.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    tasks.push_back(std::async(std::launch::async, [&net, i, &opts] { return certify_one(net, i, opts); }));
  }
  GasCertificate cert;
  for (auto& t : tasks) cert.subsystems.push_back(t.get());
  std::sort(cert.subsystems.begin(), cert.subsystems.end(),
            [](const SubsystemCertificate& a, const SubsystemCertificate& b) { return a.id < b.id; });
  cert.certified = true;
  for (const auto& s : cert.subsystems) {
    if (!s.certified) {
      cert.certified = false;
      cert.failing.push_back(s.id);
    }
  }
  return cert;
}

}  // namespace gascert::riccati
