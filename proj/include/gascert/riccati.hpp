#pragma once

#include <string>
#include <vector>

#include "gascert/model.hpp"

namespace gascert::riccati {

using numerics::Matrix;

/// Ξ² = Σ_{j∈𝒩_i} ‖Ā_ij‖₂² over incoming edges. Model-unknown edges use the
/// declared bound. In strict mode the larger of the incoming and outgoing sums
/// is used, which covers the symmetric-bound reading.
double xi_squared(const model::NetworkModel& net, std::size_t i, bool strict = false);

/// γ − √(N·Ξ²) with γ = distance to instability of Am.
/// Throws NotHurwitzError, DomainError for N < 1 or Ξ² < 0.
double gas_margin(const Matrix& Am, int neighbor_count, double xi2, double tol);

/// ε = ½(γ²/N − Ξ²). Throws DomainError when gas_margin ≤ 0.
double epsilon_margin(const Matrix& Am, int neighbor_count, double xi2, double tol);

struct SubsystemCertificate {
  model::SubsystemId id;
  int neighbor_count = 0;  // N_i as in the graph
  int effective_count = 1; // max(N_i, 1), used in γ, ε and the ARE
  double xi2 = 0.0;
  double gamma = 0.0;
  double margin = 0.0;
  double epsilon = 0.0;
  Matrix P;
  double are_residual = 0.0;
  double lambda_min_P = 0.0;
  bool certified = false;
  std::string failure;  // empty when certified
};

struct GasCertificate {
  std::vector<SubsystemCertificate> subsystems;  // sorted by id
  bool certified = false;
  std::vector<model::SubsystemId> failing;

  /// Entry for `id`, or nullptr.
  [[nodiscard]] const SubsystemCertificate* find(const model::SubsystemId& id) const;
};

struct CertifyOptions {
  bool strict_xi = false;
  /// Absolute bisection tolerance; <= 0 selects default_distance_tolerance per subsystem.
  double tol = 0.0;
  /// Accepted ARE residual is residual_rel·max(1, ‖P‖²).
  double residual_rel = 1e-8;
};

/// Per-subsystem margin, ε and ARE solve. Subsystems are processed
/// concurrently; every failure is collected.
GasCertificate certify_gas(const model::NetworkModel& net, const CertifyOptions& opts = {});

}  // namespace gascert::riccati
