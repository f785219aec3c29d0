#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gascert/model.hpp"

namespace gascert::connective {

using numerics::Matrix;
using numerics::Vector;

/// Local Lyapunov data of one subsystem.
struct LocalLyapunov {
  Matrix P;
  double lambda_min_P = 0.0;
  double lambda_max_P = 0.0;
  double lambda_min_Q = 0.0;
};

/// θ_max = 4·(max ‖θ‖₁)².
double theta_max(double theta_l1_bound);

/// Eigenvalue extremes of (P, Q). Throws DomainError unless both are SPD.
LocalLyapunov local_lyapunov(const Matrix& P, const Matrix& Q);

/// Solves Âm_iᵀP_i + P_iÂm_i + Q_i = 0 for every subsystem. Subsystems whose
/// id appears in `overrides` take the supplied P_i instead (checked SPD).
std::vector<LocalLyapunov> solve_local(const model::NetworkModel& net,
                                       const std::map<model::SubsystemId, Matrix>& overrides = {});

/// Aggregate comparison matrix:
///   M_ii = -λmin(Q_i) / (2 λmax(P_i))
///   M_ij = λmax(P_i) / √(λmin(P_i) λmin(P_j)) · ‖Ā_ij‖₂   for j ∈ 𝒩_i
Matrix aggregate_M(const model::NetworkModel& net, std::span<const LocalLyapunov> local);

/// Offset vector Φ (the diagonal of the Φ matrix):
///   Φ_i = θ_max (λmin(Q_i)/(2Γ_i λmax(P_i)) − Σ_{j∈𝒩_i} λmax(P_i)‖Ā_ji‖/(Γ_j √(λmin(P_i)λmin(P_j))))
/// θ_max is taken from each subsystem's tuning unless `theta_max_override` is set.
Vector aggregate_Phi(const model::NetworkModel& net, std::span<const LocalLyapunov> local,
                     std::optional<double> theta_max_override = std::nullopt);

struct Conditions {
  std::vector<bool> cond_diag_rows;  // |M_ii| > Σ_{j≠i} M_ij, per row
  bool cond_diag = false;
  bool cond_norm = false;  // ‖M‖₁ > max_i |Φ_i|
  bool M_stable = false;
  double norm1_M = 0.0;
  double max_abs_Phi = 0.0;
};

Conditions check_conditions(const Matrix& M, const Vector& Phi);

/// Homogeneous shortcut: λmin(Q)/(2λmax(P)) > (λmax(P)/λmin(P))·N_i·gain.
bool homogeneous_condition(double lambda_min_Q, double lambda_max_P, double lambda_min_P, int neighbor_count,
                           double gain);

struct TransientBound {
  double alpha = 0.0;  // 1/s
  double rho = 0.0;
};

/// α = λmin(Q)/λmax(P);
/// ρ(t) = √((V0 − θ_max/Γ) e^{−αt}/λmin(P) + θ_max/(Γ λmin(P))).
TransientBound decay_and_rho(const LocalLyapunov& local, double theta_max, double gamma, double V0, double t);

struct SmallGainResult {
  double hinf_product = 0.0;
  double raw_gain_product = 0.0;
  bool pass = false;
  /// False when an Âm is not Hurwitz; the loop gain is then unbounded.
  bool subsystems_stable = true;
};

/// ‖A12 (sI − Âm)⁻¹‖∞ · ‖A21 (sI − Âm)⁻¹‖∞ < 1, alongside the raw ‖A12‖·‖A21‖.
SmallGainResult small_gain_check(const Matrix& A12, const Matrix& A21, const Matrix& Am);
/// Heterogeneous form: signals into subsystem 1 are shaped by subsystem 2's dynamics and vice versa.
SmallGainResult small_gain_check(const Matrix& A12, const Matrix& A21, const Matrix& Am1, const Matrix& Am2);

struct Report {
  std::vector<LocalLyapunov> local;
  Matrix M;
  Vector Phi;
  Conditions conditions;
  std::vector<double> alpha;  // per subsystem
  bool pass = false;
};

/// Full pipeline: local solves, M, Φ, both conditions. Verdict passes when
/// cond_diag and cond_norm hold.
Report analyze(const model::NetworkModel& net, const std::map<model::SubsystemId, Matrix>& overrides = {});

}  // namespace gascert::connective
