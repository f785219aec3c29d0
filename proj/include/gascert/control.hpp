#pragma once

#include <optional>
#include <span>

#include "gascert/numerics.hpp"

namespace gascert::control {

using numerics::Matrix;
using numerics::Vector;

enum class Mode { decentralized, distributed };

/// Reference model [[A_m − B·K_x, B·K_ξ], [−C, 0]].
Matrix reference_model(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& K_x, const Matrix& K_xi);

/// u = −K_bl·x̄
Vector baseline_control(const Matrix& K_bl, const Vector& x_bar);

/// u = −θ̂ᵀx̄
Vector mrac_control(const Matrix& theta_hat, const Vector& x_bar);

/// Ā_ij and the neighbor's predictor state x̂_j.
struct NeighborEstimate {
  const Matrix* A_ij = nullptr;
  const Vector* x_hat_j = nullptr;
};

/// Predictor right-hand side:
///   Âₘx̂ + B̄(u + θ̂ᵀx̄) + exo                 (decentralized)
///   Âₘx̂ + B̄(u + θ̂ᵀx̄) + exo + Σ Ā_ij x̂_j   (distributed)
/// `exo` is the exogenous drive already shaped by the caller (F·Ē·d̄ by default).
/// Distributed mode throws ConfigError if `neighbors` is absent.
Vector predictor_rate(Mode mode, const Matrix& Am_hat, const Matrix& B_bar, const Vector& x_hat, const Vector& x_bar,
                      const Vector& u, const Matrix& theta_hat, const Vector& exo,
                      std::optional<std::span<const NeighborEstimate>> neighbors = std::nullopt);

inline constexpr double kDefaultEFloor = 1e-12;

/// −Γ·x̂·(eᵀPB̄) / (2√(eᵀPe)), or zero when eᵀPe ≤ e_floor².
Matrix update_normalized(const Vector& e, const Matrix& P, const Matrix& B_bar, const Vector& x_hat, double gamma,
                         double e_floor = kDefaultEFloor);

/// g(θ) = ((ε₀+1)θᵀθ − θ_max²) / (ε₀θ_max²)
double g_convex(const Vector& theta, double theta_max, double eps0);

/// ∇g = 2(ε₀+1)θ / (ε₀θ_max²)
Vector g_gradient(const Vector& theta, double theta_max, double eps0);

/// Projection of y at θ onto the set {g ≤ 1}.
Vector projection(const Vector& theta, const Vector& y, double theta_max, double eps0);

/// Column-wise projection with a shared θ_max.
Matrix projection(const Matrix& theta, const Matrix& y, double theta_max, double eps0);

/// Adaptive law Γ·Proj(θ̂, x̄·x̃ᵀPB̄), x̃ = x̄ − x̂.
///
/// The drive has the sign that makes x̃ᵀPx̃ + tr(θ̃ᵀΓ⁻¹θ̃) non-increasing for
/// the plant Âₘx̄ + B̄(u + θᵀx̄).
Matrix update_projection(const Vector& x_tilde, const Matrix& P, const Matrix& B_bar, const Vector& x_bar,
                         double gamma, const Matrix& theta_hat, double theta_max, double eps0);

}  // namespace gascert::control
