#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gascert::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Eigenvalues with multiplicity, sorted by (real, imag) ascending.
struct Spectrum {
  std::vector<Complex> eigenvalues;

  [[nodiscard]] std::size_t size() const { return eigenvalues.size(); }
  [[nodiscard]] double max_real() const;
  [[nodiscard]] double min_abs_real() const;
  [[nodiscard]] bool all_stable() const { return max_real() < 0.0; }
};

struct AreSolution {
  Matrix P;
  double residual_norm = 0.0;
  Spectrum closed_loop_spectrum;
};

void require_finite(const Matrix& A, std::string_view what);
void require_square(const Matrix& A, std::string_view what);

Spectrum eigenvalues(const Matrix& A);

/// Largest singular value.
double spectral_norm(const Matrix& A);

/// Smallest singular value of (A - jωI).
double sigma_min_shifted(const Matrix& A, double omega);

bool is_hurwitz(const Matrix& A);

/// Solves AᵀP + PA + Q = 0 (complex Schur form of A, then a triangular
/// back-substitution). A must be Hurwitz and Q symmetric positive definite.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Solves AᵀX + XA + C = 0 for any C provided λᵢ(A) + conj(λⱼ(A)) ≠ 0 for all
/// pairs. No definiteness requirements; used by Newton refinement.
Matrix solve_lyapunov_general(const Matrix& A, const Matrix& C);

/// [[Am, N·I], [-q·I, -Amᵀ]]
Matrix hamiltonian(const Matrix& Am, int neighbor_count, double q);

/// Scale-relative "on the imaginary axis" threshold: 1e-8·‖H‖₂.
double imaginary_axis_tolerance(const Matrix& H);

/// True iff every eigenvalue of H satisfies |Re λ| > tol.
bool is_hyperbolic(const Matrix& H, double tol);

/// Stabilizing solution of AᵀP + PA + N·P² + q·I = 0, taken from the stable
/// invariant subspace [U; V] of hamiltonian(Am, N, q) as P = V·U⁻¹ and polished
/// with Newton steps.
///
/// Throws DomainError unless q > 0, NotHurwitzError if Am is not Hurwitz,
/// NotHyperbolicError if the Hamiltonian has imaginary-axis eigenvalues,
/// IllConditionedError if U is numerically singular.
AreSolution solve_are(const Matrix& Am, int neighbor_count, double q);

/// Residual ‖AᵀP + PA + N·P² + q·I‖_F.
double are_residual(const Matrix& Am, int neighbor_count, double q, const Matrix& P);

/// γ = min_ω σ_min(Am − jωI) by bisection on the Hamiltonian imaginary-axis
/// test. Returns the lower end of the final bracket: γ − tol < result ≤ γ.
double distance_to_instability(const Matrix& Am, int neighbor_count, double tol);

/// Default absolute bisection tolerance for distance_to_instability.
double default_distance_tolerance(const Matrix& Am);

/// sup_ω σ_max(M (jωI − Am)⁻¹). Log grid plus golden-section refinement,
/// about 1e-3 relative accuracy.
double hinf_gain(const Matrix& M, const Matrix& Am);

/// Numerical rank by singular values with relative tolerance.
int numerical_rank(const Matrix& A, double relative_tol);

}  // namespace gascert::numerics
