#include "gascert/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gascert/errors.hpp"

namespace gascert::numerics {

namespace {

using Index = Eigen::Index;

constexpr double kSymmetryTol = 1e-10;
constexpr int kMaxNewtonSteps = 6;

double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

// Givens-swap of the adjacent diagonal entries k, k+1 of the upper triangular
// T, accumulating the unitary transform into Z (H = Z T Zᴴ stays valid).
void swap_adjacent(ComplexMatrix& T, ComplexMatrix& Z, Index k) {
  Complex x1 = T(k, k + 1);
  Complex x2 = T(k + 1, k + 1) - T(k, k);
  const double nrm = std::hypot(std::abs(x1), std::abs(x2));
  if (nrm == 0.0) return;
  x1 /= nrm;
  x2 /= nrm;
  Eigen::Matrix2cd G;
  G << std::conj(x1), std::conj(x2), -x2, x1;
  T.middleRows(k, 2) = G * T.middleRows(k, 2);
  T.middleCols(k, 2) = T.middleCols(k, 2) * G.adjoint();
  Z.middleCols(k, 2) = Z.middleCols(k, 2) * G.adjoint();
  T(k + 1, k) = Complex(0.0, 0.0);
}

// Moves every eigenvalue with negative real part to the leading block.
// Returns the number of such eigenvalues.
Index order_stable_first(ComplexMatrix& T, ComplexMatrix& Z) {
  const Index n = T.rows();
  Index placed = 0;
  for (Index k = 0; k < n; ++k) {
    if (T(k, k).real() < 0.0) {
      for (Index j = k; j > placed; --j) swap_adjacent(T, Z, j - 1);
      ++placed;
    }
  }
  return placed;
}

double are_residual_impl(const Matrix& A, int N, double q, const Matrix& P) {
  Matrix R = A.transpose() * P + P * A + static_cast<double>(N) * P * P;
  R.diagonal().array() += q;
  return R.norm();
}

Matrix are_residual_matrix(const Matrix& A, int N, double q, const Matrix& P) {
  Matrix R = A.transpose() * P + P * A + static_cast<double>(N) * P * P;
  R.diagonal().array() += q;
  return symmetrized(R);
}

ComplexMatrix shifted(const Matrix& A, double omega) {
  ComplexMatrix S = A.cast<Complex>();
  S.diagonal().array() -= Complex(0.0, omega);
  return S;
}

// σ_max(M (jωI − A)⁻¹)
double frequency_gain(const Matrix& M, const Matrix& A, double omega) {
  ComplexMatrix R = -shifted(A, omega);  // jωI − A
  const Eigen::PartialPivLU<ComplexMatrix> lu(R);
  const ComplexMatrix X = lu.solve(ComplexMatrix::Identity(A.rows(), A.cols()));
  const ComplexMatrix G = M.cast<Complex>() * X;
  const Eigen::JacobiSVD<ComplexMatrix> svd(G);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

}  // namespace

double Spectrum::max_real() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& l : eigenvalues) m = std::max(m, l.real());
  return m;
}

double Spectrum::min_abs_real() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& l : eigenvalues) m = std::min(m, std::abs(l.real()));
  return m;
}

void require_finite(const Matrix& A, std::string_view what) {
  if (!A.allFinite()) throw NonFiniteError(fmt::format("{}: non-finite entry", what));
}

void require_square(const Matrix& A, std::string_view what) {
  if (A.rows() != A.cols()) {
    throw DimensionError(fmt::format("{}: expected a square matrix, got {}x{}", what, A.rows(), A.cols()));
  }
}

Spectrum eigenvalues(const Matrix& A) {
  require_square(A, "eigenvalues");
  require_finite(A, "eigenvalues");
  Spectrum s;
  if (A.rows() == 0) return s;
  const Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigenvalues: QR iteration did not converge");
  const auto& ev = es.eigenvalues();
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return s;
}

double spectral_norm(const Matrix& A) {
  require_finite(A, "spectral_norm");
  if (A.size() == 0) return 0.0;
  const Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

double sigma_min_shifted(const Matrix& A, double omega) {
  require_square(A, "sigma_min_shifted");
  const Eigen::JacobiSVD<ComplexMatrix> svd(shifted(A, omega));
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

bool is_hurwitz(const Matrix& A) { return A.rows() > 0 && eigenvalues(A).all_stable(); }

Matrix solve_lyapunov_general(const Matrix& A, const Matrix& C) {
  require_square(A, "solve_lyapunov");
  if (C.rows() != A.rows() || C.cols() != A.cols()) {
    throw DimensionError(fmt::format("solve_lyapunov: A is {}x{} but Q is {}x{}", A.rows(), A.cols(), C.rows(),
                                     C.cols()));
  }
  const Index n = A.rows();
  if (n == 0) return Matrix(0, 0);

  // A = U T Uᴴ, so AᵀX + XA = -C becomes Tᴴ Y + Y T = -Uᴴ C U with X = U Y Uᴴ.
  const Eigen::ComplexSchur<ComplexMatrix> schur(A.cast<Complex>());
  if (schur.info() != Eigen::Success) throw ConvergenceError("solve_lyapunov: Schur factorization failed");
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix& U = schur.matrixU();
  const ComplexMatrix Ct = U.adjoint() * C.cast<Complex>() * U;
  const ComplexMatrix Th = T.adjoint();

  const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
  ComplexMatrix Y = ComplexMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    ComplexMatrix L = Th;
    L.diagonal().array() += T(k, k);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(L(i, i)) <= 1e3 * std::numeric_limits<double>::epsilon() * scale) {
        throw IllConditionedError("solve_lyapunov: λᵢ + conj(λⱼ) ≈ 0, solution not unique");
      }
    }
    Eigen::VectorXcd rhs = -Ct.col(k);
    for (Index l = 0; l < k; ++l) rhs -= Y.col(l) * T(l, k);
    Y.col(k) = L.triangularView<Eigen::Lower>().solve(rhs);
  }
  return (U * Y * U.adjoint()).real();
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  require_square(A, "solve_lyapunov");
  require_square(Q, "solve_lyapunov");
  require_finite(A, "solve_lyapunov");
  require_finite(Q, "solve_lyapunov");
  if (Q.rows() != A.rows()) {
    throw DimensionError(fmt::format("solve_lyapunov: A is {}x{} but Q is {}x{}", A.rows(), A.cols(), Q.rows(),
                                     Q.cols()));
  }
  if ((Q - Q.transpose()).norm() > kSymmetryTol * std::max(1.0, Q.norm())) {
    throw DomainError("solve_lyapunov: Q is not symmetric");
  }
  if (Eigen::LLT<Matrix>(symmetrized(Q)).info() != Eigen::Success) {
    throw DomainError("solve_lyapunov: Q is not positive definite");
  }
  const Spectrum spec = eigenvalues(A);
  if (!spec.all_stable()) {
    throw NotHurwitzError(
        fmt::format("solve_lyapunov: A is not Hurwitz (max Re λ = {:.6g}); no positive definite solution",
                    spec.max_real()));
  }

  Matrix P = symmetrized(solve_lyapunov_general(A, Q));
  // One step of iterative refinement on the residual.
  const Matrix R = symmetrized(A.transpose() * P + P * A + Q);
  const double bound = 1e-10 * (A.norm() * P.norm() + Q.norm());
  if (R.norm() > 0.1 * bound) {
    const Matrix P2 = symmetrized(P + solve_lyapunov_general(A, R));
    if ((A.transpose() * P2 + P2 * A + Q).norm() < R.norm()) P = P2;
  }
  return P;
}

Matrix hamiltonian(const Matrix& Am, int neighbor_count, double q) {
  require_square(Am, "hamiltonian");
  if (neighbor_count < 1) throw DomainError("hamiltonian: neighbor count must be >= 1");
  if (!(q >= 0.0)) throw DomainError("hamiltonian: q must be >= 0");
  const Index n = Am.rows();
  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Am;
  H.topRightCorner(n, n) = static_cast<double>(neighbor_count) * Matrix::Identity(n, n);
  H.bottomLeftCorner(n, n) = -q * Matrix::Identity(n, n);
  H.bottomRightCorner(n, n) = -Am.transpose();
  return H;
}

double imaginary_axis_tolerance(const Matrix& H) { return 1e-8 * spectral_norm(H); }

bool is_hyperbolic(const Matrix& H, double tol) {
  require_square(H, "is_hyperbolic");
  if (!(tol > 0.0)) throw DomainError("is_hyperbolic: tol must be > 0");
  return eigenvalues(H).min_abs_real() > tol;
}

double are_residual(const Matrix& Am, int neighbor_count, double q, const Matrix& P) {
  return are_residual_impl(Am, neighbor_count, q, P);
}

AreSolution solve_are(const Matrix& Am, int neighbor_count, double q) {
  if (!(q > 0.0)) throw DomainError("solve_are: q must be > 0 for a positive definite solution");
  const Matrix H = hamiltonian(Am, neighbor_count, q);
  require_finite(Am, "solve_are");
  const Spectrum am_spec = eigenvalues(Am);
  if (!am_spec.all_stable()) {
    throw NotHurwitzError(fmt::format("solve_are: Am is not Hurwitz (max Re λ = {:.6g})", am_spec.max_real()));
  }
  if (!is_hyperbolic(H, imaginary_axis_tolerance(H))) {
    throw NotHyperbolicError("solve_are: Hamiltonian has imaginary-axis eigenvalues; distance condition violated");
  }

  const Index n = Am.rows();
  const Eigen::ComplexSchur<ComplexMatrix> schur(H.cast<Complex>());
  if (schur.info() != Eigen::Success) throw ConvergenceError("solve_are: Schur factorization failed");
  ComplexMatrix T = schur.matrixT();
  ComplexMatrix Z = schur.matrixU();
  if (order_stable_first(T, Z) != n) {
    throw NotHyperbolicError("solve_are: stable invariant subspace has the wrong dimension");
  }

  const ComplexMatrix U = Z.topLeftCorner(n, n);
  const ComplexMatrix V = Z.bottomLeftCorner(n, n);
  const Eigen::JacobiSVD<ComplexMatrix> usvd(U);
  const auto& su = usvd.singularValues();
  if (su(n - 1) <= 1e-13 * su(0)) {
    throw IllConditionedError("solve_are: U block of the stable invariant subspace is singular");
  }
  // P = V U⁻¹  ⇔  Uᵀ Pᵀ = Vᵀ
  const ComplexMatrix Pc = U.transpose().fullPivLu().solve(V.transpose()).transpose();
  Matrix P = symmetrized(Pc.real());

  double res = are_residual_impl(Am, neighbor_count, q, P);
  for (int it = 0; it < kMaxNewtonSteps; ++it) {
    const double floor = 1e-15 * std::max(1.0, P.squaredNorm());
    if (res <= floor) break;
    const Matrix Acl = Am + static_cast<double>(neighbor_count) * P;
    Matrix delta;
    try {
      delta = solve_lyapunov_general(Acl, are_residual_matrix(Am, neighbor_count, q, P));
    } catch (const IllConditionedError&) {
      break;
    }
    const Matrix Pn = symmetrized(P + delta);
    const double rn = are_residual_impl(Am, neighbor_count, q, Pn);
    if (!(rn < res)) break;
    P = Pn;
    res = rn;
  }

  AreSolution sol;
  sol.closed_loop_spectrum = eigenvalues(Am + static_cast<double>(neighbor_count) * P);
  if (!sol.closed_loop_spectrum.all_stable()) {
    throw IllConditionedError("solve_are: computed solution is not stabilizing");
  }
  if (Eigen::LLT<Matrix>(P).info() != Eigen::Success) {
    throw IllConditionedError("solve_are: computed solution is not positive definite");
  }
  sol.P = std::move(P);
  sol.residual_norm = res;
  return sol;
}

double default_distance_tolerance(const Matrix& Am) { return 1e-10 * std::max(1.0, spectral_norm(Am)); }

double distance_to_instability(const Matrix& Am, int neighbor_count, double tol) {
  require_square(Am, "distance_to_instability");
  require_finite(Am, "distance_to_instability");
  if (!(tol > 0.0)) throw DomainError("distance_to_instability: tol must be > 0");
  if (neighbor_count < 1) throw DomainError("distance_to_instability: neighbor count must be >= 1");
  const Spectrum spec = eigenvalues(Am);
  if (!spec.all_stable()) {
    throw NotHurwitzError(
        fmt::format("distance_to_instability: Am is not Hurwitz (max Re λ = {:.6g})", spec.max_real()));
  }

  double lo = 0.0;
  double hi = spectral_norm(Am);  // γ ≤ σ_min(Am) ≤ ‖Am‖₂
  const double N = static_cast<double>(neighbor_count);
  const int iterations = static_cast<int>(std::max(0.0, std::ceil(std::log2((hi - lo) / tol))));
  for (int i = 0; i < iterations; ++i) {
    const double sigma = 0.5 * (lo + hi);
    const Matrix H = hamiltonian(Am, neighbor_count, sigma * sigma / N);
    if (is_hyperbolic(H, imaginary_axis_tolerance(H))) {
      lo = sigma;
    } else {
      hi = sigma;  // an imaginary-axis eigenvalue exists ⇒ σ ≥ γ
    }
  }
  // lo always has a hyperbolic H, so it never overstates γ; a boundary case
  // such as γ = Ξ√N then fails the strict margin test.
  return lo;
}

double hinf_gain(const Matrix& M, const Matrix& Am) {
  require_square(Am, "hinf_gain");
  require_finite(M, "hinf_gain");
  require_finite(Am, "hinf_gain");
  if (M.cols() != Am.rows()) {
    throw DimensionError(fmt::format("hinf_gain: M has {} columns but Am is {}x{}", M.cols(), Am.rows(), Am.cols()));
  }
  const Spectrum spec = eigenvalues(Am);
  if (!spec.all_stable()) {
    throw NotHurwitzError(fmt::format("hinf_gain: Am is not Hurwitz (max Re λ = {:.6g}); gain is unbounded",
                                      spec.max_real()));
  }
  if (M.rows() == 0 || max_abs(M) == 0.0) return 0.0;

  // Grid spans [1e-3, 1e3]·‖Am‖₂ and is extended downward to cover the slowest
  // mode; ω = 0 is always evaluated.
  const double norm_a = spectral_norm(Am);
  double slowest = norm_a;
  for (const auto& l : spec.eigenvalues) slowest = std::min(slowest, std::abs(l));
  const double w_lo = 1e-3 * std::min(norm_a, slowest);
  const double w_hi = 1e3 * norm_a;
  const double decades = std::log10(w_hi / w_lo);
  const int points = std::max(400, static_cast<int>(std::ceil(decades * 400.0 / 6.0)));

  std::vector<double> omegas;
  omegas.reserve(points + 1);
  omegas.push_back(0.0);
  for (int k = 0; k < points; ++k) {
    omegas.push_back(w_lo * std::pow(10.0, decades * k / (points - 1)));
  }
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double v = frequency_gain(M, Am, omegas[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }

  // Golden-section search on the bracket around the best grid point.
  double a = best == 0 ? 0.0 : omegas[best - 1];
  double b = best + 1 < omegas.size() ? omegas[best + 1] : omegas[best];
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = frequency_gain(M, Am, c);
  double fd = frequency_gain(M, Am, d);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = frequency_gain(M, Am, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = frequency_gain(M, Am, d);
    }
  }
  return std::max({best_val, fc, fd});
}

int numerical_rank(const Matrix& A, double relative_tol) {
  require_finite(A, "numerical_rank");
  if (A.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  const double cutoff = relative_tol * s(0);
  int rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

}  // namespace gascert::numerics
