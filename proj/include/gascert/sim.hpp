#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gascert/control.hpp"
#include "gascert/model.hpp"
#include "gascert/riccati.hpp"

namespace gascert::sim {

using numerics::Matrix;
using numerics::Vector;

/// Piecewise-constant signal. Before the first breakpoint the value is zero.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(int dim) : dim_(dim) {}
  /// Breakpoints must be strictly increasing in time; throws DomainError otherwise.
  Schedule(int dim, std::vector<std::pair<double, Vector>> points);

  [[nodiscard]] Vector at(double t) const;
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::vector<std::pair<double, Vector>>& points() const { return points_; }

 private:
  int dim_ = 0;
  std::vector<std::pair<double, Vector>> points_;
};

/// Scenario data of one subsystem. Empty vectors/matrices mean zero.
struct SubsystemScenario {
  Schedule reference;    // q entries
  Schedule disturbance;  // r entries
  Matrix theta;          // true uncertainty, (n+q)×m
  Vector x0;
  Vector x_hat0;
  Matrix theta_hat0;
};

struct Scenario {
  double dt = 1e-3;
  double horizon = 1.0;
  std::vector<SubsystemScenario> subsystems;  // same order as the network nodes
  /// The predictor sees Ē·d̄ when set, otherwise only F·Ē·d̄ (reference rows).
  bool measured_disturbance = true;
  double divergence_limit = 1e8;

  /// Throws DomainError / DimensionError on an inconsistent scenario.
  void validate(const model::NetworkModel& net) const;
};

struct NodeState {
  Vector x_bar;
  Vector x_hat;
  Matrix theta_hat;
};
using NetworkState = std::vector<NodeState>;

struct SubsystemTrace {
  model::SubsystemId id;
  std::vector<Vector> x_bar, x_hat, u_bl, u_mrac, y, r;
  std::vector<Matrix> theta_hat;
  std::vector<double> x_tilde_norm;
};

struct SimTrace {
  control::Mode mode = control::Mode::decentralized;
  std::vector<double> time;
  std::vector<SubsystemTrace> subsystems;
  std::vector<double> V;  // empty unless a certificate was supplied
  bool diverged = false;
  double diverged_at = 0.0;
  std::string divergence_reason;
};

/// Coupled plants, predictors and adaptive laws advanced with fixed-step RK4.
class Simulator {
 public:
  /// Uses the certificate's P_i when it certifies the network, otherwise
  /// P_i solving Âₘᵀ P + P Âₘ + Q_i = 0.
  Simulator(const model::NetworkModel& net, Scenario scenario, control::Mode mode,
            const riccati::GasCertificate* certificate = nullptr);

  [[nodiscard]] NetworkState initial_state() const;
  /// Joint right-hand side at time t.
  [[nodiscard]] NetworkState derivative(const NetworkState& s, double t) const;
  /// One RK4 step.
  [[nodiscard]] NetworkState step(const NetworkState& s, double t, double dt) const;
  /// Σ x̃ᵢᵀPᵢx̃ᵢ + Σ tr(θ̃ᵢᵀθ̃ᵢ)/Γᵢ with θ̃ = θ̂ − θ.
  [[nodiscard]] double lyapunov(const NetworkState& s) const;

  [[nodiscard]] SimTrace run() const;

  [[nodiscard]] const Matrix& P(std::size_t i) const { return P_.at(i); }
  [[nodiscard]] bool certified() const { return certified_; }

 private:
  void record(SimTrace& tr, const NetworkState& s, double t) const;

  const model::NetworkModel& net_;
  Scenario sc_;
  control::Mode mode_;
  std::vector<Matrix> P_;
  bool certified_ = false;
};

/// Convenience wrapper around Simulator::run.
SimTrace run(const model::NetworkModel& net, const Scenario& scenario, control::Mode mode,
             const riccati::GasCertificate* certificate = nullptr);

struct SubsystemMetrics {
  model::SubsystemId id;
  double max_x_tilde = 0.0;
  double settling_time = 0.0;  // 2% band, worst output channel
  double steady_state_error = 0.0;  // max_k |y_k(T) − r_k(T)|
};

struct Metrics {
  std::vector<SubsystemMetrics> subsystems;
  double final_V = 0.0;
  double max_V_increase = 0.0;
  bool has_V = false;
  bool diverged = false;
};

Metrics metrics(const SimTrace& trace);

}  // namespace gascert::sim
