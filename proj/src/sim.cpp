#include "gascert/sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gascert/errors.hpp"

namespace gascert::sim {

namespace {

Vector or_zero(const Vector& v, Eigen::Index n) { return v.size() == 0 ? Vector::Zero(n) : v; }
Matrix or_zero(const Matrix& m, Eigen::Index r, Eigen::Index c) { return m.size() == 0 ? Matrix::Zero(r, c) : m; }

// s + h·k, entry by entry.
NetworkState axpy(const NetworkState& s, double h, const NetworkState& k) {
  NetworkState out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i].x_bar += h * k[i].x_bar;
    out[i].x_hat += h * k[i].x_hat;
    out[i].theta_hat += h * k[i].theta_hat;
  }
  return out;
}

std::string check_state(const NetworkState& s, double limit) {
  for (const NodeState& ns : s) {
    for (const auto* m : {&ns.x_bar, &ns.x_hat}) {
      if (!m->allFinite()) return "non-finite state";
      if (m->size() > 0 && m->cwiseAbs().maxCoeff() > limit) return "state magnitude above divergence limit";
    }
    if (!ns.theta_hat.allFinite()) return "non-finite state";
    if (ns.theta_hat.size() > 0 && ns.theta_hat.cwiseAbs().maxCoeff() > limit) {
      return "state magnitude above divergence limit";
    }
  }
  return {};
}

}  // namespace

Schedule::Schedule(int dim, std::vector<std::pair<double, Vector>> points) : dim_(dim), points_(std::move(points)) {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!std::isfinite(points_[k].first)) throw DomainError("schedule: breakpoint time must be finite");
    if (k > 0 && !(points_[k].first > points_[k - 1].first)) {
      throw DomainError("schedule: breakpoints must be strictly increasing");
    }
    if (points_[k].second.size() != dim) {
      throw DimensionError(fmt::format("schedule: value has {} entries, expected {}", points_[k].second.size(), dim));
    }
    if (!points_[k].second.allFinite()) throw NonFiniteError("schedule: non-finite value");
  }
}

Vector Schedule::at(double t) const {
  Vector v = Vector::Zero(dim_);
  for (const auto& [tk, value] : points_) {
    if (tk > t) break;
    v = value;
  }
  return v;
}

void Scenario::validate(const model::NetworkModel& net) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("scenario: dt must be > 0");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("scenario: horizon must be >= 0");
  if (horizon > 0.0 && horizon < dt) throw DomainError("scenario: horizon must be >= dt");
  if (!(divergence_limit > 0.0)) throw DomainError("scenario: divergence_limit must be > 0");
  if (subsystems.size() != net.size()) throw DimensionError("scenario: one entry per subsystem required");
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& p = net.node(i).plant;
    const SubsystemScenario& s = subsystems[i];
    const std::string who = fmt::format("scenario '{}'", p.id);
    auto vec_ok = [&](const Vector& v, const char* name) {
      if (v.size() != 0 && v.size() != p.dim()) {
        throw DimensionError(fmt::format("{}: {} has {} entries, expected {}", who, name, v.size(), p.dim()));
      }
      if (!v.allFinite()) throw NonFiniteError(fmt::format("{}: {} is not finite", who, name));
    };
    auto mat_ok = [&](const Matrix& m, const char* name) {
      if (m.size() != 0 && (m.rows() != p.dim() || m.cols() != p.m)) {
        throw DimensionError(fmt::format("{}: {} must be {}x{}", who, name, p.dim(), p.m));
      }
      if (!m.allFinite()) throw NonFiniteError(fmt::format("{}: {} is not finite", who, name));
    };
    vec_ok(s.x0, "x0");
    vec_ok(s.x_hat0, "x_hat0");
    mat_ok(s.theta, "theta");
    mat_ok(s.theta_hat0, "theta_hat0");
    if (s.reference.dim() != p.q) throw DimensionError(fmt::format("{}: reference must have {} entries", who, p.q));
    if (s.disturbance.dim() != p.r) {
      throw DimensionError(fmt::format("{}: disturbance must have {} entries", who, p.r));
    }
  }
  for (const model::Edge& e : net.edges()) {
    if (!e.A_bar) {
      throw ConfigError(fmt::format("edge {} -> {}: simulation needs the coupling matrix", e.raw.from, e.raw.to));
    }
  }
  for (const model::Node& nd : net.nodes()) {
    if (!(nd.tuning.theta_max > 0.0)) {
      throw DomainError(fmt::format("subsystem '{}': simulation needs theta_max > 0", nd.raw.id));
    }
  }
}

Simulator::Simulator(const model::NetworkModel& net, Scenario scenario, control::Mode mode,
                     const riccati::GasCertificate* certificate)
    : net_(net), sc_(std::move(scenario)), mode_(mode) {
  sc_.validate(net_);
  certified_ = certificate != nullptr && certificate->certified;
  for (const model::Node& nd : net_.nodes()) {
    if (certified_) {
      const riccati::SubsystemCertificate* c = certificate->find(nd.raw.id);
      if (c == nullptr) throw ConfigError(fmt::format("certificate has no entry for '{}'", nd.raw.id));
      P_.push_back(c->P);
    } else {
      P_.push_back(numerics::solve_lyapunov(nd.Am_hat, nd.tuning.Q));
    }
  }
}

NetworkState Simulator::initial_state() const {
  NetworkState s;
  for (std::size_t i = 0; i < net_.size(); ++i) {
    const auto& p = net_.node(i).plant;
    const SubsystemScenario& ss = sc_.subsystems[i];
    s.push_back({or_zero(ss.x0, p.dim()), or_zero(ss.x_hat0, p.dim()), or_zero(ss.theta_hat0, p.dim(), p.m)});
  }
  return s;
}

NetworkState Simulator::derivative(const NetworkState& s, double t) const {
  NetworkState ds(s.size());
  for (std::size_t i = 0; i < net_.size(); ++i) {
    const model::Node& nd = net_.node(i);
    const auto& p = nd.plant;
    const SubsystemScenario& ss = sc_.subsystems[i];
    const NodeState& x = s[i];

    Vector d_bar(p.r + p.q);
    d_bar << ss.disturbance.at(t), ss.reference.at(t);
    const Vector exo = p.E_bar * d_bar;
    const Vector exo_pred = sc_.measured_disturbance ? exo : Vector(p.F * exo);

    const Vector u = control::mrac_control(x.theta_hat, x.x_bar);
    const Matrix theta = or_zero(ss.theta, p.dim(), p.m);

    Vector coupling = Vector::Zero(p.dim());
    std::vector<control::NeighborEstimate> nbs;
    for (const std::size_t k : net_.incoming(i)) {
      const model::Edge& e = net_.edges()[k];
      coupling.noalias() += *e.A_bar * s[e.from].x_bar;
      nbs.push_back({&*e.A_bar, &s[e.from].x_hat});
    }

    ds[i].x_bar = nd.Am_hat * x.x_bar + p.B_bar * (u + theta.transpose() * x.x_bar) + exo + coupling;
    ds[i].x_hat = control::predictor_rate(mode_, nd.Am_hat, p.B_bar, x.x_hat, x.x_bar, u, x.theta_hat, exo_pred,
                                          std::span<const control::NeighborEstimate>(nbs));
    ds[i].theta_hat = control::update_projection(x.x_bar - x.x_hat, P_[i], p.B_bar, x.x_bar, nd.tuning.gamma,
                                                 x.theta_hat, nd.tuning.theta_max, nd.tuning.eps0);
  }
  return ds;
}

NetworkState Simulator::step(const NetworkState& s, double t, double dt) const {
  const NetworkState k1 = derivative(s, t);
  const NetworkState k2 = derivative(axpy(s, 0.5 * dt, k1), t + 0.5 * dt);
  const NetworkState k3 = derivative(axpy(s, 0.5 * dt, k2), t + 0.5 * dt);
  const NetworkState k4 = derivative(axpy(s, dt, k3), t + dt);
  NetworkState out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i].x_bar += dt / 6.0 * (k1[i].x_bar + 2.0 * k2[i].x_bar + 2.0 * k3[i].x_bar + k4[i].x_bar);
    out[i].x_hat += dt / 6.0 * (k1[i].x_hat + 2.0 * k2[i].x_hat + 2.0 * k3[i].x_hat + k4[i].x_hat);
    out[i].theta_hat +=
        dt / 6.0 * (k1[i].theta_hat + 2.0 * k2[i].theta_hat + 2.0 * k3[i].theta_hat + k4[i].theta_hat);
  }
  return out;
}

double Simulator::lyapunov(const NetworkState& s) const {
  double V = 0.0;
  for (std::size_t i = 0; i < net_.size(); ++i) {
    const model::Node& nd = net_.node(i);
    const Vector xt = s[i].x_bar - s[i].x_hat;
    const Matrix tt = s[i].theta_hat - or_zero(sc_.subsystems[i].theta, nd.plant.dim(), nd.plant.m);
    V += xt.dot(P_[i] * xt) + tt.squaredNorm() / nd.tuning.gamma;
  }
  return V;
}

void Simulator::record(SimTrace& tr, const NetworkState& s, double t) const {
  tr.time.push_back(t);
  for (std::size_t i = 0; i < net_.size(); ++i) {
    const model::Node& nd = net_.node(i);
    SubsystemTrace& st = tr.subsystems[i];
    st.x_bar.push_back(s[i].x_bar);
    st.x_hat.push_back(s[i].x_hat);
    st.theta_hat.push_back(s[i].theta_hat);
    st.u_bl.push_back(control::baseline_control(nd.K_bl, s[i].x_bar));
    st.u_mrac.push_back(control::mrac_control(s[i].theta_hat, s[i].x_bar));
    st.x_tilde_norm.push_back((s[i].x_bar - s[i].x_hat).norm());
    st.y.push_back(nd.plant.C_bar * s[i].x_bar);
    st.r.push_back(sc_.subsystems[i].reference.at(t));
  }
  if (certified_) tr.V.push_back(lyapunov(s));
}

SimTrace Simulator::run() const {
  SimTrace tr;
  tr.mode = mode_;
  for (const model::Node& nd : net_.nodes()) {
    SubsystemTrace st;
    st.id = nd.raw.id;
    tr.subsystems.push_back(std::move(st));
  }
  NetworkState s = initial_state();
  const std::string bad0 = check_state(s, sc_.divergence_limit);
  if (!bad0.empty()) throw DomainError("scenario: initial state " + bad0);
  record(tr, s, 0.0);
  const auto steps = static_cast<long long>(std::llround(sc_.horizon / sc_.dt));
  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * sc_.dt;
    NetworkState next = step(s, t, sc_.dt);
    const std::string bad = check_state(next, sc_.divergence_limit);
    if (!bad.empty()) {
      tr.diverged = true;
      tr.diverged_at = static_cast<double>(k + 1) * sc_.dt;
      tr.divergence_reason = bad;
      break;
    }
    s = std::move(next);
    record(tr, s, static_cast<double>(k + 1) * sc_.dt);
  }
  return tr;
}

SimTrace run(const model::NetworkModel& net, const Scenario& scenario, control::Mode mode,
             const riccati::GasCertificate* certificate) {
  return Simulator(net, scenario, mode, certificate).run();
}

Metrics metrics(const SimTrace& trace) {
  Metrics m;
  m.diverged = trace.diverged;
  m.has_V = !trace.V.empty();
  if (m.has_V) {
    m.final_V = trace.V.back();
    for (std::size_t k = 1; k < trace.V.size(); ++k) {
      m.max_V_increase = std::max(m.max_V_increase, trace.V[k] - trace.V[k - 1]);
    }
  }
  for (const SubsystemTrace& st : trace.subsystems) {
    SubsystemMetrics sm;
    sm.id = st.id;
    for (const double v : st.x_tilde_norm) sm.max_x_tilde = std::max(sm.max_x_tilde, v);
    if (!st.y.empty()) {
      const Eigen::Index q = st.r.back().size();
      for (Eigen::Index c = 0; c < q; ++c) {
        const double y_end = st.y.back()(c);
        sm.steady_state_error = std::max(sm.steady_state_error, std::abs(y_end - st.r.back()(c)));
        double excursion = 0.0;
        for (const Vector& y : st.y) excursion = std::max(excursion, std::abs(y(c) - y_end));
        const double band = 0.02 * excursion;
        std::size_t k = st.y.size();
        while (k > 0 && std::abs(st.y[k - 1](c) - y_end) <= band) --k;
        const double ts = k == st.y.size() ? trace.time.back() : (k == 0 ? 0.0 : trace.time[k]);
        sm.settling_time = std::max(sm.settling_time, excursion == 0.0 ? 0.0 : ts);
      }
    }
    m.subsystems.push_back(sm);
  }
  return m;
}

}  // namespace gascert::sim
