#include "gascert/report.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gascert/errors.hpp"
#include "gascert/version.hpp"

namespace gascert::report {

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json matrix(const numerics::Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(number(M(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector(const numerics::Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number(v(k)));
  return out;
}

namespace {

bool scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void emit(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) out += ",\n";
      first = false;
      out += inner + Json(key).dump() + ": ";
      emit(out, value, indent + 1);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    const bool flat = std::all_of(j.begin(), j.end(), scalar);
    if (flat) {
      out += "[";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k > 0) out += ", ";
        emit(out, j[k], indent + 1);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k > 0) out += ",\n";
      out += inner;
      emit(out, j[k], indent + 1);
    }
    out += "\n" + pad + "]";
  } else if (j.is_number_float()) {
    out += fmt::format("{:.17g}", j.get<double>() + 0.0);
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  emit(out, j, 0);
  out += "\n";
  return out;
}

Json header(std::string_view method, const config::Config& cfg) {
  Json h;
  h["method"] = method;
  h["tool"] = "gascert";
  h["version"] = kVersion;
  h["input_digest"] = "sha256:" + cfg.digest;
  return h;
}

Json connective(const config::Config& cfg, const connective::Report& r) {
  Json j = header("connective", cfg);
  Json subs = Json::array();
  for (std::size_t i = 0; i < r.local.size(); ++i) {
    const auto& l = r.local[i];
    const auto& id = cfg.net.node(i).raw.id;
    Json s;
    s["id"] = id;
    s["P_source"] = cfg.P_overrides.contains(id) ? "config" : "lyapunov";
    s["lambda_min_P"] = number(l.lambda_min_P);
    s["lambda_max_P"] = number(l.lambda_max_P);
    s["lambda_min_Q"] = number(l.lambda_min_Q);
    s["alpha"] = number(r.alpha[i]);
    s["neighbors"] = cfg.net.neighbor_count(i);
    s["cond_diag_lhs"] = number(std::abs(r.M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
    double off = 0.0;
    for (Eigen::Index c = 0; c < r.M.cols(); ++c) {
      if (c != static_cast<Eigen::Index>(i)) off += r.M(static_cast<Eigen::Index>(i), c);
    }
    s["cond_diag_rhs"] = number(off);
    s["cond_diag"] = static_cast<bool>(r.conditions.cond_diag_rows[i]);
    s["Phi"] = number(r.Phi(static_cast<Eigen::Index>(i)));
    s["P"] = matrix(l.P);
    subs.push_back(std::move(s));
  }
  j["subsystems"] = std::move(subs);
  j["M"] = matrix(r.M);
  j["Phi"] = vector(r.Phi);
  j["norm1_M"] = number(r.conditions.norm1_M);
  j["max_abs_Phi"] = number(r.conditions.max_abs_Phi);
  j["M_stable"] = r.conditions.M_stable;
  j["cond_diag"] = r.conditions.cond_diag;
  j["cond_norm"] = r.conditions.cond_norm;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json riccati(const config::Config& cfg, const riccati::GasCertificate& cert, bool strict_xi) {
  Json j = header("riccati", cfg);
  j["xi_mode"] = strict_xi ? "strict" : "incoming";
  Json subs = Json::array();
  for (const auto& s : cert.subsystems) {
    Json o;
    o["id"] = s.id;
    o["N"] = s.neighbor_count;
    o["N_effective"] = s.effective_count;
    o["Xi2"] = number(s.xi2);
    o["gamma"] = number(s.gamma);
    o["margin"] = number(s.margin);
    o["epsilon"] = number(s.epsilon);
    o["certified"] = s.certified;
    if (s.certified || s.P.size() > 0) {
      o["are_residual"] = number(s.are_residual);
      o["lambda_min_P"] = number(s.lambda_min_P);
      o["P"] = matrix(s.P);
    }
    if (!s.failure.empty()) o["failure"] = s.failure;
    subs.push_back(std::move(o));
  }
  j["subsystems"] = std::move(subs);
  j["failing"] = cert.failing;
  j["verdict"] = cert.certified ? "certified" : "not-certified";
  return j;
}

Json smallgain(const config::Config& cfg, const connective::SmallGainResult& r) {
  Json j = header("smallgain", cfg);
  Json ids = Json::array();
  for (const auto& nd : cfg.net.nodes()) ids.push_back(nd.raw.id);
  j["subsystems"] = std::move(ids);
  j["subsystems_stable"] = r.subsystems_stable;
  j["raw_gain_product"] = number(r.raw_gain_product);
  j["hinf_product"] = number(r.hinf_product);
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json simulation(const config::Config& cfg, const sim::SimTrace& trace, const sim::Metrics& m, bool certified) {
  Json j = header("simulate", cfg);
  j["mode"] = trace.mode == control::Mode::distributed ? "dist" : "dec";
  j["certified"] = certified;
  j["samples"] = trace.time.size();
  j["final_time"] = number(trace.time.empty() ? 0.0 : trace.time.back());
  Json subs = Json::array();
  for (const auto& s : m.subsystems) {
    Json o;
    o["id"] = s.id;
    o["max_x_tilde"] = number(s.max_x_tilde);
    o["settling_time"] = number(s.settling_time);
    o["steady_state_error"] = number(s.steady_state_error);
    subs.push_back(std::move(o));
  }
  j["subsystems"] = std::move(subs);
  if (m.has_V) {
    j["final_V"] = number(m.final_V);
    j["max_V_increase"] = number(m.max_V_increase);
  }
  j["diverged"] = trace.diverged;
  if (trace.diverged) {
    j["diverged_at"] = number(trace.diverged_at);
    j["divergence_reason"] = trace.divergence_reason;
  }
  j["verdict"] = trace.diverged ? "diverged" : "finite";
  return j;
}

namespace {

void row(std::ostream& out, double t, std::string_view who, std::string_view series, Eigen::Index idx, double v) {
  // Adding 0.0 turns -0 into +0.
  out << fmt::format("{:.17g},{},{},{},{:.17g}\n", t, who, series, idx, v + 0.0);
}

void rows(std::ostream& out, double t, std::string_view who, std::string_view series, const numerics::Matrix& M) {
  // Column-major flattening, matching Eigen storage.
  for (Eigen::Index k = 0; k < M.size(); ++k) row(out, t, who, series, k, M.data()[k]);
}

}  // namespace

void write_trace_csv(std::ostream& out, const sim::SimTrace& trace, int stride) {
  if (stride < 1) throw DomainError("write_trace_csv: stride must be >= 1");
  out << "time,subsystem,series,index,value\n";
  const std::size_t n = trace.time.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k % static_cast<std::size_t>(stride) != 0 && k + 1 != n) continue;
    const double t = trace.time[k];
    for (const auto& s : trace.subsystems) {
      rows(out, t, s.id, "x_bar", s.x_bar[k]);
      rows(out, t, s.id, "x_hat", s.x_hat[k]);
      rows(out, t, s.id, "theta_hat", s.theta_hat[k]);
      rows(out, t, s.id, "u_bl", s.u_bl[k]);
      rows(out, t, s.id, "u_mrac", s.u_mrac[k]);
      row(out, t, s.id, "x_tilde_norm", 0, s.x_tilde_norm[k]);
      rows(out, t, s.id, "y", s.y[k]);
      rows(out, t, s.id, "r", s.r[k]);
    }
    if (!trace.V.empty()) row(out, t, "global", "V_riccati", 0, trace.V[k]);
  }
}

}  // namespace gascert::report
