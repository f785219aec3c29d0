#include "gascert/cli.hpp"

#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gascert/config.hpp"
#include "gascert/connective.hpp"
#include "gascert/errors.hpp"
#include "gascert/report.hpp"
#include "gascert/riccati.hpp"
#include "gascert/sim.hpp"
#include "gascert/version.hpp"

namespace gascert::cli {

namespace {

struct Options {
  std::string config;
  double tol = 0.0;  // <= 0: module defaults
  std::string report_path;
  bool strict_xi = false;
  std::string mode = "dist";
  std::string out;
  int stride = 1;
};

void emit_report(const report::Json& j, const Options& o, std::ostream& out) {
  const std::string text = report::dump(j);
  out << text;
  if (!o.report_path.empty()) {
    std::ofstream f(o.report_path, std::ios::binary);
    if (!f) throw ConfigError(fmt::format("{}: cannot write report", o.report_path));
    f << text;
  }
}

int cmd_connective(const Options& o, std::ostream& out) {
  const config::Config cfg = config::load(o.config);
  const connective::Report r = connective::analyze(cfg.net, cfg.P_overrides);
  emit_report(report::connective(cfg, r), o, out);
  return r.pass ? kPass : kConditionFailed;
}

riccati::CertifyOptions certify_options(const Options& o, const config::Config& cfg) {
  riccati::CertifyOptions c;
  c.strict_xi = o.strict_xi || cfg.strict_xi;
  c.tol = o.tol;
  return c;
}

int cmd_riccati(const Options& o, std::ostream& out) {
  const config::Config cfg = config::load(o.config);
  const riccati::CertifyOptions opts = certify_options(o, cfg);
  const riccati::GasCertificate cert = riccati::certify_gas(cfg.net, opts);
  emit_report(report::riccati(cfg, cert, opts.strict_xi), o, out);
  return cert.certified ? kPass : kConditionFailed;
}

numerics::Matrix coupling(const model::NetworkModel& net, std::size_t from, std::size_t to) {
  const model::Edge* e = net.find_edge(from, to);
  const auto& pi = net.node(to).plant;
  const auto& pj = net.node(from).plant;
  if (e == nullptr) return numerics::Matrix::Zero(pi.dim(), pj.dim());
  if (!e->A_bar) {
    throw ConfigError(fmt::format("edge {} -> {}: small-gain check needs the coupling matrix", e->raw.from,
                                  e->raw.to));
  }
  return *e->A_bar;
}

int cmd_smallgain(const Options& o, std::ostream& out) {
  const config::Config cfg = config::load(o.config);
  if (cfg.net.size() != 2) {
    throw ConfigError(fmt::format("config.subsystems: small-gain check needs exactly 2 subsystems, got {}",
                                  cfg.net.size()));
  }
  const numerics::Matrix A12 = coupling(cfg.net, 1, 0);
  const numerics::Matrix A21 = coupling(cfg.net, 0, 1);
  const auto r = connective::small_gain_check(A12, A21, cfg.net.node(0).Am_hat, cfg.net.node(1).Am_hat);
  emit_report(report::smallgain(cfg, r), o, out);
  return r.pass ? kPass : kConditionFailed;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const config::Config cfg = config::load(o.config);
  if (!cfg.scenario) throw ConfigError("config.scenario: missing");
  const control::Mode mode = o.mode == "dec" ? control::Mode::decentralized : control::Mode::distributed;
  const riccati::GasCertificate cert = riccati::certify_gas(cfg.net, certify_options(o, cfg));
  const sim::Simulator simulator(cfg.net, *cfg.scenario, mode, &cert);
  const sim::SimTrace trace = simulator.run();

  std::ofstream csv(o.out, std::ios::binary);
  if (!csv) throw ConfigError(fmt::format("{}: cannot write trace", o.out));
  report::write_trace_csv(csv, trace, o.stride);
  csv.close();
  if (!csv) throw Error(fmt::format("{}: write failed", o.out));

  emit_report(report::simulation(cfg, trace, sim::metrics(trace), simulator.certified()), o, out);
  return trace.diverged ? kDiverged : kPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability certificates and simulation for networks of adaptive controllers", "gascert"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  const auto common = [&o](CLI::App* sub) {
    sub->add_option("config", o.config, "network configuration (JSON)")->required();
    sub->add_option("--tol", o.tol, "absolute tolerance of the distance-to-instability bisection")
        ->check(CLI::PositiveNumber);
    sub->add_option("--report", o.report_path, "also write the report to this file");
  };
  auto* conn = app.add_subcommand("connective", "vector Lyapunov (connective stability) conditions");
  common(conn);
  auto* ric = app.add_subcommand("riccati", "per-subsystem Riccati certificate");
  common(ric);
  ric->add_flag("--strict-xi", o.strict_xi, "bound each subsystem by max(incoming, outgoing) coupling energy");
  auto* sg = app.add_subcommand("smallgain", "small-gain check for two subsystems");
  common(sg);
  auto* simc = app.add_subcommand("simulate", "fixed-step simulation of the closed loop");
  common(simc);
  simc->add_option("--mode", o.mode, "predictor structure")->check(CLI::IsMember({"dec", "dist"}));
  simc->add_option("--out", o.out, "trace CSV path")->required();
  simc->add_option("--stride", o.stride, "write every n-th sample")->check(CLI::PositiveNumber);
  simc->add_flag("--strict-xi", o.strict_xi, "as for riccati");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (conn->parsed()) return cmd_connective(o, out);
    if (ric->parsed()) return cmd_riccati(o, out);
    if (sg->parsed()) return cmd_smallgain(o, out);
    return cmd_simulate(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace gascert::cli
