#include "gascert/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "gascert/control.hpp"
#include "gascert/errors.hpp"

namespace gascert::config {

using nlohmann::json;
using numerics::Matrix;
using numerics::Vector;

namespace {

// JSON node plus its dotted path, for error messages.
struct Node {
  const json& j;
  std::string path;

  [[nodiscard]] Node operator[](std::string_view key) const {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", path));
    const auto it = j.find(std::string(key));
    if (it == j.end()) throw ConfigError(fmt::format("{}.{}: missing", path, key));
    return {*it, fmt::format("{}.{}", path, key)};
  }
  [[nodiscard]] Node at(std::size_t k) const { return {j.at(k), fmt::format("{}[{}]", path, k)}; }
  [[nodiscard]] bool has(std::string_view key) const { return j.is_object() && j.contains(std::string(key)); }

  [[nodiscard]] double number() const {
    if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", path));
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: not finite", path));
    return v;
  }
  [[nodiscard]] bool boolean() const {
    if (!j.is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", path));
    return j.get<bool>();
  }
  [[nodiscard]] std::string string() const {
    if (!j.is_string()) throw ConfigError(fmt::format("{}: expected a string", path));
    return j.get<std::string>();
  }
  [[nodiscard]] std::size_t size_of_array() const {
    if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array", path));
    return j.size();
  }

  [[nodiscard]] Vector vector() const {
    const std::size_t n = size_of_array();
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) v(static_cast<Eigen::Index>(k)) = at(k).number();
    return v;
  }

  /// Nested row arrays. `[]` is a matrix with no rows.
  [[nodiscard]] Matrix matrix() const {
    const std::size_t rows = size_of_array();
    if (rows == 0) return {};
    const std::size_t cols = at(0).size_of_array();
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      const Node row = at(r);
      if (row.size_of_array() != cols) {
        throw ConfigError(fmt::format("{}: row has {} entries, expected {}", row.path, row.j.size(), cols));
      }
      for (std::size_t c = 0; c < cols; ++c) {
        M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.at(c).number();
      }
    }
    return M;
  }
};

// Looks `key` up in the subsystem object first, then in the defaults object.
std::optional<Node> lookup(const Node& local, const std::optional<Node>& defaults, std::string_view key) {
  if (local.has(key)) return local[key];
  if (defaults && defaults->has(key)) return (*defaults)[key];
  return std::nullopt;
}

void expect_dims(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (M.rows() != rows || M.cols() != cols) {
    throw ConfigError(fmt::format("{}: expected {}x{}, got {}x{}", path, rows, cols, M.rows(), M.cols()));
  }
}

model::Node parse_subsystem(const Node& s, const std::optional<Node>& defaults) {
  model::Node nd;
  nd.raw.id = s["id"].string();
  nd.raw.A = s["A"].matrix();
  const auto n = nd.raw.A.rows();
  if (n == 0 || nd.raw.A.cols() != n) throw ConfigError(fmt::format("{}: must be a non-empty square matrix", s["A"].path));
  nd.raw.B = s["B"].matrix();
  if (nd.raw.B.rows() != n || nd.raw.B.cols() == 0) {
    throw ConfigError(fmt::format("{}: expected {} rows and at least one column", s["B"].path, n));
  }
  // `[]` means no tracked outputs (q = 0, no integral states).
  nd.raw.C = s["C"].matrix();
  if (nd.raw.C.size() == 0) nd.raw.C = Matrix::Zero(0, n);
  if (nd.raw.C.cols() != n) throw ConfigError(fmt::format("{}: expected {} columns", s["C"].path, n));
  const auto m = nd.raw.B.cols(), q = nd.raw.C.rows();
  nd.raw.D = s.has("D") ? s["D"].matrix() : Matrix::Zero(q, m);
  if (s.has("D")) expect_dims(nd.raw.D, q, m, s["D"].path);
  if (s.has("E")) {
    nd.raw.E = s["E"].matrix();
    if (nd.raw.E.size() == 0) nd.raw.E = Matrix::Zero(n, 0);
    if (nd.raw.E.rows() != n) throw ConfigError(fmt::format("{}: expected {} rows", s["E"].path, n));
  } else {
    nd.raw.E = Matrix::Zero(n, 0);
  }
  nd.plant = model::augment(nd.raw);
  const auto d = nd.plant.dim();

  const auto ref = lookup(s, defaults, "reference_model");
  if (!ref) throw ConfigError(fmt::format("{}.reference_model: missing", s.path));
  if (ref->has("A_m_hat")) {
    nd.Am_hat = (*ref)["A_m_hat"].matrix();
    expect_dims(nd.Am_hat, d, d, (*ref)["A_m_hat"].path);
  } else {
    const Matrix A_m = ref->has("A_m") ? (*ref)["A_m"].matrix() : nd.raw.A;
    if (ref->has("A_m")) expect_dims(A_m, n, n, (*ref)["A_m"].path);
    const Matrix K_x = (*ref)["K_x"].matrix();
    const Matrix K_xi = (*ref)["K_xi"].matrix();
    expect_dims(K_x, m, n, (*ref)["K_x"].path);
    expect_dims(K_xi, m, q, (*ref)["K_xi"].path);
    nd.Am_hat = control::reference_model(A_m, nd.raw.B, nd.raw.C, K_x, K_xi);
  }

  if (const auto k = lookup(s, defaults, "K_bl")) {
    nd.K_bl = k->matrix();
    expect_dims(nd.K_bl, m, d, k->path);
  } else {
    nd.K_bl = Matrix::Zero(m, d);
  }

  const auto field = [&](std::string_view key) -> std::optional<Node> {
    if (s.has("tuning") && s["tuning"].has(key)) return s["tuning"][key];
    if (defaults && defaults->has("tuning") && (*defaults)["tuning"].has(key)) return (*defaults)["tuning"][key];
    return std::nullopt;
  };
  if (const auto Q = field("Q")) {
    nd.tuning.Q = Q->matrix();
    expect_dims(nd.tuning.Q, d, d, Q->path);
  } else if (const auto qs = field("Q_scale")) {
    nd.tuning.Q = qs->number() * Matrix::Identity(d, d);
  } else {
    nd.tuning.Q = Matrix::Identity(d, d);
  }
  if (const auto g = field("Gamma")) nd.tuning.gamma = g->number();
  if (const auto t = field("theta_max")) nd.tuning.theta_max = t->number();
  if (const auto e = field("eps0")) nd.tuning.eps0 = e->number();
  return nd;
}

sim::Schedule parse_schedule(const Node& node, int dim) {
  std::vector<std::pair<double, Vector>> pts;
  for (std::size_t k = 0; k < node.size_of_array(); ++k) {
    const Node p = node.at(k);
    Vector v = p["value"].vector();
    if (v.size() != dim) throw ConfigError(fmt::format("{}.value: expected {} entries", p.path, dim));
    pts.emplace_back(p["t"].number(), std::move(v));
  }
  try {
    return sim::Schedule(dim, std::move(pts));
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", node.path, e.what()));
  }
}

sim::Scenario parse_scenario(const Node& sc, const model::NetworkModel& net) {
  sim::Scenario out;
  if (sc.has("dt")) out.dt = sc["dt"].number();
  if (sc.has("horizon")) out.horizon = sc["horizon"].number();
  if (sc.has("measured_disturbance")) out.measured_disturbance = sc["measured_disturbance"].boolean();
  if (sc.has("divergence_limit")) out.divergence_limit = sc["divergence_limit"].number();
  if (sc.has("subsystems") && !sc["subsystems"].j.is_object()) {
    throw ConfigError(fmt::format("{}: expected an object keyed by subsystem id", sc["subsystems"].path));
  }
  if (sc.has("subsystems")) {
    for (const auto& [key, _] : sc["subsystems"].j.items()) {
      if (!net.index_of(key)) throw ConfigError(fmt::format("{}.subsystems.{}: unknown subsystem", sc.path, key));
    }
  }
  for (const model::Node& nd : net.nodes()) {
    const auto& p = nd.plant;
    sim::SubsystemScenario ss;
    ss.reference = sim::Schedule(p.q);
    ss.disturbance = sim::Schedule(p.r);
    if (sc.has("subsystems") && sc["subsystems"].has(nd.raw.id)) {
      const Node s = sc["subsystems"][nd.raw.id];
      if (s.has("reference")) ss.reference = parse_schedule(s["reference"], p.q);
      if (s.has("disturbance")) ss.disturbance = parse_schedule(s["disturbance"], p.r);
      const auto vec = [&](const char* key, Vector& v) {
        if (!s.has(key)) return;
        v = s[key].vector();
        if (v.size() != p.dim()) throw ConfigError(fmt::format("{}: expected {} entries", s[key].path, p.dim()));
      };
      const auto mat = [&](const char* key, Matrix& M) {
        if (!s.has(key)) return;
        M = s[key].matrix();
        expect_dims(M, p.dim(), p.m, s[key].path);
      };
      vec("x0", ss.x0);
      vec("x_hat0", ss.x_hat0);
      mat("theta", ss.theta);
      mat("theta_hat0", ss.theta_hat0);
    }
    out.subsystems.push_back(std::move(ss));
  }
  try {
    out.validate(net);
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", sc.path, e.what()));
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", md[k]);
  return hex;
}

Config parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config: not valid JSON ({})", e.what()));
  }
  const Node root{doc, "config"};
  if (!doc.is_object()) throw ConfigError("config: expected an object at top level");

  const std::optional<Node> defaults = root.has("defaults") ? std::optional<Node>(root["defaults"]) : std::nullopt;

  Config cfg;
  cfg.digest = sha256_hex(text);

  const Node subs = root["subsystems"];
  if (subs.size_of_array() == 0) throw ConfigError("config.subsystems: at least one subsystem required");
  std::vector<model::Node> nodes;
  for (std::size_t k = 0; k < subs.j.size(); ++k) {
    const Node s = subs.at(k);
    try {
      nodes.push_back(parse_subsystem(s, defaults));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(fmt::format("{}: {}", s.path, e.what()));
    }
    if (s.has("P")) {
      const Matrix P = s["P"].matrix();
      const auto d = nodes.back().plant.dim();
      expect_dims(P, d, d, s["P"].path);
      cfg.P_overrides[nodes.back().raw.id] = P;
    }
  }

  std::vector<model::Edge> edges;
  if (root.has("edges")) {
    const Node es = root["edges"];
    for (std::size_t k = 0; k < es.size_of_array(); ++k) {
      const Node e = es.at(k);
      model::Edge edge;
      edge.raw.from = e["from"].string();
      edge.raw.to = e["to"].string();
      if (e.has("bound_only")) edge.model_unknown = e["bound_only"].boolean();
      if (e.has("norm_bound")) edge.norm_bound = e["norm_bound"].number();
      if (e.has("A_ij")) {
        edge.raw.A_ij = e["A_ij"].matrix();
      } else if (!edge.model_unknown) {
        throw ConfigError(fmt::format("{}.A_ij: missing", e.path));
      }
      if (edge.model_unknown && !edge.norm_bound) {
        throw ConfigError(fmt::format("{}.norm_bound: required for a bound-only edge", e.path));
      }
      edges.push_back(std::move(edge));
    }
  }

  try {
    cfg.net = model::NetworkModel(std::move(nodes), std::move(edges));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }

  if (root.has("options") && root["options"].has("strict_xi")) cfg.strict_xi = root["options"]["strict_xi"].boolean();
  if (root.has("scenario")) cfg.scenario = parse_scenario(root["scenario"], cfg.net);
  return cfg;
}

Config load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace gascert::config
