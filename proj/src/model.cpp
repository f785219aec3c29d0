#include "gascert/model.hpp"

#include <fmt/format.h>

#include "gascert/errors.hpp"

namespace gascert::model {

namespace {

void expect_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, std::string_view what) {
  if (M.rows() != rows || M.cols() != cols) {
    throw DimensionError(fmt::format("{}: expected {}x{}, got {}x{}", what, rows, cols, M.rows(), M.cols()));
  }
}

std::vector<int> offsets(const std::vector<int>& sizes) {
  std::vector<int> off(sizes.size() + 1, 0);
  for (std::size_t k = 0; k < sizes.size(); ++k) off[k + 1] = off[k] + sizes[k];
  return off;
}

}  // namespace

void Subsystem::validate() const {
  const std::string who = fmt::format("subsystem '{}'", id);
  if (A.rows() == 0) throw DimensionError(who + ": A is empty");
  numerics::require_square(A, who + ".A");
  expect_shape(B, n(), B.cols(), who + ".B");
  expect_shape(C, C.rows(), n(), who + ".C");
  expect_shape(D, q(), m(), who + ".D");
  expect_shape(E, n(), E.cols(), who + ".E");
  for (const auto* M : {&A, &B, &C, &D, &E}) numerics::require_finite(*M, who);
}

AugmentedSubsystem augment(const Subsystem& s) {
  s.validate();
  AugmentedSubsystem a;
  a.id = s.id;
  a.n = s.n();
  a.q = s.q();
  a.m = s.m();
  a.r = s.r();
  const int n = a.n, q = a.q, m = a.m, r = a.r;

  a.A_bar = Matrix::Zero(n + q, n + q);
  a.A_bar.topLeftCorner(n, n) = s.A;
  a.A_bar.bottomLeftCorner(q, n) = -s.C;

  a.B_bar = Matrix::Zero(n + q, m);
  a.B_bar.topRows(n) = s.B;

  a.C_bar = Matrix::Zero(2 * q, n + q);
  a.C_bar.topLeftCorner(q, n) = s.C;
  a.C_bar.bottomRightCorner(q, q) = Matrix::Identity(q, q);

  a.D_bar = Matrix::Zero(2 * q, m);
  a.D_bar.topRows(q) = s.D;

  a.E_bar = Matrix::Zero(n + q, r + q);
  a.E_bar.topLeftCorner(n, r) = s.E;
  a.E_bar.bottomRightCorner(q, q) = Matrix::Identity(q, q);

  a.F = Matrix::Zero(n + q, n + q);
  a.F.bottomRightCorner(q, q) = Matrix::Identity(q, q);
  return a;
}

Matrix augment_edge(const Interconnection& e, int n_i, int q_i, int n_j, int q_j) {
  expect_shape(e.A_ij, n_i, n_j, fmt::format("edge {} -> {}", e.from, e.to));
  numerics::require_finite(e.A_ij, "augment_edge");
  Matrix out = Matrix::Zero(n_i + q_i, n_j + q_j);
  out.topLeftCorner(n_i, n_j) = e.A_ij;
  return out;
}

double Edge::gain() const {
  if (model_unknown) {
    if (!norm_bound) {
      throw ConfigError(fmt::format("edge {} -> {}: model-unknown edge without a norm bound", raw.from, raw.to));
    }
    return *norm_bound;
  }
  return A_bar ? numerics::spectral_norm(*A_bar) : 0.0;
}

NetworkModel::NetworkModel(std::vector<Node> nodes, std::vector<Edge> edges) : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& nd = nodes_[i];
    const std::string who = fmt::format("subsystem '{}'", nd.raw.id);
    for (std::size_t k = 0; k < i; ++k) {
      if (nodes_[k].raw.id == nd.raw.id) throw ConfigError(who + ": duplicate id");
    }
    nd.raw.validate();
    if (!check_controllability(nd.raw.A, nd.raw.B)) throw ConfigError(who + ": (A, B) is not controllable");
    const int d = nd.plant.dim();
    expect_shape(nd.Am_hat, d, d, who + ".Am_hat");
    numerics::require_finite(nd.Am_hat, who + ".Am_hat");
    expect_shape(nd.K_bl, nd.plant.m, d, who + ".K_bl");
    expect_shape(nd.tuning.Q, d, d, who + ".Q");
    if (!(nd.tuning.gamma > 0.0)) throw DomainError(who + ": Gamma must be > 0");
    if (!(nd.tuning.theta_max >= 0.0)) throw DomainError(who + ": theta_max must be >= 0");
    if (!(nd.tuning.eps0 > 0.0)) throw DomainError(who + ": eps0 must be > 0");
    const Matrix& Q = nd.tuning.Q;
    if ((Q - Q.transpose()).norm() > 1e-10 * std::max(1.0, Q.norm()) ||
        Eigen::LLT<Matrix>(0.5 * (Q + Q.transpose())).info() != Eigen::Success) {
      throw DomainError(who + ": Q must be symmetric positive definite");
    }
  }

  incoming_.assign(nodes_.size(), {});
  outgoing_.assign(nodes_.size(), {});
  for (Edge& e : edges) {
    const auto from = index_of(e.raw.from);
    const auto to = index_of(e.raw.to);
    if (!from || !to) {
      throw ConfigError(fmt::format("edge {} -> {}: unknown endpoint", e.raw.from, e.raw.to));
    }
    if (*from == *to) throw ConfigError(fmt::format("edge {} -> {}: self-loop", e.raw.from, e.raw.to));
    if (find_edge(*from, *to) != nullptr) {
      throw ConfigError(fmt::format("edge {} -> {}: duplicate", e.raw.from, e.raw.to));
    }
    e.from = *from;
    e.to = *to;
    const auto& pi = nodes_[e.to].plant;
    const auto& pj = nodes_[e.from].plant;
    if (e.raw.A_ij.size() > 0) {
      e.A_bar = augment_edge(e.raw, pi.n, pi.q, pj.n, pj.q);
    } else if (!e.model_unknown) {
      throw ConfigError(fmt::format("edge {} -> {}: missing A_ij", e.raw.from, e.raw.to));
    }
    if (e.model_unknown && !(e.norm_bound && *e.norm_bound >= 0.0)) {
      throw ConfigError(fmt::format("edge {} -> {}: model-unknown edge needs a non-negative norm_bound",
                                    e.raw.from, e.raw.to));
    }
    const bool zero_coupling = e.model_unknown ? (*e.norm_bound == 0.0 && (!e.A_bar || e.A_bar->isZero(0.0)))
                                               : e.A_bar->isZero(0.0);
    if (zero_coupling) continue;
    incoming_[e.to].push_back(edges_.size());
    outgoing_[e.from].push_back(edges_.size());
    edges_.push_back(std::move(e));
  }
}

std::optional<std::size_t> NetworkModel::index_of(const SubsystemId& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].raw.id == id) return i;
  }
  return std::nullopt;
}

const Edge* NetworkModel::find_edge(std::size_t from, std::size_t to) const {
  for (const Edge& e : edges_) {
    if (e.from == from && e.to == to) return &e;
  }
  return nullptr;
}

bool NetworkModel::homogeneous() const {
  for (const Node& nd : nodes_) {
    const Matrix& ref = nodes_.front().Am_hat;
    if (nd.Am_hat.rows() != ref.rows() || nd.Am_hat != ref) return false;
  }
  return true;
}

GlobalModel assemble_global(const NetworkModel& net) {
  std::vector<int> n, m, q, r;
  for (const Node& nd : net.nodes()) {
    n.push_back(nd.raw.n());
    m.push_back(nd.raw.m());
    q.push_back(nd.raw.q());
    r.push_back(nd.raw.r());
  }
  const auto on = offsets(n), om = offsets(m), oq = offsets(q), orr = offsets(r);
  GlobalModel g;
  g.A = Matrix::Zero(on.back(), on.back());
  g.B = Matrix::Zero(on.back(), om.back());
  g.C = Matrix::Zero(oq.back(), on.back());
  g.D = Matrix::Zero(oq.back(), om.back());
  g.E = Matrix::Zero(on.back(), orr.back());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Subsystem& s = net.node(i).raw;
    g.A.block(on[i], on[i], n[i], n[i]) = s.A;
    g.B.block(on[i], om[i], n[i], m[i]) = s.B;
    g.C.block(oq[i], on[i], q[i], n[i]) = s.C;
    g.D.block(oq[i], om[i], q[i], m[i]) = s.D;
    g.E.block(on[i], orr[i], n[i], r[i]) = s.E;
  }
  for (const Edge& e : net.edges()) {
    if (e.raw.A_ij.size() == 0) continue;
    g.A.block(on[e.to], on[e.from], n[e.to], n[e.from]) = e.raw.A_ij;
  }
  return g;
}

Matrix closed_loop_global(const NetworkModel& net) {
  std::vector<int> d;
  for (const Node& nd : net.nodes()) d.push_back(nd.plant.dim());
  const auto off = offsets(d);
  Matrix A = Matrix::Zero(off.back(), off.back());
  for (std::size_t i = 0; i < net.size(); ++i) A.block(off[i], off[i], d[i], d[i]) = net.node(i).Am_hat;
  for (const Edge& e : net.edges()) {
    if (!e.A_bar) continue;
    A.block(off[e.to], off[e.from], d[e.to], d[e.from]) = *e.A_bar;
  }
  return A;
}

Matrix block(const Matrix& M, const std::vector<int>& row_sizes, const std::vector<int>& col_sizes, std::size_t i,
             std::size_t j) {
  const auto ro = offsets(row_sizes), co = offsets(col_sizes);
  return M.block(ro.at(i), co.at(j), row_sizes.at(i), col_sizes.at(j));
}

bool check_controllability(const Matrix& A, const Matrix& B) {
  numerics::require_square(A, "check_controllability");
  if (B.rows() != A.rows()) {
    throw DimensionError(fmt::format("check_controllability: A is {}x{} but B has {} rows", A.rows(), A.cols(),
                                     B.rows()));
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (n == 0) return true;
  Matrix K(n, n * m);
  Matrix blk = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    K.middleCols(k * m, m) = blk;
    blk = A * blk;
  }
  // Column scaling leaves the rank unchanged and keeps widely scaled Krylov
  // blocks (power-electronics models) comparable.
  for (Eigen::Index c = 0; c < K.cols(); ++c) {
    const double nc = K.col(c).norm();
    if (nc > 0.0) K.col(c) /= nc;
  }
  return numerics::numerical_rank(K, 1e-10) == n;
}

}  // namespace gascert::model
