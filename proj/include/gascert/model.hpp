#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gascert/numerics.hpp"

namespace gascert::model {

using numerics::Matrix;
using numerics::Vector;
using SubsystemId = std::string;

/// Raw state-space block of one subsystem:
///   ẋ = A x + B u + E d + ζ,   y = C x + D u
struct Subsystem {
  SubsystemId id;
  Matrix A;  // n×n
  Matrix B;  // n×m
  Matrix C;  // q×n
  Matrix D;  // q×m
  Matrix E;  // n×r

  [[nodiscard]] int n() const { return static_cast<int>(A.rows()); }
  [[nodiscard]] int m() const { return static_cast<int>(B.cols()); }
  [[nodiscard]] int q() const { return static_cast<int>(C.rows()); }
  [[nodiscard]] int r() const { return static_cast<int>(E.cols()); }

  /// Throws DimensionError / NonFiniteError on malformed blocks.
  void validate() const;
};

/// Edge j → i carrying A_ij as it appears in ζ_i = Σ_j A_ij x_j.
struct Interconnection {
  SubsystemId from;  // j
  SubsystemId to;    // i
  Matrix A_ij;       // n_i × n_j
};

/// Subsystem augmented with the integral of (r − y).
struct AugmentedSubsystem {
  SubsystemId id;
  int n = 0, q = 0, m = 0, r = 0;
  Matrix A_bar;  // [[A, 0], [-C, 0]]
  Matrix B_bar;  // [B; 0]
  Matrix C_bar;  // [[C, 0], [0, I]]
  Matrix D_bar;  // [D; 0]
  Matrix E_bar;  // [[E, 0], [0, I]]  (n+q)×(r+q)
  Matrix F;      // diag(0_n, I_q): keeps only the integral (reference) rows

  [[nodiscard]] int dim() const { return n + q; }
};

AugmentedSubsystem augment(const Subsystem& s);

/// (n_i+q_i)×(n_j+q_j) with A_ij in the top-left block.
Matrix augment_edge(const Interconnection& e, int n_i, int q_i, int n_j, int q_j);

struct Tuning {
  Matrix Q;                 // SPD, (n+q)×(n+q)
  double gamma = 1.0;       // adaptive gain Γ > 0
  double theta_max = 1.0;   // shared estimate bound
  double eps0 = 0.1;        // projection tolerance
};

/// One subsystem with its controller design data.
struct Node {
  Subsystem raw;
  AugmentedSubsystem plant;
  Matrix Am_hat;  // desired closed-loop dynamics (Hurwitz by assumption)
  Matrix K_bl;    // baseline gain, m×(n+q)
  Tuning tuning;
};

/// Network edge in augmented coordinates. When `model_unknown` is set the
/// analyses use `norm_bound` in place of ‖Ā_ij‖₂; `A_bar` may still carry
/// the true coupling for simulation.
struct Edge {
  std::size_t from = 0;  // index of j
  std::size_t to = 0;    // index of i
  Interconnection raw;
  std::optional<Matrix> A_bar;
  bool model_unknown = false;
  std::optional<double> norm_bound;

  /// ‖Ā_ij‖₂, or the declared bound for model-unknown edges.
  [[nodiscard]] double gain() const;
};

class NetworkModel {
 public:
  NetworkModel() = default;

  /// Builds and validates. Zero couplings are dropped (they are not
  /// neighbors). Throws DimensionError / ConfigError on inconsistencies.
  NetworkModel(std::vector<Node> nodes, std::vector<Edge> edges);

  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const Node& node(std::size_t i) const { return nodes_.at(i); }

  [[nodiscard]] std::optional<std::size_t> index_of(const SubsystemId& id) const;

  /// Indices into edges() of the edges ending at subsystem i (𝒩_i).
  [[nodiscard]] const std::vector<std::size_t>& incoming(std::size_t i) const { return incoming_.at(i); }
  /// Indices into edges() of the edges leaving subsystem i.
  [[nodiscard]] const std::vector<std::size_t>& outgoing(std::size_t i) const { return outgoing_.at(i); }
  [[nodiscard]] int neighbor_count(std::size_t i) const { return static_cast<int>(incoming_.at(i).size()); }

  /// Edge j → i if present.
  [[nodiscard]] const Edge* find_edge(std::size_t from, std::size_t to) const;

  /// True when every Âm compares equal entry-wise.
  [[nodiscard]] bool homogeneous() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
};

struct GlobalModel {
  Matrix A, B, C, D, E;
};

/// Block assembly of the raw (un-augmented) network.
GlobalModel assemble_global(const NetworkModel& net);

/// block-diag(Âm_i) + off-diagonal Ā_ij.
Matrix closed_loop_global(const NetworkModel& net);

/// Extracts block (i, j) of a block matrix with the given row/column partitions.
Matrix block(const Matrix& M, const std::vector<int>& row_sizes, const std::vector<int>& col_sizes,
             std::size_t i, std::size_t j);

/// rank [B, AB, …, Aⁿ⁻¹B] == n with singular-value tolerance 1e-10·σ_max.
bool check_controllability(const Matrix& A, const Matrix& B);

}  // namespace gascert::model
