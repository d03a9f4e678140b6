#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lvlingam/rng.hpp"

namespace lvlingam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

/// Weighted directed graph. Acyclicity is checked by validate_dag, not here,
/// so a cyclic input can still be reported with its cycle.
class Dag {
 public:
  explicit Dag(int num_vertices, std::vector<Edge> edges = {});

  int num_vertices() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool has_edge(int from, int to) const;
  /// 0 when absent.
  double weight(int from, int to) const;
  const std::vector<int>& children(int v) const { return children_.at(v); }
  const std::vector<int>& parents(int v) const { return parents_.at(v); }

  /// A with A(to, from) = weight.
  const Matrix& adjacency() const noexcept { return adj_; }

  /// Same graph with one existing edge reweighted.
  Dag with_weight(int from, int to, double w) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> parents_;
  Matrix adj_;
};

class CausalOrder {
 public:
  /// sequence[pos] = vertex.
  explicit CausalOrder(std::vector<int> sequence);

  int size() const noexcept { return static_cast<int>(sequence_.size()); }
  int position(int v) const { return position_.at(v); }
  const std::vector<int>& sequence() const noexcept { return sequence_; }
  bool respects(const Dag& g) const;

  /// Induced order on a subset, positions renumbered 0..|subset|-1 and
  /// vertices renamed to their index within `subset`.
  CausalOrder restricted_to(std::span<const int> subset) const;

 private:
  std::vector<int> sequence_;
  std::vector<int> position_;
};

CausalOrder validate_dag(const Dag& g);

enum class NoiseFamily { Uniform, Laplace, Gaussian };

/// Uniform(lo, hi), Laplace(loc, scale), Gaussian(mean, sd).
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Uniform;
  std::vector<double> params;

  static NoiseSpec unit_uniform();
  void validate() const;
  double sample(Rng& rng) const;
};

/// Linear SEM V = AV + E over a DAG. Each vertex noise E_v is a combination
/// of independent sources: E = noise_mix * N. The identity is the usual model;
/// absorbing rewrites rows of noise_mix.
class LinearSem {
 public:
  LinearSem(Dag graph, std::vector<int> observed, std::vector<NoiseSpec> sources = {},
            std::optional<Matrix> noise_mix = std::nullopt);

  const Dag& graph() const noexcept { return graph_; }
  const std::vector<int>& observed() const noexcept { return observed_; }
  const std::vector<int>& latent() const noexcept { return latent_; }
  int num_vertices() const noexcept { return graph_.num_vertices(); }
  int num_observed() const noexcept { return static_cast<int>(observed_.size()); }
  int num_latent() const noexcept { return static_cast<int>(latent_.size()); }
  bool is_observed(int v) const { return observed_slot_.at(v) >= 0; }
  /// Row of v among observed variables, or -1.
  int observed_slot(int v) const { return observed_slot_.at(v); }
  const CausalOrder& order() const noexcept { return order_; }
  const std::vector<NoiseSpec>& sources() const noexcept { return sources_; }
  const Matrix& noise_mix() const noexcept { return noise_mix_; }
  int num_sources() const noexcept { return static_cast<int>(noise_mix_.cols()); }

 private:
  Dag graph_;
  std::vector<int> observed_;
  std::vector<int> latent_;
  std::vector<int> observed_slot_;
  std::vector<NoiseSpec> sources_;
  Matrix noise_mix_;
  CausalOrder order_;
};

/// B = (I - A)^{-1}. Throws IllConditioned if the LU reciprocal condition
/// estimate falls below 1e-12.
Matrix total_effect_matrix(const Dag& g);
Matrix total_effect_matrix(const LinearSem& sem);

double path_weight(const Dag& g, std::span<const int> path);

/// reach(i, j) iff a directed path i ~> j exists (reflexive).
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> reachability(const Dag& g);

/// D = A_oo + A_ol (I - A_ll)^{-1} A_lo, indexed by observed slot.
Matrix reduced_direct_effects(const LinearSem& sem);

/// Observed rows of B times noise_mix: the coefficients of each observed
/// variable on the independent sources.
Matrix observed_source_mixing(const LinearSem& sem);

enum class ColumnKind { Observed, Latent, Unassigned };
enum class ScaleConvention { Exact, Normalized };

struct ColumnLabel {
  ColumnKind kind = ColumnKind::Unassigned;
  int vertex = -1;
  std::vector<int> absorbed;  // latent vertices merged into this column
  bool operator==(const ColumnLabel&) const = default;
};

struct MixingMatrix {
  Matrix entries;
  std::vector<ColumnLabel> labels;
  ScaleConvention scale = ScaleConvention::Exact;

  int rows() const noexcept { return static_cast<int>(entries.rows()); }
  int cols() const noexcept { return static_cast<int>(entries.cols()); }
};

/// B' = [(I-D)^{-1} | (I-D)^{-1} A_ol (I-A_ll)^{-1}], columns labeled by
/// observed then latent vertex. Ignores noise_mix.
MixingMatrix observed_mixing(const LinearSem& sem);

/// Divide each column by its largest-magnitude entry (+1 after scaling).
MixingMatrix normalize_columns(MixingMatrix m);

/// Scale-free dependence test: unit-normalize, compare min over sign.
bool columns_dependent(const Vector& a, const Vector& b, double tol);

struct MergeRecord {
  int removed = -1;                // latent vertex whose column went away
  std::optional<int> absorber;     // surviving column's vertex; none = Empty
  double alpha = 0.0;              // removed column = alpha * absorber column
  bool operator==(const MergeRecord&) const = default;
};

struct ReducedMixing {
  MixingMatrix matrix;
  std::vector<MergeRecord> log;
};

ReducedMixing reduce_mixing(const MixingMatrix& m, double tol = 1e-9);

/// Every directed path has nonzero total effect: B(j, i) != 0 whenever
/// i ~> j. Cancellation is judged relative to the sum of |path weights|.
bool is_faithful(const Dag& g, double tol = 1e-9);

}  // namespace lvlingam
