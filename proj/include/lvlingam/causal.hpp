#pragma once

#include <array>
#include <vector>

#include "lvlingam/sem.hpp"
#include "lvlingam/support.hpp"

namespace lvlingam {

enum class Verdict { Path, NoPath, Undecided };

/// verdict(i, j) == Path means a causal path i ~> j.
struct PathVerdictMatrix {
  std::vector<std::vector<Verdict>> verdict;
  /// counts[i][j] = {n0*, n*0} for the ordered pair (i, j): columns zero in
  /// row i but nonzero in row j, and the reverse.
  std::vector<std::vector<std::array<int, 2>>> counts;

  int size() const noexcept { return static_cast<int>(verdict.size()); }
};

struct PairVerdict {
  Verdict forward = Verdict::Undecided;  // i ~> j
  Verdict backward = Verdict::Undecided; // j ~> i
  int n0s = 0;
  int ns0 = 0;
};

PairVerdict pairwise_path(const BoolMatrix& support, int i, int j);
PathVerdictMatrix path_verdicts(const BoolMatrix& support);

struct OrderResult {
  Dag auxiliary;
  CausalOrder order;
  std::vector<Edge> dropped;  // only with break_cycles
};

/// Throws CycleError(InconsistentVerdicts) unless break_cycles is set, in
/// which case the Path edge with the fewest supporting columns on each
/// found cycle is dropped until the graph is acyclic.
OrderResult causal_order_infer(const PathVerdictMatrix& v, bool break_cycles = false);

using IndexSet = std::vector<int>;  // ascending

/// Nonzero rows of each column.
std::vector<IndexSet> descendant_sets(const BoolMatrix& support);

/// des_o of each observed variable read off the verdicts: itself plus every
/// j with Path(i, j).
std::vector<IndexSet> observed_descendants(const PathVerdictMatrix& v);

struct EffectCandidate {
  Matrix matrix;            // unit diagonal
  std::vector<int> choice;  // column picked for each observed variable
};

struct EffectCandidateSet {
  std::vector<EffectCandidate> candidates;  // lexicographic in `choice`
  std::vector<int> r;                       // candidate columns per variable
  long long multiplicity = 0;               // product of r
  int rejected_singular = 0;
  bool has_duplicates = false;              // two choices gave equal matrices
};

struct EnumerateOptions {
  long long max_candidates = 1'000'000;
  double singular_rcond = 1e-12;
  double duplicate_tol = 1e-12;
};

/// Columns whose support set equals des_o(V_i) are the candidates for V_i.
EffectCandidateSet enumerate_effect_sets(const Matrix& mixing, const std::vector<IndexSet>& column_des,
                                         const std::vector<IndexSet>& observed_des,
                                         const EnumerateOptions& opt = {});

/// Requires exactly one matching column per observed variable.
Matrix unique_effects(const Matrix& mixing, const std::vector<IndexSet>& column_des,
                      const std::vector<IndexSet>& observed_des);

/// Three paths chosen for the non-uniqueness construction: k ~> i, k ~> j
/// avoiding i, and i ~> j.
struct PathTriple {
  std::vector<int> to_i;
  std::vector<int> to_j;
  std::vector<int> i_to_j;
};

/// Builds a second SEM with the same observed rows but total effect
/// beta + gamma / alpha from V_i to V_j. Noise of V_i becomes alpha times the
/// old noise of V_k and V_k takes the old noise of V_i. Requires V_k to be a
/// latent root, no observed vertex other than i and j below V_k, and no
/// ancestor of V_i besides V_k carrying noise of its own.
LinearSem construct_equivalent_model(const LinearSem& sem, int i, int j, int k, const PathTriple& paths);

/// Finds a PathTriple with distinct first steps, or throws StructureUnsupported.
PathTriple default_path_triple(const LinearSem& sem, int i, int j, int k);

}  // namespace lvlingam
