#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lvlingam/sem.hpp"

namespace lvlingam {

/// Rows are variables, columns are samples.
struct SampleMatrix {
  Matrix values;
  std::vector<std::string> names;
  bool iid = true;  // lets the holdout be the trailing block

  int variables() const noexcept { return static_cast<int>(values.rows()); }
  int samples() const noexcept { return static_cast<int>(values.cols()); }
  void validate() const;
};

struct WhiteningTransform {
  Vector mean;
  Matrix basis;   // U, eigenvectors of the sample covariance
  Vector scales;  // square roots of the eigenvalues, descending

  /// diag(1/scales) U^T (v - mean)
  Matrix apply(const Matrix& v) const;
  /// U diag(scales); maps whitened-space directions back to data space.
  Matrix unwhitening() const;
};

struct Whitened {
  WhiteningTransform transform;
  Matrix data;
};

/// Throws DegenerateCovariance when an eigenvalue is at or below 1e-12 of
/// the largest.
Whitened whiten(const SampleMatrix& data);

enum class Kernel { Serial, Parallel };
enum class Nongaussianity { Auto, Sub, Super };

/// f(Z) = (s/n) sum_ij g(z_j . w_i) + (lambda/n) sum_i |Z Z^T w_i - w_i|^2
/// with g(u) = logcosh(a u) / a, s = +1 for super-Gaussian sources and -1
/// for sub-Gaussian ones.
struct RicaProblem {
  double lambda = 1.0;
  double sign = 1.0;
  double scale = 1.0;  // a
};

struct ValueGrad {
  double value = 0.0;
  Matrix grad;
};

double log_cosh(double u);

/// Whole-batch Eigen expression; the reference used in tests.
ValueGrad rica_objective_serial(const Matrix& z, const Matrix& w, const RicaProblem& pr);
/// Fixed sample blocks reduced in block order, so the result does not
/// depend on the thread count.
ValueGrad rica_objective_parallel(const Matrix& z, const Matrix& w, const RicaProblem& pr,
                                  int block = 512);
ValueGrad rica_objective(const Matrix& z, const Matrix& w, const RicaProblem& pr,
                         Kernel kernel = Kernel::Parallel);

/// Mean excess kurtosis sign of the whitened rows: -1 sub, +1 super.
double contrast_sign(const Matrix& whitened, Nongaussianity mode);

struct RicaSolution {
  Matrix z;
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;
  int restart = -1;  // -1 = warm start
};

struct FitOptions {
  int restarts = 5;
  int max_iters = 5000;
  double grad_tol = 1e-6;
  Kernel kernel = Kernel::Parallel;
};

/// Multi-restart fit; restart r draws its start from seed ^ hash(k, r).
/// An optional warm start is tried first. Best objective wins, ties to the
/// earlier attempt.
RicaSolution rica_fit(const Matrix& whitened, int k, const RicaProblem& pr, std::uint64_t seed,
                      const FitOptions& opt = {}, const std::optional<Matrix>& warm = std::nullopt);

/// Largest |cosine| between distinct columns, and the smallest column norm
/// relative to the largest.
struct ColumnGeometry {
  double coherence = 0.0;
  double min_norm_ratio = 1.0;
};
ColumnGeometry column_geometry(const Matrix& z);

struct IcaConfig {
  std::optional<double> lambda;  // default 1 / p_o
  std::optional<int> k_min;      // default p_o
  std::optional<int> k_max;      // default 2 p_o
  double holdout_frac = 0.25;
  int restarts = 5;
  int max_iters = 5000;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;
  Nongaussianity nongaussianity = Nongaussianity::Auto;
  double contrast_scale = 1.0;
  /// After choosing k, refit on train + holdout.
  bool refit_all = false;
  /// A fit is treated as splitting one source into several columns when two
  /// whitened columns have |cosine| at or above this, or a column collapses.
  double coherence_limit = 0.7;
  double collapse_ratio = 1e-3;
  Kernel kernel = Kernel::Parallel;
};

struct KCandidate {
  int k = 0;
  bool failed = false;
  double holdout_cost = 0.0;
  ColumnGeometry geometry;
  bool admissible = false;
  RicaSolution fit;
};

struct ModelSelection {
  int k_star = 0;
  std::vector<KCandidate> candidates;
  std::vector<std::string> warnings;
};

/// Holdout cost per k; k* is the cheapest k among the admissible run that
/// starts at k_min (stopping at the first fit that splits a source), falling
/// back to k_min.
ModelSelection select_model(const Matrix& train_w, const Matrix& holdout_w, int k_min, int k_max,
                            const RicaProblem& pr, std::uint64_t seed, const FitOptions& opt,
                            const IcaConfig& cfg);

struct MixingEstimate {
  MixingMatrix mixing;  // normalized, labels unassigned
  Matrix raw;           // U diag(scales) Z before normalization
  int k = 0;
  RicaProblem problem;
  ModelSelection selection;
  WhiteningTransform whitening;
  RicaSolution fit;
  SampleMatrix train;
};

std::pair<SampleMatrix, SampleMatrix> split_holdout(const SampleMatrix& data, double frac,
                                                    std::uint64_t seed);

MixingEstimate estimate_mixing(const SampleMatrix& data, const IcaConfig& cfg);

/// Fit with k fixed on all of `data` (no holdout). `warm_mixing` is a data
/// space mixing estimate mapped into this sample's whitened space as a start.
MixingEstimate estimate_mixing_fixed_k(const SampleMatrix& data, int k, const RicaProblem& pr,
                                       const IcaConfig& cfg, int restarts,
                                       const std::optional<Matrix>& warm_mixing);

}  // namespace lvlingam
