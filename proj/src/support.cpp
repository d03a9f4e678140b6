#include "lvlingam/support.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <optional>

#include "lvlingam/assignment.hpp"
#include "lvlingam/errors.hpp"
#include "lvlingam/rng.hpp"

namespace lvlingam {

ColumnMatch match_columns(const MixingMatrix& reference, const MixingMatrix& other, MatchMethod method) {
  if (reference.rows() != other.rows() || reference.cols() != other.cols())
    throw Error(ErrorKind::ShapeMismatch, "matched matrices must have equal shape");
  const int k = reference.cols();
  Matrix cost(k, k);
  Matrix flip(k, k);
  for (int c = 0; c < k; ++c)
    for (int o = 0; o < k; ++o) {
      const double plus = (reference.entries.col(c) - other.entries.col(o)).squaredNorm();
      const double minus = (reference.entries.col(c) + other.entries.col(o)).squaredNorm();
      cost(c, o) = std::min(plus, minus);
      flip(c, o) = minus < plus ? -1.0 : 1.0;
    }
  ColumnMatch m;
  m.perm = method == MatchMethod::Optimal ? solve_assignment(cost) : greedy_assignment(cost);
  for (int c = 0; c < k; ++c) {
    m.sign.push_back(flip(c, m.perm[c]));
    m.cost += cost(c, m.perm[c]);
  }
  return m;
}

namespace {

SampleMatrix resample(const SampleMatrix& data, Rng& rng) {
  const int n = data.samples();
  std::vector<int> idx(n);
  for (auto& i : idx) i = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
  return {data.values(Eigen::all, idx), data.names, data.iid};
}

}  // namespace

BootstrapEnsemble bootstrap_replicates(const MixingEstimate& reference, const IcaConfig& cfg,
                                       const BootstrapConfig& bc) {
  if (bc.reps < 2) throw Error(ErrorKind::InvalidArgument, "at least 2 bootstrap replicates required");
  const int k = reference.k;
  std::vector<std::optional<MixingEstimate>> fits(bc.reps);
  std::vector<std::string> notes(bc.reps);

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < bc.reps; ++r) {
    for (int attempt = 0; attempt < 2 && !fits[r]; ++attempt) {
      Rng rng(derive_seed(bc.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(attempt), 0xb00}));
      IcaConfig rc = cfg;
      rc.seed = derive_seed(bc.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(attempt), 0xf17});
      try {
        auto sample = resample(reference.train, rng);
        const int restarts = bc.warm_start ? bc.restarts : std::max(1, bc.restarts);
        std::optional<Matrix> warm;
        if (bc.warm_start) warm = reference.raw;
        fits[r] = estimate_mixing_fixed_k(sample, k, reference.problem, rc, restarts, warm);
      } catch (const Error& e) {
        notes[r] += "replicate " + std::to_string(r + 1) + " attempt " + std::to_string(attempt + 1) +
                    " failed: " + e.what() + "; ";
      }
    }
  }

  BootstrapEnsemble ens;
  ens.reference = reference.mixing;
  for (int r = 0; r < bc.reps; ++r) {
    if (!notes[r].empty()) ens.warnings.push_back(notes[r]);
    if (!fits[r]) {
      ens.warnings.push_back("replicate " + std::to_string(r + 1) + " dropped");
      continue;
    }
    const auto geo = column_geometry(fits[r]->fit.z);
    if (geo.coherence >= cfg.coherence_limit || geo.min_norm_ratio <= cfg.collapse_ratio) ++ens.k_mismatch;
    const auto& mix = fits[r]->mixing;
    const auto m = match_columns(ens.reference, mix, bc.match);
    MixingMatrix aligned = mix;
    for (int c = 0; c < k; ++c) aligned.entries.col(c) = m.sign[c] * mix.entries.col(m.perm[c]);
    ens.replicates.push_back(std::move(aligned));
    ens.alignment.push_back(m.perm);
  }
  if (ens.replicates.size() < 2)
    throw Error(ErrorKind::NonConvergence, "fewer than 2 bootstrap replicates survived");
  if (ens.k_mismatch > 0)
    ens.warnings.push_back(std::to_string(ens.k_mismatch) +
                           " replicate(s) would have preferred a different column count");
  return ens;
}

BootstrapEnsemble bootstrap_replicates(const SampleMatrix& data, const IcaConfig& cfg,
                                       const BootstrapConfig& bc) {
  if (bc.reps < 2) throw Error(ErrorKind::InvalidArgument, "at least 2 bootstrap replicates required");
  return bootstrap_replicates(estimate_mixing(data, cfg), cfg, bc);
}

SupportMatrix zero_support(const BootstrapEnsemble& ens, double alpha, StderrMode mode) {
  const int b = static_cast<int>(ens.replicates.size());
  if (b < 2) throw Error(ErrorKind::InvalidArgument, "at least 2 aligned replicates required");
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0, 1)");
  const auto rows = ens.replicates[0].rows();
  const auto cols = ens.replicates[0].cols();
  SupportMatrix s;
  s.alpha = alpha;
  s.replicates = b;
  s.mean = Matrix::Zero(rows, cols);
  for (const auto& r : ens.replicates) {
    if (r.rows() != rows || r.cols() != cols) throw Error(ErrorKind::ShapeMismatch, "replicate shapes differ");
    s.mean += r.entries;
  }
  s.mean /= b;
  Matrix var = Matrix::Zero(rows, cols);
  for (const auto& r : ens.replicates) var += (r.entries - s.mean).cwiseAbs2();
  const Matrix sd = (var / (b - 1)).cwiseSqrt();
  s.stderr_ = mode == StderrMode::Bootstrap ? sd : Matrix(sd / std::sqrt(static_cast<double>(b)));

  const boost::math::students_t dist(b - 1);
  const double crit = boost::math::quantile(boost::math::complement(dist, alpha / 2));
  s.support = BoolMatrix::Constant(rows, cols, false);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double m = s.mean(i, j);
      if (sd(i, j) <= 1e-12 * std::max(1.0, std::abs(m))) s.support(i, j) = std::abs(m) > 1e-6;
      else s.support(i, j) = std::abs(m) / s.stderr_(i, j) > crit;
    }
  for (int c = 0; c < cols; ++c) s.column_order.push_back(c);
  return s;
}

}  // namespace lvlingam
