#include "lvlingam/ica.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lvlingam/errors.hpp"
#include "lvlingam/optimize.hpp"
#include "lvlingam/rng.hpp"

namespace lvlingam {

void SampleMatrix::validate() const {
  if (values.rows() < 1) throw Error(ErrorKind::InvalidArgument, "no variables");
  if (values.cols() <= values.rows())
    throw Error(ErrorKind::InvalidArgument, "need more samples than variables");
  if (!values.allFinite()) throw Error(ErrorKind::InvalidArgument, "samples contain non-finite values");
  if (!names.empty() && static_cast<int>(names.size()) != variables())
    throw Error(ErrorKind::ShapeMismatch, "one name per variable required");
}

Matrix WhiteningTransform::apply(const Matrix& v) const {
  return scales.cwiseInverse().asDiagonal() * (basis.transpose() * (v.colwise() - mean));
}

Matrix WhiteningTransform::unwhitening() const { return basis * scales.asDiagonal(); }

Whitened whiten(const SampleMatrix& data) {
  data.validate();
  const auto p = data.values.rows();
  const auto n = data.values.cols();
  WhiteningTransform t;
  t.mean = data.values.rowwise().mean();
  const Matrix c = data.values.colwise() - t.mean;
  const Matrix cov = c * c.transpose() / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector ev = es.eigenvalues().reverse();
  Matrix u = es.eigenvectors().rowwise().reverse();
  const double top = ev(0);
  if (!(top > 0) || ev(p - 1) <= 1e-12 * top) {
    const Vector dir = u.col(p - 1);
    Eigen::Index lead;
    dir.cwiseAbs().maxCoeff(&lead);
    std::ostringstream os;
    os << "sample covariance is singular: eigenvalue " << ev(p - 1) << " vs largest " << top
       << "; near-null direction loads most on variable "
       << (data.names.empty() ? "#" + std::to_string(lead + 1) : data.names[lead]);
    throw Error(ErrorKind::DegenerateCovariance, os.str());
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::Index r;
    u.col(j).cwiseAbs().maxCoeff(&r);
    if (u(r, j) < 0) u.col(j) *= -1.0;
  }
  t.basis = std::move(u);
  t.scales = ev.cwiseSqrt();
  Matrix w = t.scales.cwiseInverse().asDiagonal() * (t.basis.transpose() * c);
  return {std::move(t), std::move(w)};
}

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

ValueGrad rica_objective_serial(const Matrix& z, const Matrix& w, const RicaProblem& pr) {
  const double n = static_cast<double>(w.cols());
  const Matrix y = z.transpose() * w;
  const Matrix r = z * y - w;
  ValueGrad out;
  const double a = pr.scale;
  out.value = pr.sign / n * y.unaryExpr([a](double u) { return log_cosh(a * u) / a; }).sum() +
              pr.lambda / n * r.squaredNorm();
  const Matrix th = (a * y.array()).tanh().matrix();
  out.grad = pr.sign / n * (w * th.transpose()) +
             2.0 * pr.lambda / n * (r * y.transpose() + w * (r.transpose() * z));
  return out;
}

ValueGrad rica_objective_parallel(const Matrix& z, const Matrix& w, const RicaProblem& pr, int block) {
  const auto n = w.cols();
  const auto nb = (n + block - 1) / block;
  std::vector<double> contrast(nb), recon(nb);
  std::vector<Matrix> gc(nb), gr(nb);
  const double a = pr.scale;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < nb; ++b) {
    const auto start = b * block;
    const auto len = std::min<Eigen::Index>(block, n - start);
    const auto wb = w.middleCols(start, len);
    const Matrix y = z.transpose() * wb;
    const Matrix r = z * y - wb;
    contrast[b] = y.unaryExpr([a](double u) { return log_cosh(a * u) / a; }).sum();
    recon[b] = r.squaredNorm();
    gc[b] = wb * (a * y.array()).tanh().matrix().transpose();
    gr[b] = r * y.transpose() + wb * (r.transpose() * z);
  }
  double c = 0.0, q = 0.0;
  Matrix g1 = Matrix::Zero(z.rows(), z.cols()), g2 = g1;
  for (Eigen::Index b = 0; b < nb; ++b) {
    c += contrast[b];
    q += recon[b];
    g1 += gc[b];
    g2 += gr[b];
  }
  const double nn = static_cast<double>(n);
  ValueGrad out;
  out.value = pr.sign / nn * c + pr.lambda / nn * q;
  out.grad = pr.sign / nn * g1 + 2.0 * pr.lambda / nn * g2;
  return out;
}

ValueGrad rica_objective(const Matrix& z, const Matrix& w, const RicaProblem& pr, Kernel kernel) {
  return kernel == Kernel::Serial ? rica_objective_serial(z, w, pr) : rica_objective_parallel(z, w, pr);
}

double contrast_sign(const Matrix& whitened, Nongaussianity mode) {
  if (mode == Nongaussianity::Sub) return -1.0;
  if (mode == Nongaussianity::Super) return 1.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < whitened.rows(); ++i) {
    const auto row = whitened.row(i).array();
    const double m2 = row.square().mean();
    total += row.square().square().mean() / (m2 * m2) - 3.0;
  }
  return total < 0 ? -1.0 : 1.0;
}

RicaSolution rica_fit(const Matrix& whitened, int k, const RicaProblem& pr, std::uint64_t seed,
                      const FitOptions& opt, const std::optional<Matrix>& warm) {
  const auto p = whitened.rows();
  if (k < p) throw Error(ErrorKind::InvalidArgument, "k must be at least the number of variables");
  if (!(pr.lambda > 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (warm && (warm->rows() != p || warm->cols() != k))
    throw Error(ErrorKind::ShapeMismatch, "warm start has the wrong shape");

  const int offset = warm ? 1 : 0;
  const int attempts = offset + std::max(opt.restarts, warm ? 0 : 1);
  std::vector<RicaSolution> sols(attempts);
  LbfgsOptions lo;
  lo.max_iters = opt.max_iters;
  lo.grad_tol = opt.grad_tol;

#pragma omp parallel for schedule(dynamic)
  for (int a = 0; a < attempts; ++a) {
    Matrix z0(p, k);
    if (a < offset) {
      z0 = *warm;
    } else {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(a - offset)}));
      for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < p; ++r) z0(r, c) = rng.normal() / std::sqrt(static_cast<double>(p));
    }
    Objective f = [&](const Vector& x, Vector& g) {
      const Eigen::Map<const Matrix> zm(x.data(), p, k);
      auto vg = rica_objective(zm, whitened, pr, opt.kernel);
      g = Eigen::Map<const Vector>(vg.grad.data(), vg.grad.size());
      return vg.value;
    };
    auto r = lbfgs_minimize(f, Eigen::Map<const Vector>(z0.data(), z0.size()), lo);
    sols[a].z = Eigen::Map<const Matrix>(r.x.data(), p, k);
    sols[a].objective_value = r.value;
    sols[a].converged = r.converged;
    sols[a].iterations = r.iterations;
    sols[a].restart = a - offset;
  }
  int best = -1;
  for (int a = 0; a < attempts; ++a)
    if (std::isfinite(sols[a].objective_value) &&
        (best < 0 || sols[a].objective_value < sols[best].objective_value))
      best = a;
  if (best < 0) throw Error(ErrorKind::NonConvergence, "every RICA restart produced a non-finite objective");
  return sols[best];
}

ColumnGeometry column_geometry(const Matrix& z) {
  ColumnGeometry g;
  const Vector norms = z.colwise().norm();
  const double top = norms.maxCoeff();
  g.min_norm_ratio = top > 0 ? norms.minCoeff() / top : 0.0;
  for (Eigen::Index a = 0; a < z.cols(); ++a)
    for (Eigen::Index b = a + 1; b < z.cols(); ++b) {
      const double den = norms(a) * norms(b);
      const double c = den > 0 ? std::abs(z.col(a).dot(z.col(b))) / den : 1.0;
      g.coherence = std::max(g.coherence, c);
    }
  return g;
}

ModelSelection select_model(const Matrix& train_w, const Matrix& holdout_w, int k_min, int k_max,
                            const RicaProblem& pr, std::uint64_t seed, const FitOptions& opt,
                            const IcaConfig& cfg) {
  if (k_min > k_max) throw Error(ErrorKind::InvalidArgument, "empty k range");
  if (k_min < train_w.rows()) throw Error(ErrorKind::InvalidArgument, "k_min below the number of variables");
  ModelSelection sel;
  int best = -1;
  bool open = true;  // still inside the admissible run starting at k_min
  for (int k = k_min; k <= k_max && open; ++k) {
    KCandidate c;
    c.k = k;
    try {
      c.fit = rica_fit(train_w, k, pr, seed, opt);
      c.holdout_cost = rica_objective(c.fit.z, holdout_w, pr, opt.kernel).value;
      c.geometry = column_geometry(c.fit.z);
      c.admissible = c.geometry.coherence < cfg.coherence_limit &&
                     c.geometry.min_norm_ratio > cfg.collapse_ratio;
      if (!c.fit.converged)
        sel.warnings.push_back("k=" + std::to_string(k) + ": iteration cap reached on every restart");
    } catch (const Error& e) {
      c.failed = true;
      sel.warnings.push_back("k=" + std::to_string(k) + " excluded: " + e.what());
    }
    if (!c.failed) {
      if (!c.admissible && k > k_min) open = false;
      else if (best < 0 || c.holdout_cost < sel.candidates[best].holdout_cost)
        best = static_cast<int>(sel.candidates.size());
    }
    sel.candidates.push_back(std::move(c));
  }
  if (best < 0) throw Error(ErrorKind::NonConvergence, "no k in range produced a usable fit");
  sel.k_star = sel.candidates[best].k;
  return sel;
}

std::pair<SampleMatrix, SampleMatrix> split_holdout(const SampleMatrix& data, double frac, std::uint64_t seed) {
  if (!(frac > 0 && frac < 1)) throw Error(ErrorKind::InvalidArgument, "holdout fraction must be in (0, 1)");
  const int n = data.samples();
  const int nh = static_cast<int>(std::ceil(frac * n));
  std::vector<int> hold_idx, train_idx;
  if (data.iid) {
    for (int i = 0; i < n - nh; ++i) train_idx.push_back(i);
    for (int i = n - nh; i < n; ++i) hold_idx.push_back(i);
  } else {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, {0x401d}));
    rng.shuffle(perm.begin(), perm.end());
    hold_idx.assign(perm.begin(), perm.begin() + nh);
    train_idx.assign(perm.begin() + nh, perm.end());
    std::sort(hold_idx.begin(), hold_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }
  SampleMatrix train{data.values(Eigen::all, train_idx), data.names, data.iid};
  SampleMatrix hold{data.values(Eigen::all, hold_idx), data.names, data.iid};
  return {std::move(train), std::move(hold)};
}

namespace {

MixingEstimate finish(MixingEstimate est) {
  est.raw = est.whitening.unwhitening() * est.fit.z;
  est.mixing.entries = est.raw;
  est.mixing.labels.assign(est.raw.cols(), ColumnLabel{});
  est.mixing.scale = ScaleConvention::Exact;
  est.mixing = normalize_columns(std::move(est.mixing));
  est.k = static_cast<int>(est.raw.cols());
  return est;
}

FitOptions fit_options(const IcaConfig& cfg, int restarts) {
  FitOptions o;
  o.restarts = restarts;
  o.max_iters = cfg.max_iters;
  o.grad_tol = cfg.grad_tol;
  o.kernel = cfg.kernel;
  return o;
}

}  // namespace

MixingEstimate estimate_mixing(const SampleMatrix& data, const IcaConfig& cfg) {
  data.validate();
  const int po = data.variables();
  const int k_min = cfg.k_min.value_or(po);
  const int k_max = cfg.k_max.value_or(2 * po);
  if (k_min < po || k_max < k_min) throw Error(ErrorKind::InvalidArgument, "invalid k range");
  auto [train, hold] = split_holdout(data, cfg.holdout_frac, cfg.seed);
  train.validate();

  MixingEstimate est;
  auto wt = whiten(train);
  est.whitening = wt.transform;
  est.problem.lambda = cfg.lambda.value_or(1.0 / po);
  if (!(est.problem.lambda > 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  est.problem.sign = contrast_sign(wt.data, cfg.nongaussianity);
  est.problem.scale = cfg.contrast_scale;
  const Matrix hold_w = est.whitening.apply(hold.values);
  est.selection = select_model(wt.data, hold_w, k_min, k_max, est.problem, cfg.seed,
                               fit_options(cfg, cfg.restarts), cfg);
  for (const auto& c : est.selection.candidates)
    if (c.k == est.selection.k_star) est.fit = c.fit;
  est.train = std::move(train);
  est = finish(std::move(est));
  if (!cfg.refit_all) return est;
  auto full = estimate_mixing_fixed_k(data, est.k, est.problem, cfg, cfg.restarts, est.raw);
  full.selection = std::move(est.selection);
  return full;
}

MixingEstimate estimate_mixing_fixed_k(const SampleMatrix& data, int k, const RicaProblem& pr,
                                       const IcaConfig& cfg, int restarts,
                                       const std::optional<Matrix>& warm_mixing) {
  data.validate();
  MixingEstimate est;
  auto wt = whiten(data);
  est.whitening = wt.transform;
  est.problem = pr;
  std::optional<Matrix> warm;
  if (warm_mixing) {
    if (warm_mixing->rows() != data.variables() || warm_mixing->cols() != k)
      throw Error(ErrorKind::ShapeMismatch, "warm start mixing has the wrong shape");
    warm = est.whitening.scales.cwiseInverse().asDiagonal() * (est.whitening.basis.transpose() * *warm_mixing);
  }
  est.fit = rica_fit(wt.data, k, pr, cfg.seed, fit_options(cfg, restarts), warm);
  est.selection.k_star = k;
  est.train = data;
  return finish(std::move(est));
}

}  // namespace lvlingam
