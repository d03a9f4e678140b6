#include "lvlingam/experiments.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "lvlingam/errors.hpp"
#include "lvlingam/rng.hpp"

namespace lvlingam {

Dag random_dag(int p, double edge_prob, double weight, std::uint64_t seed) {
  if (p < 2) throw Error(ErrorKind::InvalidArgument, "random_dag needs p >= 2");
  if (!(edge_prob >= 0 && edge_prob <= 1)) throw Error(ErrorKind::InvalidArgument, "edge_prob must be in [0, 1]");
  Rng rng(seed);
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm.begin(), perm.end());
  std::vector<Edge> edges;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (rng.uniform() < edge_prob) edges.push_back({perm[a], perm[b], weight});
  return Dag(p, std::move(edges));
}

LinearSem random_latent_sem(int p, double edge_prob, double weight, double latent_fraction, std::uint64_t seed) {
  if (!(latent_fraction >= 0 && latent_fraction < 1))
    throw Error(ErrorKind::InvalidArgument, "latent fraction must be in [0, 1)");
  Dag g = random_dag(p, edge_prob, weight, seed);
  Rng rng(derive_seed(seed, {0x1a7e}));
  std::vector<int> ids(p);
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids.begin(), ids.end());
  const int pl = static_cast<int>(std::floor(latent_fraction * p));
  return LinearSem(std::move(g), std::vector<int>(ids.begin() + pl, ids.end()));
}

SampleMatrix simulate_samples(const LinearSem& sem, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  const int m = sem.num_sources();
  Rng rng(seed);
  Matrix noise(m, n);
  for (int t = 0; t < n; ++t)
    for (int s = 0; s < m; ++s) noise(s, t) = sem.sources()[s].sample(rng);
  SampleMatrix out;
  out.values = observed_source_mixing(sem) * noise;
  for (int v : sem.observed()) out.names.push_back("V" + std::to_string(v + 1));
  return out;
}

ErrorRate normalized_error(const LinearSem& truth, const PathVerdictMatrix& verdicts) {
  const int po = truth.num_observed();
  if (verdicts.size() != po) throw Error(ErrorKind::ShapeMismatch, "verdicts must cover all observed pairs");
  const auto reach = reachability(truth.graph());
  ErrorRate e;
  for (int a = 0; a < po; ++a)
    for (int b = 0; b < po; ++b)
      if (a != b) {
        const bool says = verdicts.verdict[a][b] == Verdict::Path;
        if (says != reach(truth.observed()[a], truth.observed()[b])) ++e.wrong;
      }
  const double p = truth.num_vertices();
  e.all_pairs = e.wrong / (p * (p - 1));
  e.observed = po > 1 ? e.wrong / static_cast<double>(po * (po - 1)) : 0.0;
  return e;
}

void BenchmarkConfig::validate() const {
  if (!(edge_prob > 0 && edge_prob < 1)) throw Error(ErrorKind::InvalidArgument, "edge_prob must be in (0, 1)");
  if (!(latent_fraction >= 0 && latent_fraction < 1))
    throw Error(ErrorKind::InvalidArgument, "latent fraction must be in [0, 1)");
  if (num_graphs < 0) throw Error(ErrorKind::InvalidArgument, "num_graphs must be non-negative");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i)
    if (sample_sizes[i] < 1 || (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "sample sizes must be positive and ascending");
  for (int q : p)
    if (q < 2) throw Error(ErrorKind::InvalidArgument, "p must be at least 2");
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  BenchmarkResult res;
  if (cfg.num_graphs == 0) return res;
  for (int p : cfg.p)
    for (int n : cfg.sample_sizes) {
      std::vector<std::optional<ErrorRate>> runs(cfg.num_graphs);
#pragma omp parallel for schedule(dynamic)
      for (int g = 0; g < cfg.num_graphs; ++g) {
        const auto gs = derive_seed(cfg.seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(g)});
        try {
          const auto sem = random_latent_sem(p, cfg.edge_prob, cfg.weight, cfg.latent_fraction, gs);
          const auto data = simulate_samples(sem, n, derive_seed(gs, {static_cast<std::uint64_t>(n), 1}));
          DiscoveryConfig dc = cfg.discovery;
          dc.ica.seed = derive_seed(gs, {static_cast<std::uint64_t>(n), 2});
          dc.verdicts_only = true;
          auto r = discover(data, dc);
          causal_order_infer(r.verdicts, false);
          runs[g] = normalized_error(sem, r.verdicts);
        } catch (const Error&) {
          runs[g] = std::nullopt;
        }
      }
      BenchmarkCell cell;
      cell.p = p;
      cell.n = n;
      double sum = 0, sum2 = 0, sumo = 0;
      for (const auto& r : runs) {
        if (!r) {
          ++cell.failures;
          continue;
        }
        ++cell.graphs;
        sum += r->all_pairs;
        sum2 += r->all_pairs * r->all_pairs;
        sumo += r->observed;
      }
      if (cell.graphs > 0) {
        cell.mean_error = sum / cell.graphs;
        cell.mean_error_observed = sumo / cell.graphs;
        if (cell.graphs > 1) {
          const double var = std::max(0.0, (sum2 - cell.graphs * cell.mean_error * cell.mean_error) / (cell.graphs - 1));
          cell.stderr_ = std::sqrt(var / cell.graphs);
        }
      }
      res.cells.push_back(cell);
    }
  return res;
}

PriceTable returns_from_prices(const PriceTable& prices) {
  const auto t = prices.values.cols();
  if (static_cast<Eigen::Index>(prices.dates.size()) != t)
    throw Error(ErrorKind::ShapeMismatch, "one date per price column required");
  std::vector<int> keep;
  for (Eigen::Index c = 0; c < t; ++c)
    if (prices.values.col(c).allFinite()) keep.push_back(static_cast<int>(c));
  if (keep.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two complete dates");
  const Matrix c = prices.values(Eigen::all, keep);
  for (Eigen::Index r = 0; r < c.rows(); ++r)
    for (Eigen::Index s = 0; s < c.cols(); ++s)
      if (!(c(r, s) > 0)) {
        const auto& name = r < static_cast<Eigen::Index>(prices.names.size()) ? prices.names[r] : std::to_string(r + 1);
        throw Error(ErrorKind::NonPositivePrice,
                    "non-positive price for " + name + " on " + prices.dates[keep[s]]);
      }
  PriceTable out;
  out.names = prices.names;
  const auto m = c.cols() - 1;
  out.values = (c.rightCols(m) - c.leftCols(m)).cwiseQuotient(c.leftCols(m));
  for (std::size_t s = 1; s < keep.size(); ++s) out.dates.push_back(prices.dates[keep[s]]);
  return out;
}

}  // namespace lvlingam
