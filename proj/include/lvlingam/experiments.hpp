#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvlingam/causal.hpp"
#include "lvlingam/ica.hpp"
#include "lvlingam/pipeline.hpp"

namespace lvlingam {

/// Uniform random causal order, each order-respecting pair an edge with
/// probability edge_prob, every weight equal to `weight`.
Dag random_dag(int p, double edge_prob, double weight, std::uint64_t seed);

/// random_dag plus floor(latent_fraction * p) uniformly chosen latent vertices.
LinearSem random_latent_sem(int p, double edge_prob, double weight, double latent_fraction,
                            std::uint64_t seed);

/// Observed rows of B * noise_mix * N, sources drawn per the SEM's specs.
SampleMatrix simulate_samples(const LinearSem& sem, int n, std::uint64_t seed);

struct ErrorRate {
  int wrong = 0;            // ordered observed pairs with the wrong Path/NoPath call
  double all_pairs = 0.0;   // wrong / (p (p - 1)), p counting latents too
  double observed = 0.0;    // wrong / (p_o (p_o - 1))
};

/// Undecided is read as "no path".
ErrorRate normalized_error(const LinearSem& truth, const PathVerdictMatrix& verdicts);

struct BenchmarkConfig {
  std::vector<int> p{6};
  double edge_prob = 0.3;
  double weight = 0.9;
  double latent_fraction = 0.5;
  std::vector<int> sample_sizes{1000};
  int num_graphs = 50;
  std::uint64_t seed = 0;
  DiscoveryConfig discovery;

  void validate() const;
};

struct BenchmarkCell {
  int p = 0;
  int n = 0;
  double mean_error = 0.0;       // p(p-1) denominator
  double stderr_ = 0.0;
  double mean_error_observed = 0.0;  // p_o(p_o-1) denominator
  int graphs = 0;                // successful runs
  int failures = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkCell> cells;
};

/// Graph g at size p is shared across sample sizes, so trends in n compare
/// the same graphs.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

/// Rows are dates; series values may be NaN for a missing price.
struct PriceTable {
  std::vector<std::string> dates;
  std::vector<std::string> names;
  Matrix values;  // series x dates
};

/// R(t) = (c(t) - c(t-1)) / c(t-1) per series after dropping dates with a
/// missing value in any series. Output dates start at the second kept date.
PriceTable returns_from_prices(const PriceTable& prices);

}  // namespace lvlingam
