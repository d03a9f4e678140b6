#include "lvlingam/pipeline.hpp"

#include "lvlingam/errors.hpp"
#include "lvlingam/rng.hpp"

namespace lvlingam {

DiscoveryResult discover(const SampleMatrix& data, const DiscoveryConfig& cfg) {
  DiscoveryResult r;
  r.estimate = estimate_mixing(data, cfg.ica);
  for (const auto& w : r.estimate.selection.warnings) r.warnings.push_back(w);

  BootstrapConfig bc = cfg.bootstrap;
  bc.seed = derive_seed(cfg.ica.seed, {0xb007});
  r.ensemble = bootstrap_replicates(r.estimate, cfg.ica, bc);
  for (const auto& w : r.ensemble.warnings) r.warnings.push_back(w);

  r.support = zero_support(r.ensemble, cfg.alpha, cfg.stderr_mode);
  r.verdicts = path_verdicts(r.support.support);
  if (cfg.verdicts_only) return r;

  r.order = causal_order_infer(r.verdicts, cfg.break_cycles);
  for (const auto& e : r.order->dropped)
    r.warnings.push_back("dropped verdict V" + std::to_string(e.from + 1) + " -> V" + std::to_string(e.to + 1) +
                         " to break a cycle");
  r.column_des = descendant_sets(r.support.support);
  // Verdicts may have been pruned; read des_o from the auxiliary graph.
  PathVerdictMatrix pruned = r.verdicts;
  for (const auto& e : r.order->dropped) pruned.verdict[e.from][e.to] = Verdict::NoPath;
  r.observed_des = observed_descendants(pruned);

  try {
    if (!cfg.enumerate) {
      try {
        r.unique = unique_effects(r.support.mean, r.column_des, r.observed_des);
      } catch (const IndexError& e) {
        if (e.kind() != ErrorKind::AmbiguousColumn) throw;
        r.warnings.push_back(std::string(e.what()) + " (falling back to enumeration)");
      }
    }
    if (!r.unique) r.candidates = enumerate_effect_sets(r.support.mean, r.column_des, r.observed_des);
  } catch (const IndexError& e) {
    if (e.kind() != ErrorKind::NoMatchingColumn) throw;
    r.warnings.push_back(std::string(e.what()) + "; total effects not reported");
  }
  return r;
}

}  // namespace lvlingam
