#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lvlingam/causal.hpp"
#include "lvlingam/ica.hpp"
#include "lvlingam/support.hpp"

namespace lvlingam {

struct DiscoveryConfig {
  IcaConfig ica;
  BootstrapConfig bootstrap;  // seed is derived from ica.seed
  double alpha = 0.05;
  StderrMode stderr_mode = StderrMode::Bootstrap;
  bool enumerate = false;
  bool break_cycles = false;
  /// Stop after the verdicts (the benchmark needs nothing more).
  bool verdicts_only = false;
};

struct DiscoveryResult {
  MixingEstimate estimate;
  BootstrapEnsemble ensemble;
  SupportMatrix support;
  PathVerdictMatrix verdicts;
  std::optional<OrderResult> order;
  std::vector<IndexSet> column_des;
  std::vector<IndexSet> observed_des;
  std::optional<Matrix> unique;
  std::optional<EffectCandidateSet> candidates;
  std::vector<std::string> warnings;
};

/// estimate_mixing -> bootstrap -> zero_support -> verdicts -> order ->
/// unique effects, falling back to enumeration when a column is ambiguous.
/// InconsistentVerdicts propagates unless break_cycles is set.
DiscoveryResult discover(const SampleMatrix& data, const DiscoveryConfig& cfg);

}  // namespace lvlingam
