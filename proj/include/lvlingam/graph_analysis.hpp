#pragma once

#include <optional>
#include <vector>

#include "lvlingam/sem.hpp"

namespace lvlingam {

/// Move a latent's noise into `target` (or drop it when target is empty).
struct AbsorbAction {
  int absorbed = -1;
  std::optional<int> target;  // nullopt = Empty
  double scalar = 0.0;        // B(target, absorbed); 0 for Empty
  bool operator==(const AbsorbAction&) const = default;
};

struct AbsorbableEntry {
  int latent = -1;
  std::vector<std::optional<int>> targets;
};

struct MinimalityReport {
  bool is_minimal = true;
  bool count_identifiable = true;
  std::vector<AbsorbableEntry> absorbable;
};

/// Purely graphical test. Empty target: no observed descendant. Observed
/// target t: every path from the latent to an observed vertex meets t first.
/// Latent target t: t is reachable, and no observed vertex is reachable
/// through latents while avoiding t.
bool is_absorbable(const LinearSem& sem, int latent_v, std::optional<int> target);

/// All legal targets of one latent, Empty first, then observed, then latent,
/// each ascending.
std::vector<std::optional<int>> absorb_targets(const LinearSem& sem, int latent_v);

struct AbsorbResult {
  LinearSem sem;
  std::vector<int> index_map;  // old vertex -> new vertex, -1 when removed
  AbsorbAction action;         // with scalar filled in
};

/// Rewrites noise_mix (target row += scalar * absorbed row), then removes the
/// absorbed vertex, rerouting parent -> child effects through it.
AbsorbResult apply_absorb(const LinearSem& sem, const AbsorbAction& action);

MinimalityReport minimality_report(const LinearSem& sem);

struct Reduction {
  LinearSem sem;
  std::vector<AbsorbAction> actions;   // vertex indices of the input SEM
  std::vector<int> index_map;          // input vertex -> reduced vertex or -1
  MinimalityReport report;             // of the input SEM
};

Reduction minimal_reduction(const LinearSem& sem);

}  // namespace lvlingam
