#include "lvlingam/graph_analysis.hpp"

#include <sstream>

#include "lvlingam/errors.hpp"

namespace lvlingam {

namespace {

std::string vname(int v) { return "V" + std::to_string(v + 1); }

void require_latent(const LinearSem& sem, int v) {
  if (v < 0 || v >= sem.num_vertices() || sem.is_observed(v))
    throw Error(ErrorKind::NotLatent, vname(v) + " is not a latent variable");
}

// Vertices reachable from `start` (excluding it) walking only through
// latent vertices other than `blocked`. Observed vertices are reported but
// not expanded.
std::vector<bool> latent_walk(const LinearSem& sem, int start, int blocked) {
  const Dag& g = sem.graph();
  std::vector<bool> seen(g.num_vertices(), false);
  std::vector<int> stack{start};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int c : g.children(u)) {
      if (c == blocked || seen[c]) continue;
      seen[c] = true;
      if (!sem.is_observed(c)) stack.push_back(c);
    }
  }
  return seen;
}

bool has_observed_descendant(const LinearSem& sem, int v, const std::vector<std::vector<bool>>& reach) {
  for (int o : sem.observed())
    if (reach[v][o]) return true;
  return false;
}

std::vector<std::vector<bool>> reach_table(const Dag& g) {
  const auto r = reachability(g);
  std::vector<std::vector<bool>> t(g.num_vertices(), std::vector<bool>(g.num_vertices()));
  for (int i = 0; i < g.num_vertices(); ++i)
    for (int j = 0; j < g.num_vertices(); ++j) t[i][j] = r(i, j);
  return t;
}

bool absorbable_with(const LinearSem& sem, int v, std::optional<int> target,
                     const std::vector<std::vector<bool>>& reach) {
  const bool has_obs = has_observed_descendant(sem, v, reach);
  if (!target) return !has_obs;
  const int t = *target;
  if (t < 0 || t >= sem.num_vertices() || t == v || !has_obs || !reach[v][t]) return false;
  const auto seen = latent_walk(sem, v, sem.is_observed(t) ? -1 : t);
  for (int o : sem.observed())
    if (seen[o] && o != t) return false;
  return true;
}

}  // namespace

bool is_absorbable(const LinearSem& sem, int latent_v, std::optional<int> target) {
  require_latent(sem, latent_v);
  return absorbable_with(sem, latent_v, target, reach_table(sem.graph()));
}

std::vector<std::optional<int>> absorb_targets(const LinearSem& sem, int latent_v) {
  require_latent(sem, latent_v);
  const auto reach = reach_table(sem.graph());
  std::vector<std::optional<int>> out;
  if (absorbable_with(sem, latent_v, std::nullopt, reach)) {
    out.push_back(std::nullopt);
    return out;
  }
  for (int o : sem.observed())
    if (absorbable_with(sem, latent_v, o, reach)) out.push_back(o);
  for (int l : sem.latent())
    if (absorbable_with(sem, latent_v, l, reach)) out.push_back(l);
  return out;
}

AbsorbResult apply_absorb(const LinearSem& sem, const AbsorbAction& action) {
  const int v = action.absorbed;
  require_latent(sem, v);
  if (!is_absorbable(sem, v, action.target)) {
    std::ostringstream os;
    os << vname(v) << " cannot be absorbed into " << (action.target ? vname(*action.target) : "Empty");
    throw Error(ErrorKind::NotAbsorbable, os.str());
  }
  const int p = sem.num_vertices();
  const Matrix& a = sem.graph().adjacency();
  Matrix mix = sem.noise_mix();
  AbsorbAction done = action;
  done.scalar = 0.0;
  if (action.target) {
    const Matrix b = total_effect_matrix(sem);
    done.scalar = b(*action.target, v);
    mix.row(*action.target) += done.scalar * mix.row(v);
  }
  mix.row(v).setZero();

  // With zero noise, V_v is a linear function of its parents; substitute it
  // into its children so every remaining total effect is preserved.
  const Matrix spliced = a + a.col(v) * a.row(v);
  std::vector<int> map(p, -1), keep;
  for (int u = 0; u < p; ++u)
    if (u != v) {
      map[u] = static_cast<int>(keep.size());
      keep.push_back(u);
    }
  std::vector<Edge> edges;
  for (int to : keep)
    for (int from : keep)
      if (spliced(to, from) != 0.0) edges.push_back({map[from], map[to], spliced(to, from)});
  std::vector<int> observed;
  for (int o : sem.observed()) observed.push_back(map[o]);
  Matrix new_mix = mix(keep, Eigen::all);
  LinearSem out(Dag(p - 1, std::move(edges)), std::move(observed), sem.sources(), std::move(new_mix));
  return {std::move(out), std::move(map), done};
}

MinimalityReport minimality_report(const LinearSem& sem) {
  MinimalityReport r;
  for (int l : sem.latent()) {
    auto targets = absorb_targets(sem, l);
    if (!targets.empty()) r.absorbable.push_back({l, std::move(targets)});
  }
  r.is_minimal = r.absorbable.empty();
  r.count_identifiable = r.is_minimal;
  return r;
}

Reduction minimal_reduction(const LinearSem& sem) {
  Reduction red{sem, {}, {}, minimality_report(sem)};
  std::vector<int> to_orig(sem.num_vertices());
  for (int v = 0; v < sem.num_vertices(); ++v) to_orig[v] = v;

  auto next_action = [](const LinearSem& cur) -> std::optional<AbsorbAction> {
    const auto reach = reach_table(cur.graph());
    for (int l : cur.latent())
      if (absorbable_with(cur, l, std::nullopt, reach)) return AbsorbAction{l, std::nullopt, 0.0};
    for (int l : cur.latent()) {
      for (int o : cur.observed())
        if (absorbable_with(cur, l, o, reach)) return AbsorbAction{l, o, 0.0};
      for (int t : cur.latent())
        if (absorbable_with(cur, l, t, reach)) return AbsorbAction{l, t, 0.0};
    }
    return std::nullopt;
  };

  while (auto act = next_action(red.sem)) {
    auto res = apply_absorb(red.sem, *act);
    AbsorbAction orig = res.action;
    orig.absorbed = to_orig[act->absorbed];
    if (orig.target) orig.target = to_orig[*orig.target];
    red.actions.push_back(orig);
    std::vector<int> next(res.sem.num_vertices());
    for (int u = 0; u < static_cast<int>(res.index_map.size()); ++u)
      if (res.index_map[u] >= 0) next[res.index_map[u]] = to_orig[u];
    to_orig = std::move(next);
    red.sem = std::move(res.sem);
  }
  red.index_map.assign(sem.num_vertices(), -1);
  for (int u = 0; u < static_cast<int>(to_orig.size()); ++u) red.index_map[to_orig[u]] = u;
  return red;
}

}  // namespace lvlingam
