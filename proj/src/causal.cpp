#include "lvlingam/causal.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "lvlingam/errors.hpp"

namespace lvlingam {

PairVerdict pairwise_path(const BoolMatrix& support, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= support.rows() || j >= support.rows())
    throw Error(ErrorKind::InvalidArgument, "pairwise_path needs two distinct rows");
  PairVerdict v;
  for (Eigen::Index c = 0; c < support.cols(); ++c) {
    if (!support(i, c) && support(j, c)) ++v.n0s;
    if (support(i, c) && !support(j, c)) ++v.ns0;
  }
  auto one_way = [](int towards, int against) {
    if (towards > 0 && against == 0) return Verdict::Path;
    if (towards == 0 && against == 0) return Verdict::Undecided;
    return Verdict::NoPath;
  };
  v.forward = one_way(v.n0s, v.ns0);
  v.backward = one_way(v.ns0, v.n0s);
  return v;
}

PathVerdictMatrix path_verdicts(const BoolMatrix& support) {
  const int p = static_cast<int>(support.rows());
  PathVerdictMatrix m;
  m.verdict.assign(p, std::vector<Verdict>(p, Verdict::NoPath));
  m.counts.assign(p, std::vector<std::array<int, 2>>(p, {0, 0}));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const auto v = pairwise_path(support, i, j);
      m.verdict[i][j] = v.forward;
      m.verdict[j][i] = v.backward;
      m.counts[i][j] = {v.n0s, v.ns0};
      m.counts[j][i] = {v.ns0, v.n0s};
    }
  return m;
}

OrderResult causal_order_infer(const PathVerdictMatrix& v, bool break_cycles) {
  const int p = v.size();
  std::vector<Edge> edges;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && v.verdict[i][j] == Verdict::Path)
        edges.push_back({i, j, static_cast<double>(v.counts[i][j][0])});
  std::vector<Edge> dropped;
  for (;;) {
    Dag aux(p, edges);
    try {
      auto order = validate_dag(aux);
      return {std::move(aux), std::move(order), std::move(dropped)};
    } catch (const CycleError& e) {
      if (!break_cycles) {
        std::ostringstream os;
        os << "path verdicts form a cycle:";
        for (int x : e.cycle()) os << " V" << x + 1;
        os << "; rerun with --break-cycles to drop the weakest verdict";
        throw CycleError(ErrorKind::InconsistentVerdicts, e.cycle(), os.str());
      }
      const auto& cyc = e.cycle();
      std::size_t worst = 0;
      double worst_w = 0;
      for (std::size_t s = 0; s < cyc.size(); ++s) {
        const int a = cyc[s], b = cyc[(s + 1) % cyc.size()];
        auto it = std::find_if(edges.begin(), edges.end(),
                               [&](const Edge& x) { return x.from == a && x.to == b; });
        const auto idx = static_cast<std::size_t>(it - edges.begin());
        if (s == 0 || it->weight < worst_w ||
            (it->weight == worst_w && std::make_pair(a, b) < std::make_pair(edges[worst].from, edges[worst].to))) {
          worst = idx;
          worst_w = it->weight;
        }
      }
      dropped.push_back(edges[worst]);
      edges.erase(edges.begin() + static_cast<long>(worst));
    }
  }
}

std::vector<IndexSet> descendant_sets(const BoolMatrix& support) {
  std::vector<IndexSet> out(support.cols());
  for (Eigen::Index c = 0; c < support.cols(); ++c)
    for (Eigen::Index r = 0; r < support.rows(); ++r)
      if (support(r, c)) out[c].push_back(static_cast<int>(r));
  return out;
}

std::vector<IndexSet> observed_descendants(const PathVerdictMatrix& v) {
  std::vector<IndexSet> out(v.size());
  for (int i = 0; i < v.size(); ++i)
    for (int j = 0; j < v.size(); ++j)
      if (i == j || v.verdict[i][j] == Verdict::Path) out[i].push_back(j);
  return out;
}

namespace {

std::vector<std::vector<int>> candidate_columns(const Matrix& mixing, const std::vector<IndexSet>& column_des,
                                                const std::vector<IndexSet>& observed_des) {
  if (static_cast<Eigen::Index>(column_des.size()) != mixing.cols() ||
      static_cast<Eigen::Index>(observed_des.size()) != mixing.rows())
    throw Error(ErrorKind::ShapeMismatch, "descendant sets do not match the mixing matrix");
  std::vector<std::vector<int>> cands(observed_des.size());
  for (std::size_t i = 0; i < observed_des.size(); ++i) {
    for (std::size_t c = 0; c < column_des.size(); ++c)
      if (column_des[c] == observed_des[i]) cands[i].push_back(static_cast<int>(c));
    if (cands[i].empty())
      throw IndexError(ErrorKind::NoMatchingColumn, static_cast<int>(i),
                       "no column matches the descendant set of variable " + std::to_string(i + 1));
  }
  return cands;
}

}  // namespace

EffectCandidateSet enumerate_effect_sets(const Matrix& mixing, const std::vector<IndexSet>& column_des,
                                         const std::vector<IndexSet>& observed_des,
                                         const EnumerateOptions& opt) {
  const auto cands = candidate_columns(mixing, column_des, observed_des);
  const int p = static_cast<int>(cands.size());
  EffectCandidateSet out;
  out.multiplicity = 1;
  for (const auto& c : cands) {
    out.r.push_back(static_cast<int>(c.size()));
    out.multiplicity *= static_cast<long long>(c.size());
    if (out.multiplicity > opt.max_candidates)
      throw Error(ErrorKind::InvalidArgument, "candidate count exceeds the enumeration cap");
  }
  std::vector<int> pick(p, 0);
  for (;;) {
    EffectCandidate cand;
    cand.matrix.resize(p, p);
    for (int i = 0; i < p; ++i) {
      const int c = cands[i][pick[i]];
      cand.choice.push_back(c);
      cand.matrix.col(i) = mixing.col(c) / mixing(i, c);
    }
    Eigen::PartialPivLU<Matrix> lu(cand.matrix);
    if (!(lu.rcond() >= opt.singular_rcond)) {
      ++out.rejected_singular;
    } else {
      for (const auto& prev : out.candidates)
        if ((prev.matrix - cand.matrix).cwiseAbs().maxCoeff() <= opt.duplicate_tol) out.has_duplicates = true;
      out.candidates.push_back(std::move(cand));
    }
    int pos = p - 1;
    while (pos >= 0 && ++pick[pos] == out.r[pos]) pick[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

Matrix unique_effects(const Matrix& mixing, const std::vector<IndexSet>& column_des,
                      const std::vector<IndexSet>& observed_des) {
  const auto cands = candidate_columns(mixing, column_des, observed_des);
  const int p = static_cast<int>(cands.size());
  Matrix b(p, p);
  for (int i = 0; i < p; ++i) {
    if (cands[i].size() > 1)
      throw IndexError(ErrorKind::AmbiguousColumn, i,
                       std::to_string(cands[i].size()) + " columns share the descendant set of variable " +
                           std::to_string(i + 1) + "; enumerate the candidates instead");
    b.col(i) = mixing.col(cands[i][0]) / mixing(i, cands[i][0]);
  }
  return b;
}

namespace {

[[noreturn]] void unsupported(const std::string& msg) { throw Error(ErrorKind::StructureUnsupported, msg); }

std::vector<int> bfs_path(const Dag& g, int from, int to, int avoid) {
  std::vector<int> prev(g.num_vertices(), -2);
  std::queue<int> q;
  q.push(from);
  prev[from] = -1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (u == to) break;
    for (int c : g.children(u))
      if (c != avoid && prev[c] == -2) {
        prev[c] = u;
        q.push(c);
      }
  }
  if (prev[to] == -2) return {};
  std::vector<int> path;
  for (int x = to; x != -1; x = prev[x]) path.push_back(x);
  std::reverse(path.begin(), path.end());
  return path;
}

Matrix effects_avoiding(const Dag& g, int v) {
  std::vector<Edge> kept;
  for (const auto& e : g.edges())
    if (e.from != v && e.to != v) kept.push_back(e);
  return total_effect_matrix(Dag(g.num_vertices(), std::move(kept)));
}

void check_path(const Dag& g, const std::vector<int>& path, int from, int to, int avoid, const char* what) {
  if (path.size() < 2 || path.front() != from || path.back() != to)
    unsupported(std::string(what) + " path has the wrong endpoints");
  try {
    path_weight(g, path);
  } catch (const Error&) {
    unsupported(std::string(what) + " is not a directed path");
  }
  if (avoid >= 0 && std::find(path.begin(), path.end(), avoid) != path.end())
    unsupported(std::string(what) + " path must avoid V" + std::to_string(avoid + 1));
}

}  // namespace

PathTriple default_path_triple(const LinearSem& sem, int i, int j, int k) {
  const Dag& g = sem.graph();
  PathTriple t;
  for (int u1 : g.children(k)) {
    const auto a = bfs_path(g, u1, i, -1);
    if (a.empty()) continue;
    for (int u2 : g.children(k)) {
      if (u2 == u1 || u2 == i) continue;
      const auto b = bfs_path(g, u2, j, i);
      if (b.empty()) continue;
      t.to_i = a;
      t.to_i.insert(t.to_i.begin(), k);
      t.to_j = b;
      t.to_j.insert(t.to_j.begin(), k);
      const auto c = bfs_path(g, i, j, -1);
      if (c.empty()) unsupported("no path from V_i to V_j");
      t.i_to_j = c;
      return t;
    }
  }
  unsupported("no pair of paths from V_k with distinct first steps");
}

LinearSem construct_equivalent_model(const LinearSem& sem, int i, int j, int k, const PathTriple& paths) {
  const Dag& g = sem.graph();
  const int p = g.num_vertices();
  if (i < 0 || j < 0 || k < 0 || i >= p || j >= p || k >= p || i == j || i == k || j == k)
    throw Error(ErrorKind::InvalidArgument, "i, j, k must be distinct vertices");
  if (!sem.is_observed(i) || !sem.is_observed(j) || sem.is_observed(k))
    unsupported("V_i and V_j must be observed and V_k latent");
  if (!g.parents(k).empty()) unsupported("V_k must have no parents");
  const auto reach = reachability(g);
  if (!reach(k, i) || !reach(i, j)) unsupported("need paths V_k ~> V_i and V_i ~> V_j");
  for (int o : sem.observed())
    if (o != i && o != j && reach(k, o)) unsupported("another observed variable descends from V_k");
  for (int u = 0; u < p; ++u)
    if (u != i && u != k && reach(u, i) && sem.noise_mix().row(u).cwiseAbs().maxCoeff() != 0.0)
      unsupported("an ancestor of V_i other than V_k carries its own noise");

  const Matrix b = total_effect_matrix(g);
  const Matrix bni = effects_avoiding(g, i);
  const double alpha = b(i, k), beta = b(j, i), gamma = bni(j, k);
  const double scale = b.cwiseAbs().maxCoeff();
  if (!reach(k, j) || gamma == 0.0 || std::abs(gamma) <= 1e-12 * scale)
    unsupported("no confounding path from V_k to V_j that avoids V_i");
  if (std::abs(alpha) <= 1e-12 * scale) unsupported("total effect of V_k on V_i is zero");

  check_path(g, paths.to_i, k, i, -1, "k->i");
  check_path(g, paths.to_j, k, j, i, "k->j");
  check_path(g, paths.i_to_j, i, j, -1, "i->j");
  const int u1 = paths.to_i[1], u2 = paths.to_j[1], u3 = paths.i_to_j[1];
  if (u1 == u2) unsupported("the two paths out of V_k must start on different edges");

  // Total effects from children of V_k and V_i are untouched by the three
  // reweighted edges, so the new weights solve two small linear systems.
  double r1 = 1.0, r2 = -gamma / alpha;
  for (int c : g.children(k))
    if (c != u1 && c != u2) {
      r1 -= g.weight(k, c) * b(i, c);
      r2 -= g.weight(k, c) * bni(j, c);
    }
  Eigen::Matrix2d m;
  m << b(i, u1), b(i, u2), bni(j, u1), bni(j, u2);
  if (std::abs(m.determinant()) <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    unsupported("the chosen first steps cannot set both effects of V_k independently");
  const Eigen::Vector2d x = m.partialPivLu().solve(Eigen::Vector2d(r1, r2));

  double r3 = beta + gamma / alpha;
  for (int d : g.children(i))
    if (d != u3) r3 -= g.weight(i, d) * b(j, d);
  if (std::abs(b(j, u3)) <= 1e-12 * scale) unsupported("chosen V_i -> V_j path carries no effect");
  const double x3 = r3 / b(j, u3);

  std::vector<Edge> edges;
  auto set = [&](int from, int to) -> std::optional<double> {
    if (from == k && to == u1) return x(0);
    if (from == k && to == u2) return x(1);
    if (from == i && to == u3) return x3;
    return std::nullopt;
  };
  for (const auto& e : g.edges()) {
    const double w = set(e.from, e.to).value_or(e.weight);
    if (w != 0.0) edges.push_back({e.from, e.to, w});
  }
  Matrix mix = sem.noise_mix();
  const Vector old_i = mix.row(i).transpose();
  mix.row(i) = alpha * mix.row(k);
  mix.row(k) = old_i.transpose();
  return LinearSem(Dag(p, std::move(edges)), sem.observed(), sem.sources(), std::move(mix));
}

}  // namespace lvlingam
