#include "lvlingam/sem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>

#include "lvlingam/errors.hpp"

namespace lvlingam {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); }

// Depth-first search for one directed cycle among `pending` vertices.
std::vector<int> find_cycle(const Dag& g) {
  const int n = g.num_vertices();
  std::vector<int> color(n, 0), parent(n, -1);
  std::vector<int> cycle;
  std::function<bool(int)> dfs = [&](int u) {
    color[u] = 1;
    for (int c : g.children(u)) {
      if (color[c] == 1) {
        for (int x = u; x != c; x = parent[x]) cycle.push_back(x);
        cycle.push_back(c);
        std::reverse(cycle.begin(), cycle.end());
        return true;
      }
      if (color[c] == 0) {
        parent[c] = u;
        if (dfs(c)) return true;
      }
    }
    color[u] = 2;
    return false;
  };
  for (int v = 0; v < n; ++v)
    if (color[v] == 0 && dfs(v)) break;
  return cycle;
}

// (I - X)^{-1} for nilpotent X (X(to, from) layout). Forward substitution in
// a topological order of X's support keeps structural zeros exactly zero;
// the LU estimate only guards against malformed input.
Matrix inverse_checked(const Matrix& x, const char* what) {
  const auto p = x.rows();
  if (p == 0) return x;
  const Matrix m = Matrix::Identity(p, p) - x;
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc >= 1e-12)) {
    std::ostringstream os;
    os << what << ": reciprocal condition estimate " << rc << " below 1e-12";
    throw Error(ErrorKind::IllConditioned, os.str());
  }
  std::vector<int> indeg(p, 0), seq;
  for (Eigen::Index t = 0; t < p; ++t)
    for (Eigen::Index f = 0; f < p; ++f)
      if (x(t, f) != 0.0) ++indeg[t];
  std::vector<int> ready;
  for (int v = static_cast<int>(p) - 1; v >= 0; --v)
    if (indeg[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    const int u = ready.back();
    ready.pop_back();
    seq.push_back(u);
    for (Eigen::Index t = 0; t < p; ++t)
      if (x(t, u) != 0.0 && --indeg[t] == 0) ready.push_back(static_cast<int>(t));
  }
  if (static_cast<Eigen::Index>(seq.size()) != p) return lu.inverse();
  Matrix b = Matrix::Zero(p, p);
  for (std::size_t a = 0; a < seq.size(); ++a) {
    const int i = seq[a];
    b(i, i) = 1.0;
    for (std::size_t c = a + 1; c < seq.size(); ++c) {
      const int v = seq[c];
      double s = 0.0;
      for (std::size_t d = a; d < c; ++d) s += x(v, seq[d]) * b(seq[d], i);
      b(v, i) = s;
    }
  }
  return b;
}

}  // namespace

Dag::Dag(int num_vertices, std::vector<Edge> edges)
    : n_(num_vertices), edges_(std::move(edges)) {
  if (n_ < 1) invalid("graph needs at least one vertex");
  children_.assign(n_, {});
  parents_.assign(n_, {});
  adj_ = Matrix::Zero(n_, n_);
  for (const auto& e : edges_) {
    if (e.from < 0 || e.from >= n_ || e.to < 0 || e.to >= n_)
      invalid("edge endpoint out of range");
    if (e.from == e.to) invalid("self loop on vertex " + std::to_string(e.from + 1));
    if (!std::isfinite(e.weight) || e.weight == 0.0)
      invalid("edge weight must be finite and nonzero");
    if (adj_(e.to, e.from) != 0.0) invalid("duplicate edge");
    adj_(e.to, e.from) = e.weight;
    children_[e.from].push_back(e.to);
    parents_[e.to].push_back(e.from);
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());
  for (auto& p : parents_) std::sort(p.begin(), p.end());
}

bool Dag::has_edge(int from, int to) const { return adj_(to, from) != 0.0; }

double Dag::weight(int from, int to) const { return adj_(to, from); }

Dag Dag::with_weight(int from, int to, double w) const {
  if (!has_edge(from, to)) invalid("no edge to reweight");
  auto edges = edges_;
  for (auto& e : edges)
    if (e.from == from && e.to == to) e.weight = w;
  return Dag(n_, std::move(edges));
}

CausalOrder::CausalOrder(std::vector<int> sequence) : sequence_(std::move(sequence)) {
  position_.assign(sequence_.size(), -1);
  for (std::size_t k = 0; k < sequence_.size(); ++k) {
    const int v = sequence_[k];
    if (v < 0 || v >= size() || position_[v] != -1) invalid("causal order is not a permutation");
    position_[v] = static_cast<int>(k);
  }
}

bool CausalOrder::respects(const Dag& g) const {
  if (g.num_vertices() != size()) return false;
  return std::all_of(g.edges().begin(), g.edges().end(),
                     [&](const Edge& e) { return position(e.from) < position(e.to); });
}

CausalOrder CausalOrder::restricted_to(std::span<const int> subset) const {
  std::vector<int> idx(subset.size());
  for (std::size_t a = 0; a < subset.size(); ++a) idx[a] = static_cast<int>(a);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return position(subset[a]) < position(subset[b]); });
  return CausalOrder(std::move(idx));
}

CausalOrder validate_dag(const Dag& g) {
  const int n = g.num_vertices();
  std::vector<int> indeg(n);
  for (int v = 0; v < n; ++v) indeg[v] = static_cast<int>(g.parents(v).size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<int> seq;
  seq.reserve(n);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    seq.push_back(u);
    for (int c : g.children(u))
      if (--indeg[c] == 0) ready.push(c);
  }
  if (static_cast<int>(seq.size()) != n) {
    auto cycle = find_cycle(g);
    std::ostringstream os;
    os << "graph has a directed cycle:";
    for (int v : cycle) os << " V" << v + 1;
    throw CycleError(ErrorKind::CycleDetected, std::move(cycle), os.str());
  }
  return CausalOrder(std::move(seq));
}

NoiseSpec NoiseSpec::unit_uniform() {
  const double h = std::sqrt(3.0);
  return {NoiseFamily::Uniform, {-h, h}};
}

void NoiseSpec::validate() const {
  if (params.size() != 2) invalid("noise spec needs two parameters");
  if (!std::isfinite(params[0]) || !std::isfinite(params[1])) invalid("noise parameter not finite");
  if (family == NoiseFamily::Uniform && !(params[0] < params[1])) invalid("uniform noise needs lo < hi");
  if (family != NoiseFamily::Uniform && !(params[1] > 0)) invalid("noise scale must be positive");
}

double NoiseSpec::sample(Rng& rng) const {
  switch (family) {
    case NoiseFamily::Uniform: return rng.uniform(params[0], params[1]);
    case NoiseFamily::Laplace: return rng.laplace(params[0], params[1]);
    case NoiseFamily::Gaussian: return params[0] + params[1] * rng.normal();
  }
  return 0.0;
}

LinearSem::LinearSem(Dag graph, std::vector<int> observed, std::vector<NoiseSpec> sources,
                     std::optional<Matrix> noise_mix)
    : graph_(std::move(graph)),
      observed_(std::move(observed)),
      order_(validate_dag(graph_)) {
  const int p = graph_.num_vertices();
  std::sort(observed_.begin(), observed_.end());
  if (observed_.empty()) invalid("at least one observed variable required");
  if (std::adjacent_find(observed_.begin(), observed_.end()) != observed_.end())
    invalid("duplicate observed index");
  observed_slot_.assign(p, -1);
  for (std::size_t s = 0; s < observed_.size(); ++s) {
    const int v = observed_[s];
    if (v < 0 || v >= p) invalid("observed index out of range");
    observed_slot_[v] = static_cast<int>(s);
  }
  for (int v = 0; v < p; ++v)
    if (observed_slot_[v] < 0) latent_.push_back(v);

  noise_mix_ = noise_mix ? std::move(*noise_mix) : Matrix::Identity(p, p);
  if (noise_mix_.rows() != p || noise_mix_.cols() < 1)
    throw Error(ErrorKind::ShapeMismatch, "noise_mix must have one row per vertex");
  if (!noise_mix_.allFinite()) invalid("noise_mix has non-finite entries");
  const auto m = noise_mix_.cols();
  if (sources.empty()) sources.assign(m, NoiseSpec::unit_uniform());
  if (static_cast<Eigen::Index>(sources.size()) != m)
    throw Error(ErrorKind::ShapeMismatch, "one noise spec per source required");
  for (const auto& s : sources) s.validate();
  sources_ = std::move(sources);
}

Matrix total_effect_matrix(const Dag& g) {
  return inverse_checked(g.adjacency(), "I - A");
}

Matrix total_effect_matrix(const LinearSem& sem) { return total_effect_matrix(sem.graph()); }

double path_weight(const Dag& g, std::span<const int> path) {
  if (path.empty()) invalid("empty path");
  double w = 1.0;
  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const int a = path[s], b = path[s + 1];
    if (a < 0 || b < 0 || a >= g.num_vertices() || b >= g.num_vertices() || !g.has_edge(a, b)) {
      std::ostringstream os;
      os << "no edge V" << a + 1 << " -> V" << b + 1;
      throw Error(ErrorKind::NotAPath, os.str());
    }
    w *= g.weight(a, b);
  }
  return w;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> reachability(const Dag& g) {
  const int p = g.num_vertices();
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> r =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(p, p, false);
  const auto order = validate_dag(g).sequence();
  // Reverse topological sweep: reach(i) = {i} ∪ reach(children).
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int i = *it;
    r(i, i) = true;
    for (int c : g.children(i)) r.row(i) = r.row(i) || r.row(c);
  }
  return r;
}

namespace {

struct Blocks {
  Matrix aoo, aol, alo, all;
};

Blocks split(const LinearSem& sem) {
  const Matrix& a = sem.graph().adjacency();
  const auto& o = sem.observed();
  const auto& l = sem.latent();
  Blocks b;
  b.aoo = a(o, o);
  b.aol = a(o, l);
  b.alo = a(l, o);
  b.all = a(l, l);
  return b;
}

}  // namespace

Matrix reduced_direct_effects(const LinearSem& sem) {
  const auto b = split(sem);
  if (sem.num_latent() == 0) return b.aoo;
  const Matrix il = inverse_checked(b.all, "I - A_ll");
  return b.aoo + b.aol * il * b.alo;
}

Matrix observed_source_mixing(const LinearSem& sem) {
  const Matrix bfull = total_effect_matrix(sem);
  return bfull(sem.observed(), Eigen::all) * sem.noise_mix();
}

MixingMatrix observed_mixing(const LinearSem& sem) {
  const int po = sem.num_observed();
  const int pl = sem.num_latent();
  const auto b = split(sem);
  const Matrix d = reduced_direct_effects(sem);
  const Matrix bo = inverse_checked(d, "I - D");
  MixingMatrix m;
  m.entries.resize(po, po + pl);
  m.entries.leftCols(po) = bo;
  if (pl > 0) {
    const Matrix il = inverse_checked(b.all, "I - A_ll");
    m.entries.rightCols(pl) = bo * b.aol * il;
  }
  for (int v : sem.observed()) m.labels.push_back({ColumnKind::Observed, v, {}});
  for (int v : sem.latent()) m.labels.push_back({ColumnKind::Latent, v, {}});
  m.scale = ScaleConvention::Exact;
  return m;
}

MixingMatrix normalize_columns(MixingMatrix m) {
  for (Eigen::Index c = 0; c < m.entries.cols(); ++c) {
    Eigen::Index r;
    const double mag = m.entries.col(c).cwiseAbs().maxCoeff(&r);
    if (mag > 0) m.entries.col(c) /= m.entries(r, c);
  }
  m.scale = ScaleConvention::Normalized;
  return m;
}

bool columns_dependent(const Vector& a, const Vector& b, double tol) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return na == nb;
  const Vector ua = a / na, ub = b / nb;
  return std::min((ua - ub).norm(), (ua + ub).norm()) <= tol;
}

ReducedMixing reduce_mixing(const MixingMatrix& m, double tol) {
  if (m.scale != ScaleConvention::Exact)
    invalid("reduce_mixing expects an exact-mode matrix");
  const int k = m.cols();
  if (static_cast<int>(m.labels.size()) != k)
    throw Error(ErrorKind::ShapeMismatch, "one label per column required");

  std::vector<int> obs, lat;
  for (int c = 0; c < k; ++c) {
    if (m.labels[c].kind == ColumnKind::Observed) obs.push_back(c);
    else lat.push_back(c);
  }
  for (std::size_t a = 0; a < obs.size(); ++a)
    for (std::size_t b = a + 1; b < obs.size(); ++b)
      if (columns_dependent(m.entries.col(obs[a]), m.entries.col(obs[b]), tol)) {
        std::ostringstream os;
        os << "observed columns V" << m.labels[obs[a]].vertex + 1 << " and V"
           << m.labels[obs[b]].vertex + 1 << " are linearly dependent (faithfulness violated)";
        throw Error(ErrorKind::ObservedColumnsDependent, os.str());
      }
  std::sort(lat.begin(), lat.end(),
            [&](int a, int b) { return m.labels[a].vertex < m.labels[b].vertex; });

  std::vector<bool> alive(k, true);
  std::vector<ColumnLabel> labels = m.labels;
  ReducedMixing out;
  const double scale = std::max(1.0, m.entries.cwiseAbs().maxCoeff());
  for (int c : lat) {
    const Vector col = m.entries.col(c);
    if (col.cwiseAbs().maxCoeff() <= tol * scale) {
      alive[c] = false;
      out.log.push_back({labels[c].vertex, std::nullopt, 0.0});
      continue;
    }
    // Observed partners first, then latent, each by ascending vertex.
    std::vector<int> partners;
    for (int o : obs) partners.push_back(o);
    std::vector<int> lp;
    for (int l : lat)
      if (l != c && alive[l]) lp.push_back(l);
    std::sort(lp.begin(), lp.end(), [&](int a, int b) { return labels[a].vertex < labels[b].vertex; });
    partners.insert(partners.end(), lp.begin(), lp.end());
    std::sort(partners.begin(), partners.begin() + static_cast<long>(obs.size()),
              [&](int a, int b) { return labels[a].vertex < labels[b].vertex; });
    for (int q : partners) {
      if (!alive[q]) continue;
      const Vector other = m.entries.col(q);
      if (!columns_dependent(col, other, tol)) continue;
      const double alpha = col.dot(other) / other.squaredNorm();
      alive[c] = false;
      labels[q].absorbed.push_back(labels[c].vertex);
      for (int v : labels[c].absorbed) labels[q].absorbed.push_back(v);
      out.log.push_back({labels[c].vertex, labels[q].vertex, alpha});
      break;
    }
  }
  std::vector<int> keep;
  for (int c = 0; c < k; ++c)
    if (alive[c]) keep.push_back(c);
  out.matrix.entries = m.entries(Eigen::all, keep);
  for (int c : keep) out.matrix.labels.push_back(labels[c]);
  out.matrix.scale = ScaleConvention::Exact;
  return out;
}

bool is_faithful(const Dag& g, double tol) {
  const int p = g.num_vertices();
  const Matrix b = total_effect_matrix(g);
  const Matrix babs = inverse_checked(g.adjacency().cwiseAbs(), "I - |A|");
  const auto r = reachability(g);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (r(i, j) && std::abs(b(j, i)) <= tol * babs(j, i)) return false;
  return true;
}

}  // namespace lvlingam
