#pragma once

// Graphs from the worked examples plus small random generators shared by the
// unit and acceptance tests. Vertex names are 1-based in comments, indices
// are 0-based in code.

#include <vector>

#include "lvlingam/rng.hpp"
#include "lvlingam/sem.hpp"
#include "lvlingam/support.hpp"

namespace fx {

using lvlingam::Dag;
using lvlingam::Edge;
using lvlingam::LinearSem;
using lvlingam::Matrix;

// V3 -> V1, V3 -> V2, V1 -> V2; V3 latent.
inline LinearSem confounded_pair(double w = 0.9) {
  return LinearSem(Dag(3, {{2, 0, w}, {2, 1, w}, {0, 1, w}}), {0, 1});
}

// V1 <- V3 -> V2; V3 latent.
inline LinearSem fork(double w = 0.9) {
  return LinearSem(Dag(3, {{2, 0, w}, {2, 1, w}}), {0, 1});
}

// Vk -> Vi (alpha), Vk -> Vj (gamma), Vi -> Vj (beta) with i = V1, j = V2, k = V3.
inline LinearSem confounded_triangle(double alpha = 0.9, double beta = 0.9, double gamma = 0.9) {
  return LinearSem(Dag(3, {{2, 0, alpha}, {2, 1, gamma}, {0, 1, beta}}), {0, 1});
}

// V2 -> V1, V4 -> V1, V4 -> V2, V4 -> V3; V4 latent.
inline LinearSem hidden_root(double w = 0.9) {
  return LinearSem(Dag(4, {{1, 0, w}, {3, 0, w}, {3, 1, w}, {3, 2, w}}), {0, 1, 2});
}

// V3->V4 a, V3->V5 b, V4->V5 g, V5->V1, V5->V2, V6->V2, V8->V1, V8->V2, V8->V7.
inline LinearSem eight_vertex(double a = 0.7, double b = 0.6, double g = 0.5) {
  return LinearSem(Dag(8, {{2, 3, a}, {2, 4, b}, {3, 4, g}, {4, 0, 0.9}, {4, 1, 0.8},
                           {5, 1, 0.7}, {7, 0, 0.6}, {7, 1, 0.5}, {7, 6, 0.4}}),
                   {0, 1});
}

// Edges 2->1 e, 4->1 d, 2->3 a, 2->4 b, 3->4 c, all observed.
struct FourVertexDag {
  double a = 0.3, b = 0.5, c = 0.7, d = 1.1, e = 1.3;
  Dag graph() const { return Dag(4, {{1, 0, e}, {3, 0, d}, {1, 2, a}, {1, 3, b}, {2, 3, c}}); }
};

// V4->V1 a, V4->V2 c, V1->V2 d, V3->V2 e, V4->V3 b; V3, V4 latent.
struct TwoLatentSem {
  double a = 0.4, b = 0.6, c = 0.8, d = 1.2, e = 1.5;
  LinearSem sem() const {
    return LinearSem(Dag(4, {{3, 0, a}, {3, 1, c}, {0, 1, d}, {2, 1, e}, {3, 2, b}}), {0, 1});
  }
};

struct RandomSemOptions {
  int p_min = 3;
  int p_max = 8;
  double edge_prob = 0.4;
  bool continuous = false;  // weights uniform in +-[0.5, 1.5] instead of 0.9
  double latent_fraction = 0.5;
};

inline LinearSem random_sem(lvlingam::Rng& rng, const RandomSemOptions& o = {}) {
  const int p = o.p_min + static_cast<int>(rng.index(static_cast<std::uint64_t>(o.p_max - o.p_min + 1)));
  std::vector<int> perm(p);
  for (int i = 0; i < p; ++i) perm[i] = i;
  rng.shuffle(perm.begin(), perm.end());
  std::vector<Edge> edges;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (rng.uniform() < o.edge_prob) {
        double w = 0.9;
        if (o.continuous) w = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
        edges.push_back({perm[a], perm[b], w});
      }
  std::vector<int> ids(p);
  for (int i = 0; i < p; ++i) ids[i] = i;
  rng.shuffle(ids.begin(), ids.end());
  const int pl = static_cast<int>(o.latent_fraction * p);
  std::vector<int> observed(ids.begin() + pl, ids.end());
  return LinearSem(Dag(p, std::move(edges)), std::move(observed));
}

// Instances for the equivalent-model construction: V1 = k (latent root),
// V2 = i, V3 = j observed. Latents feeding i below k are noiseless; further
// latents sit on k ~> j and i ~> j, and observed roots may point into j.
inline LinearSem random_equivalence_instance(lvlingam::Rng& rng) {
  auto weight = [&] { return (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5); };
  const int k = 0, i = 1, j = 2;
  int next = 3;
  std::vector<Edge> edges;
  std::vector<int> quiet, side, mid, roots;
  const int na = static_cast<int>(rng.index(3)), nc = 1 + static_cast<int>(rng.index(3)),
            nm = static_cast<int>(rng.index(3)), no = static_cast<int>(rng.index(3));
  for (int a = 0; a < na; ++a) quiet.push_back(next++);
  for (int c = 0; c < nc; ++c) side.push_back(next++);
  for (int m = 0; m < nm; ++m) mid.push_back(next++);
  for (int o = 0; o < no; ++o) roots.push_back(next++);

  // k ~> i through a chain of noiseless latents, plus optional shortcuts.
  int prev = k;
  for (int a : quiet) {
    edges.push_back({prev, a, weight()});
    if (prev != k && rng.uniform() < 0.5) edges.push_back({k, a, weight()});
    prev = a;
  }
  edges.push_back({prev, i, weight()});
  if (prev != k && rng.uniform() < 0.5) edges.push_back({k, i, weight()});
  // k ~> j avoiding i, with each side latent fed by k or an earlier one.
  for (std::size_t c = 0; c < side.size(); ++c) {
    const int from = c == 0 || rng.uniform() < 0.5 ? k : side[c - 1];
    edges.push_back({from, side[c], weight()});
    if (c + 1 == side.size() || rng.uniform() < 0.5) edges.push_back({side[c], j, weight()});
  }
  // i ~> j through its own latents.
  prev = i;
  for (int m : mid) {
    edges.push_back({prev, m, weight()});
    prev = m;
  }
  edges.push_back({prev, j, weight()});
  if (prev != i && rng.uniform() < 0.5) edges.push_back({i, j, weight()});
  for (int o : roots) edges.push_back({o, j, weight()});

  std::vector<int> observed{i, j};
  observed.insert(observed.end(), roots.begin(), roots.end());
  Matrix mix = Matrix::Identity(next, next);
  for (int a : quiet) mix(a, a) = 0.0;
  return LinearSem(Dag(next, std::move(edges)), std::move(observed), {}, std::move(mix));
}

// Exact reduced mixing and its zero pattern.
struct ExactMixing {
  lvlingam::MixingMatrix reduced;
  lvlingam::BoolMatrix support;
};

inline ExactMixing exact_mixing(const LinearSem& sem) {
  ExactMixing e;
  e.reduced = lvlingam::reduce_mixing(lvlingam::observed_mixing(sem)).matrix;
  e.support = e.reduced.entries.array() != 0.0;
  return e;
}

}  // namespace fx
