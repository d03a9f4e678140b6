#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>

#include "lvlingam/causal.hpp"
#include "lvlingam/errors.hpp"

using namespace lvlingam;

namespace {

BoolMatrix bools(std::initializer_list<std::initializer_list<int>> rows) {
  BoolMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (int x : row) m(r, c++) = x != 0;
    ++r;
  }
  return m;
}

}  // namespace

TEST_CASE("pairwise verdict examples") {
  const auto v = pairwise_path(bools({{1, 0, 1}, {1, 1, 1}}), 0, 1);
  CHECK(v.n0s == 1);
  CHECK(v.ns0 == 0);
  CHECK(v.forward == Verdict::Path);
  CHECK(v.backward == Verdict::NoPath);

  const auto f = pairwise_path(bools({{0, 1, 1}, {1, 0, 1}}), 0, 1);
  CHECK(f.forward == Verdict::NoPath);
  CHECK(f.backward == Verdict::NoPath);

  const auto u = pairwise_path(bools({{1, 1}, {1, 1}}), 0, 1);
  CHECK(u.forward == Verdict::Undecided);
  CHECK(u.backward == Verdict::Undecided);
  CHECK_THROWS_AS(pairwise_path(bools({{1}, {1}}), 1, 1), Error);
}

TEST_CASE("order from the confounded pair and the four-vertex example") {
  const auto v1 = path_verdicts(bools({{0, 1, 1}, {1, 1, 1}}));
  CHECK(v1.verdict[0][1] == Verdict::Path);
  const auto o1 = causal_order_infer(v1);
  CHECK(o1.order.sequence() == std::vector<int>{0, 1});

  const auto ex = fx::exact_mixing(fx::hidden_root());
  const auto v6 = path_verdicts(ex.support);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK((v6.verdict[i][j] == Verdict::Path) == (i == 1 && j == 0));
  CHECK(causal_order_infer(v6).order.sequence() == std::vector<int>{1, 0, 2});

  const auto ident = path_verdicts(BoolMatrix(Matrix::Identity(4, 4).array() != 0.0));
  CHECK(causal_order_infer(ident).order.sequence() == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("cyclic verdicts") {
  PathVerdictMatrix v;
  v.verdict.assign(3, std::vector<Verdict>(3, Verdict::NoPath));
  v.counts.assign(3, std::vector<std::array<int, 2>>(3, {0, 0}));
  v.verdict[0][1] = v.verdict[1][2] = v.verdict[2][0] = Verdict::Path;
  v.counts[0][1] = {3, 0};
  v.counts[1][2] = {1, 0};
  v.counts[2][0] = {2, 0};
  try {
    causal_order_infer(v);
    FAIL("expected InconsistentVerdicts");
  } catch (const CycleError& e) {
    CHECK(e.kind() == ErrorKind::InconsistentVerdicts);
    CHECK(e.cycle().size() == 3);
    CHECK(std::string(e.what()).find("--break-cycles") != std::string::npos);
  }
  const auto r = causal_order_infer(v, true);
  REQUIRE(r.dropped.size() == 1);
  CHECK(r.dropped[0].from == 1);
  CHECK(r.dropped[0].to == 2);
  CHECK(r.order.sequence() == std::vector<int>{2, 0, 1});
}

TEST_CASE("descendant sets") {
  const auto d = descendant_sets(bools({{0, 1, 1}, {1, 1, 1}}));
  CHECK(d == std::vector<IndexSet>{{1}, {0, 1}, {0, 1}});
  CHECK(descendant_sets(BoolMatrix(Matrix::Identity(3, 3).array() != 0.0)) == std::vector<IndexSet>{{0}, {1}, {2}});
}

TEST_CASE("noisy four-variable estimate gives the expected effects") {
  Matrix est(3, 4);
  est << -0.049, 0.892, 1, 1, -0.024, 1, 0.523, -0.042, 1, -0.02, 0.527, -0.032;
  const BoolMatrix support = est.array().abs() > 0.1;
  const auto cols = descendant_sets(support);
  CHECK(cols == std::vector<IndexSet>{{2}, {0, 1}, {0, 1, 2}, {0}});
  const auto verdicts = path_verdicts(support);
  const auto obs = observed_descendants(verdicts);
  const Matrix b = unique_effects(est, cols, obs);
  Matrix want(3, 3);
  want << 1, 0.892, -0.049, -0.042, 1, -0.024, -0.032, -0.02, 1;
  CHECK((b - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact mixing verdicts equal reachability") {
  Rng rng(101);
  int pairs = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto sem = fx::random_sem(rng, {3, 8, 0.4, false, 0.5});
    const auto ex = fx::exact_mixing(sem);
    const auto v = path_verdicts(ex.support);
    const auto reach = reachability(sem.graph());
    const auto& obs = sem.observed();
    for (std::size_t a = 0; a < obs.size(); ++a)
      for (std::size_t b = 0; b < obs.size(); ++b) {
        if (a == b) continue;
        ++pairs;
        const bool path = v.verdict[a][b] == Verdict::Path;
        CHECK(path == reach(obs[a], obs[b]));
        CHECK(v.verdict[a][b] != Verdict::Undecided);
      }
  }
  CHECK(pairs > 500);
}

TEST_CASE("unique effects equal the reduced total effects") {
  Rng rng(202);
  int used = 0, ambiguous = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto sem = fx::random_sem(rng, {3, 8, 0.4, rep % 2 == 1, 0.5});
    const auto ex = fx::exact_mixing(sem);
    const auto cols = descendant_sets(ex.support);
    const auto obs = oracle::observed_des(sem);
    CHECK(obs == observed_descendants(path_verdicts(ex.support)));
    const int po = sem.num_observed();
    const Matrix truth = (Matrix::Identity(po, po) - reduced_direct_effects(sem)).inverse();
    try {
      const Matrix b = unique_effects(ex.reduced.entries, cols, obs);
      CHECK((b - truth).cwiseAbs().maxCoeff() <= 1e-10);
      ++used;

      // Any nonzero column rescaling leaves the answer alone.
      Matrix scaled = ex.reduced.entries;
      for (Eigen::Index c = 0; c < scaled.cols(); ++c) scaled.col(c) *= rng.uniform(0.2, 5.0) * (c % 2 ? -1 : 1);
      const BoolMatrix s2 = scaled.array() != 0.0;
      CHECK((s2 == ex.support).all());
      CHECK((unique_effects(scaled, descendant_sets(s2), obs) - b).cwiseAbs().maxCoeff() <= 1e-12);
    } catch (const IndexError& e) {
      CHECK(e.kind() == ErrorKind::AmbiguousColumn);
      ++ambiguous;
    }
  }
  CHECK(used > 100);
  CHECK(ambiguous > 0);
}

TEST_CASE("three-vertex confounder yields two candidates") {
  const auto sem = fx::confounded_triangle(0.9, 0.9, 0.9);
  const auto ex = fx::exact_mixing(sem);
  const Matrix expect = (Matrix(2, 3) << 1, 0, 0.9, 0.9, 1, 1.71).finished();
  CHECK((ex.reduced.entries - expect).cwiseAbs().maxCoeff() < 1e-12);
  const auto cols = descendant_sets(ex.support);
  const auto obs = oracle::observed_des(sem);
  try {
    unique_effects(ex.reduced.entries, cols, obs);
    FAIL("expected AmbiguousColumn");
  } catch (const IndexError& e) {
    CHECK(e.kind() == ErrorKind::AmbiguousColumn);
    CHECK(e.index() == 0);
  }
  const auto set = enumerate_effect_sets(ex.reduced.entries, cols, obs);
  CHECK(set.r == std::vector<int>{2, 1});
  CHECK(set.multiplicity == 2);
  REQUIRE(set.candidates.size() == 2);
  CHECK(set.candidates[0].choice == std::vector<int>{0, 1});
  CHECK(set.candidates[0].matrix(1, 0) == doctest::Approx(0.9));
  CHECK(set.candidates[1].choice == std::vector<int>{2, 1});
  CHECK(set.candidates[1].matrix(1, 0) == doctest::Approx(1.9));
  for (const auto& c : set.candidates) CHECK(c.matrix.diagonal().isOnes(0));
}

TEST_CASE("identity mixing has one candidate") {
  const auto set = enumerate_effect_sets(Matrix::Identity(3, 3), {{0}, {1}, {2}}, {{0}, {1}, {2}});
  CHECK(set.multiplicity == 1);
  REQUIRE(set.candidates.size() == 1);
  CHECK(set.candidates[0].matrix.isIdentity(0));
}

TEST_CASE("missing descendant pattern") {
  try {
    unique_effects(Matrix::Identity(2, 2), {{0}, {1}}, {{0, 1}, {1}});
    FAIL("expected NoMatchingColumn");
  } catch (const IndexError& e) {
    CHECK(e.kind() == ErrorKind::NoMatchingColumn);
    CHECK(e.index() == 0);
  }
}

TEST_CASE("candidate count matches brute force and every candidate rebuilds the rows") {
  Rng rng(303);
  int multi = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto sem = fx::random_sem(rng, {3, 6, 0.5, rep % 2 == 1, 0.5});
    const auto ex = fx::exact_mixing(sem);
    const auto cols = descendant_sets(ex.support);
    const auto obs = oracle::observed_des(sem);
    const auto set = enumerate_effect_sets(ex.reduced.entries, cols, obs);
    long long prod = 1;
    for (int r : set.r) prod *= r;
    CHECK(set.multiplicity == prod);
    CHECK(set.multiplicity == oracle::injective_count(cols, obs));
    CHECK(static_cast<long long>(set.candidates.size()) + set.rejected_singular == set.multiplicity);
    if (set.multiplicity > 1) ++multi;

    for (const auto& cand : set.candidates) {
      std::vector<int> rest_idx;
      for (int c = 0; c < ex.reduced.cols(); ++c)
        if (std::find(cand.choice.begin(), cand.choice.end(), c) == cand.choice.end()) rest_idx.push_back(c);
      const Matrix rest = ex.reduced.entries(Eigen::all, rest_idx);
      const Matrix rebuilt = oracle::rebuild_mixing(cand.matrix, rest, obs);
      Matrix want(cand.matrix.rows(), cand.matrix.cols() + rest.cols());
      want << cand.matrix, rest;
      CHECK((rebuilt - want).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
  CHECK(multi > 0);
}

TEST_CASE("equivalent model on the three-vertex confounder") {
  const auto sem = fx::confounded_triangle(0.9, 0.9, 0.9);
  const auto t = default_path_triple(sem, 0, 1, 2);
  const auto alt = construct_equivalent_model(sem, 0, 1, 2, t);
  CHECK(alt.graph().weight(2, 0) == doctest::Approx(1.0));
  CHECK(alt.graph().weight(2, 1) == doctest::Approx(-1.0));
  CHECK(alt.graph().weight(0, 1) == doctest::Approx(1.9));
  CHECK((observed_source_mixing(alt) - observed_source_mixing(sem)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(total_effect_matrix(alt)(1, 0) == doctest::Approx(1.9).epsilon(1e-12));

  // gamma = 0: the k -> j edge is absent.
  const LinearSem no_conf(Dag(3, {{2, 0, 0.9}, {0, 1, 0.9}}), {0, 1});
  CHECK_THROWS_AS(default_path_triple(no_conf, 0, 1, 2), Error);
  PathTriple direct{{2, 0}, {2, 1}, {0, 1}};
  try {
    construct_equivalent_model(no_conf, 0, 1, 2, direct);
    FAIL("expected StructureUnsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StructureUnsupported);
  }
}

TEST_CASE("equivalent models on random multi-path instances") {
  Rng rng(404);
  int built = 0, tries = 0;
  while (built < 20 && tries < 500) {
    ++tries;
    const auto sem = fx::random_equivalence_instance(rng);
    PathTriple t;
    try {
      t = default_path_triple(sem, 1, 2, 0);
    } catch (const Error&) {
      continue;
    }
    const Matrix b = total_effect_matrix(sem);
    std::vector<Edge> kept;
    for (const auto& e : sem.graph().edges())
      if (e.from != 1 && e.to != 1) kept.push_back(e);
    const Matrix bni = total_effect_matrix(Dag(sem.num_vertices(), kept));
    const double want = b(2, 1) + bni(2, 0) / b(1, 0);
    LinearSem alt = sem;
    try {
      alt = construct_equivalent_model(sem, 1, 2, 0, t);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::StructureUnsupported);
      continue;
    }
    ++built;
    CHECK((observed_source_mixing(alt) - observed_source_mixing(sem)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(std::abs(total_effect_matrix(alt)(2, 1) - want) <= 1e-9 * std::max(1.0, std::abs(want)));
  }
  CHECK(built == 20);
}

TEST_CASE("equivalent model preconditions") {
  // Noisy latent between k and i.
  const LinearSem noisy(Dag(4, {{2, 3, 0.8}, {3, 0, 0.7}, {2, 1, 0.9}, {0, 1, 0.6}}), {0, 1});
  CHECK_THROWS_AS(construct_equivalent_model(noisy, 0, 1, 2, default_path_triple(noisy, 0, 1, 2)), Error);
  // Another observed child of k.
  const LinearSem extra(Dag(4, {{2, 0, 0.8}, {2, 1, 0.7}, {0, 1, 0.9}, {2, 3, 0.6}}), {0, 1, 3});
  CHECK_THROWS_AS(construct_equivalent_model(extra, 0, 1, 2, default_path_triple(extra, 0, 1, 2)), Error);
}
