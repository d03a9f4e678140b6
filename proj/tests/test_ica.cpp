#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>

#include "lvlingam/errors.hpp"
#include "lvlingam/experiments.hpp"
#include "lvlingam/ica.hpp"

using namespace lvlingam;

namespace {

Matrix covariance(const Matrix& x) {
  const Matrix c = x.colwise() - x.rowwise().mean();
  return c * c.transpose() / static_cast<double>(x.cols() - 1);
}

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

SampleMatrix square_two_source(int n, std::uint64_t seed, Matrix* mixing = nullptr) {
  Rng rng(seed);
  Matrix s(2, n);
  const double h = std::sqrt(3.0);
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < 2; ++i) s(i, t) = rng.uniform(-h, h);
  Matrix m(2, 2);
  m << 1.0, 0.6, 0.4, 1.0;
  if (mixing) *mixing = m;
  return SampleMatrix{m * s, {"X1", "X2"}, true};
}

double relative_gap(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("whitened covariance is the identity") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 2 + rep % 4;
    const Matrix mix = random_matrix(rng, p, p);
    const Matrix x = mix * random_matrix(rng, p, 500) + Vector::Constant(p, 5.0) * Matrix::Ones(1, 500);
    const auto w = whiten(SampleMatrix{x, {}, true});
    CHECK((covariance(w.data) - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((w.transform.basis * w.transform.basis.transpose() - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-8);
    const Matrix back = w.transform.unwhitening() * covariance(w.data) * w.transform.unwhitening().transpose();
    CHECK((back - covariance(x)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("whitening recovers diagonal scales") {
  Rng rng(8);
  Matrix x = random_matrix(rng, 2, 4000);
  x.row(0) *= 2.0;
  // Force the sample covariance to exactly diag(4, 1).
  const auto pre = whiten(SampleMatrix{x, {}, true});
  Matrix y = pre.data;
  y.row(0) *= 2.0;
  const auto w = whiten(SampleMatrix{y, {}, true});
  CHECK(w.transform.scales(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(w.transform.scales(1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constant variable is degenerate") {
  Rng rng(1);
  Matrix x = random_matrix(rng, 3, 100);
  x.row(1).setConstant(2.5);
  try {
    whiten(SampleMatrix{x, {"a", "b", "c"}, true});
    FAIL("expected DegenerateCovariance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateCovariance);
    CHECK(std::string(e.what()).find('b') != std::string::npos);
  }
}

TEST_CASE("sample matrix validation") {
  CHECK_THROWS_AS((SampleMatrix{Matrix::Ones(3, 3), {}, true}.validate()), Error);
  Matrix bad = Matrix::Ones(2, 10);
  bad(1, 4) = std::nan("");
  CHECK_THROWS_AS((SampleMatrix{bad, {}, true}.validate()), Error);
}

TEST_CASE("objective at zero and at an orthogonal square Z") {
  Rng rng(5);
  const Matrix w = random_matrix(rng, 3, 200);
  const RicaProblem pr{0.7, 1.0, 1.0};
  const auto at0 = rica_objective_serial(Matrix::Zero(3, 4), w, pr);
  CHECK(at0.value == doctest::Approx(0.7 * w.squaredNorm() / 200.0));

  const Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, 3, 3));
  const Matrix q = qr.householderQ();
  const auto atq = rica_objective_serial(q, w, pr);
  const Matrix y = q.transpose() * w;
  const double contrast = y.unaryExpr([](double u) { return log_cosh(u); }).sum() / 200.0;
  CHECK(atq.value == doctest::Approx(contrast).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences") {
  Rng rng(11);
  const double h = 1e-5;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 2 + static_cast<int>(rng.index(4));
    const int k = p + static_cast<int>(rng.index(4));
    const int n = 20 + static_cast<int>(rng.index(60));
    const Matrix w = random_matrix(rng, p, n);
    const Matrix z = random_matrix(rng, p, k) / std::sqrt(p);
    const RicaProblem pr{rng.uniform(0.05, 3.0), rng.uniform() < 0.5 ? -1.0 : 1.0, rng.uniform(0.5, 2.0)};
    const auto vg = rica_objective_serial(z, w, pr);
    Matrix fd(p, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < p; ++i) {
        Matrix zp = z, zm = z;
        zp(i, j) += h;
        zm(i, j) -= h;
        fd(i, j) = (rica_objective_serial(zp, w, pr).value - rica_objective_serial(zm, w, pr).value) / (2 * h);
      }
    worst = std::max(worst, (fd - vg.grad).norm() / vg.grad.norm());
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("blocked kernel agrees with the serial reference") {
  Rng rng(21);
  for (int n : {1, 511, 512, 513, 2000}) {
    const Matrix w = random_matrix(rng, 4, n);
    const Matrix z = random_matrix(rng, 4, 6);
    const RicaProblem pr{0.25, -1.0, 1.0};
    const auto s = rica_objective_serial(z, w, pr);
    const auto par = rica_objective_parallel(z, w, pr);
    CHECK(par.value == doctest::Approx(s.value).epsilon(1e-12));
    CHECK(relative_gap(par.grad, s.grad) < 1e-12);
    const auto small = rica_objective_parallel(z, w, pr, 7);
    CHECK(small.value == doctest::Approx(s.value).epsilon(1e-12));
  }
}

TEST_CASE("contrast sign follows kurtosis") {
  Rng rng(2);
  Matrix uni(2, 5000), lap(2, 5000);
  for (int t = 0; t < 5000; ++t)
    for (int i = 0; i < 2; ++i) {
      uni(i, t) = rng.uniform(-1, 1);
      lap(i, t) = rng.laplace(0, 1);
    }
  CHECK(contrast_sign(uni, Nongaussianity::Auto) == -1.0);
  CHECK(contrast_sign(lap, Nongaussianity::Auto) == 1.0);
  CHECK(contrast_sign(uni, Nongaussianity::Super) == 1.0);
}

TEST_CASE("square mixing of two uniform sources is recovered") {
  Matrix m;
  const auto data = square_two_source(2000, 17, &m);
  const auto w = whiten(data);
  const RicaProblem pr{0.5, contrast_sign(w.data, Nongaussianity::Auto), 1.0};
  const auto sol = rica_fit(w.data, 2, pr, 99);
  CHECK(sol.converged);
  const Matrix truth = w.transform.scales.cwiseInverse().asDiagonal() * w.transform.basis.transpose() * m;
  for (int c = 0; c < 2; ++c) {
    double best = 0.0;
    for (int d = 0; d < 2; ++d)
      best = std::max(best, std::abs(truth.col(c).normalized().dot(sol.z.col(d).normalized())));
    CHECK(best >= 0.95);
  }
}

TEST_CASE("large penalty makes a square Z orthogonal") {
  const auto data = square_two_source(1000, 4);
  const auto w = whiten(data);
  const auto sol = rica_fit(w.data, 2, RicaProblem{1e4, -1.0, 1.0}, 5);
  CHECK((sol.z * sol.z.transpose() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("fits are deterministic") {
  const auto data = simulate_samples(fx::confounded_pair(), 600, 31);
  IcaConfig cfg;
  cfg.seed = 12;
  const auto a = estimate_mixing(data, cfg);
  const auto b = estimate_mixing(data, cfg);
  CHECK(a.k == b.k);
  CHECK(a.raw == b.raw);
  cfg.kernel = Kernel::Serial;
  const auto c = estimate_mixing(data, cfg);
  CHECK(c.k == a.k);
  CHECK((c.mixing.entries - a.mixing.entries).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("warm start shape is checked") {
  const auto data = square_two_source(300, 2);
  const auto w = whiten(data);
  CHECK_THROWS_AS(rica_fit(w.data, 2, RicaProblem{}, 1, {}, Matrix::Zero(2, 3)), Error);
  CHECK_THROWS_AS(rica_fit(w.data, 1, RicaProblem{}, 1), Error);
  CHECK_THROWS_AS(rica_fit(w.data, 2, RicaProblem{0.0, 1.0, 1.0}, 1), Error);
}

TEST_CASE("holdout split") {
  SampleMatrix d{Matrix::Zero(2, 10), {}, true};
  for (int t = 0; t < 10; ++t) d.values.col(t).setConstant(t);
  auto [tr, ho] = split_holdout(d, 0.25, 0);
  CHECK(tr.samples() == 7);
  CHECK(ho.samples() == 3);
  CHECK(ho.values(0, 0) == 7.0);
  d.iid = false;
  auto [tr2, ho2] = split_holdout(d, 0.25, 5);
  CHECK(ho2.samples() == 3);
  CHECK((tr2.values.row(0).sum() + ho2.values.row(0).sum()) == 45.0);
  CHECK_THROWS_AS(split_holdout(d, 1.0, 0), Error);
}

TEST_CASE("model selection on square data keeps two columns") {
  int hits = 0;
  for (int run = 0; run < 5; ++run) {
    const auto data = square_two_source(1000, 100 + run);
    IcaConfig cfg;
    cfg.seed = 40 + run;
    cfg.k_max = 3;
    hits += estimate_mixing(data, cfg).k == 2;
  }
  CHECK(hits >= 4);
}

TEST_CASE("model selection on the confounded pair finds three columns") {
  int hits = 0;
  for (int run = 0; run < 10; ++run) {
    const auto data = simulate_samples(fx::confounded_pair(), 1000, 1000 + run);
    IcaConfig cfg;
    cfg.seed = 77 + run;
    cfg.k_max = 4;
    hits += estimate_mixing(data, cfg).k == 3;
  }
  CHECK(hits >= 8);
}

TEST_CASE("single k range returns it") {
  const auto data = square_two_source(400, 9);
  IcaConfig cfg;
  cfg.k_min = 3;
  cfg.k_max = 3;
  const auto est = estimate_mixing(data, cfg);
  CHECK(est.k == 3);
  CHECK(est.selection.candidates.size() == 1);
  CHECK(est.mixing.entries.cwiseAbs().colwise().maxCoeff().isOnes(1e-12));
}
