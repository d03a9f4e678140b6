#include "lvlingam/optimize.hpp"

#include <cmath>
#include <deque>

namespace lvlingam {

LbfgsResult lbfgs_minimize(const Objective& f, Vector x0, const LbfgsOptions& opt) {
  LbfgsResult res;
  res.x = std::move(x0);
  Vector g(res.x.size());
  res.value = f(res.x, g);

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> values{res.value};
  Vector xn(res.x.size()), gn(res.x.size()), d(res.x.size());
  std::vector<double> alpha(opt.memory);

  for (int it = 0; it < opt.max_iters; ++it) {
    if (g.cwiseAbs().maxCoeff() <= opt.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    d = -g;
    const int m = static_cast<int>(s_hist.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    double step = 1.0;
    if (!(slope < 0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    if (s_hist.empty()) step = std::min(1.0, 1.0 / std::sqrt(g.squaredNorm()));

    double fn = 0.0;
    bool accepted = false;
    for (int b = 0; b < opt.max_backtracks; ++b) {
      xn = res.x + step * d;
      fn = f(xn, gn);
      if (std::isfinite(fn) && fn <= res.value + opt.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) {
      // No decrease along d: at the resolution limit of the objective.
      res.converged = s_hist.empty();
      if (!res.converged) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      break;
    }
    Vector s = xn - res.x;
    Vector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    res.x.swap(xn);
    g.swap(gn);
    res.value = fn;

    values.push_back(fn);
    if (static_cast<int>(values.size()) > opt.window + 1) values.pop_front();
    if (static_cast<int>(values.size()) == opt.window + 1) {
      const double drop = values.front() - values.back();
      if (drop <= opt.rel_tol * std::max(1.0, std::abs(values.back()))) {
        res.converged = true;
        break;
      }
    }
  }
  if (!res.converged && g.cwiseAbs().maxCoeff() <= opt.grad_tol) res.converged = true;
  return res;
}

}  // namespace lvlingam
