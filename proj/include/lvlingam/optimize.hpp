#pragma once

#include <functional>

#include "lvlingam/sem.hpp"

namespace lvlingam {

/// f(x, grad) returns the value and writes the gradient.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 5000;
  double grad_tol = 1e-6;       // on the max-norm of the gradient
  double rel_tol = 1e-10;       // relative decrease over `window` iterations
  int window = 10;
  double armijo = 1e-4;
  int max_backtracks = 40;
};

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with backtracking Armijo steps. Falls back to steepest
/// descent when the two-loop direction is not a descent direction.
LbfgsResult lbfgs_minimize(const Objective& f, Vector x0, const LbfgsOptions& opt = {});

}  // namespace lvlingam
