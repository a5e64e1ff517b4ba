#pragma once

#include <functional>

#include <Eigen/Dense>

namespace qmeter {

struct NelderMeadResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex descent with the standard reflection, expansion,
/// contraction, and shrink moves. Terminates when the simplex diameter
/// drops below tol or after max_iter iterations. Throws if the objective
/// returns a non-finite value.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, double tol, int max_iter,
    double initial_step = 0.5);

}  // namespace qmeter
