#include "qmeter/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qmeter/linalg.hpp"

namespace qmeter {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double evaluate(const std::function<double(const Eigen::VectorXd&)>& f,
                const Eigen::VectorXd& x) {
  const double v = f(x);
  if (!std::isfinite(v))
    throw ValidationError("nelder_mead: objective returned a non-finite value");
  return v;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, double tol, int max_iter,
    double initial_step) {
  const Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(static_cast<size_t>(n) + 1);
  simplex.push_back(start);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd vertex = start;
    vertex(i) += initial_step;
    simplex.push_back(vertex);
  }
  for (const auto& vertex : simplex)
    values.push_back(evaluate(objective, vertex));

  std::vector<size_t> order(simplex.size());
  std::iota(order.begin(), order.end(), 0);
  auto sort_order = [&] {
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    sort_order();
    const size_t best = order.front(), worst = order.back();

    double diameter = 0.0;
    for (size_t i = 1; i < simplex.size(); ++i)
      diameter = std::max(diameter,
                          (simplex[order[i]] - simplex[best]).norm());
    if (diameter < tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(simplex.size() - 1);

    Eigen::VectorXd reflected =
        centroid + kReflect * (centroid - simplex[worst]);
    const double f_reflected = evaluate(objective, reflected);

    if (f_reflected < values[best]) {
      Eigen::VectorXd expanded =
          centroid + kExpand * (reflected - centroid);
      const double f_expanded = evaluate(objective, expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[order[order.size() - 2]]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }

    Eigen::VectorXd contracted;
    if (f_reflected < values[worst])
      contracted = centroid + kContract * (reflected - centroid);
    else
      contracted = centroid + kContract * (simplex[worst] - centroid);
    const double f_contracted = evaluate(objective, contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }

    for (size_t i = 1; i < order.size(); ++i) {
      simplex[order[i]] =
          simplex[best] + kShrink * (simplex[order[i]] - simplex[best]);
      values[order[i]] = evaluate(objective, simplex[order[i]]);
    }
  }

  sort_order();
  result.argmin = simplex[order.front()];
  result.value = values[order.front()];
  result.iterations = iter;
  return result;
}

}  // namespace qmeter
