// Copyright 2026 The rokit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rokit/numerics.hpp"

namespace rokit {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0) throw ValidationError("nelder_mead: empty starting point");

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : INFINITY;
  };

  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) {
    double step = i < options.initial_step.size() ? options.initial_step[i]
                                                  : (start[i] != 0.0 ? 0.1 * start[i] : 0.05);
    simplex[i + 1][i] += step;
  }
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);

  while (res.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];
    res.best_trace.push_back(values[best]);

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
      }
    }
    if (std::abs(values[worst] - values[best]) <= options.f_tol * (std::abs(values[best]) + 1e-300) &&
        diameter <= options.x_tol) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / static_cast<double>(dim);
    }
    auto along = [&](double coef, std::vector<double>& out) {
      for (std::size_t j = 0; j < dim; ++j) out[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
    };

    along(-1.0, trial);
    const double f_reflect = eval(trial);
    if (f_reflect < values[best]) {
      along(-2.0, trial2);
      const double f_expand = eval(trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }
    const bool outside = f_reflect < values[worst];
    along(outside ? -0.5 : 0.5, trial2);
    const double f_contract = eval(trial2);
    if (f_contract < (outside ? f_reflect : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      values[i] = eval(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best_index = static_cast<std::size_t>(best_it - values.begin());
  res.x = simplex[best_index];
  res.value = *best_it;
  res.best_trace.push_back(res.value);
  return res;
}

double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iterations && std::abs(b - a) > tol * (std::abs(a) + std::abs(b) + tol); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace rokit
