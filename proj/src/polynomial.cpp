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
#include <numbers>

#include "rokit/numerics.hpp"

namespace rokit {

namespace {

// Newton refinement on the monic cubic; keeps the better of old and new.
double polish(double x, double b, double c, double d) {
  auto value = [&](double t) { return ((t + b) * t + c) * t + d; };
  for (int i = 0; i < 8; ++i) {
    const double f = value(x);
    const double df = (3.0 * x + 2.0 * b) * x + c;
    if (df == 0.0 || f == 0.0) break;
    const double next = x - f / df;
    if (!(std::abs(value(next)) < std::abs(f))) break;
    x = next;
  }
  return x;
}

}  // namespace

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
  if (c3 == 0.0) throw ValidationError("cubic_real_roots: leading coefficient is zero (degree < 3)");
  const double b = c2 / c3;
  const double c = c1 / c3;
  const double d = c0 / c3;

  // Depressed cubic y^3 + p y + q with x = y - b/3.
  const double shift = b / 3.0;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * q - std::copysign(sq, q));
    const double y = (u != 0.0) ? u - p / (3.0 * u) : 0.0;
    roots.push_back(y - shift);
  } else if (disc < 0.0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) - shift);
    }
  } else if (p == 0.0) {
    roots.push_back(-shift);
  } else {
    roots.push_back(3.0 * q / p - shift);
    roots.push_back(-1.5 * q / p - shift);
  }

  for (double& x : roots) x = polish(x, b, c, d);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

}  // namespace rokit
