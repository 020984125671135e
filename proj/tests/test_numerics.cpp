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


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rokit/numerics.hpp"
#include "rokit/random.hpp"

using namespace rokit;

TEST_CASE("philox known answer") {
  // Random123 reference vector for philox4x32-10 with zero counter and key.
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("random streams are addressable and independent") {
  RandomStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RandomStream u(1, 1);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);

  RandomStream d(3, 3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[d.below(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("rk4 on a harmonic oscillator") {
  using V = Eigen::Vector2d;
  auto f = [](double, const V& y) { return V(y(1), -y(0)); };
  const auto s = integrate_ode(f, V(1.0, 0.0), 0.0, 2.0 * std::numbers::pi, 1e-3);
  CHECK(s.times.back() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-15));
  CHECK(std::abs(s.states.back()(0) - 1.0) < 1e-10);
  CHECK(std::abs(s.states.back()(1)) < 1e-10);
}

TEST_CASE("rk4 reports divergence") {
  auto f = [](double, const double& y) { return y * y; };
  CHECK_THROWS_AS(integrate_ode(f, 1.0, 0.0, 2.0, 1e-3), IntegrationDiverged);
}

TEST_CASE("least squares recovers an exponential") {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.1 * i);
    y.push_back(2.5 * std::exp(-1.3 * 0.1 * i) + 0.4);
  }
  std::function<double(std::span<const double>, const double&)> model = [](std::span<const double> p,
                                                                           const double& t) {
    return p[0] * std::exp(-p[1] * t) + p[2];
  };
  const FitResult fit = least_squares<double>(model, x, y, {}, {1.0, 0.5, 0.0});
  CHECK(fit.converged);
  CHECK(fit.parameters[0] == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(fit.parameters[1] == doctest::Approx(1.3).epsilon(1e-8));
  CHECK(fit.parameters[2] == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("least squares flags a singular jacobian") {
  std::vector<double> y{1.0, 2.0, 3.0};
  VectorModel model = [](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (p[0] + p[1]) * static_cast<double>(i);
  };
  CHECK_THROWS_AS(least_squares(model, y, {}, {0.3, 0.2}), DegenerateFit);
}

TEST_CASE("cubic roots") {
  // (x - 1)(x + 2)(x - 3) = x^3 - 2x^2 - 5x + 6
  auto r = cubic_real_roots(1.0, -2.0, -5.0, 6.0);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-2.0));
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(r[2] == doctest::Approx(3.0));
  r = cubic_real_roots(1.0, 0.0, 1.0, -2.0);  // single real root at 1
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.0));
}

TEST_CASE("nelder mead on rosenbrock") {
  auto rosen = [](std::span<const double> p) {
    return 100.0 * std::pow(p[1] - p[0] * p[0], 2) + std::pow(1.0 - p[0], 2);
  };
  const auto res = nelder_mead(rosen, {-1.2, 1.0});
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  for (std::size_t i = 1; i < res.best_trace.size(); ++i) CHECK(res.best_trace[i] <= res.best_trace[i - 1]);
}

TEST_CASE("golden section") {
  const double x = golden_section_minimize([](double t) { return (t - 0.3) * (t - 0.3); }, 0.0, 1.0);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-7));
}
