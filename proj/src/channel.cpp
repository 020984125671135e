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


#include "rokit/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rokit/errors.hpp"
#include "rokit/numerics.hpp"

namespace rokit {

namespace {

const char* input_name(int s) { return s == 0 ? "g" : "e"; }

// Gauss-Legendre nodes and weights on [0, 1].
struct Quadrature {
  std::vector<double> x, w;
  explicit Quadrature(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
      w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const Quadrature& quadrature() {
  static const Quadrature q(48);
  return q;
}

}  // namespace

double ReadoutChannel::outcome(Qubit in, int x) const {
  const auto& t = joint[static_cast<int>(in)];
  return t[0][x] + t[1][x] + t[2][x];
}

double ReadoutChannel::leaked_outcome(Qubit in, int x) const {
  const double p0 = in == Qubit::g ? p0_leaked_g : p0_leaked_e;
  return x == 0 ? p0 : 1.0 - p0;
}

void ReadoutChannel::validate(double tol) const {
  for (int s = 0; s < 2; ++s) {
    double sum = 0.0;
    for (int post = 0; post < 3; ++post) {
      for (int x = 0; x < 2; ++x) {
        const double v = joint[s][post][x];
        if (!(v >= 0.0) || v > 1.0) {
          throw ValidationError(std::string("channel: row P(.,.|") + input_name(s) + ") has an entry outside [0,1]");
        }
        sum += v;
      }
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError(std::string("channel: row P(.,.|") + input_name(s) + ") sums to " +
                            std::to_string(sum) + ", not 1");
    }
  }
  for (double p : {p0_leaked_g, p0_leaked_e}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("channel: P(0|l) must lie in [0,1]");
  }
}

ReadoutChannel ReadoutChannel::identity() {
  ReadoutChannel ch;
  ch.p(Qubit::g, Post::g, 0) = 1.0;
  ch.p(Qubit::e, Post::e, 1) = 1.0;
  return ch;
}

ChannelMetrics metrics_from_channel(const ReadoutChannel& ch) {
  ch.validate(1e-9);
  ChannelMetrics m;
  auto fill = [&](Qubit s, ChannelMetrics::Values& v) {
    const Qubit other = s == Qubit::g ? Qubit::e : Qubit::g;
    const Post same = s == Qubit::g ? Post::g : Post::e;
    const Post flipped = s == Qubit::g ? Post::e : Post::g;
    const int right = static_cast<int>(s);
    v.fidelity = ch.outcome(s, right);
    if (!(v.fidelity > 0.0)) {
      throw NumericalError(std::string("metrics: repeatability undefined, F_") + input_name(right) + " = 0");
    }
    v.qnd_fidelity = ch.p(s, same, right);
    v.qndness = ch.p(s, same, 0) + ch.p(s, same, 1);
    v.xi = (ch.p(s, flipped, right) * ch.outcome(other, right) +
            ch.p(s, Post::leaked, right) * ch.leaked_outcome(s, right)) /
           v.fidelity;
    v.repeatability = v.qnd_fidelity + v.xi;
    v.leakage = ch.p(s, Post::leaked, 0) + ch.p(s, Post::leaked, 1);
  };
  fill(Qubit::g, m.g);
  fill(Qubit::e, m.e);
  m.mean.fidelity = 0.5 * (m.g.fidelity + m.e.fidelity);
  m.mean.repeatability = 0.5 * (m.g.repeatability + m.e.repeatability);
  m.mean.qndness = 0.5 * (m.g.qndness + m.e.qndness);
  m.mean.qnd_fidelity = 0.5 * (m.g.qnd_fidelity + m.e.qnd_fidelity);
  m.mean.xi = 0.5 * (m.g.xi + m.e.xi);
  m.mean.leakage = 0.5 * (m.g.leakage + m.e.leakage);
  return m;
}

std::array<std::array<double, 2>, 2> two_readout_enumerate(const ReadoutChannel& ch, Qubit input) {
  std::array<std::array<double, 2>, 2> out{};
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x2 = 0; x2 < 2; ++x2) {
      out[x1][x2] = ch.p(input, Post::g, x1) * ch.outcome(Qubit::g, x2) +
                    ch.p(input, Post::e, x1) * ch.outcome(Qubit::e, x2) +
                    ch.p(input, Post::leaked, x1) * ch.leaked_outcome(input, x2);
    }
  }
  return out;
}

IQModel IQModel::midpoint(std::complex<double> g, std::complex<double> e, double sigma,
                          std::vector<std::complex<double>> leaks) {
  IQModel m;
  m.center_g = g;
  m.center_e = e;
  m.leak_centers = std::move(leaks);
  m.sigma = sigma;
  m.projection_phase = std::arg(e - g);
  m.threshold = 0.5 * (m.project(g) + m.project(e));
  return m;
}

void IQModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("iq model: sigma must be positive");
  if (project(center_e) == project(center_g)) {
    throw ValidationError("iq model: g and e centers coincide on the projection axis");
  }
}

double IQModel::project(std::complex<double> z) const {
  return (z * std::polar(1.0, -projection_phase)).real();
}

int IQModel::classify(std::complex<double> z) const {
  const double orient = project(center_e) > project(center_g) ? 1.0 : -1.0;
  return (project(z) - threshold) * orient > 0.0 ? 1 : 0;
}

double IQModel::p_one(std::complex<double> center) const {
  const double orient = project(center_e) > project(center_g) ? 1.0 : -1.0;
  const double d = (project(center) - threshold) * orient;
  if (sigma == 0.0) return d > 0.0 ? 1.0 : (d < 0.0 ? 0.0 : 0.5);
  return normal_cdf(d / sigma);
}

std::complex<double> IQModel::leak_center(Qubit from) const {
  if (leak_centers.empty()) return center_e;
  const std::size_t i = from == Qubit::g ? 0 : 1;
  return leak_centers[std::min(i, leak_centers.size() - 1)];
}

double IQModel::snr() const {
  const double d = project(center_e) - project(center_g);
  return d * d / (sigma * sigma);
}

IQSample sample_iq(const IQModel& model, IQBlob state, RandomStream& stream) {
  std::complex<double> center;
  switch (state.kind) {
    case IQBlob::g: center = model.center_g; break;
    case IQBlob::e: center = model.center_e; break;
    case IQBlob::leaked:
      if (model.leak_centers.empty()) {
        center = model.center_e;
      } else if (state.leak_index < model.leak_centers.size()) {
        center = model.leak_centers[state.leak_index];
      } else {
        throw ValidationError("sample_iq: leakage blob index out of range");
      }
      break;
  }
  const double re = stream.normal();
  const double im = stream.normal();
  IQSample out;
  out.point = center + model.sigma * std::complex<double>(re, im);
  out.outcome = model.classify(out.point);
  return out;
}

double optimal_threshold(const IQModel& model) {
  model.validate();
  const double a = model.project(model.center_g);
  const double b = model.project(model.center_e);
  auto error = [&](double thr) {
    IQModel m = model;
    m.threshold = thr;
    return 0.5 * (m.p_one(model.center_g) + 1.0 - m.p_one(model.center_e));
  };
  return golden_section_minimize(error, std::min(a, b), std::max(a, b), 1e-12);
}

void TransitionRates::validate() const {
  for (double p : {g_to_e, g_to_leak, e_to_g, e_to_leak}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("transition rates: probabilities must lie in [0,1]");
  }
  if (!(window_fraction >= 0.0 && window_fraction <= 1.0)) {
    throw ValidationError("transition rates: window_fraction must lie in [0,1]");
  }
  if (g_to_e + g_to_leak > 1.0) throw ValidationError("transition rates: g_to_e + g_to_leak exceeds 1");
  if (e_to_g + e_to_leak > 1.0) throw ValidationError("transition rates: e_to_g + e_to_leak exceeds 1");
}

ReadoutChannel channel_from_physics(double snr, const TransitionRates& rates, const IQModel& iq) {
  rates.validate();
  IQModel model = iq;
  if (std::isinf(snr) && snr > 0.0) {
    model.sigma = 0.0;
  } else if (snr > 0.0) {
    const double d = std::abs(model.project(model.center_e) - model.project(model.center_g));
    if (!(d > 0.0)) throw ValidationError("channel_from_physics: g and e centers coincide on the projection axis");
    model.sigma = d / std::sqrt(snr);
  } else {
    model.validate();
  }

  // P(1) when the state jumps from `from` to `to` at a uniformly random time.
  auto p_one_jump = [&](std::complex<double> from, std::complex<double> to) {
    if (model.sigma == 0.0) {
      const double orient = model.project(model.center_e) > model.project(model.center_g) ? 1.0 : -1.0;
      // Projected mean is linear in the jump time u: d(u) = d_to + u (d_from - d_to).
      const double d_to = (model.project(to) - model.threshold) * orient;
      const double d_from = (model.project(from) - model.threshold) * orient;
      if (d_to == d_from) return d_to > 0.0 ? 1.0 : (d_to < 0.0 ? 0.0 : 0.5);
      const double cross = std::clamp(d_to / (d_to - d_from), 0.0, 1.0);
      return d_from > d_to ? 1.0 - cross : cross;
    }
    const auto& q = quadrature();
    double sum = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) sum += q.w[i] * model.p_one(q.x[i] * from + (1.0 - q.x[i]) * to);
    return sum;
  };

  ReadoutChannel ch;
  auto fill = [&](Qubit s, double to_other, double to_leak) {
    const std::complex<double> home = s == Qubit::g ? model.center_g : model.center_e;
    const std::complex<double> other = s == Qubit::g ? model.center_e : model.center_g;
    const std::complex<double> leak = model.leak_center(s);
    const Post same = s == Qubit::g ? Post::g : Post::e;
    const Post flipped = s == Qubit::g ? Post::e : Post::g;
    const double stay = 1.0 - to_other - to_leak;
    const double p1_stay = model.p_one(home);
    const double f = rates.window_fraction;
    const double p1_other = f * p_one_jump(home, other) + (1.0 - f) * p1_stay;
    const double p1_leak = f * p_one_jump(home, leak) + (1.0 - f) * p1_stay;
    ch.p(s, same, 1) = stay * p1_stay;
    ch.p(s, same, 0) = stay * (1.0 - p1_stay);
    ch.p(s, flipped, 1) = to_other * p1_other;
    ch.p(s, flipped, 0) = to_other * (1.0 - p1_other);
    ch.p(s, Post::leaked, 1) = to_leak * p1_leak;
    ch.p(s, Post::leaked, 0) = to_leak * (1.0 - p1_leak);
  };
  fill(Qubit::g, rates.g_to_e, rates.g_to_leak);
  fill(Qubit::e, rates.e_to_g, rates.e_to_leak);
  ch.p0_leaked_g = 1.0 - model.p_one(model.leak_center(Qubit::g));
  ch.p0_leaked_e = 1.0 - model.p_one(model.leak_center(Qubit::e));
  return ch;
}

}  // namespace rokit
