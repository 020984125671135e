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


#include "rokit/rilb.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <optional>
#include <cmath>
#include <string>
#include <thread>

#include <Eigen/Dense>

#include "rokit/random.hpp"

namespace rokit {

namespace {

enum State : std::uint8_t { kG = 0, kE = 1, kLeakedG = 2, kLeakedE = 3 };

bool leaked(std::uint8_t s) { return s >= kLeakedG; }

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0,1]");
}

// Runs body(k) for k in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(int count, int threads, Body&& body) {
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

struct CycleKernel {
  const CycleModel& model;

  int read(std::uint8_t s, RandomStream& rng) const {
    switch (s) {
      case kG: return rng.bernoulli(model.assign_error_g) ? 1 : 0;
      case kE: return rng.bernoulli(model.assign_error_e) ? 0 : 1;
      default: return rng.bernoulli(model.leakage.p0_given_l) ? 0 : 1;
    }
  }

  // Transitions, then the readout of the resulting state.
  int cycle(std::uint8_t& s, RandomStream& rng) const {
    const auto& lk = model.leakage;
    if (leaked(s)) {
      if (lk.l_down > 0.0) {
        const double u = rng.uniform();
        if (u < lk.l_down) s = (u < 0.5 * lk.l_down) ? kG : kE;
      }
    } else {
      const double jump = s == kG ? model.heat : model.decay;
      if (lk.l_up > 0.0 || jump > 0.0) {
        const double u = rng.uniform();
        if (u < lk.l_up) {
          s = s == kG ? kLeakedG : kLeakedE;
        } else if (u < lk.l_up + jump) {
          s = s == kG ? kE : kG;
        }
      }
    }
    return read(s, rng);
  }
};

struct TableKernel {
  const ReadoutChannel& ch;

  int read(std::uint8_t s, RandomStream& rng) const {
    if (leaked(s)) {
      return rng.bernoulli(ch.leaked_outcome(s == kLeakedG ? Qubit::g : Qubit::e, 0)) ? 0 : 1;
    }
    return rng.bernoulli(ch.outcome(static_cast<Qubit>(s), 1)) ? 1 : 0;
  }

  int cycle(std::uint8_t& s, RandomStream& rng) const {
    if (leaked(s)) return read(s, rng);
    const Qubit in = static_cast<Qubit>(s);
    const double u = rng.uniform();
    double acc = 0.0;
    for (int post = 0; post < 3; ++post) {
      for (int x = 0; x < 2; ++x) {
        acc += ch.p(in, static_cast<Post>(post), x);
        if (u < acc) {
          s = static_cast<std::uint8_t>(post == 2 ? (in == Qubit::g ? kLeakedG : kLeakedE) : post);
          return x;
        }
      }
    }
    // Rounding left u above the cumulative sum; keep the state and report its likeliest outcome.
    return ch.p(in, in == Qubit::g ? Post::g : Post::e, 0) >= ch.p(in, in == Qubit::g ? Post::g : Post::e, 1) ? 0 : 1;
  }
};

template <class Kernel>
void simulate_randomization(const RILBConfig& cfg, const Kernel& kernel, const std::vector<bool>& inputs, int k,
                            std::uint8_t* outcomes, std::uint64_t* leaked_counts) {
  const int m_cycles = cfg.m_cycles;
  for (int n = 0; n < cfg.n_shots; ++n) {
    RandomStream rng(cfg.seed, stream_domain::kShots + (static_cast<std::uint64_t>(k) << 32) +
                                   static_cast<std::uint64_t>(n));
    std::uint8_t s = rng.bernoulli(cfg.p_ini) ? kLeakedG : kG;
    std::uint8_t* r = outcomes + static_cast<std::size_t>(n) * static_cast<std::size_t>(m_cycles + 1);
    r[0] = static_cast<std::uint8_t>(kernel.read(s, rng));
    if (leaked(s)) ++leaked_counts[0];
    for (int m = 1; m <= m_cycles; ++m) {
      if (inputs[static_cast<std::size_t>(m - 1)] && !leaked(s) && !rng.bernoulli(cfg.pi_error)) {
        s = s == kG ? kE : kG;
      }
      r[m] = static_cast<std::uint8_t>(kernel.cycle(s, rng));
      if (leaked(s)) ++leaked_counts[m];
    }
  }
}

}  // namespace

void RILBConfig::validate() const {
  if (m_cycles < 2) throw ValidationError("rilb: m_cycles must be >= 2");
  if (k_randomizations < 1) throw ValidationError("rilb: k_randomizations must be >= 1");
  if (n_shots < 1) throw ValidationError("rilb: n_shots must be >= 1");
  check_probability(pi_error, "rilb: pi_error");
  check_probability(p_ini, "rilb: p_ini");
}

void LeakageModel::validate() const {
  check_probability(l_up, "leakage: l_up");
  check_probability(l_down, "leakage: l_down");
  check_probability(p0_given_l, "leakage: p0_given_l");
  if (l_up + l_down > 1.0) throw ValidationError("leakage: l_up + l_down exceeds 1");
}

void CycleModel::validate() const {
  leakage.validate();
  check_probability(heat, "cycle model: heat");
  check_probability(decay, "cycle model: decay");
  check_probability(assign_error_g, "cycle model: assign_error_g");
  check_probability(assign_error_e, "cycle model: assign_error_e");
  if (leakage.l_up + heat > 1.0 || leakage.l_up + decay > 1.0) {
    throw ValidationError("cycle model: transition probabilities from one level exceed 1");
  }
}

Sequences generate_sequences(const RILBConfig& config, const Sequences& overrides) {
  config.validate();
  if (overrides.size() > static_cast<std::size_t>(config.k_randomizations)) {
    throw ValidationError("rilb: more override sequences than randomizations");
  }
  const auto m_cycles = static_cast<std::size_t>(config.m_cycles);
  Sequences out(static_cast<std::size_t>(config.k_randomizations));
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k < overrides.size()) {
      if (overrides[k].size() != m_cycles) {
        throw ValidationError("rilb: override sequence " + std::to_string(k) + " has the wrong length");
      }
      out[k] = overrides[k];
      continue;
    }
    RandomStream rng(config.seed, stream_domain::kSequences + k);
    out[k].resize(m_cycles);
    for (std::size_t m = 0; m < m_cycles; ++m) out[k][m] = (rng.next_u64() >> 63) != 0;
  }
  return out;
}

Sequences special_sequences(int m_cycles) {
  const auto m = static_cast<std::size_t>(m_cycles);
  std::vector<bool> idle(m, false), last(m, false), all(m, true);
  if (m > 0) last[m - 1] = true;
  return {idle, last, all};
}

bool RILBRun::outcome(int k, int n, int m) const {
  const auto bit = (static_cast<std::size_t>(k) * static_cast<std::size_t>(config.n_shots) +
                    static_cast<std::size_t>(n)) *
                       static_cast<std::size_t>(config.m_cycles + 1) +
                   static_cast<std::size_t>(m);
  return (packed[bit >> 3] >> (bit & 7)) & 1u;
}

RILBRun simulate_run(const RILBConfig& config, const ReadoutModel& model, const Sequences& sequences,
                     int threads) {
  config.validate();
  if (sequences.size() != static_cast<std::size_t>(config.k_randomizations)) {
    throw ValidationError("rilb: sequence count differs from k_randomizations");
  }
  for (const auto& s : sequences) {
    if (s.size() != static_cast<std::size_t>(config.m_cycles)) {
      throw ValidationError("rilb: sequence length differs from m_cycles");
    }
  }
  std::visit([](const auto& m) { m.validate(); }, model);

  const auto K = static_cast<std::size_t>(config.k_randomizations);
  const auto per_k = static_cast<std::size_t>(config.n_shots) * static_cast<std::size_t>(config.m_cycles + 1);
  std::vector<std::uint8_t> outcomes(K * per_k);
  std::vector<std::vector<std::uint64_t>> leaked(K, std::vector<std::uint64_t>(
                                                         static_cast<std::size_t>(config.m_cycles + 1), 0));

  parallel_for(config.k_randomizations, threads, [&](int k) {
    const auto uk = static_cast<std::size_t>(k);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, CycleModel>) {
            simulate_randomization(config, CycleKernel{m}, sequences[uk], k, outcomes.data() + uk * per_k,
                                   leaked[uk].data());
          } else {
            simulate_randomization(config, TableKernel{m}, sequences[uk], k, outcomes.data() + uk * per_k,
                                   leaked[uk].data());
          }
        },
        model);
  });

  RILBRun run;
  run.config = config;
  run.sequences = sequences;
  run.packed.assign((outcomes.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i]) run.packed[i >> 3] = static_cast<std::uint8_t>(run.packed[i >> 3] | (1u << (i & 7)));
  }
  run.leaked_counts.assign(static_cast<std::size_t>(config.m_cycles + 1), 0);
  for (const auto& per : leaked) {
    for (std::size_t m = 0; m < per.size(); ++m) run.leaked_counts[m] += per[m];
  }
  return run;
}

std::vector<int> decode(const std::vector<bool>& outcomes, const std::vector<bool>& inputs) {
  if (outcomes.size() != inputs.size() + 1) {
    throw ValidationError("decode: need one more outcome (r_0) than inputs");
  }
  std::vector<int> c(inputs.size());
  for (std::size_t m = 1; m < outcomes.size(); ++m) {
    const bool o = outcomes[m - 1] != outcomes[m];
    c[m - 1] = (inputs[m - 1] != o) ? -1 : 1;
  }
  return c;
}

std::vector<std::vector<std::int64_t>> correlation_sums(const RILBRun& run, int threads) {
  const auto& cfg = run.config;
  std::vector<std::vector<std::int64_t>> sums(static_cast<std::size_t>(cfg.k_randomizations),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(cfg.m_cycles), 0));
  parallel_for(cfg.k_randomizations, threads, [&](int k) {
    const auto& inputs = run.sequences[static_cast<std::size_t>(k)];
    auto& row = sums[static_cast<std::size_t>(k)];
    for (int n = 0; n < cfg.n_shots; ++n) {
      bool prev = run.outcome(k, n, 0);
      for (int m = 1; m <= cfg.m_cycles; ++m) {
        const bool cur = run.outcome(k, n, m);
        const bool o = prev != cur;
        row[static_cast<std::size_t>(m - 1)] += (inputs[static_cast<std::size_t>(m - 1)] != o) ? -1 : 1;
        prev = cur;
      }
    }
  });
  return sums;
}

RILBResult aggregate(const std::vector<std::vector<std::int64_t>>& sums, const Sequences& sequences, int n_shots) {
  if (n_shots < 1) throw ValidationError("aggregate: need at least one shot");
  if (sums.empty() || sums.size() != sequences.size()) {
    throw ValidationError("aggregate: correlation sums and sequences differ in count");
  }
  const std::size_t K = sums.size();
  const std::size_t M = sums.front().size();
  const double n = static_cast<double>(n_shots);

  RILBResult res;
  res.mean_correlation.resize(M);
  res.stderr_.resize(M);
  res.mean_x.resize(M);
  res.mean_i.resize(M);
  res.count_x.resize(M);
  res.count_i.resize(M);
  res.per_randomization.assign(K, std::vector<double>(M));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) res.per_randomization[k][m] = static_cast<double>(sums[k][m]) / n;
  }
  for (std::size_t m = 0; m < M; ++m) {
    std::int64_t total = 0, total_x = 0, total_i = 0;
    int cx = 0, ci = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::int64_t s = sums[k][m];
      total += s;
      if (sequences[k][m]) {
        total_x += s;
        ++cx;
      } else {
        total_i += s;
        ++ci;
      }
    }
    res.mean_correlation[m] = static_cast<double>(total) / (n * static_cast<double>(K));
    res.count_x[m] = cx;
    res.count_i[m] = ci;
    res.mean_x[m] = cx ? static_cast<double>(total_x) / (n * cx) : 0.0;
    res.mean_i[m] = ci ? static_cast<double>(total_i) / (n * ci) : 0.0;

    auto class_std = [&](bool want_x, double mean, int count) {
      if (count < 2) return -1.0;
      double ss = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        if (sequences[k][m] != want_x) continue;
        const double d = static_cast<double>(sums[k][m]) / n - mean;
        ss += d * d;
      }
      return std::sqrt(ss / (count - 1));
    };
    const double sx = class_std(true, res.mean_x[m], cx);
    const double si = class_std(false, res.mean_i[m], ci);
    if (sx >= 0.0 && si >= 0.0) {
      res.stderr_[m] = 0.5 * (sx + si);
    } else {
      res.stderr_[m] = std::max({sx, si, 0.0});
    }
  }
  return res;
}

RILBResult aggregate(const RILBRun& run, int threads) {
  return aggregate(correlation_sums(run, threads), run.sequences, run.config.n_shots);
}

namespace {

// Smallest weighted cost of (A + B q^m) / 2 against y at fixed L, over
// amplitudes with |A| <= 2 and |A + B| <= 2. The cost is a convex quadratic in
// (A, B), so when the free optimum is outside the box the answer lies on an edge.
double bounded_profile_cost(const std::vector<double>& y, const std::vector<double>& w,
                            const std::vector<double>& q) {
  constexpr double kLimit = 2.0;
  const std::size_t M = y.size();
  auto cost = [&](double a, double b) {
    double c = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double d = y[i] - 0.5 * (a + b * q[i]);
      c += w[i] * d * d;
    }
    return c;
  };
  auto feasible = [&](double a, double b) {
    return std::abs(a) <= kLimit + 1e-12 && std::abs(a + b) <= kLimit + 1e-12;
  };
  // Minimizes over t for the model 0.5 (u_i + t v_i), clamped to [lo, hi].
  auto line = [&](auto u, auto v, double lo, double hi) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      num += w[i] * v(i) * (y[i] - 0.5 * u(i));
      den += w[i] * 0.5 * v(i) * v(i);
    }
    return den > 0.0 ? std::clamp(num / den, lo, hi) : std::clamp(0.0, lo, hi);
  };

  double best = INFINITY;
  Eigen::Matrix2d n = Eigen::Matrix2d::Zero();
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < M; ++i) {
    const Eigen::Vector2d f(0.5, 0.5 * q[i]);
    n += w[i] * f * f.transpose();
    r += w[i] * y[i] * f;
  }
  const Eigen::FullPivLU<Eigen::Matrix2d> lu(n);
  if (lu.isInvertible()) {
    const Eigen::Vector2d sol = lu.solve(r);
    if (feasible(sol(0), sol(1))) return cost(sol(0), sol(1));
  }
  for (double a : {-kLimit, kLimit}) {
    // B in [-2 - a, 2 - a].
    const double b = line([&](std::size_t) { return a; }, [&](std::size_t i) { return q[i]; }, -kLimit - a, kLimit - a);
    best = std::min(best, cost(a, b));
  }
  for (double sum : {-kLimit, kLimit}) {
    // A + B = sum, so the model is 0.5 (sum q + A (1 - q)).
    const double a = line([&](std::size_t i) { return sum * q[i]; }, [&](std::size_t i) { return 1.0 - q[i]; },
                          -kLimit, kLimit);
    best = std::min(best, cost(a, sum - a));
  }
  return best;
}

std::vector<double> decay_powers(std::size_t M, double rate) {
  std::vector<double> q(M);
  for (std::size_t i = 0; i < M; ++i) q[i] = std::pow(1.0 - rate, static_cast<double>(i + 1));
  return q;
}

double bounded_profile_cost(const std::vector<double>& y, const std::vector<double>& w, double rate) {
  return bounded_profile_cost(y, w, decay_powers(y.size(), rate));
}

// Weighted mean of y and the cost of fitting it as a constant.
std::pair<double, double> constant_fit(const std::vector<double>& y, const std::vector<double>& w) {
  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  const double level = swy / sw;
  double cost = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) cost += w[i] * (y[i] - level) * (y[i] - level);
  return {level, cost};
}

// Largest cost reduction over a constant that any decay rate in the table buys.
double decay_statistic(const std::vector<double>& y, const std::vector<double>& w,
                       const std::vector<std::vector<double>>& powers) {
  double best = constant_fit(y, w).second;
  const double flat = best;
  for (const auto& q : powers) best = std::min(best, bounded_profile_cost(y, w, q));
  return flat - best;
}

// Bootstrap p-value of decay_statistic under "no decay".
double no_decay_p_value(const RILBResult& result, const std::vector<double>& w, const LeakageFitOptions& options) {
  const std::vector<double>& y = result.mean_correlation;
  const std::size_t M = y.size();
  std::vector<std::vector<double>> powers;
  for (int j = 0; j <= 120; ++j) powers.push_back(decay_powers(M, 1e-5 * std::pow(0.99 / 1e-5, j / 120.0)));
  const double observed = decay_statistic(y, w, powers);
  const double level = constant_fit(y, w).first;

  const auto& rows = result.per_randomization;
  const std::size_t K = rows.size();
  std::vector<double> sigma(M);
  if (K < 2) {
    for (std::size_t i = 0; i < M; ++i) {
      const double k = std::max(1.0, static_cast<double>(result.count_x[i] + result.count_i[i]));
      sigma[i] = result.stderr_[i] / std::sqrt(k);
    }
  }
  RandomStream stream(options.seed, stream_domain::kBootstrap);
  std::vector<double> replica(M);
  int exceed = 0;
  for (int r = 0; r < options.bootstrap; ++r) {
    if (K >= 2) {
      std::fill(replica.begin(), replica.end(), 0.0);
      for (std::size_t j = 0; j < K; ++j) {
        const auto& row = rows[stream.below(K)];
        for (std::size_t i = 0; i < M; ++i) replica[i] += row[i] - y[i];
      }
      for (double& v : replica) v = level + v / static_cast<double>(K);
    } else {
      for (std::size_t i = 0; i < M; ++i) replica[i] = level + sigma[i] * stream.normal();
    }
    if (decay_statistic(replica, w, powers) >= observed) ++exceed;
  }
  return (1.0 + exceed) / (1.0 + options.bootstrap);
}

// Likelihood-ratio 95 % interval for L over [0, 0.99] with the amplitudes
// profiled out; the residual variance comes from the best fit.
std::array<double, 2> profile_interval(const std::vector<double>& y, const std::vector<double>& w) {
  constexpr double kChi2 = 3.841458820694124;  // 95 % quantile, one degree of freedom
  constexpr double kTop = 0.99;
  std::vector<double> grid{0.0};
  for (int j = 0; j <= 600; ++j) grid.push_back(1e-6 * std::pow(kTop / 1e-6, j / 600.0));
  std::vector<double> cost(grid.size());
  std::size_t arg = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    cost[j] = bounded_profile_cost(y, w, grid[j]);
    if (cost[j] < cost[arg]) arg = j;
  }
  double lo_b = arg > 0 ? grid[arg - 1] : grid[0], hi_b = arg + 1 < grid.size() ? grid[arg + 1] : grid[arg];
  const double best_rate =
      golden_section_minimize([&](double l) { return bounded_profile_cost(y, w, l); }, lo_b, hi_b, 1e-10, 200);
  const double best = std::min(cost[arg], bounded_profile_cost(y, w, best_rate));
  const double dof = static_cast<double>(y.size()) - 3.0;
  const double cut = best + kChi2 * best / dof;
  auto inside = [&](double l) { return bounded_profile_cost(y, w, l) <= cut; };

  // Walk out from the optimum to the first grid point outside, then bisect.
  auto edge = [&](int dir) {
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(arg);
    while (j + dir >= 0 && j + dir < static_cast<std::ptrdiff_t>(grid.size()) &&
           cost[static_cast<std::size_t>(j + dir)] <= cut) {
      j += dir;
    }
    if (j + dir < 0 || j + dir >= static_cast<std::ptrdiff_t>(grid.size())) return grid[static_cast<std::size_t>(j)];
    double in = grid[static_cast<std::size_t>(j)], out = grid[static_cast<std::size_t>(j + dir)];
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (in + out);
      (inside(mid) ? in : out) = mid;
    }
    return in;
  };
  return {std::min(edge(-1), best_rate), std::max(edge(+1), best_rate)};
}

}  // namespace

LeakageFit fit_leakage(const RILBResult& result, const LeakageFitOptions& options) {
  const std::size_t M = result.mean_correlation.size();
  if (M < 3) throw ValidationError("fit_leakage: need at least 3 cycles");
  if (options.bootstrap < 0) throw ValidationError("fit_leakage: negative bootstrap count");
  if (!(options.significance > 0.0 && options.significance < 1.0)) {
    throw ValidationError("fit_leakage: significance must lie in (0, 1)");
  }
  const std::vector<double>& y = result.mean_correlation;

  double floor = 0.0;
  for (double s : result.stderr_) {
    if (s > 0.0 && (floor == 0.0 || s < floor)) floor = s;
  }
  std::vector<double> w(M, 1.0);
  if (floor > 0.0) {
    for (std::size_t i = 0; i < M; ++i) {
      const double s = std::max(result.stderr_[i], floor);
      w[i] = 1.0 / (s * s);
    }
  }

  // A / 2 is the asymptote of <C>_m and (A + B) / 2 its value at m = 0; both
  // are correlations and so lie in [-1, 1].
  constexpr double kLimit = 2.0;
  struct Pins {
    std::optional<double> a;
    std::optional<double> sum;  // A + B
  };

  // Weighted least squares for the unpinned amplitudes at fixed L; returns the cost.
  auto linear = [&](double rate, const Pins& pins, double& a, double& b) {
    auto decay = [&](std::size_t i) { return std::pow(1.0 - rate, static_cast<double>(i + 1)); };
    if (pins.a && pins.sum) {
      a = *pins.a;
      b = *pins.sum - a;
    } else if (pins.a) {
      a = *pins.a;
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        const double f = 0.5 * decay(i);
        num += w[i] * f * (y[i] - 0.5 * a);
        den += w[i] * f * f;
      }
      b = den > 0.0 ? num / den : 0.0;
    } else {
      Eigen::Matrix2d n = Eigen::Matrix2d::Zero();
      Eigen::Vector2d r = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < M; ++i) {
        const Eigen::Vector2d f(0.5, 0.5 * decay(i));
        n += w[i] * f * f.transpose();
        r += w[i] * y[i] * f;
      }
      const Eigen::Vector2d sol = n.ldlt().solve(r);
      a = sol(0);
      b = sol(1);
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double d = y[i] - 0.5 * (a + b * decay(i));
      cost += w[i] * d * d;
    }
    return std::isfinite(cost) ? cost : INFINITY;
  };

  std::vector<double> candidates;
  for (int j = 0; j <= 300; ++j) candidates.push_back(1e-5 * std::pow(0.9 / 1e-5, j / 300.0));
  {
    // Log-slope of the excess over the final point.
    const double asymptote = y[M - 1];
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i + 1 < M; ++i) {
      const double d = y[i] - asymptote;
      if (d <= 0.0) continue;
      const double x = static_cast<double>(i + 1), ly = std::log(d);
      sx += x;
      sy += ly;
      sxx += x * x;
      sxy += x * ly;
      ++count;
    }
    if (count >= 2) {
      const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
      const double rate = 1.0 - std::exp(slope);
      if (rate > 0.0 && rate < 1.0) candidates.push_back(rate);
    }
  }

  // Grid guess, then Levenberg-Marquardt over the unpinned parameters.
  auto fit_with = [&](const Pins& pins) {
    double best_rate = candidates.front(), best_cost = INFINITY, best_a = 0.0, best_b = 0.0;
    for (double rate : candidates) {
      double a, b;
      const double cost = linear(rate, pins, a, b);
      if (cost < best_cost) {
        best_cost = cost;
        best_rate = rate;
        best_a = a;
        best_b = b;
      }
    }
    std::vector<int> free;  // indices into (A, B, L)
    if (!pins.a) free.push_back(0);
    if (!pins.sum) free.push_back(1);
    free.push_back(2);
    auto expand = [&](std::span<const double> p) {
      std::array<double, 3> full{pins.a.value_or(0.0), 0.0, 0.0};
      for (std::size_t k = 0; k < free.size(); ++k) full[static_cast<std::size_t>(free[k])] = p[k];
      if (pins.sum) full[1] = *pins.sum - full[0];
      return full;
    };
    VectorModel model = [&](std::span<const double> p, std::span<double> out) {
      const auto q = expand(p);
      for (std::size_t i = 0; i < M; ++i) out[i] = 0.5 * (q[0] + q[1] * std::pow(1.0 - q[2], static_cast<double>(i + 1)));
    };
    const std::array<double, 3> guess{best_a, best_b, best_rate};
    const std::array<double, 3> typical{1.0, 1.0, std::max(best_rate, 1e-4)};
    std::vector<double> start;
    LsqOptions opt;
    for (int k : free) {
      start.push_back(guess[static_cast<std::size_t>(k)]);
      opt.typical.push_back(typical[static_cast<std::size_t>(k)]);
    }
    const FitResult sub = least_squares(model, y, w, start, opt);
    FitResult full = sub;
    const auto q = expand(sub.parameters);
    full.parameters.assign(q.begin(), q.end());
    full.covariance = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t r = 0; r < free.size(); ++r) {
      for (std::size_t c = 0; c < free.size(); ++c) {
        full.covariance(free[r], free[c]) = sub.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
    return full;
  };
  auto in_bounds = [&](const FitResult& f) {
    constexpr double tol = 1e-9;
    return std::abs(f.parameters[0]) <= kLimit + tol && std::abs(f.parameters[0] + f.parameters[1]) <= kLimit + tol;
  };

  LeakageFit out;
  // Weighted mean as A with B = L = 0, for data without a resolvable decay.
  auto flat = [&](bool converged) {
    const auto [level, cost] = constant_fit(y, w);
    double sw = 0.0;
    for (double v : w) sw += v;
    out.fit.parameters = {2.0 * level, 0.0, 0.0};
    out.fit.covariance = Eigen::MatrixXd::Zero(3, 3);
    out.fit.covariance(0, 0) = 4.0 * cost / static_cast<double>(M - 1) / sw;
    out.fit.residual_norm = std::sqrt(cost);
    out.fit.converged = converged;
    out.clamped = true;
    out.rate_interval = {0.0, profile_interval(y, w)[1]};
    return out;
  };
  if (options.bootstrap > 0) {
    out.decay_p_value = no_decay_p_value(result, w, options);
    out.resolved = out.decay_p_value < options.significance;
    if (!out.resolved) return flat(true);
  }

  std::optional<FitResult> fit;
  bool pinned = false;
  try {
    fit = fit_with({});
  } catch (const DegenerateFit&) {
  }
  if (!fit || !in_bounds(*fit)) {
    // The free fit ran off along the A, B trade-off that opens up when the
    // decay is nearly linear. Pin the amplitude(s) at the physical limit.
    pinned = true;
    Pins pins;
    const double a0 = fit ? fit->parameters[0] : 0.0;
    pins.a = std::clamp(a0, -kLimit, kLimit);
    try {
      fit = fit_with(pins);
      if (!in_bounds(*fit)) {
        pins.sum = std::clamp(fit->parameters[0] + fit->parameters[1], -kLimit, kLimit);
        fit = fit_with(pins);
      }
    } catch (const DegenerateFit&) {
      fit.reset();
    }
  }
  if (!fit) return flat(false);
  out.fit = *fit;
  out.pinned = pinned;
  if (out.fit.parameters[2] < 0.0) {
    out.fit.parameters[2] = 0.0;
    out.clamped = true;
  }
  out.rate_interval = profile_interval(y, w);
  return out;
}

double superoperator_leakage(const LeakageModel& model, int m, double p_ini) {
  if (m < 0) throw ValidationError("superoperator_leakage: m must be >= 0");
  const double total = model.l_up + model.l_down;
  if (total == 0.0) return p_ini;
  const double fixed = model.l_up / total;
  return fixed - std::pow(1.0 - total, m) * (fixed - p_ini);
}

}  // namespace rokit
