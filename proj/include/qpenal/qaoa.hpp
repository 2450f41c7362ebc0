#pragma once

// Exact statevector simulation of p-layer QAOA on an Ising cost Hamiltonian.
//
// |psi(beta, gamma)> = prod_l [ e^{-i beta_l sum_q X_q} e^{-i gamma_l H} ] |+>^n
//
// Basis state index s carries bit i = 1 for z_i = -1, matching QuboModel
// state indices, so amplitudes can be read back directly as QUBO bitstrings.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qpenal/errors.hpp"
#include "qpenal/ising.hpp"
#include "qpenal/linear_trust_region.hpp"

namespace qpenal {

inline constexpr int kMaxQubits = 24;
inline constexpr int kDefaultShots = 10000;

using Amplitude = std::complex<double>;

struct StateVector {
  int n_qubits = 0;
  std::vector<Amplitude> amplitudes;

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
  }
  std::vector<double> probabilities() const {
    std::vector<double> p(amplitudes.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes[i]);
    return p;
  }
};

struct QaoaParams {
  int layers = 1;
  std::vector<double> betas;
  std::vector<double> gammas;

  void validate() const {
    if (layers < 1) throw ParameterError("QAOA needs at least one layer");
    if (static_cast<int>(betas.size()) != layers || static_cast<int>(gammas.size()) != layers)
      throw ParameterError("need exactly one beta and one gamma per layer");
  }
  // [beta_1..beta_p, gamma_1..gamma_p]
  std::vector<double> flatten() const {
    std::vector<double> v(betas);
    v.insert(v.end(), gammas.begin(), gammas.end());
    return v;
  }
  static QaoaParams unflatten(std::span<const double> v) {
    const int p = static_cast<int>(v.size() / 2);
    return {p, {v.begin(), v.begin() + p}, {v.begin() + p, v.end()}};
  }
};

struct SampleHistogram {
  int shots = 0;
  std::map<std::uint64_t, int> counts;  // state index -> count
};

struct OptimizerTrace {
  std::vector<Evaluation> iterations;
  QaoaParams best_params;
  double best_value = 0.0;

  // best value seen after each evaluation
  std::vector<double> best_so_far() const {
    std::vector<double> out;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& e : iterations) out.push_back(b = std::min(b, e.value));
    return out;
  }
};

struct QaoaRun {
  QaoaParams params;
  double expectation = 0.0;
  SampleHistogram histogram;
  OptimizerTrace trace;
  double wall_time = 0.0;  // seconds
  bool converged = false;
};

struct QaoaConfig {
  int layers = 1;
  int max_iters = 200;
  int shots = kDefaultShots;
  std::uint64_t seed = 0;
  TrustRegionOptions optimizer{};
};

// ---- primitive layers ---------------------------------------------------------

inline void check_qubits(int n) {
  if (n < 1 || n > kMaxQubits)
    throw SizeError(std::to_string(n) + " qubits outside the supported range [1, " + std::to_string(kMaxQubits) + "]");
}

inline StateVector initial_state(int n) {
  check_qubits(n);
  const std::size_t dim = std::size_t{1} << n;
  return {n, std::vector<Amplitude>(dim, Amplitude(1.0 / std::sqrt(static_cast<double>(dim)), 0.0))};
}

// amplitude[s] *= exp(-i gamma E(s)); diag must exclude the constant term.
inline StateVector apply_cost_layer(StateVector state, std::span<const double> diag, double gamma) {
  if (diag.size() != state.amplitudes.size()) throw ParameterError("cost diagonal does not match the state dimension");
  for (std::size_t s = 0; s < diag.size(); ++s) state.amplitudes[s] *= std::polar(1.0, -gamma * diag[s]);
  return state;
}

inline StateVector apply_cost_layer(StateVector state, const IsingModel& m, double gamma) {
  if (m.num_spins != state.n_qubits) throw ParameterError("Ising model and state have different sizes");
  const auto diag = ising_diagonal(m, false, kMaxQubits);
  return apply_cost_layer(std::move(state), diag, gamma);
}

// exp(-i beta X) on every qubit.
inline StateVector apply_mixer_layer(StateVector state, double beta) {
  const double c = std::cos(beta);
  const Amplitude ms(0.0, -std::sin(beta));
  const std::size_t dim = state.amplitudes.size();
  auto& a = state.amplitudes;
  for (int q = 0; q < state.n_qubits; ++q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * bit) {
      for (std::size_t s = base; s < base + bit; ++s) {
        const Amplitude a0 = a[s], a1 = a[s | bit];
        a[s] = c * a0 + ms * a1;
        a[s | bit] = ms * a0 + c * a1;
      }
    }
  }
  return state;
}

namespace detail {

// Fixed-shape pairwise reduction so results do not depend on evaluation order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 64) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

}  // namespace detail

// Holds the cost diagonal of one model so repeated evaluations skip rebuilding it.
class QaoaSimulator {
 public:
  explicit QaoaSimulator(const IsingModel& model)
      : n_(model.num_spins), constant_(model.constant), diag_(checked_diagonal(model)) {}

  int num_qubits() const { return n_; }
  std::span<const double> diagonal() const { return diag_; }
  double constant() const { return constant_; }

  StateVector evolve(const QaoaParams& params) const {
    params.validate();
    StateVector s = initial_state(n_);
    for (int l = 0; l < params.layers; ++l) {
      s = apply_cost_layer(std::move(s), diag_, params.gammas[l]);
      s = apply_mixer_layer(std::move(s), params.betas[l]);
    }
    return s;
  }

  double expectation_of(const StateVector& s) const {
    std::vector<double> terms(diag_.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::norm(s.amplitudes[i]) * diag_[i];
    return constant_ + detail::pairwise_sum(terms);
  }

  double expectation(const QaoaParams& params) const { return expectation_of(evolve(params)); }

 private:
  static std::vector<double> checked_diagonal(const IsingModel& m) {
    check_qubits(m.num_spins);
    return ising_diagonal(m, false, kMaxQubits);
  }

  int n_;
  double constant_;
  std::vector<double> diag_;
};

inline double qaoa_expectation(const IsingModel& m, const QaoaParams& params) {
  return QaoaSimulator(m).expectation(params);
}

inline SampleHistogram sample_state(const StateVector& state, int shots, std::uint64_t seed) {
  if (shots < 1) throw ParameterError("shots must be >= 1");
  std::vector<double> cdf(state.amplitudes.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = acc += std::norm(state.amplitudes[i]);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, acc);
  SampleHistogram h{shots, {}};
  for (int k = 0; k < shots; ++k) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
    if (it == cdf.end()) --it;
    ++h.counts[static_cast<std::uint64_t>(it - cdf.begin())];
  }
  return h;
}

inline SampleHistogram sample(const IsingModel& m, const QaoaParams& params, int shots, std::uint64_t seed) {
  return sample_state(QaoaSimulator(m).evolve(params), shots, seed);
}

// Entry (i, j) is the p = 1 expectation at (beta_grid[i], gamma_grid[j]).
inline std::vector<std::vector<double>> landscape(const IsingModel& m, std::span<const double> beta_grid,
                                                  std::span<const double> gamma_grid) {
  if (beta_grid.empty() || gamma_grid.empty()) throw ParameterError("landscape grids must be non-empty");
  const QaoaSimulator sim(m);
  std::vector<std::vector<double>> out(beta_grid.size(), std::vector<double>(gamma_grid.size()));
  for (std::size_t i = 0; i < beta_grid.size(); ++i)
    for (std::size_t j = 0; j < gamma_grid.size(); ++j)
      out[i][j] = sim.expectation({1, {beta_grid[i]}, {gamma_grid[j]}});
  return out;
}

inline QaoaParams random_params(int layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> beta(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> gamma(0.0, 2.0 * std::numbers::pi);
  QaoaParams p{layers, {}, {}};
  for (int l = 0; l < layers; ++l) p.betas.push_back(beta(rng));
  for (int l = 0; l < layers; ++l) p.gammas.push_back(gamma(rng));
  return p;
}

// Seeds: parameter initialization uses cfg.seed, sampling uses cfg.seed + 1.
inline QaoaRun optimize(const QaoaSimulator& sim, const QaoaConfig& cfg, const std::optional<QaoaParams>& init = {}) {
  if (cfg.layers < 1) throw ParameterError("QAOA needs at least one layer");
  const auto start = std::chrono::steady_clock::now();
  const QaoaParams x0 = init ? *init : random_params(cfg.layers, cfg.seed);
  x0.validate();
  if (x0.layers != cfg.layers) throw ParameterError("initial parameters have the wrong layer count");

  TrustRegionOptions topt = cfg.optimizer;
  topt.max_evals = cfg.max_iters;
  auto res = minimize_linear_trust_region(
      [&](std::span<const double> v) { return sim.expectation(QaoaParams::unflatten(v)); }, x0.flatten(), topt);

  QaoaRun run;
  run.params = QaoaParams::unflatten(res.x);
  run.converged = res.converged;
  const StateVector final_state = sim.evolve(run.params);
  run.expectation = sim.expectation_of(final_state);
  run.trace.iterations = std::move(res.trace);
  run.trace.best_params = run.params;
  run.trace.best_value = res.value;
  run.histogram = sample_state(final_state, cfg.shots, cfg.seed + 1);
  run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

inline QaoaRun optimize(const IsingModel& m, const QaoaConfig& cfg, const std::optional<QaoaParams>& init = {}) {
  return optimize(QaoaSimulator(m), cfg, init);
}

}  // namespace qpenal
