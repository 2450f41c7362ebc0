#pragma once

// Deterministic grid search over exponential-penalty parameters. Each grid
// point is accepted only if the exact QUBO ground state is feasible and
// oracle-optimal; accepted points are scored by QAOA approximation probability.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "qpenal/encoders.hpp"
#include "qpenal/ising.hpp"
#include "qpenal/metrics.hpp"
#include "qpenal/penalties.hpp"
#include "qpenal/problem_instances.hpp"
#include "qpenal/qaoa.hpp"

namespace qpenal {

struct SweepGrid {
  PenaltyFamily family = PenaltyFamily::F1;
  std::vector<int> k_grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> a_grid{2, 3, 4};
  std::vector<double> b_grid{2, 3, 4};
  std::vector<double> p_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> lambda_grid{1, 2, 5, 10};
};

struct SweepPoint {
  ExponentialPenaltyParams params;
  double lambda_eq = 1.0;
  bool feasible_ground_state = false;
  std::optional<double> approx_prob;  // only for feasible points
  std::optional<double> expectation;

  auto order_key() const { return std::tuple(params.k, params.a, params.b, params.p, lambda_eq); }
};

struct SweepResult {
  std::vector<SweepPoint> evaluated;  // ascending (k, a, b, p, lambda_eq)
  std::optional<std::size_t> best;    // index into evaluated; empty if no feasible point

  const SweepPoint* best_point() const { return best ? &evaluated[*best] : nullptr; }
};

// Worker count: QPENAL_THREADS if set, otherwise hardware concurrency.
inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QPENAL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

inline std::vector<SweepPoint> sweep_points(const SweepGrid& g) {
  std::vector<SweepPoint> pts;
  for (int k : g.k_grid) {
    std::vector<std::pair<double, double>> ab;
    switch (g.family) {
      case PenaltyFamily::F1: ab.push_back({0.0, 0.0}); break;
      case PenaltyFamily::F2:
        for (double a : g.a_grid) ab.push_back({a, 0.0});
        break;
      case PenaltyFamily::F3:
        for (double a : g.a_grid)
          for (double b : g.b_grid)
            if (a < b) ab.push_back({a, b});
        break;
    }
    for (const auto& [a, b] : ab)
      for (double p : g.p_grid)
        for (double lam : g.lambda_grid) {
          SweepPoint pt;
          pt.params = {g.family, k, a, b, p};
          pt.params.validate();
          if (!(lam > 0.0)) throw ParameterError("lambda_eq grid values must be > 0");
          pt.lambda_eq = lam;
          pts.push_back(pt);
        }
  }
  std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return x.order_key() < y.order_key(); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& x, const auto& y) { return x.order_key() == y.order_key(); }),
            pts.end());
  if (pts.empty()) throw ParameterError("sweep grid is empty");
  return pts;
}

// Highest approx_prob among feasible points; the earliest point wins ties.
inline std::optional<std::size_t> select_best(const std::vector<SweepPoint>& pts) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].feasible_ground_state || !pts[i].approx_prob) continue;
    if (!best || *pts[i].approx_prob > *pts[*best].approx_prob) best = i;
  }
  return best;
}

inline void evaluate_sweep_point(SweepPoint& pt, const Instance& inst, const ClassicalSolution& oracle,
                                 const std::set<std::uint64_t>& optimal, const QaoaConfig& qcfg) {
  const EncodedModel em = encode(inst, {pt.lambda_eq, pt.params});
  pt.feasible_ground_state = check_ground_states(em, oracle).feasible_and_optimal;
  if (!pt.feasible_ground_state) return;
  const QaoaRun run = optimize(qubo_to_ising(em.qubo), qcfg);
  pt.expectation = run.expectation;
  pt.approx_prob = approximation_probability(run.histogram, optimal);
}

inline SweepResult sweep(const Instance& inst, const SweepGrid& grid, const QaoaConfig& qcfg,
                         unsigned threads = thread_count()) {
  const auto nv = qubit_count(kind_of(inst), EncodingKind::Exponential, dims_of(inst));
  if (nv > kExhaustiveVarCap)
    throw SizeError(std::to_string(nv) + " > " + std::to_string(kExhaustiveVarCap) +
                    " exhaustive cap: sweep needs exhaustive ground-state verification, reduce instance");
  const ClassicalSolution oracle = solve_bruteforce(inst);
  SweepResult res{sweep_points(grid), std::nullopt};
  // the optimal set depends only on the variable layout, not on penalty values
  const auto& first = res.evaluated.front();
  const auto optimal = optimal_bitstrings(encode(inst, {first.lambda_eq, first.params}), oracle);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < res.evaluated.size(); i = next++) {
      try {
        evaluate_sweep_point(res.evaluated[i], inst, oracle, optimal, qcfg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(res.evaluated.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  res.best = select_best(res.evaluated);
  return res;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "family,k,a,b,p,lambda_eq,feasible,approx_prob,expectation\n";
  std::ostringstream line;
  for (const auto& pt : r.evaluated) {
    line.str({});
    line << std::setprecision(17) << to_string(pt.params.family) << ',' << pt.params.k << ',' << pt.params.a << ','
         << pt.params.b << ',' << pt.params.p << ',' << pt.lambda_eq << ',' << (pt.feasible_ground_state ? 1 : 0)
         << ',';
    if (pt.approx_prob) line << *pt.approx_prob;
    line << ',';
    if (pt.expectation) line << *pt.expectation;
    os << line.str() << '\n';
  }
}

}  // namespace qpenal
