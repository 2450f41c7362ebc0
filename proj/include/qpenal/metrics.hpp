#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>

#include <json.hpp>

#include "qpenal/encoders.hpp"
#include "qpenal/errors.hpp"
#include "qpenal/problem_instances.hpp"
#include "qpenal/qaoa.hpp"

namespace qpenal {

// 1 - q_exp / q_slack
inline double qubit_reduction(std::int64_t q_exp, std::int64_t q_slack) {
  if (q_slack < 1) throw ParameterError("q_slack must be >= 1");
  return 1.0 - static_cast<double>(q_exp) / static_cast<double>(q_slack);
}

inline double mse(std::span<const double> classical, std::span<const double> quantum) {
  if (classical.empty() || classical.size() != quantum.size())
    throw ParameterError("mse needs two non-empty lists of equal length");
  double s = 0.0;
  for (std::size_t i = 0; i < classical.size(); ++i) {
    const double d = classical[i] - quantum[i];
    s += d * d;
  }
  return s / static_cast<double>(classical.size());
}

inline double time_ratio(double t_slack, double t_exp) {
  if (!(t_exp > 0.0)) throw ParameterError("t_exp must be > 0");
  return t_slack / t_exp;
}

inline double approximation_probability(const SampleHistogram& hist, const std::set<std::uint64_t>& optimal) {
  if (optimal.empty()) throw ParameterError("optimal bitstring set is empty");
  if (hist.shots < 1) throw ParameterError("histogram has no shots");
  long long hits = 0;
  for (const auto& [state, count] : hist.counts)
    if (optimal.contains(state)) hits += count;
  return static_cast<double>(hits) / static_cast<double>(hist.shots);
}

// Probability mass the state assigns to a set of basis states.
inline double exact_probability(const StateVector& state, const std::set<std::uint64_t>& states) {
  double p = 0.0;
  for (std::uint64_t s : states) p += std::norm(state.amplitudes.at(s));
  return p;
}

// All bitstrings that decode feasibly and reach the oracle objective.
inline std::set<std::uint64_t> optimal_bitstrings(const EncodedModel& em, const ClassicalSolution& oracle,
                                                  int max_vars = kExhaustiveVarCap) {
  const int n = em.qubo.num_vars;
  if (n > max_vars)
    throw SizeError(std::to_string(n) + " > " + std::to_string(max_vars) + " exhaustive cap for optimal bitstrings");
  std::set<std::uint64_t> out;
  const double tol = 1e-9 * std::max(1.0, std::abs(oracle.objective));
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
    const auto obj = feasible_objective(em, s);
    if (obj && std::abs(*obj - oracle.objective) <= tol) out.insert(s);
  }
  if (out.empty()) throw ParameterError("no feasible bitstring reaches the oracle objective");
  return out;
}

struct GroundStateCheck {
  GroundStates ground;
  bool feasible_and_optimal = false;  // every minimizer decodes to an oracle-optimal solution
};

inline GroundStateCheck check_ground_states(const EncodedModel& em, const ClassicalSolution& oracle,
                                            int max_vars = kExhaustiveVarCap) {
  GroundStateCheck c{exhaustive_ground_states(em.qubo, max_vars), true};
  const double tol = 1e-9 * std::max(1.0, std::abs(oracle.objective));
  for (std::uint64_t s : c.ground.states) {
    const auto obj = feasible_objective(em, s);
    if (!obj || std::abs(*obj - oracle.objective) > tol) {
      c.feasible_and_optimal = false;
      break;
    }
  }
  return c;
}

struct MetricReport {
  std::optional<std::int64_t> q_exp;
  std::optional<std::int64_t> q_slack;
  std::optional<double> q_re;
  std::optional<double> mse;
  std::optional<double> t_slack;
  std::optional<double> t_exp;
  std::optional<double> q_t;
  std::optional<double> approx_prob;
};

inline nlohmann::json metric_report_to_json(const MetricReport& r) {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* key, const auto& v) {
    if (v)
      j[key] = *v;
    else
      j[key] = nullptr;
  };
  put("q_exp", r.q_exp);
  put("q_slack", r.q_slack);
  put("q_re", r.q_re);
  put("mse", r.mse);
  put("t_slack", r.t_slack);
  put("t_exp", r.t_exp);
  put("q_t", r.q_t);
  put("approx_prob", r.approx_prob);
  return j;
}

}  // namespace qpenal
