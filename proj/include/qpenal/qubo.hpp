#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qpenal/binary_polynomial.hpp"
#include "qpenal/errors.hpp"

namespace qpenal {

using Bits = std::vector<std::uint8_t>;

// Default exhaustive-enumeration limit for per-bitstring verification.
inline constexpr int kExhaustiveVarCap = 16;

// Bit i of a state index is variable i.
inline Bits bits_from_index(std::uint64_t state, int n) {
  Bits b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) b[i] = (state >> i) & 1u;
  return b;
}

inline std::uint64_t index_from_bits(std::span<const std::uint8_t> bits) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s |= std::uint64_t{1} << i;
  return s;
}

// Character i is variable i ("x_0_0" first).
inline std::string bitstring(std::uint64_t state, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if ((state >> i) & 1u) s[i] = '1';
  return s;
}

inline std::uint64_t state_from_bitstring(const std::string& s) {
  if (s.size() > 63) throw SizeError("bitstring longer than 63 characters");
  std::uint64_t state = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      state |= std::uint64_t{1} << i;
    else if (s[i] != '0')
      throw ParameterError("bitstring may only contain '0' and '1'");
  }
  return state;
}

// energy(b) = offset + sum_i linear_i b_i + sum_{i<j} quadratic_ij b_i b_j
struct QuboModel {
  int num_vars = 0;
  std::vector<double> linear;
  std::map<std::pair<int, int>, double> quadratic;  // keys satisfy i < j
  double offset = 0.0;
  std::vector<std::string> labels;

  double energy(std::uint64_t state) const {
    double e = offset;
    for (int i = 0; i < num_vars; ++i)
      if ((state >> i) & 1u) e += linear[i];
    for (const auto& [ij, v] : quadratic)
      if (((state >> ij.first) & 1u) && ((state >> ij.second) & 1u)) e += v;
    return e;
  }
};

inline double qubo_evaluate(const QuboModel& m, std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != m.num_vars)
    throw ParameterError("bitstring length " + std::to_string(bits.size()) + " != num_vars " +
                         std::to_string(m.num_vars));
  double e = m.offset;
  for (int i = 0; i < m.num_vars; ++i)
    if (bits[i]) e += m.linear[i];
  for (const auto& [ij, v] : m.quadratic)
    if (bits[ij.first] && bits[ij.second]) e += v;
  return e;
}

inline QuboModel qubo_from_polynomial(const BinaryPolynomial& poly, int num_vars, std::vector<std::string> labels) {
  const BinaryPolynomial r = reduce(poly);
  QuboModel m;
  m.num_vars = num_vars;
  m.linear.assign(num_vars, 0.0);
  m.labels = std::move(labels);
  if (static_cast<int>(m.labels.size()) != num_vars) throw ParameterError("need one label per variable");
  for (const auto& [mono, c] : r.terms()) {
    for (int i : mono)
      if (i >= num_vars) throw ParameterError("polynomial references variable outside the model");
    switch (mono.size()) {
      case 0: m.offset += c; break;
      case 1: m.linear[mono[0]] += c; break;
      default: m.quadratic[{mono[0], mono[1]}] += c; break;
    }
  }
  return m;
}

struct GroundStates {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> states;  // ascending
};

inline double degeneracy_tolerance(double energy) { return 1e-9 * std::max(1.0, std::abs(energy)); }

// Exact minimizers by Gray-code enumeration of all 2^num_vars states.
inline GroundStates exhaustive_ground_states(const QuboModel& m, int max_vars = kExhaustiveVarCap) {
  const int n = m.num_vars;
  if (n > max_vars || n > 40)
    throw SizeError(std::to_string(n) + " > " + std::to_string(max_vars) +
                    " exhaustive cap: skip ground-state verification or reduce instance");
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& [ij, v] : m.quadratic) {
    adj[ij.first].push_back({ij.second, v});
    adj[ij.second].push_back({ij.first, v});
  }
  std::vector<double> field(m.linear.begin(), m.linear.end());
  std::uint64_t state = 0;
  double e = m.offset;
  double best = e;
  std::vector<std::uint64_t> cand{0};
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    const bool on = !((state >> i) & 1u);
    state ^= std::uint64_t{1} << i;
    const double sign = on ? 1.0 : -1.0;
    e += sign * field[i];
    for (const auto& [j, v] : adj[i]) field[j] += sign * v;
    if ((k & 0xFFF) == 0) e = m.energy(state);  // bound accumulated rounding
    if (e < best - degeneracy_tolerance(best)) {
      best = e;
      cand.clear();
    }
    if (e <= best + degeneracy_tolerance(best)) cand.push_back(state);
  }
  GroundStates gs;
  for (std::uint64_t s : cand) gs.energy = std::min(gs.energy, m.energy(s));
  for (std::uint64_t s : cand)
    if (m.energy(s) <= gs.energy + degeneracy_tolerance(gs.energy)) gs.states.push_back(s);
  std::sort(gs.states.begin(), gs.states.end());
  return gs;
}

inline nlohmann::json qubo_to_json(const QuboModel& m) {
  nlohmann::json quad = nlohmann::json::array();
  for (const auto& [ij, v] : m.quadratic) {
    if (ij.first >= ij.second) throw ParameterError("quadratic key must satisfy i < j");
    quad.push_back({ij.first, ij.second, v});
  }
  return {{"num_vars", m.num_vars}, {"offset", m.offset}, {"linear", m.linear}, {"quadratic", quad},
          {"labels", m.labels}};
}

inline QuboModel qubo_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("QUBO JSON must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "num_vars" && key != "offset" && key != "linear" && key != "quadratic" && key != "labels")
      throw ParameterError("unknown QUBO field '" + key + "'");
  QuboModel m;
  try {
    m.num_vars = j.at("num_vars").get<int>();
    m.offset = j.at("offset").get<double>();
    m.linear = j.at("linear").get<std::vector<double>>();
    m.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& t : j.at("quadratic")) {
      if (!t.is_array() || t.size() != 3) throw ParameterError("quadratic entries must be [i, j, value]");
      const int a = t[0].get<int>(), b = t[1].get<int>();
      if (a >= b || a < 0 || b >= m.num_vars) throw ParameterError("quadratic entry needs 0 <= i < j < num_vars");
      m.quadratic[{a, b}] += t[2].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed QUBO JSON: ") + e.what());
  }
  if (m.num_vars < 0 || static_cast<int>(m.linear.size()) != m.num_vars ||
      static_cast<int>(m.labels.size()) != m.num_vars)
    throw ParameterError("QUBO linear/labels length must equal num_vars");
  return m;
}

}  // namespace qpenal
