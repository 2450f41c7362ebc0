#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qpenal/errors.hpp"
#include "qpenal/qubo.hpp"

namespace qpenal {

// energy(z) = constant + sum_i field_i z_i + sum_{i<j} coupling_ij z_i z_j, z_i in {+1, -1}.
// Bits map to spins by b = 0 <-> z = +1, i.e. x = (1 - z) / 2.
struct IsingModel {
  int num_spins = 0;
  std::vector<double> field;
  std::map<std::pair<int, int>, double> coupling;
  double constant = 0.0;
};

inline int spin_of_bit(std::uint8_t b) { return b ? -1 : 1; }
inline std::uint8_t bit_of_spin(int z) { return z == -1 ? 1 : 0; }

inline IsingModel qubo_to_ising(const QuboModel& q) {
  IsingModel m;
  m.num_spins = q.num_vars;
  m.field.assign(q.num_vars, 0.0);
  m.constant = q.offset;
  for (int i = 0; i < q.num_vars; ++i) {
    m.constant += q.linear[i] / 2.0;
    m.field[i] -= q.linear[i] / 2.0;
  }
  for (const auto& [ij, v] : q.quadratic) {
    m.constant += v / 4.0;
    m.field[ij.first] -= v / 4.0;
    m.field[ij.second] -= v / 4.0;
    m.coupling[ij] += v / 4.0;
  }
  return m;
}

inline double ising_energy(const IsingModel& m, std::span<const int> spins) {
  if (static_cast<int>(spins.size()) != m.num_spins)
    throw ParameterError("spin string length " + std::to_string(spins.size()) + " != num_spins " +
                         std::to_string(m.num_spins));
  double e = m.constant;
  for (int i = 0; i < m.num_spins; ++i) {
    if (spins[i] != 1 && spins[i] != -1) throw ParameterError("spins must be +1 or -1");
    e += m.field[i] * spins[i];
  }
  for (const auto& [ij, v] : m.coupling) e += v * spins[ij.first] * spins[ij.second];
  return e;
}

// Energies of all 2^n basis states indexed like QuboModel states (bit i set
// means z_i = -1). Each entry is built from the entry with its highest set bit
// cleared, so no value accumulates more than n rounding steps.
inline std::vector<double> ising_diagonal(const IsingModel& m, bool include_constant, int max_spins = 24) {
  const int n = m.num_spins;
  if (n > max_spins) throw SizeError(std::to_string(n) + " spins exceed the " + std::to_string(max_spins) + " spin cap");
  std::vector<std::vector<std::pair<int, double>>> lower(n);  // couplings to lower-indexed spins
  std::vector<double> upper(n, 0.0);                          // summed couplings to higher-indexed spins
  for (const auto& [ij, v] : m.coupling) {
    lower[ij.second].push_back({ij.first, v});
    upper[ij.first] += v;
  }
  std::vector<double> diag(std::size_t{1} << n);
  double all_up = include_constant ? m.constant : 0.0;
  for (int i = 0; i < n; ++i) all_up += m.field[i];
  for (const auto& [_, v] : m.coupling) all_up += v;
  diag[0] = all_up;
  for (int k = 0; k < n; ++k) {
    const std::size_t top = std::size_t{1} << k;
    for (std::size_t s = 0; s < top; ++s) {
      // flipping z_k from +1 to -1 with spins below k given by s, spins above +1
      double delta = -2.0 * (m.field[k] + upper[k]);
      for (const auto& [j, v] : lower[k]) delta -= 2.0 * v * (((s >> j) & 1u) ? -1.0 : 1.0);
      diag[s | top] = diag[s] + delta;
    }
  }
  return diag;
}

inline nlohmann::json ising_to_json(const IsingModel& m) {
  nlohmann::json coup = nlohmann::json::array();
  for (const auto& [ij, v] : m.coupling) coup.push_back({ij.first, ij.second, v});
  return {{"num_spins", m.num_spins}, {"constant", m.constant}, {"field", m.field}, {"coupling", coup}};
}

inline IsingModel ising_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("Ising JSON must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "num_spins" && key != "constant" && key != "field" && key != "coupling")
      throw ParameterError("unknown Ising field '" + key + "'");
  IsingModel m;
  try {
    m.num_spins = j.at("num_spins").get<int>();
    m.constant = j.at("constant").get<double>();
    m.field = j.at("field").get<std::vector<double>>();
    for (const auto& t : j.at("coupling")) {
      if (!t.is_array() || t.size() != 3) throw ParameterError("coupling entries must be [i, j, value]");
      const int a = t[0].get<int>(), b = t[1].get<int>();
      if (a >= b || a < 0 || b >= m.num_spins) throw ParameterError("coupling entry needs 0 <= i < j < num_spins");
      m.coupling[{a, b}] += t[2].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed Ising JSON: ") + e.what());
  }
  if (static_cast<int>(m.field.size()) != m.num_spins) throw ParameterError("field length must equal num_spins");
  return m;
}

}  // namespace qpenal
