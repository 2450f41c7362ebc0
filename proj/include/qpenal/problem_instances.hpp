#pragma once

// Bin Packing and Traveling Salesman instances, seeded generators,
// feasibility checks and exhaustive classical oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qpenal/errors.hpp"

namespace qpenal {

// Largest state space the brute-force oracles will walk.
inline constexpr std::uint64_t kEnumerationCap = 10'000'000;

struct BppInstance {
  int n_items = 0;
  int n_bins = 0;
  std::vector<int> weights;
  int capacity = 0;
  std::uint64_t seed = 0;

  bool operator==(const BppInstance&) const = default;
};

struct BppAssignment {
  std::vector<int> item_to_bin;
  std::vector<bool> bins_used;

  int bin_count() const {
    return static_cast<int>(std::count(bins_used.begin(), bins_used.end(), true));
  }
  bool operator==(const BppAssignment&) const = default;
};

// Assignment whose bins_used mask is exactly the set of bins receiving items.
inline BppAssignment make_assignment(std::vector<int> item_to_bin, int n_bins) {
  BppAssignment a{std::move(item_to_bin), std::vector<bool>(n_bins, false)};
  for (int b : a.item_to_bin) {
    if (b < 0 || b >= n_bins) throw ParameterError("bin index out of range");
    a.bins_used[b] = true;
  }
  return a;
}

struct TspInstance {
  int n = 0;
  std::vector<std::vector<double>> weight;  // weight[i][i] is never read
  std::uint64_t seed = 0;

  bool operator==(const TspInstance&) const = default;
};

struct TspTour {
  std::vector<int> order;  // starts at vertex 0
  double cost = 0.0;
};

struct ClassicalSolution {
  double objective = 0.0;
  std::variant<BppAssignment, TspTour> witness;
  std::uint64_t enumerated_count = 0;
};

using Instance = std::variant<BppInstance, TspInstance>;

enum class ProblemKind { Bpp, Tsp };

inline ProblemKind kind_of(const Instance& inst) {
  return std::holds_alternative<BppInstance>(inst) ? ProblemKind::Bpp : ProblemKind::Tsp;
}

inline void validate(const BppInstance& inst) {
  if (inst.n_items < 1 || inst.n_bins < 1) throw ParameterError("BPP needs n_items >= 1 and n_bins >= 1");
  if (static_cast<int>(inst.weights.size()) != inst.n_items)
    throw ParameterError("BPP weights must have exactly n_items entries");
  if (inst.capacity < 1) throw ParameterError("BPP capacity must be positive");
  for (int w : inst.weights)
    if (w < 1) throw ParameterError("BPP weights must be >= 1");
}

inline void validate(const TspInstance& inst) {
  if (inst.n < 3) throw ParameterError("TSP needs n >= 3");
  if (static_cast<int>(inst.weight.size()) != inst.n) throw ParameterError("TSP weight matrix must be n x n");
  for (int i = 0; i < inst.n; ++i) {
    if (static_cast<int>(inst.weight[i].size()) != inst.n) throw ParameterError("TSP weight matrix must be n x n");
    for (int j = 0; j < inst.n; ++j)
      if (i != j && !(inst.weight[i][j] >= 0.0)) throw ParameterError("TSP weights must be non-negative");
  }
}

inline BppInstance generate_bpp(std::uint64_t seed, int n_items, int n_bins, int weight_lo, int weight_hi,
                                int capacity) {
  if (n_items < 1 || n_bins < 1) throw ParameterError("n_items and n_bins must be >= 1");
  if (!(1 <= weight_lo && weight_lo <= weight_hi && weight_hi <= capacity))
    throw ParameterError("need 1 <= weight_lo <= weight_hi <= capacity");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(weight_lo, weight_hi);
  BppInstance inst{n_items, n_bins, {}, capacity, seed};
  inst.weights.reserve(n_items);
  for (int i = 0; i < n_items; ++i) inst.weights.push_back(dist(rng));
  return inst;
}

inline TspInstance generate_tsp(std::uint64_t seed, int n, double weight_lo, double weight_hi, bool symmetric) {
  if (n < 3) throw ParameterError("TSP needs n >= 3");
  if (!(0.0 <= weight_lo && weight_lo <= weight_hi)) throw ParameterError("need 0 <= weight_lo <= weight_hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(weight_lo, weight_hi);
  TspInstance inst{n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), seed};
  for (int i = 0; i < n; ++i) {
    for (int j = symmetric ? i + 1 : 0; j < n; ++j) {
      if (i == j) continue;
      // uniform_real_distribution(a, a) may still return a value != a on some libraries
      const double w = weight_lo == weight_hi ? weight_lo : dist(rng);
      inst.weight[i][j] = w;
      if (symmetric) inst.weight[j][i] = w;
    }
  }
  return inst;
}

inline bool bpp_feasible(const BppInstance& inst, const BppAssignment& a) {
  if (static_cast<int>(a.item_to_bin.size()) != inst.n_items || static_cast<int>(a.bins_used.size()) != inst.n_bins)
    throw ParameterError("assignment dimensions do not match instance");
  std::vector<long long> load(inst.n_bins, 0);
  for (int i = 0; i < inst.n_items; ++i) {
    const int b = a.item_to_bin[i];
    if (b < 0 || b >= inst.n_bins) return false;
    load[b] += inst.weights[i];
  }
  for (int j = 0; j < inst.n_bins; ++j)
    if (load[j] > static_cast<long long>(inst.capacity) * (a.bins_used[j] ? 1 : 0)) return false;
  return true;
}

namespace detail {

inline std::uint64_t checked_power(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > cap / std::max<std::uint64_t>(base, 1)) return cap + 1;
    r *= base;
  }
  return r;
}

inline std::uint64_t checked_factorial(int n, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) {
    if (r > cap / static_cast<std::uint64_t>(i)) return cap + 1;
    r *= static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace detail

inline ClassicalSolution solve_bpp_bruteforce(const BppInstance& inst, std::uint64_t cap = kEnumerationCap) {
  validate(inst);
  const std::uint64_t total = detail::checked_power(inst.n_bins, inst.n_items, cap);
  if (total > cap)
    throw SizeError("BPP enumeration K^N = " + std::to_string(inst.n_bins) + "^" + std::to_string(inst.n_items) +
                    " exceeds cap " + std::to_string(cap));

  std::vector<int> bins(inst.n_items, 0);
  std::vector<long long> load(inst.n_bins);
  int best = std::numeric_limits<int>::max();
  std::vector<int> best_bins;
  for (std::uint64_t step = 0; step < total; ++step) {
    std::fill(load.begin(), load.end(), 0);
    for (int i = 0; i < inst.n_items; ++i) load[bins[i]] += inst.weights[i];
    bool fits = true;
    int used = 0;
    for (long long l : load) {
      if (l > inst.capacity) fits = false;
      if (l > 0) ++used;
    }
    if (fits && used < best) {
      best = used;
      best_bins = bins;
    }
    // odometer increment, item 0 fastest
    for (int i = 0; i < inst.n_items; ++i) {
      if (++bins[i] < inst.n_bins) break;
      bins[i] = 0;
    }
  }
  if (best_bins.empty()) throw ParameterError("BPP instance has no feasible packing into n_bins bins");
  return {static_cast<double>(best), make_assignment(best_bins, inst.n_bins), total};
}

inline double tsp_tour_cost(const TspInstance& inst, std::span<const int> order) {
  if (static_cast<int>(order.size()) != inst.n) throw ParameterError("tour must visit every vertex once");
  std::vector<bool> seen(inst.n, false);
  for (int v : order) {
    if (v < 0 || v >= inst.n || seen[v]) throw ParameterError("tour is not a permutation of the vertices");
    seen[v] = true;
  }
  double cost = 0.0;
  for (int i = 0; i < inst.n; ++i) cost += inst.weight[order[i]][order[(i + 1) % inst.n]];
  return cost;
}

inline ClassicalSolution solve_tsp_bruteforce(const TspInstance& inst, std::uint64_t cap = kEnumerationCap) {
  validate(inst);
  const std::uint64_t total = detail::checked_factorial(inst.n - 1, cap);
  if (total > cap)
    throw SizeError("TSP enumeration (n-1)! for n = " + std::to_string(inst.n) + " exceeds cap " +
                    std::to_string(cap));
  std::vector<int> order(inst.n);
  std::iota(order.begin(), order.end(), 0);
  TspTour best{order, std::numeric_limits<double>::infinity()};
  std::uint64_t count = 0;
  do {
    ++count;
    const double c = tsp_tour_cost(inst, order);
    if (c < best.cost) best = {order, c};
  } while (std::next_permutation(order.begin() + 1, order.end()));
  return {best.cost, best, count};
}

// Closed tour described by a directed edge set, or nullopt when the edges
// do not form a single Hamiltonian cycle.
inline std::optional<TspTour> tour_from_edges(const TspInstance& inst, const std::vector<std::vector<bool>>& edge) {
  const int n = inst.n;
  std::vector<int> next(n, -1);
  std::vector<int> indeg(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !edge[i][j]) continue;
      if (next[i] != -1) return std::nullopt;
      next[i] = j;
      ++indeg[j];
    }
  }
  for (int i = 0; i < n; ++i)
    if (next[i] == -1 || indeg[i] != 1) return std::nullopt;
  TspTour tour;
  int v = 0;
  for (int step = 0; step < n; ++step) {
    if (step > 0 && v == 0) return std::nullopt;  // subtour
    tour.order.push_back(v);
    v = next[v];
  }
  if (v != 0) return std::nullopt;
  tour.cost = tsp_tour_cost(inst, tour.order);
  return tour;
}

// Upper bound on the classical objective over all feasible solutions.
inline double objective_upper_bound(const Instance& inst) {
  if (const auto* b = std::get_if<BppInstance>(&inst)) return b->n_bins;
  const auto& t = std::get<TspInstance>(inst);
  double ub = 0.0;
  for (int i = 0; i < t.n; ++i) {
    double row = 0.0;
    for (int j = 0; j < t.n; ++j)
      if (i != j) row = std::max(row, t.weight[i][j]);
    ub += row;
  }
  return ub;
}

inline ClassicalSolution solve_bruteforce(const Instance& inst) {
  return std::visit(
      [](const auto& i) {
        if constexpr (std::is_same_v<std::decay_t<decltype(i)>, BppInstance>)
          return solve_bpp_bruteforce(i);
        else
          return solve_tsp_bruteforce(i);
      },
      inst);
}

// ---- JSON ------------------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParameterError("expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ParameterError("unknown field '" + key + "'");
  }
}

template <class T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ParameterError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json instance_to_json(const Instance& inst) {
  if (const auto* b = std::get_if<BppInstance>(&inst)) {
    return {{"type", "bpp"}, {"seed", b->seed},         {"n_items", b->n_items},
            {"n_bins", b->n_bins}, {"weights", b->weights}, {"capacity", b->capacity}};
  }
  const auto& t = std::get<TspInstance>(inst);
  return {{"type", "tsp"}, {"seed", t.seed}, {"n", t.n}, {"weights", t.weight}};
}

inline Instance instance_from_json(const nlohmann::json& j) {
  const auto type = detail::required<std::string>(j, "type");
  if (type == "bpp") {
    detail::reject_unknown_keys(j, {"type", "seed", "n_items", "n_bins", "weights", "capacity"});
    BppInstance b;
    b.seed = detail::required<std::uint64_t>(j, "seed");
    b.n_items = detail::required<int>(j, "n_items");
    b.n_bins = detail::required<int>(j, "n_bins");
    b.weights = detail::required<std::vector<int>>(j, "weights");
    b.capacity = detail::required<int>(j, "capacity");
    validate(b);
    return b;
  }
  if (type == "tsp") {
    detail::reject_unknown_keys(j, {"type", "seed", "n", "weights"});
    TspInstance t;
    t.seed = detail::required<std::uint64_t>(j, "seed");
    t.n = detail::required<int>(j, "n");
    t.weight = detail::required<std::vector<std::vector<double>>>(j, "weights");
    validate(t);
    return t;
  }
  throw ParameterError("unknown instance type '" + type + "'");
}

// Stable identifier derived from the instance content (FNV-1a of its JSON).
inline std::string instance_id(const Instance& inst) {
  const std::string text = instance_to_json(inst).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string id = kind_of(inst) == ProblemKind::Bpp ? "bpp-" : "tsp-";
  for (int shift = 60; shift >= 0; shift -= 4) id += hex[(h >> shift) & 0xF];
  return id;
}

}  // namespace qpenal
