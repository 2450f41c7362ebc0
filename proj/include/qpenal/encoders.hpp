#pragma once

// QUBO encoders for BPP and TSP. Equality constraints always become
// lambda_eq * (g(x))^2. Inequalities h(x) <= 0 become either
//   slack:        lambda_ineq * (h(x) + S)^2 with S a binary-weighted slack, or
//   exponential:  second-order exponential penalty of h(x) / bound,
// where bound is the constraint's right-hand side (C for a bin, |Q|-1 for a
// subtour set), so every scaled constraint lives on the same [-1, ...] range.

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qpenal/binary_polynomial.hpp"
#include "qpenal/penalties.hpp"
#include "qpenal/problem_instances.hpp"
#include "qpenal/qubo.hpp"

namespace qpenal {

enum class EncodingKind { Slack, Exponential };

inline std::string to_string(EncodingKind k) { return k == EncodingKind::Slack ? "slack" : "exp"; }

inline EncodingKind parse_encoding(const std::string& s) {
  if (s == "slack") return EncodingKind::Slack;
  if (s == "exp" || s == "exponential") return EncodingKind::Exponential;
  throw ParameterError("unknown encoding '" + s + "' (expected slack or exp)");
}

// Unscaled inequality h(x) <= 0 and, for slack encodings, the bits of S.
struct InequalityRecord {
  AffineExpr h;
  std::vector<std::pair<int, double>> slack_bits;  // (variable, weight)
};

struct EncodedModel {
  QuboModel qubo;
  Instance instance;
  EncodingKind kind = EncodingKind::Exponential;
  PenaltyWeights weights;
  int num_problem_vars = 0;  // x (and B) variables precede any slack bits
  std::vector<InequalityRecord> inequalities;
};

struct ProblemDims {
  int n_items = 0;
  int n_bins = 0;
  int capacity = 0;
  int n = 0;  // TSP vertices
};

inline ProblemDims dims_of(const Instance& inst) {
  if (const auto* b = std::get_if<BppInstance>(&inst)) return {b->n_items, b->n_bins, b->capacity, 0};
  return {0, 0, 0, std::get<TspInstance>(inst).n};
}

// Bits needed for a slack ranging over [0, range]: ceil(log2(range + 1)).
inline int slack_width(long long range) { return static_cast<int>(std::bit_width(static_cast<unsigned long long>(range))); }

inline std::int64_t qubit_count(ProblemKind problem, EncodingKind encoding, const ProblemDims& d) {
  if (problem == ProblemKind::Bpp) {
    if (d.n_items < 1 || d.n_bins < 1) throw ParameterError("BPP dims need n_items, n_bins >= 1");
    const std::int64_t base = static_cast<std::int64_t>(d.n_items) * d.n_bins + d.n_bins;
    if (encoding == EncodingKind::Exponential) return base;
    if (d.capacity < 1) throw ParameterError("BPP slack count needs capacity >= 1");
    return base + static_cast<std::int64_t>(d.n_bins) * slack_width(d.capacity);
  }
  if (d.n < 3) throw ParameterError("TSP dims need n >= 3");
  if (d.n > 62) throw SizeError("TSP qubit count overflows for n > 62");
  const std::int64_t base = static_cast<std::int64_t>(d.n) * (d.n - 1);
  if (encoding == EncodingKind::Exponential) return base;
  std::int64_t total = base;
  std::int64_t binom = d.n;  // C(n, 1)
  for (int q = 2; q <= d.n - 1; ++q) {
    binom = binom * (d.n - q + 1) / q;
    total += binom * slack_width(q - 1);
  }
  return total;
}

// 1 + upper bound of the classical objective.
inline double default_lambda_eq(const Instance& inst) { return 1.0 + objective_upper_bound(inst); }

// ---- variable layout ---------------------------------------------------------

inline int bpp_x_index(const BppInstance& inst, int item, int bin) { return item * inst.n_bins + bin; }
inline int bpp_b_index(const BppInstance& inst, int bin) { return inst.n_items * inst.n_bins + bin; }

inline int tsp_edge_index(int n, int i, int j) { return i * (n - 1) + (j < i ? j : j - 1); }

// Vertex subsets Q with 2 <= |Q| <= n-1 as bitmasks, ascending.
inline std::vector<std::uint64_t> subtour_subsets(int n, std::uint64_t cap = 1'000'000) {
  if (n > 40 || (std::uint64_t{1} << n) - n - 2 > cap)
    throw SizeError("subtour enumeration for n = " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  std::vector<std::uint64_t> subsets;
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t m = 1; m < full; ++m)
    if (std::popcount(m) >= 2) subsets.push_back(m);
  return subsets;
}

namespace detail {

struct Builder {
  BinaryPolynomial poly;
  std::vector<std::string> labels;
  std::vector<InequalityRecord> inequalities;

  int add_var(std::string label) {
    labels.push_back(std::move(label));
    return static_cast<int>(labels.size()) - 1;
  }

  void add_equality(const AffineExpr& g, double lambda) { poly += lambda * square_affine(g); }

  void add_slack_inequality(const AffineExpr& h, long long range, double lambda, const std::string& tag) {
    InequalityRecord rec{h, {}};
    AffineExpr with_slack = h;
    for (int bit = 0; bit < slack_width(range); ++bit) {
      const int v = add_var("slack_" + tag + "_b" + std::to_string(bit));
      const double w = static_cast<double>(std::uint64_t{1} << bit);
      with_slack.add(v, w);
      rec.slack_bits.push_back({v, w});
    }
    poly += lambda * square_affine(with_slack);
    inequalities.push_back(std::move(rec));
  }

  void add_exponential_inequality(const AffineExpr& h, double bound, const ExponentialPenaltyParams& params) {
    AffineExpr scaled = h;
    scaled *= 1.0 / bound;
    poly += exponential_penalty(scaled, params);
    inequalities.push_back({h, {}});
  }

  EncodedModel finish(Instance inst, EncodingKind kind, const PenaltyWeights& w, int problem_vars) {
    EncodedModel out;
    const int n = static_cast<int>(labels.size());
    out.qubo = qubo_from_polynomial(poly, n, std::move(labels));
    out.instance = std::move(inst);
    out.kind = kind;
    out.weights = w;
    out.num_problem_vars = problem_vars;
    out.inequalities = std::move(inequalities);
    return out;
  }
};

inline void require_kind(const PenaltyWeights& w, EncodingKind kind) {
  w.validate();
  const bool is_exp = std::holds_alternative<ExponentialPenaltyParams>(w.inequality);
  if (is_exp != (kind == EncodingKind::Exponential))
    throw ParameterError("penalty weights do not match the requested encoding");
}

inline EncodedModel encode_bpp(const BppInstance& inst, const PenaltyWeights& w, EncodingKind kind) {
  validate(inst);
  require_kind(w, kind);
  Builder bld;
  for (int i = 0; i < inst.n_items; ++i)
    for (int j = 0; j < inst.n_bins; ++j) bld.add_var("x_" + std::to_string(i) + "_" + std::to_string(j));
  for (int j = 0; j < inst.n_bins; ++j) bld.add_var("B_" + std::to_string(j));
  const int problem_vars = static_cast<int>(bld.labels.size());

  for (int j = 0; j < inst.n_bins; ++j) bld.poly.add({bpp_b_index(inst, j)}, 1.0);

  for (int i = 0; i < inst.n_items; ++i) {
    AffineExpr g;
    for (int j = 0; j < inst.n_bins; ++j) g.add(bpp_x_index(inst, i, j), 1.0);
    g += -1.0;
    bld.add_equality(g, w.lambda_eq);
  }

  for (int j = 0; j < inst.n_bins; ++j) {
    AffineExpr h;
    for (int i = 0; i < inst.n_items; ++i) h.add(bpp_x_index(inst, i, j), inst.weights[i]);
    h.add(bpp_b_index(inst, j), -static_cast<double>(inst.capacity));
    if (kind == EncodingKind::Slack)
      bld.add_slack_inequality(h, inst.capacity, std::get<SlackQuadratic>(w.inequality).lambda_ineq,
                               std::to_string(j));
    else
      bld.add_exponential_inequality(h, inst.capacity, std::get<ExponentialPenaltyParams>(w.inequality));
  }
  return bld.finish(inst, kind, w, problem_vars);
}

inline EncodedModel encode_tsp(const TspInstance& inst, const PenaltyWeights& w, EncodingKind kind) {
  validate(inst);
  require_kind(w, kind);
  const int n = inst.n;
  const auto subsets = subtour_subsets(n);
  Builder bld;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) bld.add_var("x_" + std::to_string(i) + "_" + std::to_string(j));
  const int problem_vars = static_cast<int>(bld.labels.size());

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) bld.poly.add({tsp_edge_index(n, i, j)}, inst.weight[i][j]);

  for (int i = 0; i < n; ++i) {  // leave each vertex once
    AffineExpr g;
    for (int j = 0; j < n; ++j)
      if (i != j) g.add(tsp_edge_index(n, i, j), 1.0);
    g += -1.0;
    bld.add_equality(g, w.lambda_eq);
  }
  for (int j = 0; j < n; ++j) {  // enter each vertex once
    AffineExpr g;
    for (int i = 0; i < n; ++i)
      if (i != j) g.add(tsp_edge_index(n, i, j), 1.0);
    g += -1.0;
    bld.add_equality(g, w.lambda_eq);
  }

  for (std::uint64_t q : subsets) {
    AffineExpr h;
    std::string tag = "Q";
    for (int i = 0; i < n; ++i) {
      if (!((q >> i) & 1u)) continue;
      tag += (tag.size() > 1 ? "-" : "") + std::to_string(i);
      for (int j = 0; j < n; ++j)
        if (i != j && ((q >> j) & 1u)) h.add(tsp_edge_index(n, i, j), 1.0);
    }
    const int size = std::popcount(q);
    h += -static_cast<double>(size - 1);
    if (kind == EncodingKind::Slack)
      bld.add_slack_inequality(h, size - 1, std::get<SlackQuadratic>(w.inequality).lambda_ineq, tag);
    else
      bld.add_exponential_inequality(h, size - 1, std::get<ExponentialPenaltyParams>(w.inequality));
  }
  return bld.finish(inst, kind, w, problem_vars);
}

}  // namespace detail

inline EncodedModel bpp_to_qubo_exponential(const BppInstance& inst, const PenaltyWeights& w) {
  return detail::encode_bpp(inst, w, EncodingKind::Exponential);
}

inline EncodedModel bpp_to_qubo_slack(const BppInstance& inst, double lambda_eq, double lambda_ineq) {
  return detail::encode_bpp(inst, {lambda_eq, SlackQuadratic{lambda_ineq}}, EncodingKind::Slack);
}

inline EncodedModel tsp_to_qubo_exponential(const TspInstance& inst, const PenaltyWeights& w) {
  return detail::encode_tsp(inst, w, EncodingKind::Exponential);
}

inline EncodedModel tsp_to_qubo_slack(const TspInstance& inst, double lambda_eq, double lambda_ineq) {
  return detail::encode_tsp(inst, {lambda_eq, SlackQuadratic{lambda_ineq}}, EncodingKind::Slack);
}

inline EncodedModel encode(const Instance& inst, const PenaltyWeights& w) {
  const EncodingKind kind = std::holds_alternative<ExponentialPenaltyParams>(w.inequality)
                                ? EncodingKind::Exponential
                                : EncodingKind::Slack;
  if (const auto* b = std::get_if<BppInstance>(&inst)) return detail::encode_bpp(*b, w, kind);
  return detail::encode_tsp(std::get<TspInstance>(inst), w, kind);
}

// ---- decoding ----------------------------------------------------------------

inline std::optional<BppAssignment> decode_bpp(const BppInstance& inst, std::uint64_t state) {
  BppAssignment a{std::vector<int>(inst.n_items, -1), std::vector<bool>(inst.n_bins, false)};
  for (int j = 0; j < inst.n_bins; ++j) a.bins_used[j] = (state >> bpp_b_index(inst, j)) & 1u;
  for (int i = 0; i < inst.n_items; ++i) {
    for (int j = 0; j < inst.n_bins; ++j) {
      if (!((state >> bpp_x_index(inst, i, j)) & 1u)) continue;
      if (a.item_to_bin[i] != -1) return std::nullopt;
      a.item_to_bin[i] = j;
    }
    if (a.item_to_bin[i] == -1) return std::nullopt;
  }
  return a;
}

inline std::optional<TspTour> decode_tsp(const TspInstance& inst, std::uint64_t state) {
  std::vector<std::vector<bool>> edge(inst.n, std::vector<bool>(inst.n, false));
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.n; ++j)
      if (i != j) edge[i][j] = (state >> tsp_edge_index(inst.n, i, j)) & 1u;
  return tour_from_edges(inst, edge);
}

// Classical objective of the decoded solution when the bitstring is a feasible
// decoding (slack bits, if any, must close their constraints exactly).
inline std::optional<double> feasible_objective(const EncodedModel& em, std::uint64_t state) {
  std::optional<double> objective;
  if (const auto* b = std::get_if<BppInstance>(&em.instance)) {
    const auto a = decode_bpp(*b, state);
    if (!a || !bpp_feasible(*b, *a)) return std::nullopt;
    objective = a->bin_count();
  } else {
    const auto tour = decode_tsp(std::get<TspInstance>(em.instance), state);
    if (!tour) return std::nullopt;
    objective = tour->cost;
  }
  if (em.kind == EncodingKind::Slack) {
    const Bits bits = bits_from_index(state, em.qubo.num_vars);
    for (const auto& rec : em.inequalities) {
      double v = rec.h.evaluate(bits);
      for (const auto& [var, w] : rec.slack_bits)
        if (bits[var]) v += w;
      if (std::abs(v) > 1e-9) return std::nullopt;
    }
  }
  return objective;
}

}  // namespace qpenal
