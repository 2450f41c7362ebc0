#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <random>

#include "qpenal/encoders.hpp"
#include "qpenal/metrics.hpp"

using namespace qpenal;

namespace {

BppInstance table_instance() { return {3, 2, {25, 25, 30}, 100, 0}; }

TspInstance uniform_tsp(int n) {
  TspInstance t{n, std::vector<std::vector<double>>(n, std::vector<double>(n, 1.0)), 0};
  for (int i = 0; i < n; ++i) t.weight[i][i] = 0.0;
  return t;
}

int ceil_log2_plus_one(long long range) {
  int m = 0;
  while ((1LL << m) < range + 1) ++m;
  return m;
}

// r and s written out per family, independent of ExponentialPenaltyParams.
std::pair<double, double> rate_and_scale(const ExponentialPenaltyParams& e) {
  switch (e.family) {
    case PenaltyFamily::F1: return {double(e.k), 1.0};
    case PenaltyFamily::F2: return {std::pow(e.a, e.k), std::pow(e.a, e.k)};
    case PenaltyFamily::F3: return {std::pow(e.b, e.k), std::pow(e.a, e.k)};
  }
  return {0, 0};
}

double ineq_penalty(double h, double bound, const PenaltyWeights& w, long long slack_value) {
  if (const auto* e = std::get_if<ExponentialPenaltyParams>(&w.inequality)) {
    const auto [r, s] = rate_and_scale(*e);
    const double v = h / bound;
    return e->p * (r / s * v + r * r / (2 * s) * v * v);
  }
  const double t = h + double(slack_value);
  return std::get<SlackQuadratic>(w.inequality).lambda_ineq * t * t;
}

// Objective plus penalties evaluated straight from the instance data.
double direct_bpp(const BppInstance& in, const PenaltyWeights& w, const Bits& b) {
  const int N = in.n_items, K = in.n_bins;
  auto x = [&](int i, int j) { return double(b[i * K + j]); };
  auto B = [&](int j) { return double(b[N * K + j]); };
  double e = 0;
  for (int j = 0; j < K; ++j) e += B(j);
  for (int i = 0; i < N; ++i) {
    double g = -1;
    for (int j = 0; j < K; ++j) g += x(i, j);
    e += w.lambda_eq * g * g;
  }
  const int m = ceil_log2_plus_one(in.capacity);
  for (int j = 0; j < K; ++j) {
    double h = -in.capacity * B(j);
    for (int i = 0; i < N; ++i) h += in.weights[i] * x(i, j);
    long long slack = 0;
    for (int t = 0; t < m && std::holds_alternative<SlackQuadratic>(w.inequality); ++t)
      slack += (long long)b[N * K + K + j * m + t] << t;
    e += ineq_penalty(h, in.capacity, w, slack);
  }
  return e;
}

double direct_tsp(const TspInstance& in, const PenaltyWeights& w, const Bits& b) {
  const int n = in.n;
  std::vector<std::vector<double>> x(n, std::vector<double>(n, 0.0));
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) x[i][j] = b[idx++];
  double e = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) e += in.weight[i][j] * x[i][j];
  for (int i = 0; i < n; ++i) {
    double out = -1, in_ = -1;
    for (int j = 0; j < n; ++j) {
      out += x[i][j];
      in_ += x[j][i];
    }
    e += w.lambda_eq * (out * out + in_ * in_);
  }
  for (std::uint64_t q = 1; q + 1 < (1ull << n); ++q) {
    const int size = std::popcount(q);
    if (size < 2) continue;
    double h = -(size - 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (((q >> i) & 1) && ((q >> j) & 1)) h += x[i][j];
    long long slack = 0;
    if (std::holds_alternative<SlackQuadratic>(w.inequality))
      for (int t = 0; t < ceil_log2_plus_one(size - 1); ++t) slack += (long long)b[idx++] << t;
    e += ineq_penalty(h, size - 1, w, slack);
  }
  return e;
}

void check_round_trip(const EncodedModel& em) {
  const int n = em.qubo.num_vars;
  REQUIRE(n <= 16);
  for (std::uint64_t s = 0; s < (1ull << n); ++s) {
    const Bits bits = bits_from_index(s, n);
    const double ref = std::holds_alternative<BppInstance>(em.instance)
                           ? direct_bpp(std::get<BppInstance>(em.instance), em.weights, bits)
                           : direct_tsp(std::get<TspInstance>(em.instance), em.weights, bits);
    REQUIRE(qubo_evaluate(em.qubo, bits) == Catch::Approx(ref).margin(1e-9).epsilon(1e-12));
  }
}

ExponentialPenaltyParams f1(int k, double p) { return {PenaltyFamily::F1, k, 0, 0, p}; }
ExponentialPenaltyParams f2(int k, double a, double p) { return {PenaltyFamily::F2, k, a, 0, p}; }
ExponentialPenaltyParams f3(int k, double a, double b, double p) { return {PenaltyFamily::F3, k, a, b, p}; }

// First grid point (k, a, b, p, lambda order) whose ground states are all feasible and optimal.
std::optional<PenaltyWeights> find_valid_point(const Instance& inst, PenaltyFamily fam) {
  const auto oracle = solve_bruteforce(inst);
  for (int k = 0; k <= 10; ++k)
    for (double a : {2.0, 3.0, 4.0})
      for (double b : {2.0, 3.0, 4.0})
        for (int p = 1; p <= 10; ++p)
          for (double lam : {1.0, 2.0, 5.0, 10.0}) {
            ExponentialPenaltyParams e{fam, k, a, b, double(p)};
            if (fam == PenaltyFamily::F1 && (a != 2.0 || b != 2.0)) continue;
            if (fam == PenaltyFamily::F2 && b != 2.0) continue;
            if (fam == PenaltyFamily::F3 && !(b > a)) continue;
            const PenaltyWeights w{lam, e};
            if (check_ground_states(encode(inst, w), oracle).feasible_and_optimal) return w;
          }
  return std::nullopt;
}

}  // namespace

TEST_CASE("reduce applies x^2 = x and rejects cubic terms") {
  BinaryPolynomial p;
  p.add({0, 0}, 2.0);
  const auto r = reduce(p);
  CHECK(r.coefficient({0}) == 2.0);
  CHECK(r.degree() == 1);

  BinaryPolynomial cubic;
  cubic.add({0, 1, 2}, 1.0);
  CHECK_THROWS_AS(reduce(cubic), DegreeError);

  BinaryPolynomial collapses;  // x0 x0 x1 reduces to x0 x1
  collapses.add({0, 1, 0}, 3.0);
  CHECK(reduce(collapses).coefficient({0, 1}) == 3.0);

  BinaryPolynomial tiny;
  tiny.add({0}, 1e-15);
  CHECK(reduce(tiny).terms().empty());
}

TEST_CASE("square_affine examples") {
  AffineExpr e;
  e.add(0, 1.0);
  e += -1.0;
  const auto s = square_affine(e);
  CHECK(s.coefficient({}) == 1.0);
  CHECK(s.coefficient({0}) == -1.0);
  CHECK(s.terms().size() == 2);

  AffineExpr e2;
  e2.add(0, 1.0).add(1, 1.0);
  e2 += -1.0;
  const auto s2 = square_affine(e2);
  CHECK(s2.coefficient({}) == 1.0);
  CHECK(s2.coefficient({0}) == -1.0);
  CHECK(s2.coefficient({1}) == -1.0);
  CHECK(s2.coefficient({0, 1}) == 2.0);

  const QuboModel q = qubo_from_polynomial(s2, 2, {"x0", "x1"});
  CHECK(qubo_evaluate(q, Bits{1, 1}) == 1.0);
  CHECK(qubo_evaluate(q, Bits{0, 0}) == q.offset);
}

TEST_CASE("square_affine matches e(b)^2 on every bitstring") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial < 10 ? 6 : 8;
    AffineExpr e;
    for (int i = 0; i < n; ++i) e.add(i, u(rng));
    e += u(rng);
    const auto sq = square_affine(e);
    for (std::uint64_t s = 0; s < (1ull << n); ++s) {
      const Bits b = bits_from_index(s, n);
      double v = e.constant;
      for (int i = 0; i < n; ++i) v += e.coeffs.at(i) * b[i];
      CHECK(sq.evaluate(b) == Catch::Approx(v * v).margin(1e-9));
    }
  }
}

TEST_CASE("exponential penalty coefficients") {
  CHECK(f1(1, 1).linear_coefficient() == 1.0);
  CHECK(f1(1, 1).quadratic_coefficient() == 0.5);
  CHECK(f2(1, 2, 1).linear_coefficient() == 1.0);
  CHECK(f2(1, 2, 1).quadratic_coefficient() == 1.0);
  CHECK(f3(1, 2, 3, 2).linear_coefficient() == 3.0);
  CHECK(f3(1, 2, 3, 2).quadratic_coefficient() == 4.5);

  AffineExpr h;  // x0 - 1
  h.add(0, 1.0);
  h += -1.0;
  const auto poly = exponential_penalty(h, f1(1, 1));
  // (x0 - 1) + (x0 - 1)^2 / 2 = 1/2 - x0/2 on binary x0
  CHECK(poly.coefficient({}) == Catch::Approx(-0.5));
  CHECK(poly.evaluate(Bits{0}) == Catch::Approx(-0.5));
  CHECK(poly.evaluate(Bits{1}) == Catch::Approx(0.0));

  CHECK_THROWS_AS(exponential_penalty(h, f1(-1, 1)), ParameterError);
  CHECK_THROWS_AS(exponential_penalty(h, f1(1, 0)), ParameterError);
  CHECK_THROWS_AS(exponential_penalty(h, f2(1, 1.0, 1)), ParameterError);
  CHECK_THROWS_AS(exponential_penalty(h, f3(1, 3, 3, 1)), ParameterError);
}

TEST_CASE("exponential penalty is increasing in violation, k and p") {
  for (auto fam : {PenaltyFamily::F1, PenaltyFamily::F2, PenaltyFamily::F3}) {
    for (int k = 1; k <= 6; ++k) {
      for (double p : {1.0, 2.5, 7.0}) {
        const ExponentialPenaltyParams e{fam, k, 2.0, 3.0, p};
        double prev = exponential_penalty_value(0.0, e);
        for (double v = 0.25; v <= 5.0; v += 0.25) {
          const double cur = exponential_penalty_value(v, e);
          CHECK(cur > prev);
          prev = cur;
          auto more_k = e;
          more_k.k = k + 1;
          CHECK(exponential_penalty_value(v, more_k) > cur);
          auto more_p = e;
          more_p.p = p + 0.5;
          CHECK(exponential_penalty_value(v, more_p) > cur);
        }
      }
    }
  }
}

TEST_CASE("qubit counts") {
  CHECK(qubit_count(ProblemKind::Bpp, EncodingKind::Exponential, {3, 2, 100, 0}) == 8);
  CHECK(qubit_count(ProblemKind::Tsp, EncodingKind::Exponential, {0, 0, 0, 4}) == 12);
  CHECK(qubit_count(ProblemKind::Bpp, EncodingKind::Exponential, {1, 1, 1, 0}) == 2);
  CHECK(qubit_count(ProblemKind::Bpp, EncodingKind::Slack, {3, 2, 100, 0}) == 22);
  CHECK(qubit_count(ProblemKind::Bpp, EncodingKind::Slack, {1, 1, 1, 0}) == 3);
  CHECK(qubit_count(ProblemKind::Tsp, EncodingKind::Slack, {0, 0, 0, 4}) == 26);
  CHECK(qubit_count(ProblemKind::Tsp, EncodingKind::Slack, {0, 0, 0, 3}) == 9);
  CHECK(slack_width(100) == 7);
  CHECK(slack_width(1) == 1);
  CHECK(slack_width(2) == 2);
  CHECK(subtour_subsets(4).size() == 10);
}

TEST_CASE("encoder variable counts equal qubit_count") {
  const PenaltyWeights w{2.0, f1(1, 1)};
  for (int N = 1; N <= 5; ++N)
    for (int K = 1; K <= 3; ++K)
      for (int C : {1, 7, 100}) {
        const BppInstance in{N, K, std::vector<int>(N, 1), C, 0};
        const ProblemDims d{N, K, C, 0};
        CHECK(bpp_to_qubo_exponential(in, w).qubo.num_vars == qubit_count(ProblemKind::Bpp, EncodingKind::Exponential, d));
        CHECK(bpp_to_qubo_slack(in, 2, 2).qubo.num_vars == qubit_count(ProblemKind::Bpp, EncodingKind::Slack, d));
      }
  for (int n = 3; n <= 6; ++n) {
    const auto t = uniform_tsp(n);
    const ProblemDims d{0, 0, 0, n};
    CHECK(tsp_to_qubo_exponential(t, w).qubo.num_vars == qubit_count(ProblemKind::Tsp, EncodingKind::Exponential, d));
    CHECK(tsp_to_qubo_slack(t, 2, 2).qubo.num_vars == qubit_count(ProblemKind::Tsp, EncodingKind::Slack, d));
  }
}

TEST_CASE("QUBO agrees with direct objective-plus-penalty evaluation") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto bpp = generate_bpp(seed, 2 + seed % 3, 2, 1, 5, 5);
    check_round_trip(bpp_to_qubo_exponential(bpp, {3.0, f1(int(seed % 4), 1.0 + seed)}));
    check_round_trip(bpp_to_qubo_exponential(bpp, {2.0, f2(2, 3.0, 2.0)}));
    check_round_trip(bpp_to_qubo_exponential(bpp, {5.0, f3(3, 2.0, 4.0, 1.5)}));
    if (bpp.n_items * bpp.n_bins + bpp.n_bins + bpp.n_bins * 3 <= 16) check_round_trip(bpp_to_qubo_slack(bpp, 2.0, 3.0));

    const auto tsp3 = generate_tsp(seed, 3, 1.0, 9.0, seed % 2 == 0);
    check_round_trip(tsp_to_qubo_exponential(tsp3, {4.0, f3(1, 2.0, 3.0, 2.0)}));
    check_round_trip(tsp_to_qubo_slack(tsp3, 4.0, 6.0));
    const auto tsp4 = generate_tsp(seed, 4, 1.0, 9.0, seed % 2 == 1);
    check_round_trip(tsp_to_qubo_exponential(tsp4, {10.0, f2(2, 2.0, 3.0)}));
  }
  check_round_trip(bpp_to_qubo_exponential(table_instance(), {3.0, f3(2, 2.0, 3.0, 1.0)}));
}

TEST_CASE("qubo_evaluate matches term-by-term summation and checks length") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 12;
    QuboModel m{n, std::vector<double>(n), {}, u(rng), std::vector<std::string>(n, "v")};
    for (auto& l : m.linear) l = u(rng);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng() % 2) m.quadratic[{i, j}] = dense[i][j] = u(rng);
    for (int r = 0; r < 30; ++r) {
      const auto s = rng() & ((1ull << n) - 1);
      const Bits b = bits_from_index(s, n);
      double ref = m.offset;
      for (int i = 0; i < n; ++i) {
        ref += m.linear[i] * b[i];
        for (int j = 0; j < n; ++j) ref += dense[i][j] * b[i] * b[j];
      }
      CHECK(qubo_evaluate(m, b) == Catch::Approx(ref).margin(1e-12));
      CHECK(m.energy(s) == Catch::Approx(ref).margin(1e-12));
    }
    CHECK(qubo_evaluate(m, Bits(n, 0)) == m.offset);
    CHECK_THROWS_AS(qubo_evaluate(m, Bits(n + 1, 0)), ParameterError);
  }
}

TEST_CASE("bitstring helpers") {
  CHECK(bitstring(0b1101, 4) == "1011");
  CHECK(state_from_bitstring("1011") == 0b1101);
  CHECK(index_from_bits(bits_from_index(77, 9)) == 77);
  CHECK_THROWS_AS(state_from_bitstring("10x"), ParameterError);
}

TEST_CASE("smallest BPP exponential model has the packed ground state") {
  const BppInstance one{1, 1, {1}, 1, 0};
  const auto em = bpp_to_qubo_exponential(one, {10.0, f1(1, 1)});
  CHECK(em.qubo.num_vars == 2);
  const auto gs = exhaustive_ground_states(em.qubo);
  CHECK(gs.states == std::vector<std::uint64_t>{0b11});
  CHECK(optimal_bitstrings(em, solve_bruteforce(Instance(one))) == std::set<std::uint64_t>{0b11});
}

TEST_CASE("smallest BPP slack model") {
  const BppInstance one{1, 1, {1}, 1, 0};
  const auto em = bpp_to_qubo_slack(one, 2.0, 2.0);
  CHECK(em.qubo.num_vars == 3);
  CHECK(check_ground_states(em, solve_bruteforce(Instance(one))).feasible_and_optimal);
}

TEST_CASE("table instance encodings") {
  const Instance t = table_instance();
  CHECK(bpp_to_qubo_slack(table_instance(), 3, 3).qubo.num_vars == 22);
  const auto w = find_valid_point(t, PenaltyFamily::F1);
  REQUIRE(w);
  const auto em = encode(t, *w);
  CHECK(em.qubo.num_vars == 8);
  const auto gs = exhaustive_ground_states(em.qubo);
  for (auto s : gs.states) {
    const auto a = decode_bpp(table_instance(), s);
    REQUIRE(a);
    CHECK(a->bin_count() == 1);
    CHECK(bpp_feasible(table_instance(), *a));
  }
}

TEST_CASE("TSP encodings on uniform instances") {
  CHECK(tsp_to_qubo_exponential(uniform_tsp(3), {2.0, f1(1, 1)}).qubo.num_vars == 6);
  const Instance u4 = uniform_tsp(4);
  for (auto fam : {PenaltyFamily::F1, PenaltyFamily::F2, PenaltyFamily::F3}) {
    const auto w = find_valid_point(u4, fam);
    REQUIRE(w);
    const auto em = encode(u4, *w);
    CHECK(em.qubo.num_vars == 12);
    for (auto s : exhaustive_ground_states(em.qubo).states) {
      const auto tour = decode_tsp(uniform_tsp(4), s);
      REQUIRE(tour);
      CHECK(tour->cost == 4.0);
    }
  }
  const Instance u3 = uniform_tsp(3);
  const auto slack = tsp_to_qubo_slack(uniform_tsp(3), 4.0, 4.0);
  CHECK(slack.qubo.num_vars == 9);
  CHECK(check_ground_states(slack, solve_bruteforce(u3)).feasible_and_optimal);
}

TEST_CASE("exponential penalties admit a valid grid point on generated instances") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Instance b = generate_bpp(seed, 2 + seed % 3, 2, 1, 7, 7);
    try {
      solve_bruteforce(b);
    } catch (const ParameterError&) {
      continue;
    }
    for (auto fam : {PenaltyFamily::F1, PenaltyFamily::F2, PenaltyFamily::F3}) CHECK(find_valid_point(b, fam));
  }
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Instance t = generate_tsp(seed, 3 + seed % 2, 1.0, 10.0, seed % 2 == 0);
    CHECK(find_valid_point(t, PenaltyFamily::F3));
  }
}

TEST_CASE("slack penalties larger than the objective range give exact ground states") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Instance b = generate_bpp(seed, 2 + seed % 2, 2, 1, 3, 3);
    ClassicalSolution oracle;
    try {
      oracle = solve_bruteforce(b);
    } catch (const ParameterError&) {
      continue;
    }
    const double lam = 1.0 + objective_upper_bound(b);
    CHECK(check_ground_states(encode(b, {lam, SlackQuadratic{lam}}), oracle).feasible_and_optimal);
  }
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Instance t = generate_tsp(seed, 3, 1.0, 10.0, false);
    const double lam = 1.0 + objective_upper_bound(t);
    CHECK(check_ground_states(encode(t, {lam, SlackQuadratic{lam}}), solve_bruteforce(t)).feasible_and_optimal);
  }
}

TEST_CASE("feasible_objective requires closed slack constraints") {
  const BppInstance one{1, 1, {1}, 1, 0};
  const auto em = bpp_to_qubo_slack(one, 2.0, 2.0);
  CHECK(feasible_objective(em, 0b011) == std::optional<double>(1.0));  // h = 1 - 1 = 0, slack 0
  CHECK_FALSE(feasible_objective(em, 0b111));                          // slack bit set leaves h + S = 1
  CHECK_FALSE(feasible_objective(em, 0b001));                          // item in a closed bin
}

TEST_CASE("QUBO JSON round trip") {
  const auto em = bpp_to_qubo_exponential(table_instance(), {3.0, f3(2, 2.0, 3.0, 1.0)});
  const auto j = qubo_to_json(em.qubo);
  const auto back = qubo_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.num_vars == em.qubo.num_vars);
  CHECK(back.labels == em.qubo.labels);
  for (std::uint64_t s = 0; s < 256; ++s) CHECK(back.energy(s) == em.qubo.energy(s));
  CHECK(qubo_to_json(back) == j);

  auto bad = j;
  bad["quadratic"].push_back({3, 2, 1.0});
  CHECK_THROWS_AS(qubo_from_json(bad), ParameterError);
  auto extra = j;
  extra["foo"] = 0;
  CHECK_THROWS_AS(qubo_from_json(extra), ParameterError);
}

TEST_CASE("exhaustive ground states enforce the size cap") {
  const auto em = bpp_to_qubo_slack(table_instance(), 3, 3);
  try {
    exhaustive_ground_states(em.qubo);
    FAIL("expected SizeError");
  } catch (const SizeError& e) {
    CHECK(std::string(e.what()).find("22 > 16 exhaustive cap") != std::string::npos);
  }
}

TEST_CASE("encoding kind mismatches are rejected") {
  CHECK_THROWS_AS(detail::encode_bpp(table_instance(), {1.0, SlackQuadratic{1.0}}, EncodingKind::Exponential),
                  ParameterError);
  CHECK_THROWS_AS(bpp_to_qubo_slack(table_instance(), 0.0, 1.0), ParameterError);
  CHECK(parse_encoding("slack") == EncodingKind::Slack);
  CHECK_THROWS_AS(parse_encoding("unary"), ParameterError);
  CHECK(parse_family("F2") == PenaltyFamily::F2);
  CHECK_THROWS_AS(parse_family("F4"), ParameterError);
}
