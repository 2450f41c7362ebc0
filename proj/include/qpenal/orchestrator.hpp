#pragma once

// Pipeline driver behind the qpenal command line: instance generation,
// encoding, classical and QAOA solving, sweeps, landscapes and reports.
// Every subcommand is a pure function of its RunConfig plus input files.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpenal/encoders.hpp"
#include "qpenal/errors.hpp"
#include "qpenal/ising.hpp"
#include "qpenal/metrics.hpp"
#include "qpenal/problem_instances.hpp"
#include "qpenal/qaoa.hpp"
#include "qpenal/qubo.hpp"
#include "qpenal/sweep.hpp"

namespace qpenal {

struct RunConfig {
  std::string command;  // generate | encode | solve-classical | solve-qaoa | sweep | landscape | report
  std::string instance_path;
  std::string qubo_path;  // landscape may read a QUBO file instead of an instance
  std::string out_path;
  std::string ising_out_path;
  std::vector<std::string> inputs;  // report

  std::uint64_t seed = 0;

  // generate
  std::string type = "bpp";
  int n_items = 3;
  int n_bins = 2;
  int weight_lo = 25;
  int weight_hi = 30;
  int capacity = 100;
  int n = 4;
  double tsp_weight_lo = 1.0;
  double tsp_weight_hi = 10.0;
  bool symmetric = true;

  // encoding
  std::string encoding = "exp";
  std::string family = "F1";
  int k = 1;
  double a = 2.0;
  double b = 3.0;
  double p = 1.0;
  std::optional<double> lambda_eq;    // default: 1 + objective upper bound
  std::optional<double> lambda_ineq;  // default: lambda_eq

  // QAOA
  int layers = 1;
  int shots = kDefaultShots;
  int max_iters = 200;
  std::vector<double> beta_grid;
  std::vector<double> gamma_grid;

  // sweep
  std::vector<int> k_grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> a_grid{2, 3, 4};
  std::vector<double> b_grid{2, 3, 4};
  std::vector<double> p_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> lambda_grid{1, 2, 5, 10};
};

// Fixed per-stage seed offsets.
inline constexpr std::uint64_t kGenerateStage = 0;
inline constexpr std::uint64_t kQaoaStage = 1;  // sampling uses kQaoaStage + 1

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j = {{"command", c.command},
                      {"instance", c.instance_path},
                      {"qubo", c.qubo_path},
                      {"out", c.out_path},
                      {"ising_out", c.ising_out_path},
                      {"inputs", c.inputs},
                      {"seed", c.seed},
                      {"type", c.type},
                      {"n_items", c.n_items},
                      {"n_bins", c.n_bins},
                      {"weight_lo", c.weight_lo},
                      {"weight_hi", c.weight_hi},
                      {"capacity", c.capacity},
                      {"n", c.n},
                      {"tsp_weight_lo", c.tsp_weight_lo},
                      {"tsp_weight_hi", c.tsp_weight_hi},
                      {"symmetric", c.symmetric},
                      {"encoding", c.encoding},
                      {"family", c.family},
                      {"k", c.k},
                      {"a", c.a},
                      {"b", c.b},
                      {"p", c.p},
                      {"lambda_eq", c.lambda_eq ? nlohmann::json(*c.lambda_eq) : nlohmann::json(nullptr)},
                      {"lambda_ineq", c.lambda_ineq ? nlohmann::json(*c.lambda_ineq) : nlohmann::json(nullptr)},
                      {"layers", c.layers},
                      {"shots", c.shots},
                      {"max_iters", c.max_iters},
                      {"beta_grid", c.beta_grid},
                      {"gamma_grid", c.gamma_grid},
                      {"k_grid", c.k_grid},
                      {"a_grid", c.a_grid},
                      {"b_grid", c.b_grid},
                      {"p_grid", c.p_grid},
                      {"lambda_grid", c.lambda_grid}};
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  const nlohmann::json defaults = config_to_json(c);
  for (const auto& [key, _] : j.items())
    if (!defaults.contains(key)) throw ParameterError("unknown config field '" + key + "'");
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(std::string("bad config field '") + key + "': " + e.what());
    }
  };
  auto get_opt = [&](const char* key, std::optional<double>& field) {
    if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<double>();
  };
  get("command", c.command);
  get("instance", c.instance_path);
  get("qubo", c.qubo_path);
  get("out", c.out_path);
  get("ising_out", c.ising_out_path);
  get("inputs", c.inputs);
  get("seed", c.seed);
  get("type", c.type);
  get("n_items", c.n_items);
  get("n_bins", c.n_bins);
  get("weight_lo", c.weight_lo);
  get("weight_hi", c.weight_hi);
  get("capacity", c.capacity);
  get("n", c.n);
  get("tsp_weight_lo", c.tsp_weight_lo);
  get("tsp_weight_hi", c.tsp_weight_hi);
  get("symmetric", c.symmetric);
  get("encoding", c.encoding);
  get("family", c.family);
  get("k", c.k);
  get("a", c.a);
  get("b", c.b);
  get("p", c.p);
  get_opt("lambda_eq", c.lambda_eq);
  get_opt("lambda_ineq", c.lambda_ineq);
  get("layers", c.layers);
  get("shots", c.shots);
  get("max_iters", c.max_iters);
  get("beta_grid", c.beta_grid);
  get("gamma_grid", c.gamma_grid);
  get("k_grid", c.k_grid);
  get("a_grid", c.a_grid);
  get("b_grid", c.b_grid);
  get("p_grid", c.p_grid);
  get("lambda_grid", c.lambda_grid);
  return c;
}

// ---- file helpers --------------------------------------------------------------

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  if (path.empty()) throw ParameterError("--out is required for this command");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << text;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline Instance load_instance(const std::string& path) {
  if (path.empty()) throw ParameterError("--instance is required for this command");
  return instance_from_json(read_json_file(path));
}

inline PenaltyWeights penalty_weights(const RunConfig& c, const Instance& inst) {
  const double lam = c.lambda_eq.value_or(default_lambda_eq(inst));
  if (parse_encoding(c.encoding) == EncodingKind::Slack) return {lam, SlackQuadratic{c.lambda_ineq.value_or(lam)}};
  ExponentialPenaltyParams e{parse_family(c.family), c.k, c.a, c.b, c.p};
  return {lam, e};
}

inline QaoaConfig qaoa_config(const RunConfig& c) {
  QaoaConfig q;
  q.layers = c.layers;
  q.shots = c.shots;
  q.max_iters = c.max_iters;
  q.seed = c.seed + kQaoaStage;
  return q;
}

// ---- run records -----------------------------------------------------------------

struct RunRecord {
  std::string instance_id;
  std::string problem;   // bpp | tsp
  std::string encoding;  // slack | exp
  int num_qubits = 0;
  QaoaRun run;
  double classical_objective = 0.0;
  std::optional<double> quantum_objective;
  double approx_prob = 0.0;
  nlohmann::json config;
};

inline nlohmann::json run_record_to_json(const RunRecord& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [state, count] : r.run.histogram.counts) hist[bitstring(state, r.num_qubits)] = count;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.run.trace.iterations) trace.push_back({{"params", e.x}, {"value", e.value}});
  return {{"instance_id", r.instance_id},
          {"problem", r.problem},
          {"encoding", r.encoding},
          {"num_qubits", r.num_qubits},
          {"params", {{"layers", r.run.params.layers}, {"betas", r.run.params.betas}, {"gammas", r.run.params.gammas}}},
          {"expectation", r.run.expectation},
          {"shots", r.run.histogram.shots},
          {"histogram", hist},
          {"trace", trace},
          {"best_value", r.run.trace.best_value},
          {"converged", r.run.converged},
          {"wall_time", r.run.wall_time},
          {"classical_objective", r.classical_objective},
          {"quantum_objective", r.quantum_objective ? nlohmann::json(*r.quantum_objective) : nlohmann::json(nullptr)},
          {"approx_prob", r.approx_prob},
          {"config", r.config}};
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.instance_id = j.at("instance_id").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.encoding = j.at("encoding").get<std::string>();
    r.num_qubits = j.at("num_qubits").get<int>();
    const auto& p = j.at("params");
    r.run.params = {p.at("layers").get<int>(), p.at("betas").get<std::vector<double>>(),
                    p.at("gammas").get<std::vector<double>>()};
    r.run.params.validate();
    r.run.expectation = j.at("expectation").get<double>();
    r.run.histogram.shots = j.at("shots").get<int>();
    for (const auto& [bits, count] : j.at("histogram").items()) {
      if (static_cast<int>(bits.size()) != r.num_qubits) throw ParameterError("histogram key has the wrong length");
      r.run.histogram.counts[state_from_bitstring(bits)] = count.get<int>();
    }
    for (const auto& e : j.at("trace"))
      r.run.trace.iterations.push_back({e.at("params").get<std::vector<double>>(), e.at("value").get<double>()});
    r.run.trace.best_value = j.at("best_value").get<double>();
    r.run.trace.best_params = r.run.params;
    r.run.converged = j.at("converged").get<bool>();
    r.run.wall_time = j.at("wall_time").get<double>();
    r.classical_objective = j.at("classical_objective").get<double>();
    if (!j.at("quantum_objective").is_null()) r.quantum_objective = j.at("quantum_objective").get<double>();
    r.approx_prob = j.at("approx_prob").get<double>();
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed run record: ") + e.what());
  }
  return r;
}

// Shots landing on bitstrings that decode to an oracle-optimal solution.
inline std::set<std::uint64_t> sampled_optimal_states(const EncodedModel& em, const SampleHistogram& hist,
                                                      const ClassicalSolution& oracle) {
  std::set<std::uint64_t> out;
  const double tol = 1e-9 * std::max(1.0, std::abs(oracle.objective));
  for (const auto& [state, _] : hist.counts) {
    const auto obj = feasible_objective(em, state);
    if (obj && std::abs(*obj - oracle.objective) <= tol) out.insert(state);
  }
  return out;
}

inline double histogram_approx_prob(const EncodedModel& em, const SampleHistogram& hist,
                                    const ClassicalSolution& oracle) {
  const auto hits = sampled_optimal_states(em, hist, oracle);
  return hits.empty() ? 0.0 : approximation_probability(hist, hits);
}

// Objective of the most frequently sampled feasible bitstring (ties: lowest state index).
inline std::optional<double> most_frequent_feasible_objective(const EncodedModel& em, const SampleHistogram& hist) {
  std::optional<double> obj;
  int best = 0;
  for (const auto& [state, count] : hist.counts) {
    if (count <= best) continue;
    if (const auto o = feasible_objective(em, state)) {
      obj = o;
      best = count;
    }
  }
  return obj;
}

inline RunRecord solve_qaoa(const Instance& inst, const RunConfig& c) {
  const EncodedModel em = encode(inst, penalty_weights(c, inst));
  const ClassicalSolution oracle = solve_bruteforce(inst);
  RunRecord r;
  r.instance_id = instance_id(inst);
  r.problem = kind_of(inst) == ProblemKind::Bpp ? "bpp" : "tsp";
  r.encoding = to_string(em.kind);
  r.num_qubits = em.qubo.num_vars;
  r.run = optimize(qubo_to_ising(em.qubo), qaoa_config(c));
  r.classical_objective = oracle.objective;
  r.quantum_objective = most_frequent_feasible_objective(em, r.run.histogram);
  r.approx_prob = histogram_approx_prob(em, r.run.histogram, oracle);
  r.config = config_to_json(c);
  return r;
}

// ---- report ----------------------------------------------------------------------

struct ReportResult {
  MetricReport aggregate;
  std::vector<std::pair<std::string, MetricReport>> per_instance;
  std::vector<std::string> unmatched;  // human-readable reasons
};

inline ReportResult build_report(const std::vector<RunRecord>& runs) {
  ReportResult out;
  std::map<std::string, std::vector<const RunRecord*>> by_id;
  for (const auto& r : runs) by_id[r.instance_id].push_back(&r);

  std::vector<double> classical, quantum, probs;
  std::int64_t sum_exp = 0, sum_slack = 0;
  double sum_t_exp = 0.0, sum_t_slack = 0.0;
  bool any_pair = false;
  for (const auto& [id, list] : by_id) {
    MetricReport m;
    const RunRecord* exp = nullptr;
    const RunRecord* slack = nullptr;
    std::vector<double> ci, qi, pi;
    for (const RunRecord* r : list) {
      if (r->encoding == "exp" && !exp) exp = r;
      if (r->encoding == "slack" && !slack) slack = r;
      pi.push_back(r->approx_prob);
      if (r->quantum_objective) {
        ci.push_back(r->classical_objective);
        qi.push_back(*r->quantum_objective);
      } else {
        out.unmatched.push_back(id + " (" + r->encoding + "): no feasible sampled solution, excluded from MSE");
      }
    }
    if (exp && slack) {
      m.q_exp = exp->num_qubits;
      m.q_slack = slack->num_qubits;
      m.q_re = qubit_reduction(exp->num_qubits, slack->num_qubits);
      m.t_exp = exp->run.wall_time;
      m.t_slack = slack->run.wall_time;
      if (exp->run.wall_time > 0.0) m.q_t = time_ratio(slack->run.wall_time, exp->run.wall_time);
      sum_exp += exp->num_qubits;
      sum_slack += slack->num_qubits;
      sum_t_exp += exp->run.wall_time;
      sum_t_slack += slack->run.wall_time;
      any_pair = true;
    } else {
      out.unmatched.push_back(id + ": needs one exp and one slack run for qubit/time ratios");
    }
    if (!ci.empty()) m.mse = mse(ci, qi);
    double ps = 0.0;
    for (double v : pi) ps += v;
    m.approx_prob = ps / static_cast<double>(pi.size());
    classical.insert(classical.end(), ci.begin(), ci.end());
    quantum.insert(quantum.end(), qi.begin(), qi.end());
    probs.insert(probs.end(), pi.begin(), pi.end());
    out.per_instance.push_back({id, m});
  }
  if (any_pair) {
    out.aggregate.q_exp = sum_exp;
    out.aggregate.q_slack = sum_slack;
    out.aggregate.q_re = qubit_reduction(sum_exp, sum_slack);
    out.aggregate.t_exp = sum_t_exp;
    out.aggregate.t_slack = sum_t_slack;
    if (sum_t_exp > 0.0) out.aggregate.q_t = time_ratio(sum_t_slack, sum_t_exp);
  }
  if (!classical.empty()) out.aggregate.mse = mse(classical, quantum);
  if (!probs.empty()) {
    double ps = 0.0;
    for (double v : probs) ps += v;
    out.aggregate.approx_prob = ps / static_cast<double>(probs.size());
  }
  return out;
}

inline nlohmann::json report_to_json(const ReportResult& r) {
  nlohmann::json inst = nlohmann::json::array();
  for (const auto& [id, m] : r.per_instance) {
    auto j = metric_report_to_json(m);
    j["instance_id"] = id;
    inst.push_back(j);
  }
  return {{"aggregate", metric_report_to_json(r.aggregate)}, {"instances", inst}, {"unmatched", r.unmatched}};
}

inline std::string report_table(const ReportResult& r) {
  auto cell = [](const auto& v) {
    std::ostringstream os;
    if (v)
      os << std::setprecision(6) << *v;
    else
      os << "-";
    return os.str();
  };
  std::ostringstream os;
  os << std::left << std::setw(22) << "instance" << std::setw(8) << "q_exp" << std::setw(8) << "q_slack"
     << std::setw(12) << "q_re" << std::setw(12) << "mse" << std::setw(12) << "q_t" << "approx_prob\n";
  auto row = [&](const std::string& id, const MetricReport& m) {
    os << std::left << std::setw(22) << id << std::setw(8) << cell(m.q_exp) << std::setw(8) << cell(m.q_slack)
       << std::setw(12) << cell(m.q_re) << std::setw(12) << cell(m.mse) << std::setw(12) << cell(m.q_t)
       << cell(m.approx_prob) << "\n";
  };
  for (const auto& [id, m] : r.per_instance) row(id, m);
  row("TOTAL", r.aggregate);
  for (const auto& u : r.unmatched) os << "unmatched: " << u << "\n";
  return os.str();
}

// ---- subcommands -------------------------------------------------------------------

inline std::string format_params(const PenaltyWeights& w) {
  std::ostringstream os;
  os << "lambda_eq=" << w.lambda_eq;
  if (const auto* e = std::get_if<ExponentialPenaltyParams>(&w.inequality)) {
    os << " " << to_string(e->family) << " k=" << e->k;
    if (e->family != PenaltyFamily::F1) os << " a=" << e->a;
    if (e->family == PenaltyFamily::F3) os << " b=" << e->b;
    os << " p=" << e->p << " (r=" << e->rate() << ", s=" << e->inverse_magnitude() << ")";
  } else {
    os << " lambda_ineq=" << std::get<SlackQuadratic>(w.inequality).lambda_ineq;
  }
  return os.str();
}

inline int run_command(const RunConfig& c, std::ostream& log) {
  if (c.command == "generate") {
    Instance inst;
    if (c.type == "bpp")
      inst = generate_bpp(c.seed + kGenerateStage, c.n_items, c.n_bins, c.weight_lo, c.weight_hi, c.capacity);
    else if (c.type == "tsp")
      inst = generate_tsp(c.seed + kGenerateStage, c.n, c.tsp_weight_lo, c.tsp_weight_hi, c.symmetric);
    else
      throw ParameterError("--type must be bpp or tsp");
    write_json_file(c.out_path, instance_to_json(inst));
    log << "generated " << instance_id(inst) << " -> " << c.out_path << "\n";
    return 0;
  }
  if (c.command == "encode") {
    const Instance inst = load_instance(c.instance_path);
    const auto w = penalty_weights(c, inst);
    const EncodedModel em = encode(inst, w);
    write_json_file(c.out_path, qubo_to_json(em.qubo));
    if (!c.ising_out_path.empty()) write_json_file(c.ising_out_path, ising_to_json(qubo_to_ising(em.qubo)));
    log << "encoded " << instance_id(inst) << " (" << to_string(em.kind) << ", " << format_params(w)
        << "): " << em.qubo.num_vars << " variables -> " << c.out_path << "\n";
    return 0;
  }
  if (c.command == "solve-classical") {
    const Instance inst = load_instance(c.instance_path);
    const ClassicalSolution sol = solve_bruteforce(inst);
    nlohmann::json witness;
    if (const auto* a = std::get_if<BppAssignment>(&sol.witness)) {
      std::vector<int> used;
      for (bool u : a->bins_used) used.push_back(u ? 1 : 0);
      witness = {{"item_to_bin", a->item_to_bin}, {"bins_used", used}};
    } else {
      const auto& t = std::get<TspTour>(sol.witness);
      witness = {{"order", t.order}, {"cost", t.cost}};
    }
    write_json_file(c.out_path, {{"instance_id", instance_id(inst)},
                                 {"objective", sol.objective},
                                 {"enumerated_count", sol.enumerated_count},
                                 {"witness", witness},
                                 {"config", config_to_json(c)}});
    log << "classical optimum of " << instance_id(inst) << " = " << sol.objective << " (" << sol.enumerated_count
        << " enumerated)\n";
    return 0;
  }
  if (c.command == "solve-qaoa") {
    const Instance inst = load_instance(c.instance_path);
    const RunRecord r = solve_qaoa(inst, c);
    write_json_file(c.out_path, run_record_to_json(r));
    log << "qaoa " << r.instance_id << " (" << r.encoding << ", " << r.num_qubits << " qubits, p=" << c.layers
        << "): expectation=" << r.run.expectation << " approx_prob=" << r.approx_prob
        << (r.run.converged ? "" : " [max_iters reached]") << "\n";
    return 0;
  }
  if (c.command == "sweep") {
    const Instance inst = load_instance(c.instance_path);
    SweepGrid g;
    g.family = parse_family(c.family);
    g.k_grid = c.k_grid;
    g.a_grid = c.a_grid;
    g.b_grid = c.b_grid;
    g.p_grid = c.p_grid;
    g.lambda_grid = c.lambda_grid;
    const SweepResult res = sweep(inst, g, qaoa_config(c));
    std::ostringstream csv;
    write_sweep_csv(csv, res);
    write_text_file(c.out_path, csv.str());
    if (const auto* b = res.best_point()) {
      log << "sweep " << to_string(g.family) << ": " << res.evaluated.size() << " points, best "
          << format_params({b->lambda_eq, b->params}) << " approx_prob=" << *b->approx_prob << "\n";
      return 0;
    }
    log << "sweep " << to_string(g.family) << ": no grid point has a feasible optimal ground state\n";
    return 1;
  }
  if (c.command == "landscape") {
    if (c.beta_grid.empty() || c.gamma_grid.empty()) throw ParameterError("--beta-grid and --gamma-grid are required");
    QuboModel q;
    if (!c.qubo_path.empty())
      q = qubo_from_json(read_json_file(c.qubo_path));
    else {
      const Instance inst = load_instance(c.instance_path);
      q = encode(inst, penalty_weights(c, inst)).qubo;
    }
    const auto grid = landscape(qubo_to_ising(q), c.beta_grid, c.gamma_grid);
    std::ostringstream csv;
    csv << std::setprecision(17) << "beta,gamma,energy\n";
    for (std::size_t i = 0; i < c.beta_grid.size(); ++i)
      for (std::size_t j = 0; j < c.gamma_grid.size(); ++j)
        csv << c.beta_grid[i] << ',' << c.gamma_grid[j] << ',' << grid[i][j] << '\n';
    write_text_file(c.out_path, csv.str());
    log << "landscape " << c.beta_grid.size() << "x" << c.gamma_grid.size() << " -> " << c.out_path << "\n";
    return 0;
  }
  if (c.command == "report") {
    if (c.inputs.empty()) throw ParameterError("report needs at least one run file");
    std::vector<RunRecord> runs;
    for (const auto& path : c.inputs) runs.push_back(run_record_from_json(read_json_file(path)));
    const ReportResult rep = build_report(runs);
    if (!c.out_path.empty()) write_json_file(c.out_path, report_to_json(rep));
    log << report_table(rep);
    return 0;
  }
  throw ParameterError("unknown command '" + c.command + "'");
}

// Exit status: 0 ok, 1 empty sweep, 2 invalid input, 3 size limit, 4 other failure.
inline int run(const RunConfig& c, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    return run_command(c, log);
  } catch (const SizeError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace qpenal
