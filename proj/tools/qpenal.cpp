// qpenal: command-line front end for the penalty-encoding pipeline.

#include <CLI11.hpp>

#include "qpenal/orchestrator.hpp"

int main(int argc, char** argv) {
  qpenal::RunConfig c;
  CLI::App app{"QUBO penalty encodings for BPP and TSP with QAOA simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> lambda_eq, lambda_ineq;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_path, "RunConfig JSON; explicit flags override it");
    s->add_option("--seed", c.seed, "top-level seed");
    s->add_option("--out", c.out_path, "output file");
  };
  auto encoding_opts = [&](CLI::App* s) {
    s->add_option("--instance", c.instance_path, "instance JSON");
    s->add_option("--encoding", c.encoding, "slack or exp")->check(CLI::IsMember({"slack", "exp"}));
    s->add_option("--family", c.family, "F1, F2 or F3")->check(CLI::IsMember({"F1", "F2", "F3"}));
    s->add_option("--k", c.k, "exponent k");
    s->add_option("--a", c.a, "base a");
    s->add_option("--b", c.b, "base b");
    s->add_option("--p", c.p, "penalty scale p");
    s->add_option("--lambda-eq", lambda_eq, "equality penalty weight");
    s->add_option("--lambda-ineq", lambda_ineq, "slack inequality penalty weight");
  };
  auto qaoa_opts = [&](CLI::App* s) {
    s->add_option("--layers", c.layers, "QAOA depth p");
    s->add_option("--shots", c.shots, "measurement shots");
    s->add_option("--max-iters", c.max_iters, "optimizer evaluation budget");
  };

  auto* gen = app.add_subcommand("generate", "generate a seeded instance");
  common(gen);
  gen->add_option("--type", c.type, "bpp or tsp")->check(CLI::IsMember({"bpp", "tsp"}));
  gen->add_option("--n-items", c.n_items);
  gen->add_option("--n-bins", c.n_bins);
  gen->add_option("--weight-lo", c.weight_lo, "BPP item weight lower bound");
  gen->add_option("--weight-hi", c.weight_hi, "BPP item weight upper bound");
  gen->add_option("--capacity", c.capacity);
  gen->add_option("--n", c.n, "TSP vertex count");
  gen->add_option("--edge-lo", c.tsp_weight_lo, "TSP edge weight lower bound");
  gen->add_option("--edge-hi", c.tsp_weight_hi, "TSP edge weight upper bound");
  gen->add_option("--symmetric", c.symmetric, "TSP symmetric weights (true/false)");

  auto* enc = app.add_subcommand("encode", "write the QUBO (and optionally Ising) model");
  common(enc);
  encoding_opts(enc);
  enc->add_option("--ising-out", c.ising_out_path, "also write the Ising model");

  auto* cls = app.add_subcommand("solve-classical", "brute-force optimum");
  common(cls);
  cls->add_option("--instance", c.instance_path, "instance JSON");

  auto* qa = app.add_subcommand("solve-qaoa", "optimize and sample QAOA");
  common(qa);
  encoding_opts(qa);
  qaoa_opts(qa);

  auto* sw = app.add_subcommand("sweep", "grid search over exponential penalty parameters");
  common(sw);
  sw->add_option("--instance", c.instance_path, "instance JSON");
  sw->add_option("--family", c.family, "F1, F2 or F3")->check(CLI::IsMember({"F1", "F2", "F3"}));
  qaoa_opts(sw);
  sw->add_option("--k-grid", c.k_grid)->delimiter(',');
  sw->add_option("--a-grid", c.a_grid)->delimiter(',');
  sw->add_option("--b-grid", c.b_grid)->delimiter(',');
  sw->add_option("--p-grid", c.p_grid)->delimiter(',');
  sw->add_option("--lambda-grid", c.lambda_grid)->delimiter(',');

  auto* land = app.add_subcommand("landscape", "p = 1 energy over a beta/gamma grid");
  common(land);
  encoding_opts(land);
  land->add_option("--qubo", c.qubo_path, "QUBO JSON instead of --instance");
  land->add_option("--beta-grid", c.beta_grid, "comma-separated")->delimiter(',');
  land->add_option("--gamma-grid", c.gamma_grid, "comma-separated")->delimiter(',');

  auto* rep = app.add_subcommand("report", "aggregate metrics over run records");
  common(rep);
  rep->add_option("runs", c.inputs, "run record JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  if (!config_path.empty()) {
    try {
      qpenal::RunConfig base = qpenal::config_from_json(qpenal::read_json_file(config_path));
      // flags given on the command line win over the file
      const qpenal::RunConfig cli = c;
      c = base;
      auto take = [&](const char* flag, auto member) {
        if (sub->get_option_no_throw(flag) && sub->get_option(flag)->count() > 0) c.*member = cli.*member;
      };
      using R = qpenal::RunConfig;
      take("--seed", &R::seed);
      take("--out", &R::out_path);
      take("--instance", &R::instance_path);
      take("--encoding", &R::encoding);
      take("--family", &R::family);
      take("--k", &R::k);
      take("--a", &R::a);
      take("--b", &R::b);
      take("--p", &R::p);
      take("--layers", &R::layers);
      take("--shots", &R::shots);
      take("--max-iters", &R::max_iters);
      take("--type", &R::type);
      take("--n-items", &R::n_items);
      take("--n-bins", &R::n_bins);
      take("--weight-lo", &R::weight_lo);
      take("--weight-hi", &R::weight_hi);
      take("--capacity", &R::capacity);
      take("--n", &R::n);
      take("--edge-lo", &R::tsp_weight_lo);
      take("--edge-hi", &R::tsp_weight_hi);
      take("--symmetric", &R::symmetric);
      take("--ising-out", &R::ising_out_path);
      take("--k-grid", &R::k_grid);
      take("--a-grid", &R::a_grid);
      take("--b-grid", &R::b_grid);
      take("--p-grid", &R::p_grid);
      take("--lambda-grid", &R::lambda_grid);
      take("--qubo", &R::qubo_path);
      take("--beta-grid", &R::beta_grid);
      take("--gamma-grid", &R::gamma_grid);
      take("runs", &R::inputs);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  if (lambda_eq) c.lambda_eq = lambda_eq;
  if (lambda_ineq) c.lambda_ineq = lambda_ineq;
  c.command = sub->get_name();
  return qpenal::run(c);
}
