// wncalc: expression evaluation over the chaos algebra plus batch
// experiment subcommands. Every subcommand writes CSV artifacts and a JSON
// manifest into --out and exits nonzero iff a declared tolerance failed.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "wnc/experiments.hpp"
#include "wnc/expr.hpp"

namespace {

void add_common(CLI::App* cmd, wnc::RunConfig& cfg) {
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--seed", cfg.seed, "random seed (all randomness flows from this)");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
  cmd->add_flag("--inject-failure", cfg.inject_failure,
                "append one failing check (exit-code contract test)");
}

void add_caps(CLI::App* cmd, wnc::RunConfig& cfg) {
  cmd->add_option("--dim", cfg.dim, "mode dimension d");
  cmd->add_option("--modes", cfg.mode_cap, "mode cap J");
  cmd->add_option("--order", cfg.order_cap, "chaos order cap N");
}

void add_spde(CLI::App* cmd, wnc::RunConfig& cfg) {
  cmd->add_option("--preset", cfg.preset,
                  "heat-gaussian | ou | pathwise-exp | constant-drift");
  cmd->add_option("--drift-expr", cfg.drift_expr, "custom drift b(x), mini-language");
  cmd->add_option("--sigma-expr", cfg.sigma_expr, "custom sigma(x), mini-language");
  cmd->add_option("--initial-expr", cfg.initial_expr, "custom f(x), mini-language");
  cmd->add_option("--t", cfg.horizon, "time horizon");
  cmd->add_option("--x", cfg.x0, "spatial point");
  cmd->add_option("--n-paths", cfg.n_paths, "Monte-Carlo paths");
  cmd->add_option("--dt", cfg.dt, "Euler-Maruyama step");
  cmd->add_option("--fk-order", cfg.fk_order_cap, "retained chaos orders");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"white-noise calculus engine"};
  app.require_subcommand(1);
  wnc::RunConfig cfg;

  auto* hermite = app.add_subcommand("hermite-suite", "orthonormality / CD / eigen checks");
  add_common(hermite, cfg);
  hermite->add_option("--jmax", cfg.jmax, "orthonormality degree cap");
  hermite->add_option("--quad-order", cfg.quad_order, "Gauss-Hermite order");

  auto* algebra = app.add_subcommand("algebra-suite", "product and norm identities");
  add_common(algebra, cfg);
  algebra->add_option("--triples", cfg.n_triples, "random Wick triples");
  algebra->add_option("--pairs", cfg.n_pairs, "random mul pairs");

  auto* embed = app.add_subcommand("embed-study", "Pi_m convergence tables");
  add_common(embed, cfg);
  embed->add_option("--M", cfg.levels, "projection levels");
  embed->add_option("--f-scale", cfg.embed_f_scale, "|f| of the test Wick exponential");
  embed->add_option("--probes", cfg.probes, "decay probe grid a_1 a_2 ...");
  embed->add_option("--p-grid", cfg.p_grid, "norm indices");

  auto* growth = app.add_subcommand("noise-growth", "white-noise moderateness");
  add_common(growth, cfg);
  growth->add_option("--M", cfg.levels, "levels");
  growth->add_option("--x", cfg.x_point, "evaluation point");
  growth->add_option("--probes", cfg.probes, "decay probe grid a_1 a_2 ...");
  growth->add_option("--p-grid", cfg.p_grid, "norm indices");

  auto* donsker = app.add_subcommand("donsker-check", "Brownian / Donsker oracles");
  add_common(donsker, cfg);
  donsker->add_option("--mc-samples", cfg.mc_samples, "mollified-delta samples");
  donsker->add_option("--eps", cfg.mollify_eps, "mollifier half-width");
  donsker->add_option("--brownian-modes", cfg.brownian_modes, "Hermite modes for B(t)");

  auto* solve = app.add_subcommand("spde-solve", "Feynman-Kac chaos coefficients");
  add_common(solve, cfg);
  add_spde(solve, cfg);
  solve->add_option("--m-lo", cfg.m_lo, "lowest noise level (-1 = no noise)");
  solve->add_option("--m-hi", cfg.m_hi, "highest noise level");

  auto* resid = app.add_subcommand("spde-residual", "PDE residual with error budget");
  add_common(resid, cfg);
  add_spde(resid, cfg);
  resid->add_option("--m", cfg.m_lo, "noise level");

  auto* compare = app.add_subcommand("spde-compare-wick", "Wick vs generalized solution");
  add_common(compare, cfg);
  add_spde(compare, cfg);
  compare->add_option("--m-list", cfg.m_list, "noise levels");

  auto* uniq = app.add_subcommand("uniqueness", "two-seed association probe");
  add_common(uniq, cfg);
  add_spde(uniq, cfg);
  uniq->add_option("--m", cfg.m_hi, "noise level");
  uniq->add_option("--seed2", cfg.seed2, "second seed");

  auto* ev = app.add_subcommand("eval", "evaluate a chaos-algebra expression");
  add_common(ev, cfg);
  add_caps(ev, cfg);
  std::string expr_file;
  ev->add_option("--expr", cfg.expr_text, "expression text");
  ev->add_option("--file", expr_file, "read the expression from a file");
  bool print_only = false;
  ev->add_flag("--parse-only", print_only, "parse and print the canonical form");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (cfg.subcommand == "eval") {
      if (!expr_file.empty()) {
        std::ifstream is(expr_file);
        if (!is) {
          std::fprintf(stderr, "cannot open %s\n", expr_file.c_str());
          return 2;
        }
        std::ostringstream ss;
        ss << is.rdbuf();
        cfg.expr_text = ss.str();
      }
      if (cfg.expr_text.empty()) {
        std::fprintf(stderr, "eval: need --expr or --file\n");
        return 2;
      }
      if (print_only) {
        std::cout << wnc::expr::print(wnc::expr::parse(cfg.expr_text)) << "\n";
        return 0;
      }
    }
    wnc::RunResult r = wnc::run(cfg);
    for (const auto& ch : r.checks)
      std::printf("%s %s (value %.6g, bound %.6g)\n", ch.pass ? "PASS" : "FAIL",
                  ch.name.c_str(), ch.value, ch.bound);
    if (cfg.subcommand == "eval") {
      std::ifstream is(cfg.out_dir + "/eval_result.txt");
      std::cout << is.rdbuf();
    }
    std::printf("manifest: %s\n", r.manifest_path.c_str());
    return r.exit_code;
  } catch (const wnc::expr::ParseError& e) {
    std::fprintf(stderr, "parse error: %s (expected %s)\n", e.what(), e.expected.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
