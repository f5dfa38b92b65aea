#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wnc {

/// One declared tolerance check; `pass` decides the process exit code.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  std::string rel = "<=";  // "<=", ">=" or "bool"
  bool pass = false;
};

Check check_le(const std::string& name, double value, double bound);
Check check_ge(const std::string& name, double value, double bound);
Check check_bool(const std::string& name, bool ok);

struct RunResult {
  std::vector<Check> checks;
  std::vector<std::string> artifacts;  // paths written
  int exit_code = 0;
  std::string manifest_path;
};

/// Batch experiment configuration; every field is echoed into the run
/// manifest. Subcommands: hermite-suite, algebra-suite, embed-study,
/// noise-growth, donsker-check, spde-solve, spde-residual,
/// spde-compare-wick, uniqueness, eval.
struct RunConfig {
  std::string subcommand;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;
  bool inject_failure = false;  // forces one failing check (exit-code test)

  // Shared caps for expression evaluation and algebra work.
  int dim = 1;
  int mode_cap = 16;
  int order_cap = 8;

  // hermite-suite
  int jmax = 40;
  int quad_order = 200;
  int cd_nmax = 20;
  int eigen_jmax = 30;
  int decay_jmax = 256;

  // algebra-suite
  int n_triples = 100;
  int n_pairs = 50;
  int n_phi = 20;

  // embed-study / noise-growth
  int levels = 24;             // M
  double embed_f_scale = 0.0025;
  std::vector<int> p_grid = {0, 1, 2};
  std::vector<double> probes = {1.0, 2.0, 4.0, 8.0};
  double x_point = 0.7;

  // donsker-check
  long long mc_samples = 1000000;
  double mollify_eps = 0.05;
  int brownian_modes = 64;

  // spde
  std::string preset = "heat-gaussian";
  std::string drift_expr;    // optional custom fields (l = 1)
  std::string sigma_expr;
  std::string initial_expr;
  double horizon = 0.25;
  double x0 = 0.0;
  int m_lo = 0;
  int m_hi = 8;
  std::vector<int> m_list = {4, 8, 16};
  int fk_order_cap = 2;
  int n_paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed2 = 2;

  // eval
  std::string expr_text;
};

RunResult run(const RunConfig& config);

/// Hex SHA-1 of a string (run-manifest content hashes).
std::string sha1_hex(const std::string& data);

}  // namespace wnc
