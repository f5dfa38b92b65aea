#include "wnc/feynman_kac.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "wnc/hermite.hpp"
#include "wnc/noise.hpp"
#include "wnc/products.hpp"

namespace wnc {

namespace {

// Graded list of coefficient multi-indices over K modes with |alpha| <=
// order_cap, with parent links so all monomials g^alpha come out of one
// multiply each.
struct CoeffBasis {
  int n_modes = 0;
  int order_cap = 0;
  std::vector<MultiIndex> idx;
  std::vector<int> parent;  // -1 for H_0
  std::vector<int> mode;
  std::vector<double> inv_factorial;
};

CoeffBasis make_coeff_basis(int n_modes, int order_cap, std::int64_t budget = 200000) {
  CoeffBasis b;
  b.n_modes = n_modes;
  b.order_cap = order_cap;
  std::int64_t count = n_modes == 0 ? 1 : modes_up_to_degree(n_modes, order_cap);
  if (count > budget)
    throw std::invalid_argument(
        "fk coefficient table too large (" + std::to_string(count) +
        " entries); lower the coefficient order cap or the noise degree");
  std::map<MultiIndex, int> rank_of;
  for (std::int64_t r = 0; r < count; ++r) {
    MultiIndex mi;
    if (n_modes > 0) {
      auto dense = mode_unrank(n_modes, r);
      mi = MultiIndex::from_dense(dense);
    }
    rank_of[mi] = static_cast<int>(b.idx.size());
    b.idx.push_back(mi);
    b.inv_factorial.push_back(1.0 / mi.factorial());
    if (mi.empty()) {
      b.parent.push_back(-1);
      b.mode.push_back(-1);
    } else {
      int m0 = mi.terms().front().first;
      std::vector<int> dense(n_modes, 0);
      for (const auto& [md, pw] : mi.terms()) dense[md] = pw;
      dense[m0] -= 1;
      b.parent.push_back(rank_of.at(MultiIndex::from_dense(dense)));
      b.mode.push_back(m0);
    }
  }
  return b;
}

struct Node {
  double t;
  Eigen::VectorXd x;
};

struct CoreOptions {
  bool keep_block_means = false;
  bool dt_shadow = false;  // secondary estimate from a 2*dt left rule
};

struct NodeStats {
  Eigen::VectorXd mean;  // E[w f g^alpha], pre 1/alpha!
  Eigen::VectorXd se;
  std::vector<Eigen::VectorXd> block_means;
  Eigen::VectorXd mean_2dt;
  double sw = 0.0, sw2 = 0.0;
  double max_g2 = 0.0, mean_g2 = 0.0, tail = 0.0;
};

struct BlockAcc {
  std::vector<Eigen::VectorXd> s1, s2, s1_2dt;
  std::vector<double> sw, sw2, tail, max_g2, sum_g2;
  int count = 0;
};

int pick_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Streaming Feynman-Kac accumulation over a list of (t, x) nodes. Paths
// use common random numbers across nodes sharing a start point: the path
// stream is a function of (seed, path index) only. Per-block partial sums
// are reduced in fixed block order, so results do not depend on the number
// of worker threads.
std::vector<NodeStats> fk_core(const SdeSpec& spec, const std::vector<Node>& nodes,
                               const FkParams& params, const CoreOptions& opts) {
  const int l = spec.dim_space;
  const int d = 1 + l;
  const int m = params.noise_degree;
  const int K = m >= 0 ? static_cast<int>(modes_up_to_degree(d, m)) : 0;
  CoeffBasis basis = make_coeff_basis(K, params.coeff_order_cap);
  const int nb = static_cast<int>(basis.idx.size());
  const int n_nodes = static_cast<int>(nodes.size());

  // Group nodes by start point; time must sit on the Euler grid.
  struct Group {
    Eigen::VectorXd x;
    std::vector<std::pair<int, int>> node_steps;  // (node index, steps)
    int max_steps = 0;
  };
  std::vector<Group> groups;
  for (int k = 0; k < n_nodes; ++k) {
    const auto& nd = nodes[k];
    if (!(nd.t > 0.0)) throw std::invalid_argument("fk_core: node time must be positive");
    int steps = static_cast<int>(std::llround(nd.t / params.dt));
    if (std::abs(steps * params.dt - nd.t) > 1e-9 * std::max(1.0, nd.t))
      throw std::invalid_argument("fk_core: node times must be multiples of dt");
    if (opts.dt_shadow && steps % 2 != 0)
      throw std::invalid_argument("fk_core: dt shadow needs times on the 2*dt grid");
    Group* g = nullptr;
    for (auto& gr : groups)
      if (gr.x == nd.x) {
        g = &gr;
        break;
      }
    if (!g) {
      groups.push_back({nd.x, {}, 0});
      g = &groups.back();
    }
    g->node_steps.push_back({k, steps});
    g->max_steps = std::max(g->max_steps, steps);
  }

  // PSD spot check on the start points.
  {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& g : groups) pts.push_back(g.x);
    spot_check_diffusion(spec, pts);
  }

  const int n = params.n_paths;
  if (n < 1) throw std::invalid_argument("fk_core: need at least one path");
  int n_blocks = std::clamp(n / 4096, 8, 32);
  n_blocks = std::min(n_blocks, n);
  const double h = params.dt;

  std::optional<ModeTable> table;
  if (m >= 0) table.emplace(d, m);

  std::vector<BlockAcc> blocks(n_blocks);
  std::atomic<int> next_block{0};

  auto worker = [&]() {
    // Per-thread scratch. spacetab is column-per-step so the 1-D series
    // land in contiguous memory.
    Eigen::MatrixXd states;           // (max_steps+1) x l
    Eigen::MatrixXd spacetab;         // (l*(m+1)) x steps
    std::vector<double> timetab(m >= 0 ? m + 1 : 1);
    Eigen::VectorXd g(K), g2dt(K), mono(nb), mono2(nb), state(l), bvec(l), dB(l);
    Eigen::MatrixXd sg(l, l);

    for (;;) {
      int blk = next_block.fetch_add(1);
      if (blk >= n_blocks) break;
      int lo = static_cast<int>(static_cast<std::int64_t>(n) * blk / n_blocks);
      int hi = static_cast<int>(static_cast<std::int64_t>(n) * (blk + 1) / n_blocks);
      BlockAcc& acc = blocks[blk];
      acc.s1.assign(n_nodes, Eigen::VectorXd::Zero(nb));
      acc.s2.assign(n_nodes, Eigen::VectorXd::Zero(nb));
      if (opts.dt_shadow) acc.s1_2dt.assign(n_nodes, Eigen::VectorXd::Zero(nb));
      acc.sw.assign(n_nodes, 0.0);
      acc.sw2.assign(n_nodes, 0.0);
      acc.tail.assign(n_nodes, 0.0);
      acc.max_g2.assign(n_nodes, 0.0);
      acc.sum_g2.assign(n_nodes, 0.0);
      acc.count = hi - lo;

      for (int p = lo; p < hi; ++p) {
        for (const auto& grp : groups) {
          PathRng rng(params.seed, static_cast<std::uint64_t>(p));
          const int S = grp.max_steps;
          states.resize(S + 1, l);
          state = grp.x;
          states.row(0) = state.transpose();
          if (m >= 0) spacetab.resize(l * (m + 1), std::max(S, 1));
          for (int i = 0; i < S; ++i) {
            if (m >= 0)
              for (int c = 0; c < l; ++c)
                hermite_fn_series(m, state[c],
                                  std::span<double>(spacetab.col(i).data() + c * (m + 1),
                                                    m + 1));
            bvec = spec.drift_at(state);
            sg = spec.sigma_at(state);
            for (int k = 0; k < l; ++k) dB[k] = std::sqrt(h) * rng.normal();
            state += bvec * h + sg * dB;
            if (!state.allFinite())
              throw std::runtime_error("fk_core: non-finite state (path " +
                                       std::to_string(p) + ")");
            states.row(i + 1) = state.transpose();
          }

          for (const auto& [node_k, steps_k] : grp.node_steps) {
            double tk = nodes[node_k].t;
            double fval = spec.initial(states.row(steps_k).transpose());
            double g2 = 0.0;
            if (m >= 0) {
              g.setZero();
              if (opts.dt_shadow) g2dt.setZero();
              for (int i = 0; i < steps_k; ++i) {
                double tau = tk - i * h;
                hermite_fn_series(m, tau, timetab);
                // mode r value: timetab[alpha_0] * prod_c spacetab(i, c, alpha_{1+c})
                for (int r = 0; r < K; ++r) {
                  const auto& alpha = table->index(r);
                  double v = timetab[alpha[0]];
                  for (int c = 0; c < l; ++c) v *= spacetab(c * (m + 1) + alpha[1 + c], i);
                  g[r] += h * v;
                  if (opts.dt_shadow && i % 2 == 0) g2dt[r] += 2.0 * h * v;
                }
              }
              g2 = g.squaredNorm();
            }
            // The reweighting is the known variance bomb of this estimator;
            // clamp the exponent so a blow-up degrades the ESS diagnostics
            // instead of silently overflowing.
            double w = params.wick ? 1.0 : std::exp(std::min(0.5 * g2, 690.0));
            // Monomials via parent links (basis is graded, parents come first).
            mono[0] = 1.0;
            for (int i = 1; i < nb; ++i) mono[i] = mono[basis.parent[i]] * g[basis.mode[i]];
            double wf = w * fval;
            auto& s1 = acc.s1[node_k];
            auto& s2 = acc.s2[node_k];
            for (int i = 0; i < nb; ++i) {
              double v = wf * mono[i];
              s1[i] += v;
              s2[i] += v * v;
            }
            if (opts.dt_shadow) {
              double w2 = params.wick ? 1.0 : std::exp(0.5 * g2dt.squaredNorm());
              mono2[0] = 1.0;
              for (int i = 1; i < nb; ++i)
                mono2[i] = mono2[basis.parent[i]] * g2dt[basis.mode[i]];
              acc.s1_2dt[node_k] += (w2 * fval) * mono2;
            }
            acc.sw[node_k] += w;
            acc.sw2[node_k] += w * w;
            acc.max_g2[node_k] = std::max(acc.max_g2[node_k], g2);
            acc.sum_g2[node_k] += g2;
            // Orders beyond the cap: |f| w (e^{|g|} - sum_{n<=cap} |g|^n/n!).
            double gn = std::sqrt(g2);
            double partial = 0.0, term = 1.0;
            for (int q = 0; q <= params.coeff_order_cap; ++q) {
              partial += term;
              term *= gn / (q + 1);
            }
            acc.tail[node_k] += std::abs(fval) * w * std::max(0.0, std::exp(gn) - partial);
          }
        }
      }
    }
  };

  int T = std::min(pick_threads(params.threads), n_blocks);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex err_mx;
  for (int t = 0; t < T; ++t)
    pool.emplace_back([&]() {
      try {
        worker();
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mx);
        if (!error) error = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  // Fixed-order reduction.
  std::vector<NodeStats> stats(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    NodeStats& st = stats[k];
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(nb);
    Eigen::VectorXd s2 = Eigen::VectorXd::Zero(nb);
    Eigen::VectorXd s1b = Eigen::VectorXd::Zero(nb);
    for (int b = 0; b < n_blocks; ++b) {
      const BlockAcc& acc = blocks[b];
      s1 += acc.s1[k];
      s2 += acc.s2[k];
      if (opts.dt_shadow) s1b += acc.s1_2dt[k];
      st.sw += acc.sw[k];
      st.sw2 += acc.sw2[k];
      st.tail += acc.tail[k];
      st.max_g2 = std::max(st.max_g2, acc.max_g2[k]);
      st.mean_g2 += acc.sum_g2[k];
      if (opts.keep_block_means) st.block_means.push_back(acc.s1[k] / acc.count);
    }
    st.mean = s1 / n;
    st.mean_g2 /= n;
    st.tail /= n;
    st.se.resize(nb);
    for (int i = 0; i < nb; ++i) {
      double var = n > 1 ? std::max(0.0, (s2[i] - s1[i] * s1[i] / n) / (n - 1)) : 0.0;
      st.se[i] = std::sqrt(var / n);
    }
    if (opts.dt_shadow) st.mean_2dt = s1b / n;
  }
  return stats;
}

FkPoint make_point(const SdeSpec& spec, double t, const Eigen::VectorXd& x,
                   const FkParams& params, const NodeStats& st, const CoeffBasis& basis) {
  const int d = 1 + spec.dim_space;
  FkPoint pt;
  pt.t = t;
  pt.x = x;
  pt.params = params;
  BasisLayout layout{d, basis.n_modes, params.coeff_order_cap};
  pt.value = ChaosVector(layout);
  for (std::size_t i = 0; i < basis.idx.size(); ++i) {
    double c = st.mean[i] * basis.inv_factorial[i];
    if (c != 0.0) pt.value.set_coeff(basis.idx[i], c);
    pt.stderrs[basis.idx[i]] = st.se[i] * basis.inv_factorial[i];
  }
  pt.ess = st.sw2 > 0.0 ? st.sw * st.sw / st.sw2 : static_cast<double>(params.n_paths);
  pt.degenerate = pt.ess < 0.01 * params.n_paths;
  pt.tail_bound = st.tail;
  pt.max_g_sq = st.max_g2;
  pt.mean_g_sq = st.mean_g2;
  return pt;
}

CoeffBasis basis_for(const SdeSpec& spec, const FkParams& params) {
  const int d = 1 + spec.dim_space;
  int K = params.noise_degree >= 0
              ? static_cast<int>(modes_up_to_degree(d, params.noise_degree))
              : 0;
  return make_coeff_basis(K, params.coeff_order_cap);
}

}  // namespace

double FkPoint::coeff_stderr(const MultiIndex& mi) const {
  auto it = stderrs.find(mi);
  return it == stderrs.end() ? 0.0 : it->second;
}

FkPoint fk_solve(const SdeSpec& spec, double t, const Eigen::VectorXd& x,
                 const FkParams& params) {
  if (t == 0.0) {
    FkPoint pt;
    pt.t = 0.0;
    pt.x = x;
    pt.params = params;
    const int d = 1 + spec.dim_space;
    int K = params.noise_degree >= 0
                ? static_cast<int>(modes_up_to_degree(d, params.noise_degree))
                : 0;
    pt.value = ChaosVector(BasisLayout{d, K, params.coeff_order_cap});
    pt.value.set_coeff(MultiIndex{}, spec.initial(x));
    pt.ess = params.n_paths;
    return pt;
  }
  std::vector<Node> nodes{{t, x}};
  auto stats = fk_core(spec, nodes, params, {});
  return make_point(spec, t, x, params, stats[0], basis_for(spec, params));
}

FkPoint fk_solve_wick(const SdeSpec& spec, double t, const Eigen::VectorXd& x,
                      const FkParams& params) {
  FkParams p = params;
  p.wick = true;
  return fk_solve(spec, t, x, p);
}

GenSequence fk_solution_sequence(const SdeSpec& spec, double t, const Eigen::VectorXd& x,
                                 int m_max, const FkParams& params,
                                 std::vector<FkPoint>* points) {
  GenSequence s;
  s.meta = "fk-solution(" + spec.name + ")";
  for (int m = 0; m <= m_max; ++m) {
    FkParams p = params;
    p.noise_degree = m;
    FkPoint pt = fk_solve(spec, t, x, p);
    s.terms.push_back(pt.value);
    if (points) points->push_back(std::move(pt));
  }
  return s;
}

namespace {

ChaosVector table_to_cv(const CoeffBasis& basis, const Eigen::VectorXd& table,
                        const BasisLayout& layout, int order_window) {
  ChaosVector cv(layout);
  for (std::size_t i = 0; i < basis.idx.size(); ++i) {
    if (basis.idx[i].order() > order_window) continue;
    double c = table[i] * basis.inv_factorial[i];
    if (c != 0.0) cv.set_coeff(basis.idx[i], c);
  }
  return cv;
}

}  // namespace

ResidualReport residual(const SdeSpec& spec, const FkParams& params,
                        const std::vector<double>& times, const std::vector<double>& xs,
                        int order_window) {
  if (spec.dim_space != 1)
    throw std::invalid_argument("residual: grid evaluation supports l = 1 only");
  if (times.size() < 5 || xs.size() < 5)
    throw std::invalid_argument("residual: need at least a 5x5 grid");
  if (params.coeff_order_cap < order_window + 1)
    throw std::invalid_argument(
        "residual: coefficient cap must exceed the order window by one");

  const int nt = static_cast<int>(times.size());
  const int nx = static_cast<int>(xs.size());
  std::vector<Node> nodes;
  nodes.reserve(nt * nx);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nx; ++j) {
      Eigen::VectorXd x(1);
      x << xs[j];
      nodes.push_back({times[i], x});
    }
  auto at = [&](int i, int j) { return i * nx + j; };

  CoreOptions copts;
  copts.keep_block_means = true;
  copts.dt_shadow = true;
  auto stats = fk_core(spec, nodes, params, copts);
  CoeffBasis basis = basis_for(spec, params);
  const int d = 2;
  BasisLayout full{d, basis.n_modes, params.coeff_order_cap};
  BasisLayout windowed{d, basis.n_modes, order_window};

  const double dt_grid = times[1] - times[0];
  const double dx_grid = xs[1] - xs[0];
  for (int i = 1; i < nt; ++i)
    if (std::abs(times[i] - times[i - 1] - dt_grid) > 1e-12)
      throw std::invalid_argument("residual: times must be uniform");
  for (int j = 1; j < nx; ++j)
    if (std::abs(xs[j] - xs[j - 1] - dx_grid) > 1e-12)
      throw std::invalid_argument("residual: xs must be uniform");

  // Residual at an interior node from a per-node table extractor, with an
  // optional spacing multiplier for the Richardson check.
  auto resid_at = [&](const std::function<Eigen::VectorXd(int)>& tab, int i, int j,
                      int spread) -> ChaosVector {
    auto cv = [&](int node, int window) {
      return table_to_cv(basis, tab(node), window == order_window ? windowed : full,
                         window);
    };
    double a;
    {
      Eigen::VectorXd xp(1);
      xp << xs[j];
      double sg = spec.sigma_at(xp)(0, 0);
      a = sg * sg;
    }
    Eigen::VectorXd xp(1);
    xp << xs[j];
    double bdrift = spec.drift_at(xp)(0);

    ChaosVector ut = (1.0 / (2.0 * spread * dt_grid)) *
                     (cv(at(i + spread, j), order_window) - cv(at(i - spread, j), order_window));
    ChaosVector uxx = (1.0 / (spread * dx_grid * spread * dx_grid)) *
                      (cv(at(i, j + spread), order_window) -
                       2.0 * cv(at(i, j), order_window) + cv(at(i, j - spread), order_window));
    ChaosVector ux = (1.0 / (2.0 * spread * dx_grid)) *
                     (cv(at(i, j + spread), order_window) - cv(at(i, j - spread), order_window));
    // Product term: u (orders <= window + 1) times the order-1 noise field,
    // truncated back to the window.
    Eigen::VectorXd point(2);
    point << times[i], xs[j];
    ChaosVector w = white_noise(BasisLayout{d, basis.n_modes, 1}, point, basis.n_modes - 1);
    ChaosVector uw = project_order(mul(cv(at(i, j), order_window + 1), w), order_window);
    return ut - 0.5 * a * uxx - bdrift * ux - uw;
  };

  ResidualReport rep;
  rep.times = times;
  rep.xs = xs;
  rep.order_window = order_window;

  const int n_blocks = static_cast<int>(stats[0].block_means.size());
  double max_r0 = 0.0, max_r1 = 0.0, max_se0 = 0.0, max_se1 = 0.0;
  double max_fd0 = 0.0, max_fd1 = 0.0, max_dt0 = 0.0, max_dt1 = 0.0;

  auto mean_tab = [&](int node) { return stats[node].mean; };
  auto shadow_tab = [&](int node) { return stats[node].mean_2dt; };

  for (int i = 1; i + 1 < nt; ++i) {
    for (int j = 1; j + 1 < nx; ++j) {
      ChaosVector r = resid_at(mean_tab, i, j, 1);
      max_r0 = std::max(max_r0, norm(r, 0));
      max_r1 = std::max(max_r1, norm(r, 1));

      // MC part: spread of the block residuals.
      std::vector<ChaosVector> rb;
      rb.reserve(n_blocks);
      for (int b = 0; b < n_blocks; ++b)
        rb.push_back(resid_at([&](int node) { return stats[node].block_means[b]; }, i, j, 1));
      // Per-coefficient standard error of the mean over blocks.
      std::map<MultiIndex, std::pair<double, double>> ms;  // sum, sumsq
      for (const auto& rbk : rb)
        for (const auto& [mi, c] : rbk.coeffs()) {
          auto& e = ms[mi];
          e.first += c;
          e.second += c * c;
        }
      ChaosVector sevec(windowed);
      for (auto& [mi, e] : ms) {
        double mean = e.first / n_blocks;
        double var = n_blocks > 1
                         ? std::max(0.0, (e.second - n_blocks * mean * mean) / (n_blocks - 1))
                         : 0.0;
        double se = std::sqrt(var / n_blocks);
        if (se != 0.0) sevec.set_coeff(mi, se);
      }
      max_se0 = std::max(max_se0, norm(sevec, 0));
      max_se1 = std::max(max_se1, norm(sevec, 1));

      // FD part: doubled-spacing Richardson where the grid allows it.
      if (i >= 2 && i + 2 < nt && j >= 2 && j + 2 < nx) {
        ChaosVector r2 = resid_at(mean_tab, i, j, 2);
        ChaosVector diff = r2 - r;
        max_fd0 = std::max(max_fd0, norm(diff, 0) / 3.0);
        max_fd1 = std::max(max_fd1, norm(diff, 1) / 3.0);
      }

      // dt part: residual from the 2*dt left rule vs the dt rule.
      ChaosVector rs = resid_at(shadow_tab, i, j, 1);
      ChaosVector ddt = rs - r;
      max_dt0 = std::max(max_dt0, norm(ddt, 0));
      max_dt1 = std::max(max_dt1, norm(ddt, 1));
    }
  }

  rep.residual_p0 = max_r0;
  rep.residual_p1 = max_r1;
  rep.se_p0 = max_se0;
  rep.se_p1 = max_se1;
  rep.fd_p0 = max_fd0;
  rep.fd_p1 = max_fd1;
  rep.dt_p0 = max_dt0;
  rep.dt_p1 = max_dt1;
  rep.budget_p0 = 3.0 * max_se0 + max_fd0 + max_dt0;
  rep.budget_p1 = 3.0 * max_se1 + max_fd1 + max_dt1;
  rep.grid_ok = max_fd0 <= std::max({3.0 * max_se0, max_dt0, 1e-12});
  rep.within_budget = max_r0 <= rep.budget_p0 && max_r1 <= rep.budget_p1;
  return rep;
}

WickCompareReport compare_wick_vs_generalized(const FkPoint& u, const FkPoint& v,
                                              const Eigen::VectorXd& h_hat) {
  WickCompareReport r;
  r.s_generalized = s_transform(u.value, h_hat);
  r.s_wick = s_transform(v.value, h_hat);
  r.order0_generalized = expectation(u.value);
  r.order0_wick = expectation(v.value);
  r.ratio = r.order0_generalized / r.order0_wick;
  double seu = u.coeff_stderr(MultiIndex{});
  double sev = v.coeff_stderr(MultiIndex{});
  double au = r.order0_generalized, av = r.order0_wick;
  r.ratio_se = std::abs(r.ratio) *
               std::sqrt((au != 0 ? seu * seu / (au * au) : 0.0) +
                         (av != 0 ? sev * sev / (av * av) : 0.0));
  r.outside_reading = r.s_wick * std::exp(std::sqrt(std::max(0.0, u.mean_g_sq)));
  return r;
}

UniquenessReport uniqueness_probe(const SdeSpec& spec, double t, const Eigen::VectorXd& x,
                                  int m, std::pair<std::uint64_t, std::uint64_t> seeds,
                                  const FkParams& params) {
  FkParams pa = params;
  pa.seed = seeds.first;
  FkParams pb = params;
  pb.seed = seeds.second;
  std::vector<FkPoint> ua, ub;
  GenSequence su = fk_solution_sequence(spec, t, x, m, pa, &ua);
  GenSequence sv = fk_solution_sequence(spec, t, x, m, pb, &ub);
  su.meta = "fk-u";
  sv.meta = "fk-v";

  // Tolerance: 3x the combined standard error of the H_0 pairing over the
  // final quarter of levels.
  int levels = m + 1;
  int q_lo = levels - 1 - std::max(1, (levels - 1) / 4);
  double worst = 0.0;
  for (int k = q_lo; k < levels; ++k) {
    double se = std::hypot(ua[k].coeff_stderr(MultiIndex{}), ub[k].coeff_stderr(MultiIndex{}));
    worst = std::max(worst, se);
  }
  UniquenessReport rep;
  rep.tol = 3.0 * worst;
  ChaosVector test(BasisLayout{1 + spec.dim_space, 1, 0});
  test.set_coeff(MultiIndex{}, 1.0);
  rep.assoc = associated_limit(su, sv, test, rep.tol > 0 ? rep.tol : 1e-12);
  return rep;
}

}  // namespace wnc
