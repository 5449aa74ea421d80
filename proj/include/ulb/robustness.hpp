#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "payoff.hpp"

namespace ulb {

// Paired states (q_own, q_opp) reachable from the start under arbitrary
// realized histories: q_own reads (a,b) while q_opp reads (b,a).
inline std::vector<std::pair<int, int>> reachable_pairs(const StrategyAutomaton& s1,
                                                        const StrategyAutomaton& s2) {
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> order;
  order.emplace_back(s1.initial, s2.initial);
  seen.insert(order[0]);
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto [q1, q2] = order[k];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Action ra = static_cast<Action>(a), rb = static_cast<Action>(b);
        std::pair<int, int> succ{s1.step(q1, ra, rb), s2.step(q2, rb, ra)};
        if (seen.insert(succ).second) order.push_back(succ);
      }
  }
  return order;
}

enum class SgpMode { FULL_TREMBLE, EQPATH };

struct SgpReport {
  SgpMode mode = SgpMode::EQPATH;
  std::map<int, double> per_state_gap;  // opponent state -> worst gap over paired own states
  double min_gap = std::numeric_limits<double>::infinity();
  bool prescription_optimal = true;
  double threshold = 0.0;
  int iterations = 0;
};

namespace detail {

// Exact optimal deviation values against the fixed automaton s, by policy
// iteration with exact policy evaluation. States are s's automaton states.
// reward(q, a) and transition probabilities take expectations over trembles
// (FULL_TREMBLE) or follow the intended path with discount beta (EQPATH).
struct DeviationMdp {
  Eigen::MatrixXd reward;                       // n x 2
  std::vector<std::array<std::vector<std::pair<int, double>>, 2>> trans;
  double discount;
};

inline DeviationMdp deviation_mdp(const StrategyAutomaton& s, const TremblePayoffContext& ctx,
                                  SgpMode mode) {
  int n = s.size();
  DeviationMdp mdp;
  mdp.reward.resize(n, 2);
  mdp.trans.resize(static_cast<std::size_t>(n));
  double p = ctx.p;
  if (mode == SgpMode::EQPATH) {
    mdp.discount = ctx.p * ctx.p * ctx.delta;
    for (int q = 0; q < n; ++q) {
      Action b = s.intent(q);
      for (int ai = 0; ai < 2; ++ai) {
        Action a = static_cast<Action>(ai);
        mdp.reward(q, ai) = ctx.params.stage(a, b);
        mdp.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(ai)] = {
            {s.step(q, b, a), 1.0}};
      }
    }
  } else {
    mdp.discount = ctx.delta;
    for (int q = 0; q < n; ++q) {
      Action b0 = s.intent(q);
      for (int ai = 0; ai < 2; ++ai) {
        Action a0 = static_cast<Action>(ai);
        double r = 0.0;
        std::map<int, double> succ;
        for (int ar = 0; ar < 2; ++ar)
          for (int br = 0; br < 2; ++br) {
            Action a = static_cast<Action>(ar), b = static_cast<Action>(br);
            double prob = (a == a0 ? p : 1.0 - p) * (b == b0 ? p : 1.0 - p);
            if (prob == 0.0) continue;
            r += prob * ctx.params.stage(a, b);
            succ[s.step(q, b, a)] += prob;
          }
        mdp.reward(q, ai) = r;
        auto& row = mdp.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(ai)];
        row.assign(succ.begin(), succ.end());
      }
    }
  }
  return mdp;
}

struct MdpSolution {
  Eigen::VectorXd value;      // geometric values, no normalization
  Eigen::MatrixXd q_values;   // n x 2
  std::vector<int> policy;
  int iterations = 0;
};

inline MdpSolution solve_mdp(const DeviationMdp& mdp) {
  int n = static_cast<int>(mdp.reward.rows());
  MdpSolution sol;
  sol.policy.assign(static_cast<std::size_t>(n), 0);
  sol.q_values.resize(n, 2);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int iter = 0; iter < 1000; ++iter) {
    ++sol.iterations;
    // Exact evaluation of the current policy.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int q = 0; q < n; ++q) {
      int a = sol.policy[static_cast<std::size_t>(q)];
      b(q) = mdp.reward(q, a);
      for (const auto& [succ, prob] : mdp.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)])
        A(q, succ) -= mdp.discount * prob;
    }
    v = A.partialPivLu().solve(b);
    // Greedy improvement.
    bool stable = true;
    for (int q = 0; q < n; ++q) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = sol.policy[static_cast<std::size_t>(q)];
      for (int a = 0; a < 2; ++a) {
        double qa = mdp.reward(q, a);
        for (const auto& [succ, prob] : mdp.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)])
          qa += mdp.discount * prob * v(succ);
        sol.q_values(q, a) = qa;
        if (qa > best + 1e-13) {
          best = qa;
          arg = a;
        }
      }
      if (arg != sol.policy[static_cast<std::size_t>(q)]) {
        sol.policy[static_cast<std::size_t>(q)] = arg;
        stable = false;
      }
    }
    if (stable) break;
  }
  sol.value = v;
  return sol;
}

}  // namespace detail

// Optimal single deviation followed by optimal play, along intended paths
// only, with effective discount p^2 * delta. Gaps are reported in the
// normalized units (1 - p^2 delta) * sum_t (p^2 delta)^t u_t.
inline SgpReport best_deviation_eqpath(const StrategyAutomaton& s,
                                       const TremblePayoffContext& ctx) {
  ctx.validate();
  SgpReport rep;
  rep.mode = SgpMode::EQPATH;
  double beta = ctx.p * ctx.p * ctx.delta;
  detail::DeviationMdp mdp = detail::deviation_mdp(s, ctx, SgpMode::EQPATH);
  detail::MdpSolution sol = detail::solve_mdp(mdp);
  rep.iterations = sol.iterations;
  double tol = 1e-9 * std::max(1.0, sol.value.lpNorm<Eigen::Infinity>());
  for (int q = 0; q < s.size(); ++q) {
    // Conforming means mirroring the opponent's prescription at q, which on
    // the intended path is diagonal self-play started from (q, q).
    double conform = path_masses(s, s, q, q, beta).payoff(ctx.params);
    double conform_geo = conform / (1.0 - beta);
    if (conform_geo < sol.value(q) - tol) rep.prescription_optimal = false;
    Action dev = flip(s.intent(q));
    double dev_norm = (1.0 - beta) * sol.q_values(q, static_cast<int>(dev));
    double gap = conform - dev_norm;
    rep.per_state_gap[q] = gap;
    if (gap < rep.min_gap) rep.min_gap = gap;
  }
  return rep;
}

// Same comparison with trembles on both sides; values are exact expectations
// and gaps are reported in the normalization recorded in ctx.
inline SgpReport best_deviation_full(const StrategyAutomaton& s,
                                     const TremblePayoffContext& ctx) {
  ctx.validate();
  SgpReport rep;
  rep.mode = SgpMode::FULL_TREMBLE;
  detail::DeviationMdp mdp = detail::deviation_mdp(s, ctx, SgpMode::FULL_TREMBLE);
  detail::MdpSolution sol = detail::solve_mdp(mdp);
  rep.iterations = sol.iterations;
  // Conforming means playing the opponent's own prescription at every state of
  // the deviation process; its value is the exact evaluation of that policy.
  int n = s.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int q = 0; q < n; ++q) {
    int a = static_cast<int>(s.intent(q));
    b(q) = mdp.reward(q, a);
    for (const auto& [succ, prob] :
         mdp.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)])
      A(q, succ) -= mdp.discount * prob;
  }
  Eigen::VectorXd conform = A.partialPivLu().solve(b);
  double nf = ctx.norm_factor();
  double tol = 1e-9 * std::max(1.0, sol.value.lpNorm<Eigen::Infinity>());
  for (int q = 0; q < n; ++q) {
    if (conform(q) < sol.value(q) - tol) rep.prescription_optimal = false;
    // Gap of conforming relative to unrestricted optimal play; never positive.
    double gap = nf * (conform(q) - sol.value(q));
    rep.per_state_gap[q] = gap;
    if (gap < rep.min_gap) rep.min_gap = gap;
  }
  return rep;
}

inline bool uniform_strict_check(const StrategyAutomaton& s, const TremblePayoffContext& ctx,
                                 double C0, SgpReport* report_out = nullptr) {
  if (!(C0 > 0.0)) throw std::invalid_argument("C0 must be positive");
  SgpReport rep = best_deviation_eqpath(s, ctx);
  rep.threshold = (1.0 - ctx.p * ctx.p * ctx.delta) * C0;
  bool ok = rep.min_gap > rep.threshold;
  if (report_out) *report_out = rep;
  return ok;
}

struct C0Default {
  double value;           // min{P - S, 2R - (T + P) - eps}
  double remark_variant;  // min{P - S, 2R - (T + S) - eps}
};

inline C0Default c0_default(const PayoffParams& params, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  C0Default out;
  out.value = std::min(params.P - params.S, 2.0 * params.R - (params.T + params.P) - epsilon);
  out.remark_variant =
      std::min(params.P - params.S, 2.0 * params.R - (params.T + params.S) - epsilon);
  if (!(out.value > 0.0))
    throw std::invalid_argument("payoffs leave no positive C0 (need 2R > T + P + eps)");
  return out;
}

struct PSchedule {
  double p;
  double p1;
  double margin;  // 3 (1-p^2) M / (p^2 (1-delta) C0 (1-p^2 delta)), reported as-is
};

inline PSchedule p_schedule(double delta, double C0, double M) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(C0 > 0.0 && M > 0.0)) throw std::invalid_argument("C0 and M must be positive");
  PSchedule out;
  out.p1 = std::sqrt(1.0 - (4.0 / 3.0) * (C0 / M) * (1.0 - delta) * (1.0 - delta));
  out.p = std::max({0.5, out.p1, std::sqrt(delta)});
  double p2 = out.p * out.p;
  out.margin = 3.0 * (1.0 - p2) * M / (p2 * (1.0 - delta) * C0 * (1.0 - p2 * delta));
  return out;
}

struct GrimCollapseRow {
  double delta, p;
  double E_closed, E_engine;
  double GA, AG;
  double barrier_grim_into_fgrim;  // complement of E on the shared edge
  bool agree;                      // |E_closed - E_engine| <= 1e-6
};

inline std::vector<GrimCollapseRow> grim_collapse_sweep(
    const std::vector<std::pair<double, double>>& grid, const PayoffParams& params) {
  StrategyAutomaton g = make_standard("grim");
  StrategyAutomaton f = make_standard("forgiving_grim");
  std::vector<GrimCollapseRow> rows;
  for (auto [delta, p] : grid) {
    if (!(p < 1.0)) throw std::invalid_argument("sweep requires p < 1");
    TremblePayoffContext ctx{delta, p, params, Normalization::ONE_MINUS_DELTA};
    GrimAlldClosedForms cf = grim_alld_closed_forms(ctx);
    double ugg = payoff_exact(ctx, g, g), usg = payoff_exact(ctx, f, g);
    double uss = payoff_exact(ctx, f, f), ugs = payoff_exact(ctx, g, f);
    double num = ugg - usg, den = (ugg - usg) + (uss - ugs);
    GrimCollapseRow row;
    row.delta = delta;
    row.p = p;
    row.E_closed = cf.E;
    row.E_engine = num / den;
    row.GA = cf.GA;
    row.AG = cf.AG;
    row.barrier_grim_into_fgrim = (uss - ugs) / den;
    row.agree = std::abs(row.E_closed - row.E_engine) <= 1e-6;
    rows.push_back(row);
  }
  return rows;
}

struct UlbEstimates {
  std::vector<std::string> admissible;
  std::vector<std::string> excluded;  // members with N <= 0
  std::map<std::string, double> N_values, Nbar_values;
  double M_hat = 0.0, Z_hat = 0.0, R0_hat = 0.0, R1_hat = 0.0;
  double radius = std::numeric_limits<double>::infinity();  // 1 / M_hat
};

inline UlbEstimates ulb_estimates(const StrategyAutomaton& s,
                                  const std::vector<StrategyAutomaton>& family,
                                  const TremblePayoffContext& ctx) {
  ctx.validate();
  double uss = payoff_exact(ctx, s, s);
  struct Member {
    std::string label;
    double N, Nbar;
    double u_s_f;  // U(s, f)
    const StrategyAutomaton* f;
  };
  std::vector<Member> mem;
  UlbEstimates out;
  for (const auto& f : family) {
    if (f.name == s.name) throw std::invalid_argument("family must exclude the strategy itself");
    double n_val = uss - payoff_exact(ctx, f, s);
    double u_s_f = payoff_exact(ctx, s, f);
    if (!(n_val > 0.0)) {
      out.excluded.push_back(f.name);
      continue;
    }
    out.admissible.push_back(f.name);
    out.N_values[f.name] = n_val;
    out.Nbar_values[f.name] = uss - u_s_f;
    mem.push_back({f.name, n_val, uss - u_s_f, u_s_f, &f});
  }
  if (mem.empty()) throw std::invalid_argument("no admissible family members");
  double m_hat = -std::numeric_limits<double>::infinity();
  double z_hat = -std::numeric_limits<double>::infinity();
  double r0 = 0.0, r1 = 0.0;
  for (const auto& mi : mem) {
    r0 = std::max(r0, mi.Nbar / mi.N);
    for (const auto& mj : mem) {
      if (!(mi.N >= mj.N)) continue;  // ordered pairs with N(s,s*) >= N(s,s')
      double cross = payoff_exact(ctx, *mj.f, *mi.f) + payoff_exact(ctx, *mi.f, *mj.f);
      double B = cross - 2.0 * uss;
      double Z = (cross - mi.u_s_f - mj.u_s_f) / mi.N;
      double M = (mi.N + mj.N) / mi.N + Z;
      m_hat = std::max(m_hat, M);
      z_hat = std::max(z_hat, Z);
      r1 = std::max(r1, B / mi.N);
    }
  }
  out.M_hat = m_hat;
  out.Z_hat = z_hat;
  out.R0_hat = r0;
  out.R1_hat = r1;
  if (out.M_hat > 0.0) out.radius = 1.0 / out.M_hat;
  return out;
}

// Discounted share of mutual-cooperation outcomes on the intended self-play
// path from the seed.
inline double cooperation_frequency(const StrategyAutomaton& s, const TremblePayoffContext& ctx,
                                    const HistorySeed& seed) {
  ctx.validate();
  int q1 = run_history(s, seed);
  int q2 = run_history(s, swap_history(seed));
  double beta = ctx.p * ctx.p * ctx.delta;
  return path_masses(s, s, q1, q2, beta).mass_r;
}

// All paired states (run(s,h), run(s, swapped h)) over seeds of length <= depth.
inline std::vector<std::pair<int, int>> seed_pairs(const StrategyAutomaton& s1,
                                                   const StrategyAutomaton& s2, int depth) {
  std::set<std::pair<int, int>> layer{{s1.initial, s2.initial}};
  std::set<std::pair<int, int>> all = layer;
  for (int d = 0; d < depth; ++d) {
    std::set<std::pair<int, int>> next;
    for (auto [q1, q2] : layer)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Action ra = static_cast<Action>(a), rb = static_cast<Action>(b);
          next.emplace(s1.step(q1, ra, rb), s2.step(q2, rb, ra));
        }
    layer = std::move(next);
    all.insert(layer.begin(), layer.end());
    if (layer.empty()) break;
  }
  return {all.begin(), all.end()};
}

// Largest normalized discounted mass of one-sided (T or S) outcomes in
// self-play over all seeds of bounded length; zero exactly when the
// prescription is role-symmetric on the explored seeds.
inline double c_asymmetry(const StrategyAutomaton& s, double delta, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  double worst = 0.0;
  for (auto [q1, q2] : seed_pairs(s, s, depth)) {
    PathMasses m = path_masses(s, s, q1, q2, delta);
    worst = std::max(worst, m.mass_s + m.mass_t);
  }
  return worst;
}

struct EfficiencyReport {
  double min_margin_over_p;      // min over seeds of U(s,s/h) - P
  double max_identity_residual;  // hat-path identity
  double min_bound_slack;        // U(s,s/h) + c (T-S) - U(s,s/hat h)
  double c_used;
};

inline EfficiencyReport efficiency_spot_checks(const StrategyAutomaton& s,
                                               const TremblePayoffContext& ctx, int depth) {
  ctx.validate();
  double beta = ctx.p * ctx.p * ctx.delta;
  double c = c_asymmetry(s, beta, depth);
  EfficiencyReport rep;
  rep.c_used = c;
  rep.min_margin_over_p = std::numeric_limits<double>::infinity();
  rep.max_identity_residual = 0.0;
  rep.min_bound_slack = std::numeric_limits<double>::infinity();
  for (auto [q1, q2] : seed_pairs(s, s, depth)) {
    PathMasses m = path_masses(s, s, q1, q2, beta);
    double u_h = m.payoff(ctx.params);
    double u_hat = path_masses(s, s, q2, q1, beta).payoff(ctx.params);
    rep.min_margin_over_p = std::min(rep.min_margin_over_p, u_h - ctx.params.P);
    double residual = std::abs(u_hat - u_h - (m.mass_s - m.mass_t) * (ctx.params.T - ctx.params.S));
    rep.max_identity_residual = std::max(rep.max_identity_residual, residual);
    double slack = u_h + c * (ctx.params.T - ctx.params.S) - u_hat;
    rep.min_bound_slack = std::min(rep.min_bound_slack, slack);
  }
  return rep;
}

}  // namespace ulb
