#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "strategy.hpp"

namespace ulb {

enum class Normalization { ONE_MINUS_DELTA, P2_DELTA };

inline std::string to_string(Normalization n) {
  return n == Normalization::ONE_MINUS_DELTA ? "ONE_MINUS_DELTA" : "P2_DELTA";
}

struct TremblePayoffContext {
  double delta = 0.9;
  double p = 1.0;
  PayoffParams params;
  Normalization norm = Normalization::ONE_MINUS_DELTA;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0,1]");
    params.validate();
  }

  // Multiplier applied to the geometric sum sum_t delta^t E[u_t].
  double norm_factor() const {
    if (norm == Normalization::ONE_MINUS_DELTA) return 1.0 - delta;
    return (1.0 - p * p * delta) / (p * p);
  }
};

// Markov chain on paired automaton states. Arcs carry the probability of the
// four realized outcomes; rewards are stage payoffs to player 1 averaged over
// both trembles. Zero-probability outcomes (p = 1) are dropped.
struct ProductChain {
  struct Arc {
    int succ;
    double prob;
  };
  std::vector<std::pair<int, int>> states;
  std::vector<std::vector<Arc>> arcs;
  std::vector<double> reward;
  int initial = 0;

  int size() const { return static_cast<int>(states.size()); }
};

inline ProductChain product_chain(const StrategyAutomaton& s1, const StrategyAutomaton& s2,
                                  double p, const PayoffParams& params,
                                  int q1 = -1, int q2 = -1) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0,1]");
  if (q1 < 0) q1 = s1.initial;
  if (q2 < 0) q2 = s2.initial;
  ProductChain chain;
  std::map<std::pair<int, int>, int> index;
  auto lookup = [&](int a, int b) {
    auto [it, inserted] = index.try_emplace({a, b}, chain.size());
    if (inserted) chain.states.emplace_back(a, b);
    return it->second;
  };
  chain.initial = lookup(q1, q2);
  for (int i = 0; i < chain.size(); ++i) {
    auto [u1, u2] = chain.states[static_cast<std::size_t>(i)];
    Action i1 = s1.intent(u1), i2 = s2.intent(u2);
    std::vector<ProductChain::Arc> row;
    double r = 0.0;
    for (int ra = 0; ra < 2; ++ra)
      for (int rb = 0; rb < 2; ++rb) {
        Action a = static_cast<Action>(ra), b = static_cast<Action>(rb);
        double prob = (a == i1 ? p : 1.0 - p) * (b == i2 ? p : 1.0 - p);
        if (prob == 0.0) continue;
        r += prob * params.stage(a, b);
        row.push_back({lookup(s1.step(u1, a, b), s2.step(u2, b, a)), prob});
      }
    chain.arcs.push_back(std::move(row));
    chain.reward.push_back(r);
  }
  return chain;
}

// Solves v = r + delta * P v by dense LU with iterative refinement.
inline Eigen::VectorXd solve_chain_values(const ProductChain& chain, double delta,
                                          double residual_tol = 1e-12) {
  int n = chain.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (const auto& arc : chain.arcs[static_cast<std::size_t>(i)])
      A(i, arc.succ) -= delta * arc.prob;
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(chain.reward.data(), n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd v = lu.solve(b);
  double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
  for (int iter = 0; iter < 5; ++iter) {
    Eigen::VectorXd resid = b - A * v;
    if (resid.lpNorm<Eigen::Infinity>() <= residual_tol * scale) break;
    v += lu.solve(resid);
  }
  Eigen::VectorXd resid = b - A * v;
  if (resid.lpNorm<Eigen::Infinity>() > 1e-10 * scale)
    throw std::runtime_error("linear solve residual above 1e-10");
  return v;
}

inline double payoff_from_state(const TremblePayoffContext& ctx, const StrategyAutomaton& s1,
                                const StrategyAutomaton& s2, int q1, int q2) {
  ctx.validate();
  ProductChain chain = product_chain(s1, s2, ctx.p, ctx.params, q1, q2);
  Eigen::VectorXd v = solve_chain_values(chain, ctx.delta);
  return ctx.norm_factor() * v(chain.initial);
}

inline double payoff_exact(const TremblePayoffContext& ctx, const StrategyAutomaton& s1,
                           const StrategyAutomaton& s2) {
  return payoff_from_state(ctx, s1, s2, s1.initial, s2.initial);
}

struct TruncatedPayoff {
  double value;
  double bound;  // guaranteed |value - exact| <= bound
};

// Forward propagation of the state distribution; independent of the solver.
inline TruncatedPayoff payoff_truncated(const TremblePayoffContext& ctx,
                                        const StrategyAutomaton& s1,
                                        const StrategyAutomaton& s2, int horizon) {
  ctx.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  ProductChain chain = product_chain(s1, s2, ctx.p, ctx.params);
  std::vector<double> dist(static_cast<std::size_t>(chain.size()), 0.0);
  dist[static_cast<std::size_t>(chain.initial)] = 1.0;
  double sum = 0.0, disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    double stage = 0.0;
    for (int i = 0; i < chain.size(); ++i)
      stage += dist[static_cast<std::size_t>(i)] * chain.reward[static_cast<std::size_t>(i)];
    sum += disc * stage;
    disc *= ctx.delta;
    if (t + 1 < horizon) {
      std::vector<double> next(dist.size(), 0.0);
      for (int i = 0; i < chain.size(); ++i) {
        double mass = dist[static_cast<std::size_t>(i)];
        if (mass == 0.0) continue;
        for (const auto& arc : chain.arcs[static_cast<std::size_t>(i)])
          next[static_cast<std::size_t>(arc.succ)] += mass * arc.prob;
      }
      dist = std::move(next);
    }
  }
  double nf = ctx.norm_factor();
  double bound = nf * ctx.params.magnitude() * std::pow(ctx.delta, horizon) / (1.0 - ctx.delta);
  return {nf * sum, bound};
}

// Discounted occupation masses of the four outcomes along the deterministic
// intended path, normalized to sum 1: (1-beta) sum_t beta^t [outcome_t = o].
struct PathMasses {
  double mass_r = 0.0, mass_s = 0.0, mass_t = 0.0, mass_p = 0.0;

  double payoff(const PayoffParams& params) const {
    return mass_r * params.R + mass_s * params.S + mass_t * params.T + mass_p * params.P;
  }
  double sum() const { return mass_r + mass_s + mass_t + mass_p; }
};

inline PathMasses path_masses(const StrategyAutomaton& s1, const StrategyAutomaton& s2,
                              int q1, int q2, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
  // Walk until the paired state repeats, then close the cycle in closed form.
  std::map<std::pair<int, int>, int> seen;
  std::vector<int> outcomes;  // 0:(C,C) 1:(C,D) 2:(D,C) 3:(D,D)
  int a = q1, b = q2;
  int cycle_start;
  while (true) {
    auto [it, inserted] = seen.try_emplace({a, b}, static_cast<int>(outcomes.size()));
    if (!inserted) {
      cycle_start = it->second;
      break;
    }
    Action i1 = s1.intent(a), i2 = s2.intent(b);
    outcomes.push_back(StrategyAutomaton::pair_index(i1, i2));
    int na = s1.step(a, i1, i2), nb = s2.step(b, i2, i1);
    a = na;
    b = nb;
  }
  std::array<double, 4> mass{0.0, 0.0, 0.0, 0.0};
  double disc = 1.0;
  for (int t = 0; t < cycle_start; ++t) {
    mass[static_cast<std::size_t>(outcomes[static_cast<std::size_t>(t)])] += disc;
    disc *= beta;
  }
  int len = static_cast<int>(outcomes.size()) - cycle_start;
  std::array<double, 4> cyc{0.0, 0.0, 0.0, 0.0};
  double cdisc = disc;
  for (int t = cycle_start; t < static_cast<int>(outcomes.size()); ++t) {
    cyc[static_cast<std::size_t>(outcomes[static_cast<std::size_t>(t)])] += cdisc;
    cdisc *= beta;
  }
  double geom = 1.0 / (1.0 - std::pow(beta, len));
  PathMasses out;
  out.mass_r = (1.0 - beta) * (mass[0] + cyc[0] * geom);
  out.mass_s = (1.0 - beta) * (mass[1] + cyc[1] * geom);
  out.mass_t = (1.0 - beta) * (mass[2] + cyc[2] * geom);
  out.mass_p = (1.0 - beta) * (mass[3] + cyc[3] * geom);
  return out;
}

// Payoff along the no-tremble path only; the path weights p^{2t+2} delta^t
// collapse to a geometric sum with effective discount beta = p^2 delta.
inline double eqpath_payoff(const TremblePayoffContext& ctx, const StrategyAutomaton& s1,
                            const StrategyAutomaton& s2, int q1 = -1, int q2 = -1) {
  ctx.validate();
  if (q1 < 0) q1 = s1.initial;
  if (q2 < 0) q2 = s2.initial;
  double beta = ctx.p * ctx.p * ctx.delta;
  return path_masses(s1, s2, q1, q2, beta).payoff(ctx.params);
}

struct OffpathBound {
  double statement_constant;  // (1-p^2) / (p^2 (1-delta))
  double proof_constant;      // (1-p^2) / (1-p^2 delta)
  double value;               // max of the two, times M
};

inline OffpathBound offpath_bound(const TremblePayoffContext& ctx) {
  ctx.validate();
  double p2 = ctx.p * ctx.p;
  OffpathBound out;
  out.statement_constant = (1.0 - p2) / (p2 * (1.0 - ctx.delta));
  out.proof_constant = (1.0 - p2) / (1.0 - p2 * ctx.delta);
  out.value = std::max(out.statement_constant, out.proof_constant) * ctx.params.magnitude();
  return out;
}

struct PayoffMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd A;
  TremblePayoffContext ctx;

  int size() const { return static_cast<int>(A.rows()); }
};

inline PayoffMatrix payoff_matrix(const TremblePayoffContext& ctx,
                                  const std::vector<StrategyAutomaton>& strategies) {
  ctx.validate();
  int n = static_cast<int>(strategies.size());
  if (n < 1) throw std::invalid_argument("need at least one strategy");
  std::set<std::string> labels;
  for (const auto& s : strategies)
    if (!labels.insert(s.name).second)
      throw std::invalid_argument("duplicate strategy label: " + s.name);
  PayoffMatrix out;
  out.ctx = ctx;
  out.A.resize(n, n);
  for (const auto& s : strategies) out.labels.push_back(s.name);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.A(i, j) = payoff_exact(ctx, strategies[static_cast<std::size_t>(i)],
                                 strategies[static_cast<std::size_t>(j)]);
  return out;
}

// Closed forms for the grim versus always-defect comparison. L is the
// discounted value of mutual noisy defection; GA and AG express the payoff
// differences U(g,g)-U(a,g) and U(a,a)-U(g,a) divided by (1-delta); E is the
// resulting invasion barrier of always-defect against grim.
struct GrimAlldClosedForms {
  double L;
  double GA0, GA1, GA;
  double AG0, AG1, AG;
  double E;
};

inline GrimAlldClosedForms grim_alld_closed_forms(const TremblePayoffContext& ctx) {
  ctx.validate();
  if (!(ctx.p < 1.0)) throw std::invalid_argument("closed forms require p < 1");
  double d = ctx.delta, p = ctx.p, q = 1.0 - ctx.p;
  const auto& pp = ctx.params;
  GrimAlldClosedForms out;
  out.L = (q * q * pp.R + (pp.S + pp.T) * q * p + p * p * pp.P) / (1.0 - d);
  double dL = d * out.L;
  double f1 = 1.0 / (1.0 - p * p * d);   // weight of staying on the all-hit path
  double f2 = 1.0 / (1.0 - p * q * d);   // mixed hit/miss path
  double f3 = 1.0 / (1.0 - q * q * d);   // all-miss path
  out.GA0 = pp.R * (p * p * f1 - p * q * f2) + pp.S * (p * q * f1 - q * q * f2) +
            pp.T * (q * p * f1 - p * p * f2) + pp.P * (q * q * f1 - q * p * f2);
  out.GA1 = dL * ((p * q * f1 - q * q * f2) + (q * p * f1 - p * p * f2) +
                  (q * q * f1 - q * p * f2));
  out.GA = out.GA0 + out.GA1;
  out.AG0 = pp.R * (q * q * f3 - p * q * f2) + pp.S * (p * q * f3 - p * p * f2) +
            pp.T * (q * p * f3 - q * q * f2) + pp.P * (p * p * f3 - q * p * f2);
  out.AG1 = dL * ((p * q * f3 - p * p * f2) + (q * p * f3 - q * q * f2) +
                  (p * p * f3 - q * p * f2));
  out.AG = out.AG0 + out.AG1;
  out.E = 1.0 / (1.0 + out.GA / out.AG);
  return out;
}

}  // namespace ulb
