#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ulb {

enum class Action : std::uint8_t { C = 0, D = 1 };

inline Action flip(Action a) { return a == Action::C ? Action::D : Action::C; }

inline char to_char(Action a) { return a == Action::C ? 'C' : 'D'; }

inline Action action_from_char(char c) {
  if (c == 'C' || c == 'c') return Action::C;
  if (c == 'D' || c == 'd') return Action::D;
  throw std::invalid_argument(std::string("bad action character: ") + c);
}

struct PayoffParams {
  double T = 4.0, R = 3.0, P = 1.0, S = 0.0;

  PayoffParams() = default;
  PayoffParams(double t, double r, double p, double s) : T(t), R(r), P(p), S(s) {
    validate();
  }

  void validate() const {
    if (!(T > R && R > P && P > S))
      throw std::invalid_argument("stage payoffs must satisfy T > R > P > S");
    // Equality is admitted here so boundary payoff sets (e.g. T=6,R=3,P=1,S=0)
    // remain usable; downstream claims that need strictness check it themselves.
    if (!(2.0 * R >= T + S))
      throw std::invalid_argument("stage payoffs must satisfy 2R >= T + S");
  }

  bool wsls_condition() const { return 2.0 * R > T + P; }

  double stage(Action own, Action opp) const {
    if (own == Action::C) return opp == Action::C ? R : S;
    return opp == Action::C ? T : P;
  }

  // Bound on |stage payoff|, the constant M used throughout the bounds.
  double magnitude() const { return std::max(T, std::abs(S)); }
};

using HistorySeed = std::vector<std::pair<Action, Action>>;

inline HistorySeed swap_history(const HistorySeed& h) {
  HistorySeed out;
  out.reserve(h.size());
  for (const auto& [a, b] : h) out.emplace_back(b, a);
  return out;
}

// Deterministic finite automaton over realized action pairs. One state per
// behavioral mode; transitions read (own realized, opponent realized).
struct StrategyAutomaton {
  std::string name;
  int initial = 0;
  std::vector<Action> intended;
  std::vector<std::array<int, 4>> step_table;  // index: own*2 + opp

  static int pair_index(Action own, Action opp) {
    return (static_cast<int>(own) << 1) | static_cast<int>(opp);
  }

  int size() const { return static_cast<int>(intended.size()); }

  Action intent(int q) const { return intended.at(static_cast<std::size_t>(q)); }

  int step(int q, Action own, Action opp) const {
    return step_table.at(static_cast<std::size_t>(q))[pair_index(own, opp)];
  }

  void validate() const {
    if (intended.empty() || intended.size() != step_table.size())
      throw std::invalid_argument("automaton tables are inconsistent");
    if (initial < 0 || initial >= size())
      throw std::invalid_argument("initial state out of range");
    for (const auto& row : step_table)
      for (int succ : row)
        if (succ < 0 || succ >= size())
          throw std::invalid_argument("transition target out of range");
  }

  // Drops states unreachable from the initial state and remaps indices.
  void prune_unreachable() {
    validate();
    std::vector<int> remap(intended.size(), -1);
    std::vector<int> order;
    order.push_back(initial);
    remap[static_cast<std::size_t>(initial)] = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      for (int succ : step_table[static_cast<std::size_t>(order[k])]) {
        if (remap[static_cast<std::size_t>(succ)] < 0) {
          remap[static_cast<std::size_t>(succ)] = static_cast<int>(order.size());
          order.push_back(succ);
        }
      }
    }
    if (order.size() == intended.size() && remap[static_cast<std::size_t>(initial)] == 0) {
      bool identity = true;
      for (std::size_t i = 0; i < remap.size(); ++i)
        if (remap[i] != static_cast<int>(i)) { identity = false; break; }
      if (identity) return;
    }
    std::vector<Action> new_intended(order.size());
    std::vector<std::array<int, 4>> new_step(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      new_intended[k] = intended[static_cast<std::size_t>(order[k])];
      for (int e = 0; e < 4; ++e)
        new_step[k][static_cast<std::size_t>(e)] =
            remap[static_cast<std::size_t>(step_table[static_cast<std::size_t>(order[k])][static_cast<std::size_t>(e)])];
    }
    intended = std::move(new_intended);
    step_table = std::move(new_step);
    initial = 0;
  }
};

inline int advance(const StrategyAutomaton& s, int q, Action own, Action opp) {
  return s.step(q, own, opp);
}

inline int run_history(const StrategyAutomaton& s, const HistorySeed& h) {
  int q = s.initial;
  for (const auto& [own, opp] : h) q = s.step(q, own, opp);
  return q;
}

namespace detail {

// "Stay on T or R, shift otherwise" reduces to: keep your realized action if
// the opponent cooperated, otherwise switch it.
inline Action wsls_next(Action own, Action opp) {
  return opp == Action::C ? own : flip(own);
}

inline StrategyAutomaton make_constant(const std::string& name, Action a) {
  StrategyAutomaton s;
  s.name = name;
  s.intended = {a};
  s.step_table = {{0, 0, 0, 0}};
  return s;
}

inline StrategyAutomaton make_grim() {
  StrategyAutomaton s;
  s.name = "grim";
  s.intended = {Action::C, Action::D};
  s.step_table.resize(2);
  for (int own = 0; own < 2; ++own)
    for (int opp = 0; opp < 2; ++opp) {
      int e = own * 2 + opp;
      s.step_table[0][static_cast<std::size_t>(e)] = (own == 0 && opp == 0) ? 0 : 1;
      s.step_table[1][static_cast<std::size_t>(e)] = 1;
    }
  return s;
}

// Grim that disregards the first period's outcome entirely.
inline StrategyAutomaton make_forgiving_grim() {
  StrategyAutomaton s;
  s.name = "forgiving_grim";
  s.intended = {Action::C, Action::C, Action::D};
  s.step_table.resize(3);
  for (int e = 0; e < 4; ++e) {
    s.step_table[0][static_cast<std::size_t>(e)] = 1;
    s.step_table[1][static_cast<std::size_t>(e)] = (e == 0) ? 1 : 2;
    s.step_table[2][static_cast<std::size_t>(e)] = 2;
  }
  return s;
}

inline StrategyAutomaton make_tft() {
  StrategyAutomaton s;
  s.name = "tft";
  s.intended = {Action::C, Action::D};
  s.step_table.resize(2);
  for (int q = 0; q < 2; ++q)
    for (int own = 0; own < 2; ++own)
      for (int opp = 0; opp < 2; ++opp)
        s.step_table[static_cast<std::size_t>(q)][static_cast<std::size_t>(own * 2 + opp)] = opp;
  return s;
}

inline StrategyAutomaton make_wsls() {
  StrategyAutomaton s;
  s.name = "wsls";
  s.intended = {Action::C, Action::D};
  s.step_table.resize(2);
  for (int q = 0; q < 2; ++q)
    for (int own = 0; own < 2; ++own)
      for (int opp = 0; opp < 2; ++opp) {
        Action next = wsls_next(static_cast<Action>(own), static_cast<Action>(opp));
        s.step_table[static_cast<std::size_t>(q)][static_cast<std::size_t>(own * 2 + opp)] =
            static_cast<int>(next);
      }
  return s;
}

// States 0/1: plain shift memory (intend C / intend D). States 2..n+1: a
// punishment run of n defections entered whenever the S payoff is realized.
inline StrategyAutomaton make_wsls_n(int n) {
  if (n < 1) throw std::invalid_argument("wsls_n requires n >= 1");
  StrategyAutomaton s;
  s.name = "wsls_" + std::to_string(n);
  int total = 2 + n;
  s.intended.resize(static_cast<std::size_t>(total));
  s.step_table.resize(static_cast<std::size_t>(total));
  s.intended[0] = Action::C;
  s.intended[1] = Action::D;
  for (int i = 0; i < n; ++i) s.intended[static_cast<std::size_t>(2 + i)] = Action::D;
  auto base_next = [](Action own, Action opp) {
    return static_cast<int>(wsls_next(own, opp));
  };
  for (int q = 0; q < total; ++q) {
    for (int own = 0; own < 2; ++own)
      for (int opp = 0; opp < 2; ++opp) {
        Action ro = static_cast<Action>(own), rp = static_cast<Action>(opp);
        int e = own * 2 + opp;
        int succ;
        if (ro == Action::C && rp == Action::D) {
          succ = 2;  // realized S: start (or restart) the punishment run
        } else if (q < 2 || q == total - 1) {
          succ = base_next(ro, rp);
        } else {
          succ = q + 1;
        }
        s.step_table[static_cast<std::size_t>(q)][static_cast<std::size_t>(e)] = succ;
      }
  }
  return s;
}

// Period counter modulo n*(1+m0) crossed with a shift-memory bit. The first n
// periods of each cycle play the remembered shift action; the remaining m0*n
// periods defect. The memory bit keeps updating in every period.
inline StrategyAutomaton make_aw(int n, double b0, int state_cap) {
  if (n < 1) throw std::invalid_argument("aw requires n >= 1");
  if (!(b0 > 0.0 && b0 < 1.0)) throw std::invalid_argument("aw requires 0 < b0 < 1");
  int m0 = static_cast<int>(std::floor(1.0 / b0));
  long long period = static_cast<long long>(n) * (1 + m0);
  if (2 * period > state_cap)
    throw std::invalid_argument("aw state count exceeds the configured cap");
  int L = static_cast<int>(period);
  StrategyAutomaton s;
  s.name = "aw_" + std::to_string(n) + "_" + std::to_string(b0);
  s.intended.resize(static_cast<std::size_t>(2 * L));
  s.step_table.resize(static_cast<std::size_t>(2 * L));
  auto id = [L](int c, int w) { return c * 2 + w; };
  for (int c = 0; c < L; ++c)
    for (int w = 0; w < 2; ++w) {
      int q = id(c, w);
      s.intended[static_cast<std::size_t>(q)] =
          (c < n) ? static_cast<Action>(w) : Action::D;
      for (int own = 0; own < 2; ++own)
        for (int opp = 0; opp < 2; ++opp) {
          int wn = static_cast<int>(wsls_next(static_cast<Action>(own), static_cast<Action>(opp)));
          s.step_table[static_cast<std::size_t>(q)][static_cast<std::size_t>(own * 2 + opp)] =
              id((c + 1) % L, wn);
        }
    }
  return s;
}

}  // namespace detail

struct StandardOptions {
  int aw_state_cap = 4096;
};

inline StrategyAutomaton make_standard(const std::string& name, int n = -1, double b0 = -1.0,
                                       const StandardOptions& opts = {}) {
  StrategyAutomaton s;
  if (name == "allC") {
    s = detail::make_constant("allC", Action::C);
  } else if (name == "allD") {
    s = detail::make_constant("allD", Action::D);
  } else if (name == "grim") {
    s = detail::make_grim();
  } else if (name == "forgiving_grim") {
    s = detail::make_forgiving_grim();
  } else if (name == "tft") {
    s = detail::make_tft();
  } else if (name == "wsls") {
    s = detail::make_wsls();
  } else if (name == "wsls_n") {
    if (n < 1) throw std::invalid_argument("wsls_n requires a positive n");
    s = detail::make_wsls_n(n);
  } else if (name == "aw") {
    if (n < 1) throw std::invalid_argument("aw requires a positive n");
    if (!(b0 > 0.0)) throw std::invalid_argument("aw requires b0 in (0,1)");
    s = detail::make_aw(n, b0, opts.aw_state_cap);
  } else {
    throw std::invalid_argument("unknown strategy name: " + name);
  }
  s.prune_unreachable();
  s.validate();
  return s;
}

// "wsls_n:3" or "aw:4:0.5" style literals used in config files.
inline StrategyAutomaton parse_strategy_literal(const std::string& literal) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = literal.find(':', start);
    if (pos == std::string::npos) {
      parts.push_back(literal.substr(start));
      break;
    }
    parts.push_back(literal.substr(start, pos - start));
    start = pos + 1;
  }
  const std::string& base = parts[0];
  if (base == "wsls_n") {
    if (parts.size() != 2) throw std::invalid_argument("wsls_n literal needs one parameter");
    return make_standard("wsls_n", std::stoi(parts[1]));
  }
  if (base == "aw") {
    if (parts.size() != 3) throw std::invalid_argument("aw literal needs two parameters");
    return make_standard("aw", std::stoi(parts[1]), std::stod(parts[2]));
  }
  if (parts.size() != 1) throw std::invalid_argument("unexpected parameters for " + base);
  return make_standard(base);
}

// True when the prescription is invariant under swapping the roles in the
// history. Exhaustive up to `depth` if the walk fits in `budget` nodes,
// otherwise an exact reachability check on the pair automaton (s reading h
// alongside s reading the swapped h), which covers all depths.
inline bool symmetry_check(const StrategyAutomaton& s, int depth,
                           long long budget = 1 << 22) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  long long nodes = 1, level = 1;
  bool exhaustive = true;
  for (int d = 0; d < depth; ++d) {
    level *= 4;
    nodes += level;
    if (nodes > budget) { exhaustive = false; break; }
  }
  if (exhaustive) {
    std::vector<std::pair<int, int>> frontier = {{s.initial, s.initial}};
    for (int d = 0; d <= depth; ++d) {
      std::vector<std::pair<int, int>> next;
      for (auto [q, qs] : frontier) {
        if (s.intent(q) != s.intent(qs)) return false;
        if (d == depth) continue;
        for (int own = 0; own < 2; ++own)
          for (int opp = 0; opp < 2; ++opp) {
            Action a = static_cast<Action>(own), b = static_cast<Action>(opp);
            next.emplace_back(s.step(q, a, b), s.step(qs, b, a));
          }
      }
      frontier = std::move(next);
      std::sort(frontier.begin(), frontier.end());
      frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    }
    return true;
  }
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> stack = {{s.initial, s.initial}};
  seen.insert(stack[0]);
  while (!stack.empty()) {
    auto [q, qs] = stack.back();
    stack.pop_back();
    if (s.intent(q) != s.intent(qs)) return false;
    for (int own = 0; own < 2; ++own)
      for (int opp = 0; opp < 2; ++opp) {
        Action a = static_cast<Action>(own), b = static_cast<Action>(opp);
        std::pair<int, int> succ{s.step(q, a, b), s.step(qs, b, a)};
        if (seen.insert(succ).second) stack.push_back(succ);
      }
  }
  return true;
}

// True when some reachable state belongs to a set of all-defect states closed
// under every realized pair: once entered, the strategy defects forever.
inline bool unforgiving_check(const StrategyAutomaton& s) {
  int n = s.size();
  std::vector<char> in_set(static_cast<std::size_t>(n), 0);
  for (int q = 0; q < n; ++q) in_set[static_cast<std::size_t>(q)] = (s.intent(q) == Action::D);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int q = 0; q < n; ++q) {
      if (!in_set[static_cast<std::size_t>(q)]) continue;
      for (int e = 0; e < 4; ++e) {
        if (!in_set[static_cast<std::size_t>(s.step_table[static_cast<std::size_t>(q)][static_cast<std::size_t>(e)])]) {
          in_set[static_cast<std::size_t>(q)] = 0;
          changed = true;
          break;
        }
      }
    }
  }
  for (int q = 0; q < n; ++q)
    if (in_set[static_cast<std::size_t>(q)]) return true;  // states are reachable by construction
  return false;
}

inline std::vector<StrategyAutomaton> standard_library() {
  return {make_standard("allC"),          make_standard("allD"),
          make_standard("grim"),          make_standard("forgiving_grim"),
          make_standard("tft"),           make_standard("wsls"),
          make_standard("wsls_n", 3),     make_standard("aw", 4, 0.5)};
}

}  // namespace ulb
