#include <doctest.h>

#include <cmath>

#include "ulb/payoff.hpp"

using namespace ulb;

namespace {
const PayoffParams kParams{4, 3, 1, 0};

TremblePayoffContext ctx_of(double delta, double p,
                            Normalization norm = Normalization::ONE_MINUS_DELTA) {
  return TremblePayoffContext{delta, p, kParams, norm};
}
}  // namespace

TEST_CASE("context validation") {
  CHECK_NOTHROW(ctx_of(0.9, 0.9).validate());
  CHECK_NOTHROW(ctx_of(0.9, 1.0).validate());
  CHECK_THROWS(ctx_of(1.0, 0.9).validate());
  CHECK_THROWS(ctx_of(0.9, 1.5).validate());
  CHECK_THROWS(ctx_of(0.9, 0.0).validate());
  CHECK_THROWS(ctx_of(-0.1, 0.9).validate());
}

TEST_CASE("product chain structure") {
  auto alld = make_standard("allD");
  auto wsls = make_standard("wsls");
  ProductChain c1 = product_chain(alld, alld, 0.9, kParams);
  CHECK(c1.states.size() == 1);
  CHECK(c1.reward[0] == doctest::Approx(1.2).epsilon(1e-12));
  ProductChain c2 = product_chain(wsls, wsls, 0.9, kParams);
  // Both intent states of each side pair up only diagonally.
  CHECK(c2.states.size() == 2);
  for (std::size_t q = 0; q < c2.states.size(); ++q) {
    double total = 0.0;
    for (const auto& arc : c2.arcs[q]) total += arc.prob;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exact payoff fixtures") {
  auto alld = make_standard("allD");
  auto allc = make_standard("allC");
  auto grim = make_standard("grim");
  CHECK(payoff_exact(ctx_of(0.9, 0.9), alld, alld) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(payoff_exact(ctx_of(0.9, 1.0), alld, grim) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(payoff_exact(ctx_of(0.9, 1.0), grim, alld) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(payoff_exact(ctx_of(0.5, 1.0), allc, allc) == doctest::Approx(3.0).epsilon(1e-12));
  // The alternate normalization rescales by (1 - p^2 delta) / (p^2 (1 - delta)).
  double a = payoff_exact(ctx_of(0.9, 0.9), alld, alld);
  double b = payoff_exact(ctx_of(0.9, 0.9, Normalization::P2_DELTA), alld, alld);
  double p2 = 0.81;
  CHECK(b == doctest::Approx(a * (1 - p2 * 0.9) / (p2 * (1 - 0.9))).epsilon(1e-12));
}

TEST_CASE("payoff matrix fixture") {
  auto grim = make_standard("grim");
  auto alld = make_standard("allD");
  PayoffMatrix m = payoff_matrix(ctx_of(0.9, 1.0), {grim, alld});
  CHECK(m.A(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m.A(0, 1) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(m.A(1, 0) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(m.A(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(payoff_matrix(ctx_of(0.9, 1.0), {grim, grim}));  // duplicate labels
}

TEST_CASE("truncated payoff tracks its own bound") {
  auto wsls = make_standard("wsls");
  auto tft = make_standard("tft");
  for (double p : {0.8, 0.95, 1.0}) {
    TremblePayoffContext ctx = ctx_of(0.9, p);
    double exact = payoff_exact(ctx, wsls, tft);
    for (int horizon : {5, 20, 80}) {
      TruncatedPayoff t = payoff_truncated(ctx, wsls, tft, horizon);
      CHECK(std::abs(exact - t.value) <= t.bound + 1e-12);
    }
    TruncatedPayoff deep = payoff_truncated(ctx, wsls, tft, 400);
    CHECK(std::abs(exact - deep.value) <= 1e-12);
  }
}

TEST_CASE("path masses on deterministic self-play") {
  auto wsls = make_standard("wsls");
  double beta = 0.81 * 0.9;
  PathMasses all_c = path_masses(wsls, wsls, wsls.initial, wsls.initial, beta);
  CHECK(all_c.mass_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all_c.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // From the mismatched intent pair the path alternates T/S against itself.
  int qd = advance(wsls, wsls.initial, Action::C, Action::D);
  PathMasses mixed = path_masses(wsls, wsls, qd, wsls.initial, beta);
  CHECK(mixed.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // (D,C), then both at D, then both back at C: T, P, R, R, ...
  CHECK(mixed.mass_t == doctest::Approx(1 - beta).epsilon(1e-12));
  CHECK(mixed.mass_p == doctest::Approx(beta * (1 - beta)).epsilon(1e-12));
  CHECK(mixed.mass_r == doctest::Approx(beta * beta).epsilon(1e-12));
}

TEST_CASE("equilibrium-path payoff matches exact payoff when p = 1") {
  TremblePayoffContext ctx = ctx_of(0.9, 1.0);
  for (const auto& s1 : standard_library())
    for (const auto& s2 : standard_library()) {
      double eq = eqpath_payoff(ctx, s1, s2);
      double ex = payoff_exact(ctx, s1, s2);
      CHECK(eq == doctest::Approx(ex).epsilon(1e-10));
    }
}

TEST_CASE("off-path contribution bound") {
  auto bound_at = [](double p) {
    return offpath_bound(ctx_of(0.9, p, Normalization::P2_DELTA)).value;
  };
  CHECK(bound_at(1.0) == doctest::Approx(0.0));
  CHECK(bound_at(0.99) > bound_at(0.999));
  // The exact payoff decomposes into the equilibrium path plus an off-path
  // remainder within the stated bound.
  TremblePayoffContext ctx = ctx_of(0.9, 0.995, Normalization::P2_DELTA);
  double bound = offpath_bound(ctx).value;
  for (const auto& s1 : standard_library())
    for (const auto& s2 : standard_library()) {
      double diff = std::abs(payoff_exact(ctx, s1, s2) - eqpath_payoff(ctx, s1, s2));
      CHECK(diff <= bound + 1e-12);
    }
}

TEST_CASE("closed forms match the chain engine") {
  auto grim = make_standard("grim");
  auto alld = make_standard("allD");
  auto fgrim = make_standard("forgiving_grim");
  for (double delta : {0.9, 0.99})
    for (double p : {0.95, 0.999}) {
      TremblePayoffContext ctx = ctx_of(delta, p);
      GrimAlldClosedForms cf = grim_alld_closed_forms(ctx);
      double ga = payoff_exact(ctx, grim, grim) - payoff_exact(ctx, alld, grim);
      double ag = payoff_exact(ctx, alld, alld) - payoff_exact(ctx, grim, alld);
      CHECK((1 - delta) * cf.GA == doctest::Approx(ga).epsilon(1e-9));
      CHECK((1 - delta) * cf.AG == doctest::Approx(ag).epsilon(1e-9));
      CHECK(cf.E > 0.0);
      CHECK(cf.E < 1.0);
      // The same ratio reappears as the forgiving-variant invasion share on
      // the grim edge.
      double fga = payoff_exact(ctx, grim, grim) - payoff_exact(ctx, fgrim, grim);
      double fag = payoff_exact(ctx, fgrim, fgrim) - payoff_exact(ctx, grim, fgrim);
      CHECK(cf.E == doctest::Approx(fga / (fga + fag)).epsilon(1e-9));
    }
  CHECK_THROWS(grim_alld_closed_forms(ctx_of(0.9, 1.0)));
}

TEST_CASE("collapse ratio fixtures") {
  // E evaluated on the (1 - 10^-k, 1 - 10^-k-2) diagonal, frozen before the
  // build from an independent evaluation of the displayed sums.
  auto e_at = [](double delta, double p) { return grim_alld_closed_forms(ctx_of(delta, p)).E; };
  CHECK(e_at(0.9, 0.999) == doctest::Approx(0.056725117457693527).epsilon(1e-10));
  CHECK(e_at(0.99, 0.9999) == doctest::Approx(0.0051520455611324227).epsilon(1e-10));
  CHECK(e_at(0.999, 0.99999) == doctest::Approx(0.00051051576587135832).epsilon(1e-10));
}

TEST_CASE("payoff decomposition at the first divergence") {
  // The payoff difference between two strategies against a common opponent
  // equals the discounted sum, over first-divergence histories, of the seeded
  // payoff differences. Checked by dynamic programming over state triples to
  // depth 12, with the geometric tail absorbed into the tolerance.
  auto check_pair = [](const StrategyAutomaton& s1, const StrategyAutomaton& s2, double delta,
                       double p) {
    TremblePayoffContext ctx{delta, p, kParams, Normalization::ONE_MINUS_DELTA};
    const int depth = 12;
    std::map<std::tuple<int, int, int>, double> layer{
        {{s1.initial, s1.initial, s2.initial}, 1.0}};
    double total = 0.0;
    std::map<std::pair<int, int>, double> val1, val2;
    auto seeded = [&](const StrategyAutomaton& a, int qa, int qo,
                      std::map<std::pair<int, int>, double>& memo) {
      auto it = memo.find({qa, qo});
      if (it != memo.end()) return it->second;
      double v = payoff_from_state(ctx, a, s1, qa, qo);
      memo[{qa, qo}] = v;
      return v;
    };
    for (int t = 0; t <= depth; ++t) {
      std::map<std::tuple<int, int, int>, double> next;
      for (const auto& [key, w] : layer) {
        auto [q1, q1h, q2] = key;
        if (s1.intent(q1) != s2.intent(q2)) {
          total += w * (seeded(s1, q1, q1h, val1) - seeded(s2, q2, q1h, val2));
          continue;
        }
        Action i1 = s1.intent(q1), i2 = s1.intent(q1h);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            Action ra = static_cast<Action>(a), rb = static_cast<Action>(b);
            double prob = (ra == i1 ? p : 1 - p) * (rb == i2 ? p : 1 - p);
            if (prob == 0.0) continue;
            next[{s1.step(q1, ra, rb), s1.step(q1h, rb, ra), s2.step(q2, ra, rb)}] +=
                w * delta * prob;
          }
      }
      layer = std::move(next);
    }
    double direct = payoff_exact(ctx, s1, s1) - payoff_exact(ctx, s2, s1);
    double tail = 2.0 * kParams.magnitude() * std::pow(delta, depth + 1);
    CHECK(std::abs(direct - total) <= tail + 1e-9);
  };
  check_pair(make_standard("wsls"), make_standard("grim"), 0.5, 0.9);
  check_pair(make_standard("grim"), make_standard("forgiving_grim"), 0.5, 0.9);
  check_pair(make_standard("wsls"), make_standard("tft"), 0.6, 0.8);
}
