#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "basin.hpp"
#include "payoff.hpp"
#include "replicator.hpp"
#include "robustness.hpp"

namespace ulb {

using json = nlohmann::json;

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const json& config) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

inline json to_json(const TremblePayoffContext& ctx) {
  return json{{"delta", ctx.delta},
              {"p", ctx.p},
              {"payoffs",
               {{"T", ctx.params.T}, {"R", ctx.params.R}, {"P", ctx.params.P}, {"S", ctx.params.S}}},
              {"norm", to_string(ctx.norm)}};
}

inline TremblePayoffContext context_from_json(const json& j) {
  TremblePayoffContext ctx;
  ctx.delta = j.at("delta").get<double>();
  ctx.p = j.at("p").get<double>();
  if (j.contains("payoffs")) {
    const auto& pj = j.at("payoffs");
    ctx.params = PayoffParams(pj.at("T").get<double>(), pj.at("R").get<double>(),
                              pj.at("P").get<double>(), pj.at("S").get<double>());
  }
  if (j.contains("norm")) {
    std::string n = j.at("norm").get<std::string>();
    if (n == "ONE_MINUS_DELTA")
      ctx.norm = Normalization::ONE_MINUS_DELTA;
    else if (n == "P2_DELTA")
      ctx.norm = Normalization::P2_DELTA;
    else
      throw std::invalid_argument("unknown normalization: " + n);
  }
  ctx.validate();
  return ctx;
}

inline StrategyAutomaton automaton_from_json(const json& j) {
  StrategyAutomaton s;
  s.name = j.at("name").get<std::string>();
  s.initial = j.at("initial").get<int>();
  for (const auto& a : j.at("intended")) s.intended.push_back(action_from_char(a.get<std::string>().at(0)));
  for (const auto& row : j.at("step")) {
    if (row.size() != 4) throw std::invalid_argument("each transition row needs 4 entries (CC, CD, DC, DD)");
    std::array<int, 4> r{};
    for (int e = 0; e < 4; ++e) r[static_cast<std::size_t>(e)] = row.at(static_cast<std::size_t>(e)).get<int>();
    s.step_table.push_back(r);
  }
  s.prune_unreachable();
  s.validate();
  return s;
}

// Accepts either a strategy literal string or an inline automaton document.
inline StrategyAutomaton strategy_from_json(const json& j) {
  if (j.is_string()) return parse_strategy_literal(j.get<std::string>());
  return automaton_from_json(j);
}

inline std::string payoff_matrix_csv(const PayoffMatrix& m, const std::string& hash = "") {
  std::ostringstream out;
  if (!hash.empty()) out << "# config " << hash << "\n";
  out << "row,col,value\n";
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j)
      out << m.labels[static_cast<std::size_t>(i)] << ',' << m.labels[static_cast<std::size_t>(j)]
          << ',' << format_g17(m.A(i, j)) << '\n';
  return out.str();
}

inline json payoff_matrix_json(const PayoffMatrix& m, const std::string& hash = "") {
  json rows = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.size(); ++j) row.push_back(m.A(i, j));
    rows.push_back(row);
  }
  json out{{"labels", m.labels}, {"matrix", rows}, {"ctx", to_json(m.ctx)}};
  if (!hash.empty()) out["config"] = hash;
  return out;
}

inline std::string trajectory_csv(const Trajectory& traj, const std::string& hash = "") {
  std::ostringstream out;
  if (!hash.empty()) out << "# config " << hash << "\n";
  out << "t";
  if (!traj.points.empty())
    for (int i = 0; i < traj.points[0].size(); ++i) out << ",x" << (i + 1);
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_g17(traj.times[k]);
    for (int i = 0; i < traj.points[k].size(); ++i) out << ',' << format_g17(traj.points[k](i));
    out << '\n';
  }
  return out.str();
}

// Barycentric plot of a 3-strategy trajectory.
inline std::string trajectory_svg(const Trajectory& traj, const std::string& hash = "") {
  if (traj.points.empty() || traj.points[0].size() != 3)
    throw std::invalid_argument("svg plots only 3-strategy trajectories");
  const double w = 560.0, h = 520.0, pad = 30.0;
  auto px = [&](const SimplexPoint& x) {
    double bx = x(1) + 0.5 * x(2);
    double by = x(2) * std::sqrt(3.0) / 2.0;
    return std::pair<double, double>{pad + bx * (w - 2 * pad), h - pad - by * (h - 2 * pad)};
  };
  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  if (!hash.empty()) out << "<!-- config " << hash << " -->\n";
  SimplexPoint e1(3), e2(3), e3(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  e3 << 0, 0, 1;
  auto [x1, y1] = px(e1);
  auto [x2, y2] = px(e2);
  auto [x3, y3] = px(e3);
  out << "<polygon points='" << x1 << ',' << y1 << ' ' << x2 << ',' << y2 << ' ' << x3 << ','
      << y3 << "' fill='none' stroke='black'/>\n<polyline fill='none' stroke='crimson' points='";
  for (const auto& p : traj.points) {
    auto [x, y] = px(p);
    out << x << ',' << y << ' ';
  }
  out << "'/>\n</svg>\n";
  return out.str();
}

inline json basin_report_json(const BasinReport& rep, const std::string& hash = "") {
  json barriers = json::array();
  for (const auto& [key, val] : rep.pairwise_barriers)
    barriers.push_back({{"pivot", key.first}, {"invader", key.second}, {"barrier", val}});
  json out{{"M0", rep.M0},
           {"radius", std::isfinite(rep.radius) ? json(rep.radius) : json("inf")},
           {"certified", rep.certified},
           {"pairwise_barriers", barriers},
           {"mc",
            {{"fraction", rep.mc.fraction},
             {"converged_pivot", rep.mc.converged_pivot},
             {"converged_other", rep.mc.converged_other},
             {"excluded", rep.mc.excluded},
             {"samples", rep.mc.samples}}}};
  if (!hash.empty()) out["config"] = hash;
  return out;
}

inline json sgp_report_json(const SgpReport& rep, const std::string& hash = "") {
  json gaps = json::object();
  for (const auto& [state, gap] : rep.per_state_gap) gaps[std::to_string(state)] = gap;
  json out{{"mode", rep.mode == SgpMode::EQPATH ? "EQPATH" : "FULL_TREMBLE"},
           {"per_state_gap", gaps},
           {"min_gap", rep.min_gap},
           {"prescription_optimal", rep.prescription_optimal},
           {"threshold", rep.threshold},
           {"iterations", rep.iterations}};
  if (!hash.empty()) out["config"] = hash;
  return out;
}

inline json ulb_estimates_json(const UlbEstimates& est, const std::string& hash = "") {
  json out{{"admissible", est.admissible}, {"excluded", est.excluded},
           {"N", est.N_values},           {"Nbar", est.Nbar_values},
           {"M_hat", est.M_hat},          {"Z_hat", est.Z_hat},
           {"R0_hat", est.R0_hat},        {"R1_hat", est.R1_hat},
           {"radius", std::isfinite(est.radius) ? json(est.radius) : json("inf")}};
  if (!hash.empty()) out["config"] = hash;
  return out;
}

inline std::string sweep_csv(const std::vector<GrimCollapseRow>& rows,
                             const std::string& hash = "") {
  std::ostringstream out;
  if (!hash.empty()) out << "# config " << hash << "\n";
  out << "delta,p,E_closed,E_engine,GA,AG,barrier_complement,agree\n";
  for (const auto& r : rows)
    out << format_g17(r.delta) << ',' << format_g17(r.p) << ',' << format_g17(r.E_closed) << ','
        << format_g17(r.E_engine) << ',' << format_g17(r.GA) << ',' << format_g17(r.AG) << ','
        << format_g17(r.barrier_grim_into_fgrim) << ',' << (r.agree ? 1 : 0) << '\n';
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

}  // namespace ulb
