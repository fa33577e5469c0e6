#pragma once

// Command dispatch for the torlift tool: each command turns a scenario into
// a deterministic text report and an exit code
// (0 pass, 1 input error, 2 certified failure, 3 indeterminate).

#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "torlift/cech.hpp"
#include "torlift/cylinder.hpp"
#include "torlift/lifting.hpp"
#include "torlift/scenario.hpp"

namespace torlift {

enum ExitCode : int { kPass = 0, kInputError = 1, kFailure = 2, kIndeterminate = 3 };

struct RunOptions {
  std::optional<std::int64_t> window;
  std::optional<std::int64_t> torus_order;
  std::optional<std::int64_t> fiber_order;
  std::optional<Angle> s;
  std::size_t max_listed = 50;  // violations listed per check
};

struct RunResult {
  std::string report;
  int exit_code = kPass;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check-cocycle", "holonomy", "global-action",
                                                 "check-lifting-data", "obstruction", "cylinder"};
  return names;
}

namespace detail {

inline void header(std::ostringstream& o, const std::string& cmd, const Scenario& s) {
  o << "command: " << cmd << "\n";
  o << "scenario: " << (s.name.empty() ? "(unnamed)" : s.name) << "\n";
  o << "good_cover: " << (s.good_cover ? "declared" : "not declared (nerve-level statements only)") << "\n";
  o << "model: rank=" << s.rank << " fiber_rank=" << s.fiber_rank << " torus_order=" << s.torus_order
    << " fiber_order=" << s.fiber_order << " window=" << s.window << " threshold=" << to_string(s.threshold)
    << "\n";
  o << "nerve: " << s.nerve.vertices().size() << " vertices, " << s.nerve.edges().size() << " edges, "
    << s.nerve.triangles().size() << " triangles\n";
}

inline void list_violations(std::ostringstream& o, const std::string& what, const CheckReport& r, std::size_t cap) {
  o << what << ": " << (r.ok ? "ok" : "FAILED") << " (" << r.checked << " identities checked";
  if (!r.ok) o << ", " << r.violations.size() << " violated";
  o << ")\n";
  for (std::size_t i = 0; i < r.violations.size() && i < cap; ++i) o << "  " << r.violations[i] << "\n";
  if (r.violations.size() > cap) o << "  ... " << (r.violations.size() - cap) << " more\n";
}

inline RunResult check_cocycle_cmd(const Scenario& s, std::ostringstream& o) {
  auto rep = check_cocycle(s.nerve, s.cocycle);
  o << "cocycle values: " << s.cocycle.values().size() << "\n";
  for (const auto& v : rep.violations) o << "  violation: " << v.message << "\n";
  o << "verdict: " << (rep.valid() ? "cocycle" : "not a cocycle") << "\n";
  return {o.str(), rep.valid() ? kPass : kFailure};
}

inline HolonomyReport scenario_holonomy(const Scenario& s) {
  std::size_t base = s.basepoint ? s.nerve.index_of(*s.basepoint) : s.nerve.default_basepoint();
  auto cc = check_cocycle(s.nerve, s.cocycle);
  if (!cc.valid()) throw InvariantError("cocycle identity fails: " + cc.violations.front().message);
  return holonomy(s.nerve, s.cocycle, base);
}

inline void print_holonomy(std::ostringstream& o, const Scenario& s, const HolonomyReport& h) {
  const auto& V = s.nerve.vertices();
  o << "basepoint: " << V[h.basepoint] << "\n";
  o << "spanning tree:";
  for (const auto& [a, b] : h.tree) o << " " << V[a] << "-" << V[b];
  o << "\n";
  for (std::size_t i = 0; i < h.generators.size(); ++i) {
    o << "generator g" << (i + 1) << " (edge " << s.nerve.edge_name(h.generators[i].first, h.generators[i].second)
      << "): " << h.images[i].str() << "\n";
  }
  for (std::size_t i = 0; i < h.relations.size(); ++i) {
    o << "relation " << (i + 1) << ":";
    if (h.relations[i].empty()) o << " (trivial)";
    for (const auto& [g, e] : h.relations[i]) o << " g" << (g + 1) << "^" << e;
    o << "\n";
  }
}

inline RunResult holonomy_cmd(const Scenario& s, std::ostringstream& o) {
  auto h = scenario_holonomy(s);
  print_holonomy(o, s, h);
  o << "verdict: " << (h.trivial ? "trivial" : "nontrivial") << "\n";
  return {o.str(), h.trivial ? kPass : kFailure};
}

inline RunResult global_action_cmd(const Scenario& s, std::ostringstream& o) {
  auto h = scenario_holonomy(s);
  if (h.trivial) {
    auto c = *trivializing_coboundary(h);
    for (std::size_t v = 0; v < c.size(); ++v) o << "h(" << s.nerve.vertices()[v] << ") = " << c[v].str() << "\n";
    o << "verdict: induced by a global action (at nerve level)\n";
    return {o.str(), kPass};
  }
  print_holonomy(o, s, h);
  o << "verdict: not induced by a global action (holonomy is nontrivial)\n";
  return {o.str(), kFailure};
}

inline RunResult check_lifting_cmd(const Scenario& s, std::ostringstream& o, std::size_t cap) {
  if (!s.lifting) throw InputError("scenario has no [lifting] section");
  auto M = build_model(s);
  const auto& A = M.space->atlas();
  bool ok = true;
  for (const auto& L : M.charts) {
    auto r = check_chart_lifting(L, A);
    list_violations(o, "chart lifting " + s.nerve.vertices()[L.chart()], r, cap);
    ok = ok && r.ok;
  }
  auto g = check_gluing(M.gluing, A);
  list_violations(o, "gluing", g, cap);
  ok = ok && g.ok;
  for (const auto& [a, b] : s.nerve.edges()) {
    auto r = check_equivariant_gluing(M.charts[a], M.charts[b], M.gluing, A);
    list_violations(o, "equivariant gluing " + s.nerve.edge_name(a, b), r, cap);
    ok = ok && r.ok;
  }
  if (ok) {
    try {
      assemble_global_lifting(M.space, M.charts, M.gluing);
      o << "assembly: ok (chart independence verified on " << M.space->size() << " points)\n";
    } catch (const AssemblyError& e) {
      o << "assembly: FAILED: " << e.what() << "\n";
      ok = false;
    }
  }
  o << "verdict: " << (ok ? "lifting data valid" : "lifting data invalid") << "\n";
  return {o.str(), ok ? kPass : kFailure};
}

inline void print_obstruction(std::ostringstream& o, const ObstructionReport& r, const FiniteModule& M) {
  o << "constraints: blocks=" << r.blocks << " unknowns=" << r.unknowns << " rows=" << r.constraints << "\n";
  auto ratio = r.dropped_ratio();
  o << "dropped: " << r.dropped << "/" << r.total << " = " << to_string(ratio) << " (threshold "
    << to_string(r.threshold) << ")\n";
  o << "verdict: " << verdict_name(r.verdict) << "\n";
  if (r.witness) {
    const auto& tau = *r.witness;
    o << "witness: tau(e_i, x), generator values (tau(u, x) follows from the cocycle identity)\n";
    std::size_t nz = 0;
    for (std::size_t i = 0; i < M.torus.rank(); ++i) {
      auto e = M.torus.generator(i);
      for (std::size_t x = 0; x < M.points; ++x) {
        for (std::size_t c = 0; c < M.fiber_rank; ++c) {
          auto v = tau.get(e, x, c);
          if (v == 0) continue;
          ++nz;
          o << "  tau(e" << (i + 1) << ", " << M.point_labels[x] << ")";
          if (M.fiber_rank > 1) o << "[" << (c + 1) << "]";
          o << " = " << v << "\n";
        }
      }
    }
    o << "  all other generator values are 0 (" << nz << " nonzero)\n";
    o << "witness check: passed\n";
  }
  if (r.certificate) {
    const auto& c = *r.certificate;
    o << "certificate: fiber component " << (c.component + 1) << ", modulus " << c.system.modulus << "\n";
    __int128 yb = 0;
    for (std::size_t i = 0; i < c.y.size(); ++i) {
      if (c.y[i] == 0) continue;
      o << "  y = " << c.y[i] << " on " << c.row_labels[i] << " (rhs " << c.system.b[i] << ")\n";
      yb += static_cast<__int128>(c.y[i]) * c.system.b[i];
    }
    o << "certificate check: y.A = 0, y.b = " << detail::mod(static_cast<std::int64_t>(yb % c.system.modulus),
                                                               c.system.modulus)
      << " (mod " << c.system.modulus << "): " << (verify_certificate(c) ? "passed" : "FAILED") << "\n";
  }
}

inline int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::vanishing_at_scale: return kPass;
    case Verdict::certified_nonvanishing: return kFailure;
    case Verdict::indeterminate: return kIndeterminate;
  }
  return kInputError;
}

inline RunResult obstruction_cmd(const Scenario& s, std::ostringstream& o) {
  if (!s.lifting) throw InputError("scenario has no [lifting] section (a base lifting is required)");
  auto M = build_model(s);
  auto L = scenario_lifting(M);
  o << "points: " << L.module().points << " (" << M.space->classes() << " base classes x "
    << M.space->decks().size() << " deck words, canonical angles)\n";
  if (s.lifting->twist) o << "twist: " << detail::affine_list_str(*s.lifting->twist, "u") << "\n";
  auto sigma = compute_sigma(L);
  for (std::size_t g = 0; g < sigma.tables.size(); ++g) {
    const auto& t = sigma.tables[g];
    std::size_t nz = 0, def = 0;
    for (std::size_t x = 0; x < t.points(); ++x) {
      if (!t.defined(x)) continue;
      ++def;
      for (std::size_t u = 0; u < t.arguments(); ++u) {
        for (std::size_t c = 0; c < t.fiber_rank(); ++c) nz += t.get(u, x, c) != 0;
      }
    }
    o << "sigma(" << L.module().generator_names[g] << "): " << nz << " nonzero entries over " << def
      << " in-window points\n";
  }
  auto r = test_vanishing(sigma, L.module(), s.threshold);
  print_obstruction(o, r, L.module());
  return {o.str(), verdict_exit(r.verdict)};
}

inline Scenario apply_overrides(Scenario s, const RunOptions& opt) {
  if (opt.window) {
    if (*opt.window < 0) throw InputError("--window must be >= 0");
    s.window = *opt.window;
  }
  if (opt.torus_order) {
    if (*opt.torus_order < 1) throw InputError("--torus-order must be >= 1");
    s.torus_order = *opt.torus_order;
  }
  if (opt.fiber_order) {
    if (*opt.fiber_order < 2) throw InputError("--fiber-order must be >= 2");
    s.fiber_order = *opt.fiber_order;
  }
  return s;
}

}  // namespace detail

/// Runs one command on a parsed scenario. Library errors surface as exit 1.
inline RunResult run(const std::string& command, const Scenario& scenario, const RunOptions& opt = {}) {
  std::ostringstream o;
  try {
    auto s = detail::apply_overrides(scenario, opt);
    detail::header(o, command, s);
    if (command == "check-cocycle") return detail::check_cocycle_cmd(s, o);
    if (command == "holonomy") return detail::holonomy_cmd(s, o);
    if (command == "global-action") return detail::global_action_cmd(s, o);
    if (command == "check-lifting-data") return detail::check_lifting_cmd(s, o, opt.max_listed);
    if (command == "obstruction" || command == "cylinder") return detail::obstruction_cmd(s, o);
    throw InputError("unknown command '" + command + "'");
  } catch (const Error& e) {
    o << "error: " << e.what() << "\n";
    return {o.str(), kInputError};
  }
}

/// The cylinder scenario for the given options (s, torus order, window,
/// fiber order), before any report is produced.
inline Scenario cylinder_scenario(const RunOptions& opt) {
  CylParams p;
  p.s = opt.s.value_or(Angle());
  p.m = opt.torus_order.value_or(8);
  p.window = opt.window.value_or(2);
  p.fiber_order = opt.fiber_order;
  if (!p.fiber_order) p.fiber_order = std::lcm(std::max<std::int64_t>(p.m, 2), p.s.denominator());
  return build_scenario(p);
}

}  // namespace torlift
