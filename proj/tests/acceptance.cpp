// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "support.hpp"
#include "torlift/atlas.hpp"
#include "torlift/cech.hpp"
#include "torlift/commands.hpp"
#include "torlift/cylinder.hpp"
#include "torlift/group.hpp"
#include "torlift/lifting.hpp"

using namespace torlift;
using testsupport::pick;

namespace {

// Collects failed expectations of one criterion.
struct Check {
  std::vector<std::string> failures;
  std::size_t cases = 0;
  void expect(bool ok, const std::string& what) {
    ++cases;
    if (!ok && failures.size() < 5) failures.push_back(what);
    else if (!ok) failures.back() = what + " (and more)";
  }
};

std::int64_t choose(std::mt19937_64& rng, const std::vector<std::int64_t>& v) {
  return v[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(v.size()) - 1))];
}

std::vector<TorusAut> signed_permutations() {
  std::vector<TorusAut> out;
  for (auto [a, b, c, d] : std::vector<std::array<std::int64_t, 4>>{{1, 0, 0, 1}, {0, 1, 1, 0}}) {
    for (std::int64_t s : {1, -1}) {
      for (std::int64_t t : {1, -1}) out.push_back(TorusAut::from_rows({{s * a, s * b}, {t * c, t * d}}));
    }
  }
  return out;
}

Nerve random_nerve(std::mt19937_64& rng, std::size_t v, bool connected) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < v; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<bool>> adj(v, std::vector<bool>(v, false));
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = i + 1; j < v; ++j) {
      // a path keeps the nerve connected when asked to
      if ((connected && j == i + 1) || pick(rng, 0, 9) < 5) {
        edges.emplace_back(i, j);
        adj[i][j] = adj[j][i] = true;
      }
    }
  }
  std::vector<std::array<std::size_t, 3>> tri;
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = i + 1; j < v; ++j)
      for (std::size_t k = j + 1; k < v; ++k)
        if (adj[i][j] && adj[j][k] && adj[i][k] && pick(rng, 0, 9) < 7) tri.push_back({i, j, k});
  return Nerve(names, edges, tri);
}

GroupWord random_word(std::mt19937_64& rng, const FPGroup& G, int len = 4) {
  GroupWord w;
  for (int i = 0; i < len && G.rank() > 0; ++i) {
    w.letters.emplace_back(static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(G.rank()) - 1)),
                           pick(rng, -2, 2));
  }
  return G.normalize(w);
}

// 1. cochain complex
Check cochain_suite() {
  Check c;
  std::mt19937_64 rng(1001);
  const std::vector<std::int64_t> orders = {2, 3, 4, 8};
  for (int i = 0; i < 1000; ++i) {
    auto m = choose(rng, orders), m2 = choose(rng, orders);
    std::size_t n = m <= 4 ? 2 : 1;
    bool free = pick(rng, 0, 1) == 1;
    auto M = testsupport::random_module(rng, n, m, m2, static_cast<std::size_t>(pick(rng, 1, 2)), free,
                                        {testsupport::random_unimodular(rng, n)});
    auto q = static_cast<std::size_t>(i % 2);
    auto t = testsupport::random_cochain(rng, q, M);
    auto d = coboundary(t, M);
    std::ostringstream what;
    what << "delta^2 != 0 for q=" << q << " m=" << m << " m'=" << m2;
    c.expect(coboundary(d, M).is_zero(), what.str());
    if (i < 200) {
      c.expect(coboundary(act_cochain(t, 0, M), M) == act_cochain(d, 0, M), "pi_1 action does not commute with delta");
    }
  }
  return c;
}

// 2. Cech: cocycle check and holonomy
Check cech_suite() {
  Check c;
  std::mt19937_64 rng(1002);
  auto P = signed_permutations();
  auto any = [&] { return P[static_cast<std::size_t>(pick(rng, 0, 7))]; };

  for (int i = 0; i < 100; ++i) {
    auto N = random_nerve(rng, static_cast<std::size_t>(pick(rng, 2, 6)), false);
    std::vector<TorusAut> h;
    for (std::size_t v = 0; v < N.vertices().size(); ++v) h.push_back(any());
    bool coherent = pick(rng, 0, 1) == 1;
    std::map<std::pair<std::size_t, std::size_t>, TorusAut> vals;
    for (const auto& e : N.edges()) {
      vals.emplace(e, coherent && pick(rng, 0, 5) > 0 ? h[e.first] * h[e.second].inverse() : any());
    }
    auto rep = check_cocycle(N, GLCocycle(2, vals));
    std::size_t bad = 0;
    for (const auto& t : N.triangles()) {
      auto g = [&](std::size_t a, std::size_t b) { return vals.at({a, b}); };
      if (g(t[0], t[1]) * g(t[1], t[2]) != g(t[0], t[2])) ++bad;
    }
    c.expect(rep.valid() == (bad == 0), "check_cocycle verdict differs from the triangle oracle");
    c.expect(rep.violations.size() == bad, "violation count differs from the triangle oracle");
  }

  int trivial = 0, nontrivial = 0;
  for (int i = 0; i < 60; ++i) {
    auto N = random_nerve(rng, static_cast<std::size_t>(pick(rng, 2, 4)), true);
    std::vector<TorusAut> h;
    for (std::size_t v = 0; v < N.vertices().size(); ++v) h.push_back(any());
    std::map<std::pair<std::size_t, std::size_t>, TorusAut> vals;
    for (const auto& e : N.edges()) vals.emplace(e, i % 2 ? h[e.first] * h[e.second].inverse() : any());
    GLCocycle g(2, vals);
    if (!check_cocycle(N, g).valid()) {
      --i;
      continue;
    }
    auto rep = holonomy(N, g, 0);
    // exhaustive: is g(a,b) = k_a k_b^-1 for some signed permutations k?
    const std::size_t V = N.vertices().size();
    std::vector<std::size_t> idx(V, 0);
    bool found = false;
    while (!found) {
      found = true;
      for (const auto& [e, m] : vals) {
        if (P[idx[e.first]] * P[idx[e.second]].inverse() != m) {
          found = false;
          break;
        }
      }
      std::size_t k = 0;
      while (k < V && ++idx[k] == P.size()) idx[k++] = 0;
      if (k == V) break;
    }
    c.expect(rep.trivial == found, "holonomy triviality differs from exhaustive coboundary search");
    (found ? trivial : nontrivial)++;
  }
  c.expect(trivial > 5 && nontrivial > 5, "holonomy sample is one-sided");
  return c;
}

// 3. semidirect product and the action on the fiber product
Check semidirect_suite() {
  Check c;
  std::mt19937_64 rng(1003);
  auto J = TorusAut::from_rows({{0, -1}, {1, 0}});
  auto U = testsupport::random_unimodular(rng, 2);
  std::vector<Representation> reps = {
      Representation(FPGroup::free({"a"}), {testsupport::random_unimodular(rng, 2)}, 2),
      Representation(FPGroup::free_abelian({"x", "y"}), {U, U.pow(2)}, 2),
      Representation(FPGroup::cyclic(4, "c"), {J}, 2)};
  for (const auto& rho : reps) {
    const auto& G = rho.group();
    SemidirectElement id{TorusPoint::zero(2), G.identity()};
    for (int i = 0; i < 1000; ++i) {
      SemidirectElement g1{testsupport::random_point(rng, 2, 8), random_word(rng, G)};
      SemidirectElement g2{testsupport::random_point(rng, 2, 8), random_word(rng, G)};
      SemidirectElement g3{testsupport::random_point(rng, 2, 8), random_word(rng, G)};
      c.expect(semidirect_mul(semidirect_mul(g1, g2, rho), g3, rho) ==
                   semidirect_mul(g1, semidirect_mul(g2, g3, rho), rho),
               "associativity");
      c.expect(semidirect_mul(g1, id, rho) == g1 && semidirect_mul(id, g1, rho) == g1, "identity");
      c.expect(semidirect_mul(g1, semidirect_inv(g1, rho), rho) == id, "inverse");
    }
  }

  auto R1 = TorusAut::from_rows({{1, 0}, {-1, 1}});
  for (int cfg = 0; cfg < 100; ++cfg) {
    Nerve N({"U", "V"}, {{0, 1}}, {});
    GLCocycle g(2, {{{0, 1}, testsupport::random_unimodular(rng, 2)}});
    std::vector<std::vector<ChartSample>> s = {{{"p", {Rational(pick(rng, 1, 3)), Rational(pick(rng, 1, 3))}}},
                                               {{"q", {Rational(pick(rng, 1, 3)), Rational(pick(rng, 1, 3))}}}};
    AtlasModel A(N, g, s, {{0, 1, {{0, 0}}}});
    Representation rho(FPGroup::free({"a"}), {cfg % 2 ? R1 : testsupport::random_unimodular(rng, 2)}, 2);
    const auto& G = rho.group();
    auto data = make_action_data(A, rho);
    for (int i = 0; i < 5; ++i) {
      FiberedPoint p{0, 0, random_word(rng, G, 2),
                     PolarPoint::canonical(A.samples(0)[0].r2, testsupport::random_point(rng, 2, 8))};
      SemidirectElement g1{testsupport::random_point(rng, 2, 8), random_word(rng, G, 2)};
      SemidirectElement g2{testsupport::random_point(rng, 2, 8), random_word(rng, G, 2)};
      auto via_u = change_chart(act_fiber_product(g1, p, A, rho, data.corrections), 1, A, data.transitions);
      auto via_v = act_fiber_product(g1, change_chart(p, 1, A, data.transitions), A, rho, data.corrections);
      c.expect(via_u == via_v, "action depends on the chart");
      c.expect(act_fiber_product(semidirect_mul(g1, g2, rho), p, A, rho, data.corrections) ==
                   act_fiber_product(g1, act_fiber_product(g2, p, A, rho, data.corrections), A, rho,
                                     data.corrections),
               "action axiom");
    }
    if (cfg < 50) {
      auto f = testsupport::random_unimodular(rng, 2);
      auto rho2 = transport_rep(f, rho);
      auto corr2 = transport_corrections(f, data.corrections);
      std::size_t chart = static_cast<std::size_t>(pick(rng, 0, 1));
      FiberedPoint p{chart, 0, random_word(rng, G, 2),
                     PolarPoint::canonical(A.samples(chart)[0].r2, testsupport::random_point(rng, 2, 8))};
      SemidirectElement h{testsupport::random_point(rng, 2, 8), random_word(rng, G, 2)};
      c.expect(act_fiber_product(h, p, A, rho, data.corrections) ==
                   act_fiber_product(transport_element(f, h), p, A, rho2, corr2),
               "conjugated representation changes the action");
    }
  }
  return c;
}

struct Pipeline {
  CylParams prm;
  ScenarioModel model;
  GlobalLifting L;
};

Pipeline pipeline(Angle s, std::int64_t m, std::int64_t window) {
  Pipeline p;
  p.prm.s = s;
  p.prm.m = m;
  p.prm.window = window;
  p.model = build_model(parse_scenario(emit_scenario(build_scenario(p.prm))));
  p.L = scenario_lifting(p.model);
  return p;
}

// phi(a) phi_T(u) = phi_T(rho(a)u) phi(a) on every in-window sample
bool deck_equivariant(const GlobalLifting& L) {
  const auto& M = L.module();
  const auto& S = L.space();
  for (std::size_t g = 0; g < S.group().rank(); ++g) {
    auto a = S.group().generator(g);
    for (std::size_t x = 0; x < M.points; ++x) {
      for (std::int64_t t = 0; t < M.fiber_order; ++t) {
        BundlePoint p{x, std::vector<std::int64_t>(M.fiber_rank, t)};
        if (!L.act_deck(a, p)) continue;
        for (std::size_t u = 0; u < M.torus.size(); ++u) {
          auto lhs = L.act_deck(a, L.act_torus(u, p));
          if (!lhs) continue;
          auto rhs = L.act_torus(M.rho_act(g, u), *L.act_deck(a, p));
          if (*lhs != rhs) return false;
        }
      }
    }
  }
  return true;
}

// 4. cylinder end to end
Check cylinder_suite() {
  Check c;
  for (auto s : {Angle(0), Angle(1, 8), Angle(3, 8)}) {
    auto P = pipeline(s, 8, 2);
    const auto& M = P.L.module();
    auto sigma = compute_sigma(P.L);
    std::string tag = " at s=" + s.str();
    c.expect(sigma.is_zero(), "sigma is not zero" + tag);
    auto rep = test_vanishing(sigma, M);
    c.expect(rep.verdict == Verdict::vanishing_at_scale, "untwisted lifting not vanishing" + tag);

    auto tau = twist_table({AffineExpr{Rational(0), {0, 1}}}, M);
    auto Lt = twist_lifting(P.L, tau);
    auto st = compute_sigma(Lt);
    // oracle: tau(u,x) - tau(rho(a)u, a x), entry by entry
    bool eq = true, nonzero = false;
    for (std::size_t x = 0; x < M.points; ++x) {
      auto y = M.deck_act(0, x);
      if (y == kOutOfWindow) continue;
      for (std::size_t u = 0; u < M.torus.size(); ++u) {
        auto want = detail::mod(tau.get(u, x) - tau.get(M.rho_act(0, u), static_cast<std::size_t>(y)),
                                M.fiber_order);
        eq = eq && st.tables[0].get(u, x) == want;
        nonzero = nonzero || want != 0;
      }
    }
    c.expect(eq, "twisted sigma differs from the coboundary" + tag);
    c.expect(nonzero, "twist did not change sigma" + tag);
    c.expect(!deck_equivariant(Lt), "twisted lifting is already equivariant" + tag);
    auto rt = test_vanishing(st, M);
    c.expect(rt.verdict == Verdict::vanishing_at_scale && rt.witness.has_value(), "twisted lifting not vanishing" + tag);
    if (rt.witness) {
      c.expect(verify_witness(*rt.witness, st, M), "witness does not verify" + tag);
      try {
        c.expect(deck_equivariant(reconstruct_lifting(Lt, *rt.witness)), "reconstruction not equivariant" + tag);
      } catch (const Error& e) {
        c.expect(false, std::string("reconstruction failed: ") + e.what());
      }
    }
  }
  return c;
}

// 5. one-point trivial-action model, and small permuted variants
Check negative_suite() {
  Check c;
  std::mt19937_64 rng(1005);
  int nonvanishing = 0, vanishing = 0;
  for (int i = 0; i < 40; ++i) {
    std::size_t pts = i == 0 ? 1 : static_cast<std::size_t>(pick(rng, 1, 4));
    auto M = testsupport::random_module(rng, 1, 2, 2, pts, false, {TorusAut::identity(1)});
    CochainTable s(1, M);
    for (std::size_t x = 0; x < pts; ++x) s.set(1, x, 0, i == 0 ? 1 : pick(rng, 0, 1));
    SigmaTable sigma{{GroupWord{{{0, 1}}}}, {s}};
    auto rep = test_vanishing(sigma, M);
    // exhaustive: every table tau over (u, x), u in Z/2
    bool exists = false;
    for (std::uint32_t bits = 0; bits < (1u << (2 * pts)) && !exists; ++bits) {
      CochainTable tau(1, M);
      for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t x = 0; x < pts; ++x) tau.set(u, x, 0, (bits >> (u * pts + x)) & 1);
      exists = is_cocycle(tau, M).ok && coboundary_table(tau, M, 0).agrees_with(s);
    }
    if (i == 0) c.expect(!exists, "one-point model has a witness");
    if (exists) {
      ++vanishing;
      c.expect(rep.verdict == Verdict::vanishing_at_scale && rep.witness && verify_witness(*rep.witness, sigma, M),
               "solver misses an existing witness");
    } else {
      ++nonvanishing;
      c.expect(rep.verdict == Verdict::certified_nonvanishing && rep.certificate &&
                   verify_certificate(*rep.certificate),
               "no certified nonvanishing where enumeration finds no witness");
    }
  }
  c.expect(nonvanishing > 5 && vanishing > 5, "negative control sample is one-sided");
  return c;
}

// 6. modular solver
Check solver_suite() {
  Check c;
  std::mt19937_64 rng(1006);
  for (int i = 0; i < 500; ++i) {
    auto s = testsupport::random_system(rng, 12, 12, {2, 3, 4, 6, 8});
    bool brute = testsupport::feasible_by_enumeration(s);
    auto r = smith_solve(s);
    c.expect(std::holds_alternative<SmithSolution>(r) == brute, "feasibility differs from enumeration");
    if (auto* sol = std::get_if<SmithSolution>(&r)) c.expect(verify_solution(s, sol->x), "solution does not verify");
    else c.expect(verify_certificate(s, std::get<SmithCertificate>(r).y), "certificate does not verify");
  }
  return c;
}

// 7. truncation soundness and determinism
Check window_suite() {
  Check c;
  for (auto s : {Angle(0), Angle(1, 8), Angle(3, 8)}) {
    RunOptions base;
    base.s = s;
    auto sc = cylinder_scenario(base);
    bool seen_vanishing = false;
    for (std::int64_t w : {1, 2, 3}) {
      RunOptions opt;
      opt.window = w;
      auto a = run("obstruction", sc, opt);
      auto b = run("obstruction", sc, opt);
      c.expect(a.report == b.report && a.exit_code == b.exit_code,
               "report not byte-identical at window " + std::to_string(w));
      bool nonvanishing = a.exit_code == kFailure;
      c.expect(!(seen_vanishing && nonvanishing), "nonvanishing after vanishing at window " + std::to_string(w));
      seen_vanishing = seen_vanishing || a.exit_code == kPass;
    }
    c.expect(seen_vanishing, "no window gave a verdict at s=" + s.str());
  }
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds, 0 = none
    std::function<Check()> run;
  };
  std::vector<Criterion> all = {
      {1, "cochain complex", 5, cochain_suite},   {2, "cech nerve", 30, cech_suite},
      {3, "semidirect product", 5, semidirect_suite}, {4, "cylinder end to end", 60, cylinder_suite},
      {5, "negative control", 5, negative_suite}, {6, "modular solver", 10, solver_suite},
      {7, "window regression", 0, window_suite}};
  int failed = 0;
  for (const auto& cr : all) {
    auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit > 0 && dt > cr.limit) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "over time limit %.0f s", cr.limit);
      c.failures.push_back(buf);
    }
    bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("criterion %d %-22s %s  %6.2f s  %zu checks", cr.id, cr.name, ok ? "PASS" : "FAIL", dt, c.cases);
    for (const auto& f : c.failures) std::printf("\n    %s", f.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
