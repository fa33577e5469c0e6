#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "torlift/lifting.hpp"

using namespace torlift;
using testsupport::pick;

namespace {

const TorusAut R1 = TorusAut::from_rows({{1, 0}, {-1, 1}});

AtlasModel one_chart(std::size_t n) {
  return AtlasModel(Nerve({"U"}, {}, {}), GLCocycle(n, {}), {{{"p", std::vector<Rational>(n, Rational(1))}}}, {});
}

AtlasModel two_charts(const TorusAut& M) {
  return AtlasModel(Nerve({"U", "V"}, {{0, 1}}, {}), GLCocycle(2, {{{0, 1}, M}}),
                    {{{"p", {Rational(1), Rational(1)}}}, {{"q", {Rational(1), Rational(1)}}}}, {{0, 1, {{0, 0}}}});
}

// sigma for one generator given as a table over the module.
SigmaTable single_sigma(const FiniteModule& M, CochainTable t) {
  return SigmaTable{{GroupWord{{{0, 1}}}}, {std::move(t)}};
}

}  // namespace

TEST_CASE("chart lifting examples", "[lifting]") {
  auto A = one_chart(1);
  TorusGrid g(1, 4);
  ChartLifting zero(0, 1, g, 4, 1);
  CHECK(check_chart_lifting(zero, A).ok);

  ChartLifting hom(0, 1, g, 8, 1);
  hom.set_linear(0, {{3}});
  CHECK(check_chart_lifting(hom, A).ok);
  CHECK(hom.get(0, 1, 0) == 6);

  ChartLifting bad(0, 1, g, 4, 1);
  for (std::size_t u = 1; u < 4; ++u)
    for (std::size_t th = 0; th < 4; ++th) bad.set(0, u, th, 0, 1);
  auto r = check_chart_lifting(bad, A);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.violations.empty());
  CHECK_THROWS_AS(ChartLifting::linear_value(TorusGrid(1, 8), 4, {{1}}, 1), InputError);
}

TEST_CASE("equivariant gluing examples", "[lifting]") {
  auto A = two_charts(R1);
  TorusGrid g(2, 4);
  GluingData zero(g, 4, 1);
  zero.set_table(0, 1, 0, std::vector<std::int64_t>(g.size(), 0));
  ChartLifting La(0, 1, g, 4, 1), Lb(1, 1, g, 4, 1);
  CHECK(check_equivariant_gluing(La, Lb, zero, A).ok);

  // c_b = lambda, c_a = lambda o rho^-1 with lambda(u) = u_2
  Lb.set_linear(0, {{0, 1}});
  La.set_linear(0, {{1, 1}});
  CHECK(check_equivariant_gluing(La, Lb, zero, A).ok);

  ChartLifting same(0, 1, g, 4, 1);
  same.set_linear(0, {{0, 1}});
  CHECK_FALSE(check_equivariant_gluing(same, Lb, zero, A).ok);
}

TEST_CASE("trivial data assemble to the product lifting", "[lifting]") {
  auto A = one_chart(2);
  Representation rho(FPGroup::trivial(), {}, 2);
  auto S = std::make_shared<const SampledSpace>(A, make_action_data(A, rho), 4, 1);
  ChartLifting c(0, 1, S->grid(), 4, 1);
  auto L = assemble_global_lifting(S, {c}, GluingData(S->grid(), 4, 1));
  for (std::size_t u = 0; u < S->grid().size(); ++u) {
    for (std::size_t x = 0; x < S->size(); ++x) {
      auto q = L.act_torus(u, {x, {3}});
      CHECK(q.t == std::vector<std::int64_t>{3});
      CHECK(q.x == static_cast<std::size_t>(L.module().torus_act(u, x)));
    }
  }
  CHECK(compute_sigma(L).tables.empty());
}

TEST_CASE("assembly rejects a non-equivariant gluing", "[lifting]") {
  auto A = two_charts(R1);
  Representation rho(FPGroup::trivial(), {}, 2);
  auto S = std::make_shared<const SampledSpace>(A, make_action_data(A, rho), 4, 1);
  ChartLifting La(0, 1, S->grid(), 4, 1), Lb(1, 1, S->grid(), 4, 1);
  La.set_linear(0, {{0, 1}});
  Lb.set_linear(0, {{0, 1}});
  GluingData G(S->grid(), 4, 1);
  G.set_table(0, 1, 0, std::vector<std::int64_t>(S->grid().size(), 0));
  CHECK_THROWS_AS(assemble_global_lifting(S, {La, Lb}, G), AssemblyError);
}

TEST_CASE("one-point model with a nonzero homomorphism is certified nonvanishing", "[lifting][obstruction]") {
  std::mt19937_64 rng(61);
  auto M = testsupport::random_module(rng, 1, 2, 2, 1, false, {TorusAut::identity(1)});
  CochainTable s(1, M);
  s.set(1, 0, 0, 1);
  auto sigma = single_sigma(M, s);
  auto rep = test_vanishing(sigma, M);
  CHECK(rep.verdict == Verdict::certified_nonvanishing);
  REQUIRE(rep.certificate);
  CHECK(verify_certificate(*rep.certificate));
  // all four tau tables, none of which has sigma as its coboundary
  int hits = 0;
  for (int t0 = 0; t0 < 2; ++t0)
    for (int t1 = 0; t1 < 2; ++t1) {
      CochainTable tau(1, M);
      tau.set(0, 0, 0, t0);
      tau.set(1, 0, 0, t1);
      if (is_cocycle(tau, M).ok && coboundary_table(tau, M, 0).agrees_with(s)) ++hits;
    }
  CHECK(hits == 0);
}

TEST_CASE("zero sigma vanishes with zero witness", "[lifting][obstruction]") {
  std::mt19937_64 rng(62);
  auto M = testsupport::random_module(rng, 1, 4, 4, 3, true, {TorusAut::from_rows({{-1}})});
  auto rep = test_vanishing(single_sigma(M, CochainTable(1, M)), M);
  CHECK(rep.verdict == Verdict::vanishing_at_scale);
  REQUIRE(rep.witness);
  CHECK(rep.witness->is_zero());
}

TEST_CASE("coboundaries of random torus cocycles vanish", "[lifting][obstruction][property]") {
  std::mt19937_64 rng(63);
  for (int i = 0; i < 40; ++i) {
    std::size_t n = static_cast<std::size_t>(pick(rng, 1, 2));
    std::int64_t m = n == 1 ? 4 : 2;
    bool free = pick(rng, 0, 1) == 1;
    auto M = testsupport::random_module(rng, n, m, 4, static_cast<std::size_t>(pick(rng, 1, 3)), free,
                                        {testsupport::random_unimodular(rng, n)});
    // a torus cocycle: delta of a 0-cochain plus a per-point homomorphism on fixed points
    CochainTable tau = coboundary(testsupport::random_cochain(rng, 0, M), M);
    if (!free) {
      for (std::size_t x = 0; x < M.points; ++x) {
        auto c = pick(rng, 0, 3) * (4 / m);
        for (std::size_t u = 0; u < M.torus.size(); ++u) tau.add(u, x, 0, c * M.torus.coords(u)[0]);
      }
    }
    REQUIRE(is_cocycle(tau, M).ok);
    auto sigma = single_sigma(M, coboundary_table(tau, M, 0));
    auto rep = test_vanishing(sigma, M);
    CHECK(rep.verdict == Verdict::vanishing_at_scale);
    REQUIRE(rep.witness);
    CHECK(verify_witness(*rep.witness, sigma, M));
  }
}

TEST_CASE("sigma that is not a cocycle is rejected", "[lifting][obstruction]") {
  std::mt19937_64 rng(64);
  auto M = testsupport::random_module(rng, 1, 4, 4, 1, false, {TorusAut::identity(1)});
  CochainTable s(1, M);
  s.set(1, 0, 0, 1);  // not a homomorphism of Z/4
  CHECK_THROWS_AS(test_vanishing(single_sigma(M, s), M), InvalidSigma);
}
