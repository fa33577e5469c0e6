#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "torlift/torus.hpp"

using namespace torlift;
using testsupport::pick;

namespace {

TorusPoint tp(std::vector<std::pair<std::int64_t, std::int64_t>> a) {
  std::vector<Angle> v;
  for (auto [p, q] : a) v.emplace_back(p, q);
  return TorusPoint(std::move(v));
}

PolarPoint pp(std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> c) {
  std::vector<PolarCoord> v;
  for (auto [r, p, q] : c) v.push_back({Rational(r), Angle(p, q)});
  return PolarPoint(std::move(v));
}

// M u computed on numerators over the common denominator, reduced at the end.
TorusPoint apply_oracle(const TorusAut& M, const TorusPoint& u) {
  std::int64_t d = 1;
  for (const auto& a : u.angles) d = std::lcm(d, a.denominator());
  std::vector<Angle> out;
  for (std::size_t i = 0; i < M.dim(); ++i) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < M.dim(); ++j) s += M(i, j) * (u[j].numerator() * (d / u[j].denominator()));
    out.emplace_back(((s % d) + d) % d, d);
  }
  return TorusPoint(std::move(out));
}

}  // namespace

TEST_CASE("angles reduce into [0,1) and print as p/q", "[torus]") {
  CHECK(Angle(5, 4) == Angle(1, 4));
  CHECK(Angle(-1, 4) == Angle(3, 4));
  CHECK(Angle(2, 8).str() == "1/4");
  CHECK(Angle().str() == "0/1");
  CHECK(Angle::parse("-3/6") == Angle(1, 2));
  CHECK_THROWS_AS(Angle::parse("1/0"), InputError);
  CHECK_THROWS_AS(Angle::parse("x/2"), InputError);
  CHECK(Angle(3, 8) * 5 == Angle(15, 8));
}

TEST_CASE("unimodularity is enforced", "[torus]") {
  CHECK_THROWS_AS(TorusAut::from_rows({{1, 2}, {2, 4}}), InvariantError);
  CHECK_THROWS_AS(TorusAut::from_rows({{2, 0}, {0, 1}}), InvariantError);
  CHECK_NOTHROW(TorusAut::from_rows({{0, 1}, {1, 0}}));
  auto M = TorusAut::from_rows({{2, 1}, {1, 1}});
  CHECK((M * M.inverse()).is_identity());
  CHECK(M.pow(-2) == M.inverse() * M.inverse());
}

TEST_CASE("apply_aut examples", "[torus]") {
  CHECK(apply_aut(TorusAut::identity(2), tp({{1, 3}, {1, 2}})) == tp({{1, 3}, {1, 2}}));
  auto rho = TorusAut::from_rows({{1, 0}, {-1, 1}});
  CHECK(apply_aut(rho, tp({{1, 4}, {0, 1}})) == tp({{1, 4}, {3, 4}}));
  auto swap = TorusAut::from_rows({{0, 1}, {1, 0}});
  auto u = tp({{1, 8}, {1, 8}});
  CHECK(apply_aut(swap, apply_aut(rho, u)) == tp({{0, 1}, {1, 8}}));
  CHECK(apply_aut(swap * rho, u) == tp({{0, 1}, {1, 8}}));
  CHECK_THROWS_AS(apply_aut(rho, tp({{1, 2}})), DimensionError);
}

TEST_CASE("apply_aut agrees with integer arithmetic and is a homomorphism", "[torus][property]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto n = static_cast<std::size_t>(pick(rng, 1, 3));
    auto m = pick(rng, 1, 12);
    auto M = testsupport::random_unimodular(rng, n);
    auto N = testsupport::random_unimodular(rng, n);
    auto u = testsupport::random_point(rng, n, m), v = testsupport::random_point(rng, n, m);
    CHECK(apply_aut(M, u) == apply_oracle(M, u));
    CHECK(apply_aut(M, u + v) == apply_aut(M, u) + apply_aut(M, v));
    CHECK(apply_aut(M, apply_aut(N, u)) == apply_aut(M * N, u));
  }
}

TEST_CASE("standard action examples", "[torus]") {
  auto z = pp({{1, 0, 1}, {4, 1, 4}});
  CHECK(standard_act(tp({{0, 1}, {0, 1}}), z) == z);
  CHECK(standard_act(tp({{1, 4}, {1, 2}}), z) == pp({{1, 1, 4}, {4, 3, 4}}));
  auto w = pp({{0, 0, 1}, {1, 0, 1}});
  CHECK(standard_act(tp({{1, 3}, {0, 1}}), w) == w);
  CHECK_THROWS_AS(standard_act(tp({{1, 3}}), w), DimensionError);
  CHECK_THROWS_AS(pp({{0, 1, 2}}), InvariantError);
}

TEST_CASE("moment map and strata", "[torus]") {
  CHECK(moment_map(pp({{1, 0, 1}, {4, 1, 8}})) == CornerPoint({Rational(1), Rational(4)}));
  CHECK(moment_map(pp({{0, 0, 1}, {0, 0, 1}})) == CornerPoint({Rational(0), Rational(0)}));
  // zero-based indices
  CHECK(stratum(CornerPoint({Rational(0), Rational(3)})) == std::vector<std::size_t>{0});
  CHECK(stratum(CornerPoint({Rational(2), Rational(3)})).empty());
  CHECK(stratum(CornerPoint({Rational(0), Rational(0)})) == std::vector<std::size_t>{0, 1});

  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    auto n = static_cast<std::size_t>(pick(rng, 1, 4));
    auto z = testsupport::random_polar(rng, n, 8);
    auto u = testsupport::random_point(rng, n, 8);
    CHECK(moment_map(standard_act(u, z)) == moment_map(z));
    CHECK(standard_act(-u, standard_act(u, z)) == z);
  }
}

TEST_CASE("torus grid indexing", "[torus]") {
  TorusGrid g(2, 4);
  REQUIRE(g.size() == 16);
  for (std::size_t a = 0; a < g.size(); ++a) {
    CHECK(g.index(g.coords(a)) == a);
    CHECK(g.locate(g.point(a)) == a);
    CHECK(g.add(a, g.neg(a)) == 0);
    for (std::size_t b = 0; b < g.size(); ++b) CHECK(g.point(g.add(a, b)) == g.point(a) + g.point(b));
  }
  auto rho = TorusAut::from_rows({{1, 0}, {-1, 1}});
  for (std::size_t a = 0; a < g.size(); ++a) CHECK(g.point(g.apply(rho, a)) == apply_aut(rho, g.point(a)));
  CHECK_FALSE(g.locate(tp({{1, 3}, {0, 1}})).has_value());
}
