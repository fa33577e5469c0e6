#pragma once

// The cylinder example: X-bar = {(xi, u, z)} / T^2 with xi_2 = |z_1|^2 and
// xi_2 + |z_2|^2 = 1, the action of T^2 x_rho Z with rho(n) = [[1,0],[-n,1]],
// the circle bundle P-bar with its s-parametrized lifting, and a scenario
// that feeds the lifting into the obstruction pipeline.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "torlift/errors.hpp"
#include "torlift/group.hpp"
#include "torlift/lifting.hpp"
#include "torlift/scenario.hpp"
#include "torlift/torus.hpp"

namespace torlift {

/// [xi, u, z] in the gauge: z phases 0 where |z_i| > 0, and u_2 = 0 on the
/// two boundary circles where a z-coordinate vanishes.
struct CylPoint {
  std::array<Rational, 2> xi{Rational(0), Rational(0)};
  TorusPoint u = TorusPoint::zero(2);
  PolarPoint z;
  friend bool operator==(const CylPoint&, const CylPoint&) = default;

  std::string str() const {
    return "[xi=(" + to_string(xi[0]) + "," + to_string(xi[1]) + "), u=" + u.str() + ", z=" + z.str() + "]";
  }
};

/// [xi, u, z, t] in the same gauge, t the fiber angle.
struct CylBundlePoint {
  CylPoint base;
  Angle t;
  friend bool operator==(const CylBundlePoint&, const CylBundlePoint&) = default;

  std::string str() const { return base.str().substr(0, base.str().size() - 1) + ", t=" + t.str() + "]"; }
};

struct CylParams {
  Angle s;
  std::int64_t m = 8;
  std::int64_t window = 2;
  std::optional<std::int64_t> fiber_order;  // defaults to m

  std::int64_t fiber() const { return fiber_order.value_or(m); }
};

/// An element (v, n) of T^2 x_rho Z.
struct CylElement {
  TorusPoint v = TorusPoint::zero(2);
  std::int64_t n = 0;
  friend bool operator==(const CylElement&, const CylElement&) = default;
};

inline TorusAut cyl_rho(std::int64_t n) { return TorusAut::from_rows({{1, 0}, {-n, 1}}); }

inline Representation cyl_representation() {
  return Representation(FPGroup::free({"a"}), {cyl_rho(1)}, 2);
}

/// (v1,n1)(v2,n2) = (v1 + rho^n1(v2), n1 + n2).
inline CylElement cyl_mul(const CylElement& g1, const CylElement& g2) {
  return {g1.v + apply_aut(cyl_rho(g1.n), g2.v), g1.n + g2.n};
}

/// Raw representative, before choosing a gauge.
struct CylRaw {
  std::array<Rational, 2> xi{Rational(0), Rational(0)};
  TorusPoint u = TorusPoint::zero(2);
  PolarPoint z;
  Angle t;
  friend bool operator==(const CylRaw&, const CylRaw&) = default;
};

inline CylRaw raw(const CylPoint& p) { return {p.xi, p.u, p.z, Angle()}; }
inline CylRaw raw(const CylBundlePoint& p) { return {p.base.xi, p.base.u, p.base.z, p.t}; }

/// v . (xi, u, z, t) = (xi, (u_1, u_2 + v_1 - v_2), v^-1 z, t + v_2).
inline CylRaw gauge(const TorusPoint& v, const CylRaw& r) {
  CylRaw out = r;
  out.u.angles[1] = r.u[1] + v[0] - v[1];
  out.z = standard_act(-v, r.z);
  out.t = r.t + v[1];
  return out;
}

namespace detail {

inline void check_on_space(const CylRaw& r) {
  if (r.u.size() != 2 || r.z.size() != 2) throw NotOnSpace("cylinder points have rank 2");
  if (r.xi[1] < 0 || r.xi[1] > 1) throw NotOnSpace("xi_2 must lie in [0,1], got " + to_string(r.xi[1]));
  if (r.z[0].r2 != r.xi[1]) throw NotOnSpace("xi_2 = |z_1|^2 fails");
  if (r.xi[1] + r.z[1].r2 != 1) throw NotOnSpace("xi_2 + |z_2|^2 = 1 fails");
}

// The gauge element taking r to its canonical representative.
inline TorusPoint gauge_to_canonical(const CylRaw& r) {
  TorusPoint v = TorusPoint::zero(2);
  if (r.z[0].r2 == 0) {
    v.angles[1] = r.z[1].theta;
    v.angles[0] = v[1] - r.u[1];
  } else if (r.z[1].r2 == 0) {
    v.angles[0] = r.z[0].theta;
    v.angles[1] = r.u[1] + v[0];
  } else {
    v.angles[0] = r.z[0].theta;
    v.angles[1] = r.z[1].theta;
  }
  return v;
}

}  // namespace detail

inline CylBundlePoint canonicalize_bundle(const CylRaw& r) {
  detail::check_on_space(r);
  auto c = gauge(detail::gauge_to_canonical(r), r);
  return {{c.xi, c.u, c.z}, c.t};
}

inline CylPoint canonicalize(const CylRaw& r) { return canonicalize_bundle(r).base; }

inline CylPoint canonicalize(const std::array<Rational, 2>& xi, const TorusPoint& u, const PolarPoint& z) {
  return canonicalize(CylRaw{xi, u, z, Angle()});
}
inline CylBundlePoint canonicalize(const std::array<Rational, 2>& xi, const TorusPoint& u, const PolarPoint& z,
                                   const Angle& t) {
  return canonicalize_bundle(CylRaw{xi, u, z, t});
}

/// phi(v, n)[xi, u, z] = [(xi_1 + n(xi_2 + 1), xi_2), rho^n(u) v, z].
inline CylPoint g_act(const CylElement& g, const CylPoint& p) {
  CylRaw r = raw(p);
  r.xi[0] = p.xi[0] + Rational(g.n) * (p.xi[1] + 1);
  r.u = apply_aut(cyl_rho(g.n), p.u) + g.v;
  return canonicalize(r);
}

/// The lifted action: as g_act on the base and t -> t + v_1 + n s.
inline CylBundlePoint lift_act(const CylParams& prm, const CylElement& g, const CylBundlePoint& p) {
  CylRaw r = raw(p);
  r.xi[0] = p.base.xi[0] + Rational(g.n) * (p.base.xi[1] + 1);
  r.u = apply_aut(cyl_rho(g.n), p.base.u) + g.v;
  r.t = p.t + g.v[0] + prm.s * g.n;
  return canonicalize_bundle(r);
}

/// The point over xi with u and z phases zero.
inline CylPoint cyl_base_point(const std::array<Rational, 2>& xi) {
  std::vector<PolarCoord> z{{xi[1], Angle()}, {1 - xi[1], Angle()}};
  return canonicalize(xi, TorusPoint::zero(2), PolarPoint(std::move(z)));
}

/// Chart layout of the scenario: three arcs of the circle coordinate
/// eta = xi_1 / (xi_2 + 1), each sampled at both ends and xi_2 in {0,1/2,1}.
struct CylChart {
  std::string name;
  std::array<Rational, 2> eta;  // lifts of the two arc ends
};

inline std::vector<CylChart> cyl_charts() {
  return {{"c0", {Rational(0), Rational(1, 3)}},
          {"c1", {Rational(1, 3), Rational(2, 3)}},
          {"c2", {Rational(-1, 3), Rational(0)}}};
}

inline std::string cyl_label(std::size_t end, std::size_t j) { return (end == 0 ? "lo" : "hi") + std::to_string(j); }

/// xi of sample (end, j) of a chart: xi_2 = j/2, xi_1 = eta (xi_2 + 1).
inline std::array<Rational, 2> cyl_sample_xi(const CylChart& c, std::size_t end, std::size_t j) {
  Rational xi2(static_cast<std::int64_t>(j), 2);
  return {c.eta[end] * (xi2 + 1), xi2};
}

namespace detail {

inline AffineExpr lin(std::vector<std::int64_t> coef, Rational c = Rational(0)) {
  return AffineExpr{c, std::move(coef)};
}

}  // namespace detail

inline Scenario build_scenario(const CylParams& prm) {
  if (prm.m < 1) throw InputError("torus order must be >= 1");
  if (prm.window < 1) throw InputError("window must be >= 1");
  const auto m2 = prm.fiber();
  if (m2 % prm.m != 0) throw InputError("fiber order must be a multiple of the torus order");
  if (m2 % prm.s.denominator() != 0) {
    throw InputError("s = " + prm.s.str() + " is not a multiple of 1/" + std::to_string(m2));
  }
  Scenario s;
  s.name = "cylinder-s" + prm.s.str() + "-m" + std::to_string(prm.m);
  s.rank = 2;
  s.fiber_rank = 1;
  s.torus_order = prm.m;
  s.fiber_order = m2;
  s.window = prm.window;
  s.good_cover = true;
  auto charts = cyl_charts();
  std::vector<std::string> names;
  for (const auto& c : charts) names.push_back(c.name);
  // (c1, c2) is the only non-tree edge from c0
  s.nerve = Nerve(names, {{0, 1}, {1, 2}, {0, 2}}, {});
  auto I = TorusAut::identity(2);
  s.cocycle = GLCocycle(2, {{{0, 1}, I}, {{1, 2}, cyl_rho(1)}, {{0, 2}, I}});
  s.representation = RepresentationSpec{FPGroup::free({"a"}), {cyl_rho(1)}, {}};
  s.samples.assign(3, {});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t end = 0; end < 2; ++end) {
      for (std::size_t j = 0; j < 3; ++j) {
        Rational xi2(static_cast<std::int64_t>(j), 2);
        // the second coordinate collapses on both boundary circles
        s.samples[c].push_back({cyl_label(end, j), {xi2 + 1, xi2 * (1 - xi2)}});
      }
    }
  }
  auto pairs = [](std::size_t ea, std::size_t eb) {
    std::vector<std::pair<std::size_t, std::size_t>> p;
    for (std::size_t j = 0; j < 3; ++j) p.emplace_back(ea * 3 + j, eb * 3 + j);
    return p;
  };
  s.overlaps = {{0, 1, pairs(1, 0)}, {1, 2, pairs(1, 0)}, {0, 2, pairs(0, 1)}};

  LiftingSpec L;
  for (std::size_t c = 0; c < 3; ++c) {
    L.homs.push_back({c, std::nullopt, {detail::lin({1, 0})}});
    for (std::size_t end = 0; end < 2; ++end) L.homs.push_back({c, end * 3 + 2, {detail::lin({1, 1})}});
  }
  s.lifting = L;
  for (std::size_t j = 0; j < 3; ++j) {
    auto g = j == 2 ? detail::lin({-1, 0}, prm.s.value()) : detail::lin({0, 0}, prm.s.value());
    s.gluing.push_back({1, 2, j, {g}});
  }
  return s;
}

/// The bundle point of P-bar represented by model point x with fiber
/// coordinate t (in units of 1/m'): phi~(0, -d)[xi_rep, theta, z, t].
inline CylBundlePoint cyl_bundle_point(const CylParams& prm, const SampledSpace& S, std::size_t x, std::int64_t t) {
  const auto& p = S.point(x);
  const auto& A = S.atlas();
  auto node = S.rep_node(p.cls);
  auto ref = A.node(node);
  auto chart = cyl_charts().at(ref.chart);
  auto xi = cyl_sample_xi(chart, ref.sample / 3, ref.sample % 3);
  auto base = cyl_base_point(xi);
  CylRaw r = raw(base);
  r.u = S.grid().point(p.theta);
  r.t = Angle(t, prm.fiber());
  auto bp = canonicalize_bundle(r);
  const auto& d = S.decks()[p.deck];
  std::int64_t n = 0;
  for (const auto& [g, e] : d.letters) n += e;
  return lift_act(prm, {TorusPoint::zero(2), -n}, bp);
}

}  // namespace torlift
