#pragma once

// Liftings of the torus action to a principal Z/m'^k-bundle: chart-wise
// lifting cocycles, gluing data, the assembled lifting on the sampled fiber
// product, the obstruction cocycle sigma and the vanishing test.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "torlift/atlas.hpp"
#include "torlift/cohomology.hpp"
#include "torlift/errors.hpp"
#include "torlift/smith.hpp"
#include "torlift/torus.hpp"

namespace torlift {

struct CheckReport {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<std::string> violations;

  void fail(std::string v) {
    ok = false;
    violations.push_back(std::move(v));
  }
  void merge(const CheckReport& o) {
    ok = ok && o.ok;
    checked += o.checked;
    violations.insert(violations.end(), o.violations.begin(), o.violations.end());
  }
};

namespace detail {

inline std::string vec_str(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return v.size() == 1 ? s : "(" + s + ")";
}

// Zeroes the collapsed coordinates of an angle index.
inline std::size_t canon(const TorusGrid& g, const std::vector<bool>& z, std::size_t theta) {
  auto c = g.coords(theta);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (z[i]) c[i] = 0;
  }
  return g.index(c);
}

}  // namespace detail

/// c_alpha(u, z) for every u in (Z/m)^n and every sample point of one
/// chart: the trivialized form of a lifting phi_alpha(u)(z,t) = (uz, t+c).
class ChartLifting {
 public:
  ChartLifting() = default;
  ChartLifting(std::size_t chart, std::size_t samples, TorusGrid grid, std::int64_t order, std::size_t k)
      : chart_(chart), grid_(grid), order_(order), k_(k),
        values_(samples, std::vector<std::int64_t>(grid.size() * grid.size() * k, 0)) {}

  std::size_t chart() const { return chart_; }
  std::size_t samples() const { return values_.size(); }
  const TorusGrid& grid() const { return grid_; }
  std::int64_t order() const { return order_; }
  std::size_t fiber_rank() const { return k_; }

  std::int64_t get(std::size_t s, std::size_t u, std::size_t theta, std::size_t c = 0) const {
    return values_[s][(u * grid_.size() + theta) * k_ + c];
  }
  void set(std::size_t s, std::size_t u, std::size_t theta, std::size_t c, std::int64_t v) {
    values_[s][(u * grid_.size() + theta) * k_ + c] = detail::mod(v, order_);
  }

  /// c(u, z) = sum_i coef[c][i] u_i, angles read in units of 1/m'.
  void set_linear(std::size_t s, const std::vector<std::vector<std::int64_t>>& coef) {
    for (std::size_t u = 0; u < grid_.size(); ++u) {
      auto v = linear_value(grid_, order_, coef, u);
      for (std::size_t th = 0; th < grid_.size(); ++th) {
        for (std::size_t c = 0; c < k_; ++c) set(s, u, th, c, v[c]);
      }
    }
  }

  /// Angle index u as a vector of fiber units, sum_i coef[c][i] u_i m'/m.
  static std::vector<std::int64_t> linear_value(const TorusGrid& g, std::int64_t order,
                                                const std::vector<std::vector<std::int64_t>>& coef, std::size_t u) {
    auto cu = g.coords(u);
    std::vector<std::int64_t> out;
    for (const auto& row : coef) {
      __int128 acc = 0;
      for (std::size_t i = 0; i < cu.size() && i < row.size(); ++i) acc += static_cast<__int128>(row[i]) * cu[i];
      // (k/m) * m' must be integral for every k that appears with a nonzero coefficient
      acc *= order;
      if (acc % g.order() != 0) throw InputError("linear lifting data needs the torus order to divide the fiber order");
      out.push_back(detail::mod(static_cast<std::int64_t>((acc / g.order()) % order), order));
    }
    return out;
  }

  friend bool operator==(const ChartLifting&, const ChartLifting&) = default;

 private:
  std::size_t chart_ = 0;
  TorusGrid grid_;
  std::int64_t order_ = 2;
  std::size_t k_ = 1;
  std::vector<std::vector<std::int64_t>> values_;
};

/// c(u1+u2, z) = c(u1, u2 z) + c(u2, z) and c(0, z) = 0 on every sample.
inline CheckReport check_chart_lifting(const ChartLifting& L, const AtlasModel& A) {
  CheckReport r;
  const auto& g = L.grid();
  const auto& name = A.nerve().vertices().at(L.chart());
  for (std::size_t s = 0; s < L.samples(); ++s) {
    auto z = A.collapsed(A.node_id(L.chart(), s));
    const auto& label = A.samples(L.chart())[s].label;
    for (std::size_t th = 0; th < g.size(); ++th) {
      if (detail::canon(g, z, th) != th) continue;
      for (std::size_t c = 0; c < L.fiber_rank(); ++c) {
        ++r.checked;
        if (L.get(s, 0, th, c) != 0) r.fail(name + ":" + label + " th=" + g.point(th).str() + ": c(0,z) != 0");
      }
      for (std::size_t u2 = 0; u2 < g.size(); ++u2) {
        auto moved = detail::canon(g, z, g.add(th, u2));
        for (std::size_t u1 = 0; u1 < g.size(); ++u1) {
          auto sum = g.add(u1, u2);
          for (std::size_t c = 0; c < L.fiber_rank(); ++c) {
            ++r.checked;
            auto lhs = L.get(s, sum, th, c);
            auto rhs = detail::mod(L.get(s, u1, moved, c) + L.get(s, u2, th, c), L.order());
            if (lhs != rhs) {
              r.fail(name + ":" + label + " u1=" + g.point(u1).str() + " u2=" + g.point(u2).str() +
                     " th=" + g.point(th).str() + ": c(u1+u2,z)=" + std::to_string(lhs) +
                     " but c(u1,u2z)+c(u2,z)=" + std::to_string(rhs));
            }
          }
        }
      }
    }
  }
  return r;
}

/// The fiber component of the bundle overlap maps: for the oriented edge
/// (a, b), t_a = t_b + g_ab(z_b) on the b-side overlap samples.
class GluingData {
 public:
  GluingData() = default;
  GluingData(TorusGrid grid, std::int64_t order, std::size_t k) : grid_(grid), order_(order), k_(k) {}

  const TorusGrid& grid() const { return grid_; }
  std::int64_t order() const { return order_; }
  std::size_t fiber_rank() const { return k_; }
  const std::map<OrientedEdge, std::map<std::size_t, std::vector<std::int64_t>>>& tables() const { return t_; }

  /// Table indexed by [theta * k + comp] for one b-side sample.
  void set_table(std::size_t a, std::size_t b, std::size_t sample_b, std::vector<std::int64_t> values) {
    if (values.size() != grid_.size() * k_) throw InvariantError("gluing table has wrong size");
    for (auto& v : values) v = detail::mod(v, order_);
    t_[{a, b}][sample_b] = std::move(values);
  }

  /// const + sum_i coef[c][i] theta_i, in fiber units.
  void set_affine(std::size_t a, std::size_t b, std::size_t sample_b, const std::vector<std::int64_t>& constant,
                  const std::vector<std::vector<std::int64_t>>& coef) {
    std::vector<std::int64_t> v(grid_.size() * k_);
    for (std::size_t th = 0; th < grid_.size(); ++th) {
      auto lin = ChartLifting::linear_value(grid_, order_, coef, th);
      for (std::size_t c = 0; c < k_; ++c) v[th * k_ + c] = constant.at(c) + (c < lin.size() ? lin[c] : 0);
    }
    set_table(a, b, sample_b, std::move(v));
  }

  /// g_ab(z_b), derived from g_ba by antisymmetry if only that is stored.
  std::vector<std::int64_t> value(const AtlasModel& A, std::size_t a, std::size_t b, std::size_t sample_b,
                                  std::size_t theta_b) const {
    std::vector<std::int64_t> out(k_, 0);
    if (auto it = t_.find({a, b}); it != t_.end()) {
      if (auto jt = it->second.find(sample_b); jt != it->second.end()) {
        for (std::size_t c = 0; c < k_; ++c) out[c] = jt->second[theta_b * k_ + c];
      }
      return out;
    }
    if (auto it = t_.find({b, a}); it != t_.end()) {
      auto nb = A.node_id(b, sample_b);
      auto sa = A.matched(nb, a);
      if (!sa) return out;
      auto jt = it->second.find(*sa);
      if (jt == it->second.end()) return out;
      auto th_a = detail::canon(grid_, A.collapsed(A.node_id(a, *sa)), grid_.apply(A.cocycle()(a, b), theta_b));
      for (std::size_t c = 0; c < k_; ++c) out[c] = detail::mod(-jt->second[th_a * k_ + c], order_);
    }
    return out;
  }

  friend bool operator==(const GluingData&, const GluingData&) = default;

 private:
  TorusGrid grid_;
  std::int64_t order_ = 2;
  std::size_t k_ = 1;
  std::map<OrientedEdge, std::map<std::size_t, std::vector<std::int64_t>>> t_;
};

/// Antisymmetry where both orientations are stored, additivity on triples.
inline CheckReport check_gluing(const GluingData& G, const AtlasModel& A) {
  CheckReport r;
  const auto& g = G.grid();
  const auto& N = A.nerve();
  for (const auto& [e, per] : G.tables()) {
    auto [a, b] = e;
    if (!N.has_edge(a, b)) {
      r.fail("gluing on " + N.edge_name(a, b) + " which is not a nerve edge");
      continue;
    }
    for (const auto& [sb, tab] : per) {
      auto nb = A.node_id(b, sb);
      if (!A.matched(nb, a)) r.fail("gluing on " + N.edge_name(a, b) + " names " + A.node_name(nb) + " off the overlap");
    }
    if (a > b && G.tables().count({b, a})) {
      for (const auto& [sb, tab] : per) {
        auto nb = A.node_id(b, sb);
        auto sa = A.matched(nb, a);
        if (!sa) continue;
        auto z = A.collapsed(nb);
        for (std::size_t th = 0; th < g.size(); ++th) {
          if (detail::canon(g, z, th) != th) continue;
          ++r.checked;
          auto th_a = detail::canon(g, A.collapsed(A.node_id(a, *sa)), g.apply(A.cocycle()(a, b), th));
          auto v = G.value(A, a, b, sb, th);
          auto w = per.count(sb) ? std::vector<std::int64_t>() : v;
          auto back = G.tables().at({b, a}).count(*sa) ? G.tables().at({b, a}).at(*sa) : std::vector<std::int64_t>();
          for (std::size_t c = 0; c < G.fiber_rank(); ++c) {
            auto bv = back.empty() ? 0 : back[th_a * G.fiber_rank() + c];
            if (detail::mod(v[c] + bv, G.order()) != 0) {
              r.fail("gluing on " + N.edge_name(a, b) + " at " + A.node_name(nb) + " th=" + g.point(th).str() +
                     " is not antisymmetric");
            }
          }
        }
      }
    }
  }
  for (const auto& t : N.triangles()) {
    auto [x, y, w] = t;
    for (std::size_t sw = 0; sw < A.samples(w).size(); ++sw) {
      auto nw = A.node_id(w, sw);
      auto sy = A.matched(nw, y);
      auto sx = A.matched(nw, x);
      if (!sy || !sx) continue;
      auto z = A.collapsed(nw);
      for (std::size_t th = 0; th < g.size(); ++th) {
        if (detail::canon(g, z, th) != th) continue;
        ++r.checked;
        auto th_y = detail::canon(g, A.collapsed(A.node_id(y, *sy)), g.apply(A.cocycle()(y, w), th));
        auto xw = G.value(A, x, w, sw, th);
        auto xy = G.value(A, x, y, *sy, th_y);
        auto yw = G.value(A, y, w, sw, th);
        for (std::size_t c = 0; c < G.fiber_rank(); ++c) {
          if (detail::mod(xy[c] + yw[c] - xw[c], G.order()) != 0) {
            r.fail("gluing is not additive on the triple overlap at " + A.node_name(nw) + " th=" + g.point(th).str());
          }
        }
      }
    }
  }
  return r;
}

/// c_b(u, z) + g_ab(u z) = g_ab(z) + c_a(rho_ab(u), matched z) on the overlap.
inline CheckReport check_equivariant_gluing(const ChartLifting& La, const ChartLifting& Lb, const GluingData& G,
                                            const AtlasModel& A) {
  CheckReport r;
  const auto a = La.chart(), b = Lb.chart();
  const auto& g = La.grid();
  TorusAut rab = A.cocycle()(a, b);
  std::vector<std::size_t> rho_u(g.size());
  for (std::size_t u = 0; u < g.size(); ++u) rho_u[u] = g.apply(rab, u);
  for (std::size_t sb = 0; sb < A.samples(b).size(); ++sb) {
    auto nb = A.node_id(b, sb);
    auto sa = A.matched(nb, a);
    if (!sa) continue;
    auto zb = A.collapsed(nb);
    auto za = A.collapsed(A.node_id(a, *sa));
    for (std::size_t th = 0; th < g.size(); ++th) {
      if (detail::canon(g, zb, th) != th) continue;
      auto th_a = detail::canon(g, za, rho_u[th]);
      auto g0 = G.value(A, a, b, sb, th);
      for (std::size_t u = 0; u < g.size(); ++u) {
        auto moved = detail::canon(g, zb, g.add(th, u));
        auto g1 = G.value(A, a, b, sb, moved);
        for (std::size_t c = 0; c < La.fiber_rank(); ++c) {
          ++r.checked;
          auto lhs = detail::mod(Lb.get(sb, u, th, c) + g1[c], La.order());
          auto rhs = detail::mod(g0[c] + La.get(*sa, rho_u[u], th_a, c), La.order());
          if (lhs != rhs) {
            r.fail("gluing on " + A.nerve().edge_name(a, b) + " at " + A.node_name(nb) + " th=" + g.point(th).str() +
                   " u=" + g.point(u).str() + " is not equivariant: " + std::to_string(lhs) + " vs " +
                   std::to_string(rhs));
          }
        }
      }
    }
  }
  return r;
}

/// A point of the pulled-back bundle: model point and fiber coordinate.
struct BundlePoint {
  std::size_t x = 0;
  std::vector<std::int64_t> t;
  friend bool operator==(const BundlePoint&, const BundlePoint&) = default;
};

/// phi_T(u)(x, t) = (u x, t + shift(u, x)) together with the deck lifting
/// phi_{pi_1}(a)(x, t) = (x a^-1, t) on the sampled fiber product.
class GlobalLifting {
 public:
  GlobalLifting() = default;
  GlobalLifting(std::shared_ptr<const SampledSpace> space, std::shared_ptr<const FiniteModule> module,
                std::vector<std::int64_t> table)
      : S_(std::move(space)), M_(std::move(module)), table_(std::move(table)) {
    if (table_.size() != M_->torus.size() * M_->points * M_->fiber_rank) {
      throw InvariantError("lifting table has wrong size");
    }
  }

  const SampledSpace& space() const { return *S_; }
  std::shared_ptr<const SampledSpace> space_ptr() const { return S_; }
  const FiniteModule& module() const { return *M_; }
  std::shared_ptr<const FiniteModule> module_ptr() const { return M_; }
  const std::vector<std::int64_t>& table() const { return table_; }
  std::int64_t order() const { return M_->fiber_order; }
  std::size_t fiber_rank() const { return M_->fiber_rank; }

  std::int64_t shift(std::size_t u, std::size_t x, std::size_t c = 0) const {
    return table_[(u * M_->points + x) * M_->fiber_rank + c];
  }

  BundlePoint act_torus(std::size_t u, const BundlePoint& p) const {
    BundlePoint q{static_cast<std::size_t>(M_->torus_act(u, p.x)), p.t};
    for (std::size_t c = 0; c < q.t.size(); ++c) q.t[c] = detail::mod(q.t[c] + shift(u, p.x, c), order());
    return q;
  }
  BundlePoint act_torus_inverse(std::size_t u, const BundlePoint& p) const {
    auto nu = M_->torus.neg(u);
    BundlePoint q{static_cast<std::size_t>(M_->torus_act(nu, p.x)), p.t};
    for (std::size_t c = 0; c < q.t.size(); ++c) q.t[c] = detail::mod(q.t[c] - shift(u, q.x, c), order());
    return q;
  }
  std::optional<BundlePoint> act_deck(const GroupWord& a, const BundlePoint& p) const {
    auto y = S_->deck_act(a, p.x);
    if (!y) return std::nullopt;
    return BundlePoint{*y, p.t};
  }

  GlobalLifting with_table(std::vector<std::int64_t> t) const { return GlobalLifting(S_, M_, std::move(t)); }

 private:
  std::shared_ptr<const SampledSpace> S_;
  std::shared_ptr<const FiniteModule> M_;
  std::vector<std::int64_t> table_;
};

/// Chart liftings and gluing, verified and assembled into phi_T.
inline GlobalLifting assemble_global_lifting(std::shared_ptr<const SampledSpace> S,
                                             const std::vector<ChartLifting>& charts, const GluingData& G) {
  const auto& A = S->atlas();
  const auto& N = A.nerve();
  const auto& grid = S->grid();
  const std::int64_t order = G.order();
  const std::size_t k = G.fiber_rank();
  if (charts.size() != N.vertices().size()) throw AssemblyError("one chart lifting per chart is required");
  for (std::size_t c = 0; c < charts.size(); ++c) {
    if (charts[c].chart() != c || charts[c].samples() != A.samples(c).size()) {
      throw AssemblyError("chart lifting " + std::to_string(c) + " does not match its chart");
    }
    if (charts[c].order() != order || charts[c].fiber_rank() != k || charts[c].grid().size() != grid.size()) {
      throw AssemblyError("chart lifting on " + N.vertices()[c] + " has a different fiber group or torus order");
    }
    auto rep = check_chart_lifting(charts[c], A);
    if (!rep.ok) throw AssemblyError("chart lifting is not an action: " + rep.violations.front());
  }
  auto gr = check_gluing(G, A);
  if (!gr.ok) throw AssemblyError("gluing data: " + gr.violations.front());
  for (const auto& [a, b] : N.edges()) {
    auto er = check_equivariant_gluing(charts[a], charts[b], G, A);
    if (!er.ok) throw AssemblyError(er.violations.front());
  }

  // Fiber offsets to the class representative: t_rep = t_node + off(theta_node).
  const std::size_t GS = grid.size();
  std::vector<std::vector<std::int64_t>> off(A.nodes());
  for (const auto& members : A.classes()) {
    off[members[0]].assign(GS * k, 0);
    std::deque<std::size_t> q{members[0]};
    while (!q.empty()) {
      auto nb = q.front();
      q.pop_front();
      auto cb = A.node(nb).chart;
      for (const auto& l : A.links(nb)) {
        auto na = l.node;
        auto ca = A.node(na).chart;
        auto sa = A.node(na).sample;
        auto za = A.collapsed(na);
        auto zb = A.collapsed(nb);
        TorusAut gba = A.cocycle()(cb, ca);
        std::vector<std::int64_t> o(GS * k, 0);
        for (std::size_t th = 0; th < GS; ++th) {
          if (detail::canon(grid, za, th) != th) continue;
          auto th_b = detail::canon(grid, zb, grid.apply(gba, th));
          auto gl = G.value(A, cb, ca, sa, th);
          for (std::size_t c = 0; c < k; ++c) o[th * k + c] = detail::mod(gl[c] + off[nb][th_b * k + c], order);
        }
        if (off[na].empty()) {
          off[na] = std::move(o);
          q.push_back(na);
        } else if (off[na] != o) {
          throw AssemblyError("gluing is inconsistent around " + A.node_name(na));
        }
      }
    }
  }

  auto M = std::make_shared<const FiniteModule>(S->module(order, k));
  const std::size_t P = S->size();
  std::vector<std::int64_t> table(GS * P * k, 0);
  for (std::size_t x = 0; x < P; ++x) {
    const auto& p = S->point(x);
    auto rep = S->rep_node(p.cls);
    auto sample = A.node(rep).sample;
    const auto& L = charts[A.node(rep).chart];
    for (std::size_t u = 0; u < GS; ++u) {
      auto w = S->twisted(p.cls, p.deck, u);
      for (std::size_t c = 0; c < k; ++c) table[(u * P + x) * k + c] = L.get(sample, w, p.theta, c);
    }
  }

  // Every other chart containing the point must give the same lifting.
  const FPGroup& Gp = S->group();
  const auto& D = S->action();
  for (std::size_t node = 0; node < A.nodes(); ++node) {
    auto cls = A.class_of(node);
    auto rep = S->rep_node(cls);
    if (node == rep) continue;
    const auto& f = S->frame(node);
    TorusAut finv = f.aut.inverse();
    GroupWord winv = Gp.inverse(f.word);
    auto chart = A.node(node).chart;
    auto sample = A.node(node).sample;
    auto z = A.collapsed(node);
    const auto& L = charts[chart];
    for (std::size_t x = 0; x < P; ++x) {
      const auto& p = S->point(x);
      if (p.cls != cls) continue;
      GroupWord d_node = Gp.mul(winv, S->decks()[p.deck]);
      TorusAut tw = D.corrections[chart] * D.rho(d_node);
      auto th = detail::canon(grid, z, grid.apply(finv, p.theta));
      for (std::size_t u = 0; u < GS; ++u) {
        auto w = grid.apply(tw, u);
        auto moved = detail::canon(grid, z, grid.add(th, w));
        for (std::size_t c = 0; c < k; ++c) {
          auto via = detail::mod(L.get(sample, w, th, c) + off[node][moved * k + c] - off[node][th * k + c], order);
          if (via != table[(u * P + x) * k + c]) {
            throw AssemblyError("lifting through " + A.node_name(node) + " disagrees with " + A.node_name(rep) +
                                " at " + S->label(x) + " u=" + grid.point(u).str());
          }
        }
      }
    }
  }
  return GlobalLifting(std::move(S), std::move(M), std::move(table));
}

/// The base lifting composed with the gauge transformation tau^-1, so that
/// the untwisted lifting is recovered from it by tau.
inline GlobalLifting twist_lifting(const GlobalLifting& L, const CochainTable& tau) {
  auto t = L.table();
  const auto& M = L.module();
  for (std::size_t u = 0; u < M.torus.size(); ++u) {
    for (std::size_t x = 0; x < M.points; ++x) {
      for (std::size_t c = 0; c < M.fiber_rank; ++c) {
        auto& v = t[(u * M.points + x) * M.fiber_rank + c];
        v = detail::mod(v - tau.get(u, x, c), M.fiber_order);
      }
    }
  }
  return L.with_table(std::move(t));
}

/// sigma(a, ., .) for each pi_1 generator a.
struct SigmaTable {
  std::vector<GroupWord> words;
  std::vector<CochainTable> tables;

  bool is_zero() const {
    return std::all_of(tables.begin(), tables.end(), [](const CochainTable& t) { return t.is_zero(); });
  }
  friend bool operator==(const SigmaTable&, const SigmaTable&) = default;
};

namespace detail {

inline std::optional<std::vector<std::int64_t>> four_maps(const GlobalLifting& L, const GroupWord& a,
                                                          const GroupWord& ainv, std::size_t rho_u, std::size_t u,
                                                          std::size_t x, std::int64_t t0) {
  BundlePoint p{x, std::vector<std::int64_t>(L.fiber_rank(), t0)};
  auto p1 = L.act_deck(a, p);
  if (!p1) return std::nullopt;
  auto p2 = L.act_torus(rho_u, *p1);
  auto p3 = L.act_deck(ainv, p2);
  if (!p3) return std::nullopt;
  auto p4 = L.act_torus_inverse(u, *p3);
  if (p4.x != x) throw InvariantError("the base action does not satisfy phi_T(rho(a)u) phi(a) = phi(a) phi_T(u)");
  for (auto& v : p4.t) v = mod(v - t0, L.order());
  return p4.t;
}

}  // namespace detail

/// sigma(a, u, x): the fiber shift of phi_T(u)^-1 phi(a)^-1 phi_T(rho(a)u) phi(a)
/// over x, read at fiber coordinates 0 and 1.
inline CochainTable compute_sigma(const GlobalLifting& L, const GroupWord& a) {
  const auto& M = L.module();
  const auto& S = L.space();
  const FPGroup& G = S.group();
  GroupWord an = G.normalize(a), ainv = G.inverse(a);
  TorusAut ra = S.action().rho(an);
  CochainTable s(1, M);
  for (std::size_t x = 0; x < M.points; ++x) {
    bool def = S.deck_act(an, x).has_value();
    s.set_defined(x, def);
    if (!def) continue;
    for (std::size_t u = 0; u < M.torus.size(); ++u) {
      auto ru = M.torus.apply(ra, u);
      auto v0 = detail::four_maps(L, an, ainv, ru, u, x, 0);
      auto v1 = detail::four_maps(L, an, ainv, ru, u, x, 1);
      if (!v0 || !v1) throw InvariantError("deck action left the window on a defined entry");
      if (*v0 != *v1) throw InvariantError("sigma depends on the fiber coordinate at " + M.point_labels[x]);
      for (std::size_t c = 0; c < M.fiber_rank; ++c) s.set(u, x, c, (*v0)[c]);
    }
  }
  return s;
}

inline SigmaTable compute_sigma(const GlobalLifting& L) {
  SigmaTable t;
  const FPGroup& G = L.space().group();
  for (std::size_t g = 0; g < G.rank(); ++g) {
    t.words.push_back(G.generator(g));
    t.tables.push_back(compute_sigma(L, G.generator(g)));
  }
  return t;
}

/// The coboundary table tau(u,x) - tau(rho(a)u, a x) for generator g.
inline CochainTable coboundary_table(const CochainTable& tau, const FiniteModule& M, std::size_t g) {
  CochainTable s(1, M);
  for (std::size_t x = 0; x < M.points; ++x) {
    auto y = M.deck_act(g, x);
    s.set_defined(x, y != kOutOfWindow);
    if (y == kOutOfWindow) continue;
    for (std::size_t u = 0; u < M.torus.size(); ++u) {
      auto ru = M.rho_act(g, u);
      for (std::size_t c = 0; c < M.fiber_rank; ++c) {
        s.set(u, x, c, tau.get(u, x, c) - tau.get(ru, static_cast<std::size_t>(y), c));
      }
    }
  }
  return s;
}

enum class Verdict { vanishing_at_scale, certified_nonvanishing, indeterminate };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::vanishing_at_scale: return "vanishing-at-scale";
    case Verdict::certified_nonvanishing: return "certified-nonvanishing";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

struct ObstructionCertificate {
  std::size_t component = 0;
  SparseSystem system;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::int64_t> y;
};

struct ObstructionReport {
  Verdict verdict = Verdict::indeterminate;
  std::optional<CochainTable> witness;
  std::optional<ObstructionCertificate> certificate;
  std::int64_t torus_order = 0;
  std::int64_t fiber_order = 0;
  std::optional<std::int64_t> window;
  Rational threshold{1, 4};
  std::size_t dropped = 0;
  std::size_t total = 0;
  std::size_t blocks = 0;
  std::size_t unknowns = 0;
  std::size_t constraints = 0;

  Rational dropped_ratio() const { return total == 0 ? Rational(0) : Rational(static_cast<std::int64_t>(dropped),
                                                                               static_cast<std::int64_t>(total)); }
};

/// tau is a torus 1-cocycle and sigma(a,u,x) = tau(u,x) - tau(rho(a)u, a x)
/// wherever sigma is defined.
inline bool verify_witness(const CochainTable& tau, const SigmaTable& sigma, const FiniteModule& M) {
  if (!is_cocycle(tau, M).ok) return false;
  for (std::size_t g = 0; g < sigma.tables.size(); ++g) {
    if (!coboundary_table(tau, M, g).agrees_with(sigma.tables[g])) return false;
  }
  return true;
}

inline bool verify_certificate(const ObstructionCertificate& c) { return verify_certificate(c.system, c.y); }

namespace detail {

struct Blocks {
  std::vector<std::size_t> of;
  std::vector<std::vector<std::size_t>> members;
};

// Orbits of the group generated by the torus and deck actions.
inline Blocks point_blocks(const FiniteModule& M) {
  std::vector<std::size_t> parent(M.points);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto join = [&](std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (std::size_t i = 0; i < M.torus.rank(); ++i) {
    auto e = M.torus.generator(i);
    for (std::size_t x = 0; x < M.points; ++x) join(x, static_cast<std::size_t>(M.torus_act(e, x)));
  }
  for (std::size_t g = 0; g < M.generators(); ++g) {
    for (std::size_t x = 0; x < M.points; ++x) {
      auto y = M.deck_act(g, x);
      if (y != kOutOfWindow) join(x, static_cast<std::size_t>(y));
    }
  }
  Blocks b;
  b.of.assign(M.points, 0);
  std::map<std::size_t, std::size_t> root;
  for (std::size_t x = 0; x < M.points; ++x) {
    auto [it, fresh] = root.emplace(find(x), b.members.size());
    if (fresh) b.members.emplace_back();
    b.of[x] = it->second;
    b.members[it->second].push_back(x);
  }
  return b;
}

// tau(v, y) as a sum of generator values tau(e_j, w y) along a path to v.
inline std::vector<std::pair<std::size_t, std::size_t>> generator_path(const FiniteModule& M, std::size_t v,
                                                                       std::size_t y) {
  std::vector<std::pair<std::size_t, std::size_t>> terms;  // (j, point)
  auto cv = M.torus.coords(v);
  std::size_t w = 0;
  for (std::size_t j = 0; j < cv.size(); ++j) {
    auto e = M.torus.generator(j);
    for (std::int64_t r = 0; r < cv[j]; ++r) {
      terms.emplace_back(j, static_cast<std::size_t>(M.torus_act(w, y)));
      w = M.torus.add(w, e);
    }
  }
  return terms;
}

// Full cocycle from its generator values: tau[(j * P + x) * k + c].
inline CochainTable expand_generators(const FiniteModule& M, const std::vector<std::int64_t>& gen) {
  CochainTable tau(1, M);
  const std::size_t P = M.points, k = M.fiber_rank;
  for (std::size_t x = 0; x < P; ++x) {
    for (std::size_t v = 0; v < M.torus.size(); ++v) {
      for (auto [j, y] : generator_path(M, v, x)) {
        for (std::size_t c = 0; c < k; ++c) tau.add(v, x, c, gen[(j * P + y) * k + c]);
      }
    }
  }
  return tau;
}

}  // namespace detail

/// Decides sigma = delta-style coboundary of some torus cocycle tau over
/// Z/m', one block of the point set and one fiber component at a time.
inline ObstructionReport test_vanishing(const SigmaTable& sigma, const FiniteModule& M,
                                        Rational threshold = Rational(1, 4)) {
  if (sigma.tables.size() != M.generators()) throw InvalidSigma("sigma needs one table per pi_1 generator");
  for (std::size_t g = 0; g < sigma.tables.size(); ++g) {
    const auto& s = sigma.tables[g];
    if (s.degree() != 1 || s.points() != M.points || s.fiber_rank() != M.fiber_rank) {
      throw InvalidSigma("sigma table has the wrong shape");
    }
    for (std::size_t x = 0; x < M.points; ++x) {
      if (s.defined(x) != (M.deck_act(g, x) != kOutOfWindow)) {
        throw InvalidSigma("sigma is defined exactly where the deck action stays in the window");
      }
    }
    auto cc = is_cocycle(s, M);
    if (!cc.ok) {
      const auto& v = cc.violations.front();
      throw InvalidSigma("sigma(" + M.generator_names[g] + ") is not a torus cocycle at u1=" +
                         M.torus.point(v.args[0]).str() + " u2=" + M.torus.point(v.args[1]).str() + " x=" +
                         M.point_labels[v.point]);
    }
  }

  ObstructionReport rep;
  rep.torus_order = M.torus.order();
  rep.fiber_order = M.fiber_order;
  rep.threshold = threshold;
  for (std::size_t g = 0; g < M.generators(); ++g) {
    for (std::size_t x = 0; x < M.points; ++x) {
      ++rep.total;
      if (M.deck_act(g, x) == kOutOfWindow) ++rep.dropped;
    }
  }

  const std::size_t n = M.torus.rank(), P = M.points, k = M.fiber_rank;
  const std::int64_t m = M.torus.order(), N = M.fiber_order;
  auto blocks = detail::point_blocks(M);
  rep.blocks = blocks.members.size();
  std::vector<std::int64_t> gen(n * P * k, 0);

  for (const auto& B : blocks.members) {
    std::map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < B.size(); ++i) local[B[i]] = i;
    auto var = [&](std::size_t j, std::size_t x) { return local.at(x) * n + j; };

    for (std::size_t c = 0; c < k; ++c) {
      SparseSystem sys;
      sys.cols = B.size() * n;
      sys.modulus = N;
      std::vector<std::string> labels;
      const bool labelled = true;

      for (std::size_t j = 0; j < n; ++j) {
        auto e = M.torus.generator(j);
        std::vector<bool> done(B.size(), false);
        for (auto x : B) {
          if (done[local[x]]) continue;
          std::vector<std::size_t> cyc;
          for (std::size_t y = x; !done[local[y]]; y = static_cast<std::size_t>(M.torus_act(e, y))) {
            done[local[y]] = true;
            cyc.push_back(y);
          }
          std::map<std::size_t, std::int64_t> row;
          auto coef = m / static_cast<std::int64_t>(cyc.size());
          for (auto y : cyc) row[var(j, y)] += coef;
          sys.add_row(row, 0);
          if (labelled) labels.push_back("relator e" + std::to_string(j + 1) + "^" + std::to_string(m) + " at " + M.point_labels[x]);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          auto ei = M.torus.generator(i), ej = M.torus.generator(j);
          for (auto x : B) {
            std::map<std::size_t, std::int64_t> row;
            row[var(i, static_cast<std::size_t>(M.torus_act(ej, x)))] += 1;
            row[var(j, x)] += 1;
            row[var(j, static_cast<std::size_t>(M.torus_act(ei, x)))] -= 1;
            row[var(i, x)] -= 1;
            sys.add_row(row, 0);
            if (labelled) {
              labels.push_back("commutator e" + std::to_string(i + 1) + " e" + std::to_string(j + 1) + " at " +
                               M.point_labels[x]);
            }
          }
        }
      }
      for (std::size_t g = 0; g < M.generators(); ++g) {
        for (auto x : B) {
          auto y = M.deck_act(g, x);
          if (y == kOutOfWindow) continue;
          for (std::size_t i = 0; i < n; ++i) {
            auto e = M.torus.generator(i);
            std::map<std::size_t, std::int64_t> row;
            row[var(i, x)] += 1;
            for (auto [j, z] : detail::generator_path(M, M.rho_act(g, e), static_cast<std::size_t>(y))) {
              row[var(j, z)] -= 1;
            }
            sys.add_row(row, sigma.tables[g].get(e, x, c));
            if (labelled) {
              labels.push_back("sigma(" + M.generator_names[g] + ", e" + std::to_string(i + 1) + ") at " +
                               M.point_labels[x]);
            }
          }
        }
      }
      rep.unknowns += sys.cols;
      rep.constraints += sys.rows.size();

      auto res = sparse_solve(sys);
      if (auto* cert = std::get_if<SmithCertificate>(&res)) {
        ObstructionCertificate oc;
        oc.component = c;
        oc.system = std::move(sys);
        oc.row_labels = std::move(labels);
        for (auto x : B) {
          for (std::size_t j = 0; j < n; ++j) oc.col_labels.push_back("tau(e" + std::to_string(j + 1) + ", " + M.point_labels[x] + ")");
        }
        oc.y = cert->y;
        rep.verdict = Verdict::certified_nonvanishing;
        rep.certificate = std::move(oc);
        return rep;
      }
      const auto& sol = std::get<SmithSolution>(res).x;
      for (auto x : B) {
        for (std::size_t j = 0; j < n; ++j) gen[(j * P + x) * k + c] = sol[var(j, x)];
      }
    }
  }

  auto tau = detail::expand_generators(M, gen);
  if (!verify_witness(tau, sigma, M)) {
    throw InvariantError("solver witness failed independent re-verification");
  }
  rep.witness = std::move(tau);
  bool too_many_dropped = static_cast<__int128>(rep.dropped) * threshold.denominator() >
                          static_cast<__int128>(threshold.numerator()) * static_cast<__int128>(rep.total);
  rep.verdict = too_many_dropped ? Verdict::indeterminate : Verdict::vanishing_at_scale;
  return rep;
}

/// phi'_T(u)(p) = phi_T(u)(p) . tau(u, x), re-verified to commute with the
/// deck lifting and to be a homomorphism on every in-window sample.
inline GlobalLifting reconstruct_lifting(const GlobalLifting& L, const CochainTable& tau) {
  const auto& M = L.module();
  auto t = L.table();
  for (std::size_t u = 0; u < M.torus.size(); ++u) {
    for (std::size_t x = 0; x < M.points; ++x) {
      for (std::size_t c = 0; c < M.fiber_rank; ++c) {
        auto& v = t[(u * M.points + x) * M.fiber_rank + c];
        v = detail::mod(v + tau.get(u, x, c), M.fiber_order);
      }
    }
  }
  GlobalLifting out = L.with_table(std::move(t));
  CochainTable as_cochain(1, M);
  for (std::size_t u = 0; u < M.torus.size(); ++u) {
    for (std::size_t x = 0; x < M.points; ++x) {
      for (std::size_t c = 0; c < M.fiber_rank; ++c) as_cochain.set(u, x, c, out.shift(u, x, c));
    }
  }
  auto hom = is_cocycle(as_cochain, M);
  if (!hom.ok) throw ReconstructionError("reconstructed lifting is not a homomorphism");
  auto s = compute_sigma(out);
  if (!s.is_zero()) throw ReconstructionError("reconstructed lifting does not commute with the deck action");
  return out;
}

}  // namespace torlift
