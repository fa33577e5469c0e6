#pragma once

// Combinatorial atlas of a local torus action: per-chart base samples,
// overlap identifications between charts, the action of T^n x_rho pi_1 on
// the fiber product, and the finite sampled model of that fiber product.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "torlift/cech.hpp"
#include "torlift/cohomology.hpp"
#include "torlift/errors.hpp"
#include "torlift/group.hpp"
#include "torlift/torus.hpp"

namespace torlift {

/// A base point of a chart: a label and |z_i|^2 of its orbit. The full
/// sample set of the chart is the torus orbit of each base point.
struct ChartSample {
  std::string label;
  std::vector<Rational> r2;
  friend bool operator==(const ChartSample&, const ChartSample&) = default;
};

/// Samples matched across the edge (a, b): pairs (sample of a, sample of b).
struct OverlapDecl {
  std::size_t a = 0, b = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  friend bool operator==(const OverlapDecl&, const OverlapDecl&) = default;
};

struct SampleRef {
  std::size_t chart = 0, sample = 0;
  friend bool operator==(const SampleRef&, const SampleRef&) = default;
  friend auto operator<=>(const SampleRef&, const SampleRef&) = default;
};

class AtlasModel {
 public:
  struct Link {
    std::size_t node;      // flattened (chart, sample) on the other side
    std::size_t overlap;   // index into overlaps()
  };

  AtlasModel() = default;
  AtlasModel(Nerve N, GLCocycle g, std::vector<std::vector<ChartSample>> samples, std::vector<OverlapDecl> overlaps)
      : nerve_(std::move(N)), g_(std::move(g)), samples_(std::move(samples)), overlaps_(std::move(overlaps)) {
    validate();
    build_classes();
  }

  const Nerve& nerve() const { return nerve_; }
  const GLCocycle& cocycle() const { return g_; }
  std::size_t rank() const { return g_.rank(); }
  const std::vector<ChartSample>& samples(std::size_t chart) const { return samples_.at(chart); }
  const std::vector<std::vector<ChartSample>>& all_samples() const { return samples_; }
  const std::vector<OverlapDecl>& overlaps() const { return overlaps_; }

  std::size_t nodes() const { return refs_.size(); }
  std::size_t node_id(std::size_t chart, std::size_t sample) const { return offset_.at(chart) + sample; }
  SampleRef node(std::size_t id) const { return refs_.at(id); }
  const ChartSample& sample_of(std::size_t id) const { return samples_[refs_[id].chart][refs_[id].sample]; }
  std::string node_name(std::size_t id) const {
    return nerve_.vertices()[refs_[id].chart] + ":" + sample_of(id).label;
  }
  const std::vector<Link>& links(std::size_t id) const { return links_.at(id); }

  std::size_t class_of(std::size_t id) const { return class_.at(id); }
  /// Base classes (points of B); members sorted, the first is the representative.
  const std::vector<std::vector<std::size_t>>& classes() const { return members_; }

  /// Coordinates that vanish on the sample: the collapsed circle factors.
  std::vector<bool> collapsed(std::size_t id) const {
    std::vector<bool> z;
    for (const auto& r : sample_of(id).r2) z.push_back(r == 0);
    return z;
  }

  /// The sample of `chart` matched with node `id` across their edge.
  std::optional<std::size_t> matched(std::size_t id, std::size_t chart) const {
    for (const auto& l : links_[id]) {
      if (refs_[l.node].chart == chart) return refs_[l.node].sample;
    }
    return std::nullopt;
  }

  friend bool operator==(const AtlasModel& a, const AtlasModel& b) {
    return a.nerve_.vertices() == b.nerve_.vertices() && a.nerve_.edges() == b.nerve_.edges() &&
           a.nerve_.triangles() == b.nerve_.triangles() && a.g_ == b.g_ && a.samples_ == b.samples_ &&
           a.overlaps_ == b.overlaps_;
  }

 private:
  void validate() {
    const auto nv = nerve_.vertices().size();
    if (samples_.size() != nv) throw InvariantError("one sample list per chart is required");
    for (std::size_t c = 0; c < nv; ++c) {
      for (std::size_t i = 0; i < samples_[c].size(); ++i) {
        const auto& s = samples_[c][i];
        if (s.r2.size() != rank()) {
          throw DimensionError("sample " + nerve_.vertices()[c] + ":" + s.label + " has wrong dimension");
        }
        for (const auto& r : s.r2) {
          if (r < 0) throw InvariantError("sample " + s.label + " has a negative |z|^2");
        }
        for (std::size_t j = 0; j < i; ++j) {
          if (samples_[c][j].label == s.label) {
            throw InvariantError("duplicate sample label " + s.label + " in chart " + nerve_.vertices()[c]);
          }
        }
      }
    }
    for (const auto& o : overlaps_) {
      if (o.a >= nv || o.b >= nv || !nerve_.has_edge(o.a, o.b)) {
        throw InvariantError("overlap declared on a pair of charts that is not a nerve edge");
      }
      std::vector<bool> used_a(samples_[o.a].size(), false), used_b(samples_[o.b].size(), false);
      TorusAut gab = g_(o.a, o.b);
      for (auto [i, j] : o.pairs) {
        if (i >= used_a.size() || j >= used_b.size()) throw InvariantError("overlap pair names an unknown sample");
        if (used_a[i] || used_b[j]) {
          throw InvariantError("overlap identification on " + nerve_.edge_name(o.a, o.b) + " is not a bijection");
        }
        used_a[i] = used_b[j] = true;
        check_strata(samples_[o.a][i], samples_[o.b][j], gab, nerve_.edge_name(o.a, o.b));
      }
    }
  }

  // g(a,b) must carry the collapsed subtorus at the b-sample onto the one at
  // the a-sample, or the overlap map is not defined on the orbit.
  static void check_strata(const ChartSample& sa, const ChartSample& sb, const TorusAut& gab, const std::string& edge) {
    const std::size_t n = gab.dim();
    std::vector<std::size_t> za, zb;
    for (std::size_t i = 0; i < n; ++i) {
      if (sa.r2[i] == 0) za.push_back(i);
      if (sb.r2[i] == 0) zb.push_back(i);
    }
    auto fail = [&] {
      throw InvariantError("overlap " + edge + " matches " + sa.label + " with " + sb.label +
                           " but the cocycle value does not map one stratum onto the other");
    };
    if (za.size() != zb.size()) fail();
    for (auto j : zb) {
      for (std::size_t i = 0; i < n; ++i) {
        if (gab(i, j) != 0 && std::find(za.begin(), za.end(), i) == za.end()) fail();
      }
    }
    std::vector<std::int64_t> block;
    for (auto i : za) {
      for (auto j : zb) block.push_back(gab(i, j));
    }
    if (!za.empty()) {
      auto d = detail::determinant(za.size(), block);
      if (d != 1 && d != -1) fail();
    }
  }

  void build_classes() {
    const auto nv = nerve_.vertices().size();
    offset_.assign(nv, 0);
    refs_.clear();
    for (std::size_t c = 0; c < nv; ++c) {
      offset_[c] = refs_.size();
      for (std::size_t i = 0; i < samples_[c].size(); ++i) refs_.push_back({c, i});
    }
    links_.assign(refs_.size(), {});
    std::vector<std::size_t> parent(refs_.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t k = 0; k < overlaps_.size(); ++k) {
      const auto& o = overlaps_[k];
      for (auto [i, j] : o.pairs) {
        auto x = node_id(o.a, i), y = node_id(o.b, j);
        for (const auto& l : links_[x]) {
          if (refs_[l.node].chart == o.b) {
            throw InvariantError("sample " + node_name(x) + " is matched twice into chart " + nerve_.vertices()[o.b]);
          }
        }
        links_[x].push_back({y, k});
        links_[y].push_back({x, k});
        auto rx = find(x), ry = find(y);
        if (rx != ry) parent[std::max(rx, ry)] = std::min(rx, ry);
      }
    }
    class_.assign(refs_.size(), 0);
    members_.clear();
    std::map<std::size_t, std::size_t> root_to_class;
    for (std::size_t x = 0; x < refs_.size(); ++x) {
      auto r = find(x);
      auto [it, fresh] = root_to_class.emplace(r, members_.size());
      if (fresh) members_.emplace_back();
      class_[x] = it->second;
      members_[it->second].push_back(x);
    }
    for (const auto& m : members_) {
      for (std::size_t i = 1; i < m.size(); ++i) {
        if (refs_[m[i]].chart == refs_[m[0]].chart) {
          throw InvariantError("samples " + node_name(m[0]) + " and " + node_name(m[i]) +
                               " of one chart are identified through overlaps");
        }
      }
    }
  }

  Nerve nerve_;
  GLCocycle g_;
  std::vector<std::vector<ChartSample>> samples_;
  std::vector<OverlapDecl> overlaps_;
  std::vector<std::size_t> offset_;
  std::vector<SampleRef> refs_;
  std::vector<std::vector<Link>> links_;
  std::vector<std::size_t> class_;
  std::vector<std::vector<std::size_t>> members_;
};

/// rho, the deck transitions a_ab and the corrections rho_a together.
struct ActionData {
  Representation rho;
  EdgeTransitions transitions;
  ChartCorrections corrections;
  std::size_t basepoint = 0;
};

inline ActionData make_action_data(const AtlasModel& A, const Representation& rho, const EdgeTransitions& a,
                                   std::size_t basepoint) {
  if (rho.rank() != A.rank()) throw DimensionError("representation rank differs from the atlas rank");
  return {rho, a, chart_corrections(A.nerve(), A.cocycle(), rho, a, basepoint), basepoint};
}

inline ActionData make_action_data(const AtlasModel& A, const Representation& rho) {
  auto base = A.nerve().default_basepoint();
  auto rep = holonomy(A.nerve(), A.cocycle(), base);
  return make_action_data(A, rho, EdgeTransitions::standard(A.nerve(), rep, rho.group()), base);
}

/// rho' = f rho f^-1 is related to the same cocycle through rho_a f^-1.
inline ChartCorrections transport_corrections(const TorusAut& f, const ChartCorrections& c) {
  ChartCorrections r;
  TorusAut finv = f.inverse();
  for (const auto& m : c.rho_alpha) r.rho_alpha.push_back(m * finv);
  return r;
}

/// (b, x) in the fiber product, written in one chart: the deck word a_alpha
/// of b and the chart coordinate of x over the given base sample.
struct FiberedPoint {
  std::size_t chart = 0;
  std::size_t sample = 0;
  GroupWord deck;
  PolarPoint x;
  friend bool operator==(const FiberedPoint&, const FiberedPoint&) = default;
};

/// (u,a) . (b,x) = (b a^-1, rho_alpha rho(a_alpha a^-1)(u) . x) in chart alpha.
inline FiberedPoint act_fiber_product(const SemidirectElement& g, const FiberedPoint& pt, const AtlasModel& A,
                                      const Representation& rho, const ChartCorrections& corr,
                                      std::optional<std::int64_t> window = std::nullopt) {
  const auto& s = A.samples(pt.chart).at(pt.sample);
  if (pt.x.r2() != s.r2) throw InvariantError("point does not lie over sample " + s.label);
  const FPGroup& G = rho.group();
  FiberedPoint out = pt;
  out.deck = G.mul(G.normalize(pt.deck), G.inverse(g.a));
  if (window && !G.in_window(out.deck, *window)) {
    throw OutOfModel("deck word " + G.str(out.deck) + " leaves the window");
  }
  out.x = standard_act(apply_aut(corr[pt.chart] * rho(out.deck), g.u), pt.x);
  return out;
}

/// The same point written in chart `beta`, across the declared overlap.
inline FiberedPoint change_chart(const FiberedPoint& pt, std::size_t beta, const AtlasModel& A,
                                 const EdgeTransitions& a) {
  if (beta == pt.chart) return pt;
  auto j = A.matched(A.node_id(pt.chart, pt.sample), beta);
  if (!j) throw OutOfModel("point is not on a declared overlap with chart " + A.nerve().vertices().at(beta));
  const FPGroup& G = a.group();
  FiberedPoint out;
  out.chart = beta;
  out.sample = *j;
  out.deck = G.mul(a(beta, pt.chart), pt.deck);
  out.x = PolarPoint::canonical(A.samples(beta)[*j].r2, apply_aut(A.cocycle()(beta, pt.chart), pt.x.phases()));
  return out;
}

/// A point of the sampled fiber product: base class, deck word (index into
/// the window ball) and canonical angle index in the representative chart.
struct ModelPoint {
  std::size_t cls = 0;
  std::size_t deck = 0;
  std::size_t theta = 0;
};

/// The finite model of pi^*X: every base class, every deck word within the
/// window and every angle in (Z/m)^n, written in the class representative's
/// chart. Torus and deck actions are tabulated.
class SampledSpace {
 public:
  /// d_rep = word . d_node and theta_rep = aut . theta_node.
  struct NodeFrame {
    GroupWord word;
    TorusAut aut;
  };

  SampledSpace(AtlasModel atlas, ActionData data, std::int64_t m, std::int64_t window)
      : A_(std::move(atlas)), D_(std::move(data)), grid_(A_.rank(), m), window_(window) {
    if (window_ < 0) throw InputError("window must be >= 0");
    const FPGroup& G = D_.rho.group();
    ball_ = G.ball(window_);
    for (std::size_t i = 0; i < ball_.size(); ++i) deck_index_[ball_[i]] = i;
    build_frames();
    build_points();
  }

  const AtlasModel& atlas() const { return A_; }
  const ActionData& action() const { return D_; }
  const FPGroup& group() const { return D_.rho.group(); }
  const TorusGrid& grid() const { return grid_; }
  std::int64_t window() const { return window_; }
  const std::vector<GroupWord>& decks() const { return ball_; }
  std::size_t size() const { return points_.size(); }
  const ModelPoint& point(std::size_t x) const { return points_[x]; }
  std::size_t classes() const { return A_.classes().size(); }
  std::size_t rep_node(std::size_t cls) const { return A_.classes()[cls][0]; }
  const NodeFrame& frame(std::size_t node) const { return frames_.at(node); }

  /// Zeroes the collapsed coordinates of an angle index for node `node`.
  std::size_t canon(std::size_t node, std::size_t theta) const {
    auto c = grid_.coords(theta);
    const auto& z = collapsed_[node];
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (z[i]) c[i] = 0;
    }
    return grid_.index(c);
  }

  std::optional<std::size_t> index(std::size_t cls, std::size_t deck, std::size_t theta) const {
    auto v = index_[cls][deck * grid_.size() + theta];
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
  }
  std::optional<std::size_t> deck_index(const GroupWord& w) const {
    auto it = deck_index_.find(group().normalize(w));
    if (it == deck_index_.end()) return std::nullopt;
    return it->second;
  }

  /// rho_alpha rho(d)(u) as an angle index, for the representative chart.
  std::size_t twisted(std::size_t cls, std::size_t deck, std::size_t u) const {
    return twist_[cls][deck][u];
  }

  std::size_t torus_act(std::size_t u, std::size_t x) const {
    const auto& p = points_[x];
    auto w = twisted(p.cls, p.deck, u);
    auto th = canon(rep_node(p.cls), grid_.add(p.theta, w));
    return *index(p.cls, p.deck, th);
  }

  /// phi_{pi_1}(a): deck d -> d a^-1; nullopt when it leaves the window.
  std::optional<std::size_t> deck_act(const GroupWord& a, std::size_t x) const {
    const auto& p = points_[x];
    const FPGroup& G = group();
    auto d = deck_index(G.mul(ball_[p.deck], G.inverse(a)));
    if (!d) return std::nullopt;
    return index(p.cls, *d, p.theta);
  }

  /// The point in the representative chart.
  FiberedPoint fibered(std::size_t x) const {
    const auto& p = points_[x];
    auto ref = A_.node(rep_node(p.cls));
    return {ref.chart, ref.sample, ball_[p.deck],
            PolarPoint::canonical(A_.sample_of(rep_node(p.cls)).r2, grid_.point(p.theta))};
  }

  /// Index of a fibered point written in any chart of its class.
  std::optional<std::size_t> locate(const FiberedPoint& pt) const {
    auto node = A_.node_id(pt.chart, pt.sample);
    if (pt.x.r2() != A_.sample_of(node).r2) throw InvariantError("point does not lie over its sample");
    auto th = grid_.locate(pt.x.phases());
    if (!th) return std::nullopt;
    auto cls = A_.class_of(node);
    const auto& f = frames_[node];
    auto d = deck_index(group().mul(f.word, pt.deck));
    if (!d) return std::nullopt;
    auto theta = canon(rep_node(cls), grid_.apply(f.aut, *th));
    return index(cls, *d, theta);
  }

  std::string label(std::size_t x) const {
    const auto& p = points_[x];
    return A_.node_name(rep_node(p.cls)) + " d=" + group().str(ball_[p.deck]) + " th=" + grid_.point(p.theta).str();
  }

  FiniteModule module(std::int64_t fiber_order, std::size_t fiber_rank) const {
    FiniteModule M;
    M.torus = grid_;
    M.points = size();
    M.fiber_order = fiber_order;
    M.fiber_rank = fiber_rank;
    M.torus_table.resize(grid_.size() * size());
    for (std::size_t u = 0; u < grid_.size(); ++u) {
      for (std::size_t x = 0; x < size(); ++x) M.torus_table[u * size() + x] = static_cast<std::int32_t>(torus_act(u, x));
    }
    const FPGroup& G = group();
    for (std::size_t g = 0; g < G.rank(); ++g) {
      M.generator_auts.push_back(D_.rho.images()[g]);
      M.generator_names.push_back(G.generator_names()[g]);
      std::vector<std::int32_t> t(size());
      for (std::size_t x = 0; x < size(); ++x) {
        auto y = deck_act(G.generator(g), x);
        t[x] = y ? static_cast<std::int32_t>(*y) : kOutOfWindow;
      }
      M.generator_table.push_back(std::move(t));
    }
    for (std::size_t x = 0; x < size(); ++x) M.point_labels.push_back(label(x));
    M.finalize();
    return M;
  }

 private:
  void build_frames() {
    const auto& N = A_.nerve();
    const FPGroup& G = group();
    frames_.assign(A_.nodes(), {G.identity(), TorusAut::identity(A_.rank())});
    collapsed_.clear();
    for (std::size_t v = 0; v < A_.nodes(); ++v) collapsed_.push_back(A_.collapsed(v));
    std::vector<bool> seen(A_.nodes(), false);
    for (const auto& members : A_.classes()) {
      std::deque<std::size_t> q{members[0]};
      seen[members[0]] = true;
      while (!q.empty()) {
        auto b = q.front();
        q.pop_front();
        auto cb = A_.node(b).chart;
        for (const auto& l : A_.links(b)) {
          auto ca = A_.node(l.node).chart;
          // d_b = a(b,a) d_a, theta_b = g(b,a) theta_a
          NodeFrame f{G.mul(frames_[b].word, D_.transitions(cb, ca)), frames_[b].aut * A_.cocycle()(cb, ca)};
          if (!seen[l.node]) {
            seen[l.node] = true;
            frames_[l.node] = std::move(f);
            q.push_back(l.node);
          } else if (f.word != frames_[l.node].word || !same_on_stratum(f.aut, frames_[l.node].aut, l.node)) {
            throw InvariantError("overlap identifications around " + A_.node_name(l.node) + " on " +
                                 N.edge_name(cb, ca) + " are inconsistent");
          }
        }
      }
    }
  }

  // Two frames agree when they send every canonical angle to the same point.
  bool same_on_stratum(const TorusAut& f1, const TorusAut& f2, std::size_t node) const {
    auto rep = rep_node(A_.class_of(node));
    for (std::size_t i = 0; i < A_.rank(); ++i) {
      if (collapsed_[node][i]) continue;
      for (std::size_t r = 0; r < A_.rank(); ++r) {
        if (!collapsed_[rep][r] && f1(r, i) != f2(r, i)) return false;
      }
    }
    return true;
  }

  void build_points() {
    const std::size_t G = grid_.size();
    index_.assign(classes(), {});
    twist_.assign(classes(), {});
    for (std::size_t c = 0; c < classes(); ++c) {
      auto rep = rep_node(c);
      auto chart = A_.node(rep).chart;
      index_[c].assign(ball_.size() * G, -1);
      for (std::size_t d = 0; d < ball_.size(); ++d) {
        TorusAut w = D_.corrections[chart] * D_.rho(ball_[d]);
        std::vector<std::size_t> t(G);
        for (std::size_t u = 0; u < G; ++u) t[u] = grid_.apply(w, u);
        twist_[c].push_back(std::move(t));
        for (std::size_t th = 0; th < G; ++th) {
          if (canon(rep, th) != th) continue;
          index_[c][d * G + th] = static_cast<std::int64_t>(points_.size());
          points_.push_back({c, d, th});
        }
      }
    }
  }

  AtlasModel A_;
  ActionData D_;
  TorusGrid grid_;
  std::int64_t window_;
  std::vector<GroupWord> ball_;
  std::map<GroupWord, std::size_t> deck_index_;
  std::vector<NodeFrame> frames_;
  std::vector<std::vector<bool>> collapsed_;
  std::vector<ModelPoint> points_;
  std::vector<std::vector<std::int64_t>> index_;
  std::vector<std::vector<std::vector<std::size_t>>> twist_;
};

}  // namespace torlift
