#pragma once

// Nerves of covers, Aut(T^n)-valued Cech 1-cocycles, the holonomy of a
// cocycle around the loops of its nerve, and chart corrections relating a
// cocycle to a representation of the fundamental group.

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "torlift/errors.hpp"
#include "torlift/group.hpp"
#include "torlift/torus.hpp"

namespace torlift {

using OrientedEdge = std::pair<std::size_t, std::size_t>;

class Nerve {
 public:
  Nerve() = default;
  Nerve(std::vector<std::string> vertices, std::vector<OrientedEdge> edges,
        std::vector<std::array<std::size_t, 3>> triangles)
      : vertices_(std::move(vertices)), edges_(std::move(edges)), triangles_(std::move(triangles)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
        if (vertices_[i] == vertices_[j]) throw InvariantError("duplicate vertex '" + vertices_[i] + "'");
      }
    }
    for (const auto& [a, b] : edges_) {
      if (a >= vertices_.size() || b >= vertices_.size()) throw InvariantError("edge endpoint out of range");
      if (a == b) throw InvariantError("nerve edges must not be self-loops (" + vertices_[a] + ")");
      if (std::count_if(edges_.begin(), edges_.end(), [&](const OrientedEdge& e) {
            return (e.first == a && e.second == b) || (e.first == b && e.second == a);
          }) != 1) {
        throw InvariantError("duplicate edge " + vertices_[a] + "-" + vertices_[b]);
      }
    }
    for (auto& t : triangles_) {
      std::sort(t.begin(), t.end());
      if (t[0] == t[1] || t[1] == t[2]) throw InvariantError("degenerate triangle");
      for (auto [x, y] : {OrientedEdge{t[0], t[1]}, OrientedEdge{t[1], t[2]}, OrientedEdge{t[0], t[2]}}) {
        if (!has_edge(x, y)) {
          throw InvariantError("triangle " + vertices_[t[0]] + "-" + vertices_[t[1]] + "-" +
                               vertices_[t[2]] + " is missing edge " + vertices_[x] + "-" +
                               vertices_[y]);
        }
      }
    }
  }

  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<OrientedEdge>& edges() const { return edges_; }
  const std::vector<std::array<std::size_t, 3>>& triangles() const { return triangles_; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = std::find(vertices_.begin(), vertices_.end(), name);
    if (it == vertices_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
  }
  std::size_t index_of(const std::string& name) const {
    auto v = find(name);
    if (!v) throw InputError("unknown chart '" + name + "'");
    return *v;
  }

  bool has_edge(std::size_t a, std::size_t b) const {
    return std::any_of(edges_.begin(), edges_.end(), [&](const OrientedEdge& e) {
      return (e.first == a && e.second == b) || (e.first == b && e.second == a);
    });
  }

  bool is_connected() const {
    if (vertices_.empty()) return true;
    std::vector<bool> seen(vertices_.size(), false);
    std::deque<std::size_t> q{0};
    seen[0] = true;
    while (!q.empty()) {
      auto v = q.front();
      q.pop_front();
      for (const auto& [a, b] : edges_) {
        std::size_t w = a == v ? b : (b == v ? a : v);
        if (w != v && !seen[w]) {
          seen[w] = true;
          q.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  }

  /// Lexicographically smallest vertex name.
  std::size_t default_basepoint() const {
    if (vertices_.empty()) throw InvariantError("empty nerve");
    return static_cast<std::size_t>(std::min_element(vertices_.begin(), vertices_.end()) - vertices_.begin());
  }

  std::string edge_name(std::size_t a, std::size_t b) const { return vertices_[a] + "-" + vertices_[b]; }

 private:
  std::vector<std::string> vertices_;
  std::vector<OrientedEdge> edges_;
  std::vector<std::array<std::size_t, 3>> triangles_;
};

/// Values g(a,b) on oriented edges. Only the stored orientation is kept
/// when just one is given; the other is its inverse.
class GLCocycle {
 public:
  GLCocycle() = default;
  GLCocycle(std::size_t rank, std::map<OrientedEdge, TorusAut> values)
      : rank_(rank), values_(std::move(values)) {
    for (const auto& [e, m] : values_) {
      if (m.dim() != rank_) throw DimensionError("cocycle value of wrong dimension");
    }
  }
  explicit GLCocycle(std::map<OrientedEdge, TorusAut> values)
      : GLCocycle(values.empty() ? 0 : values.begin()->second.dim(), std::move(values)) {}

  static GLCocycle trivial(const Nerve& N, std::size_t rank) {
    std::map<OrientedEdge, TorusAut> v;
    for (const auto& e : N.edges()) v.emplace(e, TorusAut::identity(rank));
    return GLCocycle(rank, std::move(v));
  }

  std::size_t rank() const { return rank_; }
  const std::map<OrientedEdge, TorusAut>& values() const { return values_; }

  bool defined(std::size_t a, std::size_t b) const {
    return values_.count({a, b}) || values_.count({b, a});
  }

  TorusAut operator()(std::size_t a, std::size_t b) const {
    if (auto it = values_.find({a, b}); it != values_.end()) return it->second;
    if (auto it = values_.find({b, a}); it != values_.end()) return it->second.inverse();
    throw IncompleteCocycle("no cocycle value on edge " + std::to_string(a) + "-" + std::to_string(b));
  }

  friend bool operator==(const GLCocycle&, const GLCocycle&) = default;

 private:
  std::size_t rank_ = 0;
  std::map<OrientedEdge, TorusAut> values_;
};

struct CocycleViolation {
  enum class Kind { antisymmetry, triangle, non_edge } kind;
  std::vector<std::size_t> vertices;
  std::string message;
};

struct CocycleReport {
  std::vector<CocycleViolation> violations;
  bool valid() const { return violations.empty(); }
};

inline CocycleReport check_cocycle(const Nerve& N, const GLCocycle& g) {
  CocycleReport rep;
  for (const auto& [a, b] : N.edges()) {
    if (!g.defined(a, b)) {
      throw IncompleteCocycle("cocycle has no value on edge " + N.edge_name(a, b));
    }
  }
  for (const auto& [e, m] : g.values()) {
    if (!N.has_edge(e.first, e.second)) {
      rep.violations.push_back({CocycleViolation::Kind::non_edge, {e.first, e.second},
                                "value given on " + N.edge_name(e.first, e.second) +
                                    ", which is not an edge of the nerve"});
      continue;
    }
    if (e.first < e.second) {
      if (auto it = g.values().find({e.second, e.first}); it != g.values().end()) {
        if (it->second * m != TorusAut::identity(m.dim())) {
          rep.violations.push_back({CocycleViolation::Kind::antisymmetry, {e.first, e.second},
                                    "g(" + N.edge_name(e.second, e.first) + ") is not the inverse of g(" +
                                        N.edge_name(e.first, e.second) + ")"});
        }
      }
    }
  }
  for (const auto& t : N.triangles()) {
    auto [a, b, c] = t;
    if (g(a, b) * g(b, c) != g(a, c)) {
      rep.violations.push_back({CocycleViolation::Kind::triangle, {a, b, c},
                                "g(" + N.edge_name(a, b) + ") g(" + N.edge_name(b, c) + ") != g(" +
                                    N.edge_name(a, c) + ")"});
    }
  }
  return rep;
}

/// g'(a,b) = h_a g(a,b) h_b^-1.
inline GLCocycle apply_coboundary(const GLCocycle& g, const std::vector<TorusAut>& h) {
  std::map<OrientedEdge, TorusAut> v;
  for (const auto& [e, m] : g.values()) {
    if (e.first >= h.size() || e.second >= h.size()) {
      throw IncompleteCocycle("coboundary data missing for a vertex");
    }
    v.emplace(e, h[e.first] * m * h[e.second].inverse());
  }
  return GLCocycle(g.rank(), std::move(v));
}

struct HolonomyReport {
  std::size_t basepoint = 0;
  std::vector<OrientedEdge> tree;        // (parent, child), in discovery order
  std::vector<OrientedEdge> generators;  // non-tree edges, input orientation
  std::vector<TorusAut> images;
  // Each triangle gives a relation among generators; tree edges drop out.
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> relations;
  std::vector<TorusAut> path_products;  // product of g along the tree path base -> v
  bool trivial = true;
};

namespace detail {

struct SpanningTree {
  std::vector<std::optional<std::size_t>> parent;
  std::vector<std::size_t> order;
  std::vector<OrientedEdge> tree;
};

// BFS from the basepoint; neighbours in edge input order.
inline SpanningTree bfs_tree(const Nerve& N, std::size_t base) {
  const auto nv = N.vertices().size();
  SpanningTree st;
  st.parent.assign(nv, std::nullopt);
  std::vector<bool> seen(nv, false);
  std::deque<std::size_t> q{base};
  seen[base] = true;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    st.order.push_back(v);
    for (const auto& [a, b] : N.edges()) {
      std::size_t w;
      if (a == v) {
        w = b;
      } else if (b == v) {
        w = a;
      } else {
        continue;
      }
      if (seen[w]) continue;
      seen[w] = true;
      st.parent[w] = v;
      st.tree.emplace_back(v, w);
      q.push_back(w);
    }
  }
  if (st.order.size() != nv) throw DisconnectedNerve("nerve is not connected");
  return st;
}

inline bool is_tree_edge(const SpanningTree& st, std::size_t a, std::size_t b) {
  return st.parent[b] == a || st.parent[a] == b;
}

}  // namespace detail

inline HolonomyReport holonomy(const Nerve& N, const GLCocycle& g, std::size_t basepoint) {
  if (basepoint >= N.vertices().size()) throw InputError("basepoint is not a vertex of the nerve");
  auto st = detail::bfs_tree(N, basepoint);
  std::size_t rank = g.rank();

  HolonomyReport rep;
  rep.basepoint = basepoint;
  rep.tree = st.tree;
  rep.path_products.assign(N.vertices().size(), TorusAut::identity(rank));
  for (auto v : st.order) {
    if (st.parent[v]) rep.path_products[v] = rep.path_products[*st.parent[v]] * g(*st.parent[v], v);
  }

  std::map<OrientedEdge, std::size_t> gen_of;
  for (const auto& [a, b] : N.edges()) {
    if (detail::is_tree_edge(st, a, b)) continue;
    gen_of[{a, b}] = rep.generators.size();
    rep.generators.emplace_back(a, b);
    TorusAut img = rep.path_products[a] * g(a, b) * rep.path_products[b].inverse();
    if (!img.is_identity()) rep.trivial = false;
    rep.images.push_back(std::move(img));
  }

  auto letter = [&](std::size_t a, std::size_t b) -> std::optional<std::pair<std::size_t, std::int64_t>> {
    if (auto it = gen_of.find({a, b}); it != gen_of.end()) return std::pair{it->second, std::int64_t{1}};
    if (auto it = gen_of.find({b, a}); it != gen_of.end()) return std::pair{it->second, std::int64_t{-1}};
    return std::nullopt;
  };
  for (const auto& t : N.triangles()) {
    std::vector<std::pair<std::size_t, std::int64_t>> rel;
    if (auto l = letter(t[0], t[1])) rel.push_back(*l);
    if (auto l = letter(t[1], t[2])) rel.push_back(*l);
    if (auto l = letter(t[0], t[2])) rel.emplace_back(l->first, -l->second);
    rep.relations.push_back(std::move(rel));
  }
  return rep;
}

inline HolonomyReport holonomy(const Nerve& N, const GLCocycle& g) {
  return holonomy(N, g, N.default_basepoint());
}

/// When the holonomy is trivial, h with apply_coboundary(trivial, h) = g.
inline std::optional<std::vector<TorusAut>> trivializing_coboundary(const HolonomyReport& rep) {
  if (!rep.trivial) return std::nullopt;
  std::vector<TorusAut> h;
  for (const auto& p : rep.path_products) h.push_back(p.inverse());
  return h;
}

/// The deck transitions a_{ab} of the universal cover between chart
/// trivializations, one word per oriented edge.
class EdgeTransitions {
 public:
  EdgeTransitions() = default;
  EdgeTransitions(FPGroup group, std::map<OrientedEdge, GroupWord> words)
      : group_(std::move(group)), words_(std::move(words)) {}

  /// Identity on tree edges; the i-th non-tree edge carries generator i.
  static EdgeTransitions standard(const Nerve& N, const HolonomyReport& rep, const FPGroup& group) {
    std::map<OrientedEdge, GroupWord> w;
    for (const auto& e : N.edges()) w[e] = group.identity();
    for (std::size_t i = 0; i < rep.generators.size(); ++i) {
      if (i >= group.rank()) {
        throw InputError("nerve has " + std::to_string(rep.generators.size()) +
                         " loop generators but the group has only " + std::to_string(group.rank()) +
                         "; give the transitions explicitly");
      }
      w[rep.generators[i]] = group.generator(i);
    }
    return EdgeTransitions(group, std::move(w));
  }

  const FPGroup& group() const { return group_; }
  const std::map<OrientedEdge, GroupWord>& words() const { return words_; }

  GroupWord operator()(std::size_t a, std::size_t b) const {
    if (auto it = words_.find({a, b}); it != words_.end()) return it->second;
    if (auto it = words_.find({b, a}); it != words_.end()) return group_.inverse(it->second);
    return group_.identity();
  }

 private:
  FPGroup group_;
  std::map<OrientedEdge, GroupWord> words_;
};

struct ChartCorrections {
  std::vector<TorusAut> rho_alpha;
  const TorusAut& operator[](std::size_t a) const { return rho_alpha.at(a); }
};

/// Solves g(a,b) = rho_a rho(a_ab) rho_b^-1 with rho_base = I by
/// propagation along the spanning tree, then verifies every edge.
inline ChartCorrections chart_corrections(const Nerve& N, const GLCocycle& g, const Representation& rho,
                                          const EdgeTransitions& a, std::size_t basepoint) {
  auto st = detail::bfs_tree(N, basepoint);
  ChartCorrections c;
  c.rho_alpha.assign(N.vertices().size(), TorusAut::identity(rho.rank()));
  for (auto v : st.order) {
    if (!st.parent[v]) continue;
    auto p = *st.parent[v];
    c.rho_alpha[v] = g(p, v).inverse() * c.rho_alpha[p] * rho(a(p, v));
  }
  for (const auto& [x, y] : N.edges()) {
    if (g(x, y) != c.rho_alpha[x] * rho(a(x, y)) * c.rho_alpha[y].inverse()) {
      throw NoCorrection("representation is not in the class of the cocycle: relation fails on edge " +
                         N.edge_name(x, y));
    }
  }
  return c;
}

inline ChartCorrections chart_corrections(const Nerve& N, const GLCocycle& g, const Representation& rho,
                                          const EdgeTransitions& a) {
  return chart_corrections(N, g, rho, a, N.default_basepoint());
}

/// Convenience form: standard transitions, basepoint the smallest vertex.
inline ChartCorrections chart_corrections(const Nerve& N, const GLCocycle& g, const Representation& rho) {
  auto rep = holonomy(N, g);
  return chart_corrections(N, g, rho, EdgeTransitions::standard(N, rep, rho.group()));
}

}  // namespace torlift
