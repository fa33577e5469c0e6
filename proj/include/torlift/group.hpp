#pragma once

// Fundamental-group models with decidable word problems, representations
// into GL(n,Z), and the semidirect product T^n x_rho pi_1.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "torlift/errors.hpp"
#include "torlift/torus.hpp"

namespace torlift {

/// A group element as a list of (generator, exponent) syllables. Values
/// produced by FPGroup are always in the family's normal form.
struct GroupWord {
  std::vector<std::pair<std::size_t, std::int64_t>> letters;

  bool is_identity() const { return letters.empty(); }
  friend bool operator==(const GroupWord&, const GroupWord&) = default;
  friend auto operator<=>(const GroupWord&, const GroupWord&) = default;
};

enum class GroupFamily { trivial, free, free_abelian, cyclic };

inline std::string family_name(GroupFamily f) {
  switch (f) {
    case GroupFamily::trivial: return "trivial";
    case GroupFamily::free: return "free";
    case GroupFamily::free_abelian: return "free_abelian";
    case GroupFamily::cyclic: return "cyclic";
  }
  return "?";
}

class FPGroup {
 public:
  FPGroup() = default;

  static FPGroup trivial() { return FPGroup(GroupFamily::trivial, 0, {}); }
  static FPGroup free(std::vector<std::string> names) {
    auto r = names.size();
    return FPGroup(GroupFamily::free, r, std::move(names));
  }
  static FPGroup free_abelian(std::vector<std::string> names) {
    auto r = names.size();
    return FPGroup(GroupFamily::free_abelian, r, std::move(names));
  }
  static FPGroup cyclic(std::int64_t order, std::string name) {
    if (order < 1) throw InvariantError("cyclic group order must be >= 1");
    FPGroup g(GroupFamily::cyclic, 1, {std::move(name)});
    g.order_ = order;
    return g;
  }

  GroupFamily family() const { return family_; }
  std::size_t rank() const { return names_.size(); }
  std::int64_t order() const { return order_; }
  const std::vector<std::string>& generator_names() const { return names_; }

  GroupWord identity() const { return {}; }
  GroupWord generator(std::size_t i, std::int64_t e = 1) const {
    check_gen(i);
    return normalize(GroupWord{{{i, e}}});
  }

  GroupWord normalize(const GroupWord& w) const {
    for (const auto& [g, e] : w.letters) check_gen(g);
    GroupWord r;
    switch (family_) {
      case GroupFamily::trivial:
        break;
      case GroupFamily::free:
        for (const auto& [g, e] : w.letters) {
          if (e == 0) continue;
          if (!r.letters.empty() && r.letters.back().first == g) {
            r.letters.back().second += e;
            if (r.letters.back().second == 0) r.letters.pop_back();
          } else {
            r.letters.emplace_back(g, e);
          }
        }
        break;
      case GroupFamily::free_abelian: {
        std::vector<std::int64_t> ex(rank(), 0);
        for (const auto& [g, e] : w.letters) ex[g] += e;
        for (std::size_t g = 0; g < ex.size(); ++g) {
          if (ex[g] != 0) r.letters.emplace_back(g, ex[g]);
        }
        break;
      }
      case GroupFamily::cyclic: {
        std::int64_t s = 0;
        for (const auto& [g, e] : w.letters) s = detail::mod(s + detail::mod(e, order_), order_);
        if (s != 0) r.letters.emplace_back(0, s);
        break;
      }
    }
    return r;
  }

  GroupWord mul(const GroupWord& a, const GroupWord& b) const {
    GroupWord c = a;
    c.letters.insert(c.letters.end(), b.letters.begin(), b.letters.end());
    return normalize(c);
  }

  GroupWord inverse(const GroupWord& a) const {
    GroupWord c;
    for (auto it = a.letters.rbegin(); it != a.letters.rend(); ++it) {
      c.letters.emplace_back(it->first, -it->second);
    }
    return normalize(c);
  }

  /// Syllable length for free groups, max |exponent| for free abelian
  /// groups; finite families always report 0 so they fit every window.
  std::int64_t window_size(const GroupWord& w) const {
    std::int64_t s = 0;
    switch (family_) {
      case GroupFamily::free:
        for (const auto& [g, e] : w.letters) s += e < 0 ? -e : e;
        return s;
      case GroupFamily::free_abelian:
        for (const auto& [g, e] : w.letters) s = std::max(s, e < 0 ? -e : e);
        return s;
      default:
        return 0;
    }
  }
  bool in_window(const GroupWord& w, std::int64_t window) const { return window_size(w) <= window; }

  /// Every element within the window, in a deterministic order.
  std::vector<GroupWord> ball(std::int64_t window) const {
    std::vector<GroupWord> out;
    switch (family_) {
      case GroupFamily::trivial:
        out.push_back({});
        break;
      case GroupFamily::cyclic:
        for (std::int64_t k = 0; k < order_; ++k) out.push_back(normalize(GroupWord{{{0, k}}}));
        break;
      case GroupFamily::free_abelian: {
        std::vector<std::int64_t> ex(rank(), -window);
        if (rank() == 0) {
          out.push_back({});
          break;
        }
        while (true) {
          GroupWord w;
          for (std::size_t g = 0; g < rank(); ++g) w.letters.emplace_back(g, ex[g]);
          out.push_back(normalize(w));
          std::size_t i = 0;
          while (i < rank() && ex[i] == window) ex[i++] = -window;
          if (i == rank()) break;
          ++ex[i];
        }
        break;
      }
      case GroupFamily::free: {
        std::vector<GroupWord> layer{GroupWord{}};
        out.push_back({});
        for (std::int64_t len = 1; len <= window; ++len) {
          std::vector<GroupWord> next;
          for (const auto& w : layer) {
            for (std::size_t g = 0; g < rank(); ++g) {
              for (std::int64_t e : {-1, 1}) {
                GroupWord c = mul(w, GroupWord{{{g, e}}});
                if (window_size(c) == len) next.push_back(c);
              }
            }
          }
          std::sort(next.begin(), next.end());
          next.erase(std::unique(next.begin(), next.end()), next.end());
          out.insert(out.end(), next.begin(), next.end());
          layer = std::move(next);
        }
        break;
      }
    }
    return out;
  }

  std::string str(const GroupWord& w) const {
    if (w.letters.empty()) return "e";
    std::string s;
    for (const auto& [g, e] : w.letters) {
      if (!s.empty()) s += " ";
      s += names_[g];
      if (e != 1) s += "^" + std::to_string(e);
    }
    return s;
  }

  /// Parses "e" or whitespace-separated syllables such as "a^2 b^-1".
  GroupWord parse(std::string_view text) const {
    GroupWord w;
    std::string_view t = detail::trim(text);
    if (t == "e" || t.empty()) return w;
    std::size_t pos = 0;
    while (pos < t.size()) {
      while (pos < t.size() && t[pos] == ' ') ++pos;
      std::size_t end = t.find(' ', pos);
      if (end == std::string_view::npos) end = t.size();
      std::string_view tok = t.substr(pos, end - pos);
      pos = end;
      if (tok.empty()) continue;
      std::int64_t e = 1;
      auto caret = tok.find('^');
      std::string_view name = tok.substr(0, caret);
      if (caret != std::string_view::npos) e = detail::parse_int(tok.substr(caret + 1));
      auto it = std::find(names_.begin(), names_.end(), std::string(name));
      if (it == names_.end()) throw InputError("unknown generator '" + std::string(name) + "'");
      w.letters.emplace_back(static_cast<std::size_t>(it - names_.begin()), e);
    }
    return normalize(w);
  }

  friend bool operator==(const FPGroup&, const FPGroup&) = default;

 private:
  FPGroup(GroupFamily f, std::size_t /*rank*/, std::vector<std::string> names)
      : family_(f), names_(std::move(names)) {}

  void check_gen(std::size_t g) const {
    if (g >= rank()) throw InputError("generator index " + std::to_string(g) + " out of range");
  }

  GroupFamily family_ = GroupFamily::trivial;
  std::vector<std::string> names_;
  std::int64_t order_ = 0;
};

/// A homomorphism pi_1 -> Aut(T^n), given by generator images.
class Representation {
 public:
  Representation() = default;
  Representation(FPGroup group, std::vector<TorusAut> images, std::size_t rank)
      : group_(std::move(group)), images_(std::move(images)), n_(rank) {
    if (images_.size() != group_.rank()) {
      throw InvariantError("representation needs one image per generator (" +
                           std::to_string(group_.rank()) + "), got " + std::to_string(images_.size()));
    }
    for (const auto& m : images_) {
      if (m.dim() != n_) throw DimensionError("representation image of wrong dimension");
    }
    if (group_.family() == GroupFamily::free_abelian) {
      for (std::size_t i = 0; i < images_.size(); ++i) {
        for (std::size_t j = i + 1; j < images_.size(); ++j) {
          if (images_[i] * images_[j] != images_[j] * images_[i]) {
            throw InvariantError("images of " + group_.generator_names()[i] + " and " +
                                 group_.generator_names()[j] +
                                 " must commute in a free abelian group");
          }
        }
      }
    }
    if (group_.family() == GroupFamily::cyclic && !images_[0].pow(group_.order()).is_identity()) {
      throw InvariantError("image of the cyclic generator must have order dividing " +
                           std::to_string(group_.order()));
    }
  }

  const FPGroup& group() const { return group_; }
  const std::vector<TorusAut>& images() const { return images_; }
  std::size_t rank() const { return n_; }

  TorusAut operator()(const GroupWord& w) const {
    TorusAut r = TorusAut::identity(n_);
    for (const auto& [g, e] : w.letters) r = r * images_.at(g).pow(e);
    return r;
  }

 private:
  FPGroup group_;
  std::vector<TorusAut> images_;
  std::size_t n_ = 0;
};

/// rho' = f rho f^-1 on every generator.
inline Representation transport_rep(const TorusAut& f, const Representation& rho) {
  std::vector<TorusAut> im;
  TorusAut finv = f.inverse();
  for (const auto& m : rho.images()) im.push_back(f * m * finv);
  return Representation(rho.group(), std::move(im), rho.rank());
}

struct SemidirectElement {
  TorusPoint u;
  GroupWord a;
  friend bool operator==(const SemidirectElement&, const SemidirectElement&) = default;
};

/// (u1,a1)(u2,a2) = (u1 + rho(a1)(u2), a1 a2).
inline SemidirectElement semidirect_mul(const SemidirectElement& g1, const SemidirectElement& g2,
                                        const Representation& rho) {
  if (g1.u.size() != rho.rank() || g2.u.size() != rho.rank()) {
    throw DimensionError("semidirect product: torus component of wrong rank");
  }
  const FPGroup& G = rho.group();
  GroupWord a1 = G.normalize(g1.a);
  return {g1.u + apply_aut(rho(a1), g2.u), G.mul(a1, g2.a)};
}

/// (u,a)^-1 = (rho(a^-1)(-u), a^-1).
inline SemidirectElement semidirect_inv(const SemidirectElement& g, const Representation& rho) {
  GroupWord ai = rho.group().inverse(g.a);
  return {apply_aut(rho(ai), -g.u), ai};
}

/// The isomorphism (u,a) -> (f(u),a) between the two semidirect products.
inline SemidirectElement transport_element(const TorusAut& f, const SemidirectElement& g) {
  return {apply_aut(f, g.u), g.a};
}

}  // namespace torlift
