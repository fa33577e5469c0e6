#pragma once

// Continuous-cochain complex C^q((Z/m)^n; Map(X_s, Z/m'^k)) over a finite
// sample set X_s, with the right torus action and the right pi_1-action
// (sigma . a)(u_1..u_q, x) = sigma(rho(a)u_1, .., rho(a)u_q, a.x).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "torlift/errors.hpp"
#include "torlift/torus.hpp"

namespace torlift {

inline constexpr std::int32_t kOutOfWindow = -1;

/// Finite model of the module C(pi^*X, T^k): points, fiber group Z/m'^k,
/// and action tables (kOutOfWindow where the image leaves the window).
struct FiniteModule {
  TorusGrid torus;
  std::size_t points = 0;
  std::int64_t fiber_order = 2;
  std::size_t fiber_rank = 1;
  std::vector<std::int32_t> torus_table;  // [u * points + x]
  std::vector<TorusAut> generator_auts;   // rho(a) for each pi_1 generator
  std::vector<std::vector<std::int32_t>> generator_table;  // phi_{pi_1}(a)(x)
  std::vector<std::vector<std::size_t>> generator_torus;   // rho(a) on torus indices
  std::vector<std::string> point_labels;
  std::vector<std::string> generator_names;

  std::int32_t torus_act(std::size_t u, std::size_t x) const { return torus_table[u * points + x]; }
  std::int32_t deck_act(std::size_t g, std::size_t x) const { return generator_table[g][x]; }
  std::size_t rho_act(std::size_t g, std::size_t u) const { return generator_torus[g][u]; }
  std::size_t generators() const { return generator_table.size(); }

  void finalize() {
    generator_torus.clear();
    for (const auto& m : generator_auts) {
      std::vector<std::size_t> t(torus.size());
      for (std::size_t u = 0; u < torus.size(); ++u) t[u] = torus.apply(m, u);
      generator_torus.push_back(std::move(t));
    }
    validate();
  }

  void validate() const {
    if (torus_table.size() != torus.size() * points) throw InvariantError("torus table has wrong size");
    if (generator_table.size() != generator_auts.size()) {
      throw InvariantError("one action table per pi_1 generator is required");
    }
    for (std::size_t u = 0; u < torus.size(); ++u) {
      std::vector<bool> hit(points, false);
      for (std::size_t x = 0; x < points; ++x) {
        auto y = torus_act(u, x);
        if (y == kOutOfWindow) throw InvariantError("torus action must be defined on every in-window point");
        if (hit[static_cast<std::size_t>(y)]) throw InvariantError("torus action table is not injective");
        hit[static_cast<std::size_t>(y)] = true;
      }
    }
    for (std::size_t x = 0; x < points; ++x) {
      if (torus_act(0, x) != static_cast<std::int32_t>(x)) throw InvariantError("identity must act trivially");
    }
    for (const auto& t : generator_table) {
      if (t.size() != points) throw InvariantError("generator table has wrong size");
      std::vector<bool> hit(points, false);
      for (auto y : t) {
        if (y == kOutOfWindow) continue;
        if (hit[static_cast<std::size_t>(y)]) throw InvariantError("generator action table is not injective");
        hit[static_cast<std::size_t>(y)] = true;
      }
    }
  }
};

/// A q-cochain on the torus grid with values in Map(X_s, Z/m'^k). Points
/// outside `defined` carry no value (they sit outside the window).
class CochainTable {
 public:
  CochainTable() = default;
  CochainTable(std::size_t degree, const FiniteModule& M)
      : degree_(degree), group_(M.torus.size()), points_(M.points), k_(M.fiber_rank),
        modulus_(M.fiber_order), defined_(M.points, true) {
    std::size_t n = points_ * k_;
    for (std::size_t i = 0; i < degree_; ++i) n *= group_;
    values_.assign(n, 0);
  }

  std::size_t degree() const { return degree_; }
  std::size_t group_size() const { return group_; }
  std::size_t points() const { return points_; }
  std::size_t fiber_rank() const { return k_; }
  std::int64_t modulus() const { return modulus_; }
  std::size_t arguments() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < degree_; ++i) n *= group_;
    return n;
  }

  bool defined(std::size_t x) const { return defined_[x]; }
  void set_defined(std::size_t x, bool d) { defined_[x] = d; }

  /// Flat index of the argument tuple (u_1 is the most significant digit).
  std::size_t arg_index(const std::vector<std::size_t>& args) const {
    std::size_t idx = 0;
    for (auto u : args) idx = idx * group_ + u;
    return idx;
  }
  std::vector<std::size_t> args_of(std::size_t idx) const {
    std::vector<std::size_t> a(degree_);
    for (std::size_t i = degree_; i-- > 0;) {
      a[i] = idx % group_;
      idx /= group_;
    }
    return a;
  }

  std::int64_t get(std::size_t arg, std::size_t x, std::size_t comp = 0) const {
    return values_[(arg * points_ + x) * k_ + comp];
  }
  void set(std::size_t arg, std::size_t x, std::size_t comp, std::int64_t v) {
    values_[(arg * points_ + x) * k_ + comp] = detail::mod(v, modulus_);
  }
  void add(std::size_t arg, std::size_t x, std::size_t comp, std::int64_t v) {
    auto& r = values_[(arg * points_ + x) * k_ + comp];
    r = detail::mod(r + v, modulus_);
  }

  bool is_zero() const {
    for (std::size_t x = 0; x < points_; ++x) {
      if (!defined_[x]) continue;
      for (std::size_t a = 0; a < arguments(); ++a) {
        for (std::size_t c = 0; c < k_; ++c) {
          if (get(a, x, c) != 0) return false;
        }
      }
    }
    return true;
  }

  /// Equality on entries defined in both tables.
  bool agrees_with(const CochainTable& o) const {
    if (o.degree_ != degree_ || o.points_ != points_ || o.k_ != k_ || o.group_ != group_) return false;
    for (std::size_t x = 0; x < points_; ++x) {
      if (!defined_[x] || !o.defined_[x]) continue;
      for (std::size_t a = 0; a < arguments(); ++a) {
        for (std::size_t c = 0; c < k_; ++c) {
          if (get(a, x, c) != o.get(a, x, c)) return false;
        }
      }
    }
    return true;
  }

  CochainTable operator+(const CochainTable& o) const {
    CochainTable r = *this;
    for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = detail::mod(values_[i] + o.values_[i], modulus_);
    for (std::size_t x = 0; x < points_; ++x) r.defined_[x] = defined_[x] && o.defined_[x];
    return r;
  }
  CochainTable operator-() const {
    CochainTable r = *this;
    for (auto& v : r.values_) v = detail::mod(-v, modulus_);
    return r;
  }
  CochainTable operator-(const CochainTable& o) const { return *this + (-o); }

  friend bool operator==(const CochainTable&, const CochainTable&) = default;

 private:
  std::size_t degree_ = 0, group_ = 1, points_ = 0, k_ = 1;
  std::int64_t modulus_ = 2;
  std::vector<std::int64_t> values_;
  std::vector<bool> defined_;
};

namespace detail {

// One entry of delta(sigma); nullopt when an argument leaves the window.
inline std::optional<std::vector<std::int64_t>> coboundary_entry(const CochainTable& s, const FiniteModule& M,
                                                                 const std::vector<std::size_t>& args,
                                                                 std::size_t x) {
  const std::size_t q = s.degree();
  const std::size_t k = s.fiber_rank();
  if (!s.defined(x)) return std::nullopt;
  auto y = M.torus_act(args[q], x);
  if (y == kOutOfWindow || !s.defined(static_cast<std::size_t>(y))) return std::nullopt;

  std::vector<std::int64_t> out(k, 0);
  auto accumulate = [&](const std::vector<std::size_t>& a, std::size_t pt, std::int64_t sign) {
    std::size_t idx = s.arg_index(a);
    for (std::size_t c = 0; c < k; ++c) out[c] += sign * s.get(idx, pt, c);
  };
  // sigma(u_2, .., u_{q+1})
  accumulate(std::vector<std::size_t>(args.begin() + 1, args.end()), x, 1);
  // sum_i (-1)^i sigma(u_1, .., u_i u_{i+1}, .., u_{q+1})
  for (std::size_t i = 1; i <= q; ++i) {
    std::vector<std::size_t> a;
    for (std::size_t j = 0; j < q + 1; ++j) {
      if (j == i - 1) {
        a.push_back(M.torus.add(args[j], args[j + 1]));
        ++j;
      } else {
        a.push_back(args[j]);
      }
    }
    accumulate(a, x, (i % 2 == 0) ? 1 : -1);
  }
  // (-1)^{q+1} (sigma(u_1, .., u_q) . u_{q+1})(x) = sigma(u_1..u_q)(u_{q+1} x)
  accumulate(std::vector<std::size_t>(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(q)),
             static_cast<std::size_t>(y), ((q + 1) % 2 == 0) ? 1 : -1);
  for (auto& v : out) v = mod(v, s.modulus());
  return out;
}

}  // namespace detail

/// delta: C^q -> C^{q+1}. Throws OutOfModel when an entry needs a point
/// outside the window.
inline CochainTable coboundary(const CochainTable& sigma, const FiniteModule& M) {
  CochainTable out(sigma.degree() + 1, M);
  for (std::size_t x = 0; x < M.points; ++x) {
    out.set_defined(x, sigma.defined(x));
    if (!sigma.defined(x)) continue;
    for (std::size_t a = 0; a < out.arguments(); ++a) {
      auto args = out.args_of(a);
      auto e = detail::coboundary_entry(sigma, M, args, x);
      if (!e) throw OutOfModel("coboundary references a point outside the window (" + M.point_labels.at(x) + ")");
      for (std::size_t c = 0; c < out.fiber_rank(); ++c) out.set(a, x, c, (*e)[c]);
    }
  }
  return out;
}

struct CochainViolation {
  std::vector<std::size_t> args;
  std::size_t point;
};

struct CocycleCheck {
  bool ok = true;
  std::vector<CochainViolation> violations;
  std::size_t skipped = 0;  // entries that left the window
};

inline CocycleCheck is_cocycle(const CochainTable& sigma, const FiniteModule& M) {
  CocycleCheck r;
  std::size_t n = M.torus.size();
  if (sigma.degree() == 1) {
    const std::size_t k = sigma.fiber_rank();
    for (std::size_t x = 0; x < M.points; ++x) {
      if (!sigma.defined(x)) continue;
      for (std::size_t u2 = 0; u2 < n; ++u2) {
        auto y = M.torus_act(u2, x);
        if (y == kOutOfWindow || !sigma.defined(static_cast<std::size_t>(y))) {
          r.skipped += n;
          continue;
        }
        for (std::size_t u1 = 0; u1 < n; ++u1) {
          auto s12 = M.torus.add(u1, u2);
          for (std::size_t c = 0; c < k; ++c) {
            auto v = sigma.get(u2, x, c) - sigma.get(s12, x, c) + sigma.get(u1, static_cast<std::size_t>(y), c);
            if (detail::mod(v, sigma.modulus()) != 0) {
              r.ok = false;
              r.violations.push_back({{u1, u2}, x});
              break;
            }
          }
        }
      }
    }
    return r;
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i <= sigma.degree(); ++i) count *= n;
  for (std::size_t x = 0; x < M.points; ++x) {
    if (!sigma.defined(x)) continue;
    for (std::size_t a = 0; a < count; ++a) {
      std::vector<std::size_t> args(sigma.degree() + 1);
      std::size_t t = a;
      for (std::size_t i = args.size(); i-- > 0;) {
        args[i] = t % n;
        t /= n;
      }
      auto e = detail::coboundary_entry(sigma, M, args, x);
      if (!e) {
        ++r.skipped;
        continue;
      }
      for (auto v : *e) {
        if (v != 0) {
          r.ok = false;
          r.violations.push_back({args, x});
          break;
        }
      }
    }
  }
  return r;
}

/// (sigma . a)(u_1..u_q, x) = sigma(rho(a)u_1, .., rho(a)u_q, a.x).
inline CochainTable act_cochain(const CochainTable& sigma, std::size_t generator, const FiniteModule& M) {
  CochainTable out(sigma.degree(), M);
  for (std::size_t x = 0; x < M.points; ++x) {
    auto y = M.deck_act(generator, x);
    bool def = y != kOutOfWindow && sigma.defined(static_cast<std::size_t>(y));
    out.set_defined(x, def);
    if (!def) continue;
    for (std::size_t a = 0; a < out.arguments(); ++a) {
      auto args = out.args_of(a);
      for (auto& u : args) u = M.rho_act(generator, u);
      std::size_t src = sigma.arg_index(args);
      for (std::size_t c = 0; c < out.fiber_rank(); ++c) out.set(a, x, c, sigma.get(src, static_cast<std::size_t>(y), c));
    }
  }
  return out;
}

}  // namespace torlift
