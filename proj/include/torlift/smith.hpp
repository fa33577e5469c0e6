#pragma once

// Linear systems A x = b over Z/N, decided by diagonalizing A with
// unimodular row and column operations (Smith-style elimination). An
// infeasible system yields a certificate y with y A = 0 and y b != 0.

#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "torlift/errors.hpp"
#include "torlift/torus.hpp"

namespace torlift {

struct SmithSystem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::int64_t modulus = 2;
  std::vector<std::int64_t> a;  // row-major, rows x cols
  std::vector<std::int64_t> b;

  SmithSystem() = default;
  SmithSystem(std::size_t r, std::size_t c, std::int64_t n)
      : rows(r), cols(c), modulus(n), a(r * c, 0), b(r, 0) {
    if (n < 1) throw InvariantError("modulus must be >= 1");
  }

  std::int64_t& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  std::int64_t at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct SmithSolution {
  std::vector<std::int64_t> x;
};

struct SmithCertificate {
  std::vector<std::int64_t> y;
};

using SmithResult = std::variant<SmithSolution, SmithCertificate>;

inline bool verify_solution(const SmithSystem& s, const std::vector<std::int64_t>& x) {
  if (x.size() != s.cols) return false;
  for (std::size_t i = 0; i < s.rows; ++i) {
    __int128 acc = 0;
    for (std::size_t j = 0; j < s.cols; ++j) acc += static_cast<__int128>(s.at(i, j)) * x[j];
    if (detail::mod(static_cast<std::int64_t>(acc % s.modulus), s.modulus) != detail::mod(s.b[i], s.modulus)) {
      return false;
    }
  }
  return true;
}

inline bool verify_certificate(const SmithSystem& s, const std::vector<std::int64_t>& y) {
  if (y.size() != s.rows) return false;
  for (std::size_t j = 0; j < s.cols; ++j) {
    __int128 acc = 0;
    for (std::size_t i = 0; i < s.rows; ++i) acc += static_cast<__int128>(y[i]) * s.at(i, j);
    if (acc % s.modulus != 0) return false;
  }
  __int128 yb = 0;
  for (std::size_t i = 0; i < s.rows; ++i) yb += static_cast<__int128>(y[i]) * s.b[i];
  return yb % s.modulus != 0;
}

namespace detail {

struct ExtGcd {
  std::int64_t g, s, t;  // g = s a + t b
};

inline ExtGcd ext_gcd(std::int64_t a, std::int64_t b) {
  std::int64_t r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    std::int64_t q = r0 / r1;
    std::tie(r0, r1) = std::pair{r1, r0 - q * r1};
    std::tie(s0, s1) = std::pair{s1, s0 - q * s1};
    std::tie(t0, t1) = std::pair{t1, t0 - q * t1};
  }
  if (r0 < 0) return {-r0, -s0, -t0};
  return {r0, s0, t0};
}

/// Some q with a q = b (mod n), if one exists.
inline std::optional<std::int64_t> mod_divide(std::int64_t a, std::int64_t b, std::int64_t n) {
  a = mod(a, n);
  b = mod(b, n);
  std::int64_t g = std::gcd(a, n);
  if (g == 0) g = n;
  if (b % g != 0) return std::nullopt;
  std::int64_t nn = n / g;
  if (nn == 1) return 0;
  auto e = ext_gcd(mod(a / g, nn), nn);
  std::int64_t inv = mod(e.s, nn);
  return mod(static_cast<std::int64_t>(static_cast<__int128>(b / g) * inv % nn), nn);
}

class Diagonalizer {
 public:
  Diagonalizer(const SmithSystem& s, bool track_rows)
      : r_(s.rows), c_(s.cols), n_(s.modulus), a_(s.a), b_(s.b), track_(track_rows) {
    for (auto& v : a_) v = mod(v, n_);
    for (auto& v : b_) v = mod(v, n_);
    v_.assign(c_ * c_, 0);
    for (std::size_t j = 0; j < c_; ++j) v_[j * c_ + j] = 1;
    if (track_) {
      u_.assign(r_ * r_, 0);
      for (std::size_t i = 0; i < r_; ++i) u_[i * r_ + i] = 1;
    }
    run();
  }

  std::size_t rank() const { return rank_; }
  std::int64_t diag(std::size_t k) const { return a_[k * c_ + k]; }
  std::int64_t rhs(std::size_t i) const { return b_[i]; }
  std::int64_t v(std::size_t i, std::size_t j) const { return v_[i * c_ + j]; }
  std::vector<std::int64_t> u_row(std::size_t i) const {
    return {u_.begin() + static_cast<std::ptrdiff_t>(i * r_), u_.begin() + static_cast<std::ptrdiff_t>((i + 1) * r_)};
  }

 private:
  std::int64_t& A(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }

  std::int64_t mulmod(std::int64_t x, std::int64_t y) const {
    return static_cast<std::int64_t>(static_cast<__int128>(x) * y % n_);
  }

  // rows (i, k) <- (s*row_i + t*row_k, p*row_i + q*row_k), a unimodular 2x2.
  void row_combine(std::size_t i, std::size_t k, std::int64_t s, std::int64_t t, std::int64_t p, std::int64_t q) {
    auto mix = [&](std::vector<std::int64_t>& m, std::size_t width) {
      for (std::size_t j = 0; j < width; ++j) {
        std::int64_t x = m[i * width + j], y = m[k * width + j];
        if (x == 0 && y == 0) continue;
        m[i * width + j] = mod(mulmod(s, x) + mulmod(t, y), n_);
        m[k * width + j] = mod(mulmod(p, x) + mulmod(q, y), n_);
      }
    };
    mix(a_, c_);
    std::int64_t x = b_[i], y = b_[k];
    b_[i] = mod(mulmod(s, x) + mulmod(t, y), n_);
    b_[k] = mod(mulmod(p, x) + mulmod(q, y), n_);
    if (track_) mix(u_, r_);
  }

  void col_combine(std::size_t i, std::size_t k, std::int64_t s, std::int64_t t, std::int64_t p, std::int64_t q) {
    for (std::size_t row = 0; row < r_; ++row) {
      std::int64_t x = a_[row * c_ + i], y = a_[row * c_ + k];
      if (x == 0 && y == 0) continue;
      a_[row * c_ + i] = mod(mulmod(s, x) + mulmod(t, y), n_);
      a_[row * c_ + k] = mod(mulmod(p, x) + mulmod(q, y), n_);
    }
    for (std::size_t row = 0; row < c_; ++row) {
      std::int64_t x = v_[row * c_ + i], y = v_[row * c_ + k];
      if (x == 0 && y == 0) continue;
      v_[row * c_ + i] = mod(mulmod(s, x) + mulmod(t, y), n_);
      v_[row * c_ + k] = mod(mulmod(p, x) + mulmod(q, y), n_);
    }
  }

  // Eliminates entry e against pivot p (both mod n). Returns the 2x2 that
  // sends (e, p) -> (0, p') with the new pivot in the second slot.
  struct Step {
    std::int64_t s, t, p, q;
  };
  Step eliminate(std::int64_t e, std::int64_t piv) const {
    if (auto f = mod_divide(piv, e, n_)) return {1, mod(-*f, n_), 0, 1};
    auto g = ext_gcd(piv, e);
    // new pivot g = s*piv + t*e; other = (piv/g)*e - (e/g)*piv = 0.
    return {mod(piv / g.g, n_), mod(-(e / g.g), n_), mod(g.t, n_), mod(g.s, n_)};
  }

  void run() {
    std::size_t k = 0;
    while (k < r_ && k < c_) {
      // pivot: smallest gcd with n, then smallest value, then first position
      std::size_t pi = r_, pj = c_;
      std::int64_t best_g = 0, best_v = 0;
      for (std::size_t i = k; i < r_; ++i) {
        for (std::size_t j = k; j < c_; ++j) {
          std::int64_t v = A(i, j);
          if (v == 0) continue;
          std::int64_t g = std::gcd(v, n_);
          if (pi == r_ || g < best_g || (g == best_g && v < best_v)) {
            pi = i, pj = j, best_g = g, best_v = v;
          }
        }
        if (pi != r_ && best_g == 1 && best_v == 1) break;
      }
      if (pi == r_) break;
      if (pi != k) row_combine(pi, k, 0, 1, 1, 0);
      if (pj != k) col_combine(pj, k, 0, 1, 1, 0);

      bool dirty = true;
      while (dirty) {
        dirty = false;
        for (std::size_t i = k + 1; i < r_; ++i) {
          if (A(i, k) == 0) continue;
          auto st = eliminate(A(i, k), A(k, k));
          row_combine(i, k, st.s, st.t, st.p, st.q);
        }
        for (std::size_t j = k + 1; j < c_; ++j) {
          if (A(k, j) == 0) continue;
          auto st = eliminate(A(k, j), A(k, k));
          col_combine(j, k, st.s, st.t, st.p, st.q);
        }
        for (std::size_t i = k + 1; i < r_ && !dirty; ++i) dirty = A(i, k) != 0;
      }
      ++k;
    }
    rank_ = k;
  }

  std::size_t r_, c_;
  std::int64_t n_;
  std::vector<std::int64_t> a_, b_, v_, u_;
  bool track_;
  std::size_t rank_ = 0;
};

inline std::optional<std::size_t> first_infeasible_row(const Diagonalizer& d, std::size_t rows, std::int64_t n) {
  for (std::size_t i = 0; i < rows; ++i) {
    std::int64_t di = i < d.rank() ? d.diag(i) : 0;
    if (!mod_divide(di, d.rhs(i), n)) return i;
  }
  return std::nullopt;
}

}  // namespace detail

inline SmithResult smith_solve(const SmithSystem& sys) {
  const std::int64_t n = sys.modulus;
  detail::Diagonalizer d(sys, false);
  if (auto bad = detail::first_infeasible_row(d, sys.rows, n)) {
    // Replay with row tracking to recover the certificate row.
    detail::Diagonalizer dt(sys, true);
    auto row = *detail::first_infeasible_row(dt, sys.rows, n);
    auto y = dt.u_row(row);
    if (row < dt.rank()) {
      std::int64_t g = std::gcd(dt.diag(row), n);
      for (auto& v : y) v = detail::mod(static_cast<std::int64_t>(static_cast<__int128>(v) * (n / g) % n), n);
    }
    return SmithCertificate{std::move(y)};
  }
  std::vector<std::int64_t> z(sys.cols, 0);
  for (std::size_t k = 0; k < d.rank(); ++k) z[k] = *detail::mod_divide(d.diag(k), d.rhs(k), n);
  std::vector<std::int64_t> x(sys.cols, 0);
  for (std::size_t i = 0; i < sys.cols; ++i) {
    __int128 acc = 0;
    for (std::size_t k = 0; k < d.rank(); ++k) acc += static_cast<__int128>(d.v(i, k)) * z[k];
    x[i] = detail::mod(static_cast<std::int64_t>(acc % n), n);
  }
  return SmithSolution{std::move(x)};
}

/// Same problem with sparse rows; the shape the vanishing test produces.
struct SparseSystem {
  std::size_t cols = 0;
  std::int64_t modulus = 2;
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> rows;
  std::vector<std::int64_t> b;

  void add_row(const std::map<std::size_t, std::int64_t>& entries, std::int64_t rhs) {
    std::vector<std::pair<std::size_t, std::int64_t>> r;
    for (const auto& [c, v] : entries) {
      auto w = detail::mod(v, modulus);
      if (w != 0) r.emplace_back(c, w);
    }
    rows.push_back(std::move(r));
    b.push_back(detail::mod(rhs, modulus));
  }

  SmithSystem dense() const {
    SmithSystem s(rows.size(), cols, modulus);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& [c, v] : rows[i]) s.at(i, c) = detail::mod(s.at(i, c) + v, modulus);
      s.b[i] = b[i];
    }
    return s;
  }
};

inline bool verify_solution(const SparseSystem& s, const std::vector<std::int64_t>& x) {
  if (x.size() != s.cols) return false;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    __int128 acc = 0;
    for (const auto& [c, v] : s.rows[i]) acc += static_cast<__int128>(v) * x[c];
    if (detail::mod(static_cast<std::int64_t>(acc % s.modulus), s.modulus) != detail::mod(s.b[i], s.modulus)) {
      return false;
    }
  }
  return true;
}

inline bool verify_certificate(const SparseSystem& s, const std::vector<std::int64_t>& y) {
  if (y.size() != s.rows.size()) return false;
  std::vector<__int128> col(s.cols, 0);
  __int128 yb = 0;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (y[i] == 0) continue;
    for (const auto& [c, v] : s.rows[i]) col[c] = (col[c] + static_cast<__int128>(y[i]) * v) % s.modulus;
    yb = (yb + static_cast<__int128>(y[i]) * s.b[i]) % s.modulus;
  }
  for (auto v : col) {
    if (v % s.modulus != 0) return false;
  }
  return yb % s.modulus != 0;
}

namespace detail {

// Gaussian elimination on unit pivots, leaving the non-unit remainder for
// the Smith stage. Row combinations are tracked only when asked.
class UnitEliminator {
 public:
  struct Row {
    std::map<std::size_t, std::int64_t> a;
    std::int64_t b = 0;
    std::map<std::size_t, std::int64_t> comb;  // over original rows
  };

  UnitEliminator(const SparseSystem& s, bool track) : s_(s), n_(s.modulus), track_(track) { run(); }

  std::optional<std::vector<std::int64_t>> contradiction() const { return contradiction_; }
  const std::vector<Row>& residual() const { return residual_; }

  std::vector<std::int64_t> back_substitute(const std::map<std::size_t, std::int64_t>& fixed) const {
    std::vector<std::int64_t> x(s_.cols, 0);
    for (const auto& [c, v] : fixed) x[c] = v;
    for (std::size_t k = pivots_.size(); k-- > 0;) {
      const auto& p = pivots_[k];
      __int128 acc = p.b;
      for (const auto& [c, v] : p.a) {
        if (c != pivot_col_[k]) acc -= static_cast<__int128>(v) * x[c];
      }
      x[pivot_col_[k]] = mod(static_cast<std::int64_t>(acc % n_), n_);
    }
    return x;
  }

  std::vector<std::int64_t> expand(const std::map<std::size_t, std::int64_t>& comb) const {
    std::vector<std::int64_t> y(s_.rows.size(), 0);
    for (const auto& [i, v] : comb) y[i] = mod(v, n_);
    return y;
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::int64_t mulmod(std::int64_t x, std::int64_t y) const {
    return mod(static_cast<std::int64_t>(static_cast<__int128>(x) * y % n_), n_);
  }

  static void axpy(std::map<std::size_t, std::int64_t>& r, const std::map<std::size_t, std::int64_t>& p,
                   std::int64_t f, std::int64_t n) {
    for (const auto& [c, v] : p) {
      auto& e = r[c];
      e = mod(static_cast<std::int64_t>((static_cast<__int128>(e) + static_cast<__int128>(f) * v) % n), n);
      if (e == 0) r.erase(c);
    }
  }

  void reduce(Row& r) const {
    while (true) {
      std::size_t best = npos;
      for (const auto& [c, v] : r.a) {
        if (auto it = piv_of_.find(c); it != piv_of_.end()) best = std::min(best, it->second);
      }
      if (best == npos) return;
      auto f = mod(-r.a.at(pivot_col_[best]), n_);
      axpy(r.a, pivots_[best].a, f, n_);
      r.b = mod(static_cast<std::int64_t>((static_cast<__int128>(r.b) + static_cast<__int128>(f) * pivots_[best].b) % n_), n_);
      if (track_) axpy(r.comb, pivots_[best].comb, f, n_);
    }
  }

  // Pivot on the first unit entry; false when there is none.
  bool try_pivot(Row& r) {
    for (const auto& [c, v] : r.a) {
      if (std::gcd(v, n_) != 1) continue;
      auto inv = mod(ext_gcd(v, n_).s, n_);
      for (auto& [cc, vv] : r.a) vv = mulmod(vv, inv);
      r.b = mulmod(r.b, inv);
      for (auto& [cc, vv] : r.comb) vv = mulmod(vv, inv);
      piv_of_[c] = pivots_.size();
      pivot_col_.push_back(c);
      pivots_.push_back(std::move(r));
      return true;
    }
    return false;
  }

  // Returns false once a contradiction 0 = b != 0 has been found.
  bool settle(Row& r, std::vector<Row>& rest) {
    reduce(r);
    if (r.a.empty()) {
      if (r.b != 0) {
        contradiction_ = expand(r.comb);
        return false;
      }
      return true;
    }
    if (!try_pivot(r)) rest.push_back(std::move(r));
    return true;
  }

  void run() {
    std::vector<Row> pending;
    for (std::size_t i = 0; i < s_.rows.size(); ++i) {
      Row r;
      for (const auto& [c, v] : s_.rows[i]) {
        auto& e = r.a[c];
        e = mod(e + v, n_);
        if (e == 0) r.a.erase(c);
      }
      r.b = mod(s_.b[i], n_);
      if (track_) r.comb[i] = 1;
      if (!settle(r, pending)) return;
    }
    // Later pivots may have reached into earlier leftovers.
    bool progress = true;
    while (progress) {
      progress = false;
      std::size_t before = pivots_.size();
      std::vector<Row> next;
      for (auto& r : pending) {
        if (!settle(r, next)) return;
      }
      pending = std::move(next);
      progress = pivots_.size() != before;
    }
    for (auto& r : pending) reduce(r);
    residual_ = std::move(pending);
  }

  const SparseSystem& s_;
  std::int64_t n_;
  bool track_;
  std::vector<Row> pivots_;
  std::vector<std::size_t> pivot_col_;
  std::map<std::size_t, std::size_t> piv_of_;
  std::vector<Row> residual_;
  std::optional<std::vector<std::int64_t>> contradiction_;
};

struct ResidualSolve {
  std::vector<std::size_t> cols;
  SmithSystem system;
};

inline ResidualSolve residual_system(const std::vector<UnitEliminator::Row>& rows, std::int64_t n) {
  std::map<std::size_t, std::size_t> at;
  for (const auto& r : rows) {
    for (const auto& [c, v] : r.a) at.emplace(c, 0);
  }
  ResidualSolve rs;
  for (auto& [c, k] : at) {
    k = rs.cols.size();
    rs.cols.push_back(c);
  }
  rs.system = SmithSystem(rows.size(), rs.cols.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [c, v] : rows[i].a) rs.system.at(i, at[c]) = v;
    rs.system.b[i] = rows[i].b;
  }
  return rs;
}

}  // namespace detail

inline SmithResult sparse_solve(const SparseSystem& sys) {
  const std::int64_t n = sys.modulus;
  auto certify = [&]() -> SmithResult {
    detail::UnitEliminator e(sys, true);
    if (auto y = e.contradiction()) return SmithCertificate{*y};
    auto rs = detail::residual_system(e.residual(), n);
    auto r = smith_solve(rs.system);
    const auto& yr = std::get<SmithCertificate>(r).y;
    std::map<std::size_t, std::int64_t> comb;
    for (std::size_t i = 0; i < yr.size(); ++i) {
      if (yr[i] == 0) continue;
      for (const auto& [row, v] : e.residual()[i].comb) {
        auto& c = comb[row];
        c = detail::mod(static_cast<std::int64_t>((static_cast<__int128>(c) + static_cast<__int128>(yr[i]) * v) % n), n);
      }
    }
    return SmithCertificate{e.expand(comb)};
  };

  detail::UnitEliminator e(sys, false);
  if (e.contradiction()) return certify();
  auto rs = detail::residual_system(e.residual(), n);
  auto r = smith_solve(rs.system);
  if (std::holds_alternative<SmithCertificate>(r)) return certify();
  std::map<std::size_t, std::int64_t> fixed;
  const auto& xr = std::get<SmithSolution>(r).x;
  for (std::size_t k = 0; k < rs.cols.size(); ++k) fixed[rs.cols[k]] = xr[k];
  return SmithSolution{e.back_substitute(fixed)};
}

}  // namespace torlift
