#pragma once

// Random generators shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_set>
#include <vector>

#include "torlift/cohomology.hpp"
#include "torlift/smith.hpp"
#include "torlift/torus.hpp"

namespace testsupport {

using namespace torlift;

inline std::int64_t pick(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline TorusPoint random_point(std::mt19937_64& rng, std::size_t n, std::int64_t m) {
  std::vector<Angle> a;
  for (std::size_t i = 0; i < n; ++i) a.emplace_back(pick(rng, 0, m - 1), m);
  return TorusPoint(std::move(a));
}

// Product of a few elementary and signed-permutation matrices.
inline TorusAut random_unimodular(std::mt19937_64& rng, std::size_t n, int steps = 4) {
  auto M = TorusAut::identity(n);
  if (n == 0) return M;
  for (int s = 0; s < steps; ++s) {
    std::vector<std::int64_t> e(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1;
    auto i = static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(n) - 1));
    auto j = static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(n) - 1));
    if (i != j && pick(rng, 0, 1)) {
      e[i * n + j] = pick(rng, 0, 1) ? 1 : -1;
    } else if (i != j) {
      e[i * n + i] = e[j * n + j] = 0;
      e[i * n + j] = e[j * n + i] = 1;
    } else {
      e[i * n + i] = -1;
    }
    M = M * TorusAut(n, e);
  }
  return M;
}

inline PolarPoint random_polar(std::mt19937_64& rng, std::size_t n, std::int64_t m) {
  std::vector<PolarCoord> c(n);
  for (auto& x : c) {
    x.r2 = Rational(pick(rng, 0, 3), pick(rng, 1, 3));
    if (x.r2 != 0) x.theta = Angle(pick(rng, 0, m - 1), m);
  }
  return PolarPoint(std::move(c));
}

// A module with `orbits` torus orbits, each free or a single fixed point,
// and one generator per automorphism in `auts`. A generator permutes the
// orbits and acts by (o, th) -> (pi(o), rho th + c_o), so that
// a (u x) = rho(a)u (a x) holds.
inline FiniteModule random_module(std::mt19937_64& rng, std::size_t n, std::int64_t m, std::int64_t fiber_order,
                                  std::size_t orbits, bool free, const std::vector<TorusAut>& auts,
                                  std::size_t k = 1) {
  FiniteModule M;
  M.torus = TorusGrid(n, m);
  const std::size_t per = free ? M.torus.size() : 1;
  M.points = orbits * per;
  M.fiber_order = fiber_order;
  M.fiber_rank = k;
  M.torus_table.resize(M.torus.size() * M.points);
  for (std::size_t u = 0; u < M.torus.size(); ++u) {
    for (std::size_t x = 0; x < M.points; ++x) {
      std::size_t o = x / per, th = x % per;
      M.torus_table[u * M.points + x] = static_cast<std::int32_t>(o * per + (free ? M.torus.add(th, u) : 0));
    }
  }
  for (const auto& a : auts) {
    std::vector<std::size_t> pi(orbits);
    for (std::size_t o = 0; o < orbits; ++o) pi[o] = o;
    std::shuffle(pi.begin(), pi.end(), rng);
    std::vector<std::int32_t> t(M.points);
    for (std::size_t o = 0; o < orbits; ++o) {
      std::size_t c = free ? static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(per) - 1)) : 0;
      for (std::size_t th = 0; th < per; ++th) {
        std::size_t img = free ? M.torus.add(M.torus.apply(a, th), c) : 0;
        t[o * per + th] = static_cast<std::int32_t>(pi[o] * per + img);
      }
    }
    M.generator_auts.push_back(a);
    M.generator_table.push_back(std::move(t));
    M.generator_names.push_back("a" + std::to_string(M.generator_names.size() + 1));
  }
  for (std::size_t x = 0; x < M.points; ++x) M.point_labels.push_back("x" + std::to_string(x));
  M.finalize();
  return M;
}

inline CochainTable random_cochain(std::mt19937_64& rng, std::size_t degree, const FiniteModule& M) {
  CochainTable t(degree, M);
  for (std::size_t a = 0; a < t.arguments(); ++a) {
    for (std::size_t x = 0; x < M.points; ++x) {
      for (std::size_t c = 0; c < M.fiber_rank; ++c) t.set(a, x, c, pick(rng, 0, M.fiber_order - 1));
    }
  }
  return t;
}

// Exhaustive feasibility of A x = b (mod m'), by meet in the middle over
// the two halves of the unknowns. Residual vectors are packed base m'.
inline bool feasible_by_enumeration(const SmithSystem& s) {
  const auto n = s.modulus;
  const std::size_t h = s.cols / 2;
  auto pack = [&](const std::vector<std::int64_t>& v) {
    std::uint64_t key = 0;
    for (auto x : v) key = key * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(detail::mod(x, n));
    return key;
  };
  // every assignment of columns [lo, hi), as A_part x_part
  auto sweep = [&](std::size_t lo, std::size_t hi, auto&& visit) {
    std::vector<std::int64_t> x(hi - lo, 0), acc(s.rows, 0);
    while (true) {
      visit(acc);
      std::size_t i = 0;
      while (i < x.size()) {
        for (std::size_t r = 0; r < s.rows; ++r) acc[r] = detail::mod(acc[r] + s.at(r, lo + i), n);
        if (++x[i] < n) break;
        x[i] = 0;  // the column has now been added n times, back to start
        ++i;
      }
      if (i == x.size()) return;
    }
  };
  std::unordered_set<std::uint64_t> left;
  sweep(0, h, [&](const std::vector<std::int64_t>& acc) { left.insert(pack(acc)); });
  bool found = false;
  sweep(h, s.cols, [&](const std::vector<std::int64_t>& acc) {
    if (found) return;
    std::vector<std::int64_t> need(s.rows);
    for (std::size_t r = 0; r < s.rows; ++r) need[r] = s.b[r] - acc[r];
    found = left.count(pack(need)) > 0;
  });
  return found;
}

// A random system that is infeasible reasonably often: entries are drawn
// from a few multiples of a random divisor of the modulus.
inline SmithSystem random_system(std::mt19937_64& rng, std::size_t max_cols, std::size_t max_rows,
                                 const std::vector<std::int64_t>& moduli) {
  auto n = moduli[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(moduli.size()) - 1))];
  auto cols = static_cast<std::size_t>(pick(rng, 1, static_cast<std::int64_t>(max_cols)));
  auto rows = static_cast<std::size_t>(pick(rng, 1, static_cast<std::int64_t>(max_rows)));
  SmithSystem s(rows, cols, n);
  std::vector<std::int64_t> divs;
  for (std::int64_t d = 1; d <= n; ++d) if (n % d == 0 && d < n) divs.push_back(d);
  for (std::size_t i = 0; i < rows; ++i) {
    auto d = divs[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(divs.size()) - 1))];
    for (std::size_t j = 0; j < cols; ++j) s.at(i, j) = pick(rng, 0, 2) == 0 ? 0 : d * pick(rng, 0, n - 1);
    s.b[i] = pick(rng, 0, n - 1);
  }
  return s;
}

}  // namespace testsupport
