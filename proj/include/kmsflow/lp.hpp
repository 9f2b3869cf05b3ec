#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kmsflow/errors.hpp"
#include "kmsflow/rational.hpp"

namespace kmsflow::lp {

// NumericalFailure only comes from the floating-point solver.
enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

template <class T>
struct BasicSolution {
  Status status = Status::Infeasible;
  std::vector<T> x;
  T value{};
};
using Solution = BasicSolution<Rational>;

namespace detail {

// maximize c.x subject to A x <= b with x free. With T = Rational and tol = 0 the
// answer is exact.
//
// The problems here have few variables and many constraints, so the simplex runs
// on the dual  min b.y, A^T y = c, y >= 0  (two phases, artificial columns kept to
// read off B^-1) and x is recovered as the simplex multipliers.
template <class T>
BasicSolution<T> dual_simplex(const std::vector<std::vector<T>>& a, const std::vector<T>& b, const std::vector<T>& c,
                              const T& tol) {
  const std::size_t m = a.size();  // primal rows = dual columns
  const std::size_t n = c.size();  // primal variables = dual rows
  if (b.size() != m) throw DimensionMismatch("lp: rhs length");
  for (const auto& row : a)
    if (row.size() != n) throw DimensionMismatch("lp: row length");

  const std::size_t cols = m + n;  // structural then artificial
  std::vector<std::vector<T>> t(n, std::vector<T>(cols + 1));
  std::vector<int> sign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] < 0) sign[i] = -1;
    for (std::size_t j = 0; j < m; ++j) t[i][j] = a[j][i] * sign[i];
    t[i][m + i] = 1;
    t[i][cols] = c[i] * sign[i];
  }
  std::vector<std::size_t> basis(n);
  for (std::size_t i = 0; i < n; ++i) basis[i] = m + i;

  auto pivot = [&](std::size_t r, std::size_t j) {
    T p = t[r][j];
    for (auto& v : t[r]) v /= p;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == r || t[i][j] == 0) continue;
      T f = t[i][j];
      for (std::size_t k = 0; k <= cols; ++k)
        if (t[r][k] != 0) t[i][k] -= f * t[r][k];
    }
    basis[r] = j;
  };

  // Returns false when the objective is unbounded below.
  auto run = [&](const std::vector<T>& cost, std::size_t allowed) {
    int degenerate = 0;
    while (true) {
      std::vector<T> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = cost[basis[i]];
      std::optional<std::size_t> enter;
      T best = 0;
      const bool bland = degenerate > 50;
      for (std::size_t j = 0; j < allowed; ++j) {
        T d = cost[j];
        for (std::size_t i = 0; i < n; ++i)
          if (t[i][j] != 0 && y[i] != 0) d -= y[i] * t[i][j];
        if (d < -tol && (!enter || (!bland && d < best))) {
          enter = j;
          best = d;
          if (bland) break;
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      T ratio;
      for (std::size_t i = 0; i < n; ++i) {
        if (t[i][*enter] <= tol) continue;
        T q = t[i][cols] / t[i][*enter];
        if (!leave || q < ratio || (q == ratio && basis[i] < basis[*leave])) {
          leave = i;
          ratio = q;
        }
      }
      if (!leave) return false;
      degenerate = ratio == 0 ? degenerate + 1 : 0;
      pivot(*leave, *enter);
    }
  };

  std::vector<T> phase1(cols, 0);
  for (std::size_t i = 0; i < n; ++i) phase1[m + i] = 1;
  run(phase1, cols);
  T infeas = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (basis[i] >= m) infeas += t[i][cols];
  BasicSolution<T> sol;
  if (infeas > tol) {
    // Dual infeasible: the primal is unbounded or infeasible.
    sol.status = Status::Unbounded;
    return sol;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (basis[i] < m) continue;
    for (std::size_t j = 0; j < m; ++j)
      if (t[i][j] > tol || t[i][j] < -tol) {
        pivot(i, j);
        break;
      }
  }
  std::vector<T> phase2(cols, 0);
  for (std::size_t j = 0; j < m; ++j) phase2[j] = b[j];
  if (!run(phase2, m)) {
    sol.status = Status::Infeasible;
    return sol;
  }
  sol.status = Status::Optimal;
  sol.x.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    T pi = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (t[k][m + i] != 0) pi += phase2[basis[k]] * t[k][m + i];
    sol.x[i] = pi * sign[i];
  }
  sol.value = 0;
  for (std::size_t i = 0; i < n; ++i) sol.value += c[i] * sol.x[i];
  return sol;
}

}  // namespace detail

inline Solution maximize(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b,
                         const std::vector<Rational>& c) {
  return detail::dual_simplex<Rational>(a, b, c, Rational(0));
}

// Floating-point variant for searches whose result is checked exactly afterwards.
// Same dual formulation, but a revised simplex that refactors the basis at every
// step, so rounding does not pile up over many pivots. Rows and columns are
// equilibrated first.
inline BasicSolution<long double> maximize_approx(std::vector<std::vector<long double>> a, std::vector<long double> b,
                                                  std::vector<long double> c) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const std::size_t n = c.size();
  if (b.size() != a.size()) throw DimensionMismatch("lp: rhs length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != n) throw DimensionMismatch("lp: row length");
    long double s = 0;
    for (auto v : a[i]) s = std::max(s, std::fabs(v));
    if (s == 0) continue;
    for (auto& v : a[i]) v /= s;
    b[i] /= s;
  }
  {
    // Parallel copies of a row make the dual basis singular; keep the tightest.
    std::map<std::vector<long double>, std::size_t> seen;
    std::vector<std::vector<long double>> ua;
    std::vector<long double> ub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto [it, fresh] = seen.try_emplace(a[i], ua.size());
      if (fresh) {
        ua.push_back(a[i]);
        ub.push_back(b[i]);
      } else {
        ub[it->second] = std::min(ub[it->second], b[i]);
      }
    }
    a = std::move(ua);
    b = std::move(ub);
  }
  const std::size_t m = a.size();
  std::vector<long double> col(n, 1.0L);
  for (std::size_t j = 0; j < n; ++j) {
    long double s = 0;
    for (const auto& row : a) s = std::max(s, std::fabs(row[j]));
    if (s == 0) continue;
    col[j] = s;
    for (auto& row : a) row[j] /= s;
    c[j] /= s;
  }
  const long double tol = 1e-12L, pivot_tol = 1e-9L;

  // Dual: min b.y  s.t.  sign_i (A^T y)_i + z_i = sign_i c_i,  y, z >= 0.
  std::vector<long double> sign(n, 1.0L);
  for (std::size_t i = 0; i < n; ++i)
    if (c[i] < 0) sign[i] = -1;
  Mat cols = Mat::Zero(n, m + n);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) cols(i, j) = sign[i] * a[j][i];
  for (std::size_t i = 0; i < n; ++i) cols(i, m + i) = 1;
  auto column = [&](std::size_t j) { return cols.col(j); };
  // A tiny perturbation of the right-hand side breaks the heavy degeneracy
  // (c is usually a unit vector); x is read off the active rows afterwards.
  Vec rhs(n);
  long double cmax = 0;
  for (std::size_t i = 0; i < n; ++i) cmax = std::max(cmax, std::fabs(c[i]));
  for (std::size_t i = 0; i < n; ++i) rhs[i] = sign[i] * c[i] + cmax * 1e-10L * (1 + static_cast<long double>(i % 7) / 7);
  std::vector<std::size_t> basis(n);
  for (std::size_t i = 0; i < n; ++i) basis[i] = m + i;

  auto factor = [&]() {
    Mat bm(n, n);
    for (std::size_t k = 0; k < n; ++k) bm.col(k) = column(basis[k]);
    return Eigen::PartialPivLU<Mat>(bm);
  };
  // 1 optimal, 0 unbounded below, -1 iteration cap
  auto run = [&](const std::vector<long double>& cost, std::size_t allowed) {
    int degenerate = 0;
    for (std::size_t iter = 0; iter < 50 * (m + n) + 1000; ++iter) {
      auto lu = factor();
      Vec xb = lu.solve(rhs);
      Vec cb(n);
      for (std::size_t k = 0; k < n; ++k) cb[k] = cost[basis[k]];
      Vec y = lu.transpose().solve(cb);
      std::vector<char> in_basis(m + n, 0);
      for (auto j : basis) in_basis[j] = 1;
      Vec dual = cols.leftCols(allowed).transpose() * y;
      std::optional<std::size_t> enter;
      long double best = -tol;
      const bool bland = degenerate > 50;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (in_basis[j]) continue;
        long double d = cost[j] - dual[j];
        if (d < best || (bland && d < -tol && !enter)) {
          enter = j;
          best = d;
          if (bland) break;
        }
      }
      if (!enter) return 1;
      Vec w = lu.solve(column(*enter));
      // Harris ratio test: bound the step with a little slack, then take the
      // largest pivot among the rows that fit (the first index once cycling).
      long double theta = std::numeric_limits<long double>::infinity();
      for (std::size_t k = 0; k < n; ++k)
        if (w[k] > pivot_tol) theta = std::min(theta, (std::max(0.0L, xb[k]) + tol) / w[k]);
      std::optional<std::size_t> leave;
      long double ratio = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (w[k] <= pivot_tol) continue;
        long double q = std::max(0.0L, xb[k]) / w[k];
        if (q > theta) continue;
        bool better = !leave || (bland ? basis[k] < basis[*leave] : w[k] > w[*leave]);
        if (better) {
          leave = k;
          ratio = q;
        }
      }
      if (!leave) return 0;
      degenerate = ratio <= tol ? degenerate + 1 : 0;
      basis[*leave] = *enter;
    }
    return -1;
  };

  BasicSolution<long double> sol;
  sol.status = Status::NumericalFailure;
  std::vector<long double> phase1(m + n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) phase1[m + i] = 1;
  if (run(phase1, m + n) < 0) {
    return sol;
  }
  {
    Vec xb = factor().solve(rhs);
    long double infeas = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (basis[k] >= m) infeas += std::fabs(xb[k]);
    if (infeas > 1e-9L) {
      sol.status = Status::Unbounded;
      return sol;
    }
  }
  // Swap leftover artificials (at level zero) for structural columns.
  for (std::size_t k = 0; k < n; ++k) {
    if (basis[k] < m) continue;
    auto lu = factor();
    std::vector<char> in_basis(m + n, 0);
    for (auto j : basis) in_basis[j] = 1;
    std::size_t pick = m;
    long double bestw = 1e-9L;
    // Row k of B^-1 times each column.
    Vec ek = Vec::Zero(n);
    ek[k] = 1;
    Vec rowk = lu.transpose().solve(ek);
    Vec wrow = cols.leftCols(m).transpose() * rowk;
    for (std::size_t j = 0; j < m; ++j) {
      if (in_basis[j]) continue;
      long double wk = std::fabs(wrow[j]);
      if (wk > bestw) {
        bestw = wk;
        pick = j;
      }
    }
    if (pick < m) basis[k] = pick;
  }
  std::vector<long double> phase2(m + n, 0.0L);
  for (std::size_t j = 0; j < m; ++j) phase2[j] = b[j];
  int r = run(phase2, m);
  if (r == 0) {
    sol.status = Status::Infeasible;
    return sol;
  }
  if (r < 0) {
    return sol;
  }
  // x solves the active primal rows. If those are singular, or an artificial is
  // left in the basis, fall back to the simplex multipliers.
  bool structural = std::all_of(basis.begin(), basis.end(), [&](std::size_t j) { return j < m; });
  Vec x(n);
  bool have = false;
  if (structural) {
    Mat ab(n, n);
    Vec bb(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) ab(k, i) = a[basis[k]][i];
      bb[k] = b[basis[k]];
    }
    Eigen::FullPivLU<Mat> lu(ab);
    if (lu.isInvertible()) {
      x = lu.solve(bb);
      have = x.allFinite();
    }
  }
  if (!have) {
    Vec cb(n);
    for (std::size_t k = 0; k < n; ++k) cb[k] = phase2[basis[k]];
    Vec pi = factor().transpose().solve(cb);
    for (std::size_t i = 0; i < n; ++i) x[i] = pi[i] * sign[i];
  }
  sol.x.assign(n, 0.0L);
  sol.value = 0;
  for (std::size_t j = 0; j < n; ++j) {
    sol.value += c[j] * x[j];
    sol.x[j] = x[j] / col[j];
    if (!std::isfinite(sol.x[j])) return sol;
  }
  sol.status = Status::Optimal;
  return sol;
}

}  // namespace kmsflow::lp
