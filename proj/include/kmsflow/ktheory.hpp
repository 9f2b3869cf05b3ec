#pragma once

#include "kmsflow/dimgroup.hpp"

namespace kmsflow {

class SumNotZero : public Error {
 public:
  explicit SumNotZero(AffineElement residual)
      : Error("coefficient sum is not zero"), residual_(std::move(residual)) {}
  const AffineElement& residual() const { return residual_; }

 private:
  AffineElement residual_;
};

// y with y_n - y_{n+1} = d_n, namely y_n = sum_{k >= n} d_k.
inline GroupElement solve_coboundary(const GroupElement& d) {
  AffineElement total = d.coefficient_sum();
  if (!total.is_zero()) throw SumNotZero(total);
  GroupElement y(d.vertex_count());
  if (d.is_zero()) return y;
  int lo = d.terms().begin()->first, hi = d.terms().rbegin()->first;
  AffineElement acc = AffineElement::zero(d.vertex_count());
  std::map<int, AffineElement> out;
  for (int n = hi; n >= lo; --n) {
    acc += d.coeff(n);
    if (!acc.is_zero()) out.emplace(n, acc);
  }
  return GroupElement(d.vertex_count(), out);
}

// (id - rho)(y)
inline GroupElement coboundary(const GroupElement& y) { return y - shift(y, 1); }

// A class in G / (id - rho)G, stored by its coefficient sum.
struct QuotientClass {
  AffineElement representative_sum;
  bool operator==(const QuotientClass&) const = default;
};

inline QuotientClass class_of(const GroupElement& g) { return {g.coefficient_sum()}; }

enum class K0Verdict { Zero, Positive, NotPositive };

inline K0Verdict k0_positive(const QuotientClass& c) {
  const auto& s = c.representative_sum;
  if (s.is_zero()) return K0Verdict::Zero;
  for (int v = 0; v < s.size(); ++v)
    if (s[v] <= 0) return K0Verdict::NotPositive;
  return K0Verdict::Positive;
}

}  // namespace kmsflow
