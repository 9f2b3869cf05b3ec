#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "kmsflow/errors.hpp"
#include "kmsflow/rational.hpp"

namespace kmsflow {

class Simplex {
 public:
  explicit Simplex(int vertex_count) : n_(vertex_count) {
    if (vertex_count < 1) throw InvalidArgument("simplex needs at least one vertex");
  }
  int vertex_count() const { return n_; }
  bool operator==(const Simplex&) const = default;

 private:
  int n_;
};

// A closed face, spanned by a set of vertices of the ambient simplex.
class Face {
 public:
  Face(const Simplex& parent, std::vector<int> vertices) : n_(parent.vertex_count()), v_(std::move(vertices)) {
    std::sort(v_.begin(), v_.end());
    v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
    if (v_.empty()) throw InvalidArgument("face must have at least one vertex");
    if (v_.front() < 0 || v_.back() >= n_) throw InvalidArgument("face vertex out of range");
  }
  static Face whole(const Simplex& s) {
    std::vector<int> all(s.vertex_count());
    for (int i = 0; i < s.vertex_count(); ++i) all[i] = i;
    return Face(s, all);
  }
  int vertex_count() const { return n_; }
  const std::vector<int>& vertices() const { return v_; }
  bool contains(int v) const { return std::binary_search(v_.begin(), v_.end(), v); }
  std::vector<int> complement() const {
    std::vector<int> out;
    for (int i = 0; i < n_; ++i)
      if (!contains(i)) out.push_back(i);
    return out;
  }
  bool operator==(const Face&) const = default;

 private:
  int n_;
  std::vector<int> v_;
};

// An affine function on the simplex, stored by its vertex values.
class AffineElement {
 public:
  AffineElement() = default;
  explicit AffineElement(std::vector<Rational> values) : values_(std::move(values)) {}
  static AffineElement constant(int n, const Rational& c) { return AffineElement(std::vector<Rational>(n, c)); }
  static AffineElement zero(int n) { return constant(n, 0); }

  int size() const { return static_cast<int>(values_.size()); }
  const Rational& operator[](int v) const { return values_.at(v); }
  Rational& operator[](int v) { return values_.at(v); }
  const std::vector<Rational>& values() const { return values_; }

  bool is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](const Rational& q) { return q == 0; });
  }

  AffineElement& operator+=(const AffineElement& o) {
    check(o);
    for (int i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  AffineElement& operator-=(const AffineElement& o) {
    check(o);
    for (int i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  AffineElement& operator*=(const Rational& c) {
    for (auto& q : values_) q *= c;
    return *this;
  }
  friend AffineElement operator+(AffineElement a, const AffineElement& b) { return a += b; }
  friend AffineElement operator-(AffineElement a, const AffineElement& b) { return a -= b; }
  friend AffineElement operator*(AffineElement a, const Rational& c) { return a *= c; }
  friend AffineElement operator*(const Rational& c, AffineElement a) { return a *= c; }
  AffineElement operator-() const { return *this * Rational(-1); }
  bool operator==(const AffineElement& o) const { return values_ == o.values_; }

 private:
  void check(const AffineElement& o) const {
    if (o.size() != size()) throw DimensionMismatch("affine elements of different dimension");
  }
  std::vector<Rational> values_;
};

inline Rational affine_eval(const AffineElement& a, const std::vector<Rational>& weights) {
  if (static_cast<int>(weights.size()) != a.size()) throw DimensionMismatch("weight vector length differs from vertex count");
  Rational total = 0, acc = 0;
  for (int i = 0; i < a.size(); ++i) {
    if (weights[i] < 0) throw InvalidArgument("negative barycentric weight");
    total += weights[i];
    acc += weights[i] * a[i];
  }
  if (total != 1) throw InvalidArgument("barycentric weights must sum to 1");
  return acc;
}

// Affine and positive on a closed face iff positive at each of its vertices.
inline bool affine_strictly_positive(const AffineElement& a, const Face& f) {
  if (a.size() != f.vertex_count()) throw DimensionMismatch("face and element live on different simplices");
  for (int v : f.vertices())
    if (a[v] <= 0) return false;
  return true;
}

// `restricted` lists values on the face vertices, in the face's (sorted) order.
inline AffineElement extend_from_face(const std::vector<Rational>& restricted, const Face& f, int x0,
                                      const Rational& excess) {
  if (static_cast<int>(restricted.size()) != static_cast<int>(f.vertices().size()))
    throw DimensionMismatch("restricted values do not match the face");
  if (x0 < 0 || x0 >= f.vertex_count()) throw InvalidArgument("x0 out of range");
  if (f.contains(x0)) throw InvalidArgument("x0 lies in the face");
  if (excess <= 0) throw InvalidArgument("excess must be positive");
  Rational top = *std::max_element(restricted.begin(), restricted.end());
  AffineElement b = AffineElement::constant(f.vertex_count(), top);
  for (std::size_t i = 0; i < restricted.size(); ++i) b[f.vertices()[i]] = restricted[i];
  b[x0] = top + excess;
  return b;
}

// Same, for a full-length element whose off-face values are ignored.
inline AffineElement extend_from_face(const AffineElement& a, const Face& f, int x0, const Rational& excess) {
  std::vector<Rational> r;
  for (int v : f.vertices()) r.push_back(a[v]);
  return extend_from_face(r, f, x0, excess);
}

}  // namespace kmsflow
