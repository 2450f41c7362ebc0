#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qpenal/errors.hpp"

namespace qpenal {

inline constexpr double kCoefficientEpsilon = 1e-12;

// c0 + sum_i c_i x_i over binary x.
struct AffineExpr {
  std::map<int, double> coeffs;
  double constant = 0.0;

  AffineExpr& add(int var, double c) {
    if (var < 0) throw ParameterError("variable index must be non-negative");
    coeffs[var] += c;
    return *this;
  }
  AffineExpr& operator+=(double c) {
    constant += c;
    return *this;
  }
  AffineExpr& operator*=(double c) {
    for (auto& [_, v] : coeffs) v *= c;
    constant *= c;
    return *this;
  }
  double evaluate(std::span<const std::uint8_t> bits) const {
    double v = constant;
    for (const auto& [i, c] : coeffs)
      if (bits[static_cast<std::size_t>(i)]) v += c;
    return v;
  }
};

// Sparse real polynomial over binary variables. Monomials are sorted index
// lists and may hold repeated indices until reduce() applies x^2 = x.
class BinaryPolynomial {
 public:
  using Monomial = std::vector<int>;
  using Terms = std::map<Monomial, double>;

  BinaryPolynomial() = default;
  explicit BinaryPolynomial(double constant) { add({}, constant); }
  explicit BinaryPolynomial(const AffineExpr& e) {
    add({}, e.constant);
    for (const auto& [i, c] : e.coeffs) add({i}, c);
  }

  void add(Monomial m, double c) {
    std::sort(m.begin(), m.end());
    terms_[std::move(m)] += c;
  }

  const Terms& terms() const { return terms_; }

  double coefficient(Monomial m) const {
    std::sort(m.begin(), m.end());
    const auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_)
      if (c != 0.0) d = std::max(d, static_cast<int>(m.size()));
    return d;
  }

  BinaryPolynomial& operator+=(const BinaryPolynomial& o) {
    for (const auto& [m, c] : o.terms_) terms_[m] += c;
    return *this;
  }
  BinaryPolynomial& operator*=(double s) {
    for (auto& [_, c] : terms_) c *= s;
    return *this;
  }
  friend BinaryPolynomial operator+(BinaryPolynomial a, const BinaryPolynomial& b) { return a += b; }
  friend BinaryPolynomial operator*(BinaryPolynomial a, double s) { return a *= s; }
  friend BinaryPolynomial operator*(double s, BinaryPolynomial a) { return a *= s; }

  friend BinaryPolynomial operator*(const BinaryPolynomial& a, const BinaryPolynomial& b) {
    BinaryPolynomial r;
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m;
        m.reserve(ma.size() + mb.size());
        std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
        r.terms_[std::move(m)] += ca * cb;
      }
    }
    return r;
  }

  // Works at any degree; repeated indices multiply the same bit.
  double evaluate(std::span<const std::uint8_t> bits) const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) {
      bool on = true;
      for (int i : m) on = on && bits[static_cast<std::size_t>(i)];
      if (on) v += c;
    }
    return v;
  }

 private:
  Terms terms_;
};

// Applies x_i^m = x_i, merges terms, prunes |c| < 1e-12, and enforces degree <= 2.
inline BinaryPolynomial reduce(const BinaryPolynomial& poly) {
  std::map<BinaryPolynomial::Monomial, double> merged;
  for (const auto& [m, c] : poly.terms()) {
    BinaryPolynomial::Monomial u(m);
    u.erase(std::unique(u.begin(), u.end()), u.end());
    merged[std::move(u)] += c;
  }
  BinaryPolynomial out;
  for (auto& [m, c] : merged) {
    if (std::abs(c) < kCoefficientEpsilon) continue;
    if (m.size() > 2) {
      std::string vars;
      for (int i : m) vars += (vars.empty() ? "x" : "*x") + std::to_string(i);
      throw DegreeError("term " + vars + " has degree " + std::to_string(m.size()) + " after reduction");
    }
    out.add(m, c);
  }
  return out;
}

inline BinaryPolynomial square_affine(const AffineExpr& e) {
  const BinaryPolynomial p(e);
  return reduce(p * p);
}

}  // namespace qpenal
