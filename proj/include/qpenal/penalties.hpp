#pragma once

// Exponential penalty family (1/s) e^{r h} for inequality constraints h <= 0,
// truncated to second order so the result stays quadratic.

#include <cmath>
#include <string>
#include <variant>

#include "qpenal/binary_polynomial.hpp"
#include "qpenal/errors.hpp"

namespace qpenal {

enum class PenaltyFamily { F1, F2, F3 };

inline std::string to_string(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::F1: return "F1";
    case PenaltyFamily::F2: return "F2";
    case PenaltyFamily::F3: return "F3";
  }
  return "?";
}

inline PenaltyFamily parse_family(const std::string& s) {
  if (s == "F1" || s == "f1") return PenaltyFamily::F1;
  if (s == "F2" || s == "f2") return PenaltyFamily::F2;
  if (s == "F3" || s == "f3") return PenaltyFamily::F3;
  throw ParameterError("unknown penalty family '" + s + "' (expected F1, F2 or F3)");
}

// F1: r = k,   s = 1
// F2: r = a^k, s = a^k       (a > 1)
// F3: r = b^k, s = a^k       (1 < a < b)
// p scales the whole penalty. a and b are ignored by families that do not use them.
struct ExponentialPenaltyParams {
  PenaltyFamily family = PenaltyFamily::F1;
  int k = 1;
  double a = 0.0;
  double b = 0.0;
  double p = 1.0;

  void validate() const {
    if (k < 0) throw ParameterError("penalty k must be >= 0");
    if (!(p > 0.0)) throw ParameterError("penalty multiplier p must be > 0");
    if (family != PenaltyFamily::F1 && !(a > 1.0)) throw ParameterError("F2/F3 need a > 1");
    if (family == PenaltyFamily::F3 && !(b > a)) throw ParameterError("F3 needs b > a");
  }

  double rate() const {
    switch (family) {
      case PenaltyFamily::F1: return static_cast<double>(k);
      case PenaltyFamily::F2: return std::pow(a, k);
      case PenaltyFamily::F3: return std::pow(b, k);
    }
    return 0.0;
  }

  double inverse_magnitude() const { return family == PenaltyFamily::F1 ? 1.0 : std::pow(a, k); }

  // Coefficients of h and h^2 in p * (r/s * h + r^2/(2s) * h^2).
  double linear_coefficient() const { return p * rate() / inverse_magnitude(); }
  double quadratic_coefficient() const {
    const double r = rate();
    return p * r * r / (2.0 * inverse_magnitude());
  }

  bool operator==(const ExponentialPenaltyParams&) const = default;
};

struct SlackQuadratic {
  double lambda_ineq = 1.0;
};

struct PenaltyWeights {
  double lambda_eq = 1.0;
  std::variant<ExponentialPenaltyParams, SlackQuadratic> inequality;

  void validate() const {
    if (!(lambda_eq > 0.0)) throw ParameterError("lambda_eq must be > 0");
    if (const auto* e = std::get_if<ExponentialPenaltyParams>(&inequality))
      e->validate();
    else if (!(std::get<SlackQuadratic>(inequality).lambda_ineq > 0.0))
      throw ParameterError("lambda_ineq must be > 0");
  }
};

// Penalty value at constraint value h, as seen by the minimization objective.
inline double exponential_penalty_value(double h, const ExponentialPenaltyParams& params) {
  return params.linear_coefficient() * h + params.quadratic_coefficient() * h * h;
}

inline BinaryPolynomial exponential_penalty(const AffineExpr& h, const ExponentialPenaltyParams& params) {
  params.validate();
  const BinaryPolynomial lin(h);
  BinaryPolynomial poly = params.linear_coefficient() * lin;
  poly += params.quadratic_coefficient() * (lin * lin);
  return reduce(poly);
}

}  // namespace qpenal
