#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace reachavoid {

/// Coefficients with absolute value below this are dropped from the term map.
inline constexpr double kZeroThreshold = 1e-14;

/// Exponent vector of a monomial x1^a1 * ... * xn^an.
class Monomial {
 public:
  Monomial() = default;
  /// The constant monomial in `dimension` variables.
  explicit Monomial(int dimension);
  explicit Monomial(std::vector<int> exponents);

  /// The monomial x_{index} (zero-based) in `dimension` variables.
  static Monomial Variable(int dimension, int index);

  int dimension() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int exponent(int i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const { return exponents_; }

  Monomial operator*(const Monomial& other) const;

  /// Graded lexicographic order: total degree first, then larger leading
  /// exponents first (1 < x < y < x^2 < xy < y^2 for two variables).
  bool operator<(const Monomial& other) const;
  bool operator==(const Monomial& other) const {
    return exponents_ == other.exponents_;
  }

  double Evaluate(std::span<const double> point) const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

class Polynomial;
using PolyVector = std::vector<Polynomial>;

/// Sparse multivariate polynomial with real coefficients in a fixed number of
/// variables. The zero polynomial has an empty term map.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double>;

  Polynomial() = default;
  explicit Polynomial(int dimension);
  Polynomial(int dimension, double constant);
  Polynomial(const Monomial& monomial, double coefficient = 1.0);
  Polynomial(int dimension, const TermMap& terms);

  static Polynomial Variable(int dimension, int index);

  int dimension() const { return dimension_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Total degree; the zero polynomial reports 0.
  int degree() const;
  double coefficient(const Monomial& m) const;
  double max_abs_coefficient() const;

  /// Adds `coefficient * monomial` in place, pruning the term if it cancels.
  void AddTerm(const Monomial& monomial, double coefficient);

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double scalar) const;
  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scalar);
  friend Polynomial operator*(double scalar, const Polynomial& p) {
    return p * scalar;
  }
  bool operator==(const Polynomial& other) const;

  Polynomial Pow(int exponent) const;
  Polynomial Derivative(int variable) const;
  PolyVector Gradient() const;

  /// Throws std::invalid_argument on a length mismatch and std::range_error
  /// when the value is not finite.
  double Evaluate(std::span<const double> point) const;

  /// Parseable text form "c * x1^a1 * x2^a2 + ...", round-trip exact.
  std::string ToString() const;

 private:
  void CheckSameDimension(const Polynomial& other) const;

  int dimension_ = 0;
  TermMap terms_;
};

/// Lie derivative grad(v) . f.
Polynomial LieDerivative(const Polynomial& v, const PolyVector& f);

/// Checks that every entry of `f` has dimension f.size().
void ValidatePolyVector(const PolyVector& f);

/// All monomials of total degree <= `degree` in `dimension` variables, in
/// graded lexicographic order. The count is C(dimension + degree, degree).
std::vector<Monomial> MonomialBasis(int dimension, int degree);

/// Monomials of total degree exactly `degree`, graded-lex order.
std::vector<Monomial> HomogeneousMonomials(int dimension, int degree);

}  // namespace reachavoid
