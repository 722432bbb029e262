#include "reachavoid/poly.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace reachavoid {

Monomial::Monomial(int dimension) : exponents_(dimension, 0) {
  if (dimension <= 0) {
    throw std::invalid_argument("monomial dimension must be positive");
  }
}

Monomial::Monomial(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  if (exponents_.empty()) {
    throw std::invalid_argument("monomial dimension must be positive");
  }
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("negative monomial exponent");
    degree_ += e;
  }
}

Monomial Monomial::Variable(int dimension, int index) {
  std::vector<int> e(dimension, 0);
  e.at(index) = 1;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (dimension() != other.dimension()) {
    throw std::invalid_argument("monomial dimension mismatch");
  }
  Monomial out = *this;
  for (int i = 0; i < dimension(); ++i) out.exponents_[i] += other.exponents_[i];
  out.degree_ += other.degree_;
  return out;
}

bool Monomial::operator<(const Monomial& other) const {
  if (degree_ != other.degree_) return degree_ < other.degree_;
  // Larger leading exponent sorts first within a degree.
  return other.exponents_ < exponents_;
}

double Monomial::Evaluate(std::span<const double> point) const {
  double value = 1.0;
  for (int i = 0; i < dimension(); ++i) {
    int e = exponents_[i];
    double base = point[i];
    double acc = 1.0;
    while (e > 0) {
      if (e & 1) acc *= base;
      base *= base;
      e >>= 1;
    }
    value *= acc;
  }
  return value;
}

Polynomial::Polynomial(int dimension) : dimension_(dimension) {
  if (dimension <= 0) {
    throw std::invalid_argument("polynomial dimension must be positive");
  }
}

Polynomial::Polynomial(int dimension, double constant) : Polynomial(dimension) {
  AddTerm(Monomial(dimension), constant);
}

Polynomial::Polynomial(const Monomial& monomial, double coefficient)
    : dimension_(monomial.dimension()) {
  AddTerm(monomial, coefficient);
}

Polynomial::Polynomial(int dimension, const TermMap& terms)
    : Polynomial(dimension) {
  for (const auto& [m, c] : terms) {
    if (m.dimension() != dimension) {
      throw std::invalid_argument("monomial dimension mismatch");
    }
    AddTerm(m, c);
  }
}

Polynomial Polynomial::Variable(int dimension, int index) {
  return Polynomial(Monomial::Variable(dimension, index));
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
  double out = 0.0;
  for (const auto& [m, c] : terms_) out = std::max(out, std::abs(c));
  return out;
}

void Polynomial::AddTerm(const Monomial& monomial, double coefficient) {
  if (monomial.dimension() != dimension_) {
    throw std::invalid_argument("monomial dimension mismatch");
  }
  auto [it, inserted] = terms_.try_emplace(monomial, coefficient);
  if (!inserted) it->second += coefficient;
  if (std::abs(it->second) < kZeroThreshold) terms_.erase(it);
}

void Polynomial::CheckSameDimension(const Polynomial& other) const {
  if (dimension_ != other.dimension_) {
    throw std::invalid_argument("polynomial dimension mismatch: " +
                                std::to_string(dimension_) + " vs " +
                                std::to_string(other.dimension_));
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  CheckSameDimension(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  CheckSameDimension(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scalar) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scalar;
    if (std::abs(it->second) < kZeroThreshold) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial out = *this;
  out += other;
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial out = *this;
  out -= other;
  return out;
}

Polynomial Polynomial::operator*(double scalar) const {
  Polynomial out = *this;
  out *= scalar;
  return out;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  CheckSameDimension(other);
  // Accumulate without pruning so intermediate cancellations stay exact.
  TermMap acc;
  for (const auto& [m1, c1] : terms_) {
    for (const auto& [m2, c2] : other.terms_) {
      acc[m1 * m2] += c1 * c2;
    }
  }
  Polynomial out(dimension_);
  for (auto& [m, c] : acc) {
    if (std::abs(c) >= kZeroThreshold) out.terms_.emplace_hint(out.terms_.end(), m, c);
  }
  return out;
}

bool Polynomial::operator==(const Polynomial& other) const {
  return dimension_ == other.dimension_ && terms_ == other.terms_;
}

Polynomial Polynomial::Pow(int exponent) const {
  if (exponent < 0) throw std::invalid_argument("negative polynomial power");
  Polynomial result(dimension_, 1.0);
  Polynomial base = *this;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

Polynomial Polynomial::Derivative(int variable) const {
  if (variable < 0 || variable >= dimension_) {
    throw std::invalid_argument("derivative variable out of range");
  }
  Polynomial out(dimension_);
  for (const auto& [m, c] : terms_) {
    const int e = m.exponent(variable);
    if (e == 0) continue;
    std::vector<int> ex = m.exponents();
    ex[variable] -= 1;
    out.AddTerm(Monomial(std::move(ex)), c * e);
  }
  return out;
}

PolyVector Polynomial::Gradient() const {
  PolyVector g;
  g.reserve(dimension_);
  for (int i = 0; i < dimension_; ++i) g.push_back(Derivative(i));
  return g;
}

double Polynomial::Evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dimension_) {
    throw std::invalid_argument("evaluation point has length " +
                                std::to_string(point.size()) + ", expected " +
                                std::to_string(dimension_));
  }
  double value = 0.0;
  for (const auto& [m, c] : terms_) value += c * m.Evaluate(point);
  if (!std::isfinite(value)) {
    throw std::range_error("polynomial evaluation is not finite");
  }
  return value;
}

std::string Polynomial::ToString() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  char buf[64];
  for (const auto& [m, c] : terms_) {
    double mag = c;
    if (!first) {
      out += c < 0 ? " - " : " + ";
      mag = std::abs(c);
    }
    // Shortest digits that read back to the same double.
    const bool unit = m.degree() > 0 && std::abs(mag) == 1.0;
    if (unit) {
      if (mag < 0) out += "-";
    } else {
      out.append(buf, std::to_chars(buf, buf + sizeof(buf), mag).ptr);
    }
    bool bare = unit;
    for (int i = 0; i < m.dimension(); ++i) {
      const int e = m.exponent(i);
      if (e == 0) continue;
      out += bare ? "x" : " * x";
      out += std::to_string(i + 1);
      if (e > 1) out += "^" + std::to_string(e);
      bare = false;
    }
    first = false;
  }
  return out;
}

Polynomial LieDerivative(const Polynomial& v, const PolyVector& f) {
  if (static_cast<int>(f.size()) != v.dimension()) {
    throw std::invalid_argument("vector field length " +
                                std::to_string(f.size()) +
                                " does not match polynomial dimension " +
                                std::to_string(v.dimension()));
  }
  Polynomial out(v.dimension());
  for (int i = 0; i < v.dimension(); ++i) {
    Polynomial di = v.Derivative(i);
    if (di.is_zero()) continue;
    out += di * f[i];
  }
  return out;
}

void ValidatePolyVector(const PolyVector& f) {
  if (f.empty()) throw std::invalid_argument("empty vector field");
  const int n = static_cast<int>(f.size());
  for (const Polynomial& p : f) {
    if (p.dimension() != n) {
      throw std::invalid_argument("vector field entry has dimension " +
                                  std::to_string(p.dimension()) +
                                  ", expected " + std::to_string(n));
    }
  }
}

namespace {

void EnumerateHomogeneous(int dimension, int degree, int index,
                          std::vector<int>& current,
                          std::vector<Monomial>& out) {
  if (index == dimension - 1) {
    current[index] = degree;
    out.emplace_back(current);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[index] = e;
    EnumerateHomogeneous(dimension, degree - e, index + 1, current, out);
  }
  current[index] = 0;
}

}  // namespace

std::vector<Monomial> HomogeneousMonomials(int dimension, int degree) {
  if (dimension <= 0) throw std::invalid_argument("dimension must be positive");
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");
  std::vector<Monomial> out;
  std::vector<int> current(dimension, 0);
  EnumerateHomogeneous(dimension, degree, 0, current, out);
  return out;
}

std::vector<Monomial> MonomialBasis(int dimension, int degree) {
  std::vector<Monomial> out;
  for (int d = 0; d <= degree; ++d) {
    auto layer = HomogeneousMonomials(dimension, d);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

}  // namespace reachavoid
