#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "reachavoid/poly.h"

namespace reachavoid {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses text such as "2.5 * x1^2 * x2 - x3 + (1 - x1)^2" into a polynomial
/// in `dimension` variables named x1..xn. Unit coefficients and exponents may
/// be omitted; parentheses, integer powers and division by constants are
/// accepted.
Polynomial ParsePolynomial(std::string_view text, int dimension);

}  // namespace reachavoid
