#pragma once

#include <gmpxx.h>

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace efpe {

/// Exact arbitrary-precision rational. All solver arithmetic goes through this type.
using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

/// Parses "num/den", "num" or a plain integer string. Throws std::invalid_argument
/// on malformed text or a zero denominator. The result is canonicalized.
Rational parse_rational(std::string_view text);

/// Canonical text form: "num/den", or "num" when the denominator is 1.
std::string to_string(const Rational& q);

std::vector<std::string> to_strings(std::span<const Rational> v);

Rational sum(std::span<const Rational> v);

/// Sum of absolute coordinate differences.
Rational l1_distance(std::span<const Rational> a, std::span<const Rational> b);

}  // namespace efpe
