#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "entrobound/errors.hpp"

namespace entrobound {

// Declared continuation of an explicit prefix. Explicit specs default to
// tail=none; tail-dependent operations on them fail loudly rather than
// assume a decay.
struct TailModel {
  enum class Kind { none, geometric_extension, zero };
  Kind kind = Kind::none;
  double ratio = 0.0;  // geometric_extension only, strictly inside (0,1)
};

struct ExplicitSpec {
  std::vector<double> values;  // positive, nonincreasing
  TailModel tail;
};

// sigma_n = c * b^{-n}, b > 1
struct GeometricSpec {
  double c, b;
};

// sigma_n = a * n^{-alpha}
struct PolynomialSpec {
  double a, alpha;
};

// sigma_n = a * n^{-alpha} * log(n+1)^{-beta}; log(n+1) keeps n=1 regular.
struct PolyLogSpec {
  double a, alpha, beta;
};

// sigma_n = exp(-a * log^lambda(n)); sigma_1 = 1 by the formula itself.
struct ExpLogSpec {
  double a, lambda;
};

// sigma_n = exp(-a * n^lambda)
struct ExpPolySpec {
  double a, lambda;
};

// sigma_n = exp(-a * e^{lambda n})
struct ExpExpSpec {
  double a, lambda;
};

using SpecVariant = std::variant<ExplicitSpec, GeometricSpec, PolynomialSpec,
                                 PolyLogSpec, ExpLogSpec, ExpPolySpec, ExpExpSpec>;

enum class Family { explicit_values, geometric, polynomial, polylog, explog, exppoly, expexp };

class SequenceSpec {
 public:
  explicit SequenceSpec(SpecVariant v);  // validates, throws SpecParseError

  // Mini-language:
  //   geom:c=<f>,b=<f> | poly:a=<f>,alpha=<f> | polylog:a=<f>,alpha=<f>,beta=<f>
  //   explog:a=<f>,lambda=<f> | exppoly:a=<f>,lambda=<f> | expexp:a=<f>,lambda=<f>
  //   file:<path>
  // Locale-independent; '.' is the decimal separator.
  static SequenceSpec parse(std::string_view text);

  const SpecVariant& variant() const { return v_; }
  Family family() const;
  std::string describe() const;  // canonical spec string for reports

  const ExplicitSpec* as_explicit() const { return std::get_if<ExplicitSpec>(&v_); }

 private:
  SpecVariant v_;
};

}  // namespace entrobound
