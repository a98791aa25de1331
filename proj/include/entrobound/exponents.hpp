#pragma once

#include <cmath>
#include <limits>

#include "entrobound/errors.hpp"

namespace entrobound {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// (p, q) with the derived conjugate exponent of the active branch and the
// quasi-norm constants C_p = max{1, 2^{1/p-1}}. 1/inf is an exact 0.
class ExponentPair {
 public:
  ExponentPair(double p, double q) : p_(p), q_(q) {
    check(p, "p");
    check(q, "q");
  }

  double p() const { return p_; }
  double q() const { return q_; }
  double inv_p() const { return p_ == kInf ? 0.0 : 1.0 / p_; }
  double inv_q() const { return q_ == kInf ? 0.0 : 1.0 / q_; }

  bool p_less_q() const { return inv_p() > inv_q(); }
  bool p_greater_q() const { return inv_p() < inv_q(); }
  bool equal() const { return inv_p() == inv_q(); }

  // 1/s = 1/p - 1/q, only in the p<q branch.
  double inv_s() const {
    if (!p_less_q()) throw BranchError("s is defined only for p < q");
    return inv_p() - inv_q();
  }
  double s() const { return 1.0 / inv_s(); }

  // 1/r = 1/q - 1/p, only in the p>q branch.
  double inv_r() const {
    if (!p_greater_q()) throw BranchError("r is defined only for p > q");
    return inv_q() - inv_p();
  }
  double r() const { return 1.0 / inv_r(); }

  double cp() const { return quasi(p_); }
  double cq() const { return quasi(q_); }

 private:
  static double quasi(double x) {
    const double ix = x == kInf ? 0.0 : 1.0 / x;
    return std::max(1.0, std::exp2(ix - 1.0));
  }
  static void check(double x, const char* name) {
    if (std::isnan(x) || x <= 0.0)
      throw Error(std::string("exponent ") + name + " must be in (0, inf]");
  }

  double p_, q_;
};

}  // namespace entrobound
