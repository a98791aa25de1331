#pragma once

#include <functional>

#include "entrobound/log_real.hpp"

namespace entrobound::detail {

// Log-domain interval [lo, hi] enclosing a positive quantity.
struct LogBracket {
  double lo;
  double hi;
  double width() const { return hi - lo; }
};

inline LogBracket bracket_add(const LogBracket& a, const LogBracket& b) {
  return {log_add(a.lo, b.lo), log_add(a.hi, b.hi)};
}
inline LogBracket bracket_scale(const LogBracket& a, double log_factor) {
  return {a.lo + log_factor, a.hi + log_factor};
}
inline LogBracket bracket_exact(double log_value) {
  return {log_value - 1e-14, log_value + 1e-14};
}

// Integrand exp(psi(u)) with single-signed curvature of psi on [T, inf).
// closure_slope(x) must return a certified sup of psi' over [x, inf); the
// integration stops once this is safely negative and the mass has decayed.
struct ExpIntegrand {
  std::function<double(double)> psi;
  std::function<double(double)> dpsi;
  std::function<double(double)> ddpsi;
  bool convex = true;
  std::function<double(double)> closure_slope;
};

// Certified bracket of log( integral_T^inf exp(psi(u)) du ).
//
// Pieces pair a tangent envelope with a chord envelope (which is which
// depends on the curvature sign), so the per-piece gap is second order in
// the step. eta is the slope-change budget per piece.
LogBracket exp_integral_log_bracket(const ExpIntegrand& f, double T, double eta,
                                    long long max_pieces = 4'000'000);

}  // namespace entrobound::detail
