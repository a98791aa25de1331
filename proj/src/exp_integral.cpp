#include "entrobound/detail/exp_integral.hpp"

#include <algorithm>
#include <cmath>

#include "entrobound/errors.hpp"

namespace entrobound::detail {

namespace {

// (e^x - 1)/x, stable near zero.
double e1(double x) {
  if (std::fabs(x) < 1e-8) return 1.0 + 0.5 * x;
  return std::expm1(x) / x;
}

}  // namespace

LogBracket exp_integral_log_bracket(const ExpIntegrand& f, double T, double eta,
                                    long long max_pieces) {
  double shift = f.psi(T);
  double lo_acc = 0.0, hi_acc = 0.0;
  double peak = shift;
  double u = T;
  long long pieces = 0;

  auto rescale = [&](double new_shift) {
    const double s = std::exp(shift - new_shift);
    lo_acc *= s;
    hi_acc *= s;
    shift = new_shift;
  };

  for (;;) {
    if (++pieces > max_pieces)
      throw PrecisionError("exp_integral: piece budget exhausted");
    const double pu = f.psi(u);
    const double d = f.dpsi(u);
    if (pu > peak) peak = pu;
    if (pu > shift + 64.0) rescale(pu);

    if (d < 0.0 && pu < peak - 55.0) {
      const double scl = f.closure_slope(u);
      if (scl < 0.0) {
        // psi(x) <= psi(u) + scl*(x-u) on [u, inf), so the rest is at most
        // e^{psi(u)}/|scl|; at least 0.
        hi_acc += std::exp(pu - shift) / (-scl);
        break;
      }
    }

    const double dd = f.ddpsi(u);
    double h = eta / std::max({std::fabs(d), std::sqrt(std::fabs(dd)), 1e-8});
    h = std::max(h, 1e-9 * (std::fabs(u) + 1.0));
    const double v = u + h;
    const double pv = f.psi(v);
    const double chord = (pv - pu) / h;
    const double base = std::exp(pu - shift) * h;
    const double area_tangent = base * e1(d * h);
    const double area_chord = base * e1(chord * h);
    if (f.convex) {
      lo_acc += area_tangent;  // psi >= its tangent
      hi_acc += area_chord;    // psi <= its chord
    } else {
      lo_acc += area_chord;
      hi_acc += area_tangent;
    }
    u = v;
  }

  // Round-off margin: O(pieces) adds at ~1 ulp relative each.
  const double margin = 4e-16 * static_cast<double>(pieces) + 1e-15;
  const double lo = lo_acc > 0.0 ? shift + std::log(lo_acc) - margin : kNegInf;
  const double hi = shift + std::log(hi_acc) + margin;
  return {lo, hi};
}

}  // namespace entrobound::detail
