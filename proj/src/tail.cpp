#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>

#include "entrobound/detail/exp_integral.hpp"
#include "entrobound/sequence.hpp"

namespace entrobound {

namespace {

using detail::ExpIntegrand;
using detail::LogBracket;

// integral_T^inf e^{-s u - c ln u} du, s > 0, c real.
LogBracket shape_a_bracket(double s, double c, double T, double eta) {
  if (!(s > 0.0) || !(T > 0.0)) throw Error("shape_a: need s > 0 and T > 0");
  ExpIntegrand f;
  f.psi = [s, c](double u) { return -s * u - c * std::log(u); };
  f.dpsi = [s, c](double u) { return -s - c / u; };
  f.ddpsi = [c](double u) { return c / (u * u); };
  f.convex = c >= 0.0;
  if (c >= 0.0)
    f.closure_slope = [s](double) { return -s; };
  else
    f.closure_slope = [s, c](double x) { return -s - c / x; };
  return detail::exp_integral_log_bracket(f, T, eta);
}

// Exact integral_x^inf coef * t^{-m} dt, m > 1; log_coef = log(coef).
LogBracket j_power(double log_coef, double m, double x) {
  return detail::bracket_exact(log_coef + (1.0 - m) * std::log(x) - std::log(m - 1.0));
}

// integral_x^inf a^r t^{-m} log(t+1)^{-c} dt via u = log(t+1):
//   a^r * int_T^inf e^{(1-m)u} u^{-c} (1-e^{-u})^{-m} du,
// with (1-e^{-u})^{-m} in [1 + m e^{-u}, 1 + m e^{-u} (1-e^{-T})^{-(m+1)}].
LogBracket j_polylog(double r_log_a, double m, double c, double x, double eta) {
  const double T = std::log(x + 1.0);
  LogBracket g0 = m > 1.0
                      ? shape_a_bracket(m - 1.0, c, T, eta)
                      : detail::bracket_exact((1.0 - c) * std::log(T) - std::log(c - 1.0));
  LogBracket g1 = shape_a_bracket(m, c, T, std::max(eta, 1.0 / 32.0));
  const double log_m = std::log(m);
  const double log_theta = -(m + 1.0) * std::log1p(-std::exp(-T));
  return {r_log_a + log_add(g0.lo, log_m + g1.lo),
          r_log_a + log_add(g0.hi, log_m + log_theta + g1.hi)};
}

// integral_x^inf e^{-g ln^lambda t} dt via u = ln t, lambda > 1 (concave phase).
LogBracket j_explog(double g, double lambda, double x, double eta) {
  const double T = std::log(x);
  if (!(T > 0.0)) throw Error("j_explog: window start too small");
  ExpIntegrand f;
  f.psi = [g, lambda](double u) { return u - g * std::pow(u, lambda); };
  f.dpsi = [g, lambda](double u) { return 1.0 - g * lambda * std::pow(u, lambda - 1.0); };
  f.ddpsi = [g, lambda](double u) {
    return -g * lambda * (lambda - 1.0) * std::pow(u, lambda - 2.0);
  };
  f.convex = false;
  f.closure_slope = f.dpsi;
  return detail::exp_integral_log_bracket(f, T, eta);
}

// integral_x^inf e^{-g t^lambda} dt, lambda < 1, via u = t^lambda.
LogBracket j_exppoly(double g, double lambda, double x, double eta) {
  const double T = std::pow(x, lambda);
  const double c = 1.0 - 1.0 / lambda;  // < 0
  return detail::bracket_scale(shape_a_bracket(g, c, T, eta), -std::log(lambda));
}

// R_N for families whose term ratio sigma_{n+1}^r/sigma_n^r is nonincreasing
// beyond N (ExpPoly lambda>1, ExpExp): geometric domination by the first ratio.
LogBracket ratio_domination(const Sequence& seq, double r, std::int64_t N) {
  const double g_n = r * seq.log_sigma(N);
  const double rho = r * seq.log_sigma(N + 1) - g_n;
  if (!(rho < 0.0)) throw Error("ratio_domination: nondecreasing terms");
  return {g_n, g_n - std::log1p(-std::exp(rho))};
}

struct WindowPlan {
  std::int64_t n_min = 1;
  // R_N = sum_{n>=N} sigma_n^r bracket
  std::function<LogBracket(std::int64_t, double)> remainder;
};

// Smallest window start such that x -> sigma(x)^r is convex on [N - 1/2, inf)
// (needed by the trapezoid/midpoint sum brackets).
std::int64_t convex_window_start(const SequenceSpec& spec, double r) {
  struct V {
    double r;
    std::int64_t operator()(const ExplicitSpec&) const { return 1; }
    std::int64_t operator()(const GeometricSpec&) const { return 1; }
    std::int64_t operator()(const PolynomialSpec&) const { return 1; }
    std::int64_t operator()(const PolyLogSpec& s) const {
      const double c = s.beta * r;
      if (c >= 0.0) return 2;
      const double m = std::max(s.alpha * r, 1e-9);
      const double ac = -c;
      const double l_star = (ac + std::sqrt(ac * ac + 4.0 * m * ac)) / (2.0 * m);
      return static_cast<std::int64_t>(std::ceil(std::exp(l_star))) + 2;
    }
    std::int64_t operator()(const ExpLogSpec& s) const {
      return std::max<std::int64_t>(3, static_cast<std::int64_t>(std::ceil(std::exp(s.lambda - 1.0))) + 1);
    }
    std::int64_t operator()(const ExpPolySpec&) const { return 1; }
    std::int64_t operator()(const ExpExpSpec&) const { return 1; }
  };
  return std::visit(V{r}, spec.variant());
}

TailEstimate exact_estimate(double log_tau_pow_r, double r, std::int64_t window_end) {
  TailEstimate t;
  const double log_tau = log_tau_pow_r / r;
  t.value = LogReal::from_log(log_tau);
  t.lower = LogReal::from_log(log_tau - 5e-15);
  t.upper = LogReal::from_log(log_tau + 5e-15);
  t.exact = true;
  t.window_end = window_end;
  return t;
}

TailEstimate explicit_tail(const ExplicitSpec& e, std::int64_t k, double r) {
  const auto len = static_cast<std::int64_t>(e.values.size());
  if (e.tail.kind == TailModel::Kind::none)
    throw UnusableTailError("explicit spec with tail=none cannot evaluate tau_k");
  LogAccumulator acc;
  for (std::int64_t n = k; n <= len; ++n)
    acc.add(r * std::log(e.values[static_cast<size_t>(n - 1)]));
  if (e.tail.kind == TailModel::Kind::geometric_extension) {
    const double lv = std::log(e.values.back());
    const double lrho = std::log(e.tail.ratio);
    const double denom = std::log1p(-std::exp(r * lrho));
    if (k <= len)
      acc.add(r * (lv + lrho) - denom);
    else
      acc.add(r * (lv + static_cast<double>(k - len) * lrho) - denom);
  }
  if (acc.empty()) {  // zero tail past the prefix
    TailEstimate t;
    t.exact = true;
    t.window_end = k;
    return t;
  }
  return exact_estimate(acc.log_total(), r, std::max(k, len + 1));
}

TailEstimate windowed_tail(const Sequence& seq, std::int64_t k, double r, double rtol,
                           std::int64_t cap, const WindowPlan& plan) {
  std::int64_t window_end = std::max(k, plan.n_min);
  LogAccumulator sum;
  for (std::int64_t n = k; n < window_end; ++n) sum.add(r * seq.log_sigma(n));

  double eta = 1.0 / 32.0;
  const double target = 0.9 * r * rtol;
  for (;;) {
    LogBracket rem = plan.remainder(window_end, eta);
    double lo = log_add(sum.log_total(), rem.lo);
    double hi = log_add(sum.log_total(), rem.hi);
    if (hi - lo <= target) {
      TailEstimate t;
      const double mid = 0.5 * (lo + hi);
      t.value = LogReal::from_log(mid / r);
      t.lower = LogReal::from_log(lo / r);
      t.upper = LogReal::from_log(hi / r);
      t.window_end = window_end;
      return t;
    }
    if (eta > 1.0 / 4096.0 && hi - lo <= 32.0 * target) {
      // A finer integrator may close the gap without more terms.
      LogBracket rem2 = plan.remainder(window_end, eta / 8.0);
      const double lo2 = log_add(sum.log_total(), rem2.lo);
      const double hi2 = log_add(sum.log_total(), rem2.hi);
      if (hi2 - lo2 <= 0.6 * (hi - lo)) {
        eta /= 8.0;
        continue;
      }
    }
    if (window_end - k >= cap)
      throw PrecisionError("tail: requested precision not reached within the term cap");
    const std::int64_t next = std::min(k + 2 * (window_end - k) + 16, k + cap);
    for (std::int64_t n = window_end; n < next; ++n) sum.add(r * seq.log_sigma(n));
    window_end = next;
  }
}

}  // namespace

namespace {

std::tuple<std::int64_t, std::uint64_t, std::uint64_t> tail_key(std::int64_t k, double r,
                                                                double rtol) {
  std::uint64_t rb, tb;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&rb, &r, sizeof(double));
  std::memcpy(&tb, &rtol, sizeof(double));
  return std::make_tuple(k, rb, tb);
}

}  // namespace

std::pair<double, double> Sequence::tail_logs_cached(std::int64_t k, double r,
                                                     double rtol) const {
  const auto key = tail_key(k, r, rtol);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = tail_cache_.find(key);
    if (it != tail_cache_.end()) return it->second;
  }
  const TailEstimate t = tail(k, r, rtol);
  const auto out = std::make_pair(t.value.log(), t.upper.log());
  std::lock_guard<std::mutex> lock(cache_mutex_);
  tail_cache_.emplace(key, out);
  return out;
}

void Sequence::prefetch_tails(std::int64_t k_max, double r, double rtol) const {
  if (k_max < 1) return;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (tail_cache_.count(tail_key(1, r, rtol)) && tail_cache_.count(tail_key(k_max, r, rtol)))
      return;
  }
  const TailEstimate top = tail(k_max, r, rtol);
  double lo = r * top.lower.log();
  double hi = r * top.upper.log();
  std::vector<std::pair<double, double>> rows(static_cast<size_t>(k_max) + 1);
  rows[static_cast<size_t>(k_max)] = {0.5 * (lo + hi) / r, hi / r};
  for (std::int64_t n = k_max - 1; n >= 1; --n) {
    const double t = r * log_sigma(n);
    lo = log_add(lo, t);
    hi = log_add(hi, t);
    rows[static_cast<size_t>(n)] = {0.5 * (lo + hi) / r, hi / r};
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  for (std::int64_t n = 1; n <= k_max; ++n)
    tail_cache_.emplace(tail_key(n, r, rtol), rows[static_cast<size_t>(n)]);
}

TailEstimate Sequence::tail(std::int64_t k, double r, double rtol, std::int64_t term_cap) const {
  if (k < 1) throw Error("tail: k must be >= 1");
  if (!(r > 0.0)) throw Error("tail: r must be positive");
  if (!(rtol > 0.0 && rtol < 1.0)) throw Error("tail: rtol must be inside (0,1)");

  if (const auto* e = spec_.as_explicit()) return explicit_tail(*e, k, r);

  if (summability(r) == Summability::no)
    throw DivergenceError("tail: sigma is not in ell_r (" + spec_.describe() + ", r=" +
                          std::to_string(r) + ")");

  // Closed forms.
  if (const auto* g = std::get_if<GeometricSpec>(&spec_.variant())) {
    const double lb = std::log(g->b);
    return exact_estimate(r * (std::log(g->c) - static_cast<double>(k) * lb) -
                              std::log1p(-std::exp(-r * lb)),
                          r, k);
  }
  if (const auto* e = std::get_if<ExpPolySpec>(&spec_.variant());
      e != nullptr && e->lambda == 1.0) {
    return exact_estimate(-e->a * r * static_cast<double>(k) - std::log1p(-std::exp(-e->a * r)),
                          r, k);
  }

  WindowPlan plan;
  plan.n_min = convex_window_start(spec_, r);
  const Sequence* self = this;

  // Convex-family remainders share one shape: a continuous log g(x) and a
  // bracket J(x) of integral_x^inf g. The bracket of R_N then needs a single
  // J evaluation at N - 1/2:
  //   R_N <= J(N-1/2)            (midpoint rule, g convex)
  //   R_N >= g(N)/2 + J(N)       (trapezoid), with
  //   J(N) >= J(N-1/2) - g(N-1/2)/2.
  auto make_convex = [&plan](std::function<double(double)> glog,
                             std::function<LogBracket(double, double)> jfun) {
    plan.remainder = [glog = std::move(glog), jfun = std::move(jfun)](std::int64_t n,
                                                                      double eta) {
      const double xh = static_cast<double>(n) - 0.5;
      const LogBracket jh = jfun(xh, eta);
      const double g_n = glog(static_cast<double>(n));
      const double g_h = glog(xh);
      double lo = kNegInf;
      const double sum = log_add(g_n - M_LN2, jh.lo);
      if (sum > g_h - M_LN2) lo = log_sub(sum, g_h - M_LN2);
      lo = std::max(lo, g_n);  // R_N >= its first term
      return LogBracket{lo, jh.hi};
    };
  };

  struct Builder {
    const Sequence* seq;
    double r;
    WindowPlan& plan;
    const std::function<void(std::function<double(double)>,
                             std::function<LogBracket(double, double)>)>& convex;
    void operator()(const ExplicitSpec&) const {}
    void operator()(const GeometricSpec&) const {}
    void operator()(const PolynomialSpec& s) const {
      const double m = s.alpha * r;
      const double lc = r * std::log(s.a);
      convex([lc, m](double x) { return lc - m * std::log(x); },
             [lc, m](double x, double) { return j_power(lc, m, x); });
    }
    void operator()(const PolyLogSpec& s) const {
      const double m = s.alpha * r, c = s.beta * r;
      const double lc = r * std::log(s.a);
      convex(
          [lc, m, c](double x) { return lc - m * std::log(x) - c * std::log(std::log(x + 1.0)); },
          [lc, m, c](double x, double eta) { return j_polylog(lc, m, c, x, eta); });
    }
    void operator()(const ExpLogSpec& s) const {
      if (s.lambda == 1.0) {  // sigma_n = n^{-a} exactly
        const double m = s.a * r;
        convex([m](double x) { return -m * std::log(x); },
               [m](double x, double) { return j_power(0.0, m, x); });
        return;
      }
      const double g = s.a * r;
      const double lambda = s.lambda;
      convex([g, lambda](double x) { return -g * std::pow(std::log(x), lambda); },
             [g, lambda](double x, double eta) { return j_explog(g, lambda, x, eta); });
    }
    void operator()(const ExpPolySpec& s) const {
      const Sequence* sq = seq;
      const double rr = r;
      if (s.lambda > 1.0) {
        plan.remainder = [sq, rr](std::int64_t n, double) {
          return ratio_domination(*sq, rr, n);
        };
        return;
      }
      const double g = s.a * r;
      const double lambda = s.lambda;
      convex([g, lambda](double x) { return -g * std::pow(x, lambda); },
             [g, lambda](double x, double eta) { return j_exppoly(g, lambda, x, eta); });
    }
    void operator()(const ExpExpSpec&) const {
      const Sequence* sq = seq;
      const double rr = r;
      plan.remainder = [sq, rr](std::int64_t n, double) { return ratio_domination(*sq, rr, n); };
    }
  };
  const std::function<void(std::function<double(double)>,
                           std::function<LogBracket(double, double)>)>
      convex_fn = make_convex;
  std::visit(Builder{self, r, plan, convex_fn}, spec_.variant());
  if (!plan.remainder) throw Error("tail: no remainder model");
  return windowed_tail(*this, k, r, rtol, term_cap, plan);
}

}  // namespace entrobound
