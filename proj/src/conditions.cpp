#include "entrobound/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace entrobound {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

// Running-extremum trace; values are logs of the extremum after each index.
struct Trace {
  std::vector<double> running{0.0};  // slot 0 unused
  void push(double v) { running.push_back(v); }
  std::int64_t size() const { return static_cast<std::int64_t>(running.size()) - 1; }
};

Verdict window_verdict_of(const Trace& tr) {
  const std::int64_t n = tr.size();
  if (n < 4) return Verdict::inconclusive;
  const double a = tr.running[static_cast<size_t>(n / 2)];
  const double m = tr.running[static_cast<size_t>((3 * n) / 4)];
  const double b = tr.running[static_cast<size_t>(n)];
  const double total = std::fabs(b - a);
  if (total < kPlateauTol) return Verdict::holds;
  const double d1 = std::fabs(m - a);
  const double d2 = std::fabs(b - m);
  if (d2 <= 0.6 * d1) return Verdict::inconclusive;  // decelerating drift
  return Verdict::fails;
}

std::int64_t effective_window(const Sequence& seq, std::int64_t window) {
  std::int64_t w = std::min(window, seq.max_finite_index() - 2);
  const auto lim = seq.prefix_limit();
  if (lim) w = std::min(w, *lim);
  return std::max<std::int64_t>(w, 2);
}

// ---- analytic family knowledge ----

std::optional<bool> analytic_exp_at(const SequenceSpec& spec, double b) {
  struct V {
    double b;
    std::optional<bool> operator()(const ExplicitSpec&) const { return std::nullopt; }
    std::optional<bool> operator()(const GeometricSpec& s) const { return b <= s.b; }
    std::optional<bool> operator()(const PolynomialSpec&) const { return false; }
    std::optional<bool> operator()(const PolyLogSpec&) const { return false; }
    std::optional<bool> operator()(const ExpLogSpec&) const { return false; }
    std::optional<bool> operator()(const ExpPolySpec& s) const {
      if (s.lambda > 1.0) return true;
      if (s.lambda == 1.0) return b <= std::exp(s.a);
      return false;
    }
    std::optional<bool> operator()(const ExpExpSpec&) const { return true; }
  };
  return std::visit(V{b}, spec.variant());
}

std::optional<bool> analytic_exp_exists(const SequenceSpec& spec) {
  struct V {
    std::optional<bool> operator()(const ExplicitSpec&) const { return std::nullopt; }
    std::optional<bool> operator()(const GeometricSpec&) const { return true; }
    std::optional<bool> operator()(const PolynomialSpec&) const { return false; }
    std::optional<bool> operator()(const PolyLogSpec&) const { return false; }
    std::optional<bool> operator()(const ExpLogSpec&) const { return false; }
    std::optional<bool> operator()(const ExpPolySpec& s) const { return s.lambda >= 1.0; }
    std::optional<bool> operator()(const ExpExpSpec&) const { return true; }
  };
  return std::visit(V{}, spec.variant());
}

std::optional<bool> analytic_doubling(const SequenceSpec& spec) {
  struct V {
    std::optional<bool> operator()(const ExplicitSpec&) const { return std::nullopt; }
    std::optional<bool> operator()(const GeometricSpec&) const { return false; }
    std::optional<bool> operator()(const PolynomialSpec&) const { return true; }
    std::optional<bool> operator()(const PolyLogSpec&) const { return true; }
    std::optional<bool> operator()(const ExpLogSpec& s) const { return s.lambda <= 1.0; }
    std::optional<bool> operator()(const ExpPolySpec&) const { return false; }
    std::optional<bool> operator()(const ExpExpSpec&) const { return false; }
  };
  return std::visit(V{}, spec.variant());
}

std::optional<bool> analytic_alm_incr(const SequenceSpec& spec, double alpha) {
  struct V {
    double alpha;
    std::optional<bool> operator()(const ExplicitSpec&) const { return std::nullopt; }
    std::optional<bool> operator()(const GeometricSpec&) const { return false; }
    std::optional<bool> operator()(const PolynomialSpec& s) const { return alpha >= s.alpha; }
    std::optional<bool> operator()(const PolyLogSpec& s) const {
      if (alpha > s.alpha) return true;
      if (alpha == s.alpha) return s.beta <= 0.0;
      return false;
    }
    std::optional<bool> operator()(const ExpLogSpec& s) const {
      if (s.lambda < 1.0) return true;
      if (s.lambda == 1.0) return alpha >= s.a;
      return false;
    }
    std::optional<bool> operator()(const ExpPolySpec&) const { return false; }
    std::optional<bool> operator()(const ExpExpSpec&) const { return false; }
  };
  return std::visit(V{alpha}, spec.variant());
}

// {ALP, AMP} for a family known to lie in ell_r.
std::optional<std::pair<bool, bool>> analytic_alp_amp(const SequenceSpec& spec, double r) {
  struct V {
    double r;
    std::optional<std::pair<bool, bool>> operator()(const ExplicitSpec&) const {
      return std::nullopt;
    }
    std::optional<std::pair<bool, bool>> operator()(const GeometricSpec&) const {
      return std::make_pair(true, false);
    }
    std::optional<std::pair<bool, bool>> operator()(const PolynomialSpec&) const {
      return std::make_pair(true, true);  // tau_n ~ sigma_n n^{1/r}
    }
    std::optional<std::pair<bool, bool>> operator()(const PolyLogSpec& s) const {
      const double m = s.alpha * r, c = s.beta * r;
      if (m > 1.0) return std::make_pair(true, true);
      if (m == 1.0 && c > 1.0) return std::make_pair(false, true);  // tau_n ~ log^{(1-c)/r}
      return std::nullopt;
    }
    std::optional<std::pair<bool, bool>> operator()(const ExpLogSpec& s) const {
      if (s.lambda > 1.0) return std::make_pair(true, false);
      if (s.lambda == 1.0) return std::make_pair(true, true);  // plain polynomial decay
      return std::nullopt;
    }
    std::optional<std::pair<bool, bool>> operator()(const ExpPolySpec&) const {
      return std::make_pair(true, false);
    }
    std::optional<std::pair<bool, bool>> operator()(const ExpExpSpec&) const {
      return std::make_pair(true, false);
    }
  };
  return std::visit(V{r}, spec.variant());
}

ConditionReport finish(ConditionReport rep, const Trace& tr, std::optional<bool> analytic) {
  rep.window_verdict = window_verdict_of(tr);
  if (analytic.has_value()) {
    rep.analytic = true;
    rep.verdict = *analytic ? Verdict::holds : Verdict::fails;
  } else {
    rep.verdict = rep.window_verdict;
  }
  return rep;
}

// log tau_n^r for n = 1..N+1, one certified tail call plus the recurrence
// tau_n^r = tau_{n+1}^r + sigma_n^r downward.
std::vector<double> tau_pow_r_logs(const Sequence& seq, double r, double rtol, std::int64_t n_max) {
  std::vector<double> t(static_cast<size_t>(n_max) + 2);
  t[static_cast<size_t>(n_max) + 1] = r * seq.tail(n_max + 1, r, rtol).value.log();
  for (std::int64_t n = n_max; n >= 1; --n)
    t[static_cast<size_t>(n)] = log_add(t[static_cast<size_t>(n) + 1], r * seq.log_sigma(n));
  return t;
}

}  // namespace

std::string_view condition_name(ConditionId c) {
  switch (c) {
    case ConditionId::exp_base: return "EXP";
    case ConditionId::exp_shifted: return "EXP-shifted";
    case ConditionId::exp_partial_sum: return "EXP-partial-sum";
    case ConditionId::exp_tail: return "EXP-tail";
    case ConditionId::doubling: return "DOUBLING";
    case ConditionId::alm_incr: return "ALM-INCR";
    case ConditionId::geo_mean: return "GEO-MEAN";
    case ConditionId::alp: return "ALP";
    case ConditionId::amp: return "AMP";
  }
  return "?";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

ConditionReport check_exp(const Sequence& seq, double b, std::int64_t window) {
  if (!(b > 1.0)) throw Error("check_exp: b must be > 1");
  if (window < 2) throw Error("check_exp: window must be >= 2");
  const std::int64_t n_max = effective_window(seq, window);
  const double log_b = std::log(b);
  Trace tr;
  ConditionReport rep;
  rep.condition = ConditionId::exp_base;
  rep.label = "EXP(b=" + fmt(b) + ")";
  rep.window = n_max;
  double denom_min = std::numeric_limits<double>::infinity();
  std::int64_t denom_arg = 1;
  double best = kNegInf;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double h = seq.log_sigma(n) + static_cast<double>(n) * log_b;
    if (h < denom_min) {
      denom_min = h;
      denom_arg = n;
    }
    const double ratio = h - denom_min;
    if (ratio > best) {
      best = ratio;
      rep.witness = {ratio, n, denom_arg};
    }
    tr.push(best);
  }
  return finish(std::move(rep), tr, analytic_exp_at(seq.spec(), b));
}

ConditionReport check_exp_shifted(const Sequence& seq, std::int64_t window) {
  if (window < 4) throw Error("check_exp_shifted: window must be >= 4");
  const std::int64_t n_max = effective_window(seq, window);
  ConditionReport rep;
  rep.condition = ConditionId::exp_shifted;
  rep.label = "EXP-shifted";
  rep.window = n_max;
  bool found = false;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::int64_t n0 = 1; n0 <= n_max / 2 && !found; ++n0) {
    const std::int64_t k_max = n_max - n0;
    double a_full = kNegInf, a_half = kNegInf;
    std::int64_t arg = 1;
    for (std::int64_t k = 1; k <= k_max; ++k) {
      const double ratio = seq.log_sigma(k + n0) - seq.log_sigma(k);
      if (ratio > a_full) {
        a_full = ratio;
        arg = k;
      }
      if (k == k_max / 2) a_half = a_full;
    }
    if (a_full < best_ratio) best_ratio = a_full;
    if (a_full < 0.0 && a_full - a_half < kPlateauTol) {
      found = true;
      rep.witness = {a_full, arg + n0, arg};
      rep.note = "n0=" + std::to_string(n0) + ", a=" + fmt(std::exp(a_full));
      rep.window_verdict = Verdict::holds;
    }
  }
  if (!found) {
    rep.window_verdict = Verdict::fails;
    rep.witness = {best_ratio, 0, 0};
    rep.note = "no stable shift found up to n0=" + std::to_string(n_max / 2);
  }
  const auto analytic = analytic_exp_exists(seq.spec());
  if (analytic.has_value()) {
    rep.analytic = true;
    rep.verdict = *analytic ? Verdict::holds : Verdict::fails;
  } else {
    rep.verdict = rep.window_verdict;
  }
  return rep;
}

ConditionReport check_exp_partial_sum(const Sequence& seq, double s, std::int64_t window) {
  if (!(s > 0.0)) throw Error("check_exp_partial_sum: s must be positive");
  if (window < 2) throw Error("check_exp_partial_sum: window must be >= 2");
  const std::int64_t n_max = effective_window(seq, window);
  Trace tr;
  ConditionReport rep;
  rep.condition = ConditionId::exp_partial_sum;
  rep.label = "EXP-partial-sum(s=" + fmt(s) + ")";
  rep.window = n_max;
  LogAccumulator acc;
  double best = kNegInf;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double ls = seq.log_sigma(n);
    acc.add(-s * ls);
    const double ratio = ls + acc.log_total() / s;  // sigma_n * v_n, log
    if (ratio > best) {
      best = ratio;
      rep.witness = {ratio, n, n};
    }
    tr.push(best);
  }
  return finish(std::move(rep), tr, analytic_exp_exists(seq.spec()));
}

ConditionReport check_exp_tail(const Sequence& seq, double r, double rtol, std::int64_t window) {
  if (window < 2) throw Error("check_exp_tail: window must be >= 2");
  const std::int64_t n_max = effective_window(seq, window);
  const auto tau = tau_pow_r_logs(seq, r, rtol, n_max);
  Trace tr;
  ConditionReport rep;
  rep.condition = ConditionId::exp_tail;
  rep.label = "EXP-tail(r=" + fmt(r) + ")";
  rep.window = n_max;
  double best = kNegInf;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double ratio = tau[static_cast<size_t>(n)] / r - seq.log_sigma(n);
    if (ratio > best) {
      best = ratio;
      rep.witness = {ratio, n, n};
    }
    tr.push(best);
  }
  return finish(std::move(rep), tr, analytic_exp_exists(seq.spec()));
}

ConditionReport check_doubling(const Sequence& seq, std::int64_t window) {
  if (window < 4) throw Error("check_doubling: window must be >= 4");
  const std::int64_t n_max = effective_window(seq, window) / 2;
  Trace tr;
  ConditionReport rep;
  rep.condition = ConditionId::doubling;
  rep.label = "DOUBLING";
  rep.window = 2 * n_max;
  double worst = std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double ratio = seq.log_sigma(2 * n) - seq.log_sigma(n);
    if (ratio < worst) {
      worst = ratio;
      rep.witness = {ratio, 2 * n, n};
    }
    tr.push(worst);
  }
  return finish(std::move(rep), tr, analytic_doubling(seq.spec()));
}

ConditionReport check_alm_incr(const Sequence& seq, double alpha, std::int64_t window) {
  if (!(alpha > 0.0)) throw Error("check_alm_incr: alpha must be positive");
  if (window < 4) throw Error("check_alm_incr: window must be >= 4");
  const std::int64_t n_max = effective_window(seq, window);
  Trace tr;
  ConditionReport rep;
  rep.condition = ConditionId::alm_incr;
  rep.label = "ALM-INCR(alpha=" + fmt(alpha) + ")";
  rep.window = n_max;
  double g_max = kNegInf;
  std::int64_t g_arg = 1;
  double worst = std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double g = seq.log_sigma(n) + alpha * std::log(static_cast<double>(n));
    if (g > g_max) {
      g_max = g;
      g_arg = n;
    }
    const double ratio = g - g_max;
    if (ratio < worst) {
      worst = ratio;
      rep.witness = {ratio, n, g_arg};
    }
    tr.push(worst);
  }
  return finish(std::move(rep), tr, analytic_alm_incr(seq.spec(), alpha));
}

ConditionReport check_geo_mean(const Sequence& seq, std::int64_t window) {
  if (window < 4) throw Error("check_geo_mean: window must be >= 4");
  const std::int64_t n_max = effective_window(seq, window);
  Trace tr;
  ConditionReport rep;
  rep.condition = ConditionId::geo_mean;
  rep.label = "GEO-MEAN";
  rep.window = n_max;
  double best = kNegInf;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double ratio = seq.log_prefix_product(n) / static_cast<double>(n) - seq.log_sigma(n);
    if (ratio > best) {
      best = ratio;
      rep.witness = {ratio, n, n};
    }
    tr.push(best);
  }
  return finish(std::move(rep), tr, analytic_doubling(seq.spec()));
}

namespace {

ConditionReport check_alp_amp(const Sequence& seq, double r, double rtol, std::int64_t window,
                              bool is_alp) {
  if (window < 4) throw Error("check_alp/check_amp: window must be >= 4");
  if (seq.summability(r) == Summability::no)
    throw DivergenceError("check_alp/check_amp: sigma not in ell_r");
  const std::int64_t n_max = effective_window(seq, window);
  const auto tau = tau_pow_r_logs(seq, r, rtol, n_max);
  Trace tr;
  ConditionReport rep;
  rep.condition = is_alp ? ConditionId::alp : ConditionId::amp;
  rep.label = std::string(is_alp ? "ALP" : "AMP") + "(r=" + fmt(r) + ")";
  rep.window = n_max;
  double ext = is_alp ? kNegInf : std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double ratio = tau[static_cast<size_t>(n)] / r - seq.log_sigma(n) -
                         std::log(static_cast<double>(n)) / r;
    const bool better = is_alp ? ratio > ext : ratio < ext;
    if (better) {
      ext = ratio;
      rep.witness = {ratio, n, n};
    }
    tr.push(ext);
  }
  std::optional<bool> analytic;
  if (auto aa = analytic_alp_amp(seq.spec(), r)) analytic = is_alp ? aa->first : aa->second;
  return finish(std::move(rep), tr, analytic);
}

}  // namespace

ConditionReport check_alp(const Sequence& seq, double r, double rtol, std::int64_t window) {
  return check_alp_amp(seq, r, rtol, window, true);
}

ConditionReport check_amp(const Sequence& seq, double r, double rtol, std::int64_t window) {
  return check_alp_amp(seq, r, rtol, window, false);
}

ExpSearch search_exp_base(const Sequence& seq, std::int64_t window) {
  ExpSearch out;
  for (int j = 64; j >= 1; --j) {
    const double b = std::exp2(static_cast<double>(j) / 8.0);
    const auto analytic = analytic_exp_at(seq.spec(), b);
    if (analytic.has_value()) {
      if (*analytic) {
        out.found = true;
        out.b = b;
        out.report = check_exp(seq, b, window);
        return out;
      }
      continue;
    }
    ConditionReport rep = check_exp(seq, b, window);
    if (rep.verdict == Verdict::holds) {
      out.found = true;
      out.b = b;
      out.report = std::move(rep);
      return out;
    }
  }
  out.report = check_exp(seq, std::exp2(1.0 / 8.0), window);
  if (out.report.verdict == Verdict::holds) out.report.verdict = Verdict::inconclusive;
  out.report.note = "no base in the 2^{j/8} grid qualifies";
  return out;
}

AlmIncrSearch search_alm_incr(const Sequence& seq, std::int64_t window) {
  AlmIncrSearch out;
  for (int j = 16; j >= -8; --j) {
    const double alpha = std::exp2(static_cast<double>(j) / 4.0);
    const auto analytic = analytic_alm_incr(seq.spec(), alpha);
    ConditionReport rep;
    if (analytic.has_value()) {
      if (!*analytic) continue;
      rep = check_alm_incr(seq, alpha, window);
    } else {
      rep = check_alm_incr(seq, alpha, window);
      if (rep.verdict != Verdict::holds) continue;
    }
    out.found = true;
    out.alpha = alpha;
    out.report = std::move(rep);
    return out;
  }
  out.report = check_alm_incr(seq, 1.0, window);
  if (out.report.verdict == Verdict::holds) out.report.verdict = Verdict::inconclusive;
  out.report.note = "no exponent in the 2^{j/4} grid qualifies";
  return out;
}

std::vector<ConditionReport> classify(const Sequence& seq, const ExponentPair& pair,
                                      std::int64_t window, double rtol) {
  if (pair.equal()) throw BranchError("classify requires p != q");
  std::vector<ConditionReport> out;
  if (pair.p_greater_q()) {
    const double r = pair.r();
    for (bool is_alp : {true, false}) {
      try {
        out.push_back(is_alp ? check_alp(seq, r, rtol, window) : check_amp(seq, r, rtol, window));
      } catch (const DivergenceError&) {
        ConditionReport rep;
        rep.condition = is_alp ? ConditionId::alp : ConditionId::amp;
        rep.label = std::string(is_alp ? "ALP" : "AMP") + "(r=" + fmt(r) + ")";
        rep.verdict = Verdict::fails;
        rep.window = window;
        rep.analytic = true;
        rep.note = "sigma not in ell_r: D_sigma is unbounded for this (p,q)";
        out.push_back(std::move(rep));
      }
    }
  }
  out.push_back(search_exp_base(seq, window).report);
  out.push_back(check_doubling(seq, window));
  return out;
}

Table1Result run_table1(std::int64_t window, double rtol) {
  // Representative p>q pair for the tail-based columns: (p,q) = (2,1), r = 2.
  const double r = 2.0;
  Table1Result result;
  result.all_match = true;

  struct FamilyDef {
    const char* name;
    SequenceSpec (*make)(double lambda);
    Verdict (*exp_expected)(double);
    Verdict (*alp_expected)(double);
  };
  const FamilyDef defs[] = {
      {"explog",
       [](double l) { return SequenceSpec(ExpLogSpec{1.0, l}); },
       [](double) { return Verdict::fails; },
       [](double l) { return l > 1.0 ? Verdict::holds : Verdict::fails; }},
      {"exppoly",
       [](double l) { return SequenceSpec(ExpPolySpec{1.0, l}); },
       [](double l) { return l >= 1.0 ? Verdict::holds : Verdict::fails; },
       [](double) { return Verdict::holds; }},
      {"expexp",
       [](double l) { return SequenceSpec(ExpExpSpec{1.0, l}); },
       [](double) { return Verdict::holds; },
       [](double) { return Verdict::holds; }},
  };

  for (const auto& def : defs) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      Sequence seq(def.make(lambda));
      Table1Row row;
      row.family = def.name;
      row.lambda = lambda;
      row.amp.expected = Verdict::fails;
      row.alp.expected = def.alp_expected(lambda);
      row.exp.expected = def.exp_expected(lambda);
      row.amp.checked = row.alp.checked = row.exp.checked = lambda != 1.0;

      if (seq.summability(r) == Summability::yes) {
        row.alp.computed = check_alp(seq, r, rtol, window).verdict;
        row.amp.computed = check_amp(seq, r, rtol, window).verdict;
      } else {
        row.alp.computed = Verdict::fails;
        row.amp.computed = Verdict::fails;
        row.note = "sigma not in ell_r: D_sigma unbounded for p>q";
      }
      row.exp.computed = search_exp_base(seq, window).found ? Verdict::holds : Verdict::fails;

      if (row.family == "explog" && lambda == 1.0)
        row.note = "reduces to plain polynomial decay (sigma_n = n^{-a})";

      for (const Table1Cell* c : {&row.amp, &row.alp, &row.exp}) {
        if (c->checked && c->computed != c->expected) result.all_match = false;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace entrobound
