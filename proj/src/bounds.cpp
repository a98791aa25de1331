#include "entrobound/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <thread>

namespace entrobound {

namespace {

constexpr std::int64_t kHardScanCapLt = 4096;   // p<q product forms are O(k) per term
constexpr std::int64_t kHardScanCapGt = 8192;
constexpr double kEnvelopeRtol = 1e-6;          // tau precision inside stopping envelopes

std::int64_t floor_log2(std::int64_t n) {
  return static_cast<std::int64_t>(std::bit_width(static_cast<std::uint64_t>(n))) - 1;
}

double log_gamma(double x) { return std::lgamma(x); }

struct ScanState {
  double best = kNegInf;
  std::int64_t argmax = 1;
};

void scan_update(ScanState& s, double term, std::int64_t k) {
  if (term > s.best) {
    s.best = term;
    s.argmax = k;
  }
}

// ---- p<q scans: envelope(k) is a certified upper bound on every term with
// index >= k, so the scan stops as soon as the running best dominates it.

struct LtScanSpec {
  std::function<double(std::int64_t)> term;
  std::function<double(std::int64_t)> envelope;
  std::int64_t prefix_cap;   // true end of positive values (explicit specs)
  std::int64_t numeric_cap;  // log-representability clamp
  std::int64_t min_scan;
};

BoundResult run_lt_scan(const LtScanSpec& sc, BoundForm form) {
  ScanState st;
  BoundResult out;
  out.form = form;
  const std::int64_t cap = std::min({sc.prefix_cap, sc.numeric_cap, kHardScanCapLt});
  for (std::int64_t k = 1; k <= cap; ++k) {
    scan_update(st, sc.term(k), k);
    if (k >= sc.min_scan && sc.envelope(k) <= st.best) {
      out.certificate = Certificate::certified;
      out.k_scanned = {1, k};
      out.value = LogReal::from_log(st.best);
      out.argmax_k = st.argmax;
      return out;
    }
  }
  // A scan that visited the whole positive prefix saw every term there is.
  out.certificate = cap >= sc.prefix_cap ? Certificate::certified : Certificate::heuristic;
  out.k_scanned = {1, cap};
  out.value = LogReal::from_log(st.best);
  out.argmax_k = st.argmax;
  return out;
}

// Certified sup over k >= K of k^{1/s} * (V_p(k)/V_q(k))^{1/k} for p<q,
// via Stirling with the Binet remainder 0 < mu(x) < 1/(12x).
double log_sup_weighted_volratio(const ExponentPair& pair, std::int64_t K) {
  const double p = pair.p(), q = pair.q();
  const double kd = static_cast<double>(K);
  if (q == kInf) {
    const double a = log_gamma(1.0 + 1.0 / p) + (std::log(p) + 1.0) / p;
    const double extra = std::max(0.0, -std::log(2.0 * M_PI * kd / p) / (2.0 * kd));
    return a + extra;
  }
  const double a = log_gamma(1.0 + 1.0 / p) - log_gamma(1.0 + 1.0 / q) + std::log(p) / p -
                   std::log(q) / q + 1.0 / p - 1.0 / q;
  const double slack = (0.5 * std::fabs(std::log(p / q)) + std::max(p, q) / (12.0 * kd)) / kd;
  return a + slack;
}

// ---- p>q scans: heuristic growth per the log-proportional policy, then an
// attempt to close a rigorous power-mean envelope at dyadic checkpoints.

struct GtScanSpec {
  const Sequence* seq;
  double r;
  double rtol;
  std::function<double(std::int64_t)> term;
  double weight;      // w in the factors tau_k + w k^{1/r} sigma_i
  double log_prefac;  // e.g. log(4 C_p C_q) for the constant-carrying form
  std::int64_t prefix_cap;
  std::int64_t numeric_cap;
  std::int64_t min_scan;
  bool uses_tau = false;  // prefetch the tau cache before scanning
};

// E_t(K) = prefac * (tau_K^t + w^t K^{t/r-1} S_t)^{1/t} bounds every term
// with k >= K whenever t <= 1, t < r, and sigma is in ell_t. Uses certified
// tau upper brackets so the envelope stays an upper bound.
double gt_envelope_log(const GtScanSpec& sc, std::int64_t K) {
  double best_env = std::numeric_limits<double>::infinity();
  const double r = sc.r;
  const double base = std::min(1.0, 0.999 * r);
  for (double frac : {1.0, 0.75, 0.5, 0.25}) {
    const double t = base * frac;
    if (!(t > 0.0) || !(t < r)) continue;
    if (sc.seq->summability(t) != Summability::yes) continue;
    const double log_st = t * sc.seq->tail_logs_cached(1, t, kEnvelopeRtol).second;
    const double log_tau_k = sc.seq->tail_logs_cached(K, r, kEnvelopeRtol).second;
    const double kd = static_cast<double>(K);
    const double env =
        sc.log_prefac +
        log_add(t * log_tau_k, t * std::log(sc.weight) + (t / r - 1.0) * std::log(kd) + log_st) / t;
    best_env = std::min(best_env, env);
  }
  return best_env;
}

BoundResult run_gt_scan(const GtScanSpec& sc, BoundForm form, std::int64_t n) {
  ScanState st;
  BoundResult out;
  out.form = form;
  const std::int64_t cap = std::min({sc.prefix_cap, sc.numeric_cap, kHardScanCapGt});
  std::int64_t k_max = std::max<std::int64_t>(
      64, std::max(static_cast<std::int64_t>(std::ceil(8.0 * std::log2(static_cast<double>(n)))),
                   sc.min_scan));
  // Powers of two keep the envelope checkpoints shared across a whole n-grid.
  k_max = static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(k_max)));
  k_max = std::min(k_max, cap);
  std::int64_t k = 1;
  for (;;) {
    if (sc.uses_tau) sc.seq->prefetch_tails(k_max, sc.r, sc.rtol);
    for (; k <= k_max; ++k) scan_update(st, sc.term(k), k);
    const bool grew_late = st.argmax > k_max - k_max / 4;
    if (!grew_late || k_max >= cap) break;
    k_max = std::min(2 * k_max, cap);
  }
  out.k_scanned = {1, k_max};
  out.value = LogReal::from_log(st.best);
  out.argmax_k = st.argmax;
  if (k_max >= sc.prefix_cap) {  // finite explicit diagonal: sup fully visited
    out.certificate = Certificate::certified;
    return out;
  }
  bool closed = true;
  for (int j = 0; j <= 6 && closed; ++j) {
    const std::int64_t kc = k_max << j;
    if (kc <= 0 || kc > sc.numeric_cap) {
      closed = false;
      break;
    }
    closed = gt_envelope_log(sc, kc) <= st.best;
  }
  out.certificate = closed ? Certificate::certified : Certificate::heuristic;
  return out;
}

std::int64_t prefix_cap_of(const Sequence& seq) {
  const auto lim = seq.prefix_limit();
  return lim ? *lim : std::numeric_limits<std::int64_t>::max();
}

std::int64_t numeric_cap_of(const Sequence& seq) {
  return std::max<std::int64_t>(1, seq.max_finite_index() - 4);
}

void require_n(std::int64_t n) {
  if (n < 1) throw Error("bound: n must be >= 1");
}

// ---- per-k terms (log-domain) ----

double term_ub_lt(const Sequence& seq, double inv_s, std::int64_t k, double log_n) {
  const double w = inv_s * std::log(static_cast<double>(k)) + seq.log_sigma(k);
  double sum = 0.0;
  for (std::int64_t i = 1; i <= k; ++i) sum += log_add(seq.log_sigma(i), w);
  return -inv_s * std::log(static_cast<double>(k)) + (sum - log_n) / static_cast<double>(k);
}

double term_opt(const Sequence& seq, double exponent, std::int64_t k, double log_n) {
  return exponent * std::log(static_cast<double>(k)) +
         (seq.log_prefix_product(k) - log_n) / static_cast<double>(k);
}

double term_lb(const Sequence& seq, const ExponentPair& pair, std::int64_t k, double log_n) {
  return (log_volume_ratio(pair, k) + seq.log_prefix_product(k) - log_n) /
         static_cast<double>(k);
}

double term_ub_gt(const Sequence& seq, double inv_r, double weight_log, std::int64_t k,
                  double log_n, double log_tau_k) {
  const double w = weight_log + inv_r * std::log(static_cast<double>(k));
  double sum = 0.0;
  for (std::int64_t i = 1; i <= k; ++i) sum += log_add(log_tau_k, w + seq.log_sigma(i));
  return (sum - log_n) / static_cast<double>(k);
}

double term_ub_const_lt(const Sequence& seq, const ExponentPair& pair, std::int64_t k,
                        double log_n) {
  const double inv_s = pair.inv_s();
  const double wk = inv_s * std::log(static_cast<double>(k)) + seq.log_sigma(k);
  const double l2cq = std::log(2.0 * pair.cq());
  double sum = 0.0;
  for (std::int64_t i = 1; i <= k; ++i) sum += log_add(l2cq + seq.log_sigma(i), wk);
  return std::log(4.0 * pair.cp() * pair.cq()) +
         (log_volume_ratio(pair, k) + sum - log_n) / static_cast<double>(k);
}

}  // namespace

std::string_view form_name(BoundForm f) {
  switch (f) {
    case BoundForm::ub_p_lt_q: return "UB-p<q";
    case BoundForm::ub_p_gt_q: return "UB-p>q";
    case BoundForm::opt_exp: return "OPT-EXP";
    case BoundForm::opt_alp: return "OPT-ALP";
    case BoundForm::opt_amp: return "OPT-AMP";
    case BoundForm::lb_volume: return "LB-volume";
    case BoundForm::ub_const_p_lt_q: return "UB-const-p<q";
    case BoundForm::ub_const_p_gt_q: return "UB-const-p>q";
  }
  return "?";
}

std::string_view certificate_name(Certificate c) {
  return c == Certificate::certified ? "certified" : "heuristic";
}

BoundForm resolve_form(std::string_view cli_name, const ExponentPair& pair) {
  const bool lt = pair.p_less_q();
  if (cli_name == "ub") return lt ? BoundForm::ub_p_lt_q : BoundForm::ub_p_gt_q;
  if (cli_name == "ub-const") return lt ? BoundForm::ub_const_p_lt_q : BoundForm::ub_const_p_gt_q;
  if (cli_name == "lb") return BoundForm::lb_volume;
  if (cli_name == "opt-exp") {
    if (!lt) throw SpecParseError("form opt-exp requires p < q");
    return BoundForm::opt_exp;
  }
  if (cli_name == "opt-alp") {
    if (lt) throw SpecParseError("form opt-alp requires p > q");
    return BoundForm::opt_alp;
  }
  if (cli_name == "opt-amp") {
    if (lt) throw SpecParseError("form opt-amp requires p > q");
    return BoundForm::opt_amp;
  }
  throw SpecParseError("unknown bound form: '" + std::string(cli_name) + "'");
}

LogReal volume_unit_ball(double p, std::int64_t k) {
  if (k < 1) throw Error("volume_unit_ball: k must be >= 1");
  if (std::isnan(p) || p <= 0.0) throw Error("volume_unit_ball: p must be in (0, inf]");
  const double kd = static_cast<double>(k);
  if (p == kInf) return LogReal::from_log(kd * M_LN2);
  const double log_v =
      kd * std::log(2.0 * std::tgamma(1.0 + 1.0 / p)) - log_gamma(1.0 + kd / p);
  return LogReal::from_log(log_v);
}

double log_volume_ratio(const ExponentPair& pair, std::int64_t k) {
  return volume_unit_ball(pair.p(), k).log() - volume_unit_ball(pair.q(), k).log();
}

LogReal operator_norm(const Sequence& seq, const ExponentPair& pair, double rtol) {
  if (pair.p_greater_q()) return seq.tail(1, pair.r(), rtol).value;
  return seq.sigma(1);
}

BoundResult upper_bound_p_lt_q(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                               std::int64_t min_scan) {
  require_n(n);
  const double inv_s = pair.inv_s();
  const double log_n = std::log(static_cast<double>(n));
  LtScanSpec sc;
  sc.term = [&, inv_s, log_n](std::int64_t k) { return term_ub_lt(seq, inv_s, k, log_n); };
  sc.envelope = [&](std::int64_t k) { return M_LN2 + seq.geometric_mean(k).log(); };
  sc.prefix_cap = prefix_cap_of(seq);
  sc.numeric_cap = numeric_cap_of(seq);
  sc.min_scan = min_scan;
  return run_lt_scan(sc, BoundForm::ub_p_lt_q);
}

BoundResult optimal_form_exp(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                             std::int64_t min_scan) {
  require_n(n);
  const double inv_s = pair.inv_s();
  const double log_n = std::log(static_cast<double>(n));
  LtScanSpec sc;
  sc.term = [&, inv_s, log_n](std::int64_t k) { return term_opt(seq, -inv_s, k, log_n); };
  sc.envelope = [&, inv_s](std::int64_t k) {
    return -inv_s * std::log(static_cast<double>(k)) + seq.geometric_mean(k).log();
  };
  sc.prefix_cap = prefix_cap_of(seq);
  sc.numeric_cap = numeric_cap_of(seq);
  sc.min_scan = min_scan;
  return run_lt_scan(sc, BoundForm::opt_exp);
}

BoundResult upper_bound_with_constants(const Sequence& seq, const ExponentPair& pair,
                                       std::int64_t n, double rtol, std::int64_t min_scan) {
  require_n(n);
  if (pair.equal()) throw BranchError("bounds require p != q");
  const double log_n = std::log(static_cast<double>(n));
  if (pair.p_less_q()) {
    const double log_prefac = std::log(4.0 * pair.cp() * pair.cq());
    LtScanSpec sc;
    sc.term = [&, log_n](std::int64_t k) { return term_ub_const_lt(seq, pair, k, log_n); };
    sc.envelope = [&, log_prefac](std::int64_t k) {
      const double f_vol = std::exp(log_sup_weighted_volratio(pair, k));
      return log_prefac + seq.geometric_mean(k).log() + std::log(2.0 * pair.cq() + f_vol);
    };
    sc.prefix_cap = prefix_cap_of(seq);
    sc.min_scan = min_scan;
    return run_lt_scan(sc, BoundForm::ub_const_p_lt_q);
  }
  const double inv_r = pair.inv_r();
  GtScanSpec sc;
  sc.seq = &seq;
  sc.r = pair.r();
  sc.rtol = rtol;
  sc.weight = 2.0 * pair.cp();
  sc.log_prefac = std::log(4.0 * pair.cp() * pair.cq());
  const double wlog = std::log(sc.weight);
  sc.uses_tau = true;
  sc.term = [&, inv_r, wlog, log_n, rtol](std::int64_t k) {
    const double tau = seq.tail_logs_cached(k, pair.r(), rtol).first;
    return sc.log_prefac + term_ub_gt(seq, inv_r, wlog, k, log_n, tau);
  };
  sc.prefix_cap = prefix_cap_of(seq);
  sc.numeric_cap = numeric_cap_of(seq);
  sc.min_scan = min_scan;
  return run_gt_scan(sc, BoundForm::ub_const_p_gt_q, n);
}

BoundResult upper_bound_p_gt_q(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                               double rtol, std::int64_t min_scan) {
  require_n(n);
  const double inv_r = pair.inv_r();
  const double log_n = std::log(static_cast<double>(n));
  GtScanSpec sc;
  sc.seq = &seq;
  sc.r = pair.r();
  sc.rtol = rtol;
  sc.weight = 1.0;
  sc.log_prefac = 0.0;
  sc.uses_tau = true;
  sc.term = [&, inv_r, log_n, rtol](std::int64_t k) {
    const double tau = seq.tail_logs_cached(k, pair.r(), rtol).first;
    return term_ub_gt(seq, inv_r, 0.0, k, log_n, tau);
  };
  sc.prefix_cap = prefix_cap_of(seq);
  sc.numeric_cap = numeric_cap_of(seq);
  sc.min_scan = min_scan;
  return run_gt_scan(sc, BoundForm::ub_p_gt_q, n);
}

BoundResult optimal_form_alp(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                             std::int64_t min_scan) {
  require_n(n);
  const double inv_r = pair.inv_r();
  const double log_n = std::log(static_cast<double>(n));
  GtScanSpec sc;
  sc.seq = &seq;
  sc.r = pair.r();
  sc.rtol = kEnvelopeRtol;
  sc.weight = 1.0;
  sc.log_prefac = 0.0;
  sc.term = [&, inv_r, log_n](std::int64_t k) { return term_opt(seq, inv_r, k, log_n); };
  sc.prefix_cap = prefix_cap_of(seq);
  sc.numeric_cap = numeric_cap_of(seq);
  sc.min_scan = min_scan;
  return run_gt_scan(sc, BoundForm::opt_alp, n);
}

BoundResult optimal_form_amp(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                             double rtol) {
  require_n(n);
  const std::int64_t idx = floor_log2(n) + 1;
  BoundResult out;
  out.form = BoundForm::opt_amp;
  out.value = seq.tail(idx, pair.r(), rtol).value;
  out.argmax_k = idx;
  out.k_scanned = {idx, idx};
  out.certificate = Certificate::certified;
  return out;
}

BoundResult lower_bound(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                        double rtol, std::int64_t min_scan) {
  require_n(n);
  if (pair.equal()) throw BranchError("bounds require p != q");
  // Boundedness of D_sigma (operator norm finite).
  if (pair.p_greater_q() && seq.summability(pair.r()) == Summability::no)
    throw DivergenceError("lower_bound: D_sigma is unbounded (sigma not in ell_r)");
  const double log_n = std::log(static_cast<double>(n));
  if (pair.p_less_q()) {
    LtScanSpec sc;
    sc.term = [&, log_n](std::int64_t k) { return term_lb(seq, pair, k, log_n); };
    // V_p <= V_q for p<q, so every later term is at most GM_k.
    sc.envelope = [&](std::int64_t k) { return seq.geometric_mean(k).log(); };
    sc.prefix_cap = prefix_cap_of(seq);
    sc.min_scan = min_scan;
    return run_lt_scan(sc, BoundForm::lb_volume);
  }
  GtScanSpec sc;
  sc.seq = &seq;
  sc.r = pair.r();
  sc.rtol = rtol;
  sc.weight = 1.0;
  sc.log_prefac = 0.0;
  sc.term = [&, log_n](std::int64_t k) { return term_lb(seq, pair, k, log_n); };
  sc.prefix_cap = prefix_cap_of(seq);
  sc.numeric_cap = numeric_cap_of(seq);
  sc.min_scan = min_scan;
  return run_gt_scan(sc, BoundForm::lb_volume, n);
}

BoundResult evaluate_bound(const Sequence& seq, const ExponentPair& pair, BoundForm form,
                           std::int64_t n, double rtol, std::int64_t min_scan) {
  if (pair.equal()) throw BranchError("bounds require p != q");
  switch (form) {
    case BoundForm::ub_p_lt_q: return upper_bound_p_lt_q(seq, pair, n, min_scan);
    case BoundForm::ub_p_gt_q: return upper_bound_p_gt_q(seq, pair, n, rtol, min_scan);
    case BoundForm::opt_exp: return optimal_form_exp(seq, pair, n, min_scan);
    case BoundForm::opt_alp: return optimal_form_alp(seq, pair, n, min_scan);
    case BoundForm::opt_amp: return optimal_form_amp(seq, pair, n, rtol);
    case BoundForm::lb_volume: return lower_bound(seq, pair, n, rtol, min_scan);
    case BoundForm::ub_const_p_lt_q:
    case BoundForm::ub_const_p_gt_q:
      return upper_bound_with_constants(seq, pair, n, rtol, min_scan);
  }
  throw Error("evaluate_bound: bad form");
}

double bound_term_log(const Sequence& seq, const ExponentPair& pair, BoundForm form,
                      std::int64_t k, std::int64_t n, double rtol) {
  require_n(n);
  if (k < 1) throw Error("bound_term_log: k must be >= 1");
  const double log_n = std::log(static_cast<double>(n));
  switch (form) {
    case BoundForm::ub_p_lt_q: return term_ub_lt(seq, pair.inv_s(), k, log_n);
    case BoundForm::opt_exp: return term_opt(seq, -pair.inv_s(), k, log_n);
    case BoundForm::opt_alp: return term_opt(seq, pair.inv_r(), k, log_n);
    case BoundForm::lb_volume: return term_lb(seq, pair, k, log_n);
    case BoundForm::ub_const_p_lt_q: return term_ub_const_lt(seq, pair, k, log_n);
    case BoundForm::ub_p_gt_q:
      return term_ub_gt(seq, pair.inv_r(), 0.0, k, log_n,
                        seq.tail_logs_cached(k, pair.r(), rtol).first);
    case BoundForm::ub_const_p_gt_q:
      return std::log(4.0 * pair.cp() * pair.cq()) +
             term_ub_gt(seq, pair.inv_r(), std::log(2.0 * pair.cp()), k, log_n,
                        seq.tail_logs_cached(k, pair.r(), rtol).first);
    case BoundForm::opt_amp:
      return seq.tail_logs_cached(k, pair.r(), rtol).first - log_n / static_cast<double>(k);
  }
  throw Error("bound_term_log: bad form");
}

std::vector<BoundResult> bound_curve(const Sequence& seq, const ExponentPair& pair,
                                     const std::vector<std::int64_t>& n_list,
                                     const std::vector<BoundForm>& forms, double rtol,
                                     int threads) {
  std::vector<BoundResult> rows(n_list.size() * forms.size());
  auto eval_n = [&](size_t i) {
    for (size_t j = 0; j < forms.size(); ++j)
      rows[i * forms.size() + j] = evaluate_bound(seq, pair, forms[j], n_list[i], rtol);
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(n_list.size())));
  if (t == 1) {
    for (size_t i = 0; i < n_list.size(); ++i) eval_n(i);
    return rows;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(t));
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n_list.size(); i = next.fetch_add(1)) eval_n(i);
    });
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace entrobound
