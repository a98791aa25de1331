#include "entrobound/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "entrobound/bounds.hpp"
#include "entrobound/conditions.hpp"
#include "entrobound/oracle.hpp"
#include "entrobound/sequence.hpp"

namespace entrobound {

namespace {

struct MatrixEntry {
  std::string name;
  std::shared_ptr<Sequence> seq;
};

std::vector<MatrixEntry> matrix_specs() {
  std::vector<MatrixEntry> m;
  m.push_back({"geom:c=1,b=2", std::make_shared<Sequence>(SequenceSpec(GeometricSpec{1.0, 2.0}))});
  m.push_back({"poly:a=1,alpha=2",
               std::make_shared<Sequence>(SequenceSpec(PolynomialSpec{1.0, 2.0}))});
  m.push_back({"polylog:a=1,alpha=1,beta=2",
               std::make_shared<Sequence>(SequenceSpec(PolyLogSpec{1.0, 1.0, 2.0}))});
  m.push_back({"exppoly:a=1,lambda=1",
               std::make_shared<Sequence>(SequenceSpec(ExpPolySpec{1.0, 1.0}))});
  m.push_back({"expexp:a=1,lambda=0.5",
               std::make_shared<Sequence>(SequenceSpec(ExpExpSpec{1.0, 0.5}))});
  return m;
}

std::vector<ExponentPair> matrix_pairs() {
  return {ExponentPair(1, 2), ExponentPair(2, kInf), ExponentPair(kInf, 1), ExponentPair(2, 1)};
}

std::vector<std::int64_t> dyadic(int lo, int hi) {
  std::vector<std::int64_t> out;
  for (int j = lo; j <= hi; ++j) out.push_back(std::int64_t(1) << j);
  return out;
}

double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

std::string pair_name(const ExponentPair& pr) {
  std::ostringstream os;
  os << "(p=" << (pr.p() == kInf ? std::string("inf") : std::to_string(pr.p()))
     << ",q=" << (pr.q() == kInf ? std::string("inf") : std::to_string(pr.q())) << ")";
  return os.str();
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

CheckOutcome check_sandwich(const SuiteConfig& cfg, const std::vector<MatrixEntry>& mx) {
  Timer timer;
  CheckOutcome out;
  out.name = "1-sandwich";
  double min_gap = std::numeric_limits<double>::infinity();
  int evaluated = 0;
  for (const auto& entry : mx) {
    for (const auto& pr : matrix_pairs()) {
      if (pr.p_greater_q() && entry.seq->summability(pr.r()) != Summability::yes) continue;
      for (std::int64_t n : dyadic(0, cfg.max_log2_n)) {
        const BoundResult lb = lower_bound(*entry.seq, pr, n, cfg.rtol);
        const BoundResult ub =
            upper_bound_with_constants(*entry.seq, pr, n, cfg.rtol, lb.k_scanned.hi);
        const double gap = ub.value.log() - lb.value.log();
        ++evaluated;
        if (gap < min_gap) min_gap = gap;
        if (gap < -1e-12 && out.detail.empty()) {
          std::ostringstream os;
          os << entry.name << " " << pair_name(pr) << " n=" << n << ": LB=" << lb.value.log()
             << " > UB=" << ub.value.log();
          out.detail = os.str();
        }
      }
    }
  }
  out.seconds = timer.seconds();
  out.margin = min_gap;
  out.pass = min_gap >= -1e-12 && (!cfg.enforce_runtime || out.seconds < 10.0);
  if (out.detail.empty()) {
    std::ostringstream os;
    os << evaluated << " comparisons, min log-gap " << min_gap;
    out.detail = os.str();
  }
  return out;
}

CheckOutcome check_exp_optimality(const SuiteConfig& cfg) {
  Timer timer;
  CheckOutcome out;
  out.name = "2-exp-optimality";
  const ExponentPair pr(1, 2);
  double worst = 0.0;
  std::ostringstream detail;
  for (const auto* spec_str : {"geom:c=1,b=2", "exppoly:a=1,lambda=1"}) {
    Sequence seq(SequenceSpec::parse(spec_str));
    std::vector<double> ratios;
    for (std::int64_t n : dyadic(0, cfg.max_log2_n)) {
      const double ub = upper_bound_p_lt_q(seq, pr, n).value.log();
      const double opt = optimal_form_exp(seq, pr, n).value.log();
      ratios.push_back(std::exp(ub - opt));
    }
    const double med = lower_median(ratios);
    const double spread = *std::max_element(ratios.begin(), ratios.end()) / med;
    worst = std::max(worst, spread);
    detail << spec_str << ": max/med=" << spread << "  ";
  }
  out.seconds = timer.seconds();
  out.margin = 1.5 - worst;
  out.pass = worst <= 1.5;
  out.detail = detail.str();
  return out;
}

CheckOutcome check_amp_staircase(const SuiteConfig& cfg) {
  Timer timer;
  CheckOutcome out;
  out.name = "3-amp-staircase";
  Sequence seq(SequenceSpec(PolyLogSpec{1.0, 1.0, 2.0}));
  const ExponentPair pr(2, 1);
  std::vector<double> ratios;
  for (std::int64_t n : dyadic(1, cfg.max_log2_n)) {
    const double eq3 = upper_bound_p_gt_q(seq, pr, n, cfg.rtol).value.log();
    const double stair = optimal_form_amp(seq, pr, n, cfg.rtol).value.log();
    ratios.push_back(std::exp(eq3 - stair));
  }
  const double med = lower_median(ratios);
  const double up = *std::max_element(ratios.begin(), ratios.end()) / med;
  const double down = med / *std::min_element(ratios.begin(), ratios.end());
  out.seconds = timer.seconds();
  out.margin = 3.0 - std::max(up, down);
  out.pass = out.margin >= 0.0;
  std::ostringstream os;
  os << "median=" << med << " max/med=" << up << " med/min=" << down;
  out.detail = os.str();
  return out;
}

CheckOutcome check_table1(const SuiteConfig& cfg) {
  Timer timer;
  CheckOutcome out;
  out.name = "4-table1-matrix";
  const Table1Result t = run_table1(cfg.window, cfg.rtol);
  int mismatches = 0;
  std::ostringstream os;
  for (const auto& row : t.rows) {
    for (const auto* cell : {&row.amp, &row.alp, &row.exp}) {
      if (cell->checked && cell->computed != cell->expected) {
        ++mismatches;
        os << row.family << "(lambda=" << row.lambda << ") ";
      }
    }
  }
  out.seconds = timer.seconds();
  out.pass = t.all_match;
  out.margin = t.all_match ? 1.0 : -static_cast<double>(mismatches);
  out.detail = t.all_match ? "all verified cells match the published matrix" : os.str();
  return out;
}

CheckOutcome check_equivalences(const SuiteConfig& cfg, const std::vector<MatrixEntry>& mx) {
  Timer timer;
  CheckOutcome out;
  out.name = "5-appendix-equivalences";
  int disagreements = 0;
  std::ostringstream os;
  auto complain = [&](const std::string& what) {
    ++disagreements;
    if (disagreements <= 4) os << what << "; ";
  };

  for (const auto& entry : mx) {
    const Sequence& seq = *entry.seq;
    // Four EXP characterizations.
    const Verdict v_base =
        search_exp_base(seq, cfg.window).found ? Verdict::holds : Verdict::fails;
    const Verdict v_shift = check_exp_shifted(seq, cfg.window).verdict;
    const Verdict v_psum = check_exp_partial_sum(seq, 1.0, cfg.window).verdict;
    const Verdict v_tail = check_exp_tail(seq, 1.0, cfg.rtol, cfg.window).verdict;
    if (v_base != v_shift || v_base != v_psum || v_base != v_tail)
      complain(entry.name + ": EXP characterizations disagree");

    // Doubling-condition characterizations.
    const Verdict v_dbl = check_doubling(seq, cfg.window).verdict;
    const Verdict v_alm =
        search_alm_incr(seq, cfg.window).found ? Verdict::holds : Verdict::fails;
    const Verdict v_gm = check_geo_mean(seq, cfg.window).verdict;
    if (v_dbl != v_alm || v_dbl != v_gm)
      complain(entry.name + ": doubling characterizations disagree");

    // EXP => ALP, EXP and AMP disjoint, and tau-doubling under AMP.
    for (const auto& pr : matrix_pairs()) {
      if (!pr.p_greater_q()) continue;
      if (seq.summability(pr.r()) != Summability::yes) continue;
      const Verdict v_alp = check_alp(seq, pr.r(), cfg.rtol, cfg.window).verdict;
      const Verdict v_amp = check_amp(seq, pr.r(), cfg.rtol, cfg.window).verdict;
      if (v_base == Verdict::holds && v_alp != Verdict::holds)
        complain(entry.name + " " + pair_name(pr) + ": EXP holds but ALP does not");
      if (v_base == Verdict::holds && v_amp == Verdict::holds)
        complain(entry.name + " " + pair_name(pr) + ": EXP and AMP both hold");
      if (v_amp == Verdict::holds) {
        // tau_n ~ tau_{2n}: doubling check on the tail sequence itself.
        const double r = pr.r();
        std::vector<double> tau_log(static_cast<size_t>(cfg.window) + 2);
        tau_log[static_cast<size_t>(cfg.window) + 1] =
            r * seq.tail(cfg.window + 1, r, cfg.rtol).value.log();
        for (std::int64_t n = cfg.window; n >= 1; --n)
          tau_log[static_cast<size_t>(n)] =
              log_add(tau_log[static_cast<size_t>(n) + 1], r * seq.log_sigma(n));
        std::vector<double> tau_vals;
        tau_vals.reserve(static_cast<size_t>(cfg.window));
        for (std::int64_t n = 1; n <= cfg.window; ++n)
          tau_vals.push_back(std::exp(tau_log[static_cast<size_t>(n)] / r));
        Sequence tau_seq(SequenceSpec(ExplicitSpec{std::move(tau_vals), TailModel{}}));
        const auto rep = check_doubling(tau_seq, cfg.window);
        if (rep.verdict != Verdict::holds)
          complain(entry.name + " " + pair_name(pr) + ": tau-sequence doubling not confirmed");
      }
    }
  }
  out.seconds = timer.seconds();
  out.pass = disagreements == 0;
  out.margin = -static_cast<double>(disagreements);
  out.detail = disagreements == 0 ? "all characterizations agree" : os.str();
  return out;
}

CheckOutcome check_tail_recurrence(const SuiteConfig& cfg, const std::vector<MatrixEntry>& mx) {
  Timer timer;
  CheckOutcome out;
  out.name = "6-tail-recurrence";
  double worst = 0.0;
  std::string worst_at;
  for (const auto& entry : mx) {
    for (const auto& pr : matrix_pairs()) {
      if (!pr.p_greater_q()) continue;
      const double r = pr.r();
      if (entry.seq->summability(r) != Summability::yes) continue;
      for (std::int64_t k = 1; k <= cfg.recurrence_k_max; ++k) {
        const double tk = r * entry.seq->tail(k, r, cfg.rtol).value.log();
        const double tk1 = r * entry.seq->tail(k + 1, r, cfg.rtol).value.log();
        const double rhs = log_add(tk1, r * entry.seq->log_sigma(k));
        const double err = std::fabs(std::expm1(rhs - tk));
        if (err > worst) {
          worst = err;
          worst_at = entry.name + " r=" + std::to_string(r) + " k=" + std::to_string(k);
        }
      }
    }
  }
  out.seconds = timer.seconds();
  const double tol = std::max(1e-8, 10.0 * cfg.rtol);
  out.margin = tol - worst;
  out.pass = worst <= tol;
  std::ostringstream os;
  os << "max relative defect " << worst << " at " << worst_at;
  out.detail = os.str();
  return out;
}

CheckOutcome check_volumes(const SuiteConfig& cfg) {
  Timer timer;
  CheckOutcome out;
  out.name = "7-volume-validation";
  double min_slack = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  bool ok = true;
  for (double p : {1.0, 2.0, kInf}) {
    for (int k : {2, 3}) {
      const McVolume mc = mc_volume(p, k, cfg.mc_samples, 20240801);
      const double exact = volume_unit_ball(p, k).value();
      const double diff = std::fabs(mc.estimate - exact);
      const double slack =
          std::min(3.0 * mc.std_error + 1e-12 * exact - diff, 0.02 * exact - diff);
      min_slack = std::min(min_slack, slack);
      if (slack < 0.0) {
        ok = false;
        os << "mc mismatch p=" << p << " k=" << k << " est=" << mc.estimate << " exact=" << exact
           << "; ";
      }
    }
  }
  // Volume-ratio slope: log(ratio)/k - (1/q - 1/p) log k stays bounded.
  double slope_max = 0.0;
  for (const auto& pr : matrix_pairs()) {
    const double drift = pr.inv_q() - pr.inv_p();
    for (std::int64_t k = 1; k <= cfg.slope_k_max; ++k) {
      const double e = std::fabs(log_volume_ratio(pr, k) / static_cast<double>(k) -
                                 drift * std::log(static_cast<double>(k)));
      slope_max = std::max(slope_max, e);
    }
  }
  const double kSlopeBound = 1.25;  // measured sup ~0.996 over these pairs
  if (slope_max > kSlopeBound) {
    ok = false;
    os << "volume-ratio slope " << slope_max << " exceeds " << kSlopeBound << "; ";
  }
  out.seconds = timer.seconds();
  out.pass = ok && (!cfg.enforce_runtime || out.seconds < 30.0);
  out.margin = std::min(min_slack, kSlopeBound - slope_max);
  if (os.str().empty()) {
    std::ostringstream d;
    d << "mc min slack " << min_slack << ", slope max " << slope_max;
    out.detail = d.str();
  } else {
    out.detail = os.str();
  }
  return out;
}

CheckOutcome check_oracle_brackets(const SuiteConfig& cfg) {
  (void)cfg;
  Timer timer;
  CheckOutcome out;
  out.name = "8-oracle-brackets";
  bool ok = true;
  std::ostringstream os;

  // k=1 identity: e_2 = 1/2 exactly, bracket width <= 0.02.
  {
    const FiniteDiag d({1.0}, kInf, kInf);
    const EntropyBracket br = entropy_bracket(d, 2, 80, 1.0 / 64.0, 1);
    if (!(br.lo <= 0.5 && 0.5 <= br.hi && br.hi - br.lo <= 0.02)) {
      ok = false;
      os << "e_2 bracket [" << br.lo << "," << br.hi << "] misses 1/2; ";
    }
  }
  // k=2 Euclidean disc at eps=1/2: volume bound exactly 4, greedy at least 4.
  {
    const FiniteDiag d({1.0, 1.0}, 2.0, 2.0);
    const std::int64_t vol = volume_lower_nd(d, 0.5);
    const std::int64_t greedy = covering_upper(d, 0.5, 0.125);
    if (vol != 4 || greedy < 4) {
      ok = false;
      os << "disc eps=1/2: vol=" << vol << " greedy=" << greedy << "; ";
    }
  }
  // Lemma 2 consistency: measured N(2 eps) never exceeds the explicit
  // volume-argument right-hand side, on a dyadic eps grid for k <= 2.
  double min_lemma_gap = std::numeric_limits<double>::infinity();
  {
    struct Cfg {
      std::vector<double> sigma;
      double p, q;
    };
    const Cfg cases[] = {
        {{1.0}, 2.0, 2.0},      {{0.7}, 1.0, 2.0},      {{1.0, 1.0}, 2.0, 2.0},
        {{1.0, 0.5}, 1.0, 2.0}, {{1.0, 0.5}, kInf, 1.0},
    };
    for (const auto& c : cases) {
      const FiniteDiag d(c.sigma, c.p, c.q);
      const int k = d.k();
      const double norm = finite_operator_norm(d);
      const double cp = std::max(1.0, std::exp2((c.p == kInf ? 0.0 : 1.0 / c.p) - 1.0));
      const double cq = std::max(1.0, std::exp2((c.q == kInf ? 0.0 : 1.0 / c.q) - 1.0));
      const double ip = c.p == kInf ? 0.0 : 1.0 / c.p;
      const double iq = c.q == kInf ? 0.0 : 1.0 / c.q;
      const double id_norm = std::pow(static_cast<double>(k), std::max(0.0, ip - iq));
      for (int j = 1; j <= 3; ++j) {
        const double eps = norm / std::exp2(j);
        const std::int64_t measured = covering_upper(d, 2.0 * eps, eps / 4.0);
        double log_rhs = static_cast<double>(k) * std::log(2.0 * cp) +
                         volume_unit_ball(c.p, k).log() - volume_unit_ball(c.q, k).log();
        for (int i = 0; i < k; ++i)
          log_rhs += std::log(id_norm + cq * d.sigma[static_cast<size_t>(i)] / eps);
        const double gap = log_rhs - std::log(static_cast<double>(measured));
        min_lemma_gap = std::min(min_lemma_gap, gap);
        if (gap < 0.0) {
          ok = false;
          os << "lemma-2 violation k=" << k << " eps=" << eps << "; ";
        }
      }
    }
  }
  // e_1 bracket vs operator norm: [lo,hi] intersects [norm/C_q, norm].
  {
    const FiniteDiag d({1.0, 0.5}, 2.0, 1.0);
    const double norm = finite_operator_norm(d);
    const double cq = 1.0;
    const EntropyBracket br = entropy_bracket(d, 1, 48, 0.125, 1);
    if (br.lo > norm || br.hi < norm / cq - 1e-9) {
      ok = false;
      os << "e_1 bracket [" << br.lo << "," << br.hi << "] vs norm " << norm << "; ";
    }
  }
  out.seconds = timer.seconds();
  out.pass = ok;
  out.margin = min_lemma_gap;
  out.detail = os.str().empty()
                   ? "brackets valid; min lemma-2 log-gap " + std::to_string(min_lemma_gap)
                   : os.str();
  return out;
}

CheckOutcome check_monotonicity_scaling(const SuiteConfig& cfg) {
  Timer timer;
  CheckOutcome out;
  out.name = "9-monotonicity-scaling";
  bool ok = true;
  std::ostringstream os;
  double min_mono = std::numeric_limits<double>::infinity();
  double worst_scale = 0.0;

  struct Case {
    SequenceSpec spec, scaled;
    double log_c;
    ExponentPair pair;
    std::vector<BoundForm> forms;
  };
  const std::vector<Case> cases = {
      {SequenceSpec(GeometricSpec{1.0, 2.0}), SequenceSpec(GeometricSpec{3.0, 2.0}),
       std::log(3.0), ExponentPair(1, 2),
       {BoundForm::ub_p_lt_q, BoundForm::opt_exp, BoundForm::lb_volume,
        BoundForm::ub_const_p_lt_q}},
      {SequenceSpec(PolyLogSpec{1.0, 1.0, 2.0}), SequenceSpec(PolyLogSpec{2.5, 1.0, 2.0}),
       std::log(2.5), ExponentPair(2, 1),
       {BoundForm::ub_p_gt_q, BoundForm::opt_alp, BoundForm::opt_amp, BoundForm::lb_volume,
        BoundForm::ub_const_p_gt_q}},
  };
  for (const auto& c : cases) {
    Sequence seq(c.spec), scaled(c.scaled);
    for (BoundForm form : c.forms) {
      double prev = std::numeric_limits<double>::infinity();
      for (std::int64_t n : dyadic(0, cfg.max_log2_n)) {
        const double v = evaluate_bound(seq, c.pair, form, n, cfg.rtol).value.log();
        if (prev != std::numeric_limits<double>::infinity()) {
          min_mono = std::min(min_mono, prev - v);
          if (prev - v < -1e-12 && ok) {
            ok = false;
            os << form_name(form) << " increases at n=" << n << "; ";
          }
        }
        prev = v;
        if (n == 1 || n == 1024 || n == (std::int64_t(1) << cfg.max_log2_n)) {
          const double vs = evaluate_bound(scaled, c.pair, form, n, cfg.rtol).value.log();
          const double dev = std::fabs(vs - v - c.log_c);
          worst_scale = std::max(worst_scale, dev);
          if (dev > 1e-12 && ok) {
            ok = false;
            os << form_name(form) << " scaling deviation " << dev << " at n=" << n << "; ";
          }
        }
      }
    }
  }
  out.seconds = timer.seconds();
  out.pass = ok;
  out.margin = std::min(min_mono + 1e-12, 1e-12 - worst_scale);
  if (os.str().empty()) {
    std::ostringstream d;
    d << "min monotone step " << min_mono << ", max scaling deviation " << worst_scale;
    out.detail = d.str();
  } else {
    out.detail = os.str();
  }
  return out;
}

CheckOutcome check_certified_truncation(const SuiteConfig& cfg) {
  Timer timer;
  CheckOutcome out;
  out.name = "x-certified-truncation";
  bool ok = true;
  double worst = 0.0;
  std::ostringstream os;
  struct Case {
    SequenceSpec spec;
    ExponentPair pair;
    BoundForm form;
  };
  const std::vector<Case> cases = {
      {SequenceSpec(GeometricSpec{1.0, 2.0}), ExponentPair(1, 2), BoundForm::ub_p_lt_q},
      {SequenceSpec(GeometricSpec{1.0, 2.0}), ExponentPair(1, 2), BoundForm::opt_exp},
      {SequenceSpec(PolynomialSpec{1.0, 2.0}), ExponentPair(1, 2), BoundForm::ub_const_p_lt_q},
      {SequenceSpec(PolynomialSpec{1.0, 2.0}), ExponentPair(2, 1), BoundForm::ub_p_gt_q},
  };
  for (const auto& c : cases) {
    Sequence seq(c.spec);
    for (std::int64_t n : {std::int64_t(16), std::int64_t(1) << 12}) {
      const BoundResult base = evaluate_bound(seq, c.pair, c.form, n, cfg.rtol);
      if (base.certificate != Certificate::certified) continue;
      const BoundResult wide =
          evaluate_bound(seq, c.pair, c.form, n, cfg.rtol, 2 * base.k_scanned.hi);
      const double dev = std::fabs(wide.value.log() - base.value.log());
      worst = std::max(worst, dev);
      if (dev > 1e-12) {
        ok = false;
        os << form_name(c.form) << " n=" << n << " moved by " << dev << "; ";
      }
    }
  }
  out.seconds = timer.seconds();
  out.pass = ok;
  out.margin = 1e-12 - worst;
  out.detail = os.str().empty() ? "certified sups stable under 2x scan extension" : os.str();
  return out;
}

}  // namespace

std::vector<CheckOutcome> run_verification(const SuiteConfig& cfg) {
  const auto mx = matrix_specs();
  std::vector<CheckOutcome> out;
  out.push_back(check_sandwich(cfg, mx));
  out.push_back(check_exp_optimality(cfg));
  out.push_back(check_amp_staircase(cfg));
  out.push_back(check_table1(cfg));
  out.push_back(check_equivalences(cfg, mx));
  out.push_back(check_tail_recurrence(cfg, mx));
  out.push_back(check_volumes(cfg));
  out.push_back(check_oracle_brackets(cfg));
  out.push_back(check_monotonicity_scaling(cfg));
  out.push_back(check_certified_truncation(cfg));
  return out;
}

}  // namespace entrobound
