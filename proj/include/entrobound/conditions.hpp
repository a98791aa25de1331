#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "entrobound/exponents.hpp"
#include "entrobound/sequence.hpp"

namespace entrobound {

enum class ConditionId {
  exp_base,         // sup_{k<=n} sigma_n b^n / (sigma_k b^k) < inf
  exp_shifted,      // exists n0, a<1 with sigma_{k+n0} <= a sigma_k
  exp_partial_sum,  // sigma_n ~ 1/v_n
  exp_tail,         // sigma_n ~ tau_n
  doubling,         // sigma_n ~ sigma_{2n}
  alm_incr,         // inf_{k<=n} sigma_n n^alpha / (sigma_k k^alpha) > 0
  geo_mean,         // sigma_n ~ (sigma_1...sigma_n)^{1/n}
  alp,              // tau_n <~ sigma_n n^{1/r}
  amp,              // tau_n >~ sigma_n n^{1/r}
};

enum class Verdict { holds, fails, inconclusive };

std::string_view condition_name(ConditionId c);
std::string_view verdict_name(Verdict v);

// Finite-window verdicts follow the plateau rule: the running extremum over
// indices (N/2, N] must move by a relative factor < 1e-3 to count as
// settled. Sustained drift reads as failure, decelerating drift as
// inconclusive. Family specs override the verdict analytically.
inline constexpr double kPlateauTol = 1e-3;

struct Witness {
  double log_ratio = 0.0;  // extremal measured ratio, log-domain
  std::int64_t n = 0;      // attaining indices
  std::int64_t k = 0;
};

struct ConditionReport {
  ConditionId condition = ConditionId::exp_base;
  std::string label;  // e.g. "EXP(b=2)" / "ALP(r=2)"
  Verdict verdict = Verdict::inconclusive;
  std::int64_t window = 0;
  Witness witness;
  bool analytic = false;             // verdict decided by closed-form family knowledge
  Verdict window_verdict = Verdict::inconclusive;  // pure finite-window reading
  std::string note;
};

ConditionReport check_exp(const Sequence& seq, double b, std::int64_t window);
ConditionReport check_exp_shifted(const Sequence& seq, std::int64_t window);
ConditionReport check_exp_partial_sum(const Sequence& seq, double s, std::int64_t window);
ConditionReport check_exp_tail(const Sequence& seq, double r, double rtol, std::int64_t window);
ConditionReport check_doubling(const Sequence& seq, std::int64_t window);
ConditionReport check_alm_incr(const Sequence& seq, double alpha, std::int64_t window);
ConditionReport check_geo_mean(const Sequence& seq, std::int64_t window);
ConditionReport check_alp(const Sequence& seq, double r, double rtol, std::int64_t window);
ConditionReport check_amp(const Sequence& seq, double r, double rtol, std::int64_t window);

// (EXP) is monotone downward in b, so an existence search over the geometric
// grid b in {2^{j/8} : j = 1..64} suffices; reports the largest base found.
struct ExpSearch {
  bool found = false;
  double b = 0.0;
  ConditionReport report;
};
ExpSearch search_exp_base(const Sequence& seq, std::int64_t window);

// Grid search for the almost-increase exponent of Lemma-style doubling
// equivalences, alpha in {2^{j/4} : j = -8..16}.
struct AlmIncrSearch {
  bool found = false;
  double alpha = 0.0;
  ConditionReport report;
};
AlmIncrSearch search_alm_incr(const Sequence& seq, std::int64_t window);

// Branch-appropriate battery: p<q runs EXP (auto base search) + doubling;
// p>q runs ALP, AMP, EXP, doubling. Throws BranchError for p = q.
std::vector<ConditionReport> classify(const Sequence& seq, const ExponentPair& pair,
                                      std::int64_t window = 512, double rtol = kDefaultRtol);

// The three-family condition matrix (a=1, lambda in {0.5, 1, 2}) next to the
// published entries; lambda=1 rows carry boundary notes and are not matched.
struct Table1Cell {
  Verdict computed = Verdict::inconclusive;
  Verdict expected = Verdict::inconclusive;
  bool checked = false;
};
struct Table1Row {
  std::string family;
  double lambda = 0.0;
  Table1Cell amp, alp, exp;
  std::string note;
};
struct Table1Result {
  std::vector<Table1Row> rows;
  bool all_match = false;
};
Table1Result run_table1(std::int64_t window = 512, double rtol = kDefaultRtol);

}  // namespace entrobound
