#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "entrobound/exponents.hpp"
#include "entrobound/log_real.hpp"
#include "entrobound/sequence.hpp"

namespace entrobound {

enum class BoundForm {
  ub_p_lt_q,        // general upper bound, p<q
  ub_p_gt_q,        // general upper bound, p>q
  opt_exp,          // k^{-1/s} (GM_k / n^{1/k}) form, p<q
  opt_alp,          // k^{+1/r} (GM_k / n^{1/k}) form, p>q
  opt_amp,          // tau_{floor(log2 n)+1}, p>q
  lb_volume,        // volume lower bound
  ub_const_p_lt_q,  // fully explicit constant-carrying upper bound, p<q
  ub_const_p_gt_q,  // fully explicit constant-carrying upper bound, p>q
};

std::string_view form_name(BoundForm f);

// CLI spellings: ub | lb | opt-exp | opt-alp | opt-amp | ub-const,
// dispatched to the branch of the pair. Throws SpecParseError on a
// form/branch mismatch.
BoundForm resolve_form(std::string_view cli_name, const ExponentPair& pair);

enum class Certificate { certified, heuristic };
std::string_view certificate_name(Certificate c);

struct KRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
};

struct BoundResult {
  LogReal value;
  std::int64_t argmax_k = 1;
  KRange k_scanned;
  Certificate certificate = Certificate::heuristic;
  BoundForm form = BoundForm::ub_p_lt_q;
};

// lambda^k(B_{l_p^k}) = (2 Gamma(1+1/p))^k / Gamma(1+k/p); 2^k for p = inf.
LogReal volume_unit_ball(double p, std::int64_t k);
// log( lambda^k(B_p) / lambda^k(B_q) )
double log_volume_ratio(const ExponentPair& pair, std::int64_t k);

// ||D_sigma||: sigma_1 for p <= q, ||sigma||_r for p > q.
LogReal operator_norm(const Sequence& seq, const ExponentPair& pair, double rtol = kDefaultRtol);

// min_scan forces the k-scan at least that far before any stopping rule;
// the sandwich checks use it to synchronize scan ranges across forms.
BoundResult upper_bound_p_lt_q(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                               std::int64_t min_scan = 0);
BoundResult upper_bound_p_gt_q(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                               double rtol = kDefaultRtol, std::int64_t min_scan = 0);
BoundResult optimal_form_exp(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                             std::int64_t min_scan = 0);
BoundResult optimal_form_alp(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                             std::int64_t min_scan = 0);
BoundResult optimal_form_amp(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                             double rtol = kDefaultRtol);
BoundResult lower_bound(const Sequence& seq, const ExponentPair& pair, std::int64_t n,
                        double rtol = kDefaultRtol, std::int64_t min_scan = 0);
BoundResult upper_bound_with_constants(const Sequence& seq, const ExponentPair& pair,
                                       std::int64_t n, double rtol = kDefaultRtol,
                                       std::int64_t min_scan = 0);

BoundResult evaluate_bound(const Sequence& seq, const ExponentPair& pair, BoundForm form,
                           std::int64_t n, double rtol = kDefaultRtol,
                           std::int64_t min_scan = 0);

// Per-k value of a sup form in log-domain (for opt_amp: tau_k * n^{-1/k},
// the supremand behind its dyadic staircase). Diagnostic surface for tests
// and the verification suite.
double bound_term_log(const Sequence& seq, const ExponentPair& pair, BoundForm form,
                      std::int64_t k, std::int64_t n, double rtol = kDefaultRtol);

// Batch evaluation over an n-grid; rows ordered n-major, then by the given
// form order, regardless of thread count.
std::vector<BoundResult> bound_curve(const Sequence& seq, const ExponentPair& pair,
                                     const std::vector<std::int64_t>& n_list,
                                     const std::vector<BoundForm>& forms,
                                     double rtol = kDefaultRtol, int threads = 1);

}  // namespace entrobound
