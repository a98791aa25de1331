#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "entrobound/log_real.hpp"
#include "entrobound/sequence_spec.hpp"

namespace entrobound {

inline constexpr double kDefaultRtol = 1e-9;
inline constexpr std::int64_t kTailTermCap = std::int64_t(1) << 26;

enum class Summability { yes, no, unknown_tail };

// tau_k with a certified bracket: lower <= tau_k <= upper is guaranteed by
// construction (finite window plus a two-sided remainder bound), and
// (upper/lower - 1) <= ~2*rtol. value is the log-midpoint.
struct TailEstimate {
  LogReal value;
  LogReal lower;
  LogReal upper;
  bool exact = false;            // closed form, no truncation at all
  std::int64_t window_end = 0;   // first index not summed explicitly
};

// Immutable evaluator for one diagonal sequence. All methods are pure
// functions of (spec, arguments); the prefix caches are grown under a mutex
// so concurrent use from several threads is safe.
class Sequence {
 public:
  explicit Sequence(SequenceSpec spec);

  const SequenceSpec& spec() const { return spec_; }
  Family family() const { return spec_.family(); }

  // sigma_n in log-domain, exact closed-form logs for the families
  // (ExpExp yields -a*e^{lambda n} directly, never via exponentiation).
  double log_sigma(std::int64_t n) const;
  LogReal sigma(std::int64_t n) const { return LogReal::from_log(log_sigma(n)); }

  // Largest index with a defined (Explicit, tail=none) or positive
  // (tail=zero) value; nullopt for everything else.
  std::optional<std::int64_t> prefix_limit() const;

  // Largest index whose log sigma_n still fits a double (ExpExp reaches
  // -1.8e308 around n = 709/lambda). Finite windows and scans clamp here.
  std::int64_t max_finite_index() const;

  // sum_{i<=k} log sigma_i, cached so a scan over k costs O(K) total.
  double log_prefix_product(std::int64_t k) const;
  // GM_k = (sigma_1 * ... * sigma_k)^{1/k}
  LogReal geometric_mean(std::int64_t k) const;

  // log of sum_{i<=k} sigma_i, cached like the prefix product.
  double log_prefix_sum(std::int64_t k) const;

  // v_n = (sum_{k<=n} sigma_k^{-s})^{1/s}
  LogReal partial_sum_inv(std::int64_t n, double s) const;

  // Is sigma in ell_r? Analytic for families, model-based for Explicit.
  Summability summability(double r) const;

  // tau_k = (sum_{n>=k} sigma_n^r)^{1/r} with guaranteed relative error
  // <= rtol. Throws DivergenceError / UnusableTailError / PrecisionError.
  TailEstimate tail(std::int64_t k, double r, double rtol = kDefaultRtol,
                    std::int64_t term_cap = kTailTermCap) const;

  // Memoized (log tau_k midpoint, log tau_k certified upper); the bound
  // scans hit the same (k, r) pairs over whole n-grids.
  std::pair<double, double> tail_logs_cached(std::int64_t k, double r, double rtol) const;

  // One certified tail at k_max plus the downward recurrence
  // tau_k^r = tau_{k+1}^r + sigma_k^r fills the cache for every k <= k_max,
  // which is orders of magnitude cheaper than k_max separate windows.
  void prefetch_tails(std::int64_t k_max, double r, double rtol) const;

 private:
  SequenceSpec spec_;
  mutable std::mutex cache_mutex_;
  mutable std::vector<double> log_prod_;  // log_prod_[k] = sum_{i<=k} log sigma_i
  mutable LogAccumulator sum_acc_;
  mutable std::vector<double> log_sum_;   // log_sum_[k] = log sum_{i<=k} sigma_i
  mutable std::map<std::tuple<std::int64_t, std::uint64_t, std::uint64_t>,
                   std::pair<double, double>>
      tail_cache_;
};

}  // namespace entrobound
