#pragma once

#include <cstdint>
#include <vector>

#include "entrobound/errors.hpp"

namespace entrobound {

// Finite diagonal operator D_sigma : l_p^k -> l_q^k, k <= 3 (hard cap: the
// oracle validates, it does not scale).
struct FiniteDiag {
  std::vector<double> sigma;  // positive, nonincreasing
  double p = 2.0;
  double q = 2.0;

  FiniteDiag(std::vector<double> s, double p_in, double q_in);
  int k() const { return static_cast<int>(sigma.size()); }
};

struct CoveringEstimate {
  double epsilon = 0.0;
  std::int64_t n_upper = 0;  // greedy cover size (valid upper bound on N(eps))
  std::int64_t n_lower = 0;  // max of volume bound and packing-derived bound
  double grid_resolution = 0.0;
  std::uint64_t seed = 0;
};

// Greedy cover of D_sigma B_p by l_q-balls of radius eps centered at grid
// points. The grid cells are clipped to the bounding box and covered via a
// farthest-corner test, so the count is a true upper bound on N(eps) for
// the continuous body. grid_resolution must be <= eps/4.
std::int64_t covering_upper(const FiniteDiag& diag, double eps, double grid_resolution);

// Size of a greedily built maximal 2*eps-separated subset of D_sigma B_p:
// a valid lower bound on the packing number P(eps). Deterministic in seed.
std::int64_t packing_lower(const FiniteDiag& diag, double eps, std::uint64_t seed,
                           std::int64_t budget = 32768);

// ceil( prod sigma_i * vol(B_p) / (eps^k * vol(B_q)) ), the volume lower
// bound on N(eps).
std::int64_t volume_lower_nd(const FiniteDiag& diag, double eps);

// Combined row for reports.
CoveringEstimate covering_estimate(const FiniteDiag& diag, double eps, double grid_resolution,
                                   std::uint64_t seed);

// ||D_sigma : l_p^k -> l_q^k||
double finite_operator_norm(const FiniteDiag& diag);

struct EntropyBracket {
  double lo = 0.0;   // certified: e_n >= lo
  double hi = 0.0;   // certified: e_n <= hi
  bool resolved = true;  // false when probes got stuck before the budget ran out
  int probes = 0;
};

// Bisection bracket around e_n(D_sigma). hi moves on covering successes,
// lo on volume/packing witnesses; unresolved probes fall back to side
// alternation until the budget runs out.
EntropyBracket entropy_bracket(const FiniteDiag& diag, std::int64_t n, int probe_budget = 48,
                               double grid_fraction = 0.125, std::uint64_t seed = 1);

struct McVolume {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
};

// Hit-or-miss Monte Carlo estimate of vol(B_{l_p^k}) inside [-1,1]^k with a
// seeded generator.
McVolume mc_volume(double p, int k, std::int64_t samples, std::uint64_t seed);

}  // namespace entrobound
