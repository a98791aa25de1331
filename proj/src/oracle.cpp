#include "entrobound/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "entrobound/bounds.hpp"
#include "entrobound/exponents.hpp"

namespace entrobound {

namespace {

constexpr std::int64_t kCellGuard = 100'000'000;  // 10^8 grid points
constexpr double kCoverSlack = 1.0 + 1e-12;       // absorbs roundoff in cover tests

using Vec = std::array<double, 3>;
using Idx = std::array<std::int64_t, 3>;

double lq_norm(const Vec& v, int k, double q) {
  if (q == kInf) {
    double m = 0.0;
    for (int d = 0; d < k; ++d) m = std::max(m, std::fabs(v[d]));
    return m;
  }
  double s = 0.0;
  for (int d = 0; d < k; ++d) s += std::pow(std::fabs(v[d]), q);
  return std::pow(s, 1.0 / q);
}

bool member_ball(const FiniteDiag& diag, const Vec& x) {
  // x in D_sigma B_p  <=>  sum |x_i/sigma_i|^p <= 1
  if (diag.p == kInf) {
    for (int d = 0; d < diag.k(); ++d)
      if (std::fabs(x[static_cast<size_t>(d)]) > diag.sigma[static_cast<size_t>(d)]) return false;
    return true;
  }
  double s = 0.0;
  for (int d = 0; d < diag.k(); ++d)
    s += std::pow(std::fabs(x[static_cast<size_t>(d)]) / diag.sigma[static_cast<size_t>(d)],
                  diag.p);
  return s <= 1.0;
}

struct Grid {
  int k = 1;
  double delta = 0.0;
  Idx m{};            // index range [-m[d], m[d]] per dimension
  Idx stride{};       // flattening strides
  std::int64_t total = 1;

  std::int64_t flatten(const Idx& i) const {
    std::int64_t f = 0;
    for (int d = 0; d < k; ++d) f += (i[static_cast<size_t>(d)] + m[static_cast<size_t>(d)]) *
                                     stride[static_cast<size_t>(d)];
    return f;
  }
};

Grid make_grid(const FiniteDiag& diag, double delta) {
  Grid g;
  g.k = diag.k();
  g.delta = delta;
  g.total = 1;
  for (int d = 0; d < g.k; ++d) {
    g.m[static_cast<size_t>(d)] =
        static_cast<std::int64_t>(std::floor(diag.sigma[static_cast<size_t>(d)] / delta)) + 1;
    const std::int64_t width = 2 * g.m[static_cast<size_t>(d)] + 1;
    if (g.total > kCellGuard / width)
      throw OracleError("covering grid exceeds the 10^8 point guard");
    g.total *= width;
  }
  std::int64_t s = 1;
  for (int d = 0; d < g.k; ++d) {
    g.stride[static_cast<size_t>(d)] = s;
    s *= 2 * g.m[static_cast<size_t>(d)] + 1;
  }
  return g;
}

struct Cell {
  Idx idx{};
  Vec lo{}, hi{};  // clipped to the bounding box
};

// Farthest point of the clipped cell from center c, per coordinate.
double cell_far_dist(const Cell& cell, const Vec& c, int k, double q) {
  Vec far{};
  for (int d = 0; d < k; ++d)
    far[static_cast<size_t>(d)] =
        std::max(std::fabs(cell.lo[static_cast<size_t>(d)] - c[static_cast<size_t>(d)]),
                 std::fabs(cell.hi[static_cast<size_t>(d)] - c[static_cast<size_t>(d)]));
  return lq_norm(far, k, q);
}

template <typename Fn>
void for_each_idx(const Grid& g, const Idx& lo, const Idx& hi, Fn&& fn) {
  Idx it = lo;
  for (;;) {
    fn(it);
    int d = 0;
    for (; d < g.k; ++d) {
      if (++it[static_cast<size_t>(d)] <= hi[static_cast<size_t>(d)]) break;
      it[static_cast<size_t>(d)] = lo[static_cast<size_t>(d)];
    }
    if (d == g.k) return;
  }
}

double frac(double x) { return x - std::floor(x); }

// Van der Corput radical inverse in the given base.
double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

FiniteDiag::FiniteDiag(std::vector<double> s, double p_in, double q_in)
    : sigma(std::move(s)), p(p_in), q(q_in) {
  if (sigma.empty() || sigma.size() > 3)
    throw OracleError("oracle dimension must satisfy 1 <= k <= 3");
  double prev = std::numeric_limits<double>::infinity();
  for (double x : sigma) {
    if (!(x > 0.0) || !std::isfinite(x)) throw OracleError("sigma entries must be positive");
    if (x > prev) throw OracleError("sigma entries must be nonincreasing");
    prev = x;
  }
  for (double e : {p, q})
    if (std::isnan(e) || e <= 0.0) throw OracleError("exponents must lie in (0, inf]");
}

double finite_operator_norm(const FiniteDiag& diag) {
  const double ip = diag.p == kInf ? 0.0 : 1.0 / diag.p;
  const double iq = diag.q == kInf ? 0.0 : 1.0 / diag.q;
  if (ip < iq) {  // p > q: ||sigma||_r with 1/r = 1/q - 1/p
    const double r = 1.0 / (iq - ip);
    double s = 0.0;
    for (double x : diag.sigma) s += std::pow(x, r);
    return std::pow(s, 1.0 / r);
  }
  return diag.sigma.front();
}

std::int64_t covering_upper(const FiniteDiag& diag, double eps, double grid_resolution) {
  if (!(eps > 0.0)) throw OracleError("covering_upper: eps must be positive");
  if (!(grid_resolution > 0.0) || grid_resolution > eps / 4.0)
    throw OracleError("covering_upper: grid resolution must satisfy 0 < delta <= eps/4");
  const int k = diag.k();
  const Grid g = make_grid(diag, grid_resolution);
  const double half = grid_resolution / 2.0;

  // Active cells: grid cells (clipped to the box) that intersect the body.
  std::vector<Cell> cells;
  std::vector<std::int64_t> flat_of_cell;
  Idx lo_idx{}, hi_idx{};
  for (int d = 0; d < k; ++d) {
    lo_idx[static_cast<size_t>(d)] = -g.m[static_cast<size_t>(d)];
    hi_idx[static_cast<size_t>(d)] = g.m[static_cast<size_t>(d)];
  }
  for_each_idx(g, lo_idx, hi_idx, [&](const Idx& idx) {
    Cell cell;
    cell.idx = idx;
    bool empty = false;
    Vec nearest{};
    for (int d = 0; d < k; ++d) {
      const double c = static_cast<double>(idx[static_cast<size_t>(d)]) * g.delta;
      const double s = diag.sigma[static_cast<size_t>(d)];
      cell.lo[static_cast<size_t>(d)] = std::max(-s, c - half);
      cell.hi[static_cast<size_t>(d)] = std::min(s, c + half);
      if (cell.lo[static_cast<size_t>(d)] > cell.hi[static_cast<size_t>(d)]) {
        empty = true;
        break;
      }
      nearest[static_cast<size_t>(d)] = std::clamp(0.0, cell.lo[static_cast<size_t>(d)],
                                                   cell.hi[static_cast<size_t>(d)]);
    }
    if (empty || !member_ball(diag, nearest)) return;
    flat_of_cell.push_back(g.flatten(idx));
    cells.push_back(cell);
  });
  if (cells.empty()) return 1;

  auto cell_pos = [&](std::int64_t flat) -> std::int64_t {
    const auto it = std::lower_bound(flat_of_cell.begin(), flat_of_cell.end(), flat);
    if (it == flat_of_cell.end() || *it != flat) return -1;
    return it - flat_of_cell.begin();
  };

  std::vector<char> covered(cells.size(), 0);
  size_t first_uncovered = 0;
  std::int64_t count = 0;
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(eps / grid_resolution)) + 1;
  const double eps_eff = eps * kCoverSlack;

  while (first_uncovered < cells.size()) {
    while (first_uncovered < cells.size() && covered[first_uncovered]) ++first_uncovered;
    if (first_uncovered == cells.size()) break;
    const Cell& target = cells[first_uncovered];

    // Candidate centers: grid points near the target that cover it; pick the
    // one covering the most still-uncovered cells (lexicographically first on
    // ties).
    std::int64_t best_count = -1;
    Vec best_center{};
    Idx clo{}, chi{};
    for (int d = 0; d < k; ++d) {
      clo[static_cast<size_t>(d)] = std::max(-g.m[static_cast<size_t>(d)],
                                             target.idx[static_cast<size_t>(d)] - reach);
      chi[static_cast<size_t>(d)] =
          std::min(g.m[static_cast<size_t>(d)], target.idx[static_cast<size_t>(d)] + reach);
    }
    for_each_idx(g, clo, chi, [&](const Idx& ci) {
      Vec center{};
      for (int d = 0; d < k; ++d)
        center[static_cast<size_t>(d)] = static_cast<double>(ci[static_cast<size_t>(d)]) * g.delta;
      if (cell_far_dist(target, center, k, diag.q) > eps_eff) return;
      std::int64_t covers = 0;
      Idx wlo{}, whi{};
      for (int d = 0; d < k; ++d) {
        wlo[static_cast<size_t>(d)] = std::max(-g.m[static_cast<size_t>(d)],
                                               ci[static_cast<size_t>(d)] - reach);
        whi[static_cast<size_t>(d)] =
            std::min(g.m[static_cast<size_t>(d)], ci[static_cast<size_t>(d)] + reach);
      }
      for_each_idx(g, wlo, whi, [&](const Idx& wi) {
        const std::int64_t pos = cell_pos(g.flatten(wi));
        if (pos < 0 || covered[static_cast<size_t>(pos)]) return;
        if (cell_far_dist(cells[static_cast<size_t>(pos)], center, k, diag.q) <= eps_eff)
          ++covers;
      });
      if (covers > best_count) {
        best_count = covers;
        best_center = center;
      }
    });
    if (best_count < 1) throw OracleError("covering_upper: no grid center covers a cell");

    ++count;
    Idx wlo{}, whi{};
    for (int d = 0; d < k; ++d) {
      const auto ci = static_cast<std::int64_t>(std::llround(best_center[static_cast<size_t>(d)] /
                                                             g.delta));
      wlo[static_cast<size_t>(d)] = std::max(-g.m[static_cast<size_t>(d)], ci - reach);
      whi[static_cast<size_t>(d)] = std::min(g.m[static_cast<size_t>(d)], ci + reach);
    }
    for_each_idx(g, wlo, whi, [&](const Idx& wi) {
      const std::int64_t pos = cell_pos(g.flatten(wi));
      if (pos < 0 || covered[static_cast<size_t>(pos)]) return;
      if (cell_far_dist(cells[static_cast<size_t>(pos)], best_center, k, diag.q) <= eps_eff)
        covered[static_cast<size_t>(pos)] = 1;
    });
  }
  return count;
}

std::int64_t packing_lower(const FiniteDiag& diag, double eps, std::uint64_t seed,
                           std::int64_t budget) {
  if (!(eps > 0.0)) throw OracleError("packing_lower: eps must be positive");
  const int k = diag.k();
  std::vector<Vec> kept;

  auto try_point = [&](const Vec& x) {
    if (!member_ball(diag, x)) return;
    for (const Vec& y : kept) {
      Vec d{};
      for (int dd = 0; dd < k; ++dd)
        d[static_cast<size_t>(dd)] = x[static_cast<size_t>(dd)] - y[static_cast<size_t>(dd)];
      if (!(lq_norm(d, k, diag.q) > 2.0 * eps)) return;
    }
    kept.push_back(x);
  };

  // Deterministic preamble: axis extremes (always on the sphere), and for
  // p = inf the sign corners of the box.
  for (int d = 0; d < k; ++d)
    for (double s : {1.0, -1.0}) {
      Vec x{};
      x[static_cast<size_t>(d)] = s * diag.sigma[static_cast<size_t>(d)];
      try_point(x);
    }
  if (diag.p == kInf) {
    for (int mask = 0; mask < (1 << k); ++mask) {
      Vec x{};
      for (int d = 0; d < k; ++d)
        x[static_cast<size_t>(d)] =
            ((mask >> d) & 1 ? 1.0 : -1.0) * diag.sigma[static_cast<size_t>(d)];
      try_point(x);
    }
  }

  // Seed-scrambled Halton stream mapped into the bounding box.
  const std::uint64_t bases[3] = {2, 3, 5};
  Vec offset{};
  for (int d = 0; d < k; ++d)
    offset[static_cast<size_t>(d)] =
        frac(static_cast<double>((seed * 2654435761ULL + static_cast<std::uint64_t>(d) *
                                                             0x9E3779B97F4A7C15ULL) >>
                                 11) *
             0x1p-53);
  for (std::int64_t j = 1; j <= budget; ++j) {
    Vec x{};
    for (int d = 0; d < k; ++d) {
      const double u = frac(radical_inverse(static_cast<std::uint64_t>(j),
                                            bases[static_cast<size_t>(d)]) +
                            offset[static_cast<size_t>(d)]);
      x[static_cast<size_t>(d)] = (2.0 * u - 1.0) * diag.sigma[static_cast<size_t>(d)];
    }
    try_point(x);
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(kept.size()));
}

std::int64_t volume_lower_nd(const FiniteDiag& diag, double eps) {
  if (!(eps > 0.0)) throw OracleError("volume_lower_nd: eps must be positive");
  const int k = diag.k();
  double log_prod = 0.0;
  for (double s : diag.sigma) log_prod += std::log(s);
  const double log_v = log_prod + volume_unit_ball(diag.p, k).log() -
                       static_cast<double>(k) * std::log(eps) -
                       volume_unit_ball(diag.q, k).log();
  const double v = std::exp(log_v);
  const double snapped = std::round(v);
  if (std::fabs(v - snapped) <= 1e-9 * std::max(1.0, std::fabs(v)))
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(snapped));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(v)));
}

CoveringEstimate covering_estimate(const FiniteDiag& diag, double eps, double grid_resolution,
                                   std::uint64_t seed) {
  CoveringEstimate ce;
  ce.epsilon = eps;
  ce.grid_resolution = grid_resolution;
  ce.seed = seed;
  ce.n_upper = covering_upper(diag, eps, grid_resolution);
  const double cq = std::max(1.0, std::exp2((diag.q == kInf ? 0.0 : 1.0 / diag.q) - 1.0));
  ce.n_lower = std::max(volume_lower_nd(diag, eps), packing_lower(diag, cq * eps, seed));
  return ce;
}

EntropyBracket entropy_bracket(const FiniteDiag& diag, std::int64_t n, int probe_budget,
                               double grid_fraction, std::uint64_t seed) {
  if (n < 1) throw OracleError("entropy_bracket: n must be >= 1");
  if (!(grid_fraction > 0.0) || grid_fraction > 0.25)
    throw OracleError("entropy_bracket: grid fraction must be in (0, 1/4]");
  const double cq = std::max(1.0, std::exp2((diag.q == kInf ? 0.0 : 1.0 / diag.q) - 1.0));
  EntropyBracket br;
  br.lo = 0.0;
  br.hi = finite_operator_norm(diag) * (1.0 + 1e-12);
  // The cover quantization floor scales with the grid fraction; asking for
  // less than that only burns probes on unresolvable midpoints.
  const double width_goal = std::max(0.002, 0.75 * grid_fraction) * br.hi;

  static constexpr double kFractions[] = {0.5, 0.75, 0.25, 0.875, 0.125};
  size_t frac_idx = 0;
  while (br.probes < probe_budget && br.hi - br.lo > width_goal) {
    const double x = br.lo + kFractions[frac_idx] * (br.hi - br.lo);
    ++br.probes;
    if (covering_upper(diag, x, x * grid_fraction) <= n) {
      br.hi = x;
      frac_idx = 0;
      continue;
    }
    if (volume_lower_nd(diag, x) > n ||
        packing_lower(diag, cq * x, seed + static_cast<std::uint64_t>(br.probes)) > n) {
      br.lo = x;
      frac_idx = 0;
      continue;
    }
    if (++frac_idx >= std::size(kFractions)) {
      br.resolved = false;  // stuck: neither side certifies anywhere we probed
      break;
    }
  }
  return br;
}

McVolume mc_volume(double p, int k, std::int64_t samples, std::uint64_t seed) {
  if (k < 1 || k > 3) throw OracleError("mc_volume: k must satisfy 1 <= k <= 3");
  if (samples < 10'000) throw OracleError("mc_volume: need at least 10^4 samples");
  if (std::isnan(p) || p <= 0.0) throw OracleError("mc_volume: p must be in (0, inf]");
  std::vector<double> unit(static_cast<size_t>(k), 1.0);
  const FiniteDiag ball(unit, p, p);
  std::mt19937_64 rng(seed);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    Vec x{};
    for (int d = 0; d < k; ++d)
      x[static_cast<size_t>(d)] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
    if (member_ball(ball, x)) ++hits;
  }
  McVolume mc;
  mc.hits = hits;
  mc.samples = samples;
  const double box = std::pow(2.0, k);
  const double phat = static_cast<double>(hits) / static_cast<double>(samples);
  mc.estimate = box * phat;
  mc.std_error = box * std::sqrt(phat * (1.0 - phat) / static_cast<double>(samples));
  return mc;
}

}  // namespace entrobound
