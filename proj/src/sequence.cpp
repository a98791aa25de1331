#include "entrobound/sequence.hpp"

#include <cmath>

namespace entrobound {

Sequence::Sequence(SequenceSpec spec) : spec_(std::move(spec)) {
  log_prod_.push_back(0.0);  // index 0: empty product
  log_sum_.push_back(kNegInf);
}

double Sequence::log_sigma(std::int64_t n) const {
  if (n < 1) throw Error("log_sigma: n must be >= 1");
  const double nd = static_cast<double>(n);
  struct Eval {
    std::int64_t n;
    double nd;
    double operator()(const ExplicitSpec& s) const {
      const auto len = static_cast<std::int64_t>(s.values.size());
      if (n <= len) return std::log(s.values[static_cast<size_t>(n - 1)]);
      switch (s.tail.kind) {
        case TailModel::Kind::none:
          throw IndexError("explicit spec: index past prefix with tail=none");
        case TailModel::Kind::zero:
          return kNegInf;
        case TailModel::Kind::geometric_extension:
          return std::log(s.values.back()) + static_cast<double>(n - len) * std::log(s.tail.ratio);
      }
      throw Error("unreachable");
    }
    double operator()(const GeometricSpec& s) const { return std::log(s.c) - nd * std::log(s.b); }
    double operator()(const PolynomialSpec& s) const { return std::log(s.a) - s.alpha * std::log(nd); }
    double operator()(const PolyLogSpec& s) const {
      return std::log(s.a) - s.alpha * std::log(nd) - s.beta * std::log(std::log(nd + 1.0));
    }
    double operator()(const ExpLogSpec& s) const {
      return n == 1 ? 0.0 : -s.a * std::pow(std::log(nd), s.lambda);
    }
    double operator()(const ExpPolySpec& s) const { return -s.a * std::pow(nd, s.lambda); }
    double operator()(const ExpExpSpec& s) const {
      const double e = std::exp(s.lambda * nd);
      const double v = -s.a * e;
      if (!std::isfinite(v))
        throw Error("expexp: log sigma_n exceeds the 64-bit range at n=" + std::to_string(n));
      return v;
    }
  };
  return std::visit(Eval{n, nd}, spec_.variant());
}

std::optional<std::int64_t> Sequence::prefix_limit() const {
  if (const auto* e = spec_.as_explicit()) {
    if (e->tail.kind == TailModel::Kind::geometric_extension) return std::nullopt;
    return static_cast<std::int64_t>(e->values.size());
  }
  return std::nullopt;
}

std::int64_t Sequence::max_finite_index() const {
  constexpr std::int64_t kUnbounded = std::int64_t(1) << 61;
  struct V {
    std::int64_t operator()(const ExplicitSpec&) const { return kUnbounded; }
    std::int64_t operator()(const GeometricSpec&) const { return kUnbounded; }
    std::int64_t operator()(const PolynomialSpec&) const { return kUnbounded; }
    std::int64_t operator()(const PolyLogSpec&) const { return kUnbounded; }
    std::int64_t operator()(const ExpLogSpec&) const { return kUnbounded; }
    std::int64_t operator()(const ExpPolySpec& s) const {
      const double log_n = (709.0 - std::log(s.a)) / s.lambda;
      if (log_n > 42.0) return kUnbounded;
      return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(std::exp(log_n))));
    }
    std::int64_t operator()(const ExpExpSpec& s) const {
      const double n = (709.0 - std::log(s.a)) / s.lambda;
      return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(n)));
    }
  };
  return std::visit(V{}, spec_.variant());
}

double Sequence::log_prefix_product(std::int64_t k) const {
  if (k < 1) throw Error("log_prefix_product: k must be >= 1");
  std::lock_guard<std::mutex> lock(cache_mutex_);
  while (static_cast<std::int64_t>(log_prod_.size()) <= k) {
    const auto n = static_cast<std::int64_t>(log_prod_.size());
    log_prod_.push_back(log_prod_.back() + log_sigma(n));
  }
  return log_prod_[static_cast<size_t>(k)];
}

LogReal Sequence::geometric_mean(std::int64_t k) const {
  return LogReal::from_log(log_prefix_product(k) / static_cast<double>(k));
}

double Sequence::log_prefix_sum(std::int64_t k) const {
  if (k < 1) throw Error("log_prefix_sum: k must be >= 1");
  std::lock_guard<std::mutex> lock(cache_mutex_);
  while (static_cast<std::int64_t>(log_sum_.size()) <= k) {
    const auto n = static_cast<std::int64_t>(log_sum_.size());
    sum_acc_.add(log_sigma(n));
    log_sum_.push_back(sum_acc_.log_total());
  }
  return log_sum_[static_cast<size_t>(k)];
}

LogReal Sequence::partial_sum_inv(std::int64_t n, double s) const {
  if (n < 1) throw Error("partial_sum_inv: n must be >= 1");
  if (!(s > 0.0)) throw Error("partial_sum_inv: s must be positive");
  LogAccumulator acc;
  for (std::int64_t k = 1; k <= n; ++k) acc.add(-s * log_sigma(k));
  return LogReal::from_log(acc.log_total() / s);
}

Summability Sequence::summability(double r) const {
  if (!(r > 0.0)) throw Error("summability: r must be positive");
  struct Check {
    double r;
    Summability operator()(const ExplicitSpec& s) const {
      return s.tail.kind == TailModel::Kind::none ? Summability::unknown_tail : Summability::yes;
    }
    Summability operator()(const GeometricSpec&) const { return Summability::yes; }
    Summability operator()(const PolynomialSpec& s) const {
      return s.alpha * r > 1.0 ? Summability::yes : Summability::no;
    }
    Summability operator()(const PolyLogSpec& s) const {
      const double m = s.alpha * r, c = s.beta * r;
      if (m > 1.0) return Summability::yes;
      if (m == 1.0 && c > 1.0) return Summability::yes;
      return Summability::no;
    }
    Summability operator()(const ExpLogSpec& s) const {
      if (s.lambda > 1.0) return Summability::yes;
      if (s.lambda == 1.0) return s.a * r > 1.0 ? Summability::yes : Summability::no;
      return Summability::no;
    }
    Summability operator()(const ExpPolySpec&) const { return Summability::yes; }
    Summability operator()(const ExpExpSpec&) const { return Summability::yes; }
  };
  return std::visit(Check{r}, spec_.variant());
}

}  // namespace entrobound
