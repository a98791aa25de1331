#pragma once

#include <cmath>
#include <limits>

#include "entrobound/errors.hpp"

namespace entrobound {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b), max-shifted. -inf operands encode exact zeros.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// log(e^a - e^b) for a >= b.
inline double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (!(a >= b)) throw Error("log_sub: negative difference");
  if (a == b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

// Streaming log-sum-exp with rescaling and Kahan compensation. Terms are
// log-values; the running sum is kept linear relative to the largest shift
// seen so far.
class LogAccumulator {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term > shift_) {
      const double scale = std::exp(shift_ - log_term);
      sum_ *= scale;
      comp_ *= scale;
      shift_ = log_term;
    }
    kahan_add(std::exp(log_term - shift_));
    ++count_;
  }

  bool empty() const { return count_ == 0; }
  long long count() const { return count_; }

  double log_total() const {
    if (count_ == 0 || sum_ <= 0.0) return kNegInf;
    return shift_ + std::log(sum_);
  }

 private:
  void kahan_add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }

  double shift_ = kNegInf;
  double sum_ = 0.0;
  double comp_ = 0.0;
  long long count_ = 0;
};

// A nonnegative real carried by its natural logarithm, the universal numeric
// carrier of this library (the sequences here underflow 64-bit floats long
// before any interesting index). log() == -inf encodes an exact zero; +inf
// and NaN are rejected.
class LogReal {
 public:
  LogReal() : log_(kNegInf) {}

  static LogReal from_log(double log_value) {
    if (std::isnan(log_value) || log_value == std::numeric_limits<double>::infinity())
      throw Error("LogReal: log value must be < +inf and not NaN");
    LogReal x;
    x.log_ = log_value;
    return x;
  }

  static LogReal from_value(double value) {
    if (std::isnan(value) || value < 0.0 || std::isinf(value))
      throw Error("LogReal: value must be a finite nonnegative real");
    return from_log(value == 0.0 ? kNegInf : std::log(value));
  }

  static LogReal zero() { return LogReal(); }
  static LogReal one() { return from_log(0.0); }

  double log() const { return log_; }
  double log10() const { return log_ / 2.302585092994045684; }
  double value() const { return std::exp(log_); }
  bool is_zero() const { return log_ == kNegInf; }

  LogReal pow(double e) const {
    if (is_zero()) {
      if (e > 0.0) return zero();
      throw Error("LogReal: zero to a nonpositive power");
    }
    return from_log(log_ * e);
  }

  friend LogReal operator*(LogReal a, LogReal b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from_log(a.log_ + b.log_);
  }
  friend LogReal operator/(LogReal a, LogReal b) {
    if (b.is_zero()) throw Error("LogReal: division by zero");
    if (a.is_zero()) return zero();
    return from_log(a.log_ - b.log_);
  }
  friend LogReal operator+(LogReal a, LogReal b) {
    return from_log(log_add(a.log_, b.log_));
  }

  friend bool operator<(LogReal a, LogReal b) { return a.log_ < b.log_; }
  friend bool operator>(LogReal a, LogReal b) { return a.log_ > b.log_; }
  friend bool operator<=(LogReal a, LogReal b) { return a.log_ <= b.log_; }
  friend bool operator>=(LogReal a, LogReal b) { return a.log_ >= b.log_; }
  friend bool operator==(LogReal a, LogReal b) { return a.log_ == b.log_; }

 private:
  double log_;
};

}  // namespace entrobound
