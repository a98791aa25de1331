#include "entrobound/sequence_spec.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace entrobound {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw SpecParseError(msg);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void validate(const SpecVariant& v) {
  struct Checker {
    void operator()(const ExplicitSpec& s) const {
      require(!s.values.empty(), "explicit spec: no values");
      double prev = std::numeric_limits<double>::infinity();
      for (double x : s.values) {
        require(finite_positive(x), "explicit spec: values must be positive finite");
        require(x <= prev, "explicit spec: values must be nonincreasing");
        prev = x;
      }
      if (s.tail.kind == TailModel::Kind::geometric_extension)
        require(s.tail.ratio > 0.0 && s.tail.ratio < 1.0,
                "explicit spec: geometric tail ratio must be strictly inside (0,1)");
    }
    void operator()(const GeometricSpec& s) const {
      require(finite_positive(s.c), "geom: c must be positive");
      require(std::isfinite(s.b) && s.b > 1.0, "geom: b must be > 1");
    }
    void operator()(const PolynomialSpec& s) const {
      require(finite_positive(s.a), "poly: a must be positive");
      require(finite_positive(s.alpha), "poly: alpha must be positive");
    }
    void operator()(const PolyLogSpec& s) const {
      require(finite_positive(s.a), "polylog: a must be positive");
      require(std::isfinite(s.alpha) && s.alpha >= 0.0, "polylog: alpha must be >= 0");
      require(std::isfinite(s.beta), "polylog: beta must be finite");
      // Monotonicity: d/dx [alpha log x + beta log log(x+1)] >= 0 on [1,inf)
      // needs alpha >= -beta * x/((x+1) log(x+1)); the sup of the right side
      // is at x=1, namely -beta / (2 log 2).
      if (s.beta < 0.0)
        require(s.alpha >= -s.beta / (2.0 * std::log(2.0)),
                "polylog: increasing log factor breaks monotonicity (need alpha >= -beta/(2 ln 2))");
      if (s.alpha == 0.0)
        require(s.beta >= 0.0, "polylog: alpha=0 requires beta >= 0");
    }
    void operator()(const ExpLogSpec& s) const {
      require(finite_positive(s.a), "explog: a must be positive");
      require(finite_positive(s.lambda), "explog: lambda must be positive");
    }
    void operator()(const ExpPolySpec& s) const {
      require(finite_positive(s.a), "exppoly: a must be positive");
      require(finite_positive(s.lambda), "exppoly: lambda must be positive");
    }
    void operator()(const ExpExpSpec& s) const {
      require(finite_positive(s.a), "expexp: a must be positive");
      require(finite_positive(s.lambda), "expexp: lambda must be positive");
    }
  };
  std::visit(Checker{}, v);
}

double parse_number(std::string_view text, const std::string& what) {
  double out = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  require(ec == std::errc() && ptr == last, "cannot parse number for " + what + ": '" + std::string(text) + "'");
  return out;
}

// Parses "a=1,alpha=2" against an ordered key list.
std::vector<double> parse_kv(std::string_view body, const std::vector<std::string>& keys) {
  std::vector<double> out;
  size_t pos = 0;
  for (size_t i = 0; i < keys.size(); ++i) {
    require(pos <= body.size(), "missing parameter '" + keys[i] + "'");
    size_t end = body.find(',', pos);
    if (end == std::string_view::npos) end = body.size();
    std::string_view item = body.substr(pos, end - pos);
    const std::string prefix = keys[i] + "=";
    require(item.size() > prefix.size() && item.substr(0, prefix.size()) == prefix,
            "expected '" + keys[i] + "=<f>', got '" + std::string(item) + "'");
    out.push_back(parse_number(item.substr(prefix.size()), keys[i]));
    pos = end + 1;
    if (i + 1 == keys.size())
      require(end == body.size(), "trailing text after parameters: '" + std::string(body) + "'");
  }
  return out;
}

SequenceSpec parse_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open sequence file: " + path);
  ExplicitSpec spec;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    if (first && line.rfind("#tail ", 0) == 0) {
      std::string rest = line.substr(6);
      const std::string kw = "geometric ";
      require(rest.rfind(kw, 0) == 0, "unknown tail directive: " + line);
      spec.tail.kind = TailModel::Kind::geometric_extension;
      spec.tail.ratio = parse_number(std::string_view(rest).substr(kw.size()), "tail ratio");
      first = false;
      continue;
    }
    first = false;
    require(line[0] != '#', "unexpected comment line: " + line);
    spec.values.push_back(parse_number(line, "sequence value"));
  }
  return SequenceSpec(SpecVariant(std::move(spec)));
}

}  // namespace

SequenceSpec::SequenceSpec(SpecVariant v) : v_(std::move(v)) { validate(v_); }

Family SequenceSpec::family() const {
  return static_cast<Family>(v_.index());
}

SequenceSpec SequenceSpec::parse(std::string_view text) {
  const size_t colon = text.find(':');
  require(colon != std::string_view::npos, "sequence spec needs '<kind>:...': '" + std::string(text) + "'");
  const std::string_view kind = text.substr(0, colon);
  const std::string_view body = text.substr(colon + 1);
  if (kind == "geom") {
    auto p = parse_kv(body, {"c", "b"});
    return SequenceSpec(GeometricSpec{p[0], p[1]});
  }
  if (kind == "poly") {
    auto p = parse_kv(body, {"a", "alpha"});
    return SequenceSpec(PolynomialSpec{p[0], p[1]});
  }
  if (kind == "polylog") {
    auto p = parse_kv(body, {"a", "alpha", "beta"});
    return SequenceSpec(PolyLogSpec{p[0], p[1], p[2]});
  }
  if (kind == "explog") {
    auto p = parse_kv(body, {"a", "lambda"});
    return SequenceSpec(ExpLogSpec{p[0], p[1]});
  }
  if (kind == "exppoly") {
    auto p = parse_kv(body, {"a", "lambda"});
    return SequenceSpec(ExpPolySpec{p[0], p[1]});
  }
  if (kind == "expexp") {
    auto p = parse_kv(body, {"a", "lambda"});
    return SequenceSpec(ExpExpSpec{p[0], p[1]});
  }
  if (kind == "file") return parse_file(std::string(body));
  throw SpecParseError("unknown sequence kind: '" + std::string(kind) + "'");
}

std::string SequenceSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  struct Printer {
    std::ostringstream& os;
    void operator()(const ExplicitSpec& s) {
      os << "explicit[" << s.values.size() << "]";
      switch (s.tail.kind) {
        case TailModel::Kind::none: os << ",tail=none"; break;
        case TailModel::Kind::zero: os << ",tail=zero"; break;
        case TailModel::Kind::geometric_extension: os << ",tail=geometric(" << s.tail.ratio << ")"; break;
      }
    }
    void operator()(const GeometricSpec& s) { os << "geom:c=" << s.c << ",b=" << s.b; }
    void operator()(const PolynomialSpec& s) { os << "poly:a=" << s.a << ",alpha=" << s.alpha; }
    void operator()(const PolyLogSpec& s) {
      os << "polylog:a=" << s.a << ",alpha=" << s.alpha << ",beta=" << s.beta;
    }
    void operator()(const ExpLogSpec& s) { os << "explog:a=" << s.a << ",lambda=" << s.lambda; }
    void operator()(const ExpPolySpec& s) { os << "exppoly:a=" << s.a << ",lambda=" << s.lambda; }
    void operator()(const ExpExpSpec& s) { os << "expexp:a=" << s.a << ",lambda=" << s.lambda; }
  };
  Printer pr{os};
  std::visit(pr, v_);
  return os.str();
}

}  // namespace entrobound
