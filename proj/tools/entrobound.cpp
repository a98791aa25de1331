#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "entrobound/bounds.hpp"
#include "entrobound/conditions.hpp"
#include "entrobound/errors.hpp"
#include "entrobound/oracle.hpp"
#include "entrobound/sequence.hpp"
#include "entrobound/verify.hpp"

namespace eb = entrobound;

namespace {

// ---- deterministic value rendering: fixed field order, %.17g floats ----

struct Val {
  enum class Kind { number, integer, text, boolean, null };
  Kind kind = Kind::null;
  double num = 0.0;
  long long inum = 0;
  std::string text;
  bool flag = false;

  static Val n(double x) { return {Kind::number, x, 0, {}, false}; }
  static Val i(long long x) { return {Kind::integer, 0, x, {}, false}; }
  static Val s(std::string x) { return {Kind::text, 0, 0, std::move(x), false}; }
  static Val b(bool x) { return {Kind::boolean, 0, 0, {}, x}; }
  static Val none() { return {}; }
};

using Row = std::vector<std::pair<std::string, Val>>;

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string to_json(const Val& v) {
  switch (v.kind) {
    case Val::Kind::number: return fmt17(v.num);
    case Val::Kind::integer: return std::to_string(v.inum);
    case Val::Kind::text: return "\"" + json_escape(v.text) + "\"";
    case Val::Kind::boolean: return v.flag ? "true" : "false";
    case Val::Kind::null: return "null";
  }
  return "null";
}

std::string to_csv(const Val& v) {
  std::string raw;
  switch (v.kind) {
    case Val::Kind::number: raw = fmt17(v.num); break;
    case Val::Kind::integer: raw = std::to_string(v.inum); break;
    case Val::Kind::text: raw = v.text; break;
    case Val::Kind::boolean: raw = v.flag ? "true" : "false"; break;
    case Val::Kind::null: raw = ""; break;
  }
  if (raw.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : raw) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += "\"";
    return quoted;
  }
  return raw;
}

std::string render_object(const Row& row) {
  std::string out = "{";
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) out += ",";
    out += "\"" + json_escape(row[i].first) + "\":" + to_json(row[i].second);
  }
  out += "}";
  return out;
}

void emit_document(const std::string& command, const Row& config, const std::vector<Row>& rows,
                   const Row& extra_top, bool csv) {
  if (csv) {
    if (!rows.empty()) {
      std::string header;
      for (size_t i = 0; i < rows[0].size(); ++i) {
        if (i) header += ",";
        header += rows[0][i].first;
      }
      std::cout << header << "\n";
      for (const auto& row : rows) {
        std::string line;
        for (size_t i = 0; i < row.size(); ++i) {
          if (i) line += ",";
          line += to_csv(row[i].second);
        }
        std::cout << line << "\n";
      }
    }
    return;
  }
  std::string out = "{\"schema_version\":1,\"command\":\"" + json_escape(command) + "\"";
  out += ",\"config\":" + render_object(config);
  for (const auto& [k, v] : extra_top) out += ",\"" + json_escape(k) + "\":" + to_json(v);
  out += ",\"rows\":[";
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ",";
    out += render_object(rows[i]);
  }
  out += "]}";
  std::cout << out << "\n";
}

// ---- shared option parsing ----

double parse_exponent(const std::string& text) {
  if (text == "inf") return eb::kInf;
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(out > 0.0))
    throw eb::SpecParseError("cannot parse exponent: '" + text + "'");
  return out;
}

std::vector<std::int64_t> parse_n_grid(const std::string& text) {
  std::vector<std::int64_t> out;
  auto parse_int = [](std::string_view s) -> std::int64_t {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
      throw eb::SpecParseError("cannot parse grid entry: '" + std::string(s) + "'");
    return v;
  };
  const size_t dots = text.find("..");
  if (dots != std::string::npos) {
    // dyadic range 2^a..2^b
    auto parse_pow = [&](std::string_view s) -> int {
      if (s.rfind("2^", 0) != 0)
        throw eb::SpecParseError("dyadic range entries must look like 2^j: '" + std::string(s) +
                                 "'");
      return static_cast<int>(parse_int(s.substr(2)));
    };
    const int a = parse_pow(std::string_view(text).substr(0, dots));
    const int b = parse_pow(std::string_view(text).substr(dots + 2));
    if (a > b || b > 62) throw eb::SpecParseError("bad dyadic range: '" + text + "'");
    for (int j = a; j <= b; ++j) out.push_back(std::int64_t(1) << j);
    return out;
  }
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    out.push_back(parse_int(std::string_view(text).substr(pos, end - pos)));
    pos = end + 1;
    if (end == text.size()) break;
  }
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw eb::SpecParseError("n grid must be strictly increasing");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    out.push_back(text.substr(pos, end - pos));
    pos = end + 1;
    if (end == text.size()) break;
  }
  return out;
}

int env_threads() {
  const char* env = std::getenv("ENTROBOUND_THREADS");
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  const int fallback = std::min(4, hw);
  if (env == nullptr || *env == '\0') return fallback;
  int v = 0;
  const std::string s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
    std::cerr << "entrobound: ignoring invalid ENTROBOUND_THREADS='" << s << "'\n";
    return fallback;
  }
  return std::min(v, 256);
}

Val log10_val(const eb::LogReal& v) { return Val::n(v.log10()); }

Val linear_val(const eb::LogReal& v) {
  const double l10 = v.log10();
  if (v.is_zero()) return Val::n(0.0);
  if (std::fabs(l10) > 307.0) return Val::none();
  return Val::n(v.value());
}

std::string exponent_text(double x) { return x == eb::kInf ? "inf" : fmt17(x); }

// ---- commands ----

struct CommonArgs {
  std::string sigma;
  std::string p_text = "2";
  std::string q_text = "2";
  std::string output = "json";
  double rtol = eb::kDefaultRtol;
  std::int64_t window = 512;
  std::uint64_t seed = 1;
};

int cmd_bound(const CommonArgs& args, const std::string& n_text, const std::string& forms_text) {
  const double p = parse_exponent(args.p_text);
  const double q = parse_exponent(args.q_text);
  const eb::ExponentPair pair(p, q);
  if (pair.equal()) throw eb::BranchError("bound requires p != q");
  const auto n_grid = parse_n_grid(n_text);
  std::vector<eb::BoundForm> forms;
  for (const auto& f : split_list(forms_text)) forms.push_back(eb::resolve_form(f, pair));
  eb::Sequence seq(eb::SequenceSpec::parse(args.sigma));

  const auto rows_raw =
      eb::bound_curve(seq, pair, n_grid, forms, args.rtol, env_threads());
  std::vector<Row> rows;
  rows.reserve(rows_raw.size());
  for (size_t i = 0; i < n_grid.size(); ++i) {
    for (size_t j = 0; j < forms.size(); ++j) {
      const auto& r = rows_raw[i * forms.size() + j];
      rows.push_back(Row{
          {"n", Val::i(n_grid[i])},
          {"form", Val::s(std::string(eb::form_name(r.form)))},
          {"value_log10", log10_val(r.value)},
          {"value", linear_val(r.value)},
          {"argmax_k", Val::i(r.argmax_k)},
          {"k_lo", Val::i(r.k_scanned.lo)},
          {"k_hi", Val::i(r.k_scanned.hi)},
          {"certificate", Val::s(std::string(eb::certificate_name(r.certificate)))},
      });
    }
  }
  Row config{
      {"sigma", Val::s(args.sigma)},
      {"p", Val::s(exponent_text(p))},
      {"q", Val::s(exponent_text(q))},
      {"n_grid", Val::s(n_text)},
      {"forms", Val::s(forms_text)},
      {"rtol", Val::n(args.rtol)},
  };
  emit_document("bound", config, rows, {}, args.output == "csv");
  return 0;
}

Row report_row(const eb::ConditionReport& rep) {
  return Row{
      {"condition", Val::s(std::string(eb::condition_name(rep.condition)))},
      {"label", Val::s(rep.label)},
      {"verdict", Val::s(std::string(eb::verdict_name(rep.verdict)))},
      {"window", Val::i(rep.window)},
      {"witness_log_ratio", Val::n(rep.witness.log_ratio)},
      {"witness_n", Val::i(rep.witness.n)},
      {"witness_k", Val::i(rep.witness.k)},
      {"analytic", Val::b(rep.analytic)},
      {"window_verdict", Val::s(std::string(eb::verdict_name(rep.window_verdict)))},
      {"note", Val::s(rep.note)},
  };
}

int cmd_classify(const CommonArgs& args) {
  const eb::ExponentPair pair(parse_exponent(args.p_text), parse_exponent(args.q_text));
  if (pair.equal()) throw eb::BranchError("classify requires p != q");
  eb::Sequence seq(eb::SequenceSpec::parse(args.sigma));
  const auto reports = eb::classify(seq, pair, args.window, args.rtol);
  std::vector<Row> rows;
  for (const auto& rep : reports) rows.push_back(report_row(rep));
  Row config{
      {"sigma", Val::s(args.sigma)},
      {"p", Val::s(exponent_text(pair.p()))},
      {"q", Val::s(exponent_text(pair.q()))},
      {"window", Val::i(args.window)},
      {"rtol", Val::n(args.rtol)},
  };
  emit_document("classify", config, rows, {}, args.output == "csv");
  return 0;
}

int cmd_tail(const CommonArgs& args, const std::string& r_text, const std::string& k_text) {
  const double r = parse_exponent(r_text);
  eb::Sequence seq(eb::SequenceSpec::parse(args.sigma));
  const auto ks = parse_n_grid(k_text);
  std::vector<Row> rows;
  for (std::int64_t k : ks) {
    const eb::TailEstimate t = seq.tail(k, r, args.rtol);
    rows.push_back(Row{
        {"k", Val::i(k)},
        {"tau_log10", log10_val(t.value)},
        {"tau", linear_val(t.value)},
        {"lower_log10", log10_val(t.lower)},
        {"upper_log10", log10_val(t.upper)},
        {"exact", Val::b(t.exact)},
        {"window_end", Val::i(t.window_end)},
    });
  }
  Row config{
      {"sigma", Val::s(args.sigma)},
      {"r", Val::s(fmt17(r))},
      {"k_grid", Val::s(k_text)},
      {"rtol", Val::n(args.rtol)},
  };
  emit_document("tail", config, rows, {}, args.output == "csv");
  return 0;
}

int cmd_oracle(const CommonArgs& args, int k, const std::string& n_text,
               const std::string& eps_text, double grid_res, double grid_fraction) {
  eb::Sequence seq(eb::SequenceSpec::parse(args.sigma));
  std::vector<double> sigma;
  for (int i = 1; i <= k; ++i) sigma.push_back(seq.sigma(i).value());
  const eb::FiniteDiag diag(sigma, parse_exponent(args.p_text), parse_exponent(args.q_text));

  std::vector<Row> rows;
  std::string mode;
  if (!eps_text.empty()) {
    mode = "covering";
    for (const auto& e : split_list(eps_text)) {
      const double eps = parse_exponent(e);
      const double res = grid_res > 0.0 ? grid_res : eps / 8.0;
      const eb::CoveringEstimate ce = eb::covering_estimate(diag, eps, res, args.seed);
      rows.push_back(Row{
          {"epsilon", Val::n(ce.epsilon)},
          {"n_upper", Val::i(ce.n_upper)},
          {"n_lower", Val::i(ce.n_lower)},
          {"grid_resolution", Val::n(ce.grid_resolution)},
          {"seed", Val::i(static_cast<long long>(ce.seed))},
      });
    }
  } else {
    mode = "bracket";
    for (std::int64_t n : parse_n_grid(n_text)) {
      const eb::EntropyBracket br = eb::entropy_bracket(diag, n, 64, grid_fraction, args.seed);
      rows.push_back(Row{
          {"n", Val::i(n)},
          {"lo", Val::n(br.lo)},
          {"hi", Val::n(br.hi)},
          {"resolved", Val::b(br.resolved)},
          {"probes", Val::i(br.probes)},
      });
    }
  }
  Row config{
      {"sigma", Val::s(args.sigma)},
      {"p", Val::s(exponent_text(diag.p))},
      {"q", Val::s(exponent_text(diag.q))},
      {"k", Val::i(k)},
      {"mode", Val::s(mode)},
      {"seed", Val::i(static_cast<long long>(args.seed))},
  };
  emit_document("oracle", config, rows, {}, args.output == "csv");
  return 0;
}

int cmd_verify(const CommonArgs& args, bool quick) {
  const eb::SuiteConfig cfg = quick ? eb::SuiteConfig::quick() : eb::SuiteConfig::acceptance();
  const auto outcomes = eb::run_verification(cfg);
  bool all_pass = true;
  std::vector<Row> rows;
  for (const auto& c : outcomes) {
    all_pass = all_pass && c.pass;
    rows.push_back(Row{
        {"check", Val::s(c.name)},
        {"pass", Val::b(c.pass)},
        {"margin", Val::n(c.margin)},
        {"seconds", Val::n(c.seconds)},
        {"detail", Val::s(c.detail)},
    });
  }
  Row config{{"quick", Val::b(quick)}};
  emit_document("verify", config, rows, {{"all_pass", Val::b(all_pass)}},
                args.output == "csv");
  return all_pass ? 0 : 5;
}

int cmd_table1(const CommonArgs& args) {
  const eb::Table1Result t = eb::run_table1(args.window, args.rtol);
  std::vector<Row> rows;
  for (const auto& row : t.rows) {
    rows.push_back(Row{
        {"family", Val::s(row.family)},
        {"lambda", Val::n(row.lambda)},
        {"amp", Val::s(std::string(eb::verdict_name(row.amp.computed)))},
        {"amp_expected", Val::s(std::string(eb::verdict_name(row.amp.expected)))},
        {"alp", Val::s(std::string(eb::verdict_name(row.alp.computed)))},
        {"alp_expected", Val::s(std::string(eb::verdict_name(row.alp.expected)))},
        {"exp", Val::s(std::string(eb::verdict_name(row.exp.computed)))},
        {"exp_expected", Val::s(std::string(eb::verdict_name(row.exp.expected)))},
        {"checked", Val::b(row.amp.checked)},
        {"note", Val::s(row.note)},
    });
  }
  Row config{{"window", Val::i(args.window)}, {"rtol", Val::n(args.rtol)}};
  emit_document("table1", config, rows, {{"all_match", Val::b(t.all_match)}},
                args.output == "csv");
  return t.all_match ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entrobound: rigorous entropy-number bounds for diagonal operators l_p -> l_q"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string n_text = "1";
  std::string forms_text = "ub,lb";
  std::string r_text = "1";
  std::string k_text = "1";
  std::string eps_text;
  int oracle_k = 1;
  double grid_res = 0.0;
  double grid_fraction = 0.03125;
  bool quick = false;

  auto add_common = [&](CLI::App* cmd, bool needs_sigma) {
    if (needs_sigma)
      cmd->add_option("--sigma", args.sigma, "sequence spec (geom:c=..,b=.. | poly:... | file:...)")
          ->required();
    cmd->add_option("--output", args.output, "output format: json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--rtol", args.rtol, "relative tolerance for certified tails");
  };

  std::function<int()> run;

  auto* bound = app.add_subcommand("bound", "evaluate entropy-number bound forms over an n grid");
  add_common(bound, true);
  bound->add_option("--p", args.p_text, "source exponent p (or 'inf')")->required();
  bound->add_option("--q", args.q_text, "target exponent q (or 'inf')")->required();
  bound->add_option("--n", n_text, "n grid: comma list or dyadic range 2^a..2^b")->required();
  bound->add_option("--forms", forms_text, "comma list: ub,lb,opt-exp,opt-alp,opt-amp,ub-const");
  bound->callback([&] { run = [&] { return cmd_bound(args, n_text, forms_text); }; });

  auto* classify = app.add_subcommand("classify", "run the regularity-condition battery");
  add_common(classify, true);
  classify->add_option("--p", args.p_text)->required();
  classify->add_option("--q", args.q_text)->required();
  classify->add_option("--window", args.window, "finite decision window N");
  classify->callback([&] { run = [&] { return cmd_classify(args); }; });

  auto* tail = app.add_subcommand("tail", "certified tail sequence tau_k");
  add_common(tail, true);
  tail->add_option("--r", r_text, "tail exponent r")->required();
  tail->add_option("--k", k_text, "k grid: comma list or dyadic range")->required();
  tail->callback([&] { run = [&] { return cmd_tail(args, r_text, k_text); }; });

  auto* oracle = app.add_subcommand("oracle", "brute-force covering/packing oracle (k <= 3)");
  add_common(oracle, true);
  oracle->add_option("--p", args.p_text)->required();
  oracle->add_option("--q", args.q_text)->required();
  oracle->add_option("--k", oracle_k, "dimension (1..3)")->required();
  oracle->add_option("--n", n_text, "entropy bracket at these n");
  oracle->add_option("--eps", eps_text, "covering estimates at these radii");
  oracle->add_option("--grid-res", grid_res, "grid resolution (default eps/8)");
  oracle->add_option("--grid-fraction", grid_fraction,
                     "bracket-mode resolution as a fraction of eps (default 1/32)");
  oracle->add_option("--seed", args.seed, "seed for the packing candidate stream");
  oracle->callback([&] {
    run = [&] { return cmd_oracle(args, oracle_k, n_text, eps_text, grid_res, grid_fraction); };
  });

  auto* verify = app.add_subcommand("verify", "run the full invariant suite");
  add_common(verify, false);
  verify->add_flag("--quick", quick, "reduced grids");
  verify->callback([&] { run = [&] { return cmd_verify(args, quick); }; });

  auto* table1 = app.add_subcommand("table1", "three-family condition matrix vs published entries");
  add_common(table1, false);
  table1->add_option("--window", args.window);
  table1->callback([&] { run = [&] { return cmd_table1(args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run();
  } catch (const eb::SpecParseError& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 2;
  } catch (const eb::OracleError& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 2;
  } catch (const eb::DivergenceError& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 3;
  } catch (const eb::UnusableTailError& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 3;
  } catch (const eb::BranchError& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "entrobound: " << e.what() << "\n";
    return 1;
  }
}
