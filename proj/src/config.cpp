#include "equideg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "equideg/error.hpp"

namespace equideg {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(std::string_view tok, int line) {
  tok = trim(tok);
  std::string_view body = tok;
  double sign = 1;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    sign = body.front() == '-' ? -1 : 1;
    body.remove_prefix(1);
  }
  static const std::map<std::string_view, double> named = {
      {"pi", std::numbers::pi},       {"sqrt2", std::numbers::sqrt2}, {"sqrt3", std::numbers::sqrt3},
      {"sqrt5", std::sqrt(5.0)},      {"sqrt10", std::sqrt(10.0)},
  };
  if (auto it = named.find(body); it != named.end()) return sign * it->second;
  double v = 0;
  if (tok.empty()) throw ParseError("expected a number", line);
  const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  return v;
}

long parse_integer(std::string_view tok, int line) {
  tok = trim(tok);
  long v = 0;
  const char* first = tok.data() + (!tok.empty() && tok.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("invalid integer '" + std::string(tok) + "'", line);
  return v;
}

bool parse_bool(std::string_view tok, int line) {
  tok = trim(tok);
  if (tok == "true") return true;
  if (tok == "false") return false;
  throw ParseError("expected true or false, got '" + std::string(tok) + "'", line);
}

// "(a, b) (c, d) ..." -> list of pairs of raw tokens.
std::vector<std::pair<std::string_view, std::string_view>> parse_pairs(std::string_view s, int line) {
  std::vector<std::pair<std::string_view, std::string_view>> out;
  s = trim(s);
  while (!s.empty()) {
    if (s.front() != '(') throw ParseError("expected '(' in pair list", line);
    const auto close = s.find(')');
    if (close == std::string_view::npos) throw ParseError("unterminated '(' in pair list", line);
    const std::string_view inner = s.substr(1, close - 1);
    const auto comma = inner.find(',');
    if (comma == std::string_view::npos || inner.find(',', comma + 1) != std::string_view::npos)
      throw ParseError("pair must have exactly two entries", line);
    out.emplace_back(trim(inner.substr(0, comma)), trim(inner.substr(comma + 1)));
    s = trim(s.substr(close + 1));
  }
  if (out.empty()) throw ParseError("empty pair list", line);
  return out;
}

Polynomial parse_polynomial(std::string_view s, int line) {
  std::map<int, double> terms;
  for (const auto& [p, c] : parse_pairs(s, line)) {
    const long power = parse_integer(p, line);
    if (power < 0 || power > 64) throw ParseError("polynomial power must be in 0..64", line);
    terms[int(power)] += parse_number(c, line);
  }
  Polynomial poly;
  for (const auto& [p, c] : terms)
    if (c != 0.0) poly.push_back({p, c});
  return poly;
}

struct MatrixLine {
  std::size_t i, j;
  Polynomial poly;
  int line;
};

}  // namespace

ProblemConfig parse_config(std::string_view text) {
  ProblemConfig c;
  c.format_version = 0;
  std::string section;
  std::map<std::string, int> seen;  // section.key -> line
  std::vector<MatrixLine> matrix;
  bool have_n = false, have_lm = false, have_lp = false;
  std::string perturbation_kind = "none";
  double kepler_a = 1;
  KeplerScale kepler_scale = KeplerScale::constant;
  std::vector<std::pair<double, int>> table;
  std::string rule = "builtin";
  std::set<std::string> sections_seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known = {"problem",  "matrix",  "perturbation", "index",
                                                  "interval", "options", "critical"};
      if (!known.count(section)) throw ParseError("unknown section [" + section + "]", line_no);
      if (!sections_seen.insert(section).second) throw ParseError("duplicate section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line_no);
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no);

    const bool repeatable = section == "matrix" || section == "critical" || (section == "index" && key == "at");
    if (!repeatable) {
      const std::string full = section + "." + key;
      if (auto [it, fresh] = seen.emplace(full, line_no); !fresh)
        throw ParseError("duplicate key '" + key + "' (first on line " + std::to_string(it->second) + ")", line_no);
    }

    if (section.empty()) {
      if (key != "format_version") throw ParseError("unknown top-level key '" + key + "'", line_no);
      c.format_version = int(parse_integer(value, line_no));
      if (c.format_version != 1)
        throw ParseError("unsupported format_version " + std::to_string(c.format_version), line_no);
    } else if (section == "problem") {
      if (key == "name") {
        c.problem.name = std::string(value);
      } else if (key == "n") {
        const long n = parse_integer(value, line_no);
        if (n < 1 || n > 64) throw ParseError("n must be in 1..64", line_no);
        c.problem.n = std::size_t(n);
        have_n = true;
      } else if (key == "scaled") {
        c.problem.scaled = parse_bool(value, line_no);
      } else {
        throw ParseError("unknown key '" + key + "' in [problem]", line_no);
      }
    } else if (section == "matrix") {
      std::istringstream is{std::string(key)};
      std::string si, sj, extra;
      if (!(is >> si >> sj) || (is >> extra)) throw ParseError("matrix key must be 'i j'", line_no);
      const long i = parse_integer(si, line_no), j = parse_integer(sj, line_no);
      if (i < 1 || j < 1) throw ParseError("matrix indices are 1-based", line_no);
      matrix.push_back({std::size_t(i - 1), std::size_t(j - 1), parse_polynomial(value, line_no), line_no});
    } else if (section == "perturbation") {
      if (key == "kind") {
        if (value != "none" && value != "kepler")
          throw ParseError("perturbation kind must be none or kepler", line_no);
        perturbation_kind = std::string(value);
      } else if (key == "a") {
        kepler_a = parse_number(value, line_no);
      } else if (key == "scale") {
        if (value == "constant")
          kepler_scale = KeplerScale::constant;
        else if (value == "lambda^2")
          kepler_scale = KeplerScale::lambda_squared;
        else
          throw ParseError("scale must be constant or lambda^2", line_no);
      } else {
        throw ParseError("unknown key '" + key + "' in [perturbation]", line_no);
      }
    } else if (section == "index") {
      if (key == "rule") {
        if (value != "builtin" && value != "unavailable" && value != "table")
          throw ParseError("index rule must be builtin, unavailable or table", line_no);
        rule = std::string(value);
      } else if (key == "at") {
        std::istringstream is{std::string(value)};
        std::string sl, si, extra;
        if (!(is >> sl >> si) || (is >> extra)) throw ParseError("index entry must be 'at = lambda ind'", line_no);
        table.emplace_back(parse_number(sl, line_no), int(parse_integer(si, line_no)));
      } else {
        throw ParseError("unknown key '" + key + "' in [index]", line_no);
      }
    } else if (section == "interval") {
      if (key == "lambda_minus") {
        c.lambda_minus = parse_number(value, line_no);
        have_lm = true;
      } else if (key == "lambda_plus") {
        c.lambda_plus = parse_number(value, line_no);
        have_lp = true;
      } else {
        throw ParseError("unknown key '" + key + "' in [interval]", line_no);
      }
    } else if (section == "options") {
      auto positive = [&](double v) {
        if (!(v > 0)) throw ParseError("'" + key + "' must be positive", line_no);
        return v;
      };
      if (key == "tol") {
        c.analyze.tol = positive(parse_number(value, line_no));
      } else if (key == "grid") {
        c.analyze.grid = int(positive(double(parse_integer(value, line_no))));
      } else if (key == "modes") {
        c.galerkin.modes = int(positive(double(parse_integer(value, line_no))));
      } else if (key == "max_modes") {
        c.galerkin.max_modes = int(positive(double(parse_integer(value, line_no))));
      } else if (key == "newton_tol") {
        c.galerkin.tol = positive(parse_number(value, line_no));
      } else if (key == "tail_tol") {
        c.galerkin.tail_tol = positive(parse_number(value, line_no));
      } else if (key == "max_iter") {
        c.galerkin.max_iter = int(positive(double(parse_integer(value, line_no))));
      } else if (key == "adaptive") {
        c.galerkin.adaptive = parse_bool(value, line_no);
      } else if (key == "jacobian") {
        if (value == "analytic")
          c.galerkin.jacobian = JacobianMethod::analytic;
        else if (value == "finite_difference")
          c.galerkin.jacobian = JacobianMethod::finite_difference;
        else
          throw ParseError("jacobian must be analytic or finite_difference", line_no);
      } else {
        throw ParseError("unknown key '" + key + "' in [options]", line_no);
      }
    } else if (section == "critical") {
      std::vector<RepPart> parts;
      for (const auto& [m, k] : parse_pairs(value, line_no)) {
        const long mult = parse_integer(m, line_no), freq = parse_integer(k, line_no);
        if (mult < 1 || freq < 0) throw ParseError("critical kernel parts need multiplicity >= 1, frequency >= 0", line_no);
        parts.push_back({int(mult), int(freq)});
      }
      for (const auto& cp : c.analyze.critical)
        if (cp.label == key) throw ParseError("duplicate critical point '" + key + "'", line_no);
      c.analyze.critical.push_back({key, RepDecomposition(parts)});
    }
  }

  if (c.format_version == 0) throw ParseError("missing format_version", 0);
  if (!have_n) throw ParseError("missing [problem] n", 0);
  if (!have_lm || !have_lp) throw ParseError("missing [interval] lambda_minus / lambda_plus", 0);
  if (!(c.lambda_minus < c.lambda_plus)) throw ParseError("interval needs lambda_minus < lambda_plus", 0);

  const std::size_t n = c.problem.n;
  c.problem.family = MatrixFamily(n);
  std::map<std::pair<std::size_t, std::size_t>, const MatrixLine*> given;
  for (const MatrixLine& m : matrix) {
    if (m.i >= n || m.j >= n) throw ParseError("matrix index out of range 1.." + std::to_string(n), m.line);
    const auto key = std::minmax(m.i, m.j);
    if (auto it = given.find(key); it != given.end()) {
      const bool mirror = it->second->i != m.i;
      if (!mirror) throw ParseError("duplicate matrix entry", m.line);
      if (it->second->poly != m.poly)
        throw ParseError("matrix is not symmetric: entry disagrees with line " + std::to_string(it->second->line),
                         m.line);
      continue;
    }
    given[key] = &m;
    if (!m.poly.empty()) c.problem.family.set_entry(m.i, m.j, m.poly);
  }

  if (perturbation_kind == "kepler") {
    c.problem.perturbation = KeplerPerturbation{kepler_a, kepler_scale};
  } else {
    if (seen.count("perturbation.a") || seen.count("perturbation.scale"))
      throw ParseError("'a'/'scale' given without kind = kepler", seen.count("perturbation.a") ? seen["perturbation.a"] : seen["perturbation.scale"]);
    c.problem.perturbation = NoPerturbation{};
  }
  if (rule == "table") {
    if (table.empty()) throw ParseError("index rule 'table' needs at least one 'at' entry", seen["index.rule"]);
    c.problem.index_rule = IndexRule::user(table);
  } else {
    if (!table.empty()) throw ParseError("'at' entries need rule = table", seen.count("index.rule") ? seen["index.rule"] : 0);
    c.problem.index_rule = rule == "builtin" ? IndexRule::builtin() : IndexRule::unavailable();
  }
  c.problem.validate();
  return c;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_config(const ProblemConfig& c) {
  const ProblemSpec& p = c.problem;
  std::ostringstream os;
  os << "format_version = " << c.format_version << "\n\n[problem]\n";
  if (!p.name.empty()) os << "name = " << p.name << "\n";
  os << "n = " << p.n << "\nscaled = " << (p.scaled ? "true" : "false") << "\n\n[matrix]\n";
  for (const auto& [ij, poly] : p.family.entries()) {
    if (poly.empty()) continue;
    os << ij.first + 1 << " " << ij.second + 1 << " =";
    for (const auto& t : poly) os << " (" << t.power << ", " << fmt(t.coefficient) << ")";
    os << "\n";
  }
  os << "\n[perturbation]\n";
  if (const auto* k = std::get_if<KeplerPerturbation>(&p.perturbation)) {
    os << "kind = kepler\na = " << fmt(k->a) << "\nscale = "
       << (k->scale == KeplerScale::constant ? "constant" : "lambda^2") << "\n";
  } else if (std::holds_alternative<NoPerturbation>(p.perturbation)) {
    os << "kind = none\n";
  } else {
    throw PreconditionError("user perturbations cannot be written to a config file");
  }
  os << "\n[index]\n";
  switch (p.index_rule.kind) {
    case IndexRule::Kind::builtin: os << "rule = builtin\n"; break;
    case IndexRule::Kind::unavailable: os << "rule = unavailable\n"; break;
    case IndexRule::Kind::user:
      os << "rule = table\n";
      for (const auto& [l, ind] : p.index_rule.user_values) os << "at = " << fmt(l) << " " << ind << "\n";
      break;
  }
  os << "\n[interval]\nlambda_minus = " << fmt(c.lambda_minus) << "\nlambda_plus = " << fmt(c.lambda_plus) << "\n";
  const GalerkinOptions& g = c.galerkin;
  os << "\n[options]\ntol = " << fmt(c.analyze.tol) << "\ngrid = " << c.analyze.grid << "\nmodes = " << g.modes
     << "\nmax_modes = " << g.max_modes << "\nadaptive = " << (g.adaptive ? "true" : "false")
     << "\ntail_tol = " << fmt(g.tail_tol) << "\nnewton_tol = " << fmt(g.tol) << "\nmax_iter = " << g.max_iter
     << "\njacobian = " << (g.jacobian == JacobianMethod::analytic ? "analytic" : "finite_difference") << "\n";
  if (!c.analyze.critical.empty()) {
    os << "\n[critical]\n";
    for (const auto& cp : c.analyze.critical) {
      os << cp.label << " =";
      for (const auto& part : cp.kernel.parts()) os << " (" << part.multiplicity << ", " << part.frequency << ")";
      os << "\n";
    }
  }
  return os.str();
}

bool same_config(const ProblemConfig& a, const ProblemConfig& b) {
  const ProblemSpec &p = a.problem, &q = b.problem;
  if (a.format_version != b.format_version || p.name != q.name || p.n != q.n || p.scaled != q.scaled ||
      !(p.family == q.family))
    return false;
  if (p.perturbation.index() != q.perturbation.index()) return false;
  if (const auto* k = std::get_if<KeplerPerturbation>(&p.perturbation))
    if (!(*k == std::get<KeplerPerturbation>(q.perturbation))) return false;
  if (std::holds_alternative<UserPerturbation>(p.perturbation)) return false;
  if (p.index_rule.kind != q.index_rule.kind || p.index_rule.user_values != q.index_rule.user_values) return false;
  if (a.lambda_minus != b.lambda_minus || a.lambda_plus != b.lambda_plus) return false;
  if (a.analyze.tol != b.analyze.tol || a.analyze.grid != b.analyze.grid || a.analyze.critical != b.analyze.critical)
    return false;
  const GalerkinOptions &g = a.galerkin, &h = b.galerkin;
  return g.modes == h.modes && g.max_modes == h.max_modes && g.adaptive == h.adaptive && g.tail_tol == h.tail_tol &&
         g.tol == h.tol && g.max_iter == h.max_iter && g.jacobian == h.jacobian;
}

}  // namespace equideg
