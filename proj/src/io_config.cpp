#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "hessflow/io.hpp"

namespace hessflow::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// "2", "-0.5", "pi", "2pi", "0.5*pi"
std::optional<double> parse_number(std::string_view text) {
  std::string s = lower(trim(text));
  if (s.empty()) return std::nullopt;
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty() || s == "+") return factor;
    if (s == "-") return -factor;
  }
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v * factor;
}

// Recursive-descent reader for the catalog grammar.
class ExprReader {
 public:
  ExprReader(std::string_view text, std::uint64_t seed) : s_(text), seed_(seed) {}

  ExprPtr read_all() {
    auto e = expression();
    skip();
    if (pos_ != s_.size()) fail("unexpected text after expression");
    return e;
  }

 private:
  struct Arg {
    std::optional<double> number;
    std::vector<double> list;
    bool is_list = false;
    ExprPtr expr;
  };

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidConfiguration("expression '" + std::string(s_) + "': " + what + " at column " +
                               std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  double number_token() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')' && s_[pos_] != ']') ++pos_;
    const auto v = parse_number(s_.substr(start, pos_ - start));
    if (!v) {
      pos_ = start;
      fail("expected a number");
    }
    return *v;
  }

  Arg argument() {
    skip();
    Arg a;
    if (eat('[')) {
      a.is_list = true;
      if (eat(']')) return a;
      do a.list.push_back(number_token());
      while (eat(','));
      if (!eat(']')) fail("expected ']'");
      return a;
    }
    const std::size_t save = pos_;
    const std::string id = identifier();
    skip();
    if (!id.empty() && pos_ < s_.size() && s_[pos_] == '(') {
      pos_ = save;
      a.expr = expression();
      return a;
    }
    pos_ = save;
    a.number = number_token();
    return a;
  }

  double num(const std::vector<Arg>& args, std::size_t i, const std::string& fn) {
    if (i >= args.size() || !args[i].number) fail(fn + ": argument " + std::to_string(i + 1) + " must be a number");
    return *args[i].number;
  }

  std::vector<double> list(const std::vector<Arg>& args, std::size_t i, const std::string& fn) {
    if (i >= args.size()) fail(fn + ": missing argument " + std::to_string(i + 1));
    if (args[i].is_list) return args[i].list;
    if (args[i].number) return {*args[i].number};
    fail(fn + ": argument " + std::to_string(i + 1) + " must be a list");
  }

  void arity(const std::vector<Arg>& args, std::size_t lo, std::size_t hi, const std::string& fn) {
    if (args.size() < lo || args.size() > hi)
      fail(fn + " takes " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) +
           " arguments, got " + std::to_string(args.size()));
  }

  ExprPtr expression() {
    skip();
    const std::size_t save = pos_;
    const std::string name = lower(identifier());
    if (name.empty() || !eat('(')) {
      pos_ = save;
      return expr::constant(number_token());
    }
    std::vector<Arg> args;
    if (!eat(')')) {
      do args.push_back(argument());
      while (eat(','));
      if (!eat(')')) fail("expected ')'");
    }
    if (name == "constant") {
      arity(args, 1, 1, name);
      return expr::constant(num(args, 0, name));
    }
    if (name == "affine" || name == "quadratic") {
      arity(args, 2, 2, name);
      const double c = num(args, 0, name);
      return name == "affine" ? expr::affine(c, list(args, 1, name))
                              : expr::quadratic(c, list(args, 1, name));
    }
    if (name == "sin_product" || name == "cos_product") {
      arity(args, 2, 3, name);
      const double amp = num(args, 0, name);
      const auto k = list(args, 1, name);
      const double rate = args.size() > 2 ? num(args, 2, name) : 0.0;
      return name == "sin_product" ? expr::sin_product(amp, k, rate)
                                   : expr::cos_product(amp, k, rate);
    }
    if (name == "gaussian") {
      arity(args, 3, 3, name);
      return expr::gaussian(num(args, 0, name), num(args, 1, name), list(args, 2, name));
    }
    if (name == "time_linear") {
      arity(args, 1, 1, name);
      return expr::time_linear(num(args, 0, name));
    }
    if (name == "random_modes") {
      arity(args, 3, 3, name);
      return random_modes(num(args, 0, name), num(args, 1, name), num(args, 2, name));
    }
    if (name == "sum") {
      std::vector<ExprPtr> terms;
      for (const auto& a : args) {
        if (a.expr) terms.push_back(a.expr);
        else if (a.number) terms.push_back(expr::constant(*a.number));
        else fail("sum: lists are not terms");
      }
      if (terms.empty()) fail("sum needs at least one term");
      return expr::sum(std::move(terms));
    }
    pos_ = save;
    fail("unknown function '" + name + "'");
  }

  // Seeded sum of `count` 2D trig modes with amplitudes in [-amp, amp] and
  // integer wave numbers in 1..kmax.
  ExprPtr random_modes(double count, double amp, double kmax) {
    if (count < 1 || kmax < 1 || amp < 0) fail("random_modes: need count >= 1, kmax >= 1, amp >= 0");
    Rng rng(seed_ + 0x9e3779b97f4a7c15ULL * ++random_calls_);
    std::vector<ExprPtr> modes;
    for (int m = 0; m < static_cast<int>(count); ++m) {
      const double a = rng.uniform(-amp, amp);
      const double kx = 1 + std::floor(rng.uniform(0, kmax));
      const double ky = 1 + std::floor(rng.uniform(0, kmax));
      modes.push_back(rng.uniform() < 0.5 ? expr::sin_product(a, {kx, ky})
                                          : expr::cos_product(a, {kx, ky}));
    }
    return expr::sum(std::move(modes));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::uint64_t seed_;
  std::uint64_t random_calls_ = 0;
};

// Typed access to one section; every read key is marked so leftovers can
// be rejected as unknown.
class Section {
 public:
  Section(const IniDocument& doc, std::string name) : doc_(doc), name_(std::move(name)) {}

  bool present() const { return doc_.has(name_); }
  int line() const {
    auto it = doc_.section_lines.find(name_);
    return it == doc_.section_lines.end() ? 0 : it->second;
  }

  const IniValue* get(const std::string& key) {
    allowed_.insert(key);
    return doc_.find(name_, key);
  }

  const IniValue& require(const std::string& key) {
    const IniValue* v = get(key);
    if (!v) throw ConfigError("[" + name_ + "] missing required key '" + key + "'", line());
    return *v;
  }

  [[noreturn]] void bad(const IniValue& v, const std::string& key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + what, v.line);
  }

  double number(const IniValue& v, const std::string& key) const {
    const auto x = parse_number(v.text);
    if (!x) bad(v, key, "expected a number, got '" + v.text + "'");
    return *x;
  }

  double number(const std::string& key, double fallback) {
    const IniValue* v = get(key);
    return v ? number(*v, key) : fallback;
  }

  double require_number(const std::string& key) { return number(require(key), key); }

  long integer(const IniValue& v, const std::string& key) const {
    const double x = number(v, key);
    if (x != std::floor(x) || std::abs(x) > 9.0e15) bad(v, key, "expected an integer");
    return static_cast<long>(x);
  }

  long integer(const std::string& key, long fallback) {
    const IniValue* v = get(key);
    return v ? integer(*v, key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const IniValue* v = get(key);
    if (!v) return fallback;
    const auto t = lower(v->text);
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    bad(*v, key, "expected true or false");
  }

  std::vector<double> numbers(const IniValue& v, const std::string& key) const {
    std::vector<double> out;
    std::string item;
    std::string text = v.text;
    for (char& c : text)
      if (c == ',' || c == '[' || c == ']') c = ' ';
    std::istringstream is(text);
    while (is >> item) out.push_back(number(IniValue{item, v.line}, key));
    if (out.empty()) bad(v, key, "expected a list of numbers");
    return out;
  }

  ExprPtr expression(const IniValue& v, const std::string& key, std::uint64_t seed) const {
    try {
      return ExprReader(v.text, seed).read_all();
    } catch (const InvalidConfiguration& e) {
      bad(v, key, e.what());
    }
  }

  void reject_unknown() const {
    auto it = doc_.sections.find(name_);
    if (it == doc_.sections.end()) return;
    for (const auto& [key, value] : it->second)
      if (!allowed_.count(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'", value.line);
  }

 private:
  const IniDocument& doc_;
  std::string name_;
  std::set<std::string> allowed_;
};

OperatorSpec read_operator(Section& s) {
  const auto& fam = s.require("family");
  const std::string f = lower(fam.text);
  const int n = static_cast<int>(s.integer(s.require("n"), "n"));
  const int k = static_cast<int>(s.integer(s.require("k"), "k"));
  OperatorSpec spec;
  if (f == "sigma_root") {
    spec = OperatorSpec::sigma_root(k, n);
  } else if (f == "sigma_quotient") {
    spec = OperatorSpec::sigma_quotient(k, static_cast<int>(s.integer(s.require("l"), "l")), n);
  } else if (f == "log_pk") {
    spec = OperatorSpec::log_pk(k, n);
  } else {
    s.bad(fam, "family", "expected sigma_root, sigma_quotient or log_pk");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[operator] ") + e.what(), s.get("k")->line);
  }
  return spec;
}

Sym3 read_chi(Section& s, const IniValue& v, int n) {
  const std::string t = lower(trim(v.text));
  if (auto c = parse_number(t)) return scaled_identity(n, *c);
  auto inner = [&](const std::string& prefix) -> std::optional<std::vector<double>> {
    if (t.rfind(prefix + "(", 0) != 0 || t.back() != ')') return std::nullopt;
    return s.numbers(IniValue{t.substr(prefix.size() + 1, t.size() - prefix.size() - 2), v.line},
                     "chi");
  };
  if (auto d = inner("diag")) {
    if (static_cast<int>(d->size()) != n) s.bad(v, "chi", "diag needs n entries");
    return diagonal(*d);
  }
  if (auto m = inner("sym")) {
    if (static_cast<int>(m->size()) != n * (n + 1) / 2)
      s.bad(v, "chi", "sym needs the n(n+1)/2 upper-triangle entries, row by row");
    Sym3 out;
    out.n = n;
    std::size_t i = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) out.set(a, b, (*m)[i++]);
    return out;
  }
  s.bad(v, "chi", "expected a number, diag(..) or sym(..)");
}

std::vector<int> to_ints(Section& s, const IniValue& v, const std::string& key) {
  std::vector<int> out;
  for (double x : s.numbers(v, key)) {
    if (x != std::floor(x)) s.bad(v, key, "expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

ProblemSpec read_problem(const IniDocument& doc, const OperatorSpec& op, std::uint64_t seed,
                         std::deque<Section>& sections) {
  Section& gs = sections.emplace_back(doc, "grid");
  const auto& topo = gs.require("topology");
  const auto& shape_v = gs.require("shape");
  const auto& length_v = gs.require("length");
  const auto shape = to_ints(gs, shape_v, "shape");
  const auto length = gs.numbers(length_v, "length");
  std::vector<double> origin;
  if (const auto* o = gs.get("origin")) origin = gs.numbers(*o, "origin");
  if (static_cast<int>(shape.size()) != op.n)
    gs.bad(shape_v, "shape", "needs one entry per dimension (n = " + std::to_string(op.n) + ")");
  Grid grid;
  try {
    const std::string t = lower(topo.text);
    if (t == "periodic") grid = Grid::periodic(shape, length, origin);
    else if (t == "box") grid = Grid::box(shape, length, origin);
    else gs.bad(topo, "topology", "expected periodic or box");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[grid] ") + e.what(), shape_v.line);
  }

  Section& ps = sections.emplace_back(doc, "problem");
  if (!ps.present()) throw ConfigError("missing section [problem]", 0);
  ProblemSpec p;
  p.grid = grid;
  p.op = op;
  const auto& chi_v = ps.require("chi");
  const Sym3 chi = read_chi(ps, chi_v, op.n);
  p.chi = SymTensorField::constant(grid, chi);
  if (const auto* f = ps.get("form")) {
    const std::string t = lower(f->text);
    if (t == "additive") p.form = Form::Additive;
    else if (t == "exponential") p.form = Form::Exponential;
    else ps.bad(*f, "form", "expected additive or exponential");
  }
  const auto& psi_v = ps.require("psi");
  {
    const std::string t = trim(psi_v.text);
    const std::string l = lower(t);
    auto wrapped = [&](const std::string& fn) -> std::optional<ExprPtr> {
      if (l.rfind(fn + "(", 0) != 0 || l.back() != ')') return std::nullopt;
      return ps.expression(IniValue{t.substr(fn.size() + 1, t.size() - fn.size() - 2), psi_v.line},
                           "psi", seed);
    };
    if (auto target = wrapped("manufactured_discrete"))
      p.psi = std::make_shared<DiscreteManufactured>(op, p.form, *target, chi);
    else if (auto target2 = wrapped("manufactured"))
      p.psi = std::make_shared<AnalyticManufactured>(op, p.form, *target2, chi);
    else
      p.psi = ps.expression(psi_v, "psi", seed);
  }
  const auto& phib_v = ps.require("phi_b");
  p.phi_b = ps.expression(phib_v, "phi_b", seed)->field(grid, 0.0);
  const IniValue* phis_v = ps.get("phi_s");
  if (grid.topology == Topology::DirichletBox) {
    if (!phis_v) throw ConfigError("[problem] box grids need phi_s", ps.line());
    p.phi_s = ps.expression(*phis_v, "phi_s", seed);
  } else if (phis_v) {
    ps.bad(*phis_v, "phi_s", "only used on box grids");
  }
  p.horizon = ps.require_number("horizon");
  if (!(p.horizon >= 0.0)) ps.bad(*ps.get("horizon"), "horizon", "must be >= 0");

  Section& ss = sections.emplace_back(doc, "step");
  if (!ss.present()) throw ConfigError("missing section [step]", 0);
  if (const auto* k = ss.get("kind")) {
    const std::string t = lower(k->text);
    if (t == "implicit") p.step.kind = StepKind::Implicit;
    else if (t == "explicit") p.step.kind = StepKind::Explicit;
    else ss.bad(*k, "kind", "expected implicit or explicit");
  }
  const auto& dt_v = ss.require("dt");
  p.step.dt = ss.number(dt_v, "dt");
  if (!(p.step.dt > 0.0)) ss.bad(dt_v, "dt", "must be > 0");
  auto& nc = p.step.newton;
  nc.residual_tol = ss.number("residual_tol", nc.residual_tol);
  nc.max_iters = static_cast<int>(ss.integer("max_iters", nc.max_iters));
  nc.damping_floor = ss.number("damping_floor", nc.damping_floor);
  nc.linear_tol = ss.number("linear_tol", nc.linear_tol);
  nc.linear_max_iters = static_cast<int>(ss.integer("linear_max_iters", nc.linear_max_iters));
  nc.admissibility_margin = ss.number("admissibility_margin", nc.admissibility_margin);
  try {
    nc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[step] ") + e.what(), ss.line());
  }

  try {
    p.validate();
  } catch (const InvalidConfiguration& e) {
    throw ConfigError(e.what(), phib_v.line);
  }
  return p;
}

}  // namespace

const IniValue* IniDocument::find(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream is(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header", line);
      current = lower(trim(s.substr(1, s.size() - 2)));
      if (current.empty()) throw ConfigError("empty section name", line);
      if (doc.sections.count(current)) throw ConfigError("duplicate section [" + current + "]", line);
      doc.sections[current];
      doc.section_lines[current] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    if (current.empty()) throw ConfigError("key outside of a section", line);
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
    auto& sec = doc.sections[current];
    if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    sec[key] = IniValue{value, line};
  }
  return doc;
}

ExprPtr parse_expression(const std::string& text, std::uint64_t seed) {
  return ExprReader(text, seed).read_all();
}

RunConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
  RunConfig cfg;
  cfg.document = parse_ini(text);
  const IniDocument& doc = cfg.document;
  static const std::set<std::string> known{"run",   "operator",  "grid",        "problem",
                                           "step",  "monitors",  "steady",      "structure",
                                           "certify", "subsolution", "output",  "report"};
  for (const auto& [name, line] : doc.section_lines)
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]", line);

  std::deque<Section> sections;

  Section& run = sections.emplace_back(doc, "run");
  if (const auto* s = run.get("seed")) {
    const long v = run.integer(*s, "seed");
    if (v < 0) run.bad(*s, "seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  if (seed_override) cfg.seed = *seed_override;

  Section& op = sections.emplace_back(doc, "operator");
  if (op.present()) cfg.op = read_operator(op);

  if (doc.has("grid") || doc.has("problem") || doc.has("step")) {
    if (!cfg.op) throw ConfigError("a problem needs an [operator] section", 0);
    if (!doc.has("grid")) throw ConfigError("missing section [grid]", 0);
    cfg.problem = read_problem(doc, *cfg.op, cfg.seed, sections);
  }

  Section& st = sections.emplace_back(doc, "structure");
  cfg.structure.budget = static_cast<int>(st.integer("budget", cfg.structure.budget));
  cfg.structure.band_lo = st.number("band_lo", cfg.structure.band_lo);
  cfg.structure.band_hi = st.number("band_hi", cfg.structure.band_hi);
  if (cfg.structure.budget < 1 || !(cfg.structure.band_lo < cfg.structure.band_hi))
    throw ConfigError("[structure] needs budget >= 1 and band_lo < band_hi", st.line());

  Section& ce = sections.emplace_back(doc, "certify");
  auto& c = cfg.certify;
  if (const auto* v = ce.get("checks")) {
    const std::string t = lower(v->text);
    if (t == "concavity") c.parabolic = false;
    else if (t == "parabolic") c.concavity = false;
    else if (t != "both") ce.bad(*v, "checks", "expected concavity, parabolic or both");
  }
  if (const auto* v = ce.get("k")) {
    c.K.clear();
    std::istringstream is(v->text);
    std::string point;
    while (std::getline(is, point, '|')) c.K.push_back(ce.numbers(IniValue{point, v->line}, "K"));
    if (cfg.op)
      for (const auto& mu : c.K)
        if (static_cast<int>(mu.size()) != cfg.op->n) ce.bad(*v, "K", "points need n entries");
  } else if (cfg.op) {
    c.K = {std::vector<double>(cfg.op->n, 1.0)};
  }
  c.beta = ce.number("beta", c.beta);
  c.sigma = ce.number("sigma", c.sigma);
  c.slack = ce.number("slack", c.slack);
  c.eps = ce.number("eps", c.eps);
  c.eta = ce.number("eta", c.eta);
  c.budget = static_cast<int>(ce.integer("budget", c.budget));
  if (c.budget < 1 || c.beta < 0 || c.eps < 0 || c.eta <= 0)
    throw ConfigError("[certify] needs budget >= 1, beta >= 0, eps >= 0, eta > 0", ce.line());

  Section& sub = sections.emplace_back(doc, "subsolution");
  if (sub.present()) {
    SubsolutionSettings s;
    const IniValue* safety = sub.get("safety");
    const IniValue* expression = sub.get("expression");
    if ((safety != nullptr) == (expression != nullptr))
      throw ConfigError("[subsolution] needs exactly one of safety or expression", sub.line());
    if (safety) {
      s.safety = sub.number(*safety, "safety");
      if (!(*s.safety >= 0.0)) sub.bad(*safety, "safety", "must be >= 0");
    } else {
      s.expression = sub.expression(*expression, "expression", cfg.seed);
    }
    s.delta = sub.number("delta", 0.0);
    s.times = static_cast<int>(sub.integer("times", s.times));
    if (s.times < 1) throw ConfigError("[subsolution] times must be >= 1", sub.line());
    cfg.subsolution = s;
  }

  Section& mon = sections.emplace_back(doc, "monitors");
  auto& m = cfg.monitors;
  m.every = static_cast<int>(mon.integer("every", 1));
  m.steady_tol = mon.number("steady_tol", 0.0);
  cfg.monitor_safety = mon.number("subsolution_safety", -1.0);
  m.track_w = mon.boolean("track_w", false);
  m.w_a = mon.number("w_a", 0.0);
  m.w_b = mon.number("w_b", 0.0);
  m.w_delta = static_cast<int>(mon.integer("w_delta", 0));
  m.grad_threshold = mon.number("grad_threshold", m.grad_threshold);
  m.blowup_window = static_cast<int>(mon.integer("window", m.blowup_window));
  m.stop_on_blowup = mon.boolean("stop_on_blowup", false);
  if (m.every < 1 || m.blowup_window < 3 || (m.w_delta != 0 && m.w_delta != 1))
    throw ConfigError("[monitors] needs every >= 1, window >= 3, w_delta in {0, 1}", mon.line());
  if (m.track_w && cfg.monitor_safety < 0)
    throw ConfigError("[monitors] track_w needs subsolution_safety", mon.line());
  if (cfg.monitor_safety >= 0 && cfg.problem)
    m.usub = construct_linear_subsolution(*cfg.problem, cfg.monitor_safety);

  Section& sd = sections.emplace_back(doc, "steady");
  cfg.steady.tol = sd.number("tol", cfg.steady.tol);
  cfg.steady.dt_max = sd.number("dt_max", cfg.steady.dt_max);
  cfg.steady.max_steps = static_cast<int>(sd.integer("max_steps", cfg.steady.max_steps));
  if (!(cfg.steady.tol > 0) || !(cfg.steady.dt_max > 0) || cfg.steady.max_steps < 1)
    throw ConfigError("[steady] needs tol > 0, dt_max > 0, max_steps >= 1", sd.line());

  Section& out = sections.emplace_back(doc, "output");
  cfg.output.snapshot_every = static_cast<int>(out.integer("snapshot_every", 0));
  if (cfg.output.snapshot_every < 0) throw ConfigError("[output] snapshot_every must be >= 0", out.line());

  Section& rep = sections.emplace_back(doc, "report");
  if (const auto* v = rep.get("csv")) cfg.report_csv = v->text;

  for (const auto& s : sections) s.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), seed_override);
}

}  // namespace hessflow::io
