#include "recbf/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "recbf/calculus.hpp"
#include "recbf/error.hpp"

namespace recbf {

namespace {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

// Reads one JSON object and rejects keys nobody asked for.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  Obj(const Obj&) = delete;
  Obj& operator=(const Obj&) = delete;
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(path_, "unknown key '" + k + "'");
    }
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const Json& at(const std::string& k) {
    seen_.insert(k);
    if (!j_.contains(k)) fail(path_, "missing key '" + k + "'");
    return j_.at(k);
  }
  std::string sub(const std::string& k) const { return path_ + "." + k; }

  double number(const std::string& k, double def) { return has(k) ? as_number(at(k), sub(k)) : def; }
  double number(const std::string& k) { return as_number(at(k), sub(k)); }
  std::string string(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    const Json& v = at(k);
    if (!v.is_string()) fail(sub(k), "expected a string");
    return v.get<std::string>();
  }
  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const Json& v = at(k);
    if (!v.is_boolean()) fail(sub(k), "expected true or false");
    return v.get<bool>();
  }
  long long integer(const std::string& k, long long def) {
    if (!has(k)) return def;
    return as_integer(at(k), sub(k));
  }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }
  static long long as_integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::vector<double> vec(const Json& j, const std::string& path) {
  std::vector<double> out;
  const Json& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(Obj::as_number(a[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::size_t count(long long v, const std::string& path, long long min) {
  if (v < min) fail(path, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

Box parse_box(const Json& j, const std::string& path) {
  Box box;
  const Json& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const std::vector<double> iv = vec(a[i], p);
    if (iv.size() != 2 || !(iv[1] >= iv[0])) fail(p, "expected [lo, hi] with lo <= hi");
    box.push_back({iv[0], iv[1]});
  }
  return box;
}

Polynomial parse_polynomial(const Json& j, const std::string& path) {
  Polynomial p;
  const Json& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string tp = path + "[" + std::to_string(i) + "]";
    Obj o(a[i], tp);
    Polynomial::Term t;
    t.coeff = o.number("coeff");
    const Json& powers = array(o.at("powers"), o.sub("powers"));
    for (std::size_t k = 0; k < powers.size(); ++k) {
      const long long e = Obj::as_integer(powers[k], o.sub("powers") + "[" + std::to_string(k) + "]");
      if (e < 0) fail(o.sub("powers"), "exponents must be >= 0");
      t.powers.push_back(static_cast<int>(e));
    }
    p.terms.push_back(std::move(t));
  }
  return p;
}

ClassKSpec parse_classk(const Json& j, const std::string& path) {
  Obj o(j, path);
  ClassKSpec s;
  s.kind = o.string("kind", "linear");
  if (s.kind != "linear" && s.kind != "signed_square") {
    fail(o.sub("kind"), "expected \"linear\" or \"signed_square\"");
  }
  s.coeff = o.number("coeff", 1.0);
  s.epsilon = o.number("epsilon", 0.0);
  return s;
}

std::vector<ClassKSpec> parse_classk_list(const Json& j, const std::string& path) {
  std::vector<ClassKSpec> out;
  const Json& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(parse_classk(a[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

BarrierConfig parse_barrier(const Json& j, const std::string& path) {
  Obj o(j, path);
  BarrierConfig b;
  if (o.has("kind")) {
    b.kind = o.string("kind", "");
    if (!parse_barrier_kind(*b.kind)) fail(o.sub("kind"), "unknown barrier kind '" + *b.kind + "'");
  }
  if (o.has("order")) b.order = static_cast<int>(o.integer("order", 2));
  if (o.has("alphas")) b.alphas = parse_classk_list(o.at("alphas"), o.sub("alphas"));
  if (o.has("gammas")) b.gammas = parse_classk_list(o.at("gammas"), o.sub("gammas"));
  if (o.has("virtual_controller")) {
    Obj v(o.at("virtual_controller"), o.sub("virtual_controller"));
    VirtualControllerConfig vc;
    vc.kind = v.string("kind", "linear");
    if (vc.kind != "linear" && vc.kind != "regularized") {
      fail(v.sub("kind"), "expected \"linear\" or \"regularized\"");
    }
    vc.gain = v.number("gain", vc.gain);
    vc.regularization = v.number("regularization", vc.regularization);
    b.virtual_controller = vc;
  }
  return b;
}

SystemConfig parse_system(const Json& j, const std::string& path) {
  Obj o(j, path);
  SystemConfig s;
  if (o.has("polynomial")) {
    if (o.has("builtin")) fail(path, "give either 'builtin' or 'polynomial'");
    s.builtin.clear();
    Obj p(o.at("polynomial"), o.sub("polynomial"));
    s.name = p.string("name", "polynomial");
    s.n = count(p.integer("n", 0), p.sub("n"), 1);
    s.m = count(p.integer("m", 0), p.sub("m"), 1);
    const Json& f = array(p.at("f"), p.sub("f"));
    for (std::size_t i = 0; i < f.size(); ++i) {
      s.f.push_back(parse_polynomial(f[i], p.sub("f") + "[" + std::to_string(i) + "]"));
    }
    const Json& g = array(p.at("g"), p.sub("g"));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string rp = p.sub("g") + "[" + std::to_string(i) + "]";
      const Json& row = array(g[i], rp);
      std::vector<Polynomial> polys;
      for (std::size_t k = 0; k < row.size(); ++k) {
        polys.push_back(parse_polynomial(row[k], rp + "[" + std::to_string(k) + "]"));
      }
      s.g.push_back(std::move(polys));
    }
    if (p.has("domain")) s.domain = parse_box(p.at("domain"), p.sub("domain"));
  } else {
    s.builtin = o.string("builtin", s.builtin);
  }
  if (o.has("aircraft")) {
    Obj a(o.at("aircraft"), o.sub("aircraft"));
    s.aircraft.gravity = a.number("gravity", s.aircraft.gravity);
    s.aircraft.airspeed = a.number("airspeed", s.aircraft.airspeed);
    s.aircraft.time_constant = a.number("time_constant", s.aircraft.time_constant);
    s.aircraft.theta_max = a.number("theta_max", s.aircraft.theta_max);
  }
  if (o.has("constraint")) {
    Obj c(o.at("constraint"), o.sub("constraint"));
    s.constraint = parse_polynomial(c.at("psi"), c.sub("psi"));
    s.relative_degree = static_cast<int>(c.integer("relative_degree", 0));
    if (s.relative_degree < 1 || s.relative_degree > 4) {
      fail(c.sub("relative_degree"), "must be in [1, 4]");
    }
  }
  return s;
}

NominalSpec parse_nominal(const Json& j, const std::string& path) {
  Obj o(j, path);
  NominalSpec n;
  const std::string kind = o.string("kind", "zero");
  const auto k = parse_nominal_kind(kind);
  if (!k) fail(o.sub("kind"), "unknown nominal controller '" + kind + "'");
  n.kind = *k;
  if (o.has("value")) n.value = vec(o.at("value"), o.sub("value"));
  if (o.has("gain")) {
    const Json& g = array(o.at("gain"), o.sub("gain"));
    for (std::size_t i = 0; i < g.size(); ++i) n.gain.push_back(vec(g[i], o.sub("gain") + "[" + std::to_string(i) + "]"));
  }
  if (o.has("target")) n.target = vec(o.at("target"), o.sub("target"));
  n.kp = o.number("kp", n.kp);
  n.kd = o.number("kd", n.kd);
  n.amplitude = o.number("amplitude", n.amplitude);
  n.frequency = o.number("frequency", n.frequency);
  n.feedforward = o.boolean("feedforward", n.feedforward);
  return n;
}

GridAxis parse_axis(const Json& j, const std::string& path) {
  Obj o(j, path);
  GridAxis a;
  a.coordinate = count(o.integer("coordinate", 0), o.sub("coordinate"), 0);
  a.lo = o.number("lo");
  a.hi = o.number("hi");
  a.resolution = count(o.integer("resolution", 200), o.sub("resolution"), 1);
  return a;
}

VerifyTolerances parse_tolerances(const Json& j, const std::string& path) {
  Obj o(j, path);
  VerifyTolerances t;
  t.zero = o.number("zero", t.zero);
  t.band = o.number("band", t.band);
  t.violation = o.number("violation", t.violation);
  t.rank = o.number("rank", t.rank);
  return t;
}

const std::set<std::string> kChecks{"relative_degree", "theorem1", "theorem2", "theorem3", "lemma1"};

RunConfig parse(const Json& root) {
  RunConfig c;
  Obj o(root, "config");
  c.experiment = o.string("experiment", c.experiment);
  if (c.experiment.empty() || c.experiment.find('/') != std::string::npos) {
    fail(o.sub("experiment"), "must be a non-empty name without '/'");
  }
  if (o.has("seed")) {
    const long long s = o.integer("seed", 0);
    if (s < 0) fail(o.sub("seed"), "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  c.output = o.string("output", c.output);
  if (o.has("system")) c.system = parse_system(o.at("system"), o.sub("system"));
  if (o.has("barrier")) c.barrier = parse_barrier(o.at("barrier"), o.sub("barrier"));
  if (o.has("filter")) {
    Obj f(o.at("filter"), o.sub("filter"));
    c.filter.enabled = f.boolean("enabled", true);
    c.filter.mode = f.string("mode", "cbf");
    if (c.filter.mode != "cbf" && c.filter.mode != "hocbf") fail(f.sub("mode"), "expected \"cbf\" or \"hocbf\"");
    if (f.has("alpha")) c.filter.alpha = parse_classk(f.at("alpha"), f.sub("alpha"));
    c.filter.zero_tolerance = f.number("zero_tolerance", c.filter.zero_tolerance);
  }
  if (o.has("nominal")) c.nominal = parse_nominal(o.at("nominal"), o.sub("nominal"));
  if (o.has("sim")) {
    Obj s(o.at("sim"), o.sub("sim"));
    c.sim.dt = s.number("dt", c.sim.dt);
    c.sim.horizon = s.number("horizon", c.sim.horizon);
    c.sim.blowup_state = s.number("blowup_state", c.sim.blowup_state);
    c.sim.blowup_input = s.number("blowup_input", c.sim.blowup_input);
    c.sim.record_stride = static_cast<int>(s.integer("record_stride", c.sim.record_stride));
    if (!(c.sim.dt > 0) || !(c.sim.horizon > 0) || c.sim.record_stride < 1) {
      fail(o.sub("sim"), "dt and horizon must be > 0 and record_stride >= 1");
    }
  }
  if (o.has("initial_conditions")) {
    const Json& a = array(o.at("initial_conditions"), o.sub("initial_conditions"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.initial_conditions.push_back(vec(a[i], o.sub("initial_conditions") + "[" + std::to_string(i) + "]"));
    }
  }
  if (o.has("sample_initial_conditions")) {
    Obj s(o.at("sample_initial_conditions"), o.sub("sample_initial_conditions"));
    c.sample.count = count(s.integer("count", 0), s.sub("count"), 0);
    c.sample.region = s.string("region", "safe");
    if (c.sample.region != "safe" && c.sample.region != "unsafe" && c.sample.region != "any") {
      fail(s.sub("region"), "expected \"safe\", \"unsafe\" or \"any\"");
    }
    if (s.has("box")) c.sample.box = parse_box(s.at("box"), s.sub("box"));
  }
  if (o.has("levelsets")) {
    const Json& a = array(o.at("levelsets"), o.sub("levelsets"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = o.sub("levelsets") + "[" + std::to_string(i) + "]";
      Obj l(a[i], p);
      LevelSetSettings ls;
      ls.name = l.string("name", "grid" + std::to_string(i));
      if (ls.name.empty() || ls.name.find('/') != std::string::npos) fail(l.sub("name"), "invalid name");
      if (l.has("barrier")) ls.barrier = parse_barrier(l.at("barrier"), l.sub("barrier"));
      ls.field = l.string("field", "h");
      if (ls.field != "h" && ls.field != "set_value" && ls.field != "psi") {
        fail(l.sub("field"), "expected \"h\", \"set_value\" or \"psi\"");
      }
      ls.x_axis = parse_axis(l.at("x_axis"), l.sub("x_axis"));
      ls.y_axis = parse_axis(l.at("y_axis"), l.sub("y_axis"));
      if (l.has("base")) ls.base = vec(l.at("base"), l.sub("base"));
      c.levelsets.push_back(std::move(ls));
    }
  }
  if (o.has("verify")) {
    Obj v(o.at("verify"), o.sub("verify"));
    VerifySettings vs;
    const Json& checks = array(v.at("checks"), v.sub("checks"));
    for (const auto& ch : checks) {
      if (!ch.is_string() || !kChecks.count(ch.get<std::string>())) {
        fail(v.sub("checks"), "unknown check " + ch.dump());
      }
      vs.checks.push_back(ch.get<std::string>());
    }
    vs.resolution = count(v.integer("resolution", 200), v.sub("resolution"), 1);
    if (v.has("box")) vs.box = parse_box(v.at("box"), v.sub("box"));
    if (v.has("alpha")) vs.alpha = parse_classk(v.at("alpha"), v.sub("alpha"));
    vs.relative_degree = static_cast<int>(v.integer("relative_degree", 0));
    vs.epsilon = v.number("epsilon", 0.0);
    vs.restrict_to_safe_set = v.boolean("restrict_to_safe_set", false);
    if (v.has("tolerances")) vs.tolerances = parse_tolerances(v.at("tolerances"), v.sub("tolerances"));
    c.verify = vs;
  }
  return c;
}

OJson classk_json(const ClassKSpec& s) {
  return OJson{{"kind", s.kind}, {"coeff", s.coeff}, {"epsilon", s.epsilon}};
}

OJson box_json(const Box& box) {
  OJson a = OJson::array();
  for (const auto& iv : box) a.push_back({iv.lo, iv.hi});
  return a;
}

OJson poly_json(const Polynomial& p) {
  OJson a = OJson::array();
  for (const auto& t : p.terms) a.push_back({{"coeff", t.coeff}, {"powers", t.powers}});
  return a;
}

OJson barrier_json(const BarrierConfig& b) {
  OJson j = OJson::object();
  if (b.kind) j["kind"] = *b.kind;
  if (b.order) j["order"] = *b.order;
  auto list = [](const std::vector<ClassKSpec>& v) {
    OJson a = OJson::array();
    for (const auto& s : v) a.push_back(classk_json(s));
    return a;
  };
  if (b.alphas) j["alphas"] = list(*b.alphas);
  if (b.gammas) j["gammas"] = list(*b.gammas);
  if (b.virtual_controller) {
    j["virtual_controller"] = {{"kind", b.virtual_controller->kind},
                               {"gain", b.virtual_controller->gain},
                               {"regularization", b.virtual_controller->regularization}};
  }
  return j;
}

OJson axis_json(const GridAxis& a) {
  return OJson{{"coordinate", a.coordinate}, {"lo", a.lo}, {"hi", a.hi}, {"resolution", a.resolution}};
}

// Portable uniform double in [0, 1).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ClassKFn ClassKSpec::to_alpha() const {
  if (epsilon != 0.0) throw Error(ErrorCode::Config, "epsilon applies to rectifier gammas only");
  return kind == "signed_square" ? ClassKFn::signed_square(coeff) : ClassKFn::linear(coeff);
}

Rectifier ClassKSpec::to_rectifier() const {
  const ClassKFn g = kind == "signed_square" ? ClassKFn::signed_square(coeff) : ClassKFn::linear(coeff);
  return Rectifier(g, epsilon);
}

RunConfig parse_run_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("invalid JSON: ") + e.what());
  }
  return parse(root);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  OJson j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["output"] = c.output;
  OJson sys = OJson::object();
  if (!c.system.builtin.empty()) {
    sys["builtin"] = c.system.builtin;
  } else {
    OJson p;
    p["name"] = c.system.name;
    p["n"] = c.system.n;
    p["m"] = c.system.m;
    OJson f = OJson::array();
    for (const auto& poly : c.system.f) f.push_back(poly_json(poly));
    p["f"] = f;
    OJson g = OJson::array();
    for (const auto& row : c.system.g) {
      OJson r = OJson::array();
      for (const auto& poly : row) r.push_back(poly_json(poly));
      g.push_back(r);
    }
    p["g"] = g;
    if (c.system.domain) p["domain"] = box_json(*c.system.domain);
    sys["polynomial"] = p;
  }
  sys["aircraft"] = {{"gravity", c.system.aircraft.gravity},
                     {"airspeed", c.system.aircraft.airspeed},
                     {"time_constant", c.system.aircraft.time_constant},
                     {"theta_max", c.system.aircraft.theta_max}};
  if (c.system.constraint) {
    sys["constraint"] = {{"psi", poly_json(*c.system.constraint)},
                         {"relative_degree", c.system.relative_degree}};
  }
  j["system"] = sys;
  j["barrier"] = barrier_json(c.barrier);
  j["filter"] = {{"enabled", c.filter.enabled},
                 {"mode", c.filter.mode},
                 {"alpha", classk_json(c.filter.alpha)},
                 {"zero_tolerance", c.filter.zero_tolerance}};
  OJson nom;
  nom["kind"] = std::string(to_string(c.nominal.kind));
  nom["value"] = c.nominal.value;
  nom["gain"] = c.nominal.gain;
  nom["target"] = c.nominal.target;
  nom["kp"] = c.nominal.kp;
  nom["kd"] = c.nominal.kd;
  nom["amplitude"] = c.nominal.amplitude;
  nom["frequency"] = c.nominal.frequency;
  nom["feedforward"] = c.nominal.feedforward;
  j["nominal"] = nom;
  j["sim"] = {{"dt", c.sim.dt},
              {"horizon", c.sim.horizon},
              {"blowup_state", c.sim.blowup_state},
              {"blowup_input", c.sim.blowup_input},
              {"record_stride", c.sim.record_stride}};
  j["initial_conditions"] = c.initial_conditions;
  OJson s = {{"count", c.sample.count}, {"region", c.sample.region}};
  if (c.sample.box) s["box"] = box_json(*c.sample.box);
  j["sample_initial_conditions"] = s;
  OJson ls = OJson::array();
  for (const auto& l : c.levelsets) {
    OJson e;
    e["name"] = l.name;
    if (l.barrier) e["barrier"] = barrier_json(*l.barrier);
    e["field"] = l.field;
    e["x_axis"] = axis_json(l.x_axis);
    e["y_axis"] = axis_json(l.y_axis);
    e["base"] = l.base;
    ls.push_back(e);
  }
  j["levelsets"] = ls;
  if (c.verify) {
    const VerifySettings& v = *c.verify;
    OJson e;
    e["checks"] = v.checks;
    e["resolution"] = v.resolution;
    if (v.box) e["box"] = box_json(*v.box);
    e["alpha"] = classk_json(v.alpha);
    e["relative_degree"] = v.relative_degree;
    e["epsilon"] = v.epsilon;
    e["restrict_to_safe_set"] = v.restrict_to_safe_set;
    e["tolerances"] = {{"zero", v.tolerances.zero},
                       {"band", v.tolerances.band},
                       {"violation", v.tolerances.violation},
                       {"rank", v.tolerances.rank}};
    j["verify"] = e;
  }
  return j.dump(2) + "\n";
}

std::shared_ptr<const ControlAffineSystem> build_system(const SystemConfig& cfg,
                                                        ConstraintFn* constraint,
                                                        BarrierSpec* default_barrier) {
  std::shared_ptr<const ControlAffineSystem> sys;
  ConstraintFn c;
  BarrierSpec spec;
  if (!cfg.builtin.empty()) {
    Problem p = builtin(cfg.builtin, cfg.aircraft);
    sys = p.system;
    c = p.constraint;
    spec = p.default_barrier;
  } else {
    if (!cfg.constraint) throw Error(ErrorCode::Config, "polynomial systems need a constraint");
    sys = std::make_shared<const ControlAffineSystem>(
        make_polynomial_system(cfg.name, cfg.n, cfg.m, cfg.f, cfg.g, cfg.domain));
    spec.alphas = {ClassKFn::linear(1.0)};
    spec.gammas = {Rectifier(ClassKFn::signed_square(1.0))};
  }
  if (cfg.constraint) {
    const Polynomial psi = *cfg.constraint;
    for (const auto& t : psi.terms) {
      if (t.powers.size() != sys->state_dim()) {
        throw Error(ErrorCode::Config, "constraint terms need one exponent per state");
      }
    }
    c = {[psi](std::span<const Jet> x) { return psi(x); }, cfg.relative_degree};
  }
  spec.constraint = c;
  if (constraint) *constraint = c;
  if (default_barrier) *default_barrier = spec;
  return sys;
}

BarrierSpec build_barrier_spec(const BarrierConfig& cfg, const BarrierSpec& defaults) {
  BarrierSpec spec = defaults;
  if (cfg.kind) spec.kind = *parse_barrier_kind(*cfg.kind);
  if (cfg.order) spec.order = *cfg.order;
  if (cfg.alphas) {
    spec.alphas.clear();
    for (const auto& a : *cfg.alphas) spec.alphas.push_back(a.to_alpha());
  }
  if (cfg.gammas) {
    spec.gammas.clear();
    for (const auto& g : *cfg.gammas) spec.gammas.push_back(g.to_rectifier());
  }
  // Kinds without rectifiers drop inherited defaults unless given explicitly.
  const bool no_gammas = spec.kind == BarrierKind::Plain || spec.kind == BarrierKind::HOCBF ||
                         spec.kind == BarrierKind::Breeden || spec.kind == BarrierKind::Backstepping;
  if (no_gammas && !cfg.gammas) spec.gammas.clear();
  if ((spec.kind == BarrierKind::Plain || spec.kind == BarrierKind::Breeden) && !cfg.alphas) {
    spec.alphas.clear();
  }
  if (cfg.virtual_controller) {
    spec.virtual_controller.kind = cfg.virtual_controller->kind == "regularized"
                                       ? VirtualController::Kind::Regularized
                                       : VirtualController::Kind::Linear;
    spec.virtual_controller.gain = cfg.virtual_controller->gain;
    spec.virtual_controller.regularization = cfg.virtual_controller->regularization;
  }
  return spec;
}

Scenario build_scenario(const RunConfig& config) {
  Scenario s;
  BarrierSpec defaults;
  s.system = build_system(config.system, &s.constraint, &defaults);
  s.barrier = std::make_shared<const Barrier>(build_barrier_spec(config.barrier, defaults), s.system);
  s.filter.alpha = config.filter.alpha.to_alpha();
  s.filter.mode = config.filter.mode == "hocbf" ? FilterConfig::Mode::HOCBF : FilterConfig::Mode::CBF;
  s.filter.zero_tolerance = config.filter.zero_tolerance;
  if (s.filter.mode == FilterConfig::Mode::HOCBF && s.barrier->kind() != BarrierKind::HOCBF) {
    throw Error(ErrorCode::Config, "hocbf filter mode needs an hocbf barrier");
  }
  NominalSpec nominal = config.nominal;
  nominal.aircraft = config.system.aircraft;
  Controller nom = make_nominal(nominal, *s.system);
  s.controller = config.filter.enabled ? make_filtered(s.barrier, s.filter, std::move(nom)) : std::move(nom);
  auto b = s.barrier;
  s.monitor.h = [b](std::span<const double> x) { return b->set_value(x); };
  s.monitor.psi = [b](std::span<const double> x) { return b->psi(x); };
  return s;
}

std::vector<std::vector<double>> resolve_initial_conditions(const RunConfig& config,
                                                            const Scenario& scenario) {
  const std::size_t n = scenario.system->state_dim();
  std::vector<std::vector<double>> out;
  for (const auto& x : config.initial_conditions) {
    if (x.size() != n) throw Error(ErrorCode::Config, "initial condition has wrong dimension");
    out.push_back(x);
  }
  if (config.sample.count == 0) return out;
  const Box box = config.sample.box ? *config.sample.box
                                    : scenario.system->domain().value_or(Box(n, Interval{-1.0, 1.0}));
  if (box.size() != n) throw Error(ErrorCode::Config, "sampling box has wrong dimension");
  std::mt19937_64 rng(config.seed);
  const std::size_t max_draws = 100000 * config.sample.count;
  std::size_t accepted = 0;
  for (std::size_t draw = 0; draw < max_draws && accepted < config.sample.count; ++draw) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = box[i].lo + (box[i].hi - box[i].lo) * unit(rng);
    const double h = scenario.barrier->set_value(x);
    const bool keep = config.sample.region == "any" || (config.sample.region == "safe" && h >= 0.0) ||
                      (config.sample.region == "unsafe" && h < 0.0);
    if (!keep) continue;
    out.push_back(std::move(x));
    ++accepted;
  }
  if (accepted < config.sample.count) {
    throw Error(ErrorCode::Config, "could not sample enough initial conditions in the requested region");
  }
  return out;
}

}  // namespace recbf
