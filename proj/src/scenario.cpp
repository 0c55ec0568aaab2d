#include "ondamp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ondamp/output.hpp"

namespace ondamp {

RefProfile ReferenceSpec::build(double t_end) const {
  switch (kind) {
    case Kind::constant:
      return make_constant(value, t_end);
    case Kind::slope:
      return make_slope(rate, t_end);
    case Kind::trapezoid:
      return make_trapezoid(v_max, accel, t_cruise, t_end);
  }
  throw InvalidProfile("unknown reference kind");
}

double AnalysisSpec::t_from(const std::string& label) const {
  const auto it = fit_t_from.find(label);
  return it == fit_t_from.end() ? 0.0 : it->second;
}

const NamedSystem* Scenario::find(const std::string& label) const {
  for (const NamedSystem& s : systems) {
    if (s.label == label) {
      return &s;
    }
  }
  return nullptr;
}

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Typed access to one JSON object; every key read is remembered so that
// finish() can reject the rest as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path, const std::string& origin)
      : j_(j), path_(std::move(path)), origin_(origin) {
    if (!j_.is_object()) {
      fail({}, "expected an object");
    }
  }

  [[noreturn]] void fail(std::string_view key, std::string_view msg) const {
    const std::string where = key.empty() ? path_ : join(path_, key);
    throw ScenarioError(origin_ + ": field '" +
                        (where.empty() ? std::string("<root>") : where) +
                        "': " + std::string(msg));
  }

  bool has(const char* key) const {
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      fail(key, "is required");
    }
    return j_.at(key);
  }

  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) {
      fail(key, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(key, "must be finite");
    }
    return d;
  }

  double number_or(const char* key, double fallback) {
    seen_.insert(key);
    return has(key) ? number(key) : fallback;
  }

  std::optional<double> optional_number(const char* key) {
    seen_.insert(key);
    if (!has(key)) {
      return std::nullopt;
    }
    return number(key);
  }

  std::uint64_t count(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned()) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) {
      fail(key, "expected a string");
    }
    return v.get<std::string>();
  }

  bool boolean_or(const char* key, bool fallback) {
    seen_.insert(key);
    if (!has(key)) {
      return fallback;
    }
    const json& v = j_.at(key);
    if (!v.is_boolean()) {
      fail(key, "expected true or false");
    }
    return v.get<bool>();
  }

  Fields object(const char* key) {
    return Fields(raw(key), join(path_, key), origin_);
  }

  std::string path(std::string_view key) const { return join(path_, key); }
  const std::string& origin() const { return origin_; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        fail(item.key(), "unknown field");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::string origin_;
  std::set<std::string> seen_;
};

bool is_file_token(const std::string& s) {
  return !s.empty() && s != "." && s != ".." &&
         std::all_of(s.begin(), s.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                  c == '-' || c == '.';
         });
}

SystemSpec parse_system(Fields f) {
  const std::string kind = f.string("kind");
  SystemSpec spec;
  if (kind == "pd") {
    spec.kind = SystemKind::pd;
    spec.pd.kp = f.number("kp");
    spec.pd.kd = f.number("kd");
  } else if (kind == "setpoint" || kind == "tracking") {
    spec.kind = kind == "setpoint" ? SystemKind::setpoint : SystemKind::tracking;
    spec.gains.k = f.number("k");
    spec.gains.mu = f.number("mu");
    spec.gains.sat = f.optional_number("sat");
  } else {
    f.fail("kind", "expected one of setpoint, tracking, pd");
  }
  f.finish();
  try {
    spec.validate();
  } catch (const std::exception& e) {
    f.fail({}, e.what());
  }
  return spec;
}

IntegratorConfig parse_integrator(Fields f) {
  IntegratorConfig cfg;
  cfg.dt = f.number_or("dt", cfg.dt);
  cfg.t_end = f.number("t_end");
  cfg.conv_eps = f.number_or("conv_eps", cfg.conv_eps);
  cfg.conv_hold = f.number_or("conv_hold", cfg.conv_hold);
  cfg.blowup_bound = f.number_or("blowup_bound", cfg.blowup_bound);
  cfg.stop_on_convergence =
      f.boolean_or("stop_on_convergence", cfg.stop_on_convergence);
  f.finish();
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    f.fail({}, e.what());
  }
  return cfg;
}

ReferenceSpec parse_reference(Fields f) {
  ReferenceSpec ref;
  const std::string kind = f.string("kind");
  if (kind == "constant") {
    ref.kind = ReferenceSpec::Kind::constant;
    ref.value = f.number_or("value", 0.0);
  } else if (kind == "slope") {
    ref.kind = ReferenceSpec::Kind::slope;
    ref.rate = f.number("rate");
  } else if (kind == "trapezoid") {
    ref.kind = ReferenceSpec::Kind::trapezoid;
    ref.v_max = f.number("v_max");
    ref.accel = f.number("accel");
    ref.t_cruise = f.number("t_cruise");
  } else {
    f.fail("kind", "expected one of constant, slope, trapezoid");
  }
  f.finish();
  return ref;
}

std::optional<NoiseConfig> parse_noise(Fields f) {
  NoiseConfig cfg;
  const bool enabled = f.boolean_or("enabled", false);
  cfg.sigma1 = f.number_or("sigma1", cfg.sigma1);
  cfg.sigma2 = f.number_or("sigma2", cfg.sigma2);
  cfg.sample_dt = f.number_or("sample_dt", cfg.sample_dt);
  if (enabled || f.has("seed")) {
    cfg.seed = f.count("seed");
  }
  f.finish();
  if (!enabled) {
    return std::nullopt;
  }
  return cfg;
}

Axis parse_axis(Fields f) {
  Axis a;
  a.lo = f.number("lo");
  a.hi = f.number("hi");
  a.n = f.count("n");
  f.finish();
  if (a.n == 0 || (a.n == 1 && a.lo != a.hi) || (a.n > 1 && !(a.lo < a.hi))) {
    f.fail({}, "need n >= 1 with lo < hi, or n = 1 with lo = hi");
  }
  return a;
}

PlantState parse_init(const json& v, const Fields& parent, std::size_t i) {
  const std::string key = "inits[" + std::to_string(i) + "]";
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    parent.fail(key, "expected [x1, x2]");
  }
  const PlantState s{v[0].get<double>(), v[1].get<double>()};
  if (!std::isfinite(s.x1) || !std::isfinite(s.x2)) {
    parent.fail(key, "must be finite");
  }
  return s;
}

void apply_overrides(json& doc, const Overrides& ov) {
  auto patch_system = [&](json& sys) {
    if (!sys.is_object() || sys.value("kind", "") == "pd") {
      return;
    }
    if (ov.k) {
      sys["k"] = *ov.k;
    }
    if (ov.mu) {
      sys["mu"] = *ov.mu;
    }
  };
  if (doc.contains("system")) {
    patch_system(doc["system"]);
  }
  if (doc.contains("systems") && doc["systems"].is_object()) {
    for (auto& item : doc["systems"].items()) {
      patch_system(item.value());
    }
  }
  if (ov.dt || ov.t_end) {
    json& integ = doc["integrator"];
    if (ov.dt) {
      integ["dt"] = *ov.dt;
    }
    if (ov.t_end) {
      integ["t_end"] = *ov.t_end;
    }
  }
  if (ov.seed && doc.contains("noise") && doc["noise"].is_object()) {
    doc["noise"]["seed"] = *ov.seed;
  }
}

// Integral floats become integers so that 1 and 1.0 hash alike; key order
// is already canonical in nlohmann::json objects.
void canonicalize_numbers(json& j) {
  if (j.is_structured()) {
    for (auto& child : j) {
      canonicalize_numbers(child);
    }
    return;
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 9.0e15) {
      j = static_cast<std::int64_t>(v);
    }
  } else if (j.is_number_unsigned() &&
             j.get<std::uint64_t>() <=
                 static_cast<std::uint64_t>(INT64_MAX)) {
    j = static_cast<std::int64_t>(j.get<std::uint64_t>());
  }
}

std::string syntax_error(const std::string& text, const std::string& origin,
                         const json::parse_error& err) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min<std::size_t>(err.byte ? err.byte - 1 : 0,
                                                text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream msg;
  msg << origin << ":" << line << ":" << col << ": " << err.what();
  return msg.str();
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const Overrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ScenarioError(syntax_error(text, origin, err));
  }
  apply_overrides(doc, overrides);

  Scenario s;
  json canonical = doc;
  canonicalize_numbers(canonical);
  s.canonical = canonical.dump();
  Fields root(doc, "", origin);
  s.name = root.string("name");
  if (!is_file_token(s.name)) {
    root.fail("name", "use letters, digits, '_', '-' or '.'");
  }

  if (root.has("system") == root.has("systems")) {
    root.fail("system", "give exactly one of 'system' or 'systems'");
  }
  if (root.has("system")) {
    s.systems.push_back({"", parse_system(root.object("system"))});
  } else {
    s.single_system = false;
    Fields systems = root.object("systems");
    for (const auto& item : doc.at("systems").items()) {
      if (!is_file_token(item.key())) {
        systems.fail(item.key(), "label must be usable in a file name");
      }
      s.systems.push_back(
          {item.key(), parse_system(systems.object(item.key().c_str()))});
    }
    if (s.systems.empty()) {
      root.fail("systems", "must not be empty");
    }
  }

  if (root.has("energy_grid")) {
    Fields grid = root.object("energy_grid");
    s.energy_grid = EnergyGridSpec{parse_axis(grid.object("e1")),
                                   parse_axis(grid.object("e2"))};
    grid.finish();
  }

  const bool runs = !s.energy_grid || root.has("inits");
  if (runs) {
    s.integrator = parse_integrator(root.object("integrator"));
    const json& inits = root.raw("inits");
    if (!inits.is_array()) {
      root.fail("inits", "expected a list of [x1, x2] pairs");
    }
    for (std::size_t i = 0; i < inits.size(); ++i) {
      s.inits.push_back(parse_init(inits[i], root, i));
    }
    if (s.inits.empty()) {
      root.fail("inits", "must contain at least one initial state");
    }
    s.reference = parse_reference(root.object("reference"));
    try {
      (void)s.build_reference();
    } catch (const std::exception& e) {
      root.fail("reference", e.what());
    }
    for (const NamedSystem& sys : s.systems) {
      if (sys.spec.kind == SystemKind::setpoint &&
          s.reference.kind != ReferenceSpec::Kind::constant) {
        root.fail("reference", "set-point systems need a constant reference");
      }
    }
  } else if (root.has("integrator")) {
    s.integrator = parse_integrator(root.object("integrator"));
  }

  if (root.has("noise")) {
    s.noise = parse_noise(root.object("noise"));
    if (s.noise) {
      try {
        s.noise->validate(s.integrator.dt);
      } catch (const std::exception& e) {
        root.fail("noise", e.what());
      }
    }
  }

  s.csv_stem = s.name;
  if (root.has("outputs")) {
    Fields out = root.object("outputs");
    if (out.has("csv")) {
      s.csv_stem = out.string("csv");
      if (!is_file_token(s.csv_stem)) {
        out.fail("csv", "must be a plain file stem");
      }
    }
    if (out.has("plotdata")) {
      s.plotdata = out.string("plotdata");
      if (!is_file_token(*s.plotdata)) {
        out.fail("plotdata", "must be a plain file name");
      }
    }
    if (out.has("plot_stride")) {
      s.plot_stride = out.count("plot_stride");
      if (s.plot_stride == 0) {
        out.fail("plot_stride", "must be at least 1");
      }
    }
    out.finish();
  }

  if (root.has("sweep")) {
    Fields sweep = root.object("sweep");
    const json& ks = sweep.raw("k");
    if (!ks.is_array() || ks.empty()) {
      sweep.fail("k", "expected a non-empty list of gains");
    }
    for (const json& k : ks) {
      if (!k.is_number() || !(k.get<double>() > 0.0) ||
          !std::isfinite(k.get<double>())) {
        sweep.fail("k", "gains must be positive numbers");
      }
      s.sweep_k.push_back(k.get<double>());
    }
    sweep.finish();
  }

  if (root.has("analysis")) {
    Fields an = root.object("analysis");
    s.analysis.fit_floor = an.number_or("fit_floor", s.analysis.fit_floor);
    if (!(s.analysis.fit_floor > 0.0)) {
      an.fail("fit_floor", "must be positive");
    }
    s.analysis.rms_from = an.number_or("rms_from", 0.0);
    if (an.has("fit_t_from")) {
      const json& tf = an.raw("fit_t_from");
      if (tf.is_number()) {
        for (const NamedSystem& sys : s.systems) {
          s.analysis.fit_t_from[sys.label] = tf.get<double>();
        }
      } else {
        Fields per = an.object("fit_t_from");
        for (const auto& item : tf.items()) {
          if (!s.find(item.key())) {
            per.fail(item.key(), "no system with this label");
          }
          s.analysis.fit_t_from[item.key()] = per.number(item.key().c_str());
        }
        per.finish();
      }
    }
    an.finish();
  }

  root.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path,
                       const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(path.string() + ": cannot open scenario file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string(), overrides);
}

std::string scenario_hash(const Scenario& s) { return sha256_hex(s.canonical); }

}  // namespace ondamp
