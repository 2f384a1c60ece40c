#include "sal/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <string>

#include "sal/error.hpp"

namespace sal {
namespace {

namespace fs = std::filesystem;

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& msg) : Error("config: " + path + ": " + msg) {}
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const ordered_json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError(join(path, it.key()), "unknown key");
  }
}

double get_number(const ordered_json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const ordered_json& v = j[key];
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "must be finite");
  return x;
}

std::uint64_t get_uint(const ordered_json& j, const char* key, const std::string& path, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const ordered_json& v = j[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(join(path, key), "expected a nonnegative integer");
}

int get_int(const ordered_json& j, const char* key, const std::string& path, int fallback) {
  const std::uint64_t v = get_uint(j, key, path, static_cast<std::uint64_t>(std::max(fallback, 0)));
  if (v > 2147483647ULL) throw ConfigError(join(path, key), "value too large");
  return static_cast<int>(v);
}

bool get_bool(const ordered_json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return j[key].get<bool>();
}

std::string get_string(const ordered_json& j, const char* key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(join(path, key), "expected a string");
  return j[key].get<std::string>();
}

template <class F>
auto rethrow_at(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

Activation parse_activation(const ordered_json& j, const std::string& path) {
  if (j.is_string()) return rethrow_at(path, [&] { return Activation::from_name(j.get<std::string>()); });
  check_keys(j, path, {"kind", "slope"});
  if (!j.contains("kind")) throw ConfigError(join(path, "kind"), "missing required key");
  const std::string kind = get_string(j, "kind", path, "");
  if (kind == "leaky_relu") return rethrow_at(path, [&] { return Activation::leaky_relu(get_number(j, "slope", path, 0.01)); });
  if (j.contains("slope")) throw ConfigError(join(path, "slope"), "only valid for leaky_relu");
  return rethrow_at(join(path, "kind"), [&] { return Activation::from_name(kind); });
}

ordered_json activation_to_json(const Activation& a) {
  if (a.type() == ActivationType::LeakyReLU) {
    ordered_json j;
    j["kind"] = a.name();
    j["slope"] = a.slope();
    return j;
  }
  return a.name();
}

WindowSpec parse_window(const ordered_json& j, const std::string& path) {
  require_object(j, path);
  const std::string mode = get_string(j, "mode", path, "");
  if (mode == "grid_steps") {
    check_keys(j, path, {"mode", "count", "step"});
    if (!j.contains("step")) throw ConfigError(join(path, "step"), "missing required key");
    return WindowSpec::grid_steps(get_int(j, "count", path, 100), get_number(j, "step", path, 0.0));
  }
  if (mode == "tau_multiples") {
    check_keys(j, path, {"mode", "factor"});
    return WindowSpec::tau_multiples(get_number(j, "factor", path, 6.0));
  }
  throw ConfigError(join(path, "mode"), "expected 'grid_steps' or 'tau_multiples'");
}

ordered_json window_to_json(const WindowSpec& w) {
  ordered_json j;
  if (w.mode == WindowSpec::Mode::GridSteps) {
    j["mode"] = "grid_steps";
    j["count"] = w.count;
    j["step"] = w.step;
  } else {
    j["mode"] = "tau_multiples";
    j["factor"] = w.factor;
  }
  return j;
}

GradeConfig parse_grade(const ordered_json& j, const std::string& path, GradeConfig g) {
  check_keys(j, path,
             {"width", "activation", "select_from", "tau", "window", "quad_points", "renormalize", "smoothing_target",
              "solver", "epsilon", "max_iters", "lipschitz_safety", "init", "init_gain", "ridge"});
  g.width = get_uint(j, "width", path, g.width);
  if (j.contains("activation")) g.activation = parse_activation(j["activation"], join(path, "activation"));
  if (j.contains("select_from")) {
    const ordered_json& s = j["select_from"];
    if (!s.is_array()) throw ConfigError(join(path, "select_from"), "expected an array");
    g.select_from.clear();
    for (std::size_t i = 0; i < s.size(); ++i)
      g.select_from.push_back(parse_activation(s[i], join(path, "select_from") + "[" + std::to_string(i) + "]"));
  }
  g.tau = get_number(j, "tau", path, g.tau);
  if (j.contains("window")) g.window = parse_window(j["window"], join(path, "window"));
  g.quad_points = get_int(j, "quad_points", path, g.quad_points);
  g.renormalize = get_bool(j, "renormalize", path, g.renormalize);
  if (j.contains("smoothing_target"))
    g.smoothing_target = rethrow_at(join(path, "smoothing_target"),
                                    [&] { return smoothing_target_from(get_string(j, "smoothing_target", path, "")); });
  if (j.contains("solver"))
    g.solver = rethrow_at(join(path, "solver"), [&] { return solver_method_from(get_string(j, "solver", path, "")); });
  g.epsilon = get_number(j, "epsilon", path, g.epsilon);
  g.max_iters = get_int(j, "max_iters", path, g.max_iters);
  g.lipschitz_safety = get_number(j, "lipschitz_safety", path, g.lipschitz_safety);
  if (j.contains("init"))
    g.init = rethrow_at(join(path, "init"), [&] { return init_kind_from(get_string(j, "init", path, "")); });
  g.init_gain = get_number(j, "init_gain", path, g.init_gain);
  g.ridge = get_number(j, "ridge", path, g.ridge);
  return g;
}

ordered_json grade_to_json(const GradeConfig& g) {
  ordered_json j;
  j["width"] = g.width;
  j["activation"] = activation_to_json(g.activation);
  if (!g.select_from.empty()) {
    ordered_json s = ordered_json::array();
    for (const Activation& a : g.select_from) s.push_back(activation_to_json(a));
    j["select_from"] = std::move(s);
  }
  j["tau"] = g.tau;
  j["window"] = window_to_json(g.window);
  j["quad_points"] = g.quad_points;
  j["renormalize"] = g.renormalize;
  j["smoothing_target"] = to_string(g.smoothing_target);
  j["solver"] = to_string(g.solver);
  j["epsilon"] = g.epsilon;
  j["max_iters"] = g.max_iters;
  j["lipschitz_safety"] = g.lipschitz_safety;
  j["init"] = to_string(g.init);
  j["init_gain"] = g.init_gain;
  j["ridge"] = g.ridge;
  return j;
}

std::vector<int> parse_int_list(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ordered_json wrap;
    wrap["v"] = j[i];
    out.push_back(get_int(wrap, "v", path + "[" + std::to_string(i) + "]", 0));
  }
  return out;
}

SsgConfig parse_ssg(const ordered_json& j, const std::string& path) {
  check_keys(j, path, {"widths", "activations", "alpha", "epochs", "epsilon", "seed", "zero_init", "checkpoints"});
  SsgConfig c;
  if (!j.contains("widths")) throw ConfigError(join(path, "widths"), "missing required key");
  for (int w : parse_int_list(j["widths"], join(path, "widths"))) {
    if (w < 1) throw ConfigError(join(path, "widths"), "widths must be positive");
    c.widths.push_back(static_cast<std::size_t>(w));
  }
  if (c.widths.empty()) throw ConfigError(join(path, "widths"), "at least one hidden layer is required");
  Activation base = Activation::relu();
  if (j.contains("activations")) {
    const ordered_json& a = j["activations"];
    const std::string p = join(path, "activations");
    if (a.is_array()) {
      if (a.size() != c.widths.size()) throw ConfigError(p, "needs one entry per hidden layer");
      for (std::size_t i = 0; i < a.size(); ++i) c.activations.push_back(parse_activation(a[i], p + "[" + std::to_string(i) + "]"));
    } else {
      base = parse_activation(a, p);
    }
  }
  if (c.activations.empty()) c.activations.assign(c.widths.size(), base);
  c.alpha = get_number(j, "alpha", path, 1e-3);
  if (!(c.alpha > 0.0)) throw ConfigError(join(path, "alpha"), "must be positive");
  c.epochs = get_int(j, "epochs", path, 5000);
  c.epsilon = get_number(j, "epsilon", path, 0.0);
  if (c.epsilon < 0.0) throw ConfigError(join(path, "epsilon"), "must be nonnegative");
  c.seed = get_uint(j, "seed", path, 1);
  c.zero_init = get_bool(j, "zero_init", path, false);
  if (j.contains("checkpoints")) c.checkpoints = parse_int_list(j["checkpoints"], join(path, "checkpoints"));
  return c;
}

ordered_json ssg_to_json(const SsgConfig& c) {
  ordered_json j;
  j["widths"] = c.widths;
  ordered_json acts = ordered_json::array();
  for (const Activation& a : c.activations) acts.push_back(activation_to_json(a));
  j["activations"] = std::move(acts);
  j["alpha"] = c.alpha;
  j["epochs"] = c.epochs;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["zero_init"] = c.zero_init;
  j["checkpoints"] = c.checkpoints;
  return j;
}

DataConfig parse_data(const ordered_json& j, const std::string& path) {
  check_keys(j, path, {"target", "a", "b", "delta", "m", "m_test", "seed", "coeff_file", "custom_file"});
  DataConfig d;
  if (!j.contains("target")) throw ConfigError(join(path, "target"), "missing required key");
  d.target = get_string(j, "target", path, "");
  // Defaults follow the two benchmark setups.
  if (d.target == "nondiff") {
    d.a = -1.0, d.b = 1.0, d.delta = 0.1, d.m = 5001, d.m_test = 1001;
  } else if (d.target == "oscillatory") {
    d.a = 0.0, d.b = 1.0, d.delta = 0.0, d.m = 5000, d.m_test = 1000;
  } else if (d.target == "custom") {
    if (!j.contains("custom_file")) throw ConfigError(join(path, "custom_file"), "required for target 'custom'");
    for (const char* k : {"a", "b"})
      if (!j.contains(k)) throw ConfigError(join(path, k), "required for target 'custom'");
    d.m = 1001, d.m_test = 1000;
  } else {
    throw ConfigError(join(path, "target"), "expected 'nondiff', 'oscillatory' or 'custom'");
  }
  d.a = get_number(j, "a", path, d.a);
  d.b = get_number(j, "b", path, d.b);
  d.delta = get_number(j, "delta", path, d.delta);
  d.m = get_uint(j, "m", path, d.m);
  d.m_test = get_uint(j, "m_test", path, d.m_test);
  d.seed = get_uint(j, "seed", path, d.seed);
  d.coeff_file = get_string(j, "coeff_file", path, "");
  d.custom_file = get_string(j, "custom_file", path, "");
  if (!(d.a < d.b)) throw ConfigError(path, "a must be less than b");
  if (d.delta < 0.0) throw ConfigError(join(path, "delta"), "must be nonnegative");
  if (d.m < 2) throw ConfigError(join(path, "m"), "at least two training points are required");
  if (!d.coeff_file.empty() && d.target != "oscillatory") throw ConfigError(join(path, "coeff_file"), "only valid for target 'oscillatory'");
  if (!d.custom_file.empty() && d.target != "custom") throw ConfigError(join(path, "custom_file"), "only valid for target 'custom'");
  return d;
}

SalSection parse_sal(const ordered_json& j, const std::string& path) {
  check_keys(j, path, {"defaults", "grades", "seed", "record_test_metrics", "hybrid_head"});
  SalSection s;
  GradeConfig defaults;
  if (j.contains("defaults")) defaults = parse_grade(j["defaults"], join(path, "defaults"), defaults);
  if (j.contains("grades")) {
    const ordered_json& g = j["grades"];
    const std::string p = join(path, "grades");
    if (g.is_number_unsigned() || g.is_number_integer()) {
      ordered_json wrap;
      wrap["grades"] = g;
      s.grades.assign(get_uint(wrap, "grades", path, 0), defaults);
    } else if (g.is_array()) {
      for (std::size_t i = 0; i < g.size(); ++i) s.grades.push_back(parse_grade(g[i], p + "[" + std::to_string(i) + "]", defaults));
    } else {
      throw ConfigError(p, "expected an array of grade objects or a grade count");
    }
  }
  s.seed = get_uint(j, "seed", path, 1);
  s.record_test_metrics = get_bool(j, "record_test_metrics", path, true);
  if (j.contains("hybrid_head") && !j["hybrid_head"].is_null()) s.hybrid_head = parse_ssg(j["hybrid_head"], join(path, "hybrid_head"));
  if (s.grades.empty() && !s.hybrid_head) throw ConfigError(join(path, "grades"), "at least one grade is required");
  return s;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  const ordered_json j = parse_json_strict(text, origin);
  check_keys(j, "", {"data", "sal", "ssg", "compare", "output"});
  RunConfig c;
  if (!j.contains("data")) throw ConfigError("data", "missing required section");
  c.data = parse_data(j["data"], "data");
  if (j.contains("sal")) c.sal = parse_sal(j["sal"], "sal");
  if (j.contains("ssg")) c.ssg = parse_ssg(j["ssg"], "ssg");
  if (j.contains("compare")) {
    check_keys(j["compare"], "compare", {"thresholds"});
    if (j["compare"].contains("thresholds")) {
      const ordered_json& t = j["compare"]["thresholds"];
      if (!t.is_array() || t.empty()) throw ConfigError("compare.thresholds", "expected a non-empty array of numbers");
      c.compare.thresholds.clear();
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t[i].is_number() || !(t[i].get<double>() > 0.0))
          throw ConfigError("compare.thresholds[" + std::to_string(i) + "]", "expected a positive number");
        c.compare.thresholds.push_back(t[i].get<double>());
      }
    }
  }
  if (j.contains("output")) {
    const ordered_json& o = j["output"];
    check_keys(o, "output", {"dir", "csv", "model_path"});
    c.output.dir = get_string(o, "dir", "output", c.output.dir);
    c.output.csv = get_string(o, "csv", "output", c.output.csv);
    c.output.model_path = get_string(o, "model_path", "output", c.output.model_path);
  }
  if (c.sal) {
    const std::size_t t = c.data.target == "oscillatory" ? OscillatoryCoeffs::kCount : 1;
    for (std::size_t i = 0; i < c.sal->grades.size(); ++i) {
      if (c.data.target == "custom") break;
      rethrow_at("sal.grades[" + std::to_string(i) + "]", [&] { c.sal->grades[i].validate(t); });
    }
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  RunConfig c = parse_config_text(read_text_file(path), path);
  const fs::path parent = fs::path(path).parent_path();
  c.base_dir = parent.empty() ? "." : parent.string();
  return c;
}

ordered_json config_to_json(const RunConfig& c) {
  ordered_json j;
  ordered_json d;
  d["target"] = c.data.target;
  d["a"] = c.data.a;
  d["b"] = c.data.b;
  d["delta"] = c.data.delta;
  d["m"] = c.data.m;
  d["m_test"] = c.data.m_test;
  d["seed"] = c.data.seed;
  if (!c.data.coeff_file.empty()) d["coeff_file"] = c.data.coeff_file;
  if (!c.data.custom_file.empty()) d["custom_file"] = c.data.custom_file;
  j["data"] = std::move(d);
  if (c.sal) {
    ordered_json s;
    ordered_json grades = ordered_json::array();
    for (const GradeConfig& g : c.sal->grades) grades.push_back(grade_to_json(g));
    s["grades"] = std::move(grades);
    s["seed"] = c.sal->seed;
    s["record_test_metrics"] = c.sal->record_test_metrics;
    s["hybrid_head"] = c.sal->hybrid_head ? ssg_to_json(*c.sal->hybrid_head) : ordered_json(nullptr);
    j["sal"] = std::move(s);
  }
  if (c.ssg) j["ssg"] = ssg_to_json(*c.ssg);
  ordered_json cmp;
  cmp["thresholds"] = c.compare.thresholds;
  j["compare"] = std::move(cmp);
  ordered_json o;
  o["dir"] = c.output.dir;
  o["csv"] = c.output.csv;
  o["model_path"] = c.output.model_path;
  j["output"] = std::move(o);
  return j;
}

void override_seed(RunConfig& c, std::uint64_t seed) {
  c.data.seed = seed;
  if (c.sal) {
    c.sal->seed = seed;
    if (c.sal->hybrid_head) c.sal->hybrid_head->seed = seed;
  }
  if (c.ssg) c.ssg->seed = seed;
}

namespace {
std::string resolve(const RunConfig& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(c.base_dir) / path).string();
}
}  // namespace

TargetFn build_target(const RunConfig& c) {
  if (c.data.target == "nondiff") return TargetFn::nondiff();
  if (c.data.target == "oscillatory")
    return TargetFn::oscillatory(
        OscillatoryCoeffs::load(c.data.coeff_file.empty() ? default_coeff_path() : resolve(c, c.data.coeff_file)));
  return TargetFn::custom_from_csv(resolve(c, c.data.custom_file));
}

Dataset build_train(const RunConfig& c, const TargetFn& target) {
  return make_train(target, c.data.a, c.data.b, c.data.delta, c.data.m);
}

Dataset build_test(const RunConfig& c, const TargetFn& target) {
  return make_test(target, c.data.a, c.data.b, c.data.m_test, c.data.seed);
}

TrainConfig to_train_config(const SalSection& sal) {
  TrainConfig t;
  t.grades = sal.grades;
  t.hybrid_head = sal.hybrid_head;
  t.record_test_metrics = sal.record_test_metrics;
  t.seed = sal.seed;
  return t;
}

}  // namespace sal
