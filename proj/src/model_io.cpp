#include <string>

#include "sal/error.hpp"
#include "sal/json_util.hpp"
#include "sal/model.hpp"

namespace sal {
namespace {

constexpr int kFormatVersion = 1;

const ordered_json& field(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(where + ": missing field '" + key + "'");
  return *it;
}

double number(const ordered_json& v, const std::string& where) {
  if (!v.is_number()) throw Error(where + ": expected a number");
  return v.get<double>();
}

std::size_t count(const ordered_json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw Error(where + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

ordered_json vector_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::vector<double> vector_from(const ordered_json& v, const std::string& where) {
  if (!v.is_array()) throw Error(where + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(number(x, where));
  return out;
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (double x : m.row(r)) row.push_back(x);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const ordered_json& v, std::size_t cols_if_empty, const std::string& where) {
  if (!v.is_array()) throw Error(where + ": expected a 2-D array");
  if (v.empty()) return Matrix(0, cols_if_empty);
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  std::vector<double> data;
  data.reserve(v.size() * cols);
  for (const auto& row : v) {
    const std::vector<double> r = vector_from(row, where);
    if (r.size() != cols) throw Error(where + ": ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix::from_rows(v.size(), cols, std::move(data));
}

ordered_json activation_json(const Activation& a) {
  ordered_json params = ordered_json::object();
  if (a.type() == ActivationType::LeakyReLU) params["slope"] = a.slope();
  if (a.type() == ActivationType::Combination) {
    params["weights"] = vector_json(a.weights());
    ordered_json basis = ordered_json::array();
    for (const Activation& b : a.basis()) basis.push_back(activation_json(b));
    params["basis"] = std::move(basis);
  }
  ordered_json j;
  j["kind"] = a.name();
  j["params"] = std::move(params);
  return j;
}

Activation activation_from(const ordered_json& j, const std::string& where) {
  const ordered_json& kind = field(j, "kind", where);
  if (!kind.is_string()) throw Error(where + ".kind: expected a string");
  const std::string name = kind.get<std::string>();
  const ordered_json empty = ordered_json::object();
  const ordered_json& params = j.contains("params") ? j["params"] : empty;
  if (name == "leaky_relu") return Activation::leaky_relu(number(field(params, "slope", where + ".params"), where));
  if (name == "combination") {
    std::vector<double> w = vector_from(field(params, "weights", where + ".params"), where + ".params.weights");
    const ordered_json& basis = field(params, "basis", where + ".params");
    if (!basis.is_array()) throw Error(where + ".params.basis: expected an array");
    std::vector<Activation> b;
    for (std::size_t i = 0; i < basis.size(); ++i)
      b.push_back(activation_from(basis[i], where + ".params.basis[" + std::to_string(i) + "]"));
    return Activation::combination(std::move(w), std::move(b));
  }
  try {
    return Activation::from_name(name);
  } catch (const Error&) {
    throw Error(where + ".kind: unknown activation '" + name + "'");
  }
}

ordered_json window_json(const WindowSpec& w) {
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

WindowSpec window_from(const ordered_json& j, const std::string& where) {
  const ordered_json& mode = field(j, "mode", where);
  if (mode == "grid_steps")
    return WindowSpec::grid_steps(static_cast<int>(count(field(j, "count", where), where + ".count")),
                                  number(field(j, "step", where), where + ".step"));
  if (mode == "tau_multiples") return WindowSpec::tau_multiples(number(field(j, "factor", where), where + ".factor"));
  throw Error(where + ".mode: expected 'grid_steps' or 'tau_multiples'");
}

ordered_json mlp_json(const MlpParams& p) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["input_dim"] = p.input_dim;
  j["output_dim"] = p.output_dim;
  ordered_json layers = ordered_json::array();
  for (const DenseLayer& L : p.layers) {
    ordered_json l;
    l["weight"] = matrix_json(L.weight);
    l["bias"] = vector_json(L.bias);
    l["activation"] = activation_json(L.activation);
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j;
}

MlpParams mlp_from(const ordered_json& j, const std::string& where) {
  MlpParams p;
  p.input_dim = count(field(j, "input_dim", where), where + ".input_dim");
  p.output_dim = count(field(j, "output_dim", where), where + ".output_dim");
  const ordered_json& layers = field(j, "layers", where);
  if (!layers.is_array()) throw Error(where + ".layers: expected an array");
  std::size_t in = p.input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string w = where + ".layers[" + std::to_string(i) + "]";
    DenseLayer L;
    L.weight = matrix_from(field(layers[i], "weight", w), in, w + ".weight");
    L.bias = vector_from(field(layers[i], "bias", w), w + ".bias");
    L.activation = activation_from(field(layers[i], "activation", w), w + ".activation");
    in = L.weight.rows();
    p.layers.push_back(std::move(L));
  }
  p.validate();
  return p;
}

ordered_json model_json(const SalModel& m) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["input_dim"] = m.input_dim;
  j["output_dim"] = m.output_dim;
  ordered_json grades = ordered_json::array();
  for (const GradeParams& g : m.grades) {
    ordered_json gj;
    gj["weight"] = matrix_json(g.weight);
    gj["bias"] = vector_json(g.bias);
    gj["mu"] = g.pooling.mu;
    gj["activation"] = activation_json(g.activation);
    ordered_json s;
    s["tau"] = g.smoothing.tau;
    s["window_mode"] = window_json(g.smoothing.window);
    s["M"] = g.smoothing.quad_points;
    s["renormalize"] = g.smoothing.renormalize;
    gj["smoothing"] = std::move(s);
    grades.push_back(std::move(gj));
  }
  j["grades"] = std::move(grades);
  j["hybrid_head"] = m.hybrid_head ? mlp_json(*m.hybrid_head) : ordered_json(nullptr);
  return j;
}

void check_version(const ordered_json& j, const std::string& where) {
  const std::size_t v = count(field(j, "format_version", where), where + ".format_version");
  if (v != kFormatVersion) throw Error(where + ": unsupported format_version " + std::to_string(v));
}

}  // namespace

std::string model_to_json(const SalModel& model) {
  model.validate();
  return dump_json(model_json(model));
}

SalModel model_from_json(const std::string& text) {
  const ordered_json j = parse_json_strict(text, "model");
  check_version(j, "model");
  SalModel m;
  m.input_dim = count(field(j, "input_dim", "model"), "model.input_dim");
  m.output_dim = count(field(j, "output_dim", "model"), "model.output_dim");
  if (j.contains("hybrid_head") && !j["hybrid_head"].is_null()) m.hybrid_head = mlp_from(j["hybrid_head"], "model.hybrid_head");
  const ordered_json& grades = field(j, "grades", "model");
  if (!grades.is_array()) throw Error("model.grades: expected an array");
  for (std::size_t i = 0; i < grades.size(); ++i) {
    const std::string w = "model.grades[" + std::to_string(i) + "]";
    const ordered_json& gj = grades[i];
    GradeParams g;
    g.weight = matrix_from(field(gj, "weight", w), m.feature_width(i), w + ".weight");
    g.bias = vector_from(field(gj, "bias", w), w + ".bias");
    g.pooling = PoolingSpec{count(field(gj, "mu", w), w + ".mu"), m.output_dim};
    g.activation = activation_from(field(gj, "activation", w), w + ".activation");
    const ordered_json& s = field(gj, "smoothing", w);
    g.smoothing.tau = number(field(s, "tau", w + ".smoothing"), w + ".smoothing.tau");
    g.smoothing.window = window_from(field(s, "window_mode", w + ".smoothing"), w + ".smoothing.window_mode");
    g.smoothing.quad_points = static_cast<int>(count(field(s, "M", w + ".smoothing"), w + ".smoothing.M"));
    if (s.contains("renormalize")) {
      if (!s["renormalize"].is_boolean()) throw Error(w + ".smoothing.renormalize: expected a boolean");
      g.smoothing.renormalize = s["renormalize"].get<bool>();
    }
    m.grades.push_back(std::move(g));
    m.validate();
  }
  m.validate();
  return m;
}

void save_model(const SalModel& model, const std::string& path) { write_text_file(path, model_to_json(model)); }

SalModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

std::string mlp_to_json(const MlpParams& params) {
  params.validate();
  return dump_json(mlp_json(params));
}

MlpParams mlp_from_json(const std::string& text) {
  const ordered_json j = parse_json_strict(text, "mlp");
  check_version(j, "mlp");
  return mlp_from(j, "mlp");
}

void save_mlp(const MlpParams& params, const std::string& path) { write_text_file(path, mlp_to_json(params)); }

MlpParams load_mlp(const std::string& path) { return mlp_from_json(read_text_file(path)); }

}  // namespace sal
