#include <filesystem>

#include "doctest.h"
#include "sal/error.hpp"
#include "sal/json_util.hpp"
#include "sal/model.hpp"
#include "sal/qp_solver.hpp"
#include "test_util.hpp"

using namespace sal;

namespace {

SalModel sample_model(bool with_head) {
  SplitMix64 rng(12);
  SalModel m;
  m.input_dim = 1;
  m.output_dim = 2;
  if (with_head) {
    MlpShape s;
    s.input_dim = 1;
    s.output_dim = 2;
    s.hidden = {5};
    s.hidden_activations = {Activation::tanh()};
    m.hybrid_head = he_init(s, rng);
  }
  std::size_t in = m.feature_width(0);
  const Activation acts[] = {Activation::sincos_half(), Activation::leaky_relu(0.07),
                             Activation::combination({0.25, -1.5}, {Activation::relu(), Activation::tanh()})};
  for (int k = 0; k < 3; ++k) {
    GradeParams g;
    g.weight = testing::random_matrix(4, in, rng);
    g.bias = testing::random_vector(4, rng);
    g.pooling = PoolingSpec{2, 2};
    g.activation = acts[k];
    if (k == 2) g.smoothing = GradeSmoothing{0.05, WindowSpec::grid_steps(10, 0.004), 30, true};
    if (k == 1) g.smoothing = GradeSmoothing{0.02, WindowSpec::tau_multiples(6.0), 25, false};
    m.grades.push_back(g);
    in = 4;
  }
  return m;
}

}  // namespace

TEST_CASE("model round trip predicts identically") {
  for (bool head : {false, true}) {
    const SalModel m = sample_model(head);
    const auto path = (std::filesystem::temp_directory_path() / "sal_model_rt.json").string();
    save_model(m, path);
    const SalModel back = load_model(path);
    CHECK(back == m);
    SplitMix64 rng(3);
    const Matrix x = testing::random_matrix(100, 1, rng);
    CHECK(predict_batch(back, x) == predict_batch(m, x));
    CHECK(model_to_json(back) == read_text_file(path));
    std::filesystem::remove(path);
  }
}

TEST_CASE("batched and pointwise evaluation agree") {
  const SalModel m = sample_model(true);
  const Matrix x{{0.1}, {-0.4}};
  const Matrix y = predict_batch(m, x);
  const auto p = model_predict(m, std::vector<double>{-0.4});
  CHECK(p[0] == doctest::Approx(y(1, 0)).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(y(1, 1)).epsilon(1e-14));
  Matrix sum = mlp_forward(*m.hybrid_head, x);
  for (std::size_t k = 1; k <= 3; ++k) sum += component_batch(m, k, x);
  CHECK(testing::rel_diff(sum, y) <= 1e-15);
}

TEST_CASE("mlp round trip") {
  SplitMix64 rng(4);
  MlpShape s;
  s.hidden = {3, 3};
  s.hidden_activations = {Activation::sincos_half(), Activation::relu()};
  const MlpParams p = he_init(s, rng);
  CHECK(mlp_from_json(mlp_to_json(p)) == p);
}

TEST_CASE("numbers are written with 17 significant digits") {
  ordered_json j;
  j["x"] = 0.1;
  j["v"] = {1.0, 2.5};
  const std::string s = dump_json(j);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("[1, 2.5]") != std::string::npos);
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_WITH_AS(parse_json_strict("{\"a\": 1, \"a\": 2}", "doc"), doctest::Contains("duplicate key"), Error);
  CHECK_THROWS_WITH_AS(parse_json_strict("{\n  \"a\": [1,\n  }", "doc"), doctest::Contains("doc:"), Error);
  const std::string good = model_to_json(sample_model(false));
  std::string bad = good;
  bad.replace(bad.find("\"format_version\": 1"), 19, "\"format_version\": 9");
  CHECK_THROWS_WITH_AS(model_from_json(bad), doctest::Contains("format_version"), Error);
  std::string missing = good;
  missing.replace(missing.find("\"mu\""), 4, "\"nu\"");
  CHECK_THROWS_WITH_AS(model_from_json(missing), doctest::Contains("mu"), Error);
}

TEST_CASE("validation rejects inconsistent grades") {
  SalModel m = sample_model(false);
  m.grades[1].bias.pop_back();
  CHECK_THROWS_AS(m.validate(), ShapeError);
  SalModel two_d = sample_model(false);
  two_d.input_dim = 2;
  two_d.grades[0].weight = Matrix(4, 2);
  CHECK_THROWS_AS(two_d.validate(), Error);
}
