#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "incident/classifiers.hpp"
#include "incident/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace incident;
using incident::testing::make_dataset;
using incident::testing::random_dataset;

namespace {

double train_accuracy(const TrainedModel& m, const Dataset& d) {
  auto p = predict_batch(m, d);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) hits += p[i] == d.label(i);
  return static_cast<double>(hits) / static_cast<double>(d.rows());
}

// 20 points, 10 per class, every point at least margin 1 from x + y = 0
// under the unit-norm direction (1,1)/sqrt(2).
Dataset margin_fixture() {
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;
  const double offsets[10][2] = {{1.0, 1.0}, {2.0, 0.5}, {0.5, 2.5}, {3.0, 1.0}, {1.5, 1.5},
                                 {2.5, 2.5}, {0.8, 3.2}, {4.0, 0.2}, {1.2, 2.0}, {3.5, 3.0}};
  for (const auto& o : offsets) {
    rows.push_back({o[0], o[1]});
    labels.push_back(1);
    rows.push_back({-o[1], -o[0]});
    labels.push_back(0);
  }
  return make_dataset(rows, labels);
}

Dataset with_zero_column(const Dataset& d) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    auto r = testing::row_vector(d, i);
    r.push_back(0.0);
    rows.push_back(r);
  }
  std::vector<std::uint8_t> labels(d.labels().begin(), d.labels().end());
  return make_dataset(rows, labels);
}

}  // namespace

TEST_SUITE("classifiers") {

TEST_CASE("algorithm names and hyperparameter validation") {
  CHECK(parse_algorithm("svm") == Algorithm::Svm);
  CHECK(parse_algorithm("logreg") == Algorithm::LogReg);
  CHECK(parse_algorithm("gbm") == Algorithm::Gbm);
  CHECK(parse_algorithm("knn") == Algorithm::Knn);
  CHECK_THROWS_AS(parse_algorithm("rf"), ArgumentError);
  Hyperparams hp;
  CHECK_NOTHROW(hp.validate());
  hp.knn.k = 5;
  CHECK_THROWS_AS(hp.validate(), ArgumentError);
  hp = Hyperparams{};
  hp.gbm.learning_rate = 0.0;
  CHECK_THROWS_AS(hp.validate(), ArgumentError);
  hp = Hyperparams{};
  hp.svm.lambda = -1.0;
  CHECK_THROWS_AS(hp.validate(), ArgumentError);
}

TEST_CASE("defaults") {
  Hyperparams hp;
  CHECK_FALSE(hp.svm.lambda.has_value());
  CHECK(hp.svm.epochs == 1000);
  CHECK(hp.logreg.lambda == 1.0);
  CHECK(hp.logreg.tolerance == 1e-8);
  CHECK(hp.logreg.max_iterations == 100);
  CHECK(hp.gbm.stages == 100);
  CHECK(hp.gbm.learning_rate == 0.1);
  CHECK(hp.gbm.max_depth == 3);
  CHECK(hp.gbm.min_rows_per_leaf == 2);
}

TEST_CASE("svm separates a pair and the margin fixture") {
  Dataset pair = make_dataset({{-1.0}, {1.0}}, {0, 1});
  auto m = train_svm_linear(pair, Hyperparams{}, 1);
  CHECK(predict_batch(m, pair) == std::vector<std::uint8_t>{0, 1});

  Dataset d = margin_fixture();
  auto svm = train_svm_linear(d, Hyperparams{}, 7);
  CHECK(train_accuracy(svm, d) == 1.0);
  const auto& params = std::get<LinearParams>(svm.params());
  double lambda = *svm.hyperparams().svm.lambda;
  CHECK(lambda == doctest::Approx(1.0 / 20));
  CHECK(svm_objective(d, params, lambda) <= svm_objective(d, LinearParams{{0.0, 0.0}, 0.0}, lambda));
}

TEST_CASE("svm rejects a single class") {
  CHECK_THROWS_AS(train_svm_linear(make_dataset({{1}, {2}}, {1, 1}), Hyperparams{}, 1), DegenerateClassError);
}

TEST_CASE("svm final objective does not exceed the initial one on random data") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d = random_dataset(rng, 15, 25, 3);
    Hyperparams hp;
    hp.svm.epochs = 50;
    auto m = train_svm_linear(d, hp, trial);
    double lambda = *m.hyperparams().svm.lambda;
    CHECK(svm_objective(d, std::get<LinearParams>(m.params()), lambda) <=
          svm_objective(d, LinearParams{{0, 0, 0}, 0.0}, lambda));
  }
}

TEST_CASE("logreg matches the grid oracle on small fixtures") {
  struct Fixture {
    Dataset data;
    double lambda;
  };
  std::vector<Fixture> fixtures{
      {make_dataset({{-1.0}, {0.5}, {1.0}, {2.0}}, {0, 1, 0, 1}), 1.0},
      {make_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 0, 1, 1}), 1.0},
      {make_dataset({{3.0}, {-2.0}, {0.5}, {-0.5}}, {1, 0, 0, 1}), 0.5},
  };
  for (const auto& f : fixtures) {
    Hyperparams hp;
    hp.logreg.lambda = f.lambda;
    auto m = train_logreg(f.data, hp);
    const auto& p = std::get<LinearParams>(m.params());
    double ours = oracle::logreg_loss(f.data, p.weights, p.intercept, f.lambda);
    double best = oracle::logreg_grid_optimum(f.data, f.lambda);
    CHECK(std::abs(ours - best) <= 1e-6);
    CHECK(logreg_objective(f.data, p, f.lambda) == doctest::Approx(ours).epsilon(1e-12));
  }
}

TEST_CASE("logreg gradient matches central differences") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d = random_dataset(rng, 6, 9, 3, 1);
    LinearParams p{{uniform_unit(rng) - 0.5, uniform_unit(rng) - 0.5, uniform_unit(rng) - 0.5, uniform_unit(rng)},
                   uniform_unit(rng) - 0.5};
    double lambda = 0.3 + uniform_unit(rng);
    auto grad = logreg_gradient(d, p, lambda);
    REQUIRE(grad.size() == 5);
    const double h = 1e-6;
    double diff_sq = 0.0, norm_sq = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      LinearParams up = p, down = p;
      (j < 4 ? up.weights[j] : up.intercept) += h;
      (j < 4 ? down.weights[j] : down.intercept) -= h;
      double numeric = (oracle::logreg_loss(d, up.weights, up.intercept, lambda) -
                        oracle::logreg_loss(d, down.weights, down.intercept, lambda)) /
                       (2 * h);
      diff_sq += (numeric - grad[j]) * (numeric - grad[j]);
      norm_sq += grad[j] * grad[j];
    }
    CHECK(std::sqrt(diff_sq) <= 1e-5 * std::sqrt(norm_sq));
  }
}

TEST_CASE("logreg optimum has a small gradient and symmetric data gives zero intercept") {
  Dataset d = make_dataset({{1.0}, {2.0}, {0.5}, {-1.0}, {-2.0}, {-0.5}, {0.2}, {-0.2}}, {1, 1, 1, 0, 0, 0, 0, 1});
  auto m = train_logreg(d, Hyperparams{});
  const auto& p = std::get<LinearParams>(m.params());
  double norm = 0.0;
  for (double g : logreg_gradient(d, p, 1.0)) norm += g * g;
  CHECK(std::sqrt(norm) <= 1e-8);

  Dataset mirror = make_dataset({{0.5}, {1.5}, {3.0}, {-0.5}, {-1.5}, {-3.0}}, {1, 1, 1, 0, 0, 0});
  auto sym = train_logreg(mirror, Hyperparams{});
  CHECK(std::abs(std::get<LinearParams>(sym.params()).intercept) <= 1e-6);
}

TEST_CASE("logreg errors") {
  CHECK_THROWS_AS(train_logreg(make_dataset({{1}, {2}}, {1, 1}), Hyperparams{}), DegenerateClassError);
  Hyperparams hp;
  hp.logreg.max_iterations = 1;
  Dataset d = make_dataset({{-1.0}, {0.5}, {1.0}, {2.0}}, {0, 1, 0, 1});
  try {
    train_logreg(d, hp);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.gradient_norm() > hp.logreg.tolerance);
  }
}

TEST_CASE("gbm base score is the training log-odds") {
  Rng rng(41);
  Dataset d = random_dataset(rng, 7, 13, 2);
  Hyperparams hp;
  hp.gbm.stages = 0;
  auto m = train_gbm(d, hp);
  const auto& e = std::get<TreeEnsemble>(m.params());
  CHECK(e.base_score == std::log(7.0 / 13.0));
  CHECK(e.base_score == doctest::Approx(std::log(0.35 / 0.65)).epsilon(1e-14));
  CHECK(e.trees.empty());
  for (auto p : predict_batch(m, d)) CHECK(p == 0);

  Dataset balanced = random_dataset(rng, 9, 9, 2);
  CHECK(std::get<TreeEnsemble>(train_gbm(balanced, Hyperparams{}).params()).base_score == 0.0);
}

TEST_CASE("gbm stage-one split matches the brute-force oracle") {
  Rng rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 30; ++i) {
      rows.push_back({uniform_unit(rng) * 10, uniform_unit(rng) * 10, uniform_unit(rng)});
      labels.push_back(rows.back()[0] + 3 * uniform_unit(rng) > 6.5 ? 1 : 0);
    }
    if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
    if (std::count(labels.begin(), labels.end(), 0) == 0) labels[0] = 0;
    Dataset d = make_dataset(rows, labels);
    Hyperparams hp;
    hp.gbm.stages = 1;
    hp.gbm.max_depth = 1;
    auto m = train_gbm(d, hp);
    const auto& e = std::get<TreeEnsemble>(m.params());
    double p0 = 1.0 / (1.0 + std::exp(-e.base_score));
    std::vector<double> residual;
    for (std::size_t i = 0; i < d.rows(); ++i) residual.push_back(d.label(i) - p0);
    auto expected = oracle::brute_force_split(d, residual, hp.gbm.min_rows_per_leaf);
    const auto& root = e.trees.at(0).nodes.at(0);
    CHECK(root.feature == expected.feature);
    CHECK(root.threshold == expected.threshold);
    auto choice = best_root_split(d, residual, hp.gbm.min_rows_per_leaf);
    CHECK(choice.feature == expected.feature);
    CHECK(choice.threshold == expected.threshold);
    CHECK(choice.gain == doctest::Approx(expected.gain).epsilon(1e-9));
  }
}

TEST_CASE("gbm fits a threshold-separable line") {
  Dataset d = make_dataset({{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}}, {0, 0, 0, 0, 1, 1, 1, 1});
  Hyperparams hp;
  hp.gbm.stages = 10;
  hp.gbm.max_depth = 1;
  auto m = train_gbm(d, hp);
  CHECK(train_accuracy(m, d) == 1.0);
  const auto& root = std::get<TreeEnsemble>(m.params()).trees.at(0).nodes.at(0);
  CHECK(root.threshold == 4.5);
}

TEST_CASE("gbm training log-loss never increases stage over stage") {
  Rng rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    Dataset d = random_dataset(rng, 30, 50, 3, 2);
    Hyperparams hp;
    hp.gbm.stages = 30;
    auto m = train_gbm(d, hp);
    TreeEnsemble partial = std::get<TreeEnsemble>(m.params());
    auto trees = partial.trees;
    partial.trees.clear();
    double previous = mean_log_loss(d, partial);
    for (const auto& tree : trees) {
      partial.trees.push_back(tree);
      double current = mean_log_loss(d, partial);
      CHECK(current <= previous + 1e-12);
      previous = current;
    }
  }
}

TEST_CASE("knn matches the exhaustive scan") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 8 + uniform_index(rng, 25);
    std::size_t pos = 1 + uniform_index(rng, n - 1);
    Dataset train = random_dataset(rng, pos, n - pos, 1 + uniform_index(rng, 3), 0, 2);
    Dataset queries = random_dataset(rng, 3, 3, train.width(), 0, 2);
    Dataset q(train.schema_ptr(), std::vector<double>(queries.values().begin(), queries.values().end()),
              std::vector<std::uint8_t>(queries.labels().begin(), queries.labels().end()));
    for (std::size_t k = 1; k <= 4; ++k) {
      Hyperparams hp;
      hp.knn.k = k;
      auto m = train_knn(train, hp);
      auto got = predict_batch(m, q);
      for (std::size_t i = 0; i < q.rows(); ++i) CHECK(got[i] == oracle::knn_predict(train, q.row(i), k));
    }
    Hyperparams hp;
    hp.knn.k = 4;
    auto sweep = predict_knn_sweep(train_knn(train, hp), q, 4);
    for (std::size_t k = 1; k <= 4; ++k) {
      for (std::size_t i = 0; i < q.rows(); ++i) CHECK(sweep[k - 1][i] == oracle::knn_predict(train, q.row(i), k));
    }
  }
}

TEST_CASE("knn tie rules") {
  // Query at 0: nearest is label 1 at distance 1, then label 0 at distance 2.
  Dataset d = make_dataset({{2.0}, {1.0}, {5.0}}, {0, 1, 0});
  Hyperparams hp;
  hp.knn.k = 2;
  auto m = train_knn(d, hp);
  Dataset q(d.schema_ptr(), {0.0}, {0});
  CHECK(predict_batch(m, q)[0] == 1);
  // Equal distances: the lower row index is nearer.
  Dataset tie = make_dataset({{1.0}, {-1.0}}, {0, 1});
  hp.knn.k = 1;
  Dataset q2(tie.schema_ptr(), {0.0}, {0});
  CHECK(predict_batch(train_knn(tie, hp), q2)[0] == 0);
}

TEST_CASE("knn with k=1 reproduces its training labels") {
  Rng rng(59);
  Dataset d = random_dataset(rng, 20, 30, 4, 0, 1000000);
  auto m = train_knn(d, Hyperparams{});
  auto p = predict_batch(m, d);
  CHECK(std::equal(p.begin(), p.end(), d.labels().begin()));
  Hyperparams hp;
  hp.knn.k = 3;
  CHECK_THROWS_AS(train_knn(make_dataset({{1}, {2}}, {0, 1}), hp), ArgumentError);
}

TEST_CASE("predict_batch contracts") {
  Rng rng(61);
  Dataset d = random_dataset(rng, 10, 10, 2);
  for (Algorithm a : {Algorithm::Svm, Algorithm::LogReg, Algorithm::Gbm, Algorithm::Knn}) {
    auto m = train(a, d, Hyperparams{}, 3);
    auto p = predict_batch(m, d);
    CHECK(p.size() == d.rows());
    for (auto v : p) CHECK(v <= 1);
    CHECK(predict_batch(m, Dataset(d.schema_ptr())).empty());
    Dataset other = random_dataset(rng, 2, 2, 3);
    CHECK_THROWS_AS(predict_batch(m, other), SchemaError);
  }
}

TEST_CASE("training is deterministic and a zero column changes no prediction") {
  Rng rng(67);
  Dataset d = random_dataset(rng, 25, 35, 3, 1);
  Dataset padded = with_zero_column(d);
  for (Algorithm a : {Algorithm::Svm, Algorithm::LogReg, Algorithm::Gbm, Algorithm::Knn}) {
    Hyperparams hp;
    hp.svm.epochs = 100;
    hp.knn.k = 3;
    auto m1 = train(a, d, hp, 5);
    auto m2 = train(a, d, hp, 5);
    CHECK(m1.to_json() == m2.to_json());
    auto m3 = train(a, padded, hp, 5);
    CHECK(predict_batch(m1, d) == predict_batch(m3, padded));
  }
}

TEST_CASE("model files round trip") {
  Rng rng(71);
  Dataset d = random_dataset(rng, 12, 12, 2, 1);
  auto path = std::filesystem::temp_directory_path() / "incident_model.json";
  for (Algorithm a : {Algorithm::Svm, Algorithm::LogReg, Algorithm::Gbm, Algorithm::Knn}) {
    auto m = train(a, d, Hyperparams{}, 9);
    save_model(m, path);
    auto back = load_model(path);
    CHECK(back.id() == m.id());
    CHECK(predict_batch(back, d) == predict_batch(m, d));
  }
  std::filesystem::remove(path);
}

}  // TEST_SUITE
