#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "incident/data_model.hpp"

namespace incident {

enum class Algorithm { Svm, LogReg, Gbm, Knn };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

struct SvmParams {
  std::optional<double> lambda;  // unset: 1/n of the training set
  std::size_t epochs = 1000;
};

struct LogRegParams {
  double lambda = 1.0;
  double tolerance = 1e-8;
  std::size_t max_iterations = 100;
};

struct GbmParams {
  std::size_t stages = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_rows_per_leaf = 2;
};

struct KnnParams {
  std::size_t k = 1;
};

struct Hyperparams {
  SvmParams svm;
  LogRegParams logreg;
  GbmParams gbm;
  KnnParams knn;

  // Throws ArgumentError when a count is zero, a rate is not positive, or
  // the k-NN neighbor count leaves 1..4.
  void validate() const;
};

// w.x + b; used by both linear classifiers.
struct LinearParams {
  std::vector<double> weights;
  double intercept = 0.0;

  double score(std::span<const double> x) const;
};

struct RegressionTree {
  struct Node {
    // Leaves have feature == -1; internal nodes send x[feature] <= threshold left.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
};

struct TreeEnsemble {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;

  double log_odds(std::span<const double> x) const;
};

struct NeighborStore {
  std::size_t k = 1;
  std::size_t width = 0;
  std::vector<double> rows;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

using ModelParams = std::variant<LinearParams, TreeEnsemble, NeighborStore>;

// A fitted classifier. Immutable; predictions are pure functions of the
// model and the feature vector.
class TrainedModel {
 public:
  TrainedModel(Algorithm algorithm, Hyperparams hyperparams, std::uint64_t schema_fingerprint,
               std::vector<std::string> columns, ModelParams params);

  Algorithm algorithm() const { return algorithm_; }
  const Hyperparams& hyperparams() const { return hyperparams_; }
  std::uint64_t schema_fingerprint() const { return schema_fingerprint_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const ModelParams& params() const { return params_; }

  // Signed score whose sign decides the label: the SVM margin, or the
  // log-odds for logistic regression and boosting. Not defined for k-NN.
  double decision_value(std::span<const double> x) const;
  std::uint8_t predict(std::span<const double> x) const;

  // Short identifier such as "svm" or "knn:3".
  std::string id() const;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& doc);

 private:
  Algorithm algorithm_;
  Hyperparams hyperparams_;
  std::uint64_t schema_fingerprint_;
  std::vector<std::string> columns_;
  ModelParams params_;
};

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// Pegasos-style subgradient descent on
//   lambda/2 |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b)),  y in {-1,+1},
// step 1/(lambda t), one seeded pass order per epoch, intercept unpenalized.
TrainedModel train_svm_linear(const Dataset& train, const Hyperparams& hp, std::uint64_t seed);

// Newton's method with backtracking on
//   mean_i logloss(y_i, w.x_i + b) + lambda/(2n) |w|^2,
// the sum-form objective with penalty C = 1/lambda divided by n.
// Stops when the gradient 2-norm is <= tolerance.
TrainedModel train_logreg(const Dataset& train, const Hyperparams& hp);

// Stagewise log-loss boosting of depth-limited least-squares trees fitted to
// the residuals y - p, leaves holding the mean residual.
TrainedModel train_gbm(const Dataset& train, const Hyperparams& hp);

TrainedModel train_knn(const Dataset& train, const Hyperparams& hp);

TrainedModel train(Algorithm algorithm, const Dataset& train, const Hyperparams& hp,
                   std::uint64_t seed);

std::vector<std::uint8_t> predict_batch(const TrainedModel& model, const Dataset& test);

// k-NN predictions for k = 1..max_k from one neighbor search; row k-1 of the
// result equals predict_batch of the same store trained with that k.
std::vector<std::vector<std::uint8_t>> predict_knn_sweep(const TrainedModel& model,
                                                         const Dataset& test, std::size_t max_k);

// Objective values the trainers minimize, for diagnostics and tests.
double svm_objective(const Dataset& data, const LinearParams& params, double lambda);
double logreg_objective(const Dataset& data, const LinearParams& params, double lambda);
std::vector<double> logreg_gradient(const Dataset& data, const LinearParams& params, double lambda);
double mean_log_loss(const Dataset& data, const TreeEnsemble& ensemble);

// Best single split of `target` over the columns of `data`, searched by the
// same exact-greedy routine the boosting trainer uses at its root.
struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};
SplitChoice best_root_split(const Dataset& data, std::span<const double> target,
                            std::size_t min_rows_per_leaf);

}  // namespace incident
