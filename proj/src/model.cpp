#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "incident/classifiers.hpp"
#include "incident/errors.hpp"
#include "incident/parallel.hpp"
#include "knn_detail.hpp"

namespace incident {

namespace {

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormat = "incident-bench-model";

nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
  nlohmann::json svm = {{"epochs", hp.svm.epochs}};
  svm["lambda"] = hp.svm.lambda ? nlohmann::json(*hp.svm.lambda) : nlohmann::json(nullptr);
  return {
      {"svm", svm},
      {"logreg",
       {{"lambda", hp.logreg.lambda},
        {"tolerance", hp.logreg.tolerance},
        {"max_iterations", hp.logreg.max_iterations}}},
      {"gbm",
       {{"stages", hp.gbm.stages},
        {"learning_rate", hp.gbm.learning_rate},
        {"max_depth", hp.gbm.max_depth},
        {"min_rows_per_leaf", hp.gbm.min_rows_per_leaf}}},
      {"knn", {{"k", hp.knn.k}}},
  };
}

Hyperparams hyperparams_from_json(const nlohmann::json& doc) {
  Hyperparams hp;
  const auto& svm = doc.at("svm");
  if (!svm.at("lambda").is_null()) hp.svm.lambda = svm.at("lambda").get<double>();
  hp.svm.epochs = svm.at("epochs").get<std::size_t>();
  const auto& lr = doc.at("logreg");
  hp.logreg.lambda = lr.at("lambda").get<double>();
  hp.logreg.tolerance = lr.at("tolerance").get<double>();
  hp.logreg.max_iterations = lr.at("max_iterations").get<std::size_t>();
  const auto& gbm = doc.at("gbm");
  hp.gbm.stages = gbm.at("stages").get<std::size_t>();
  hp.gbm.learning_rate = gbm.at("learning_rate").get<double>();
  hp.gbm.max_depth = gbm.at("max_depth").get<std::size_t>();
  hp.gbm.min_rows_per_leaf = gbm.at("min_rows_per_leaf").get<std::size_t>();
  hp.knn.k = doc.at("knn").at("k").get<std::size_t>();
  return hp;
}

nlohmann::json params_to_json(const ModelParams& params) {
  if (const auto* linear = std::get_if<LinearParams>(&params)) {
    return {{"weights", linear->weights}, {"intercept", linear->intercept}};
  }
  if (const auto* ensemble = std::get_if<TreeEnsemble>(&params)) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : ensemble->trees) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& node : tree.nodes) {
        nodes.push_back({node.feature, node.threshold, node.left, node.right, node.value});
      }
      trees.push_back(std::move(nodes));
    }
    return {{"base_score", ensemble->base_score},
            {"learning_rate", ensemble->learning_rate},
            {"trees", std::move(trees)}};
  }
  const auto& store = std::get<NeighborStore>(params);
  return {{"k", store.k}, {"width", store.width}, {"rows", store.rows}, {"labels", store.labels}};
}

ModelParams params_from_json(Algorithm algorithm, const nlohmann::json& doc) {
  switch (algorithm) {
    case Algorithm::Svm:
    case Algorithm::LogReg:
      return LinearParams{doc.at("weights").get<std::vector<double>>(),
                          doc.at("intercept").get<double>()};
    case Algorithm::Gbm: {
      TreeEnsemble ensemble;
      ensemble.base_score = doc.at("base_score").get<double>();
      ensemble.learning_rate = doc.at("learning_rate").get<double>();
      for (const auto& nodes : doc.at("trees")) {
        RegressionTree tree;
        for (const auto& n : nodes) {
          tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                                n.at(3).get<int>(), n.at(4).get<double>()});
        }
        ensemble.trees.push_back(std::move(tree));
      }
      return ensemble;
    }
    case Algorithm::Knn: {
      NeighborStore store;
      store.k = doc.at("k").get<std::size_t>();
      store.width = doc.at("width").get<std::size_t>();
      store.rows = doc.at("rows").get<std::vector<double>>();
      store.labels = doc.at("labels").get<std::vector<std::uint8_t>>();
      if (store.rows.size() != store.labels.size() * store.width) {
        throw ValueError("k-NN store size does not match its width");
      }
      return store;
    }
  }
  throw ValueError("unknown algorithm");
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Svm:
      return "svm";
    case Algorithm::LogReg:
      return "logreg";
    case Algorithm::Gbm:
      return "gbm";
    case Algorithm::Knn:
      return "knn";
  }
  return "svm";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "svm") return Algorithm::Svm;
  if (text == "logreg") return Algorithm::LogReg;
  if (text == "gbm") return Algorithm::Gbm;
  if (text == "knn") return Algorithm::Knn;
  throw ArgumentError("unknown algorithm '" + std::string(text) + "'");
}

void Hyperparams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ArgumentError(what);
  };
  require(!svm.lambda || *svm.lambda > 0.0, "svm lambda must be positive");
  require(svm.epochs >= 1, "svm epochs must be at least 1");
  require(logreg.lambda > 0.0, "logreg lambda must be positive");
  require(logreg.tolerance > 0.0, "logreg tolerance must be positive");
  require(logreg.max_iterations >= 1, "logreg max iterations must be at least 1");
  require(gbm.learning_rate > 0.0, "gbm learning rate must be positive");
  require(gbm.max_depth >= 1, "gbm max depth must be at least 1");
  require(gbm.min_rows_per_leaf >= 1, "gbm min rows per leaf must be at least 1");
  require(knn.k >= 1 && knn.k <= 4, "knn k must lie in 1..4");
}

double LinearParams::score(std::span<const double> x) const {
  double z = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
  return z;
}

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  int at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[at].value;
}

double TreeEnsemble::log_odds(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return base_score + learning_rate * sum;
}

TrainedModel::TrainedModel(Algorithm algorithm, Hyperparams hyperparams,
                           std::uint64_t schema_fingerprint, std::vector<std::string> columns,
                           ModelParams params)
    : algorithm_(algorithm),
      hyperparams_(std::move(hyperparams)),
      schema_fingerprint_(schema_fingerprint),
      columns_(std::move(columns)),
      params_(std::move(params)) {
  bool knn = algorithm_ == Algorithm::Knn;
  if (knn != std::holds_alternative<NeighborStore>(params_) ||
      (algorithm_ == Algorithm::Gbm) != std::holds_alternative<TreeEnsemble>(params_)) {
    throw ArgumentError("model parameters do not match algorithm " +
                        std::string(to_string(algorithm_)));
  }
}

double TrainedModel::decision_value(std::span<const double> x) const {
  if (const auto* linear = std::get_if<LinearParams>(&params_)) return linear->score(x);
  if (const auto* ensemble = std::get_if<TreeEnsemble>(&params_)) return ensemble->log_odds(x);
  throw ArgumentError("k-NN models have no decision value");
}

std::string TrainedModel::id() const {
  std::string name(to_string(algorithm_));
  if (const auto* store = std::get_if<NeighborStore>(&params_)) name += ":" + std::to_string(store->k);
  return name;
}

nlohmann::json TrainedModel::to_json() const {
  return {{"format", kModelFormat},
          {"version", kModelFormatVersion},
          {"algorithm", std::string(to_string(algorithm_))},
          {"hyperparams", hyperparams_to_json(hyperparams_)},
          {"schema_fingerprint", fingerprint_hex(schema_fingerprint_)},
          {"columns", columns_},
          {"params", params_to_json(params_)}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) throw ValueError("not a model document");
    int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ValueError("unsupported model format version " + std::to_string(version));
    }
    Algorithm algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    auto fingerprint = std::stoull(doc.at("schema_fingerprint").get<std::string>(), nullptr, 16);
    return TrainedModel(algorithm, hyperparams_from_json(doc.at("hyperparams")), fingerprint,
                        doc.at("columns").get<std::vector<std::string>>(),
                        params_from_json(algorithm, doc.at("params")));
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path.string());
  out << model.to_json().dump() << "\n";
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());
  try {
    return TrainedModel::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValueError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
}

TrainedModel train(Algorithm algorithm, const Dataset& data, const Hyperparams& hp,
                   std::uint64_t seed) {
  switch (algorithm) {
    case Algorithm::Svm:
      return train_svm_linear(data, hp, seed);
    case Algorithm::LogReg:
      return train_logreg(data, hp);
    case Algorithm::Gbm:
      return train_gbm(data, hp);
    case Algorithm::Knn:
      return train_knn(data, hp);
  }
  throw ArgumentError("unknown algorithm");
}

std::uint8_t TrainedModel::predict(std::span<const double> x) const {
  if (const auto* store = std::get_if<NeighborStore>(&params_)) {
    return detail::knn_sweep(*store, x, store->k).back();
  }
  return decision_value(x) >= 0.0 ? 1 : 0;
}

std::vector<std::uint8_t> predict_batch(const TrainedModel& model, const Dataset& test) {
  if (test.schema().fingerprint() != model.schema_fingerprint()) {
    throw SchemaError("test data schema " + fingerprint_hex(test.schema().fingerprint()) +
                      " does not match model schema " + fingerprint_hex(model.schema_fingerprint()));
  }
  std::vector<std::uint8_t> out(test.rows());
  parallel_for(test.rows(), [&](std::size_t i) { out[i] = model.predict(test.row(i)); });
  return out;
}

std::vector<std::vector<std::uint8_t>> predict_knn_sweep(const TrainedModel& model,
                                                         const Dataset& test, std::size_t max_k) {
  const auto* store = std::get_if<NeighborStore>(&model.params());
  if (!store) throw ArgumentError("k sweep requires a k-NN model");
  if (test.schema().fingerprint() != model.schema_fingerprint()) {
    throw SchemaError("test data schema does not match model schema");
  }
  if (max_k < 1 || max_k > store->size()) {
    throw ArgumentError("k sweep bound must lie in 1..n, got " + std::to_string(max_k));
  }
  std::vector<std::vector<std::uint8_t>> out(max_k, std::vector<std::uint8_t>(test.rows()));
  parallel_for(test.rows(), [&](std::size_t i) {
    auto votes = detail::knn_sweep(*store, test.row(i), max_k);
    for (std::size_t k = 0; k < max_k; ++k) out[k][i] = votes[k];
  });
  return out;
}

}  // namespace incident
