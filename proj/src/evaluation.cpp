#include "incident/evaluation.hpp"

#include "incident/errors.hpp"

namespace incident {

ConfusionMatrix confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) {
    throw ArgumentError("prediction length " + std::to_string(predicted.size()) +
                        " differs from label length " + std::to_string(actual.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (actual[i]) {
      (predicted[i] ? cm.tp : cm.fn) += 1;
    } else {
      (predicted[i] ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw UndefinedMetricError("accuracy of an empty evaluation");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double recall(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) throw UndefinedMetricError("recall with no positive rows evaluated");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

Precision precision(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fp == 0) return {0.0, true};
  return {static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp), false};
}

MetricRecord evaluate_test_predictions(std::span<const std::uint8_t> test_predicted,
                                       const Dataset& test) {
  MetricRecord record;
  record.cm_test = confusion(test_predicted, test.labels());
  record.accuracy_test = accuracy(record.cm_test);
  record.recall_test = recall(record.cm_test);
  record.precision_test = precision(record.cm_test);
  return record;
}

MetricRecord evaluate_predictions(std::span<const std::uint8_t> train_predicted,
                                  const Dataset& train, std::span<const std::uint8_t> test_predicted,
                                  const Dataset& test) {
  MetricRecord record = evaluate_test_predictions(test_predicted, test);
  record.accuracy_train = accuracy(confusion(train_predicted, train.labels()));
  return record;
}

MetricRecord evaluate(const TrainedModel& model, const SplitPair& split) {
  return evaluate_predictions(predict_batch(model, split.train), split.train,
                              predict_batch(model, split.test), split.test);
}

}  // namespace incident
