#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "incident/classifiers.hpp"
#include "incident/data_model.hpp"

namespace incident {

// Positive class is fall = 1.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

// (TP + TN) / total.
double accuracy(const ConfusionMatrix& cm);

// TP / (TP + FN); throws UndefinedMetricError when no positives were evaluated.
double recall(const ConfusionMatrix& cm);

struct Precision {
  double value = 0.0;
  bool degenerate = false;  // the model predicted no positives
};

// TP / (TP + FP), or 0 flagged degenerate when TP + FP = 0.
Precision precision(const ConfusionMatrix& cm);

struct MetricRecord {
  std::optional<double> accuracy_train;  // unset when only the test side was scored
  double accuracy_test = 0.0;
  double recall_test = 0.0;
  Precision precision_test;
  ConfusionMatrix cm_test;
};

MetricRecord evaluate(const TrainedModel& model, const SplitPair& split);

// Same record from predictions already made, for callers that batch
// predictions (the k-NN sweep).
MetricRecord evaluate_predictions(std::span<const std::uint8_t> train_predicted,
                                  const Dataset& train, std::span<const std::uint8_t> test_predicted,
                                  const Dataset& test);

// Test-side metrics only; leaves accuracy_train unset.
MetricRecord evaluate_test_predictions(std::span<const std::uint8_t> test_predicted,
                                       const Dataset& test);

}  // namespace incident
