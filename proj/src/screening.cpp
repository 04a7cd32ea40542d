#include "incident/screening.hpp"

#include <algorithm>
#include <functional>
#include <cmath>

#include "incident/errors.hpp"
#include "incident/evaluation.hpp"
#include "incident/resampling.hpp"
#include "incident/rng.hpp"

namespace incident {

namespace {

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  double upper = *mid;
  if (n % 2 == 1) return upper;
  double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

std::size_t find_column(const Schema& schema, std::string_view column) {
  const auto& cols = schema.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].name == column) return j;
  }
  throw ArgumentError("unknown variable '" + std::string(column) + "'");
}

}  // namespace

Correlation point_biserial(std::span<const double> values, std::span<const std::uint8_t> labels) {
  if (values.size() != labels.size()) throw ArgumentError("values and labels differ in length");
  if (values.size() < 2) throw ArgumentError("correlation needs at least two observations");
  const double n = static_cast<double>(values.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    mx += values[i];
    my += labels[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double dx = values[i] - mx;
    double dy = labels[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  double r = sxy / std::sqrt(sxx * syy);
  return {std::clamp(r, -1.0, 1.0), false};
}

ClassConditionalStats class_conditional_stats(std::span<const double> values,
                                              std::span<const std::uint8_t> labels) {
  if (values.size() != labels.size()) throw ArgumentError("values and labels differ in length");
  std::vector<double> fall;
  std::vector<double> nofall;
  for (std::size_t i = 0; i < values.size(); ++i) (labels[i] ? fall : nofall).push_back(values[i]);
  if (fall.empty() || nofall.empty()) {
    throw DegenerateClassError("class-conditional statistics need both classes present");
  }
  ClassConditionalStats stats;
  stats.mean_all = mean_of(values);
  stats.median_all = median_of({values.begin(), values.end()});
  stats.mean_fall = mean_of(fall);
  stats.median_fall = median_of(fall);
  stats.mean_nofall = mean_of(nofall);
  stats.median_nofall = median_of(nofall);
  return stats;
}

ScreenResample parse_screen_resample(std::string_view text) {
  if (text == "rus") return ScreenResample::Rus;
  if (text == "none") return ScreenResample::None;
  throw ArgumentError("screen resampling must be 'rus' or 'none', got '" + std::string(text) + "'");
}

ScreeningRow screen_variable(const Dataset& data, std::string_view column,
                             const ScreeningOptions& options, std::uint64_t seed) {
  const auto& schema = data.schema();
  const std::size_t j = find_column(schema, column);
  const auto& col = schema.columns()[j];

  VariableSpec spec{col.name, col.indicator ? VariableKind::Binary : VariableKind::Numeric, {}, {}};
  auto single = std::make_shared<const Schema>(std::vector<VariableSpec>{spec}, schema.label_name());
  std::vector<double> values = data.column(j);
  std::vector<std::uint8_t> labels(data.labels().begin(), data.labels().end());
  Dataset one_column(single, values, labels);

  ScreeningRow row;
  row.variable = col.name;
  row.stats = class_conditional_stats(values, labels);
  row.correlation = point_biserial(values, labels);

  auto split = split_minority_first(one_column, options.train_fraction, derive_seed(seed, "split"));
  Dataset train = split.train();
  if (options.resample == ScreenResample::Rus) train = undersample(train, derive_seed(seed, "rus"));
  const Dataset test = split.test();

  struct Scored {
    std::string id;
    MetricRecord metrics;
    bool constant;
  };
  std::vector<Scored> scored;
  auto record = [&](const std::string& id, std::span<const std::uint8_t> predicted) {
    bool constant = std::adjacent_find(predicted.begin(), predicted.end(), std::not_equal_to<>()) ==
                    predicted.end();
    scored.push_back({id, evaluate_test_predictions(predicted, test), constant});
  };

  for (Algorithm algorithm : options.algorithms) {
    if (algorithm == Algorithm::Knn) {
      Hyperparams hp = options.hyperparams;
      hp.knn.k = std::min<std::size_t>(options.knn_max_k, train.rows());
      auto model = train_knn(train, hp);
      auto sweep = predict_knn_sweep(model, test, hp.knn.k);
      for (std::size_t k = 1; k <= sweep.size(); ++k) record("knn:" + std::to_string(k), sweep[k - 1]);
      continue;
    }
    try {
      auto model = incident::train(algorithm, train, options.hyperparams,
                                   derive_seed(seed, to_string(algorithm)));
      record(model.id(), predict_batch(model, test));
    } catch (const ConvergenceError&) {
      // A single-variable fit that cannot converge contributes no model.
    }
  }
  // A model that gives every test row the same label has no capacity to
  // predict; it competes only when no model does better than that.
  const bool informative =
      std::any_of(scored.begin(), scored.end(), [](const Scored& s) { return !s.constant; });
  bool have_recall = false;
  bool have_precision = false;
  for (const auto& s : scored) {
    if (informative && s.constant) continue;
    if (!have_recall || s.metrics.recall_test > row.recall) {
      row.recall = s.metrics.recall_test;
      row.recall_model = s.id;
      have_recall = true;
    }
    if (!s.metrics.precision_test.degenerate &&
        (!have_precision || s.metrics.precision_test.value > row.precision)) {
      row.precision = s.metrics.precision_test.value;
      row.precision_model = s.id;
      have_precision = true;
    }
  }
  row.degenerate = row.correlation.degenerate || !informative;
  return row;
}

std::vector<ScreeningRow> guideline_filter(std::span<const ScreeningRow> rows) {
  std::vector<ScreeningRow> kept;
  for (const auto& row : rows) {
    if (row.recall > kGuidelineRecall && row.precision > kGuidelinePrecision) kept.push_back(row);
  }
  return kept;
}

}  // namespace incident
