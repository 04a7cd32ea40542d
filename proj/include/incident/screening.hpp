#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "incident/classifiers.hpp"
#include "incident/data_model.hpp"

namespace incident {

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // constant values or labels; value reported as 0
};

// Pearson correlation between a variable and a 0/1 label.
Correlation point_biserial(std::span<const double> values, std::span<const std::uint8_t> labels);

struct ClassConditionalStats {
  double mean_all = 0.0;
  double median_all = 0.0;
  double mean_fall = 0.0;
  double median_fall = 0.0;
  double mean_nofall = 0.0;
  double median_nofall = 0.0;
};

// Medians of even-sized samples average the two central order statistics.
ClassConditionalStats class_conditional_stats(std::span<const double> values,
                                              std::span<const std::uint8_t> labels);

enum class ScreenResample { Rus, None };
ScreenResample parse_screen_resample(std::string_view text);

struct ScreeningOptions {
  std::vector<Algorithm> algorithms{Algorithm::Svm, Algorithm::LogReg, Algorithm::Gbm, Algorithm::Knn};
  Hyperparams hyperparams;
  double train_fraction = 0.9;
  ScreenResample resample = ScreenResample::Rus;
  std::size_t knn_max_k = 4;  // k-NN contributes one model per k in 1..knn_max_k
};

struct ScreeningRow {
  std::string variable;
  double recall = 0.0;
  double precision = 0.0;
  std::string recall_model;     // model that achieved `recall`
  std::string precision_model;  // may differ from recall_model
  Correlation correlation;
  ClassConditionalStats stats;
  bool degenerate = false;  // constant column, or every model predicted a single class
};

// Single-column model screening. `column` names one encoded column: a
// numeric or binary variable, or one level indicator such as "dept=B".
// Split and models use the minority-first 90/10 split with (by default) an
// undersampled training half; statistics and correlation use all rows.
ScreeningRow screen_variable(const Dataset& data, std::string_view column,
                             const ScreeningOptions& options, std::uint64_t seed);

// Rows with recall > 0.8 and precision > 0.013, input order kept.
std::vector<ScreeningRow> guideline_filter(std::span<const ScreeningRow> rows);

inline constexpr double kGuidelineRecall = 0.8;
inline constexpr double kGuidelinePrecision = 0.013;

}  // namespace incident
