#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incident/classifiers.hpp"
#include "incident/data_model.hpp"
#include "incident/report.hpp"
#include "incident/resampling.hpp"
#include "incident/screening.hpp"

namespace incident {

struct DataSource {
  // CSV input; used when `synth` is empty.
  std::filesystem::path data_path;
  std::filesystem::path schema_path;
  // "table-v" for the built-in profile, otherwise a profile JSON path.
  std::string synth;
  double scale = 1.0;
};

struct ExperimentConfig {
  DataSource source;
  std::uint64_t seed = 0;
  double train_fraction = 0.9;
  std::vector<Algorithm> algorithms{Algorithm::Svm, Algorithm::LogReg, Algorithm::Gbm, Algorithm::Knn};
  std::vector<ResampleStrategy> strategies{RandomUnderSample{}, StatisticalOverSample{}, Smote{5}};
  Hyperparams hyperparams;
  std::size_t knn_max_k = 4;
  // Experiment 1: split 90/10 per class first, then undersample the
  // training half only. Default follows the undersample-then-split order.
  bool split_first = false;
  ScreenResample screen_resample = ScreenResample::Rus;
  // Experiment 3 subset of encoded column names; empty screens every column.
  std::vector<std::string> variables;

  void validate() const;
};

Dataset load_data(const DataSource& source, std::uint64_t seed);

// Undersample, split 90/10, train every algorithm; Table I columns.
Report run_experiment1(const ExperimentConfig& config, const Dataset& data);

// One minority-first split, then per strategy: resample the training half,
// train, score on the shared untouched test set; Table II-IV columns plus a
// mean row. One report per strategy, in configuration order.
std::vector<Report> run_experiment2(const ExperimentConfig& config, const Dataset& data);

// Per-column screening. Returns {guideline-selected rows, all rows, the
// model ids behind each row's recall and precision}; the first two use the
// Table V columns.
std::vector<Report> run_experiment3(const ExperimentConfig& config, const Dataset& data);

}  // namespace incident
