#include "incident/experiments.hpp"

#include <algorithm>
#include <optional>

#include "incident/errors.hpp"
#include "incident/evaluation.hpp"
#include "incident/parallel.hpp"
#include "incident/rng.hpp"
#include "incident/synth.hpp"

namespace incident {

namespace {

enum class TableStyle { Accuracy, Confusion };

std::string algorithm_label(Algorithm algorithm, TableStyle style) {
  switch (algorithm) {
    case Algorithm::Svm:
      return "Support Vector Machine";
    case Algorithm::LogReg:
      return "Logistic Regression";
    case Algorithm::Gbm:
      return style == TableStyle::Accuracy ? "Gradient Boosting Machine" : "Gradient Boost Machine";
    case Algorithm::Knn:
      return style == TableStyle::Accuracy ? "k-nearest neighbor" : "K-nearest neighbor";
  }
  return {};
}

std::string knn_label(std::size_t k, bool best, TableStyle style) {
  return algorithm_label(Algorithm::Knn, style) + " (k=" + std::to_string(k) + (best ? ", best)" : ")");
}

std::string counts_text(const ClassCounts& counts) {
  return std::to_string(counts.positives) + " falls / " + std::to_string(counts.negatives) + " no-falls";
}

struct ScoredModel {
  Algorithm algorithm;
  std::size_t k = 0;  // k-NN only
  std::optional<MetricRecord> metrics;
  std::string error;
};

// Index of the k-NN entry with the highest test recall (ties: higher test
// accuracy, then lower k).
std::optional<std::size_t> best_knn(const std::vector<ScoredModel>& scored) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& s = scored[i];
    if (s.algorithm != Algorithm::Knn || !s.metrics) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = *scored[*best].metrics;
    if (s.metrics->recall_test > b.recall_test ||
        (s.metrics->recall_test == b.recall_test && s.metrics->accuracy_test > b.accuracy_test)) {
      best = i;
    }
  }
  return best;
}

// Trains every configured algorithm on `train` and scores it on `test`.
// Failures become error entries rather than aborting the run.
std::vector<ScoredModel> score_algorithms(const ExperimentConfig& config, const Dataset& train,
                                          const Dataset& test, bool with_train_accuracy,
                                          std::uint64_t seed) {
  std::vector<ScoredModel> scored;
  for (Algorithm algorithm : config.algorithms) {
    if (algorithm == Algorithm::Knn) {
      try {
        Hyperparams hp = config.hyperparams;
        hp.knn.k = config.knn_max_k;
        auto model = train_knn(train, hp);
        auto test_votes = predict_knn_sweep(model, test, config.knn_max_k);
        std::vector<std::vector<std::uint8_t>> train_votes;
        if (with_train_accuracy) train_votes = predict_knn_sweep(model, train, config.knn_max_k);
        for (std::size_t k = 1; k <= config.knn_max_k; ++k) {
          MetricRecord record = with_train_accuracy
                                    ? evaluate_predictions(train_votes[k - 1], train, test_votes[k - 1], test)
                                    : evaluate_test_predictions(test_votes[k - 1], test);
          scored.push_back({algorithm, k, record, {}});
        }
      } catch (const Error& e) {
        for (std::size_t k = 1; k <= config.knn_max_k; ++k) scored.push_back({algorithm, k, std::nullopt, e.what()});
      }
      continue;
    }
    try {
      auto model = incident::train(algorithm, train, config.hyperparams, derive_seed(seed, to_string(algorithm)));
      auto test_pred = predict_batch(model, test);
      MetricRecord record = with_train_accuracy
                                ? evaluate_predictions(predict_batch(model, train), train, test_pred, test)
                                : evaluate_test_predictions(test_pred, test);
      scored.push_back({algorithm, 0, record, {}});
    } catch (const Error& e) {
      scored.push_back({algorithm, 0, std::nullopt, e.what()});
    }
  }
  return scored;
}

void add_errors(Report& report, const std::vector<ScoredModel>& scored) {
  for (const auto& s : scored) {
    if (s.metrics) continue;
    std::string name(to_string(s.algorithm));
    if (s.algorithm == Algorithm::Knn) name += ":" + std::to_string(s.k);
    report.footer.emplace_back("error " + name, s.error);
  }
}

std::vector<std::string> screening_columns() {
  return {"Explanatory Variable", "Recall",     "Prec.",       "Corr.",         "Mean: all",
          "Median: all",          "Mean: fo",   "Median: fo",  "Mean: no fo",   "Median: no fo"};
}

std::vector<Cell> screening_cells(const ScreeningRow& row) {
  return {row.variable + (row.degenerate ? "*" : ""),
          row.recall,
          row.precision,
          row.correlation.value,
          row.stats.mean_all,
          row.stats.median_all,
          row.stats.mean_fall,
          row.stats.median_fall,
          row.stats.mean_nofall,
          row.stats.median_nofall};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train fraction must lie in (0,1)");
  if (algorithms.empty()) throw ArgumentError("algorithm set is empty");
  if (knn_max_k < 1 || knn_max_k > 4) throw ArgumentError("k-NN sweep bound must lie in 1..4");
  hyperparams.validate();
}

Dataset load_data(const DataSource& source, std::uint64_t seed) {
  if (!source.synth.empty()) {
    GeneratorProfile profile =
        source.synth == "table-v" ? table_v_profile() : GeneratorProfile::load_json(source.synth);
    return generate(profile, source.scale, derive_seed(seed, "synth"));
  }
  if (source.data_path.empty() || source.schema_path.empty()) {
    throw ArgumentError("a data source needs either a synthetic profile or both a CSV and a schema");
  }
  return load_csv(source.data_path, Schema::load_json(source.schema_path));
}

Report run_experiment1(const ExperimentConfig& config, const Dataset& data) {
  config.validate();
  const std::uint64_t seed = config.seed;
  Dataset train(data.schema_ptr());
  Dataset test(data.schema_ptr());
  std::size_t balanced_rows = 0;
  if (config.split_first) {
    auto split = split_minority_first(data, config.train_fraction, derive_seed(seed, "exp1/split"));
    test = split.test();
    train = undersample(split.train(), derive_seed(seed, "exp1/undersample"));
    balanced_rows = train.rows();
  } else {
    Dataset balanced = undersample(data, derive_seed(seed, "exp1/undersample"));
    balanced_rows = balanced.rows();
    auto split = split_random(balanced, config.train_fraction, derive_seed(seed, "exp1/split"));
    train = std::move(split.train);
    test = std::move(split.test);
  }

  auto scored = score_algorithms(config, train, test, true, derive_seed(seed, "exp1/models"));
  auto best = best_knn(scored);

  Report report;
  report.id = "exp1";
  report.title = "Table I layout: model generation on undersampled data";
  report.columns = {"ML Algorithm", "Accuracy (training)", "Accuracy (testing)", "Recall"};
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& s = scored[i];
    std::string name = s.algorithm == Algorithm::Knn
                           ? knn_label(s.k, best && *best == i, TableStyle::Accuracy)
                           : algorithm_label(s.algorithm, TableStyle::Accuracy);
    if (!s.metrics) {
      report.rows.push_back({name, std::string("ERROR"), std::string("ERROR"), std::string("ERROR")});
      continue;
    }
    report.rows.push_back({name, *s.metrics->accuracy_train, s.metrics->accuracy_test, s.metrics->recall_test});
  }
  report.footer = {
      {"seed", std::to_string(seed)},
      {"dataset fingerprint", fingerprint_hex(data.fingerprint())},
      {"dataset", counts_text(class_counts(data))},
      {"order", config.split_first ? "split-first" : "undersample-then-split"},
      {"balanced rows", std::to_string(balanced_rows)},
      {"train", counts_text(class_counts(train))},
      {"test", counts_text(class_counts(test))},
  };
  add_errors(report, scored);
  return report;
}

std::vector<Report> run_experiment2(const ExperimentConfig& config, const Dataset& data) {
  config.validate();
  const std::uint64_t seed = config.seed;
  // The test set exists before any resampling and is only ever scored.
  const auto split = split_minority_first(data, config.train_fraction, derive_seed(seed, "exp2/split"));
  const Dataset train = split.train();
  const Dataset test = split.test();
  const std::string test_fingerprint = fingerprint_hex(test.fingerprint());

  std::vector<Report> reports;
  for (const auto& strategy : config.strategies) {
    const std::string name = strategy_name(strategy);
    Report report;
    std::string stem = name;
    std::replace(stem.begin(), stem.end(), ':', '-');
    report.id = "exp2_" + stem;
    report.columns = {"ML Algorithm", "Recall", "TN", "FP", "FN", "TP"};
    report.title = "Table II-IV layout: minority-first split, training resampled with " + name;

    std::optional<Dataset> prepared;
    std::string failure;
    try {
      prepared = resample(train, strategy, derive_seed(seed, "exp2/resample/" + name));
    } catch (const Error& e) {
      failure = e.what();
    }
    std::vector<ScoredModel> scored;
    if (prepared) {
      scored = score_algorithms(config, *prepared, test, false, derive_seed(seed, "exp2/models/" + name));
    } else {
      for (Algorithm a : config.algorithms) {
        if (a == Algorithm::Knn) {
          for (std::size_t k = 1; k <= config.knn_max_k; ++k) scored.push_back({a, k, std::nullopt, failure});
        } else {
          scored.push_back({a, 0, std::nullopt, failure});
        }
      }
    }
    auto best = best_knn(scored);

    double sums[5] = {0, 0, 0, 0, 0};
    std::size_t in_mean = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const auto& s = scored[i];
      bool is_best = best && *best == i;
      std::string label = s.algorithm == Algorithm::Knn ? knn_label(s.k, is_best, TableStyle::Confusion)
                                                        : algorithm_label(s.algorithm, TableStyle::Confusion);
      if (!s.metrics) {
        std::string err = "ERROR";
        report.rows.push_back({label, err, err, err, err, err});
        continue;
      }
      const auto& cm = s.metrics->cm_test;
      report.rows.push_back({label, s.metrics->recall_test, static_cast<std::int64_t>(cm.tn),
                             static_cast<std::int64_t>(cm.fp), static_cast<std::int64_t>(cm.fn),
                             static_cast<std::int64_t>(cm.tp)});
      // The mean covers one row per algorithm; k-NN contributes its best k.
      if (s.algorithm != Algorithm::Knn || is_best) {
        sums[0] += s.metrics->recall_test;
        sums[1] += static_cast<double>(cm.tn);
        sums[2] += static_cast<double>(cm.fp);
        sums[3] += static_cast<double>(cm.fn);
        sums[4] += static_cast<double>(cm.tp);
        ++in_mean;
      }
    }
    if (in_mean > 0) {
      std::vector<Cell> mean_row{std::string("Mean")};
      for (double s : sums) mean_row.emplace_back(s / static_cast<double>(in_mean));
      report.rows.push_back(std::move(mean_row));
    }

    report.footer = {
        {"seed", std::to_string(seed)},
        {"dataset fingerprint", fingerprint_hex(data.fingerprint())},
        {"dataset", counts_text(class_counts(data))},
        {"strategy", name},
        {"train before resampling", counts_text(class_counts(train))},
        {"train after resampling", prepared ? counts_text(class_counts(*prepared)) : "n/a"},
        {"test", counts_text(class_counts(test))},
        {"test fingerprint", test_fingerprint},
    };
    if (!failure.empty()) report.footer.emplace_back("error resampling", failure);
    add_errors(report, scored);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<Report> run_experiment3(const ExperimentConfig& config, const Dataset& data) {
  config.validate();
  std::vector<std::string> columns = config.variables;
  if (columns.empty()) {
    for (const auto& col : data.schema().columns()) columns.push_back(col.name);
  }
  ScreeningOptions options;
  options.algorithms = config.algorithms;
  options.hyperparams = config.hyperparams;
  options.train_fraction = config.train_fraction;
  options.resample = config.screen_resample;
  options.knn_max_k = config.knn_max_k;

  // Unknown names fail before any work starts.
  for (const auto& name : columns) {
    const auto& cols = data.schema().columns();
    if (std::none_of(cols.begin(), cols.end(), [&](const EncodedColumn& c) { return c.name == name; })) {
      throw ArgumentError("unknown variable '" + name + "'");
    }
  }

  std::vector<ScreeningRow> rows(columns.size());
  parallel_for(columns.size(), [&](std::size_t i) {
    rows[i] = screen_variable(data, columns[i], options, derive_seed(config.seed, "screen/" + columns[i]));
  });

  std::vector<std::pair<std::string, std::string>> footer = {
      {"seed", std::to_string(config.seed)},
      {"dataset fingerprint", fingerprint_hex(data.fingerprint())},
      {"dataset", counts_text(class_counts(data))},
      {"screen resampling", config.screen_resample == ScreenResample::Rus ? "rus" : "none"},
      {"guideline", "recall > 0.8 and precision > 0.013"},
      {"marker", "* = degenerate (constant column, or every model predicted a single class)"},
  };

  Report all;
  all.id = "exp3_all";
  all.title = "Table V layout: single-variable screening, every variable";
  all.columns = screening_columns();
  for (const auto& row : rows) all.rows.push_back(screening_cells(row));
  all.footer = footer;

  Report selected;
  selected.id = "exp3_selected";
  selected.title = "Table V layout: variables meeting the guideline";
  selected.columns = screening_columns();
  for (const auto& row : guideline_filter(rows)) selected.rows.push_back(screening_cells(row));
  selected.footer = footer;

  Report models;
  models.id = "exp3_models";
  models.title = "Models behind each screening row";
  models.columns = {"Explanatory Variable", "Recall model", "Precision model"};
  for (const auto& row : rows) {
    models.rows.push_back({row.variable, row.recall_model,
                           row.precision_model.empty() ? std::string("-") : row.precision_model});
  }
  models.footer = footer;
  return {selected, all, models};
}

}  // namespace incident
