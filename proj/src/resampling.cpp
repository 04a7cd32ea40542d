#include "incident/resampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "incident/errors.hpp"
#include "incident/rng.hpp"

namespace incident {

namespace {

struct ClassRows {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};

ClassRows class_rows(const Dataset& train, std::size_t min_positives, std::string_view op) {
  ClassRows rows{train.rows_with_label(1), train.rows_with_label(0)};
  if (rows.positives.size() < min_positives) {
    throw DegenerateClassError(std::string(op) + " needs at least " + std::to_string(min_positives) +
                               " positive rows, got " + std::to_string(rows.positives.size()));
  }
  if (rows.positives.size() > rows.negatives.size()) {
    throw ArgumentError(std::string(op) + " expects positives to be the minority class");
  }
  return rows;
}

// Original rows followed by the synthetic minority block.
Dataset append_minority(const Dataset& train, std::vector<double> synthetic) {
  std::vector<double> values(train.values().begin(), train.values().end());
  std::size_t added = synthetic.size() / train.width();
  values.insert(values.end(), synthetic.begin(), synthetic.end());
  std::vector<std::uint8_t> labels(train.labels().begin(), train.labels().end());
  labels.insert(labels.end(), added, std::uint8_t{1});
  return Dataset(train.schema_ptr(), std::move(values), std::move(labels));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

}  // namespace

ResampleStrategy parse_strategy(std::string_view text) {
  if (text == "rus") return RandomUnderSample{};
  if (text == "ros-stats") return StatisticalOverSample{};
  if (text == "smote") return Smote{};
  if (text.rfind("smote:", 0) == 0) {
    auto digits = text.substr(6);
    std::size_t k = 0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || k == 0) {
      throw ArgumentError("invalid SMOTE neighbor count in '" + std::string(text) + "'");
    }
    return Smote{k};
  }
  throw ArgumentError("unknown resampling strategy '" + std::string(text) + "'");
}

std::string strategy_name(const ResampleStrategy& strategy) {
  struct {
    std::string operator()(const RandomUnderSample&) const { return "rus"; }
    std::string operator()(const StatisticalOverSample&) const { return "ros-stats"; }
    std::string operator()(const Smote& s) const { return "smote:" + std::to_string(s.k); }
  } visitor;
  return std::visit(visitor, strategy);
}

Dataset undersample(const Dataset& train, std::uint64_t seed) {
  auto rows = class_rows(train, 1, "undersample");
  Rng rng(seed);
  auto keep = sample_without_replacement(rows.negatives.size(), rows.positives.size(), rng);
  std::vector<std::size_t> selected = rows.positives;
  for (std::size_t k : keep) selected.push_back(rows.negatives[k]);
  std::sort(selected.begin(), selected.end());
  return train.select(selected);
}

Dataset oversample_stats(const Dataset& train, std::uint64_t seed) {
  auto rows = class_rows(train, 2, "statistical oversampling");
  const std::size_t width = train.width();
  const double m = static_cast<double>(rows.positives.size());

  std::vector<double> mean(width, 0.0);
  std::vector<double> sd(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    double sum = 0.0;
    for (std::size_t i : rows.positives) sum += train.at(i, j);
    mean[j] = sum / m;
    double sq = 0.0;
    for (std::size_t i : rows.positives) {
      double d = train.at(i, j) - mean[j];
      sq += d * d;
    }
    sd[j] = std::sqrt(sq / m);
  }

  const auto& cols = train.schema().columns();
  const std::size_t needed = rows.negatives.size() - rows.positives.size();
  std::vector<double> synthetic;
  synthetic.reserve(needed * width);
  Rng rng(seed);
  for (std::size_t r = 0; r < needed; ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      if (cols[j].indicator) {
        synthetic.push_back(bernoulli_draw(rng, mean[j]) ? 1.0 : 0.0);
      } else {
        synthetic.push_back(normal_draw(rng, mean[j], sd[j]));
      }
    }
  }
  return append_minority(train, std::move(synthetic));
}

Dataset smote(const Dataset& train, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ArgumentError("SMOTE neighbor count must be at least 1");
  auto rows = class_rows(train, 1, "SMOTE");
  const std::size_t m = rows.positives.size();
  if (m <= k) {
    throw ArgumentError("SMOTE with k=" + std::to_string(k) + " needs more than k minority rows, got " +
                        std::to_string(m));
  }

  // k nearest minority neighbors of every minority row (self excluded,
  // distance ties to the lower row index).
  std::vector<std::vector<std::size_t>> neighbors(m);
  std::vector<std::pair<double, std::size_t>> scratch;
  for (std::size_t a = 0; a < m; ++a) {
    scratch.clear();
    auto xa = train.row(rows.positives[a]);
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      scratch.emplace_back(squared_distance(xa, train.row(rows.positives[b])), b);
    }
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
    for (std::size_t n = 0; n < k; ++n) neighbors[a].push_back(scratch[n].second);
  }

  const auto& cols = train.schema().columns();
  const std::size_t width = train.width();
  const std::size_t needed = rows.negatives.size() - m;
  std::vector<double> synthetic;
  synthetic.reserve(needed * width);
  Rng rng(seed);
  for (std::size_t r = 0; r < needed; ++r) {
    std::size_t a = uniform_index(rng, m);
    std::size_t b = neighbors[a][uniform_index(rng, k)];
    double u = uniform_unit(rng);
    auto x = train.row(rows.positives[a]);
    auto y = train.row(rows.positives[b]);
    for (std::size_t j = 0; j < width; ++j) {
      double value = x[j] + u * (y[j] - x[j]);
      if (cols[j].indicator) value = value >= 0.5 ? 1.0 : 0.0;
      synthetic.push_back(value);
    }
  }
  return append_minority(train, std::move(synthetic));
}

Dataset resample(const Dataset& train, const ResampleStrategy& strategy, std::uint64_t seed) {
  struct {
    const Dataset& train;
    std::uint64_t seed;
    Dataset operator()(const RandomUnderSample&) const { return undersample(train, seed); }
    Dataset operator()(const StatisticalOverSample&) const { return oversample_stats(train, seed); }
    Dataset operator()(const Smote& s) const { return smote(train, s.k, seed); }
  } visitor{train, seed};
  return std::visit(visitor, strategy);
}

}  // namespace incident
