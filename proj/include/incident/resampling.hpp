#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "incident/data_model.hpp"

namespace incident {

// Imbalance handling applied to training data only. Every strategy keeps the
// original minority rows unchanged and returns exactly balanced classes.

struct RandomUnderSample {};
struct StatisticalOverSample {};
struct Smote {
  std::size_t k = 5;
};

using ResampleStrategy = std::variant<RandomUnderSample, StatisticalOverSample, Smote>;

// Accepts the CLI spellings `rus`, `ros-stats`, `smote` and `smote:K`.
ResampleStrategy parse_strategy(std::string_view text);
std::string strategy_name(const ResampleStrategy& strategy);

// Drops uniformly chosen negatives until both classes have `positives` rows.
// Surviving rows keep their input order.
Dataset undersample(const Dataset& train, std::uint64_t seed);

// Appends minority rows drawn column by column from the minority sample's
// moments: Normal(mean, population variance) for numeric columns and
// Bernoulli(mean) for indicator columns.
Dataset oversample_stats(const Dataset& train, std::uint64_t seed);

// Appends x + u (x' - x) with x a random minority row, x' one of its k
// nearest minority rows and u ~ U[0,1]. Indicator columns are rounded back
// to {0,1} (0.5 rounds up), so one-hot groups may lose exclusivity.
Dataset smote(const Dataset& train, std::size_t k, std::uint64_t seed);

Dataset resample(const Dataset& train, const ResampleStrategy& strategy, std::uint64_t seed);

}  // namespace incident
