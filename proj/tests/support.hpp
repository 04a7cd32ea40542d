#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "incident/data_model.hpp"
#include "incident/rng.hpp"

namespace incident::testing {

// Numeric columns x0..x{w-1}, then `indicators` binary columns b0...
inline SchemaPtr plain_schema(std::size_t numeric, std::size_t indicators = 0) {
  std::vector<VariableSpec> vars;
  for (std::size_t j = 0; j < numeric; ++j) vars.push_back({"x" + std::to_string(j), VariableKind::Numeric, {}, {}});
  for (std::size_t j = 0; j < indicators; ++j) vars.push_back({"b" + std::to_string(j), VariableKind::Binary, {}, {}});
  return std::make_shared<const Schema>(std::move(vars), "fall");
}

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<std::uint8_t>& labels,
                            std::size_t indicators = 0) {
  const std::size_t width = rows.empty() ? 1 + indicators : rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return Dataset(plain_schema(width - indicators, indicators), std::move(flat), labels);
}

// Positives first, then negatives. Numeric columns are small integers so
// that exact distance ties occur; indicator columns are fair coins.
inline Dataset random_dataset(Rng& rng, std::size_t positives, std::size_t negatives, std::size_t numeric,
                              std::size_t indicators = 0, int spread = 5) {
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    std::vector<double> r;
    for (std::size_t j = 0; j < numeric; ++j) {
      r.push_back(static_cast<double>(uniform_index(rng, static_cast<std::size_t>(2 * spread + 1))) - spread);
    }
    for (std::size_t j = 0; j < indicators; ++j) r.push_back(bernoulli_draw(rng, 0.5) ? 1.0 : 0.0);
    rows.push_back(std::move(r));
    labels.push_back(i < positives ? 1 : 0);
  }
  return make_dataset(rows, labels, indicators);
}

inline std::vector<double> row_vector(const Dataset& d, std::size_t i) {
  auto r = d.row(i);
  return {r.begin(), r.end()};
}

}  // namespace incident::testing
