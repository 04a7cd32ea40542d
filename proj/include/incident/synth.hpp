#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "incident/data_model.hpp"

namespace incident {

// Class-conditional sampling law of one column.
struct Law {
  enum class Kind { Normal, Bernoulli };
  Kind kind = Kind::Normal;
  double mean = 0.0;  // Bernoulli: success probability
  double sd = 0.0;    // Normal only
};

struct CalibratedVariable {
  std::string name;
  VariableKind kind = VariableKind::Numeric;  // numeric or binary
  Law fall;
  Law nofall;
  // Numeric draws are clamped into [lower, upper] when set.
  std::optional<double> lower;
  std::optional<double> upper;
  std::string description;
};

struct GeneratorProfile {
  std::string label_name = "fall";
  std::vector<CalibratedVariable> variables;  // calibrated, label-dependent
  ClassCounts counts;
  std::size_t filler_count = 0;               // label-independent columns appended after

  // Throws ArgumentError on an invalid law, count or duplicate name.
  void validate() const;

  // Calibrated variables followed by the generated fillers.
  std::vector<CalibratedVariable> expanded() const;
  Schema schema() const;

  nlohmann::json to_json() const;
  static GeneratorProfile from_json(const nlohmann::json& doc);
  static GeneratorProfile load_json(const std::filesystem::path& path);
};

// The law of filler number `index` (0-based); identical for both classes.
CalibratedVariable filler_variable(std::size_t index);

// Built-in profile: the class-conditional means published for the screened
// fall-risk variables, class counts 1213 / 101986 and fillers up to 172
// variables.
GeneratorProfile table_v_profile();

// round(scale * count) rows per class, each drawn independently from its
// class laws. Every row has its own counter-derived stream, so output does
// not depend on generation order.
Dataset generate(const GeneratorProfile& profile, double scale, std::uint64_t seed);

// Scaled class counts generate() would produce.
ClassCounts scaled_counts(const ClassCounts& counts, double scale);

}  // namespace incident
