#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace incident {

enum class VariableKind { Numeric, Binary, Categorical };

std::string_view to_string(VariableKind kind);
VariableKind parse_variable_kind(std::string_view text);

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::Numeric;
  std::vector<std::string> levels;  // categorical only
  std::string description;
};

// One column of the encoded feature table.
struct EncodedColumn {
  std::string name;                  // "age", or "dept=B" for a one-hot level
  std::size_t variable = 0;          // index into Schema::variables()
  std::optional<std::size_t> level;  // set for categorical level columns
  bool indicator = false;            // values restricted to {0,1}
};

class Schema {
 public:
  Schema(std::vector<VariableSpec> variables, std::string label_name);

  const std::vector<VariableSpec>& variables() const { return variables_; }
  const std::string& label_name() const { return label_name_; }
  const std::vector<EncodedColumn>& columns() const { return columns_; }
  std::size_t encoded_width() const { return columns_.size(); }

  std::optional<std::size_t> find(std::string_view name) const;
  const VariableSpec& variable(std::string_view name) const;

  // Encoded column range [first, last) of a variable.
  std::pair<std::size_t, std::size_t> column_range(std::size_t variable) const;

  // Hash over encoded column names and kinds; models refuse inputs whose
  // fingerprint differs from the one they were trained on.
  std::uint64_t fingerprint() const { return fingerprint_; }

  // Schema restricted to the named variables (same label), in schema order.
  Schema subset(std::span<const std::string> names) const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& doc);
  static Schema load_json(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.fingerprint_ == b.fingerprint_ && a.label_name_ == b.label_name_;
  }

 private:
  std::vector<VariableSpec> variables_;
  std::string label_name_;
  std::vector<EncodedColumn> columns_;
  std::vector<std::size_t> first_column_;
  std::uint64_t fingerprint_ = 0;
};

using SchemaPtr = std::shared_ptr<const Schema>;

std::string fingerprint_hex(std::uint64_t fingerprint);

// Raw per-variable value: numeric -> double, binary -> bool,
// categorical -> level name.
using RawValue = std::variant<double, bool, std::string>;

std::vector<double> dummy_encode(std::span<const RawValue> raw, const Schema& schema);
std::vector<RawValue> decode_row(std::span<const double> encoded, const Schema& schema);

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t total() const { return positives + negatives; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// Encoded, row-major feature table plus binary labels. Immutable after
// construction; the schema is shared between a dataset and its subsets.
class Dataset {
 public:
  Dataset(SchemaPtr schema, std::vector<double> values, std::vector<std::uint8_t> labels);
  explicit Dataset(SchemaPtr schema) : Dataset(std::move(schema), {}, {}) {}

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  std::size_t rows() const { return labels_.size(); }
  std::size_t width() const { return width_; }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * width_, width_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * width_ + j]; }
  std::uint8_t label(std::size_t i) const { return labels_[i]; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const double> values() const { return values_; }

  std::vector<double> column(std::size_t j) const;
  std::vector<std::size_t> rows_with_label(std::uint8_t label) const;

  // Rows in the given order (duplicates allowed).
  Dataset select(std::span<const std::size_t> rows) const;

  // Keep only the encoded columns of the named variables.
  Dataset project(std::span<const std::string> variable_names) const;

  // Deterministic digest of schema, values and labels.
  std::uint64_t fingerprint() const;

 private:
  SchemaPtr schema_;
  std::size_t width_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
};

ClassCounts class_counts(const Dataset& data);

// Rows of `first` followed by rows of `second`; schemas must match.
Dataset concat(const Dataset& first, const Dataset& second);

Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset parse_csv(std::string_view text, const Schema& schema);
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct SplitPair {
  Dataset train;
  Dataset test;
};

// round(fraction * n) with ties rounded up.
std::size_t train_size(double fraction, std::size_t n);

SplitPair split_random(const Dataset& data, double train_fraction, std::uint64_t seed);

struct MinorityFirstSplit {
  SplitPair minority;  // fall rows
  SplitPair majority;  // no-fall rows

  Dataset train() const { return concat(minority.train, majority.train); }
  Dataset test() const { return concat(minority.test, majority.test); }
};

// Positive and negative rows are split independently, each from its own
// seed stream, so the positive partition never depends on the negatives.
MinorityFirstSplit split_minority_first(const Dataset& data, double train_fraction,
                                        std::uint64_t seed);

}  // namespace incident
