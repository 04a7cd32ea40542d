#include "incident/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/algorithm/string/case_conv.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>

#include "incident/errors.hpp"
#include "incident/rng.hpp"

namespace incident {

namespace {

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
}

void fnv_mix(std::uint64_t& h, std::string_view text) {
  fnv_mix(h, text.data(), text.size());
  const unsigned char sep = 0x1F;
  fnv_mix(h, &sep, 1);
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view token) {
  double value = 0.0;
  auto begin = token.data();
  auto end = token.data() + token.size();
  if (begin != end && *begin == '+') ++begin;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<bool> parse_flag(std::string_view token) {
  std::string lower = boost::algorithm::to_lower_copy(std::string(token));
  if (lower == "1" || lower == "yes" || lower == "true" || lower == "y") return true;
  if (lower == "0" || lower == "no" || lower == "false" || lower == "n") return false;
  return std::nullopt;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  using Separator = boost::escaped_list_separator<char>;
  boost::tokenizer<Separator> tokens(line, Separator('\\', ',', '"'));
  std::vector<std::string> cells;
  for (const auto& token : tokens) cells.push_back(boost::algorithm::trim_copy(token));
  return cells;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Numeric:
      return "numeric";
    case VariableKind::Binary:
      return "binary";
    case VariableKind::Categorical:
      return "categorical";
  }
  return "numeric";
}

VariableKind parse_variable_kind(std::string_view text) {
  if (text == "numeric") return VariableKind::Numeric;
  if (text == "binary") return VariableKind::Binary;
  if (text == "categorical") return VariableKind::Categorical;
  throw SchemaError("unknown variable kind '" + std::string(text) + "'");
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf;
}

// ---------------------------------------------------------------------------
// Schema

Schema::Schema(std::vector<VariableSpec> variables, std::string label_name)
    : variables_(std::move(variables)), label_name_(std::move(label_name)) {
  if (label_name_.empty()) throw SchemaError("label name is empty");
  std::set<std::string> seen{label_name_};
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    const auto& spec = variables_[v];
    if (spec.name.empty()) throw SchemaError("variable name is empty");
    if (!seen.insert(spec.name).second) {
      throw SchemaError("duplicate variable name '" + spec.name + "'");
    }
    first_column_.push_back(columns_.size());
    switch (spec.kind) {
      case VariableKind::Numeric:
        columns_.push_back({spec.name, v, std::nullopt, false});
        break;
      case VariableKind::Binary:
        columns_.push_back({spec.name, v, std::nullopt, true});
        break;
      case VariableKind::Categorical: {
        std::set<std::string> levels(spec.levels.begin(), spec.levels.end());
        if (spec.levels.size() < 2 || levels.size() != spec.levels.size()) {
          throw SchemaError("categorical variable '" + spec.name +
                            "' needs at least two distinct levels");
        }
        for (std::size_t l = 0; l < spec.levels.size(); ++l) {
          columns_.push_back({spec.name + "=" + spec.levels[l], v, l, true});
        }
        break;
      }
    }
  }
  first_column_.push_back(columns_.size());

  std::uint64_t h = kFnvOffset;
  fnv_mix(h, label_name_);
  for (const auto& col : columns_) {
    fnv_mix(h, col.name);
    fnv_mix(h, col.indicator ? "i" : "n");
  }
  fingerprint_ = h;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (variables_[v].name == name) return v;
  }
  return std::nullopt;
}

const VariableSpec& Schema::variable(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw ArgumentError("unknown variable '" + std::string(name) + "'");
  return variables_[*idx];
}

std::pair<std::size_t, std::size_t> Schema::column_range(std::size_t variable) const {
  return {first_column_.at(variable), first_column_.at(variable + 1)};
}

Schema Schema::subset(std::span<const std::string> names) const {
  std::vector<VariableSpec> kept;
  for (const auto& spec : variables_) {
    if (std::find(names.begin(), names.end(), spec.name) != names.end()) kept.push_back(spec);
  }
  for (const auto& name : names) {
    if (!find(name)) throw ArgumentError("unknown variable '" + name + "'");
  }
  return Schema(std::move(kept), label_name_);
}

nlohmann::json Schema::to_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& spec : variables_) {
    nlohmann::json entry = {{"name", spec.name}, {"kind", std::string(to_string(spec.kind))}};
    if (spec.kind == VariableKind::Categorical) entry["levels"] = spec.levels;
    if (!spec.description.empty()) entry["description"] = spec.description;
    vars.push_back(std::move(entry));
  }
  return {{"label_name", label_name_}, {"variables", std::move(vars)}};
}

Schema Schema::from_json(const nlohmann::json& doc) {
  try {
    std::vector<VariableSpec> vars;
    for (const auto& entry : doc.at("variables")) {
      VariableSpec spec;
      spec.name = entry.at("name").get<std::string>();
      spec.kind = parse_variable_kind(entry.at("kind").get<std::string>());
      if (entry.contains("levels")) spec.levels = entry.at("levels").get<std::vector<std::string>>();
      if (entry.contains("description")) spec.description = entry.at("description").get<std::string>();
      vars.push_back(std::move(spec));
    }
    return Schema(std::move(vars), doc.at("label_name").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema document: ") + e.what());
  }
}

Schema Schema::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void Schema::save_json(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schema file " + path.string());
  out << to_json().dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Encoding

std::vector<double> dummy_encode(std::span<const RawValue> raw, const Schema& schema) {
  const auto& vars = schema.variables();
  if (raw.size() != vars.size()) {
    throw ArgumentError("expected " + std::to_string(vars.size()) + " values, got " +
                        std::to_string(raw.size()));
  }
  std::vector<double> encoded(schema.encoded_width(), 0.0);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& spec = vars[v];
    auto [first, last] = schema.column_range(v);
    switch (spec.kind) {
      case VariableKind::Numeric: {
        const auto* value = std::get_if<double>(&raw[v]);
        if (!value) throw ValueError("variable '" + spec.name + "' expects a number");
        if (!std::isfinite(*value)) throw ValueError("variable '" + spec.name + "' is not finite");
        encoded[first] = *value;
        break;
      }
      case VariableKind::Binary: {
        const auto* flag = std::get_if<bool>(&raw[v]);
        if (!flag) throw ValueError("variable '" + spec.name + "' expects a binary value");
        encoded[first] = *flag ? 1.0 : 0.0;
        break;
      }
      case VariableKind::Categorical: {
        const auto* level = std::get_if<std::string>(&raw[v]);
        if (!level) throw ValueError("variable '" + spec.name + "' expects a level name");
        auto it = std::find(spec.levels.begin(), spec.levels.end(), *level);
        if (it == spec.levels.end()) {
          throw ValueError("unknown level '" + *level + "' for variable '" + spec.name + "'");
        }
        encoded[first + static_cast<std::size_t>(it - spec.levels.begin())] = 1.0;
        (void)last;
        break;
      }
    }
  }
  return encoded;
}

std::vector<RawValue> decode_row(std::span<const double> encoded, const Schema& schema) {
  if (encoded.size() != schema.encoded_width()) throw ArgumentError("encoded width mismatch");
  std::vector<RawValue> raw;
  const auto& vars = schema.variables();
  for (std::size_t v = 0; v < vars.size(); ++v) {
    auto [first, last] = schema.column_range(v);
    switch (vars[v].kind) {
      case VariableKind::Numeric:
        raw.emplace_back(encoded[first]);
        break;
      case VariableKind::Binary:
        raw.emplace_back(encoded[first] >= 0.5);
        break;
      case VariableKind::Categorical: {
        // Highest indicator wins; synthetic rows may break exclusivity.
        std::size_t best = first;
        for (std::size_t c = first; c < last; ++c) {
          if (encoded[c] > encoded[best]) best = c;
        }
        raw.emplace_back(vars[v].levels[best - first]);
        break;
      }
    }
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(SchemaPtr schema, std::vector<double> values, std::vector<std::uint8_t> labels)
    : schema_(std::move(schema)), values_(std::move(values)), labels_(std::move(labels)) {
  if (!schema_) throw ArgumentError("dataset requires a schema");
  width_ = schema_->encoded_width();
  if (values_.size() != labels_.size() * width_) {
    throw ArgumentError("dataset has " + std::to_string(values_.size()) + " values for " +
                        std::to_string(labels_.size()) + " rows of width " +
                        std::to_string(width_));
  }
  const auto& cols = schema_->columns();
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] > 1) throw ValueError("label must be 0 or 1 (row " + std::to_string(i) + ")");
    for (std::size_t j = 0; j < width_; ++j) {
      double x = values_[i * width_ + j];
      if (!std::isfinite(x)) {
        throw ValueError("non-finite value in column '" + cols[j].name + "' (row " +
                         std::to_string(i) + ")");
      }
      if (cols[j].indicator && x != 0.0 && x != 1.0) {
        throw ValueError("indicator column '" + cols[j].name + "' holds " + format_number(x) +
                         " (row " + std::to_string(i) + ")");
      }
    }
  }
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
  return out;
}

std::vector<std::size_t> Dataset::rows_with_label(std::uint8_t label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (labels_[i] == label) out.push_back(i);
  }
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * width_);
  std::vector<std::uint8_t> labels;
  labels.reserve(rows.size());
  for (std::size_t i : rows) {
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
  }
  return Dataset(schema_, std::move(values), std::move(labels));
}

Dataset Dataset::project(std::span<const std::string> variable_names) const {
  auto sub = std::make_shared<const Schema>(schema_->subset(variable_names));
  std::vector<std::size_t> source;
  for (const auto& spec : sub->variables()) {
    auto [first, last] = schema_->column_range(*schema_->find(spec.name));
    for (std::size_t c = first; c < last; ++c) source.push_back(c);
  }
  std::vector<double> values;
  values.reserve(rows() * source.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t c : source) values.push_back(at(i, c));
  }
  return Dataset(std::move(sub), std::move(values), labels_);
}

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  std::uint64_t schema_fp = schema_->fingerprint();
  fnv_mix(h, &schema_fp, sizeof(schema_fp));
  fnv_mix(h, values_.data(), values_.size() * sizeof(double));
  fnv_mix(h, labels_.data(), labels_.size());
  return h;
}

ClassCounts class_counts(const Dataset& data) {
  ClassCounts counts;
  for (auto y : data.labels()) (y ? counts.positives : counts.negatives) += 1;
  return counts;
}

Dataset concat(const Dataset& first, const Dataset& second) {
  if (!(first.schema() == second.schema())) throw SchemaError("cannot concatenate datasets with different schemas");
  std::vector<double> values(first.values().begin(), first.values().end());
  values.insert(values.end(), second.values().begin(), second.values().end());
  std::vector<std::uint8_t> labels(first.labels().begin(), first.labels().end());
  labels.insert(labels.end(), second.labels().begin(), second.labels().end());
  return Dataset(first.schema_ptr(), std::move(values), std::move(labels));
}

// ---------------------------------------------------------------------------
// CSV

Dataset parse_csv(std::string_view text, const Schema& schema) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // UTF-8 byte order mark
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!position.emplace(header[c], c).second) {
      throw SchemaError("duplicate column '" + header[c] + "' in CSV header");
    }
  }
  const auto& vars = schema.variables();
  std::vector<std::size_t> var_pos;
  for (const auto& spec : vars) {
    auto it = position.find(spec.name);
    if (it == position.end()) throw SchemaError("CSV header lacks column '" + spec.name + "'");
    var_pos.push_back(it->second);
  }
  auto label_it = position.find(schema.label_name());
  if (label_it == position.end()) {
    throw SchemaError("CSV header lacks label column '" + schema.label_name() + "'");
  }
  if (header.size() != vars.size() + 1) {
    for (const auto& name : header) {
      if (name != schema.label_name() && !schema.find(name)) {
        throw SchemaError("CSV column '" + name + "' is not in the schema");
      }
    }
  }

  auto shared = std::make_shared<const Schema>(schema);
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<RawValue> raw(vars.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row);
    }
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto& cell = cells[var_pos[v]];
      if (cell.empty()) throw ParseError("empty cell in column '" + vars[v].name + "'", row);
      switch (vars[v].kind) {
        case VariableKind::Numeric: {
          auto number = parse_number(cell);
          if (!number) {
            throw ParseError("non-numeric token '" + cell + "' in column '" + vars[v].name + "'", row);
          }
          raw[v] = *number;
          break;
        }
        case VariableKind::Binary: {
          auto flag = parse_flag(cell);
          if (!flag) {
            throw ParseError("non-binary token '" + cell + "' in column '" + vars[v].name + "'", row);
          }
          raw[v] = *flag;
          break;
        }
        case VariableKind::Categorical:
          raw[v] = cell;
          break;
      }
    }
    const auto& label_cell = cells[label_it->second];
    if (label_cell != "0" && label_cell != "1") {
      throw ParseError("label must be 0 or 1, got '" + label_cell + "'", row);
    }
    auto encoded = dummy_encode(raw, schema);
    values.insert(values.end(), encoded.begin(), encoded.end());
    labels.push_back(label_cell == "1" ? 1 : 0);
    ++row;
  }
  return Dataset(std::move(shared), std::move(values), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), schema);
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write data file " + path.string());
  const auto& schema = data.schema();
  for (const auto& spec : schema.variables()) out << csv_escape(spec.name) << ',';
  out << csv_escape(schema.label_name()) << '\n';
  std::string line;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    line.clear();
    for (const auto& value : decode_row(data.row(i), schema)) {
      if (const auto* x = std::get_if<double>(&value)) {
        line += format_number(*x);
      } else if (const auto* flag = std::get_if<bool>(&value)) {
        line += *flag ? '1' : '0';
      } else {
        line += csv_escape(std::get<std::string>(value));
      }
      line += ',';
    }
    line += data.label(i) ? '1' : '0';
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Splits

std::size_t train_size(double fraction, std::size_t n) {
  // Tolerance absorbs representation error, e.g. 0.9 * 2426 = 2183.4000000000001.
  double scaled = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(scaled + 0.5 + 1e-9));
}

namespace {

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0,1), got " + format_number(fraction));
  }
}

SplitPair split_indices(const Dataset& data, std::span<const std::size_t> pool, double fraction,
                        Rng& rng) {
  auto chosen = sample_without_replacement(pool.size(), train_size(fraction, pool.size()), rng);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::size_t next = 0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (next < chosen.size() && chosen[next] == k) {
      train_rows.push_back(pool[k]);
      ++next;
    } else {
      test_rows.push_back(pool[k]);
    }
  }
  return {data.select(train_rows), data.select(test_rows)};
}

}  // namespace

SplitPair split_random(const Dataset& data, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  if (data.rows() < 2) throw ArgumentError("random split needs at least two rows");
  std::vector<std::size_t> all(data.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Rng rng(seed);
  return split_indices(data, all, train_fraction, rng);
}

MinorityFirstSplit split_minority_first(const Dataset& data, double train_fraction,
                                        std::uint64_t seed) {
  check_fraction(train_fraction);
  auto positives = data.rows_with_label(1);
  auto negatives = data.rows_with_label(0);
  if (positives.empty() || negatives.empty()) {
    throw DegenerateClassError("minority-first split needs both classes present");
  }
  Rng minority_rng = make_rng(seed, "split/minority");
  Rng majority_rng = make_rng(seed, "split/majority");
  return {split_indices(data, positives, train_fraction, minority_rng),
          split_indices(data, negatives, train_fraction, majority_rng)};
}

}  // namespace incident
