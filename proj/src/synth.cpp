#include "incident/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "incident/errors.hpp"
#include "incident/parallel.hpp"
#include "incident/rng.hpp"

namespace incident {

namespace {

constexpr std::size_t kTotalVariables = 172;

Law normal(double mean, double sd) { return {Law::Kind::Normal, mean, sd}; }
Law bernoulli(double p) { return {Law::Kind::Bernoulli, p, 0.0}; }

CalibratedVariable numeric(std::string name, Law fall, Law nofall, double lower, double upper,
                           std::string description) {
  return {std::move(name), VariableKind::Numeric, fall, nofall, lower, upper, std::move(description)};
}

CalibratedVariable binary(std::string name, double p_fall, double p_nofall, std::string description) {
  return {std::move(name), VariableKind::Binary, bernoulli(p_fall), bernoulli(p_nofall),
          std::nullopt, std::nullopt, std::move(description)};
}

nlohmann::json law_to_json(const Law& law) {
  if (law.kind == Law::Kind::Bernoulli) return {{"law", "bernoulli"}, {"p", law.mean}};
  return {{"law", "normal"}, {"mean", law.mean}, {"sd", law.sd}};
}

Law law_from_json(const nlohmann::json& doc) {
  auto kind = doc.at("law").get<std::string>();
  if (kind == "bernoulli") return bernoulli(doc.at("p").get<double>());
  if (kind == "normal") return normal(doc.at("mean").get<double>(), doc.at("sd").get<double>());
  throw ArgumentError("unknown law '" + kind + "'");
}

void validate_law(const Law& law, const std::string& name) {
  if (law.kind == Law::Kind::Bernoulli) {
    if (!(law.mean >= 0.0 && law.mean <= 1.0)) {
      throw ArgumentError("Bernoulli probability of '" + name + "' must lie in [0,1]");
    }
  } else if (!std::isfinite(law.mean) || !(law.sd >= 0.0) || !std::isfinite(law.sd)) {
    throw ArgumentError("Normal law of '" + name + "' needs a finite mean and sd >= 0");
  }
}

double draw(Rng& rng, const CalibratedVariable& var, const Law& law) {
  if (law.kind == Law::Kind::Bernoulli) return bernoulli_draw(rng, law.mean) ? 1.0 : 0.0;
  double x = normal_draw(rng, law.mean, law.sd);
  if (var.lower) x = std::max(x, *var.lower);
  if (var.upper) x = std::min(x, *var.upper);
  return x;
}

}  // namespace

CalibratedVariable filler_variable(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "filler_%03zu", index + 1);
  // Mostly sparse indicators, like the dummy-coded medication and diagnosis
  // flags they stand in for, with every fifth filler a measurement.
  if (index % 5 == 4) {
    return {name, VariableKind::Numeric, normal(50.0, 10.0), normal(50.0, 10.0), std::nullopt,
            std::nullopt, "label-independent filler"};
  }
  static constexpr double kRates[] = {0.05, 0.1, 0.2, 0.3};
  double p = kRates[(index - index / 5) % 4];
  return {name, VariableKind::Binary, bernoulli(p), bernoulli(p), std::nullopt, std::nullopt,
          "label-independent filler"};
}

GeneratorProfile table_v_profile() {
  GeneratorProfile profile;
  profile.counts = {1213, 101986};
  // Class-conditional means are the published ones. The standard deviations
  // are calibration choices: no variances were published.
  profile.variables = {
      numeric("Patient age", normal(68.3, 12.0), normal(56.8, 18.0), 0.0, 120.0, "age in years"),
      numeric("Patient #mo", normal(825.4, 144.0), normal(687.5, 216.0), 0.0, 1440.0,
              "undocumented count; sds scaled from age by 12"),
      binary("Gynecology", 0.022, 0.0998, "department indicator"),
      binary("Cardiology", 0.0643, 0.0808, "department indicator"),
      binary("Ophthalmology", 0.0173, 0.0873, "department indicator"),
      binary("Anesthesia period: > average", 0.0791, 0.1489, "anesthesia longer than average"),
      binary("Operation period: > average", 0.1104, 0.1969, "operation longer than average"),
      binary("Plan A-1", 0.0832, 0.2636, "free-movement nursing plan"),
      binary("Autonomy", 0.0799, 0.2517, "autonomous patient"),
      binary("AAA medication", 0.0676, 0.0800, "antipyretic analgesic anti-inflammatory"),
      binary("Check-up purpose", 0.0535, 0.1100, "check-up hospitalization"),
      binary("ER:Planned", 0.0519, 0.0677, "planned hospitalization"),
      binary("Vision impairment", 0.2464, 0.2131, "reference variable"),
      numeric("Height", normal(156.0, 10.0), normal(152.7, 15.0), 50.0, 210.0,
              "height in cm, reference variable"),
  };
  profile.filler_count = kTotalVariables - profile.variables.size();
  return profile;
}

void GeneratorProfile::validate() const {
  if (label_name.empty()) throw ArgumentError("profile label name is empty");
  if (counts.positives < 1 || counts.negatives < 1) {
    throw ArgumentError("profile class counts must both be at least 1");
  }
  std::set<std::string> names{label_name};
  for (const auto& var : expanded()) {
    if (!names.insert(var.name).second) throw ArgumentError("duplicate profile variable '" + var.name + "'");
    if (var.kind == VariableKind::Categorical) {
      throw ArgumentError("profile variable '" + var.name + "' must be numeric or binary");
    }
    Law::Kind expected = var.kind == VariableKind::Binary ? Law::Kind::Bernoulli : Law::Kind::Normal;
    if (var.fall.kind != expected || var.nofall.kind != expected) {
      throw ArgumentError("law of '" + var.name + "' does not match its kind");
    }
    validate_law(var.fall, var.name);
    validate_law(var.nofall, var.name);
  }
}

std::vector<CalibratedVariable> GeneratorProfile::expanded() const {
  std::vector<CalibratedVariable> all = variables;
  for (std::size_t i = 0; i < filler_count; ++i) all.push_back(filler_variable(i));
  return all;
}

Schema GeneratorProfile::schema() const {
  std::vector<VariableSpec> specs;
  for (const auto& var : expanded()) specs.push_back({var.name, var.kind, {}, var.description});
  return Schema(std::move(specs), label_name);
}

nlohmann::json GeneratorProfile::to_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& var : variables) {
    nlohmann::json entry = {{"name", var.name},
                            {"kind", std::string(to_string(var.kind))},
                            {"fall", law_to_json(var.fall)},
                            {"nofall", law_to_json(var.nofall)}};
    if (var.lower) entry["lower"] = *var.lower;
    if (var.upper) entry["upper"] = *var.upper;
    if (!var.description.empty()) entry["description"] = var.description;
    vars.push_back(std::move(entry));
  }
  return {{"label_name", label_name},
          {"positives", counts.positives},
          {"negatives", counts.negatives},
          {"filler_count", filler_count},
          {"variables", std::move(vars)}};
}

GeneratorProfile GeneratorProfile::from_json(const nlohmann::json& doc) {
  try {
    GeneratorProfile profile;
    profile.label_name = doc.value("label_name", std::string("fall"));
    profile.counts = {doc.at("positives").get<std::size_t>(), doc.at("negatives").get<std::size_t>()};
    profile.filler_count = doc.value("filler_count", std::size_t{0});
    for (const auto& entry : doc.at("variables")) {
      CalibratedVariable var;
      var.name = entry.at("name").get<std::string>();
      var.kind = parse_variable_kind(entry.at("kind").get<std::string>());
      var.fall = law_from_json(entry.at("fall"));
      var.nofall = law_from_json(entry.at("nofall"));
      if (entry.contains("lower")) var.lower = entry.at("lower").get<double>();
      if (entry.contains("upper")) var.upper = entry.at("upper").get<double>();
      var.description = entry.value("description", std::string());
      profile.variables.push_back(std::move(var));
    }
    profile.validate();
    return profile;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed generator profile: ") + e.what());
  }
}

GeneratorProfile GeneratorProfile::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("profile file " + path.string() + " is not valid JSON: " + e.what());
  }
}

ClassCounts scaled_counts(const ClassCounts& counts, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ArgumentError("scale must lie in (0, 1]");
  return {train_size(scale, counts.positives), train_size(scale, counts.negatives)};
}

Dataset generate(const GeneratorProfile& profile, double scale, std::uint64_t seed) {
  profile.validate();
  const ClassCounts counts = scaled_counts(profile.counts, scale);
  if (counts.positives < 2 || counts.negatives < 2) {
    throw ArgumentError("scale " + std::to_string(scale) + " leaves fewer than 2 rows in a class");
  }
  auto schema = std::make_shared<const Schema>(profile.schema());
  const auto vars = profile.expanded();
  const std::size_t n = counts.total();
  const std::size_t width = vars.size();

  Rng label_rng = make_rng(seed, "labels");
  std::vector<std::uint8_t> labels(n, 0);
  for (std::size_t i : sample_without_replacement(n, counts.positives, label_rng)) labels[i] = 1;

  std::vector<double> values(n * width);
  const std::uint64_t row_base = derive_seed(seed, "rows");
  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(row_base, std::to_string(i)));
    double* out = values.data() + i * width;
    for (std::size_t j = 0; j < width; ++j) {
      const auto& var = vars[j];
      out[j] = draw(rng, var, labels[i] ? var.fall : var.nofall);
    }
  });
  return Dataset(std::move(schema), std::move(values), std::move(labels));
}

}  // namespace incident
