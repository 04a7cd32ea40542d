#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "incident/errors.hpp"
#include "incident/screening.hpp"
#include "incident/synth.hpp"

using namespace incident;

namespace {

const CalibratedVariable& find(const GeneratorProfile& p, const std::string& name) {
  for (const auto& v : p.variables) {
    if (v.name == name) return v;
  }
  throw std::runtime_error("no variable " + name);
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("built-in profile carries the published means") {
  auto p = table_v_profile();
  CHECK(p.counts == ClassCounts{1213, 101986});
  CHECK(find(p, "Patient age").fall.mean == 68.3);
  CHECK(find(p, "Patient age").nofall.mean == 56.8);
  CHECK(find(p, "Patient age").fall.sd == 12.0);
  CHECK(find(p, "Patient age").nofall.sd == 18.0);
  CHECK(find(p, "Ophthalmology").nofall.mean == 0.0873);
  CHECK(find(p, "Gynecology").fall.mean == 0.022);
  CHECK(find(p, "Plan A-1").nofall.mean == 0.2636);
  CHECK(p.expanded().size() == 172);
  CHECK(p.schema().encoded_width() == 172);
}

TEST_CASE("profile JSON round trip") {
  auto p = table_v_profile();
  auto back = GeneratorProfile::from_json(p.to_json());
  CHECK(back.to_json() == p.to_json());
  auto doc = p.to_json();
  doc["variables"][0]["fall"]["sd"] = -1.0;
  CHECK_THROWS_AS(GeneratorProfile::from_json(doc), ArgumentError);
}

TEST_CASE("scaled counts") {
  CHECK(scaled_counts({1213, 101986}, 0.1) == ClassCounts{121, 10199});
  CHECK(scaled_counts({1213, 101986}, 1.0) == ClassCounts{1213, 101986});
  CHECK_THROWS_AS(scaled_counts({1213, 101986}, 0.0), ArgumentError);
  CHECK_THROWS_AS(scaled_counts({1213, 101986}, 1.5), ArgumentError);
  CHECK_THROWS_AS(generate(table_v_profile(), 0.001, 1), ArgumentError);
}

TEST_CASE("generation is reproducible and row-independent") {
  auto p = table_v_profile();
  auto a = generate(p, 0.02, 5);
  auto b = generate(p, 0.02, 5);
  auto c = generate(p, 0.02, 6);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(class_counts(a) == scaled_counts(p.counts, 0.02));
}

TEST_CASE("full-scale generation converges to the profile laws") {
  auto p = table_v_profile();
  Dataset d = generate(p, 1.0, 2024);
  REQUIRE(d.rows() == 103199);
  REQUIRE(d.width() == 172);
  auto labels = d.labels();
  const double n_pos = 1213;
  for (std::size_t j = 0; j < p.variables.size(); ++j) {
    const auto& var = p.variables[j];
    auto column = d.column(j);
    auto stats = class_conditional_stats(column, labels);
    INFO(var.name);
    if (var.kind == VariableKind::Binary) {
      CHECK(std::abs(stats.mean_nofall - var.nofall.mean) <= 0.01);
      // 0.01 is below one standard error for 1213 falls, so the fall class
      // gets the same three-standard-error band as the numeric means.
      double p_fall = var.fall.mean;
      CHECK(std::abs(stats.mean_fall - p_fall) <= 3 * std::sqrt(p_fall * (1 - p_fall) / n_pos));
    } else {
      CHECK(std::abs(stats.mean_fall - var.fall.mean) <= 3 * var.fall.sd / std::sqrt(n_pos));
    }
  }
  auto age = class_conditional_stats(d.column(0), labels);
  CHECK(std::abs(age.mean_fall - 68.3) <= 0.5);
  for (std::size_t j = 0; j < d.width(); ++j) {
    auto column = d.column(j);
    if (j == 0) {
      for (double x : column) {
        CHECK(x >= 0.0);
        CHECK(x <= 120.0);
      }
    }
    if (j >= p.variables.size()) CHECK(std::abs(point_biserial(column, labels).value) < 0.05);
  }
}

}  // TEST_SUITE
