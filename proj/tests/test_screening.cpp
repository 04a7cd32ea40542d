#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "incident/errors.hpp"
#include "incident/screening.hpp"
#include "support.hpp"

using namespace incident;

TEST_SUITE("screening") {

TEST_CASE("point-biserial values") {
  std::vector<double> v{0, 0, 1, 1};
  std::vector<std::uint8_t> y{0, 0, 1, 1};
  std::vector<std::uint8_t> flipped{1, 1, 0, 0};
  CHECK(point_biserial(v, y).value == doctest::Approx(1.0));
  CHECK(point_biserial(v, flipped).value == doctest::Approx(-1.0));
  std::vector<double> ramp{1, 2, 3, 4};
  std::vector<std::uint8_t> alt{0, 1, 0, 1};
  // Hand computation: cov = 0.25, sd_x = sqrt(1.25), sd_y = 0.5.
  CHECK(point_biserial(ramp, alt).value == doctest::Approx(0.25 / (std::sqrt(1.25) * 0.5)).epsilon(1e-12));
  std::vector<double> flat{3, 3, 3, 3};
  auto c = point_biserial(flat, alt);
  CHECK(c.value == 0.0);
  CHECK(c.degenerate);
}

TEST_CASE("point-biserial is invariant under positive affine maps") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v, w;
    std::vector<std::uint8_t> y;
    double a = 0.1 + 10 * uniform_unit(rng), b = 100 * (uniform_unit(rng) - 0.5);
    for (int i = 0; i < 30; ++i) {
      v.push_back(uniform_unit(rng));
      w.push_back(a * v.back() + b);
      y.push_back(i % 3 == 0);
    }
    auto r = point_biserial(v, y).value;
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(point_biserial(w, y).value - r) <= 1e-9);
  }
}

TEST_CASE("class-conditional statistics") {
  std::vector<double> v{1, 3};
  std::vector<std::uint8_t> y{0, 1};
  auto s = class_conditional_stats(v, y);
  CHECK(s.mean_all == 2.0);
  CHECK(s.mean_fall == 3.0);
  CHECK(s.mean_nofall == 1.0);
  CHECK(s.median_all == 2.0);

  std::vector<double> odd{5, 1, 4, 2, 3, 10};
  std::vector<std::uint8_t> lab{1, 1, 1, 0, 0, 0};
  auto t = class_conditional_stats(odd, lab);
  CHECK(t.median_fall == 4.0);
  CHECK(t.median_nofall == 3.0);
  CHECK(t.median_all == 3.5);

  std::vector<std::uint8_t> one_class{1, 1};
  CHECK_THROWS_AS(class_conditional_stats(v, one_class), DegenerateClassError);
}

TEST_CASE("mean_all is the class-weighted combination") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v;
    std::vector<std::uint8_t> y;
    std::size_t n = 4 + uniform_index(rng, 60);
    for (std::size_t i = 0; i < n; ++i) {
      v.push_back(1000 * uniform_unit(rng));
      y.push_back(i < 2 ? static_cast<std::uint8_t>(i) : bernoulli_draw(rng, 0.3));
    }
    auto s = class_conditional_stats(v, y);
    double pos = 0, sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pos += y[i];
      sum += v[i];
    }
    double combined = (s.mean_fall * pos + s.mean_nofall * (n - pos)) / n;
    CHECK(std::abs(combined - s.mean_all) <= 1e-9 * std::abs(s.mean_all));
    CHECK(std::abs(sum / n - s.mean_all) <= 1e-9 * std::abs(s.mean_all));
  }
}

TEST_CASE("label-independent variable has small correlation at n = 100000") {
  Rng rng(5);
  std::vector<double> v;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 100000; ++i) {
    v.push_back(normal_draw(rng, 50, 10));
    y.push_back(bernoulli_draw(rng, 0.0118));
  }
  CHECK(std::abs(point_biserial(v, y).value) < 0.05);
}

TEST_CASE("guideline filter") {
  ScreeningRow keep{"age", 0.9147, 0.0155};
  ScreeningRow baseline{"all", 1.0, 0.0118};
  ScreeningRow edge{"edge", 0.8, 0.02};
  std::vector<ScreeningRow> rows{keep, baseline, edge, keep};
  auto kept = guideline_filter(rows);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].variable == "age");
  CHECK(guideline_filter(kept).size() == 2);
  CHECK(guideline_filter(std::vector<ScreeningRow>{}).empty());
}

TEST_CASE("screen_variable on planted and constant columns") {
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;
  Rng rng(6);
  // 1% positives, so an all-positive predictor sits below the precision bar.
  for (int i = 0; i < 3000; ++i) {
    std::uint8_t y = i < 30 ? 1 : 0;
    rows.push_back({static_cast<double>(y), 7.0, normal_draw(rng, 0, 1)});
    labels.push_back(y);
  }
  Dataset d = testing::make_dataset(rows, labels, 0);
  ScreeningOptions options;

  auto planted = screen_variable(d, "x0", options, 11);
  CHECK(planted.recall == 1.0);
  CHECK(planted.precision == 1.0);
  CHECK(planted.correlation.value == doctest::Approx(1.0));
  CHECK_FALSE(planted.degenerate);
  CHECK(guideline_filter(std::vector<ScreeningRow>{planted}).size() == 1);

  auto constant = screen_variable(d, "x1", options, 11);
  CHECK(constant.correlation.value == 0.0);
  CHECK(constant.degenerate);
  CHECK(guideline_filter(std::vector<ScreeningRow>{constant}).empty());

  CHECK_THROWS_AS(screen_variable(d, "missing", options, 1), ArgumentError);

  auto again = screen_variable(d, "x2", options, 11);
  auto repeat = screen_variable(d, "x2", options, 11);
  CHECK(again.recall == repeat.recall);
  CHECK(again.precision == repeat.precision);
  CHECK(again.recall_model == repeat.recall_model);
}

TEST_CASE("screen-resample switch") {
  CHECK(parse_screen_resample("rus") == ScreenResample::Rus);
  CHECK(parse_screen_resample("none") == ScreenResample::None);
  CHECK_THROWS_AS(parse_screen_resample("smote"), ArgumentError);
}

}  // TEST_SUITE
