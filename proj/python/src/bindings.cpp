#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "incident/classifiers.hpp"
#include "incident/errors.hpp"
#include "incident/evaluation.hpp"
#include "incident/experiments.hpp"
#include "incident/report.hpp"
#include "incident/resampling.hpp"
#include "incident/screening.hpp"
#include "incident/synth.hpp"

namespace py = pybind11;
using namespace incident;

namespace {

py::array_t<double> values_array(const Dataset& d) {
  py::array_t<double> out({d.rows(), d.width()});
  std::copy(d.values().begin(), d.values().end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> labels_array(std::span<const std::uint8_t> labels) {
  py::array_t<std::uint8_t> out(labels.size());
  std::copy(labels.begin(), labels.end(), out.mutable_data());
  return out;
}

Dataset make_dataset(const Schema& schema, py::array_t<double, py::array::c_style | py::array::forcecast> values,
                     py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> labels) {
  if (values.ndim() != 2) throw ArgumentError("values must be a 2-D array");
  if (labels.ndim() != 1) throw ArgumentError("labels must be a 1-D array");
  if (static_cast<std::size_t>(values.shape(1)) != schema.encoded_width()) {
    throw ArgumentError("values have " + std::to_string(values.shape(1)) + " columns, schema encodes " +
                        std::to_string(schema.encoded_width()));
  }
  std::vector<double> flat(values.data(), values.data() + values.size());
  std::vector<std::uint8_t> y(labels.data(), labels.data() + labels.size());
  return Dataset(std::make_shared<const Schema>(schema), std::move(flat), std::move(y));
}

std::vector<std::uint8_t> as_labels(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
  return {a.data(), a.data() + a.size()};
}

py::object cell_value(const Cell& cell) {
  struct {
    py::object operator()(std::monostate) const { return py::none(); }
    py::object operator()(const std::string& s) const { return py::str(s); }
    py::object operator()(std::int64_t v) const { return py::int_(v); }
    py::object operator()(double v) const { return py::float_(v); }
  } visitor;
  return std::visit(visitor, cell);
}

py::dict confusion_dict(const ConfusionMatrix& cm) {
  py::dict d;
  d["tp"] = cm.tp;
  d["tn"] = cm.tn;
  d["fp"] = cm.fp;
  d["fn"] = cm.fn;
  return d;
}

py::dict screening_dict(const ScreeningRow& row) {
  py::dict d;
  d["variable"] = row.variable;
  d["recall"] = row.recall;
  d["precision"] = row.precision;
  d["recall_model"] = row.recall_model;
  d["precision_model"] = row.precision_model;
  d["correlation"] = row.correlation.value;
  d["mean_all"] = row.stats.mean_all;
  d["median_all"] = row.stats.median_all;
  d["mean_fall"] = row.stats.mean_fall;
  d["median_fall"] = row.stats.median_fall;
  d["mean_nofall"] = row.stats.mean_nofall;
  d["median_nofall"] = row.stats.median_nofall;
  d["degenerate"] = row.degenerate;
  return d;
}

Hyperparams hyperparams_from(const py::kwargs& kw) {
  Hyperparams hp;
  for (const auto& [key, value] : kw) {
    const auto name = key.cast<std::string>();
    if (name == "svm_lambda") {
      hp.svm.lambda = value.cast<double>();
    } else if (name == "svm_epochs") {
      hp.svm.epochs = value.cast<std::size_t>();
    } else if (name == "logreg_lambda") {
      hp.logreg.lambda = value.cast<double>();
    } else if (name == "gbm_stages") {
      hp.gbm.stages = value.cast<std::size_t>();
    } else if (name == "gbm_rate") {
      hp.gbm.learning_rate = value.cast<double>();
    } else if (name == "gbm_depth") {
      hp.gbm.max_depth = value.cast<std::size_t>();
    } else if (name == "k") {
      hp.knn.k = value.cast<std::size_t>();
    } else {
      throw ArgumentError("unknown hyperparameter '" + name + "'");
    }
  }
  hp.validate();
  return hp;
}

ExperimentConfig config_from(const py::kwargs& kw) {
  ExperimentConfig cfg;
  py::dict hyper;
  for (const auto& [key, value] : kw) {
    const auto name = key.cast<std::string>();
    if (name == "synth") {
      cfg.source.synth = value.cast<std::string>();
    } else if (name == "data") {
      cfg.source.data_path = value.cast<std::string>();
    } else if (name == "schema") {
      cfg.source.schema_path = value.cast<std::string>();
    } else if (name == "scale") {
      cfg.source.scale = value.cast<double>();
    } else if (name == "seed") {
      cfg.seed = value.cast<std::uint64_t>();
    } else if (name == "train_fraction") {
      cfg.train_fraction = value.cast<double>();
    } else if (name == "algorithms") {
      cfg.algorithms.clear();
      for (const auto& a : value.cast<std::vector<std::string>>()) cfg.algorithms.push_back(parse_algorithm(a));
    } else if (name == "strategies") {
      cfg.strategies.clear();
      for (const auto& s : value.cast<std::vector<std::string>>()) cfg.strategies.push_back(parse_strategy(s));
    } else if (name == "knn_max_k") {
      cfg.knn_max_k = value.cast<std::size_t>();
    } else if (name == "split_first") {
      cfg.split_first = value.cast<bool>();
    } else if (name == "screen_resample") {
      cfg.screen_resample = parse_screen_resample(value.cast<std::string>());
    } else if (name == "variables") {
      cfg.variables = value.cast<std::vector<std::string>>();
    } else {
      hyper[key] = value;
    }
  }
  cfg.hyperparams = hyperparams_from(py::kwargs(hyper));
  if (cfg.source.synth.empty() && cfg.source.data_path.empty()) cfg.source.synth = "table-v";
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fall-incident prediction benchmark core";

  auto base = py::register_exception<Error>(m, "IncidentError", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValueError>(m, "ValueError", base.ptr());
  py::register_exception<DegenerateClassError>(m, "DegenerateClassError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Schema, std::shared_ptr<Schema>>(m, "Schema")
      .def_static("from_json", [](const std::string& text) { return Schema::from_json(nlohmann::json::parse(text)); })
      .def_static("load", &Schema::load_json, py::arg("path"))
      .def("to_json", [](const Schema& s) { return s.to_json().dump(); })
      .def("save", &Schema::save_json, py::arg("path"))
      .def_property_readonly("label_name", &Schema::label_name)
      .def_property_readonly("columns",
                             [](const Schema& s) {
                               std::vector<std::string> names;
                               for (const auto& c : s.columns()) names.push_back(c.name);
                               return names;
                             })
      .def_property_readonly("variables",
                             [](const Schema& s) {
                               std::vector<std::string> names;
                               for (const auto& v : s.variables()) names.push_back(v.name);
                               return names;
                             })
      .def_property_readonly("fingerprint", [](const Schema& s) { return fingerprint_hex(s.fingerprint()); });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("schema"), py::arg("values"), py::arg("labels"))
      .def_property_readonly("schema", [](const Dataset& d) { return std::make_shared<Schema>(d.schema()); })
      .def_property_readonly("rows", &Dataset::rows)
      .def_property_readonly("width", &Dataset::width)
      .def_property_readonly("columns",
                             [](const Dataset& d) {
                               std::vector<std::string> names;
                               for (const auto& c : d.schema().columns()) names.push_back(c.name);
                               return names;
                             })
      .def_property_readonly("values", &values_array)
      .def_property_readonly("labels", [](const Dataset& d) { return labels_array(d.labels()); })
      .def_property_readonly("fingerprint", [](const Dataset& d) { return fingerprint_hex(d.fingerprint()); })
      .def("class_counts",
           [](const Dataset& d) {
             auto c = class_counts(d);
             return py::make_tuple(c.positives, c.negatives);
           })
      .def("column", &Dataset::column, py::arg("index"))
      .def("__len__", &Dataset::rows);

  m.def(
      "generate",
      [](double scale, std::uint64_t seed, const std::string& profile) {
        DataSource source;
        source.synth = profile;
        source.scale = scale;
        return load_data(source, seed);
      },
      py::arg("scale") = 1.0, py::arg("seed") = 0, py::arg("profile") = "table-v",
      "Synthetic dataset; the seed is derived exactly as the CLI derives it.");
  m.def("load_csv",
        [](const std::filesystem::path& data, const std::filesystem::path& schema) {
          return load_csv(data, Schema::load_json(schema));
        },
        py::arg("data"), py::arg("schema"));
  m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));

  m.def(
      "split_minority_first",
      [](const Dataset& d, double fraction, std::uint64_t seed) {
        auto s = split_minority_first(d, fraction, seed);
        return py::make_tuple(s.train(), s.test());
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.9, py::arg("seed") = 0);
  m.def(
      "split_random",
      [](const Dataset& d, double fraction, std::uint64_t seed) {
        auto s = split_random(d, fraction, seed);
        return py::make_tuple(s.train, s.test);
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.9, py::arg("seed") = 0);
  m.def(
      "resample",
      [](const Dataset& d, const std::string& strategy, std::uint64_t seed) {
        return resample(d, parse_strategy(strategy), seed);
      },
      py::arg("dataset"), py::arg("strategy"), py::arg("seed") = 0, "strategy: rus, ros-stats or smote[:k]");

  py::class_<TrainedModel>(m, "Model")
      .def_property_readonly("id", &TrainedModel::id)
      .def_property_readonly("columns", &TrainedModel::columns)
      .def("predict", [](const TrainedModel& model, const Dataset& d) { return labels_array(predict_batch(model, d)); })
      .def("to_json", [](const TrainedModel& model) { return model.to_json().dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return TrainedModel::from_json(nlohmann::json::parse(text)); });
  m.def(
      "train",
      [](const std::string& algorithm, const Dataset& d, std::uint64_t seed, const py::kwargs& kw) {
        return train(parse_algorithm(algorithm), d, hyperparams_from(kw), seed);
      },
      py::arg("algorithm"), py::arg("dataset"), py::arg("seed") = 0,
      "algorithm: svm, logreg, gbm or knn; keyword hyperparameters svm_lambda, svm_epochs, logreg_lambda, "
      "gbm_stages, gbm_rate, gbm_depth, k");

  m.def(
      "confusion",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> predicted,
         py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> actual) {
        auto p = as_labels(predicted);
        auto a = as_labels(actual);
        return confusion_dict(confusion(p, a));
      },
      py::arg("predicted"), py::arg("actual"));
  m.def(
      "metrics",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> predicted, const Dataset& test) {
        auto p = as_labels(predicted);
        auto record = evaluate_test_predictions(p, test);
        py::dict d = confusion_dict(record.cm_test);
        d["accuracy"] = record.accuracy_test;
        d["recall"] = record.recall_test;
        d["precision"] = record.precision_test.value;
        d["precision_degenerate"] = record.precision_test.degenerate;
        return d;
      },
      py::arg("predicted"), py::arg("test"));

  m.def(
      "screen_variable",
      [](const Dataset& d, const std::string& column, std::uint64_t seed, const std::string& resample_mode) {
        ScreeningOptions options;
        options.resample = parse_screen_resample(resample_mode);
        return screening_dict(screen_variable(d, column, options, seed));
      },
      py::arg("dataset"), py::arg("column"), py::arg("seed") = 0, py::arg("resample") = "rus");
  m.def("point_biserial",
        [](const std::vector<double>& values,
           py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> labels) {
          auto y = as_labels(labels);
          auto c = point_biserial(values, y);
          return py::make_tuple(c.value, c.degenerate);
        },
        py::arg("values"), py::arg("labels"));

  py::class_<Report>(m, "Report")
      .def_readonly("id", &Report::id)
      .def_readonly("title", &Report::title)
      .def_readonly("columns", &Report::columns)
      .def_readonly("footer", &Report::footer)
      .def_property_readonly("rows",
                             [](const Report& r) {
                               py::list rows;
                               for (const auto& row : r.rows) {
                                 py::list cells;
                                 for (const auto& cell : row) cells.append(cell_value(cell));
                                 rows.append(cells);
                               }
                               return rows;
                             })
      .def(
          "render", [](const Report& r, const std::string& format) { return render_report(r, parse_report_format(format)); },
          py::arg("format") = "csv");

  m.def(
      "run_experiment",
      [](const std::string& name, const py::kwargs& kw) {
        ExperimentConfig cfg = config_from(kw);
        Dataset data = load_data(cfg.source, cfg.seed);
        py::gil_scoped_release release;
        if (name == "exp1") return std::vector<Report>{run_experiment1(cfg, data)};
        if (name == "exp2") return run_experiment2(cfg, data);
        if (name == "exp3") return run_experiment3(cfg, data);
        throw ArgumentError("experiment must be exp1, exp2 or exp3, got '" + name + "'");
      },
      py::arg("name"),
      "Run exp1, exp2 or exp3. Keywords: synth, data, schema, scale, seed, train_fraction, algorithms, "
      "strategies, knn_max_k, split_first, screen_resample, variables, and the train() hyperparameters.");
}
