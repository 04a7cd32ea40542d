"""Fall-incident prediction benchmark: datasets, resampling, classifiers, screening and experiments."""

from ._core import (
    ArgumentError,
    ConvergenceError,
    Dataset,
    DegenerateClassError,
    IncidentError,
    IoError,
    Model,
    ParseError,
    Report,
    Schema,
    SchemaError,
    UndefinedMetricError,
    ValueError,
    confusion,
    generate,
    load_csv,
    metrics,
    point_biserial,
    resample,
    run_experiment,
    screen_variable,
    split_minority_first,
    split_random,
    train,
    write_csv,
)

__all__ = [
    "ArgumentError",
    "ConvergenceError",
    "Dataset",
    "DegenerateClassError",
    "IncidentError",
    "IoError",
    "Model",
    "ParseError",
    "Report",
    "Schema",
    "SchemaError",
    "UndefinedMetricError",
    "ValueError",
    "confusion",
    "generate",
    "load_csv",
    "metrics",
    "point_biserial",
    "resample",
    "run_experiment",
    "screen_variable",
    "split_minority_first",
    "split_random",
    "train",
    "write_csv",
]
