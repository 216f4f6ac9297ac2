"""Training-free recognition of synthesized face sketches with full-reference IQA metrics."""

from .errors import (
    ConfigurationError,
    DataError,
    DegenerateDataError,
    FormatError,
    NumericalError,
    ParameterError,
    ShapeError,
    SizeError,
    SketchIQAError,
)
from .evaluation import (
    CMCCurve,
    EigenfaceSpec,
    EvalReport,
    SplitProtocol,
    cmc,
    compare_methods,
    evaluate_framework,
    export_report,
    load_report,
    repeated_split_eval,
)
from .metrics import MetricKind, MetricParams, MetricScore, Polarity, compute_metric
from .recognition import (
    EigenfaceModel,
    Gallery,
    GalleryKind,
    MatchResult,
    eigenface_match,
    eigenface_train,
    knn_direct,
    match_probe,
)
from .synthesis import SynthesisParams, TrainingPair, build_gallery, synthesize_sketch

__version__ = "0.1.0"
