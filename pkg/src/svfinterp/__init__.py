"""Approximation of set-valued functions with interval-union values."""

from .errors import (AmbiguousGapError, ClassificationError, DomainError, ModelInconsistencyError,
                     NoRootInBracket, ReconstructionError, SampleFileError, SvfError)
from .reconstruct import (Approximant, evaluate_approximant, reconstruct, reconstruct_c4,
                          reconstruct_holder, reconstruct_metric_poly)
from .sets import CompactSet, hausdorff, metric_pairs
from .svf_model import SampleSet, SvfModel, builtin, evaluate, sample, sample_model

__version__ = "0.1.0"

__all__ = [
    "AmbiguousGapError", "ClassificationError", "DomainError", "ModelInconsistencyError",
    "NoRootInBracket", "ReconstructionError", "SampleFileError", "SvfError",
    "Approximant", "evaluate_approximant", "reconstruct", "reconstruct_c4", "reconstruct_holder",
    "reconstruct_metric_poly", "CompactSet", "hausdorff", "metric_pairs", "SampleSet", "SvfModel",
    "builtin", "evaluate", "sample", "sample_model",
]
