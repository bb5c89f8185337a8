"""Clustering functional data with a mixture of segmentations."""

from .baselines import fit_simple_mix, fit_simple_seg
from .em import DegenerateFitError, EMConfig, EmptyClusterError, InitMethod, fit
from .metrics import EvalReport, ari, evaluate, hausdorff, nce
from .selection import SelectionResult, bic, search
from .simulate import Scenario, SimSpec, TimeGrid, generate
from .types import CoefficientTensor, FitReport, FunctionalDataset, ModelConfig, ModelParams
from .wavelet import WaveletConfig, project_dataset

__all__ = [
    "CoefficientTensor", "DegenerateFitError", "EMConfig", "EmptyClusterError", "EvalReport",
    "FitReport", "FunctionalDataset", "InitMethod", "ModelConfig", "ModelParams", "Scenario",
    "SelectionResult", "SimSpec", "TimeGrid", "WaveletConfig", "ari", "bic", "evaluate", "fit",
    "fit_simple_mix", "fit_simple_seg", "generate", "hausdorff", "nce", "project_dataset", "search",
]
