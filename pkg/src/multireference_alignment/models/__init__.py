"""
Option models and result containers
"""

from .options import EmOptions, ExperimentConfig, GeneratorConfig, LsOptions, SpectralOptions
from .results import (
    AlignmentResult,
    BoundReport,
    EmState,
    ExperimentReport,
    MomentPair,
    MomentTensor,
    ObservationSet,
    PerturbationDirection,
    RecoveryResult,
    SpikedPrediction,
)
