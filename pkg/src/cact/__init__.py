"""Similarity of private signals and participation in collective action."""

from .population import Environment, PopulationModel, ThresholdModel
from .scenario import Profile, Scenario
from .signal_info import (
    InfoStructure,
    SignalSpace,
    SimilarityTransform,
    build_info_structure,
)

__version__ = "0.1.0"

__all__ = [
    "Environment",
    "InfoStructure",
    "PopulationModel",
    "Profile",
    "Scenario",
    "SignalSpace",
    "SimilarityTransform",
    "ThresholdModel",
    "build_info_structure",
]
