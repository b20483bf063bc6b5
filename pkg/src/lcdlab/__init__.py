"""Simulation, exact computation and closed-form theory for the LCD preferential-attachment model."""

from lcdlab.distributions import DegreeDistribution, degree_histogram
from lcdlab.errors import GuardError
from lcdlab.process import (
    GraphState,
    NumericMode,
    Pairing,
    ProcessParams,
    generate,
    pairing_to_graph,
    sample_pairing,
    step_m1,
)

__all__ = [
    "DegreeDistribution",
    "GraphState",
    "GuardError",
    "NumericMode",
    "Pairing",
    "ProcessParams",
    "degree_histogram",
    "generate",
    "pairing_to_graph",
    "sample_pairing",
    "step_m1",
]
__version__ = "0.1.0"
