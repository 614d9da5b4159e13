"""Zeros of arithmetic random waves on the torus along curves: lattice
arithmetic, Kac-Rice predictions and Monte Carlo."""

from __future__ import annotations

__version__ = "0.1.0"

from .curve import CircleArcSpec, TorusCurve, make_circle_arc, parse_curve
from .kacrice import PredictionReport, expected_count, kac_rice_variance, variance_prediction
from .lattice import LatticePointSet, enumerate_lattice_points, r2_count
from .montecarlo import SimulationReport, count_zeros, run_experiment, sample_wave

__all__ = [
    "CircleArcSpec",
    "LatticePointSet",
    "PredictionReport",
    "SimulationReport",
    "TorusCurve",
    "count_zeros",
    "enumerate_lattice_points",
    "expected_count",
    "kac_rice_variance",
    "make_circle_arc",
    "parse_curve",
    "r2_count",
    "run_experiment",
    "sample_wave",
    "variance_prediction",
]
