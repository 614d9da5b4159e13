"""Gauss-Legendre rules on intervals."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, order: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on [a, b]."""
    x, w = _leggauss(int(order))
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def oscillation_order(length: float, frequency: float, per_wavelength: float = 6.0, minimum: int = 48) -> int:
    """Node count resolving `frequency` cycles per unit length over `length`."""
    return max(minimum, int(math.ceil(per_wavelength * length * frequency)))
