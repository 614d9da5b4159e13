"""Unit-speed curves on the torus R^2/Z^2 and their tangent functionals.

Curves are kept as smooth lifts to R^2; reduction mod 1 is never needed
because every kernel downstream is 1-periodic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import mpmath as mp
import numpy as np

from .errors import CurveTooLarge, InvalidCurve, InvalidDirection, InvalidRange, ZeroCurvature
from .quadrature import gauss_legendre

VecFn = Callable[[np.ndarray], np.ndarray]

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class CircleArcSpec:
    radius: float
    arc_angle: float
    center: tuple[float, float] = (0.5, 0.5)
    phase: float = 0.0

    @property
    def length(self) -> float:
        return self.radius * self.arc_angle


@dataclass(frozen=True, eq=False)
class TorusCurve:
    """Arc-length parametrized curve t -> gamma(t), t in [0, length].

    position/velocity/acceleration accept scalars or 1-d arrays of t and
    return arrays of shape (..., 2).
    """

    length: float
    _position: VecFn
    _velocity: VecFn
    _acceleration: VecFn
    kind: str = "custom"
    arc: Optional[CircleArcSpec] = None

    def position(self, t):
        return self._position(np.asarray(t, dtype=float))

    def velocity(self, t):
        return self._velocity(np.asarray(t, dtype=float))

    def acceleration(self, t):
        return self._acceleration(np.asarray(t, dtype=float))

    def tangent_angle(self, t):
        """phi(t) with velocity = (cos phi, sin phi); continuous in t."""
        t = np.asarray(t, dtype=float)
        if self.arc is not None:
            return self.arc.phase + t / self.arc.radius + math.pi / 2
        v = self.velocity(t)
        phi = np.arctan2(v[..., 1], v[..., 0])
        return np.unwrap(phi) if phi.ndim else phi

    def curvature(self, t):
        return np.linalg.norm(self.acceleration(t), axis=-1)

    def min_curvature(self, samples: int = 1000) -> float:
        return float(self.curvature(np.linspace(0.0, self.length, samples)).min())

    def require_curved(self, samples: int = 1000, tol: float = 1e-9) -> None:
        if self.min_curvature(samples) <= tol:
            raise ZeroCurvature("curve must have nowhere-zero curvature for variance predictions")

    def check_t(self, t: float) -> None:
        if not (-1e-12 <= t <= self.length * (1 + 1e-12) + 1e-12):
            raise InvalidRange(f"t={t} outside [0, {self.length}]")

    def mp_frame(self, t):
        """(position, velocity) at an mpmath scalar t; circle arcs only."""
        if self.arc is None:
            raise NotImplementedError("high-precision evaluation is available for circle arcs")
        a = self.arc
        ang = mp.mpf(a.phase) + t / mp.mpf(a.radius)
        c, s = mp.cos(ang), mp.sin(ang)
        r = mp.mpf(a.radius)
        return (mp.mpf(a.center[0]) + r * c, mp.mpf(a.center[1]) + r * s), (-s, c)

    def describe(self) -> str:
        if self.arc is not None:
            a = self.arc
            return f"circle:r={a.radius!r},arc={a.arc_angle!r},cx={a.center[0]!r},cy={a.center[1]!r},phase={a.phase!r}"
        return f"custom:L={self.length!r}"


def make_circle_arc(spec: CircleArcSpec) -> TorusCurve:
    r, arc = spec.radius, spec.arc_angle
    if not 0.0 < r < 0.5:
        raise CurveTooLarge(f"radius {r} must lie in (0, 1/2)")
    if not 0.0 < arc <= 2 * math.pi + 1e-12:
        raise InvalidRange(f"arc angle {arc} must lie in (0, 2 pi]")
    cx, cy = spec.center
    ph = spec.phase

    def pos(t):
        a = ph + t / r
        return np.stack([cx + r * np.cos(a), cy + r * np.sin(a)], axis=-1)

    def vel(t):
        a = ph + t / r
        return np.stack([-np.sin(a), np.cos(a)], axis=-1)

    def acc(t):
        a = ph + t / r
        return np.stack([-np.cos(a) / r, -np.sin(a) / r], axis=-1)

    return TorusCurve(r * arc, pos, vel, acc, kind="circle-arc", arc=spec)


def make_custom_curve(length: float, position: VecFn, velocity: VecFn, acceleration: VecFn,
                      grid: int = 1000) -> TorusCurve:
    """Wrap user callables, checking unit speed and <v, a> = 0 on a grid."""
    if not length > 0:
        raise InvalidRange("length must be positive")
    curve = TorusCurve(float(length), position, velocity, acceleration, kind="custom")
    t = np.linspace(0.0, length, grid)
    v = curve.velocity(t)
    a = curve.acceleration(t)
    if np.max(np.abs(np.linalg.norm(v, axis=-1) - 1.0)) > UNIT_TOL:
        raise InvalidCurve("velocity is not unit length: curve is not arc-length parametrized")
    if np.max(np.abs((v * a).sum(-1))) > UNIT_TOL:
        raise InvalidCurve("acceleration is not orthogonal to velocity")
    return curve


def make_segment(start: tuple[float, float], angle: float, length: float) -> TorusCurve:
    """Straight segment; only for checks that hold without curvature."""
    d = np.array([math.cos(angle), math.sin(angle)])
    p0 = np.asarray(start, dtype=float)

    def pos(t):
        return p0 + np.multiply.outer(t, d)

    def vel(t):
        return np.broadcast_to(d, np.shape(t) + (2,)).copy()

    def acc(t):
        return np.zeros(np.shape(t) + (2,))

    return make_custom_curve(length, pos, vel, acc)


def parse_curve(text: str) -> TorusCurve:
    """Parse `circle:r=<float>,arc=<float>[,cx=..,cy=..,phase=..]`."""
    kind, _, rest = text.partition(":")
    if kind != "circle":
        raise ValueError(f"unknown curve kind {kind!r}")
    fields = {"cx": 0.5, "cy": 0.5, "phase": 0.0}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in ("r", "arc", "cx", "cy", "phase"):
            raise ValueError(f"bad curve field {item!r}")
        fields[key] = float(val)
    if "r" not in fields or "arc" not in fields:
        raise ValueError("circle curve needs r= and arc=")
    return make_circle_arc(CircleArcSpec(fields["r"], fields["arc"], (fields["cx"], fields["cy"]), fields["phase"]))


# ----------------------------------------------------------------------------
# tangent functionals


def _unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    if d.shape != (2,) or abs(np.hypot(*d) - 1.0) > UNIT_TOL:
        raise InvalidDirection(f"direction {direction} is not a unit vector")
    return d


def tangent_energy(curve: TorusCurve, direction, order: int = 128, panels: int = 4) -> float:
    """int_0^L <theta, gamma'(t)>^2 dt."""
    d = _unit(direction)
    if curve.arc is not None:
        a = curve.arc
        vt = math.atan2(d[1], d[0])
        phi0 = a.phase + math.pi / 2
        phiL = phi0 + a.arc_angle
        return curve.length / 2 + a.radius / 4 * (math.sin(2 * (vt - phi0)) - math.sin(2 * (vt - phiL)))
    return tangent_energy_quad(curve, d, order, panels)


def tangent_energy_quad(curve: TorusCurve, direction, order: int = 128, panels: int = 4) -> float:
    d = _unit(direction)
    t, w = gauss_legendre(0.0, curve.length, order, panels)
    return float(w @ (curve.velocity(t) @ d) ** 2)


def tangent_energies(curve: TorusCurve, angles: np.ndarray, order: int = 128, panels: int = 4) -> np.ndarray:
    """tangent_energy for many directions theta = (cos a, sin a) at once."""
    angles = np.asarray(angles, dtype=float)
    if curve.arc is not None:
        a = curve.arc
        phi0 = a.phase + math.pi / 2
        phiL = phi0 + a.arc_angle
        return curve.length / 2 + a.radius / 4 * (np.sin(2 * (angles - phi0)) - np.sin(2 * (angles - phiL)))
    t, w = gauss_legendre(0.0, curve.length, order, panels)
    v = curve.velocity(t)
    proj = v @ np.stack([np.cos(angles), np.sin(angles)])
    return w @ proj**2


def curve_integral_I(curve: TorusCurve, order: int = 128, panels: int = 4) -> complex:
    """int_0^L exp(2 i phi(t)) dt; vanishes iff the leading constant vanishes for every measure."""
    if curve.arc is not None:
        a = curve.arc
        phi0 = a.phase + math.pi / 2
        phiL = phi0 + a.arc_angle
        return a.radius / 2j * (np.exp(2j * phiL) - np.exp(2j * phi0))
    return curve_integral_I_quad(curve, order, panels)


def curve_integral_I_quad(curve: TorusCurve, order: int = 128, panels: int = 4) -> complex:
    t, w = gauss_legendre(0.0, curve.length, order, panels)
    v = curve.velocity(t)
    # e^{2 i phi} = (v_x + i v_y)^2 avoids unwrapping the angle
    return complex(w @ (v[:, 0] + 1j * v[:, 1]) ** 2)
