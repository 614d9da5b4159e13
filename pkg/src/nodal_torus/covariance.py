"""The restricted covariance r(t1, t2) = r_F(gamma(t1) - gamma(t2)) and its derivatives.

With theta_mu = 2 pi <mu, gamma(t1) - gamma(t2)> and u_i = 2 pi <mu, gamma'(t_i)>:

    r   = (1/N) sum cos(theta)
    r1  = -(1/N) sum sin(theta) u1
    r2  = (1/N) sum sin(theta) u2
    r12 = (1/N) sum cos(theta) u1 u2
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .curve import TorusCurve
from .errors import DegenerateJet, EmptySpectrum
from .lattice import LatticePointSet

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CovarianceJet:
    r: float
    r1: float
    r2: float
    r12: float


@dataclass(frozen=True)
class ConditionedFactors:
    m_factor: float
    rho: float
    det_sigma: float


@dataclass(frozen=True)
class DiagonalMoments:
    alpha: float
    s2: float  # (1/N) sum <mu, gamma'>^2
    s4: float
    s6: float
    a_of_t: float  # tau4 * cos(4 phi(t))

    @property
    def c_m(self) -> float:
        """Directional part of d^4 r / d t2^4 on the diagonal."""
        return TWO_PI**4 * self.s4

    @property
    def e_m(self) -> float:
        """Directional part of d^6 r / d t2^6 on the diagonal."""
        return -(TWO_PI**6) * self.s6


def _require(lset: LatticePointSet) -> None:
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")


def covariance_jet(lset: LatticePointSet, curve: TorusCurve, t1: float, t2: float) -> CovarianceJet:
    _require(lset)
    curve.check_t(t1)
    curve.check_t(t2)
    mu = lset.array
    d = curve.position(t1) - curve.position(t2)
    theta = TWO_PI * (mu @ d)
    u1 = TWO_PI * (mu @ curve.velocity(t1))
    u2 = TWO_PI * (mu @ curve.velocity(t2))
    c, s = np.cos(theta), np.sin(theta)
    n = lset.n
    return CovarianceJet(
        math.fsum(c) / n,
        -math.fsum(s * u1) / n,
        math.fsum(s * u2) / n,
        math.fsum(c * u1 * u2) / n,
    )


@dataclass(frozen=True)
class CurveSpectrum:
    """cos/sin of 2 pi <mu, gamma(t)> and 2 pi <mu, gamma'(t)> at a set of nodes."""

    cos: np.ndarray  # (nodes, N)
    sin: np.ndarray
    u: np.ndarray

    @classmethod
    def build(cls, lset: LatticePointSet, curve: TorusCurve, t: np.ndarray) -> "CurveSpectrum":
        _require(lset)
        mu = lset.array
        ph = TWO_PI * (curve.position(t) @ mu.T)
        return cls(np.cos(ph), np.sin(ph), TWO_PI * (curve.velocity(t) @ mu.T))


def jet_grid(lset: LatticePointSet, a: CurveSpectrum, b: CurveSpectrum):
    """r, r1, r2, r12 on the tensor grid a x b, each of shape (len(a), len(b))."""
    n = lset.n
    ca, sa, ua = a.cos, a.sin, a.u
    cb, sb, ub = b.cos, b.sin, b.u
    # cos(x - y) = cx cy + sx sy ;  sin(x - y) = sx cy - cx sy
    r = (ca @ cb.T + sa @ sb.T) / n
    r1 = -((sa * ua) @ cb.T - (ca * ua) @ sb.T) / n
    r2 = (sa @ (cb * ub).T - ca @ (sb * ub).T) / n
    r12 = ((ca * ua) @ (cb * ub).T + (sa * ua) @ (sb * ub).T) / n
    return r, r1, r2, r12


def jet_pairs(lset: LatticePointSet, curve: TorusCurve, t1: np.ndarray, t2: np.ndarray):
    """Jets at paired parameters (t1[k], t2[k]); arrays of shape (K,)."""
    _require(lset)
    mu = lset.array
    d = curve.position(t1) - curve.position(t2)
    theta = TWO_PI * (d @ mu.T)
    u1 = TWO_PI * (curve.velocity(t1) @ mu.T)
    u2 = TWO_PI * (curve.velocity(t2) @ mu.T)
    c, s = np.cos(theta), np.sin(theta)
    n = lset.n
    return c.sum(1) / n, -(s * u1).sum(1) / n, (s * u2).sum(1) / n, (c * u1 * u2).sum(1) / n


def covariance_jet_mp(lset: LatticePointSet, curve: TorusCurve, t1, t2, dps: int = 60):
    """High-precision jet (mpmath) for cancellation-sensitive probes near the diagonal."""
    _require(lset)
    with mp.workdps(dps):
        t1, t2 = mp.mpf(t1), mp.mpf(t2)
        p1, v1 = curve.mp_frame(t1)
        p2, v2 = curve.mp_frame(t2)
        dx, dy = p1[0] - p2[0], p1[1] - p2[1]
        r = r1 = r2 = r12 = mp.mpf(0)
        tp = 2 * mp.pi
        for x, y in lset.points:
            th = tp * (x * dx + y * dy)
            c, s = mp.cos(th), mp.sin(th)
            u1 = tp * (x * v1[0] + y * v1[1])
            u2 = tp * (x * v2[0] + y * v2[1])
            r += c
            r1 -= s * u1
            r2 += s * u2
            r12 += c * u1 * u2
        n = lset.n
        return r / n, r1 / n, r2 / n, r12 / n


def conditioned_factors(jet: CovarianceJet, alpha: float) -> ConditionedFactors:
    r, r1, r2, r12 = jet.r, jet.r1, jet.r2, jet.r12
    if abs(r) >= 1.0:
        raise DegenerateJet(f"|r| = {abs(r)} >= 1: conditioning on two zeros is singular")
    one = 1.0 - r * r
    a1 = alpha * one - r1 * r1
    a2 = alpha * one - r2 * r2
    tol = 1e-12 * alpha
    if a1 < -tol or a2 < -tol:
        raise DegenerateJet(f"negative conditional variance ({a1:.3e}, {a2:.3e})")
    m_factor = math.sqrt(max(a1, 0.0)) * math.sqrt(max(a2, 0.0))
    num = r12 * one + r * r1 * r2
    if m_factor == 0.0:
        rho = math.copysign(1.0, num) if num else 0.0
    else:
        rho = num / m_factor
    rho_c = min(1.0, max(-1.0, rho))
    det = m_factor**2 * (1.0 - rho_c * rho_c) / one
    return ConditionedFactors(m_factor, rho, det)


def diagonal_moments(lset: LatticePointSet, curve: TorusCurve, t: float) -> DiagonalMoments:
    _require(lset)
    v = curve.velocity(t)
    p = lset.array @ v
    p2 = p * p
    n = lset.n
    phi = float(curve.tangent_angle(t))
    return DiagonalMoments(
        alpha=lset.alpha,
        s2=math.fsum(p2) / n,
        s4=math.fsum(p2 * p2) / n,
        s6=math.fsum(p2 * p2 * p2) / n,
        a_of_t=lset.tau4 * math.cos(4 * phi),
    )
