"""Closed-form predictions for the nodal intersection count and their quadratures."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import mpmath as mp
import numpy as np

from .covariance import CovarianceJet, CurveSpectrum, conditioned_factors, covariance_jet_mp, jet_grid, jet_pairs
from .curve import TorusCurve, tangent_energies
from .errors import (
    DegenerateJet,
    EmptySpectrum,
    ExpansionOutOfDomain,
    InvalidCorrelation,
    InvalidMeasure,
    ProbeDegenerate,
    QuadratureMismatch,
)
from .lattice import AngularMeasure, LatticePointSet, tau_fourier
from .quadrature import gauss_legendre

PANEL = 32  # Gauss-Legendre nodes per panel
NODES_PER_WAVELENGTH = 6.0
EPS2 = 0.5


class OutsideHypotheses(UserWarning):
    """|tau4| is at or near 1, where the variance asymptotics are not claimed."""


# ----------------------------------------------------------------------------
# densities


def zero_density_k1(m: int) -> float:
    return math.sqrt(2.0 * m)


def expected_count(m: int, curve: TorusCurve) -> float:
    return math.sqrt(2.0 * m) * curve.length


def g_func(rho: float) -> float:
    """E|Y1 Y2| for standard Gaussians with correlation rho."""
    if abs(rho) > 1.0 + 1e-12:
        raise InvalidCorrelation(f"|rho| = {abs(rho)} > 1")
    rho = min(1.0, max(-1.0, rho))
    return 2.0 / math.pi * (math.sqrt(1.0 - rho * rho) + rho * math.asin(rho))


def two_point_k2(jet: CovarianceJet, alpha: float) -> float:
    cf = conditioned_factors(jet, alpha)
    one = 1.0 - jet.r**2
    return cf.m_factor * (math.pi / 2) * g_func(cf.rho) / (math.pi**2 * one**1.5)


def two_point_k2_array(r, r1, r2, r12, alpha: float) -> np.ndarray:
    """Vectorized K2 for arrays of jets with |r| < 1."""
    r, r1, r2, r12 = map(np.asarray, (r, r1, r2, r12))
    if np.any(np.abs(r) >= 1):
        raise DegenerateJet("|r| >= 1 in jet array")
    one = 1.0 - r * r
    mf = np.sqrt(np.maximum(alpha * one - r1**2, 0.0)) * np.sqrt(np.maximum(alpha * one - r2**2, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.where(mf > 0, (r12 * one + r * r1 * r2) / mf, 0.0)
    rho = np.clip(rho, -1.0, 1.0)
    return mf * (np.sqrt(1 - rho**2) + rho * np.arcsin(rho)) / (math.pi**2 * one**1.5)


@dataclass(frozen=True)
class K2Expansion:
    main: float
    quartic: float


def k2_expansion(jet: CovarianceJet, alpha: float, eps2: float = EPS2) -> K2Expansion:
    """Quadratic main term of K2 - K1^2 and the quartic error scale."""
    if not abs(jet.r) < 1.0 - eps2:
        raise ExpansionOutOfDomain(f"|r| = {abs(jet.r)} not below {1 - eps2}")
    a = jet.r
    b = jet.r1 / math.sqrt(alpha)
    c = jet.r2 / math.sqrt(alpha)
    d = jet.r12 / alpha
    main = alpha / (2 * math.pi**2) * (a * a - b * b - c * c + d * d)
    quartic = a**4 + b**4 + c**4 + d**4
    return K2Expansion(main, quartic)


@dataclass(frozen=True)
class ExpansionResiduals:
    ratios: np.ndarray  # |K2 - K1^2 - main| / (alpha * quartic) per accepted jet
    accepted: int
    drawn: int

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max()) if self.accepted else float("nan")


def k2_expansion_residuals(lset: LatticePointSet, curve: TorusCurve, samples: int, seed: int = 0,
                           eps2: float = EPS2, batch: int = 20_000) -> ExpansionResiduals:
    """Draw parameter pairs uniformly on the curve until `samples` jets have |r| < 1 - eps2."""
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    rng = np.random.default_rng(seed)
    alpha = lset.alpha
    k1sq = 2.0 * lset.m
    out = []
    got = drawn = 0
    while got < samples:
        t = rng.uniform(0.0, curve.length, size=(batch, 2))
        drawn += batch
        r, r1, r2, r12 = jet_pairs(lset, curve, t[:, 0], t[:, 1])
        keep = np.abs(r) < 1.0 - eps2
        r, r1, r2, r12 = r[keep], r1[keep], r2[keep], r12[keep]
        a, b, c, d = r, r1 / math.sqrt(alpha), r2 / math.sqrt(alpha), r12 / alpha
        main = alpha / (2 * math.pi**2) * (a * a - b * b - c * c + d * d)
        quartic = a**4 + b**4 + c**4 + d**4
        resid = two_point_k2_array(r, r1, r2, r12, alpha) - k1sq - main
        out.append(np.abs(resid) / (alpha * quartic))
        got += int(keep.sum())
    ratios = np.concatenate(out)[:samples]
    return ExpansionResiduals(ratios, len(ratios), drawn)


# ----------------------------------------------------------------------------
# leading constant


def c_tau_gamma(measure: AngularMeasure, curve: TorusCurve, check_tol: float = 1e-8) -> float:
    """Average over the measure of A(gamma, theta)^2."""
    if not measure.is_invariant():
        raise InvalidMeasure("measure must be invariant under pi/2 rotation and reflection")
    ang = np.asarray(measure.angles)
    w = np.asarray(measure.weights)
    a = tangent_energies(curve, ang)
    c = math.fsum(w * a * a)
    if curve.arc is not None:
        closed = circle_arc_constant(curve, tau_fourier(measure, 4))
        if abs(c - closed) > check_tol * max(1.0, curve.length**2):
            raise QuadratureMismatch(f"atomic sum {c!r} vs circle closed form {closed!r}")
    return c


def circle_arc_constant(curve: TorusCurve, tau4: float) -> float:
    """L^2/4 + r^2 sin^2(L/r) (1 + tau4 cos(4 psi)) / 8 for a circle arc.

    psi is the tangent angle at the midpoint of the arc; with the arc
    starting at angle 0 on the circle, cos(4 psi) = cos(2L/r).
    """
    if curve.arc is None:
        raise ValueError("closed form needs a circle arc")
    r = curve.arc.radius
    x = curve.length / r
    psi = curve.arc.phase + math.pi / 2 + x / 2
    s2 = math.sin(x) ** 2
    return curve.length**2 / 4 + r * r * s2 / 8 + r * r * s2 * math.cos(4 * psi) * tau4 / 8


def b_constant(lset: LatticePointSet, curve: TorusCurve, order: int = 96, check_tol: float = 1e-8) -> float:
    """B = (1/N) sum_mu A(gamma, mu/|mu|)^2, checked against the direct double integral."""
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    curve.require_curved()
    a = tangent_energies(curve, lset.angles)
    b_sum = math.fsum(a * a) / lset.n

    turning = curve.length * float(curve.curvature(np.linspace(0, curve.length, 257)).max())
    t, w = gauss_legendre(0.0, curve.length, order, panels=max(1, int(math.ceil(turning))))
    proj = (curve.velocity(t) @ lset.array.T) ** 2 / lset.m  # <mu/|mu|, gamma'>^2, (nodes, N)
    integrand = proj @ proj.T / lset.n  # (1/N) sum_mu ... at (t1, t2)
    b_quad = float(w @ integrand @ w)
    if abs(b_sum - b_quad) > check_tol * max(1.0, curve.length**2):
        raise QuadratureMismatch(f"B by tangent energies {b_sum!r} vs double integral {b_quad!r}")
    return b_sum


# ----------------------------------------------------------------------------
# second moments and the approximate Kac-Rice integral


def _axis_rule(curve: TorusCurve, frequency: float, quad_order: Optional[int], per_wavelength: float):
    if quad_order is None:
        total = per_wavelength * curve.length * frequency
        panels = max(2, int(math.ceil(total / PANEL)))
        return gauss_legendre(0.0, curve.length, PANEL, panels)
    panels = max(1, int(math.ceil(quad_order / PANEL)))
    return gauss_legendre(0.0, curve.length, PANEL, panels)


@dataclass(frozen=True)
class MomentIntegrals:
    int_r2: float
    int_r1_sq: float  # of (r1 / (2 pi sqrt m))^2
    int_r2_sq: float  # of (r2 / (2 pi sqrt m))^2
    int_r12_sq: float  # of (r12 / (4 pi^2 m))^2
    variance_integral: float
    nodes: int


def moment_integrals(lset: LatticePointSet, curve: TorusCurve, quad_order: Optional[int] = None) -> MomentIntegrals:
    """Tensor Gauss-Legendre integrals of r^2, r1^2, r2^2, r12^2 over [0, L]^2."""
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    # squares of the kernel oscillate at up to 2 sqrt(m) cycles per unit length
    t, w = _axis_rule(curve, 2 * math.sqrt(lset.m), quad_order, NODES_PER_WAVELENGTH)
    spec = CurveSpectrum.build(lset, curve, t)
    r, r1, r2, r12 = jet_grid(lset, spec, spec)
    alpha = lset.alpha
    m = lset.m

    def integ(f):
        return float(w @ f @ w)

    i_r = integ(r * r)
    i_1 = integ(r1 * r1)
    i_2 = integ(r2 * r2)
    i_12 = integ(r12 * r12)
    var_int = m * (i_r - i_1 / alpha - i_2 / alpha + i_12 / alpha**2)
    s1 = 4 * math.pi**2 * m
    return MomentIntegrals(i_r, i_1 / s1, i_2 / s1, i_12 / s1**2, var_int, len(t))


def oscillatory_integrals(curve: TorusCurve, vectors: np.ndarray, per_wavelength: float = 10.0) -> np.ndarray:
    """int_0^L exp(2 pi i <v, gamma(t)>) dt for each row v of `vectors`."""
    vectors = np.asarray(vectors, dtype=float).reshape(-1, 2)
    fmax = float(np.max(np.hypot(vectors[:, 0], vectors[:, 1]))) if len(vectors) else 0.0
    total = per_wavelength * curve.length * max(fmax, 1.0)
    panels = max(3, int(math.ceil(total / 24)))
    t, w = gauss_legendre(0.0, curve.length, 24, panels)
    ph = 2 * math.pi * (curve.position(t) @ vectors.T)
    return w @ np.exp(1j * ph)


def parseval_r2(lset: LatticePointSet, curve: TorusCurve) -> float:
    """(1/N^2) sum_{mu, mu'} |int e(<mu - mu', gamma>)|^2, grouped by difference vector."""
    a = np.array(lset.points, dtype=np.int64)
    diff = (a[:, None, :] - a[None, :, :]).reshape(-1, 2)
    vecs, mult = np.unique(diff, axis=0, return_counts=True)
    vals = oscillatory_integrals(curve, vecs)
    return math.fsum(mult * np.abs(vals) ** 2) / lset.n**2


@dataclass(frozen=True)
class SecondMoments:
    int_r2: float
    int_r1_sq: float
    int_r12_sq: float
    parseval_r2: float
    predicted_r2: float  # L^2 / N
    predicted_r1_sq: float  # L^2 / (2N)
    predicted_r12_sq: float  # B / N


def second_moments(lset: LatticePointSet, curve: TorusCurve, quad_order: Optional[int] = None,
                   tol: float = 1e-6) -> SecondMoments:
    curve.require_curved()
    mi = moment_integrals(lset, curve, quad_order)
    pars = parseval_r2(lset, curve)
    if abs(mi.int_r2 - pars) > tol:
        raise QuadratureMismatch(f"double integral of r^2 {mi.int_r2!r} vs Parseval form {pars!r}")
    b = b_constant(lset, curve)
    L2 = curve.length**2
    return SecondMoments(mi.int_r2, mi.int_r1_sq, mi.int_r12_sq, pars, L2 / lset.n, L2 / (2 * lset.n), b / lset.n)


@dataclass(frozen=True)
class DecayFit:
    norms: np.ndarray  # |v| over distinct nonzero differences
    magnitudes: np.ndarray  # |int e(<v, gamma>)|
    constant: float  # max |I(v)| sqrt|v|


def oscillatory_decay(lset: LatticePointSet, curve: TorusCurve) -> DecayFit:
    """Fit C in |int e(<v, gamma>)| <= C / sqrt|v| over v = mu - mu' != 0."""
    a = np.array(lset.points, dtype=np.int64)
    diff = np.unique((a[:, None, :] - a[None, :, :]).reshape(-1, 2), axis=0)
    diff = diff[np.any(diff != 0, axis=1)]
    norms = np.hypot(diff[:, 0], diff[:, 1]).astype(float)
    mags = np.abs(oscillatory_integrals(curve, diff))
    return DecayFit(norms, mags, float(np.max(mags * np.sqrt(norms))))


def kac_rice_variance(lset: LatticePointSet, curve: TorusCurve, per_wavelength: float = NODES_PER_WAVELENGTH,
                      z_floor: float = 1e-3) -> float:
    """Var(Z) = iint (K2 - K1^2) + E[Z] with the full two-point function.

    Integrates over z = t2 - t1 > 0 and doubles, so the kink of K2 on the
    diagonal sits at an endpoint. Panels in z are graded geometrically down
    to z0 = z_floor / sqrt(m); below z0 the jet loses about log10(1/(z^2 m))
    digits to cancellation, so K2 is taken linear there (it vanishes on the
    diagonal), an O((z0 sqrt m)^3) relative error on that strip. No quadratic
    truncation of K2 is made anywhere.
    """
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    L = curve.length
    m = lset.m
    freq = 2 * math.sqrt(m)
    k1sq = 2.0 * m
    nz = max(2, int(math.ceil(per_wavelength * L * freq / PANEL)))
    h = L / nz
    z0 = min(z_floor / math.sqrt(m), h / 4)

    def row(z: float) -> tuple[float, float]:
        nt = max(1, int(math.ceil((L - z) * freq * per_wavelength / PANEL)))
        t, wt = gauss_legendre(0.0, L - z, PANEL, nt)
        r, r1, r2, r12 = jet_pairs(lset, curve, t, t + z)
        return float(wt @ two_point_k2_array(r, r1, r2, r12, lset.alpha)), L - z

    levels = int(math.ceil(math.log2(h / z0)))
    edges = [z0 * (h / z0) ** (k / levels) for k in range(levels + 1)]
    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        for z, w in zip(*gauss_legendre(lo, hi, 16)):
            k2, span = row(z)
            parts.append(w * (k2 - k1sq * span))
    for z, w in zip(*gauss_legendre(h, L, PANEL, nz - 1)):
        k2, span = row(z)
        parts.append(w * (k2 - k1sq * span))
    k2_0, span0 = row(z0)
    parts.append(0.5 * z0 * k2_0 - k1sq * z0 * (L - z0 / 2))
    return 2.0 * math.fsum(parts) + expected_count(m, curve)


# ----------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class PredictionReport:
    m: int
    n: int
    tau4: float
    L: float
    expected_count: float
    b_constant: float
    leading_constant: float
    variance_leading: float
    variance_integral: float
    int_r2: float
    int_r1_sq: float
    int_r12_sq: float

    @property
    def predicted_moments(self) -> dict[str, float]:
        return {
            "int_r2": self.L**2 / self.n,
            "int_r1_sq": self.L**2 / (2 * self.n),
            "int_r12_sq": self.b_constant / self.n,
        }

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PredictionReport":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


def variance_prediction(lset: LatticePointSet, curve: TorusCurve, quad_order: Optional[int] = None) -> PredictionReport:
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    curve.require_curved()
    tau4 = lset.tau4
    if abs(tau4) >= 1 - 1e-6:
        warnings.warn(f"tau4 = {tau4:+.6f} is at +-1: outside the variance theorem's hypotheses",
                      OutsideHypotheses, stacklevel=2)
    b = b_constant(lset, curve)
    lead = 4 * b - curve.length**2
    mi = moment_integrals(lset, curve, quad_order)
    return PredictionReport(
        m=lset.m,
        n=lset.n,
        tau4=tau4,
        L=curve.length,
        expected_count=expected_count(lset.m, curve),
        b_constant=b,
        leading_constant=lead,
        variance_leading=lead * lset.m / lset.n,
        variance_integral=mi.variance_integral,
        int_r2=mi.int_r2,
        int_r1_sq=mi.int_r1_sq,
        int_r12_sq=mi.int_r12_sq,
    )


# ----------------------------------------------------------------------------
# determinant scaling near the diagonal


@dataclass(frozen=True)
class DetSigmaProbe:
    exponent_fit: float
    coeff_ratio: float  # against (2/9) pi^14 m^7 (A - 1)(A^2 - 1) z^10
    coeff_ratio_moments: float  # against (alpha/144)(alpha^2 - c)(c^2 + alpha e) z^10
    a_of_t: float
    z: tuple[float, ...]
    p: tuple[float, ...]


def detsigma_scaling_probe(lset: LatticePointSet, curve: TorusCurve, t1: float, z_values: Sequence[float],
                           dps: int = 60) -> DetSigmaProbe:
    """Evaluate P(z) = mu^2 (1 - rho^2) at t2 = t1 + z in extended precision.

    P is a difference of O(m^6 z^8) terms leaving O(m^7 z^10), so double
    precision loses every digit for z sqrt(m) below ~1e-2.
    """
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    m = lset.m
    tau4 = lset.tau4
    if abs(tau4) >= 1 - 1e-3:
        raise ProbeDegenerate(f"tau4 = {tau4} too close to +-1")
    z_values = sorted(float(z) for z in z_values)
    if not z_values or z_values[0] <= 0 or z_values[-1] > 0.5 / math.sqrt(m) * (1 + 1e-12):
        raise ProbeDegenerate("z values must lie in (0, 0.5/sqrt(m)]")
    curve.check_t(t1)
    curve.check_t(t1 + z_values[-1])
    phi = float(curve.tangent_angle(t1))
    a_t = tau4 * math.cos(4 * phi)
    if abs((a_t - 1) * (a_t * a_t - 1)) < 1e-9:
        raise ProbeDegenerate("A(t1) = +-1 makes the leading coefficient vanish")

    ps = []
    with mp.workdps(dps):
        alpha = 2 * mp.pi**2 * m
        for z in z_values:
            r, r1, r2, r12 = covariance_jet_mp(lset, curve, t1, mp.mpf(t1) + mp.mpf(z), dps)
            one = 1 - r * r
            p = (alpha * one - r1 * r1) * (alpha * one - r2 * r2) - (r12 * one + r * r1 * r2) ** 2
            ps.append(p)
        if min(ps) <= 0:
            raise ProbeDegenerate("P(z) <= 0 at a probed z")
        logz = [float(mp.log(z)) for z in z_values]
        logp = [float(mp.log(p)) for p in ps]
        zmin, pmin = mp.mpf(z_values[0]), ps[0]
        stated = mp.mpf(2) / 9 * mp.pi**14 * mp.mpf(m) ** 7 * (a_t - 1) * (a_t * a_t - 1) * zmin**10
        # directional moments on the diagonal, exact lattice sums
        v = curve.mp_frame(mp.mpf(t1))[1]
        proj = [x * v[0] + y * v[1] for x, y in lset.points]
        c_m = (2 * mp.pi) ** 4 * mp.fsum(p**4 for p in proj) / lset.n
        e_m = -((2 * mp.pi) ** 6) * mp.fsum(p**6 for p in proj) / lset.n
        moments = alpha / 144 * (alpha**2 - c_m) * (c_m**2 + alpha * e_m) * zmin**10
        ratio_stated = float(pmin / stated)
        ratio_moments = float(pmin / moments)
    slope = float(np.polyfit(logz, logp, 1)[0]) if len(z_values) > 1 else float("nan")
    return DetSigmaProbe(slope, ratio_stated, ratio_moments, a_t, tuple(z_values), tuple(float(p) for p in ps))
