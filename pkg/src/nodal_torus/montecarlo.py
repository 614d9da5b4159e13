"""Monte Carlo for zeros of arithmetic random waves restricted to a curve.

Each trial draws its coefficients from a Philox counter-based stream keyed
by (master_seed, trial_index); coefficient k of the half set always uses
stream words 2k and 2k+1, so a trial is reproducible in isolation.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .curve import TorusCurve
from .errors import EmptySpectrum, InvalidRange, ZeroCurvature
from .kacrice import expected_count, variance_prediction
from .lattice import LatticePointSet

STREAM_ALGORITHM = "philox4x64-10/key=(seed,trial)/inverse-normal-cdf"
TWO_PI = 2.0 * math.pi
_MASK64 = (1 << 64) - 1

# warn_flags bits
FLAG_SUBDIVIDED = 1  # a same-sign interval hid a pair of roots and was refined
FLAG_SMALL_MIN = 2  # |f| had a tiny local minimum without a sign change
FLAG_EXCESS = 4  # count above 10 x the expected value


@dataclass(frozen=True, eq=False)
class WaveSample:
    """F(x) = (2/sqrt N) sum_half (b cos 2 pi <mu,x> - c sin 2 pi <mu,x>) + offset."""

    lset: LatticePointSet
    b: np.ndarray
    c: np.ndarray
    trial_index: int
    seed_lineage: tuple[int, int]
    offset: float = 0.0  # test hook only


def _uniforms(master_seed: int, trial_index: int, count: int) -> np.ndarray:
    key = np.array([master_seed & _MASK64, trial_index & _MASK64], dtype=np.uint64)
    bits = np.random.Philox(key=key).random_raw(count)
    # 53-bit midpoints: strictly inside (0, 1) so the inverse CDF stays finite
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def sample_wave(lset: LatticePointSet, master_seed: int, trial_index: int) -> WaveSample:
    if lset.n < 2 or lset.n % 2:
        raise EmptySpectrum(f"need a nonempty symmetric spectrum, m={lset.m} has n={lset.n}")
    h = len(lset.half_set)
    g = ndtri(_uniforms(master_seed, trial_index, 2 * h)) * math.sqrt(0.5)
    return WaveSample(lset, g[0::2].copy(), g[1::2].copy(), trial_index, (master_seed, trial_index))


def _field(sample: WaveSample, curve: TorusCurve, t: np.ndarray, need_derivative: bool = True):
    mu = sample.lset.half_array
    ph = TWO_PI * (curve.position(t) @ mu.T)
    cs, sn = np.cos(ph), np.sin(ph)
    scale = 2.0 / math.sqrt(sample.lset.n)
    f = scale * (cs @ sample.b - sn @ sample.c) + sample.offset
    if not need_derivative:
        return f, None
    u = TWO_PI * (curve.velocity(t) @ mu.T)
    fp = -scale * ((sn * u) @ sample.b + (cs * u) @ sample.c)
    return f, fp


def eval_field(sample: WaveSample, curve: TorusCurve, t: float) -> tuple[float, float]:
    """f(t) = F(gamma(t)) and f'(t)."""
    curve.check_t(t)
    f, fp = _field(sample, curve, np.array([float(t)]))
    return float(f[0]), float(fp[0])


@dataclass(frozen=True)
class ZeroCount:
    count: int
    locations: np.ndarray
    min_gap: float
    refinement_tol: float
    warn_flags: int = 0


@dataclass(frozen=True, eq=False)
class _ScanGrid:
    t: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    u: np.ndarray

    @classmethod
    def build(cls, lset: LatticePointSet, curve: TorusCurve, oversample: float) -> "_ScanGrid":
        step = 1.0 / (oversample * math.sqrt(lset.m) * TWO_PI)
        k = max(2, int(math.ceil(curve.length / step)) + 1)
        t = np.linspace(0.0, curve.length, k)
        mu = lset.half_array
        ph = TWO_PI * (curve.position(t) @ mu.T)
        return cls(t, np.cos(ph), np.sin(ph), TWO_PI * (curve.velocity(t) @ mu.T))

    def values(self, sample: WaveSample):
        scale = 2.0 / math.sqrt(sample.lset.n)
        f = scale * (self.cos @ sample.b - self.sin @ sample.c) + sample.offset
        fp = -scale * ((self.sin * self.u) @ sample.b + (self.cos * self.u) @ sample.c)
        return f, fp


def count_zeros(sample: WaveSample, curve: TorusCurve, oversample: float = 8.0,
                refine: bool = True, _grid: Optional[_ScanGrid] = None) -> ZeroCount:
    """Zeros of f on [0, L] by sign changes on a fine grid, refined by bisection."""
    if oversample < 4:
        raise InvalidRange(f"oversample must be >= 4, got {oversample}")
    grid = _grid if _grid is not None else _ScanGrid.build(sample.lset, curve, oversample)
    t = grid.t
    f, fp = grid.values(sample)
    flags = 0

    lo_list = []
    hi_list = []
    sgn = np.sign(f)
    # a grid value of exactly zero is a root; treat it as belonging to the right interval
    sgn[sgn == 0] = 1.0
    change = np.nonzero(sgn[:-1] != sgn[1:])[0]
    lo_list.append(t[change])
    hi_list.append(t[change + 1])

    # Same-sign intervals where f' changes sign hold an interior extremum; a
    # pair of close roots hides there when f crosses zero at the extremum.
    # Candidates come from the cubic Hermite interpolant, with a generous
    # margin; each is settled by locating the extremum (bisection on f').
    same = np.nonzero(sgn[:-1] == sgn[1:])[0]
    dt = t[1] - t[0]
    turn = same[(fp[same] * fp[same + 1] < 0)]
    extrema_t = np.empty(0)
    extrema_f = np.empty(0)
    if len(turn):
        s = np.linspace(0.0, 1.0, 33)
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        herm = (np.outer(f[turn], h00) + np.outer(fp[turn] * dt, h10)
                + np.outer(f[turn + 1], h01) + np.outer(fp[turn + 1] * dt, h11))
        towards_zero = np.min(herm * sgn[turn][:, None], axis=1)
        fscale = math.sqrt(float(np.mean(f * f))) or 1.0
        cand = turn[towards_zero < 0.05 * fscale]
        if len(cand):
            a, b = t[cand].copy(), t[cand + 1].copy()
            pa = np.sign(fp[cand])
            while np.max(b - a) > 1e-13 * curve.length:
                mid = 0.5 * (a + b)
                _, pm = _field(sample, curve, mid)
                left = np.sign(pm) == pa
                a = np.where(left, mid, a)
                b = np.where(left, b, mid)
            extrema_t = 0.5 * (a + b)
            extrema_f, _ = _field(sample, curve, extrema_t, need_derivative=False)
            crossed = np.sign(extrema_f) != sgn[cand]
            if np.any(crossed):
                flags |= FLAG_SUBDIVIDED
                lo_list += [t[cand][crossed], extrema_t[crossed]]
                hi_list += [extrema_t[crossed], t[cand + 1][crossed]]

    # tiny interior minima of |f| with no sign change
    af = np.abs(f)
    scale = math.sqrt(float(np.mean(f * f))) if len(f) else 1.0
    interior = np.arange(1, len(f) - 1)
    mins = interior[(af[interior] <= af[interior - 1]) & (af[interior] <= af[interior + 1])]
    small = 1e-9 * max(scale, 1e-300)
    if np.any(af[mins] < small) or np.any(np.abs(extrema_f) < small):
        flags |= FLAG_SMALL_MIN

    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    tol = 1e-12 * curve.length
    if refine and len(lo):
        flo, _ = _field(sample, curve, lo, need_derivative=False)
        slo = np.sign(flo)
        slo[slo == 0] = 1.0
        while np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            fm, _ = _field(sample, curve, mid, need_derivative=False)
            sm = np.sign(fm)
            sm[sm == 0] = 1.0
            left = sm == slo
            lo = np.where(left, mid, lo)
            hi = np.where(left, hi, mid)
    locs = 0.5 * (lo + hi)
    gap = float(np.min(np.diff(locs))) if len(locs) > 1 else math.inf
    return ZeroCount(len(locs), locs, gap, tol if refine else float(dt), flags)


# ----------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class SimulationReport:
    m: int
    n: int
    L: float
    trials: int
    master_seed: int
    oversample: float
    stream: str
    empirical_mean: float
    empirical_variance: float
    stderr_mean: float
    stderr_variance: float
    predicted_mean: float
    predicted_variance_leading: Optional[float]
    predicted_variance_integral: Optional[float]
    z_score_mean: float
    warn_trials: int
    excess_trials: int
    counts: Optional[list[int]] = field(default=None, compare=True)
    warn_flags: Optional[list[int]] = field(default=None, compare=True)

    def to_dict(self, include_counts: bool = False) -> dict:
        d = asdict(self)
        if not include_counts:
            d.pop("counts")
            d.pop("warn_flags")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationReport":
        return cls(**{f.name: d.get(f.name) for f in fields(cls)})

    def write_trials_csv(self, path) -> None:
        if self.counts is None:
            raise ValueError("report was built without per-trial counts")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "count", "warn_flags"])
            for i, (c, fl) in enumerate(zip(self.counts, self.warn_flags)):
                w.writerow([i, c, fl])


def count_statistics(counts: Sequence[int]) -> tuple[float, float, float, float]:
    """(mean, unbiased variance, stderr of mean, stderr of variance) from integer counts.

    Power sums are exact integers, so the result does not depend on the
    order in which trials were accumulated.
    """
    t = len(counts)
    if t < 2:
        raise InvalidRange("need at least two trials")
    s1 = sum(counts)
    s2 = sum(c * c for c in counts)
    s3 = sum(c**3 for c in counts)
    s4 = sum(c**4 for c in counts)
    mean = Fraction(s1, t)
    var = Fraction(t * s2 - s1 * s1, t * (t - 1))
    # central moments about the sample mean
    m2 = Fraction(s2, t) - mean**2
    m4 = Fraction(s4, t) - 4 * mean * Fraction(s3, t) + 6 * mean**2 * Fraction(s2, t) - 3 * mean**4
    var_of_var = (m4 - Fraction(t - 3, t - 1) * m2 * m2) / t
    se_var = math.sqrt(max(float(var_of_var), 0.0))
    return float(mean), float(var), math.sqrt(float(var) / t), se_var


def run_experiment(lset: LatticePointSet, curve: TorusCurve, trials: int, master_seed: int = 0,
                   oversample: float = 8.0, parallelism: int = 1, keep_counts: bool = True,
                   predict: bool = True, quad_order: Optional[int] = None,
                   sampler: Callable[[LatticePointSet, int, int], WaveSample] = sample_wave) -> SimulationReport:
    """Count zeros over `trials` independent waves; `sampler` is replaceable for tests."""
    if trials < 2:
        raise InvalidRange("need at least two trials")
    grid = _ScanGrid.build(lset, curve, oversample)

    def one(i: int) -> tuple[int, int]:
        zc = count_zeros(sampler(lset, master_seed, i), curve, oversample, _grid=grid)
        return zc.count, zc.warn_flags

    if parallelism <= 1:
        results = [one(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as ex:
            results = list(ex.map(one, range(trials), chunksize=max(1, trials // (4 * parallelism))))
    ec = expected_count(lset.m, curve)
    counts = [c for c, _ in results]
    flags = [fl | (FLAG_EXCESS if c > 10 * ec else 0) for c, fl in results]
    mean, var, se_mean, se_var = count_statistics(counts)

    pred_lead = pred_int = None
    if predict:
        try:
            rep = variance_prediction(lset, curve, quad_order)
            pred_lead, pred_int = rep.variance_leading, rep.variance_integral
        except ZeroCurvature:
            pass
    return SimulationReport(
        m=lset.m,
        n=lset.n,
        L=curve.length,
        trials=trials,
        master_seed=master_seed,
        oversample=float(oversample),
        stream=STREAM_ALGORITHM,
        empirical_mean=mean,
        empirical_variance=var,
        stderr_mean=se_mean,
        stderr_variance=se_var,
        predicted_mean=ec,
        predicted_variance_leading=pred_lead,
        predicted_variance_integral=pred_int,
        z_score_mean=(mean - ec) / se_mean if se_mean > 0 else 0.0,
        warn_trials=sum(1 for fl in flags if fl & (FLAG_SUBDIVIDED | FLAG_SMALL_MIN)),
        excess_trials=sum(1 for fl in flags if fl & FLAG_EXCESS),
        counts=counts if keep_counts else None,
        warn_flags=flags if keep_counts else None,
    )
