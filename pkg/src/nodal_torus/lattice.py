"""Lattice points on circles x^2 + y^2 = m and the arithmetic sums built on them.

Everything that can be exact is done in Python integers; angles and
Fourier coefficients are derived doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import EmptySpectrum, InvalidMeasure, InvalidRange

SYM_TOL = 1e-12


# ----------------------------------------------------------------------------
# integer helpers


def is_square(n: int) -> bool:
    if n < 0:
        return False
    s = math.isqrt(n)
    return s * s == n


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for n < 2**48."""
    if n < 1:
        raise InvalidRange(f"cannot factor {n}")
    out: dict[int, int] = {}
    while n % 2 == 0:
        out[2] = out.get(2, 0) + 1
        n //= 2
    p = 3
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_sum_of_two_squares(n: int) -> bool:
    """No prime 3 mod 4 divides n to an odd power."""
    if n < 0:
        return False
    if n == 0:
        return True
    return all(not (p % 4 == 3 and e % 2) for p, e in factorize(n).items())


def r2_count(n: int) -> int:
    """Number of ordered pairs (x, y) in Z^2 with x^2 + y^2 = n.

    Uses r2(n) = 4 * prod_{p = 1 mod 4} (a_p + 1), and zero when a prime
    3 mod 4 appears to an odd power.
    """
    if n < 1:
        raise InvalidRange(f"r2_count needs n >= 1, got {n}")
    out = 4
    for p, e in factorize(n).items():
        if p % 4 == 3:
            if e % 2:
                return 0
        elif p % 4 == 1:
            out *= e + 1
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


# ----------------------------------------------------------------------------
# lattice point sets


@dataclass(frozen=True)
class LatticePointSet:
    """All mu in Z^2 with |mu|^2 = m, in lexicographic order."""

    m: int
    points: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for x, y in self.points:
            if x * x + y * y != self.m:
                raise InvalidRange(f"({x},{y}) is not on the circle of norm {self.m}")

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def half_set(self) -> tuple[tuple[int, int], ...]:
        # one representative of each +-mu pair: y > 0, or y == 0 and x > 0
        return tuple(p for p in self.points if p[1] > 0 or (p[1] == 0 and p[0] > 0))

    @cached_property
    def angles(self) -> np.ndarray:
        a = self.array
        return np.arctan2(a[:, 1], a[:, 0]) if self.n else np.zeros(0)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)

    @cached_property
    def half_array(self) -> np.ndarray:
        return np.array(self.half_set, dtype=float).reshape(-1, 2)

    @property
    def lambda_sq(self) -> float:
        """Laplace eigenvalue 4 pi^2 m."""
        return 4.0 * math.pi**2 * self.m

    @property
    def alpha(self) -> float:
        return 2.0 * math.pi**2 * self.m

    @cached_property
    def tau4(self) -> float:
        return tau_fourier(self, 4)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "points": [list(p) for p in self.points],
            "tau4": self.tau4 if self.n else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatticePointSet":
        pts = tuple((int(x), int(y)) for x, y in d["points"])
        out = cls(int(d["m"]), pts)
        if out.n != int(d["n"]):
            raise InvalidRange("point count does not match n")
        return out


def enumerate_lattice_points(m: int) -> LatticePointSet:
    if m < 1:
        raise InvalidRange(f"m must be >= 1, got {m}")
    s = math.isqrt(m)
    pts = []
    for x in range(-s, s + 1):
        y2 = m - x * x
        y = math.isqrt(y2)
        if y * y == y2:
            if y:
                pts.append((x, -y))
            pts.append((x, y))
    return LatticePointSet(m, tuple(pts))


# ----------------------------------------------------------------------------
# angular measures


MEASURE_KINDS = ("from-lattice", "uniform", "cilleruelo", "tilted-cilleruelo", "custom-atomic")


@dataclass(frozen=True)
class AngularMeasure:
    """Atomic probability measure on the unit circle."""

    angles: tuple[float, ...]
    weights: tuple[float, ...]
    kind: str = "custom-atomic"

    def __post_init__(self):
        if len(self.angles) != len(self.weights) or not self.angles:
            raise InvalidMeasure("need matching, non-empty angles and weights")
        if self.kind not in MEASURE_KINDS:
            raise InvalidMeasure(f"unknown kind {self.kind!r}")
        if any(w < 0 for w in self.weights):
            raise InvalidMeasure("negative weight")
        if abs(math.fsum(self.weights) - 1.0) > SYM_TOL:
            raise InvalidMeasure("weights must sum to 1")

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.angles, self.weights))

    def is_invariant(self, tol: float = SYM_TOL) -> bool:
        """Invariance under rotation by pi/2 and the reflection y -> -y."""
        base = _atom_mass(self.angles, self.weights)
        for op in (lambda a: a + math.pi / 2, lambda a: -a):
            moved = _atom_mass([op(a) for a in self.angles], self.weights)
            if not _same_masses(base, moved, tol):
                return False
        return True

    def rotated(self, angle: float) -> "AngularMeasure":
        return AngularMeasure(tuple(a + angle for a in self.angles), self.weights, self.kind)


def _atom_mass(angles: Iterable[float], weights: Iterable[float]) -> list[tuple[float, float]]:
    two_pi = 2 * math.pi
    wrapped = [0.0 if two_pi - (x % two_pi) <= 1e-10 else x % two_pi for x in angles]
    merged: list[list[float]] = []
    for a, w in sorted(zip(wrapped, weights)):
        if merged and abs(a - merged[-1][0]) <= 1e-10:
            merged[-1][1] += w
        else:
            merged.append([a, w])
    return [(a, w) for a, w in merged]


def _same_masses(a, b, tol) -> bool:
    if len(a) != len(b):
        return False
    for (x, w), (y, v) in zip(a, b):
        d = abs(x - y)
        if min(d, 2 * math.pi - d) > 1e-10 or abs(w - v) > tol:
            return False
    return True


def lattice_measure(lset: LatticePointSet) -> AngularMeasure:
    if lset.n == 0:
        raise EmptySpectrum(f"no lattice points for m={lset.m}")
    w = 1.0 / lset.n
    return AngularMeasure(tuple(float(a) for a in lset.angles), (w,) * lset.n, "from-lattice")


def uniform_measure(n_atoms: int = 64) -> AngularMeasure:
    """Equally spaced atoms; integrates trigonometric polynomials of degree < n_atoms exactly."""
    if n_atoms % 4:
        raise InvalidMeasure("atom count must be a multiple of 4")
    return AngularMeasure(
        tuple(2 * math.pi * j / n_atoms for j in range(n_atoms)), (1.0 / n_atoms,) * n_atoms, "uniform"
    )


def cilleruelo_measure() -> AngularMeasure:
    return AngularMeasure(tuple(k * math.pi / 2 for k in range(4)), (0.25,) * 4, "cilleruelo")


def tilted_cilleruelo_measure() -> AngularMeasure:
    return AngularMeasure(tuple(math.pi / 4 + k * math.pi / 2 for k in range(4)), (0.25,) * 4, "tilted-cilleruelo")


def tau_fourier(obj: LatticePointSet | AngularMeasure, k: int) -> float:
    """Fourier coefficient int cos(k theta) d tau; the sine part must vanish."""
    if isinstance(obj, LatticePointSet):
        if obj.n == 0:
            raise EmptySpectrum(f"no lattice points for m={obj.m}")
        ang = obj.angles
        w = np.full(obj.n, 1.0 / obj.n)
    else:
        ang = np.asarray(obj.angles)
        w = np.asarray(obj.weights)
    c = math.fsum(w * np.cos(k * ang))
    s = math.fsum(w * np.sin(k * ang))
    if abs(s) > SYM_TOL:
        raise InvalidMeasure(f"sine coefficient {s:.3e} at k={k}: measure is not reflection symmetric")
    return c


# ----------------------------------------------------------------------------
# Mordell / Pall


@dataclass(frozen=True)
class MordellResult:
    m: int
    h: int
    solvable: bool
    count: int  # unordered pairs {mu, mu'}; equals r2(gcd) when solvable
    gcd_value: int
    square_cond: bool
    sum2_cond: bool

    @property
    def ordered_count(self) -> int:
        return 2 * self.count


def mordell_solvability(m: int, h: int) -> MordellResult:
    """Is |mu|^2 = |mu'|^2 = m, |mu - mu'|^2 = 2h solvable, and how often."""
    if not 0 < h < m:
        raise InvalidRange(f"need 0 < h < m, got h={h}, m={m}")
    d = math.gcd(m, h)
    sq = is_square(h * (2 * m - h))
    s2 = is_sum_of_two_squares(d)
    ok = sq and s2
    return MordellResult(m, h, ok, r2_count(d) if ok else 0, d, sq, s2)


def pair_distance_counts(lset: LatticePointSet) -> dict[int, int]:
    """Brute force: h -> number of unordered pairs with |mu - mu'|^2 = 2h."""
    out: dict[int, int] = {}
    pts = lset.points
    for i, (a, b) in enumerate(pts):
        for c, d in pts[i + 1:]:
            d2 = (a - c) ** 2 + (b - d) ** 2
            if d2 % 2 == 0:
                out[d2 // 2] = out.get(d2 // 2, 0) + 1
    return out


# ----------------------------------------------------------------------------
# energy sums


@dataclass(frozen=True)
class RieszEnergy:
    energy: float
    ratio: float  # energy / n


def riesz_energy(lset: LatticePointSet) -> RieszEnergy:
    """Sum over ordered pairs mu != mu' of 1/|mu - mu'|."""
    if lset.n < 2:
        raise EmptySpectrum(f"need at least two lattice points, m={lset.m}")
    # group by the integer squared distance so each sqrt is taken once
    a = np.array(lset.points, dtype=np.int64)
    d2 = ((a[:, None, :] - a[None, :, :]) ** 2).sum(-1).ravel()
    d2 = d2[d2 > 0]
    vals, counts = np.unique(d2, return_counts=True)
    e = math.fsum(int(c) / math.sqrt(int(v)) for v, c in zip(vals, counts))
    return RieszEnergy(e, e / lset.n)


@dataclass(frozen=True)
class QuadrupleDiagnostics:
    zero_sum_count: int
    inverse_norm_sum: float


def quadruple_diagnostics(lset: LatticePointSet) -> QuadrupleDiagnostics:
    """Counts of mu1+mu2+mu3+mu4 over E^4, grouped through pair sums."""
    if lset.n == 0:
        return QuadrupleDiagnostics(0, 0.0)
    a = np.array(lset.points, dtype=np.int64)
    s = (a[:, None, :] + a[None, :, :]).reshape(-1, 2)
    sums, mult = np.unique(s, axis=0, return_counts=True)
    mult = mult.astype(np.int64)
    max_norm = 16 * lset.m
    # float64 bincount is exact here: every bucket total is <= n^4 << 2^53
    by_norm = np.zeros(max_norm + 1)
    step = max(1, 2_000_000 // len(sums))
    for i in range(0, len(sums), step):
        tot = sums[i:i + step, None, :] + sums[None, :, :]
        nrm = (tot * tot).sum(-1).ravel()
        w = (mult[i:i + step, None] * mult[None, :]).ravel().astype(float)
        by_norm += np.bincount(nrm, weights=w, minlength=max_norm + 1)
    by_norm = by_norm.astype(np.int64)
    zero = int(by_norm[0])
    nz = np.nonzero(by_norm[1:])[0] + 1
    inv = math.fsum(int(by_norm[k]) / math.sqrt(int(k)) for k in nz)
    return QuadrupleDiagnostics(zero, inv)


def divisor_diagnostic(m: int, cap: float) -> float:
    """Sum of 1/sqrt(d) over divisors d < cap of m that are sums of two squares."""
    if m < 1:
        raise InvalidRange(f"m must be >= 1, got {m}")
    return math.fsum(1.0 / math.sqrt(d) for d in divisors(m) if d < cap and is_sum_of_two_squares(d))


def sums_of_two_squares(limit: int, min_points: int = 1) -> list[int]:
    """All m <= limit with r2(m) >= min_points (and r2(m) > 0)."""
    return [m for m in range(1, limit + 1) if r2_count(m) >= max(min_points, 1)]

