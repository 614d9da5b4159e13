"""Self-checks run by `verify`: exact identities and brute-force cross-checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import diagonal_moments
from .curve import CircleArcSpec, TorusCurve, make_circle_arc
from .errors import NodalError
from .kacrice import b_constant, k2_expansion_residuals
from .lattice import enumerate_lattice_points, mordell_solvability, pair_distance_counts, r2_count


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_arc(rng: np.random.Generator) -> TorusCurve:
    r = rng.uniform(0.05, 0.45)
    arc = rng.uniform(0.2, 2 * math.pi)
    return make_circle_arc(CircleArcSpec(r, arc, tuple(rng.uniform(0, 1, 2)), rng.uniform(0, 2 * math.pi)))


def moment_identity_errors(m: int, curve: TorusCurve, t: float) -> tuple[float, float, float]:
    """Relative errors of S2 = m/2, S4 = m^2(3 + A)/8, S6 = m^3(5 + 3A)/16 at gamma(t)."""
    d = diagonal_moments(enumerate_lattice_points(m), curve, t)
    a = d.a_of_t
    want = (m / 2, m * m * (3 + a) / 8, m**3 * (5 + 3 * a) / 16)
    got = (d.s2, d.s4, d.s6)
    return tuple(abs(g - w) / abs(w) for g, w in zip(got, want))


def check_moment_identities(m_max: int, per_level: int = 100, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, where, levels = 0.0, None, 0
    for m in range(1, m_max + 1):
        if r2_count(m) == 0:
            continue
        levels += 1
        for _ in range(per_level):
            c = random_arc(rng)
            err = max(moment_identity_errors(m, c, rng.uniform(0, c.length)))
            if err > worst:
                worst, where = err, m
    return CheckResult("moment identities S2/S4/S6", worst <= tol,
                       f"{levels} levels, worst relative error {worst:.3e} at m={where}")


def check_mordell(m_max: int) -> CheckResult:
    """Solvability and pair counts against brute force for all 0 < h < m <= m_max."""
    bad = []
    cases = 0
    for m in range(2, m_max + 1):
        counts = pair_distance_counts(enumerate_lattice_points(m))
        for h in range(1, m):
            res = mordell_solvability(m, h)
            brute = counts.get(h, 0)
            cases += 1
            if res.solvable != (brute > 0) or res.count != brute:
                bad.append((m, h, res.count, brute))
    detail = f"{cases} cases" + (f", first mismatch (m, h, predicted, brute) = {bad[0]}" if bad else "")
    return CheckResult("pair counts vs brute force", not bad, detail)


def check_k2_expansion(m: int = 325, samples: int = 20_000, bound: float = 10.0) -> CheckResult:
    curve = make_circle_arc(CircleArcSpec(0.2, 1.0))
    lset = enumerate_lattice_points(m)
    a = k2_expansion_residuals(lset, curve, samples, seed=1).max_ratio
    b = k2_expansion_residuals(lset, curve, samples, seed=2).max_ratio
    ok = math.isfinite(a) and math.isfinite(b) and max(a, b) < bound
    return CheckResult("two-point expansion residual", ok, f"max ratios {a:.4f}, {b:.4f} at m={m}")


def check_b_constant(levels=(5, 25, 65, 325), arcs: int = 5, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    try:
        for m in levels:
            lset = enumerate_lattice_points(m)
            for _ in range(arcs):
                b_constant(lset, random_arc(rng))
    except NodalError as exc:
        return CheckResult("B by two methods", False, str(exc))
    return CheckResult("B by two methods", True, f"{len(levels) * arcs} (level, arc) pairs agree")


def run_all(m_max: int = 200) -> list[CheckResult]:
    return [
        check_moment_identities(m_max),
        check_mordell(min(m_max, 500)),
        check_k2_expansion(),
        check_b_constant(),
    ]
