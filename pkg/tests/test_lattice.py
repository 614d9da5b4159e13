from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodal_torus.errors import EmptySpectrum, InvalidMeasure, InvalidRange
from nodal_torus.lattice import (
    AngularMeasure,
    LatticePointSet,
    cilleruelo_measure,
    divisor_diagnostic,
    enumerate_lattice_points,
    lattice_measure,
    mordell_solvability,
    quadruple_diagnostics,
    r2_count,
    riesz_energy,
    tau_fourier,
    tilted_cilleruelo_measure,
    uniform_measure,
)


def brute_points(m: int) -> set[tuple[int, int]]:
    k = math.isqrt(m) + 1
    return {(x, y) for x in range(-k, k + 1) for y in range(-k, k + 1) if x * x + y * y == m}


def naive_riesz(points) -> float:
    return sum(1 / math.dist(p, q) for p in points for q in points if p != q)


def naive_quadruples(points):
    zero, inv = 0, 0.0
    for a, b, c, d in itertools.product(points, repeat=4):
        sx, sy = a[0] + b[0] + c[0] + d[0], a[1] + b[1] + c[1] + d[1]
        if sx == 0 and sy == 0:
            zero += 1
        else:
            inv += 1 / math.hypot(sx, sy)
    return zero, inv


# ---------------------------------------------------------------- enumeration


def test_unit_circle():
    s = enumerate_lattice_points(1)
    assert set(s.points) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert s.n == 4


def test_three_has_no_points():
    s = enumerate_lattice_points(3)
    assert s.n == 0 and s.points == ()


def test_twenty_five():
    s = enumerate_lattice_points(25)
    assert s.n == 12
    assert {(5, 0), (3, 4), (4, 3)} <= set(s.points)
    assert set(s.points) == brute_points(25)


@pytest.mark.parametrize("n, want", [(1, 4), (5, 8), (9, 4), (25, 12), (3, 0), (21, 0), (65, 16)])
def test_r2_small(n, want):
    assert r2_count(n) == want


def test_enumeration_matches_scan_and_formula():
    for m in range(1, 1001):
        s = enumerate_lattice_points(m)
        assert set(s.points) == brute_points(m)
        assert s.n == r2_count(m)
        if s.n:
            assert s.n % 4 == 0
            pts = set(s.points)
            for x, y in pts:
                for img in ((-x, y), (x, -y), (y, x), (-y, -x), (-x, -y), (y, -x), (-y, x)):
                    assert img in pts


@given(st.integers(1, 20000))
def test_half_set_partitions(m):
    s = enumerate_lattice_points(m)
    half = set(s.half_set)
    assert len(half) == s.n // 2
    neg = {(-x, -y) for x, y in half}
    assert not half & neg
    assert half | neg == set(s.points)


def test_lexicographic_order():
    s = enumerate_lattice_points(325)
    assert list(s.points) == sorted(s.points)


def test_json_round_trip():
    s = enumerate_lattice_points(65)
    d = s.to_dict()
    assert set(d) == {"m", "n", "points", "tau4"}
    assert LatticePointSet.from_dict(d) == s


def test_invalid_point_rejected():
    with pytest.raises(InvalidRange):
        LatticePointSet(5, ((1, 1),))


# ---------------------------------------------------------------- Fourier coefficients


def test_tau4_examples():
    assert tau_fourier(enumerate_lattice_points(1), 4) == pytest.approx(1.0, abs=1e-15)
    assert tau_fourier(enumerate_lattice_points(2), 4) == pytest.approx(-1.0, abs=1e-15)
    # cos(4 theta) for theta = atan2(1, 2): (x + iy)^4 = -7 + 24i over 25
    assert tau_fourier(enumerate_lattice_points(5), 4) == pytest.approx(-7 / 25, abs=1e-14)


def test_empty_set_has_no_fourier_coefficients():
    with pytest.raises(EmptySpectrum):
        tau_fourier(enumerate_lattice_points(3), 4)


@settings(max_examples=60)
@given(st.integers(1, 5000).filter(lambda m: r2_count(m) > 0))
def test_odd_and_twice_odd_harmonics_vanish(m):
    s = enumerate_lattice_points(m)
    for k in (1, 2, 3, 5, 6, 7):
        assert abs(tau_fourier(s, k)) < 1e-12


def test_measures_are_invariant_and_normalized():
    for meas in (uniform_measure(), cilleruelo_measure(), tilted_cilleruelo_measure(),
                 lattice_measure(enumerate_lattice_points(5525))):
        assert math.fsum(meas.weights) == pytest.approx(1.0, abs=1e-12)
        assert meas.is_invariant()
    assert tau_fourier(cilleruelo_measure(), 4) == pytest.approx(1.0)
    assert tau_fourier(tilted_cilleruelo_measure(), 4) == pytest.approx(-1.0)
    assert abs(tau_fourier(uniform_measure(), 4)) < 1e-12


def test_lopsided_measure_not_invariant():
    m = AngularMeasure((0.1, 0.2), (0.5, 0.5), "custom-atomic")
    assert not m.is_invariant()
    with pytest.raises(InvalidMeasure):
        tau_fourier(m, 4)


# ---------------------------------------------------------------- pair counts


@pytest.mark.parametrize("m, h, solvable, count", [(25, 10, True, 8), (5, 1, True, 4), (2, 1, False, 0)])
def test_mordell_examples(m, h, solvable, count):
    res = mordell_solvability(m, h)
    assert res.solvable is solvable
    assert res.count == count
    assert res.solvable == (res.square_cond and res.sum2_cond)


def test_mordell_range():
    with pytest.raises(InvalidRange):
        mordell_solvability(5, 5)
    with pytest.raises(InvalidRange):
        mordell_solvability(5, 0)


def test_mordell_brute_force_up_to_120():
    for m in range(2, 121):
        pts = enumerate_lattice_points(m).points
        for h in range(1, m):
            ordered = sum(1 for p in pts for q in pts if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 == 2 * h)
            res = mordell_solvability(m, h)
            assert res.solvable == (ordered > 0)
            assert res.ordered_count == ordered
            assert res.count == ordered // 2


# ---------------------------------------------------------------- energy sums


def test_riesz_examples():
    assert riesz_energy(enumerate_lattice_points(1)).energy == pytest.approx(8 / math.sqrt(2) + 2, rel=1e-14)
    assert riesz_energy(enumerate_lattice_points(2)).energy == pytest.approx(4 + 4 / (2 * math.sqrt(2)), rel=1e-14)


@pytest.mark.parametrize("m", [5, 25, 65, 325, 1105])
def test_riesz_matches_double_loop(m):
    s = enumerate_lattice_points(m)
    r = riesz_energy(s)
    assert r.energy == pytest.approx(naive_riesz(s.points), rel=1e-12)
    assert r.ratio == pytest.approx(r.energy / s.n)


def test_riesz_needs_two_points():
    with pytest.raises(EmptySpectrum):
        riesz_energy(enumerate_lattice_points(3))


def test_quadruples_unit_circle():
    assert quadruple_diagnostics(enumerate_lattice_points(1)).zero_sum_count == 36


@pytest.mark.parametrize("m", [1, 2, 5, 25])
def test_quadruples_match_four_loop(m):
    s = enumerate_lattice_points(m)
    zero, inv = naive_quadruples(s.points)
    q = quadruple_diagnostics(s)
    assert q.zero_sum_count == zero
    assert q.inverse_norm_sum == pytest.approx(inv, rel=1e-12)


@pytest.mark.parametrize("m", [65, 325, 1105, 5525])
def test_zero_sums_bounded(m):
    s = enumerate_lattice_points(m)
    assert quadruple_diagnostics(s).zero_sum_count <= 3 * s.n**2


@pytest.mark.parametrize("m, cap, want", [
    (4, 10, 1 + 1 / math.sqrt(2) + 0.5),
    (9, 10, 1 + 1 / 3),
    (1, 0.5, 0.0),
])
def test_divisor_examples(m, cap, want):
    assert divisor_diagnostic(m, cap) == pytest.approx(want, abs=1e-12)


def test_alpha_and_lambda():
    s = enumerate_lattice_points(25)
    assert s.lambda_sq == pytest.approx(4 * math.pi**2 * 25)
    assert s.alpha == pytest.approx(2 * math.pi**2 * 25)
    assert np.allclose(np.hypot(*s.array.T), 5)
