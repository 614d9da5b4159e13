from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodal_torus.covariance import CovarianceJet, diagonal_moments
from nodal_torus.curve import CircleArcSpec, make_circle_arc, make_segment, tangent_energy
from nodal_torus.errors import (
    ExpansionOutOfDomain,
    InvalidCorrelation,
    InvalidMeasure,
    ProbeDegenerate,
    ZeroCurvature,
)
from nodal_torus.kacrice import (
    OutsideHypotheses,
    PredictionReport,
    b_constant,
    c_tau_gamma,
    circle_arc_constant,
    detsigma_scaling_probe,
    expected_count,
    g_func,
    k2_expansion,
    k2_expansion_residuals,
    oscillatory_decay,
    oscillatory_integrals,
    second_moments,
    two_point_k2,
    variance_prediction,
    zero_density_k1,
)
from nodal_torus.lattice import (
    AngularMeasure,
    cilleruelo_measure,
    enumerate_lattice_points,
    lattice_measure,
    tilted_cilleruelo_measure,
    uniform_measure,
)

ARC = CircleArcSpec(0.2, 1.0)


def naive_b(lset, curve):
    """B from its definition as a double integral, midpoint rule on a fine grid."""
    k = 4000
    t = (np.arange(k) + 0.5) * curve.length / k
    v = curve.velocity(t)
    mu = lset.array / math.sqrt(lset.m)
    p = (v @ mu.T) ** 2
    return float((p @ p.T).sum() / lset.n * (curve.length / k) ** 2)


# ---------------------------------------------------------------- densities


@pytest.mark.parametrize("m, want", [(2, 2.0), (1, math.sqrt(2)), (25, 5 * math.sqrt(2))])
def test_k1(m, want):
    assert zero_density_k1(m) == pytest.approx(want, rel=1e-15)


def test_expected_count():
    assert expected_count(2, make_segment((0, 0), 0.3, 1.0)) == pytest.approx(2.0)
    assert expected_count(1, make_segment((0, 0), 0.3, 0.5)) == pytest.approx(math.sqrt(2) / 2)


@pytest.mark.parametrize("rho, want", [(0.0, 2 / math.pi), (1.0, 1.0), (-1.0, 1.0), (1 + 1e-13, 1.0)])
def test_g(rho, want):
    assert g_func(rho) == pytest.approx(want, rel=1e-14)


def test_g_rejects_large_correlation():
    with pytest.raises(InvalidCorrelation):
        g_func(1.001)


@given(st.floats(-1, 1))
def test_g_even_and_bounded(rho):
    assert g_func(rho) == pytest.approx(g_func(-rho), abs=1e-15)
    assert 2 / math.pi - 1e-15 <= g_func(rho) <= 1 + 1e-15


def test_k2_examples():
    m = 65
    a = 2 * math.pi**2 * m
    assert two_point_k2(CovarianceJet(0, 0, 0, 0), a) == pytest.approx(2 * m, rel=1e-14)
    assert two_point_k2(CovarianceJet(0, 0, 0, a), a) == pytest.approx(math.pi * m, rel=1e-14)


def test_expansion_examples():
    a = 2 * math.pi**2 * 25
    assert k2_expansion(CovarianceJet(0, 0, 0, 0), a).main == 0
    assert k2_expansion(CovarianceJet(0.3, 0, 0, 0), a).main == pytest.approx(a / (2 * math.pi**2) * 0.09)
    with pytest.raises(ExpansionOutOfDomain):
        k2_expansion(CovarianceJet(0.6, 0, 0, 0), a)


def test_k2_continuous_at_independence():
    a = 2 * math.pi**2 * 25
    for eps in (1e-2, 1e-3, 1e-4):
        jet = CovarianceJet(eps, eps * math.sqrt(a), -eps * math.sqrt(a), eps * a)
        assert two_point_k2(jet, a) - 2 * 25 == pytest.approx(0.0, abs=100 * eps**2 * a)


def test_expansion_residual_is_stable():
    s = enumerate_lattice_points(325)
    c = make_circle_arc(ARC)
    a = k2_expansion_residuals(s, c, 20_000, seed=11)
    b = k2_expansion_residuals(s, c, 20_000, seed=12)
    assert a.accepted == b.accepted == 20_000
    assert np.all(np.isfinite(a.ratios))
    assert max(a.max_ratio, b.max_ratio) < 10
    assert a.max_ratio == pytest.approx(b.max_ratio, rel=0.5)


# ---------------------------------------------------------------- leading constant


@pytest.mark.parametrize("m", [5, 25, 65, 325, 5525])
def test_b_full_circle(m):
    c = make_circle_arc(CircleArcSpec(0.2, 2 * math.pi, phase=0.4))
    assert b_constant(enumerate_lattice_points(m), c) == pytest.approx(c.length**2 / 4, abs=1e-12)


def test_b_matches_midpoint_oracle():
    s = enumerate_lattice_points(65)
    c = make_circle_arc(CircleArcSpec(0.3, 2.5, phase=0.9))
    assert b_constant(s, c) == pytest.approx(naive_b(s, c), rel=1e-6)


def test_b_short_arc_circle_form():
    s = enumerate_lattice_points(5)
    c = make_circle_arc(ARC)
    assert b_constant(s, c) == pytest.approx(circle_arc_constant(c, -7 / 25), abs=1e-14)
    r, x = 0.2, 1.0
    want = 0.04 / 4 + r * r * math.sin(x) ** 2 * (1 - 7 / 25 * math.cos(2 * x)) / 8
    assert b_constant(s, c) == pytest.approx(want, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([5, 25, 65, 85, 325, 1105]), st.floats(0.05, 0.45), st.floats(0.1, 2 * math.pi),
       st.floats(0, 2 * math.pi))
def test_b_bounds(m, r, arc, phase):
    c = make_circle_arc(CircleArcSpec(r, arc, phase=phase))
    b = b_constant(enumerate_lattice_points(m), c)
    L2 = c.length**2
    assert L2 / 4 - 1e-12 <= b <= L2 / 2 + 1e-12


def test_b_requires_curvature():
    with pytest.raises(ZeroCurvature):
        b_constant(enumerate_lattice_points(5), make_segment((0.1, 0.1), 0.2, 0.3))


def test_c_uniform_measure():
    c = make_circle_arc(CircleArcSpec(0.3, 1.7, phase=0.2))
    r, x = 0.3, 1.7
    assert c_tau_gamma(uniform_measure(), c) == pytest.approx(c.length**2 / 4 + r * r * math.sin(x) ** 2 / 8,
                                                              abs=1e-14)


@pytest.mark.parametrize("phase", [0.0, math.pi / 2, math.pi])
def test_c_eighth_circle_ignores_measure(phase):
    c = make_circle_arc(CircleArcSpec(0.25, math.pi / 4, phase=phase))
    vals = [c_tau_gamma(meas, c) for meas in (uniform_measure(), cilleruelo_measure(), tilted_cilleruelo_measure(),
                                              lattice_measure(enumerate_lattice_points(5)))]
    assert max(vals) - min(vals) < 1e-14


def test_c_axis_segment_maximal():
    seg = make_segment((0.1, 0.2), 0.0, 0.4)
    assert c_tau_gamma(cilleruelo_measure(), seg) == pytest.approx(0.16 / 2, abs=1e-12)


def test_c_rejects_lopsided_measure():
    with pytest.raises(InvalidMeasure):
        c_tau_gamma(AngularMeasure((0.0, 0.5), (0.5, 0.5), "custom-atomic"), make_circle_arc(ARC))


def test_c_rotation_invariant():
    meas = lattice_measure(enumerate_lattice_points(1105))
    a = make_circle_arc(CircleArcSpec(0.2, 2.2, phase=0.1))
    b = make_circle_arc(CircleArcSpec(0.2, 2.2, phase=0.1 + math.pi / 2))
    assert c_tau_gamma(meas, a) == pytest.approx(c_tau_gamma(meas, b), abs=1e-14)


def test_quarter_circle_cancellation_depends_on_placement():
    axis = make_circle_arc(CircleArcSpec(0.2, math.pi / 2))
    diag = make_circle_arc(CircleArcSpec(0.2, math.pi / 2, phase=math.pi / 4))

    def lead(meas, c):
        return 4 * c_tau_gamma(meas, c) - c.length**2

    # 4c - L^2 = r^2 (1 + tau4 cos 4 psi) / 2 with psi the middle tangent angle
    assert abs(lead(cilleruelo_measure(), axis)) < 1e-14
    assert lead(tilted_cilleruelo_measure(), axis) == pytest.approx(0.04, rel=1e-12)
    assert abs(lead(tilted_cilleruelo_measure(), diag)) < 1e-14
    assert lead(cilleruelo_measure(), diag) == pytest.approx(0.04, rel=1e-12)


@settings(max_examples=50)
@given(st.floats(0.05, 0.45), st.floats(0.1, 2 * math.pi), st.floats(-4, 4),
       st.sampled_from([5, 25, 65, 325, 1105]))
def test_circle_closed_form_any_phase(r, arc, phase, m):
    s = enumerate_lattice_points(m)
    c = make_circle_arc(CircleArcSpec(r, arc, phase=phase))
    assert b_constant(s, c) == pytest.approx(circle_arc_constant(c, s.tau4), abs=1e-13)


def test_leading_constant_range_direct_energies():
    s = enumerate_lattice_points(5525)
    c = make_circle_arc(CircleArcSpec(0.15, 4.0, phase=0.8))
    a = [tangent_energy(c, (x / math.sqrt(s.m), y / math.sqrt(s.m))) for x, y in s.points]
    assert b_constant(s, c) == pytest.approx(math.fsum(v * v for v in a) / s.n, abs=1e-14)


# ---------------------------------------------------------------- second moments and prediction


def test_parseval_small_levels():
    for m in (25, 325):
        sm = second_moments(enumerate_lattice_points(m), make_circle_arc(ARC))
        assert abs(sm.int_r2 - sm.parseval_r2) < 1e-6


def test_diagonal_pairs_give_L2_over_n():
    c = make_circle_arc(ARC)
    assert abs(oscillatory_integrals(c, np.zeros((1, 2)))[0]) ** 2 == pytest.approx(c.length**2, rel=1e-14)


def test_decay_constant_stable():
    c = make_circle_arc(ARC)
    consts = [oscillatory_decay(enumerate_lattice_points(m), c).constant for m in (325, 5525, 160225)]
    assert max(consts) / min(consts) < 1.5


def test_full_circle_prediction():
    rep = variance_prediction(enumerate_lattice_points(325), make_circle_arc(CircleArcSpec(0.2, 2 * math.pi)))
    assert abs(rep.leading_constant) < 1e-8


def test_integral_within_budget_5525():
    rep = variance_prediction(enumerate_lattice_points(5525), make_circle_arc(ARC))
    assert abs(rep.variance_integral - rep.variance_leading) <= 5 * rep.m / rep.n**1.5
    assert 0 <= rep.leading_constant <= rep.L**2


def test_report_schema_round_trip():
    rep = variance_prediction(enumerate_lattice_points(25), make_circle_arc(ARC))
    d = rep.to_dict()
    assert list(d) == ["m", "n", "tau4", "L", "expected_count", "b_constant", "leading_constant",
                       "variance_leading", "variance_integral", "int_r2", "int_r1_sq", "int_r12_sq"]
    assert PredictionReport.from_dict(d) == rep
    assert rep.predicted_moments["int_r2"] == pytest.approx(rep.L**2 / rep.n)


def test_degenerate_tau_warns():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        variance_prediction(enumerate_lattice_points(1), make_circle_arc(ARC))
    assert any(issubclass(x.category, OutsideHypotheses) for x in w)


def test_quadrature_order_independent():
    s = enumerate_lattice_points(325)
    c = make_circle_arc(ARC)
    a = variance_prediction(s, c).variance_integral
    b = variance_prediction(s, c, quad_order=512).variance_integral
    assert a == pytest.approx(b, rel=1e-9)


# ---------------------------------------------------------------- determinant probe


def test_probe_doubling():
    s = enumerate_lattice_points(160225)
    z = 1e-3 / math.sqrt(s.m)
    p = detsigma_scaling_probe(s, make_circle_arc(ARC), 0.1, [z, 2 * z])
    assert p.p[1] / p.p[0] == pytest.approx(1024, rel=0.01)
    assert min(p.p) > 0


def test_probe_moment_coefficient():
    """The z^10 coefficient equals (alpha/144)(alpha^2 - c)(c^2 + alpha e) from the diagonal moments."""
    s = enumerate_lattice_points(5525)
    c = make_circle_arc(ARC)
    z = [1e-3 / math.sqrt(s.m), 2e-3 / math.sqrt(s.m)]
    p = detsigma_scaling_probe(s, c, 0.1, z)
    assert p.coeff_ratio_moments == pytest.approx(1.0, abs=0.01)
    a = p.a_of_t
    # the two reference laws differ by a closed-form factor
    assert p.coeff_ratio == pytest.approx(p.coeff_ratio_moments * (1 + a) / (2 * (1 - a)), rel=1e-9)


@settings(max_examples=30)
@given(st.sampled_from([5, 25, 65, 325, 5525]), st.floats(0, 1.0))
def test_moment_form_of_coefficient(m, t):
    s = enumerate_lattice_points(m)
    d = diagonal_moments(s, make_circle_arc(ARC), t * 0.2)
    a, al = d.a_of_t, d.alpha
    lhs = al / 144 * (al**2 - d.c_m) * (d.c_m**2 + al * d.e_m)
    rhs = math.pi**14 * m**7 * (1 + a) * (1 - a * a) / 9
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * math.pi**14 * m**7)


def test_probe_rejects_bad_inputs():
    c = make_circle_arc(ARC)
    s = enumerate_lattice_points(25)
    with pytest.raises(ProbeDegenerate):
        detsigma_scaling_probe(s, c, 0.1, [1.0])
    with pytest.raises(ProbeDegenerate):
        detsigma_scaling_probe(s, c, 0.1, [])
    with pytest.raises(ProbeDegenerate):
        detsigma_scaling_probe(enumerate_lattice_points(1), c, 0.1, [1e-4])
