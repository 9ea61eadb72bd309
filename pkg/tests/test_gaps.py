"""Gap ladders, growth diagnostics and cut-level selection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinlab.errors import NoAdmissibleNu
from thinlab.gaps import (
    C_HALF,
    C_HALF_PRIME,
    gap_ratios,
    interval_suprema,
    myp0_diagnostic,
    select_nu,
    smallness_constants,
    zeta_mu_in_interval,
)

NEUMANN = np.pi ** 2 * np.arange(60) ** 2        # unit-interval ladder
HARMONIC = np.arange(1, 61, dtype=float)          # gap condition fails
HALF_NEUMANN = np.pi ** 2 * np.arange(60) ** 2 / 4


def test_constants():
    assert C_HALF == pytest.approx((2 * math.e) ** -0.5)
    assert C_HALF_PRIME == pytest.approx(math.sqrt(math.pi) * (2 * math.e) ** -0.5)
    assert C_HALF_PRIME == pytest.approx(0.7602, abs=5e-4)


def test_quadratic_ladder_ratios():
    rep = gap_ratios(NEUMANN)
    # closed form: pi (2 nu - 1)/(nu - 1) decreasing to 2 pi
    for nu in (5, 20, 50):
        expect = math.pi * (2 * nu - 1) / (nu - 1)
        assert rep.ratio_at(nu) == pytest.approx(expect, rel=1e-12)
    assert rep.tail_max >= 2 * math.pi
    assert rep.tail_max == pytest.approx(2 * math.pi, rel=0.05)


def test_harmonic_ladder_fails():
    rep = gap_ratios(HARMONIC)
    assert rep.tail_max < 0.5
    assert rep.trend_slope <= 0


def test_half_interval_ladder_limit_pi():
    rep = gap_ratios(HALF_NEUMANN)
    assert rep.tail_max == pytest.approx(math.pi, rel=0.05)


def test_zero_mode_skipped():
    rep = gap_ratios(NEUMANN)
    assert rep.nus[0] == 2


@given(st.floats(min_value=0.1, max_value=50.0))
@settings(max_examples=30, deadline=None)
def test_scale_covariance(c):
    a = gap_ratios(NEUMANN)
    b = gap_ratios(c * NEUMANN)
    assert np.allclose(b.ratios, math.sqrt(c) * a.ratios, rtol=1e-9)
    assert np.array_equal(a.candidates, b.candidates)


def test_myp0_quadratic_passes():
    from thinlab.squeeze import upper_bound_beta
    from thinlab.geometry import RectUnionDomain
    beta = upper_bound_beta(RectUnionDomain(((0, 1, 0, 1),)))
    out = myp0_diagnostic(NEUMANN, beta)
    assert out["quadratic_growth"] and out["upper_bound"] and out["applies"]
    assert out["tail_quad_ratio_max"] == pytest.approx(math.pi ** 2, rel=0.1)


def test_myp0_harmonic_fails_growth():
    out = myp0_diagnostic(HARMONIC, beta=10.0)
    assert not out["quadratic_growth"]


def test_myp0_upper_bound_with_beta_pi():
    out = myp0_diagnostic(NEUMANN, beta=math.pi)
    assert out["upper_bound"]  # (nu-1)^2 <= nu^2


# -- selection ----------------------------------------------------------------

def test_constants_at_nu_three():
    lam_lo, lam_hi = float(NEUMANN[2]), float(NEUMANN[3])  # 4 pi^2, 9 pi^2
    c1, c2 = smallness_constants(lam_lo, lam_hi)
    assert c1 == pytest.approx(6 / (5 * math.pi ** 2), rel=1e-12)
    assert c1 == pytest.approx(0.12159, abs=5e-6)
    cut = select_nu(NEUMANN, L=1.9, l=0.01)
    # delta must exceed 24 L = 45.6 -> nu = 2 has delta = 3 pi^2 = 29.6, no;
    # nu = 3 has delta = 5 pi^2 = 49.3, yes
    assert cut.nu == 3
    assert cut.eta == pytest.approx(math.pi ** 2)
    assert cut.interval[0] == pytest.approx(6 * math.pi ** 2)
    assert cut.interval[1] == pytest.approx(7 * math.pi ** 2)


def test_select_smallest_nu():
    cut = select_nu(NEUMANN, L=1.0, l=0.01)
    # first gap above 24: delta_2 = 3 pi^2 = 29.6
    assert cut.nu == 2
    c1, c2 = smallness_constants(cut.lam_lo, cut.lam_hi)
    assert 1.0 * c1 < 0.25 and 0.01 * c2 < 0.25


def test_select_huge_L_fails():
    with pytest.raises(NoAdmissibleNu):
        select_nu(NEUMANN, L=1e9, l=0.01)


def test_zeta_mu_endpoints():
    cut = select_nu(NEUMANN, L=1.9, l=0.01)
    zeta, mu = zeta_mu_in_interval(cut.interval)
    assert (zeta, mu) == cut.interval
    assert cut.lam_lo < zeta < mu < cut.lam_hi
    # margins exceed a third of the gap
    delta = cut.lam_hi - cut.lam_lo
    assert zeta - cut.lam_lo > delta / 3
    assert cut.lam_hi - zeta > delta / 3


def test_degenerate_interval_rejected():
    with pytest.raises(ValueError):
        zeta_mu_in_interval((2.0, 2.0))


@given(st.integers(min_value=2, max_value=40))
@settings(max_examples=30, deadline=None)
def test_strict_domination_of_suprema(nu):
    lam_lo, lam_hi = float(NEUMANN[nu - 1]), float(NEUMANN[nu])
    sup1, sup2 = interval_suprema(lam_lo, lam_hi)
    c1, c2 = smallness_constants(lam_lo, lam_hi)
    assert sup1 < c1
    assert sup2 < c2


def test_computed_spectrum_roundtrip():
    from thinlab.geometry import EdgeSpec, WeightFn
    from thinlab.spectra import solve_edge_spectrum
    e = EdgeSpec(0, (0, 1), WeightFn.constant(1.0, (0, 1)))
    sd = solve_edge_spectrum(e, 51, h=1 / 2048)
    rep = gap_ratios(sd)
    assert abs(rep.tail_max - 2 * math.pi) / (2 * math.pi) < 0.05
    assert rep.c1_estimate == pytest.approx(1 / (2 * math.pi), rel=0.1)
