"""Reaction terms, Galerkin projection, interpolation probe, cut-off."""

import math

import numpy as np
import pytest

from thinlab.geometry import EdgeSpec, RectUnionDomain, WeightFn
from thinlab.nonlin import (
    BasisTable,
    build_cutoff,
    cubic_bistable,
    estimate_c_hat,
    from_config,
    gagliardo_constant,
    graph_basis_table,
    growth_and_bounds,
    liapunov_V0,
    linear_decay,
    nemitski_apply,
    polynomial,
    probe_coefficients,
    triangulation_basis_table,
    verify_cutoff,
)
from thinlab.spectra import solve_edge_spectrum


@pytest.fixture(scope="module")
def unit_table():
    e = EdgeSpec(0, (0, 1), WeightFn.constant(1.0, (0, 1)))
    sd = solve_edge_spectrum(e, 12, h=1 / 128)
    return graph_basis_table(sd)


@pytest.fixture(scope="module")
def bistable_cut(unit_table):
    f = cubic_bistable()
    return f, build_cutoff(f, unit_table, l=0.2, ball_radius=1.6, seed=7)


def test_catalog_verification():
    assert cubic_bistable().verify()["ok"]
    assert linear_decay().verify()["ok"]
    assert polynomial([0.0, 1.0, 0.0, -1.0]).verify()["ok"]


def test_polynomial_rejects_even_degree():
    with pytest.raises(ValueError):
        polynomial([0.0, 1.0, -1.0])


def test_from_config():
    assert from_config("cubic-bistable").name == "cubic-bistable"
    assert from_config({"name": "linear", "rate": 2.0}).f(np.array(3.0)) == -6.0
    p = from_config({"name": "polynomial", "coeffs": [0, 1, 0, -1]})
    assert p.f(np.array(2.0)) == pytest.approx(-6.0)


# -- projection ---------------------------------------------------------------

def test_identity_projection(unit_table):
    rng = np.random.default_rng(3)
    U = rng.standard_normal(12)
    out = nemitski_apply(U, unit_table, lambda s: s)
    assert np.allclose(out, U, atol=1e-9)


def test_zero_maps_to_zero(unit_table):
    f = cubic_bistable()
    out = nemitski_apply(np.zeros(12), unit_table, f.f)
    assert np.allclose(out, 0.0)


def test_cosine_mode_cubic_projection(unit_table):
    # oracle: for u = c sqrt(2) cos(pi x), the first-mode component of
    # u - u^3 is c (1 - 1.5 c^2); cross-checked by adaptive quadrature
    from scipy.integrate import quad
    f = cubic_bistable()
    for c in (0.25, 0.8):
        U = np.zeros(12)
        U[1] = c
        out = nemitski_apply(U, unit_table, f.f)
        assert out[1] == pytest.approx(c * (1 - 1.5 * c * c), abs=1e-6)
        ref, _ = quad(lambda x: (f.f(c * math.sqrt(2) * math.cos(math.pi * x))
                                 * math.sqrt(2) * math.cos(math.pi * x)), 0, 1)
        assert out[1] == pytest.approx(ref, abs=1e-6)


def test_growth_bound(unit_table):
    f = cubic_bistable()
    c_hat = estimate_c_hat(f, unit_table)
    assert growth_and_bounds(f, unit_table, np.zeros(12), c_hat)["ok"]
    probes = probe_coefficients(unit_table, 100, 1.0, seed=11)
    assert growth_and_bounds(f, unit_table, probes, c_hat)["ok"]
    # doubling u keeps the bound (power beta + 1 absorbs the scaling)
    assert growth_and_bounds(f, unit_table, 2.0 * probes, c_hat)["ok"]


def test_antiderivative_estimate(unit_table):
    # |F(u)|_L1 <= C (1 + |u|_H1^(beta+2)) with a probed constant
    f = cubic_bistable()
    probes = probe_coefficients(unit_table, 150, 2.0, seed=5)
    Fv = np.abs(f.antiderivative(unit_table.values(probes)))
    l1 = Fv @ unit_table.weights
    h1 = unit_table.h1_norm(probes)
    c = 1.25 * np.max(l1 / (1 + h1 ** (f.growth_beta + 2)))
    fresh = probe_coefficients(unit_table, 150, 2.0, seed=6)
    Fv2 = np.abs(f.antiderivative(unit_table.values(fresh)))
    assert np.all(Fv2 @ unit_table.weights <= c * (1 + unit_table.h1_norm(fresh) ** 4) * 1.3)


# -- interpolation constant ----------------------------------------------------

def test_gagliardo_probe_contains_constants(unit_table):
    c1 = gagliardo_constant(6.0, 0.75, unit_table)
    U = np.zeros(12)
    U[0] = 1.0  # the constant mode
    ratio = unit_table.lq_norm(U, 6.0) / (
        unit_table.h1_norm(np.atleast_2d(U))[0] ** 0.75
        * unit_table.l2_norm(U) ** 0.25)
    assert c1 >= ratio


def test_gagliardo_stable_under_refinement():
    f = EdgeSpec(0, (0, 1), WeightFn.constant(1.0, (0, 1)))
    tables = [graph_basis_table(solve_edge_spectrum(f, 12, h=h))
              for h in (1 / 64, 1 / 128)]
    c = [gagliardo_constant(6.0, 0.75, t) for t in tables]
    assert abs(c[1] - c[0]) <= 0.1 * max(c)


def test_gagliardo_split_inequality(unit_table):
    # |u|_q <= C1 theta rho^(1-theta)|u|_H1 + C1 (1-theta) rho^(-theta)|u|_L2
    q, theta = 6.0, 0.75
    c1 = gagliardo_constant(q, theta, unit_table)
    probes = probe_coefficients(unit_table, 200, 2.0, seed=9)
    lq = unit_table.lq_norm(probes, q)
    for rho in (0.01, 0.1, 1.0, 10.0):
        rhs = c1 * theta * rho ** (1 - theta) * unit_table.h1_norm(probes) \
            + c1 * (1 - theta) * rho ** (-theta) * unit_table.l2_norm(probes)
        assert np.all(lq <= rhs * (1 + 1e-9))


def test_gagliardo_theta_range(unit_table):
    with pytest.raises(ValueError):
        gagliardo_constant(6.0, 0.5, unit_table)


# -- cut-off --------------------------------------------------------------------

def test_cutoff_equals_plain_term_inside(unit_table, bistable_cut):
    f, op = bistable_cut
    probes = probe_coefficients(unit_table, 100, 1.6, seed=21)
    assert np.all(unit_table.lq_norm(probes, op.q) < op.M)
    plain = nemitski_apply(probes, unit_table, f.f)
    assert np.allclose(op.apply(probes, unit_table), plain, atol=1e-14)


def test_cutoff_vanishes_far_out(unit_table, bistable_cut):
    _, op = bistable_cut
    U = np.zeros(12)
    U[0] = 100.0  # giant constant: |u|_q far beyond 2M
    assert unit_table.lq_norm(U, op.q) > 2 * op.M
    assert np.allclose(op.apply(U, unit_table), 0.0)


def test_cutoff_estimates_global(unit_table, bistable_cut):
    _, op = bistable_cut
    rep = verify_cutoff(op, unit_table, 1.6, n_pairs=1000, seed=40,
                        region="global")
    assert rep["ok"], rep
    assert rep["lipschitz_rate"] == 1.0
    assert rep["derivative_rate"] == 1.0
    assert rep["derivative_fd_error"] < 1e-3


def test_cutoff_estimates_operative_on_ball(unit_table, bistable_cut):
    _, op = bistable_cut
    rep = verify_cutoff(op, unit_table, 1.6, n_pairs=1000, seed=41,
                        region="ball")
    assert rep["ok"], rep
    assert rep["L_checked"] == op.L
    assert op.L < op.L_formula


def test_cutoff_q_invariant():
    f = cubic_bistable()
    e = EdgeSpec(0, (0, 1), WeightFn.constant(1.0, (0, 1)))
    sd = solve_edge_spectrum(e, 8, h=1 / 64)
    t = graph_basis_table(sd)
    op = build_cutoff(f, t, l=0.1, ball_radius=1.0)
    assert op.q >= 2 * (f.growth_beta + 1)
    assert 1 - 2 / op.q < op.theta < 1


def test_subspace_preservation_on_lifted_functions():
    # plain term applied to a y-constant state has no components on the
    # y-varying modes; eps = 0.45 with five modes keeps every eigenvalue
    # simple and every mode purely x or purely y-bearing
    from thinlab.squeeze import solve_squeezed_spectrum
    dom = RectUnionDomain(((0, 1, 0, 1),))
    sol = solve_squeezed_spectrum(dom, 0.45, 5, h=1 / 24)
    table = triangulation_basis_table(sol)
    f = cubic_bistable()
    U = np.zeros(5)
    U[1] = 0.7  # first x-mode
    out = nemitski_apply(U, table, f.f)
    pts = sol.triangulation.points
    ys = sol.data.vectors
    y_var = [max(np.ptp(ys[:, j][np.isclose(pts[:, 0], xc)])
                 for xc in (0.25, 0.5)) for j in range(5)]
    y_modes = [j for j, var in enumerate(y_var) if var > 0.1]
    assert len(y_modes) == 2  # the (0,1) and (1,1) modes sit in this window
    for j in y_modes:
        assert abs(out[j]) < 2e-3


def test_liapunov_values(unit_table):
    f = cubic_bistable()
    assert liapunov_V0(np.zeros(12), unit_table, f) == pytest.approx(0.0)
    lin = linear_decay()
    U = np.zeros(12)
    U[0] = 0.7  # constant c on the unit edge: V0 = c^2 / 2
    assert liapunov_V0(U, unit_table, lin) == pytest.approx(0.245, abs=1e-9)
