"""Anisotropic 2-D eigenproblem against separation-of-variables oracles."""

import math

import numpy as np
import pytest

from thinlab.errors import NonconformingInput
from thinlab.geometry import RectUnionDomain, build_from_rectangles
from thinlab.squeeze import (
    anisotropic_operator,
    convergence_sweep,
    eigenvector_alignment,
    epsilon_norm,
    lift_graph_vector,
    solve_graph_limit,
    solve_squeezed_spectrum,
    triangulate,
    upper_bound_beta,
)

UNIT_SQUARE = RectUnionDomain(((0, 1, 0, 1),))


def separated_eigenvalues(eps, count):
    """Sorted pi^2 (m^2 + n^2/eps^2) over m, n >= 0."""
    vals = sorted(math.pi ** 2 * (m * m + n * n / eps ** 2)
                  for m in range(40) for n in range(40))
    return np.array(vals[:count])


# -- triangulation -------------------------------------------------------------

def test_unit_square_coarse_counts():
    tri = triangulate(UNIT_SQUARE, 0.5)
    assert tri.nv == 9
    assert tri.nt == 8
    assert np.all(tri.areas() > 0)
    assert tri.boundary.sum() == 8  # all but the center


def test_halving_h_quadruples_triangles():
    t1 = triangulate(UNIT_SQUARE, 1 / 8)
    t2 = triangulate(UNIT_SQUARE, 1 / 16)
    assert t2.nt == 4 * t1.nt


def test_l_shape_is_conforming():
    dom = RectUnionDomain(((0, 1, 0, 1), (1, 2, 0, 2)))
    tri = triangulate(dom, 1 / 4)
    # vertex count equals the union of the per-rectangle grids
    assert tri.nv == 5 * 5 + 5 * 9 - 5
    assert np.all(tri.areas() > 0)
    assert tri.areas().sum() == pytest.approx(3.0)


def test_misaligned_overlap_still_conforming():
    dom = RectUnionDomain(((0, 1, 0, 1), (0.5, 1.5, 0.3, 0.8)))
    tri = triangulate(dom, 1 / 8)
    assert np.all(tri.areas() > 0)
    # union area = 1 + 0.5*0.5 - overlap 0.5*0.5 = 1.25... computed directly:
    assert tri.areas().sum() == pytest.approx(1.0 + 0.5 * 0.5 - 0.5 * 0.5 + 0.25)


def test_bad_mesh_size_rejected():
    with pytest.raises(NonconformingInput):
        triangulate(UNIT_SQUARE, 0.0)


# -- spectra -------------------------------------------------------------------

def test_isotropic_unit_square_spectrum():
    sol = solve_squeezed_spectrum(UNIT_SQUARE, 1.0, 6, h=1 / 32)
    exact = separated_eigenvalues(1.0, 6)
    got = sol.data.eigenvalues
    assert np.all(np.abs(got - exact) <= 5 * (1 / 32) ** 2 * np.maximum(exact, 1.0))


def test_squeezed_spectrum_general_eps():
    for eps in (0.5, 0.25):
        sol = solve_squeezed_spectrum(UNIT_SQUARE, eps, 6, h=1 / 32)
        exact = separated_eigenvalues(eps, 6)
        got = sol.data.eigenvalues
        assert np.allclose(got, exact, rtol=2e-2, atol=1e-6)


def test_eps_tenth_first_modes_are_pure_x():
    h = 1 / 32
    sol = solve_squeezed_spectrum(UNIT_SQUARE, 0.1, 10, h=h)
    exact = math.pi ** 2 * np.arange(10) ** 2  # first y-mode would be 100 pi^2
    got = sol.data.eigenvalues
    # P1 one-sided eigenvalue bias is about lam^2 h^2 / 12; allow 4x headroom
    assert np.all(got >= exact - 1e-6)
    assert np.all(got - exact <= exact ** 2 * h * h / 3.0 + 1e-6)


def test_monotone_in_eps():
    lams = []
    for eps in (1.0, 0.5, 0.25, 0.1):
        lams.append(solve_squeezed_spectrum(UNIT_SQUARE, eps, 8,
                                            h=1 / 16).data.eigenvalues)
    for a, b in zip(lams, lams[1:]):  # eps decreasing: eigenvalues nondecreasing
        assert np.all(b >= a - 1e-9)


def test_operator_invariants():
    tri = triangulate(UNIT_SQUARE, 1 / 8)
    op = anisotropic_operator(tri, 0.2)
    S = op.stiffness
    assert abs(S - S.T).max() < 1e-12
    ref = op.Kx + op.Ky / 0.04
    assert abs(S - ref).max() < 1e-12


# -- the eps norm ---------------------------------------------------------------

def test_epsilon_norm_zero_and_constant():
    tri = triangulate(UNIT_SQUARE, 1 / 8)
    op = anisotropic_operator(tri, 0.3)
    assert epsilon_norm(np.zeros(tri.nv), op) == 0.0
    assert epsilon_norm(np.ones(tri.nv), op) == pytest.approx(1.0)


def test_epsilon_norm_sine_in_y():
    tri = triangulate(UNIT_SQUARE, 1 / 64)
    op = anisotropic_operator(tri, 0.1)
    u = np.sin(np.pi * tri.points[:, 1])
    expect = math.sqrt(math.pi ** 2 / (2 * 0.01) + 0.5)
    assert epsilon_norm(u, op) == pytest.approx(expect, rel=1e-3)


def test_epsilon_norm_shape_check():
    tri = triangulate(UNIT_SQUARE, 1 / 8)
    op = anisotropic_operator(tri, 0.3)
    with pytest.raises(ValueError):
        epsilon_norm(np.ones(tri.nv + 3), op)


# -- sweep and alignment -----------------------------------------------------

@pytest.fixture(scope="module")
def square_sweep():
    return convergence_sweep(UNIT_SQUARE, [1.0, 0.5, 0.25, 0.1], 8, h=1 / 64)


def test_sweep_x_mode_is_eps_independent(square_sweep):
    rows = [r for r in square_sweep if r["j"] == 2]
    for r in rows:
        assert r["gap"] <= 5 * (1 / 64) ** 2 * max(r["lambda_0"], 1.0)
    assert rows[0]["lambda_0"] == pytest.approx(math.pi ** 2, rel=1e-3)


def test_sweep_gap_nonincreasing(square_sweep):
    for j in range(1, 9):
        gaps = [r["gap"] for r in square_sweep if r["j"] == j]
        for a, b in zip(gaps, gaps[1:]):
            assert b <= a + 1e-9


def test_squeezed_eigenvalues_never_exceed_limit(square_sweep):
    # the y-constant lift is admissible for the squeezed Rayleigh
    # quotient, so every squeezed eigenvalue sits below the limit one
    for r in square_sweep:
        assert r["lambda_eps"] <= r["lambda_0"] + 1e-8


def test_sweep_tie_at_half(square_sweep):
    # eps = 0.5: third eigenvalue is the tie 4 pi^2 of the (2,0) and (0,1) modes
    row = next(r for r in square_sweep if r["j"] == 3 and r["epsilon"] == 0.5)
    assert row["lambda_eps"] == pytest.approx(4 * math.pi ** 2, rel=2e-2)


def test_alignment_constant_mode(square_sweep):
    row = next(r for r in square_sweep if r["j"] == 1 and r["epsilon"] == 0.1)
    assert row["alignment"] <= 1e-6


def test_alignment_x_mode_small_eps(square_sweep):
    row = next(r for r in square_sweep if r["j"] == 2 and r["epsilon"] == 0.1)
    assert row["alignment"] <= (1 / 64) * (1 + math.pi ** 2)


def test_alignment_nonincreasing_on_step_domain():
    dom = RectUnionDomain(((0, 1, 0, 1), (1, 2, 0, 2)))
    rows = convergence_sweep(dom, [0.4, 0.2, 0.1], 4, h=1 / 32)
    for j in (1, 2, 3):
        al = [r["alignment"] for r in rows if r["j"] == j]
        for a, b in zip(al, al[1:]):
            assert b <= a + 1e-7


def test_lift_is_y_constant_per_strip():
    dom = RectUnionDomain(((0, 1, 0, 1), (1, 2, 0, 2)))
    graph = build_from_rectangles(dom)
    tri = triangulate(dom, 1 / 16)
    gd = solve_graph_limit(graph, tri, 3)
    lifted = lift_graph_vector(graph, gd.mesh, gd.vectors[:, 1], tri)
    # nodes sharing an x inside one strip share the value
    xs = tri.points[:, 0]
    for x in (0.25, 1.5):
        sel = np.isclose(xs, x)
        strip_vals = lifted[sel]
        assert np.ptp(strip_vals) < 1e-12


def test_upper_bound_beta_on_limit_spectrum():
    dom = RectUnionDomain(((0, 1, 0, 1), (1, 2, 0, 2)))
    graph = build_from_rectangles(dom)
    tri = triangulate(dom, 1 / 32)
    beta = upper_bound_beta(dom)
    lam = solve_graph_limit(graph, tri, 12).eigenvalues
    nu = np.arange(1, 13)
    assert np.all(lam <= beta ** 2 * nu ** 2 + 1e-9)
