"""Squeeze families: one limit system plus its positive-eps relatives.

Everything here is glue between the per-module solvers: the graph limit
is discretized on the x-grid of the shared triangulation, the plateau
operator is calibrated once on the limit table and reused verbatim at
every squeeze level, and all comparisons happen in a common nodal
representation under the squeeze-level energy norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from thinlab.dynamics import band_limited_ensemble, sample_attractor
from thinlab.errors import EmptySample
from thinlab.gaps import SelectedCut, gap_ratios, select_nu
from thinlab.geometry import MetricGraph, RectUnionDomain, build_from_rectangles
from thinlab.manifold import (
    GalerkinSystem,
    ManifoldChart,
    build_chart,
    build_system,
    compare_charts,
)
from thinlab.nonlin import (
    BasisTable,
    CutoffOperator,
    ScalarNonlinearity,
    build_cutoff,
    compress_table,
    graph_basis_table,
    triangulation_basis_table,
)
from thinlab.spectra import SpectralData
from thinlab.squeeze import (
    SqueezeSolution,
    Triangulation,
    anisotropic_operator,
    lift_graph_vector,
    solve_graph_limit,
    triangulate,
)
from thinlab.spectra import _solve_pencil


def default_cut(spectrum, window: float = 0.3) -> SelectedCut:
    """A cut at the largest relative gap, without smallness conditions.

    Dynamics-only pipelines need the weights and horizon of a system but
    no contraction certificate; this picks the widest computed gap.
    """
    rep = gap_ratios(spectrum)
    nu = int(rep.candidates[0])
    lam = np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=float)
    lam_lo, lam_hi = float(lam[nu - 1]), float(lam[nu])
    eta = (lam_hi - lam_lo) / 5.0
    interval = (lam_lo + 2 * eta, lam_lo + 3 * eta)
    from thinlab.gaps import smallness_constants
    c1, c2 = smallness_constants(lam_lo, lam_hi)
    return SelectedCut(nu, eta, interval, c1, c2, interval[0], interval[1],
                       lam_lo, lam_hi)


@dataclass(frozen=True)
class SqueezeFamily:
    """The limit system and its squeeze levels over one triangulation."""

    domain: RectUnionDomain
    graph: MetricGraph
    triangulation: Triangulation
    limit_spectrum: SpectralData
    cutoff: CutoffOperator
    cut: SelectedCut
    limit: GalerkinSystem
    levels: dict      # eps -> GalerkinSystem
    solutions: dict   # eps -> SqueezeSolution

    def lift_to_nodal(self, coeffs: np.ndarray) -> np.ndarray:
        """Graph coefficients -> y-constant nodal field on the mesh."""
        nodal_graph = self.limit_spectrum.vectors[:, :len(coeffs)] @ coeffs
        return lift_graph_vector(self.graph, self.limit_spectrum.mesh,
                                 nodal_graph, self.triangulation)

    def eps_to_nodal(self, eps: float, coeffs: np.ndarray) -> np.ndarray:
        return self.solutions[eps].data.vectors[:, :len(coeffs)] @ coeffs

    def enorm_nodal(self, eps: float, field: np.ndarray) -> float:
        op = self.solutions[eps].operator
        quad = float(field @ (op.Kx @ field)) \
            + float(field @ (op.Ky @ field)) / eps ** 2 \
            + float(field @ (op.M @ field))
        return math.sqrt(max(quad, 0.0))

    def project_lift(self, eps: float, coeffs: np.ndarray) -> np.ndarray:
        """Expand a lifted graph state in the eps eigenbasis (truncated)."""
        sol = self.solutions[eps]
        nodal = self.lift_to_nodal(coeffs)
        n = self.levels[eps].n_modes
        return sol.data.vectors[:, :n].T @ (sol.operator.M @ nodal)


def _block_groups(tri: Triangulation, block: float) -> np.ndarray:
    """Spatial block index per triangle, for quadrature compression."""
    cen = tri.centroids()
    ix = np.floor(cen[:, 0] / block).astype(int)
    iy = np.floor(cen[:, 1] / block).astype(int)
    return ix * (iy.max() + 2) + iy


def build_family(domain: RectUnionDomain, base: ScalarNonlinearity,
                 epss, h: float, l: float = 0.2, ball_radius: float = 0.3,
                 n_modes: int | None = None, cut: SelectedCut | None = None,
                 L_override: float | None = None, nu_override: int | None = None,
                 seed: int = 7, require_admissible: bool = True,
                 n_limit_modes: int = 30,
                 quad_block_cells: int = 2) -> SqueezeFamily:
    """Assemble the limit system and one system per squeeze level.

    The limit spectrum runs on the triangulation's x-grid, so the
    squeeze levels converge to it at the matrix level; the plateau
    operator is calibrated on the limit table and shared; all reaction
    terms integrate with the same block-compressed centroid rule, so the
    nonlinear projections converge with the eigenvectors.
    """
    graph = build_from_rectangles(domain)
    tri = triangulate(domain, h)
    limit_spec = solve_graph_limit(graph, tri, n_limit_modes)
    n_limit_modes = limit_spec.count  # a coarse x-grid can cap the window
    groups = _block_groups(tri, quad_block_cells * h) \
        if quad_block_cells > 1 else None

    lift_basis = np.stack(
        [lift_graph_vector(graph, limit_spec.mesh, limit_spec.vectors[:, j], tri)
         for j in range(n_limit_modes)], axis=1)
    tnodes = tri.triangles
    centroid_vals = (lift_basis[tnodes[:, 0]] + lift_basis[tnodes[:, 1]]
                     + lift_basis[tnodes[:, 2]]) / 3.0
    table0 = BasisTable(tri.areas(), centroid_vals,
                        np.asarray(limit_spec.eigenvalues, dtype=float))
    if groups is not None:
        table0 = compress_table(table0, groups)

    cutoff = build_cutoff(base, table0, l=l, ball_radius=ball_radius, seed=seed)
    L_eff = cutoff.L if L_override is None else L_override
    if cut is None:
        if require_admissible:
            cut = select_nu(limit_spec, L_eff, cutoff.l)
            if nu_override is not None and nu_override != cut.nu:
                raise ValueError(
                    f"requested nu = {nu_override}, admissible choice is {cut.nu}")
        else:
            cut = default_cut(limit_spec)
    limit = build_system(0.0, limit_spec.eigenvalues, table0, cutoff, cut,
                         n_modes=n_modes)
    levels = {}
    solutions = {}
    for eps in epss:
        op = anisotropic_operator(tri, float(eps))
        w, v = _solve_pencil(op.stiffness, op.M, limit.n_modes)
        # eigenvector signs are arbitrary per solve; align against the
        # lifted limit basis so xi coordinates mean the same state
        Mv = op.M @ v
        for j in range(v.shape[1]):
            if float(lift_basis[:, j] @ Mv[:, j]) < 0.0:
                v[:, j] = -v[:, j]
        sol = SqueezeSolution(op, tri, SpectralData(w, v, op.stiffness, op.M))
        solutions[float(eps)] = sol
        table = triangulation_basis_table(sol)
        if groups is not None:
            table = compress_table(table, groups)
        levels[float(eps)] = build_system(float(eps), w, table, cutoff, cut,
                                          n_modes=limit.n_modes)
    return SqueezeFamily(domain, graph, tri, limit_spec, cutoff, cut,
                         limit, levels, solutions)


# ---------------------------------------------------------------------------
# family-level comparisons
# ---------------------------------------------------------------------------

def epsilon_compare(family: SqueezeFamily, xi: np.ndarray,
                    tol: float = 1e-10) -> list[dict]:
    """Chart, derivative, field and Jacobian distances per squeeze level.

    The limit chart is the reference; each row reports sup-over-grid
    distances in the squeeze-level energy norm, which decrease with eps
    because the limit discretization is the matrix limit of the levels.
    """
    chart0 = build_chart(family.limit, xi, tol=tol)
    rows = []
    for eps in sorted(family.levels, reverse=True):
        sys_e = family.levels[eps]
        chart_e = build_chart(sys_e, xi, tol=tol)
        cmp_ = compare_charts(
            chart_e, chart0,
            to_nodal_eps=lambda c, e=eps: family.eps_to_nodal(e, c),
            to_nodal_lim=family.lift_to_nodal,
            enorm_eps=lambda d, e=eps: family.enorm_nodal(e, d))
        cmp_["epsilon"] = eps
        cmp_["contraction"] = chart_e.contraction
        rows.append(cmp_)
    return rows


def semidistance_sweep(family: SqueezeFamily, count: int = 48,
                       transient: float = 20.0, window: float = 5.0,
                       stride: int = 1000, dt: float = 2e-3,
                       seed: int = 13, chunk: int = 16) -> list[dict]:
    """One-sided Hausdorff distance of each squeeze-level attractor sample
    to the limit sample, in the squeeze-level energy norm."""
    ens0 = band_limited_ensemble(family.limit, count, family.cutoff.ball_radius,
                                 seed)
    sample0 = sample_attractor(family.limit, ens0, transient, window,
                               stride, dt)
    A0 = np.stack([family.lift_to_nodal(p) for p in sample0.points])
    rows = []
    for eps in sorted(family.levels, reverse=True):
        sys_e = family.levels[eps]
        ens_e = np.stack([family.project_lift(eps, p) for p in ens0])
        sample_e = sample_attractor(sys_e, ens_e, transient, window,
                                    stride, dt)
        if len(sample_e) == 0 or len(sample0) == 0:
            raise EmptySample("attractor sampling returned nothing")
        op = family.solutions[eps].operator
        S = (op.Kx + op.Ky / eps ** 2 + op.M).tocsr()
        Ae = sample_e.points @ family.solutions[eps].data.vectors[:, :sys_e.n_modes].T
        worst = 0.0
        for s in range(0, len(Ae), chunk):
            diff = Ae[s:s + chunk, None, :] - A0[None, :, :]
            quad = np.einsum("abn,abn->ab", diff, diff @ S.toarray().T) \
                if S.shape[0] <= 1200 else None
            if quad is None:
                quad = np.empty(diff.shape[:2])
                for a in range(diff.shape[0]):
                    SD = S @ diff[a].T
                    quad[a] = np.einsum("nb,nb->b", diff[a].T, SD)
            best = np.sqrt(np.maximum(quad, 0.0)).min(axis=1)
            worst = max(worst, float(best.max()))
        rows.append({"epsilon": eps, "semidistance": worst})
    return rows


def linear_flow_compare(family: SqueezeFamily, u0_graph: np.ndarray,
                        t0: float = 0.2) -> list[dict]:
    """Decay of a lifted limit state under each squeeze-level semigroup,
    against the lifted limit decay, in the squeeze-level energy norm."""
    u0_graph = np.asarray(u0_graph, dtype=float)
    if u0_graph.ndim != 1 or len(u0_graph) > family.limit.n_modes:
        raise ValueError("initial state must be limit coefficients")
    if t0 <= 0:
        raise ValueError("need a positive time")
    coeffs0 = np.zeros(family.limit.n_modes)
    coeffs0[:len(u0_graph)] = u0_graph
    decayed0 = coeffs0 * np.exp(-family.limit.eigenvalues * t0)
    ref = family.lift_to_nodal(decayed0)
    rows = []
    for eps in sorted(family.levels, reverse=True):
        sys_e = family.levels[eps]
        ce = family.project_lift(eps, coeffs0)
        decayed = ce * np.exp(-sys_e.eigenvalues * t0)
        diff = family.eps_to_nodal(eps, decayed) - ref
        rows.append({"epsilon": eps,
                     "difference": family.enorm_nodal(eps, diff)})
    return rows
