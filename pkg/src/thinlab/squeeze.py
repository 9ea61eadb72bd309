"""Anisotropic eigenproblems on the unsqueezed domain.

The squeezed domain is never meshed: squeezing by eps is equivalent to
keeping the fixed domain and weighting y-derivatives by 1/eps^2.  As
eps shrinks, the discrete pencil converges to its restriction to the
kernel of the y-stiffness, which is exactly the space of functions
constant in y on each strip, i.e. the metric-graph problem.  Solving
the graph on the x-grid of the triangulation therefore gives a limit
reference with no independent discretization floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from thinlab.errors import DegenerateEigenvalue, NonconformingInput
from thinlab.geometry import MetricGraph, RectUnionDomain, build_from_rectangles
from thinlab.spectra import (
    Mesh1D,
    SpectralData,
    _solve_pencil,
    build_mesh,
    assemble_graph,
)


# ---------------------------------------------------------------------------
# triangulations of rectangle unions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Triangulation:
    """Conforming right-triangle mesh of a rectangle union."""

    points: np.ndarray        # (nv, 2)
    triangles: np.ndarray     # (nt, 3) positively oriented
    h: float
    boundary: np.ndarray      # (nv,) bool

    @property
    def nv(self) -> int:
        return self.points.shape[0]

    @property
    def nt(self) -> int:
        return self.triangles.shape[0]

    def areas(self) -> np.ndarray:
        p = self.points[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def centroids(self) -> np.ndarray:
        return self.points[self.triangles].mean(axis=1)


def _axis_ticks(breaks: list[float], h: float) -> np.ndarray:
    ticks = [breaks[0]]
    for lo, hi in zip(breaks, breaks[1:]):
        n = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
        ticks.extend(np.linspace(lo, hi, n + 1)[1:])
    return np.asarray(ticks)


def triangulate(domain: RectUnionDomain, h: float) -> Triangulation:
    """Structured mesh on the tensor grid of all rectangle boundaries.

    All rectangle faces land on grid lines, so overlapping or adjacent
    rectangles always mesh conformingly.
    """
    if h <= 0:
        raise NonconformingInput("mesh size must be positive")
    tol = 1e-9 * domain.scale
    xb = sorted({r[0] for r in domain.rectangles} | {r[1] for r in domain.rectangles})
    yb = sorted({r[2] for r in domain.rectangles} | {r[3] for r in domain.rectangles})
    xb = [x for i, x in enumerate(xb) if i == 0 or x - xb[i - 1] > tol]
    yb = [y for i, y in enumerate(yb) if i == 0 or y - yb[i - 1] > tol]
    xs = _axis_ticks(xb, h)
    ys = _axis_ticks(yb, h)
    nx, ny = len(xs) - 1, len(ys) - 1

    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    covered = np.zeros((nx, ny), dtype=bool)
    for x0, x1, y0, y1 in domain.rectangles:
        ix = (cx > x0) & (cx < x1)
        iy = (cy > y0) & (cy < y1)
        covered[np.ix_(ix, iy)] = True
    if not covered.any():
        raise NonconformingInput("no cell covered by any rectangle")

    used = np.zeros((nx + 1, ny + 1), dtype=bool)
    ci, cj = np.nonzero(covered)
    for di in (0, 1):
        for dj in (0, 1):
            used[ci + di, cj + dj] = True
    vid = -np.ones((nx + 1, ny + 1), dtype=int)
    vid[used] = np.arange(int(used.sum()))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    points = np.c_[X[used], Y[used]]

    a = vid[ci, cj]
    b = vid[ci + 1, cj]
    c = vid[ci + 1, cj + 1]
    d = vid[ci, cj + 1]
    tris = np.concatenate([np.stack([a, b, c], axis=1),
                           np.stack([a, c, d], axis=1)])

    # boundary nodes: some incident cell is missing
    pad = np.zeros((nx + 2, ny + 2), dtype=bool)
    pad[1:-1, 1:-1] = covered
    interior = pad[:-1, :-1] & pad[1:, :-1] & pad[:-1, 1:] & pad[1:, 1:]
    boundary = used & ~interior
    return Triangulation(points, tris, h, boundary[used])


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnisotropicOperator:
    """Directional stiffness pair with mass; operator is Kx + Ky/eps^2."""

    eps: float
    Kx: sp.spmatrix
    Ky: sp.spmatrix
    M: sp.spmatrix

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("squeeze factor must be positive")

    @property
    def stiffness(self) -> sp.spmatrix:
        return (self.Kx + self.Ky / self.eps ** 2).tocsr()


def assemble_triangulation(tri: Triangulation):
    """P1 matrices (Kx, Ky, M) for the directional forms."""
    t = tri.triangles
    p = tri.points[t]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    A = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    if np.any(A <= 0):
        raise NonconformingInput("negatively oriented triangle")
    rows, cols, vx, vy, vm = [], [], [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(t[:, i])
            cols.append(t[:, j])
            vx.append(b[:, i] * b[:, j] / (4 * A))
            vy.append(c[:, i] * c[:, j] / (4 * A))
            vm.append(A / 12.0 * (1 + (i == j)))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    shape = (tri.nv, tri.nv)
    Kx = sp.coo_matrix((np.concatenate(vx), (rows, cols)), shape=shape).tocsr()
    Ky = sp.coo_matrix((np.concatenate(vy), (rows, cols)), shape=shape).tocsr()
    M = sp.coo_matrix((np.concatenate(vm), (rows, cols)), shape=shape).tocsr()
    return Kx, Ky, M


def anisotropic_operator(tri: Triangulation, eps: float) -> AnisotropicOperator:
    Kx, Ky, M = assemble_triangulation(tri)
    return AnisotropicOperator(eps, Kx, Ky, M)


def epsilon_norm(u: np.ndarray, op: AnisotropicOperator) -> float:
    """Norm (a_eps(u,u) + |u|_L2^2)^(1/2) of a nodal vector."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != op.M.shape[0]:
        raise ValueError("vector does not conform with the mesh")
    quad = float(u @ (op.Kx @ u)) + float(u @ (op.Ky @ u)) / op.eps ** 2 \
        + float(u @ (op.M @ u))
    return math.sqrt(max(quad, 0.0))


# ---------------------------------------------------------------------------
# squeezed spectra and the graph limit on the matched grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SqueezeSolution:
    operator: AnisotropicOperator
    triangulation: Triangulation
    data: SpectralData


def solve_squeezed_spectrum(domain: RectUnionDomain, eps: float, n: int,
                            h: float) -> SqueezeSolution:
    """First n eigenpairs of (Kx + Ky/eps^2, M) on the fixed domain."""
    tri = triangulate(domain, h)
    op = anisotropic_operator(tri, eps)
    w, v = _solve_pencil(op.stiffness, op.M, n)
    return SqueezeSolution(op, tri, SpectralData(w, v, op.stiffness, op.M))


def matched_graph_mesh(graph: MetricGraph, tri: Triangulation) -> Mesh1D:
    """Graph mesh whose nodes are the triangulation's x-ticks per edge.

    On this mesh the graph matrices equal the 2-D pencil restricted to
    the per-strip y-constant subspace, so the eps -> 0 limit of the 2-D
    eigenvalues is the graph solve itself, with no separate mesh floor.
    """
    xs = np.unique(tri.points[:, 0])
    edge_nodes = {}
    for e in graph.edges:
        a, b = e.interval
        edge_nodes[e.id] = xs[(xs >= a - 1e-12) & (xs <= b + 1e-12)]
    return build_mesh(graph, edge_nodes=edge_nodes)


def solve_graph_limit(graph: MetricGraph, tri: Triangulation, n: int) -> SpectralData:
    mesh = matched_graph_mesh(graph, tri)
    K, M = assemble_graph(mesh)
    w, v = _solve_pencil(K, M, n)
    return SpectralData(w, v, K, M, mesh)


def lift_graph_vector(graph: MetricGraph, mesh: Mesh1D, values: np.ndarray,
                      tri: Triangulation) -> np.ndarray:
    """Extend a graph nodal vector to the triangulation, constant in y."""
    out = np.full(tri.nv, np.nan)
    px, py = tri.points[:, 0], tri.points[:, 1]
    for i, e in enumerate(graph.edges):
        a, b = e.interval
        ylo, yhi = e.y_interval if e.y_interval is not None else (-np.inf, np.inf)
        sel = (px >= a - 1e-12) & (px <= b + 1e-12) & \
              (py >= ylo - 1e-12) & (py <= yhi + 1e-12)
        if not sel.any():
            continue
        vals = values[mesh.global_ids[i]]
        out[sel] = np.interp(px[sel], mesh.nodes[i], vals)
    if np.any(np.isnan(out)):
        # nodes on junction segments outside every strip interior: take the
        # continuity value from any incident edge at that abscissa
        for idx in np.nonzero(np.isnan(out))[0]:
            x = px[idx]
            for i, e in enumerate(graph.edges):
                a, b = e.interval
                if a - 1e-12 <= x <= b + 1e-12:
                    vals = values[mesh.global_ids[i]]
                    out[idx] = float(np.interp(x, mesh.nodes[i], vals))
                    break
        if np.any(np.isnan(out)):
            raise ValueError("mesh node not covered by any strip")
    return out


# ---------------------------------------------------------------------------
# sweeps and alignment
# ---------------------------------------------------------------------------

def eigenvector_alignment(sol: SqueezeSolution, graph: MetricGraph,
                          graph_data: SpectralData, j: int,
                          degeneracy_tol: float = 1e-6,
                          mode: str = "auto") -> float:
    """Distance in the eps-norm from the j-th squeezed eigenvector to the
    lifted limit eigenvector (sign-minimized), or to the lifted limit
    eigenspace when the limit eigenvalue is multiple.
    """
    lam0 = graph_data.eigenvalues
    group = [k for k in range(len(lam0))
             if abs(lam0[k] - lam0[j]) <= degeneracy_tol * max(1.0, abs(lam0[j]))]
    if len(group) > 1 and mode == "strict":
        raise DegenerateEigenvalue(
            f"limit eigenvalue {j} has multiplicity {len(group)}")
    lifts = np.stack([
        lift_graph_vector(graph, graph_data.mesh, graph_data.vectors[:, k],
                          sol.triangulation) for k in group], axis=1)
    w = sol.data.vectors[:, j]
    S = (sol.operator.stiffness + sol.operator.M).tocsr()
    if len(group) == 1:
        d1 = w - lifts[:, 0]
        d2 = w + lifts[:, 0]
        return min(math.sqrt(max(float(d1 @ (S @ d1)), 0.0)),
                   math.sqrt(max(float(d2 @ (S @ d2)), 0.0)))
    # least squares in the eps inner product against the lifted eigenspace
    G = lifts.T @ (S @ lifts)
    rhs = lifts.T @ (S @ w)
    coef = np.linalg.solve(G, rhs)
    d = w - lifts @ coef
    return math.sqrt(max(float(d @ (S @ d)), 0.0))


def convergence_sweep(domain: RectUnionDomain, epss, j_max: int, h: float,
                      with_alignment: bool = True,
                      graph: MetricGraph | None = None):
    """Squeezed eigenvalues against the graph limit for each eps.

    Returns a list of row dicts (epsilon, j, lambda_eps, lambda_0, gap,
    alignment).  The limit column comes from the matched-grid graph
    solve, so gaps shrink monotonically as eps decreases.
    """
    if graph is None:
        graph = build_from_rectangles(domain)
    tri = triangulate(domain, h)
    n = j_max + 1
    graph_data = solve_graph_limit(graph, tri, n)
    rows = []
    for eps in epss:
        op = anisotropic_operator(tri, eps)
        w, v = _solve_pencil(op.stiffness, op.M, n)
        sol = SqueezeSolution(op, tri, SpectralData(w, v, op.stiffness, op.M))
        for j in range(j_max):
            lam_e = float(w[j])
            lam_0 = float(graph_data.eigenvalues[j])
            align = (eigenvector_alignment(sol, graph, graph_data, j)
                     if with_alignment else float("nan"))
            rows.append({
                "epsilon": float(eps),
                "j": j + 1,
                "lambda_eps": lam_e,
                "lambda_0": lam_0,
                "gap": abs(lam_e - lam_0),
                "alignment": align,
            })
    return rows


def upper_bound_beta(domain: RectUnionDomain) -> float:
    """Constant beta with limit eigenvalues bounded by beta^2 nu^2.

    Built from an inscribed rectangle I x J and the bounding box's
    y-extent: beta = (len(J') / len(J))^(1/2) * pi / len(I), minimized
    over the input rectangles as inscribed candidates.
    """
    _, _, y0, y1 = domain.bounding_box()
    gamma_p = y1 - y0
    best = math.inf
    for x0, x1, yy0, yy1 in domain.rectangles:
        delta = x1 - x0
        gamma = yy1 - yy0
        best = min(best, math.sqrt(gamma_p / gamma) * math.pi / delta)
    return best
