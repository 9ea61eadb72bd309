"""Weighted Sturm-Liouville eigenproblems on interval edges and graphs.

Each edge carries the form pair (int p u'v', int p u v); the coupled
graph problem identifies endpoint degrees of freedom across junction
groups, which imposes continuity and leaves the flux balance as the
natural condition of the variational form.  P1 elements, two-point
Gauss quadrature, geometric grading toward endpoints where the weight
vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from thinlab.errors import (
    EigensolverFailure,
    HypothesisViolation,
    SingularWeight,
)
from thinlab.geometry import EdgeSpec, MetricGraph, WeightFn

# Dense generalized solves up to this many degrees of freedom, then
# shift-invert Lanczos.
DENSE_CUTOFF = 4000

# Cells per unit length when the caller gives no mesh size.
DEFAULT_H = 1.0 / 256

# Geometric grading ratio toward a vanishing-weight endpoint.
GRADING_RATIO = 1.15
GRADING_DEPTH = 50


def eigenvalue_tolerance(lam: float, h: float) -> float:
    """Equality tolerance for P1 eigenvalues: max(1e-8, 5 h^2 lam)."""
    return max(1e-8, 5.0 * h * h * abs(lam))


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mesh1D:
    """Per-edge node arrays plus the shared global numbering.

    Endpoint nodes of edges meeting in a junction group share a global
    index; that identification is exactly the continuity constraint of
    the coupled form domain.
    """

    graph: MetricGraph
    nodes: tuple[np.ndarray, ...]       # per edge, strictly increasing
    global_ids: tuple[np.ndarray, ...]  # per edge, len(nodes[k])
    ndof: int

    @property
    def h_max(self) -> float:
        return max(float(np.max(np.diff(x))) for x in self.nodes)

    def edge_index(self, edge_id: int) -> int:
        for i, e in enumerate(self.graph.edges):
            if e.id == edge_id:
                return i
        raise KeyError(edge_id)


def _edge_nodes(edge: EdgeSpec, h: float) -> np.ndarray:
    """Node coordinates for one edge, graded where the weight vanishes."""
    a, b = edge.interval
    kind = edge.case.kind
    if kind not in ("vanishing-left", "vanishing-right"):
        n = max(2, int(math.ceil((b - a) / h)))
        return np.linspace(a, b, n + 1)
    # geometric cells growing away from the singular endpoint, capped at h
    h_min = h * GRADING_RATIO ** (-GRADING_DEPTH)
    sizes = []
    pos = 0.0
    s = h_min
    while pos < (b - a) - 1e-14:
        s = min(s, (b - a) - pos)
        sizes.append(s)
        pos += s
        s = min(s * GRADING_RATIO, h)
    cuts = np.concatenate([[0.0], np.cumsum(sizes)])
    cuts[-1] = b - a
    if kind == "vanishing-left":
        return a + cuts
    return b - cuts[::-1]


def build_mesh(graph: MetricGraph, h: float = DEFAULT_H,
               edge_nodes: dict[int, np.ndarray] | None = None) -> Mesh1D:
    """Mesh every edge and identify endpoint DOFs across joins."""
    nodes = []
    for e in graph.edges:
        if edge_nodes and e.id in edge_nodes:
            xs = np.asarray(edge_nodes[e.id], dtype=float)
            if xs.ndim != 1 or len(xs) < 2 or np.any(np.diff(xs) <= 0):
                raise ValueError(f"edge {e.id}: invalid node array")
        else:
            xs = _edge_nodes(e, h)
        nodes.append(xs)

    offsets = np.concatenate([[0], np.cumsum([len(x) for x in nodes])])
    parent = list(range(int(offsets[-1])))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    index = {e.id: i for i, e in enumerate(graph.edges)}
    for g in graph.joins:
        raws = [offsets[index[k]] + len(nodes[index[k]]) - 1 for k in g.sigma_plus]
        raws += [offsets[index[k]] for k in g.sigma_minus]
        for r in raws[1:]:
            parent[find(int(r))] = find(int(raws[0]))

    relabel: dict[int, int] = {}
    global_ids = []
    for i, xs in enumerate(nodes):
        ids = np.empty(len(xs), dtype=int)
        for j in range(len(xs)):
            root = find(int(offsets[i]) + j)
            if root not in relabel:
                relabel[root] = len(relabel)
            ids[j] = relabel[root]
        global_ids.append(ids)
    return Mesh1D(graph, tuple(nodes), tuple(global_ids), len(relabel))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def assemble_edge(edge: EdgeSpec, nodes: np.ndarray):
    """Local P1 matrices (stiffness, mass) for int p u'v' and int p u v."""
    x = np.asarray(nodes, dtype=float)
    hc = np.diff(x)
    mid = 0.5 * (x[:-1] + x[1:])
    off = hc / (2.0 * math.sqrt(3.0))
    g1, g2 = mid - off, mid + off
    p1, p2 = edge.weight(g1), edge.weight(g2)
    if np.any(p1 <= 0) or np.any(p2 <= 0):
        raise SingularWeight(f"edge {edge.id}: weight non-positive at quadrature point")

    n = len(x)
    # stiffness: gradients are +-1/hc, so the cell integral is mean(p)/hc
    kcoef = 0.5 * (p1 + p2) / hc
    # mass: phi_L(g) = (x_R - g)/hc, phi_R(g) = (g - x_L)/hc, weights hc/2
    lL1, lR1 = (x[1:] - g1) / hc, (g1 - x[:-1]) / hc
    lL2, lR2 = (x[1:] - g2) / hc, (g2 - x[:-1]) / hc
    w = 0.5 * hc
    mLL = w * (p1 * lL1 * lL1 + p2 * lL2 * lL2)
    mLR = w * (p1 * lL1 * lR1 + p2 * lL2 * lR2)
    mRR = w * (p1 * lR1 * lR1 + p2 * lR2 * lR2)

    iL = np.arange(n - 1)
    iR = iL + 1
    rows = np.concatenate([iL, iL, iR, iR])
    cols = np.concatenate([iL, iR, iL, iR])
    kv = np.concatenate([kcoef, -kcoef, -kcoef, kcoef])
    mv = np.concatenate([mLL, mLR, mLR, mRR])
    K = sp.coo_matrix((kv, (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((mv, (rows, cols)), shape=(n, n)).tocsr()
    return K, M


def assemble_graph(mesh: Mesh1D):
    """Global (stiffness, mass) with join DOFs identified."""
    rows, cols, kv, mv = [], [], [], []
    for i, e in enumerate(mesh.graph.edges):
        Ke, Me = assemble_edge(e, mesh.nodes[i])
        ids = mesh.global_ids[i]
        Ke = Ke.tocoo()
        rows.append(ids[Ke.row]); cols.append(ids[Ke.col]); kv.append(Ke.data)
        Me = Me.tocoo()
        mv.append(Me.data)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    K = sp.coo_matrix((np.concatenate(kv), (rows, cols)),
                      shape=(mesh.ndof, mesh.ndof)).tocsr()
    M = sp.coo_matrix((np.concatenate(mv), (rows, cols)),
                      shape=(mesh.ndof, mesh.ndof)).tocsr()
    return K, M


# ---------------------------------------------------------------------------
# spectral data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues with mass-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray          # ndof x n, columns M-orthonormal
    stiffness: sp.spmatrix
    mass: sp.spmatrix
    mesh: Mesh1D | None = None
    origin: tuple | None = None  # (edge_id, local index) per value, direct sums

    def __post_init__(self):
        lam = self.eigenvalues
        if len(lam) > 1 and np.any(np.diff(lam) < -1e-9 * max(1.0, abs(lam[-1]))):
            raise EigensolverFailure("eigenvalues not sorted")

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def counting(self, tau: float) -> int:
        """Number of eigenvalues strictly below tau."""
        return int(np.searchsorted(self.eigenvalues, tau, side="left"))

    def validate(self, rtol: float = 1e-8) -> None:
        V, K, M = self.vectors, self.stiffness, self.mass
        if V.size == 0:
            return
        G = V.T @ (M @ V)
        if np.max(np.abs(G - np.eye(V.shape[1]))) > rtol:
            raise EigensolverFailure("eigenvectors not mass-orthonormal")
        knorm = spla.norm(K) if sp.issparse(K) else np.linalg.norm(K)
        R = K @ V - (M @ V) * self.eigenvalues[None, :]
        worst = np.max(np.linalg.norm(R, axis=0))
        if worst > rtol * max(knorm, 1.0):
            raise EigensolverFailure(f"eigen residual {worst:.3e} too large")

    def edge_values(self, j: int) -> dict[int, np.ndarray]:
        """Eigenvector j restricted to each edge's node array."""
        if self.mesh is None:
            raise ValueError("no mesh attached")
        out = {}
        for i, e in enumerate(self.mesh.graph.edges):
            out[e.id] = self.vectors[self.mesh.global_ids[i], j]
        return out


def _solve_pencil(K, M, n: int) -> tuple[np.ndarray, np.ndarray]:
    ndof = K.shape[0]
    n = min(n, ndof)
    try:
        if ndof <= DENSE_CUTOFF:
            Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
            Md = M.toarray() if sp.issparse(M) else np.asarray(M)
            # equilibrate: graded meshes leave the mass diagonal spanning
            # many orders of magnitude, which costs the zero mode accuracy
            d = 1.0 / np.sqrt(np.diag(Md))
            w, v = sla.eigh(Kd * d[:, None] * d[None, :],
                            Md * d[:, None] * d[None, :],
                            subset_by_index=(0, n - 1))
            v = v * d[:, None]
        else:
            w, v = spla.eigsh(K.tocsc(), k=n, M=M.tocsc(), sigma=-1.0)
            order = np.argsort(w)
            w, v = w[order], v[:, order]
    except (sla.LinAlgError, RuntimeError, ValueError) as exc:
        raise EigensolverFailure(str(exc)) from exc
    # tighten mass-orthonormality (iterative solvers leave ~1e-10 slack)
    G = v.T @ (M @ v)
    C = sla.cholesky(G, lower=False)
    v = v @ sla.inv(C)
    return w, v


def solve_edge_spectrum(edge: EdgeSpec, n: int, h: float = DEFAULT_H) -> SpectralData:
    """First n eigenpairs of one edge with natural boundary behaviour."""
    if n < 1:
        raise ValueError("need n >= 1")
    graph = MetricGraph((edge,), ())
    mesh = build_mesh(graph, h)
    K, M = assemble_graph(mesh)
    w, v = _solve_pencil(K, M, n)
    return SpectralData(w, v, K, M, mesh)


def solve_graph_spectrum(graph: MetricGraph, n: int, h: float = DEFAULT_H,
                         edge_nodes: dict[int, np.ndarray] | None = None
                         ) -> SpectralData:
    """First n eigenpairs of the coupled pair with join continuity."""
    if n < 1:
        raise ValueError("need n >= 1")
    mesh = build_mesh(graph, h, edge_nodes=edge_nodes)
    K, M = assemble_graph(mesh)
    w, v = _solve_pencil(K, M, n)
    return SpectralData(w, v, K, M, mesh)


def direct_sum_spectrum(graph: MetricGraph, n: int, h: float = DEFAULT_H
                        ) -> SpectralData:
    """Merged per-edge spectra with no coupling.

    The counting function of the merged list is the sum of the per-edge
    counting functions for every threshold.
    """
    solves = {e.id: solve_edge_spectrum(e, n, h) for e in graph.edges}
    merged = []
    for e in graph.edges:
        for j, lam in enumerate(solves[e.id].eigenvalues):
            merged.append((float(lam), e.id, j))
    merged.sort()
    kept = merged[:n]
    lam = np.array([t[0] for t in kept])
    origin = tuple((t[1], t[2]) for t in kept)

    sizes = {eid: sd.vectors.shape[0] for eid, sd in solves.items()}
    offs = {}
    total = 0
    for e in graph.edges:
        offs[e.id] = total
        total += sizes[e.id]
    V = np.zeros((total, len(kept)))
    for col, (_, eid, j) in enumerate(kept):
        V[offs[eid]:offs[eid] + sizes[eid], col] = solves[eid].vectors[:, j]
    K = sp.block_diag([solves[e.id].stiffness for e in graph.edges]).tocsr()
    M = sp.block_diag([solves[e.id].mass for e in graph.edges]).tocsr()
    return SpectralData(lam, V, K, M, mesh=None, origin=origin)


# ---------------------------------------------------------------------------
# flux diagnostics at the joins
# ---------------------------------------------------------------------------

def kirchhoff_fluxes(spectrum: SpectralData, mode: int) -> dict[float, dict]:
    """Per-join weighted fluxes of one eigenvector, recovered weakly.

    The flux of edge k at its endpoint c is the variational residual of
    the edge form against the endpoint hat function; summing the signed
    fluxes over a join measures how well the discrete mode balances.
    One-sided cell-derivative fluxes are reported alongside.
    """
    mesh = spectrum.mesh
    if mesh is None:
        raise ValueError("flux recovery needs a meshed spectrum")
    lam = float(spectrum.eigenvalues[mode])
    out = {}
    for g in mesh.graph.joins:
        fluxes, cell_fluxes = {}, {}
        for sign, members in (("+", g.sigma_plus), ("-", g.sigma_minus)):
            for eid in members:
                i = mesh.edge_index(eid)
                e = mesh.graph.edges[i]
                xs = mesh.nodes[i]
                vals = spectrum.vectors[mesh.global_ids[i], mode]
                Ke, Me = assemble_edge(e, xs)
                r = (Ke @ vals) - lam * (Me @ vals)
                if sign == "+":
                    # weak boundary term at b_k is +p u'(b_k)
                    fluxes[eid] = float(r[-1])
                    hc = xs[-1] - xs[-2]
                    pq = float(e.weight(xs[-1] - hc / (2 * math.sqrt(3.0))))
                    cell_fluxes[eid] = pq * float(vals[-1] - vals[-2]) / hc
                else:
                    fluxes[eid] = float(-r[0])
                    hc = xs[1] - xs[0]
                    pq = float(e.weight(xs[0] + hc / (2 * math.sqrt(3.0))))
                    cell_fluxes[eid] = pq * float(vals[1] - vals[0]) / hc
        balance = sum(fluxes[k] for k in g.sigma_plus) - \
            sum(fluxes[k] for k in g.sigma_minus)
        cell_balance = sum(cell_fluxes[k] for k in g.sigma_plus) - \
            sum(cell_fluxes[k] for k in g.sigma_minus)
        out[g.coordinate] = {
            "fluxes": fluxes,
            "residual": abs(balance),
            "cell_fluxes": cell_fluxes,
            "cell_residual": abs(cell_balance),
        }
    return out


def kirchhoff_residual(spectrum: SpectralData, mode: int) -> float:
    """Worst weak flux-balance residual of one mode over all joins."""
    rep = kirchhoff_fluxes(spectrum, mode)
    return max((d["residual"] for d in rep.values()), default=0.0)


# ---------------------------------------------------------------------------
# the weighted-to-Dirichlet comparison
# ---------------------------------------------------------------------------

def _check_majorant_hypotheses(q: WeightFn, grid_points: int = 2000) -> None:
    lo, hi = q.interval
    if q.kind == "closed-form" and q.form == "constant":
        return  # degenerate comparison, zero potential
    xs = np.linspace(lo, hi, grid_points + 2)[1:]
    vals = q(xs)
    if abs(float(q(np.array(lo)))) > 1e-12:
        raise HypothesisViolation("q(0) must vanish")
    if np.any(vals <= 0):
        raise HypothesisViolation("q must be positive on the open interval")
    if np.any(q.d1(xs) < -1e-12) or np.any(q.d2(xs) > 1e-12):
        raise HypothesisViolation("q must be nondecreasing and concave")
    from thinlab.errors import QuadratureFailure
    try:
        q.verify_integrable()
    except QuadratureFailure as exc:
        raise HypothesisViolation(f"1/q not integrable: {exc}") from exc


def schrodinger_potential(q: WeightFn, x) -> np.ndarray:
    """Potential (3/4)(q'/q)^2 - (1/2) q''/q of the substituted problem."""
    x = np.asarray(x, dtype=float)
    qd1, qd2, qv = q.d1(x), q.d2(x), q(x)
    return 0.75 * (qd1 / qv) ** 2 - 0.5 * qd2 / qv


def schrodinger_oracle(q: WeightFn, n: int, h: float = 1.0 / 8192,
                       rtol: float = 1e-3):
    """Compare the weighted spectrum against the Dirichlet comparison chain.

    Solves the q-weighted problem, substitutes w = q^(1/2) u' to obtain
    a Dirichlet problem -w'' + Q w = mu w on the same interval, and
    checks the eigenvalue chain lam^q_v >= mu_{v-1} >= pi^2 (v-1)^2 for
    2 <= v <= n, each comparison within the relative tolerance.
    """
    lo, hi = q.interval
    if not (abs(lo) < 1e-12 and abs(hi - 1.0) < 1e-12):
        raise HypothesisViolation("comparison normalized to the unit interval")
    _check_majorant_hypotheses(q)

    from thinlab.geometry import ConditionCase
    weighted_case = "bounded" if q.form == "constant" else "vanishing-left"
    edge = EdgeSpec(0, (0.0, 1.0), q,
                    case=ConditionCase(weighted_case, 1.0, 1.0))
    q_spec = solve_edge_spectrum(edge, n, h)

    x = _edge_nodes(edge, h)
    hc = np.diff(x)
    mid = 0.5 * (x[:-1] + x[1:])
    off = hc / (2.0 * math.sqrt(3.0))
    g1, g2 = mid - off, mid + off
    if q.form == "constant":
        Q1, Q2 = np.zeros_like(g1), np.zeros_like(g2)
    else:
        Q1, Q2 = schrodinger_potential(q, g1), schrodinger_potential(q, g2)
    if np.any(Q1 < -1e-9) or np.any(Q2 < -1e-9):
        raise HypothesisViolation("comparison potential must be nonnegative")

    nn = len(x)
    kcoef = 1.0 / hc
    lL1, lR1 = (x[1:] - g1) / hc, (g1 - x[:-1]) / hc
    lL2, lR2 = (x[1:] - g2) / hc, (g2 - x[:-1]) / hc
    w = 0.5 * hc
    aLL = kcoef + w * (Q1 * lL1 * lL1 + Q2 * lL2 * lL2)
    aLR = -kcoef + w * (Q1 * lL1 * lR1 + Q2 * lL2 * lR2)
    aRR = kcoef + w * (Q1 * lR1 * lR1 + Q2 * lR2 * lR2)
    mLL = w * (lL1 * lL1 + lL2 * lL2)
    mLR = w * (lL1 * lR1 + lL2 * lR2)
    mRR = w * (lR1 * lR1 + lR2 * lR2)
    iL = np.arange(nn - 1)
    rows = np.concatenate([iL, iL, iL + 1, iL + 1])
    cols = np.concatenate([iL, iL + 1, iL, iL + 1])
    A = sp.coo_matrix((np.concatenate([aLL, aLR, aLR, aRR]), (rows, cols)),
                      shape=(nn, nn)).tocsr()
    B = sp.coo_matrix((np.concatenate([mLL, mLR, mLR, mRR]), (rows, cols)),
                      shape=(nn, nn)).tocsr()
    keep = np.arange(1, nn - 1)  # Dirichlet ends
    A = A[np.ix_(keep, keep)]
    B = B[np.ix_(keep, keep)]
    mu, _ = _solve_pencil(A, B, max(n, 2))

    checks = []
    ok = True
    for v in range(2, n + 1):
        lam_v = float(q_spec.eigenvalues[v - 1])
        mu_v = float(mu[v - 2])
        ref = math.pi ** 2 * (v - 1) ** 2
        c1 = lam_v >= mu_v * (1.0 - rtol)
        c2 = mu_v >= ref * (1.0 - rtol)
        ok = ok and c1 and c2
        checks.append({"nu": v, "lam_q": lam_v, "mu_Q": mu_v,
                       "pi2": ref, "chain_ok": bool(c1 and c2)})
    verdict = {"pass": bool(ok), "checks": checks}
    return q_spec.eigenvalues, mu, verdict


def edge_lower_bound(edge: EdgeSpec) -> float:
    """Quadratic growth constant gamma with lam_v >= gamma (v-1)^2.

    Renormalizing the edge to unit length scales eigenvalues by the
    squared inverse length, hence gamma = (alpha/beta) pi^2 / len^2.
    """
    if not edge.case.classified:
        raise ValueError(f"edge {edge.id} not classified; run classify_condition_C")
    alpha, beta = edge.case.alpha, edge.case.beta
    ell = edge.length
    return (alpha / beta) * math.pi ** 2 / ell ** 2
