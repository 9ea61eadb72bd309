"""Scalar nonlinearities, their Galerkin realization, and the cut-off.

The reaction term f acts on Galerkin coefficient vectors through a
quadrature table: evaluate at the nodes, apply f pointwise, project
back onto the mass-orthonormal basis.  The cut-off operator multiplies
the projected term by a smooth plateau of the L^q norm, making the
composite globally bounded and globally Lipschitz from L^q to L^2; the
interpolation inequality then splits that Lipschitz bound into a large
multiple of the L^2 distance plus an arbitrarily small multiple of the
energy distance.  All constants are probe estimates with a safety
factor: the deliverable verifies inequalities on samples, it does not
certify suprema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from thinlab.errors import QuadratureMismatch

PROBE_SAFETY = 1.25


def _abs_pow(vals: np.ndarray, p: float) -> np.ndarray:
    """|vals|**p, via multiplication chains for small integer p."""
    if p == int(p) and 0 < int(p) <= 8:
        k = int(p)
        v2 = vals * vals
        out = v2 if k % 2 == 0 else np.abs(vals)
        for _ in range(k // 2 - (1 if k % 2 == 0 else 0)):
            out = out * v2
        return out
    return np.abs(vals) ** p


# ---------------------------------------------------------------------------
# scalar reaction terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarNonlinearity:
    """C^1 scalar term with polynomial growth and a dissipative tail."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    antiderivative: Callable[[np.ndarray], np.ndarray]  # F with F(0) = 0
    growth_C: float
    growth_beta: float
    delta0: float

    def verify(self, s_max: float = 1e3, n_grid: int = 4001) -> dict:
        """Growth, dissipativity and antiderivative consistency on a grid."""
        s = np.linspace(-s_max, s_max, n_grid)
        growth_ok = bool(np.all(
            np.abs(self.fprime(s)) <= self.growth_C * (1 + np.abs(s) ** self.growth_beta) + 1e-9))
        tail = np.abs(s) >= 0.5 * s_max
        diss_ok = bool(np.all(self.f(s[tail]) / s[tail] <= -self.delta0 / 2))
        ds = 1e-6 * max(1.0, s_max / 1e3)
        inner = s[1:-1]
        fd = (self.antiderivative(inner + ds) - self.antiderivative(inner - ds)) / (2 * ds)
        scale = 1.0 + np.abs(self.f(inner))
        anti_ok = bool(np.all(np.abs(fd - self.f(inner)) / scale < 1e-6))
        return {"growth": growth_ok, "dissipative": diss_ok,
                "antiderivative": anti_ok,
                "ok": growth_ok and diss_ok and anti_ok}


def linear_decay(rate: float = 1.0) -> ScalarNonlinearity:
    """f(s) = -rate * s."""
    r = float(rate)
    return ScalarNonlinearity(
        "linear", lambda s: -r * s, lambda s: -r * np.ones_like(s),
        lambda s: -0.5 * r * s ** 2,
        growth_C=r, growth_beta=0.0, delta0=r)


def cubic_bistable() -> ScalarNonlinearity:
    """f(s) = s - s^3, the benchmark bistable term."""
    return ScalarNonlinearity(
        "cubic-bistable",
        lambda s: s - s ** 3,
        lambda s: 1.0 - 3.0 * s ** 2,
        lambda s: 0.5 * s ** 2 - 0.25 * s ** 4,
        growth_C=3.0, growth_beta=2.0, delta0=0.5)


def polynomial(coeffs) -> ScalarNonlinearity:
    """f(s) = sum coeffs[k] s^k; needs odd degree, negative leading term."""
    c = np.asarray(coeffs, dtype=float)
    deg = len(c) - 1
    if deg < 1 or deg % 2 == 0 or c[-1] >= 0:
        raise ValueError("need odd degree with negative leading coefficient")
    dc = c[1:] * np.arange(1, len(c))
    ac = np.concatenate([[0.0], c / np.arange(1, len(c) + 1)])

    def f(s):
        return np.polyval(c[::-1], s)

    def fp(s):
        return np.polyval(dc[::-1], s)

    def F(s):
        return np.polyval(ac[::-1], s)

    beta = float(max(deg - 1, 0))
    grid = np.linspace(-1e3, 1e3, 2001)
    C = float(np.max(np.abs(fp(grid)) / (1 + np.abs(grid) ** beta))) * 1.05
    tail = grid[np.abs(grid) >= 500.0]
    delta0 = float(-np.max(f(tail) / tail))
    return ScalarNonlinearity("polynomial", f, fp, F, C, beta, max(delta0, 1e-12))


CATALOG = {"linear": linear_decay, "cubic-bistable": cubic_bistable,
           "polynomial": polynomial}


def from_config(spec) -> ScalarNonlinearity:
    """Catalog lookup: name string or {"name": ..., "params"/"coeffs": ...}."""
    if isinstance(spec, str):
        return CATALOG[spec]()
    name = spec["name"]
    if name == "polynomial":
        return polynomial(spec["coeffs"])
    if name == "linear":
        return linear_decay(spec.get("rate", 1.0))
    return CATALOG[name]()


# ---------------------------------------------------------------------------
# quadrature tables for Galerkin coefficient spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisTable:
    """Quadrature nodes, measure weights and basis values.

    ``weights`` carry the full measure (the section weight p on a graph,
    triangle areas in 2-D), so sum(w * v) integrates a sampled function
    over the domain and (v * w) @ basis recovers mass inner products
    against the basis columns.
    """

    weights: np.ndarray        # (nq,)
    basis: np.ndarray          # (nq, N)
    eigenvalues: np.ndarray    # (N,)

    @property
    def n_modes(self) -> int:
        return self.basis.shape[1]

    def values(self, U: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        if U.shape[-1] != self.n_modes:
            raise QuadratureMismatch(
                f"coefficients have {U.shape[-1]} modes, table has {self.n_modes}")
        return U @ self.basis.T

    def project(self, vals: np.ndarray) -> np.ndarray:
        return (vals * self.weights) @ self.basis

    def lq_norm(self, U: np.ndarray, q: float) -> np.ndarray:
        vals = self.values(U)
        return (_abs_pow(vals, q) @ self.weights) ** (1.0 / q)

    def l2_norm(self, U: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(U, dtype=float), axis=-1)

    def h1_norm(self, U: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return np.sqrt(((1.0 + self.eigenvalues) * U * U).sum(axis=-1))


def compress_table(table: BasisTable, groups: np.ndarray) -> BasisTable:
    """Group quadrature nodes into cells of a coarser rule.

    Each group becomes one node with the summed weight and the
    weight-averaged basis values: the group-mean rule.  Constants are
    integrated exactly; smooth integrands pick up an error of the order
    of the squared group diameter, identically across tables that share
    the grouping.
    """
    groups = np.asarray(groups)
    ids = np.unique(groups)
    w = np.zeros(len(ids))
    B = np.zeros((len(ids), table.n_modes))
    for k, g in enumerate(ids):
        sel = groups == g
        w[k] = table.weights[sel].sum()
        B[k] = (table.weights[sel, None] * table.basis[sel]).sum(axis=0) / w[k]
    return BasisTable(w, B, table.eigenvalues)


def graph_basis_table(spectrum) -> BasisTable:
    """Two-point Gauss table on every cell of a solved graph spectrum."""
    mesh = spectrum.mesh
    if mesh is None:
        raise QuadratureMismatch("spectrum carries no mesh")
    pts, wts, vals = [], [], []
    for i, e in enumerate(mesh.graph.edges):
        x = mesh.nodes[i]
        hc = np.diff(x)
        mid = 0.5 * (x[:-1] + x[1:])
        off = hc / (2.0 * math.sqrt(3.0))
        V = spectrum.vectors[mesh.global_ids[i], :]
        for g in (mid - off, mid + off):
            lam_r = (g - x[:-1]) / hc
            vg = V[:-1, :] * (1 - lam_r)[:, None] + V[1:, :] * lam_r[:, None]
            pts.append(g)
            wts.append(0.5 * hc * e.weight(g))
            vals.append(vg)
    return BasisTable(np.concatenate(wts), np.concatenate(vals),
                      np.asarray(spectrum.eigenvalues, dtype=float))


def triangulation_basis_table(sol) -> BasisTable:
    """Centroid-rule table for a squeezed 2-D solution."""
    tri = sol.triangulation
    V = sol.data.vectors
    t = tri.triangles
    vals = (V[t[:, 0], :] + V[t[:, 1], :] + V[t[:, 2], :]) / 3.0
    return BasisTable(tri.areas(), vals,
                      np.asarray(sol.data.eigenvalues, dtype=float))


def nemitski_apply(U: np.ndarray, table: BasisTable,
                   f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Projection of f(u) onto the basis, for coefficient vectors U."""
    return table.project(f(table.values(U)))


def growth_and_bounds(base: ScalarNonlinearity, table: BasisTable,
                      U: np.ndarray, C_hat: float) -> dict:
    """Check |f(u)|_L2 <= C_hat (1 + |u|_H1^(beta+1)) for the given u."""
    U = np.atleast_2d(U)
    fu = base.f(table.values(U))
    l2 = np.sqrt((fu * fu) @ table.weights)
    h1 = table.h1_norm(U)
    bound = C_hat * (1.0 + h1 ** (base.growth_beta + 1.0))
    return {"lhs": l2, "rhs": bound, "ok": bool(np.all(l2 <= bound))}


def estimate_c_hat(base: ScalarNonlinearity, table: BasisTable,
                   n_probe: int = 200, radius: float = 3.0,
                   seed: int = 0) -> float:
    """Probe estimate of the Nemitski growth constant."""
    probes = probe_coefficients(table, n_probe, radius, seed)
    fu = base.f(table.values(probes))
    l2 = np.sqrt((fu * fu) @ table.weights)
    h1 = table.h1_norm(probes)
    return PROBE_SAFETY * float(np.max(l2 / (1.0 + h1 ** (base.growth_beta + 1.0))))


def probe_coefficients(table: BasisTable, n: int, radius: float,
                       seed: int = 0) -> np.ndarray:
    """Band-limited probe cloud: random decaying coefficients at several
    energy scales, plus the pure ground mode."""
    rng = np.random.default_rng(seed)
    N = table.n_modes
    out = [np.eye(N)[0] * radius / math.sqrt(1.0 + table.eigenvalues[0])]
    decays = (0.5, 1.0, 2.0)
    for i in range(n - 1):
        d = decays[i % len(decays)]
        c = rng.standard_normal(N) / (1.0 + np.arange(N)) ** d
        h1 = math.sqrt(float(((1.0 + table.eigenvalues) * c * c).sum()))
        scale = radius * rng.uniform(0.05, 1.0) / h1
        out.append(c * scale)
    return np.asarray(out)


def gagliardo_constant(q: float, theta: float, table: BasisTable,
                       n_probe: int = 200, seed: int = 1) -> float:
    """Probe maximum of |u|_Lq / (|u|_H1^theta |u|_L2^(1-theta))."""
    if not (1.0 - 2.0 / q < theta < 1.0):
        raise ValueError("theta must lie in (1 - 2/q, 1)")
    probes = probe_coefficients(table, n_probe, radius=1.0, seed=seed)
    lq = table.lq_norm(probes, q)
    h1 = table.h1_norm(probes)
    l2 = table.l2_norm(probes)
    return PROBE_SAFETY * float(np.max(lq / (h1 ** theta * l2 ** (1 - theta))))


# ---------------------------------------------------------------------------
# the cut-off operator
# ---------------------------------------------------------------------------

def _plateau(t: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """C^1 descent from 1 below lo to 0 above hi (cubic step)."""
    s = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def _plateau_d(t: np.ndarray, lo: float, hi: float) -> np.ndarray:
    s = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
    return -6.0 * s * (1.0 - s) / (hi - lo)


@dataclass(frozen=True)
class CutoffOperator:
    """Plateau-modified reaction term with a split Lipschitz bound.

    Below the L^q radius M the operator equals the plain projected term;
    beyond 2M it vanishes.  ``L_formula`` is the interpolation-chain
    constant C1 K (1-theta) rho^(-theta); it is valid everywhere but far
    too large to pair with any computable spectral gap.  ``L`` is the
    operative constant: the amplitude bound sup |f'| over the pointwise
    range reachable from the calibration ball, valid on the region where
    the flow actually lives.  Cut selection and the contraction run on
    (L, l); the chain constants are reported alongside.
    """

    base: ScalarNonlinearity
    q: float
    theta: float
    rho: float
    M: float
    K: float
    C1: float
    L: float
    l: float
    L_formula: float
    amplitude: float = float("inf")   # pointwise range behind L
    ball_radius: float = float("inf")  # energy radius of the calibration ball

    def __post_init__(self):
        if not self.q > 2:
            raise ValueError("q must exceed 2")
        if self.q < 2 * (self.base.growth_beta + 1.0) - 1e-9:
            raise ValueError("q must be at least 2 (beta + 1)")
        if not (1.0 - 2.0 / self.q < self.theta < 1.0):
            raise ValueError("theta must lie in (1 - 2/q, 1)")

    def plateau(self, U: np.ndarray, table: BasisTable) -> np.ndarray:
        t = table.lq_norm(U, self.q) ** self.q
        return _plateau(t, self.M ** self.q, (2.0 * self.M) ** self.q)

    def apply(self, U: np.ndarray, table: BasisTable) -> np.ndarray:
        """g(u) = plateau(|u|_q^q) * projection of f(u)."""
        U = np.asarray(U, dtype=float)
        vals = table.values(U)
        lqq = _abs_pow(vals, self.q) @ table.weights
        h = _plateau(lqq, self.M ** self.q, (2.0 * self.M) ** self.q)
        proj = table.project(self.base.f(vals))
        return proj * h[..., None] if U.ndim > 1 else proj * h

    def derivative_context(self, U: np.ndarray, table: BasisTable) -> dict:
        """Base-state quantities of Dg(u), reusable across directions."""
        U = np.asarray(U, dtype=float)
        vals = table.values(U)
        lqq = _abs_pow(vals, self.q) @ table.weights
        lo, hi = self.M ** self.q, (2.0 * self.M) ** self.q
        return {
            "h": _plateau(lqq, lo, hi),
            "hd": _plateau_d(lqq, lo, hi),
            # weighted |u|^(q-1) sign(u), ready for the dot with values(v)
            "su_w": _abs_pow(vals, self.q - 1.0) * np.sign(vals) * table.weights,
            "fp": self.base.fprime(vals),
            "proj_f": table.project(self.base.f(vals)),
        }

    def derivative_from_context(self, ctx: dict, V: np.ndarray,
                                table: BasisTable) -> np.ndarray:
        valv = table.values(V)
        dlq = self.q * (ctx["su_w"] * valv).sum(axis=-1)
        proj_fp = table.project(ctx["fp"] * valv)
        h, hd = ctx["h"], ctx["hd"]
        if np.asarray(V).ndim > 1:
            return h[..., None] * proj_fp + (hd * dlq)[..., None] * ctx["proj_f"]
        return h * proj_fp + (hd * dlq) * ctx["proj_f"]

    def derivative(self, U: np.ndarray, V: np.ndarray,
                   table: BasisTable) -> np.ndarray:
        """Dg(u) v, batched over leading axes of U/V."""
        return self.derivative_from_context(
            self.derivative_context(U, table), np.asarray(V, dtype=float), table)


def build_cutoff(base: ScalarNonlinearity, table: BasisTable, l: float,
                 ball_radius: float, margin: float = 1.5,
                 amplitude_margin: float = 1.5,
                 q: float | None = None, theta: float | None = None,
                 n_probe: int = 400, seed: int = 7) -> CutoffOperator:
    """Construct the plateau operator for an energy ball of given radius.

    The plateau radius M covers the ball's probed L^q range with a
    margin; K and the interpolation constant C1 are probe maxima with
    the standard safety factor; rho is then fixed by the requirement
    that the energy-distance coefficient not exceed l, giving the chain
    constant L_formula.  The operative L is the amplitude bound
    sup |f'| over [-A, A] with A the probed pointwise range of the ball
    times a margin: within the ball the operator is the plain reaction
    term, so this bound holds deterministically there, with no max
    statistics over random pairs.
    """
    if l <= 0 or ball_radius <= 0:
        raise ValueError("need positive l and ball radius")
    beta = base.growth_beta
    if q is None:
        q = max(2.0 * (beta + 1.0), 4.0)
    if theta is None:
        theta = 1.0 - 1.5 / q

    ball = probe_coefficients(table, n_probe, ball_radius, seed)
    M = margin * float(np.max(table.lq_norm(ball, q)))
    C1 = gagliardo_constant(q, theta, table, n_probe=n_probe, seed=seed + 1)

    # K probes span the ball, the plateau shell and the far field
    mid = probe_coefficients(table, n_probe, 2.0 * ball_radius, seed + 9)
    wide = probe_coefficients(table, n_probe, 4.0 * ball_radius, seed + 2)
    cloud = np.concatenate([ball, mid, wide])
    op0 = CutoffOperator(base, q, theta, 1.0, M, 1.0, C1, 1.0, l, 0.0)
    g_cloud = op0.apply(cloud, table)

    rng = np.random.default_rng(seed + 3)
    i = rng.integers(0, len(cloud), size=4 * n_probe)
    j = rng.integers(0, len(cloud), size=4 * n_probe)
    keep = i != j
    i, j = i[keep], j[keep]
    dg = np.linalg.norm(g_cloud[i] - g_cloud[j], axis=1)
    dq = table.lq_norm(cloud[i] - cloud[j], q)
    K = max(PROBE_SAFETY * float(np.max(dg / np.maximum(dq, 1e-30))), 1e-12)

    rho = (l / (C1 * K * theta)) ** (1.0 / (1.0 - theta))
    L_formula = C1 * K * (1.0 - theta) * rho ** (-theta)

    amp = amplitude_margin * float(np.max(np.abs(table.values(ball))))
    s_grid = np.linspace(-amp, amp, 2001)
    L = max(float(np.max(np.abs(base.fprime(s_grid)))), 1e-12)
    return CutoffOperator(base, q, theta, rho, M, K, C1, L, l, L_formula,
                          amplitude=amp, ball_radius=ball_radius)


def verify_cutoff(op: CutoffOperator, table: BasisTable,
                  ball_radius: float | None = None, n_pairs: int = 1000,
                  seed: int = 40, region: str = "global") -> dict:
    """Sampled verification of the four plateau-operator estimates.

    Fresh probes (seeds disjoint from calibration): global boundedness,
    the split interpolation inequality over several rho, the split
    Lipschitz bound, the derivative split, and agreement with the plain
    term on the ball.  ``region="global"`` checks the Lipschitz/derivative
    splits with the chain constant L_formula over clouds reaching far
    beyond the plateau; ``region="ball"`` checks them with the operative
    L on the calibration ball, where the flow actually runs.
    """
    if ball_radius is None:
        ball_radius = op.ball_radius
    if region == "global":
        L_check = max(op.L_formula, op.L)
        cloud = np.concatenate([
            probe_coefficients(table, n_pairs, ball_radius, seed),
            probe_coefficients(table, n_pairs, 4.0 * ball_radius, seed + 1)])
    elif region == "ball":
        L_check = op.L
        cloud = np.concatenate([
            probe_coefficients(table, n_pairs, ball_radius, seed),
            probe_coefficients(table, n_pairs, 0.3 * ball_radius, seed + 1)])
    else:
        raise ValueError("region must be 'global' or 'ball'")
    rng = np.random.default_rng(seed + 2)

    g_cloud = op.apply(cloud, table)
    gnorm = np.linalg.norm(g_cloud, axis=1)
    inside_2m = table.lq_norm(cloud, op.q) <= 2.0 * op.M
    f_on_shell = np.sqrt(
        (op.base.f(table.values(cloud[inside_2m])) ** 2) @ table.weights)
    bound_ok = bool(np.max(gnorm) <= PROBE_SAFETY * max(np.max(f_on_shell), 1e-30))

    split_ok = True
    for rho in (0.01, 0.1, 1.0, 10.0):
        lq = table.lq_norm(cloud, op.q)
        rhs = op.C1 * op.theta * rho ** (1 - op.theta) * table.h1_norm(cloud) \
            + op.C1 * (1 - op.theta) * rho ** (-op.theta) * table.l2_norm(cloud)
        split_ok = split_ok and bool(np.all(lq <= rhs * (1 + 1e-9)))

    i = rng.integers(0, len(cloud), size=n_pairs)
    j = rng.integers(0, len(cloud), size=n_pairs)
    keep = i != j
    i, j = i[keep], j[keep]
    dg = np.linalg.norm(g_cloud[i] - g_cloud[j], axis=1)
    rhs = L_check * table.l2_norm(cloud[i] - cloud[j]) \
        + op.l * table.h1_norm(cloud[i] - cloud[j])
    lip_rate = float(np.mean(dg <= rhs * (1 + 1e-9)))

    dirs = cloud[j] - cloud[i]
    dgv = op.derivative(cloud[i], dirs, table)
    # forward-difference cross check of the analytic derivative
    step = 1e-6
    fd = (op.apply(cloud[i] + step * dirs, table) - g_cloud[i]) / step
    fd_err = float(np.max(np.linalg.norm(dgv - fd, axis=1)
                          / np.maximum(np.linalg.norm(fd, axis=1), 1e-12)))
    drhs = L_check * table.l2_norm(dirs) + op.l * table.h1_norm(dirs)
    deriv_rate = float(np.mean(np.linalg.norm(dgv, axis=1) <= drhs * (1 + 1e-9)))

    ball = probe_coefficients(table, 100, ball_radius, seed + 3)
    plain = nemitski_apply(ball, table, op.base.f)
    cut = op.apply(ball, table)
    agree = float(np.max(np.linalg.norm(plain - cut, axis=1)))

    return {
        "region": region,
        "L_checked": float(L_check),
        "global_bound": bound_ok,
        "interpolation_split": split_ok,
        "lipschitz_rate": lip_rate,
        "derivative_rate": deriv_rate,
        "derivative_fd_error": fd_err,
        "ball_agreement": agree,
        "ok": bool(bound_ok and split_ok and lip_rate == 1.0
                   and deriv_rate == 1.0 and agree < 1e-12),
    }


# ---------------------------------------------------------------------------
# the energy functional of the limit flow
# ---------------------------------------------------------------------------

def liapunov_V0(U: np.ndarray, table: BasisTable,
                base: ScalarNonlinearity) -> np.ndarray:
    """V0(u) = (1/2) int |grad u|^2 - int F(u), in coefficient space."""
    U = np.asarray(U, dtype=float)
    quad = 0.5 * (table.eigenvalues * U * U).sum(axis=-1)
    pot = table.weights @ np.moveaxis(base.antiderivative(table.values(U)), -1, 0)
    return quad - pot
