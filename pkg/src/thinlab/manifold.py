"""Invariant manifolds by the exponential-weight fixed point.

The chart over the first nu eigenmodes is the time-zero value of the
fixed point of an integral operator on histories over a truncated
half-line: the low block is integrated backward from zero, the high
block forward from the horizon, both against exact exponential kernels
of the piecewise-linear interpolant.  Histories are stored pre-weighted
(z(t) = e^(zeta t) y(t)), which keeps every recurrence contractive and
every stored value order one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from thinlab.errors import (
    ContractionViolated,
    NuMismatch,
    TailTruncationTooCoarse,
)
from thinlab.gaps import SelectedCut
from thinlab.nonlin import BasisTable, CutoffOperator

# default truncation of the history half-line
TAIL_TOL = 1e-12
FIXED_POINT_TOL = 1e-10
MAX_PICARD = 200


# ---------------------------------------------------------------------------
# systems and histories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GalerkinSystem:
    """Diagonal eigen-coordinates of one squeeze level, with the cut."""

    eps: float
    nu: int
    eigenvalues: np.ndarray     # (N,) ascending
    table: BasisTable
    cutoff: CutoffOperator
    zeta: float
    mu: float
    horizon: float
    dt: float

    def __post_init__(self):
        lam = self.eigenvalues
        if not (lam[self.nu - 1] < self.zeta < lam[self.nu]):
            raise NuMismatch(
                f"zeta = {self.zeta:g} not inside (lam_nu, lam_nu+1) = "
                f"({lam[self.nu - 1]:g}, {lam[self.nu]:g}) at eps = {self.eps:g}")
        if not self.zeta < self.mu < lam[self.nu]:
            raise NuMismatch("mu must lie between zeta and lam_nu+1")

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    @property
    def L(self) -> float:
        return self.cutoff.L

    @property
    def l(self) -> float:
        return self.cutoff.l

    @property
    def tgrid(self) -> np.ndarray:
        n = int(math.ceil(self.horizon / self.dt))
        return np.linspace(-self.horizon, 0.0, n + 1)

    def enorm_weights(self) -> np.ndarray:
        return np.sqrt(1.0 + self.eigenvalues)

    def enorm(self, U: np.ndarray) -> np.ndarray:
        """|u|_eps of coefficient rows."""
        U = np.asarray(U, dtype=float)
        return np.sqrt(((1.0 + self.eigenvalues) * U * U).sum(axis=-1))

    def brute_norm(self, U: np.ndarray) -> np.ndarray:
        """The split norm L|u|_L2 + l|u|_eps."""
        U = np.asarray(U, dtype=float)
        return self.L * np.linalg.norm(U, axis=-1) + self.l * self.enorm(U)


def build_system(eps: float, eigenvalues, table: BasisTable,
                 cutoff: CutoffOperator, cut: SelectedCut,
                 n_modes: int | None = None, tail_tol: float = TAIL_TOL,
                 dt: float | None = None) -> GalerkinSystem:
    """Assemble a Galerkin system at one squeeze level from a solved
    spectrum, a plateau operator and a selected cut."""
    lam = np.asarray(eigenvalues, dtype=float)
    nu = cut.nu
    if n_modes is None:
        n_modes = min(len(lam), max(4 * nu, nu + 20))
    if n_modes > len(lam) or table.n_modes < n_modes:
        raise ValueError("not enough computed modes for the requested system")
    lam = lam[:n_modes]
    table = BasisTable(table.weights, table.basis[:, :n_modes], lam)
    # the derivative solve runs at the heavier weight mu, whose tail
    # margin lam_nu+1 - mu is the smaller one
    horizon = math.log(1.0 / tail_tol) / (lam[nu] - cut.mu)
    if dt is None:
        # resolve the slow content of the kernels; the stiff rates are
        # integrated exactly, so 1/lam_N is not the constraint
        dt = min(0.01, 0.05 / cut.mu)
    return GalerkinSystem(eps, nu, lam, table, cutoff, cut.zeta, cut.mu,
                          horizon, dt)


@dataclass(frozen=True)
class HistoryFn:
    """Function on [-T, 0] in eigen-coordinates, stored pre-weighted.

    ``weighted[..., m, :]`` is e^(zeta t_m) y(t_m); leading axes batch
    independent histories.
    """

    tgrid: np.ndarray
    weighted: np.ndarray
    zeta: float

    @property
    def n_steps(self) -> int:
        return len(self.tgrid) - 1

    def value_at_zero(self) -> np.ndarray:
        return self.weighted[..., -1, :]

    def values(self) -> np.ndarray:
        """Unweighted samples y(t); may overflow for long horizons."""
        return self.weighted * np.exp(-self.zeta * self.tgrid)[:, None]

    def norm_l2(self) -> np.ndarray:
        """sup_t e^(zeta t) |y(t)|_L2."""
        return np.linalg.norm(self.weighted, axis=-1).max(axis=-1)

    def norm_split(self, sys: GalerkinSystem) -> np.ndarray:
        """sup_t e^(zeta t) (L |y|_L2 + l |y|_eps)."""
        return sys.brute_norm(self.weighted).max(axis=-1)


def zero_history(sys: GalerkinSystem, batch=(), zeta=None) -> HistoryFn:
    t = sys.tgrid
    z = np.zeros(batch + (len(t), sys.n_modes))
    return HistoryFn(t, z, sys.zeta if zeta is None else zeta)


def linear_history(sys: GalerkinSystem, xi: np.ndarray,
                   zeta: float | None = None) -> HistoryFn:
    """The pure low-block flow e^(-A1 t) E xi as a weighted history."""
    zeta = sys.zeta if zeta is None else zeta
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != sys.nu:
        raise ValueError(f"xi must have {sys.nu} components")
    t = sys.tgrid
    z = np.zeros(xi.shape[:-1] + (len(t), sys.n_modes))
    lam_low = sys.eigenvalues[:sys.nu]
    # e^(zeta t) e^(-lam t) = e^((zeta - lam) t), decaying backward
    z[..., :, :sys.nu] = np.exp((zeta - lam_low)[None, :] * t[:, None]) \
        * xi[..., None, :]
    return HistoryFn(t, z, zeta)


# ---------------------------------------------------------------------------
# exponential kernel cells
# ---------------------------------------------------------------------------

def _cell_weights(a: np.ndarray):
    """E0(a) = (a - 1 + e^-a)/a^2 and E1(a) = (1 - (1+a)e^-a)/a^2,
    series-stabilized for small arguments."""
    a = np.asarray(a, dtype=float)
    small = a < 1e-4
    asafe = np.where(small, 1.0, a)
    ea = np.exp(-asafe)
    E0 = (asafe - 1.0 + ea) / asafe ** 2
    E1 = (1.0 - (1.0 + asafe) * ea) / asafe ** 2
    E0s = 0.5 - a / 6.0 + a * a / 24.0
    E1s = 0.5 - a / 3.0 + a * a / 8.0
    return np.where(small, E0s, E0), np.where(small, E1s, E1)


def apply_K(sys: GalerkinSystem, y: HistoryFn,
            zeta: float | None = None) -> HistoryFn:
    """Variation-of-constants kernel: low block backward from zero, high
    block forward from the truncated horizon."""
    zeta = y.zeta if zeta is None else zeta
    lam = sys.eigenvalues
    nu = sys.nu
    if (lam[nu] - zeta) * sys.horizon < math.log(1.0 / TAIL_TOL) - 1e-9:
        raise TailTruncationTooCoarse(
            f"horizon {sys.horizon:g} too short for weight {zeta:g}")
    t = y.tgrid
    dt = t[1] - t[0]
    z = y.weighted
    nt = len(t)
    out = np.zeros_like(z)

    # high block: rate lam_j - zeta > 0, forward recurrence from -T
    r_hi = lam[nu:] - zeta
    a_hi = r_hi * dt
    decay_hi = np.exp(-a_hi)
    E0h, E1h = _cell_weights(a_hi)
    acc = np.zeros(z.shape[:-2] + (len(r_hi),))
    for m in range(1, nt):
        acc = decay_hi * acc + dt * (E1h * z[..., m - 1, nu:]
                                     + E0h * z[..., m, nu:])
        out[..., m, nu:] = acc

    # low block: rate zeta - lam_j > 0, backward recurrence from 0
    r_lo = zeta - lam[:nu]
    a_lo = r_lo * dt
    decay_lo = np.exp(-a_lo)
    E0l, E1l = _cell_weights(a_lo)
    acc = np.zeros(z.shape[:-2] + (nu,))
    for m in range(nt - 1, 0, -1):
        acc = decay_lo * acc - dt * (E0l * z[..., m - 1, :nu]
                                     + E1l * z[..., m, :nu])
        out[..., m - 1, :nu] = acc
    return HistoryFn(t, out, zeta)


def weighted_nonlinearity(sys: GalerkinSystem, y: HistoryFn,
                          zeta: float | None = None) -> HistoryFn:
    """e^(zeta t) g(y(t)) for a weighted history, overflow-guarded.

    Far back in time the unweighted samples leave the plateau support,
    where the operator vanishes; those rows are masked before the
    exponential rescaling can overflow.
    """
    zeta = y.zeta if zeta is None else zeta
    op = sys.cutoff
    table = sys.table
    t = y.tgrid
    z = y.weighted
    flat = z.reshape(-1, z.shape[-1])
    expo = np.broadcast_to(-zeta * t, z.shape[:-1]).reshape(-1)
    if np.max(expo) > 600.0:
        raise TailTruncationTooCoarse(
            "horizon times weight too large for direct rescaling")
    from thinlab.nonlin import _abs_pow, _plateau
    vals_z = table.values(flat)
    lq_z = (_abs_pow(vals_z, op.q) @ table.weights) ** (1.0 / op.q)
    scale = np.exp(expo)
    alive = lq_z * scale <= 2.0 * op.M * (1.0 + 1e-12)
    G = np.zeros_like(flat)
    if alive.any():
        vals_y = vals_z[alive] * scale[alive, None]
        lqq = _abs_pow(vals_y, op.q) @ table.weights
        h = _plateau(lqq, op.M ** op.q, (2.0 * op.M) ** op.q)
        proj = table.project(op.base.f(vals_y))
        G[alive] = proj * (h / scale[alive])[:, None]
    return HistoryFn(t, G.reshape(z.shape), zeta)


def apply_Xi(sys: GalerkinSystem, xi: np.ndarray, y: HistoryFn,
             zeta: float | None = None) -> HistoryFn:
    """Linear low-block flow from xi plus the kernel of y."""
    lin = linear_history(sys, xi, zeta)
    K = apply_K(sys, y, zeta)
    return HistoryFn(lin.tgrid, lin.weighted + K.weighted, lin.zeta)


def apply_Gamma(sys: GalerkinSystem, xi: np.ndarray,
                y: HistoryFn) -> HistoryFn:
    """The fixed-point operator: Xi(xi, g o y)."""
    return apply_Xi(sys, xi, weighted_nonlinearity(sys, y))


# ---------------------------------------------------------------------------
# the fixed point and its derivative
# ---------------------------------------------------------------------------

@dataclass
class PicardLog:
    iterations: int = 0
    factors: list = field(default_factory=list)
    final_update: float = math.inf
    point_factors: np.ndarray | None = None  # worst factor per batch element


def solve_phi(sys: GalerkinSystem, xi: np.ndarray,
              tol: float = FIXED_POINT_TOL,
              factor_cap: float = 0.6) -> tuple[HistoryFn, PicardLog]:
    """Picard iteration for the history fixed point, batched over xi rows."""
    xi = np.asarray(xi, dtype=float)
    y = linear_history(sys, xi)
    log = PicardLog()
    prev_update = None
    violations = 0
    point_worst = np.zeros(xi.shape[:-1]) if xi.ndim > 1 else np.zeros(())
    for it in range(1, MAX_PICARD + 1):
        y_next = apply_Gamma(sys, xi, y)
        diff = HistoryFn(y.tgrid, y_next.weighted - y.weighted, y.zeta)
        update_vec = diff.norm_split(sys)
        update = float(np.max(update_vec))
        scale = max(1.0, float(np.max(y_next.norm_split(sys))))
        log.iterations = it
        if prev_update is not None:
            # per-point quotients, counted only above the noise floor
            live = (prev_update > 10 * tol * scale) & (update_vec > 0)
            quot = np.where(live, update_vec / np.maximum(prev_update, 1e-300),
                            0.0)
            point_worst = np.maximum(point_worst, quot)
            factor = float(np.max(quot)) if np.any(live) else 0.0
            log.factors.append(factor)
            if factor > factor_cap:
                violations += 1
                if violations >= 3:
                    raise ContractionViolated(
                        f"measured factor {factor:.3f} above {factor_cap} "
                        f"for three consecutive iterations")
            else:
                violations = 0
        prev_update = update_vec
        y = y_next
        if update <= tol * scale:
            log.final_update = update
            log.point_factors = point_worst
            return y, log
    raise ContractionViolated(
        f"no convergence within {MAX_PICARD} iterations "
        f"(last update {float(np.max(prev_update)):.3e})")


def solve_dphi(sys: GalerkinSystem, phi: HistoryFn, xi_dirs: np.ndarray,
               tol: float = FIXED_POINT_TOL) -> HistoryFn:
    """Derivative histories D phi(xi) xi' at weight mu, batched over both
    the chart batch of phi and a trailing direction axis.

    Solves the linear fixed point w = Xi_mu(xi', Dg(phi(.)) w); the base
    history enters only through the Jacobian of the plateau operator
    along it.
    """
    xi_dirs = np.asarray(xi_dirs, dtype=float)   # (..., ndir, nu)
    t = phi.tgrid
    z_phi = phi.weighted                          # (..., nt, N)
    op = sys.cutoff
    expo = np.broadcast_to(-phi.zeta * t, z_phi.shape[:-1]).reshape(-1)
    if np.max(expo) > 600.0:
        raise TailTruncationTooCoarse("weight too heavy for direct rescaling")
    base_flat = z_phi.reshape(-1, sys.n_modes) * np.exp(expo)[:, None]

    ndir = xi_dirs.shape[-2]
    batch = z_phi.shape[:-2]
    nt = len(t)
    ctx = op.derivative_context(base_flat, sys.table)

    def dg_along(zw):
        # v(t) = Dg(y(t)) w(t); stored representations rescale the same
        # way on both sides, so the weighted form needs no exp factors
        flat_w = np.moveaxis(zw, -3, 0).reshape(ndir, -1, sys.n_modes)
        out = np.empty_like(flat_w)
        for d in range(ndir):
            out[d] = op.derivative_from_context(ctx, flat_w[d], sys.table)
        return np.moveaxis(out.reshape((ndir,) + batch + (nt, sys.n_modes)),
                           0, -3)

    lin = linear_history(sys, xi_dirs, zeta=sys.mu)
    w = HistoryFn(t, lin.weighted, sys.mu)
    prev = None
    for it in range(MAX_PICARD):
        v = HistoryFn(t, dg_along(w.weighted), sys.mu)
        w_next = apply_Xi(sys, xi_dirs, v, zeta=sys.mu)
        update = float(np.max(sys.brute_norm(
            w_next.weighted - w.weighted).max(axis=-1)))
        w = w_next
        scale = max(1.0, float(np.max(sys.brute_norm(w.weighted))))
        if update <= tol * scale:
            return w
        if prev is not None and update > 0.9 * prev and update > 10 * tol * scale:
            raise ContractionViolated("derivative iteration stalled")
        prev = update
    raise ContractionViolated("derivative iteration did not converge")


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifoldChart:
    """Chart samples of the invariant manifold over a xi grid."""

    eps: float
    xi: np.ndarray          # (n, nu)
    Lambda: np.ndarray      # (n, N)
    DLambda: np.ndarray     # (n, N, nu)
    v: np.ndarray           # (n, nu)
    Dv: np.ndarray          # (n, nu, nu)
    contraction: float      # worst measured Picard factor
    iterations: int

    def chart_identity_error(self) -> float:
        return float(np.max(np.abs(self.Lambda[:, :self.xi.shape[1]] - self.xi)))


def xi_grid(radius: float, nu: int, points_per_axis: int = 5) -> np.ndarray:
    axes = [np.linspace(-radius, radius, points_per_axis)] * nu
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def chart_interpolator(sys: GalerkinSystem, radius: float,
                       points_per_axis: int = 21, tol: float = FIXED_POINT_TOL):
    """Cubic interpolant xi -> Lambda(xi) over a box grid.

    Lets flow integrators evaluate the chart per step without a fixed
    point solve; the chart is nearly flat, so a modest grid suffices.
    """
    from scipy.interpolate import RegularGridInterpolator
    axes = [np.linspace(-radius, radius, points_per_axis)] * sys.nu
    grid = xi_grid(radius, sys.nu, points_per_axis)
    chart = build_chart(sys, grid, with_derivatives=False, tol=tol)
    values = chart.Lambda.reshape((points_per_axis,) * sys.nu + (sys.n_modes,))
    interp = RegularGridInterpolator(axes, values, method="cubic",
                                     bounds_error=True)

    def Lambda(xi):
        return interp(np.atleast_2d(xi))

    return Lambda


def reduced_field(sys: GalerkinSystem, Lambda: np.ndarray) -> np.ndarray:
    """v(xi) = -diag(lam_1..nu) xi + P1 g(Lambda(xi))."""
    Lambda = np.asarray(Lambda, dtype=float)
    g = sys.cutoff.apply(Lambda, sys.table)
    lam_low = sys.eigenvalues[:sys.nu]
    return -lam_low * Lambda[..., :sys.nu] + g[..., :sys.nu]


def build_chart(sys: GalerkinSystem, xi: np.ndarray,
                batch_size: int = 64, tol: float = FIXED_POINT_TOL,
                with_derivatives: bool = True) -> ManifoldChart:
    """Solve the fixed point and its derivative over a grid of xi."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    n, nu = xi.shape
    N = sys.n_modes
    Lam = np.empty((n, N))
    DLam = np.zeros((n, N, nu))
    Dv = np.zeros((n, nu, nu))
    worst = 0.0
    iters = 0
    eye_dirs = np.eye(nu)
    for s in range(0, n, batch_size):
        sl = slice(s, min(s + batch_size, n))
        phi, log = solve_phi(sys, xi[sl], tol=tol)
        Lam[sl] = phi.value_at_zero()
        if log.point_factors is not None:
            worst = max(worst, float(np.max(log.point_factors)))
        iters = max(iters, log.iterations)
        if with_derivatives:
            dirs = np.broadcast_to(eye_dirs, (sl.stop - sl.start, nu, nu))
            w = solve_dphi(sys, phi, dirs, tol=tol)
            DLam[sl] = np.moveaxis(w.value_at_zero(), -2, -1)
    v = reduced_field(sys, Lam)
    if with_derivatives:
        # Dv = -diag(lam) + P1 Dg(Lambda) DLambda, assembled per point
        lam_low = sys.eigenvalues[:sys.nu]
        for i in range(n):
            dg = sys.cutoff.derivative(
                np.repeat(Lam[i][None, :], nu, axis=0),
                DLam[i].T, sys.table)
            Dv[i] = -np.diag(lam_low) + dg[:, :nu].T
    return ManifoldChart(sys.eps, xi, Lam, DLam, v, Dv, worst, iters)


# ---------------------------------------------------------------------------
# verification helpers
# ---------------------------------------------------------------------------

def decay_bounds_check(sys: GalerkinSystem, n_samples: int = 100,
                       seed: int = 0) -> dict:
    """Sampled semigroup decay inequalities for both blocks."""
    rng = np.random.default_rng(seed)
    lam = sys.eigenvalues
    nu = sys.nu
    wts = np.sqrt(1.0 + lam)
    ok_l2_lo = ok_l2_hi = ok_e_lo = ok_e_hi = True
    c_half = (2.0 * math.e) ** -0.5
    for _ in range(n_samples):
        u = rng.standard_normal(sys.n_modes)
        t_back = -rng.uniform(0.0, 2.0 / max(sys.zeta, 1.0))
        t_fwd = rng.uniform(1e-6, 2.0 / (lam[nu] + 1.0))
        lo, hi = u.copy(), u.copy()
        lo[nu:] = 0.0
        hi[:nu] = 0.0
        # backward low block
        e_lo = np.exp(-lam[:nu] * t_back) * lo[:nu]
        ok_l2_lo &= bool(np.linalg.norm(e_lo)
                         <= math.exp(-lam[nu - 1] * t_back)
                         * np.linalg.norm(lo) + 1e-12)
        ok_e_lo &= bool(np.linalg.norm(wts[:nu] * e_lo)
                        <= math.sqrt(lam[nu - 1] + 1.0)
                        * math.exp(-lam[nu - 1] * t_back)
                        * np.linalg.norm(lo) + 1e-12)
        # forward high block
        e_hi = np.exp(-lam[nu:] * t_fwd) * hi[nu:]
        ok_l2_hi &= bool(np.linalg.norm(e_hi)
                         <= math.exp(-lam[nu] * t_fwd)
                         * np.linalg.norm(hi) + 1e-12)
        ok_e_hi &= bool(np.linalg.norm(wts[nu:] * e_hi)
                        <= (math.sqrt(lam[nu] + 1.0)
                            + c_half * t_fwd ** -0.5)
                        * math.exp(-lam[nu] * t_fwd)
                        * np.linalg.norm(hi) + 1e-12)
    return {"low_l2": ok_l2_lo, "high_l2": ok_l2_hi,
            "low_energy": ok_e_lo, "high_energy": ok_e_hi,
            "ok": bool(ok_l2_lo and ok_l2_hi and ok_e_lo and ok_e_hi)}


def truncation_tail_bound(sys: GalerkinSystem, g_sup: float | None = None) -> float:
    """Bound on the dropped high-tail contribution to the chart.

    Modes beyond the retained window respond to the bounded reaction
    term with amplitude at most sup|g| / (lam - zeta); the first dropped
    rate is at least the last retained one.
    """
    if g_sup is None:
        # plateau operator is bounded by its value on the 2M shell
        probe = probe_radius = 2.0 * sys.cutoff.M
        from thinlab.nonlin import probe_coefficients
        cloud = probe_coefficients(sys.table, 200, probe_radius, seed=1)
        g_sup = float(np.max(np.linalg.norm(
            sys.cutoff.apply(cloud, sys.table), axis=1)))
    return g_sup / (float(sys.eigenvalues[-1]) - sys.zeta)


def random_history(sys: GalerkinSystem, batch: int, seed: int = 0,
                   zeta: float | None = None) -> HistoryFn:
    """Smooth random weighted histories for kernel-bound sampling."""
    rng = np.random.default_rng(seed)
    t = sys.tgrid
    nt = len(t)
    modes = rng.standard_normal((batch, 4, sys.n_modes)) \
        / (1.0 + np.arange(sys.n_modes))
    freqs = rng.uniform(0.2, 3.0, size=(batch, 4))
    phase = rng.uniform(0, 2 * math.pi, size=(batch, 4))
    s = (t - t[0]) / (t[-1] - t[0])
    z = np.einsum("bkn,bkt->btn", modes,
                  np.sin(2 * math.pi * freqs[..., None] * s + phase[..., None]))
    return HistoryFn(t, z, sys.zeta if zeta is None else zeta)


def kernel_bound_report(sys: GalerkinSystem, n_hist: int = 100,
                        seed: int = 3) -> dict:
    """Sampled kernel norm bounds at the working weight."""
    lam = sys.eigenvalues
    nu = sys.nu
    zeta = sys.zeta
    y = random_history(sys, n_hist, seed)
    Ky = apply_K(sys, y)
    c_l2 = 1.0 / (zeta - lam[nu - 1]) + 1.0 / (lam[nu] - zeta)
    lhs_l2 = Ky.norm_l2()
    rhs_l2 = c_l2 * y.norm_l2()
    lhs_split = Ky.norm_split(sys)
    rhs_split = 0.5 * y.norm_l2()
    return {
        "l2_bound_rate": float(np.mean(lhs_l2 <= rhs_l2 * (1 + 1e-9))),
        "split_bound_rate": float(np.mean(lhs_split <= rhs_split * (1 + 1e-9))),
        "l2_margin": float(np.max(lhs_l2 / rhs_l2)),
        "split_margin": float(np.max(lhs_split / rhs_split)),
        "ok": bool(np.all(lhs_l2 <= rhs_l2 * (1 + 1e-9))
                   and np.all(lhs_split <= rhs_split * (1 + 1e-9))),
    }


# ---------------------------------------------------------------------------
# squeeze-family comparison
# ---------------------------------------------------------------------------

def compare_charts(chart_eps: ManifoldChart, chart_lim: ManifoldChart,
                   to_nodal_eps, to_nodal_lim, enorm_eps) -> dict:
    """C1 distance columns between one squeeze chart and the limit chart.

    ``to_nodal_*`` map coefficient rows to a common nodal space and
    ``enorm_eps`` evaluates the squeeze-level energy norm there.
    """
    if chart_eps.xi.shape != chart_lim.xi.shape or \
            not np.allclose(chart_eps.xi, chart_lim.xi):
        raise NuMismatch("charts sampled on different xi grids")
    d_lam = 0.0
    d_dlam = 0.0
    for i in range(chart_eps.xi.shape[0]):
        diff = to_nodal_eps(chart_eps.Lambda[i]) - to_nodal_lim(chart_lim.Lambda[i])
        d_lam = max(d_lam, enorm_eps(diff))
        acc = 0.0
        for j in range(chart_eps.xi.shape[1]):
            ddiff = to_nodal_eps(chart_eps.DLambda[i, :, j]) \
                - to_nodal_lim(chart_lim.DLambda[i, :, j])
            acc += enorm_eps(ddiff)
        d_dlam = max(d_dlam, acc)
    d_v = float(np.max(np.linalg.norm(chart_eps.v - chart_lim.v, axis=1)))
    d_dv = float(np.max(np.linalg.norm(
        chart_eps.Dv - chart_lim.Dv, axis=(1, 2))))
    return {"dLambda_max": float(d_lam), "dDLambda_max": float(d_dlam),
            "dv_max": d_v, "dDv_max": d_dv}


# ---------------------------------------------------------------------------
# the positively invariant neighborhood
# ---------------------------------------------------------------------------

def invariant_neighborhood(sys0: GalerkinSystem, chart0: ManifoldChart,
                           base, M0: float, eps_charts=(),
                           band: float = 0.25) -> dict:
    """Sublevel set of the energy along the limit chart, with the
    outward-flux sign checked on the discrete level band.

    ``base`` is the scalar nonlinearity of the energy functional.  The
    flux of every provided squeeze-level chart must be negative at the
    band points; offenders raise FluxSignViolation.
    """
    from thinlab.errors import FluxSignViolation
    from thinlab.nonlin import liapunov_V0

    W = liapunov_V0(chart0.Lambda, sys0.table, base)
    inside = W < M0
    spread = float(np.max(W) - np.min(W))
    half_width = band * max(spread, 1e-12)
    on_band = np.abs(W - M0) <= half_width
    report = {"W": W, "inside": inside, "band": on_band, "M0": float(M0),
              "flux": {}}
    # gradient of W along the chart: <A0 u - g(u), dLambda_j u> in L2
    lam = sys0.eigenvalues
    g0 = sys0.cutoff.apply(chart0.Lambda, sys0.table)
    gradW = np.einsum("in,inj->ij",
                      lam * chart0.Lambda - g0, chart0.DLambda)
    for chart in (chart0,) + tuple(eps_charts):
        flux = (gradW * chart.v).sum(axis=1)
        report["flux"][chart.eps] = flux
        bad = np.nonzero(on_band & (flux >= 0.0))[0]
        if len(bad):
            raise FluxSignViolation(
                f"eps = {chart.eps:g}: nonnegative outward flux at xi = "
                f"{chart0.xi[bad[:5]].tolist()}")
    return report
