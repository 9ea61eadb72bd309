"""Time integration and attractor sampling in eigen-coordinates.

One integrator everywhere: exponential Euler, which is exact on the
diagonal linear part and first-order in the reaction term.  Attractors
are sampled from seeded band-limited ensembles after a transient, and
squeeze families are compared through the one-sided Hausdorff
semidistance in the squeeze-level energy norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from thinlab.errors import BlowUp, EmptySample
from thinlab.manifold import GalerkinSystem
from thinlab.nonlin import probe_coefficients

BLOWUP_NORM = 1e9


@dataclass(frozen=True)
class TrajectorySet:
    """Coefficient snapshots of a batch of trajectories."""

    eps: float
    times: np.ndarray        # (nt,)
    states: np.ndarray       # (nt, batch, N)
    scheme: str
    dt: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class AttractorSample:
    """Post-transient snapshots harvested from an ensemble."""

    eps: float
    points: np.ndarray       # (m, N)
    transient: float
    window: float

    def __len__(self) -> int:
        return self.points.shape[0]


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z with the removable singularity filled."""
    small = np.abs(z) < 1e-8
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2.0, np.expm1(zs) / zs)


def integrate(sys: GalerkinSystem, u0: np.ndarray, T: float, dt: float,
              which: str = "g", store_every: int = 1,
              t0: float = 0.0) -> TrajectorySet:
    """Exponential Euler for du/dt + diag(lam) u = G(u).

    ``which`` selects the plateau-modified term ("g") or the plain
    reaction term ("f").  States exceeding the blow-up norm abort;
    the plain term outside its dissipative basin can genuinely escape.
    """
    lam = sys.eigenvalues
    u = np.atleast_2d(np.asarray(u0, dtype=float)).copy()
    n_steps = max(1, int(round(T / dt)))
    decay = np.exp(-lam * dt)
    wt = dt * _phi1(-lam * dt)
    if which == "g":
        def G(state):
            return sys.cutoff.apply(state, sys.table)
    elif which == "f":
        def G(state):
            return sys.table.project(sys.cutoff.base.f(sys.table.values(state)))
    else:
        raise ValueError("which must be 'g' or 'f'")
    times = [t0]
    states = [u.copy()]
    for k in range(1, n_steps + 1):
        u = decay * u + wt * G(u)
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_NORM:
            raise BlowUp(f"norm escaped at t = {t0 + k * dt:g}")
        if k % store_every == 0 or k == n_steps:
            times.append(t0 + k * dt)
            states.append(u.copy())
    return TrajectorySet(sys.eps, np.asarray(times), np.stack(states),
                         "exponential-euler", dt)


def flow(sys: GalerkinSystem, u0: np.ndarray, T: float, dt: float,
         which: str = "g") -> np.ndarray:
    """Endpoint of integrate, without storing the path."""
    lam = sys.eigenvalues
    u = np.atleast_2d(np.asarray(u0, dtype=float)).copy()
    n_steps = max(1, int(round(T / dt)))
    decay = np.exp(-lam * dt)
    wt = dt * _phi1(-lam * dt)
    if which == "g":
        G = lambda state: sys.cutoff.apply(state, sys.table)
    else:
        G = lambda state: sys.table.project(
            sys.cutoff.base.f(sys.table.values(state)))
    for _ in range(n_steps):
        u = decay * u + wt * G(u)
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_NORM:
            raise BlowUp("norm escaped during flow")
    return u


def band_limited_ensemble(sys: GalerkinSystem, count: int, radius: float,
                          seed: int) -> np.ndarray:
    """Seeded random initial conditions inside the absorbing ball."""
    return probe_coefficients(sys.table, count, radius, seed)


def sample_attractor(sys: GalerkinSystem, ensemble: np.ndarray,
                     transient: float = 20.0, window: float = 10.0,
                     stride: int = 50, dt: float = 1e-3,
                     which: str = "g") -> AttractorSample:
    """Snapshots on [transient, transient + window] at the given stride."""
    u = flow(sys, ensemble, transient, dt, which)
    traj = integrate(sys, u, window, dt, which, store_every=stride)
    pts = traj.states.reshape(-1, traj.states.shape[-1])
    return AttractorSample(sys.eps, pts, transient, window)


def near_invariance_defect(sys: GalerkinSystem, sample: AttractorSample,
                           t_ahead: float = 1.0, dt: float = 1e-3) -> float:
    """Worst distance from the flowed sample back to the sample cloud."""
    if len(sample) == 0:
        raise EmptySample("no attractor points")
    moved = flow(sys, sample.points, t_ahead, dt)
    d2 = ((moved[:, None, :] - sample.points[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min(axis=1)).max())


def semidistance(A: AttractorSample, B: AttractorSample,
                 metric) -> float:
    """sup over a in A of inf over b in B of metric(a - b).

    ``metric`` maps a difference in a common representation to a scalar;
    the caller is responsible for mapping both samples into that common
    representation beforehand.
    """
    if len(A) == 0 or len(B) == 0:
        raise EmptySample("semidistance of an empty sample")
    worst = 0.0
    for a in A.points:
        best = math.inf
        for b in B.points:
            best = min(best, metric(a - b))
            if best == 0.0:
                break
        worst = max(worst, best)
    return worst


def semidistance_l2(A: AttractorSample, B: AttractorSample) -> float:
    """Coefficient-space semidistance when both samples share a basis."""
    if len(A) == 0 or len(B) == 0:
        raise EmptySample("semidistance of an empty sample")
    d2 = ((A.points[:, None, :] - B.points[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min(axis=1)).max())


def linear_flow_endpoint(sys: GalerkinSystem, u0: np.ndarray,
                         t: float) -> np.ndarray:
    """Exact diagonal semigroup at time t (the reaction term off)."""
    return np.asarray(u0, dtype=float) * np.exp(-sys.eigenvalues * t)
