"""Spectral gap diagnostics and selection of the Galerkin cut level.

The low-dimensional reduction needs a level nu where the relative gap
(lam_{nu+1} - lam_nu) / sqrt(lam_nu) stays bounded away from zero and
where two smallness conditions tie the gap to the Lipschitz split
constants (L, l) of the modified nonlinearity.  Only finitely many
eigenvalues are ever available, so the asymptotic statement is reported
as a tail-window maximum plus a trend slope, never asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from thinlab.errors import NoAdmissibleNu

# sup over s > 0 of s^(1/2) exp(-s), the parabolic smoothing constant
C_HALF = (2.0 * math.e) ** -0.5
# its integrated companion, from int_0^inf s^(-1/2) exp(-a s) ds = sqrt(pi/a)
C_HALF_PRIME = math.sqrt(math.pi) * C_HALF


def _eigenvalues(spectrum) -> np.ndarray:
    lam = getattr(spectrum, "eigenvalues", spectrum)
    return np.asarray(lam, dtype=float)


@dataclass(frozen=True)
class GapReport:
    """Relative gap ladder of a computed spectrum."""

    nus: np.ndarray          # 1-based indices with lam_nu > 0
    ratios: np.ndarray       # (lam_{nu+1} - lam_nu) / sqrt(lam_nu)
    tail_max: float          # running max over the tail window
    tail_start: int          # first nu of the tail window
    trend_slope: float       # least-squares slope of the tail ratios
    candidates: np.ndarray   # nus with positive gap, largest ratio first
    c1_estimate: float       # sqrt(lam)/gap along the best tail candidates

    def ratio_at(self, nu: int) -> float:
        idx = np.nonzero(self.nus == nu)[0]
        if len(idx) == 0:
            raise KeyError(nu)
        return float(self.ratios[idx[0]])


def gap_ratios(spectrum, zero_tol: float = 1e-10) -> GapReport:
    """Gap ladder, tail maximum and candidate levels of a spectrum."""
    lam = _eigenvalues(spectrum)
    if len(lam) < 3:
        raise ValueError("need at least three eigenvalues")
    n = len(lam)
    scale = max(1.0, abs(lam[-1]))
    nus, ratios = [], []
    for nu in range(1, n):        # 1-based nu, gap to nu+1
        l0, l1 = lam[nu - 1], lam[nu]
        if l0 <= zero_tol * scale:
            continue              # skip the zero ground level
        nus.append(nu)
        ratios.append((l1 - l0) / math.sqrt(l0))
    nus = np.asarray(nus, dtype=int)
    ratios = np.asarray(ratios, dtype=float)
    if len(nus) == 0:
        raise ValueError("no positive eigenvalues below the top of the window")

    tail_start = max(int(math.ceil(n / 2)), int(nus[0]))
    sel = nus >= tail_start
    if not sel.any():
        sel = np.ones_like(nus, dtype=bool)
        tail_start = int(nus[0])
    tail_nus, tail = nus[sel], ratios[sel]
    tail_max = float(np.max(tail))
    slope = float(np.polyfit(tail_nus.astype(float), tail, 1)[0]) \
        if len(tail) >= 2 else 0.0

    pos = nus[ratios > 0]
    pos_ratios = ratios[ratios > 0]
    order = np.argsort(-pos_ratios, kind="stable")
    candidates = pos[order]

    # the limsup subsequence realizes c1 = lim sqrt(lam)/gap; estimate it
    # from the best tail candidates
    best_tail = [nu for nu in candidates if nu >= tail_start][:3]
    if best_tail:
        c1 = float(np.mean([math.sqrt(lam[nu - 1]) / (lam[nu] - lam[nu - 1])
                            for nu in best_tail]))
    else:
        c1 = math.inf
    return GapReport(nus, ratios, tail_max, tail_start, slope, candidates, c1)


def myp0_diagnostic(spectrum, beta: float, slope_floor: float = 1.5) -> dict:
    """Check the two quadratic-growth hypotheses behind the gap criterion.

    A nondecreasing nonnegative sequence trapped between a positive
    multiple of nu^2 (in the limsup sense) and beta^2 nu^2 satisfies the
    gap condition.  Finitely many values only support a trend check: the
    log-log slope of the tail must stay near 2, and every computed value
    must respect the upper bound.
    """
    lam = _eigenvalues(spectrum)
    n = len(lam)
    nu = np.arange(1, n + 1, dtype=float)
    tail = slice(max(1, n // 2), n)
    quad_ratio = lam[tail] / nu[tail] ** 2
    pos = lam[tail] > 0
    slope = float(np.polyfit(np.log(nu[tail][pos]),
                             np.log(lam[tail][pos]), 1)[0]) \
        if pos.sum() >= 2 else 0.0
    hyp1 = bool(pos.any() and slope >= slope_floor)
    hyp2 = bool(np.all(lam <= beta ** 2 * nu ** 2 + 1e-9 * max(1.0, lam[-1])))
    return {
        "quadratic_growth": hyp1,
        "upper_bound": hyp2,
        "applies": hyp1 and hyp2,
        "tail_quad_ratio_max": float(np.max(quad_ratio)) if len(quad_ratio) else 0.0,
        "loglog_slope": slope,
        "beta": float(beta),
    }


@dataclass(frozen=True)
class SelectedCut:
    """Admissible cut level with its gap interval and smallness constants."""

    nu: int
    eta: float
    interval: tuple[float, float]   # [lam_nu + 2 eta, lam_nu + 3 eta]
    c_nu_1: float
    c_nu_2: float
    zeta: float
    mu: float
    lam_lo: float
    lam_hi: float


def smallness_constants(lam_lo: float, lam_hi: float) -> tuple[float, float]:
    """The gap-interval suprema bounds C_{nu,1}, C_{nu,2}."""
    delta = lam_hi - lam_lo
    c1 = 6.0 / delta
    c2 = 3.0 * math.sqrt(lam_lo + 1.0) / delta \
        + 3.0 * math.sqrt(lam_hi + 1.0) / delta \
        + math.sqrt(3.0) * C_HALF_PRIME / math.sqrt(delta)
    return c1, c2


def select_nu(spectrum, L: float, l: float) -> SelectedCut:
    """Smallest cut level nu with L C_{nu,1} < 1/4 and l C_{nu,2} < 1/4."""
    if L <= 0 or l <= 0:
        raise ValueError("split constants must be positive")
    lam = _eigenvalues(spectrum)
    report = gap_ratios(spectrum)
    for nu in sorted(report.candidates):
        lam_lo, lam_hi = float(lam[nu - 1]), float(lam[nu])
        c1, c2 = smallness_constants(lam_lo, lam_hi)
        if L * c1 < 0.25 and l * c2 < 0.25:
            eta = (lam_hi - lam_lo) / 5.0
            interval = (lam_lo + 2.0 * eta, lam_lo + 3.0 * eta)
            zeta, mu = zeta_mu_in_interval(interval)
            return SelectedCut(int(nu), eta, interval, c1, c2, zeta, mu,
                               lam_lo, lam_hi)
    raise NoAdmissibleNu(
        f"no computed level satisfies L*C1 < 1/4 and l*C2 < 1/4 with "
        f"L={L:g}, l={l:g}; compute more eigenvalues or decrease l")


def zeta_mu_in_interval(interval: tuple[float, float]) -> tuple[float, float]:
    """Deterministic weights: the endpoints of the gap interval."""
    zeta, mu = float(interval[0]), float(interval[1])
    if not zeta < mu:
        raise ValueError("gap interval is empty")
    return zeta, mu


def interval_suprema(lam_lo: float, lam_hi: float, samples: int = 512):
    """Dense-sample suprema of the two bracketed kernel-bound expressions
    over the gap interval; both stay strictly below the smallness
    constants returned by smallness_constants."""
    eta = (lam_hi - lam_lo) / 5.0
    zetas = np.linspace(lam_lo + 2 * eta, lam_lo + 3 * eta, samples)
    first = 1.0 / (zetas - lam_lo) + 1.0 / (lam_hi - zetas)
    second = (np.sqrt(lam_lo + 1.0) / (zetas - lam_lo)
              + np.sqrt(lam_hi + 1.0) / (lam_hi - zetas)
              + C_HALF_PRIME / np.sqrt(lam_hi - zetas))
    return float(np.max(first)), float(np.max(second))
