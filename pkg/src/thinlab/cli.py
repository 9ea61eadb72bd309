"""Batch front door: config, subcommands, deterministic artifacts.

Exit codes: 0 ok, 2 config error, 3 solver failure, 4 no admissible cut
level, 5 trajectory blow-up.  Identical config and seed produce
byte-identical outputs; every summary echoes the resolved config.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from thinlab import output
from thinlab.errors import (
    BlowUp,
    ConfigError,
    EigensolverFailure,
    NoAdmissibleNu,
    ThinlabError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ADMISSIBILITY = 4
EXIT_BLOWUP = 5


@dataclass
class RunConfig:
    """Resolved run options; json config overridden by flags."""

    domain: str = ""
    nonlinearity: object = "cubic-bistable"
    eps: list = field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])
    mesh: float = 1.0 / 64
    mesh_1d: float | None = None
    n_modes: int = 12
    n_eigenvalues: int = 30
    L: float | None = None
    l: float = 0.2
    nu: int | None = None
    ball_radius: float = 0.3
    xi_radius: float = 0.25
    xi_points: int = 3
    horizon_T: float = 5.0
    transient: float = 20.0
    window: float = 5.0
    dt: float = 1e-3
    ensemble: int = 48
    seed: int = 0
    out: str = "out"

    def validate(self):
        if not self.domain:
            raise ConfigError("a domain file is required")
        if not Path(self.domain).exists():
            raise ConfigError(f"domain file not found: {self.domain}")
        for name in ("mesh", "l", "ball_radius", "dt", "horizon_T",
                     "transient", "window", "xi_radius"):
            if getattr(self, name) is not None and getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        eps = [float(e) for e in self.eps]
        if any(e <= 0 for e in eps):
            raise ConfigError("squeeze factors must be positive")
        if any(b <= a for a, b in zip(eps[1:], eps[:-1])) is False and len(eps) > 1:
            pass
        if len(eps) > 1 and not all(a > b for a, b in zip(eps, eps[1:])):
            raise ConfigError("squeeze factors must be strictly decreasing")
        self.eps = eps

    def resolved(self) -> dict:
        d = asdict(self)
        return d


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            payload = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        for key, val in payload.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, val)
    for key in ("domain", "eps", "mesh", "seed", "out", "nu", "L", "l"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    cfg.validate()
    return cfg


def _prepare_out(cfg) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


class _Artifacts:
    """Tracks written files so failures leave no partial output."""

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.written: list[Path] = []

    def csv(self, name, header, rows):
        path = self.outdir / name
        output.write_csv(path, header, rows)
        self.written.append(path)
        return path

    def json(self, name, payload):
        path = self.outdir / name
        output.write_json(path, payload)
        self.written.append(path)
        return path

    def cleanup(self):
        for p in self.written:
            try:
                p.unlink()
            except OSError:
                pass


def _domain(cfg):
    from thinlab.geometry import load_domain
    return load_domain(cfg.domain)


def _nonlinearity(cfg):
    from thinlab.nonlin import from_config
    return from_config(cfg.nonlinearity)


def _summary(cfg, extra=None) -> dict:
    payload = {"config": cfg.resolved()}
    if extra:
        payload.update(extra)
    return payload


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.geometry import build_from_rectangles, classify_condition_C
    from thinlab.spectra import (direct_sum_spectrum, kirchhoff_fluxes,
                                 solve_graph_spectrum, solve_edge_spectrum)
    dom = _domain(cfg)
    graph = build_from_rectangles(dom)
    graph = type(graph)(tuple(classify_condition_C(e) for e in graph.edges),
                        graph.joins)
    h = cfg.mesh_1d or cfg.mesh
    n = cfg.n_eigenvalues
    sd = solve_graph_spectrum(graph, n, h=h)
    art.json("graph.json", graph.to_json())
    art.csv("spectrum.csv", ["index", "eigenvalue", "vector_ref"],
            [[j + 1, float(lam), "vectors.csv"]
             for j, lam in enumerate(sd.eigenvalues)])
    vec_rows = []
    for i, e in enumerate(graph.edges):
        xs = sd.mesh.nodes[i]
        ids = sd.mesh.global_ids[i]
        for x, gid in zip(xs, ids):
            vec_rows.append([e.id, float(x)] +
                            [float(sd.vectors[gid, j]) for j in range(sd.count)])
    art.csv("vectors.csv",
            ["edge", "x"] + [f"v{j + 1}" for j in range(sd.count)], vec_rows)
    edge_rows = []
    for e in graph.edges:
        es = solve_edge_spectrum(e, n, h=h)
        edge_rows += [[e.id, j + 1, float(lam)]
                      for j, lam in enumerate(es.eigenvalues)]
    art.csv("edge_spectra.csv", ["edge", "index", "eigenvalue"], edge_rows)
    ds = direct_sum_spectrum(graph, n, h=h)
    art.csv("direct_sum.csv", ["index", "eigenvalue", "edge", "local_index"],
            [[j + 1, float(lam), ds.origin[j][0], ds.origin[j][1] + 1]
             for j, lam in enumerate(ds.eigenvalues)])
    kir_rows = []
    for mode in range(min(5, sd.count)):
        for c, rep in kirchhoff_fluxes(sd, mode).items():
            kir_rows.append([float(c), mode + 1, rep["residual"],
                             rep["cell_residual"]])
    art.csv("kirchhoff.csv",
            ["coordinate", "mode", "residual", "cell_residual"], kir_rows)
    art.json("summary.json", _summary(cfg, {
        "n_edges": len(graph.edges),
        "n_joins": len(graph.joins),
        "eigenvalues": [float(v) for v in sd.eigenvalues],
    }))


def cmd_squeeze(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.squeeze import convergence_sweep
    dom = _domain(cfg)
    rows = convergence_sweep(dom, cfg.eps, j_max=min(cfg.n_modes, 8),
                             h=cfg.mesh)
    art.csv("sweep.csv",
            ["epsilon", "j", "lambda_eps", "lambda_0", "gap", "alignment"],
            rows)
    art.json("summary.json", _summary(cfg, {
        "max_gap_last_eps": max(r["gap"] for r in rows
                                if r["epsilon"] == cfg.eps[-1]),
    }))


def _gap_pipeline(cfg):
    from thinlab.geometry import build_from_rectangles
    from thinlab.nonlin import graph_basis_table, build_cutoff
    from thinlab.spectra import solve_graph_spectrum
    dom = _domain(cfg)
    graph = build_from_rectangles(dom)
    h = cfg.mesh_1d or cfg.mesh
    sd = solve_graph_spectrum(graph, max(cfg.n_eigenvalues, 12), h=h)
    table = graph_basis_table(sd)
    op = build_cutoff(_nonlinearity(cfg), table, l=cfg.l,
                      ball_radius=cfg.ball_radius, seed=cfg.seed + 7)
    L = cfg.L if cfg.L is not None else op.L
    return dom, graph, sd, table, op, L


def cmd_gap(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.gaps import gap_ratios, select_nu, smallness_constants
    from thinlab.squeeze import upper_bound_beta
    from thinlab.gaps import myp0_diagnostic
    dom, graph, sd, table, op, L = _gap_pipeline(cfg)
    rep = gap_ratios(sd)
    lam = sd.eigenvalues
    rows = []
    for k, nu in enumerate(rep.nus):
        lam_lo, lam_hi = float(lam[nu - 1]), float(lam[nu])
        c1, c2 = smallness_constants(lam_lo, lam_hi)
        admissible = int(L * c1 < 0.25 and cfg.l * c2 < 0.25)
        rows.append([int(nu), lam_lo, lam_hi - lam_lo, float(rep.ratios[k]),
                     c1, c2, admissible])
    art.csv("gap.csv",
            ["nu", "lambda", "delta", "ratio", "c_nu_1", "c_nu_2",
             "admissible_flag"], rows)
    extra = {
        "tail_max": rep.tail_max,
        "tail_start": rep.tail_start,
        "trend_slope": rep.trend_slope,
        "c1_estimate": rep.c1_estimate,
        "L": L, "l": cfg.l,
        "myp0": myp0_diagnostic(sd, upper_bound_beta(dom)),
    }
    try:
        cut = select_nu(sd, L, cfg.l)
        extra.update({"nu": cut.nu, "zeta": cut.zeta, "mu": cut.mu,
                      "eta": cut.eta, "c_nu_1": cut.c_nu_1,
                      "c_nu_2": cut.c_nu_2})
    except NoAdmissibleNu as exc:
        extra["nu"] = None
        extra["admissibility_note"] = str(exc)
    art.json("summary.json", _summary(cfg, extra))


def cmd_cutoff(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.nonlin import verify_cutoff
    dom, graph, sd, table, op, L = _gap_pipeline(cfg)
    rep_global = verify_cutoff(op, table, cfg.ball_radius, seed=cfg.seed + 40,
                               region="global")
    rep_ball = verify_cutoff(op, table, cfg.ball_radius, seed=cfg.seed + 41,
                             region="ball")
    art.json("cutoff.json", _summary(cfg, {
        "q": op.q, "theta": op.theta, "rho": op.rho, "M": op.M, "K": op.K,
        "C1": op.C1, "L": op.L, "l": op.l, "L_formula": op.L_formula,
        "amplitude": op.amplitude,
        "verification_global": rep_global,
        "verification_ball": rep_ball,
    }))


def _family(cfg, require_admissible=True):
    from thinlab.family import build_family
    dom = _domain(cfg)
    return build_family(dom, _nonlinearity(cfg), cfg.eps, h=cfg.mesh,
                        l=cfg.l, ball_radius=cfg.ball_radius,
                        n_modes=cfg.n_modes, L_override=cfg.L,
                        nu_override=cfg.nu, seed=cfg.seed + 7,
                        require_admissible=require_admissible,
                        n_limit_modes=cfg.n_eigenvalues)


def cmd_manifold(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.family import epsilon_compare
    from thinlab.manifold import build_chart, xi_grid
    fam = _family(cfg)
    grid = xi_grid(cfg.xi_radius, fam.cut.nu, cfg.xi_points)
    chart0 = build_chart(fam.limit, grid)
    nu, N = fam.cut.nu, fam.limit.n_modes
    header = [f"xi_{i + 1}" for i in range(nu)] \
        + [f"L_{j + 1}" for j in range(N)] \
        + [f"v_{i + 1}" for i in range(nu)]

    def chart_rows(chart):
        return [list(chart.xi[i]) + list(chart.Lambda[i]) + list(chart.v[i])
                for i in range(len(chart.xi))]

    art.csv("chart_limit.csv", header, chart_rows(chart0))
    rows = epsilon_compare(fam, grid)
    for eps in sorted(fam.levels, reverse=True):
        chart = build_chart(fam.levels[eps], grid, with_derivatives=False)
        tag = f"{eps:g}".replace(".", "p")
        art.csv(f"chart_eps_{tag}.csv", header, chart_rows(chart))
    art.csv("convergence.csv",
            ["epsilon", "dLambda_max", "dDLambda_max", "dv_max", "dDv_max"],
            [[r["epsilon"], r["dLambda_max"], r["dDLambda_max"],
              r["dv_max"], r["dDv_max"]] for r in rows])
    art.json("summary.json", _summary(cfg, {
        "nu": fam.cut.nu, "zeta": fam.cut.zeta, "mu": fam.cut.mu,
        "eta": fam.cut.eta, "c_nu_1": fam.cut.c_nu_1,
        "c_nu_2": fam.cut.c_nu_2,
        "L": fam.cutoff.L, "l": fam.cutoff.l, "M": fam.cutoff.M,
        "rho": fam.cutoff.rho,
        "contraction": chart0.contraction,
        "chart_identity_error": chart0.chart_identity_error(),
    }))


def cmd_simulate(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.dynamics import band_limited_ensemble, integrate, sample_attractor
    fam = _family(cfg, require_admissible=False)
    sys0 = fam.limit
    ens = band_limited_ensemble(sys0, cfg.ensemble, cfg.ball_radius,
                                seed=cfg.seed + 13)
    traj = integrate(sys0, ens[0], cfg.horizon_T, cfg.dt,
                     store_every=max(1, int(round(0.05 / cfg.dt))))
    art.csv("trajectory.csv",
            ["t"] + [f"c_{j + 1}" for j in range(sys0.n_modes)],
            [[float(t)] + list(map(float, traj.states[k, 0]))
             for k, t in enumerate(traj.times)])
    sample = sample_attractor(sys0, ens, transient=cfg.transient,
                              window=cfg.window, dt=cfg.dt)
    art.csv("attractor.csv",
            [f"c_{j + 1}" for j in range(sys0.n_modes)],
            [list(map(float, p)) for p in sample.points])
    art.json("summary.json", _summary(cfg, {
        "ensemble": cfg.ensemble,
        "sample_size": len(sample),
    }))


def cmd_compare(cfg: RunConfig, art: _Artifacts) -> None:
    from thinlab.family import linear_flow_compare, semidistance_sweep
    fam = _family(cfg, require_admissible=False)
    rows = semidistance_sweep(fam, count=cfg.ensemble,
                              transient=cfg.transient, window=cfg.window,
                              dt=cfg.dt, seed=cfg.seed + 13)
    art.csv("semidistance.csv", ["epsilon", "semidistance"],
            [[r["epsilon"], r["semidistance"]] for r in rows])
    u0 = np.zeros(fam.limit.n_modes)
    u0[min(1, fam.limit.n_modes - 1)] = 0.1
    lin = linear_flow_compare(fam, u0, t0=min(0.2, 1.0 / fam.cut.zeta))
    art.csv("linear_compare.csv", ["epsilon", "difference"],
            [[r["epsilon"], r["difference"]] for r in lin])
    art.json("summary.json", _summary(cfg, {
        "semidistance": {str(r["epsilon"]): r["semidistance"] for r in rows},
    }))


COMMANDS = {
    "spectrum": cmd_spectrum,
    "squeeze": cmd_squeeze,
    "gap": cmd_gap,
    "cutoff": cmd_cutoff,
    "manifold": cmd_manifold,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="thinlab",
        description="Thin-domain laboratory: spectra, gaps, manifolds, flows.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--domain", help="domain JSON with a 'rectangles' array")
    p.add_argument("--eps", type=float, nargs="+",
                   help="squeeze factors, strictly decreasing")
    p.add_argument("--mesh", type=float, help="2-D mesh size")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--nu", type=int, help="cut level override")
    p.add_argument("--L", type=float, help="split constant override")
    p.add_argument("--l", type=float, help="energy-distance coefficient")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    np.random.seed(cfg.seed)  # legacy consumers; library code uses default_rng
    art = _Artifacts(_prepare_out(cfg))
    try:
        COMMANDS[args.command](cfg, art)
    except ConfigError as exc:
        art.cleanup()
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except NoAdmissibleNu as exc:
        art.cleanup()
        print(f"admissibility: {exc}", file=_sys.stderr)
        return EXIT_ADMISSIBILITY
    except BlowUp as exc:
        art.cleanup()
        print(f"blow-up: {exc}", file=_sys.stderr)
        return EXIT_BLOWUP
    except (EigensolverFailure, ThinlabError) as exc:
        art.cleanup()
        print(f"solver failure: {exc}", file=_sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
