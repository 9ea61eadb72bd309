"""Shared benchmark pipelines (session-scoped: the heavy solves run once)."""

import numpy as np
import pytest

from thinlab.gaps import select_nu
from thinlab.geometry import EdgeSpec, WeightFn
from thinlab.manifold import build_system
from thinlab.nonlin import build_cutoff, cubic_bistable, graph_basis_table
from thinlab.spectra import solve_edge_spectrum

# The bistable benchmark runs on a compressed square: the short edge
# spreads the spectral gaps far enough that the amplitude-bound split
# constant L ~ 30 admits the cut nu = 2 (delta_2 = 3 pi^2 / 0.15^2).
BENCH_EDGE = 0.15
BENCH_BALL = 0.3
BENCH_L_SMALL = 0.2


@pytest.fixture(scope="session")
def bench():
    """Graph-limit system of the bistable benchmark on [0, 0.15]^2."""
    e = EdgeSpec(0, (0.0, BENCH_EDGE),
                 WeightFn.constant(BENCH_EDGE, (0.0, BENCH_EDGE)))
    sd = solve_edge_spectrum(e, 30, h=BENCH_EDGE / 96)
    table = graph_basis_table(sd)
    f = cubic_bistable()
    op = build_cutoff(f, table, l=BENCH_L_SMALL, ball_radius=BENCH_BALL, seed=7)
    cut = select_nu(sd, op.L, op.l)
    sys = build_system(0.0, sd.eigenvalues, table, op, cut)
    return {"edge": e, "spectrum": sd, "table": table, "f": f,
            "cutoff": op, "cut": cut, "system": sys}
