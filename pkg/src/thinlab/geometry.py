"""Thin-domain geometry: rectangle unions and their metric-graph skeletons.

A finite union of axis-aligned rectangles decomposes, away from finitely
many vertical junction lines, into maximal x-strips with connected
vertical sections.  Each strip becomes a weighted edge of a metric graph
(the weight is the section height), and each connected component of the
junction set becomes a vertex carrying a flux-balance condition between
the strips ending there (sigma+) and the strips starting there (sigma-).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from thinlab.errors import (
    DisconnectedDomain,
    NonNiceDecomposition,
    QuadratureFailure,
    Unclassifiable,
)

# Relative tolerance for coordinate coincidence tests.
_REL_TOL = 1e-9

# Grid density used for condition-(C) style verification of weights.
CLASSIFY_GRID_POINTS = 10_000


# ---------------------------------------------------------------------------
# weight functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFn:
    """Positive weight on an open interval, with 1/p integrable.

    ``kind`` is one of ``piecewise-constant``, ``closed-form`` or
    ``sampled``.  Closed forms come from a small catalog (constant,
    affine, monomial vanishing at one endpoint) for which derivatives
    and 1/p integrals are exact.
    """

    kind: str
    interval: tuple[float, float]
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    form: str = ""
    params: tuple[float, ...] = ()
    grid: tuple[float, ...] = ()
    samples: tuple[float, ...] = ()

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(c: float, interval: tuple[float, float]) -> "WeightFn":
        if c <= 0:
            raise ValueError("constant weight must be positive")
        return WeightFn("closed-form", interval, form="constant", params=(c,))

    @staticmethod
    def piecewise(breakpoints, values, interval) -> "WeightFn":
        """Piecewise-constant weight; breakpoints are interior to interval."""
        breakpoints = tuple(float(b) for b in breakpoints)
        values = tuple(float(v) for v in values)
        if len(values) != len(breakpoints) + 1:
            raise ValueError("need one more value than breakpoints")
        if any(v <= 0 for v in values):
            raise ValueError("weight values must be positive")
        if list(breakpoints) != sorted(breakpoints):
            raise ValueError("breakpoints must be increasing")
        return WeightFn("piecewise-constant", interval,
                        breakpoints=breakpoints, values=values)

    @staticmethod
    def affine(a: float, b: float, interval) -> "WeightFn":
        return WeightFn("closed-form", interval, form="affine", params=(a, b))

    @staticmethod
    def monomial(amplitude: float, power: float, interval,
                 vanishing: str = "left") -> "WeightFn":
        """``amplitude * (x - lo)**power`` (or ``(hi - x)**power``)."""
        if amplitude <= 0 or power <= 0:
            raise ValueError("amplitude and power must be positive")
        form = "monomial-left" if vanishing == "left" else "monomial-right"
        return WeightFn("closed-form", interval, form=form,
                        params=(amplitude, power))

    @staticmethod
    def from_samples(grid, samples) -> "WeightFn":
        grid = tuple(float(g) for g in grid)
        samples = tuple(float(s) for s in samples)
        if len(grid) != len(samples) or len(grid) < 2:
            raise ValueError("need matching grid/sample arrays")
        return WeightFn("sampled", (grid[0], grid[-1]),
                        grid=grid, samples=samples)

    # -- evaluation --------------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        if self.kind == "piecewise-constant":
            idx = np.searchsorted(np.asarray(self.breakpoints), x, side="right")
            return np.asarray(self.values, dtype=float)[idx]
        if self.kind == "sampled":
            return np.interp(x, self.grid, self.samples)
        a = self.params
        if self.form == "constant":
            return np.full_like(x, a[0], dtype=float)
        if self.form == "affine":
            return a[0] + a[1] * x
        if self.form == "monomial-left":
            return a[0] * np.maximum(x - lo, 0.0) ** a[1]
        if self.form == "monomial-right":
            return a[0] * np.maximum(hi - x, 0.0) ** a[1]
        raise ValueError(f"unknown form {self.form!r}")

    def d1(self, x):
        """First derivative; closed forms only."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        a = self.params
        if self.form == "constant":
            return np.zeros_like(x)
        if self.form == "affine":
            return np.full_like(x, a[1])
        if self.form == "monomial-left":
            return a[0] * a[1] * (x - lo) ** (a[1] - 1.0)
        if self.form == "monomial-right":
            return -a[0] * a[1] * (hi - x) ** (a[1] - 1.0)
        raise ValueError("derivatives available for closed forms only")

    def d2(self, x):
        """Second derivative; closed forms only."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        a = self.params
        if self.form == "constant":
            return np.zeros_like(x)
        if self.form == "affine":
            return np.zeros_like(x)
        if self.form == "monomial-left":
            return a[0] * a[1] * (a[1] - 1.0) * (x - lo) ** (a[1] - 2.0)
        if self.form == "monomial-right":
            return a[0] * a[1] * (a[1] - 1.0) * (hi - x) ** (a[1] - 2.0)
        raise ValueError("derivatives available for closed forms only")

    # -- integrals of 1/p ---------------------------------------------------

    def inv_integral(self, x0: float, x1: float) -> float:
        """Integral of 1/p over [x0, x1]; exact for the catalog."""
        lo, hi = self.interval
        if not (lo - 1e-12 <= x0 <= x1 <= hi + 1e-12):
            raise ValueError("integration limits outside the edge interval")
        if self.kind == "piecewise-constant":
            cuts = [x0] + [b for b in self.breakpoints if x0 < b < x1] + [x1]
            vals = self(np.array([(a + b) / 2 for a, b in zip(cuts, cuts[1:])]))
            return float(sum((b - a) / v
                             for (a, b), v in zip(zip(cuts, cuts[1:]), vals)))
        if self.kind == "closed-form":
            a = self.params
            if self.form == "constant":
                return (x1 - x0) / a[0]
            if self.form == "affine":
                c0, c1 = a
                if c1 == 0:
                    return (x1 - x0) / c0
                v0, v1 = c0 + c1 * x0, c0 + c1 * x1
                if v0 <= 0 or v1 <= 0:
                    raise QuadratureFailure("1/p integral diverges")
                return math.log(v1 / v0) / c1
            if self.form in ("monomial-left", "monomial-right"):
                amp, s = a
                if s >= 1:
                    if (self.form == "monomial-left" and x0 <= lo + 1e-300) or \
                       (self.form == "monomial-right" and x1 >= hi - 1e-300):
                        raise QuadratureFailure("1/p integral diverges")
                t0, t1 = ((x0 - lo, x1 - lo) if self.form == "monomial-left"
                          else (hi - x1, hi - x0))
                anti = lambda t: t ** (1.0 - s) / (1.0 - s) if s != 1.0 \
                    else math.log(max(t, 1e-300))
                return (anti(t1) - anti(t0)) / amp
        # sampled: composite Simpson with refinement check
        return self._inv_integral_numeric(x0, x1)

    def _inv_integral_numeric(self, x0, x1, budget=1e-8):
        prev = None
        for n in (64, 128, 256, 512, 1024, 2048, 4096):
            xs = np.linspace(x0, x1, n + 1)
            vals = self(xs)
            if np.any(vals <= 0):
                raise QuadratureFailure("weight non-positive inside interval")
            from scipy.integrate import simpson
            cur = float(simpson(1.0 / vals, x=xs))
            if prev is not None and abs(cur - prev) <= budget * max(1.0, abs(cur)):
                return cur
            prev = cur
        raise QuadratureFailure("1/p quadrature did not converge")

    def verify_integrable(self, budget: float = 1e-6) -> float:
        """Check 1/p in L1 by shrinking the cutoff toward the endpoints.

        Returns the converged value of the integral, raising
        QuadratureFailure when the cutoff sequence keeps growing.
        """
        lo, hi = self.interval
        ell = hi - lo
        vals = []
        for j in range(4, 80):
            delta = ell * 0.5 ** j
            try:
                vals.append(self.inv_integral(lo + delta, hi - delta))
            except QuadratureFailure:
                raise
            if len(vals) >= 3:
                d1 = abs(vals[-1] - vals[-2])
                d2 = abs(vals[-2] - vals[-3])
                if d1 <= budget * max(1.0, abs(vals[-1])) and d1 <= d2 + budget:
                    return vals[-1]
        raise QuadratureFailure("1/p integral shows no sign of converging")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "interval": list(self.interval)}
        if self.kind == "piecewise-constant":
            out["breakpoints"] = list(self.breakpoints)
            out["values"] = list(self.values)
        elif self.kind == "closed-form":
            out["form"] = self.form
            out["params"] = list(self.params)
        else:
            out["grid"] = list(self.grid)
            out["samples"] = list(self.samples)
        return out

    @staticmethod
    def from_json(obj: dict) -> "WeightFn":
        kind = obj["kind"]
        interval = tuple(obj["interval"])
        if kind == "piecewise-constant":
            return WeightFn.piecewise(obj["breakpoints"], obj["values"], interval)
        if kind == "closed-form":
            return WeightFn(kind, interval, form=obj["form"],
                            params=tuple(obj["params"]))
        return WeightFn.from_samples(obj["grid"], obj["samples"])


# ---------------------------------------------------------------------------
# condition-(C) classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCase:
    """Weight regularity case: bounded or comparable to a vanishing majorant."""

    kind: str                 # "bounded" | "vanishing-left" | "vanishing-right" | "unclassified"
    alpha: float = 0.0
    beta: float = 0.0
    majorant: WeightFn | None = None

    @property
    def classified(self) -> bool:
        return self.kind != "unclassified"


UNCLASSIFIED = ConditionCase("unclassified")


# ---------------------------------------------------------------------------
# edges, joins, graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeSpec:
    """One weighted interval edge of the metric graph."""

    id: int
    interval: tuple[float, float]
    weight: WeightFn
    case: ConditionCase = UNCLASSIFIED
    y_interval: tuple[float, float] | None = None  # strip footprint, when known

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise ValueError(f"edge {self.id}: empty interval {self.interval}")

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(frozen=True)
class JoinGroup:
    """Connected junction component: strips ending vs starting at x = c."""

    coordinate: float
    span: tuple[float, float]
    sigma_plus: tuple[int, ...]   # edge ids with b_k = c
    sigma_minus: tuple[int, ...]  # edge ids with a_k = c

    def __post_init__(self):
        if not self.sigma_plus and not self.sigma_minus:
            raise ValueError("join with no incident edges")
        if not self.span[0] < self.span[1]:
            raise ValueError("degenerate join span")


@dataclass(frozen=True)
class MetricGraph:
    """Weighted interval edges plus flux-balance junction groups."""

    edges: tuple[EdgeSpec, ...]
    joins: tuple[JoinGroup, ...]

    def __post_init__(self):
        ids = {e.id for e in self.edges}
        seen: set[tuple[int, str]] = set()
        for g in self.joins:
            for k in g.sigma_plus:
                if k not in ids or not math.isclose(
                        self.edge(k).interval[1], g.coordinate,
                        rel_tol=_REL_TOL, abs_tol=1e-12):
                    raise ValueError(f"join at {g.coordinate}: edge {k} does not end there")
                if (k, "b") in seen:
                    raise ValueError(f"edge {k} right endpoint in two joins")
                seen.add((k, "b"))
            for k in g.sigma_minus:
                if k not in ids or not math.isclose(
                        self.edge(k).interval[0], g.coordinate,
                        rel_tol=_REL_TOL, abs_tol=1e-12):
                    raise ValueError(f"join at {g.coordinate}: edge {k} does not start there")
                if (k, "a") in seen:
                    raise ValueError(f"edge {k} left endpoint in two joins")
                seen.add((k, "a"))

    def edge(self, edge_id: int) -> EdgeSpec:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def is_connected(self) -> bool:
        if not self.edges:
            return False
        adj: dict[int, set[int]] = {e.id: set() for e in self.edges}
        for g in self.joins:
            members = list(g.sigma_plus) + list(g.sigma_minus)
            for a in members:
                for b in members:
                    if a != b:
                        adj[a].add(b)
        seen = {self.edges[0].id}
        stack = [self.edges[0].id]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.edges)

    def to_json(self) -> dict:
        return {
            "edges": [{
                "id": e.id,
                "interval": list(e.interval),
                "weight": e.weight.to_json(),
                "case": e.case.kind,
                "y_interval": list(e.y_interval) if e.y_interval else None,
            } for e in self.edges],
            "joins": [{
                "coordinate": g.coordinate,
                "span": list(g.span),
                "sigma_plus": list(g.sigma_plus),
                "sigma_minus": list(g.sigma_minus),
            } for g in self.joins],
        }


# ---------------------------------------------------------------------------
# rectangle unions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RectUnionDomain:
    """Finite union of nondegenerate axis-aligned rectangles."""

    rectangles: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        if not self.rectangles:
            raise ValueError("empty rectangle list")
        for r in self.rectangles:
            x0, x1, y0, y1 = r
            if not (x0 < x1 and y0 < y1):
                raise ValueError(f"degenerate rectangle {r}")

    @staticmethod
    def from_json(obj) -> "RectUnionDomain":
        rects = obj["rectangles"] if isinstance(obj, dict) else obj
        return RectUnionDomain(tuple(tuple(float(v) for v in r) for r in rects))

    def to_json(self) -> dict:
        return {"rectangles": [list(r) for r in self.rectangles]}

    @property
    def scale(self) -> float:
        xs = [v for r in self.rectangles for v in r[:2]]
        ys = [v for r in self.rectangles for v in r[2:]]
        return max(max(xs) - min(xs), max(ys) - min(ys))

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs0, xs1, ys0, ys1 = zip(*self.rectangles)
        return min(xs0), max(xs1), min(ys0), max(ys1)

    def section_intervals(self, x: float) -> list[tuple[float, float]]:
        """Merged y-intervals of the open union's section at abscissa x."""
        tol = _REL_TOL * self.scale
        spans = [(r[2], r[3]) for r in self.rectangles
                 if r[0] - tol < x < r[1] + tol]
        return _merge_intervals(spans, tol)

    def section_measure(self, x: float) -> float:
        return sum(b - a for a, b in self.section_intervals(x))


def _merge_intervals(spans, tol):
    """Merge closed intervals that overlap or touch within tol."""
    if not spans:
        return []
    spans = sorted(spans)
    merged = [list(spans[0])]
    for a, b in spans[1:]:
        if a <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(m) for m in merged]


def _dedupe(values, tol):
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# the sweep construction
# ---------------------------------------------------------------------------

def build_from_rectangles(domain: RectUnionDomain) -> MetricGraph:
    """Decompose a rectangle union into maximal strips and junctions.

    Between consecutive x-breakpoints the section structure is constant,
    so each slab contributes one piece per connected section component;
    pieces continue across a breakpoint exactly when their sections are
    identical, and every other contact becomes part of a junction group.
    """
    tol = _REL_TOL * domain.scale
    breaks = _dedupe([v for r in domain.rectangles for v in r[:2]], tol)
    slabs = list(zip(breaks, breaks[1:]))

    # pieces[i] = merged section intervals over slab i
    pieces: list[list[tuple[float, float]]] = []
    for lo, hi in slabs:
        mid = 0.5 * (lo + hi)
        spans = domain.section_intervals(mid)
        if not spans:
            raise DisconnectedDomain("slab with empty section inside the hull")
        pieces.append(spans)

    node_of = {}          # (slab, piece index) -> node id
    nodes = []            # node id -> (slab, span)
    for i, spans in enumerate(pieces):
        for j, span in enumerate(spans):
            node_of[(i, j)] = len(nodes)
            nodes.append((i, span))

    # adjacency across slab boundaries: positive-length overlap of sections
    parent = list(range(len(nodes)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent[find(a)] = find(b)

    connected = list(range(len(nodes)))  # second union-find, for flood fill
    cparent = connected

    def cfind(a):
        while cparent[a] != a:
            cparent[a] = cparent[cparent[a]]
            a = cparent[a]
        return a

    def cunion(a, b):
        cparent[cfind(a)] = cfind(b)

    for i in range(len(slabs) - 1):
        for j, sj in enumerate(pieces[i]):
            for k, sk in enumerate(pieces[i + 1]):
                ov = min(sj[1], sk[1]) - max(sj[0], sk[0])
                if ov > tol:
                    cunion(node_of[(i, j)], node_of[(i + 1, k)])
                    same = (abs(sj[0] - sk[0]) <= tol
                            and abs(sj[1] - sk[1]) <= tol)
                    if same:
                        union(node_of[(i, j)], node_of[(i + 1, k)])

    if len({cfind(n) for n in range(len(nodes))}) > 1:
        raise DisconnectedDomain("interior of the rectangle union is disconnected")

    # strips = classes of the identical-section union-find
    strips: dict[int, list[int]] = {}
    for n in range(len(nodes)):
        strips.setdefault(find(n), []).append(n)

    strip_list = []
    for members in strips.values():
        slabs_in = sorted(nodes[m][0] for m in members)
        span = nodes[members[0]][1]
        a, b = slabs[slabs_in[0]][0], slabs[slabs_in[-1]][1]
        strip_list.append((a, b, span))
    # deterministic ordering regardless of input rectangle order
    strip_list.sort(key=lambda s: (s[0], s[2][0]))

    edges = []
    strip_id_at = {}  # (x-coordinate key, span) lookups for joins
    for eid, (a, b, span) in enumerate(strip_list):
        p = span[1] - span[0]
        w = WeightFn.constant(p, (a, b))
        edges.append(EdgeSpec(eid, (a, b), w,
                              case=ConditionCase("bounded", p, p),
                              y_interval=span))

    joins = []
    for c in breaks[1:-1]:
        enders = [(e.id, e.y_interval) for e in edges
                  if abs(e.interval[1] - c) <= tol]
        starters = [(e.id, e.y_interval) for e in edges
                    if abs(e.interval[0] - c) <= tol]
        incidences = [(eid, span, "+") for eid, span in enders] + \
                     [(eid, span, "-") for eid, span in starters]
        if not incidences:
            continue
        # connected components of the junction set at this line
        comp = list(range(len(incidences)))

        def jfind(a):
            while comp[a] != a:
                comp[a] = comp[comp[a]]
                a = comp[a]
            return a

        for a in range(len(incidences)):
            for b in range(a + 1, len(incidences)):
                sa, sb = incidences[a][1], incidences[b][1]
                if min(sa[1], sb[1]) - max(sa[0], sb[0]) >= -tol:
                    comp[jfind(a)] = jfind(b)

        groups: dict[int, list[int]] = {}
        for a in range(len(incidences)):
            groups.setdefault(jfind(a), []).append(a)

        for members in groups.values():
            if len(members) == 1:
                continue  # free Neumann end, no coupling
            plus = tuple(sorted(incidences[m][0] for m in members
                                if incidences[m][2] == "+"))
            minus = tuple(sorted(incidences[m][0] for m in members
                                 if incidences[m][2] == "-"))
            # span = hull of the pairwise section intersections, so it
            # stays inside the closure of both sides' sections
            lo, hi = math.inf, -math.inf
            for pid in plus:
                sp = next(incidences[m][1] for m in members
                          if incidences[m][0] == pid and incidences[m][2] == "+")
                for mid_ in minus:
                    sm = next(incidences[m][1] for m in members
                              if incidences[m][0] == mid_ and incidences[m][2] == "-")
                    olo, ohi = max(sp[0], sm[0]), min(sp[1], sm[1])
                    if -tol <= ohi - olo <= tol:
                        raise NonNiceDecomposition(
                            f"strips {pid} and {mid_} touch at a single point "
                            f"at x = {c}")
                    if ohi - olo > tol:
                        lo, hi = min(lo, olo), max(hi, ohi)
            if not lo < hi:
                raise NonNiceDecomposition(
                    f"degenerate junction span at x = {c}")
            joins.append(JoinGroup(c, (lo, hi), plus, minus))

    graph = MetricGraph(tuple(edges), tuple(joins))
    if not graph.is_connected():
        raise DisconnectedDomain("strip incidence graph is disconnected")
    return graph


# ---------------------------------------------------------------------------
# condition (C)
# ---------------------------------------------------------------------------

def classify_condition_C(edge: EdgeSpec,
                         grid_points: int = CLASSIFY_GRID_POINTS) -> EdgeSpec:
    """Attach a weight-regularity case to an edge.

    Piecewise-constant weights are always bounded.  Catalog closed forms
    vanishing at one endpoint get themselves as the concave monotone
    majorant, with monotonicity/concavity and integrability verified on
    a dense grid (exactly, for the catalog).  Anything else is bounded
    when its grid minimum is positive, otherwise unclassifiable.
    """
    w = edge.weight
    a, b = edge.interval

    if w.kind == "piecewise-constant":
        case = ConditionCase("bounded", min(w.values), max(w.values))
        return replace(edge, case=case)

    if w.kind == "closed-form" and w.form == "constant":
        c = w.params[0]
        return replace(edge, case=ConditionCase("bounded", c, c))

    xs = np.linspace(a, b, grid_points + 1)
    inner = xs[1:-1]
    vals = w(inner)
    if np.any(vals <= 0):
        raise Unclassifiable(f"edge {edge.id}: weight not positive inside")

    if w.kind == "closed-form" and w.form in ("monomial-left", "monomial-right"):
        amp, s = w.params
        side = "left" if w.form == "monomial-left" else "right"
        endpoint = a if side == "left" else b
        if s >= 1:
            raise Unclassifiable(
                f"edge {edge.id}: 1/p not integrable at x = {endpoint}")
        probe = inner if side == "left" else inner[::-1]
        d1 = w.d1(probe)
        d2 = w.d2(probe)
        mono_ok = np.all(d1 >= 0) if side == "left" else np.all(d1 <= 0)
        if not (mono_ok and np.all(d2 <= 0)):
            raise Unclassifiable(f"edge {edge.id}: majorant shape checks failed")
        w.verify_integrable()
        q = WeightFn.monomial(1.0, s, (a, b), vanishing=side)
        kind = "vanishing-left" if side == "left" else "vanishing-right"
        return replace(edge, case=ConditionCase(kind, amp, amp, q))

    if w.kind == "closed-form" and w.form == "affine":
        v0, v1 = float(w(np.array(a))), float(w(np.array(b)))
        if v0 > 0 and v1 > 0:
            return replace(edge, case=ConditionCase("bounded",
                                                    min(v0, v1), max(v0, v1)))
        # affine vanishing at an endpoint: 1/p ~ 1/x is not integrable
        raise Unclassifiable(
            f"edge {edge.id}: affine weight vanishing at an endpoint has "
            "divergent 1/p integral")

    # sampled or unknown positive weight: bounded if grid min positive
    vmin, vmax = float(vals.min()), float(vals.max())
    v_end = w(np.array([a, b]))
    if np.all(v_end > 0):
        return replace(edge, case=ConditionCase("bounded",
                                                min(vmin, *v_end),
                                                max(vmax, *v_end)))
    raise Unclassifiable(f"edge {edge.id}: no supported case validates")


def continuity_modulus(edge: EdgeSpec, x: float, xp: float) -> float:
    """Modulus (integral of 1/p from x to x') ** 1/2.

    This is the factor multiplying the energy norm in the pointwise
    continuity estimate on a weighted edge.
    """
    a, b = edge.interval
    if not (a - 1e-12 <= x < xp <= b + 1e-12):
        raise ValueError("need a_k <= x < x' <= b_k")
    return math.sqrt(edge.weight.inv_integral(x, xp))


# ---------------------------------------------------------------------------
# file round trips
# ---------------------------------------------------------------------------

def load_domain(path) -> RectUnionDomain:
    with open(path) as fh:
        return RectUnionDomain.from_json(json.load(fh))


def save_graph(graph: MetricGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph.to_json(), fh, indent=2)
        fh.write("\n")
