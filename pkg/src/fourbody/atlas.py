"""Atlas growth: advected charts tiling a manifold's outward extension.

Generation zero is the boundary mesh of a local manifold.  Each growth
step advects every frontier arc into a space-time chart, collapses the
chart's time-1 edge into a new arc, and carries it to the next
frontier.  Arcs whose polynomial quality has degraded (slow coefficient
decay or excessive physical length) are first split in half, since an
affine shrink of the parameter restores geometric decay; charts whose
range box approaches a primary are dropped and their arcs retired.

Everything is serializable: the JSON schema stores coefficient
endpoints as plain numbers, which round-trip bit-exactly through the
repr-based float formatting of the json module.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .advect import (FlowChart, check_collision, choose_tau,
                     collapse_time_one, flow_line)
from .crfbp import MassTriple, PrimaryConfig, primaries
from .errors import CollisionDomain, SchemaVersionMismatch, SubdivisionLimit
from .interval import CInterval, Interval, _iadd_arr
from .manifold import BoundaryArc, LocalManifold, _mul_linear, boundary_mesh
from .polyfield import DIM
from .taylor import ScalarSeries2, Series2

SCHEMA_VERSION = 1

_ZERO = CInterval(Interval.from_value(0.0))


@dataclass(frozen=True)
class ArcRecord:
    """A frontier arc with its provenance.

    ``parent_chart`` is the chart whose time-1 edge produced the arc
    (None for generation zero), ``split_from`` the arc it was cut from
    during remeshing, and ``arc_time`` the signed flow time
    accumulated from the local manifold boundary to this arc.
    """

    arc_id: int
    generation: int
    arc: BoundaryArc
    arc_time: float = 0.0
    parent_chart: Optional[int] = None
    split_from: Optional[int] = None


@dataclass(frozen=True)
class ChartRecord:
    """An advected chart tied to the arc it grew from."""

    chart_id: int
    arc_id: int
    generation: int
    chart: FlowChart


# ---------------------------------------------------------------------------
# arc quality and subdivision


def arc_decay(arc: BoundaryArc) -> float:
    """Top-order coefficient magnitude relative to the peak.

    A healthy arc decays geometrically, so the ratio is around the
    decay rate to the power of the order; values near one mean the
    polynomial is fighting its domain.
    """
    top = 0.0
    peak = 0.0
    for c in arc.gamma.components:
        mags = np.hypot(np.maximum(np.abs(c.rlo), np.abs(c.rhi)),
                        np.maximum(np.abs(c.ilo), np.abs(c.ihi)))[:, 0]
        top = max(top, float(mags[-1]))
        peak = max(peak, float(np.max(mags)))
    return top / peak if peak > 0.0 else 0.0


def arc_length(arc: BoundaryArc) -> float:
    """Polyline estimate of the arc's length in the position plane."""
    pts = []
    for s in (-1.0, -0.5, 0.0, 0.5, 1.0):
        vals = arc.gamma.eval_box(CInterval(Interval.from_value(s)), _ZERO)
        pts.append((vals[0].re.mid, vals[2].re.mid))
    return float(sum(np.hypot(x1 - x0, y1 - y0)
                     for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:])))


def _affine_arc(arc: BoundaryArc, c: float, d: float) -> BoundaryArc:
    """Reparameterize by s = c + d sigma with rigorous coefficients.

    The sup bound carried in the tail holds on the whole parent
    domain, so the restriction inherits it unchanged.
    """
    M = arc.gamma.orders[0]
    comps = arc.gamma.components

    def row(mm: int):
        return (np.array([q.rlo[mm, 0] for q in comps]),
                np.array([q.rhi[mm, 0] for q in comps]),
                np.array([q.ilo[mm, 0] for q in comps]),
                np.array([q.ihi[mm, 0] for q in comps]))

    c0 = CInterval(c)
    c1 = CInterval(d)
    acc = ScalarSeries2.zeros(M, DIM - 1)
    acc.rlo[0], acc.rhi[0], acc.ilo[0], acc.ihi[0] = row(M)
    for mm in range(M - 1, -1, -1):
        acc = _mul_linear(acc, c0, c1, M)
        lo, hi, ilo, ihi = row(mm)
        acc.rlo[0], acc.rhi[0] = _iadd_arr(acc.rlo[0], acc.rhi[0], lo, hi)
        acc.ilo[0], acc.ihi[0] = _iadd_arr(acc.ilo[0], acc.ihi[0], ilo, ihi)
    out = tuple(ScalarSeries2(acc.rlo[:, i:i + 1], acc.rhi[:, i:i + 1],
                              acc.ilo[:, i:i + 1], acc.ihi[:, i:i + 1])
                for i in range(DIM))
    gamma = Series2(out, scale=arc.gamma.scale, tau=1.0,
                    real_symmetric=False, tail=arc.gamma.tail)
    preimage = None
    if arc.preimage is not None:
        p0, p1 = arc.preimage
        mid = 0.5 * (p0 + p1)
        half = 0.5 * (p1 - p0)

        def chord(s: float) -> complex:
            # keep shared vertices bitwise equal across siblings
            if s == -1.0:
                return p0
            if s == 1.0:
                return p1
            return mid + half * s

        preimage = (chord(c - d), chord(c + d))
    return BoundaryArc(gamma=gamma, kind=arc.kind, preimage=preimage)


def subdivide_arc(arc: BoundaryArc) -> tuple[BoundaryArc, BoundaryArc]:
    """Split an arc at its parameter midpoint into two halves."""
    return _affine_arc(arc, -0.5, 0.5), _affine_arc(arc, 0.5, 0.5)


# ---------------------------------------------------------------------------
# the atlas


class Atlas:
    """A growing collection of advected charts with full lineage.

    Charts point to the arcs they grew from; arcs point to the chart
    whose edge produced them, or to the arc they were split from during
    remeshing.  Arcs retired by the collision guard are kept in
    ``stopped``.
    """

    def __init__(self, kind: str, masses: MassTriple,
                 meta: Optional[dict] = None):
        if kind not in ("stable", "unstable"):
            raise ValueError(f"kind must be stable or unstable, got {kind}")
        self.kind = kind
        self.m = masses
        self.p: PrimaryConfig = primaries(masses)
        self.arcs: dict[int, ArcRecord] = {}
        self.charts: dict[int, ChartRecord] = {}
        self.frontier: list[int] = []
        self.stopped: list[int] = []
        self.meta: dict = dict(meta or {})
        self._next_arc = 0
        self._next_chart = 0

    # -- construction

    @classmethod
    def from_manifold(cls, M: LocalManifold, masses: MassTriple,
                      n_arcs: int = 20, arc_order: Optional[int] = None,
                      R: float = 0.99,
                      meta: Optional[dict] = None) -> "Atlas":
        """Seed generation zero with the manifold's boundary mesh."""
        atlas = cls(M.kind, masses, meta=meta)
        for arc in boundary_mesh(M, R=R, n_arcs=n_arcs, arc_order=arc_order):
            atlas._add_arc(arc, generation=0, arc_time=0.0)
        return atlas

    def _add_arc(self, arc: BoundaryArc, generation: int, arc_time: float,
                 parent_chart: Optional[int] = None,
                 split_from: Optional[int] = None) -> int:
        arc_id = self._next_arc
        self._next_arc += 1
        self.arcs[arc_id] = ArcRecord(arc_id=arc_id, generation=generation,
                                      arc=arc, arc_time=arc_time,
                                      parent_chart=parent_chart,
                                      split_from=split_from)
        self.frontier.append(arc_id)
        return arc_id

    # -- growth

    def _refined(self, rec: ArcRecord, decay_tol: float, max_len: float,
                 max_depth: int, depth: int = 0) -> list[ArcRecord]:
        if arc_decay(rec.arc) <= decay_tol \
                and arc_length(rec.arc) <= max_len:
            return [rec]
        if depth >= max_depth:
            raise SubdivisionLimit(
                f"arc {rec.arc_id} still unfit after {max_depth} splits")
        out = []
        for half in subdivide_arc(rec.arc):
            arc_id = self._next_arc
            self._next_arc += 1
            child = ArcRecord(arc_id=arc_id, generation=rec.generation,
                              arc=half, arc_time=rec.arc_time,
                              parent_chart=rec.parent_chart,
                              split_from=rec.arc_id)
            self.arcs[arc_id] = child
            out.extend(self._refined(child, decay_tol, max_len, max_depth,
                                     depth + 1))
        return out

    def grow(self, generations: int = 1, *,
             orders: tuple[int, int] = (15, 50),
             tau: Optional[float] = None,
             tail_policy: str = "defect",
             tail_value: Optional[float] = None,
             delta_min: float = 0.05,
             decay_tol: float = 0.1,
             max_len: float = 0.5,
             max_depth: int = 12,
             tau_retries: int = 3) -> list[int]:
        """Advect the frontier, one chart per (possibly split) arc.

        Returns the ids of the new charts.  A chart that fails its
        error tube or the collision guard is retried with the time
        rescaling doubled, since halving the flow time shrinks both
        the range box and the accumulated error; after ``tau_retries``
        doublings the arc is retired to ``stopped``.  Surviving charts
        hand their collapsed time-1 edges to the next frontier.
        """
        new_charts: list[int] = []
        for _ in range(generations):
            frontier = [self.arcs[i] for i in self.frontier]
            self.frontier = []
            for rec in frontier:
                for piece in self._refined(rec, decay_tol, max_len,
                                           max_depth):
                    chart = self._advect(piece, orders, tau, tail_policy,
                                         tail_value, delta_min, tau_retries)
                    if chart is None:
                        self.stopped.append(piece.arc_id)
                        continue
                    chart_id = self._next_chart
                    self._next_chart += 1
                    self.charts[chart_id] = ChartRecord(
                        chart_id=chart_id, arc_id=piece.arc_id,
                        generation=piece.generation, chart=chart)
                    new_charts.append(chart_id)
                    self._add_arc(collapse_time_one(chart),
                                  generation=piece.generation + 1,
                                  arc_time=chart.accumulated_time,
                                  parent_chart=chart_id)
        return new_charts

    def _advect(self, piece: ArcRecord, orders: tuple[int, int],
                tau: Optional[float], tail_policy: str,
                tail_value: Optional[float], delta_min: float,
                tau_retries: int) -> Optional[FlowChart]:
        base = tau if tau is not None else \
            choose_tau(piece.arc, self.m, self.p, orders[0])
        for attempt in range(tau_retries + 1):
            try:
                chart = flow_line(
                    piece.arc, self.m, self.p, orders=orders,
                    tau=base * 2.0 ** attempt, tail_policy=tail_policy,
                    tail_value=tail_value, source_arc=piece.arc_id,
                    start_time=piece.arc_time)
                check_collision(chart, self.p, delta_min=delta_min)
                return chart
            except CollisionDomain:
                continue
        return None

    # -- persistence

    def save(self, path) -> None:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "masses": list(self.m.as_floats()),
            "meta": self.meta,
            "frontier": list(self.frontier),
            "stopped": list(self.stopped),
            "next_arc_id": self._next_arc,
            "next_chart_id": self._next_chart,
            "arcs": [_arc_to_json(rec)
                     for rec in sorted(self.arcs.values(),
                                       key=lambda r: r.arc_id)],
            "charts": [_chart_to_json(rec)
                       for rec in sorted(self.charts.values(),
                                         key=lambda r: r.chart_id)],
        }
        with open(path, "w") as f:
            json.dump(doc, f)

    @classmethod
    def load(cls, path) -> "Atlas":
        with open(path) as f:
            doc = json.load(f)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionMismatch(
                f"expected atlas schema {SCHEMA_VERSION}, "
                f"got {doc.get('schema_version')}")
        masses = MassTriple.from_floats(*doc["masses"])
        atlas = cls(doc["kind"], masses, meta=doc["meta"])
        atlas.frontier = list(doc["frontier"])
        atlas.stopped = list(doc["stopped"])
        atlas._next_arc = doc["next_arc_id"]
        atlas._next_chart = doc["next_chart_id"]
        for d in doc["arcs"]:
            rec = _arc_from_json(d)
            atlas.arcs[rec.arc_id] = rec
        for d in doc["charts"]:
            rec = _chart_from_json(d)
            atlas.charts[rec.chart_id] = rec
        return atlas

    # -- export

    def export_csv(self, path, n_s: int = 5, n_t: int = 5) -> None:
        """Midpoint samples of every chart on an (s, t) grid.

        Time samples run over [0, 1]: the advected region between the
        source arc and the frontier edge.
        """
        with open(path, "w", newline="") as f:
            wr = csv.writer(f)
            wr.writerow(["chart_id", "s", "t", "x", "xdot", "y", "ydot"])
            for rec in sorted(self.charts.values(),
                              key=lambda r: r.chart_id):
                for s in np.linspace(-1.0, 1.0, n_s):
                    zs = CInterval(Interval.from_value(float(s)))
                    for t in np.linspace(0.0, 1.0, n_t):
                        zt = CInterval(Interval.from_value(float(t)))
                        vals = rec.chart.Gamma.eval_box(zs, zt)
                        wr.writerow([rec.chart_id, float(s), float(t),
                                     *(vals[i].re.mid for i in range(4))])


# ---------------------------------------------------------------------------
# JSON forms


def _series_to_json(S: Series2) -> dict:
    sc = complex(S.scale)
    return {
        "scale": [sc.real, sc.imag],
        "tau": S.tau,
        "tail": S.tail,
        "real_symmetric": S.real_symmetric,
        "components": [{"rlo": c.rlo.tolist(), "rhi": c.rhi.tolist(),
                        "ilo": c.ilo.tolist(), "ihi": c.ihi.tolist()}
                       for c in S.components],
    }


def _series_from_json(d: dict) -> Series2:
    comps = tuple(ScalarSeries2(np.array(c["rlo"]), np.array(c["rhi"]),
                                np.array(c["ilo"]), np.array(c["ihi"]))
                  for c in d["components"])
    return Series2(comps, scale=complex(d["scale"][0], d["scale"][1]),
                   tau=d["tau"], real_symmetric=d["real_symmetric"],
                   tail=d["tail"])


def _arc_to_json(rec: ArcRecord) -> dict:
    pre = rec.arc.preimage
    return {
        "arc_id": rec.arc_id,
        "generation": rec.generation,
        "arc_time": rec.arc_time,
        "parent_chart": rec.parent_chart,
        "split_from": rec.split_from,
        "kind": rec.arc.kind,
        "preimage": None if pre is None else
            [[pre[0].real, pre[0].imag], [pre[1].real, pre[1].imag]],
        "series": _series_to_json(rec.arc.gamma),
    }


def _arc_from_json(d: dict) -> ArcRecord:
    pre = d["preimage"]
    arc = BoundaryArc(
        gamma=_series_from_json(d["series"]), kind=d["kind"],
        preimage=None if pre is None else
            (complex(pre[0][0], pre[0][1]), complex(pre[1][0], pre[1][1])))
    return ArcRecord(arc_id=d["arc_id"], generation=d["generation"],
                     arc=arc, arc_time=d["arc_time"],
                     parent_chart=d["parent_chart"],
                     split_from=d["split_from"])


def _chart_to_json(rec: ChartRecord) -> dict:
    ch = rec.chart
    return {
        "chart_id": rec.chart_id,
        "arc_id": rec.arc_id,
        "generation": rec.generation,
        "kind": ch.kind,
        "tail_policy": ch.tail_policy,
        "defect": ch.defect,
        "source_arc": ch.source_arc,
        "accumulated_time": ch.accumulated_time,
        "series": _series_to_json(ch.Gamma),
    }


def _chart_from_json(d: dict) -> ChartRecord:
    chart = FlowChart(Gamma=_series_from_json(d["series"]), kind=d["kind"],
                      tail_policy=d["tail_policy"], defect=d["defect"],
                      source_arc=d["source_arc"],
                      accumulated_time=d["accumulated_time"])
    return ChartRecord(chart_id=d["chart_id"], arc_id=d["arc_id"],
                       generation=d["generation"], chart=chart)
