"""Rigorous Taylor advection of material lines.

A boundary arc gamma(s) is carried into a space-time chart
Gamma(s, t) = Phi(gamma(s), t / tau) by matching powers of the rescaled
time variable: tau dGamma/dt = F(Gamma) becomes the recursion
Gamma_{m,n+1} = b_mn / (tau (n + 1)), with b_mn the Cauchy-product
coefficients of the lifted polynomial field.  The product grids are
filled one time-order column at a time, so the whole run costs the
same as a single full Cauchy product per memo grid.

Error accounting is by defect: the sup of tau dGamma/dt - F(Gamma)
over the domain square measures how far the polynomial chart is from
solving the equation, and a Gronwall tube argument folds it, together
with the source arc's tail, into the chart tail.  A non-rigorous
high-order reference integrator cross-checks everything but never
enters certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .crfbp import MassTriple, PrimaryConfig, field_point
from .errors import CollisionDomain, StepFailure, SymmetryViolation
from .interval import (
    CInterval,
    Interval,
    IntervalVector,
    _iadd_arr,
    _imul_arr,
    _isub_arr,
    _pad_sum,
    matrix_norm,
)
from .manifold import BoundaryArc
from .polyfield import DIM, State7, poly_DF, poly_F_point
from .taylor import ScalarSeries2, Series2, mag_sum_bound, product_column

ColumnQuad = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
BColumn = Callable[[Series2, int], ColumnQuad]


@dataclass(frozen=True)
class FlowChart:
    """A space-time chart of an advected material line.

    ``Gamma`` is the dim-7 series on the square [-1, 1]^2; s runs
    along the source arc and t along the flow, rescaled so that t = 1
    lies 1 / tau flow-time units from the arc.  The sign of
    ``Gamma.tau`` records the advection direction: negative for stable
    charts, which grow in backward time.
    """

    Gamma: Series2
    kind: str
    tail_policy: str = "defect"
    defect: Optional[float] = None
    source_arc: Optional[int] = None
    accumulated_time: float = 0.0

    def __post_init__(self):
        if self.kind not in ("stable", "unstable"):
            raise ValueError(f"kind must be stable or unstable, got {self.kind}")
        if self.Gamma.dim != DIM:
            raise ValueError("flow chart series must have 7 components")

    @property
    def tau(self) -> float:
        return self.Gamma.tau

    @property
    def tail(self) -> float:
        return self.Gamma.tail


# ---------------------------------------------------------------------------
# the recursion engine


def taylor_flow(gamma: Series2, b_column: BColumn, N: int,
                tau: float) -> Series2:
    """Integrate tau dGamma/dt = F(Gamma) by the coefficient recursion.

    ``b_column(partial, n)`` must return the field coefficients of
    t-order n as (re_lo, re_hi, im_lo, im_hi) arrays of shape
    (dim, M + 1), reading only columns 0..n of the partially built
    series it is handed; column n + 1 of the solution is then
    b / (tau (n + 1)).  The field is supplied by the caller, so
    harness fields (constant, linear) exercise the engine exactly.
    """
    if N < 1:
        raise ValueError("time order N must be at least 1")
    if tau == 0.0 or not math.isfinite(tau):
        raise ValueError("tau must be finite and nonzero")
    if gamma.orders[1] != 0:
        raise ValueError("initial line must have time order 0")
    M = gamma.orders[0]
    out = Series2.zeros(gamma.dim, M, N, scale=gamma.scale, tau=tau,
                        real_symmetric=False, tail=gamma.tail)
    for c, c0 in zip(out.components, gamma.components):
        c.rlo[:, 0] = c0.rlo[:, 0]
        c.rhi[:, 0] = c0.rhi[:, 0]
        c.ilo[:, 0] = c0.ilo[:, 0]
        c.ihi[:, 0] = c0.ihi[:, 0]
    tau_iv = Interval.from_value(tau)
    for n in range(N):
        brl, brh, bil, bih = b_column(out, n)
        inv = Interval.from_value(1.0) / (tau_iv * float(n + 1))
        rlo, rhi = _imul_arr(brl, brh, inv.lo, inv.hi)
        ilo, ihi = _imul_arr(bil, bih, inv.lo, inv.hi)
        for i, comp in enumerate(out.components):
            comp.rlo[:, n + 1] = rlo[i]
            comp.rhi[:, n + 1] = rhi[i]
            comp.ilo[:, n + 1] = ilo[i]
            comp.ihi[:, n + 1] = ihi[i]
    return out


class _FieldRecursion:
    """Columnwise memo grids for the lifted field's Cauchy products.

    Per body: squares and cubes of the reciprocal distance, the shifted
    positions times the cube, and the radial factor
    g = (u1 - x_j) u2 + (u3 - y_j) u4.  Each call to ``b_column``
    absorbs one new column of the partial chart and fills the matching
    column of every product, reading only coefficients of equal or
    lower time order.
    """

    def __init__(self, m: MassTriple, p: PrimaryConfig, M: int, N: int):
        self.p = p
        self.masses = m.as_floats()
        self.M = M
        self.N = N

        def grids():
            return [ScalarSeries2.zeros(M, N) for _ in range(3)]

        self.dx = grids()
        self.dy = grids()
        self.sq = grids()
        self.cu = grids()
        self.dxcu = grids()
        self.dycu = grids()
        self.g = grids()
        self.cug = grids()

    def b_column(self, G: Series2, n: int) -> ColumnQuad:
        M = self.M
        u1, u2, u3, u4 = G.components[:4]

        def col(s: ScalarSeries2) -> ColumnQuad:
            return s.rlo[:, n], s.rhi[:, n], s.ilo[:, n], s.ihi[:, n]

        def put(dst: ScalarSeries2, quad: ColumnQuad) -> None:
            dst.rlo[:, n], dst.rhi[:, n], dst.ilo[:, n], dst.ihi[:, n] = quad

        for j in range(3):
            for src, dst in ((u1, self.dx[j]), (u3, self.dy[j])):
                put(dst, col(src))
            if n == 0:
                px, py = self.p.positions[j]
                self.dx[j].set_coeff(0, 0, u1.coeff(0, 0) - CInterval(px))
                self.dy[j].set_coeff(0, 0, u3.coeff(0, 0) - CInterval(py))
        for j in range(3):
            w = G.components[4 + j]
            put(self.sq[j], product_column(w, w, n, M))
            put(self.cu[j], product_column(self.sq[j], w, n, M))
            put(self.dxcu[j], product_column(self.dx[j], self.cu[j], n, M))
            put(self.dycu[j], product_column(self.dy[j], self.cu[j], n, M))
            g1 = product_column(self.dx[j], u2, n, M)
            g2 = product_column(self.dy[j], u4, n, M)
            put(self.g[j], (*_iadd_arr(g1[0], g1[1], g2[0], g2[1]),
                            *_iadd_arr(g1[2], g1[3], g2[2], g2[3])))
            put(self.cug[j], product_column(self.cu[j], self.g[j], n, M))
        rl = np.zeros((DIM, M + 1))
        rh = np.zeros((DIM, M + 1))
        il = np.zeros((DIM, M + 1))
        ih = np.zeros((DIM, M + 1))
        rl[0], rh[0], il[0], ih[0] = col(u2)
        rl[2], rh[2], il[2], ih[2] = col(u4)
        b1r = _iadd_arr(*_imul_arr(u4.rlo[:, n], u4.rhi[:, n], 2.0, 2.0),
                        u1.rlo[:, n], u1.rhi[:, n])
        b1i = _iadd_arr(*_imul_arr(u4.ilo[:, n], u4.ihi[:, n], 2.0, 2.0),
                        u1.ilo[:, n], u1.ihi[:, n])
        b3r = _iadd_arr(*_imul_arr(u2.rlo[:, n], u2.rhi[:, n], -2.0, -2.0),
                        u3.rlo[:, n], u3.rhi[:, n])
        b3i = _iadd_arr(*_imul_arr(u2.ilo[:, n], u2.ihi[:, n], -2.0, -2.0),
                        u3.ilo[:, n], u3.ihi[:, n])
        for j in range(3):
            mj = self.masses[j]
            cx, cy = self.dxcu[j], self.dycu[j]
            b1r = _isub_arr(*b1r, *_imul_arr(cx.rlo[:, n], cx.rhi[:, n],
                                             mj, mj))
            b1i = _isub_arr(*b1i, *_imul_arr(cx.ilo[:, n], cx.ihi[:, n],
                                             mj, mj))
            b3r = _isub_arr(*b3r, *_imul_arr(cy.rlo[:, n], cy.rhi[:, n],
                                             mj, mj))
            b3i = _isub_arr(*b3i, *_imul_arr(cy.ilo[:, n], cy.ihi[:, n],
                                             mj, mj))
            cg = self.cug[j]
            rl[4 + j], rh[4 + j] = -cg.rhi[:, n], -cg.rlo[:, n]
            il[4 + j], ih[4 + j] = -cg.ihi[:, n], -cg.ilo[:, n]
        rl[1], rh[1] = b1r
        il[1], ih[1] = b1i
        rl[3], rh[3] = b3r
        il[3], ih[3] = b3i
        return rl, rh, il, ih

    def beyond_grid_bounds(self, G: Series2) -> list[float]:
        """Per-row bound on true field content outside the (M, N) grid.

        Tracks, for every memo grid, a bound on the coefficient mass
        its truncation discarded.  A chained product inherits the loss
        of a factor scaled by the other factor's 1-norm: truncation
        only drops high orders and multiplication only raises them, so
        lost content can never land back on the grid, and the in-grid
        coefficients stay exact for the full composition.
        """
        M, N = self.M, self.N
        m2 = _mag_grid(G.components[1])
        m4 = _mag_grid(G.components[3])
        n2 = float(m2.sum()) * _NORM_PAD
        n4 = float(m4.sum()) * _NORM_PAD
        out = [0.0] * DIM
        for j in range(3):
            mw = _mag_grid(G.components[4 + j])
            mdx = _mag_grid(self.dx[j])
            mdy = _mag_grid(self.dy[j])
            msq = _mag_grid(self.sq[j])
            mcu = _mag_grid(self.cu[j])
            mg = _mag_grid(self.g[j])
            nw = float(mw.sum()) * _NORM_PAD
            ncu = float(mcu.sum()) * _NORM_PAD
            ng = float(mg.sum()) * _NORM_PAD
            lost_sq = _conv_tail(mw, mw, M, N)
            lost_cu = _conv_tail(msq, mw, M, N) + lost_sq * nw
            lost_g = _conv_tail(mdx, m2, M, N) + _conv_tail(mdy, m4, M, N)
            mj = self.masses[j]
            ndx = float(mdx.sum()) * _NORM_PAD
            ndy = float(mdy.sum()) * _NORM_PAD
            out[1] += mj * (_conv_tail(mdx, mcu, M, N)
                            + lost_cu * ndx) * _NORM_PAD
            out[3] += mj * (_conv_tail(mdy, mcu, M, N)
                            + lost_cu * ndy) * _NORM_PAD
            out[4 + j] = (_conv_tail(mcu, mg, M, N) + lost_cu * (ng + lost_g)
                          + lost_g * ncu) * _NORM_PAD
        return out


_NORM_PAD = 1.0 + 1e-10


def _mag_grid(s: ScalarSeries2) -> np.ndarray:
    """Entrywise upper bound on coefficient magnitudes."""
    re = np.maximum(np.abs(s.rlo), np.abs(s.rhi))
    im = np.maximum(np.abs(s.ilo), np.abs(s.ihi))
    return np.hypot(re, im) * _NORM_PAD


def _conv_tail(amag: np.ndarray, bmag: np.ndarray, M: int, N: int) -> float:
    """Bound on a product's coefficient mass landing outside (M, N).

    Pairs the factors' row and column 1-norm marginals: a product term
    of total s-order above M contributes to the row-marginal
    convolution past index M, likewise in t past N, so the two
    convolution tails together cover every out-of-grid term at least
    once.  Plain float sums of nonnegatives, padded far beyond their
    worst-case rounding.
    """
    t_tail = np.convolve(amag.sum(axis=0), bmag.sum(axis=0))[N + 1:].sum()
    s_tail = np.convolve(amag.sum(axis=1), bmag.sum(axis=1))[M + 1:].sum()
    return float(t_tail + s_tail) * _NORM_PAD


# ---------------------------------------------------------------------------
# arcs in, charts out


def _arc_series(arc: BoundaryArc, M: int) -> Series2:
    """Arc coefficients as an exactly real series padded to order M.

    The true arc is a real-analytic curve, so its coefficients are
    real: every imaginary enclosure must straddle zero and is replaced
    by exact zero, which keeps all downstream grids exactly real.
    """
    Ma, Na = arc.gamma.orders
    if Na != 0:
        raise ValueError("boundary arc must have time order 0")
    if M < Ma:
        raise ValueError(f"spatial order {M} is below the arc order {Ma}")
    comps = []
    for i, c in enumerate(arc.gamma.components):
        if np.any(c.ilo > 0.0) or np.any(c.ihi < 0.0):
            raise SymmetryViolation(
                f"arc component {i} has an imaginary part excluding zero")
        rlo = np.zeros((M + 1, 1))
        rhi = np.zeros((M + 1, 1))
        rlo[: Ma + 1, 0] = c.rlo[:, 0]
        rhi[: Ma + 1, 0] = c.rhi[:, 0]
        comps.append(ScalarSeries2(rlo, rhi, np.zeros((M + 1, 1)),
                                   np.zeros((M + 1, 1))))
    return Series2(tuple(comps), scale=arc.gamma.scale, tau=1.0,
                   real_symmetric=False, tail=arc.gamma.tail)


def _column_mag(G: Series2, n: int) -> float:
    best = 0.0
    for c in G.components:
        mags = (np.maximum(np.abs(c.rlo[:, n]), np.abs(c.rhi[:, n]))
                + np.maximum(np.abs(c.ilo[:, n]), np.abs(c.ihi[:, n])))
        best = max(best, float(np.max(mags)))
    return best


def choose_tau(arc: BoundaryArc, m: MassTriple, p: PrimaryConfig, M: int,
               n_pilot: int = 8, target_ratio: float = 0.5,
               tau_floor: float = 1e-6) -> float:
    """Pick the time rescaling from a short pilot run.

    Column norms of a Taylor flow decay like (tau R)^-n with R the
    flow-time convergence radius, so running a pilot at tau = 1 and
    dividing the trailing column ratio by ``target_ratio`` leaves the
    production run with successive-column ratios near the target.
    """
    sign = -1.0 if arc.kind == "stable" else 1.0
    rec = _FieldRecursion(m, p, M, n_pilot)
    pilot = taylor_flow(_arc_series(arc, M), rec.b_column, n_pilot, sign)
    norms = [_column_mag(pilot, n) for n in range(n_pilot + 1)]
    ratios = [norms[k + 1] / norms[k]
              for k in range(n_pilot - 2, n_pilot) if norms[k] > 0.0]
    if not ratios:
        return 1.0
    return max(max(ratios) / target_ratio, tau_floor)


def flow_line(arc: BoundaryArc, m: MassTriple, p: PrimaryConfig,
              orders: tuple[int, int] = (15, 50),
              tau: Optional[float] = None, *,
              tail_policy: str = "defect",
              tail_value: Optional[float] = None,
              source_arc: Optional[int] = None,
              start_time: float = 0.0) -> FlowChart:
    """Advect a boundary arc into a space-time chart.

    ``tau`` is the positive time rescaling; stable arcs advect in
    backward time, recorded by the sign of the stored ``Gamma.tau``.
    When omitted it is chosen so the trailing column ratio is about
    one half.  Tail policy "defect" folds the source tail and the ODE
    defect through a Gronwall tube over the chart's range box;
    "reported" stores the supplied constant.
    """
    M, N = orders
    if tail_policy not in ("reported", "defect"):
        raise ValueError(f"unknown tail policy {tail_policy!r}")
    if tau is not None and not tau > 0.0:
        raise ValueError("tau must be positive")
    if tau is None:
        tau = choose_tau(arc, m, p, M)
    sign = -1.0 if arc.kind == "stable" else 1.0
    rec = _FieldRecursion(m, p, M, N)
    G = taylor_flow(_arc_series(arc, M), rec.b_column, N, sign * tau)
    if tail_policy == "reported":
        defect = None
        tail = float(tail_value) if tail_value is not None else 0.0
    else:
        defect = _defect_bound(m, p, G)
        tail = propagated_tail(m, p, G, arc.gamma.tail, defect)
    G = Series2(G.components, scale=G.scale, tau=G.tau,
                real_symmetric=False, tail=tail)
    return FlowChart(Gamma=G, kind=arc.kind, tail_policy=tail_policy,
                     defect=defect, source_arc=source_arc,
                     accumulated_time=start_time + 1.0 / (sign * tau))


# ---------------------------------------------------------------------------
# defect accounting


def _defect_parts(m: MassTriple, p: PrimaryConfig, G: Series2
                  ) -> tuple[list[ScalarSeries2], list[float]]:
    """In-grid residual series of tau dGamma/dt - F(Gamma), plus the
    per-row bound on field content beyond the grid."""
    M, N = G.orders
    rec = _FieldRecursion(m, p, M, N)
    tau_iv = Interval.from_value(G.tau)
    res = [ScalarSeries2.zeros(M, N) for _ in range(DIM)]
    for n in range(N + 1):
        brl, brh, bil, bih = rec.b_column(G, n)
        if n < N:
            tn = tau_iv * float(n + 1)
            for i, c in enumerate(G.components):
                r = res[i]
                lhs = _imul_arr(c.rlo[:, n + 1], c.rhi[:, n + 1],
                                tn.lo, tn.hi)
                r.rlo[:, n], r.rhi[:, n] = _isub_arr(*lhs, brl[i], brh[i])
                lhs = _imul_arr(c.ilo[:, n + 1], c.ihi[:, n + 1],
                                tn.lo, tn.hi)
                r.ilo[:, n], r.ihi[:, n] = _isub_arr(*lhs, bil[i], bih[i])
        else:
            for i, r in enumerate(res):
                r.rlo[:, n], r.rhi[:, n] = -brh[i], -brl[i]
                r.ilo[:, n], r.ihi[:, n] = -bih[i], -bil[i]
    return res, rec.beyond_grid_bounds(G)


def defect_series(m: MassTriple, p: PrimaryConfig,
                  chart: FlowChart) -> list[ScalarSeries2]:
    """In-grid coefficients of the ODE defect tau dGamma/dt - F(Gamma).

    Recomputed from the finished grids, independently of the recursion
    that built them; through t-order N - 1 every coefficient must
    straddle zero, and the t-order N column is the leading truncation
    content.
    """
    res, _ = _defect_parts(m, p, chart.Gamma)
    return res


def _defect_bound(m: MassTriple, p: PrimaryConfig, G: Series2) -> float:
    res, beyond = _defect_parts(m, p, G)
    return max(mag_sum_bound(r) + b for r, b in zip(res, beyond))


def defect_bound(m: MassTriple, p: PrimaryConfig, chart: FlowChart) -> float:
    """Rigorous sup bound of the ODE defect over the domain square.

    Sums the in-grid residual magnitudes and the out-of-grid product
    content; the latter uses coefficient-norm products, so the bound
    stays cheap at high orders.
    """
    return _defect_bound(m, p, chart.Gamma)


def range_box(G: Series2, tiles: int = 64) -> IntervalVector:
    """Enclosure of the chart's real range over the domain square.

    Interval Horner is uselessly wide at these orders, so the box
    comes from float samples of the coefficient-midpoint polynomial at
    tile centers, padded by a mean-value slack: tile half-width times
    global derivative sups, the coefficient radii, the chart tail and
    a worst-case rounding bound for the sample evaluation.
    """
    M, N = G.orders
    h = (1.0 / tiles) * (1.0 + 1e-12)
    centers = np.linspace(-1.0 + 1.0 / tiles, 1.0 - 1.0 / tiles, tiles)
    VS = np.vander(centers, M + 1, increasing=True)
    VT = np.vander(centers, N + 1, increasing=True)
    mrow = np.arange(M + 1, dtype=float)[:, None]
    ncol = np.arange(N + 1, dtype=float)[None, :]
    ops = (M + 1) * (N + 1) + M + N + 8
    out = []
    for c in G.components:
        mid = 0.5 * (c.rlo + c.rhi)
        vals = VS @ mid @ VT.T
        mags = np.maximum(np.abs(c.rlo), np.abs(c.rhi))
        sups = h * float(np.sum((mrow + ncol) * mags))
        radii = 0.5 * float(np.sum(c.rhi - c.rlo))
        fperr = ops * 1.2e-16 * max(1.0, float(np.sum(np.abs(mid))))
        slack = sups + radii + fperr + G.tail
        out.append(Interval(
            math.nextafter(float(np.min(vals)) - slack, -math.inf),
            math.nextafter(float(np.max(vals)) + slack, math.inf)))
    return IntervalVector.from_intervals(out)


def propagated_tail(m: MassTriple, p: PrimaryConfig, G: Series2,
                    source_tail: float, defect: float,
                    tiles: int = 64) -> float:
    """Gronwall tube bound for the chart's distance to the true flow.

    With eps0 the source-arc tail, D the defect and L a Jacobian
    inf-norm bound over the range box inflated by a tube radius delta,
    err(T) <= eps0 e^(L T) + D (e^(L T) - 1) / L over the chart's
    flow-time span T = 1 / |tau|.  The bound is valid once it is below
    delta, since the true trajectories then never leave the tube; the
    radius is inflated geometrically until that closes.
    """
    box = range_box(G, tiles=tiles)
    T = Interval.from_value(1.0) / Interval.from_value(abs(G.tau))
    eps0 = Interval.from_value(source_tail)
    D = Interval.from_value(defect)
    delta = max(1e-9, 8.0 * (source_tail + defect))
    for _ in range(40):
        pad = Interval(-delta, delta)
        fat = IntervalVector.from_intervals(
            [box[i] + pad for i in range(DIM)])
        L = matrix_norm(poly_DF(m, p, State7.from_vector(fat)))
        if (L * T).hi > 700.0:
            # exp would overflow, and wider tubes only grow faster
            break
        growth = (L * T).exp()
        if L.lo <= 0.0:
            extra = D * T * growth
        else:
            extra = D * (growth - Interval.from_value(1.0)) / L
        tail = (eps0 * growth + extra).hi
        if tail < delta:
            return float(tail)
        delta *= 4.0
    raise CollisionDomain(
        "Gronwall tube failed to close; the chart's range box is too "
        "large or too close to a primary for a useful Jacobian bound")


def check_collision(chart: FlowChart, p: PrimaryConfig,
                    delta_min: float = 0.05, tiles: int = 64) -> None:
    """Reject charts whose position range approaches a primary.

    Near-collisions blow up the reciprocal-distance components and
    erode every downstream bound; raising here lets an atlas drop or
    subdivide the offending chart.
    """
    box = range_box(chart.Gamma, tiles=tiles)
    x, y = box[0], box[2]
    for j, (px, py) in enumerate(p.positions):
        dx = x - px
        dy = y - py
        d2 = dx * dx + dy * dy
        if d2.lo < delta_min ** 2:
            raise CollisionDomain(
                f"chart range box comes within {delta_min} of primary {j}")


# ---------------------------------------------------------------------------
# frontier restriction


def collapse_time_one(chart: FlowChart) -> BoundaryArc:
    """Restrict a chart to its forward time edge t = 1 as a new arc.

    The s-coefficients of Gamma(s, 1) are the grid's row sums; the
    chart tail bounds the whole square, so the arc inherits it
    unchanged.  The preimage is no longer a chord, so none is stored.
    """
    G = chart.Gamma
    comps = []
    for c in G.components:
        rlo, rhi = _pad_sum(c.rlo, c.rhi, axis=1)
        ilo, ihi = _pad_sum(c.ilo, c.ihi, axis=1)
        comps.append(ScalarSeries2(rlo[:, None], rhi[:, None],
                                   ilo[:, None], ihi[:, None]))
    gamma = Series2(tuple(comps), scale=G.scale, tau=1.0,
                    real_symmetric=False, tail=G.tail)
    return BoundaryArc(gamma=gamma, kind=chart.kind, preimage=None)


# ---------------------------------------------------------------------------
# reference integration (oracle only)


def reference_integrate(state, t: float, m: MassTriple, p: PrimaryConfig,
                        tol: float = 1e-12,
                        collision_radius: float = 1e-5) -> np.ndarray:
    """Adaptive high-order float integration for cross-checks.

    ``state`` is the reduced (x, xdot, y, ydot) or the lifted
    7-component vector; the dimension picks the field.  Results never
    enter certificates.
    """
    y0 = np.asarray(state, dtype=float)
    pos = p.position_array()
    masses = np.array(m.as_floats())
    if y0.shape == (4,):
        def rhs(_t, y):
            return field_point(pos, masses, y)
    elif y0.shape == (7,):
        def rhs(_t, y):
            return poly_F_point(pos, masses, y)
    else:
        raise ValueError(f"state must have 4 or 7 components, got {y0.shape}")
    for j in range(3):
        if np.hypot(y0[0] - pos[j, 0], y0[2] - pos[j, 1]) < collision_radius:
            raise CollisionDomain(f"initial state is on top of primary {j}")
    if t == 0.0:
        return y0.copy()
    events = []
    for j in range(3):
        def ev(_t, y, xj=pos[j, 0], yj=pos[j, 1]):
            return (y[0] - xj) ** 2 + (y[2] - yj) ** 2 - collision_radius ** 2
        ev.terminal = True
        ev.direction = -1.0
        events.append(ev)
    sol = solve_ivp(rhs, (0.0, float(t)), y0, method="DOP853",
                    rtol=tol, atol=tol, events=events)
    if sol.status == 1:
        raise CollisionDomain(
            f"trajectory entered the {collision_radius} neighborhood "
            "of a primary")
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y[:, -1]
