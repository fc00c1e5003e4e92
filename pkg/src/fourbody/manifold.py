"""Local invariant manifolds at the saddle-focus equilibrium.

The stable/unstable manifold is sought as a two-variable Taylor series
P(z1, z2) conjugating the linear flow exp(t diag(lam1, lam2)) to the
lifted polynomial field: lam1 z1 d1 P + lam2 z2 d2 P = F(P).  Matching
coefficients turns this into one linear "homological" equation per
coefficient, [DF(u0) - (m lam1 + n lam2) I] a_mn = -c_mn, where c_mn
collects products of strictly lower-order data.  The builder here keeps
unsolved coefficient slots at zero, so evaluating the field's product
coefficients on the partially built grids yields exactly those
lower-order ("hat") sums; squares and cubes of the reciprocal-distance
components are memoized and corrected in place as each order lands.

The rest of the module extracts real charts from the complex conjugate
parameterization, meshes the fundamental-domain boundary into secant
arcs with a parameter-plane transversality certificate, and provides
the polydisc derivative bounds used to fold truncation tails into
downstream estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .crfbp import EigenData, MassTriple, PrimaryConfig, State4, eigen_data
from .errors import FourbodyError, SymmetryViolation, TangencyDetected
from .interval import (
    CInterval,
    Interval,
    IntervalMatrix,
    IntervalVector,
    _iadd_arr,
    verified_solve_complex,
)
from .nk import certify_equilibrium
from .polyfield import DIM, State7, embed_R, lift_eigvector, poly_DF
from .taylor import (
    ScalarSeries2,
    Series2,
    _pad_to,
    cauchy_product,
    mag_sum_bound,
    product_coeff,
)

_PI = Interval(math.pi, np.nextafter(math.pi, 4.0))


@dataclass(frozen=True)
class LocalManifold:
    """A validated local manifold parameterization.

    ``P`` is the dim-7 series in the scaled conjugacy variables; its
    ``tail`` field carries the truncation bound assigned by
    ``tail_policy`` ("reported" for a user-supplied constant, "defect"
    for the rigorous sup of the invariance defect over the unit
    polydisc).
    """

    P: Series2
    kind: str
    eigen: EigenData
    scale: complex
    lambda1: CInterval
    lambda2: CInterval
    equilibrium: State7
    tail_policy: str = "defect"

    def __post_init__(self):
        if self.kind not in ("stable", "unstable"):
            raise ValueError(f"kind must be stable or unstable, got {self.kind}")
        if self.P.dim != DIM:
            raise ValueError("manifold series must have 7 components")

    @property
    def order(self) -> int:
        return self.P.orders[0]


@dataclass(frozen=True)
class BoundaryArc:
    """One secant chord of the fundamental-domain boundary, pushed
    through the parameterization into a univariate phase-space arc."""

    gamma: Series2                       # dim 7, orders (M_arc, 0)
    kind: str
    # chord endpoints in the z1 disk; None for arcs collapsed from
    # advected charts, whose preimage is no longer a chord
    preimage: Optional[tuple[complex, complex]] = None


# ---------------------------------------------------------------------------
# the homological solver


class _HomologicalBuilder:
    """Order-by-order state for Taylor coefficients of the conjugacy.

    Grids: the seven components of P, the shifted positions
    dx_j = P1 - x_j and dy_j = P3 - y_j, and per-primary memos for
    w_j^2, w_j^3 and g_j = dx_j * P2 + dy_j * P4.  Unsolved slots stay
    zero, so product coefficients over these grids are the hat sums of
    the homological right-hand side.
    """

    def __init__(self, m: MassTriple, p: PrimaryConfig, u0: State7,
                 lam1: CInterval, lam2: CInterval, N: int):
        self.masses = (m.m1, m.m2, m.m3)
        self.p = p
        self.lam1 = lam1
        self.lam2 = lam2
        self.N = N
        self.comp = [ScalarSeries2.zeros(N, N) for _ in range(DIM)]
        self.dx = [ScalarSeries2.zeros(N, N) for _ in range(3)]
        self.dy = [ScalarSeries2.zeros(N, N) for _ in range(3)]
        self.sq = [ScalarSeries2.zeros(N, N) for _ in range(3)]
        self.cube = [ScalarSeries2.zeros(N, N) for _ in range(3)]
        self.g = [ScalarSeries2.zeros(N, N) for _ in range(3)]
        self.df = poly_DF(m, p, u0)

    def write(self, mm: int, nn: int, vals: Sequence[CInterval]) -> None:
        for i in range(DIM):
            self.comp[i].set_coeff(mm, nn, vals[i])
        for j in range(3):
            px, py = self.p.positions[j]
            cx, cy = vals[0], vals[2]
            if mm == 0 and nn == 0:
                cx = cx - CInterval(px)
                cy = cy - CInterval(py)
            self.dx[j].set_coeff(mm, nn, cx)
            self.dy[j].set_coeff(mm, nn, cy)

    def seed_memos(self, mm: int, nn: int) -> None:
        """Memo entries at an index whose component data is final."""
        for j in range(3):
            w = self.comp[4 + j]
            self.sq[j].set_coeff(mm, nn, product_coeff(w, w, mm, nn))
            self.cube[j].set_coeff(mm, nn, product_coeff(self.sq[j], w, mm, nn))
            self.g[j].set_coeff(
                mm, nn,
                product_coeff(self.dx[j], self.comp[1], mm, nn)
                + product_coeff(self.dy[j], self.comp[3], mm, nn))

    def finalize_memos(self, mm: int, nn: int,
                       vals: Sequence[CInterval]) -> None:
        """Correct the hat memo entries once a_mn has been written.

        The square picks up 2 w00 w_mn, the cube 3 w00^2 w_mn, and g the
        four bilinear terms that paired a_mn with a zeroth-order factor.
        """
        for j in range(3):
            w00 = self.comp[4 + j].coeff(0, 0)
            wmn = vals[4 + j]
            self.sq[j].set_coeff(
                mm, nn, self.sq[j].coeff(mm, nn) + w00 * wmn * 2.0)
            self.cube[j].set_coeff(
                mm, nn, self.cube[j].coeff(mm, nn) + w00 * w00 * wmn * 3.0)
            corr = (self.dx[j].coeff(0, 0) * vals[1]
                    + self.comp[1].coeff(0, 0) * vals[0]
                    + self.dy[j].coeff(0, 0) * vals[3]
                    + self.comp[3].coeff(0, 0) * vals[2])
            self.g[j].set_coeff(mm, nn, self.g[j].coeff(mm, nn) + corr)

    def c_vector(self, mm: int, nn: int) -> list[CInterval]:
        """The lower-order part of the field coefficient at (mm, nn).

        Assumes the memo slots at (mm, nn) currently hold hat values
        (seed_memos on zeroed component slots) and all lower slots are
        final.
        """
        zero = CInterval(Interval.from_value(0.0))
        c = [zero] * DIM
        acc2 = zero
        acc4 = zero
        for j in range(3):
            mj = self.masses[j]
            acc2 = acc2 - product_coeff(self.dx[j], self.cube[j], mm, nn) * mj
            acc4 = acc4 - product_coeff(self.dy[j], self.cube[j], mm, nn) * mj
            c[4 + j] = -product_coeff(self.cube[j], self.g[j], mm, nn)
        c[1] = acc2
        c[3] = acc4
        return c

    def solve_order(self, mm: int, nn: int) -> None:
        self.seed_memos(mm, nn)
        c = self.c_vector(mm, nn)
        mu = self.lam1 * float(mm) + self.lam2 * float(nn)
        are_lo = self.df.lo.copy()
        are_hi = self.df.hi.copy()
        aim_lo = np.zeros((DIM, DIM))
        aim_hi = np.zeros((DIM, DIM))
        for i in range(DIM):
            d = Interval(self.df.lo[i, i], self.df.hi[i, i]) - mu.re
            are_lo[i, i] = d.lo
            are_hi[i, i] = d.hi
            e = -mu.im
            aim_lo[i, i] = e.lo
            aim_hi[i, i] = e.hi
        b_re = IntervalVector.from_intervals([(-ci).re for ci in c])
        b_im = IntervalVector.from_intervals([(-ci).im for ci in c])
        sol_re, sol_im = verified_solve_complex(
            IntervalMatrix(are_lo, are_hi), IntervalMatrix(aim_lo, aim_hi),
            b_re, b_im)
        vals = [CInterval(sol_re[i], sol_im[i]) for i in range(DIM)]
        self.write(mm, nn, vals)
        self.finalize_memos(mm, nn, vals)


def solve_homological(m: MassTriple, p: PrimaryConfig, u0: State7,
                      v1: Sequence[CInterval], v2: Sequence[CInterval],
                      lam1: CInterval, lam2: CInterval, N: int) -> Series2:
    """Taylor coefficients of the conjugacy through the square grid (N, N).

    First-order data is installed verbatim; each higher coefficient
    comes from a verified solve of its homological equation, so the
    returned enclosures contain the coefficients of the exact formal
    solution.  Raises SingularEnclosure if a homological matrix cannot
    be certified regular, which would mean m lam1 + n lam2 collides
    with the spectrum of DF(u0) and contradicts the saddle-focus
    certificate.
    """
    if len(v1) != DIM or len(v2) != DIM:
        raise ValueError("first-order data must have 7 components")
    if N < 1:
        raise ValueError("order N must be at least 1")
    b = _HomologicalBuilder(m, p, u0, lam1, lam2, N)
    b.write(0, 0, [CInterval(ui) for ui in u0.u])
    b.write(1, 0, list(v1))
    b.write(0, 1, list(v2))
    for idx in ((0, 0), (1, 0), (0, 1)):
        b.seed_memos(*idx)
    for d in range(2, 2 * N + 1):
        for mm in range(max(0, d - N), min(N, d) + 1):
            b.solve_order(mm, d - mm)
    return Series2(tuple(b.comp), scale=1.0, tau=1.0, real_symmetric=True)


def param_equilibrium(m: MassTriple, p: PrimaryConfig, u0: State7,
                      v1: Sequence[CInterval], v2: Sequence[CInterval],
                      lam1: CInterval, lam2: CInterval, N: int, *,
                      kind: str, eigen: EigenData, scale: complex,
                      tail_policy: str = "defect",
                      tail_value: Optional[float] = None) -> LocalManifold:
    """Build a LocalManifold from explicit first-order data.

    The tail is assigned by policy: "reported" records the supplied
    constant, "defect" computes the sup of the invariance-equation
    defect of the finished series over the unit polydisc.
    """
    if tail_policy not in ("reported", "defect"):
        raise ValueError(f"unknown tail policy {tail_policy!r}")
    P = solve_homological(m, p, u0, v1, v2, lam1, lam2, N)
    if tail_policy == "reported":
        tail = float(tail_value) if tail_value is not None else 0.0
    else:
        residual = _residual_series(m, p, P, lam1, lam2,
                                    orders=(5 * N, 5 * N), fast=True)
        tail = max(mag_sum_bound(r) for r in residual)
    P = Series2(P.components, scale=scale, tau=1.0, real_symmetric=True,
                tail=tail)
    return LocalManifold(P=P, kind=kind, eigen=eigen, scale=scale,
                         lambda1=lam1, lambda2=lam2,
                         equilibrium=u0, tail_policy=tail_policy)


def local_manifold(m: MassTriple, p: PrimaryConfig, kind: str, N: int = 7,
                   scale: Optional[float] = None, target: float = 1e-10,
                   tail_policy: str = "defect",
                   tail_value: Optional[float] = None,
                   seed: tuple[float, float] = (0.93, 0.22)) -> LocalManifold:
    """Certify the equilibrium, then parameterize its local manifold.

    When no eigenvector scale is given, a pilot run at scale 0.1
    measures the top-order coefficient magnitude and the scale is
    adjusted so the order-N coefficients have magnitude near ``target``.
    """
    cert, xy = certify_equilibrium(p, m, seed=seed)
    if not cert.proven:
        raise FourbodyError(
            f"equilibrium certification failed: {cert.diagnostic}")
    r = cert.r_interval.lo
    x0 = State4(Interval.from_value(xy[0]) + Interval(-r, r),
                Interval.from_value(0.0),
                Interval.from_value(xy[1]) + Interval(-r, r),
                Interval.from_value(0.0))
    u0 = embed_R(p, x0)
    eig = eigen_data(p, m, x0)
    lam1 = eig.eigenvalue(kind, +1)
    lam2 = eig.eigenvalue(kind, -1)
    xi = lift_eigvector(p, x0, eig.eigenvector(kind, +1))
    if scale is None:
        pilot = 0.1
        v1 = tuple(c * pilot for c in xi)
        v2 = tuple(c.conj() for c in v1)
        P0 = solve_homological(m, p, u0, v1, v2, lam1, lam2, N)
        g_top = max(
            max(comp.coeff(mm, N - mm).abs().hi for comp in P0.components)
            for mm in range(N + 1))
        scale = pilot * (target / g_top) ** (1.0 / N)
    v1 = tuple(c * float(scale) for c in xi)
    v2 = tuple(c.conj() for c in v1)
    return param_equilibrium(m, p, u0, v1, v2, lam1, lam2, N, kind=kind,
                             eigen=eig, scale=complex(scale),
                             tail_policy=tail_policy, tail_value=tail_value)


# ---------------------------------------------------------------------------
# invariance defect


def field_series(m: MassTriple, p: PrimaryConfig, P: Series2,
                 orders: Optional[tuple[int, int]] = None,
                 fast: bool = False) -> list[ScalarSeries2]:
    """Coefficients of F(P) by full Cauchy products.

    The default truncates to P's own grid, which is exact for those
    coefficients.  The composition is a quintic polynomial in the
    components, so passing ``(5 M, 5 N)`` captures every coefficient;
    defect bounds need that full range.  Intermediate products are
    truncated to their own natural degrees, clamped to the request.
    ``fast`` selects the gamma-padded product sums for big grids.
    """
    M0, N0 = P.orders
    if orders is None:
        orders = (M0, N0)
    OM, ON = orders
    if OM < M0 or ON < N0:
        raise ValueError(f"field orders {orders} below the grid ({M0}, {N0})")

    def tgt(k: int) -> tuple[int, int]:
        return min(OM, k * M0), min(ON, k * N0)

    def fit(s: ScalarSeries2) -> ScalarSeries2:
        out = _pad_to(s, OM, ON)
        return out.copy() if out is s else out

    u1, u2, u3, u4 = P.components[0], P.components[1], P.components[2], \
        P.components[3]
    b = [None] * DIM
    b[0] = fit(u2)
    b[2] = fit(u4)
    b2 = fit(u4.scale(CInterval(2.0)) + u1)
    b4 = fit(u2.scale(CInterval(-2.0)) + u3)
    for j in range(3):
        px, py = p.positions[j]
        mj = (m.m1, m.m2, m.m3)[j]
        w = P.components[4 + j]
        dxj = u1.shift_const(-CInterval(px))
        dyj = u3.shift_const(-CInterval(py))
        sq = cauchy_product(w, w, orders=tgt(2), fast=fast)
        cu = cauchy_product(sq, w, orders=tgt(3), fast=fast)
        b2 = b2 - fit(cauchy_product(dxj, cu, orders=tgt(4),
                                     fast=fast).scale(CInterval(mj)))
        b4 = b4 - fit(cauchy_product(dyj, cu, orders=tgt(4),
                                     fast=fast).scale(CInterval(mj)))
        gj = (cauchy_product(dxj, u2, orders=tgt(2), fast=fast)
              + cauchy_product(dyj, u4, orders=tgt(2), fast=fast))
        b[4 + j] = fit(-cauchy_product(cu, gj, orders=tgt(5), fast=fast))
    b[1] = b2
    b[3] = b4
    return b


def _residual_series(m: MassTriple, p: PrimaryConfig, P: Series2,
                     lam1: CInterval, lam2: CInterval,
                     orders: Optional[tuple[int, int]] = None,
                     fast: bool = False) -> list[ScalarSeries2]:
    """(m lam1 + n lam2) a_mn - [F(P)]_mn, coefficient by coefficient.

    Beyond P's grid the series coefficient is zero and the residual is
    just the negated field coefficient.
    """
    M0, N0 = P.orders
    if orders is None:
        orders = (M0, N0)
    field = field_series(m, p, P, orders, fast=fast)
    out = []
    for i in range(DIM):
        res = ScalarSeries2.zeros(*orders)
        for mm in range(orders[0] + 1):
            for nn in range(orders[1] + 1):
                f = field[i].coeff(mm, nn)
                if mm <= M0 and nn <= N0:
                    mu = lam1 * float(mm) + lam2 * float(nn)
                    f = mu * P.components[i].coeff(mm, nn) - f
                else:
                    f = -f
                res.set_coeff(mm, nn, f)
        out.append(res)
    return out


def invariance_residual(m: MassTriple, p: PrimaryConfig,
                        M: LocalManifold) -> list[ScalarSeries2]:
    """Per-coefficient defect of the invariance equation.

    Recomputed from the finished grids with full Cauchy products, fully
    independent of the incremental memo path used by the builder; every
    coefficient enclosure must straddle zero.
    """
    return _residual_series(m, p, M.P, M.lambda1, M.lambda2)


# ---------------------------------------------------------------------------
# real charts


def real_chart(M: LocalManifold, sigma1, sigma2) -> IntervalVector:
    """Evaluate the real conjugacy Q(sigma) = P(s1 + i s2, s1 - i s2).

    By conjugate symmetry the value is real; the imaginary enclosure
    must straddle zero and the real part is returned.  Raises
    SymmetryViolation otherwise.
    """
    s1 = Interval._coerce(sigma1)
    s2 = Interval._coerce(sigma2)
    z1 = CInterval(s1, s2)
    z2 = CInterval(s1, -s2)
    vals = M.P.eval_box(z1, z2)
    for i, v in enumerate(vals):
        if not v.im.straddles_zero():
            raise SymmetryViolation(
                f"component {i}: imaginary part {v.im} excludes zero")
    return IntervalVector.from_intervals([v.re for v in vals])


# ---------------------------------------------------------------------------
# boundary meshing


def boundary_mesh(M: LocalManifold, R: float = 0.99, n_arcs: int = 20,
                  arc_order: Optional[int] = None) -> list[BoundaryArc]:
    """Secant-chord mesh of the circle |z1| = R, pushed through P.

    Chord j runs from R e^(2 pi i j / n) to the next vertex,
    parameterized over s in [-1, 1]; composing with P gives a
    polynomial arc of degree at most 2N, stored to ``arc_order``
    (default exactly 2N).  Dropping higher chord-degrees, when
    ``arc_order`` is smaller, adds the exact sum of dropped coefficient
    magnitudes to the arc tail.  Each chord must pass the
    parameter-plane transversality check: the flux of the linear field
    lam1 z through the outward chord normal is sign-definite, which
    needs checking only at the chord endpoints since the flux is linear
    along the chord.
    """
    if not 0.0 < R < 1.0:
        raise ValueError("mesh radius must be in (0, 1)")
    if n_arcs < 3:
        raise ValueError("need at least 3 arcs")
    N = M.P.orders[0]
    deg = 2 * N
    if arc_order is None:
        arc_order = deg
    verts = [R * complex(math.cos(2.0 * math.pi * k / n_arcs),
                         math.sin(2.0 * math.pi * k / n_arcs))
             for k in range(n_arcs)]
    arcs = []
    for k in range(n_arcs):
        p0, p1 = verts[k], verts[(k + 1) % n_arcs]
        _check_chord_flux(M, p0, p1)
        arcs.append(_compose_chord(M, p0, p1, deg, arc_order))
    return arcs


def _check_chord_flux(M: LocalManifold, p0: complex, p1: complex) -> None:
    normal = -1j * (p1 - p0)
    fluxes = [
        ((CInterval(normal.real, -normal.imag) * M.lambda1)
         * CInterval(z.real, z.imag)).re
        for z in (p0, p1)
    ]
    want_positive = M.kind == "unstable"
    for f in fluxes:
        if f.straddles_zero() or (f.hi > 0.0) != want_positive:
            raise TangencyDetected(
                f"chord flux enclosure {f} is not "
                f"{'outflowing' if want_positive else 'inflowing'}")


def _mul_linear(H: ScalarSeries2, c0: CInterval, c1: CInterval,
                deg: int) -> ScalarSeries2:
    """Product with (c0 + c1 s) along the first axis, truncated at deg.

    Works on stacked grids whose columns are independent series.
    """
    s0 = H.scale(c0)
    s1 = H.scale(c1)
    width = H.rlo.shape[1]
    z = np.zeros((1, width))
    shift = ScalarSeries2(np.concatenate([z, s1.rlo[:deg]]),
                          np.concatenate([z, s1.rhi[:deg]]),
                          np.concatenate([z, s1.ilo[:deg]]),
                          np.concatenate([z, s1.ihi[:deg]]))
    return s0 + shift


def _stack_row(P: Series2, mm: int, nn: int):
    lo = np.array([c.rlo[mm, nn] for c in P.components])
    hi = np.array([c.rhi[mm, nn] for c in P.components])
    ilo = np.array([c.ilo[mm, nn] for c in P.components])
    ihi = np.array([c.ihi[mm, nn] for c in P.components])
    return lo, hi, ilo, ihi


def _compose_chord(M: LocalManifold, p0: complex, p1: complex, deg: int,
                   arc_order: int) -> BoundaryArc:
    midp = 0.5 * (p0 + p1)
    half = 0.5 * (p1 - p0)
    N = M.P.orders[0]
    a0 = CInterval(midp.real, midp.imag)
    a1 = CInterval(half.real, half.imag)
    b0, b1 = a0.conj(), a1.conj()
    # nested Horner over stacked grids: columns are the 7 components,
    # rows are chord-parameter degrees
    rows = []
    for mm in range(N + 1):
        acc = ScalarSeries2.zeros(deg, DIM - 1)
        acc.rlo[0], acc.rhi[0], acc.ilo[0], acc.ihi[0] = _stack_row(M.P, mm, N)
        for nn in range(N - 1, -1, -1):
            acc = _mul_linear(acc, b0, b1, deg)
            clo, chi, dlo, dhi = _stack_row(M.P, mm, nn)
            acc.rlo[0], acc.rhi[0] = _iadd_arr(acc.rlo[0], acc.rhi[0], clo, chi)
            acc.ilo[0], acc.ihi[0] = _iadd_arr(acc.ilo[0], acc.ihi[0], dlo, dhi)
        rows.append(acc)
    acc = rows[N]
    for mm in range(N - 1, -1, -1):
        acc = _mul_linear(acc, a0, a1, deg)
        acc = acc + rows[mm]
    comps = []
    extra_tail = 0.0
    for i in range(DIM):
        col = ScalarSeries2(acc.rlo[:, i:i + 1], acc.rhi[:, i:i + 1],
                            acc.ilo[:, i:i + 1], acc.ihi[:, i:i + 1])
        if arc_order < deg:
            dropped = ScalarSeries2(col.rlo[arc_order + 1:],
                                    col.rhi[arc_order + 1:],
                                    col.ilo[arc_order + 1:],
                                    col.ihi[arc_order + 1:])
            extra_tail = max(extra_tail, mag_sum_bound(dropped))
            col = ScalarSeries2(col.rlo[: arc_order + 1],
                                col.rhi[: arc_order + 1],
                                col.ilo[: arc_order + 1],
                                col.ihi[: arc_order + 1])
        elif arc_order > deg:
            pad = np.zeros((arc_order - deg, 1))
            col = ScalarSeries2(np.concatenate([col.rlo, pad]),
                                np.concatenate([col.rhi, pad]),
                                np.concatenate([col.ilo, pad]),
                                np.concatenate([col.ihi, pad]))
        comps.append(col)
    gamma = Series2(tuple(comps), scale=M.scale, tau=1.0,
                    real_symmetric=False, tail=M.P.tail + extra_tail)
    return BoundaryArc(gamma=gamma, preimage=(p0, p1), kind=M.kind)


# ---------------------------------------------------------------------------
# polydisc derivative bounds


def cauchy_tail_bound(sup_norm: float, nu: float, order: int) -> float:
    """Derivative bound on the polydisc of radius e^(-nu).

    For g analytic and bounded by sup_norm on the unit polydisc,
    first derivatives on the smaller polydisc are bounded by
    (6 pi / nu) sup_norm and second derivatives by
    (36 pi^2 / nu^2) sup_norm.
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    factor = 6 * _PI / Interval.from_value(nu)
    if order == 2:
        factor = factor.sqr()
    return (factor * Interval.from_value(sup_norm)).hi
