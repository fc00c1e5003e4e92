"""Newton-Kantorovich certification of zeros of finite-dimensional maps.

Given an approximate zero x_bar of a C^2 map F, an approximate Jacobian
A_dagger and approximate inverse A, the classical argument certifies a
true zero nearby: with

    Y0 >= ||A F(x_bar)||,
    Z0 >= ||I - A A_dagger||,
    Z1 >= ||A (A_dagger - DF(x_bar))||,
    Z2 >= ||A|| sup ||D^2 F|| over the closed ball of radius r_star,

any radius 0 < r <= r_star with p(r) = Z2 r^2 - (1 - Z0 - Z1) r + Y0 < 0
isolates a unique zero in B(x_bar, r), and the inverse Jacobian there is
bounded by ||A|| / (1 - Z2 r - Z0 - Z1).

All four bounds are produced by rigorous interval evaluation; the
negativity of p is itself re-verified in interval arithmetic at the
reported radii, so a ``proven`` certificate does not rest on any float
root formula.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .crfbp import (
    MassTriple,
    PrimaryConfig,
    _distances,
    hess_omega_point,
    newton_equilibrium,
    omega_first_partials,
    omega_second_partials,
    second_partials_g,
)
from .interval import (
    Interval,
    IntervalMatrix,
    IntervalTensor3,
    IntervalVector,
    matrix_norm,
    matroid_norm,
    max_norm,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class NKProblem:
    """A zero-finding problem prepared for certification.

    ``F_eval`` and ``DF_eval`` map an IntervalVector to enclosures of F
    and DF; ``D2F_sup`` maps a box (IntervalVector) to an enclosure of
    an upper bound for the second-derivative norm over that box.
    """

    dim: int
    F_eval: Callable[[IntervalVector], IntervalVector]
    DF_eval: Callable[[IntervalVector], IntervalMatrix]
    D2F_sup: Callable[[IntervalVector], Interval]
    x_bar: np.ndarray
    A_dagger: np.ndarray
    A: np.ndarray
    r_star: float
    name: str = "problem"

    def __post_init__(self):
        if self.x_bar.shape != (self.dim,):
            raise ValueError("x_bar has wrong shape")
        if self.A.shape != (self.dim, self.dim) or self.A_dagger.shape != (self.dim, self.dim):
            raise ValueError("A / A_dagger must be square of size dim")
        if not self.r_star > 0.0:
            raise ValueError("r_star must be positive")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.name.encode())
        h.update(str(self.dim).encode())
        h.update(self.x_bar.tobytes())
        h.update(self.A_dagger.tobytes())
        h.update(self.A.tobytes())
        h.update(self.r_star.hex().encode())
        return h.hexdigest()

    def box(self) -> IntervalVector:
        """The closed certification box around x_bar."""
        lo = self.x_bar - self.r_star
        hi = self.x_bar + self.r_star
        return IntervalVector(lo, hi)


@dataclass(frozen=True)
class NKCertificate:
    """Outcome of a radii-polynomial verification."""

    Y0: float
    Z0: float
    Z1: float
    Z2: float
    r_star: float
    status: str  # "proven" | "inconclusive"
    r_interval: Optional[Interval] = None
    r_minus: Optional[Interval] = None
    r_plus: Optional[Interval] = None
    inverse_bound: Optional[float] = None
    diagnostic: Optional[str] = None
    problem_fingerprint: Optional[str] = None

    @property
    def proven(self) -> bool:
        return self.status == "proven"

    def to_dict(self) -> dict:
        def iv(x):
            return None if x is None else [repr(x.lo), repr(x.hi)]

        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "nk_certificate",
            "Y0": repr(self.Y0),
            "Z0": repr(self.Z0),
            "Z1": repr(self.Z1),
            "Z2": repr(self.Z2),
            "r_star": repr(self.r_star),
            "status": self.status,
            "r_interval": iv(self.r_interval),
            "r_minus": iv(self.r_minus),
            "r_plus": iv(self.r_plus),
            "inverse_bound": None if self.inverse_bound is None else repr(self.inverse_bound),
            "diagnostic": self.diagnostic,
            "problem_fingerprint": self.problem_fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NKCertificate":
        def iv(x):
            return None if x is None else Interval(float(x[0]), float(x[1]))

        return cls(
            Y0=float(d["Y0"]), Z0=float(d["Z0"]), Z1=float(d["Z1"]),
            Z2=float(d["Z2"]), r_star=float(d["r_star"]), status=d["status"],
            r_interval=iv(d["r_interval"]), r_minus=iv(d["r_minus"]),
            r_plus=iv(d["r_plus"]),
            inverse_bound=None if d["inverse_bound"] is None else float(d["inverse_bound"]),
            diagnostic=d.get("diagnostic"),
            problem_fingerprint=d.get("problem_fingerprint"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def compute_bounds(prob: NKProblem) -> tuple[float, float, float, float]:
    """The four certification constants by rigorous interval evaluation."""
    x_pt = IntervalVector.from_points(prob.x_bar)
    A_iv = IntervalMatrix.from_points(prob.A)
    Adag_iv = IntervalMatrix.from_points(prob.A_dagger)

    Fx = prob.F_eval(x_pt)
    Y0 = max_norm(A_iv @ Fx).hi

    eye = IntervalMatrix.from_points(np.eye(prob.dim))
    Z0 = matrix_norm(eye - A_iv @ Adag_iv).hi

    DFx = prob.DF_eval(x_pt)
    Z1 = matrix_norm(A_iv @ (Adag_iv - DFx)).hi

    sup_d2 = prob.D2F_sup(prob.box())
    Z2 = (matrix_norm(A_iv) * sup_d2).hi
    return Y0, Z0, Z1, Z2


def hessian_sup_box(d2_evaluator: Callable[[IntervalVector], IntervalTensor3],
                    center: np.ndarray, r: float) -> Interval:
    """Upper bound for the bilinear-map norm of D^2 F over a box.

    A single interval evaluation of all second partials over the box,
    combined with the max-of-row-sums formula, bounds the sup by the
    mean value theorem.
    """
    box = IntervalVector(center - r, center + r)
    return matroid_norm(d2_evaluator(box))


def _p_negative(Y0: Interval, Z0: Interval, Z1: Interval, Z2: Interval,
                r: float) -> bool:
    """Rigorous check that the radii polynomial is negative at r."""
    riv = Interval.from_value(r)
    one = Interval.from_value(1.0)
    p = Z2 * riv.sqr() - (one - Z0 - Z1) * riv + Y0
    return p.hi < 0.0


def radii_verify(Y0: float, Z0: float, Z1: float, Z2: float, r_star: float,
                 a_norm: Optional[float] = None,
                 problem_fingerprint: Optional[str] = None) -> NKCertificate:
    """Search for an interval of admissible radii and certify it.

    Root enclosures of the radii polynomial come from the interval
    quadratic formula, but the certificate only trusts direct interval
    re-evaluation of p at the endpoints of the reported radius interval;
    since p is convex, negativity at both endpoints gives negativity
    between them.
    """
    if min(Y0, Z0, Z1, Z2) < 0.0 or r_star <= 0.0:
        raise ValueError("bounds must be nonnegative and r_star positive")
    y0 = Interval.from_value(Y0)
    z0 = Interval.from_value(Z0)
    z1 = Interval.from_value(Z1)
    z2 = Interval.from_value(Z2)
    one = Interval.from_value(1.0)

    def finish(status, r_int=None, rm=None, rp=None, diag=None):
        inverse = None
        if status == "proven" and a_norm is not None:
            denom = one - z2 * Interval.from_value(r_int.lo) - z0 - z1
            if denom.lo > 0.0:
                inverse = (Interval.from_value(a_norm) / denom).hi
        return NKCertificate(Y0=Y0, Z0=Z0, Z1=Z1, Z2=Z2, r_star=r_star,
                             status=status, r_interval=r_int, r_minus=rm,
                             r_plus=rp, inverse_bound=inverse, diagnostic=diag,
                             problem_fingerprint=problem_fingerprint)

    b = one - z0 - z1
    if b.lo <= 0.0:
        return finish("inconclusive",
                      diag="NoNegativity: Z0 + Z1 is not below 1")

    if Z2 == 0.0:
        # linear case: p(r) = -b r + Y0 < 0 iff r > Y0 / b
        r_min = y0 / b
        if r_min.hi >= r_star:
            return finish("inconclusive", rm=r_min,
                          diag="RadiusTooLarge: Y0 / (1 - Z0 - Z1) exceeds r_star")
        lo_c = _first_verified(
            [max(r_min.hi * (1.0 + 1e-12), r_min.hi + 1e-300),
             r_min.hi * (1.0 + 1e-6), 0.5 * (r_min.hi + r_star), r_star],
            lambda r: r <= r_star and _p_negative(y0, z0, z1, z2, r))
        if lo_c is None:
            return finish("inconclusive", rm=r_min,
                          diag="NoNegativity: verification failed near the root")
        return finish("proven", r_int=Interval(lo_c, r_star), rm=r_min)

    disc = b.sqr() - 4 * z2 * y0
    if disc.lo <= 0.0:
        return finish("inconclusive",
                      diag="NoNegativity: discriminant of the radii polynomial "
                           "is not certainly positive (Y0 too large)")
    sq = disc.sqrt()
    # stable form of the smaller root: (b - sq) / (2 Z2) = 2 Y0 / (b + sq),
    # which stays tight when Z2 is tiny instead of dividing ~0 by ~0
    r_minus = (2 * y0) / (b + sq)
    r_plus = (b + sq) / (2 * z2)
    if r_minus.lo > r_star:
        return finish("inconclusive", rm=r_minus, rp=r_plus,
                      diag="RadiusTooLarge: smallest admissible radius "
                           "exceeds r_star")
    top = min(r_star, r_plus.lo)
    lo_c = _first_verified(
        [max(r_minus.hi * (1.0 + 1e-12), r_minus.hi + 1e-300),
         r_minus.hi * (1.0 + 1e-6),
         r_minus.hi + 0.01 * (top - r_minus.hi),
         0.5 * (r_minus.hi + top)]
        + [r_star * 2.0 ** (-k) for k in (40, 32, 24, 16, 8, 4, 2, 1, 0)],
        lambda r: r <= r_star and _p_negative(y0, z0, z1, z2, r))
    if lo_c is None:
        diag = ("RadiusTooLarge: smallest admissible radius may exceed r_star"
                if r_minus.hi > r_star
                else "NoNegativity: verification failed near the lower root")
        return finish("inconclusive", rm=r_minus, rp=r_plus, diag=diag)
    hi_candidates = [r_star] if r_star < r_plus.lo else []
    hi_candidates += [top * (1.0 - 1e-12), top * (1.0 - 1e-6),
                      top - 0.01 * (top - lo_c), 0.5 * (lo_c + top), lo_c]
    hi_c = _first_verified(
        hi_candidates,
        lambda r: lo_c <= r <= r_star and _p_negative(y0, z0, z1, z2, r))
    if hi_c is None:
        hi_c = lo_c
    return finish("proven", r_int=Interval(lo_c, hi_c), rm=r_minus, rp=r_plus)


def _first_verified(candidates, check) -> Optional[float]:
    for c in candidates:
        if c > 0.0 and check(c):
            return float(c)
    return None


# ---------------------------------------------------------------------------
# the planar equilibrium problem


def _iv_max(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))


def lift_hessian_sup(p: PrimaryConfig, m: MassTriple, x: Interval,
                     y: Interval) -> Interval:
    """Second-derivative bound for the gradient map through the
    seven-dimensional polynomial lift.

    The gradient map factors as g_i = F_{2i} composed with the lift
    R(x, y) = (x, 0, y, 0, 1/r1, 1/r2, 1/r3), so each row obeys

        row_i <= ||grad F_i||_1 * ||D^2 R||_Q + sum|D^2 F_i| * ||DR||_M^2,

    with every factor evaluated over the box.  This is coarser than the
    direct tensor evaluation but follows the polynomial field's
    derivative structure, which is the form that generalizes to the
    series computations downstream.
    """
    rs = _distances(p, x, y)
    ms = (m.m1, m.m2, m.m3)
    one = Interval.from_value(1.0)
    ws = [one / r for r in rs]
    dxs = [x - px for (px, _) in p.positions]
    dys = [y - py for (_, py) in p.positions]

    a = one
    for mj, w in zip(ms, ws):
        a = a - mj * w.pow_int(3)

    # ||DR||_M: rows of DR have 1-norms {1, 0, 1, 0, w^3 (|dx| + |dy|)}
    dr = one
    for w, dx, dy in zip(ws, dxs, dys):
        dr = _iv_max(dr, w.pow_int(3) * (abs(dx) + abs(dy)))

    # ||D^2 R||_Q: only the reciprocal-distance rows contribute
    d2r = Interval.from_value(0.0)
    for w, dx, dy, r in zip(ws, dxs, dys, rs):
        w5 = w.pow_int(5)
        rsq = r.sqr()
        row = (abs(3 * dx.sqr() - rsq) + 6 * abs(dx * dy)
               + abs(3 * dy.sqr() - rsq)) * w5
        d2r = _iv_max(d2r, row)

    rows = []
    for ds in (dxs, dys):
        grad1 = abs(a) + 2
        d2sum = Interval.from_value(0.0)
        for mj, w, d in zip(ms, ws, ds):
            grad1 = grad1 + 3 * mj * abs(d) * w.sqr()
            d2sum = d2sum + 6 * mj * w.sqr() + 6 * mj * abs(d) * w
        rows.append(grad1 * d2r + d2sum * dr.sqr())
    return _iv_max(rows[0], rows[1])


def equilibrium_problem(p: PrimaryConfig, m: MassTriple,
                        xy_bar: tuple[float, float], r_star: float = 1e-6,
                        z2_method: str = "lift") -> NKProblem:
    """Package the planar gradient map as a certification problem.

    ``z2_method`` selects the second-derivative bound: "lift" goes
    through the seven-dimensional polynomial field, "direct" evaluates
    the third-partial tensor of the potential over the box.
    """
    if z2_method not in ("lift", "direct"):
        raise ValueError(f"unknown z2_method {z2_method!r}")
    pos = p.position_array()
    masses = np.array(m.as_floats())
    x_bar = np.array(xy_bar, dtype=float)
    A_dagger = hess_omega_point(pos, masses, x_bar[0], x_bar[1])
    A = np.linalg.inv(A_dagger)

    def F_eval(v: IntervalVector) -> IntervalVector:
        ox, oy = omega_first_partials(p, m, v[0], v[1])
        return IntervalVector.from_intervals([ox, oy])

    def DF_eval(v: IntervalVector) -> IntervalMatrix:
        g11, g12, g22 = second_partials_g(p, m, v[0], v[1])
        lo = np.array([[g11.lo, g12.lo], [g12.lo, g22.lo]])
        hi = np.array([[g11.hi, g12.hi], [g12.hi, g22.hi]])
        return IntervalMatrix(lo, hi)

    if z2_method == "lift":
        def D2F_sup(box: IntervalVector) -> Interval:
            return lift_hessian_sup(p, m, box[0], box[1])
    else:
        def D2F_sup(box: IntervalVector) -> Interval:
            return matroid_norm(omega_second_partials(p, m, box[0], box[1]))

    return NKProblem(dim=2, F_eval=F_eval, DF_eval=DF_eval, D2F_sup=D2F_sup,
                     x_bar=x_bar, A_dagger=A_dagger, A=A, r_star=r_star,
                     name=f"equilibrium-{z2_method}")


def certify_equilibrium(p: PrimaryConfig, m: MassTriple,
                        seed: tuple[float, float] = (0.93, 0.22),
                        r_star: float = 1e-6, z2_method: str = "lift"
                        ) -> tuple[NKCertificate, tuple[float, float]]:
    """Newton refinement plus certification of a planar equilibrium."""
    xy = newton_equilibrium(p, m, seed)
    prob = equilibrium_problem(p, m, xy, r_star=r_star, z2_method=z2_method)
    Y0, Z0, Z1, Z2 = compute_bounds(prob)
    a_norm = matrix_norm(IntervalMatrix.from_points(prob.A)).hi
    cert = radii_verify(Y0, Z0, Z1, Z2, r_star, a_norm=a_norm,
                        problem_fingerprint=prob.fingerprint())
    return cert, xy
