"""Seven-dimensional polynomial lift of the four-body field.

Appending the three reciprocal primary distances u_{4+j} = 1/r_j to the
planar state turns the field into a fifth-order polynomial F on R^7,
conjugate to the original field on the surface S = image(R).  Polynomial
structure is what the series machinery downstream needs: Taylor
coefficients of compositions become finite convolution sums.

This module provides the embedding R, the projections back to the planar
factors, the polynomial field and its Jacobian, the explicit kernel
basis of DF at a lifted equilibrium, and eigenvector lifting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crfbp import MassTriple, PrimaryConfig, State4, _distances
from .errors import DegenerateKernel
from .interval import (
    CInterval,
    Interval,
    IntervalMatrix,
    IntervalVector,
)

DIM = 7


@dataclass(frozen=True)
class State7:
    """Lifted state (x, xdot, y, ydot, 1/r1, 1/r2, 1/r3).

    ``on_s`` records that the trailing components were produced by the
    embedding, i.e. the state lies on the invariant surface S.
    """

    u: tuple[Interval, ...]
    on_s: bool = False

    def __post_init__(self):
        if len(self.u) != DIM:
            raise ValueError(f"State7 needs {DIM} components, got {len(self.u)}")
        if self.on_s and not all(self.u[k].lo > 0.0 for k in (4, 5, 6)):
            raise ValueError("on-S state needs positive reciprocal distances")

    @classmethod
    def from_vector(cls, v: IntervalVector, on_s: bool = False) -> "State7":
        return cls(tuple(v[k] for k in range(DIM)), on_s)

    def as_vector(self) -> IntervalVector:
        return IntervalVector.from_intervals(list(self.u))


def embed_R(p: PrimaryConfig, s: State4, clearance: float = 0.0) -> State7:
    """Lift a planar state by appending reciprocal primary distances."""
    rs = _distances(p, s.x, s.y, clearance)
    one = Interval.from_value(1.0)
    return State7((s.x, s.xdot, s.y, s.ydot,
                   one / rs[0], one / rs[1], one / rs[2]), on_s=True)


def project_pi(u: State7) -> State4:
    """First-four-components projection; exact left inverse of embed_R."""
    return State4(u.u[0], u.u[1], u.u[2], u.u[3])


def project_perp(u: State7) -> IntervalVector:
    """The complementary projection onto the reciprocal-distance slots."""
    return IntervalVector.from_intervals([u.u[4], u.u[5], u.u[6]])


def poly_F(m: MassTriple, p: PrimaryConfig, u: State7) -> IntervalVector:
    """The fifth-order polynomial field on R^7."""
    u1, u2, u3, u4 = u.u[0], u.u[1], u.u[2], u.u[3]
    ms = (m.m1, m.m2, m.m3)
    f2 = 2 * u4 + u1
    f4 = -2 * u2 + u3
    tail = []
    for j, mj in enumerate(ms):
        px, py = p.positions[j]
        w3 = u.u[4 + j].pow_int(3)
        dx = u1 - px
        dy = u3 - py
        f2 = f2 - mj * dx * w3
        f4 = f4 - mj * dy * w3
        tail.append(-(w3 * (dx * u2 + dy * u4)))
    return IntervalVector.from_intervals([u2, f2, u4, f4] + tail)


def poly_DF(m: MassTriple, p: PrimaryConfig, u: State7) -> IntervalMatrix:
    """Jacobian of the polynomial field, assembled blockwise."""
    u1, u2, u3, u4 = u.u[0], u.u[1], u.u[2], u.u[3]
    ms = (m.m1, m.m2, m.m3)
    lo = np.zeros((DIM, DIM))
    hi = np.zeros((DIM, DIM))

    def put(i, j, iv: Interval):
        lo[i, j] = iv.lo
        hi[i, j] = iv.hi

    one = Interval.from_value(1.0)
    a = one
    for j, mj in enumerate(ms):
        a = a - mj * u.u[4 + j].pow_int(3)
    put(0, 1, one)
    put(1, 0, a)
    put(1, 3, Interval.from_value(2.0))
    put(2, 3, one)
    put(3, 1, Interval.from_value(-2.0))
    put(3, 2, a)
    for j, mj in enumerate(ms):
        px, py = p.positions[j]
        w = u.u[4 + j]
        w2 = w.sqr()
        w3 = w.pow_int(3)
        dx = u1 - px
        dy = u3 - py
        put(1, 4 + j, -(3 * mj * dx * w2))
        put(3, 4 + j, -(3 * mj * dy * w2))
        put(4 + j, 0, -(u2 * w3))
        put(4 + j, 1, -(dx * w3))
        put(4 + j, 2, -(u4 * w3))
        put(4 + j, 3, -(dy * w3))
        put(4 + j, 4 + j, -(3 * (dx * u2 + dy * u4) * w2))
    return IntervalMatrix(lo, hi)


def kernel_a(m: MassTriple, u0: State7) -> Interval:
    """The pivot quantity a = 1 - m1 u5^3 - m2 u6^3 - m3 u7^3."""
    a = Interval.from_value(1.0)
    for mj, w in zip((m.m1, m.m2, m.m3), u0.u[4:]):
        a = a - mj * w.pow_int(3)
    return a


def kernel_basis(m: MassTriple, p: PrimaryConfig, u0: State7
                 ) -> tuple[IntervalVector, IntervalVector, IntervalVector]:
    """Explicit basis of the three-dimensional kernel of DF at a lifted
    equilibrium.

    Raises DegenerateKernel if the Gaussian-elimination pivot a touches
    zero.
    """
    a = kernel_a(m, u0)
    if a.straddles_zero():
        raise DegenerateKernel(f"pivot quantity a encloses zero: {a}")
    ms = (m.m1, m.m2, m.m3)
    zero = Interval.from_value(0.0)
    one = Interval.from_value(1.0)
    out = []
    for j, mj in enumerate(ms):
        px, py = p.positions[j]
        w2 = u0.u[4 + j].sqr()
        c1 = 3 * mj * (u0.u[0] - px) * w2 / a
        c3 = 3 * mj * (u0.u[2] - py) * w2 / a
        comps = [c1, zero, c3, zero, zero, zero, zero]
        comps[4 + j] = one
        out.append(IntervalVector.from_intervals(comps))
    return tuple(out)


def lift_eigvector(p: PrimaryConfig, x0: State4, xi: tuple[CInterval, ...],
                   clearance: float = 0.0) -> tuple[CInterval, ...]:
    """Push a planar eigenvector through DR to a lifted eigenvector.

    The upper block of DR is the identity, so the planar components pass
    through unchanged; the reciprocal-distance rows apply the closed-form
    gradient of 1/r_j, which involves only the position slots.
    """
    u0 = embed_R(p, x0, clearance)
    out = list(xi)
    for j in range(3):
        px, py = p.positions[j]
        w3 = u0.u[4 + j].pow_int(3)
        cx = -((x0.x - px) * w3)
        cy = -((x0.y - py) * w3)
        out.append(CInterval(cx) * xi[0] + CInterval(cy) * xi[2])
    return tuple(out)


def poly_F_point(pos: np.ndarray, masses: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Float evaluation of the lifted field (non-rigorous fast path)."""
    u1, u2, u3, u4 = u[:4]
    w = u[4:]
    dx = u1 - pos[:, 0]
    dy = u3 - pos[:, 1]
    w3 = w ** 3
    f2 = 2.0 * u4 + u1 - np.sum(masses * dx * w3)
    f4 = -2.0 * u2 + u3 - np.sum(masses * dy * w3)
    tail = -w3 * (dx * u2 + dy * u4)
    return np.concatenate(([u2, f2, u4, f4], tail))
