"""Tests for rigorous Taylor advection of boundary arcs."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from fourbody.advect import (
    FlowChart,
    _FieldRecursion,
    choose_tau,
    collapse_time_one,
    defect_bound,
    defect_series,
    flow_line,
    range_box,
    reference_integrate,
    taylor_flow,
)
from fourbody.crfbp import (
    MassTriple,
    energy_point,
    newton_equilibrium,
    primaries,
)
from fourbody.errors import CollisionDomain, SymmetryViolation
from fourbody.interval import CInterval, Interval, _iadd_arr, _imul_arr
from fourbody.manifold import BoundaryArc, boundary_mesh, field_series, \
    local_manifold
from fourbody.taylor import ScalarSeries2, Series2, mag_sum_bound

Z0 = CInterval(Interval.from_value(0.0))
Z1 = CInterval(Interval.from_value(1.0))


@pytest.fixture(scope="module")
def setup():
    m = MassTriple.from_floats(0.5, 0.3, 0.2)
    return m, primaries(m)


@pytest.fixture(scope="module")
def stable7(setup):
    m, pc = setup
    return local_manifold(m, pc, "stable", N=7)


@pytest.fixture(scope="module")
def arcs15(stable7):
    return boundary_mesh(stable7, n_arcs=20, arc_order=15)


@pytest.fixture(scope="module")
def chart15(setup, arcs15):
    m, pc = setup
    t0 = time.perf_counter()
    chart = flow_line(arcs15[3], m, pc, orders=(15, 50))
    return chart, time.perf_counter() - t0


def _line_series(vals, M=0):
    """Constant-in-s line with the given component values at (0, 0)."""
    comps = []
    for v in vals:
        rlo = np.zeros((M + 1, 1))
        rlo[0, 0] = v
        comps.append(ScalarSeries2(rlo, rlo.copy(), np.zeros((M + 1, 1)),
                                   np.zeros((M + 1, 1))))
    return Series2(tuple(comps), scale=1.0, tau=1.0, real_symmetric=False,
                   tail=0.0)


def _linear_column(A):
    """Harness field F(u) = A u, summed with the interval kernels."""
    A = [[float(x) for x in row] for row in A]

    def bcol(G, n):
        dim = len(G.components)
        M = G.orders[0]
        quad = [np.zeros((dim, M + 1)) for _ in range(4)]
        for i in range(dim):
            acc = [np.zeros(M + 1) for _ in range(4)]
            for k in range(dim):
                a = A[i][k]
                if a == 0.0:
                    continue
                c = G.components[k]
                pl, ph = _imul_arr(c.rlo[:, n], c.rhi[:, n], a, a)
                acc[0], acc[1] = _iadd_arr(acc[0], acc[1], pl, ph)
                pl, ph = _imul_arr(c.ilo[:, n], c.ihi[:, n], a, a)
                acc[2], acc[3] = _iadd_arr(acc[2], acc[3], pl, ph)
            for q in range(4):
                quad[q][i] = acc[q]
        return tuple(quad)

    return bcol


class TestTaylorFlow:
    def test_constant_field_exact(self):
        # tau dG/dt = c integrates to gamma + (t / tau) c, exactly for
        # dyadic tau and c
        c = np.array([0.75, -1.5])

        def bcol(G, n):
            M = G.orders[0]
            quad = [np.zeros((2, M + 1)) for _ in range(4)]
            if n == 0:
                quad[0][:, 0] = c
                quad[1][:, 0] = c
            return tuple(quad)

        gamma = _line_series([2.0, -0.25], M=1)
        out = taylor_flow(gamma, bcol, 4, 0.5)
        for i, comp in enumerate(out.components):
            assert comp.rlo[0, 0] == gamma.components[i].rlo[0, 0]
            assert comp.rlo[0, 1] == c[i] / 0.5
            assert comp.rhi[0, 1] == c[i] / 0.5
            assert np.all(comp.rlo[:, 2:] == 0.0)
            assert np.all(comp.rhi[:, 2:] == 0.0)
            assert np.all(comp.ilo == 0.0) and np.all(comp.ihi == 0.0)

    def test_nilpotent_field_terminates(self):
        # F(u) = (u2, 0): the flow is gamma1 + (t / tau) gamma2, and
        # every later column must be exactly zero
        gamma = _line_series([0.5, 3.0])
        out = taylor_flow(gamma, _linear_column([[0, 1], [0, 0]]), 6, 2.0)
        u1, u2 = out.components
        assert u1.rlo[0, 1] == 3.0 / 2.0
        assert np.all(u1.rlo[:, 2:] == 0.0) and np.all(u1.rhi[:, 2:] == 0.0)
        assert np.all(u2.rlo[:, 1:] == 0.0) and np.all(u2.rhi[:, 1:] == 0.0)

    def test_rotation_field_contains_rational_taylor(self):
        # F(u) = (u2, -u1) from (1, 0): columns are the cosine and sine
        # coefficients 1 / n!, compared against exact rationals
        N = 12
        out = taylor_flow(_line_series([1.0, 0.0]),
                          _linear_column([[0, 1], [-1, 0]]), N, 1.0)
        cur = [Fraction(1), Fraction(0)]
        for n in range(N + 1):
            for i, comp in enumerate(out.components):
                assert Fraction(comp.rlo[0, n]) <= cur[i] <= \
                    Fraction(comp.rhi[0, n])
                assert comp.ilo[0, n] <= 0.0 <= comp.ihi[0, n]
            cur = [cur[1] / (n + 1), -cur[0] / (n + 1)]

    def test_rejects_bad_arguments(self):
        gamma = _line_series([1.0, 0.0])
        bcol = _linear_column([[0, 0], [0, 0]])
        with pytest.raises(ValueError):
            taylor_flow(gamma, bcol, 0, 1.0)
        with pytest.raises(ValueError):
            taylor_flow(gamma, bcol, 3, 0.0)
        with pytest.raises(ValueError):
            taylor_flow(gamma, bcol, 3, math.inf)
        square = taylor_flow(gamma, bcol, 3, 1.0)
        with pytest.raises(ValueError):
            taylor_flow(square, bcol, 3, 1.0)


class TestFlowLine:
    def test_time_zero_edge_is_the_arc(self, setup, arcs15, chart15):
        chart, _ = chart15
        arc = arcs15[3]
        for cc, ca in zip(chart.Gamma.components, arc.gamma.components):
            assert np.array_equal(cc.rlo[:, 0], ca.rlo[:, 0])
            assert np.array_equal(cc.rhi[:, 0], ca.rhi[:, 0])
            assert np.all(cc.ilo[:, 0] == 0.0) and np.all(cc.ihi[:, 0] == 0.0)

    def test_stable_arcs_advect_backward(self, setup, arcs15):
        m, pc = setup
        chart = flow_line(arcs15[0], m, pc, orders=(15, 10), tau=10.0,
                          tail_policy="reported")
        assert chart.kind == "stable"
        assert chart.tau == -10.0
        assert chart.accumulated_time == -0.1

    def test_auto_tau_hits_target_ratio(self, chart15):
        chart, _ = chart15
        G = chart.Gamma

        def colmag(n):
            return max(float(np.max(np.maximum(np.abs(c.rlo[:, n]),
                                               np.abs(c.rhi[:, n]))))
                       for c in G.components)

        for n in (48, 49):
            assert colmag(n + 1) / colmag(n) < 0.75

    def test_auto_tau_is_deterministic(self, setup, arcs15, chart15):
        m, pc = setup
        chart, _ = chart15
        assert choose_tau(arcs15[3], m, pc, 15) == abs(chart.tau)

    def test_recursion_matches_field_series(self, setup, arcs15):
        # the same finished chart, pushed through the lifted field by
        # two independently coded product pipelines
        m, pc = setup
        chart = flow_line(arcs15[7], m, pc, orders=(15, 20), tau=2.0,
                          tail_policy="reported")
        G = chart.Gamma
        b = field_series(m, pc, G, orders=(15, 20), fast=True)
        rec = _FieldRecursion(m, pc, 15, 20)
        for n in range(21):
            rl, rh, il, ih = rec.b_column(G, n)
            for i in range(7):
                assert np.all(np.maximum(rl[i], b[i].rlo[:, n])
                              <= np.minimum(rh[i], b[i].rhi[:, n]))
                assert np.all(np.maximum(il[i], b[i].ilo[:, n])
                              <= np.minimum(ih[i], b[i].ihi[:, n]))

    def test_rejects_bad_arguments(self, setup, arcs15):
        m, pc = setup
        with pytest.raises(ValueError):
            flow_line(arcs15[0], m, pc, orders=(15, 10), tau=-1.0)
        with pytest.raises(ValueError):
            flow_line(arcs15[0], m, pc, orders=(15, 10), tau=0.0)
        with pytest.raises(ValueError):
            flow_line(arcs15[0], m, pc, orders=(15, 10),
                      tail_policy="hopeful")
        with pytest.raises(ValueError):
            # spatial order below the arc order drops arc content
            flow_line(arcs15[0], m, pc, orders=(8, 10), tau=1.0)

    def test_rejects_complex_arcs(self, setup):
        m, pc = setup
        gamma = _line_series([0.9, 0.0, 0.2, 0.0, 1.0, 1.0, 1.0], M=2)
        gamma.components[0].ilo[1, 0] = 1e-3
        gamma.components[0].ihi[1, 0] = 1e-3
        arc = BoundaryArc(gamma=gamma, kind="unstable")
        with pytest.raises(SymmetryViolation):
            flow_line(arc, m, pc, orders=(4, 6), tau=1.0)


class TestDefect:
    def test_equilibrium_line_is_almost_stationary(self, setup):
        m, pc = setup
        x, y = newton_equilibrium(pc, m, (0.93, 0.22))
        pos = pc.position_array()
        w = [1.0 / math.hypot(x - pos[j, 0], y - pos[j, 1])
             for j in range(3)]
        arc = BoundaryArc(gamma=_line_series([x, 0.0, y, 0.0, *w], M=3),
                          kind="unstable")
        chart = flow_line(arc, m, pc, orders=(3, 10), tau=1.0)
        for c in chart.Gamma.components:
            assert float(np.max(np.abs(c.rlo[:, 1:]))) < 1e-12
        assert chart.defect < 1e-10
        assert chart.tail < 1e-9

    def test_residual_straddles_through_top_order(self, setup, chart15):
        m, pc = setup
        chart, _ = chart15
        N = chart.Gamma.orders[1]
        for r in defect_series(m, pc, chart):
            assert np.all(r.rlo[:, :N] <= 0.0)
            assert np.all(r.rhi[:, :N] >= 0.0)
            assert np.all(r.ilo <= 0.0) and np.all(r.ihi >= 0.0)

    def test_defect_detects_planted_fault(self, setup, arcs15):
        m, pc = setup
        chart = flow_line(arcs15[5], m, pc, orders=(15, 16), tau=1.0,
                          tail_policy="reported")
        G = chart.Gamma
        base = mag_sum_bound(defect_series(m, pc, chart)[1])
        c1 = G.components[1]
        mm = int(np.argmax(np.abs(c1.rlo[:, 16] + c1.rhi[:, 16])))
        mag = abs(0.5 * (c1.rlo[mm, 16] + c1.rhi[mm, 16]))
        comps = [c.copy() for c in G.components]
        comps[1].rlo[mm, 16] = 0.0
        comps[1].rhi[mm, 16] = 0.0
        bad = FlowChart(Gamma=Series2(tuple(comps), scale=G.scale, tau=G.tau,
                                      real_symmetric=False, tail=G.tail),
                        kind=chart.kind, tail_policy="reported")
        res = defect_series(m, pc, bad)[1]
        assert not res.rlo[mm, 15] <= 0.0 <= res.rhi[mm, 15]
        assert mag_sum_bound(res) - base > 0.5 * 16.0 * mag
        assert defect_bound(m, pc, bad) >= defect_bound(m, pc, chart)

    def test_shallow_chart_defect_small(self, setup, chart15):
        # one more advection step at tau = 10 keeps the defect far
        # below the certification budget
        m, pc = setup
        chart, _ = chart15
        arc = collapse_time_one(chart)
        nxt = flow_line(arc, m, pc, orders=(15, 20), tau=10.0,
                        start_time=chart.accumulated_time)
        assert nxt.defect < 1e-8
        assert nxt.accumulated_time == pytest.approx(
            chart.accumulated_time - 0.1)


class TestRangeBox:
    def test_contains_samples(self, chart15):
        chart, _ = chart15
        box = range_box(chart.Gamma)
        rng = np.random.default_rng(5)
        for s, t in rng.uniform(-1.0, 1.0, size=(25, 2)):
            vals = chart.Gamma.eval_box(CInterval(Interval.from_value(s)),
                                        CInterval(Interval.from_value(t)))
            for i, v in enumerate(vals):
                assert box[i].lo <= v.re.mid <= box[i].hi

    def test_stays_clear_of_primaries(self, setup, chart15):
        _, pc = setup
        chart, _ = chart15
        box = range_box(chart.Gamma)
        for px, py in pc.positions:
            dx = box[0] - px
            dy = box[2] - py
            assert (dx * dx + dy * dy).lo > 0.05 ** 2


class TestAgainstReference:
    def test_equilibrium_is_fixed(self, setup):
        m, pc = setup
        x, y = newton_equilibrium(pc, m, (0.93, 0.22))
        y0 = np.array([x, 0.0, y, 0.0])
        yT = reference_integrate(y0, 10.0, m, pc)
        assert float(np.max(np.abs(yT - y0))) < 1e-9

    def test_energy_is_conserved(self, setup):
        m, pc = setup
        pos = pc.position_array()
        masses = np.array(m.as_floats())
        y0 = np.array([0.9, 0.05, 0.2, -0.03])
        yT = reference_integrate(y0, 5.0, m, pc)
        drift = abs(energy_point(pos, masses, yT)
                    - energy_point(pos, masses, y0))
        assert drift < 5e-9

    def test_lifted_field_shadows_reduced(self, setup):
        m, pc = setup
        pos = pc.position_array()
        y0 = np.array([0.9, 0.05, 0.2, -0.03])
        w = [1.0 / math.hypot(y0[0] - pos[j, 0], y0[2] - pos[j, 1])
             for j in range(3)]
        y7 = reference_integrate(np.array([*y0, *w]), 1.0, m, pc)
        y4 = reference_integrate(y0, 1.0, m, pc)
        assert float(np.max(np.abs(y7[:4] - y4))) < 1e-8
        for j in range(3):
            r = math.hypot(y4[0] - pos[j, 0], y4[2] - pos[j, 1])
            assert abs(y7[4 + j] - 1.0 / r) < 1e-8

    def test_collision_guards(self, setup):
        m, pc = setup
        pos = pc.position_array()
        with pytest.raises(CollisionDomain):
            reference_integrate(
                np.array([pos[0, 0] + 1e-6, 0.0, pos[0, 1], 0.0]),
                1.0, m, pc)
        with pytest.raises(CollisionDomain):
            # released at rest near a primary, the state falls in
            reference_integrate(
                np.array([pos[0, 0] + 0.08, 0.0, pos[0, 1], 0.0]),
                5.0, m, pc, collision_radius=0.05)

    def test_zero_time_is_identity(self, setup):
        m, pc = setup
        y0 = np.array([0.9, 0.05, 0.2, -0.03])
        assert np.array_equal(reference_integrate(y0, 0.0, m, pc), y0)

    def test_rejects_bad_dimension(self, setup):
        m, pc = setup
        with pytest.raises(ValueError):
            reference_integrate(np.zeros(5), 1.0, m, pc)


class TestChartAccuracy:
    def test_chart_matches_reference_at_time_one(self, setup, arcs15,
                                                 chart15):
        m, pc = setup
        chart, elapsed = chart15
        assert elapsed < 30.0
        arc = arcs15[3]
        T = 1.0 / chart.tau
        worst = 0.0
        for s in np.linspace(-1.0, 1.0, 11):
            zs = CInterval(Interval.from_value(float(s)))
            y0 = np.array([v.re.mid for v in arc.gamma.eval_box(zs, Z0)])
            yT = reference_integrate(y0, T, m, pc, tol=1e-13)
            vals = chart.Gamma.eval_box(zs, Z1)
            for v, w in zip(vals, yT):
                assert v.re.lo - 1e-15 <= w <= v.re.hi + 1e-15
            worst = max(worst, max(abs(v.re.mid - w)
                                   for v, w in zip(vals, yT)))
        assert worst < 1e-10

    def test_chart_matches_reference_at_interior_time(self, setup, arcs15,
                                                      chart15):
        m, pc = setup
        chart, _ = chart15
        zs = CInterval(Interval.from_value(-0.2))
        y0 = np.array([v.re.mid
                       for v in arcs15[3].gamma.eval_box(zs, Z0)])
        for t in (0.25, 0.7):
            yT = reference_integrate(y0, t / chart.tau, m, pc, tol=1e-13)
            vals = chart.Gamma.eval_box(
                zs, CInterval(Interval.from_value(t)))
            assert max(abs(v.re.mid - w)
                       for v, w in zip(vals, yT)) < 1e-10

    def test_energy_constant_along_chart(self, setup, arcs15, chart15):
        m, pc = setup
        chart, _ = chart15
        pos = pc.position_array()
        masses = np.array(m.as_floats())
        for s in (-0.8, 0.1, 0.9):
            zs = CInterval(Interval.from_value(s))
            e0 = energy_point(pos, masses, np.array(
                [v.re.mid for v in chart.Gamma.eval_box(zs, Z0)])[:4])
            e1 = energy_point(pos, masses, np.array(
                [v.re.mid for v in chart.Gamma.eval_box(zs, Z1)])[:4])
            assert abs(e1 - e0) < 1e-9

    def test_collapse_and_readvect(self, setup, arcs15, chart15):
        m, pc = setup
        chart, _ = chart15
        arc2 = collapse_time_one(chart)
        assert arc2.kind == "stable"
        assert arc2.preimage is None
        assert arc2.gamma.orders == (15, 0)
        assert arc2.gamma.tail == chart.tail
        nxt = flow_line(arc2, m, pc, orders=(15, 20), tau=10.0,
                        start_time=chart.accumulated_time)
        zs = CInterval(Interval.from_value(-0.2))
        y0 = np.array([v.re.mid
                       for v in arcs15[3].gamma.eval_box(zs, Z0)])
        T = 1.0 / chart.tau + 1.0 / nxt.tau
        yT = reference_integrate(y0, T, m, pc, tol=1e-13)
        vals = nxt.Gamma.eval_box(zs, Z1)
        for v, w in zip(vals, yT):
            assert v.re.lo - 1e-15 <= w <= v.re.hi + 1e-15
        assert max(abs(v.re.mid - w) for v, w in zip(vals, yT)) < 1e-9
