import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavestab.errors import AliasingError, GeometryError
from wavestab.fields import CoefficientPair, MollifierConfig, mollify, reduce_to_em, vector_bump
from wavestab.geometry import Direction, Domain, Grid, omega_mesh
from wavestab.go import (BumpFamily, amplitude_transport_residual, characteristic_integrals, discrete_wavenumber,
                         go_amplitude, go_solution_with_residual, make_ansatz, make_bump_family, probe_center,
                         transport_phase, transport_residual, unit_profile)

# collar wide enough for probing bumps
DOM = Domain(omega_half_width=0.5, box_half_width=1.5, rho=0.5)
T = round(DOM.min_time + 0.05, 2)


def _grid(h=0.025, T=T, window=True):
    return Grid.build(DOM, h, T, enforce_window=window)


def _order(steps, errs):
    return np.polyfit(np.log(steps), np.log(errs), 1)[0]


def test_bump_unit_norm_at_eight_cells():
    g = _grid(0.0125, 1.0, False)
    b = BumpFamily((0.0, 0.0), 8 * g.h)
    assert b.l2_norm(g) == pytest.approx(1.0, abs=1e-3)
    assert unit_profile(np.array([1.0]), np.array([0.0]))[0] == 0.0


def test_bump_norm_scalings():
    # the steep profile needs about 40 cells across the narrow bump for third differences
    dom = Domain(omega_half_width=0.2, box_half_width=0.5, rho=0.1)
    g = Grid.build(dom, 0.00125, 1.0, enforce_window=False)
    b1, b2 = BumpFamily((0.0, 0.0), 0.1), BumpFamily((0.0, 0.0), 0.05)
    assert 6.0 <= b2.h3_norm(g) / b1.h3_norm(g) <= 10.0
    assert 1.8 <= b1.first_moment(g) / b2.first_moment(g) <= 2.2


def test_bump_must_sit_in_collar():
    with pytest.raises(GeometryError):
        make_bump_family((0.0, 0.0), 0.1, DOM)
    with pytest.raises(GeometryError):
        make_bump_family((0.75, 0.0), 0.4, DOM)
    b = make_bump_family((0.75, 0.0), 0.2, DOM)
    assert b.width == 0.2


def test_probe_center_depth():
    om = Direction(0.3)
    y = probe_center(DOM, om, 0.1)
    assert float(DOM.distance(*y)) == pytest.approx(DOM.rho / 2, abs=1e-9)
    assert np.dot(y, om.vector) > 0


def test_transport_phase_initial_slice_and_shift():
    g = _grid(0.05, 0.5, False)
    b = BumpFamily((0.2, 0.1), 0.4)
    phi = transport_phase(b, Direction(0.0), g)
    assert np.array_equal(phi[0], b.sample(g))
    k = 4
    X, Y = g.mesh()
    assert np.allclose(phi[k], b(X + g.t[k], Y))  # shifted left by t


def test_transport_residual_second_order():
    steps, errs = [1 / 20, 1 / 40, 1 / 80], []
    for h in steps:
        g = _grid(h, 0.3, False)
        b = BumpFamily((0.0, 0.0), 0.9)
        errs.append(transport_residual(transport_phase(b, Direction(0.0), g), Direction(0.0), g))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.5
    assert _order(steps, errs) >= 1.8


def test_amplitude_zero_and_constant_potential():
    g = _grid(0.05, 1.0, False)
    om = Direction(0.4)
    assert np.all(go_amplitude(None, om, g) == 1)
    a0 = np.array([0.3, -0.2])
    A = 1j * a0[:, None, None] * np.ones((2, g.nx, g.ny))
    X, Y = g.mesh()
    pts = (X[40:50, 40:50], Y[40:50, 40:50])  # interior, far from the box edge
    b = go_amplitude(A, om, g, points=pts)
    exact = np.exp(-g.t * np.dot(om.vector, a0))
    t_ok = g.t <= 0.3
    assert np.allclose(b[t_ok], exact[t_ok, None, None], rtol=1e-12)


def test_amplitude_transport_residual_order():
    steps, errs = [1 / 20, 1 / 40, 1 / 80], []
    om = Direction(0.4)
    for h in steps:
        g = _grid(h, 0.5, False)
        F = vector_bump(g, "uniform", (0.0, 0.0), 0.6, 0.3, (1.0, 0.5))
        A = 0.5j * F.values
        b = go_amplitude(A, om, g)
        errs.append(amplitude_transport_residual(b, A, om, g))
    assert _order(steps, errs) >= 1.8


def test_aliasing_rejected():
    g = _grid(0.05, 1.0, False)
    b = BumpFamily((0.75, 0.0), 0.2)
    with pytest.raises(AliasingError):
        make_ansatz(None, Direction(0.0), 30.0, b, g)
    with pytest.raises(AliasingError):
        discrete_wavenumber(200.0, Direction(0.0), g)


@pytest.fixture(scope="module")
def go_setup():
    g = _grid()
    mesh = omega_mesh(DOM, g)
    F = vector_bump(g, "uniform", (0.02, 0.0), 0.4, 0.08, (1.0, 0.5))
    pair = reduce_to_em(F.values, g.h, F.div)
    om = Direction(0.3)
    bump = make_bump_family(probe_center(DOM, om, 0.05), 0.2, DOM, g)
    return g, mesh, pair, om, bump


@pytest.mark.parametrize("sign", ["forward", "backward"])
def test_ansatz_support_and_construction_invariants(go_setup, sign):
    g, mesh, pair, om, bump = go_setup
    an = make_ansatz(pair, om, 10.0, bump, g, 0.45, sign)
    res = go_solution_with_residual(pair, an, mesh, store=True)
    # leading term vanishes identically on Omega at both end times
    assert max(res.end_leading_sup) <= 1e-12
    # r vanishes at the initial (forward) or final (backward) time and on the lateral boundary
    assert res.final_r_sup == 0.0
    assert res.lateral_r_sup == 0.0


def test_amplitude_bounded_by_exp_mt(go_setup):
    g, mesh, pair, om, bump = go_setup
    M = 0.54
    a_s = mollify(pair.A, MollifierConfig(10.0, 0.45), g)
    X, Y = mesh.block_mesh
    for sign in ("forward", "backward"):
        b = go_amplitude(a_s, om, g, sign, points=(X, Y))
        assert np.max(np.abs(b)) <= np.exp(M * g.T)


def test_discrete_carrier_is_exact_scheme_solution():
    # with A = 0 the plane-wave carrier solves the leapfrog scheme to round-off
    from wavestab.stencils import laplacian_inner
    g = _grid(0.025, 0.5, False)
    X, Y = g.mesh()
    for lam in (5.0, 20.0, 40.0):
        an = make_ansatz(None, Direction(0.3), lam, BumpFamily((0.75, 0.0), 0.2), g)
        u = np.stack([an.phase(X, Y, t) for t in g.t[:3]])
        utt = (u[2] - 2 * u[1] + u[0]) / g.dt**2
        res = utt[1:-1, 1:-1] - laplacian_inner(u[1], g.h)
        assert np.max(np.abs(res)) <= 1e-9 * lam**2


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_characteristic_integrals_linear_in_potential(angle, c1, c2):
    g = _grid(0.05, 0.5, False)
    X, Y = g.mesh()
    A1 = np.stack([np.exp(-(X**2 + Y**2)), np.zeros_like(X)]) * 1j
    A2 = np.stack([np.zeros_like(X), np.exp(-((X - 0.2) ** 2 + Y**2))]) * 1j
    v = Direction(angle)
    px, py = np.array([0.1, -0.2]), np.array([0.0, 0.3])
    lhs = characteristic_integrals(c1 * A1 + c2 * A2, v, px, py, g)
    rhs = c1 * characteristic_integrals(A1, v, px, py, g) + c2 * characteristic_integrals(A2, v, px, py, g)
    assert np.allclose(lhs, rhs, atol=1e-13)
