import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavestab.errors import AdmissibilityError, ConfigurationError
from wavestab.fields import (CoefficientPair, MollifierConfig, check_admissible, cone_field, em_operator_residual,
                             extend_by_background, hminus1_norm, l2_norm, mollify, omega_mask, reduce_to_em,
                             smooth_bump, vector_bump, w1inf_norm)
from wavestab.geometry import Domain, Grid


def _grid(h=0.05, T=0.2):
    dom = Domain(omega_half_width=0.5, box_half_width=1.0, rho=0.25)
    return dom, Grid.build(dom, h, T, enforce_window=False)


def test_reduce_zero_field():
    dom, g = _grid()
    p = reduce_to_em(np.zeros((2, g.nx, g.ny)), g.h)
    assert np.all(p.A == 0) and np.all(p.q == 0)


def test_reduce_constant_field():
    dom, g = _grid()
    V = np.stack([2.0 * np.ones((g.nx, g.ny)), np.zeros((g.nx, g.ny))])
    p = reduce_to_em(V, g.h)
    assert np.allclose(p.A[0], 1j) and np.allclose(p.A[1], 0)
    assert np.allclose(p.q, 1.0)


def test_reduce_gradient_field_matches_symbolic_divergence_at_second_order():
    # V = grad phi for a Gaussian phi, so div V = lap phi is known in closed form
    errs = []
    steps = [1 / 20, 1 / 40, 1 / 80]
    s2 = 0.08
    for h in steps:
        dom, g = _grid(h)
        X, Y = g.mesh()
        r2 = (X - 0.05) ** 2 + Y**2
        phi = 0.5 * np.exp(-r2 / s2)
        V = np.stack([-2 * (X - 0.05) / s2 * phi, -2 * Y / s2 * phi])
        div = (4 * r2 / s2**2 - 4 / s2) * phi
        exact = 0.25 * (V[0] ** 2 + V[1] ** 2) - 0.5 * div
        p = reduce_to_em(V, g.h)
        errs.append(np.max(np.abs(p.q[1:-1, 1:-1] - exact[1:-1, 1:-1])))
    order = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert order >= 1.8


def test_reduce_rejects_complex_field():
    dom, g = _grid()
    with pytest.raises(AdmissibilityError):
        reduce_to_em(1j * np.ones((2, g.nx, g.ny)), g.h)


def test_coefficient_pair_shape_check():
    with pytest.raises(ConfigurationError):
        CoefficientPair(np.zeros((3, 4, 4)), np.zeros((4, 4)))


def test_em_residual_zero_field_is_exact():
    dom, g = _grid()
    X, Y = g.mesh()
    u = np.sin(X + Y)[None] * np.cos(g.t)[:, None, None]
    assert em_operator_residual(np.zeros((2, g.nx, g.ny)), u, g) == 0.0


def test_em_residual_constant_field_quadratic_u():
    dom, g = _grid()
    X, Y = g.mesh()
    V = np.stack([0.3 * np.ones_like(X), -0.2 * np.ones_like(X)])
    u = (1 + X + 0.5 * X**2 - Y + X * Y)[None] * (1 + g.t[:, None, None] ** 2)
    assert em_operator_residual(V, u, g) <= 1e-10


def test_extend_by_background_identity_and_interior_bump():
    dom, g = _grid()
    X, Y = g.mesh()
    V0 = np.stack([0.1 * np.ones_like(X), 0.05 * np.ones_like(X)])
    assert np.array_equal(extend_by_background(V0, V0, dom, g), V0)
    F = vector_bump(g, "uniform", (0.0, 0.0), 0.3, 0.2, (1.0, 0.0))
    out = extend_by_background(F.values, 0.0, dom, g)
    inside = omega_mask(dom, g)
    assert np.array_equal(out[:, inside], F.values[:, inside])
    assert np.all(out[:, ~inside] == 0)


def test_extension_difference_vanishes_on_collar():
    dom, g = _grid()
    V0 = np.zeros((2, g.nx, g.ny))
    F = vector_bump(g, "swirl", (0.05, 0.0), 0.3, 0.2)
    out = extend_by_background(F.values, V0, dom, g)
    X, Y = g.mesh()
    collar = (dom.signed_distance(X, Y) > 0) & (dom.signed_distance(X, Y) < dom.rho)
    assert np.max(np.abs((out - V0)[:, collar])) == 0.0


def test_extension_rejects_mismatch_at_boundary():
    dom, g = _grid()
    F = vector_bump(g, "uniform", (0.0, 0.0), 0.9, 0.2)
    with pytest.raises(AdmissibilityError):
        extend_by_background(F.values, 0.0, dom, g)


def test_check_admissible_bounds():
    dom, g = _grid()
    F = vector_bump(g, "uniform", (0.0, 0.0), 0.3, 0.05)
    check_admissible(F.values, 1.0, dom, g)
    with pytest.raises(AdmissibilityError):
        check_admissible(F.values, 0.01, dom, g)
    with pytest.raises(AdmissibilityError):
        check_admissible(CoefficientPair(F.values.astype(complex), np.zeros((g.nx, g.ny))), 1.0, dom, g)


def test_mollifier_config_validation():
    with pytest.raises(ConfigurationError):
        MollifierConfig(10.0, alpha=0.7)
    with pytest.raises(ConfigurationError):
        MollifierConfig(-1.0)
    assert MollifierConfig(16.0, 0.5).radius == pytest.approx(0.25)


def test_mollify_degenerate_kernel_warns():
    dom, g = _grid(0.05)
    f = np.random.default_rng(0).standard_normal((g.nx, g.ny))
    with pytest.warns(RuntimeWarning):
        out = mollify(f, MollifierConfig(1e6, 0.5), g)
    assert np.array_equal(out, f)


def test_mollifier_rate_on_lipschitz_cone():
    dom = Domain(omega_half_width=0.5, box_half_width=1.0, rho=0.25)
    g = Grid.build(dom, 1 / 80, 0.1, enforce_window=False)
    F = cone_field(g, (0.0, 0.0), 0.4)
    lams = [4.0, 8.0, 16.0, 32.0]
    errs = [np.max(np.abs(mollify(F, MollifierConfig(l, 0.45), g) - F)) for l in lams]
    slope = np.polyfit(np.log(lams), np.log(errs), 1)[0]
    assert slope <= -0.45 + 0.1


def test_smooth_bump_derivatives():
    dom, g = _grid(1 / 80)
    v, grad, lap = smooth_bump(g, (0.1, 0.0), 0.5, 2.0)
    assert v.max() == pytest.approx(2.0, rel=1e-2)
    gx = np.gradient(v, g.h, axis=0)
    assert np.max(np.abs(gx - grad[0])) <= 0.05 * np.max(np.abs(grad[0]))


def test_vector_bump_kinds():
    dom, g = _grid(1 / 80)
    from wavestab.stencils import curl, divergence
    sw = vector_bump(g, "swirl", (0.0, 0.0), 0.9, 1.0)
    assert np.all(sw.div == 0)
    gr = vector_bump(g, "gradient", (0.0, 0.0), 0.9, 1.0)
    assert np.all(gr.curl == 0)
    assert np.max(np.abs(curl(sw.values, g.h) - sw.curl)) <= 0.03 * np.max(np.abs(sw.curl))
    assert np.max(np.abs(divergence(gr.values, g.h) - gr.div)) <= 0.05 * np.max(np.abs(gr.div))
    with pytest.raises(ConfigurationError):
        vector_bump(g, "spiral")


def test_norms_basic():
    dom, g = _grid()
    one = np.ones((g.nx, g.ny))
    assert l2_norm(one, g.h) == pytest.approx(g.h * g.nx)
    assert w1inf_norm(3 * one, g.h) == pytest.approx(3.0)
    assert hminus1_norm(np.zeros_like(one), g.h) == 0.0
    f = smooth_bump(g, (0, 0), 0.5)[0]
    assert hminus1_norm(f, g.h) < l2_norm(f, g.h)


# ---------------------------------------------------------------- properties

_dom, _g = _grid(0.05)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 0.6), st.floats(-0.2, 0.2))
def test_reduce_imag_part_and_real_q(ax, ay, r, cx):
    V = vector_bump(_g, "uniform", (cx, 0.0), r, 1.0, (ax, ay)).values
    p = reduce_to_em(V, _g.h)
    assert np.array_equal(p.A.imag, V / 2)
    assert np.all(p.A.real == 0)
    assert np.all(p.q.imag == 0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.sampled_from([2.0, 4.0, 8.0]), st.floats(0.25, 0.5))
def test_mollify_preserves_constants(c, lam, alpha):
    out = mollify(np.full((_g.nx, _g.ny), c), MollifierConfig(lam, alpha), _g)
    assert np.max(np.abs(out - c)) <= 1e-12 * max(1.0, abs(c))


@settings(max_examples=20, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.sampled_from([4.0, 8.0]))
def test_mollify_commutes_with_grid_translation(di, dj, lam):
    f = smooth_bump(_g, (0.0, 0.0), 0.3)[0] + cone_field(_g, (0.05, 0.0), 0.2)[0]
    cfg = MollifierConfig(lam, 0.45)
    shifted = np.roll(f, (di, dj), axis=(0, 1))
    a = mollify(shifted, cfg, _g)
    b = np.roll(mollify(f, cfg, _g), (di, dj), axis=(0, 1))
    assert np.max(np.abs(a - b)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.01, 0.5))
def test_admissibility_monotone(scale, amp):
    F = vector_bump(_g, "uniform", (0.0, 0.0), 0.3, amp, (1.0, 0.5)).values
    M = w1inf_norm(F, _g.h) * 1.0000001
    check_admissible(F, M, _dom, _g)
    check_admissible(scale * F, M, _dom, _g)
