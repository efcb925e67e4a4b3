import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavestab.errors import ConfigurationError
from wavestab.fields import h1_norm, h2_norm, hminus1_norm, l2_norm, reduce_to_em, smooth_bump, vector_bump
from wavestab.geometry import INTERIOR, Domain, Grid, classify_nodes, omega_mesh
from wavestab.hodge import (
    CarlemanWeight,
    ChainLink,
    boundary_l2,
    carleman_verify,
    dirichlet_eigenfunction,
    find_gamma0,
    gauge_normalize,
    hodge_decompose,
    omega_mask_closed,
    poisson_dirichlet,
    random_h20_family,
    stability_chain,
)
from wavestab.stencils import curl, gradient
from wavestab.wave import dn_norm_from_outputs, probe_basis, solve_forward

DOM = Domain(omega_half_width=0.5, box_half_width=1.0, rho=0.25)


def grid(h):
    return Grid.build(DOM, h, 3.9, enforce_window=False)


@pytest.fixture(scope="module")
def g32():
    return grid(1 / 32)


def _stream_field(psi, h):
    gx, gy = gradient(psi, h)
    return np.stack([gy, -gx])


# ---------------------------------------------------------------------------
# Poisson


def test_poisson_zero_rhs(g32):
    assert np.all(poisson_dirichlet(np.zeros((g32.nx, g32.ny)), DOM, g32) == 0)


def test_poisson_manufactured_second_order():
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        g = grid(h)
        phi = dirichlet_eigenfunction(DOM, g)
        # continuous Laplacian of sin(pi s) sin(pi t) with s, t scaled by the side length 1
        rhs = -2 * np.pi**2 * phi
        sol = poisson_dirichlet(rhs, DOM, g)
        errs.append(float(np.max(np.abs(sol - phi))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_poisson_maximum_principle(g32):
    rng = np.random.default_rng(1)
    rhs = -np.abs(rng.normal(size=(g32.nx, g32.ny)))
    assert poisson_dirichlet(rhs, DOM, g32).min() >= 0


def test_poisson_vanishes_off_interior(g32):
    labels, _ = classify_nodes(DOM, g32)
    sol = poisson_dirichlet(np.ones((g32.nx, g32.ny)), DOM, g32)
    assert np.all(sol[labels != INTERIOR] == 0)


# ---------------------------------------------------------------------------
# Hodge split


def test_hodge_kills_pure_gradients_at_order_h():
    ratios = []
    for h in (1 / 32, 1 / 64):
        g = grid(h)
        G = vector_bump(g, "gradient", (0.02, 0.01), 0.35, 1.0)
        sp = hodge_decompose(G.values, DOM, g)
        ratios.append(sp.norms["V_prime_l2"] / sp.norms["V_l2"])
    assert ratios[1] <= 4 * (1 / 64)
    assert ratios[0] / ratios[1] >= 1.8


def test_hodge_leaves_divergence_free_fields(g32):
    psi = random_h20_family(DOM, g32, 1, np.random.default_rng(3))[0]
    V = _stream_field(psi, g32.h)
    sp = hodge_decompose(V, DOM, g32)
    assert sp.norms["phi_l2"] <= 1e-10 * sp.norms["V_l2"]


def test_hodge_preserves_curl(g32):
    V = vector_bump(g32, "swirl", (0.0, 0.05), 0.3, 1.0).values + vector_bump(
        g32, "gradient", (0.05, 0.0), 0.3, 1.0).values
    sp = hodge_decompose(V, DOM, g32)
    assert np.max(np.abs(curl(V, g32.h) - curl(sp.V_prime, g32.h))) <= 1e-8


def test_hodge_phi_vanishes_on_boundary(g32):
    V = vector_bump(g32, "uniform", (0.0, 0.0), 0.3, 1.0, (1.0, 0.5)).values
    sp = hodge_decompose(V, DOM, g32)
    labels, _ = classify_nodes(DOM, g32)
    assert np.all(sp.phi[labels != INTERIOR] == 0)
    assert np.allclose(sp.V_prime + sp.grad_phi, V, rtol=0, atol=1e-14)


def test_hodge_idempotent(g32):
    V = vector_bump(g32, "uniform", (0.0, 0.0), 0.3, 1.0, (1.0, 0.5)).values
    sp = hodge_decompose(V, DOM, g32)
    sp2 = hodge_decompose(sp.V_prime, DOM, g32)
    assert sp2.norms["phi_l2"] <= 2 * g32.h * sp.norms["V_prime_l2"]


def test_hodge_w1p_bounded_by_curl_across_family(g32):
    kinds = [("swirl", (0.0, 0.0)), ("uniform", (0.05, -0.05)), ("swirl", (-0.1, 0.1)),
             ("uniform", (0.1, 0.1)), ("gradient", (0.0, 0.05))]
    ratios = []
    for kind, c in kinds:
        V = vector_bump(g32, kind, c, 0.3, 1.0, (1.0, 0.3)).values
        V = V + vector_bump(g32, "swirl", (0.0, 0.0), 0.25, 0.5).values
        n = hodge_decompose(V, DOM, g32).norms
        ratios.append(n["V_prime_w1p"] / n["curl_V_lp"])
    assert max(ratios) / min(ratios) <= 10


def test_gauge_normalize_keeps_the_dn_map(g32):
    g = g32
    mesh = omega_mesh(DOM, g)
    base = vector_bump(g, "uniform", (0.02, 0.0), 0.3, 0.05, (1.0, 0.5))
    W = vector_bump(g, "gradient", (0.05, -0.05), 0.3, 0.3) + vector_bump(g, "swirl", (0.0, 0.05), 0.3, 0.3)
    p2 = reduce_to_em(base.values, g.h, base.div)
    p1 = reduce_to_em(base.values + W.values, g.h, base.div + W.div)
    p1g, split = gauge_normalize(p1, p2, DOM, g)
    probes = probe_basis(mesh, 8)
    n2 = solve_forward(p2, probes, store=False).trace
    d0 = dn_norm_from_outputs(probes, solve_forward(p1, probes, store=False).trace - n2)
    d1 = dn_norm_from_outputs(probes, solve_forward(p1g, probes, store=False).trace - n2)
    assert abs(d1 - d0) <= 0.02 * d0
    assert split.norms["grad_phi_l2"] > 0


# ---------------------------------------------------------------------------
# Carleman


def test_weight_conditions(g32):
    w = CarlemanWeight(DOM, g32)
    assert all(w.check_conditions().values())
    assert np.any(w.Gamma0_mask) and not np.all(w.Gamma0_mask)
    assert np.allclose(w.eta, np.exp(w.beta * w.psi))


def test_weight_rejects_bad_parameters(g32):
    with pytest.raises(ConfigurationError):
        CarlemanWeight(DOM, g32, beta=0.0)
    with pytest.raises(ConfigurationError):
        CarlemanWeight(DOM, g32, x0=(0.0, 0.0))


def test_carleman_zero_function(g32):
    r = carleman_verify(CarlemanWeight(DOM, g32), np.zeros((g32.nx, g32.ny)), 1.0)
    assert r.lhs == 0 and r.rhs == 0 and r.ratio == 0


def test_carleman_rejects_nonzero_boundary_values(g32):
    with pytest.raises(ConfigurationError):
        carleman_verify(CarlemanWeight(DOM, g32), np.ones((g32.nx, g32.ny)), 1.0)


def test_carleman_eigenfunction_above_gamma0(g32):
    w = CarlemanWeight(DOM, g32)
    u = dirichlet_eigenfunction(DOM, g32)
    g0 = find_gamma0(w, [u])
    assert 0.1 <= g0 <= 50
    for gm in g0 * np.array([1.0, 1.5, 2.0, 3.0, 4.0]):
        assert carleman_verify(w, u, gm).ratio <= 1.0


def test_carleman_family_strictly_below_one_at_twice_gamma0(g32):
    w = CarlemanWeight(DOM, g32)
    fam = random_h20_family(DOM, g32, 10, np.random.default_rng(7))
    g0 = find_gamma0(w, fam)
    assert max(carleman_verify(w, u, 2 * g0).ratio for u in fam) < 1.0


def test_carleman_large_gamma_does_not_overflow(g32):
    w = CarlemanWeight(DOM, g32)
    u = dirichlet_eigenfunction(DOM, g32)
    r = carleman_verify(w, u, 400.0)
    assert np.isfinite(r.lhs) and np.isfinite(r.rhs) and np.isfinite(r.ratio)


# ---------------------------------------------------------------------------
# stability chain


def test_chain_vanishes_for_equal_fields(g32):
    V = vector_bump(g32, "uniform", (0.0, 0.0), 0.3, 0.1, (1.0, 0.5)).values
    ch = stability_chain(V, V, DOM, g32, {"q_hm1": 0.0, "dalpha_hm1": 0.0, "dn_norm": 0.0})
    assert ch.complete
    for link in ch.links:
        assert link.lhs == 0 and link.rhs == 0 and link.ratio == 0


def test_chain_marks_missing_ingredients(g32):
    V = vector_bump(g32, "uniform", (0.0, 0.0), 0.3, 0.1, (1.0, 0.5)).values
    with pytest.warns(RuntimeWarning):
        ch = stability_chain(V, 0 * V, DOM, g32, {"dn_norm": 1.0})
    assert not ch.complete and set(ch.missing) == {"q_hm1", "dalpha_hm1"}
    assert ch.link("final").rhs == 1.0
    with pytest.raises(KeyError):
        ch.link("nope")


def test_chain_link_ratio():
    assert ChainLink("a", 0.0, 0.0).ratio == 0.0
    assert ChainLink("a", 1.0, 0.0).ratio == float("inf")
    assert ChainLink("a", 1.0, 4.0).ratio == 0.25


def _random_bumps(g, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.uniform(-0.2, 0.2, 2)
        r = rng.uniform(0.15, 0.3)
        out.append(rng.uniform(0.5, 2.0) * smooth_bump(g, tuple(c), r)[0])
    return out


def test_interpolation_link_on_random_bumps(g32):
    mask = omega_mask_closed(DOM, g32)
    for q in _random_bumps(g32, 20, 11):
        lhs = l2_norm(q, g32.h, mask)
        rhs = np.sqrt(h1_norm(q, g32.h, mask) * hminus1_norm(q, g32.h))
        assert lhs <= 1.05 * rhs


def test_trace_link_on_random_bumps(g32):
    mask = omega_mask_closed(DOM, g32)
    rng = np.random.default_rng(12)
    for _ in range(20):
        c = tuple(rng.uniform(-0.2, 0.2, 2))
        V = vector_bump(g32, "uniform", c, rng.uniform(0.3, 0.6), 1.0, tuple(rng.normal(size=2))).values
        lhs = boundary_l2(V, DOM, g32)
        rhs = np.sqrt(l2_norm(V, g32.h, mask) * h2_norm(V, g32.h, mask))
        assert lhs <= 1.05 * rhs


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0.1, 3.0))
def test_curl_invariance_property(shift, scale):
    g = grid(1 / 16)
    V = scale * vector_bump(g, "uniform", (0.1 * shift, 0.0), 0.3, 1.0, (1.0, shift)).values
    sp = hodge_decompose(V, DOM, g)
    assert np.max(np.abs(curl(V, g.h) - curl(sp.V_prime, g.h))) <= 1e-8 * max(1.0, scale)


def test_divergence_of_remainder_decays_at_order_h():
    divs = []
    for h in (1 / 64, 1 / 128):
        g = grid(h)
        V = vector_bump(g, "swirl", (0.0, 0.05), 0.3, 1.0).values + vector_bump(
            g, "gradient", (0.05, 0.0), 0.3, 1.0).values
        divs.append(hodge_decompose(V, DOM, g).norms["div_V_prime_l2"])
    assert np.log2(divs[0] / divs[1]) >= 1.0
