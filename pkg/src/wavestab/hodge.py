"""Gauge normalisation, the Carleman weight and the stability chain.

A difference field ``V`` supported in Omega splits as ``V = V' + grad phi``
with ``phi = 0`` on the boundary and ``div V' = 0`` (up to discretisation),
``phi`` solving the Dirichlet problem ``Delta phi = div V``.  Adding
``-grad phi`` to a magnetic potential does not change the boundary map, so
the potential difference of two coefficient pairs can be reduced to its
divergence-free part before the electric potential is probed.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import linalg as spla

from .errors import ConfigurationError, SolverError
from .fields import CoefficientPair, h1_norm, h2_norm, hminus1_norm, l2_norm
from .geometry import INTERIOR, Domain, Grid, classify_nodes, omega_mesh
from .stencils import curl, divergence, gradient

# ----------------------------------------------------------------------------
# Poisson problem


def _laplacian_matrix(interior: np.ndarray, h: float) -> sparse.csr_matrix:
    """Five-point Laplacian on the interior nodes, zero Dirichlet data elsewhere."""
    idx = -np.ones(interior.shape, dtype=np.int64)
    I, J = np.nonzero(interior)
    n = len(I)
    idx[I, J] = np.arange(n)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [np.full(n, -4.0 / h**2)]
    nx, ny = interior.shape
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        Ii, Jj = I + di, J + dj
        ok = (Ii >= 0) & (Ii < nx) & (Jj >= 0) & (Jj < ny)
        nb = np.full(n, -1)
        nb[ok] = idx[Ii[ok], Jj[ok]]
        keep = nb >= 0
        rows.append(np.arange(n)[keep])
        cols.append(nb[keep])
        vals.append(np.full(keep.sum(), 1.0 / h**2))
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def poisson_dirichlet(rhs: np.ndarray, domain: Domain, grid: Grid, rtol: float = 1e-10) -> np.ndarray:
    """Solve ``Delta_h phi = rhs`` on the interior nodes with ``phi = 0`` elsewhere.

    Direct sparse factorisation; the relative residual is checked against
    ``rtol`` and a conjugate-gradient refinement is attempted before giving up.
    """
    labels, _ = classify_nodes(domain, grid)
    interior = labels == INTERIOR
    L = _laplacian_matrix(interior, grid.h)
    b = np.asarray(rhs)[interior]
    if not np.any(b):
        return np.zeros(np.shape(rhs), dtype=np.result_type(rhs, float))
    lu = spla.splu(L.tocsc())
    x = lu.solve(b) if not np.iscomplexobj(b) else lu.solve(b.real) + 1j * lu.solve(b.imag)
    res = np.linalg.norm(L @ x - b) / np.linalg.norm(b)
    if res > rtol:
        # refine with conjugate gradients on the (negative definite) operator
        x, info = spla.cg(-L.astype(b.dtype), -b, x0=x, rtol=rtol, maxiter=10 * L.shape[0])
        res = np.linalg.norm(L @ x - b) / np.linalg.norm(b)
        if info != 0 or res > rtol:
            raise SolverError(f"Poisson solve did not reach residual {rtol:.0e} (got {res:.2e})")
    out = np.zeros(np.shape(rhs), dtype=x.dtype)
    out[interior] = x
    return out


# ----------------------------------------------------------------------------
# Hodge split


def wp_norm(f: np.ndarray, h: float, p: float = 4.0, mask: np.ndarray | None = None) -> float:
    """Grid ``W^{1,p}`` norm: ``L^p`` of values and centred first differences."""
    f = np.asarray(f)
    comps = f if f.ndim == 3 else f[None]
    total = 0.0
    for c in comps:
        parts = [c, *gradient(c, h)]
        for d in parts:
            a = np.abs(d) ** p
            total += np.sum(a if mask is None else a[mask]) * h**2
    return float(total ** (1.0 / p))


def lp_norm(f: np.ndarray, h: float, p: float = 4.0, mask: np.ndarray | None = None) -> float:
    a = np.abs(np.asarray(f)) ** p
    return float((np.sum(a if mask is None else a[..., mask]) * h**2) ** (1.0 / p))


@dataclass(eq=False)
class HodgeSplit:
    """``source = V_prime + grad phi`` with ``phi = 0`` off the interior."""

    phi: np.ndarray
    V_prime: np.ndarray
    source: np.ndarray
    norms: dict = field(default_factory=dict)

    @property
    def grad_phi(self) -> np.ndarray:
        return self.source - self.V_prime


def hodge_decompose(V: np.ndarray, domain: Domain, grid: Grid, p0: float = 4.0) -> HodgeSplit:
    """Split a field supported in Omega into a gradient and a divergence-free part."""
    V = np.asarray(V)
    h = grid.h
    phi = poisson_dirichlet(divergence(V, h), domain, grid)
    Vp = V - gradient(phi, h)
    mask = omega_mask_closed(domain, grid)
    norms = {
        "V_l2": l2_norm(V, h, mask),
        "V_prime_l2": l2_norm(Vp, h, mask),
        "V_prime_w1p": wp_norm(Vp, h, p0, mask),
        "curl_V_lp": lp_norm(curl(V, h), h, p0, mask),
        "div_V_prime_l2": l2_norm(divergence(Vp, h), h, mask),
        "grad_phi_l2": l2_norm(gradient(phi, h), h, mask),
        "phi_l2": l2_norm(phi, h, mask),
    }
    return HodgeSplit(phi, Vp, V, norms)


def omega_mask_closed(domain: Domain, grid: Grid) -> np.ndarray:
    labels, _ = classify_nodes(domain, grid)
    return labels <= 1


def gauge_normalize(pair1: CoefficientPair, pair2: CoefficientPair, domain: Domain, grid: Grid):
    """``(A1 - grad phi, q1)`` where ``grad phi`` is the gradient part of ``A1 - A2``.

    Returns the new pair and the split of the potential difference.
    """
    split = hodge_decompose(pair1.A - pair2.A, domain, grid)
    return pair1.with_gauge(-split.phi, grid.h), split


# ----------------------------------------------------------------------------
# Carleman weight


@dataclass(eq=False)
class CarlemanWeight:
    """``psi = |x - x0|^2`` and ``eta = exp(beta psi)`` with ``x0`` outside Omega.

    The observation part of the boundary is ``Gamma0 = {(x - x0) . nu >= 0}``
    on the boundary samples of the Omega mesh.
    """

    domain: Domain
    grid: Grid
    beta: float = 1.0
    x0: tuple[float, float] | None = None
    gamma0: float | None = None

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigurationError("beta must be positive")
        if self.x0 is None:
            c = self.domain.omega_center
            self.x0 = (c[0] - 1.5 * self.domain.box_half_width, c[1])
        if self.domain.distance(*self.x0) <= 0:
            raise ConfigurationError("x0 must lie outside the closed domain")
        X, Y = self.grid.mesh()
        self.psi = (X - self.x0[0]) ** 2 + (Y - self.x0[1]) ** 2
        self.log_eta = self.beta * self.psi
        mesh = omega_mesh(self.domain, self.grid)
        pts = mesh.points
        self.psi_boundary = (pts[:, 0] - self.x0[0]) ** 2 + (pts[:, 1] - self.x0[1]) ** 2
        dn_psi = 2 * ((pts[:, 0] - self.x0[0]) * mesh.normals[:, 0] + (pts[:, 1] - self.x0[1]) * mesh.normals[:, 1])
        self.dn_psi = dn_psi
        self.Gamma0_mask = dn_psi >= 0

    @property
    def eta(self) -> np.ndarray:
        return np.exp(self.log_eta)

    def check_conditions(self) -> dict:
        """The three weight conditions on the closed domain and its boundary."""
        mask = omega_mask_closed(self.domain, self.grid)
        X, Y = self.grid.mesh()
        grad = 2 * np.hypot(X - self.x0[0], Y - self.x0[1])
        return {
            "psi_positive": bool(np.all(self.psi[mask] > 0)),
            "grad_psi_positive": bool(np.all(grad[mask] > 0)),
            "dn_psi_nonpositive_off_gamma0": bool(np.all(self.dn_psi[~self.Gamma0_mask] <= 0)),
        }


@dataclass(frozen=True)
class CarlemanResult:
    """Both sides scaled by ``exp(-log_shift)``; ``ratio = lhs / rhs``."""

    lhs: float
    rhs: float
    ratio: float
    log_shift: float


def carleman_verify(weight: CarlemanWeight, u: np.ndarray, gamma: float, tol: float = 1e-9) -> CarlemanResult:
    """Evaluate both sides of the Carleman inequality for ``u`` vanishing on the boundary.

    Volume terms use the interior nodes (centred gradient, five-point
    Laplacian); the boundary term uses second-order one-sided normal
    derivatives on ``Gamma0``.  Exponential weights are evaluated relative to
    their maximum to avoid overflow.
    """
    if gamma <= 0:
        raise ConfigurationError("gamma must be positive")
    dom, grid = weight.domain, weight.grid
    h = grid.h
    u = np.asarray(u)
    mesh = omega_mesh(dom, grid)
    labels, _ = classify_nodes(dom, grid)
    interior = labels == INTERIOR
    closed = labels <= 1
    ub = np.where(closed, u, 0.0)
    on_bd = np.abs(ub[labels == 1])
    if on_bd.size and on_bd.max() > tol * max(1.0, float(np.abs(ub).max())):
        raise ConfigurationError("u must vanish on the boundary")
    gx = np.zeros_like(ub)
    gy = np.zeros_like(ub)
    gx[1:-1, :] = (ub[2:, :] - ub[:-2, :]) / (2 * h)
    gy[:, 1:-1] = (ub[:, 2:] - ub[:, :-2]) / (2 * h)
    lap = np.zeros_like(ub)
    lap[1:-1, 1:-1] = (ub[2:, 1:-1] + ub[:-2, 1:-1] + ub[1:-1, 2:] + ub[1:-1, :-2] - 4 * ub[1:-1, 1:-1]) / h**2
    # log of 2 gamma eta: exponent of the weight
    expo_in = 2 * gamma * np.exp(weight.log_eta[interior])
    expo_bd = 2 * gamma * np.exp(weight.beta * weight.psi_boundary[weight.Gamma0_mask])
    shift = float(max(expo_in.max(initial=-np.inf), expo_bd.max(initial=-np.inf)))
    w_in = np.exp(expo_in - shift)
    w_bd = np.exp(expo_bd - shift)
    grad2 = np.abs(gx[interior]) ** 2 + np.abs(gy[interior]) ** 2
    lhs = float(np.sum((gamma * grad2 + gamma**3 * np.abs(ub[interior]) ** 2) * w_in) * h**2)
    dn = mesh.neumann_matrix @ mesh.restrict(ub).ravel()
    bterm = gamma * np.abs(dn[weight.Gamma0_mask]) ** 2 * mesh.weights[weight.Gamma0_mask]
    rhs = float(np.sum(np.abs(lap[interior]) ** 2 * w_in) * h**2 + np.sum(bterm * w_bd))
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    return CarlemanResult(lhs, rhs, float(ratio), shift)


def find_gamma0(weight: CarlemanWeight, functions, lo: float = 0.1, hi: float = 50.0,
                samples: int = 60, xtol: float = 1e-3) -> float:
    """Smallest ``gamma`` in ``[lo, hi]`` above which every ratio stays at most one.

    The worst ratio over ``functions`` is scanned on a log grid; the last
    crossing of one is refined by bisection.
    """
    funcs = list(functions)

    def worst(g):
        return max(carleman_verify(weight, u, g).ratio for u in funcs)

    gs = np.geomspace(lo, hi, samples)
    vals = np.array([worst(g) for g in gs])
    bad = np.nonzero(vals > 1.0)[0]
    if len(bad) == 0:
        g0 = lo
    elif bad[-1] == len(gs) - 1:
        raise SolverError("the Carleman ratio exceeds one at the top of the search range")
    else:
        a, b = gs[bad[-1]], gs[bad[-1] + 1]
        g0 = optimize.bisect(lambda g: worst(g) - 1.0, a, b, xtol=xtol)
        g0 = float(b if worst(g0) > 1.0 else g0)
        # make sure the returned threshold itself satisfies the bound
        while worst(g0) > 1.0:
            g0 *= 1.0 + xtol
    weight.gamma0 = float(g0)
    return float(g0)


def dirichlet_eigenfunction(domain: Domain, grid: Grid, m: int = 1, n: int = 1) -> np.ndarray:
    """``sin(m pi s) sin(n pi t)`` in coordinates normalised to the square."""
    if domain.shape != "square":
        raise ConfigurationError("eigenfunctions are provided for the square only")
    X, Y = grid.mesh()
    a = domain.omega_half_width
    c = domain.omega_center
    s = (X - c[0] + a) / (2 * a)
    t = (Y - c[1] + a) / (2 * a)
    inside = (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    return np.where(inside, np.sin(m * np.pi * s) * np.sin(n * np.pi * t), 0.0)


def random_h20_family(domain: Domain, grid: Grid, count: int, rng: np.random.Generator,
                      modes: int = 4) -> list[np.ndarray]:
    """Random smooth functions vanishing to second order on the square boundary.

    Each is ``sin^2(pi s) sin^2(pi t) p(s, t)`` with ``p`` a random
    trigonometric polynomial with decaying coefficients.
    """
    if domain.shape != "square":
        raise ConfigurationError("the random family is provided for the square only")
    X, Y = grid.mesh()
    a = domain.omega_half_width
    c = domain.omega_center
    s = (X - c[0] + a) / (2 * a)
    t = (Y - c[1] + a) / (2 * a)
    inside = (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    bubble = np.sin(np.pi * s) ** 2 * np.sin(np.pi * t) ** 2
    out = []
    for _ in range(count):
        p = np.zeros_like(X)
        for i in range(modes):
            for j in range(modes):
                amp = rng.standard_normal(2) / (1.0 + i * i + j * j)
                p += amp[0] * np.cos(np.pi * i * s) * np.cos(np.pi * j * t)
                p += amp[1] * np.sin(np.pi * (i + 1) * s) * np.sin(np.pi * (j + 1) * t) * 0.5
        out.append(np.where(inside, bubble * p, 0.0))
    return out


# ----------------------------------------------------------------------------
# stability chain


@dataclass
class ChainLink:
    name: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else float("inf")
        return self.lhs / self.rhs


@dataclass
class StabilityChain:
    """Measured links of the stability chain for one coefficient pair."""

    links: list[ChainLink]
    norms: dict
    complete: bool = True
    missing: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"complete": self.complete, "missing": list(self.missing), "norms": dict(self.norms),
                "links": [dict(asdict(link), ratio=link.ratio) for link in self.links]}

    def link(self, name: str) -> ChainLink:
        for lk in self.links:
            if lk.name == name:
                return lk
        raise KeyError(name)


def boundary_l2(field_: np.ndarray, domain: Domain, grid: Grid, mask: np.ndarray | None = None) -> float:
    """``L2`` norm over the boundary samples (optionally a subset) of a box field."""
    mesh = omega_mesh(domain, grid)
    f = np.asarray(field_)
    comps = f if f.ndim == 3 else f[None]
    total = 0.0
    w = mesh.weights if mask is None else mesh.weights * mask
    for c in comps:
        vals = mesh.restrict(c).ravel()[mesh.nodes]
        total += float(np.sum(np.abs(vals) ** 2 * w))
    return float(np.sqrt(total))


def stability_chain(V1: np.ndarray, V2: np.ndarray, domain: Domain, grid: Grid,
                    recovered: dict | None = None, weight: CarlemanWeight | None = None,
                    div_v1: np.ndarray | None = None, div_v2: np.ndarray | None = None) -> StabilityChain:
    """Evaluate every link of the chain from the norms of ``V1 - V2``.

    ``recovered`` may hold ``q_hm1`` (recovered ``H^{-1}`` norm of ``q2 - q1``),
    ``dalpha_hm1`` and ``dn_norm``; missing entries mark the chain incomplete.
    The reported ``final`` link pairs ``||V1 - V2||_{L2}`` with ``dn_norm``.
    """
    from .fields import reduce_to_em
    recovered = dict(recovered or {})
    h = grid.h
    mask = omega_mask_closed(domain, grid)
    V = np.asarray(V1, float) - np.asarray(V2, float)
    q1 = reduce_to_em(V1, h, div_v1).q.real
    q2 = reduce_to_em(V2, h, div_v2).q.real
    q = q2 - q1
    split = hodge_decompose(V, domain, grid)
    Vp, phi = split.V_prime, split.phi
    mesh = omega_mesh(domain, grid)
    if weight is None:
        weight = CarlemanWeight(domain, grid)
    dn_phi = mesh.neumann_matrix @ mesh.restrict(phi).ravel()
    dn_phi_g0 = float(np.sqrt(np.sum(np.abs(dn_phi) ** 2 * mesh.weights * weight.Gamma0_mask)))
    qm = np.where(mask, q, 0.0)
    norms = {
        "dV_l2": l2_norm(V, h, mask),
        "V_prime_l2": split.norms["V_prime_l2"],
        "V_prime_h2": h2_norm(Vp, h, mask),
        "V_prime_gamma_l2": boundary_l2(Vp, domain, grid),
        "grad_phi_l2": split.norms["grad_phi_l2"],
        "dn_phi_gamma0_l2": dn_phi_g0,
        "q_l2": l2_norm(qm, h, mask),
        "q_h1": h1_norm(qm, h, mask),
        "q_hm1_grid": hminus1_norm(qm, h),
    }
    links = [
        ChainLink("interpolation_q", norms["q_l2"], np.sqrt(norms["q_h1"] * norms["q_hm1_grid"])),
        ChainLink("trace_dn_phi", dn_phi_g0, norms["V_prime_gamma_l2"]),
        ChainLink("trace_V_prime", norms["V_prime_gamma_l2"],
                  np.sqrt(norms["V_prime_l2"] * norms["V_prime_h2"])),
        ChainLink("carleman_grad_phi", norms["grad_phi_l2"] ** 2,
                  norms["q_l2"] ** 2 + norms["V_prime_l2"] ** 2 + dn_phi_g0**2),
        ChainLink("triangle", norms["dV_l2"], norms["V_prime_l2"] + norms["grad_phi_l2"]),
    ]
    missing = [k for k in ("q_hm1", "dalpha_hm1", "dn_norm") if recovered.get(k) is None]
    if recovered.get("q_hm1") is not None:
        links.append(ChainLink("interpolation_q_recovered", norms["q_l2"],
                               np.sqrt(norms["q_h1"] * recovered["q_hm1"])))
    if recovered.get("dn_norm") is not None:
        norms["dn_norm"] = float(recovered["dn_norm"])
        links.append(ChainLink("final", norms["dV_l2"], float(recovered["dn_norm"])))
    for k in ("q_hm1", "dalpha_hm1"):
        if recovered.get(k) is not None:
            norms[k + "_recovered"] = float(recovered[k])
    if missing:
        warnings.warn(f"stability chain incomplete: missing {missing}", RuntimeWarning, stacklevel=2)
    return StabilityChain(links, norms, not missing, missing)


__all__ = [
    "CarlemanResult", "CarlemanWeight", "ChainLink", "HodgeSplit", "StabilityChain", "boundary_l2",
    "carleman_verify", "dirichlet_eigenfunction", "find_gamma0", "gauge_normalize", "hodge_decompose",
    "lp_norm", "poisson_dirichlet", "random_h20_family", "stability_chain", "wp_norm",
]
