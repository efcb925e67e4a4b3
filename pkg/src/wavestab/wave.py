"""Leapfrog solvers for the convection and magnetic wave equations, Neumann
traces, Dirichlet-to-Neumann operators and their verification identities.

A convection problem is specified by a real vector field ``V`` (array of
shape ``(2, nx, ny)``); a magnetic problem by a :class:`CoefficientPair`.
Solves run on the Omega block of :func:`omega_mesh` and are batched over
a leading axis of the Dirichlet data.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from ._kernels import leapfrog_step
from .errors import AdmissibilityError, ConfigurationError, InstabilityError
from .fields import CoefficientPair
from .geometry import Domain, Grid, OmegaMesh, omega_mesh, surface_quadrature, trapezoid_time_weights
from .stencils import (Stencil, convection_adjoint_stencil, convection_stencil, divergence,
                       magnetic_stencil)


def smoothstep(x):
    """C2 switch ``6x^5 - 15x^4 + 10x^3`` clipped to [0, 1]."""
    x = np.clip(np.asarray(x, float), 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


# ----------------------------------------------------------------------------
# boundary traces


@dataclass(eq=False)
class BoundaryTrace:
    """Values on the lateral boundary, shape ``(..., nt+1, nsamples)``."""

    values: np.ndarray
    mesh: OmegaMesh

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        g = self.mesh.grid
        if self.values.shape[-2:] != (g.nt + 1, self.mesh.nsamples):
            raise ConfigurationError(
                f"trace shape {self.values.shape} does not match ({g.nt + 1}, {self.mesh.nsamples})")

    @classmethod
    def from_function(cls, mesh: OmegaMesh, func: Callable) -> "BoundaryTrace":
        """Sample ``func(x, y, t)`` (broadcasting) on the boundary samples."""
        t = mesh.grid.t[:, None]
        x, y = mesh.points[:, 0][None, :], mesh.points[:, 1][None, :]
        return cls(np.broadcast_to(func(x, y, t), (len(mesh.grid.t), mesh.nsamples)).copy(), mesh)

    @classmethod
    def zeros(cls, mesh: OmegaMesh, batch: tuple = ()) -> "BoundaryTrace":
        return cls(np.zeros(batch + (mesh.grid.nt + 1, mesh.nsamples), complex), mesh)

    @property
    def batch_shape(self) -> tuple:
        return self.values.shape[:-2]

    def vanishes_at_t0(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values[..., 0, :]), initial=0.0) <= tol)

    def vanishes_at_tT(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values[..., -1, :]), initial=0.0) <= tol)

    def features(self, kind: str = "h1") -> np.ndarray:
        """Vectors whose Euclidean inner products are the L2/H1 inner products."""
        g = self.mesh.grid
        wt = trapezoid_time_weights(g.nt, g.dt)
        ws = self.mesh.weights
        v = self.values
        parts = [(v * np.sqrt(wt)[:, None] * np.sqrt(ws)[None, :]).reshape(v.shape[:-2] + (-1,))]
        if kind == "h1":
            ds = self.mesh.ds_next
            keep = ds > 1e-12
            tang = (np.roll(v, -1, axis=-1) - v)[..., keep] / np.sqrt(ds[keep])
            parts.append((tang * np.sqrt(wt)[:, None]).reshape(v.shape[:-2] + (-1,)))
            dtv = np.diff(v, axis=-2) / np.sqrt(g.dt)
            parts.append((dtv * np.sqrt(ws)[None, :]).reshape(v.shape[:-2] + (-1,)))
        elif kind != "l2":
            raise ValueError(kind)
        return np.concatenate(parts, axis=-1)

    def l2_norm(self):
        return np.linalg.norm(self.features("l2"), axis=-1)

    def h1_norm(self):
        return np.linalg.norm(self.features("h1"), axis=-1)

    def integral(self):
        return surface_quadrature(self.values, self.mesh)

    def reversed_in_time(self) -> "BoundaryTrace":
        return BoundaryTrace(self.values[..., ::-1, :].copy(), self.mesh)

    def __add__(self, other):
        return BoundaryTrace(self.values + _vals(other), self.mesh)

    def __sub__(self, other):
        return BoundaryTrace(self.values - _vals(other), self.mesh)

    def __mul__(self, c):
        return BoundaryTrace(self.values * _vals(c), self.mesh)

    __rmul__ = __mul__

    def __getitem__(self, idx) -> "BoundaryTrace":
        return BoundaryTrace(self.values[idx], self.mesh)


def _vals(x):
    return x.values if isinstance(x, BoundaryTrace) else x


# ----------------------------------------------------------------------------
# operators


def _is_pair(coeffs) -> bool:
    return isinstance(coeffs, CoefficientPair)


def operator_stencil(coeffs, h: float, adjoint: bool = False) -> Stencil:
    """Spatial stencil of the (adjoint) operator on the box grid."""
    if _is_pair(coeffs):
        c = coeffs.conjugate() if adjoint else coeffs
        return magnetic_stencil(c.A, c.q, c.divergence(h), h)
    V = np.asarray(coeffs)
    if np.iscomplexobj(V):
        if np.max(np.abs(V.imag), initial=0.0) > 1e-12:
            raise AdmissibilityError("the convection field must be real")
        V = V.real
    return convection_adjoint_stencil(V, h) if adjoint else convection_stencil(V, h)


def boundary_potential(coeffs, mesh: OmegaMesh, adjoint: bool = False) -> np.ndarray | None:
    """``i A . nu`` at the boundary samples for the magnetic form, else ``None``."""
    if not _is_pair(coeffs):
        return None
    A = np.conj(coeffs.A) if adjoint else coeffs.A
    Ab = mesh.restrict(A).reshape(2, -1)[:, mesh.nodes]
    return 1j * (Ab[0] * mesh.normals[:, 0] + Ab[1] * mesh.normals[:, 1])


@dataclass(eq=False)
class WaveSolution:
    """Result of a solve: optional snapshots ``u`` and the Neumann trace.

    ``u`` has shape ``(..., nt+1, bx, by)`` on the Omega block; ``trace`` is
    the (magnetic, for pairs) Neumann trace.
    """

    u: np.ndarray | None
    trace: BoundaryTrace
    dirichlet: BoundaryTrace


def _march(stencil: Stencil, mesh: OmegaMesh, data: np.ndarray, *, store: bool,
           callback: Callable | None, source: Callable | None, a_nu: np.ndarray | None,
           reverse_time: bool):
    """Leapfrog march of ``u_tt = L u + F`` with Dirichlet data, zero initial data."""
    g = mesh.grid
    if g.cfl_number > 0.9 + 1e-12:
        raise ConfigurationError(f"CFL number {g.cfl_number:.3f} exceeds 0.9")
    cc, ce, cw, cn, cs = (np.ascontiguousarray(mesh.restrict(a)) for a in stencil.arrays())
    mask = np.ascontiguousarray(mesh.interior)
    nb = data.shape[0]
    bx, by = mesh.shape
    nodes = mesh.nodes
    nm = mesh.neumann_matrix
    dt2 = g.dt**2
    nt = g.nt

    def t_of(k):
        return g.T - k * g.dt if reverse_time else k * g.dt

    def phys(k):
        return nt - k if reverse_time else k

    U = np.empty((nb, nt + 1, bx, by), complex) if store else None
    trace = np.empty((nb, nt + 1, mesh.nsamples), complex)

    # working arrays are laid out (bx, by, nb) so the kernel streams the batch
    up = np.zeros((bx, by, nb), complex)
    u = np.zeros((bx, by, nb), complex)
    out = np.zeros((bx, by, nb), complex)

    def add_source(arr, t, scale):
        F = np.asarray(source(t))
        vals = F[..., mask].reshape(-1, int(mask.sum()))
        arr[mask, :] += scale * vals.T

    def finish(k, arr):
        flat = arr.reshape(-1, nb)
        flat[nodes, :] = data[:, k, :].T
        tr = (nm @ flat).T
        if a_nu is not None:
            tr = tr + a_nu[None, :] * data[:, k, :]
        trace[:, k, :] = tr
        view = arr.transpose(2, 0, 1)
        if store:
            U[:, k] = view
        if callback is not None:
            callback(phys(k), view)

    # level 0
    finish(0, up)
    # Taylor start: u1 = u0 + dt^2/2 (L u0 + F0), i.e. a leapfrog step with up = u0
    u[:] = up
    leapfrog_step(up, up, u, cc, ce, cw, cn, cs, mask, 0.5 * dt2)
    if source is not None:
        add_source(u, t_of(0), 0.5 * dt2)
    finish(1, u)
    for k in range(1, nt):
        leapfrog_step(u, up, out, cc, ce, cw, cn, cs, mask, dt2)
        if source is not None:
            add_source(out, t_of(k), dt2)
        finish(k + 1, out)
        up, u, out = u, out, up
        if (k + 1) % 100 == 0 and not np.isfinite(u).all():
            raise InstabilityError(f"non-finite values at time step {k + 1}")
    if not np.isfinite(u).all():
        raise InstabilityError(f"non-finite values at time step {nt}")
    return U, trace


def _as_batch(f: BoundaryTrace) -> tuple[np.ndarray, tuple]:
    shape = f.batch_shape
    return f.values.reshape((-1,) + f.values.shape[-2:]), shape


def solve_forward(coeffs, f: BoundaryTrace, *, store: bool = True, callback: Callable | None = None,
                  source: Callable | None = None) -> WaveSolution:
    """Solve the forward problem with zero initial data and Dirichlet data ``f``.

    ``coeffs`` is a real field ``V`` (convection form) or a
    :class:`CoefficientPair` (magnetic form).  ``callback(k, u_k)`` receives
    each time level (batched).  ``source(t)`` adds a forcing term.
    """
    if not f.vanishes_at_t0(1e-12 * max(1.0, float(np.max(np.abs(f.values), initial=0.0)))):
        warnings.warn("Dirichlet data do not vanish at t = 0", RuntimeWarning)
    mesh = f.mesh
    data, shape = _as_batch(f)
    st = operator_stencil(coeffs, mesh.grid.h)
    U, tr = _march(st, mesh, data, store=store, callback=callback, source=source,
                   a_nu=boundary_potential(coeffs, mesh), reverse_time=False)
    if U is not None:
        U = U.reshape(shape + U.shape[1:])
    return WaveSolution(U, BoundaryTrace(tr.reshape(shape + tr.shape[1:]), mesh), f)


def solve_backward(coeffs, g: BoundaryTrace, *, store: bool = True, callback: Callable | None = None,
                   source: Callable | None = None) -> WaveSolution:
    """Solve the adjoint problem with zero final data and Dirichlet data ``g``.

    The adjoint of the convection operator is ``Delta v + div(V v)`` in flux
    form; the adjoint of the magnetic operator uses the conjugate potential.
    The scheme is the forward march in reversed time; snapshots and traces
    are returned in physical time order.
    """
    mesh = g.mesh
    data, shape = _as_batch(g)
    st = operator_stencil(coeffs, mesh.grid.h, adjoint=True)
    U, tr = _march(st, mesh, np.ascontiguousarray(data[:, ::-1, :]), store=store, callback=callback,
                   source=source, a_nu=boundary_potential(coeffs, mesh, adjoint=True), reverse_time=True)
    tr = tr[:, ::-1, :]
    if U is not None:
        U = U[:, ::-1].reshape(shape + U.shape[1:])
    return WaveSolution(U, BoundaryTrace(tr.reshape(shape + tr.shape[1:]), mesh), g)


def neumann_trace(u: np.ndarray, mesh: OmegaMesh, coeffs=None, form: str = "plain",
                  adjoint: bool = False) -> BoundaryTrace:
    """Normal derivative of block snapshots ``u`` (``(..., nt+1, bx, by)``).

    Second-order one-sided differences along the inward normal; the
    ``"magnetic"`` form adds ``i A . nu u``.
    """
    u = np.asarray(u, complex)
    lead = u.shape[:-2]
    flat = u.reshape((-1, mesh.shape[0] * mesh.shape[1]))
    tr = (mesh.neumann_matrix @ flat.T).T
    if form == "magnetic":
        if coeffs is None:
            raise ConfigurationError("magnetic form requires coefficients")
        tr = tr + boundary_potential(coeffs, mesh, adjoint)[None, :] * flat[:, mesh.nodes]
    elif form != "plain":
        raise ValueError(form)
    return BoundaryTrace(tr.reshape(lead + (mesh.nsamples,)), mesh)


# ----------------------------------------------------------------------------
# Dirichlet-to-Neumann operators


@dataclass(frozen=True, eq=False)
class DnOperator:
    """Dirichlet-to-Neumann map realised by a solve.

    For a :class:`CoefficientPair` the output is the magnetic normal
    derivative, for a convection field the plain normal derivative.
    ``direction="backward"`` gives the map of the adjoint final-value
    problem.
    """

    coeffs: object
    mesh: OmegaMesh
    direction: str = "forward"

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise ConfigurationError(self.direction)

    def apply(self, f: BoundaryTrace) -> BoundaryTrace:
        solver = solve_forward if self.direction == "forward" else solve_backward
        return solver(self.coeffs, f, store=False).trace

    __call__ = apply


def dn_apply(op: DnOperator, f: BoundaryTrace) -> BoundaryTrace:
    return op.apply(f)


def dn_equality_residual(V1: np.ndarray, V2: np.ndarray, probes: BoundaryTrace,
                         div_v1: np.ndarray | None = None, div_v2: np.ndarray | None = None,
                         tol: float = 1e-10) -> float:
    """Relative gap between the magnetic and convection DN differences.

    ``max_f ||[(N1 - N2) - (L1 - L2)] f||_{L2} / ||f||_{H1}`` over the
    (batched) probes, with ``(A_j, q_j)`` the reduced pairs.
    """
    from .fields import reduce_to_em
    mesh = probes.mesh
    V1, V2 = np.asarray(V1, float), np.asarray(V2, float)
    gap = np.abs(mesh.restrict(V1 - V2).reshape(2, -1)[:, mesh.nodes])
    if gap.size and gap.max() > tol:
        raise AdmissibilityError("the two fields differ on the boundary")
    h = mesh.grid.h
    P1, P2 = reduce_to_em(V1, h, div_v1), reduce_to_em(V2, h, div_v2)
    n1 = solve_forward(P1, probes, store=False).trace
    n2 = solve_forward(P2, probes, store=False).trace
    l1 = solve_forward(V1, probes, store=False).trace
    l2 = solve_forward(V2, probes, store=False).trace
    diff = (n1 - n2) - (l1 - l2)
    ratio = np.atleast_1d(diff.l2_norm() / probes.h1_norm())
    return float(ratio.max())


def _trapezoid_area_weights(mesh: OmegaMesh) -> np.ndarray:
    h = mesh.grid.h
    if mesh.domain.shape == "square":
        wx = np.full(mesh.shape[0], h); wx[[0, -1]] = h / 2
        wy = np.full(mesh.shape[1], h); wy[[0, -1]] = h / 2
        return np.outer(wx, wy)
    return np.where(mesh.inside, h * h, 0.0)


def pairing_identity_residual(V: np.ndarray, f: BoundaryTrace, g: BoundaryTrace):
    """Gap in the weak form of the DN map.

    Compares ``int_Sigma Lambda_V(f) conj(g)`` with
    ``int_Q (-u_t conj(v_t) + grad u . conj(grad v) + V . grad u conj(v))``
    where ``u`` solves the forward problem with data ``f`` and ``v`` the
    adjoint problem with data ``g`` (``g`` must vanish at ``t = T``).
    Returns ``(|gap|, ||f||_{H1} ||g||_{H1})``.
    """
    mesh = f.mesh
    grid = mesh.grid
    h, dt = grid.h, grid.dt
    su = solve_forward(V, f)
    sv = solve_backward(V, g)
    u, v = su.u, sv.u
    lhs = surface_quadrature(su.trace.values * np.conj(g.values), mesh)
    W = _trapezoid_area_weights(mesh)
    wt = trapezoid_time_weights(grid.nt, dt)
    # time term: midpoint rule on time intervals
    ut = np.diff(u, axis=0) / dt
    vt = np.diff(v, axis=0) / dt
    term_t = -dt * np.einsum("kij,kij,ij->", ut, np.conj(vt), W)
    # gradient term: edge sums (midpoint across the edge, trapezoid along it)
    ex = np.diff(u, axis=1) * np.conj(np.diff(v, axis=1)) / h**2
    ey = np.diff(u, axis=2) * np.conj(np.diff(v, axis=2)) / h**2
    if mesh.domain.shape == "square":
        wx = np.full(mesh.shape[0], h); wx[[0, -1]] = h / 2
        wy = np.full(mesh.shape[1], h); wy[[0, -1]] = h / 2
        gx = np.einsum("kij,j,k->", ex, wy, wt) * h
        gy = np.einsum("kij,i,k->", ey, wx, wt) * h
    else:
        mx = mesh.inside[1:, :] & mesh.inside[:-1, :]
        my = mesh.inside[:, 1:] & mesh.inside[:, :-1]
        gx = np.einsum("kij,ij,k->", ex, mx * h * h, wt)
        gy = np.einsum("kij,ij,k->", ey, my * h * h, wt)
    Vb = mesh.restrict(np.asarray(V, float))
    gu = np.gradient(u, h, axis=(1, 2), edge_order=2)
    conv = np.einsum("kij,ij,k->", (Vb[0] * gu[0] + Vb[1] * gu[1]) * np.conj(v), W, wt)
    rhs = term_t + gx + gy + conv
    scale = float(f.h1_norm() * g.h1_norm())
    return float(abs(lhs - rhs)), scale


def green_formula_residual(A: np.ndarray, u: np.ndarray, v: np.ndarray, domain: Domain, grid: Grid,
                           div_a: np.ndarray | None = None) -> float:
    """Discrete defect of the Green formula for the magnetic Laplacian.

    ``int Delta_A u conj(v) - int conj(Delta_Abar v) u`` minus the boundary
    term ``int_Gamma (d_nu + i nu.A) u conj(v) - conj((d_nu + i nu.Abar) v) u``.
    ``u``, ``v`` and ``A`` are box fields; area integrals use the trapezoid
    rule on Omega and normal derivatives use centred differences.
    """
    mesh = omega_mesh(domain, grid)
    h = grid.h
    A = np.asarray(A, complex)
    da = divergence(A, h) if div_a is None else np.asarray(div_a, complex)
    zero_q = np.zeros(A.shape[1:], complex)
    LA = magnetic_stencil(A, zero_q, da, h).apply_inner(u)
    LAb = magnetic_stencil(np.conj(A), zero_q, np.conj(da), h).apply_inner(v)
    i0, j0 = mesh.i0, mesh.j0
    bx, by = mesh.shape
    blk = (slice(i0 - 1, i0 - 1 + bx), slice(j0 - 1, j0 - 1 + by))
    W = _trapezoid_area_weights(mesh)
    ub, vb = mesh.restrict(u), mesh.restrict(v)
    vol = np.sum(W * (LA[blk] * np.conj(vb) - np.conj(LAb[blk]) * ub))
    # boundary term with centred normal differences
    pi_ = mesh.nodes // by + i0
    pj_ = mesh.nodes % by + j0
    nx_, ny_ = mesh.normals[:, 0], mesh.normals[:, 1]

    def dnu(f):
        gx = (f[pi_ + 1, pj_] - f[pi_ - 1, pj_]) / (2 * h)
        gy = (f[pi_, pj_ + 1] - f[pi_, pj_ - 1]) / (2 * h)
        return gx * nx_ + gy * ny_

    anu = A[0][pi_, pj_] * nx_ + A[1][pi_, pj_] * ny_
    ubd, vbd = u[pi_, pj_], v[pi_, pj_]
    bterm = (dnu(u) + 1j * anu * ubd) * np.conj(vbd) - np.conj(dnu(v) + 1j * np.conj(anu) * vbd) * ubd
    return float(abs(vol - np.sum(mesh.weights * bterm)))


def discrete_energy(u_prev: np.ndarray, u_next: np.ndarray, mesh: OmegaMesh) -> float:
    """Conserved leapfrog energy of the free wave equation with zero boundary data."""
    h, dt = mesh.grid.h, mesh.grid.dt
    kin = np.sum(np.abs(u_next - u_prev) ** 2) / dt**2

    def form(a, b):
        gx = np.diff(a, axis=-2) * np.conj(np.diff(b, axis=-2))
        gy = np.diff(a, axis=-1) * np.conj(np.diff(b, axis=-1))
        return np.sum(gx) + np.sum(gy)

    pot = np.real(form(u_next, u_prev)) / h**2
    return float((kin + pot) * h**2)


# ----------------------------------------------------------------------------
# probe basis and operator norm surrogate


def probe_modes(mesh: OmegaMesh, count: int, ramp_fraction: float = 0.25) -> list[tuple[str, int, int]]:
    """Index list ``(kind, k, m)`` of the first ``count`` probes ordered by frequency."""
    g = mesh.grid
    P = mesh.perimeter
    cands = []
    kmax = int(np.ceil(np.sqrt(count))) + 2
    for m in range(1, kmax + 1):
        wt = (2 * m - 1) * np.pi / (2 * g.T)
        cands.append((wt, ("c", 0, m)))
        for k in range(1, kmax + 1):
            ws = 2 * np.pi * k / P
            fr = np.hypot(ws, wt)
            cands.append((fr, ("c", k, m)))
            cands.append((fr, ("s", k, m)))
    cands.sort(key=lambda c: (c[0], c[1]))
    return [c[1] for c in cands[:count]]


def probe_basis(mesh: OmegaMesh, count: int, ramp_fraction: float = 0.25) -> BoundaryTrace:
    """Tensor probes: arclength Fourier modes times ramped temporal sine modes.

    Temporal factors are ``sin((2m-1) pi t / (2T))`` (vanishing at ``t=0``)
    multiplied by a C2 switch over the first ``ramp_fraction`` of the
    horizon.  Probes are nested: the first ``count`` of a longer list.
    """
    g = mesh.grid
    P = mesh.perimeter
    t = g.t
    ramp = smoothstep(t / (ramp_fraction * g.T))
    out = np.empty((count, g.nt + 1, mesh.nsamples))
    for n, (kind, k, m) in enumerate(probe_modes(mesh, count)):
        theta = 2 * np.pi * k * mesh.s / P
        sp = np.cos(theta) if kind == "c" else np.sin(theta)
        tp = np.sin((2 * m - 1) * np.pi * t / (2 * g.T)) * ramp
        out[n] = tp[:, None] * sp[None, :]
    return BoundaryTrace(out, mesh)


def dn_norm_estimate(op1: DnOperator, op2: DnOperator, basis_size: int = 32,
                     input_norm: str = "h1", probes: BoundaryTrace | None = None,
                     return_details: bool = False):
    """Largest singular value of ``op1 - op2`` on the probe span.

    The probe span is orthonormalised in ``H1(Sigma)`` (or ``L2`` with
    ``input_norm="l2"``) through a Cholesky factor of its Gram matrix; the
    output is measured in ``L2(Sigma)``.  A numerically singular Gram matrix
    triggers a warning and the basis is truncated.
    """
    mesh = op1.mesh
    f = probe_basis(mesh, basis_size) if probes is None else probes
    d = op1.apply(f) - op2.apply(f)
    return dn_norm_from_outputs(f, d, input_norm, return_details)


def dn_norm_from_outputs(f: BoundaryTrace, d: BoundaryTrace, input_norm: str = "h1",
                         return_details: bool = False):
    """Operator norm surrogate from probe inputs ``f`` and output differences ``d``."""
    Fi = f.features(input_norm)
    Do = d.features("l2")
    G = Fi.conj() @ Fi.T
    n = G.shape[0]
    L = None
    while n > 0:
        try:
            L = linalg.cholesky(G[:n, :n], lower=True)
            if np.min(np.abs(np.diag(L))) ** 2 > 1e-12 * np.max(np.abs(np.diag(G[:n, :n]))):
                break
        except linalg.LinAlgError:
            pass
        n -= 1
    if n < G.shape[0]:
        warnings.warn(f"probe Gram matrix singular; basis reduced to {n}", RuntimeWarning)
    M = linalg.solve_triangular(L.conj(), Do[:n], lower=True)
    s = linalg.svdvals(M.T) if M.size else np.zeros(1)
    val = float(s[0]) if s.size else 0.0
    if return_details:
        return val, {"basis_used": n, "singular_values": s}
    return val


__all__ = [
    "BoundaryTrace", "DnOperator", "WaveSolution", "discrete_energy", "dn_apply",
    "dn_equality_residual", "dn_norm_estimate", "dn_norm_from_outputs", "green_formula_residual",
    "neumann_trace", "operator_stencil", "pairing_identity_residual", "probe_basis", "smoothstep",
    "solve_backward", "solve_forward", "omega_mesh",
]
