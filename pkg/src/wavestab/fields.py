"""Coefficient data: the convection field V, magnetic/electric pairs (A, q),
admissibility checks, extension, mollification and grid Sobolev norms.

Scalar fields are arrays ``(nx, ny)`` on the box grid and vector fields are
arrays ``(2, nx, ny)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import AdmissibilityError, ConfigurationError
from .geometry import BOUNDARY, Domain, Grid, classify_nodes
from .stencils import convection_stencil, curl, divergence, magnetic_stencil

# ----------------------------------------------------------------------------
# coefficient containers


@dataclass(frozen=True, eq=False)
class CoefficientPair:
    """Magnetic potential ``A`` (pure imaginary) and electric potential ``q``.

    ``div_a`` optionally carries the exact divergence of ``A``.  When it is
    present the magnetic operator uses it for its ``i div A`` term; otherwise
    centred differences are used.
    """

    A: np.ndarray
    q: np.ndarray
    div_a: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=complex))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=complex))
        if self.A.ndim != 3 or self.A.shape[0] != 2 or self.A.shape[1:] != self.q.shape:
            raise ConfigurationError("A must have shape (2, nx, ny) matching q")

    def divergence(self, h: float) -> np.ndarray:
        return divergence(self.A, h) if self.div_a is None else np.asarray(self.div_a, complex)

    def conjugate(self) -> "CoefficientPair":
        return CoefficientPair(np.conj(self.A), np.conj(self.q),
                               None if self.div_a is None else np.conj(self.div_a))

    def with_gauge(self, phi: np.ndarray, h: float, lap_phi: np.ndarray | None = None) -> "CoefficientPair":
        """``(A + grad phi, q)``; ``lap_phi`` is used for the divergence if given."""
        from .stencils import gradient
        g = gradient(phi, h)
        if self.div_a is None and lap_phi is None:
            return CoefficientPair(self.A + g, self.q)
        lap = divergence(g, h) if lap_phi is None else lap_phi
        return CoefficientPair(self.A + g, self.q, self.divergence(h) + lap)

    def stencil(self, h: float):
        return magnetic_stencil(self.A, self.q, self.divergence(h), h)


@dataclass(frozen=True)
class MollifierConfig:
    """Smoothing parameter ``lam`` and exponent ``alpha`` in ``(0, 1/2]``."""

    lam: float
    alpha: float = 0.45

    def __post_init__(self):
        if not 0 < self.alpha <= 0.5:
            raise ConfigurationError(f"alpha = {self.alpha} outside (0, 1/2]")
        if self.lam <= 0:
            raise ConfigurationError("lambda must be positive")

    @property
    def radius(self) -> float:
        return self.lam ** (-self.alpha)


# ----------------------------------------------------------------------------
# reduction of the convection problem


def reduce_to_em(V: np.ndarray, h: float, div_v: np.ndarray | None = None) -> CoefficientPair:
    """Magnetic/electric pair equivalent to the convection field ``V``.

    ``A = (i/2) V`` and ``q = |V|^2/4 - div V / 2`` with the divergence taken
    by centred differences.  If the exact divergence ``div_v`` is known it is
    attached as the divergence of ``A``.
    """
    V = np.asarray(V)
    if np.iscomplexobj(V):
        if np.max(np.abs(V.imag), initial=0.0) > 1e-12:
            raise AdmissibilityError("the convection field must be real")
        V = V.real
    A = 0.5j * V
    q = 0.25 * (V[0] ** 2 + V[1] ** 2) - 0.5 * divergence(V, h)
    div_a = None if div_v is None else 0.5j * np.asarray(div_v, float)
    return CoefficientPair(A, q.astype(complex), div_a)


def em_operator_residual(V: np.ndarray, u: np.ndarray, grid: Grid,
                         div_v: np.ndarray | None = None, mask: np.ndarray | None = None) -> float:
    """L2(Q) norm of the difference between the magnetic and convection operators.

    ``u`` has shape ``(nt+1, nx, ny)`` on the same spatial grid as ``V``.
    Both operators use the solver stencils with the centred second time
    difference; the norm is taken over inner nodes (optionally ``mask``) and
    inner time levels.  With the exact ``div_v`` supplied, the magnetic
    operator uses it while ``q`` keeps the grid divergence, so the result
    measures the discretisation error of the reduction.
    """
    h, dt = grid.h, grid.dt
    pair = reduce_to_em(V, h, div_v)
    utt = (u[2:] - 2 * u[1:-1] + u[:-2]) / dt**2
    lv = convection_stencil(np.asarray(V, float), h).apply_inner(u[1:-1])
    la = pair.stencil(h).apply_inner(u[1:-1])
    diff = (utt[:, 1:-1, 1:-1] - la) - (utt[:, 1:-1, 1:-1] - lv)
    if mask is not None:
        diff = diff * mask[1:-1, 1:-1]
    return float(np.sqrt(np.sum(np.abs(diff) ** 2) * h**2 * dt))


# ----------------------------------------------------------------------------
# admissibility, extension


def w1inf_norm(f: np.ndarray, h: float, mask: np.ndarray | None = None) -> float:
    """Grid ``W^{1,inf}`` norm: max of values and forward differences."""
    f = np.asarray(f)
    if f.ndim == 2:
        f = f[None]
    vals = [np.abs(f)]
    dx = np.abs(np.diff(f, axis=-2)) / h
    dy = np.abs(np.diff(f, axis=-1)) / h
    if mask is not None:
        vals = [np.where(mask, vals[0], 0.0)]
        dx = np.where(mask[1:, :] & mask[:-1, :], dx, 0.0)
        dy = np.where(mask[:, 1:] & mask[:, :-1], dy, 0.0)
    return float(max(vals[0].max(initial=0.0), dx.max(initial=0.0), dy.max(initial=0.0)))


def check_admissible(pair_or_v, M: float, domain: Domain, grid: Grid) -> None:
    """Raise :class:`AdmissibilityError` unless the data are bounded by ``M`` on Omega."""
    labels, _ = classify_nodes(domain, grid)
    mask = labels <= BOUNDARY
    if isinstance(pair_or_v, CoefficientPair):
        na = w1inf_norm(pair_or_v.A, grid.h, mask)
        nq = float(np.max(np.abs(pair_or_v.q[mask])))
        if np.max(np.abs(pair_or_v.A.real)) > 1e-12:
            raise AdmissibilityError("magnetic potential must be pure imaginary")
        if na > M or nq > M:
            raise AdmissibilityError(f"||A||_W1inf = {na:.3g}, ||q||_inf = {nq:.3g} exceed M = {M}")
    else:
        nv = w1inf_norm(pair_or_v, grid.h, mask)
        if nv > M:
            raise AdmissibilityError(f"||V||_W1inf = {nv:.3g} exceeds M = {M}")


def boundary_band(domain: Domain, grid: Grid, width: int = 2) -> np.ndarray:
    """Mask of boundary nodes and Omega nodes within ``width`` cells of them."""
    labels, _ = classify_nodes(domain, grid)
    X, Y = grid.mesh()
    sd = domain.signed_distance(X, Y)
    return (labels == BOUNDARY) | ((labels <= BOUNDARY) & (sd > -width * grid.h - 1e-12))


def extend_by_background(V: np.ndarray, V0: np.ndarray, domain: Domain, grid: Grid,
                         band: int = 2, tol: float = 1e-10) -> np.ndarray:
    """Keep ``V`` on Omega and use ``V0`` elsewhere.

    ``V`` must agree with ``V0`` on the boundary and on a band of ``band``
    cells inside it, otherwise the data are not admissible.
    """
    labels, _ = classify_nodes(domain, grid)
    mask = boundary_band(domain, grid, band)
    V = np.asarray(V)
    V0 = np.broadcast_to(np.asarray(V0), V.shape)
    gap = np.max(np.abs((V - V0)[..., mask]), initial=0.0)
    if gap > tol:
        raise AdmissibilityError(f"field differs from the background by {gap:.3g} near the boundary")
    inside = labels <= BOUNDARY
    return np.where(inside, V, V0)


# ----------------------------------------------------------------------------
# mollification


def bump_kernel(r: np.ndarray) -> np.ndarray:
    """Standard smooth bump ``exp(-1/(1-r^2))`` on the unit disk, zero outside."""
    r = np.asarray(r, float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def mollifier_weights(cfg: MollifierConfig, h: float) -> np.ndarray | None:
    """Discrete kernel weights summing to one, or ``None`` if it degenerates."""
    eps = cfg.radius
    m = int(np.floor(eps / h))
    if m < 1:
        return None
    k = h * np.arange(-m, m + 1)
    KX, KY = np.meshgrid(k, k, indexing="ij")
    w = bump_kernel(np.hypot(KX, KY) / eps)
    return w / w.sum()


def mollify(field: np.ndarray, cfg: MollifierConfig, grid: Grid) -> np.ndarray:
    """Convolve each component with ``chi_lam(x) = lam^{2 alpha} chi(lam^alpha x)``.

    When the kernel radius ``lam^{-alpha}`` is below the grid step the
    kernel degenerates to the identity; a warning is emitted and the input is
    returned.  The field is extended by its edge values outside the box.
    """
    field = np.asarray(field)
    w = mollifier_weights(cfg, grid.h)
    if w is None:
        warnings.warn("mollifier radius below the grid step; returning the input", RuntimeWarning)
        return field.copy()
    lead = field.shape[:-2]
    flat = field.reshape((-1,) + field.shape[-2:])
    m = w.shape[0] // 2
    # edge padding keeps constants exact up to the box edge
    out = np.stack([signal.fftconvolve(np.pad(f, m, mode="edge"), w, mode="valid") for f in flat])
    return out.reshape(lead + field.shape[-2:])


# ----------------------------------------------------------------------------
# analytic coefficient generators


def _bump_parts(X, Y, center, radius):
    """Smooth bump ``g = exp(1 - 1/(1-s))``, ``s = |x-c|^2/R^2`` with derivatives."""
    dx, dy = X - center[0], Y - center[1]
    s = (dx**2 + dy**2) / radius**2
    g = np.zeros_like(s)
    g1 = np.zeros_like(s)
    g2 = np.zeros_like(s)
    inside = s < 1.0
    si = s[inside]
    gi = np.exp(1.0 - 1.0 / (1.0 - si))
    g[inside] = gi
    g1[inside] = -gi / (1.0 - si) ** 2
    g2[inside] = gi * (1.0 / (1.0 - si) ** 4 - 2.0 / (1.0 - si) ** 3)
    return dx, dy, s, g, g1, g2


def smooth_bump(grid: Grid, center, radius: float, amplitude: float = 1.0):
    """Scalar bump with peak ``amplitude``; returns ``(value, gradient, laplacian)``."""
    X, Y = grid.mesh()
    dx, dy, s, g, g1, g2 = _bump_parts(X, Y, center, radius)
    grad = np.stack([g1 * 2 * dx / radius**2, g1 * 2 * dy / radius**2])
    lap = g2 * 4 * s / radius**2 + g1 * 4 / radius**2
    return amplitude * g, amplitude * grad, amplitude * lap


@dataclass(frozen=True, eq=False)
class AnalyticField:
    """A vector field sampled on the grid together with its exact divergence and curl."""

    values: np.ndarray
    div: np.ndarray
    curl: np.ndarray

    def __add__(self, other: "AnalyticField") -> "AnalyticField":
        return AnalyticField(self.values + other.values, self.div + other.div, self.curl + other.curl)

    def __rmul__(self, c: float) -> "AnalyticField":
        return AnalyticField(c * self.values, c * self.div, c * self.curl)

    @classmethod
    def zeros(cls, grid: Grid) -> "AnalyticField":
        z = np.zeros((grid.nx, grid.ny))
        return cls(np.zeros((2, grid.nx, grid.ny)), z, z.copy())


def vector_bump(grid: Grid, kind: str, center=(0.0, 0.0), radius: float = 0.3,
                amplitude: float = 1.0, direction=(1.0, 0.0)) -> AnalyticField:
    """Compactly supported smooth vector fields with known divergence and curl.

    ``kind`` is one of ``"uniform"`` (constant direction times a bump),
    ``"swirl"`` (divergence free rotation), ``"gradient"`` (curl free).
    """
    X, Y = grid.mesh()
    dx, dy, s, g, g1, g2 = _bump_parts(X, Y, center, radius)
    gx, gy = g1 * 2 * dx / radius**2, g1 * 2 * dy / radius**2
    if kind == "uniform":
        c = np.asarray(direction, float)
        V = np.stack([c[0] * g, c[1] * g])
        div = c[0] * gx + c[1] * gy
        cu = c[1] * gx - c[0] * gy
    elif kind == "swirl":
        V = np.stack([-dy * g, dx * g]) / radius
        div = np.zeros_like(g)
        cu = (2 * g + 2 * s * g1) / radius
    elif kind == "gradient":
        V = np.stack([gx, gy]) * radius
        div = (g2 * 4 * s / radius**2 + g1 * 4 / radius**2) * radius
        cu = np.zeros_like(g)
    else:
        raise ConfigurationError(f"unknown vector field kind {kind!r}")
    return AnalyticField(amplitude * V, amplitude * div, amplitude * cu)


def cone_field(grid: Grid, center=(0.0, 0.0), radius: float = 0.4, direction=(1.0, 0.0)) -> np.ndarray:
    """Lipschitz vector field ``c * max(0, 1 - |x - x0|/R)``."""
    X, Y = grid.mesh()
    g = np.maximum(0.0, 1.0 - np.hypot(X - center[0], Y - center[1]) / radius)
    c = np.asarray(direction, float)
    return np.stack([c[0] * g, c[1] * g])


# ----------------------------------------------------------------------------
# grid norms


def l2_norm(f: np.ndarray, h: float, mask: np.ndarray | None = None) -> float:
    f = np.asarray(f)
    a2 = np.abs(f) ** 2
    if mask is not None:
        a2 = a2 * mask
    return float(np.sqrt(a2.sum() * h**2))


def h1_norm(f: np.ndarray, h: float, mask: np.ndarray | None = None) -> float:
    """Values plus forward differences, both in L2 over ``mask``."""
    f = np.asarray(f)
    if f.ndim == 2:
        f = f[None]
    total = 0.0
    for c in f:
        m = np.ones(c.shape, bool) if mask is None else mask
        dx = np.diff(c, axis=0) / h
        dy = np.diff(c, axis=1) / h
        total += (np.sum(np.abs(c[m]) ** 2) + np.sum(np.abs(dx[m[1:] & m[:-1]]) ** 2)
                  + np.sum(np.abs(dy[m[:, 1:] & m[:, :-1]]) ** 2)) * h**2
    return float(np.sqrt(total))


def h2_norm(f: np.ndarray, h: float, mask: np.ndarray | None = None) -> float:
    """Values, first and second centred differences in L2 over inner ``mask`` nodes."""
    f = np.asarray(f)
    if f.ndim == 2:
        f = f[None]
    total = 0.0
    for c in f:
        m = np.ones(c.shape, bool) if mask is None else mask
        inner = np.zeros_like(m)
        inner[1:-1, 1:-1] = m[1:-1, 1:-1] & m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2]
        gx = (c[2:, 1:-1] - c[:-2, 1:-1]) / (2 * h)
        gy = (c[1:-1, 2:] - c[1:-1, :-2]) / (2 * h)
        xx = (c[2:, 1:-1] - 2 * c[1:-1, 1:-1] + c[:-2, 1:-1]) / h**2
        yy = (c[1:-1, 2:] - 2 * c[1:-1, 1:-1] + c[1:-1, :-2]) / h**2
        xy = (c[2:, 2:] - c[2:, :-2] - c[:-2, 2:] + c[:-2, :-2]) / (4 * h**2)
        mi = inner[1:-1, 1:-1]
        total += np.sum(np.abs(c[m]) ** 2) * h**2
        total += sum(np.sum(np.abs(d[mi]) ** 2) for d in (gx, gy, xx, yy, xy, xy)) * h**2
    return float(np.sqrt(total))


def fourier_transform(f: np.ndarray, h: float, pad: int = 2):
    """Continuous Fourier transform ``int e^{-i x.xi} f(x) dx`` of a box field.

    The field is zero padded by ``pad``; node ``(0, 0)`` of the input is at
    the box origin, which is accounted for in the phase.  Returns
    ``(fhat, xi_x, xi_y)`` with ``fhat`` in FFT order, the grid origin taken
    as ``-h*(n-1)/2`` (the box is centred).
    """
    f = np.asarray(f)
    nx, ny = f.shape[-2:]
    Nx, Ny = pad * nx, pad * ny
    F = np.fft.fft2(f, s=(Nx, Ny), axes=(-2, -1))
    kx = 2 * np.pi * np.fft.fftfreq(Nx, d=h)
    ky = 2 * np.pi * np.fft.fftfreq(Ny, d=h)
    x0 = -h * (nx - 1) / 2
    y0 = -h * (ny - 1) / 2
    phase = np.exp(-1j * (kx[:, None] * x0 + ky[None, :] * y0))
    return h**2 * F * phase, kx, ky


def hminus1_norm(f: np.ndarray, h: float, pad: int = 2) -> float:
    """Spectral ``H^{-1}`` norm on the zero-padded box."""
    f = np.asarray(f)
    if f.ndim == 2:
        f = f[None]
    total = 0.0
    for c in f:
        fh, kx, ky = fourier_transform(c, h, pad)
        w = 1.0 / (1.0 + kx[:, None] ** 2 + ky[None, :] ** 2)
        L2 = (pad * c.shape[0] * h) * (pad * c.shape[1] * h)
        total += np.sum(np.abs(fh) ** 2 * w) / L2
    return float(np.sqrt(total))


def omega_mask(domain: Domain, grid: Grid) -> np.ndarray:
    """Nodes of the closed domain on the box grid."""
    labels, _ = classify_nodes(domain, grid)
    return labels <= BOUNDARY


__all__ = [
    "AnalyticField", "CoefficientPair", "MollifierConfig", "boundary_band", "bump_kernel",
    "check_admissible", "cone_field", "curl", "divergence", "em_operator_residual",
    "extend_by_background", "fourier_transform", "h1_norm", "h2_norm", "hminus1_norm",
    "l2_norm", "mollifier_weights", "mollify", "omega_mask",
    "reduce_to_em", "smooth_bump", "vector_bump", "w1inf_norm",
]
