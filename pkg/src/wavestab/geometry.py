"""Domain, grid and quadrature primitives.

The spatial box is ``[-B, B]^2`` sampled with a uniform step ``h``.  The
domain ``Omega`` (a square or a disk) sits inside the box, surrounded by a
collar of width ``rho``.  All fields live on the box grid; wave solves run on
the smallest block of box nodes that contains ``Omega``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import ndimage, sparse

from .errors import ConfigurationError

INTERIOR, BOUNDARY, COLLAR, EXTERIOR = 0, 1, 2, 3
NODE_CLASSES = {"interior": INTERIOR, "boundary": BOUNDARY, "collar": COLLAR, "exterior": EXTERIOR}

_TOL = 1e-9


@dataclass(frozen=True)
class Domain:
    """Omega together with the enclosing box and the collar width.

    ``shape`` is ``"square"`` (axis aligned, default) or ``"disk"``.  The box
    is centred at the origin.
    """

    omega_center: tuple[float, float] = (0.0, 0.0)
    omega_half_width: float = 0.5
    box_half_width: float = 1.0
    rho: float = 0.25
    shape: str = "square"
    n_dims: int = 2

    def __post_init__(self):
        object.__setattr__(self, "omega_center", tuple(float(c) for c in self.omega_center))
        if self.shape not in ("square", "disk"):
            raise ConfigurationError(f"unknown domain shape {self.shape!r}")
        if self.n_dims != 2:
            raise ConfigurationError("only two space dimensions are supported")
        if self.rho <= 0 or self.omega_half_width <= 0:
            raise ConfigurationError("rho and omega_half_width must be positive")
        reach = max(abs(c) for c in self.omega_center) + self.omega_half_width
        if self.box_half_width - reach < 2 * self.rho - _TOL:
            raise ConfigurationError(
                f"box margin {self.box_half_width - reach:g} is smaller than 2*rho = {2 * self.rho:g}")

    @property
    def diam_omega(self) -> float:
        if self.shape == "square":
            return 2.0 * self.omega_half_width * np.sqrt(2.0)
        return 2.0 * self.omega_half_width

    @property
    def min_time(self) -> float:
        """Lower bound on the final time for geometric optics probing."""
        return self.diam_omega + 4.0 * self.rho

    @property
    def radius(self) -> float:
        """Radius of the smallest origin-centred disk containing Omega."""
        c = np.hypot(*self.omega_center)
        return c + (self.diam_omega / 2.0)

    def signed_distance(self, x, y):
        """Signed distance to the boundary (negative inside Omega)."""
        dx = np.asarray(x, float) - self.omega_center[0]
        dy = np.asarray(y, float) - self.omega_center[1]
        a = self.omega_half_width
        if self.shape == "disk":
            return np.hypot(dx, dy) - a
        qx, qy = np.abs(dx) - a, np.abs(dy) - a
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        inside = np.minimum(np.maximum(qx, qy), 0.0)
        return outside + inside

    def distance(self, x, y):
        """Euclidean distance to Omega (zero inside)."""
        return np.maximum(self.signed_distance(x, y), 0.0)


@dataclass(frozen=True)
class Direction:
    """A unit vector of the circle, parameterised by its angle."""

    angle: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def perp(self) -> np.ndarray:
        """The vector rotated by +90 degrees."""
        return np.array([-np.sin(self.angle), np.cos(self.angle)])

    def __neg__(self) -> "Direction":
        return Direction(self.angle + np.pi)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, float)
        return cls(float(np.arctan2(v[1], v[0])))


def direction_fan(n: int, half_turn: bool = True) -> list[Direction]:
    """``n`` equispaced directions over a half turn (or the full circle)."""
    span = np.pi if half_turn else 2 * np.pi
    return [Direction(span * k / n) for k in range(n)]


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid on the box ``[-B, B]^2 x [0, T]``."""

    h: float
    nx: int
    ny: int
    dt: float
    nt: int
    T: float
    origin: float

    @classmethod
    def build(cls, domain: Domain, h: float, T: float, cfl: float = 0.5,
              enforce_window: bool = True) -> "Grid":
        """Construct the grid, validating CFL and probing-window conditions.

        ``h`` must divide the box half width and the Omega extents so that a
        square Omega has its boundary on grid lines.
        """
        if not 0 < cfl <= 0.9:
            raise ConfigurationError(f"cfl safety factor {cfl} outside (0, 0.9]")
        if h <= 0:
            raise ConfigurationError("grid step must be positive")
        B = domain.box_half_width
        ncell = 2 * B / h
        if abs(ncell - round(ncell)) > 1e-8:
            raise ConfigurationError("grid step must divide the box width")
        if domain.shape == "square":
            for v in (*domain.omega_center, domain.omega_half_width):
                if abs(v / h - round(v / h)) > 1e-8:
                    raise ConfigurationError("square Omega must be aligned with grid lines")
        if enforce_window and T <= domain.min_time:
            raise ConfigurationError(
                f"T = {T:g} must exceed diam(Omega) + 4 rho = {domain.min_time:g}")
        n = int(round(ncell)) + 1
        nt = int(np.ceil(T / (cfl * h / np.sqrt(2.0)) - 1e-12))
        return cls(h=float(h), nx=n, ny=n, dt=T / nt, nt=nt, T=float(T), origin=-float(B))

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.ny)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.nt + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def cfl_number(self) -> float:
        return self.dt * np.sqrt(2.0) / self.h

    def with_time(self, T: float, cfl: float | None = None) -> "Grid":
        """Same spatial grid, different horizon (no window check)."""
        c = self.cfl_number if cfl is None else cfl
        nt = int(np.ceil(T / (c * self.h / np.sqrt(2.0)) - 1e-12))
        return Grid(self.h, self.nx, self.ny, T / nt, nt, float(T), self.origin)


def trapezoid_time_weights(nt: int, dt: float) -> np.ndarray:
    w = np.full(nt + 1, dt)
    w[0] = w[-1] = dt / 2
    return w


def classify_nodes(domain: Domain, grid: Grid):
    """Label every box node as interior, boundary, collar or exterior.

    Returns ``(labels, normals)`` where ``labels`` is an integer array of
    shape ``(nx, ny)`` with values from :data:`NODE_CLASSES` and ``normals``
    has shape ``(2, nx, ny)``: outward unit normals on boundary nodes, zero
    elsewhere.
    """
    X, Y = grid.mesh()
    sd = domain.signed_distance(X, Y)
    closed = sd <= _TOL * grid.h
    # a closed node is on the boundary if one of its four neighbours is outside
    padded = np.pad(closed, 1, constant_values=False)
    all_nb = padded[2:, 1:-1] & padded[:-2, 1:-1] & padded[1:-1, 2:] & padded[1:-1, :-2]
    boundary = closed & ~all_nb
    labels = np.full(closed.shape, EXTERIOR, dtype=np.int8)
    labels[(~closed) & (sd < domain.rho)] = COLLAR
    labels[closed] = INTERIOR
    labels[boundary] = BOUNDARY
    nb = int(boundary.sum())
    if nb < 8:
        raise ConfigurationError(f"grid resolves only {nb} boundary nodes (need at least 8)")

    normals = np.zeros((2,) + closed.shape)
    dx = X - domain.omega_center[0]
    dy = Y - domain.omega_center[1]
    if domain.shape == "disk":
        r = np.hypot(dx, dy)
        r[r == 0] = 1.0
        nx_, ny_ = dx / r, dy / r
    else:
        a = domain.omega_half_width
        on_x = np.abs(np.abs(dx) - a) < 1e-9 * grid.h + _TOL
        on_y = np.abs(np.abs(dy) - a) < 1e-9 * grid.h + _TOL
        nx_ = np.where(on_x, np.sign(dx), 0.0)
        ny_ = np.where(on_y, np.sign(dy), 0.0)
        norm = np.hypot(nx_, ny_)
        norm[norm == 0] = 1.0
        nx_, ny_ = nx_ / norm, ny_ / norm
    normals[0][boundary] = nx_[boundary]
    normals[1][boundary] = ny_[boundary]
    return labels, normals


@dataclass(frozen=True, eq=False)
class OmegaMesh:
    """Solver view of Omega: the node block, masks and boundary samples.

    Boundary samples are ordered counter-clockwise.  For the square they run
    side by side (bottom, right, top, left) and each corner appears once per
    adjacent side, so every sample carries the normal of its side.
    ``nodes`` are flat indices into the block (C order), ``weights`` are the
    arclength trapezoid weights, ``s`` the cumulative arclength.
    """

    domain: Domain
    grid: Grid
    i0: int
    j0: int
    shape: tuple[int, int]
    interior: np.ndarray
    inside: np.ndarray
    nodes: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    s: np.ndarray
    ds_next: np.ndarray = field(repr=False)
    neumann_matrix: sparse.csr_matrix = field(repr=False)

    @property
    def nsamples(self) -> int:
        return len(self.nodes)

    @property
    def block(self) -> tuple[slice, slice]:
        return (slice(self.i0, self.i0 + self.shape[0]), slice(self.j0, self.j0 + self.shape[1]))

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())

    def restrict(self, box_field: np.ndarray) -> np.ndarray:
        """Slice a box field (trailing two axes) to the solver block."""
        return box_field[(Ellipsis,) + self.block]

    @cached_property
    def block_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = self.grid.mesh()
        return X[self.block], Y[self.block]


@lru_cache(maxsize=32)
def omega_mesh(domain: Domain, grid: Grid) -> OmegaMesh:
    """Build (and cache) the solver mesh for ``domain`` on ``grid``."""
    labels, normals = classify_nodes(domain, grid)
    closed = labels <= BOUNDARY
    ii, jj = np.nonzero(closed)
    i0, i1, j0, j1 = ii.min(), ii.max() + 1, jj.min(), jj.max() + 1
    if min(i1 - i0, j1 - j0) < 4:
        raise ConfigurationError("Omega spans fewer than four grid cells")
    sub = labels[i0:i1, j0:j1]
    nrm = normals[:, i0:i1, j0:j1]
    shape = sub.shape
    h = grid.h
    X, Y = grid.mesh()
    Xb, Yb = X[i0:i1, j0:j1], Y[i0:i1, j0:j1]

    if domain.shape == "square":
        nxb, nyb = shape
        sides = [
            ([(i, 0) for i in range(nxb)], (0.0, -1.0)),
            ([(nxb - 1, j) for j in range(nyb)], (1.0, 0.0)),
            ([(i, nyb - 1) for i in range(nxb - 1, -1, -1)], (0.0, 1.0)),
            ([(0, j) for j in range(nyb - 1, -1, -1)], (-1.0, 0.0)),
        ]
        idx, nv, w, s = [], [], [], []
        offset = 0.0
        for nodes, normal in sides:
            m = len(nodes)
            ws = np.full(m, h)
            ws[0] = ws[-1] = h / 2
            idx += nodes
            nv += [normal] * m
            w.append(ws)
            s.append(offset + h * np.arange(m))
            offset += h * (m - 1)
        idx = np.array(idx)
        nv = np.array(nv)
        w = np.concatenate(w)
        s = np.concatenate(s)
    else:
        bi, bj = np.nonzero(sub == BOUNDARY)
        ang = np.arctan2(Yb[bi, bj] - domain.omega_center[1], Xb[bi, bj] - domain.omega_center[0])
        order = np.argsort(ang, kind="stable")
        bi, bj, ang = bi[order], bj[order], ang[order]
        idx = np.stack([bi, bj], axis=1)
        nv = np.stack([nrm[0, bi, bj], nrm[1, bi, bj]], axis=1)
        R = domain.omega_half_width
        gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
        w = R * 0.5 * (gaps + np.roll(gaps, 1))
        s = R * (ang - ang[0])

    flat = idx[:, 0] * shape[1] + idx[:, 1]
    pts = np.stack([Xb[idx[:, 0], idx[:, 1]], Yb[idx[:, 0], idx[:, 1]]], axis=1)
    ds_next = np.roll(s, -1) - s
    ds_next[-1] = (w.sum() - s[-1] + s[0]) if domain.shape == "disk" else (w.sum() - s[-1])

    rows, cols, vals = [], [], []
    if domain.shape == "square":
        # second-order one-sided difference along the inward grid direction
        for k, ((i, j), v) in enumerate(zip(idx, nv)):
            di, dj = -int(round(v[0])), -int(round(v[1]))
            for m, c in enumerate((3.0, -4.0, 1.0)):
                ii_, jj_ = i + m * di, j + m * dj
                if not (0 <= ii_ < shape[0] and 0 <= jj_ < shape[1]):
                    raise ConfigurationError("fewer than 3 nodes along the inward normal")
                rows.append(k)
                cols.append(ii_ * shape[1] + jj_)
                vals.append(c / (2 * h))
    else:
        # interpolate along the inward normal (bilinear, first order)
        for k, ((i, j), v) in enumerate(zip(idx, nv)):
            rows.append(k)
            cols.append(i * shape[1] + j)
            vals.append(3.0 / (2 * h))
            for dist, c in ((h, -4.0), (2 * h, 1.0)):
                px, py = i - dist * v[0] / h, j - dist * v[1] / h
                fi, fj = int(np.floor(px)), int(np.floor(py))
                ti, tj = px - fi, py - fj
                for a, b, wt in ((0, 0, (1 - ti) * (1 - tj)), (1, 0, ti * (1 - tj)),
                                 (0, 1, (1 - ti) * tj), (1, 1, ti * tj)):
                    ii_, jj_ = fi + a, fj + b
                    if wt == 0.0:
                        continue
                    if not (0 <= ii_ < shape[0] and 0 <= jj_ < shape[1]) or sub[ii_, jj_] > BOUNDARY:
                        raise ConfigurationError("fewer than 3 nodes along the inward normal")
                    rows.append(k)
                    cols.append(ii_ * shape[1] + jj_)
                    vals.append(c * wt / (2 * h))
    nm = sparse.csr_matrix((vals, (rows, cols)), shape=(len(flat), shape[0] * shape[1]))

    return OmegaMesh(domain=domain, grid=grid, i0=int(i0), j0=int(j0), shape=shape,
                     interior=(sub == INTERIOR), inside=(sub <= BOUNDARY),
                     nodes=flat, points=pts, normals=nv, weights=w, s=s,
                     ds_next=ds_next, neumann_matrix=nm)


def surface_quadrature(values: np.ndarray, mesh: OmegaMesh, dt: float | None = None):
    """Integral over the lateral boundary of ``values`` of shape ``(nt+1, nsamples)``.

    Composite trapezoid in arclength (corner halves from each side) and time.
    A leading batch axis is allowed.
    """
    values = np.asarray(values)
    dt = mesh.grid.dt if dt is None else dt
    wt = trapezoid_time_weights(values.shape[-2] - 1, dt)
    return np.einsum("...ts,t,s->...", values, wt, mesh.weights)


def interpolate(field: np.ndarray, grid: Grid, px, py, order: int = 1) -> np.ndarray:
    """Spline interpolation of a box field at points, zero outside the box.

    ``order`` 1 is bilinear, 3 is the cubic B-spline interpolant.  ``field``
    has shape ``(..., nx, ny)``; leading axes are interpolated independently.
    Real and imaginary parts are handled separately.
    """
    px = np.asarray(px, float)
    py = np.asarray(py, float)
    coords = np.stack([(px - grid.origin) / grid.h, (py - grid.origin) / grid.h])
    field = np.asarray(field)
    lead = field.shape[:-2]
    flat = field.reshape((-1,) + field.shape[-2:])
    out = []
    for f in flat:
        if np.iscomplexobj(f):
            re = ndimage.map_coordinates(f.real, coords, order=order, mode="constant", cval=0.0)
            im = ndimage.map_coordinates(f.imag, coords, order=order, mode="constant", cval=0.0)
            out.append(re + 1j * im)
        else:
            out.append(ndimage.map_coordinates(f, coords, order=order, mode="constant", cval=0.0))
    return np.stack(out).reshape(lead + px.shape)


def chord_limits(grid: Grid, omega, y) -> tuple[float, float]:
    """Parameter range ``s`` for which ``y - s*omega`` lies in the box."""
    lo_b, hi_b = grid.origin, grid.origin + grid.h * (grid.nx - 1)
    smin, smax = -np.inf, np.inf
    for k in range(2):
        if abs(omega[k]) < 1e-15:
            if not lo_b <= y[k] <= hi_b:
                return 0.0, 0.0
            continue
        a = (y[k] - lo_b) / omega[k]
        b = (y[k] - hi_b) / omega[k]
        smin = max(smin, min(a, b))
        smax = min(smax, max(a, b))
    if smax <= smin:
        return 0.0, 0.0
    return smin, smax


def line_quadrature(field: np.ndarray, omega, y, grid: Grid, step: float | None = None) -> complex:
    """Integral of ``omega . field(y - s omega)`` over the full chord through the box.

    ``field`` is a vector field ``(2, nx, ny)`` or a scalar field
    ``(nx, ny)`` (then the plain chord integral is returned).  ``omega`` may
    be a :class:`Direction` or a unit vector.  Sampling is trapezoid at step
    ``h/2`` on the cubic-spline interpolant of the grid field.
    """
    w = omega.vector if isinstance(omega, Direction) else np.asarray(omega, float)
    y = np.asarray(y, float)
    smin, smax = chord_limits(grid, w, y)
    if smax <= smin:
        return 0.0 + 0.0j
    step = grid.h / 2 if step is None else step
    n = max(int(np.ceil((smax - smin) / step)), 1)
    s = np.linspace(smin, smax, n + 1)
    px, py = y[0] - s * w[0], y[1] - s * w[1]
    field = np.asarray(field)
    if field.ndim == 3:
        vals = w[0] * interpolate(field[0], grid, px, py, 3) + w[1] * interpolate(field[1], grid, px, py, 3)
    else:
        vals = interpolate(field, grid, px, py, 3)
    return complex(np.trapezoid(vals, s))
