"""Geometric optics probes: transported bumps, mollified amplitudes and the
correction term obtained by solving with the ansatz boundary trace.

The leading term of a probe is

    phi0(x + t omega) * b(x, t) * exp(i lam (x . omega + t)),
    b(x, t) = exp(i int_0^t omega . A_sharp(x + s omega) ds),

where ``A_sharp`` is the mollified magnetic potential.  Backward probes use
the conjugate potential in ``b``.

With ``carrier="discrete"`` the ansatz is adapted to the leapfrog scheme:
the spatial wavenumber makes the plane wave an exact discrete solution at
temporal frequency ``lam``, the bump travels with the discrete group
velocity ``v`` instead of ``omega``, and the amplitude accumulates
``v . A_sharp`` along ``x + s v``.  All three reduce to the continuum
expressions as ``h, dt -> 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .errors import AliasingError, ConfigurationError, GeometryError
from .fields import CoefficientPair, MollifierConfig, mollify
from .geometry import Direction, Domain, Grid, OmegaMesh, interpolate, trapezoid_time_weights
from .wave import BoundaryTrace, solve_backward, solve_forward

# ----------------------------------------------------------------------------
# bump profiles


@lru_cache(maxsize=None)
def _profile_constant() -> float:
    """Normaliser making ``c exp(-1/(1-|z|^2))`` unit in L2 of the plane."""
    val, _ = integrate.quad(lambda r: np.exp(-2.0 / (1.0 - r * r)) * 2 * np.pi * r, 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-13)
    return 1.0 / np.sqrt(val)


def unit_profile(zx, zy) -> np.ndarray:
    """Smooth bump supported in the unit disk with unit L2 norm."""
    r2 = np.asarray(zx, float) ** 2 + np.asarray(zy, float) ** 2
    out = np.zeros(np.broadcast(zx, zy).shape)
    inside = r2 < 1.0
    out[inside] = _profile_constant() * np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@dataclass(frozen=True)
class BumpFamily:
    """Concentrated profile ``h^{-1} psi((x - y)/h)`` with unit L2 norm."""

    center: tuple[float, float]
    width: float

    def __call__(self, x, y) -> np.ndarray:
        h = self.width
        return unit_profile((np.asarray(x) - self.center[0]) / h, (np.asarray(y) - self.center[1]) / h) / h

    def sample(self, grid: Grid) -> np.ndarray:
        X, Y = grid.mesh()
        return self(X, Y)

    def l2_norm(self, grid: Grid) -> float:
        return float(np.sqrt(np.sum(self.sample(grid) ** 2) * grid.h**2))

    def first_moment(self, grid: Grid) -> float:
        """Grid value of ``int phi^2 |y - x| dx``."""
        X, Y = grid.mesh()
        d = np.hypot(X - self.center[0], Y - self.center[1])
        return float(np.sum(self.sample(grid) ** 2 * d) * grid.h**2)

    def h3_norm(self, grid: Grid) -> float:
        """Grid ``H^3`` norm with centred differences up to third order."""
        f = self.sample(grid)
        h = grid.h
        total = np.sum(f**2)
        derivs = [f]
        for _ in range(3):
            nxt = []
            for d in derivs:
                nxt.append(np.gradient(d, h, axis=0))
                nxt.append(np.gradient(d, h, axis=1))
            derivs = nxt
            total += sum(np.sum(d**2) for d in derivs)
        return float(np.sqrt(total * h**2))


def make_bump_family(y, h_bump: float, domain: Domain, grid: Grid | None = None,
                     check_support: bool = True) -> BumpFamily:
    """Bump centred at ``y`` of radius ``h_bump`` whose support lies in the collar."""
    y = (float(y[0]), float(y[1]))
    if h_bump <= 0:
        raise GeometryError("bump width must be positive")
    if check_support:
        d = float(domain.distance(y[0], y[1]))
        if not (d - h_bump > 0 and d + h_bump < domain.rho):
            raise GeometryError(
                f"bump of radius {h_bump:.3g} at distance {d:.3g} leaves the collar of width {domain.rho:.3g}")
    return BumpFamily(y, float(h_bump))


# ----------------------------------------------------------------------------
# carrier


def discrete_wavenumber(lam: float, omega, grid: Grid) -> float:
    """Wavenumber ``k`` with ``exp(i(k x.omega + lam t))`` solving the leapfrog scheme."""
    w = omega.vector if isinstance(omega, Direction) else np.asarray(omega, float)
    h, dt = grid.h, grid.dt
    lhs = (2.0 / dt * np.sin(lam * dt / 2)) ** 2

    def F(k):
        return (2.0 / h) ** 2 * (np.sin(k * w[0] * h / 2) ** 2 + np.sin(k * w[1] * h / 2) ** 2) - lhs

    kmax = np.pi / (h * max(abs(w[0]), abs(w[1])))
    if F(kmax) < 0:
        raise AliasingError("frequency not representable on the grid")
    return float(optimize.brentq(F, 0.0, kmax, xtol=1e-14))


def discrete_group_velocity(lam: float, k: float, omega, grid: Grid) -> np.ndarray:
    """Group velocity vector of the leapfrog plane wave with wavevector ``k omega``."""
    w = omega.vector if isinstance(omega, Direction) else np.asarray(omega, float)
    h, dt = grid.h, grid.dt
    return np.sin(k * w * h) / h / (np.sin(lam * dt) / dt)


# ----------------------------------------------------------------------------
# ansatz


@dataclass(eq=False)
class GoAnsatz:
    """Leading term of a geometric optics probe.

    ``a_smooth`` is the mollified potential on the box grid (or ``None`` for
    ``b = 1``).  ``sign`` is ``"forward"`` or ``"backward"``; backward
    probes use the conjugated potential.
    """

    omega: Direction
    lam: float
    bump: BumpFamily
    a_smooth: np.ndarray | None
    grid: Grid
    sign: str = "forward"
    carrier: str = "discrete"
    k: float = field(init=False)
    velocity: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.sign not in ("forward", "backward"):
            raise ConfigurationError(self.sign)
        if self.lam * self.grid.h > 1.0:
            raise AliasingError(f"lam*h = {self.lam * self.grid.h:.3g} exceeds 1")
        if self.carrier == "discrete":
            self.k = discrete_wavenumber(self.lam, self.omega, self.grid)
            self.velocity = discrete_group_velocity(self.lam, self.k, self.omega, self.grid)
        elif self.carrier == "continuum":
            self.k = float(self.lam)
            self.velocity = self.omega.vector
        else:
            raise ConfigurationError(self.carrier)

    @property
    def potential(self) -> np.ndarray | None:
        if self.a_smooth is None:
            return None
        return np.conj(self.a_smooth) if self.sign == "backward" else self.a_smooth

    def phase(self, px, py, t) -> np.ndarray:
        w = self.omega.vector
        return np.exp(1j * (self.k * (px * w[0] + py * w[1]) + self.lam * t))

    def envelope(self, px, py, t) -> np.ndarray:
        v = self.velocity
        return self.bump(px + t * v[0], py + t * v[1])

    @property
    def frequency_factor(self) -> float:
        """Symbol of ``d_t`` at the carrier frequency: ``sin(lam dt)/dt`` or ``lam``."""
        if self.carrier == "discrete":
            return float(np.sin(self.lam * self.grid.dt) / self.grid.dt)
        return float(self.lam)

    def amplitude_exponents(self, px, py, times=None) -> np.ndarray:
        """``int_0^t v . A(x + s v) ds`` at the time levels, shape ``(nt+1,) + px.shape``."""
        return characteristic_integrals(self.potential, self.velocity, px, py, self.grid, times)

    def carrier_values(self, px, py, times=None) -> np.ndarray:
        """Phase times amplitude (everything except the bump envelope).

        This part does not depend on the bump, so probes that differ only in
        their bump centre can share it.
        """
        t = self.grid.t if times is None else np.asarray(times, float)
        tt = t.reshape((-1,) + (1,) * np.ndim(px))
        out = self.phase(px, py, tt)
        if self.potential is not None:
            out = out * np.exp(1j * self.amplitude_exponents(px, py, t))
        return out

    def evaluate(self, px, py, times=None) -> np.ndarray:
        """Leading term at points ``(px, py)`` for all (or the given) time levels."""
        t = self.grid.t if times is None else np.asarray(times, float)
        tt = t.reshape((-1,) + (1,) * np.ndim(px))
        return self.envelope(px, py, tt) * self.carrier_values(px, py, t)

    def stream(self, px, py, reverse: bool = False):
        """Yield ``(k, leading term at level k)`` without storing all levels.

        The characteristic integral is accumulated step by step (trapezoid),
        forward in time or, with ``reverse``, backward from ``t = T``.
        """
        g = self.grid
        v = self.velocity
        w = v
        pot = self.potential
        px = np.asarray(px, float)
        py = np.asarray(py, float)

        wa = None if pot is None else w[0] * pot[0] + w[1] * pot[1]

        def integrand(t):
            if wa is None:
                return 0.0
            return interpolate(wa, g, px + t * v[0], py + t * v[1])

        def term(k, expo):
            t = g.t[k]
            out = self.envelope(px, py, t) * self.phase(px, py, t)
            return out * np.exp(1j * expo) if pot is not None else out

        if not reverse:
            expo = np.zeros(px.shape, complex)
            prev = integrand(0.0)
            yield 0, term(0, expo)
            for k in range(1, g.nt + 1):
                cur = integrand(g.t[k])
                expo = expo + 0.5 * g.dt * (prev + cur)
                prev = cur
                yield k, term(k, expo)
        else:
            expo = np.zeros(px.shape, complex)
            if pot is not None:
                # full integral with the same steps as the forward accumulation
                prev = integrand(0.0)
                for k in range(1, g.nt + 1):
                    cur = integrand(g.t[k])
                    expo = expo + 0.5 * g.dt * (prev + cur)
                    prev = cur
            yield g.nt, term(g.nt, expo)
            prev = integrand(g.T)
            for k in range(g.nt - 1, -1, -1):
                cur = integrand(g.t[k])
                expo = expo - 0.5 * g.dt * (prev + cur)
                prev = cur
                yield k, term(k, expo)

    def trace(self, mesh: OmegaMesh) -> BoundaryTrace:
        """Boundary trace built with the same streamed arithmetic as the leading term.

        Sharing the arithmetic of :meth:`stream` makes the correction term
        vanish bit for bit on the lateral boundary.
        """
        g = self.grid
        out = np.empty((g.nt + 1, mesh.nsamples), complex)
        for k, vals in self.stream(mesh.points[:, 0], mesh.points[:, 1], reverse=self.sign == "backward"):
            out[k] = vals
        return BoundaryTrace(out, mesh)


def characteristic_integrals(potential: np.ndarray | None, velocity, px, py, grid: Grid,
                             times: np.ndarray | None = None) -> np.ndarray:
    """Cumulative trapezoid of ``v . A(x + s v)`` over ``times`` (default: all levels).

    ``velocity`` is a :class:`Direction` (unit speed) or a vector.
    """
    px = np.asarray(px, float)
    py = np.asarray(py, float)
    t = grid.t if times is None else np.asarray(times, float)
    if potential is None:
        return np.zeros((len(t),) + px.shape, complex)
    v = velocity.vector if isinstance(velocity, Direction) else np.asarray(velocity, float)
    w = v
    tt = t.reshape((-1,) + (1,) * px.ndim)
    qx, qy = px + tt * v[0], py + tt * v[1]
    wa = w[0] * potential[0] + w[1] * potential[1]
    vals = interpolate(wa, grid, qx, qy)
    out = np.zeros_like(vals)
    out[1:] = np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(t).reshape((-1,) + (1,) * px.ndim), axis=0)
    return out


def transport_phase(bump: BumpFamily, omega: Direction, grid: Grid) -> np.ndarray:
    """``phi(x, t) = phi0(x + t omega)`` on the box grid, shape ``(nt+1, nx, ny)``."""
    X, Y = grid.mesh()
    w = omega.vector
    return np.stack([bump(X + t * w[0], Y + t * w[1]) for t in grid.t])


def go_amplitude(a_smooth: np.ndarray | None, omega: Direction, grid: Grid, sign: str = "forward",
                 points=None) -> np.ndarray:
    """``b(x, t) = exp(i int_0^t omega . A(x + s omega) ds)``, conjugated potential if backward.

    Evaluated on the box grid (default) or at ``points = (px, py)``.
    """
    if points is None:
        px, py = grid.mesh()
    else:
        px, py = points
    pot = None if a_smooth is None else (np.conj(a_smooth) if sign == "backward" else a_smooth)
    return np.exp(1j * characteristic_integrals(pot, omega, px, py, grid))


def transport_residual(phi: np.ndarray, omega: Direction, grid: Grid) -> float:
    """L2 norm of ``(d_t - omega . grad) phi`` with centred differences (inner levels)."""
    h, dt = grid.h, grid.dt
    w = omega.vector
    pt = (phi[2:, 1:-1, 1:-1] - phi[:-2, 1:-1, 1:-1]) / (2 * dt)
    px = (phi[1:-1, 2:, 1:-1] - phi[1:-1, :-2, 1:-1]) / (2 * h)
    py = (phi[1:-1, 1:-1, 2:] - phi[1:-1, 1:-1, :-2]) / (2 * h)
    res = pt - w[0] * px - w[1] * py
    return float(np.sqrt(np.sum(np.abs(res) ** 2) * h**2 * dt))


def amplitude_transport_residual(b: np.ndarray, a_smooth: np.ndarray, omega: Direction,
                                 grid: Grid, mask: np.ndarray | None = None) -> float:
    """L2 norm of ``(d_t - omega . grad - i omega . A) b`` over inner nodes and levels."""
    h, dt = grid.h, grid.dt
    w = omega.vector
    wa = w[0] * a_smooth[0] + w[1] * a_smooth[1]
    bt = (b[2:, 1:-1, 1:-1] - b[:-2, 1:-1, 1:-1]) / (2 * dt)
    bx = (b[1:-1, 2:, 1:-1] - b[1:-1, :-2, 1:-1]) / (2 * h)
    by = (b[1:-1, 1:-1, 2:] - b[1:-1, 1:-1, :-2]) / (2 * h)
    res = bt - w[0] * bx - w[1] * by - 1j * wa[None, 1:-1, 1:-1] * b[1:-1, 1:-1, 1:-1]
    if mask is not None:
        res = res * mask[1:-1, 1:-1]
    return float(np.sqrt(np.sum(np.abs(res) ** 2) * h**2 * dt))


def make_ansatz(coeffs: CoefficientPair | None, omega: Direction, lam: float, bump: BumpFamily,
                grid: Grid, alpha: float = 0.45, sign: str = "forward",
                carrier: str = "discrete") -> GoAnsatz:
    """Ansatz whose amplitude uses the potential of ``coeffs`` mollified at ``lam``."""
    a_s = None
    if coeffs is not None and np.any(coeffs.A != 0):
        a_s = mollify(coeffs.A, MollifierConfig(lam, alpha), grid)
    return GoAnsatz(omega, lam, bump, a_s, grid, sign, carrier)


# ----------------------------------------------------------------------------
# correction term


@dataclass(eq=False)
class GoResidual:
    """Correction term ``r = u - leading term`` of a probe.

    ``r_l2`` and ``grad_r_l2`` are ``L2(Q)`` norms over Omega (trapezoid in
    time, forward differences for the gradient).  ``u`` and ``r`` are kept
    only when requested.
    """

    r_l2: float
    grad_r_l2: float
    leading_l2: float
    end_leading_sup: tuple[float, float]
    lateral_r_sup: float
    final_r_sup: float
    u: np.ndarray | None = None
    r: np.ndarray | None = None


def go_solution_with_residual(coeffs: CoefficientPair, ansatz: GoAnsatz, mesh: OmegaMesh,
                              store: bool = False) -> GoResidual:
    """Solve with the ansatz trace and measure the correction term.

    Forward ansatz: forward problem with zero initial data.  Backward ansatz:
    adjoint problem with zero final data.
    """
    grid = mesh.grid
    if mesh.grid != ansatz.grid:
        raise ConfigurationError("ansatz and mesh grids differ")
    X, Y = mesh.block_mesh
    f = ansatz.trace(mesh)
    leading = ansatz.stream(X, Y, reverse=ansatz.sign == "backward")
    h = grid.h
    wt = trapezoid_time_weights(grid.nt, grid.dt)
    inside = mesh.inside
    mx = inside[1:, :] & inside[:-1, :]
    my = inside[:, 1:] & inside[:, :-1]
    acc = {"r": 0.0, "g": 0.0, "lead": 0.0, "final": 0.0, "ends": [0.0, 0.0]}
    R = np.empty((grid.nt + 1,) + mesh.shape, complex) if store else None

    def cb(k, u):
        k_lead, lead = next(leading)
        if k_lead != k:
            raise RuntimeError("time levels out of step")
        r = u[0] - lead
        acc["r"] += wt[k] * np.sum(np.abs(r[inside]) ** 2) * h * h
        gx = np.diff(r, axis=0) / h
        gy = np.diff(r, axis=1) / h
        acc["g"] += wt[k] * (np.sum(np.abs(gx[mx]) ** 2) + np.sum(np.abs(gy[my]) ** 2)) * h * h
        acc["lead"] += wt[k] * np.sum(np.abs(lead[inside]) ** 2) * h * h
        if k in (0, grid.nt):
            acc["ends"][0 if k == 0 else 1] = float(np.max(np.abs(lead[inside])))
        end = grid.nt if ansatz.sign == "backward" else 0
        if k == end:
            acc["final"] = float(np.max(np.abs(r[inside])))
        if store:
            R[k] = r

    solver = solve_forward if ansatz.sign == "forward" else solve_backward
    sol = solver(coeffs, f, store=store, callback=cb)
    lat = 0.0
    if store:
        lat = float(np.max(np.abs(R.reshape(grid.nt + 1, -1)[:, mesh.nodes])))
    ends = tuple(acc["ends"])
    return GoResidual(r_l2=float(np.sqrt(acc["r"])), grad_r_l2=float(np.sqrt(acc["g"])),
                      leading_l2=float(np.sqrt(acc["lead"])), end_leading_sup=ends,
                      lateral_r_sup=lat, final_r_sup=acc["final"],
                      u=None if sol.u is None else sol.u, r=R)


def probe_center(domain: Domain, omega: Direction, offset: float, depth: float | None = None) -> np.ndarray:
    """Point ``offset * perp(omega) + tau * omega`` at collar depth ``depth`` on the ``+omega`` side.

    ``depth`` defaults to half the collar width; ``tau`` is found so that the
    distance to Omega equals ``depth``.
    """
    w, p = omega.vector, omega.perp
    depth = domain.rho / 2 if depth is None else depth
    c = np.asarray(domain.omega_center)
    base = c + offset * p

    def gap(tau):
        pt = base + tau * w
        return float(domain.distance(pt[0], pt[1])) - depth

    hi = domain.diam_omega + domain.rho + abs(offset)
    lo = -hi
    # distance is convex along the line; the +omega side root is above the minimiser
    tmin = optimize.minimize_scalar(lambda s: float(domain.distance(*(base + s * w))),
                                    bounds=(lo, hi), method="bounded").x
    if gap(tmin) >= 0:
        tmin = 0.0 if gap(0.0) < 0 else tmin
        if gap(tmin) >= 0:
            # the line misses Omega by more than depth: keep the closest point
            return base + tmin * w
    tau = optimize.brentq(gap, tmin, hi)
    return base + tau * w
