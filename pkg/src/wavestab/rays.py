"""Light-ray data from boundary pairings and their Fourier-slice inversion.

A forward probe ``u2`` (coefficients 2) and a backward probe ``v`` for the
adjoint of coefficients 1 are built from geometric optics ansatzes sharing a
bump centred at ``y`` and a direction ``omega``.  Because the correction
terms vanish on the lateral boundary, the Dirichlet data of ``u2`` and the
boundary values of ``v`` are the ansatz traces, so the pairing

    P = int_Sigma (N1 - N2)(f) conj(v)

only needs two forward solves.  Integration by parts turns it into

    P = -int_Q (2i A.grad u2 + (i div A - A1.A1 + A2.A2) u2) conj(v)
        + int_Q (q1 - q2) u2 conj(v),          A = A1 - A2,

whose leading term for large ``lam`` is ``2 i lam m (exp(-i J) - 1)`` with
``J`` the line integral of ``omega.A`` through ``y`` and ``m`` the squared
mass of the bump.  For probes adapted to the leapfrog scheme ``lam`` is
replaced by the discrete symbol ``sin(lam dt)/dt`` of the time derivative.
When the potentials agree the pairing is ``m * int (q1 - q2)`` along the
same line.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchAmbiguityError, ConfigurationError, ResolutionError
from .fields import CoefficientPair, MollifierConfig, mollify
from .geometry import Direction, Domain, Grid, OmegaMesh, line_quadrature, omega_mesh, surface_quadrature
from .go import GoAnsatz, make_ansatz, make_bump_family, probe_center
from .wave import BoundaryTrace, solve_forward

# ----------------------------------------------------------------------------
# samples and pairings


@dataclass(frozen=True)
class RaySample:
    """One extracted line-integral value and its quadrature oracle."""

    omega: Direction
    y: tuple[float, float]
    lam: float
    extracted_value: complex
    oracle_value: complex
    offset: float = 0.0
    kind: str = "magnetic"
    clamped: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.extracted_value) and np.isfinite(self.oracle_value)):
            raise ValueError("ray sample values must be finite")

    @property
    def error(self) -> float:
        return float(abs(self.extracted_value - self.oracle_value))


def bump_width(lam: float, grid: Grid, alpha: float = 0.45, scale: float = 0.35) -> tuple[float, bool]:
    """Bump radius ``scale * lam^(-alpha/7)``, clamped to at least two cells."""
    w = scale * lam ** (-alpha / 7.0)
    if w < 2 * grid.h:
        warnings.warn(f"bump width {w:.3g} clamped to two grid cells; rate claims do not apply",
                      RuntimeWarning, stacklevel=2)
        return 2 * grid.h, True
    return w, False


def _check_grids(*objs):
    grids = [o.mesh.grid if isinstance(o, BoundaryTrace) else o.grid for o in objs]
    if any(g != grids[0] for g in grids[1:]):
        raise ConfigurationError("probes were built on different grids")


def pairing_dn_difference(coeffs1: CoefficientPair, coeffs2: CoefficientPair,
                          ansatz_in: GoAnsatz | BoundaryTrace, ansatz_out: GoAnsatz | BoundaryTrace,
                          mesh: OmegaMesh | None = None):
    """``int_Sigma (N1 f - N2 f) conj(v)`` with ``f`` and ``v`` the probe traces.

    The probes may be ansatzes (then ``mesh`` is required) or ready traces,
    possibly batched; the result has the batch shape.
    """
    probes = (ansatz_in, ansatz_out)
    if any(isinstance(a, GoAnsatz) for a in probes) and mesh is None:
        raise ConfigurationError("a mesh is needed to take ansatz traces")
    _check_grids(*probes, *(() if mesh is None else (mesh,)))
    f, v = (a.trace(mesh) if isinstance(a, GoAnsatz) else a for a in probes)
    for c in (coeffs1, coeffs2):
        if c.A.shape[1:] != (f.mesh.grid.nx, f.mesh.grid.ny):
            raise ConfigurationError("coefficients do not match the grid")
    n1 = solve_forward(coeffs1, f, store=False).trace
    n2 = solve_forward(coeffs2, f, store=False).trace
    val = surface_quadrature((n1.values - n2.values) * np.conj(v.values), f.mesh)
    return complex(val) if np.ndim(val) == 0 else val


def volumetric_pairing(coeffs1: CoefficientPair, coeffs2: CoefficientPair, u2: np.ndarray,
                       v: np.ndarray, mesh: OmegaMesh) -> complex:
    """Interior form of the pairing for stored block solutions ``u2`` and ``v``.

    ``u2`` solves the problem with coefficients 2, ``v`` the adjoint problem
    with coefficients 1.  Uses centred gradients, trapezoid time weights and
    the nodal area weights of Omega.
    """
    from .geometry import trapezoid_time_weights
    from .stencils import gradient
    g = mesh.grid
    h = g.h
    A = mesh.restrict(coeffs1.A - coeffs2.A)
    divA = mesh.restrict(coeffs1.divergence(h) - coeffs2.divergence(h))
    AA = mesh.restrict(coeffs1.A[0] ** 2 + coeffs1.A[1] ** 2 - coeffs2.A[0] ** 2 - coeffs2.A[1] ** 2)
    dq = mesh.restrict(coeffs1.q - coeffs2.q)
    wt = trapezoid_time_weights(g.nt, g.dt)
    area = _area_weights(mesh)
    total = 0.0 + 0.0j
    for k in range(g.nt + 1):
        gu = gradient(u2[k], h)
        integrand = -(2j * (A[0] * gu[0] + A[1] * gu[1]) + (1j * divA - AA) * u2[k]) + dq * u2[k]
        total += wt[k] * np.sum(area * integrand * np.conj(v[k]))
    return complex(total)


def _area_weights(mesh: OmegaMesh) -> np.ndarray:
    """Trapezoid area weights over the closed domain block (product rule)."""
    h = mesh.grid.h
    wx = np.full(mesh.shape[0], h)
    wy = np.full(mesh.shape[1], h)
    wx[[0, -1]] = h / 2
    wy[[0, -1]] = h / 2
    return np.outer(wx, wy) * mesh.inside


# ----------------------------------------------------------------------------
# extraction


@dataclass
class RayProbes:
    """Batched probes for one direction and frequency at several offsets."""

    omega: Direction
    lam: float
    centers: np.ndarray
    width: float
    clamped: bool
    f: BoundaryTrace
    v: BoundaryTrace
    masses: np.ndarray
    frequency_factor: float


def build_ray_probes(coeffs1: CoefficientPair | None, coeffs2: CoefficientPair | None,
                     omega: Direction, offsets, lam: float, domain: Domain, grid: Grid,
                     width: float | None = None, alpha: float = 0.45, width_scale: float = 0.35,
                     carrier: str = "discrete") -> RayProbes:
    """Forward probes for ``coeffs2`` and backward probes for ``coeffs1``.

    Bumps are centred on the ``+omega`` side of Omega at half the collar
    depth, on the lines ``offset * perp(omega) + s omega``.
    """
    mesh = omega_mesh(domain, grid)
    clamped = False
    if width is None:
        width, clamped = bump_width(lam, grid, alpha, width_scale)
    cfg = MollifierConfig(lam, alpha)

    def smooth(c):
        if c is None or not np.any(c.A != 0):
            return None
        return mollify(c.A, cfg, grid)

    a2, a1 = smooth(coeffs2), smooth(coeffs1)
    px, py = mesh.points[:, 0], mesh.points[:, 1]
    tt = grid.t[:, None]
    offsets = np.atleast_1d(offsets)
    centers = [probe_center(domain, omega, float(z)) for z in offsets]
    bumps = [make_bump_family(y, width, domain, grid) for y in centers]
    # phase and amplitude do not depend on the bump: evaluate them once
    fin = GoAnsatz(omega, lam, bumps[0], a2, grid, "forward", carrier)
    fout = GoAnsatz(omega, lam, bumps[0], a1, grid, "backward", carrier)
    cin = fin.carrier_values(px, py)
    cout = cin if a1 is None and a2 is None else fout.carrier_values(px, py)
    fs, vs, ms = [], [], []
    for bump in bumps:
        fin.bump = bump
        env = fin.envelope(px, py, tt)
        fs.append(env * cin)
        vs.append(env * cout)
        ms.append(np.sum(bump.sample(grid) ** 2) * grid.h**2)
    return RayProbes(omega, float(lam), np.array(centers), float(width), clamped,
                     BoundaryTrace(np.stack(fs), mesh), BoundaryTrace(np.stack(vs), mesh), np.array(ms),
                     fin.frequency_factor)


def exponential_datum_from_pairing(P, frequency: float, mass) -> np.ndarray:
    """Normalise a pairing into ``E ~ exp(-i J) - 1``.

    ``frequency`` is ``lam`` or, for discrete-adapted probes, the factor
    returned by :attr:`GoAnsatz.frequency_factor`.
    """
    return np.asarray(P) / (2j * frequency * np.asarray(mass))


def ray_datum_to_line_integral(E, branch_tol: float = 0.1):
    """``i log(1 + E)``, the line integral of ``omega . A`` encoded by ``E``.

    Raises :class:`BranchAmbiguityError` when ``1 + E`` vanishes or lies
    within ``branch_tol`` radians of the branch cut of the principal log.
    """
    z = 1.0 + np.asarray(E, complex)
    if np.any(np.abs(z) == 0):
        raise BranchAmbiguityError("1 + E vanishes")
    lg = np.log(z)
    if np.any(np.abs(lg.imag) > np.pi - branch_tol):
        raise BranchAmbiguityError("1 + E is too close to the branch cut")
    out = 1j * lg
    return complex(out) if out.ndim == 0 else out


def extract_ray_data(coeffs1: CoefficientPair, coeffs2: CoefficientPair, omega: Direction, offsets,
                     lam: float, domain: Domain, grid: Grid, kind: str = "magnetic",
                     width: float | None = None, alpha: float = 0.45, width_scale: float = 0.35,
                     oracle: bool = True, carrier: str = "discrete") -> list[RaySample]:
    """Ray samples for all ``offsets`` of one direction (one batched solve per pair).

    ``kind="magnetic"``: line integrals of ``omega . (A1 - A2)``.
    ``kind="electric"``: line integrals of ``q2 - q1``.
    """
    if kind not in ("magnetic", "electric"):
        raise ConfigurationError(kind)
    probes = build_ray_probes(coeffs1, coeffs2, omega, offsets, lam, domain, grid, width, alpha,
                              width_scale, carrier)
    P = np.atleast_1d(pairing_dn_difference(coeffs1, coeffs2, probes.f, probes.v))
    if kind == "magnetic":
        vals = np.atleast_1d(ray_datum_to_line_integral(exponential_datum_from_pairing(P, probes.frequency_factor, probes.masses)))
        ref = coeffs1.A - coeffs2.A
    else:
        vals = -P / probes.masses
        ref = coeffs2.q - coeffs1.q
    out = []
    for z, y, val in zip(np.atleast_1d(offsets), probes.centers, vals):
        orc = line_quadrature(ref, omega, y, grid) if oracle else complex("nan")
        out.append(RaySample(omega, (float(y[0]), float(y[1])), float(lam), complex(val),
                             complex(orc) if oracle else 0j, float(z), kind, probes.clamped))
    return out


def extract_ray_pair(coeffs1: CoefficientPair, coeffs2: CoefficientPair, gauged1: CoefficientPair,
                     omega: Direction, offsets, lam: float, domain: Domain, grid: Grid,
                     width: float | None = None, alpha: float = 0.45, width_scale: float = 0.35,
                     oracle: bool = True, carrier: str = "discrete",
                     cache: dict | None = None) -> tuple[list[RaySample], list[RaySample]]:
    """Magnetic and electric ray samples of one direction from a single pair of solves.

    The Dirichlet-to-Neumann data are measured once with the original
    coefficients.  Gauge invariance of the map lets the electric pairing reuse
    them with backward probes built from ``gauged1`` (the gauge-normalised
    version of ``coeffs1``).  ``cache`` (a dict) keeps the reference solves
    for ``coeffs2`` so that a sweep over ``coeffs1`` reuses them; the caller
    must not change ``coeffs2`` while sharing a cache.
    """
    pm = build_ray_probes(coeffs1, coeffs2, omega, offsets, lam, domain, grid, width, alpha, width_scale,
                          carrier)
    pe = build_ray_probes(gauged1, coeffs2, omega, offsets, lam, domain, grid, width, alpha, width_scale,
                          carrier)
    n1 = solve_forward(coeffs1, pm.f, store=False).trace
    key = (float(omega.angle), float(lam), tuple(np.round(np.atleast_1d(offsets), 12)), pm.width, carrier)
    if cache is not None and key in cache:
        n2 = cache[key]
    else:
        n2 = solve_forward(coeffs2, pm.f, store=False).trace
        if cache is not None:
            cache[key] = n2
    diff = n1.values - n2.values
    Pm = np.atleast_1d(surface_quadrature(diff * np.conj(pm.v.values), pm.f.mesh))
    Pe = np.atleast_1d(surface_quadrature(diff * np.conj(pe.v.values), pm.f.mesh))
    mag = np.atleast_1d(ray_datum_to_line_integral(exponential_datum_from_pairing(Pm, pm.frequency_factor, pm.masses)))
    ele = -Pe / pm.masses
    out_m, out_e = [], []
    for z, y, vm, ve in zip(np.atleast_1d(offsets), pm.centers, mag, ele):
        om = line_quadrature(coeffs1.A - coeffs2.A, omega, y, grid) if oracle else 0j
        oe = line_quadrature(coeffs2.q - coeffs1.q, omega, y, grid) if oracle else 0j
        yy = (float(y[0]), float(y[1]))
        out_m.append(RaySample(omega, yy, float(lam), complex(vm), complex(om), float(z), "magnetic", pm.clamped))
        out_e.append(RaySample(omega, yy, float(lam), complex(ve), complex(oe), float(z), "electric", pm.clamped))
    return out_m, out_e


def extract_exponential_ray_datum(coeffs1: CoefficientPair, coeffs2: CoefficientPair, omega: Direction,
                                  y, lam: float, h_bump: float, domain: Domain, grid: Grid,
                                  alpha: float = 0.45, carrier: str = "discrete") -> complex:
    """``E ~ exp(-i int omega.(A1 - A2)(y - s omega) ds) - 1`` from one pairing."""
    mesh = omega_mesh(domain, grid)
    if h_bump < 2 * grid.h:
        warnings.warn("bump width clamped to two grid cells; rate claims do not apply", RuntimeWarning,
                      stacklevel=2)
        h_bump = 2 * grid.h
    bump = make_bump_family(y, h_bump, domain, grid)
    a_in = make_ansatz(coeffs2, omega, lam, bump, grid, alpha, "forward", carrier)
    a_out = make_ansatz(coeffs1, omega, lam, bump, grid, alpha, "backward", carrier)
    P = pairing_dn_difference(coeffs1, coeffs2, a_in, a_out, mesh)
    mass = np.sum(bump.sample(grid) ** 2) * grid.h**2
    return complex(exponential_datum_from_pairing(P, a_in.frequency_factor, mass))


def extract_q_ray_datum(coeffs1: CoefficientPair, coeffs2: CoefficientPair, omega: Direction, y,
                        lam: float, h_bump: float, domain: Domain, grid: Grid, alpha: float = 0.45,
                        carrier: str = "discrete") -> complex:
    """Estimate of ``int (q2 - q1)(y - t omega) dt``.

    ``coeffs1`` should carry the gauge-normalised potential so that the
    magnetic contribution to the pairing is as small as possible.
    """
    mesh = omega_mesh(domain, grid)
    if h_bump < 2 * grid.h:
        warnings.warn("bump width clamped to two grid cells; rate claims do not apply", RuntimeWarning,
                      stacklevel=2)
        h_bump = 2 * grid.h
    bump = make_bump_family(y, h_bump, domain, grid)
    a_in = make_ansatz(coeffs2, omega, lam, bump, grid, alpha, "forward", carrier)
    a_out = make_ansatz(coeffs1, omega, lam, bump, grid, alpha, "backward", carrier)
    P = pairing_dn_difference(coeffs1, coeffs2, a_in, a_out, mesh)
    mass = np.sum(bump.sample(grid) ** 2) * grid.h**2
    return complex(-P / mass)


def ray_offsets(domain: Domain, count: int) -> np.ndarray:
    """``count`` cell-centred offsets across the ball containing Omega."""
    if count < 16:
        raise ResolutionError("at least 16 offsets are needed")
    R = domain.radius
    dz = 2 * R / count
    return -R + dz * (np.arange(count) + 0.5)


# ----------------------------------------------------------------------------
# Fourier slices


@dataclass
class FourierSliceSet:
    """Samples of a Fourier transform on points ``xi`` in the frequency plane.

    ``omega`` holds the direction attached to each sample and ``weights``
    the area element of the frequency-plane quadrature.
    """

    xi: np.ndarray
    values: np.ndarray
    omega: np.ndarray
    weights: np.ndarray
    kind: str = "slice"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, float).reshape(-1, 2)
        self.values = np.asarray(self.values, complex).reshape(-1)
        self.omega = np.asarray(self.omega, float).reshape(-1, 2)
        self.weights = np.asarray(self.weights, float).reshape(-1)
        n = len(self.values)
        if not (len(self.xi) == len(self.omega) == len(self.weights) == n):
            raise ConfigurationError("slice set arrays differ in length")

    def __len__(self):
        return len(self.values)

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.xi[:, 0], self.xi[:, 1])

    def __add__(self, other: "FourierSliceSet") -> "FourierSliceSet":
        return FourierSliceSet(np.concatenate([self.xi, other.xi]), np.concatenate([self.values, other.values]),
                               np.concatenate([self.omega, other.omega]),
                               np.concatenate([self.weights, other.weights]), self.kind)

    def scaled(self, c) -> "FourierSliceSet":
        return FourierSliceSet(self.xi, c * self.values, self.omega, self.weights, self.kind, dict(self.meta))

    @classmethod
    def from_field(cls, f: np.ndarray, grid: Grid, pad: int = 2) -> "FourierSliceSet":
        """Dense Cartesian samples from the zero-padded FFT of a box field."""
        from .fields import fourier_transform
        fh, kx, ky = fourier_transform(f, grid.h, pad)
        KX, KY = np.meshgrid(kx, ky, indexing="ij")
        dA = (kx[1] - kx[0]) * (ky[1] - ky[0])
        xi = np.stack([KX.ravel(), KY.ravel()], axis=1)
        return cls(xi, fh.ravel(), np.zeros_like(xi), np.full(xi.shape[0], dA), "dense")


def slice_frequencies(r_max: float, count: int) -> np.ndarray:
    """Symmetric 1-D frequency grid on ``[-r_max, r_max]`` containing 0."""
    if count % 2 == 0:
        count += 1
    return np.linspace(-r_max, r_max, count)


def _offset_weights(z: np.ndarray) -> np.ndarray:
    """Cell widths of sorted offsets (midpoint rule on uniform offsets)."""
    if len(z) == 1:
        return np.ones(1)
    mid = 0.5 * (z[1:] + z[:-1])
    lo = np.concatenate([[z[0] - (mid[0] - z[0])], mid])
    hi = np.concatenate([mid, [z[-1] + (z[-1] - mid[-1])]])
    return hi - lo


def fourier_slice(samples, k_values, n_directions: int = 1, use_oracle: bool = False,
                  min_offsets: int = 16) -> FourierSliceSet:
    """Transform ray data of one direction across offsets.

    ``samples`` are :class:`RaySample` objects sharing ``omega``; the value
    at ``xi = k perp(omega)`` is ``sum_j R(z_j) exp(-i k z_j) dz_j``.  With
    ``n_directions`` the polar quadrature weights assume a fan of that many
    directions covering half a turn.
    """
    samples = list(samples)
    if len(samples) < min_offsets:
        raise ResolutionError(f"{len(samples)} offsets, at least {min_offsets} needed")
    omega = samples[0].omega
    if any(abs(s.omega.angle - omega.angle) > 1e-12 for s in samples):
        raise ConfigurationError("samples of a slice must share the direction")
    p = omega.perp
    z = np.array([s.y[0] * p[0] + s.y[1] * p[1] for s in samples])
    vals = np.array([s.oracle_value if use_oracle else s.extracted_value for s in samples], complex)
    order = np.argsort(z)
    z, vals = z[order], vals[order]
    dz = _offset_weights(z)
    k = np.asarray(k_values, float)
    fhat = (np.exp(-1j * np.outer(k, z)) * (vals * dz)[None, :]).sum(axis=1)
    xi = np.outer(k, p)
    dk = np.gradient(k) if len(k) > 1 else np.ones(1)
    dth = np.pi / n_directions
    w = np.abs(k) * dk * dth
    zero = np.abs(k) < 1e-14
    w[zero] = np.pi * (dk[zero] / 2) ** 2 / n_directions
    return FourierSliceSet(xi, fhat, np.tile(omega.vector, (len(k), 1)), w, samples[0].kind,
                           {"offsets": len(z)})


def slices_over_fan(sample_sets, k_values, use_oracle: bool = False) -> FourierSliceSet:
    """Concatenate the slices of several directions (a half-turn fan)."""
    sets = list(sample_sets)
    out = None
    for s in sets:
        sl = fourier_slice(s, k_values, len(sets), use_oracle)
        out = sl if out is None else out + sl
    return out


def assemble_sigma_hat(slices: FourierSliceSet) -> FourierSliceSet:
    """Fourier data of ``sigma_12 = d1 a2 - d2 a1`` from ``omega . A`` slices.

    On ``xi = k perp(omega)`` one has ``sigma_hat = i(xi1 a2_hat - xi2 a1_hat)
    = -i k (omega . A)_hat``; at ``xi = 0`` the value is set to zero.  The
    direction recorded per sample is ``(xi2, -xi1)/|xi|``.
    """
    w = slices.omega
    perp = np.stack([-w[:, 1], w[:, 0]], axis=1)
    k = np.sum(slices.xi * perp, axis=1)
    sig = -1j * k * slices.values
    zero = np.abs(k) < 1e-14
    sig[zero] = 0.0
    r = np.hypot(slices.xi[:, 0], slices.xi[:, 1])
    om = np.where(zero[:, None], w, np.stack([slices.xi[:, 1], -slices.xi[:, 0]], axis=1) / np.where(zero, 1, r)[:, None])
    return FourierSliceSet(slices.xi, sig, om, slices.weights, "sigma", dict(slices.meta))


def recover_q_hat(sample_sets, k_values, use_oracle: bool = False) -> FourierSliceSet:
    """Fourier data of ``q`` on the fan from scalar ray data."""
    out = slices_over_fan(sample_sets, k_values, use_oracle)
    out.kind = "q"
    return out


def dense_transform(f: np.ndarray, grid: Grid, xi) -> np.ndarray:
    """Direct ``sum_x f(x) exp(-i x.xi) h^2`` at arbitrary frequencies."""
    xi = np.asarray(xi, float).reshape(-1, 2)
    x, y = grid.x, grid.y
    Ex = np.exp(-1j * np.outer(xi[:, 0], x))
    Ey = np.exp(-1j * np.outer(xi[:, 1], y))
    G = Ey @ np.asarray(f, complex).T  # (K, nx)
    return np.sum(Ex * G, axis=1) * grid.h**2


# ----------------------------------------------------------------------------
# band-split negative norm


@dataclass(frozen=True)
class BandNorm:
    """Band-split ``H^{-1}`` estimate: ``sqrt(low**2 + tail**2)``."""

    value: float
    low: float
    tail: float
    R: float
    R_optimal: float | None


def hminus1_band_norm(fhat: FourierSliceSet, R: float, l2_bound: float = 0.0, lam: float | None = None,
                      beta: float | None = None, weight_exponent: float = 2.0) -> BandNorm:
    """Low-band quadrature of ``|f_hat|^2 <xi>^-p`` plus the tail ``l2_bound^2 R^-p``.

    Uses Plancherel with the ``(2 pi)^-2`` factor.  ``R_optimal`` solves
    ``R^4 = lam^(2 beta)`` when ``lam`` and ``beta`` are given.
    """
    r = fhat.radius
    available = float(r.max()) if len(r) else 0.0
    if R > available * (1 + 1e-12):
        warnings.warn(f"cutoff {R:.3g} exceeds the sampled range {available:.3g}; clamped", RuntimeWarning,
                      stacklevel=2)
        R = available
    sel = r <= R * (1 + 1e-12)
    wgt = (1.0 + r[sel] ** 2) ** (-weight_exponent / 2)
    low2 = float(np.sum(fhat.weights[sel] * np.abs(fhat.values[sel]) ** 2 * wgt)) / (4 * np.pi**2)
    tail2 = float(l2_bound) ** 2 * R ** (-weight_exponent) if R > 0 else float(l2_bound) ** 2
    ropt = None
    if lam is not None and beta is not None:
        ropt = float(lam ** (2 * beta / 4.0))
    return BandNorm(float(np.sqrt(low2 + tail2)), float(np.sqrt(low2)), float(np.sqrt(tail2)), float(R), ropt)


__all__ = [
    "BandNorm", "FourierSliceSet", "RayProbes", "RaySample", "assemble_sigma_hat", "build_ray_probes",
    "bump_width", "dense_transform", "exponential_datum_from_pairing", "extract_exponential_ray_datum",
    "extract_q_ray_datum", "extract_ray_data", "extract_ray_pair", "fourier_slice", "hminus1_band_norm",
    "pairing_dn_difference", "ray_datum_to_line_integral", "ray_offsets", "recover_q_hat",
    "slice_frequencies", "slices_over_fan", "volumetric_pairing",
]
