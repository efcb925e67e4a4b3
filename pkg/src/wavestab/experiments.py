"""Config-driven experiments: verification suites, the stability study and rate fits.

Everything is driven by an :class:`ExperimentConfig`, a single JSON document
whose defaults are embedded here.  All randomness flows from ``config.seed``
and reports contain no timestamps, so identical configurations give
identical ``report.json`` files.
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

import numpy as np

from .errors import BranchSafetyError, ConfigurationError
from .fields import (AnalyticField, CoefficientPair, MollifierConfig, cone_field, em_operator_residual,
                     l2_norm, mollify, omega_mask, reduce_to_em, smooth_bump,
                     vector_bump, w1inf_norm)
from .geometry import Direction, Domain, Grid, direction_fan, line_quadrature, omega_mesh
from .go import (amplitude_transport_residual, go_amplitude, go_solution_with_residual, make_ansatz,
                 make_bump_family, probe_center, transport_phase, transport_residual)
from .hodge import (CarlemanWeight, carleman_verify, find_gamma0, gauge_normalize, hodge_decompose,
                    random_h20_family, stability_chain)
from .rays import (RaySample, assemble_sigma_hat, dense_transform, extract_ray_data, extract_ray_pair,
                   fourier_slice, hminus1_band_norm, ray_offsets, recover_q_hat, slice_frequencies,
                   slices_over_fan)
from .wave import DnOperator, dn_equality_residual, dn_norm_from_outputs, probe_basis, solve_forward

FOOTER = ("dn_norm is a surrogate: the largest singular value of the Dirichlet-to-Neumann difference on a "
          "finite H1-orthonormalised probe basis; the continuum operator norm is not computable.")

# ----------------------------------------------------------------------------
# configuration


@dataclass
class GeometryConfig:
    """Square Omega of half width ``omega_half_width`` centred in the box ``[-B, B]^2``."""

    omega_half_width: float = 0.5
    box_half_width: float = 2.5
    rho: float = 1.0
    h: float = 0.02
    T: float = 5.46
    cfl: float = 0.5

    def domain(self) -> Domain:
        return Domain(omega_half_width=self.omega_half_width, box_half_width=self.box_half_width,
                      rho=self.rho)

    def grid(self, enforce_window: bool = True) -> Grid:
        return Grid.build(self.domain(), self.h, self.T, self.cfl, enforce_window)


@dataclass
class FieldSpec:
    """A named smooth vector field generator (see :func:`vector_bump`)."""

    kind: str = "uniform"
    center: tuple = (0.0, 0.0)
    radius: float = 0.3
    amplitude: float = 1.0
    direction: tuple = (1.0, 0.0)

    def build(self, grid: Grid) -> AnalyticField:
        return vector_bump(grid, self.kind, tuple(self.center), self.radius, self.amplitude,
                           tuple(self.direction))


def build_field(specs, grid: Grid) -> AnalyticField:
    out = AnalyticField.zeros(grid)
    for s in specs:
        out = out + s.build(grid)
    return out


@dataclass
class FamilyConfig:
    """``V2 = V_base`` and ``V1 = V_base + eps W`` with ``W`` scaled to a given ``W^{1,inf}`` norm."""

    base: list = field(default_factory=lambda: [FieldSpec("uniform", (0.02, 0.0), 0.4, 0.02, (1.0, 0.5))])
    perturbation: list = field(default_factory=lambda: [
        FieldSpec("swirl", (0.1, -0.05), 0.3, -1.0),
        FieldSpec("uniform", (-0.1, 0.1), 0.3, -1.0, (0.3, 1.0)),
    ])
    perturbation_w1inf: float = 1.0
    epsilons: list = field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])

    def fields(self, grid: Grid) -> tuple[AnalyticField, AnalyticField]:
        base = build_field(self.base, grid)
        W = build_field(self.perturbation, grid)
        n = w1inf_norm(W.values, grid.h)
        if n == 0:
            raise ConfigurationError("the perturbation field vanishes")
        return base, (self.perturbation_w1inf / n) * W


@dataclass
class ExperimentConfig:
    """All parameters of the verification, stability and rate runs."""

    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    carleman_geometry: GeometryConfig = field(default_factory=lambda: GeometryConfig(
        omega_half_width=0.5, box_half_width=1.0, rho=0.25, h=1 / 64, T=3.9))
    refinement_steps: list = field(default_factory=lambda: [1 / 32, 1 / 64, 1 / 128])
    identity_time: float = 0.25
    dn_probe_count: int = 8
    M: float = 0.54
    alpha: float = 0.45
    lambdas: list = field(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])
    mollifier_lambdas: list = field(default_factory=lambda: [4.0, 8.0, 16.0, 32.0, 64.0])
    mollifier_h: float = 1 / 120
    fan_size: int = 32
    offset_count: int = 32
    oracle_offset_count: int = 16
    probe_basis_size: int = 32
    ray_lambda: float = 20.0
    ray_width_scale: float = 0.35
    oracle_amplitude: float = 0.08
    go_bump_width: float = 0.45
    go_coefficient: list = field(default_factory=lambda: [FieldSpec("uniform", (0.02, 0.0), 0.4, 0.08,
                                                                    (1.0, 0.5))])
    slice_radius: float = 8.0
    slice_count: int = 65
    carleman_family_size: int = 50
    family: FamilyConfig = field(default_factory=FamilyConfig)
    rate_tolerance: float = 0.15
    seed: int = 0
    workers: int = 1
    out: str = "results"

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("the config must be a JSON object")
        return cls.from_dict(data)

    def hash(self) -> str:
        """SHA-256 of the canonical JSON, excluding output location and worker count."""
        d = self.to_dict()
        d.pop("out", None)
        d.pop("workers", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        """Check every precondition before any solve; raises on the first violation."""
        for name in ("geometry", "carleman_geometry"):
            gc = getattr(self, name)
            if not 0 < gc.cfl <= 0.9:
                raise ConfigurationError(f"{name}: CFL safety factor {gc.cfl} outside (0, 0.9]")
        g = self.geometry
        if self.M <= 0:
            raise ConfigurationError("M must be positive")
        if self.M * g.T >= 3.0:
            raise BranchSafetyError(f"M*T = {self.M * g.T:.3g} >= 3: the ray-datum logarithm is not branch safe")
        dom = g.domain()
        if g.T <= dom.min_time:
            raise ConfigurationError(f"T = {g.T} must exceed diam(Omega) + 4 rho = {dom.min_time:.4g}")
        self.carleman_geometry.domain()
        if not 0 < self.alpha <= 0.5:
            raise ConfigurationError("alpha must lie in (0, 1/2]")
        lams = list(self.lambdas) + [self.ray_lambda]
        if min(lams) <= 0 or max(lams) * g.h > 1.0:
            raise ConfigurationError("every carrier frequency must satisfy 0 < lam and lam*h <= 1")
        if len(self.lambdas) < 2 or len(self.mollifier_lambdas) < 2:
            raise ConfigurationError("rate fits need at least two frequencies")
        if self.offset_count < 16 or self.oracle_offset_count < 16:
            raise ConfigurationError("at least 16 offsets per direction are required")
        if self.fan_size < 1 or self.probe_basis_size < 1 or self.dn_probe_count < 1:
            raise ConfigurationError("fan and probe counts must be positive")
        eps = list(self.family.epsilons)
        if len(eps) < 4 or min(eps) <= 0 or len(set(eps)) != len(eps):
            raise ConfigurationError("the contrast sweep needs at least four distinct positive values")
        if len(self.refinement_steps) < 2:
            raise ConfigurationError("refinement studies need at least two steps")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        grid = g.grid()
        base, W = self.family.fields(grid)
        for e in eps:
            n = w1inf_norm(base.values + e * W.values, grid.h)
            if n > self.M:
                raise ConfigurationError(f"||V_base + {e} W||_W1inf = {n:.3g} exceeds M = {self.M}")


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _build(cls, data):
    if not isinstance(data, dict):
        raise ConfigurationError(f"expected an object for {cls.__name__}")
    names = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigurationError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    default = cls()
    kwargs = {}
    for k, v in data.items():
        cur = getattr(default, k)
        if is_dataclass(cur):
            kwargs[k] = _build(type(cur), v)
        elif k in ("base", "perturbation", "go_coefficient"):
            kwargs[k] = [_build(FieldSpec, s) for s in v]
        elif isinstance(cur, tuple):
            kwargs[k] = tuple(v)
        else:
            kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


# ----------------------------------------------------------------------------
# fits and reports


@dataclass
class Fit:
    """Least-squares line in log-log coordinates."""

    slope: float
    intercept: float
    r2: float
    n: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "n": self.n}


def loglog_fit(x, y) -> Fit:
    """Fit ``log y = slope log x + intercept``; non-positive points are dropped."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    if len(lx) < 2:
        return Fit(float("nan"), float("nan"), float("nan"), int(len(lx)))
    slope, icpt = np.polyfit(lx, ly, 1)
    pred = slope * lx + icpt
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ly - pred) ** 2)) / ss if ss > 0 else 1.0
    return Fit(float(slope), float(icpt), float(r2), int(len(lx)))


def order_fit(steps, errors) -> float:
    """Observed order of convergence: slope of ``log error`` against ``log step``."""
    return loglog_fit(steps, errors).slope


@dataclass
class SuiteResult:
    """Outcome of one verification suite: named checks plus the raw metrics."""

    name: str
    checks: dict
    metrics: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checks": dict(self.checks),
                "metrics": _plain(self.metrics)}


def _map(config: ExperimentConfig, func, items):
    """Run independent tasks in a worker pool; results keep the input order."""
    items = list(items)
    if config.workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(func, items))


def _rng(config: ExperimentConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(config.seed), int(stream)])


# ----------------------------------------------------------------------------
# suites


def _manufactured(grid: Grid, shift: float = 0.0) -> np.ndarray:
    """Smooth space-time test function on the whole box."""
    X, Y = grid.mesh()
    t = grid.t[:, None, None]
    return (np.sin(2.0 * X + Y - 1.5 * t + shift) * np.cos(X - 2.0 * Y + 0.5 * t)
            * np.exp(-(X**2 + Y**2)))


IDENTITY_FIELDS = [
    [FieldSpec("uniform", (0.02, -0.03), 0.9, 0.3, (1.0, 0.5))],
    [FieldSpec("swirl", (0.05, -0.05), 0.9, 0.3)],
    [FieldSpec("gradient", (-0.05, 0.05), 0.95, 0.3)],
    [FieldSpec("uniform", (0.1, 0.0), 0.9, 0.2, (0.0, 1.0)), FieldSpec("swirl", (-0.1, 0.1), 0.9, 0.2)],
    [FieldSpec("gradient", (0.0, 0.1), 0.95, 0.2), FieldSpec("uniform", (0.0, -0.1), 0.9, 0.25, (1.0, -1.0))],
]

# interior fields (supported inside Omega) for the DN-difference comparison
DN_FIELDS = [
    [FieldSpec("uniform", (0.0, 0.0), 0.4, 0.3, (1.0, 0.5))],
    [FieldSpec("swirl", (0.05, -0.05), 0.4, 0.3)],
]


def suite_operator_identity(config: ExperimentConfig) -> SuiteResult:
    """Reduction to the magnetic form: operator residual order and DN-difference agreement."""
    cg = config.carleman_geometry
    dom = cg.domain()
    steps = sorted(config.refinement_steps, reverse=True)
    orders, table = [], []
    for i, specs in enumerate(IDENTITY_FIELDS):
        res = []
        for h in steps:
            g = Grid.build(dom, h, config.identity_time, cg.cfl, enforce_window=False)
            F = build_field(specs, g)
            res.append(em_operator_residual(F.values, _manufactured(g, 0.3 * i), g, F.div))
        orders.append(order_fit(steps, res))
        table.append(res)
    # DN differences for two fields that agree near the boundary
    dn = []
    for h in steps[-2:]:
        g = Grid.build(dom, h, 2 * config.identity_time, cg.cfl, enforce_window=False)
        mesh = omega_mesh(dom, g)
        F1 = build_field(DN_FIELDS[0], g)
        F2 = build_field(DN_FIELDS[1], g)
        dn.append(dn_equality_residual(F1.values, F2.values, probe_basis(mesh, config.dn_probe_count),
                                       F1.div, F2.div))
    decrease = dn[0] / dn[1] if dn[1] > 0 else math.inf
    checks = {"em_residual_order>=1.8": min(orders) >= 1.8, "dn_equality_decrease>=1.5": decrease >= 1.5}
    return SuiteResult("operator_identity", checks, {
        "steps": steps, "em_residuals": table, "em_orders": orders, "dn_equality_residuals": dn,
        "dn_equality_decrease": decrease, "noise_floor": dn[-1]})


def _interior_pair(grid: Grid, shift: float):
    X, Y = grid.mesh()
    b = smooth_bump(grid, (0.05 * shift, -0.03), 0.35)[0]
    return b * np.exp(1j * (2 * X - Y + shift)), smooth_bump(grid, (-0.04, 0.02 * shift), 0.3)[0] * np.cos(X + 3 * Y)


def suite_green_formula(config: ExperimentConfig) -> SuiteResult:
    """Green formula for the magnetic Laplacian: exact for interior data, convergent with boundary terms."""
    from .wave import green_formula_residual
    cg = config.carleman_geometry
    dom = cg.domain()
    steps = sorted(config.refinement_steps, reverse=True)
    interior = []
    for h in steps:
        g = Grid.build(dom, h, config.identity_time, cg.cfl, enforce_window=False)
        Z = np.zeros((2, g.nx, g.ny), complex)
        for s in range(3):
            u, v = _interior_pair(g, s)
            interior.append(green_formula_residual(Z, u, v, dom, g))
    boundary = []
    for h in steps:
        g = Grid.build(dom, h, config.identity_time, cg.cfl, enforce_window=False)
        X, Y = g.mesh()
        F = vector_bump(g, "uniform", (0.1, 0.0), 0.9, 0.4, (1.0, 0.5))
        A = 0.5j * F.values
        u = np.exp(1j * (X + 2 * Y)) * (1 + X**2)
        v = np.cos(2 * X - Y) + 1j * Y
        boundary.append(green_formula_residual(A, u, v, dom, g, 0.5j * F.div))
    order = order_fit(steps, boundary)
    checks = {"interior_residual<=1e-8": max(interior) <= 1e-8, "boundary_order>=0.9": order >= 0.9}
    return SuiteResult("green_formula", checks, {"steps": steps, "interior_residuals": interior,
                                                 "boundary_residuals": boundary, "boundary_order": order})


def mollifier_rate_table(config: ExperimentConfig) -> dict:
    """``sup|A - A_lam|`` and the largest second difference of ``A_lam`` over the frequency sweep."""
    dom = Domain(omega_half_width=0.5, box_half_width=1.0, rho=0.25)
    g = Grid.build(dom, config.mollifier_h, 1.0, 0.5, enforce_window=False)
    A = cone_field(g, (0.013, -0.021), 0.55, (1.0, 0.0))[0]
    h = g.h
    sup, d2 = [], []
    for lam in config.mollifier_lambdas:
        As = mollify(A, MollifierConfig(lam, config.alpha), g)
        m = int(np.ceil(lam ** (-config.alpha) / h)) + 2
        core = (slice(m, -m), slice(m, -m))
        sup.append(float(np.max(np.abs(As - A)[core])))
        dxx = (As[2:, 1:-1] - 2 * As[1:-1, 1:-1] + As[:-2, 1:-1]) / h**2
        dyy = (As[1:-1, 2:] - 2 * As[1:-1, 1:-1] + As[1:-1, :-2]) / h**2
        d2.append(float(max(np.max(np.abs(dxx)), np.max(np.abs(dyy)))))
    lams = list(config.mollifier_lambdas)
    return {"lambdas": lams, "sup_error": sup, "second_difference": d2,
            "sup_error_fit": loglog_fit(lams, sup).to_dict(), "second_difference_fit": loglog_fit(lams, d2).to_dict()}


def suite_mollifier_rates(config: ExperimentConfig) -> SuiteResult:
    t = mollifier_rate_table(config)
    a, tol = config.alpha, config.rate_tolerance
    s1, s2 = t["sup_error_fit"]["slope"], t["second_difference_fit"]["slope"]
    checks = {"sup_error_slope~-alpha": abs(s1 + a) <= tol, "second_difference_slope~+alpha": abs(s2 - a) <= tol}
    return SuiteResult("mollifier_rates", checks, t)


def suite_transport(config: ExperimentConfig) -> SuiteResult:
    """Transport of the bump and of the amplitude: second-order residual decay."""
    dom = Domain(omega_half_width=0.25, box_half_width=1.0, rho=0.25)
    om = Direction(0.4)
    steps = sorted(config.refinement_steps, reverse=True)
    tr, am = [], []
    for h in steps:
        g = Grid.build(dom, h, 0.5, 0.5, enforce_window=False)
        bump = make_bump_family((0.0, 0.0), 0.5, dom, g, check_support=False)
        tr.append(transport_residual(transport_phase(bump, om, g), om, g))
        F = vector_bump(g, "uniform", (0.1, -0.1), 0.6, 0.5, (1.0, 0.3))
        a_s = 0.5j * F.values
        am.append(amplitude_transport_residual(go_amplitude(a_s, om, g), a_s, om, g))
    o1, o2 = order_fit(steps, tr), order_fit(steps, am)
    checks = {"phase_transport_order>=1.8": o1 >= 1.8, "amplitude_transport_order>=1.8": o2 >= 1.8}
    return SuiteResult("transport", checks, {"steps": steps, "phase_residuals": tr, "amplitude_residuals": am,
                                             "phase_order": o1, "amplitude_order": o2})


def go_rate_rows(config: ExperimentConfig) -> list[dict]:
    """Correction-term norms for forward and backward probes over the frequency sweep."""
    gc = config.geometry
    dom, g = gc.domain(), gc.grid()
    mesh = omega_mesh(dom, g)
    F = build_field(config.go_coefficient, g)
    pair = reduce_to_em(F.values, g.h, F.div)
    om = Direction(0.3)
    y = probe_center(dom, om, 0.05)
    bump = make_bump_family(y, config.go_bump_width, dom, g)

    def one(task):
        sign, lam = task
        an = make_ansatz(pair, om, lam, bump, g, config.alpha, sign)
        res = go_solution_with_residual(pair, an, mesh)
        return {"sign": sign, "omega_angle": om.angle, "y_x": float(y[0]), "y_y": float(y[1]), "lambda": float(lam),
                "r_l2": res.r_l2, "grad_r_l2": res.grad_r_l2, "leading_l2": res.leading_l2,
                "end_leading_sup": max(res.end_leading_sup), "final_r_sup": res.final_r_sup}

    tasks = [(s, lam) for s in ("forward", "backward") for lam in config.lambdas]
    return _map(config, one, tasks)


def go_rate_fits(rows: list[dict], config: ExperimentConfig) -> dict:
    out = {}
    for sign in ("forward", "backward"):
        rs = [r for r in rows if r["sign"] == sign]
        lam = [r["lambda"] for r in rs]
        out[sign] = {"r_fit": loglog_fit(lam, [r["r_l2"] for r in rs]).to_dict(),
                     "grad_r_fit": loglog_fit(lam, [r["grad_r_l2"] for r in rs]).to_dict()}
    return out


def suite_go_rates(config: ExperimentConfig) -> SuiteResult:
    rows = go_rate_rows(config)
    fits = go_rate_fits(rows, config)
    a, tol = config.alpha, config.rate_tolerance
    checks = {}
    for sign in ("forward", "backward"):
        checks[f"{sign}_r_slope<=-alpha+tol"] = fits[sign]["r_fit"]["slope"] <= -a + tol
        checks[f"{sign}_grad_r_slope<=1-alpha+tol"] = fits[sign]["grad_r_fit"]["slope"] <= 1 - a + tol
    checks["ansatz_support_exact"] = max(r["end_leading_sup"] for r in rows) <= 1e-12
    return SuiteResult("go_rates", checks, {"rows": rows, "fits": fits})


def oracle_pair(config: ExperimentConfig, grid: Grid) -> tuple[CoefficientPair, CoefficientPair]:
    """Small-contrast magnetic pair for the ray oracle: ``A1 = (i/2) F``, ``A2 = 0``, ``q = 0``."""
    F = vector_bump(grid, "uniform", (0.05, -0.03), 0.4, config.oracle_amplitude, (1.0, 0.5))
    zero = np.zeros((grid.nx, grid.ny))
    return (CoefficientPair(0.5j * F.values, zero, 0.5j * F.div),
            CoefficientPair(np.zeros((2, grid.nx, grid.ny)), zero))


def ray_oracle_table(config: ExperimentConfig, noise_floor: float | None = None) -> dict:
    gc = config.geometry
    dom, g = gc.domain(), gc.grid()
    p1, p2 = oracle_pair(config, g)
    offs = ray_offsets(dom, config.oracle_offset_count)
    fan = direction_fan(config.fan_size)

    def one(task):
        lam, om = task
        S = extract_ray_data(p1, p2, om, offs, lam, dom, g, "magnetic", alpha=config.alpha,
                             width_scale=config.ray_width_scale)
        return [s.error for s in S]

    medians = []
    for lam in config.lambdas:
        errs = _map(config, one, [(lam, om) for om in fan])
        medians.append(float(np.median(np.concatenate(errs))))
    # equal-coefficient diagonal at the largest frequency
    diag = []
    for om in fan[:: max(1, len(fan) // 8)]:
        S = extract_ray_data(p1, p1, om, offs, config.lambdas[-1], dom, g, "magnetic", alpha=config.alpha,
                             width_scale=config.ray_width_scale, oracle=False)
        diag.extend(abs(s.extracted_value) for s in S)
    return {"lambdas": list(config.lambdas), "median_error": medians,
            "median_error_fit": loglog_fit(config.lambdas, medians).to_dict(),
            "diagonal_median": float(np.median(diag)), "noise_floor": noise_floor,
            "directions": len(fan), "offsets": len(offs)}


def suite_ray_oracle(config: ExperimentConfig, noise_floor: float | None = None) -> SuiteResult:
    if noise_floor is None:
        noise_floor = suite_operator_identity(config).metrics["noise_floor"]
    t = ray_oracle_table(config, noise_floor)
    med = t["median_error"]
    checks = {"median_error_monotone": all(b < a for a, b in zip(med, med[1:])),
              "diagonal<=10*noise_floor": t["diagonal_median"] <= 10 * noise_floor}
    return SuiteResult("ray_oracle", checks, t)


def _gaussian_samples(omega: Direction, offsets, centers, weights, s):
    """Exact ray data of ``sum_i c_i exp(-|x - x_i|^2 / s^2)``."""
    p = omega.perp
    out = []
    for z in offsets:
        val = sum(c * math.sqrt(math.pi) * s * math.exp(-((z - (x[0] * p[0] + x[1] * p[1])) ** 2) / s**2)
                  for x, c in zip(centers, weights))
        out.append(RaySample(omega, (float(z * p[0]), float(z * p[1])), 0.0, complex(val), complex(val),
                             float(z), "electric"))
    return out


def fourier_table(config: ExperimentConfig) -> dict:
    """Zero-frequency identity, dense-transform oracle and gradient annihilation."""
    # zero frequency: analytic Gaussian data, total mass pi s^2 sum c_i
    centers = [(0.1, -0.05), (-0.15, 0.1), (0.05, 0.2)]
    weights = [1.0, -0.6, 0.8]
    s = 0.12
    mass = math.pi * s**2 * sum(weights)
    offs = np.linspace(-1.5, 1.5, 257)
    zero_err = 0.0
    for om in direction_fan(8):
        sl = fourier_slice(_gaussian_samples(om, offs, centers, weights, s), [0.0])
        zero_err = max(zero_err, abs(sl.values[0] - mass) / abs(mass))
    # dense-transform oracle on grid data
    cg = config.carleman_geometry
    dom = cg.domain()
    g = Grid.build(dom, min(config.refinement_steps), cg.T, cg.cfl, enforce_window=False)
    f = smooth_bump(g, (0.05, -0.02), 0.35)[0] - 0.5 * smooth_bump(g, (-0.1, 0.12), 0.2)[0]
    k = slice_frequencies(config.slice_radius, config.slice_count)
    offs_g = ray_offsets(dom, 96)
    dense_err, scale = 0.0, 0.0
    for om in direction_fan(8):
        samples = [RaySample(om, (float(z * om.perp[0]), float(z * om.perp[1])), 0.0, 0j,
                             complex(line_quadrature(f, om, z * om.perp, g)), float(z), "electric")
                   for z in offs_g]
        sl = fourier_slice(samples, k, use_oracle=True)
        ref = dense_transform(f, g, sl.xi)
        dense_err = max(dense_err, float(np.max(np.abs(sl.values - ref))))
        scale = max(scale, float(np.max(np.abs(ref))))
    # gradient leakage: sigma from a gradient field against a swirl of the same amplitude
    G = vector_bump(g, "gradient", (0.03, -0.02), 0.35, 1.0).values
    S = vector_bump(g, "swirl", (0.03, -0.02), 0.35, 1.0).values
    sets_g, sets_s = [], []
    for om in direction_fan(8):
        w = om.vector
        for field_, sets in ((G, sets_g), (S, sets_s)):
            wa = w[0] * field_[0] + w[1] * field_[1]
            sets.append([RaySample(om, (float(z * om.perp[0]), float(z * om.perp[1])), 0.0, 0j,
                                   complex(line_quadrature(wa, om, z * om.perp, g)), float(z), "magnetic")
                         for z in offs_g])
    sig_g = assemble_sigma_hat(slices_over_fan(sets_g, k, use_oracle=True))
    sig_s = assemble_sigma_hat(slices_over_fan(sets_s, k, use_oracle=True))
    leak = float(np.max(np.abs(sig_g.values)) / np.max(np.abs(sig_s.values)))
    return {"zero_frequency_relative_error": float(zero_err), "dense_max_error": dense_err,
            "dense_scale": scale, "dense_relative_error": dense_err / scale, "gradient_leakage": leak}


def suite_fourier(config: ExperimentConfig) -> SuiteResult:
    t = fourier_table(config)
    checks = {"zero_frequency<=1e-6": t["zero_frequency_relative_error"] <= 1e-6,
              "dense_oracle<=1e-3": t["dense_relative_error"] <= 1e-3,
              "gradient_leakage<=1e-2": t["gradient_leakage"] <= 1e-2}
    return SuiteResult("fourier", checks, t)


def hodge_carleman_table(config: ExperimentConfig) -> dict:
    cg = config.carleman_geometry
    dom = cg.domain()
    steps = sorted(config.refinement_steps, reverse=True)
    kill = []
    for h in steps:
        g = Grid.build(dom, h, cg.T, cg.cfl, enforce_window=False)
        G = vector_bump(g, "gradient", (0.02, 0.01), 0.35, 1.0)
        sp = hodge_decompose(G.values, dom, g)
        kill.append(sp.norms["V_prime_l2"] / sp.norms["V_l2"])
    kill_order = order_fit(steps, kill)
    # Carleman on the configured grid
    g = cg.grid()
    weight = CarlemanWeight(dom, g)
    family = random_h20_family(dom, g, config.carleman_family_size, _rng(config, 7))
    gamma0 = find_gamma0(weight, family)
    gammas = gamma0 * np.linspace(1.0, 4.0, 7)
    worst = [max(carleman_verify(weight, u, gm).ratio for u in family) for gm in gammas]
    # gauge invariance of the DN map
    gg = config.geometry
    gdom, ggrid = gg.domain(), gg.grid()
    gmesh = omega_mesh(gdom, ggrid)
    base, W = config.family.fields(ggrid)
    eps = max(config.family.epsilons)
    p2 = reduce_to_em(base.values, ggrid.h, base.div)
    p1 = reduce_to_em(base.values + eps * W.values, ggrid.h, base.div + eps * W.div)
    p1g, _ = gauge_normalize(p1, p2, gdom, ggrid)
    probes = probe_basis(gmesh, config.probe_basis_size)
    n2 = solve_forward(p2, probes, store=False).trace
    n1 = solve_forward(p1, probes, store=False).trace
    n1g = solve_forward(p1g, probes, store=False).trace
    d0 = dn_norm_from_outputs(probes, n1 - n2)
    d1 = dn_norm_from_outputs(probes, n1g - n2)
    return {"steps": steps, "gradient_kill_ratio": kill, "gradient_kill_order": kill_order,
            "weight_conditions": weight.check_conditions(), "gamma0": gamma0, "gammas": gammas.tolist(),
            "worst_ratio": worst, "family_size": len(family), "dn_norm": d0, "dn_norm_gauged": d1,
            "gauge_relative_gap": abs(d1 - d0) / d0}


def suite_hodge_carleman(config: ExperimentConfig) -> SuiteResult:
    t = hodge_carleman_table(config)
    checks = {"gradient_kill_order>=0.9": t["gradient_kill_order"] >= 0.9,
              "weight_conditions": all(t["weight_conditions"].values()),
              "carleman_ratio<=1": max(t["worst_ratio"]) <= 1.0,
              "gauge_gap<=2%": t["gauge_relative_gap"] <= 0.02}
    return SuiteResult("hodge_carleman", checks, t)


SUITES = {
    "operator_identity": suite_operator_identity,
    "green_formula": suite_green_formula,
    "mollifier_rates": suite_mollifier_rates,
    "transport": suite_transport,
    "go_rates": suite_go_rates,
    "ray_oracle": suite_ray_oracle,
    "fourier": suite_fourier,
    "hodge_carleman": suite_hodge_carleman,
}


def run_verify(config: ExperimentConfig, suites=None) -> dict:
    """Run the verification suites and return a JSON-ready report."""
    config.validate()
    names = list(SUITES) if suites is None else list(suites)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigurationError(f"unknown suites {unknown}")
    results = {}
    noise = None
    for n in names:
        if n == "ray_oracle":
            res = suite_ray_oracle(config, noise)
        else:
            res = SUITES[n](config)
        if n == "operator_identity":
            noise = res.metrics["noise_floor"]
        results[n] = res.to_dict()
    failed = [n for n, r in results.items() if not r["passed"]]
    return {"kind": "verify", "config_hash": config.hash(), "seed": config.seed, "suites": results,
            "passed": not failed, "failed": failed, "footer": FOOTER}


# ----------------------------------------------------------------------------
# stability study


def _stability_setup(config: ExperimentConfig):
    gc = config.geometry
    dom, g = gc.domain(), gc.grid()
    mesh = omega_mesh(dom, g)
    base, W = config.family.fields(g)
    return dom, g, mesh, base, W


def dn_rows(config: ExperimentConfig, mirrored: bool = False) -> list[dict]:
    """``dn_norm`` and ``||V1 - V2||`` over the contrast sweep (cheap part of the study)."""
    dom, g, mesh, base, W = _stability_setup(config)
    probes = probe_basis(mesh, config.probe_basis_size)
    mask = omega_mask(dom, g)
    ref = DnOperator(base.values, mesh).apply(probes)
    rows = []
    for eps in config.family.epsilons:
        V1 = base.values + eps * W.values
        out = DnOperator(V1, mesh).apply(probes)
        d = (ref - out) if mirrored else (out - ref)
        dv = (base.values - V1) if mirrored else (V1 - base.values)
        rows.append({"epsilon": float(eps), "dn_norm": dn_norm_from_outputs(probes, d),
                     "dV_l2": l2_norm(dv, g.h, mask)})
    return rows


def _recover(config, dom, g, p1, p2, cache):
    gauged, _ = gauge_normalize(p1, p2, dom, g)
    offs = ray_offsets(dom, config.offset_count)
    fan = direction_fan(config.fan_size)

    def one(om):
        return extract_ray_pair(p1, p2, gauged, om, offs, config.ray_lambda, dom, g, alpha=config.alpha,
                                width_scale=config.ray_width_scale, cache=cache)

    res = _map(config, one, fan)
    mag = [r[0] for r in res]
    ele = [r[1] for r in res]
    k = slice_frequencies(config.slice_radius, config.slice_count)
    sig = assemble_sigma_hat(slices_over_fan(mag, k))
    sig_o = assemble_sigma_hat(slices_over_fan(mag, k, use_oracle=True))
    qh = recover_q_hat(ele, k)
    qo = recover_q_hat(ele, k, use_oracle=True)
    R = config.slice_radius
    bn = {n: hminus1_band_norm(f, R) for n, f in (("sigma", sig), ("sigma_oracle", sig_o), ("q", qh),
                                                  ("q_oracle", qo))}
    return {"dalpha_hm1": bn["sigma"].low, "q_hm1": bn["q"].low, "dalpha_hm1_oracle": bn["sigma_oracle"].low,
            "q_hm1_oracle": bn["q_oracle"].low, "cutoff": bn["sigma"].R,
            "magnetic_median_error": float(np.median([s.error for S in mag for s in S])),
            "electric_median_error": float(np.median([s.error for S in ele for s in S]))}


def run_stability(config: ExperimentConfig) -> dict:
    """The Hoelder-stability experiment over the contrast sweep."""
    config.validate()
    dom, g, mesh, base, W = _stability_setup(config)
    h = g.h
    rows = dn_rows(config)
    p2 = reduce_to_em(base.values, h, base.div)
    cache: dict = {}
    weight = CarlemanWeight(dom, g)
    chash = config.hash()
    for row in rows:
        eps = row["epsilon"]
        V1 = base.values + eps * W.values
        div1 = base.div + eps * W.div
        p1 = reduce_to_em(V1, h, div1)
        rec = _recover(config, dom, g, p1, p2, cache)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            chain = stability_chain(V1, base.values, dom, g, {"q_hm1": rec["q_hm1"],
                                    "dalpha_hm1": rec["dalpha_hm1"], "dn_norm": row["dn_norm"]},
                                    weight, div1, base.div)
        row.update(rec)
        row["recovered_sum"] = rec["dalpha_hm1"] + rec["q_hm1"]
        row["chain"] = chain.to_dict()
        row["config_hash"] = chash
    mirror = dn_rows(config, mirrored=True)
    fits = stability_fits(rows)
    flags = {
        "kappa_in_(0,1)": fits["kappa"]["r2"] >= 0.9 and 0 < fits["kappa"]["slope"] < 1,
        "mu_in_(0,1]": fits["mu"]["r2"] >= 0.9 and 0 < fits["mu"]["slope"] <= 1,
        "dn_norm_increasing": _increasing_in_eps(rows, "dn_norm"),
        "mirror_symmetric": all(math.isclose(a["dn_norm"], b["dn_norm"], rel_tol=1e-9) and
                                math.isclose(a["dV_l2"], b["dV_l2"], rel_tol=1e-12) for a, b in zip(rows, mirror)),
        "chain_complete": all(r["chain"]["complete"] for r in rows),
    }
    for key in ("kappa", "mu"):
        if fits[key]["r2"] < 0.9:
            fits[key]["degenerate"] = True
    constants = chain_constants(rows)
    return {"kind": "stability", "config_hash": chash, "seed": config.seed, "rows": rows,
            "mirror_rows": mirror, "fits": fits, "chain_constants": constants, "flags": flags,
            "passed": all(flags.values()), "reference_slope_mu": 0.5, "footer": FOOTER}


def _increasing_in_eps(rows, key) -> bool:
    s = sorted(rows, key=lambda r: r["epsilon"])
    return all(b[key] > a[key] for a, b in zip(s, s[1:]))


def stability_fits(rows: list[dict]) -> dict:
    """Exponent fits against ``dn_norm``; the ``eps = 0`` row (if any) is excluded."""
    rows = [r for r in rows if r["epsilon"] > 0]
    dn = [r["dn_norm"] for r in rows]

    def fit(key_or_fn):
        ys = [key_or_fn(r) if callable(key_or_fn) else r[key_or_fn] for r in rows]
        return loglog_fit(dn, ys).to_dict()

    out = {"kappa": fit("dV_l2"), "mu": fit("recovered_sum"), "mu_dalpha": fit("dalpha_hm1"),
           "mu_q": fit("q_hm1")}
    if rows and "chain" in rows[0]:
        out["kappa_1"] = fit(lambda r: r["chain"]["norms"]["q_l2"])
        out["kappa_2"] = fit(lambda r: r["chain"]["norms"]["V_prime_l2"])
        out["kappa_3"] = fit(lambda r: r["chain"]["norms"]["dn_phi_gamma0_l2"])
    return out


def chain_constants(rows: list[dict]) -> dict:
    """Per-link constant: the largest observed ratio lhs/rhs over the sweep."""
    out = {}
    for r in rows:
        for link in r["chain"]["links"]:
            out[link["name"]] = max(out.get(link["name"], 0.0), link["ratio"])
    return out


# ----------------------------------------------------------------------------
# rate study


def run_rates(config: ExperimentConfig) -> dict:
    """Mollifier and GO rate fits with their targets."""
    config.validate()
    a, tol = config.alpha, config.rate_tolerance
    moll = mollifier_rate_table(config)
    rows = go_rate_rows(config)
    fits = go_rate_fits(rows, config)
    targets = [
        ("mollifier_sup_error", moll["sup_error_fit"]["slope"], -a, "two_sided"),
        ("mollifier_second_difference", moll["second_difference_fit"]["slope"], a, "two_sided"),
    ]
    for sign in ("forward", "backward"):
        targets.append((f"go_{sign}_r", fits[sign]["r_fit"]["slope"], -a, "upper"))
        targets.append((f"go_{sign}_grad_r", fits[sign]["grad_r_fit"]["slope"], 1 - a, "upper"))
    table = []
    for name, slope, target, kind in targets:
        ok = abs(slope - target) <= tol if kind == "two_sided" else slope <= target + tol
        table.append({"name": name, "slope": slope, "target": target, "tolerance": tol, "kind": kind, "passed": ok})
    return {"kind": "rates", "config_hash": config.hash(), "seed": config.seed, "mollifier": moll,
            "go_rows": rows, "go_fits": fits, "table": table, "passed": all(t["passed"] for t in table),
            "footer": FOOTER}


# ----------------------------------------------------------------------------
# output


def report_json(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True, allow_nan=True)


def write_report(report: dict, out_dir, name: str = "report.json") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(report_json(report))
    return path


__all__ = [
    "FOOTER", "FamilyConfig", "FieldSpec", "Fit", "GeometryConfig", "ExperimentConfig", "SUITES", "SuiteResult",
    "build_field", "chain_constants", "dn_rows", "fourier_table", "go_rate_fits", "go_rate_rows",
    "hodge_carleman_table", "loglog_fit", "mollifier_rate_table", "oracle_pair", "order_fit", "ray_oracle_table",
    "report_json", "run_rates", "run_stability", "run_verify", "stability_fits", "write_report",
]
