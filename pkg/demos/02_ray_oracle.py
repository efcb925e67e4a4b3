"""Light-ray data from boundary pairings, checked against line quadrature.

For a small magnetic contrast A1 = (i/2) F, A2 = 0, one direction of the
fan is probed with geometric-optics solutions at increasing carrier
frequency.  The extracted line integrals approach the brute-force chord
integrals of omega . (A1 - A2).

    python3 demos/02_ray_oracle.py      (about a minute)
"""
import numpy as np

from wavestab.experiments import ExperimentConfig, oracle_pair
from wavestab.geometry import Direction
from wavestab.rays import extract_ray_data, ray_offsets

config = ExperimentConfig()
dom, grid = config.geometry.domain(), config.geometry.grid()
p1, p2 = oracle_pair(config, grid)
omega = Direction(0.3)
offsets = ray_offsets(dom, 16)
for lam in config.lambdas:
    samples = extract_ray_data(p1, p2, omega, offsets, lam, dom, grid, "magnetic", alpha=config.alpha,
                               width_scale=config.ray_width_scale)
    errs = np.array([s.error for s in samples])
    peak = max(abs(s.oracle_value) for s in samples)
    print(f"lambda {lam:5.1f}  median error {np.median(errs):.3e}  (largest oracle value {peak:.3e})")
