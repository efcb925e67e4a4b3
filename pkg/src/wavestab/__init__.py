"""Numerical study of stable recovery of first-order perturbations of the wave operator.

Submodules:

``geometry``     domain, grid, meshes, directions and quadrature
``fields``       coefficient fields, the magnetic reduction, mollifiers and norms
``wave``         leapfrog solver, Neumann traces, the Dirichlet-to-Neumann map
``go``           geometric-optics probes and their correction terms
``rays``         ray-datum extraction, Fourier slices and H^-1 band norms
``hodge``        Hodge split, gauge normalisation, Carleman checks, stability chain
``experiments``  config-driven verification suites, stability study, rate fits
``io``           binary and CSV serialisation
``plots``        deterministic SVG output
``cli``          command-line front end
"""
from .errors import (AdmissibilityError, AliasingError, BranchAmbiguityError, BranchSafetyError, ConfigurationError,
                     GeometryError, InstabilityError, ResolutionError, SolverError)
from .experiments import ExperimentConfig, run_rates, run_stability, run_verify
from .geometry import Direction, Domain, Grid

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "AliasingError", "BranchAmbiguityError", "BranchSafetyError", "ConfigurationError",
    "Direction", "Domain", "ExperimentConfig", "GeometryError", "Grid", "InstabilityError", "ResolutionError",
    "SolverError", "__version__", "run_rates", "run_stability", "run_verify",
]
