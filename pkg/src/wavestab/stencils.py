"""Finite-difference stencils shared by the solvers and the verifiers.

Spatial operators act on the trailing two axes.  ``apply_*`` functions
return values on the inner nodes ``[1:-1, 1:-1]`` of the input array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def gradient(f: np.ndarray, h: float) -> np.ndarray:
    """Centred gradient with second-order one-sided differences at the edges."""
    gx, gy = np.gradient(f, h, axis=(-2, -1), edge_order=2)
    return np.stack([gx, gy])


def divergence(V: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(V[0], h, axis=-2, edge_order=2) + np.gradient(V[1], h, axis=-1, edge_order=2)


def curl(V: np.ndarray, h: float) -> np.ndarray:
    """Scalar curl ``d1 V2 - d2 V1``."""
    return np.gradient(V[1], h, axis=-2, edge_order=2) - np.gradient(V[0], h, axis=-1, edge_order=2)


def laplacian_inner(f: np.ndarray, h: float) -> np.ndarray:
    return (f[..., 2:, 1:-1] + f[..., :-2, 1:-1] + f[..., 1:-1, 2:] + f[..., 1:-1, :-2]
            - 4.0 * f[..., 1:-1, 1:-1]) / h**2


def gradient_inner(f: np.ndarray, h: float) -> np.ndarray:
    return np.stack([(f[..., 2:, 1:-1] - f[..., :-2, 1:-1]) / (2 * h),
                     (f[..., 1:-1, 2:] - f[..., 1:-1, :-2]) / (2 * h)])


@dataclass(frozen=True, eq=False)
class Stencil:
    """Five-point coefficients ``L u = cc u + ce u_E + cw u_W + cn u_N + cs u_S``."""

    cc: np.ndarray
    ce: np.ndarray
    cw: np.ndarray
    cn: np.ndarray
    cs: np.ndarray

    def apply_inner(self, u: np.ndarray) -> np.ndarray:
        s = (slice(1, -1), slice(1, -1))
        return (self.cc[s] * u[..., 1:-1, 1:-1] + self.ce[s] * u[..., 2:, 1:-1]
                + self.cw[s] * u[..., :-2, 1:-1] + self.cn[s] * u[..., 1:-1, 2:]
                + self.cs[s] * u[..., 1:-1, :-2])

    def arrays(self):
        return tuple(np.ascontiguousarray(a, dtype=np.complex128)
                     for a in (self.cc, self.ce, self.cw, self.cn, self.cs))


def convection_stencil(V: np.ndarray, h: float) -> Stencil:
    """``L u = Delta_h u - V . grad_h u`` (forward convection operator)."""
    one = np.full(V.shape[1:], 1.0 / h**2)
    return Stencil(cc=-4.0 * one, ce=one - V[0] / (2 * h), cw=one + V[0] / (2 * h),
                   cn=one - V[1] / (2 * h), cs=one + V[1] / (2 * h))


def convection_adjoint_stencil(V: np.ndarray, h: float) -> Stencil:
    """``L v = Delta_h v + div_h(V v)`` in flux form.

    The neighbour coefficients carry ``V`` evaluated at the neighbour, which
    makes this the exact discrete transpose of ``-V . grad_h``.
    """
    one = np.full(V.shape[1:], 1.0 / h**2)
    ce = one.copy(); cw = one.copy(); cn = one.copy(); cs = one.copy()
    ce[:-1, :] += V[0][1:, :] / (2 * h)
    cw[1:, :] -= V[0][:-1, :] / (2 * h)
    cn[:, :-1] += V[1][:, 1:] / (2 * h)
    cs[:, 1:] -= V[1][:, :-1] / (2 * h)
    return Stencil(cc=-4.0 * one, ce=ce, cw=cw, cn=cn, cs=cs)


def magnetic_stencil(A: np.ndarray, q: np.ndarray, div_a: np.ndarray, h: float) -> Stencil:
    """``L u = Delta_h u + 2i A . grad_h u + i div A u - A.A u - q u``."""
    one = np.full(q.shape, 1.0 / h**2, dtype=complex)
    return Stencil(cc=-4.0 * one + 1j * div_a - (A[0] * A[0] + A[1] * A[1]) - q,
                   ce=one + 1j * A[0] / h, cw=one - 1j * A[0] / h,
                   cn=one + 1j * A[1] / h, cs=one - 1j * A[1] / h)
