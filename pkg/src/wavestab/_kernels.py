"""Compiled leapfrog update for batched five-point stencils."""
import numba
import numpy as np


@numba.njit(cache=True, nogil=True, fastmath=True)
def leapfrog_step(u, up, out, cc, ce, cw, cn, cs, mask, dt2):
    """``out = 2u - up + dt2 * L u`` on masked nodes, batched over the last axis.

    Arrays ``u, up, out`` have shape ``(nx, ny, nb)``.
    ``L u = cc*u + ce*u[i+1] + cw*u[i-1] + cn*u[j+1] + cs*u[j-1]``.  Nodes
    outside ``mask`` are left untouched (the caller imposes boundary data).
    """
    nx, ny, nb = u.shape
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            if mask[i, j]:
                a0 = cc[i, j] * dt2
                a1 = ce[i, j] * dt2
                a2 = cw[i, j] * dt2
                a3 = cn[i, j] * dt2
                a4 = cs[i, j] * dt2
                for b in range(nb):
                    out[i, j, b] = (2.0 * u[i, j, b] - up[i, j, b] + a0 * u[i, j, b]
                                    + a1 * u[i + 1, j, b] + a2 * u[i - 1, j, b]
                                    + a3 * u[i, j + 1, b] + a4 * u[i, j - 1, b])


def warmup():
    z = np.zeros((3, 3, 1), np.complex128)
    c = np.zeros((3, 3), np.complex128)
    m = np.ones((3, 3), np.bool_)
    leapfrog_step(z, z, z.copy(), c, c, c, c, c, m, 0.1)
