"""Numba kernels for the direction-split implicit diffusion step.

One diffusion step is a Peaceman-Rachford pass: an explicit half-step in
one direction followed by an implicit (tridiagonal) half-step in the
other, then the directions swapped. All sweeps operate on the maximal
contiguous active spans of the grid ("runs"), so arbitrary masked
domains reduce to independent 1D Neumann problems. With a Robin
boundary, every run-end face leaks flux and the factor ``g`` below adds
eps*dx to the diagonal weight of end cells.

All kernels are deterministic: fixed loop order, no reductions across
threads.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def explicit_rows(u, runs, a, g, out):
    """out = (I + a*Tx) u restricted to row runs."""
    for r in range(runs.shape[0]):
        j = runs[r, 0]
        i0 = runs[r, 1]
        i1 = runs[r, 2]
        n = i1 - i0
        if n == 1:
            out[j, i0] = u[j, i0] * (1.0 - 2.0 * g)
            continue
        out[j, i0] = u[j, i0] + a * (u[j, i0 + 1] - u[j, i0]) - g * u[j, i0]
        for i in range(i0 + 1, i1 - 1):
            out[j, i] = u[j, i] + a * (
                u[j, i - 1] - 2.0 * u[j, i] + u[j, i + 1]
            )
        out[j, i1 - 1] = (
            u[j, i1 - 1]
            + a * (u[j, i1 - 2] - u[j, i1 - 1])
            - g * u[j, i1 - 1]
        )


@njit(cache=True)
def explicit_cols(u, runs, a, g, out):
    """out = (I + a*Ty) u restricted to column runs."""
    for r in range(runs.shape[0]):
        i = runs[r, 0]
        j0 = runs[r, 1]
        j1 = runs[r, 2]
        n = j1 - j0
        if n == 1:
            out[j0, i] = u[j0, i] * (1.0 - 2.0 * g)
            continue
        out[j0, i] = u[j0, i] + a * (u[j0 + 1, i] - u[j0, i]) - g * u[j0, i]
        for j in range(j0 + 1, j1 - 1):
            out[j, i] = u[j, i] + a * (
                u[j - 1, i] - 2.0 * u[j, i] + u[j + 1, i]
            )
        out[j1 - 1, i] = (
            u[j1 - 1, i]
            + a * (u[j1 - 2, i] - u[j1 - 1, i])
            - g * u[j1 - 1, i]
        )


@njit(cache=True)
def implicit_rows(u, runs, a, g, out, cbuf, dbuf):
    """Solve (I - a*Tx) out = u on every row run (Thomas algorithm)."""
    for r in range(runs.shape[0]):
        j = runs[r, 0]
        i0 = runs[r, 1]
        i1 = runs[r, 2]
        n = i1 - i0
        if n == 1:
            out[j, i0] = u[j, i0] / (1.0 + 2.0 * g)
            continue
        b = 1.0 + a + g
        cbuf[0] = -a / b
        dbuf[0] = u[j, i0] / b
        for k in range(1, n):
            b = (1.0 + 2.0 * a) if k < n - 1 else (1.0 + a + g)
            m = b + a * cbuf[k - 1]
            cbuf[k] = -a / m
            dbuf[k] = (u[j, i0 + k] + a * dbuf[k - 1]) / m
        out[j, i1 - 1] = dbuf[n - 1]
        for k in range(n - 2, -1, -1):
            out[j, i0 + k] = dbuf[k] - cbuf[k] * out[j, i0 + k + 1]


@njit(cache=True)
def implicit_cols(u, runs, a, g, out, cbuf, dbuf):
    """Solve (I - a*Ty) out = u on every column run."""
    for r in range(runs.shape[0]):
        i = runs[r, 0]
        j0 = runs[r, 1]
        j1 = runs[r, 2]
        n = j1 - j0
        if n == 1:
            out[j0, i] = u[j0, i] / (1.0 + 2.0 * g)
            continue
        b = 1.0 + a + g
        cbuf[0] = -a / b
        dbuf[0] = u[j0, i] / b
        for k in range(1, n):
            b = (1.0 + 2.0 * a) if k < n - 1 else (1.0 + a + g)
            m = b + a * cbuf[k - 1]
            cbuf[k] = -a / m
            dbuf[k] = (u[j0 + k, i] + a * dbuf[k - 1]) / m
        out[j1 - 1, i] = dbuf[n - 1]
        for k in range(n - 2, -1, -1):
            out[j0 + k, i] = dbuf[k] - cbuf[k] * out[j0 + k + 1, i]


@njit(cache=True)
def reaction(u, mask, inside_row, logistic, r_plus, r_minus, K, rho, dt, out):
    """Explicit growth update with clamping at zero.

    Returns the clamped (negative) density sum; multiply by the cell
    area for the removed mass in individuals. Fixed loop order keeps the
    accumulation deterministic.
    """
    ny, nx = u.shape
    rate = 4.0 * r_plus / ((1.0 - rho) * (1.0 - rho))
    clamped = 0.0
    for j in range(ny):
        drop = 0.0 if inside_row[j] else r_minus
        for i in range(nx):
            if not mask[j, i]:
                out[j, i] = 0.0
                continue
            w = u[j, i] / K
            if logistic:
                g = r_plus * (1.0 - w) - drop
            else:
                g = rate * (1.0 - w) * (w - rho) - drop
            v = u[j, i] * (1.0 + dt * g)
            if v < 0.0:
                clamped -= v
                v = 0.0
            out[j, i] = v
    return clamped


@njit(cache=True)
def masked_laplacian(u, row_runs, col_runs, inv_dx2, out):
    """Five-point Laplacian with zero-flux faces at run ends."""
    out[:, :] = 0.0
    for r in range(row_runs.shape[0]):
        j = row_runs[r, 0]
        i0 = row_runs[r, 1]
        i1 = row_runs[r, 2]
        if i1 - i0 == 1:
            continue
        out[j, i0] += (u[j, i0 + 1] - u[j, i0]) * inv_dx2
        for i in range(i0 + 1, i1 - 1):
            out[j, i] += (u[j, i - 1] - 2.0 * u[j, i] + u[j, i + 1]) * inv_dx2
        out[j, i1 - 1] += (u[j, i1 - 2] - u[j, i1 - 1]) * inv_dx2
    for r in range(col_runs.shape[0]):
        i = col_runs[r, 0]
        j0 = col_runs[r, 1]
        j1 = col_runs[r, 2]
        if j1 - j0 == 1:
            continue
        out[j0, i] += (u[j0 + 1, i] - u[j0, i]) * inv_dx2
        for j in range(j0 + 1, j1 - 1):
            out[j, i] += (u[j - 1, i] - 2.0 * u[j, i] + u[j + 1, i]) * inv_dx2
        out[j1 - 1, i] += (u[j1 - 2, i] - u[j1 - 1, i]) * inv_dx2
