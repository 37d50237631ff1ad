"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``VIFORGE_NUMBA`` is not set to ``0``. Both paths perform the
same floating-point operations in the same order, so a given backend is
bitwise deterministic; see ``benchmarks/bench_kernels.py`` for a
side-by-side timing comparison.
"""

from __future__ import annotations

import math
import os

import numpy as np

_WANT_NUMBA = os.environ.get("VIFORGE_NUMBA", "1") != "0"
NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _np_affine_x_steps(x, T, r, step, ell):
    """Damped fixed-point: ell times x <- x - step*(T x + r); returns final residual norm.

    T and r encode the root-finding map of the equality-constrained
    subproblem for an affine operator; r is constant across the ell steps.
    Returns NaN if the iterate left the finite range.
    """
    g = np.empty_like(x)
    for _ in range(ell):
        np.dot(T, x, out=g)
        g += r
        x -= step * g
    np.dot(T, x, out=g)
    g += r
    if not np.all(np.isfinite(g)):
        return float("nan")
    return float(np.sqrt(np.dot(g, g)))


def _np_box_barrier_grad(y, lo, hi, anchor, mu, beta):
    return -mu / (y - lo) + mu / (hi - y) + beta * (y - anchor)


def _np_box_barrier_steps(y, lo, hi, anchor, mu, beta, step, ell):
    """ell gradient steps on the standard-barrier box objective; NaN flags a crossing."""
    for _ in range(ell):
        if np.any(y <= lo) or np.any(y >= hi):
            return float("nan")
        y -= step * _np_box_barrier_grad(y, lo, hi, anchor, mu, beta)
    if np.any(y <= lo) or np.any(y >= hi):
        return float("nan")
    g = _np_box_barrier_grad(y, lo, hi, anchor, mu, beta)
    return float(np.sqrt(np.dot(g, g)))


def _np_ext_term(z, dz_sign, mu, c):
    # d/dy of the everywhere-defined barrier at slack z, where dz/dy = dz_sign
    slope = mu * math.exp(c / mu) if c / mu < 709.0 else float("inf")
    out = np.full(z.shape, slope)
    neg = z < 0.0
    zn = z[neg]
    log_branch = -mu * np.log(-zn) <= c
    vals = np.full(zn.shape, slope)
    vals[log_branch] = -mu / zn[log_branch]
    out[neg] = vals
    return dz_sign * out


def _np_box_barrier_steps_ext(y, lo, hi, anchor, mu, beta, step, ell, c):
    for _ in range(ell):
        g = (_np_ext_term(lo - y, -1.0, mu, c)
             + _np_ext_term(y - hi, 1.0, mu, c)
             + beta * (y - anchor))
        y -= step * g
        if not np.all(np.isfinite(y)):
            return float("nan")
    g = (_np_ext_term(lo - y, -1.0, mu, c)
         + _np_ext_term(y - hi, 1.0, mu, c)
         + beta * (y - anchor))
    if not np.all(np.isfinite(g)):
        return float("nan")
    return float(np.sqrt(np.dot(g, g)))


def _np_nonneg_barrier_steps(y, anchor, mu, beta, step, ell):
    for _ in range(ell):
        if np.any(y <= 0.0):
            return float("nan")
        y -= step * (-mu / y + beta * (y - anchor))
    if np.any(y <= 0.0):
        return float("nan")
    g = -mu / y + beta * (y - anchor)
    return float(np.sqrt(np.dot(g, g)))


def _np_nonneg_barrier_steps_ext(y, anchor, mu, beta, step, ell, c):
    for _ in range(ell):
        g = _np_ext_term(-y, -1.0, mu, c) + beta * (y - anchor)
        y -= step * g
        if not np.all(np.isfinite(y)):
            return float("nan")
    g = _np_ext_term(-y, -1.0, mu, c) + beta * (y - anchor)
    if not np.all(np.isfinite(g)):
        return float("nan")
    return float(np.sqrt(np.dot(g, g)))


def _np_box_barrier_newton(anchor, lo, hi, mu, beta, tol, max_iter):
    """Per-coordinate safeguarded Newton for the box-barrier minimizer.

    The 1D objective -mu log(y-lo) - mu log(hi-y) + beta/2 (y-a)^2 has a
    strictly increasing derivative with a unique root in (lo, hi).
    """
    n = anchor.shape[0]
    out = np.empty(n)
    for i in range(n):
        a = anchor[i]
        bl = lo[i]
        bh = hi[i]
        z = min(max(a, bl + 0.25 * (bh - bl)), bh - 0.25 * (bh - bl))
        for _ in range(max_iter):
            g = -mu / (z - bl) + mu / (bh - z) + beta * (z - a)
            if abs(g) <= tol:
                break
            h = mu / (z - bl) ** 2 + mu / (bh - z) ** 2 + beta
            z_new = z - g / h
            if z_new <= bl or z_new >= bh:
                # bisect toward the root side
                z_new = 0.5 * (z + (bl if g > 0.0 else bh))
            z = z_new
        out[i] = z
    return out


def _np_simplex_project(v):
    """Euclidean projection onto {z >= 0, sum z = 1} by sort and threshold."""
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = 0
    for j in range(n):
        if u[j] > (css[j] - 1.0) / (j + 1.0):
            rho = j
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _np_greedy_project(theta, A, b, eps, max_steps):
    """Repeated projection onto the most-violated halfspace, in place.

    Returns the number of steps used, or -1 if max_steps was hit first.
    Violations are normalized by the row norm; ties pick the lowest index.
    """
    m = A.shape[0]
    row_norm = np.empty(m)
    row_normsq = np.empty(m)
    for j in range(m):
        s = float(np.dot(A[j], A[j]))
        row_normsq[j] = s
        row_norm[j] = math.sqrt(s)
    steps = 0
    while True:
        worst = -1.0
        idx = -1
        viol = 0.0
        for j in range(m):
            v = float(np.dot(A[j], theta)) - b[j]
            if v > 0.0:
                nv = v / row_norm[j]
                if nv > worst:
                    worst = nv
                    idx = j
                    viol = v
        if idx < 0 or worst < eps:
            return steps
        if steps >= max_steps:
            return -1
        theta -= (viol / row_normsq[idx]) * A[idx]
        steps += 1


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _WANT_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via VIFORGE_NUMBA=0
        njit = None

    if njit is not None:
        @njit(cache=True)
        def _nb_affine_x_steps(x, T, r, step, ell):
            n = x.shape[0]
            g = np.empty(n)
            for _ in range(ell):
                np.dot(T, x, g)
                for i in range(n):
                    x[i] -= step * (g[i] + r[i])
            np.dot(T, x, g)
            s = 0.0
            for i in range(n):
                gi = g[i] + r[i]
                if not np.isfinite(gi):
                    return np.nan
                s += gi * gi
            return math.sqrt(s)

        @njit(cache=True)
        def _nb_box_barrier_steps(y, lo, hi, anchor, mu, beta, step, ell):
            n = y.shape[0]
            for _ in range(ell):
                for i in range(n):
                    if y[i] <= lo[i] or y[i] >= hi[i]:
                        return np.nan
                for i in range(n):
                    g = -mu / (y[i] - lo[i]) + mu / (hi[i] - y[i]) + beta * (y[i] - anchor[i])
                    y[i] -= step * g
            s = 0.0
            for i in range(n):
                if y[i] <= lo[i] or y[i] >= hi[i]:
                    return np.nan
                g = -mu / (y[i] - lo[i]) + mu / (hi[i] - y[i]) + beta * (y[i] - anchor[i])
                s += g * g
            return math.sqrt(s)

        @njit(cache=True)
        def _nb_ext_term_scalar(z, mu, c, slope):
            if z < 0.0 and -mu * math.log(-z) <= c:
                return -mu / z
            return slope

        @njit(cache=True)
        def _nb_box_barrier_steps_ext(y, lo, hi, anchor, mu, beta, step, ell, c):
            n = y.shape[0]
            slope = mu * math.exp(c / mu) if c / mu < 709.0 else np.inf
            for _ in range(ell):
                for i in range(n):
                    g = (-_nb_ext_term_scalar(lo[i] - y[i], mu, c, slope)
                         + _nb_ext_term_scalar(y[i] - hi[i], mu, c, slope)
                         + beta * (y[i] - anchor[i]))
                    y[i] -= step * g
                    if not np.isfinite(y[i]):
                        return np.nan
            s = 0.0
            for i in range(n):
                g = (-_nb_ext_term_scalar(lo[i] - y[i], mu, c, slope)
                     + _nb_ext_term_scalar(y[i] - hi[i], mu, c, slope)
                     + beta * (y[i] - anchor[i]))
                if not np.isfinite(g):
                    return np.nan
                s += g * g
            return math.sqrt(s)

        @njit(cache=True)
        def _nb_nonneg_barrier_steps(y, anchor, mu, beta, step, ell):
            n = y.shape[0]
            for _ in range(ell):
                for i in range(n):
                    if y[i] <= 0.0:
                        return np.nan
                for i in range(n):
                    y[i] -= step * (-mu / y[i] + beta * (y[i] - anchor[i]))
            s = 0.0
            for i in range(n):
                if y[i] <= 0.0:
                    return np.nan
                g = -mu / y[i] + beta * (y[i] - anchor[i])
                s += g * g
            return math.sqrt(s)

        @njit(cache=True)
        def _nb_nonneg_barrier_steps_ext(y, anchor, mu, beta, step, ell, c):
            n = y.shape[0]
            slope = mu * math.exp(c / mu) if c / mu < 709.0 else np.inf
            for _ in range(ell):
                for i in range(n):
                    g = -_nb_ext_term_scalar(-y[i], mu, c, slope) + beta * (y[i] - anchor[i])
                    y[i] -= step * g
                    if not np.isfinite(y[i]):
                        return np.nan
            s = 0.0
            for i in range(n):
                g = -_nb_ext_term_scalar(-y[i], mu, c, slope) + beta * (y[i] - anchor[i])
                if not np.isfinite(g):
                    return np.nan
                s += g * g
            return math.sqrt(s)

        @njit(cache=True)
        def _nb_box_barrier_newton(anchor, lo, hi, mu, beta, tol, max_iter):
            n = anchor.shape[0]
            out = np.empty(n)
            for i in range(n):
                a = anchor[i]
                bl = lo[i]
                bh = hi[i]
                z = min(max(a, bl + 0.25 * (bh - bl)), bh - 0.25 * (bh - bl))
                for _ in range(max_iter):
                    g = -mu / (z - bl) + mu / (bh - z) + beta * (z - a)
                    if abs(g) <= tol:
                        break
                    h = mu / (z - bl) ** 2 + mu / (bh - z) ** 2 + beta
                    z_new = z - g / h
                    if z_new <= bl or z_new >= bh:
                        z_new = 0.5 * (z + (bl if g > 0.0 else bh))
                    z = z_new
                out[i] = z
            return out

        @njit(cache=True)
        def _nb_simplex_project(v):
            n = v.shape[0]
            u = np.sort(v)[::-1]
            css = np.cumsum(u)
            rho = 0
            for j in range(n):
                if u[j] > (css[j] - 1.0) / (j + 1.0):
                    rho = j
            theta = (css[rho] - 1.0) / (rho + 1.0)
            out = np.empty(n)
            for i in range(n):
                zi = v[i] - theta
                out[i] = zi if zi > 0.0 else 0.0
            return out

        @njit(cache=True)
        def _nb_greedy_project(theta, A, b, eps, max_steps):
            m = A.shape[0]
            row_norm = np.empty(m)
            row_normsq = np.empty(m)
            for j in range(m):
                s = np.dot(A[j], A[j])
                row_normsq[j] = s
                row_norm[j] = math.sqrt(s)
            steps = 0
            while True:
                worst = -1.0
                idx = -1
                viol = 0.0
                for j in range(m):
                    v = np.dot(A[j], theta) - b[j]
                    if v > 0.0:
                        nv = v / row_norm[j]
                        if nv > worst:
                            worst = nv
                            idx = j
                            viol = v
                if idx < 0 or worst < eps:
                    return steps
                if steps >= max_steps:
                    return -1
                coef = viol / row_normsq[idx]
                for i in range(theta.shape[0]):
                    theta[i] -= coef * A[idx, i]
                steps += 1

        NUMBA_ENABLED = True


if NUMBA_ENABLED:
    affine_x_steps = _nb_affine_x_steps
    box_barrier_steps = _nb_box_barrier_steps
    box_barrier_steps_ext = _nb_box_barrier_steps_ext
    nonneg_barrier_steps = _nb_nonneg_barrier_steps
    nonneg_barrier_steps_ext = _nb_nonneg_barrier_steps_ext
    box_barrier_newton = _nb_box_barrier_newton
    simplex_project = _nb_simplex_project
    greedy_project = _nb_greedy_project
else:
    affine_x_steps = _np_affine_x_steps
    box_barrier_steps = _np_box_barrier_steps
    box_barrier_steps_ext = _np_box_barrier_steps_ext
    nonneg_barrier_steps = _np_nonneg_barrier_steps
    nonneg_barrier_steps_ext = _np_nonneg_barrier_steps_ext
    box_barrier_newton = _np_box_barrier_newton
    simplex_project = _np_simplex_project
    greedy_project = _np_greedy_project


def warmup():
    """Trigger JIT compilation of every kernel on tiny inputs."""
    x = np.array([0.5, 0.5])
    T = np.eye(2)
    r = np.zeros(2)
    affine_x_steps(x.copy(), T, r, 0.1, 1)
    lo = np.full(2, -1.0)
    hi = np.full(2, 1.0)
    box_barrier_steps(x.copy() * 0.0, lo, hi, r, 0.5, 0.5, 0.1, 1)
    box_barrier_steps_ext(x.copy(), lo, hi, r, 0.5, 0.5, 0.1, 1, 1.0)
    nonneg_barrier_steps(x.copy(), r, 0.5, 0.5, 0.1, 1)
    nonneg_barrier_steps_ext(x.copy(), r, 0.5, 0.5, 0.1, 1, 1.0)
    box_barrier_newton(r, lo, hi, 0.5, 0.5, 1e-12, 50)
    simplex_project(x)
    greedy_project(x.copy(), np.array([[1.0, 0.0]]), np.array([0.0]), 1e-8, 10)
