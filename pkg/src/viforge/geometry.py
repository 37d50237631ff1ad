"""Affine equality-set geometry and projections onto the inequality sets.

The affine part of a constraint set {x : Cx = d} is handled through a
cached orthogonal projector: Pc = I - C^T (C C^T)^-1 C and the offset
dc = C^T (C C^T)^-1 d, so that Pc x + dc is the Euclidean projection of
x onto the set. Inequality sets come in four flavors: boxes, products
of probability simplices, halfspace systems, and generic smooth
constraints given as callables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, IterationBudgetExceeded, ParamOutOfRange, RankDeficient

# below this fraction of the top singular value, C is treated as rank deficient
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class EqualityGeometry:
    """Cached projector onto {x : Cx = d}; immutable and thread-safe."""

    C: np.ndarray
    d: np.ndarray
    Pc: np.ndarray
    dc: np.ndarray

    @property
    def n(self) -> int:
        return self.Pc.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]


def build_equality_geometry(C: np.ndarray | None, d: np.ndarray | None, n: int | None = None) -> EqualityGeometry:
    """Build the cached (Pc, dc) pair for the affine set Cx = d.

    With no equality constraints (C is None or has zero rows) the
    projector is the identity; pass n to size it. Raises RankDeficient
    when the smallest singular value of C falls below 1e-10 times the
    largest, since (C C^T)^-1 is meaningless below numerical rank.
    """
    if C is None or C.shape[0] == 0:
        if n is None:
            raise DimensionMismatch("dimension n required when no equality constraints are given")
        return EqualityGeometry(
            C=np.zeros((0, n)), d=np.zeros(0), Pc=np.eye(n), dc=np.zeros(n)
        )
    C = np.asarray(C, dtype=float)
    d = np.asarray(d, dtype=float)
    p, nc = C.shape
    if d.shape != (p,):
        raise DimensionMismatch(f"d has shape {d.shape}, expected ({p},)")
    if p > nc:
        raise RankDeficient(f"more equality rows ({p}) than variables ({nc})")
    sv = np.linalg.svd(C, compute_uv=False)
    if sv[-1] <= _RANK_RTOL * sv[0]:
        raise RankDeficient(
            f"smallest singular value {sv[-1]:.3e} below tolerance {_RANK_RTOL * sv[0]:.3e}"
        )
    # one dense factorization at build time; every solver iteration reuses Pc, dc
    W = np.linalg.solve(C @ C.T, np.column_stack([C, d]))
    Pc = np.eye(nc) - C.T @ W[:, :nc]
    dc = C.T @ W[:, nc]
    return EqualityGeometry(C=C, d=d, Pc=Pc, dc=dc)


def project_affine(geom: EqualityGeometry, x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x : Cx = d}: Pc x + dc."""
    if x.shape[0] != geom.n:
        raise DimensionMismatch(f"x has dim {x.shape[0]}, geometry has {geom.n}")
    return geom.Pc @ x + geom.dc


# ---------------------------------------------------------------------------
# inequality sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """{x : lo <= x <= hi} componentwise, lo < hi."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds must have equal shapes")
        if not np.all(lo < hi):
            raise ParamOutOfRange("box", "requires lo < hi componentwise")


@dataclass(frozen=True)
class Simplex:
    """Product of probability simplices over disjoint index ranges.

    Each block (start, end) constrains x[start:end] to {z >= 0, sum z = 1}.
    As a barrier constraint family this contributes the nonnegativity
    inequalities -x_i <= 0 (the sum constraints belong to the equality
    rows of the enclosing problem); as a projection target it is the
    full blockwise simplex.
    """

    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        blocks = tuple((int(a), int(b)) for a, b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        covered = []
        for a, b in blocks:
            if b <= a:
                raise ParamOutOfRange("simplex blocks", f"empty range ({a}, {b})")
            covered.append((a, b))
        covered.sort()
        for (a1, b1), (a2, b2) in zip(covered, covered[1:]):
            if a2 < b1:
                raise ParamOutOfRange("simplex blocks", "index ranges overlap")


@dataclass(frozen=True)
class Halfspaces:
    """{x : Ax <= b}; every row of A must be nonzero."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise DimensionMismatch("halfspace shapes are inconsistent")
        if np.any(np.linalg.norm(A, axis=1) == 0.0):
            raise ParamOutOfRange("halfspaces", "zero rows are not allowed")


@dataclass(frozen=True)
class Smooth:
    """Inequalities phi_i(x) <= 0 with callables returning (value, gradient)."""

    constraints: tuple[Callable[[np.ndarray], tuple[float, np.ndarray]], ...] = field(default=())


InequalitySet = Union[Box, Simplex, Halfspaces, Smooth]


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def project_box(lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Componentwise clamp onto [lo, hi]."""
    return np.minimum(np.maximum(x, lo), hi)


def project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean nearest point on the probability simplex (exact, O(k log k))."""
    x = np.ascontiguousarray(x, dtype=float)
    return _kernels.simplex_project(x)


def project_simplex_blocks(x: np.ndarray, blocks) -> np.ndarray:
    """Project each declared block onto its own simplex; other coordinates pass through."""
    out = np.array(x, dtype=float, copy=True)
    for a, b in blocks:
        out[a:b] = _kernels.simplex_project(np.ascontiguousarray(out[a:b]))
    return out


def project_greedy(A: np.ndarray, b: np.ndarray, x: np.ndarray, eps: float,
                   max_steps: int | None = None) -> np.ndarray:
    """Project onto the worst-violated halfspace until all normalized violations < eps.

    Approximate projection onto {x : Ax <= b}: cheap per step and exact
    when a single constraint is active, otherwise only feasibility up to
    eps is guaranteed. Raises IterationBudgetExceeded when the step cap
    (default 10*m*n) is hit, which signals eps too tight or an
    inconsistent system.
    """
    if eps <= 0:
        raise ParamOutOfRange("eps", "must be positive")
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    theta = np.array(x, dtype=float, copy=True)
    if max_steps is None:
        max_steps = 10 * A.shape[0] * A.shape[1]
    used = _kernels.greedy_project(theta, A, b, eps, max_steps)
    if used < 0:
        raise IterationBudgetExceeded(
            f"greedy projection did not reach eps={eps} within {max_steps} steps"
        )
    return theta


def project_inequalities(ineq: InequalitySet, x: np.ndarray, eps: float = 1e-10) -> np.ndarray:
    """Direct projection onto the inequality set (boxes, simplex blocks, halfspaces)."""
    if isinstance(ineq, Box):
        return project_box(ineq.lo, ineq.hi, x)
    if isinstance(ineq, Simplex):
        return project_simplex_blocks(x, ineq.blocks)
    if isinstance(ineq, Halfspaces):
        return project_greedy(ineq.A, ineq.b, x, eps)
    raise ParamOutOfRange("inequality", f"{type(ineq).__name__} has no direct projection")


def inequality_violation(ineq: InequalitySet, x: np.ndarray) -> float:
    """Largest constraint violation at x (0 when feasible)."""
    if isinstance(ineq, Box):
        return float(max(np.max(ineq.lo - x), np.max(x - ineq.hi), 0.0))
    if isinstance(ineq, Simplex):
        worst = 0.0
        for a, b in ineq.blocks:
            blk = x[a:b]
            worst = max(worst, float(-np.min(blk)), abs(float(np.sum(blk)) - 1.0))
        return worst
    if isinstance(ineq, Halfspaces):
        return float(max(np.max(ineq.A @ x - ineq.b), 0.0))
    if isinstance(ineq, Smooth):
        worst = 0.0
        for phi in ineq.constraints:
            val, _ = phi(x)
            worst = max(worst, float(val))
        return worst
    raise ParamOutOfRange("inequality", f"unknown set {type(ineq).__name__}")
