"""Feasible sets: membership, linear minimization and exact projection.

Only the capped nonnegative orthant

    C = {x : sum(x) <= d, x >= 0}

is shipped. It is a polytope whose vertices are the origin and the
scaled unit vectors ``d * e_i``, so every linear minimization is closed form.
"""

from __future__ import annotations

from typing import Callable, Optional, Protocol

import numpy as np


class InvalidInputError(ValueError):
    """Raised on non-finite or malformed vectors."""


class FeasibleSetHandle(Protocol):
    """What the solver needs from a constraint set."""

    n: int

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool: ...

    def lmo(self, c: np.ndarray) -> np.ndarray: ...

    exact_projector: Optional[Callable[[np.ndarray], np.ndarray]]

    def vertices(self) -> np.ndarray: ...


def _check_vector(x, n: int, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InvalidInputError(f"{name} must have shape ({n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return x


class SimplexCapSet:
    """The set ``{x in R^n : sum(x) <= d, x >= 0}`` with ``d > 0``."""

    def __init__(self, n: int, d: float):
        if int(n) != n or n < 1:
            raise ValueError(f"n must be a positive integer, got {n}")
        if not np.isfinite(d) or d <= 0:
            raise ValueError(f"cap d must be positive and finite, got {d}")
        self.n = int(n)
        self.d = float(d)

    def __repr__(self) -> str:
        return f"SimplexCapSet(n={self.n}, d={self.d!r})"

    def contains(self, x, tol: float = 0.0) -> bool:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,) or not np.all(np.isfinite(x)):
            return False
        return bool(x.min() >= -tol and x.sum() <= self.d + tol)

    def lmo(self, c) -> np.ndarray:
        """Vertex minimizing ``<c, y>`` over the set; ties go to the lowest index."""
        c = _check_vector(c, self.n, "c")
        out = np.zeros(self.n)
        i = int(np.argmin(c))
        if c[i] < 0:
            out[i] = self.d
        return out

    def project(self, x) -> np.ndarray:
        """Euclidean projection, by sort-and-threshold on the active cap."""
        x = _check_vector(x, self.n, "x")
        p = np.maximum(x, 0.0)
        if p.sum() <= self.d:
            return p
        # cap is active: project onto {p >= 0, sum(p) = d}
        s = np.sort(x)[::-1]
        css = np.cumsum(s) - self.d
        k = np.arange(1, self.n + 1)
        rho = np.nonzero(s - css / k > 0)[0][-1]
        lam = css[rho] / (rho + 1)
        p = np.maximum(x - lam, 0.0)
        total = p.sum()
        if total > self.d:
            # rounding guard so the result passes a zero-tolerance membership test
            p *= self.d / total
        return p

    @property
    def exact_projector(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.project

    def vertices(self) -> np.ndarray:
        """All ``n + 1`` vertices as rows: the origin, then ``d * e_i``."""
        return np.vstack([np.zeros(self.n), self.d * np.eye(self.n)])

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        """Random feasible points (rows), mixing interior and face points."""
        w = rng.dirichlet(np.ones(self.n + 1), size=size)
        return w @ self.vertices()


def lmo_simplex_cap(cset: SimplexCapSet, c) -> np.ndarray:
    return cset.lmo(c)


def exact_project_simplex_cap(cset: SimplexCapSet, x) -> np.ndarray:
    return cset.project(x)


def contains(cset: FeasibleSetHandle, x, tol: float = 0.0) -> bool:
    return cset.contains(x, tol)
