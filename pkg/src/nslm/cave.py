"""Constrained absolute value equations.

Find ``x`` with ``sum(x) <= d, x >= 0`` and ``A x - |x| = b``. The residual is
``f(x) = A x - |x| - b`` and ``A - diag(sgn(x))`` is an element of its Clarke
Jacobian.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .feasible import SimplexCapSet
from .problem import JacobianOperator, ProblemInstance

FORMAT_TAG = "nslm-cave"
FORMAT_VERSION = 1
DENSE_SVD_MAX_N = 1000


class GenerationError(RuntimeError):
    pass


class InstanceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CaveInstance:
    A: sp.csr_matrix
    b: np.ndarray
    d: float
    x_star: np.ndarray
    seed: int
    density: float = float("nan")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def feasible_set(self) -> SimplexCapSet:
        return SimplexCapSet(self.n, self.d)

    def to_problem(self) -> ProblemInstance:
        return ProblemInstance(
            n=self.n,
            residual=lambda x: cave_residual(self, x),
            jacobian=lambda x: cave_jacobian_element(self, x),
            feasible_set=self.feasible_set,
            known_solution=self.x_star,
        )


def cave_residual(inst: CaveInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({inst.n},)")
    return inst.A @ x - np.abs(x) - inst.b


def cave_jacobian_element(inst: CaveInstance, x) -> JacobianOperator:
    """``V = A - diag(sgn(x))`` applied matrix-free; ``sgn(0) = 0``."""
    s = np.sign(np.asarray(x, dtype=float))
    A, AT = inst.A, inst.A.T.tocsr()
    return JacobianOperator(A.shape, lambda v: A @ v - s * v, lambda w: AT @ w - s * w)


def smallest_singular_value(A) -> float:
    """Dense SVD up to ``DENSE_SVD_MAX_N``, else inverse power iteration on A^T A."""
    n = A.shape[0]
    if n <= DENSE_SVD_MAX_N:
        return float(scipy.linalg.svdvals(A.toarray() if sp.issparse(A) else A).min())
    lu = spla.splu(sp.csc_matrix(A))
    v = np.random.default_rng(0).standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(200):
        # w = (A^T A)^{-1} v
        w = lu.solve(lu.solve(v, trans="T"))
        lam_new = float(np.linalg.norm(w))
        v = w / lam_new
        if abs(lam_new - lam) <= 1e-12 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return float(1.0 / np.sqrt(lam))


def _rotate(M: np.ndarray, i: int, j: int, c: float, s: float, axis: int) -> None:
    if axis == 0:
        ri, rj = M[i].copy(), M[j]
        M[i] = c * ri + s * rj
        M[j] = -s * ri + c * rj
    else:
        ci, cj = M[:, i].copy(), M[:, j]
        M[:, i] = c * ci + s * cj
        M[:, j] = -s * ci + c * cj


def sparse_with_singular_values(singular_values, density: float,
                                rng: np.random.Generator) -> sp.csr_matrix:
    """Sparse square matrix with exactly the given singular values.

    Random plane rotations are applied alternately on the left and right of
    ``diag(singular_values)`` until the fill reaches ``density``; rotations are
    orthogonal, so the singular values are preserved.
    """
    sv = np.asarray(singular_values, dtype=float)
    n = sv.size
    M = np.diag(rng.permutation(sv))
    target = max(int(round(density * n * n)), n)
    nnz = n
    axis = 0
    max_rotations = 50 * n * n
    for _ in range(max_rotations):
        if nnz >= target:
            break
        i, j = rng.choice(n, size=2, replace=False)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        lines = (M[[i, j]] if axis == 0 else M[:, [i, j]])
        before = np.count_nonzero(lines)
        _rotate(M, i, j, np.cos(angle), np.sin(angle), axis)
        lines = (M[[i, j]] if axis == 0 else M[:, [i, j]])
        nnz += np.count_nonzero(lines) - before
        axis = 1 - axis
    return sp.csr_matrix(M)


def generate_instance(n: int, density: float = 0.05, seed: int = 0, u=None,
                      max_attempts: int = 10) -> CaveInstance:
    """Random CAVE with ``||A^{-1}|| < 1/3`` and a planted positive solution.

    Singular values are drawn from U(0, 1), then ``A`` is rescaled by
    ``3 / (s_min * u)`` with ``u ~ U(1e-3, 1)``, so its smallest singular value
    becomes ``3 / u > 3``. ``u`` may be fixed for testing.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        sv = rng.uniform(0.0, 1.0, size=n)
        A = sparse_with_singular_values(sv, density, rng)
        s_min = smallest_singular_value(A)
        if s_min >= 1e-10:
            break
    else:
        raise GenerationError(f"no nonsingular draw in {max_attempts} attempts")
    if u is None:
        u = rng.uniform(1e-3, 1.0)
    A = sp.csr_matrix(A * (3.0 / (s_min * u)))
    x_star = rng.uniform(0.1, 100.0, size=n)
    b = A @ x_star - np.abs(x_star)
    return CaveInstance(A=A, b=b, d=float(x_star.sum()), x_star=x_star, seed=int(seed),
                        density=float(density))


def default_start(inst: CaveInstance) -> np.ndarray:
    return np.full(inst.n, inst.d / (2 * inst.n))


def save_instance(inst: CaveInstance, path) -> None:
    """Write a self-describing JSON container (floats round-trip exactly)."""
    coo = inst.A.tocoo()
    payload = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "n": inst.n,
        "d": inst.d,
        "seed": inst.seed,
        "density": inst.density,
        "x_star": inst.x_star.tolist(),
        "b": inst.b.tolist(),
        "A": {"row": coo.row.tolist(), "col": coo.col.tolist(), "val": coo.data.tolist()},
    }
    Path(path).write_text(json.dumps(payload, allow_nan=True) + "\n")


def load_instance(path) -> CaveInstance:
    try:
        payload = json.loads(Path(path).read_text())
        if payload.get("format") != FORMAT_TAG:
            raise InstanceFormatError(f"{path}: not a {FORMAT_TAG} file")
        if payload.get("version") != FORMAT_VERSION:
            raise InstanceFormatError(f"{path}: unsupported version {payload.get('version')}")
        n = int(payload["n"])
        trip = payload["A"]
        A = sp.coo_matrix((np.array(trip["val"], dtype=float),
                           (np.array(trip["row"], dtype=np.int64), np.array(trip["col"], dtype=np.int64))),
                          shape=(n, n)).tocsr()
        b = np.array(payload["b"], dtype=float)
        x_star = payload.get("x_star")
        x_star = None if x_star is None else np.array(x_star, dtype=float)
    except InstanceFormatError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: malformed instance ({exc})") from exc
    if b.shape != (n,) or (x_star is not None and x_star.shape != (n,)):
        raise InstanceFormatError(f"{path}: vector lengths do not match n = {n}")
    return CaveInstance(A=A, b=b, d=float(payload["d"]), x_star=x_star, seed=int(payload["seed"]),
                        density=float(payload.get("density", "nan")))
