"""Dense operators on tensor products of finite-dimensional subsystems.

Every operator carries the ordered list of its subsystem dimensions, so that
partial transposition and partial trace can be addressed by subsystem index
(0-based, in tensor order).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NegativeEigenvalueError,
    NotHermitianError,
)

HERMITIAN_RTOL = 1e-10
EIG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MultipartiteOperator:
    """Square complex matrix tagged with subsystem dimensions."""

    dims: tuple[int, ...]
    mat: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid subsystem dimensions {self.dims}")
        mat = np.asarray(self.mat)
        side = int(np.prod(dims))
        if mat.shape != (side, side):
            raise DimensionMismatchError(
                f"matrix shape {mat.shape} does not match dims {dims} (side {side})"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @property
    def side(self) -> int:
        return self.mat.shape[0]

    @property
    def nsub(self) -> int:
        return len(self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def dag(self) -> MultipartiteOperator:
        return MultipartiteOperator(self.dims, self.mat.conj().T)

    def with_matrix(self, mat: np.ndarray) -> MultipartiteOperator:
        return MultipartiteOperator(self.dims, mat)

    def __add__(self, other: MultipartiteOperator) -> MultipartiteOperator:
        _same_dims(self, other)
        return MultipartiteOperator(self.dims, self.mat + other.mat)

    def __sub__(self, other: MultipartiteOperator) -> MultipartiteOperator:
        _same_dims(self, other)
        return MultipartiteOperator(self.dims, self.mat - other.mat)

    def __mul__(self, scalar) -> MultipartiteOperator:
        return MultipartiteOperator(self.dims, self.mat * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> MultipartiteOperator:
        return MultipartiteOperator(self.dims, self.mat / scalar)

    def __matmul__(self, other: MultipartiteOperator) -> MultipartiteOperator:
        _same_dims(self, other)
        return MultipartiteOperator(self.dims, self.mat @ other.mat)

    def to_json_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "re": np.real(self.mat).tolist(),
            "im": np.imag(self.mat).tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> MultipartiteOperator:
        mat = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(tuple(data["dims"]), mat)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> MultipartiteOperator:
        return cls(tuple(dims), np.eye(int(np.prod(dims)), dtype=complex))


def _same_dims(a: MultipartiteOperator, b: MultipartiteOperator) -> None:
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims {a.dims} and {b.dims} differ")


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, MultipartiteOperator):
        return op.mat
    return np.asarray(op)


def _check_indices(op: MultipartiteOperator, subsystems: Iterable[int]) -> list[int]:
    idx = sorted(set(int(s) for s in subsystems))
    for s in idx:
        if not 0 <= s < op.nsub:
            raise IndexError(f"subsystem {s} out of range for {op.nsub} subsystems")
    return idx


def tensor(ops: Sequence[MultipartiteOperator]) -> MultipartiteOperator:
    """Kronecker product in list order; dims are concatenated."""
    if len(ops) == 0:
        raise ValueError("tensor() needs at least one operator")
    dims = tuple(d for op in ops for d in op.dims)
    mat = reduce(np.kron, (op.mat for op in ops))
    return MultipartiteOperator(dims, mat)


def partial_transpose(op: MultipartiteOperator, subsystems: Iterable[int]) -> MultipartiteOperator:
    idx = _check_indices(op, subsystems)
    if not idx:
        return op
    n = op.nsub
    t = op.mat.reshape(op.dims + op.dims)
    axes = list(range(2 * n))
    for s in idx:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    return op.with_matrix(np.ascontiguousarray(t.transpose(axes)).reshape(op.side, op.side))


def partial_trace(op: MultipartiteOperator, subsystems: Iterable[int]) -> MultipartiteOperator:
    """Trace out ``subsystems``. Tracing everything leaves a 1x1 operator."""
    idx = _check_indices(op, subsystems)
    dims = list(op.dims)
    t = op.mat.reshape(tuple(dims) + tuple(dims))
    for s in reversed(idx):
        n = len(dims)
        t = np.trace(t, axis1=s, axis2=n + s)
        del dims[s]
    if not dims:
        return MultipartiteOperator((1,), np.asarray(t).reshape(1, 1))
    side = int(np.prod(dims))
    return MultipartiteOperator(tuple(dims), t.reshape(side, side))


def permute_subsystems(op: MultipartiteOperator, perm: Sequence[int]) -> MultipartiteOperator:
    """Reorder tensor factors: new subsystem ``j`` is old subsystem ``perm[j]``."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(op.nsub)):
        raise ValueError(f"{perm} is not a permutation of {op.nsub} subsystems")
    n = op.nsub
    t = op.mat.reshape(op.dims + op.dims).transpose(perm + [n + p for p in perm])
    dims = tuple(op.dims[p] for p in perm)
    return MultipartiteOperator(dims, np.ascontiguousarray(t).reshape(op.side, op.side))


def hermitian_residual(op) -> float:
    m = _as_matrix(op)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(op, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return the symmetrized matrix, or raise if ``op`` is not Hermitian."""
    m = _as_matrix(op)
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    res = hermitian_residual(m)
    if res > rtol * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(f"max|M - M^dag| = {res:.3e} exceeds {rtol:g} * max|M|")
    return (m + m.conj().T) / 2


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order."""

    eigenvalues: np.ndarray

    @property
    def min(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def max(self) -> float:
        return float(self.eigenvalues[0])

    def __len__(self):
        return len(self.eigenvalues)


def hermitian_spectrum(op, rtol: float = HERMITIAN_RTOL) -> Spectrum:
    m = check_hermitian(op, rtol)
    if np.iscomplexobj(m) and not np.any(m.imag):
        m = m.real
    ev = np.linalg.eigvalsh(m)
    return Spectrum(ev[::-1].copy())


def svd_factors(op) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(W, s, V)`` with ``op = W @ diag(s) @ V^dag`` and ``s`` descending."""
    m = _as_matrix(op)
    w, s, vh = np.linalg.svd(m)
    return w, s, vh.conj().T


def operator_abs(op):
    """Operator absolute value sqrt(A^dag A), computed from the SVD."""
    _, s, v = svd_factors(op)
    m = (v * s) @ v.conj().T
    if isinstance(op, MultipartiteOperator):
        return op.with_matrix(m)
    return m


def trace_norm(op) -> float:
    return float(np.sum(np.linalg.svd(_as_matrix(op), compute_uv=False)))


def entropy_of_probabilities(p, tol: float = EIG_TOL) -> float:
    """Shannon entropy in bits of a nonnegative weight vector (zeros dropped)."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -tol):
        raise NegativeEigenvalueError(f"negative weight {p.min():.3e}")
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(op, tol: float = EIG_TOL, trace_tol: float = 1e-8) -> float:
    """Entropy in bits of a unit-trace positive semidefinite operator."""
    ev = hermitian_spectrum(op).eigenvalues
    if abs(ev.sum() - 1.0) > trace_tol:
        raise ValueError(f"trace {ev.sum():.12g} is not 1 within {trace_tol:g}")
    if ev[-1] < -tol:
        raise NegativeEigenvalueError(f"eigenvalue {ev[-1]:.3e} below -{tol:g}")
    return entropy_of_probabilities(np.clip(ev, 0.0, None), tol)
