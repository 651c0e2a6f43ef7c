"""Twisting, privacy squeezing and the closed-form two-qubit X states."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import DimensionMismatchError
from .operator_core import MultipartiteOperator, partial_trace, permute_subsystems, svd_factors
from .state_family import StateFamilyParams, build_X

KEY_LABELS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class TwoQubitXState:
    """Unnormalized two-qubit X state.

    ``a``, ``b``, ``b``, ``d`` are the 00, 01, 10, 11 diagonal weights and
    ``c`` the 01/10 coherence; the density matrix is the weight matrix over
    ``norm``. Entries may be floats or Fractions.
    """

    a: float
    b: float
    c: float
    d: float
    norm: float

    def __post_init__(self):
        total = self.a + 2 * self.b + self.d
        if np.any(np.abs(total - self.norm) > 1e-12 * np.maximum(1.0, np.abs(self.norm))):
            raise ValueError(f"a + 2b + d = {total} differs from norm {self.norm}")

    @classmethod
    def from_weights(cls, a, b, c, d) -> TwoQubitXState:
        return cls(a, b, c, d, a + 2 * b + d)

    def matrix(self) -> np.ndarray:
        a, b, c, d, n = (float(v) for v in (self.a, self.b, self.c, self.d, self.norm))
        m = np.array(
            [[a, 0, 0, 0], [0, b, c, 0], [0, c, b, 0], [0, 0, 0, d]], dtype=float
        )
        return m / n

    def normalized(self) -> TwoQubitXState:
        n = self.norm
        return TwoQubitXState(self.a / n, self.b / n, self.c / n, self.d / n, n / n)

    def is_psd(self) -> bool:
        return abs(self.c) <= self.b and self.a >= 0 and self.d >= 0

    @classmethod
    def from_matrix(cls, rho4: np.ndarray, tol: float = 1e-10) -> TwoQubitXState:
        rho4 = np.asarray(rho4)
        mask = np.array(
            [[1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 1]], dtype=bool
        )
        if np.max(np.abs(rho4[~mask]), initial=0.0) > tol:
            raise ValueError("matrix is not of X form")
        if abs(rho4[1, 1] - rho4[2, 2]) > tol:
            raise ValueError("01 and 10 weights differ")
        c = rho4[1, 2]
        if abs(np.imag(c)) > tol:
            raise ValueError("coherence is not real")
        tr = float(np.real(np.trace(rho4)))
        return cls(
            float(np.real(rho4[0, 0])),
            float(np.real(rho4[1, 1] + rho4[2, 2])) / 2,
            float(np.real(c)),
            float(np.real(rho4[3, 3])),
            tr,
        )


def xstate_closed_form(N: int, D, exact: bool = False) -> TwoQubitXState:
    """Privacy-squeezed pair state of the N-party family, in units of D^(3N/2-1)."""
    if N < 3 or np.any(np.asarray(D) < 2):
        raise ValueError("need N >= 3 and D >= 2")
    half = Fraction(1, 2) if exact else 0.5
    alpha = (N - 2) * (N - 1) * D + (3 * N**2 - 11 * N + 12) * half * N
    beta = (N - 1) * D + 2 * (N - 2) * N
    norm = N * ((N - 1) * D + (3 * N**2 - 3 * N - 2) * half)
    return TwoQubitXState(alpha, beta, D, N, norm)


# -- twisting -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Twisting:
    """Key-controlled unitary sum_ij |ij><ij| (x) U_ij on the shield."""

    blocks: dict

    def __post_init__(self):
        if set(self.blocks) != set(KEY_LABELS):
            raise ValueError(f"twisting needs blocks {KEY_LABELS}")
        sides = {np.asarray(u).shape for u in self.blocks.values()}
        if len(sides) != 1:
            raise DimensionMismatchError(f"block shapes differ: {sides}")

    @property
    def shield_side(self) -> int:
        return np.asarray(self.blocks["00"]).shape[0]

    def is_unitary(self, tol: float = 1e-10) -> bool:
        for u in self.blocks.values():
            u = np.asarray(u)
            if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > tol:
                return False
        return True

    def matrix(self) -> np.ndarray:
        s = self.shield_side
        dtype = np.result_type(*self.blocks.values())
        out = np.zeros((4 * s, 4 * s), dtype=dtype)
        for n, lab in enumerate(KEY_LABELS):
            out[n * s:(n + 1) * s, n * s:(n + 1) * s] = self.blocks[lab]
        return out


def build_twisting(X) -> Twisting:
    """SVD-adapted twisting: with X = W S V^dag, U_01 = W^dag and U_10 = V^dag."""
    X = X.mat if isinstance(X, MultipartiteOperator) else np.asarray(X)
    w, _, v = svd_factors(X)
    eye = np.eye(X.shape[0])
    return Twisting({"00": eye, "01": w.conj().T, "10": v.conj().T, "11": eye})


def family_twisting(params: StateFamilyParams) -> Twisting:
    return build_twisting(build_X(params))


# -- squeezing ----------------------------------------------------------------


def reduce_to_pair(rho: MultipartiteOperator, params: StateFamilyParams, k: int, l: int):
    """Trace out every key qubit except A_k and A_l; A_k comes first in the result."""
    if k == l:
        raise ValueError("k and l must differ")
    for p in (k, l):
        params._check_party(p)
    if rho.dims != params.dims:
        raise DimensionMismatchError(f"state dims {rho.dims} do not match {params.dims}")
    drop = [params.key_index(i) for i in range(1, params.N + 1) if i not in (k, l)]
    red = partial_trace(rho, drop)
    if k > l:
        red = permute_subsystems(red, [1, 0] + list(range(2, red.nsub)))
    return red


def apply_twisting(pair_state: MultipartiteOperator, twisting: Twisting) -> MultipartiteOperator:
    s = twisting.shield_side
    if pair_state.dims[:2] != (2, 2) or pair_state.side != 4 * s:
        raise DimensionMismatchError(
            f"pair state dims {pair_state.dims} incompatible with shield side {s}"
        )
    u = twisting.matrix()
    return pair_state.with_matrix(u @ pair_state.mat @ u.conj().T)


def privacy_squeeze(
    pair_state: MultipartiteOperator, twisting: Twisting, real_coherence: bool = True
) -> np.ndarray:
    """Tr_shield(U_t rho U_t^dag), evaluated block by block.

    With ``real_coherence`` a key-diagonal phase on the first qubit makes the
    01/10 coherence real and nonnegative.
    """
    s = twisting.shield_side
    if pair_state.dims[:2] != (2, 2) or pair_state.side != 4 * s:
        raise DimensionMismatchError(
            f"pair state dims {pair_state.dims} incompatible with shield side {s}"
        )
    m = pair_state.mat
    us = [np.asarray(twisting.blocks[lab]) for lab in KEY_LABELS]
    out = np.zeros((4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            block = m[a * s:(a + 1) * s, b * s:(b + 1) * s]
            if not block.any():
                continue
            # Tr(U_a B U_b^dag) = sum((U_b^dag U_a) * B^T)
            out[a, b] = np.sum((us[b].conj().T @ us[a]) * block.T)
    if real_coherence and abs(out[1, 2]) > 0:
        phase = np.exp(-1j * np.angle(out[1, 2]))
        rot = np.diag([1.0, 1.0, phase, phase])
        out = rot.conj() @ out @ rot
    return out


def squeeze_family_pair(rho, params: StateFamilyParams, k: int, l: int, twisting=None) -> np.ndarray:
    twisting = twisting or family_twisting(params)
    return privacy_squeeze(reduce_to_pair(rho, params, k, l), twisting)
