"""ccq states of two-qubit states and the Devetak-Winter key rate.

Measuring the key qubits of a purification of ``rho4`` in the computational
basis leaves Eve with unnormalized conditional states ``|e_ij>`` whose Gram
matrix is ``<e_kl|e_ij> = <ij|rho4|kl>``. All of Eve's entropies are
therefore spectra of (sub)blocks of ``rho4`` itself. Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NegativeEigenvalueError, TriangleInequalityError
from .operator_core import EIG_TOL, check_hermitian, entropy_of_probabilities

LABELS = ("00", "01", "10", "11")


@dataclass(frozen=True, eq=False)
class CcqState:
    """Joint key distribution ``p`` (order 00, 01, 10, 11) and Eve's Gram matrix."""

    p: np.ndarray
    gram: np.ndarray

    def __post_init__(self):
        if abs(float(np.sum(self.p)) - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {np.sum(self.p)}")
        if np.max(np.abs(np.real(np.diag(self.gram)) - self.p)) > 1e-10:
            raise ValueError("gram diagonal differs from p")

    @property
    def p_a(self) -> np.ndarray:
        return np.array([self.p[0] + self.p[1], self.p[2] + self.p[3]])

    @property
    def p_b(self) -> np.ndarray:
        return np.array([self.p[0] + self.p[2], self.p[1] + self.p[3]])


@dataclass(frozen=True)
class RateRecord:
    i_ab: float
    i_ae: float
    rate: float


def _gram_entropy(block: np.ndarray, tol: float = EIG_TOL) -> float:
    """Entropy of the normalized state whose spectrum is that of a Gram block."""
    ev = np.linalg.eigvalsh(block)
    if ev.min(initial=0.0) < -tol:
        raise NegativeEigenvalueError(f"Gram eigenvalue {ev.min():.3e}")
    tot = ev.clip(0).sum()
    if tot <= 0:
        return 0.0
    return entropy_of_probabilities(ev.clip(0) / tot)


def ccq_from_two_qubit(rho4, tol: float = EIG_TOL) -> CcqState:
    m = check_hermitian(np.asarray(rho4, dtype=complex))
    ev = np.linalg.eigvalsh(m)
    if ev.min() < -tol:
        raise NegativeEigenvalueError(f"input has eigenvalue {ev.min():.3e}")
    if abs(np.trace(m).real - 1.0) > 1e-10:
        raise ValueError("input is not unit trace")
    return CcqState(np.real(np.diag(m)).copy(), m)


def mutual_information_ab(ccq: CcqState) -> float:
    return (
        entropy_of_probabilities(ccq.p_a)
        + entropy_of_probabilities(ccq.p_b)
        - entropy_of_probabilities(ccq.p)
    )


def mutual_information_ae(ccq: CcqState) -> float:
    """I(A:E) = S(E) - sum_i p_A(i) S(E | A=i)."""
    s_e = _gram_entropy(ccq.gram)
    cond = 0.0
    for i, (p_i, sl) in enumerate(zip(ccq.p_a, (slice(0, 2), slice(2, 4)))):
        if p_i > 0:
            cond += p_i * _gram_entropy(ccq.gram[sl, sl])
    return s_e - cond


def dw_rate(ccq: CcqState) -> RateRecord:
    """Devetak-Winter rate I(A:B) - I(A:E); negative values are returned as is."""
    i_ab = mutual_information_ab(ccq)
    i_ae = mutual_information_ae(ccq)
    return RateRecord(i_ab, i_ae, i_ab - i_ae)


def dw_rate_of_state(rho4) -> RateRecord:
    return dw_rate(ccq_from_two_qubit(rho4))


def chain_multikey(r: float, N: int) -> float:
    """Multipartite rate from N-1 bipartite keys along a chain of parties."""
    if r < 0:
        raise ValueError("rate must be nonnegative")
    if N < 2:
        raise ValueError("N must be >= 2")
    return r / (N - 1)


def triangle_multikey(r1: float, r2: float, r3: float, tol: float = 1e-12) -> float:
    """Tripartite rate (r1 + r2 + r3)/2 from pairwise rates obeying the triangle inequality."""
    rates = {"r1": r1, "r2": r2, "r3": r3}
    for name, r in rates.items():
        if r < 0:
            raise ValueError(f"{name} is negative")
    names = list(rates)
    for n in names:
        a, b = (m for m in names if m != n)
        if rates[n] > rates[a] + rates[b] + tol:
            raise TriangleInequalityError(
                f"{n}={rates[n]} exceeds {a}+{b}={rates[a] + rates[b]}"
            )
    return (r1 + r2 + r3) / 2
