"""Key distillation from the family: local filtering and random distillation.

Both routes end in a privacy-squeezed two-qubit X state whose
Devetak-Winter rate, weighted by the success probability, lower-bounds the
distillable key of a pair of parties.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from . import kernels
from .exceptions import SizeLimitError
from .key_rates import dw_rate_of_state
from .operator_core import MultipartiteOperator, partial_trace
from .squeezing import TwoQubitXState, family_twisting, privacy_squeeze, xstate_closed_form
from .state_family import DEFAULT_SIZE_LIMIT, StateFamilyParams, build_rho

PAIRS = ((1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class SweepRecord:
    D: int
    q: float
    i_ab: float
    i_ae: float
    rate: float
    N: int | None = None
    epsilon: float | None = None
    M: int | None = None

    @property
    def rate_clamped(self) -> float:
        return max(self.rate, 0.0)


# -- local filtering ----------------------------------------------------------


def filter_state(x: TwoQubitXState, eps) -> tuple[TwoQubitXState, float]:
    """Apply diag(eps, 1) to both key qubits; return the new state and its probability."""
    if not 0 <= eps <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    e2 = eps * eps
    out = TwoQubitXState.from_weights(x.a * e2 * e2, x.b * e2, x.c * e2, x.d)
    return out, out.norm / x.norm


def _record(D, q, i_ab, i_ae, **kw) -> SweepRecord:
    return SweepRecord(D=D, q=float(q), i_ab=float(i_ab), i_ae=float(i_ae),
                       rate=float(q * (i_ab - i_ae)), **kw)


def filter_rate(N: int, D: int, eps: float) -> SweepRecord:
    """q * [I(A:B) - I(A:E)] for the filtered, privacy-squeezed pair state."""
    filtered, q = filter_state(xstate_closed_form(N, D), eps)
    r = dw_rate_of_state(filtered.matrix())
    return _record(D, q, r.i_ab, r.i_ae, N=N, epsilon=float(eps))


def _filter_grid(N: int, Ds: np.ndarray, eps: np.ndarray, backend=None):
    Dg, eg = np.meshgrid(np.asarray(Ds, dtype=float), np.asarray(eps, dtype=float), indexing="ij")
    x = xstate_closed_form(N, Dg)
    e2 = eg * eg
    a, b, c, d = x.a * e2 * e2, x.b * e2, Dg * e2, np.full_like(Dg, N)
    tot = a + 2 * b + d
    q = tot / x.norm
    with np.errstate(invalid="ignore", divide="ignore"):
        i_ab, i_ae = kernels.xstate_dw(a, b, c, d, backend=backend)
    return q, i_ab, i_ae


def _chunked(fn, Ds, jobs: int):
    Ds = np.asarray(Ds)
    if jobs <= 1 or len(Ds) < 2:
        return fn(Ds)
    chunks = np.array_split(Ds, min(jobs, len(Ds)))
    with ThreadPoolExecutor(jobs) as pool:
        parts = list(pool.map(fn, chunks))
    return tuple(np.concatenate(p, axis=0) for p in zip(*parts))


def filter_sweep(N: int, Ds: Sequence[int], eps: Sequence[float], jobs: int = 1,
                 backend=None) -> list[SweepRecord]:
    """Records in grid order: D outer, epsilon inner."""
    eps = np.asarray(eps, dtype=float)
    q, i_ab, i_ae = _chunked(lambda chunk: _filter_grid(N, chunk, eps, backend), Ds, jobs)
    return [
        _record(int(D), q[i, j], i_ab[i, j], i_ae[i, j], N=N, epsilon=float(e))
        for i, D in enumerate(Ds)
        for j, e in enumerate(eps)
    ]


def filter_rate_grid(N: int, Ds, eps, jobs: int = 1, backend=None) -> np.ndarray:
    """Rates on the (D, epsilon) grid as an array."""
    eps = np.asarray(eps, dtype=float)
    q, i_ab, i_ae = _chunked(lambda chunk: _filter_grid(N, chunk, eps, backend), Ds, jobs)
    return q * (i_ab - i_ae)


# -- random distillation ------------------------------------------------------


def povm_pair(eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Continue/stop operators diag(sqrt(1-eps^2), 1) and diag(eps, 0)."""
    if not 0 <= eps <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    v = np.diag([np.sqrt(1.0 - eps * eps), 1.0])
    w = np.diag([eps, 0.0])
    return v, w


def epsilon_schedule(M: int) -> list[float]:
    """Round-by-round epsilons: 1/sqrt(1+M), 1/sqrt(M), ..., 1/sqrt(2)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return [1.0 / np.sqrt(1.0 + i) for i in range(M, 0, -1)]


def _check_pair(pair) -> tuple[int, int]:
    pair = tuple(sorted(pair))
    if pair not in PAIRS:
        raise ValueError(f"success pair must be one of {PAIRS}, got {pair}")
    return pair


def _key_diagonal(ops: Sequence[np.ndarray]) -> np.ndarray:
    d = np.ones(1)
    for op in ops:
        d = np.kron(d, np.diag(op))
    return d


def _apply_key_diagonal(rho: np.ndarray, kdiag: np.ndarray, shield_side: int) -> np.ndarray:
    """(K (x) 1) rho (K (x) 1)^dag for a key operator K that is diagonal."""
    full = np.repeat(kdiag, shield_side)
    return rho * np.outer(full, full.conj())


@dataclass(frozen=True)
class BranchOutcome:
    state: MultipartiteOperator
    probability: float
    continue_mass: float
    success_mass: dict
    failure_mass: float


def random_branches(params: StateFamilyParams, M: int, success_pair=(1, 2),
                    size_limit: int = DEFAULT_SIZE_LIMIT, rho=None) -> BranchOutcome:
    """Run the M-round measurement on the full N=3 state, summing over branches exactly.

    The returned state is the normalized sum over rounds m of
    "continue for m-1 rounds, then succeed for ``success_pair`` in round m".
    """
    if params.N != 3:
        raise ValueError("random distillation is defined for N = 3 only")
    pair = _check_pair(success_pair)
    if params.side > size_limit:
        raise SizeLimitError(f"state side {params.side} exceeds limit {size_limit}")
    rho = build_rho(params, size_limit) if rho is None else rho
    S = params.D ** (2 * params.N)
    current = rho.mat
    success = {p: 0.0 for p in PAIRS}
    failure = 0.0
    G = np.zeros_like(rho.mat)
    for eps in epsilon_schedule(M):
        v, w = povm_pair(eps)
        nxt = None
        for pattern in product((0, 1), repeat=3):
            ops = [w if bit else v for bit in pattern]
            branch = _apply_key_diagonal(current, _key_diagonal(ops), S)
            mass = float(np.real(np.trace(branch)))
            stops = sum(pattern)
            if stops == 0:
                nxt = branch
            elif stops == 1:
                stopper = pattern.index(1) + 1
                p = tuple(i for i in (1, 2, 3) if i != stopper)
                success[p] += mass
                if p == pair:
                    G = G + branch
            else:
                failure += mass
        current = nxt
    prob = float(np.real(np.trace(G)))
    return BranchOutcome(
        state=rho.with_matrix(G / prob),
        probability=prob,
        continue_mass=float(np.real(np.trace(current))),
        success_mass=success,
        failure_mass=failure,
    )


def random_branch_state(params: StateFamilyParams, M: int, success_pair=(1, 2),
                        size_limit: int = DEFAULT_SIZE_LIMIT, rho=None):
    out = random_branches(params, M, success_pair, size_limit, rho)
    return out.state, out.probability


def squeeze_random_branch(params: StateFamilyParams, M: int, success_pair=(1, 2),
                          rho=None, twisting=None) -> np.ndarray:
    """Privacy-squeezed two-qubit state of the successful pair."""
    pair = _check_pair(success_pair)
    state, _ = random_branch_state(params, M, pair, rho=rho)
    other = ({1, 2, 3} - set(pair)).pop()
    red = partial_trace(state, [other - 1])
    return privacy_squeeze(red, twisting or family_twisting(params))


def random_success_prob(D, M: int, exact: bool = False):
    """Closed-form probability that a given pair succeeds within M rounds."""
    if np.any(np.asarray(D) < 2) or np.any(np.asarray(M) < 1):
        raise ValueError("need D >= 2 and M >= 1")
    if exact:
        D, M = Fraction(D), Fraction(M)
    return (2 * M**2 * (D + 4) + M * (2 * D + 7)) / (6 * (D + 4) * (M + 1) ** 2)


def random_xstate_closed_form(D, M: int, exact: bool = False) -> TwoQubitXState:
    if np.any(np.asarray(D) < 2) or np.any(np.asarray(M) < 1):
        raise ValueError("need D >= 2 and M >= 1")
    if exact:
        D, M = Fraction(D), Fraction(M)
    a = 2 * (2 * M + 1) / (M + 1)
    norm = 2 * (2 * M * (D + 4) + 2 * D + 7) / (M + 1)
    return TwoQubitXState(a, 2 * D + 3, D, 6, norm)


def random_rate(D: int, M: int) -> SweepRecord:
    q = random_success_prob(D, M)
    r = dw_rate_of_state(random_xstate_closed_form(D, M).matrix())
    return _record(D, q, r.i_ab, r.i_ae, N=3, M=M)


def _random_grid(Ds, Ms, backend=None):
    Dg, Mg = np.meshgrid(np.asarray(Ds, dtype=float), np.asarray(Ms, dtype=float), indexing="ij")
    a = 2 * (2 * Mg + 1) / (Mg + 1)
    b, c, d = 2 * Dg + 3, Dg, np.full_like(Dg, 6.0)
    q = random_success_prob(Dg, Mg)
    i_ab, i_ae = kernels.xstate_dw(a, b, c, d, backend=backend)
    return q, i_ab, i_ae


def random_sweep(Ds: Sequence[int], Ms: Sequence[int], jobs: int = 1,
                 backend=None) -> list[SweepRecord]:
    """Records in grid order: D outer, M inner."""
    Ms = np.asarray(Ms)
    q, i_ab, i_ae = _chunked(lambda chunk: _random_grid(chunk, Ms, backend), Ds, jobs)
    return [
        _record(int(D), q[i, j], i_ab[i, j], i_ae[i, j], N=3, M=int(m))
        for i, D in enumerate(Ds)
        for j, m in enumerate(Ms)
    ]


def random_rate_grid(Ds, Ms, jobs: int = 1, backend=None) -> np.ndarray:
    Ms = np.asarray(Ms)
    q, i_ab, i_ae = _chunked(lambda chunk: _random_grid(chunk, Ms, backend), Ds, jobs)
    return q * (i_ab - i_ae)


# -- thresholds ---------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    mode: str
    D: int | None
    rate: float | None = None
    parameter: float | None = None

    @property
    def found(self) -> bool:
        return self.D is not None

    def __str__(self):
        if not self.found:
            return f"{self.mode}: no threshold in range"
        return f"{self.mode}: D={self.D} rate={self.rate:.6g} at parameter={self.parameter:g}"


def find_threshold_D(mode: str, Ds: Sequence[int], N: int = 3, eps: Sequence[float] | None = None,
                     M: int = 100, jobs: int = 1, backend=None) -> ThresholdResult:
    """Smallest D in ``Ds`` with a strictly positive rate.

    ``filter`` mode maximizes over the ``eps`` grid; ``random`` mode uses N = 3
    and ``M`` rounds.
    """
    Ds = np.asarray(sorted(int(D) for D in Ds))
    if mode == "filter":
        if eps is None:
            raise ValueError("filter mode needs an epsilon grid")
        eps = np.asarray(eps, dtype=float)
        rates = filter_rate_grid(N, Ds, eps, jobs, backend)
        params = eps
    elif mode == "random":
        if N != 3:
            raise ValueError("random mode is defined for N = 3 only")
        rates = random_rate_grid(Ds, [M], jobs, backend)
        params = np.array([M], dtype=float)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rates = np.nan_to_num(rates, nan=0.0)
    best = rates.max(axis=1)
    hits = np.nonzero(best > 0)[0]
    if len(hits) == 0:
        return ThresholdResult(mode, None)
    i = int(hits[0])
    j = int(np.argmax(rates[i]))
    return ThresholdResult(mode, int(Ds[i]), float(rates[i, j]), float(params[j]))
