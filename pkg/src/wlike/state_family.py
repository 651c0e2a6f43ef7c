"""Construction of the W-like PPT state family and its partial transposes.

Subsystem layout of a family member with ``N`` parties and shield factor
dimension ``D``::

    [A_1, ..., A_N, B_1, C_1, B_2, C_2, ..., B_N, C_N]

``A_i`` are the key qubits. ``(B_i, C_i)`` carry the ring factor linking
party ``i`` to party ``i+1`` (indices mod N): ``B_i`` belongs to party ``i``
and ``C_i`` to party ``i+1``. Party ``k`` therefore owns
``{A_k, C_{k-1}, B_k}``. Parties are numbered from 1, subsystem indices
from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import combinations

import numpy as np

from .exceptions import DimensionMismatchError, SizeLimitError
from .operator_core import (
    EIG_TOL,
    MultipartiteOperator,
    hermitian_spectrum,
    partial_transpose,
)

DEFAULT_SIZE_LIMIT = 8192
UNITARY_TOL = 1e-10


def hadamard_unitary(k: int) -> np.ndarray:
    """``H^{(x)k}``: Hermitian unitary of side ``2**k`` with all entries of modulus 2^(-k/2)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    return reduce(np.kron, [h] * k)


def builtin_unitary(D: int) -> np.ndarray:
    k = int(D).bit_length() - 1
    if D < 2 or (1 << k) != D:
        raise ValueError(f"no built-in unitary for D={D} (only powers of two)")
    return hadamard_unitary(k)


def validate_hermitian_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got shape {u.shape}")
    d = u.shape[0]
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > tol:
        raise ValueError("matrix is not unitary")
    if np.max(np.abs(u - u.conj().T)) > tol:
        raise ValueError("matrix is not Hermitian")
    return u


def abs_sum(u: np.ndarray) -> float:
    """Sum of moduli of all entries of ``u``."""
    return float(np.sum(np.abs(u)))


@dataclass(frozen=True, eq=False)
class StateFamilyParams:
    N: int
    D: int
    unitary: np.ndarray

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("N must be >= 3")
        if self.D < 2:
            raise ValueError("D must be >= 2")
        u = validate_hermitian_unitary(self.unitary)
        if u.shape[0] != self.D:
            raise DimensionMismatchError(f"unitary side {u.shape[0]} != D={self.D}")
        if np.iscomplexobj(u) and not np.any(u.imag):
            u = u.real
        object.__setattr__(self, "unitary", u)

    @classmethod
    def hadamard(cls, N: int, D: int) -> StateFamilyParams:
        return cls(N, D, builtin_unitary(D))

    @cached_property
    def unitary_abs_sum(self) -> float:
        return abs_sum(self.unitary)

    @property
    def key_dims(self) -> tuple[int, ...]:
        return (2,) * self.N

    @property
    def shield_dims(self) -> tuple[int, ...]:
        return (self.D,) * (2 * self.N)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.key_dims + self.shield_dims

    @property
    def side(self) -> int:
        return 2**self.N * self.D ** (2 * self.N)

    @property
    def dtype(self):
        return self.unitary.dtype

    def key_index(self, i: int) -> int:
        return i - 1

    def shield_b(self, i: int) -> int:
        """Index of ``B_i`` counted within the shield part."""
        return 2 * ((i - 1) % self.N)

    def shield_c(self, i: int) -> int:
        return 2 * ((i - 1) % self.N) + 1

    def party_shield_subsystems(self, k: int) -> list[int]:
        self._check_party(k)
        return sorted([self.shield_c(k - 1), self.shield_b(k)])

    def party_subsystems(self, k: int) -> list[int]:
        """All subsystems (full-state indexing) held by party ``k``."""
        return [self.key_index(k)] + [self.N + s for s in self.party_shield_subsystems(k)]

    def _check_party(self, k: int) -> None:
        if not 1 <= k <= self.N:
            raise IndexError(f"party {k} out of range 1..{self.N}")


def check_size(side: int, limit: int = DEFAULT_SIZE_LIMIT) -> None:
    if side > limit:
        raise SizeLimitError(
            f"dense matrix of side {side} exceeds the limit {limit} "
            f"(~{side * side * 16 / 2**30:.1f} GiB complex)"
        )


# -- ring factors -------------------------------------------------------------


def build_Z(unitary: np.ndarray) -> MultipartiteOperator:
    """sum_ij u_ij |ii><jj|."""
    u = np.asarray(unitary)
    D = u.shape[0]
    z = np.zeros((D * D, D * D), dtype=u.dtype)
    diag = np.arange(D) * (D + 1)
    z[np.ix_(diag, diag)] = u
    return MultipartiteOperator((D, D), z)


def build_R(D: int) -> MultipartiteOperator:
    r = np.zeros((D * D, D * D))
    diag = np.arange(D) * (D + 1)
    r[diag, diag] = 1.0
    return MultipartiteOperator((D, D), r)


def build_Z_gamma(unitary: np.ndarray) -> MultipartiteOperator:
    """Z with its second factor transposed: sum_ij u_ij |ij><ji|."""
    u = np.asarray(unitary)
    D = u.shape[0]
    zg = np.zeros((D * D, D * D), dtype=u.dtype)
    i, j = np.meshgrid(np.arange(D), np.arange(D), indexing="ij")
    zg[(i * D + j).ravel(), (j * D + i).ravel()] = u.ravel()
    return MultipartiteOperator((D, D), zg)


def build_Z_gamma_abs(unitary: np.ndarray) -> MultipartiteOperator:
    """|Z^Gamma| = sum_ij |u_ij| |ji><ji| (diagonal)."""
    u = np.asarray(unitary)
    D = u.shape[0]
    i, j = np.meshgrid(np.arange(D), np.arange(D), indexing="ij")
    d = np.zeros(D * D)
    d[(j * D + i).ravel()] = np.abs(u).ravel()
    return MultipartiteOperator((D, D), np.diag(d))


def _ring(factors: list[MultipartiteOperator]) -> MultipartiteOperator:
    dims = tuple(d for f in factors for d in f.dims)
    return MultipartiteOperator(dims, reduce(np.kron, (f.mat for f in factors)))


def build_X(params: StateFamilyParams) -> MultipartiteOperator:
    """Ring of N factors Z_{i,i+1}, each transposed on the factor held by party i+1."""
    zg = build_Z_gamma(params.unitary)
    return _ring([zg] * params.N)


def build_X_gamma(params: StateFamilyParams, k: int) -> MultipartiteOperator:
    """X with party ``k``'s shield factors transposed, assembled factor by factor.

    The pair (k-1, k) returns to the untransposed Z; the pair (k, k+1) becomes
    the full transpose Z^T.
    """
    params._check_party(k)
    N = params.N
    u = params.unitary
    factors = [build_Z_gamma(u)] * N
    factors[(k - 2) % N] = build_Z(u)
    factors[k - 1] = build_Z(u.T)
    return _ring(factors)


def build_abs_X(params: StateFamilyParams) -> MultipartiteOperator:
    return _ring([build_Z_gamma_abs(params.unitary)] * params.N)


def build_abs_X_gamma(params: StateFamilyParams, k: int) -> MultipartiteOperator:
    """|X^{Gamma_k}|: all ring factors |Z^Gamma| except R_D on pairs (k-1,k) and (k,k+1)."""
    params._check_party(k)
    N = params.N
    factors = [build_Z_gamma_abs(params.unitary)] * N
    r = build_R(params.D)
    factors[(k - 2) % N] = r
    factors[k - 1] = r
    return _ring(factors)


def build_Y(params: StateFamilyParams) -> MultipartiteOperator:
    terms = [build_abs_X_gamma(params, k) for k in range(1, params.N + 1)]
    return reduce(lambda a, b: a + b, terms)


# -- key part -----------------------------------------------------------------


@dataclass(frozen=True)
class KeyProjectors:
    """Basis vectors of the N-qubit key space with one or two parties in |1>."""

    N: int

    def _index(self, parties) -> int:
        idx = 0
        for p in parties:
            if not 1 <= p <= self.N:
                raise IndexError(f"party {p} out of range 1..{self.N}")
            idx |= 1 << (self.N - p)
        return idx

    def vector(self, *parties: int) -> np.ndarray:
        v = np.zeros(2**self.N)
        v[self._index(parties)] = 1.0
        return v

    @property
    def vac(self) -> np.ndarray:
        return self.vector()

    def psi_i(self, i: int) -> np.ndarray:
        return self.vector(i)

    def psi_ij(self, i: int, j: int) -> np.ndarray:
        if i == j:
            raise ValueError("psi_ij needs two distinct parties")
        return self.vector(i, j)

    def P_i(self, i: int) -> np.ndarray:
        v = self.psi_i(i)
        return np.outer(v, v)

    def P_ij(self, i: int, j: int) -> np.ndarray:
        v = self.psi_ij(i, j)
        return np.outer(v, v)

    def ket_bra(self, a, b) -> np.ndarray:
        """|a><b| for tuples of excited parties ``a`` and ``b``."""
        m = np.zeros((2**self.N, 2**self.N))
        m[self._index(a), self._index(b)] = 1.0
        return m


def build_w_state(N: int) -> np.ndarray:
    if N < 2:
        raise ValueError("N must be >= 2")
    proj = KeyProjectors(N)
    return sum(proj.psi_i(i) for i in range(1, N + 1)) / np.sqrt(N)


# -- the family member --------------------------------------------------------


def normalization(params: StateFamilyParams) -> float:
    """Closed-form trace of the unnormalized family member."""
    N, D, U = params.N, params.D, params.unitary_abs_sum
    return N * U ** (N - 2) * ((N - 1) * U**2 + (D**2 / 2) * (3 * N**2 - 3 * N - 2))


def _assemble(terms, key_side: int, shield_side: int, dtype) -> np.ndarray:
    """Sum of kron(K, S) over ``terms`` without forming each product separately."""
    out = np.zeros((key_side * shield_side, key_side * shield_side), dtype=dtype)
    for key, shield in terms:
        for a, b in zip(*np.nonzero(key)):
            out[a * shield_side:(a + 1) * shield_side,
                b * shield_side:(b + 1) * shield_side] += key[a, b] * shield
    return out


def _rho_terms(params: StateFamilyParams):
    N = params.N
    proj = KeyProjectors(N)
    parties = range(1, N + 1)
    X = build_X(params).mat
    Y = build_Y(params).mat
    absX = build_abs_X(params).mat

    coherent = sum(proj.ket_bra((i,), (j,)) for i in parties for j in parties if i != j)
    diag_y = (N - 1) * np.outer(proj.vac, proj.vac) + sum(
        proj.P_ij(i, j) for i, j in combinations(parties, 2)
    )
    singles = sum(proj.P_i(i) for i in parties)
    return [
        (coherent, X),
        (diag_y, Y),
        (singles, (N - 1) * absX + (N - 2) * Y),
    ]


def build_rho_unnormalized(params: StateFamilyParams, size_limit: int = DEFAULT_SIZE_LIMIT):
    check_size(params.side, size_limit)
    mat = _assemble(_rho_terms(params), 2**params.N, params.D ** (2 * params.N), params.dtype)
    return MultipartiteOperator(params.dims, mat)


def build_rho(params: StateFamilyParams, size_limit: int = DEFAULT_SIZE_LIMIT) -> MultipartiteOperator:
    raw = build_rho_unnormalized(params, size_limit)
    return raw / normalization(params)


def build_rho_gamma_direct(
    params: StateFamilyParams, k: int, size_limit: int = DEFAULT_SIZE_LIMIT
) -> MultipartiteOperator:
    """Partial transpose over party ``k``, assembled term by term from the family's blocks.

    The single-excitation projectors of the other parties keep their
    ``(N-1)|X|`` component; it is diagonal, so the transposition leaves it
    in place.
    """
    params._check_party(k)
    check_size(params.side, size_limit)
    N = params.N
    proj = KeyProjectors(N)
    others = [i for i in range(1, N + 1) if i != k]
    Xg = build_X_gamma(params, k).mat
    Y = build_Y(params).mat
    absX = build_abs_X(params).mat
    vac = np.outer(proj.vac, proj.vac)

    first_x = sum(proj.ket_bra((), (i, k)) + proj.ket_bra((i, k), ()) for i in others)
    first_y = (N - 1) * vac + sum(proj.P_ij(i, k) for i in others)
    second_x = sum(proj.ket_bra((i,), (j,)) for i in others for j in others if i != j)
    second_y = (N - 2) * sum(proj.P_i(i) for i in others)
    second_absx = (N - 1) * sum(proj.P_i(i) for i in others)
    rest_y = sum(
        (proj.P_ij(i, j) for i, j in combinations(others, 2)), np.zeros_like(vac)
    )
    terms = [
        (first_x, Xg),
        (first_y, Y),
        (second_y, Y),
        (second_absx, absX),
        (second_x, Xg),
        (proj.P_i(k), (N - 1) * absX + (N - 2) * Y),
        (rest_y, Y),
    ]
    mat = _assemble(terms, 2**N, params.D ** (2 * N), params.dtype)
    return MultipartiteOperator(params.dims, mat / normalization(params))


@dataclass(frozen=True)
class PPTResult:
    party: int
    is_ppt: bool
    min_eigenvalue: float


def min_pt_eigenvalue(op: MultipartiteOperator, subsystems) -> float:
    return hermitian_spectrum(partial_transpose(op, subsystems)).min


def ppt_check(
    rho: MultipartiteOperator, params: StateFamilyParams, k: int, tol: float = EIG_TOL
) -> PPTResult:
    """Transpose party ``k``'s subsystems {A_k, C_{k-1}, B_k} and test positivity."""
    if rho.dims != params.dims:
        raise DimensionMismatchError(f"state dims {rho.dims} do not match family dims {params.dims}")
    lam = min_pt_eigenvalue(rho, params.party_subsystems(k))
    return PPTResult(k, lam >= -tol, lam)


def single_cut_ppt(op: MultipartiteOperator, subsystem: int, tol: float = EIG_TOL) -> PPTResult:
    """One-subsystem-versus-rest check for an arbitrary operator (party = subsystem + 1)."""
    lam = min_pt_eigenvalue(op, [subsystem])
    return PPTResult(subsystem + 1, lam >= -tol, lam)
