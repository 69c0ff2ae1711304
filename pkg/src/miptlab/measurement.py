"""Projectors and the measurement sandwich operators built from them.

A projector is stored as a diagonal 0/1 indicator, never as a dense
matrix; sandwiching a unitary between projectors reduces to slicing the
rows and columns on the projector's support. Every sandwich operator is
therefore represented by its support block plus the projector, which is
also what makes the eigensolves cheap: only the rank-sized block is ever
diagonalized and the remaining eigenvalues are exact zeros.

Basis convention: computational basis states are indexed little-endian
in the qubit label, i.e. qubit 0 is the least significant bit of the
basis-state index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg

__all__ = [
    "Projector",
    "SandwichOperator",
    "build_projector",
    "projector_from_qubits",
    "lambda_p",
    "lambda_p_n",
    "lambda_01",
]


@dataclass(frozen=True)
class Projector:
    """Diagonal 0/1 projector on the computational basis."""

    indicator: np.ndarray  # bool, shape (dim,)

    def __post_init__(self):
        ind = np.asarray(self.indicator, dtype=bool)
        if ind.ndim != 1 or ind.size < 1:
            raise ValueError("indicator must be a nonempty 1-D boolean vector")
        object.__setattr__(self, "indicator", ind)

    @property
    def dim(self) -> int:
        return int(self.indicator.size)

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.indicator))

    @property
    def b(self) -> Fraction:
        return Fraction(self.rank, self.dim)

    @property
    def support(self) -> np.ndarray:
        """Indices of the basis states kept by the projector."""
        return np.flatnonzero(self.indicator)

    def matrix(self) -> np.ndarray:
        return np.diag(self.indicator.astype(np.complex128))


def build_projector(dim: int, rank: int) -> Projector:
    """Projector onto the first `rank` basis states of a `dim` space."""
    if not 0 <= rank <= dim:
        raise ValueError(f"rank must be in [0, {dim}], got {rank}")
    ind = np.zeros(dim, dtype=bool)
    ind[:rank] = True
    return Projector(ind)


def projector_from_qubits(num_qubits: int, measured, accepted) -> Projector:
    """Projector accepting a set of outcomes on a subset of qubits.

    `measured` is a collection of distinct qubit indices; `accepted` is a
    nonempty collection of bitstrings, one character per measured qubit
    with position p referring to the p-th measured qubit in ascending
    index order. A basis state is kept iff its restriction to the
    measured qubits reads as one of the accepted strings, which gives
    fill fraction b = |accepted| / 2^|measured|.
    """
    qubits = sorted(set(int(q) for q in measured))
    if len(qubits) != len(list(measured)):
        raise ValueError("measured qubit indices must be distinct")
    if not qubits:
        raise ValueError("measured set must be nonempty")
    if qubits[0] < 0 or qubits[-1] >= num_qubits:
        raise ValueError(f"measured qubits out of range for {num_qubits} qubits")
    patterns = set()
    for s in accepted:
        s = str(s)
        if len(s) != len(qubits) or any(c not in "01" for c in s):
            raise ValueError(f"bad accepted bitstring {s!r} for {len(qubits)} qubits")
        patterns.add(s)
    if not patterns:
        raise ValueError("accepted set must be nonempty")

    dim = 1 << num_qubits
    states = np.arange(dim)
    keep = np.zeros(dim, dtype=bool)
    for s in patterns:
        mask = np.ones(dim, dtype=bool)
        for pos, q in enumerate(qubits):
            bit = int(s[pos])
            mask &= ((states >> q) & 1) == bit
        keep |= mask
    return Projector(keep)


@dataclass
class SandwichOperator:
    """Hermitian operator supported on a projector's block.

    Only the rank x rank support block is stored; the full matrix is
    materialized on demand. `source` records which construction produced
    it and `meta` carries provenance of U.
    """

    projector: Projector
    block: np.ndarray
    source: str
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.projector.dim

    @property
    def rank(self) -> int:
        return self.projector.rank

    @property
    def b(self) -> Fraction:
        return self.projector.b

    def matrix(self) -> np.ndarray:
        """Full dim x dim matrix (zero outside the support block)."""
        full = np.zeros((self.dim, self.dim), dtype=np.complex128)
        sup = self.projector.support
        full[np.ix_(sup, sup)] = self.block
        return full

    def eigenvalues(self) -> np.ndarray:
        """All dim eigenvalues ascending: block spectrum plus exact zeros."""
        zeros = np.zeros(self.dim - self.rank)
        if self.rank == 0:
            return zeros
        w = linalg.hermitian_eigenvalues(self.block)
        return np.sort(np.concatenate([zeros, w]))

    def eigensystem(self):
        """Block eigenvalues (ascending) and eigenvectors embedded in dim.

        Returns (w, vecs) with vecs of shape (dim, rank); the kernel
        outside the support is omitted since it carries no dynamics.
        """
        if self.rank == 0:
            return np.zeros(0), np.zeros((self.dim, 0), dtype=np.complex128)
        w, v = linalg.hermitian_eigensystem(self.block)
        vecs = np.zeros((self.dim, self.rank), dtype=np.complex128)
        vecs[self.projector.support, :] = v
        return w, vecs


def _checked_submatrix(u, proj: Projector, check_unitary) -> np.ndarray:
    m = linalg.as_square_complex(u)
    if m.shape[0] != proj.dim:
        raise ValueError(f"dimension mismatch: U is {m.shape[0]}, projector is {proj.dim}")
    if check_unitary == "auto":
        check_unitary = m.shape[0] <= 1024
    if check_unitary:
        defect = linalg.unitarity_defect(m)
        if defect >= 1e-10:
            raise ValueError(f"U is not unitary: defect {defect:.3e} >= 1e-10")
    else:
        # Probe check: catches gross non-unitarity at O(dim^2) cost.
        rng = np.random.Generator(np.random.Philox(key=[0xC0FFEE, 0]))
        z = rng.standard_normal((m.shape[0], 2)) + 1j * rng.standard_normal((m.shape[0], 2))
        resid = m.conj().T @ (m @ z) - z
        defect = float(np.max(np.abs(resid)) / np.max(np.abs(z)))
        if defect >= 1e-8:
            raise ValueError(f"U is not unitary: probe residual {defect:.3e}")
    sup = proj.support
    return m[np.ix_(sup, sup)]


def _hermitize(block: np.ndarray) -> np.ndarray:
    return (block + block.conj().T) / 2.0


def lambda_p(u, proj: Projector, *, check_unitary="auto") -> SandwichOperator:
    """The sandwich operator P U^dag P U P.

    Hermitian with spectrum in [0, 1]; its support block equals
    (U_SS)^dag U_SS where U_SS is the submatrix of U on the projector's
    support S.
    """
    uss = _checked_submatrix(u, proj, check_unitary)
    block = _hermitize(uss.conj().T @ uss)
    return SandwichOperator(proj, block, "lambda_p")


def lambda_p_n(u, proj: Projector, n: int, *, check_unitary="auto") -> SandwichOperator:
    """(W^dag)^n W^n for the contraction W = P U P; n = 1 is lambda_p."""
    if n < 1:
        raise ValueError("n must be >= 1")
    uss = _checked_submatrix(u, proj, check_unitary)
    wn = np.linalg.matrix_power(uss, n)
    block = _hermitize(wn.conj().T @ wn)
    return SandwichOperator(proj, block, "lambda_p_n", {"n": n})


def lambda_01(u, proj: Projector, *, check_unitary="auto") -> SandwichOperator:
    """P U^dag (1 - P) U P, the cross-outcome sandwich.

    Equals P - lambda_p(U, P) identically (from P U^dag U P = P), so its
    support-block spectrum is the mirror {1 - w} of lambda_p's.
    """
    uss = _checked_submatrix(u, proj, check_unitary)
    block = np.eye(proj.rank, dtype=np.complex128) - _hermitize(uss.conj().T @ uss)
    return SandwichOperator(proj, block, "lambda01")
