"""Random-matrix ensembles: variance-scaled GUE, its Cayley transform, Haar.

Sampling is keyed by an explicit (master, stream) seed pair mapped
injectively onto the 128-bit key of the counter-based Philox generator,
so realizations are reproducible and independent across streams without
any serial state hand-off. Gaussian variates come from numpy's ziggurat
transform of the Philox stream (deterministic given the key).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_square_complex, hermiticity_defect

__all__ = ["RngSeed", "EnsembleParams", "sample_gue", "cayley_unitary", "sample_haar"]

_MASK64 = (1 << 64) - 1

RNG_ALGORITHM = "philox4x64(key=[master,stream]) + numpy ziggurat normals"


@dataclass(frozen=True)
class RngSeed:
    """A (master, stream) pair; stream is the realization index."""

    master: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = [self.master & _MASK64, self.stream & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> "RngSeed":
        return RngSeed(self.master, stream)


@dataclass(frozen=True)
class EnsembleParams:
    """Dimension and variance scale of the unitary ensemble."""

    dim: int
    gamma: float = 2.0
    kind: str = "cayley_gue"  # or "haar"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.kind not in ("cayley_gue", "haar"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")


def sample_gue(params: EnsembleParams, seed: RngSeed) -> np.ndarray:
    """Hermitian H with <H_ij> = 0 and <H_ij H_kl> = (gamma/dim) d_il d_jk.

    Diagonal entries are real Gaussians of variance gamma/dim;
    off-diagonal entries are complex Gaussians of total variance
    gamma/dim with H_ji = conj(H_ij) exactly.
    """
    if params.kind != "cayley_gue":
        raise ValueError("sample_gue requires kind='cayley_gue'")
    d = params.dim
    rng = seed.generator()
    x = rng.standard_normal((d, d))
    y = rng.standard_normal((d, d))
    a = (x + 1j * y) * np.sqrt(params.gamma / (2.0 * d))
    # (A + A^dag)/sqrt(2) has the target covariance and is exactly Hermitian.
    return (a + a.conj().T) / np.sqrt(2.0)


def cayley_unitary(h) -> np.ndarray:
    """U = (1 - iH)(1 + iH)^-1 for Hermitian H.

    1 + iH is always invertible for Hermitian H (eigenvalues 1 + ih != 0),
    so a solve failure is a hard numerical error.
    """
    m = as_square_complex(h)
    defect = hermiticity_defect(m)
    if defect >= 1e-10:
        raise ValueError(f"cayley_unitary needs Hermitian input, defect {defect:.3e}")
    eye = np.eye(m.shape[0], dtype=np.complex128)
    return np.linalg.solve(eye + 1j * m, eye - 1j * m)


def sample_haar(dim: int, seed: RngSeed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    Each orthonormalized column is rephased by the diagonal phase of the
    matching triangular-factor entry (equivalently, the factorization is
    normalized so the triangular factor has positive diagonal); without
    this correction the distribution of Q depends on the QR phase
    convention and is not Haar.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = seed.generator()
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    phases = diag / np.abs(diag)
    return q * phases[np.newaxis, :]


def sample_unitary(params: EnsembleParams, seed: RngSeed) -> np.ndarray:
    """Draw U from the configured ensemble."""
    if params.kind == "haar":
        return sample_haar(params.dim, seed)
    return cayley_unitary(sample_gue(params, seed))
