"""One-dimensional brickwork circuit: random single-qubit roots + fSim.

Each of the K layers applies an independently drawn single-qubit gate
from {sqrt(X), sqrt(Y), sqrt(W), sqrt(V)} and their inverses to every
qubit (W = (X+Y)/sqrt(2), V = (X-Y)/sqrt(2)), followed by fSim
entanglers on a brickwork bond pattern with open ends: layer k couples
the pairs (i, i+1) with i = k mod 2. The circuit is non-integrable at
the default angles theta = pi/6, phi = 2pi/3, beta = 0.

Qubit 0 is the least significant bit of the basis index; a two-qubit
gate on (a, b) is indexed by 2*bit(a) + bit(b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import RngSeed

__all__ = ["ChainSpec", "fsim", "sqrt_pauli_gate", "build_chain_unitary", "apply_gate"]

MAX_CHAIN_QUBITS = 14

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
}
_PAULI["W"] = (_PAULI["X"] + _PAULI["Y"]) / np.sqrt(2.0)
_PAULI["V"] = (_PAULI["X"] - _PAULI["Y"]) / np.sqrt(2.0)

GATE_SET = tuple((kind, sign) for kind in "XYWV" for sign in (+1, -1))


def fsim(theta: float, phi: float, beta: float = 0.0) -> np.ndarray:
    """Excitation-conserving two-qubit gate with swap angle theta.

    Basis order (|00>, |01>, |10>, |11>); the single-excitation block is
    [[cos t, i e^{i beta} sin t], [i e^{-i beta} sin t, cos t]] and the
    |11> amplitude picks up the phase e^{i phi}.
    """
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, 1j * np.exp(1j * beta) * s, 0],
            [0, 1j * np.exp(-1j * beta) * s, c, 0],
            [0, 0, 0, np.exp(1j * phi)],
        ],
        dtype=np.complex128,
    )


def sqrt_pauli_gate(kind: str, sign: int = +1) -> np.ndarray:
    """Principal square root of the involution X, Y, W or V.

    For A with A^2 = 1, sqrt(A) = e^{-i pi/4} (1 + iA)/sqrt(2) squares
    to A exactly; sign = -1 returns the adjoint (the inverse root).
    """
    if kind not in _PAULI:
        raise ValueError(f"kind must be one of X, Y, W, V; got {kind!r}")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    a = _PAULI[kind]
    root = np.exp(-1j * np.pi / 4) * (np.eye(2) + 1j * a) / np.sqrt(2.0)
    return root if sign > 0 else root.conj().T


def apply_gate(mat: np.ndarray, gate: np.ndarray, qubits, num_qubits: int) -> np.ndarray:
    """Apply a 1- or 2-qubit gate to the row index of a (2^L x m) array.

    Tensor-structured action on contiguous reshape views, O(2^L * m)
    per gate instead of a dense matrix product. Little-endian rows: the
    bit of qubit q has stride 2^q.
    """
    dim = 1 << num_qubits
    if mat.shape[0] != dim:
        raise ValueError("matrix height does not match qubit count")
    cols = mat.shape[1]
    qs = [int(q) for q in (qubits if np.iterable(qubits) else [qubits])]
    if any(not 0 <= q < num_qubits for q in qs) or len(set(qs)) != len(qs):
        raise ValueError(f"bad qubit indices {qs} for {num_qubits} qubits")

    mat = np.ascontiguousarray(mat, dtype=np.complex128)

    if len(qs) == 1:
        q = qs[0]
        view = mat.reshape(1 << (num_qubits - 1 - q), 2, (1 << q) * cols)
        return np.matmul(gate, view).reshape(dim, cols)

    if len(qs) == 2:
        g4 = np.asarray(gate, dtype=np.complex128).reshape(2, 2, 2, 2)
        hi, lo = max(qs), min(qs)
        if qs[0] == lo:  # gate's first label is the low qubit: swap slots
            g4 = g4.transpose(1, 0, 3, 2)
        view = mat.reshape(
            1 << (num_qubits - 1 - hi), 2, 1 << (hi - lo - 1), 2, (1 << lo) * cols
        )
        out = np.empty_like(view)
        for i_out in range(2):
            for j_out in range(2):
                acc = g4[i_out, j_out, 0, 0] * view[:, 0, :, 0, :]
                acc += g4[i_out, j_out, 0, 1] * view[:, 0, :, 1, :]
                acc += g4[i_out, j_out, 1, 0] * view[:, 1, :, 0, :]
                acc += g4[i_out, j_out, 1, 1] * view[:, 1, :, 1, :]
                out[:, i_out, :, j_out, :] = acc
        return out.reshape(dim, cols)

    raise ValueError("only 1- and 2-qubit gates are supported")


@dataclass(frozen=True)
class ChainSpec:
    """Chain geometry, layer count, fSim angles, and the RNG seed."""

    length: int
    layers: int
    theta: float = np.pi / 6
    phi: float = 2 * np.pi / 3
    beta: float = 0.0
    seed: RngSeed = RngSeed(0, 0)

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("chain needs at least 2 qubits")
        if self.length > MAX_CHAIN_QUBITS:
            raise ValueError(
                f"L = {self.length} exceeds the dense-representation cap {MAX_CHAIN_QUBITS}"
            )
        if self.layers < 1:
            raise ValueError("need at least one layer")

    @property
    def dim(self) -> int:
        return 1 << self.length


def build_chain_unitary(spec: ChainSpec) -> np.ndarray:
    """Dense 2^L x 2^L unitary of the K-layer brickwork circuit.

    Gate draws are i.i.d. uniform over the 8-element root set, layer by
    layer and qubit by qubit, so the circuit is reproducible bit-for-bit
    from the seed. Each single-qubit gate sitting under an entangler is
    fused into that entangler's 4x4 matrix, halving the passes over the
    dense matrix without changing the product.
    """
    rng = spec.seed.generator()
    L = spec.length
    u = np.eye(spec.dim, dtype=np.complex128)
    ent = fsim(spec.theta, spec.phi, spec.beta)
    for layer in range(spec.layers):
        picks = rng.integers(0, len(GATE_SET), size=L)
        singles = [sqrt_pauli_gate(*GATE_SET[p]) for p in picks]
        bonded = set()
        for i in range(layer % 2, L - 1, 2):
            fused = ent @ np.kron(singles[i], singles[i + 1])
            u = apply_gate(u, fused, (i, i + 1), L)
            bonded.update((i, i + 1))
        for q in range(L):
            if q not in bonded:
                u = apply_gate(u, singles[q], q, L)
    return u
