"""Two-dimensional grid circuit: U = u^K with u a fixed fSim sweep.

The unit operator u applies fSim(theta, 0, 0) once per grid edge, in
four sequential direction groups (horizontal bonds starting on even
columns, then odd columns, then vertical bonds starting on even rows,
then odd rows), each group ordered row-major. The exact ordering is
configurable because it only weakly affects the spectrum; u itself is
deterministic, and randomness enters solely through projector placement
handled by the experiment layer.

Qubits are numbered row-major: site (r, c) is qubit r*cols + c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import apply_gate, fsim

__all__ = ["GridSpec", "bond_order", "build_grid_unitary", "default_measured_qubits"]

MAX_GRID_QUBITS = 14


def bond_order(rows: int, cols: int):
    """Every grid edge exactly once, in the four-group sweep order."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")

    def site(r, c):
        return r * cols + c

    horiz_even = [(site(r, c), site(r, c + 1)) for r in range(rows) for c in range(0, cols - 1, 2)]
    horiz_odd = [(site(r, c), site(r, c + 1)) for r in range(rows) for c in range(1, cols - 1, 2)]
    vert_even = [(site(r, c), site(r + 1, c)) for r in range(0, rows - 1, 2) for c in range(cols)]
    vert_odd = [(site(r, c), site(r + 1, c)) for r in range(1, rows - 1, 2) for c in range(cols)]
    return horiz_even + horiz_odd + vert_even + vert_odd


def default_measured_qubits(rows: int, cols: int, count: int = 3):
    """`count` mutually non-adjacent sites, greedily picked near the center."""
    n = rows * cols
    if n < 2 * count - 1:
        raise ValueError(f"grid too small for {count} non-adjacent sites")
    center = ((rows - 1) / 2.0, (cols - 1) / 2.0)
    order = sorted(
        range(n),
        key=lambda q: (
            (q // cols - center[0]) ** 2 + (q % cols - center[1]) ** 2,
            q,
        ),
    )
    chosen: list[int] = []
    for q in order:
        r, c = divmod(q, cols)
        if any(abs(r - qq // cols) + abs(c - qq % cols) == 1 for qq in chosen):
            continue
        chosen.append(q)
        if len(chosen) == count:
            break
    if len(chosen) < count:
        raise ValueError("could not place non-adjacent measured sites")
    return tuple(sorted(chosen))


@dataclass(frozen=True)
class GridSpec:
    """Grid geometry, sweep repetitions, and the fSim swap angle.

    `omit` removes lattice sites (row-major rectangle labels), which
    allows non-rectangular 2D patches; the remaining sites are relabeled
    compactly in ascending order and bonds touching removed sites drop
    out of the sweep.
    """

    rows: int
    cols: int
    repetitions: int = 20
    theta: float = np.pi / 8
    bonds: tuple | None = None  # override of the default sweep order
    omit: tuple = ()

    def __post_init__(self):
        bad = [q for q in self.omit if not 0 <= q < self.rows * self.cols]
        if bad or len(set(self.omit)) != len(self.omit):
            raise ValueError(f"bad omit sites {self.omit}")
        n = self.num_qubits
        if n < 2:
            raise ValueError("grid needs at least 2 qubits")
        if n > MAX_GRID_QUBITS:
            raise ValueError(
                f"N = {n} exceeds the dense-representation cap {MAX_GRID_QUBITS}"
            )
        if self.repetitions < 0:
            raise ValueError("repetitions must be >= 0")

    @property
    def kept_sites(self) -> tuple:
        return tuple(q for q in range(self.rows * self.cols) if q not in set(self.omit))

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols - len(self.omit)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def patch_bonds(self):
        """Sweep-ordered bonds in compact labels, skipping omitted sites."""
        if self.bonds is not None:
            return list(self.bonds)
        kept = self.kept_sites
        compact = {q: i for i, q in enumerate(kept)}
        return [
            (compact[a], compact[b])
            for a, b in bond_order(self.rows, self.cols)
            if a in compact and b in compact
        ]


def build_grid_unitary(spec: GridSpec) -> np.ndarray:
    """Dense unitary u^K; K = 0 gives the identity."""
    n = spec.num_qubits
    gate = fsim(spec.theta, 0.0, 0.0)
    u = np.eye(spec.dim, dtype=np.complex128)
    for pair in spec.patch_bonds():
        u = apply_gate(u, gate, pair, n)
    return np.linalg.matrix_power(u, spec.repetitions)
