"""Spectral observables: atoms, gaps, moments, histograms, trajectories.

Everything here consumes eigenvalue arrays (ascending) produced by the
measurement operators. Trajectory probabilities w(d) = Tr[L^d rho0] are
evaluated through the support-block eigendecomposition, which is exact
for all d at once; with that convention w(0) = Tr[P rho0], the single-
measurement acceptance probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .measurement import SandwichOperator

__all__ = [
    "atom_density",
    "continuum_edge_and_gap",
    "empirical_moments",
    "SpectrumSummary",
    "summarize_spectrum",
    "SpectralHistogram",
    "TrajectorySeries",
    "trajectory_probability",
    "DecayClassification",
    "classify_decay",
    "unitary_subspace_dimension",
]

DEFAULT_ATOM_EPS = 1e-3


def atom_density(spectrum, at: float, eps: float = DEFAULT_ATOM_EPS) -> float:
    """Fraction of eigenvalues within [at - eps, at + eps]."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    values = np.asarray(spectrum, dtype=float)
    n = int(np.count_nonzero((values >= at - eps) & (values <= at + eps)))
    return n / values.size


def continuum_edge_and_gap(spectrum, eps: float = DEFAULT_ATOM_EPS):
    """Largest eigenvalue below the lambda = 1 window, and 1 minus it.

    Returns (0.0, 1.0) when no eigenvalue lies below 1 - eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    values = np.asarray(spectrum, dtype=float)
    below = values[values < 1.0 - eps]
    edge = float(below.max()) if below.size else 0.0
    return edge, 1.0 - edge


def empirical_moments(spectrum, k_max: int) -> np.ndarray:
    """Moments a_k = mean(lambda^k) for k = 0..k_max (a_0 is always 1)."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    values = np.asarray(spectrum, dtype=float)
    return np.array([np.mean(values**k) for k in range(k_max + 1)])


@dataclass(frozen=True)
class SpectrumSummary:
    atom0: float
    atom1: float
    continuum_edge: float
    gap: float
    moments: np.ndarray


def summarize_spectrum(spectrum, eps: float = DEFAULT_ATOM_EPS, k_max: int = 3) -> SpectrumSummary:
    edge, gap = continuum_edge_and_gap(spectrum, eps)
    return SpectrumSummary(
        atom0=atom_density(spectrum, 0.0, eps),
        atom1=atom_density(spectrum, 1.0, eps),
        continuum_edge=edge,
        gap=gap,
        moments=empirical_moments(spectrum, k_max),
    )


@dataclass
class SpectralHistogram:
    """Ensemble-accumulated histogram on [0, 1] with separated atoms.

    Eigenvalues within eps of 0 or 1 go to dedicated atom counters so
    the delta peaks never distort the continuum bins; everything else is
    binned on the uniform edges. Merging adds counts and realization
    tallies, so any reduction order gives the same result.
    """

    edges: np.ndarray
    counts: np.ndarray
    atom0_count: int
    atom1_count: int
    dim: int
    realizations: int
    eps_atom: float

    @classmethod
    def empty(cls, bins: int, dim: int, eps_atom: float = DEFAULT_ATOM_EPS) -> "SpectralHistogram":
        if bins < 1:
            raise ValueError("bins must be >= 1")
        return cls(
            edges=np.linspace(0.0, 1.0, bins + 1),
            counts=np.zeros(bins, dtype=np.int64),
            atom0_count=0,
            atom1_count=0,
            dim=dim,
            realizations=0,
            eps_atom=eps_atom,
        )

    def add_spectrum(self, spectrum) -> None:
        values = np.asarray(spectrum, dtype=float)
        if values.size != self.dim:
            raise ValueError(f"expected {self.dim} eigenvalues, got {values.size}")
        eps = self.eps_atom
        at0 = (values >= -eps) & (values <= eps)
        at1 = (values >= 1.0 - eps) & (values <= 1.0 + eps)
        self.atom0_count += int(np.count_nonzero(at0))
        self.atom1_count += int(np.count_nonzero(at1))
        rest = np.clip(values[~(at0 | at1)], 0.0, 1.0)
        idx = np.minimum(np.searchsorted(self.edges, rest, side="right") - 1, self.counts.size - 1)
        np.add.at(self.counts, idx, 1)
        self.realizations += 1

    def merge(self, other: "SpectralHistogram") -> "SpectralHistogram":
        if (
            other.dim != self.dim
            or other.eps_atom != self.eps_atom
            or not np.array_equal(other.edges, self.edges)
        ):
            raise ValueError("histograms have incompatible shapes")
        return SpectralHistogram(
            edges=self.edges.copy(),
            counts=self.counts + other.counts,
            atom0_count=self.atom0_count + other.atom0_count,
            atom1_count=self.atom1_count + other.atom1_count,
            dim=self.dim,
            realizations=self.realizations + other.realizations,
            eps_atom=self.eps_atom,
        )

    @property
    def total_count(self) -> int:
        return int(self.counts.sum()) + self.atom0_count + self.atom1_count

    def densities(self) -> np.ndarray:
        """Per-bin continuum density, count / (realizations * dim * width)."""
        if self.realizations == 0:
            return np.zeros_like(self.counts, dtype=float)
        widths = np.diff(self.edges)
        return self.counts / (self.realizations * self.dim * widths)

    def atom_fractions(self):
        if self.realizations == 0:
            return 0.0, 0.0
        norm = self.realizations * self.dim
        return self.atom0_count / norm, self.atom1_count / norm


@dataclass(frozen=True)
class TrajectorySeries:
    """Sampled trajectory probabilities w(d) for ascending d."""

    d: np.ndarray
    w: np.ndarray
    rho0: str

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=int))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if self.d.size != self.w.size:
            raise ValueError("d and w must have matching lengths")


def _rho0_weights(op: SandwichOperator, rho0, vecs: np.ndarray) -> np.ndarray:
    """Diagonal weights <v_i|rho0|v_i> over the support-block eigenbasis."""
    rank, dim = op.rank, op.dim
    if isinstance(rho0, str):
        if rho0 == "maximally_mixed":
            return np.full(rank, 1.0 / dim)
        if rho0 == "projector_normalized":
            return np.full(rank, 1.0 / (op.b * dim))
        raise ValueError(f"unknown rho0 descriptor {rho0!r}")
    if isinstance(rho0, (int, np.integer)):
        if not 0 <= rho0 < dim:
            raise ValueError("pure-state index out of range")
        return np.abs(vecs[int(rho0), :]) ** 2
    mat = np.asarray(rho0, dtype=np.complex128)
    if mat.shape != (dim, dim):
        raise ValueError(f"rho0 must be {dim}x{dim}")
    tr = complex(np.trace(mat))
    if abs(tr - 1.0) > 1e-12:
        raise ValueError(f"rho0 is not normalized: trace = {tr}")
    return np.einsum("di,dc,ci->i", vecs.conj(), mat, vecs).real


def _rho0_label(rho0) -> str:
    if isinstance(rho0, str):
        return rho0
    if isinstance(rho0, (int, np.integer)):
        return f"pure_state({int(rho0)})"
    return "explicit_matrix"


def trajectory_probability(op: SandwichOperator, rho0, d_list) -> TrajectorySeries:
    """w(d) = Tr[L^d rho0] from the support-block eigendecomposition.

    Exact for every requested d simultaneously (no repeated dense
    powers). Since all dynamics happens inside the support block,
    w(0) evaluates to Tr[P rho0].
    """
    d = np.asarray(d_list, dtype=int)
    if d.size == 0:
        raise ValueError("d_list must be nonempty")
    if np.any(d < 0):
        raise ValueError("d values must be nonnegative")
    if np.any(np.diff(d) <= 0):
        raise ValueError("d values must be strictly ascending")
    w_vals, vecs = op.eigensystem()
    weights = _rho0_weights(op, rho0, vecs)
    lam = np.clip(w_vals, 0.0, None)  # guards -1e-16 roundoff under powers
    powers = lam[:, None] ** d[None, :]
    series = powers.T @ weights
    return TrajectorySeries(d=d, w=series, rho0=_rho0_label(rho0))


@dataclass(frozen=True)
class DecayClassification:
    """Fitted large-d regime of a trajectory series.

    For exponential-type decay, `rate` is the fitted continuous rate s
    in w ~ exp(-s d) and `gap_estimate` = 1 - exp(-s) is the implied
    spectral gap (the per-cycle decay factor is exp(-s) = 1 - gap).
    """

    regime: str  # "exponential" | "power_law" | "saturating"
    rate: float | None = None
    exponent: float | None = None
    w_inf: float | None = None
    gap_estimate: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _lin_fit(x, y):
    coef = np.polyfit(x, y, 1)
    return coef, np.polyval(coef, x)


def classify_decay(series: TrajectorySeries) -> DecayClassification:
    """Pick exponential / power-law / saturating by goodness of fit.

    All three model curves are compared in log-w space over a common
    late window (the first third of the points is treated as transient
    and dropped): a line in d, a line in log d, and the plateau model
    w_inf + A exp(-s d) with w_inf taken from the tail mean. Lowest
    mean-squared residual wins; ties within a 5% margin go to
    saturating when the tail slope is statistically zero (two-sided
    t-test at 5%).
    """
    mask = series.d > 0
    d = series.d[mask].astype(float)
    w = series.w[mask]
    if d.size < 12:
        raise ValueError("need at least 12 points with d >= 1 to classify")
    if d.max() < 10.0 * d.min():
        raise ValueError("d values must span at least one decade")
    if np.any(w <= 0.0):
        raise ValueError("nonpositive w values in the fit window (numerical underflow?)")

    n = d.size
    start = n // 3
    dw, ww = d[start:], w[start:]
    log_ww = np.log(ww)

    n_tail = max(4, n // 4)
    tail_d, tail_w = d[-n_tail:], w[-n_tail:]
    w_inf_hat = float(np.mean(tail_w))
    noise = max(float(np.std(tail_w)), 1e-300)
    tail_fit = stats.linregress(tail_d, np.log(tail_w))

    coef_exp, pred_exp = _lin_fit(dw, log_ww)
    mse_exp = float(np.mean((log_ww - pred_exp) ** 2))
    coef_pow, pred_pow = _lin_fit(np.log(dw), log_ww)
    mse_pow = float(np.mean((log_ww - pred_pow) ** 2))

    body = w - w_inf_hat
    valid = (body > 3.0 * noise) & (np.arange(n) < n - n_tail) & (np.arange(n) >= start)
    if np.count_nonzero(valid) >= 4:
        coef_sat, _ = _lin_fit(d[valid], np.log(body[valid]))
        pred_sat = np.log(w_inf_hat + np.exp(np.polyval(coef_sat, dw)))
        mse_sat = float(np.mean((log_ww - pred_sat) ** 2))
    else:
        coef_sat, mse_sat = (0.0, 0.0), np.inf

    mses = {"exponential": mse_exp, "power_law": mse_pow, "saturating": mse_sat}
    best = min(mses, key=mses.get)
    tie = {name for name, m in mses.items() if m <= 1.05 * mses[best] + 1e-300}
    if len(tie) > 1:
        if tail_fit.pvalue > 0.05 and w_inf_hat > 0:
            best = "saturating"
        else:
            tie.discard("saturating")
            best = min(tie, key=mses.get)

    diag = {
        "mse": mses,
        "n_points": int(n),
        "n_tail": int(n_tail),
        "tail_slope_pvalue": float(tail_fit.pvalue),
        "fit_window": (float(dw.min()), float(dw.max())),
    }

    if best == "power_law":
        eta = -float(coef_pow[0])
        return DecayClassification("power_law", exponent=eta, diagnostics=diag)

    if best == "saturating":
        s = -float(coef_sat[0])
        return DecayClassification(
            "saturating",
            rate=s,
            w_inf=w_inf_hat,
            gap_estimate=1.0 - np.exp(-s),
            diagnostics=diag,
        )

    # Refined exponential: allow a power-law prefactor, w ~ A d^-p e^(-s d),
    # so the reported rate is not biased by the edge-induced d^(-3/2) factor.
    design = np.column_stack([np.ones_like(dw), -dw, -np.log(dw)])
    sol, *_ = np.linalg.lstsq(design, log_ww, rcond=None)
    s = float(sol[1])
    if s <= 0:  # degenerate data; keep the plain fit
        s = -float(coef_exp[0])
    diag["prefactor_power"] = float(sol[2])
    return DecayClassification(
        "exponential", rate=s, gap_estimate=1.0 - np.exp(-s), diagnostics=diag
    )


def unitary_subspace_dimension(u, proj, n_max: int, eps: float = DEFAULT_ATOM_EPS):
    """Count near-1 eigenvalues of (W^dag)^n W^n for n = 1..n_max.

    A nonvanishing count surviving n -> infinity would signal a subspace
    with exactly unitary dynamics; the counts decrease with n instead.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    from . import measurement as _m
    from .linalg import hermitian_eigenvalues

    if proj.rank == 0:
        return [0] * n_max
    w = _m._checked_submatrix(u, proj, "auto")
    counts = []
    wn = np.eye(proj.rank, dtype=np.complex128)
    for _ in range(n_max):
        wn = wn @ w
        g = wn.conj().T @ wn
        vals = hermitian_eigenvalues((g + g.conj().T) / 2.0)
        counts.append(int(np.count_nonzero((vals >= 1.0 - eps) & (vals <= 1.0 + eps))))
    return counts
