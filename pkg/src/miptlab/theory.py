"""Self-consistent random-matrix theory for the sandwich-operator spectrum.

The average resolvent trace of P U'PUP, with U the Cayley transform of a
variance-gamma GUE, follows from a two-variable nonlinear system in
(v_plus, v_minus). This module solves that system by Newton iteration
with continuation from the analytically known solution at |lambda| ->
infinity, and derives from it the density of states, its atoms at 0 and
1, spectral moments, and the closed-form asymptotics near both spectral
edges (gap formulas, critical lines, decay-regime predictions).

All densities are normalized per Hilbert-space dimension: the continuum
plus the atom weights integrates to 1.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TheoryParams",
    "SelfConsistentPoint",
    "DecayPrediction",
    "f_pm",
    "solve_vpm",
    "green_trace",
    "analytic_density",
    "atom_weights",
    "haar_density",
    "haar_atoms",
    "near1_gap",
    "near1_density",
    "ansatz_xy",
    "near0_density",
    "near0_gap",
    "gamma_c",
    "moments_theory",
    "moments_cue",
    "moments_from_green",
    "w01_asymptotics_prediction",
]

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class TheoryParams:
    """Fill fraction b, variance scale gamma, and the i*eps regulator."""

    b: float
    gamma: float
    im_shift: float = 1e-7

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError("b must lie strictly between 0 and 1 for the solver")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.im_shift <= 0:
            raise ValueError("im_shift must be positive")

    @property
    def b_bar(self) -> float:
        return 1.0 - self.b


@dataclass(frozen=True)
class SelfConsistentPoint:
    """Solution of the two-variable system at one complex lambda."""

    lam: complex
    v_plus: complex
    v_minus: complex
    f_plus: complex
    f_minus: complex
    residual: float


@dataclass(frozen=True)
class DecayPrediction:
    """Predicted asymptotic regime of a trajectory-probability series."""

    kind: str  # "exponential" | "power_law"
    rate: float | None = None  # decay rate for exponential
    exponent: float | None = None  # power-law exponent


def f_pm(lam: complex):
    """The pair f_pm = (sqrt(lam) -+ 1) / (sqrt(lam) +- 1).

    Principal square-root branch (cut on the negative real axis);
    satisfies f_plus * f_minus = 1. lam = 1 is a pole of f_minus and is
    rejected; callers regulate with lam + i*eps.
    """
    lam = complex(lam)
    if lam == 1.0:
        raise ValueError("f_pm is singular at lambda = 1; use lambda + 1j*eps")
    s = cmath.sqrt(lam)
    return (s - 1.0) / (s + 1.0), (s + 1.0) / (s - 1.0)


def v_infinity(gamma: float) -> float:
    """Common value of v_plus = v_minus at |lambda| -> infinity."""
    return 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * gamma))


def _residual(vp, vm, fp, fm, b, gamma):
    bb = 1.0 - b
    f1 = vp / gamma - bb / (vm + 1.0) - b / (vm + fm)
    f2 = vm / gamma - bb / (vp + 1.0) - b / (vp + fp)
    return f1, f2


def _newton(lam, b, gamma, vp, vm, maxit=60):
    """Newton iteration on the 2x2 system at fixed lambda.

    Returns (vp, vm, residual); the caller decides whether the residual
    is acceptable.
    """
    fp, fm = f_pm(lam)
    bb = 1.0 - b
    best = (vp, vm, np.inf)
    for _ in range(maxit):
        f1, f2 = _residual(vp, vm, fp, fm, b, gamma)
        res = max(abs(f1), abs(f2))
        if res < best[2]:
            best = (vp, vm, res)
        if res < 1e-13:
            break
        j11 = 1.0 / gamma
        j12 = bb / (vm + 1.0) ** 2 + b / (vm + fm) ** 2
        j21 = bb / (vp + 1.0) ** 2 + b / (vp + fp) ** 2
        j22 = 1.0 / gamma
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        dvp = (-f1 * j22 + f2 * j12) / det
        dvm = (-f2 * j11 + f1 * j21) / det
        # Damped step: back off while the residual would blow up.
        step = 1.0
        for _ in range(8):
            tp, tm = vp + step * dvp, vm + step * dvm
            t1, t2 = _residual(tp, tm, fp, fm, b, gamma)
            if max(abs(t1), abs(t2)) < 2.0 * res:
                break
            step *= 0.5
        vp, vm = vp + step * dvp, vm + step * dvm
    f1, f2 = _residual(vp, vm, fp, fm, b, gamma)
    res = max(abs(f1), abs(f2))
    if res < best[2]:
        best = (vp, vm, res)
    return best


def _walk(points, b, gamma, vp, vm, midpoint):
    """Newton-track a waypoint list, bisecting any step that fails."""
    inserts = 0
    i = 0
    cur = None
    while i < len(points):
        nxt = points[i]
        tp, tm, res = _newton(nxt, b, gamma, vp, vm)
        if res <= RESIDUAL_TOL:
            vp, vm, cur = tp, tm, nxt
            i += 1
            continue
        inserts += 1
        if inserts > 500 or cur is None:
            raise RuntimeError(
                f"continuation stalled near lambda = {nxt} (residual {res:.2e})"
            )
        points.insert(i, midpoint(cur, nxt))
    return vp, vm


def _continue_to(lam_target: complex, b: float, gamma: float):
    """Track the physical branch from |lambda| = infinity to lam_target.

    Two legs: first Re(lambda) steps geometrically down from 1e6 at a
    safe imaginary height (where the solution is smooth everywhere),
    then Im(lambda) descends geometrically to its target. A horizontal
    path at the final tiny shift would skim the f_minus pole at
    lambda = 1 and the continuum edges, where Newton hops branches; the
    vertical approach converges to the boundary values stably. Any step
    Newton cannot take is bisected adaptively.
    """
    im_t = lam_target.imag
    re_t = lam_target.real
    if re_t <= 0:
        raise ValueError("continuation path requires Re(lambda) > 0")
    im_high = max(1.0, im_t)

    v0 = v_infinity(gamma)
    re0 = max(1e6, 10.0 * re_t)
    vp, vm, res = _newton(complex(re0, im_high), b, gamma, v0, v0)
    if res > RESIDUAL_TOL:
        raise RuntimeError(f"no convergence at the asymptotic anchor, residual {res:.2e}")

    # Leg 1: geometric ladder in Re at the safe height.
    ratio = 0.8
    res_pts = []
    r = re0 * ratio
    while r > re_t:
        res_pts.append(complex(r, im_high))
        r *= ratio
    res_pts.append(complex(re_t, im_high))
    vp, vm = _walk(
        res_pts, b, gamma, vp, vm,
        lambda a, c: complex(float(np.sqrt(a.real * c.real)), im_high),
    )

    # Leg 2: geometric descent in Im toward the target shift.
    if im_t < im_high:
        im_pts = []
        y = im_high * 0.5
        while y > im_t:
            im_pts.append(complex(re_t, y))
            y *= 0.5
        im_pts.append(complex(re_t, im_t))
        vp, vm = _walk(
            im_pts, b, gamma, vp, vm,
            lambda a, c: complex(re_t, float(np.sqrt(a.imag * c.imag))),
        )
    return vp, vm


def solve_vpm(lam: complex, params: TheoryParams, seed_point: SelfConsistentPoint | None = None) -> SelfConsistentPoint:
    """Solve the self-consistency system at lam (Im(lam) > 0 required).

    The physical branch is pinned by continuation from the exact
    solution at |lambda| = infinity. An optional seed point on the same
    branch short-circuits the path; if Newton fails from the seed the
    full continuation runs instead.
    """
    lam = complex(lam)
    if lam.imag <= 0:
        raise ValueError("solve_vpm requires Im(lambda) > 0; add the i*eps regulator")
    b, gamma = params.b, params.gamma
    if seed_point is not None:
        vp, vm, res = _newton(lam, b, gamma, seed_point.v_plus, seed_point.v_minus)
        if res <= RESIDUAL_TOL:
            fp, fm = f_pm(lam)
            return SelfConsistentPoint(lam, vp, vm, fp, fm, res)
    vp, vm = _continue_to(lam, b, gamma)
    vp, vm, res = _newton(lam, b, gamma, vp, vm)
    if res > RESIDUAL_TOL:
        raise RuntimeError(f"self-consistency residual {res:.2e} at lambda {lam}")
    fp, fm = f_pm(lam)
    return SelfConsistentPoint(lam, vp, vm, fp, fm, res)


def _calF(pt: SelfConsistentPoint, params: TheoryParams) -> complex:
    vp, vm, fp, fm = pt.v_plus, pt.v_minus, pt.f_plus, pt.f_minus
    b, bb, g = params.b, params.b_bar, params.gamma
    return (
        (vm + 1.0) * (vp + 1.0) * (vp + fp) * (vm + fm) / g
        - bb * (vp + fp) * (vm + fm)
        - b * (vm + 1.0) * (vp + 1.0)
    )


def green_trace(lam: complex, params: TheoryParams, point: SelfConsistentPoint | None = None) -> complex:
    """Resolvent trace per dimension, Tr G(lambda) / D.

    Behaves as 1/lambda at large |lambda| (unit total spectral mass).
    """
    pt = point if point is not None else solve_vpm(lam, params)
    lam = pt.lam
    b, bb = params.b, params.b_bar
    calf = _calF(pt, params)
    return (1.0 / lam) * (1.0 + (b / (lam - 1.0)) * (1.0 - 4.0 * bb * lam / ((lam - 1.0) * calf)))


def _density_sweep(grid: np.ndarray, params: TheoryParams, shift: float) -> np.ndarray:
    """-Im Tr G / (pi D) along a real grid at fixed imaginary shift."""
    out = np.empty(grid.size)
    prev = None
    for k, x in enumerate(grid):
        lam = complex(x, shift)
        pt = solve_vpm(lam, params, seed_point=prev)
        out[k] = -green_trace(lam, params, point=pt).imag / np.pi
        prev = pt
    return out


def analytic_density(grid, params: TheoryParams) -> np.ndarray:
    """Continuum density of states on a grid inside (0, 1).

    Evaluated at two imaginary shifts (10*eps and eps) and Richardson-
    extrapolated linearly to the real axis. Atoms at 0 and 1 are not
    part of the returned values; see `atom_weights`. A value below
    -1e-6 signals a branch-tracking error and aborts.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D array")
    if np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise ValueError("grid points must lie strictly inside (0, 1)")
    s2 = params.im_shift
    s1 = 10.0 * s2
    rho1 = _density_sweep(grid, params, s1)
    rho2 = _density_sweep(grid, params, s2)
    rho = (s1 * rho2 - s2 * rho1) / (s1 - s2)
    if np.any(rho < -1e-6):
        bad = grid[int(np.argmin(rho))]
        raise RuntimeError(f"negative density {rho.min():.3e} at lambda = {bad:.6f}")
    return np.maximum(rho, 0.0)


def atom_weights(params: TheoryParams, shift: float = 1e-5):
    """Atom weights at lambda = 0 and lambda = 1 from resolvent residues.

    Computed as lim (lambda - a) Tr G / D with the limit approached
    vertically at two shifts and Richardson-extrapolated.
    """

    def residue(anchor: float) -> float:
        s1, s2 = 10.0 * shift, shift
        vals = []
        for s in (s1, s2):
            # Non-tangential approach; the continuation path needs Re > 0.
            lam = complex(anchor if anchor > 0 else s, s)
            vals.append((lam - anchor) * green_trace(lam, params))
        v1, v2 = vals
        # Extrapolate in sqrt(s): the leading continuum contamination of
        # the residue scales as sqrt(shift) when an edge touches the atom.
        r1, r2 = np.sqrt(s1), np.sqrt(s2)
        return float(((r1 * v2 - r2 * v1) / (r1 - r2)).real)

    atom0 = residue(0.0)
    atom1 = residue(1.0)
    return max(atom0, 0.0), max(atom1, 0.0)


def haar_density(lam, b: float) -> np.ndarray:
    """Continuum density for Haar-random U: support (0, 4*b*(1-b)).

    The full measure adds an atom of weight 1-b at 0 and, when b > 1/2,
    an atom of weight 2b-1 at 1 (see `haar_atoms`).
    """
    lam = np.asarray(lam, dtype=float)
    bb = 1.0 - b
    edge = 4.0 * b * bb
    inside = (lam > 0.0) & (lam < edge)
    out = np.zeros_like(lam)
    lin = lam[inside]
    out[inside] = np.sqrt((edge - lin) / lin) / (2.0 * np.pi * (1.0 - lin))
    return out if out.ndim else float(out)


def haar_atoms(b: float):
    """Atom weights (at 0, at 1) of the Haar-random spectral measure."""
    return 1.0 - b, max(2.0 * b - 1.0, 0.0)


def near1_gap(params: TheoryParams) -> float:
    """Gap between the continuum and lambda = 1: 8*gamma*(1-4b(1-b))/(gamma+2)^2.

    Derived in the vicinity of b = 1/2; a warning is issued outside
    |b - 1/2| <= 0.15 where the expansion degrades.
    """
    if abs(params.b - 0.5) > 0.15:
        warnings.warn(
            "near1_gap is a near-b=1/2 expansion; "
            f"b = {params.b} is outside the calibrated window",
            stacklevel=2,
        )
    g, b = params.gamma, params.b
    return 8.0 * g * (1.0 - 4.0 * b * (1.0 - b)) / (g + 2.0) ** 2


def near1_density(lam, params: TheoryParams) -> np.ndarray:
    """Continuum density close to lambda = 1 (near-b=1/2 expansion).

    Valid for |1 - lambda| << 1; the atom (2b-1) theta(2b-1) at exactly
    1 is not included. At gamma = 2 this reduces to the Haar form.
    """
    lam = np.asarray(lam, dtype=float)
    g = params.gamma
    lam_star = near1_gap(params)
    coeff = (g + 2.0) / (4.0 * np.pi * np.sqrt(2.0 * g))
    arg = 1.0 - lam_star - lam
    inside = (lam > 0.0) & (arg > 0.0)
    out = np.zeros_like(lam)
    out[inside] = coeff * np.sqrt(arg[inside]) / (1.0 - lam[inside])
    return out if out.ndim else float(out)


def ansatz_xy(params: TheoryParams):
    """Coefficients (x, y) of the v_minus ansatz near lambda = 1.

    v_minus -> f_minus*x + sqrt(f_minus^2 x^2 + f_minus*y) as lambda -> 1.
    x vanishes at b = 1/2 where the closed form for y degenerates to a
    0/0; that limit evaluates to y = gamma/2 and is used for
    |b - 1/2| < 1e-6.
    """
    b, bb, g = params.b, params.b_bar, params.gamma
    x = 0.25 * (-(g * bb + 1.0) + np.sqrt((g * bb - 1.0) ** 2 + 4.0 * g * b))
    if abs(b - 0.5) < 1e-6:
        return x, g / 2.0
    y = -x * (2.0 * b + bb * (g * b - 1.0 + np.sqrt(4.0 * g * bb + (g * b - 1.0) ** 2))) / (bb - b)
    return x, y


def near0_gap(gamma: float) -> float:
    """Gap above lambda = 0 at b = 1/2: (4/27)(1-gamma)^3 (zero for gamma >= 1)."""
    return max((4.0 / 27.0) * (1.0 - gamma) ** 3, 0.0)


def near0_density(lam, gamma: float) -> np.ndarray:
    """Continuum density near lambda = 0 at b = 1/2.

    Gapped (gamma < 1): (9 / (4 pi (1-gamma)^{5/2})) sqrt(lam - lam0*)
    above the gap lam0* = (4/27)(1-gamma)^3.
    Gapless (gamma > 1): (1/pi) sqrt((gamma-1)/lam).
    Critical (gamma = 1): (sqrt(3)/(2 pi)) lam^{-1/3}.
    The atom of weight 1/2 at exactly 0 is reported separately.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    out = np.zeros_like(lam)
    if gamma < 1.0:
        lam0 = near0_gap(gamma)
        inside = lam > lam0
        out[inside] = 9.0 / (4.0 * np.pi * (1.0 - gamma) ** 2.5) * np.sqrt(lam[inside] - lam0)
    elif gamma > 1.0:
        inside = lam > 0
        out[inside] = np.sqrt((gamma - 1.0) / lam[inside]) / np.pi
    else:
        inside = lam > 0
        out[inside] = np.sqrt(3.0) / (2.0 * np.pi) * lam[inside] ** (-1.0 / 3.0)
    return out if out.ndim else float(out)


def gamma_c(b: float) -> float:
    """Critical scrambling strength of the near-0 transition.

    (1/2 - sqrt(b(1-b))) / (b - 1/2)^2, continuous across b = 1/2 where
    the 0/0 limit equals 1. Symmetric under b <-> 1 - b.
    """
    if not 0.0 < b < 1.0:
        raise ValueError("b must lie strictly between 0 and 1")
    d = b - 0.5
    if abs(d) < 1e-6:
        return 1.0 + d * d
    return (0.5 - np.sqrt(b * (1.0 - b))) / (d * d)


def moments_theory(params: TheoryParams):
    """Closed-form moments (a_0, a_1) of the density of states."""
    b, bb, g = params.b, params.b_bar, params.gamma
    a1 = b * (1.0 - 32.0 * g * bb / (1.0 + np.sqrt(1.0 + 4.0 * g)) ** 3)
    return 1.0, a1


def moments_cue(b: float):
    """Moments (a_2, a_3) in the maximally scrambling case gamma = 2."""
    a2 = b**3 * (2.0 - b)
    a3 = b**4 * (2.0 * b * b - 6.0 * b + 5.0)
    return a2, a3


def moments_from_green(params: TheoryParams, k_max: int, radius: float = 10.0, points: int = 512):
    """Moments a_0..a_k extracted from Tr G on the circle |lambda| = radius.

    Contour integration via full-period trapezoid (spectrally accurate
    for the analytic integrand); the lower half-circle is obtained by
    Schwarz reflection. Avoids the cancellation of direct large-lambda
    fitting.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if radius <= 1.0:
        raise ValueError("radius must exceed the spectral support (> 1)")
    b, gamma = params.b, params.gamma
    # Anchor on the positive real axis (no cut outside [0, 1]).
    v0 = v_infinity(gamma)
    vp, vm, res = _newton(complex(radius, 0.0), b, gamma, v0, v0)
    if res > RESIDUAL_TOL:
        raise RuntimeError("no convergence at the contour anchor")
    half = points // 2
    thetas = np.linspace(0.0, np.pi, half + 1)
    g_vals = np.empty(half + 1, dtype=np.complex128)
    for k, th in enumerate(thetas):
        lam = radius * np.exp(1j * th)
        vp, vm, res = _newton(lam, b, gamma, vp, vm)
        if res > RESIDUAL_TOL:
            raise RuntimeError(f"contour tracking failed at theta = {th:.4f}")
        fp, fm = f_pm(lam)
        pt = SelfConsistentPoint(lam, vp, vm, fp, fm, res)
        g_vals[k] = green_trace(lam, params, point=pt)
    lam_grid = radius * np.exp(1j * thetas)
    moments = []
    for k in range(k_max + 1):
        integrand = g_vals * lam_grid ** (k + 1)
        # Full-circle trapezoid: interior points count twice via conjugate.
        total = integrand[0].real + integrand[-1].real + 2.0 * integrand[1:-1].real.sum()
        moments.append(float(total / (2 * half)))
    return np.array(moments)


def w01_asymptotics_prediction(params: TheoryParams) -> DecayPrediction:
    """Predicted large-d regime of the alternating-outcome probability.

    Below the critical scrambling gamma_c(b) the decay is exponential at
    the near-0 gap rate (closed form at b = 1/2); at gamma_c it is a
    power law with exponent 1/3, above it a power law with exponent 1/2.
    """
    gc = gamma_c(params.b)
    if params.gamma < gc:
        rate = near0_gap(params.gamma) if abs(params.b - 0.5) < 1e-9 else None
        return DecayPrediction("exponential", rate=rate)
    if params.gamma == gc:
        return DecayPrediction("power_law", exponent=1.0 / 3.0)
    return DecayPrediction("power_law", exponent=0.5)
