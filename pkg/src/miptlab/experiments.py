"""Declarative experiment runner: sweeps, aggregation, file emission.

A run is described by an `ExperimentConfig` (JSON-friendly, every field
defaulted, unknown keys rejected). Realization i always uses the seed
pair (master, stream_i); workers share nothing but the immutable
config, and the coordinator reduces results in realization order so the
emitted bytes do not depend on the worker count. Histogram CSV, summary
JSON, and trajectory CSV are the data files; the manifest echoes the
effective config, the RNG algorithm, per-cell statistics, and SHA-256
checksums of everything emitted.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__
from .chain import ChainSpec, build_chain_unitary
from .ensembles import RNG_ALGORITHM, EnsembleParams, RngSeed, sample_unitary
from .grid import GridSpec, build_grid_unitary, default_measured_qubits
from .measurement import Projector, build_projector, lambda_01, lambda_p, lambda_p_n, projector_from_qubits
from .spectral import SpectralHistogram, TrajectorySeries, classify_decay
from . import theory

__all__ = ["ExperimentConfig", "ConfigError", "RunManifest", "run", "merge"]

MODES = ("rmt", "chain1d", "grid2d", "theory", "trajectory", "sweep")

_CHAIN_PROJECTOR_DEFAULTS = {
    Fraction(1, 2): ((0,), ("0",)),
    Fraction(1, 4): ((0, 1), ("00",)),
    Fraction(3, 4): ((0, 1), ("00", "01", "10")),
}


class ConfigError(ValueError):
    """Invalid experiment configuration (reported with the field name)."""


def _parse_fraction(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value).limit_denominator(1 << 20)


@dataclass
class ExperimentConfig:
    """Everything a run needs; every field has a default."""

    mode: str = "rmt"
    # ensemble / operator
    dim: int = 1024
    gamma: float = 2.0
    b: float | str = "1/2"
    ensemble: str = "cayley_gue"
    operator: str = "lambda_p"  # lambda_p | lambda01 | lambda_p_n
    n_power: int = 1
    # 1D chain
    length: int = 11
    layers: int = 4
    theta: float | None = None  # defaults: pi/6 (chain), pi/8 (grid)
    phi: float = 2.0 * np.pi / 3.0
    beta: float = 0.0
    measured: list | None = None
    accepted: list | None = None
    # 2D grid
    rows: int = 3
    cols: int = 4
    repetitions: int = 20
    accepted_count: int = 4
    randomize_sites: bool = True
    # accumulation
    realizations: int = 40
    bins: int = 100
    eps_atom: float = 1e-3
    k_max: int = 3
    bootstrap_resamples: int = 200
    # trajectory
    rho0: str = "maximally_mixed"
    d_list: list | None = None
    # theory grid
    grid_points: int = 400
    lambda_min: float = 1e-3
    lambda_max: float = 1.0 - 1e-3
    im_shift: float = 1e-7
    # sweep
    b_values: list | None = None
    gamma_values: list | None = None
    # run control
    seed: int = 0
    out_dir: str = "miptlab_out"
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        if self.operator not in ("lambda_p", "lambda01", "lambda_p_n"):
            raise ConfigError(f"unknown operator {self.operator!r}")
        if self.ensemble not in ("cayley_gue", "haar"):
            raise ConfigError(f"unknown ensemble {self.ensemble!r}")
        if not 1 <= self.accepted_count <= 7:
            raise ConfigError("accepted_count must be in 1..7")
        if self.mode == "sweep" and not self.b_values:
            raise ConfigError("sweep mode needs b_values")
        if self.mode == "trajectory" and self.rho0 not in (
            "maximally_mixed",
            "projector_normalized",
        ):
            raise ConfigError(
                f"trajectory mode supports descriptor rho0 only, got {self.rho0!r}"
            )
        try:
            bf = _parse_fraction(self.b)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad b value {self.b!r}: {exc}") from None
        if not 0 <= bf <= 1:
            raise ConfigError("b must lie in [0, 1]")

    def b_fraction(self) -> Fraction:
        return _parse_fraction(self.b)

    def effective_theta(self) -> float:
        if self.theta is not None:
            return float(self.theta)
        return float(np.pi / 8 if self.mode == "grid2d" else np.pi / 6)

    def default_d_list(self) -> np.ndarray:
        if self.d_list is not None:
            return np.asarray(self.d_list, dtype=int)
        ds = np.unique(np.round(np.geomspace(1, 500, 48)).astype(int))
        return np.concatenate([[0], ds])

    def to_jsonable(self) -> dict:
        out = dataclasses.asdict(self)
        out["b"] = str(self.b)
        return out


@dataclass
class RunManifest:
    config: dict
    version: str
    rng_algorithm: str
    wall_time_s: float
    cells: list
    checksums: dict
    exit_code: int

    def to_jsonable(self) -> dict:
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# per-realization work


def _chain_projector(cfg: ExperimentConfig) -> Projector:
    if cfg.measured is not None:
        if not cfg.accepted:
            raise ConfigError("accepted must be given alongside measured")
        return projector_from_qubits(cfg.length, cfg.measured, cfg.accepted)
    bf = cfg.b_fraction()
    try:
        measured, accepted = _CHAIN_PROJECTOR_DEFAULTS[bf]
    except KeyError:
        raise ConfigError(
            f"no default qubit projector for b = {bf}; give measured/accepted explicitly"
        ) from None
    return projector_from_qubits(cfg.length, measured, accepted)


def _build_operator(u, proj: Projector, cfg: ExperimentConfig):
    if cfg.operator == "lambda_p":
        return lambda_p(u, proj, check_unitary=False)
    if cfg.operator == "lambda01":
        return lambda_01(u, proj, check_unitary=False)
    return lambda_p_n(u, proj, cfg.n_power, check_unitary=False)


_GRID_U_CACHE: dict[tuple, np.ndarray] = {}


def _grid_unitary_cached(rows: int, cols: int, reps: int, theta: float) -> np.ndarray:
    key = (rows, cols, reps, theta)
    if key not in _GRID_U_CACHE:
        _GRID_U_CACHE.clear()  # keep at most one dense U per worker
        spec = GridSpec(rows=rows, cols=cols, repetitions=reps, theta=theta)
        _GRID_U_CACHE[key] = build_grid_unitary(spec)
    return _GRID_U_CACHE[key]


def _grid_projector(cfg: ExperimentConfig, rng: np.random.Generator) -> Projector:
    n = cfg.rows * cfg.cols
    if cfg.measured is not None:
        sites = tuple(sorted(int(q) for q in cfg.measured))
    elif cfg.randomize_sites:
        all_sites = np.arange(n)
        while True:
            pick = np.sort(rng.choice(all_sites, size=3, replace=False))
            rc = [(q // cfg.cols, q % cfg.cols) for q in pick]
            adjacent = any(
                abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
                for i, a in enumerate(rc)
                for b in rc[i + 1 :]
            )
            if not adjacent:
                sites = tuple(int(q) for q in pick)
                break
    else:
        sites = default_measured_qubits(cfg.rows, cfg.cols)
    patterns = rng.choice(8, size=cfg.accepted_count, replace=False)
    accepted = [format(p, "03b") for p in sorted(patterns)]
    return projector_from_qubits(n, sites, accepted)


def _realization(cfg: ExperimentConfig, index: int, b: Fraction, gamma: float) -> dict:
    seed = RngSeed(cfg.seed, index)
    if cfg.mode in ("rmt", "trajectory", "sweep"):
        rank = int(b * cfg.dim) if (b * cfg.dim).denominator == 1 else round(float(b) * cfg.dim)
        proj = build_projector(cfg.dim, rank)
        params = EnsembleParams(cfg.dim, gamma, cfg.ensemble)
        u = sample_unitary(params, seed)
    elif cfg.mode == "chain1d":
        spec = ChainSpec(
            length=cfg.length,
            layers=cfg.layers,
            theta=cfg.effective_theta(),
            phi=cfg.phi,
            beta=cfg.beta,
            seed=seed,
        )
        u = build_chain_unitary(spec)
        proj = _chain_projector(cfg)
    elif cfg.mode == "grid2d":
        u = _grid_unitary_cached(cfg.rows, cfg.cols, cfg.repetitions, cfg.effective_theta())
        proj = _grid_projector(cfg, seed.generator())
    else:
        raise ConfigError(f"mode {cfg.mode} has no realizations")
    op = _build_operator(u, proj, cfg)
    from .linalg import hermitian_eigenvalues

    block = hermitian_eigenvalues(op.block) if op.rank else np.zeros(0)
    return {"block": block, "dim": op.dim, "rank": op.rank}


def _worker(args):
    cfg_dict, index, b_str, gamma = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    try:
        result = _realization(cfg, index, Fraction(b_str), gamma)
        return index, result
    except Exception as exc:  # noqa: BLE001 - cell failure is data, run continues
        return index, {"error": f"{type(exc).__name__}: {exc}"}


# ---------------------------------------------------------------------------
# aggregation


def merge(hist_a: SpectralHistogram, hist_b: SpectralHistogram) -> SpectralHistogram:
    """Commutative, associative merge of two ensemble histograms."""
    return hist_a.merge(hist_b)


def _full_spectrum(rec: dict) -> np.ndarray:
    zeros = np.zeros(rec["dim"] - rec["rank"])
    return np.sort(np.concatenate([zeros, rec["block"]]))


@dataclass
class _CellAggregate:
    hist: SpectralHistogram
    edges_seen: list = field(default_factory=list)
    atom0: list = field(default_factory=list)
    atom1: list = field(default_factory=list)
    moments: list = field(default_factory=list)

    def add(self, rec: dict, eps: float, k_max: int) -> None:
        spectrum = _full_spectrum(rec)
        self.hist.add_spectrum(spectrum)
        from .spectral import atom_density, continuum_edge_and_gap, empirical_moments

        self.atom0.append(atom_density(spectrum, 0.0, eps))
        self.atom1.append(atom_density(spectrum, 1.0, eps))
        self.edges_seen.append(continuum_edge_and_gap(spectrum, eps)[0])
        self.moments.append(empirical_moments(spectrum, k_max))

    def summary(self, rng: np.random.Generator, resamples: int) -> dict:
        atom0 = np.array(self.atom0)
        atom1 = np.array(self.atom1)
        edges = np.array(self.edges_seen)
        moments = np.array(self.moments)
        n = atom0.size
        if n == 0:
            nan = float("nan")
            return {
                "atom0": nan, "atom1": nan, "continuum_edge": nan, "gap": nan,
                "moments": [], "realizations": 0, "stderr": {},
            }
        idx = rng.integers(0, n, size=(resamples, n))
        boot = {
            "atom0": float(np.std(atom0[idx].mean(axis=1))),
            "atom1": float(np.std(atom1[idx].mean(axis=1))),
            "gap": float(np.std(1.0 - edges[idx].max(axis=1))),
            "moments": [float(s) for s in np.std(moments[idx].mean(axis=1), axis=0)],
        }
        edge = float(edges.max())
        return {
            "atom0": float(atom0.mean()),
            "atom1": float(atom1.mean()),
            "continuum_edge": edge,
            "gap": 1.0 - edge,
            "moments": [float(m) for m in moments.mean(axis=0)],
            "realizations": int(n),
            "stderr": boot,
        }


def _map_realizations(cfg: ExperimentConfig, cells):
    """Run every (cell, realization) and yield results grouped by cell.

    Streams are assigned as cell_index * realizations + i, so a sweep is
    reproducible regardless of how cells are chunked across workers.
    """
    jobs = []
    for c_idx, (b, gamma) in enumerate(cells):
        for i in range(cfg.realizations):
            stream = c_idx * cfg.realizations + i
            jobs.append((cfg.to_jsonable(), stream, str(b), gamma))
    if cfg.workers > 1:
        with get_context("fork").Pool(cfg.workers) as pool:
            raw = dict(pool.imap_unordered(_worker, jobs, chunksize=1))
    else:
        raw = dict(_worker(j) for j in jobs)
    grouped = []
    for c_idx in range(len(cells)):
        base = c_idx * cfg.realizations
        grouped.append([raw[base + i] for i in range(cfg.realizations)])
    return grouped


# ---------------------------------------------------------------------------
# emission


def _write_bytes(path: Path, data: str, checksums: dict) -> None:
    payload = data.encode()
    path.write_bytes(payload)
    checksums[path.name] = hashlib.sha256(payload).hexdigest()


def _fmt(x) -> str:
    """Shortest round-trip decimal of a float (plain, deterministic)."""
    return repr(float(x))


def _histogram_csv(hist: SpectralHistogram) -> str:
    lines = ["bin_left,bin_right,count,density"]
    dens = hist.densities()
    for left, right, count, rho in zip(hist.edges[:-1], hist.edges[1:], hist.counts, dens):
        lines.append(f"{_fmt(left)},{_fmt(right)},{int(count)},{_fmt(rho)}")
    a0, a1 = hist.atom_fractions()
    lines.append(f"0.0,0.0,{hist.atom0_count},{_fmt(a0)}")
    lines.append(f"1.0,1.0,{hist.atom1_count},{_fmt(a1)}")
    return "\n".join(lines) + "\n"


def _trajectory_csv(d, w_mean, w_err) -> str:
    lines = ["d,w_mean,w_stderr"]
    for dd, wm, we in zip(d, w_mean, w_err):
        lines.append(f"{int(dd)},{_fmt(wm)},{_fmt(we)}")
    return "\n".join(lines) + "\n"


def _density_csv(grid, rho) -> str:
    lines = ["lambda,density"]
    for x, r in zip(grid, rho):
        lines.append(f"{_fmt(x)},{_fmt(r)}")
    return "\n".join(lines) + "\n"


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# run driver


def run(cfg: ExperimentConfig) -> RunManifest:
    """Execute one experiment; returns the manifest (also written to disk)."""
    cfg.validate()
    t0 = time.monotonic()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checksums: dict[str, str] = {}
    cells_report: list[dict] = []
    exit_code = 0

    if cfg.mode == "theory":
        _run_theory(cfg, out, checksums)
        cells_report.append({"cell": "theory", "realizations_done": 0, "failed": 0})
    elif cfg.mode == "sweep":
        exit_code = _run_sweep(cfg, out, checksums, cells_report)
    elif cfg.mode == "trajectory":
        exit_code = _run_trajectory(cfg, out, checksums, cells_report)
    else:
        exit_code = _run_ensemble(cfg, out, checksums, cells_report)

    manifest = RunManifest(
        config=cfg.to_jsonable(),
        version=__version__,
        rng_algorithm=RNG_ALGORITHM,
        wall_time_s=time.monotonic() - t0,
        cells=cells_report,
        checksums=checksums,
        exit_code=exit_code,
    )
    (out / "manifest.json").write_text(_json_dumps(manifest.to_jsonable()))
    return manifest


def _collect_cell(cfg, results, cells_report, name, dim):
    """Fold one cell's realization records into an aggregate, in order."""
    agg = _CellAggregate(hist=SpectralHistogram.empty(cfg.bins, dim, cfg.eps_atom))
    failed = 0
    errors = []
    records = []
    for rec in results:
        if "error" in rec:
            failed += 1
            if len(errors) < 3:
                errors.append(rec["error"])
            continue
        agg.add(rec, cfg.eps_atom, cfg.k_max)
        records.append(rec)
    report = {"cell": name, "realizations_done": len(records), "failed": failed}
    if errors:
        report["errors"] = errors
    cells_report.append(report)
    return agg, records, failed


def _run_ensemble(cfg, out, checksums, cells_report) -> int:
    b = cfg.b_fraction()
    dim = cfg.dim if cfg.mode in ("rmt", "trajectory") else (
        1 << cfg.length if cfg.mode == "chain1d" else 1 << (cfg.rows * cfg.cols)
    )
    grouped = _map_realizations(cfg, [(b, cfg.gamma)])
    agg, _, failed = _collect_cell(cfg, grouped[0], cells_report, cfg.mode, dim)
    rng = RngSeed(cfg.seed, 0xB00F).generator()
    summary = agg.summary(rng, cfg.bootstrap_resamples)
    summary.update({"mode": cfg.mode, "dim": dim, "b": str(b), "gamma": cfg.gamma})
    _write_bytes(out / "histogram.csv", _histogram_csv(agg.hist), checksums)
    _write_bytes(out / "summary.json", _json_dumps(summary), checksums)
    return 2 if failed else 0


def _run_trajectory(cfg, out, checksums, cells_report) -> int:
    b = cfg.b_fraction()
    d = cfg.default_d_list()
    grouped = _map_realizations(cfg, [(b, cfg.gamma)])
    agg, records, failed = _collect_cell(cfg, grouped[0], cells_report, "trajectory", cfg.dim)
    series = []
    for rec in records:
        lam = np.clip(rec["block"], 0.0, None)
        if cfg.rho0 == "maximally_mixed":
            weights = np.full(lam.size, 1.0 / rec["dim"])
        elif cfg.rho0 == "projector_normalized":
            weights = np.full(lam.size, 1.0 / rec["rank"])
        else:
            raise ConfigError(f"trajectory mode supports descriptor rho0 only, got {cfg.rho0!r}")
        series.append((lam[:, None] ** d[None, :]).T @ weights)
    series = np.array(series)
    w_mean = series.mean(axis=0)
    w_err = series.std(axis=0) / np.sqrt(series.shape[0])
    summary = {
        "mode": "trajectory",
        "dim": cfg.dim,
        "b": str(b),
        "gamma": cfg.gamma,
        "operator": cfg.operator,
        "rho0": cfg.rho0,
        "realizations": int(series.shape[0]),
    }
    try:
        cls = classify_decay(TrajectorySeries(d=d, w=w_mean, rho0=cfg.rho0))
        summary["classification"] = {
            "regime": cls.regime,
            "rate": cls.rate,
            "exponent": cls.exponent,
            "w_inf": cls.w_inf,
            "gap_estimate": cls.gap_estimate,
        }
    except ValueError as exc:
        summary["classification"] = {"error": str(exc)}
    _write_bytes(out / "trajectory.csv", _trajectory_csv(d, w_mean, w_err), checksums)
    _write_bytes(out / "summary.json", _json_dumps(summary), checksums)
    return 2 if failed else 0


def _run_sweep(cfg, out, checksums, cells_report) -> int:
    b_values = [_parse_fraction(v) for v in (cfg.b_values or [])]
    gamma_values = [float(g) for g in (cfg.gamma_values or [cfg.gamma])]
    cells = [(b, g) for b in b_values for g in gamma_values]
    grouped = _map_realizations(cfg, cells)
    rng = RngSeed(cfg.seed, 0xB00F).generator()
    rows = []
    any_failed = 0
    for (b, gamma), results in zip(cells, grouped):
        agg, _, failed = _collect_cell(
            cfg, results, cells_report, f"b={b},gamma={gamma}", cfg.dim
        )
        any_failed |= bool(failed)
        s = agg.summary(rng, cfg.bootstrap_resamples)
        rows.append((b, gamma, s))
    lines = ["b,gamma,atom0,atom1,continuum_edge,gap," +
             ",".join(f"a{k}" for k in range(cfg.k_max + 1)) +
             ",atom1_stderr,a1_stderr"]
    for b, gamma, s in rows:
        mom = ",".join(_fmt(m) for m in s["moments"])
        lines.append(
            f"{_fmt(b)},{_fmt(gamma)},{_fmt(s['atom0'])},{_fmt(s['atom1'])},"
            f"{_fmt(s['continuum_edge'])},{_fmt(s['gap'])},{mom},"
            f"{_fmt(s['stderr']['atom1'])},{_fmt(s['stderr']['moments'][min(1, cfg.k_max)])}"
        )
    _write_bytes(out / "sweep_summary.csv", "\n".join(lines) + "\n", checksums)
    return 2 if any_failed else 0


def _run_theory(cfg, out, checksums) -> None:
    params = theory.TheoryParams(b=float(cfg.b_fraction()), gamma=cfg.gamma, im_shift=cfg.im_shift)
    grid = np.linspace(cfg.lambda_min, cfg.lambda_max, cfg.grid_points)
    rho = theory.analytic_density(grid, params)
    atom0, atom1 = theory.atom_weights(params)
    moments = theory.moments_from_green(params, cfg.k_max)
    summary = {
        "mode": "theory",
        "b": str(cfg.b_fraction()),
        "gamma": cfg.gamma,
        "atom0": atom0,
        "atom1": atom1,
        "near1_gap": theory.near1_gap(params) if abs(params.b - 0.5) <= 0.15 else None,
        "gamma_c": theory.gamma_c(params.b),
        "moments": [float(m) for m in moments],
        "grid_points": cfg.grid_points,
    }
    _write_bytes(out / "density.csv", _density_csv(grid, rho), checksums)
    _write_bytes(out / "summary.json", _json_dumps(summary), checksums)
