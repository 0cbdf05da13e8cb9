"""Simulation grid: metrics, seeded replications and resumable CSV output.

Random streams are derived from grid coordinates, never from execution
order:

* replication seed   ``rep_seed = digest(base_seed, d, rep)``
* covariate model    ``split(rep_seed, 0)``          (shared over T, noise, penalty)
* train/test inputs  ``split(rep_seed, 1, T)``        (shared over noise, penalty)
* noise              ``split(rep_seed, 2, T, family, eta)``

so every penalty sees the same data and every axis value can be added or
removed without touching the rows of the others.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from . import design, dgp
from . import penalty as pen
from .kernels import BandwidthPolicy, bandwidth
from .noise import ParetoSpec, SubWeibullSpec, sample_noise, split
from .solver import Algorithm, SolveOptions, predict, solve

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "SupportStats",
    "CSV_COLUMNS",
    "CSV_HEADER_COMMENT",
    "t0_rule",
    "t_grid",
    "rep_seed",
    "generalization_error",
    "support_stats",
    "run_experiment",
    "read_rows",
    "CsvFormatError",
]

CSV_HEADER_COMMENT = "# lsts-sparse v1"
CSV_COLUMNS = ["d", "T", "noise", "eta", "penalty", "rep", "seed", "gen_error", "iters",
               "converged", "wall_ms"]
NOISE_CODES = {"subweibull": 0, "pareto": 1}
PENALTIES = ("lasso", "wtv")


def t0_rule(d: int, noise: str) -> int:
    if noise == "subweibull":
        return 100 * math.ceil(2 * math.sqrt(d) * math.log(d) / 100)
    if noise == "pareto":
        return 100 * math.ceil(2 * d * math.log(d) / 100)
    raise ValueError(f"unknown noise family {noise!r}")


@dataclass
class ExperimentConfig:
    d_grid: list = field(default_factory=lambda: [50])
    T_grid: Optional[list] = None  # None selects the T0(d) rule
    t_steps: int = 10
    noise: str = "subweibull"
    eta_grid: list = field(default_factory=lambda: [0.8, 1.0, 1.5])
    penalties: list = field(default_factory=lambda: list(PENALTIES))
    noise_scale: float = 1.0  # C for sub-Weibull, u for Pareto
    # regularization schedule
    lambda_xi: Optional[float] = None  # None: 1/3 (sub-Weibull) or 0.01 (Pareto)
    c: float = 2.0
    vartheta: float = 0.02
    c_kl: float = 1.0
    lambda_scale: float = 1.0  # multiplies the schedule; 1.0 is the theory value
    # bandwidth h = c_band * T^(-band_xi), same for both kernels
    c_band: float = 0.6
    band_xi: float = 1.0 / 3.0
    backend: str = "kernel"
    m_order: int = 2
    rho: float = 0.95
    n_reps: int = 30
    base_seed: int = 20240101
    T_test: Optional[int] = None
    csv_path: Optional[str] = None
    chart_dir: Optional[str] = None
    algorithm: str = "fista"
    max_iter: int = 5000
    tol_residual: float = 1e-6
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self):
        if not self.d_grid or not self.eta_grid or not self.penalties:
            raise ValueError("d_grid, eta_grid and penalties must be non-empty")
        if self.T_grid is not None and not self.T_grid:
            raise ValueError("T_grid must be non-empty (or null for the T0 rule)")
        if self.n_reps < 1:
            raise ValueError("n_reps must be >= 1")
        if self.noise not in NOISE_CODES:
            raise ValueError(f"noise must be one of {sorted(NOISE_CODES)}")
        bad = set(self.penalties) - set(PENALTIES)
        if bad:
            raise ValueError(f"unknown penalties {sorted(bad)}")
        if not self.lambda_scale > 0:
            raise ValueError("lambda_scale must be > 0")
        if self.backend not in design.BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def regime(self) -> pen.Regime:
        return pen.Regime.SUB_WEIBULL if self.noise == "subweibull" else pen.Regime.REGULARLY_VARYING

    @property
    def schedule_xi(self) -> float:
        if self.lambda_xi is not None:
            return self.lambda_xi
        return 1.0 / 3.0 if self.noise == "subweibull" else 0.01

    def noise_spec(self, eta: float):
        if self.noise == "subweibull":
            return SubWeibullSpec(eta=eta, c_scale=self.noise_scale)
        return ParetoSpec(eta=eta, u_threshold=self.noise_scale)

    def penalty_spec(self, kind: str, d: int, T: int) -> pen.PenaltySpec:
        spec = pen.lambda_schedule(pen.LambdaScheduleInput(
            regime=self.regime, penalty_kind=kind, d=d, T=T, xi=self.schedule_xi,
            c=self.c, vartheta=self.vartheta, c_kl=self.c_kl))
        if self.lambda_scale == 1.0:
            return spec
        if isinstance(spec, pen.Lasso):
            return pen.Lasso(spec.lam * self.lambda_scale)
        return pen.WeightedTV(spec.weights * self.lambda_scale)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(algorithm=Algorithm(self.algorithm), max_iter=self.max_iter,
                            tol_residual=self.tol_residual)

    def expected_rows(self) -> int:
        n_T = sum(len(t_grid(self, d)) for d in self.d_grid)
        return n_T * len(self.eta_grid) * len(self.penalties) * self.n_reps


def t_grid(cfg: ExperimentConfig, d: int) -> list[int]:
    if cfg.T_grid is not None:
        return [int(T) for T in cfg.T_grid]
    T0 = t0_rule(d, cfg.noise)
    return [T0 + 100 * k for k in range(cfg.t_steps)]


@dataclass(frozen=True)
class ResultRow:
    d: int
    T: int
    noise: str
    eta: float
    penalty: str
    rep: int
    seed: int
    gen_error: float
    iters: int
    converged: bool
    wall_ms: int

    def key(self) -> tuple:
        return (self.d, self.T, self.noise, _eta_key(self.eta), self.penalty, self.rep)

    def as_csv(self) -> list[str]:
        return [str(self.d), str(self.T), self.noise, repr(float(self.eta)), self.penalty,
                str(self.rep), str(self.seed), repr(float(self.gen_error)), str(self.iters),
                str(int(self.converged)), str(self.wall_ms)]


def _eta_key(eta: float) -> int:
    return int(round(float(eta) * 1_000_000))


def rep_seed(base_seed: int, d: int, rep: int) -> int:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(d), int(rep)))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class SupportStats:
    lasso_supports: list
    tv_supports: list

    @property
    def lasso_total(self) -> int:
        return sum(len(s) for s in self.lasso_supports)

    @property
    def tv_total(self) -> int:
        return sum(len(s) for s in self.tv_supports)

    @property
    def block_sparsity(self) -> int:
        """Number of rows that are not identically zero (up to the support tolerance)."""
        return sum(1 for a, b in zip(self.lasso_supports, self.tv_supports) if a or b)

    def check_inequality(self) -> bool:
        """|J| <= |block support| * max_r |J_r| for both support notions."""
        ok = True
        for sup, total in ((self.lasso_supports, self.lasso_total),
                           (self.tv_supports, self.tv_total)):
            biggest = max((len(s) for s in sup), default=0)
            ok &= total <= self.block_sparsity * biggest
        return ok


def support_stats(theta, tol: float = 1e-8) -> SupportStats:
    """Supports with 1-based feature indices.

    Lasso: {j : |theta_rj| > tol}. TV: {j >= 2 : |theta_rj - theta_r(j-1)| > tol}.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    nz = np.abs(theta) > tol
    jumps = np.abs(np.diff(theta, axis=1)) > tol
    lasso = [set((np.flatnonzero(row) + 1).tolist()) for row in nz]
    tv = [set((np.flatnonzero(row) + 2).tolist()) for row in jumps]
    return SupportStats(lasso, tv)


def generalization_error(theta_hat, train_X, h1: float, h2: float, test_X,
                         test_surface: dgp.CoefficientSurface, backend: str = "kernel") -> float:
    """(1/T_test) sum_t (m_hat(t/T_test, X_t) - sum_j m*_t(j) X_t(j))^2."""
    test_X = np.asarray(test_X, dtype=float)
    n = test_X.shape[0]
    u = np.arange(1, n + 1) / n
    pred = predict(theta_hat, train_X, h1, h2, u, test_X, backend=backend)
    truth = np.einsum("tj,tj->t", test_surface.values, test_X)
    return float(np.mean((pred - truth) ** 2))


def _cell_rows(cfg: ExperimentConfig, d: int, T: int, rep: int,
               todo: set) -> list[ResultRow]:
    """All rows for one (d, T, rep): the design is built once and shared."""
    seed = rep_seed(cfg.base_seed, d, rep)
    model = dgp.draw_covariate_model(d, T, split(seed, 0), m_order=cfg.m_order, rho=cfg.rho)
    surface = dgp.gen_surface(d, T)
    input_rng = split(seed, 1, T)
    X, _ = dgp.gen_covariates(model, input_rng)
    T_test = cfg.T_test or T
    test_X, _ = dgp.gen_covariates(model.with_T(T_test), input_rng)
    test_surface = dgp.gen_surface(d, T_test)
    signal = np.einsum("tj,tj->t", surface.values, X)

    h = bandwidth(BandwidthPolicy(cfg.c_band, cfg.band_xi), T)
    op = design.build(X, h, h, backend=cfg.backend)
    L = design.lipschitz(op, tol=1e-6)
    opts = cfg.solve_options()
    rows = []
    for eta in cfg.eta_grid:
        eps = None
        for kind in cfg.penalties:
            key = (d, T, cfg.noise, _eta_key(eta), kind, rep)
            if key not in todo:
                continue
            if eps is None:
                eps = sample_noise(cfg.noise_spec(eta),
                                   split(seed, 2, T, NOISE_CODES[cfg.noise], _eta_key(eta)), T)
            t0 = time.perf_counter()
            res = solve(op, signal + eps, cfg.penalty_spec(kind, d, T), opts, L=L)
            err = generalization_error(res.theta_hat, X, h, h, test_X, test_surface,
                                       backend=cfg.backend)
            wall = int(round((time.perf_counter() - t0) * 1000)) if cfg.record_timing else 0
            if not res.converged:
                log.warning("no convergence: d=%d T=%d eta=%g %s rep=%d residual=%.3g",
                            d, T, eta, kind, rep, res.residual)
            rows.append(ResultRow(d, T, cfg.noise, float(eta), kind, rep, seed, err,
                                  res.iters, res.converged, wall))
    return rows


def _grid_keys(cfg: ExperimentConfig):
    for d in cfg.d_grid:
        for T in t_grid(cfg, d):
            for rep in range(cfg.n_reps):
                yield d, T, rep


def _run_cell(args):
    cfg, d, T, rep, todo = args
    return _cell_rows(cfg, d, T, rep, todo)


def read_rows(csv_path) -> list[ResultRow]:
    """Parse a results CSV; raises :class:`CsvFormatError` naming the bad line."""
    rows = []
    path = Path(csv_path)
    with path.open(newline="") as fh:
        header_seen = False
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = next(csv.reader([line]))
            if not header_seen:
                if fields != CSV_COLUMNS:
                    raise CsvFormatError(f"{path}:{lineno}: unexpected header {fields}")
                header_seen = True
                continue
            if len(fields) != len(CSV_COLUMNS):
                raise CsvFormatError(
                    f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(fields)}")
            try:
                rows.append(ResultRow(
                    d=int(fields[0]), T=int(fields[1]), noise=fields[2], eta=float(fields[3]),
                    penalty=fields[4], rep=int(fields[5]), seed=int(fields[6]),
                    gen_error=float(fields[7]), iters=int(fields[8]),
                    converged=bool(int(fields[9])), wall_ms=int(fields[10])))
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{lineno}: {exc}") from exc
    return rows


class CsvFormatError(ValueError):
    pass


def run_experiment(cfg: ExperimentConfig) -> Iterator[ResultRow]:
    """Run the grid, yielding rows as they complete.

    With ``cfg.csv_path`` set, rows are appended to the CSV as produced and
    keys already present in the file are skipped, so an interrupted run can
    be resumed by re-running the same config. ``cfg.workers > 1`` runs
    (d, T, rep) cells in a process pool; rows are still written in grid order.
    """
    todo = set()
    for d, T, rep in _grid_keys(cfg):
        for eta in cfg.eta_grid:
            for kind in cfg.penalties:
                todo.add((d, T, cfg.noise, _eta_key(eta), kind, rep))

    writer = None
    fh = None
    if cfg.csv_path:
        path = Path(cfg.csv_path)
        if path.exists() and path.stat().st_size > 0:
            for row in read_rows(path):
                todo.discard(row.key())
            fh = path.open("a", newline="")
            writer = csv.writer(fh, lineterminator="\n")
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            fh = path.open("w", newline="")
            fh.write(CSV_HEADER_COMMENT + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            fh.flush()

    pending = {(k[0], k[1], k[5]) for k in todo}
    cells = [(cfg, d, T, rep, todo) for d, T, rep in _grid_keys(cfg) if (d, T, rep) in pending]
    try:
        if cfg.workers > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = pool.map(_run_cell, cells)
                yield from _emit(results, writer, fh)
        else:
            yield from _emit(map(_run_cell, cells), writer, fh)
    finally:
        if fh is not None:
            fh.close()


def _emit(results, writer, fh):
    for rows in results:
        for row in rows:
            if writer is not None:
                writer.writerow(row.as_csv())
            yield row
        if fh is not None:
            fh.flush()


def summarize(rows: Sequence[ResultRow]) -> dict:
    """Mean and standard error of gen_error per (noise, penalty, d, eta, T)."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.noise, row.penalty, row.d, row.eta, row.T), []).append(row.gen_error)
    out = {}
    for key, vals in groups.items():
        a = np.asarray(vals)
        se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
        out[key] = (float(a.mean()), se, int(a.size))
    return out
