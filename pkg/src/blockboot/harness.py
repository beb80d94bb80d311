"""Monte Carlo experiments: truth oracle, MSE benchmarks and cumulant checks.

Replication ``r`` draws its series from the stream ``(master, SERIES, r)``
and, for cell ``c``, its block indices from ``(master, BOOTSTRAP, r, c)``.
One index matrix is shared by every method and tuning-grid point of a cell
(common random numbers), which keeps grid comparisons sharp. Workers return
integer indicator counts; the parent reduces them in replication order, so
reports are bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, InfeasibleParameterError
from .kernels import EPANECHNIKOV, KernelKind, KernelSpec
from .process import REFERENCE_MODEL, ProcessModel, marginal_density, marginal_density_dd, simulate_many
from .resampler import (
    Method,
    _conditional_means,
    bias_shift,
    block_sums_many,
    draw_indices,
    first_terms,
    make_ebc_params,
    make_nbc_params,
    make_uns_params,
)
from .rng import BOOTSTRAP, CUMULANT, ORACLE, SERIES, generator, seed_sequence
from .tuning import variance_exact_iid

DEFAULT_K1_GRID = tuple(float(v) for v in np.geomspace(0.01, 30.0, 46))
DEFAULT_C2_GRID = tuple(float(v) for v in np.geomspace(0.1, 50.0, 35))
_CHUNK_ELEMENTS = 2**22  # series values simulated per batch


def _chunk_rows(n: int) -> int:
    return max(1, _CHUNK_ELEMENTS // n)

REPORT_COLUMNS = ("method", "b", "ell", "best_k1", "best_c2", "mse", "bias", "variance", "mc_std_err")


@dataclass(frozen=True)
class OracleResult:
    p: float
    std_err: float
    replications: int

    def as_dict(self) -> dict:
        return asdict(self)


def _oracle_chunk(model: ProcessModel, n: int, x0: float, h: float, spec: KernelSpec, seed, lo: int, hi: int) -> np.ndarray:
    seeds = [seed_sequence(seed, ORACLE, i) for i in range(lo, hi)]
    x = simulate_many(model, n, seeds)
    return spec((x - x0) / h).sum(axis=1) / (n * h)


def _oracle_estimates(model, n, x0, h, spec, R, seed, workers) -> np.ndarray:
    step = _chunk_rows(n)
    bounds = [(lo, min(lo + step, R)) for lo in range(0, R, step)]
    args = [(model, n, x0, h, spec, seed, lo, hi) for lo, hi in bounds]
    parts = _map(_oracle_chunk_star, args, workers)
    return np.concatenate(parts)


def _oracle_chunk_star(args):
    return _oracle_chunk(*args)


def true_cdf_oracle(
    model: ProcessModel,
    n: int,
    x0: float,
    y: float,
    h: float,
    kernel: KernelSpec = EPANECHNIKOV,
    oracle_R: int = 200_000,
    seed: int = 0,
    workers: int = 1,
) -> OracleResult:
    """Monte Carlo value of ``P((nh)^{1/2}(fhat_h(x0) - f(x0)) <= y)``.

    Returns the indicator mean over ``oracle_R`` independent series and its
    binomial standard error.
    """
    if oracle_R < 100:
        raise ConfigError("oracle_R must be at least 100")
    fhat = _oracle_estimates(model, n, x0, h, kernel, oracle_R, seed, workers)
    t = math.sqrt(n * h) * (fhat - marginal_density(model, x0))
    p = int(np.count_nonzero(t <= y)) / oracle_R
    return OracleResult(p, math.sqrt(p * (1 - p) / oracle_R), oracle_R)


def kde_bias_oracle(
    model: ProcessModel,
    n: int,
    x0: float,
    h: float,
    kernel: KernelSpec = EPANECHNIKOV,
    oracle_R: int = 200_000,
    seed: int = 0,
    workers: int = 1,
) -> OracleResult:
    """Mean of ``fhat_h(x0) - f(x0)`` over ``oracle_R`` series, with its standard error."""
    if oracle_R < 100:
        raise ConfigError("oracle_R must be at least 100")
    err = _oracle_estimates(model, n, x0, h, kernel, oracle_R, seed, workers) - marginal_density(model, x0)
    return OracleResult(float(np.mean(err)), float(np.std(err, ddof=1) / math.sqrt(oracle_R)), oracle_R)


def _grid(value, key: str) -> tuple:
    if isinstance(value, dict):
        if set(value) != {"geomspace"}:
            raise ConfigError(f"{key}: expected a list or {{'geomspace': [lo, hi, num]}}")
        lo, hi, num = value["geomspace"]
        value = np.geomspace(float(lo), float(hi), int(num))
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a list of numbers") from None
    if not out or any(not v > 0 for v in out):
        raise ConfigError(f"{key}: grid must be nonempty and positive")
    return out


def _method(m) -> Method:
    return m if isinstance(m, Method) else Method(str(m).upper())


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for :func:`mse_experiment`.

    ``oracle_p`` overrides the truth oracle when set. ``grid_bl`` lists the
    ``(b, ell)`` cells.
    """

    n: int
    x0: float
    y: float
    h: float
    grid_bl: tuple
    model: ProcessModel = REFERENCE_MODEL
    kernel: KernelSpec = EPANECHNIKOV
    methods: tuple = (Method.EBC, Method.NBC, Method.UNS)
    k1_grid: tuple = DEFAULT_K1_GRID
    c2_grid: tuple = DEFAULT_C2_GRID
    c0: float = 0.5
    B: int = 10_000
    R: int = 10_000
    oracle_R: int = 200_000
    master_seed: Optional[int] = None
    oracle_p: Optional[float] = None

    def __post_init__(self) -> None:
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        for key in ("n", "B", "R", "oracle_R"):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{key}: must be a positive integer")
        if self.n < 2:
            raise ConfigError("n: must be at least 2")
        if not self.h > 0:
            raise ConfigError("h: must be positive")
        if not 0 < self.c0 < 1:
            raise ConfigError("c0: must lie in (0, 1)")
        try:
            methods = tuple(sorted({_method(m) for m in self.methods}, key=lambda m: m.value))
        except ValueError:
            raise ConfigError(f"methods: unknown method in {list(self.methods)}") from None
        if not methods or Method.CUSTOM in methods:
            raise ConfigError("methods: choose from EBC, NBC, UNS")
        set_("methods", methods)
        try:
            cells = tuple((int(b), int(ell)) for b, ell in self.grid_bl)
        except (TypeError, ValueError):
            raise ConfigError("grid_bl: expected a list of [b, ell] pairs") from None
        if not cells or any(b < 1 or ell < 1 for b, ell in cells):
            raise ConfigError("grid_bl: expected nonempty positive [b, ell] pairs")
        set_("grid_bl", cells)
        set_("k1_grid", _grid(self.k1_grid, "k1_grid"))
        set_("c2_grid", _grid(self.c2_grid, "c2_grid"))
        if self.master_seed is not None and not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed: must be a 64-bit unsigned integer")
        if self.oracle_p is not None and not 0 <= self.oracle_p <= 1:
            raise ConfigError("oracle_p: must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f for f in cls.__dataclass_fields__}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        if "model" in data:
            m = data["model"]
            if not isinstance(m, dict) or not set(m) <= {"phi", "theta", "innovation_sd"}:
                raise ConfigError("model: expected {phi, theta[, innovation_sd]}")
            try:
                data["model"] = ProcessModel(**{k: float(v) for k, v in m.items()})
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"model: {exc}") from None
        if "kernel" in data:
            try:
                data["kernel"] = KernelSpec.of(KernelKind(str(data["kernel"]).lower()))
            except ValueError:
                raise ConfigError(f"kernel: unknown kernel {data['kernel']!r}") from None
        for key in ("n", "B", "R", "oracle_R", "master_seed"):
            if key in data and isinstance(data[key], float) and data[key].is_integer():
                data[key] = int(data[key])
        for key in ("n", "x0", "y", "h", "grid_bl"):
            if key not in data:
                raise ConfigError(f"missing config key {key!r}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "model": {"phi": self.model.phi, "theta": self.model.theta, "innovation_sd": self.model.innovation_sd},
            "n": self.n,
            "x0": self.x0,
            "y": self.y,
            "h": self.h,
            "kernel": self.kernel.kind.value,
            "methods": [m.value for m in self.methods],
            "grid_bl": [list(c) for c in self.grid_bl],
            "k1_grid": list(self.k1_grid),
            "c2_grid": list(self.c2_grid),
            "c0": self.c0,
            "B": self.B,
            "R": self.R,
            "oracle_R": self.oracle_R,
            "master_seed": self.master_seed,
            "oracle_p": self.oracle_p,
        }

    def require_seed(self) -> int:
        if self.master_seed is None:
            raise ConfigError("master_seed: required (no silent nondeterminism)")
        return int(self.master_seed)


@dataclass
class CellRecord:
    method: str
    b: int
    ell: int
    best_k1: Optional[float]
    best_c2: Optional[float]
    mse: float
    bias: float
    variance: float
    mc_std_err: float
    feasible: bool = True
    note: str = ""

    def row(self) -> list:
        def fmt(v):
            if v is None or (isinstance(v, float) and math.isnan(v)):
                return ""
            return format(v, ".17g") if isinstance(v, float) else v

        return [fmt(getattr(self, c)) for c in REPORT_COLUMNS]


@dataclass
class MseReport:
    records: list
    oracle_p: float
    oracle_std_err: float
    config: ExperimentConfig
    wall_time: float
    surfaces: dict = field(default_factory=dict, repr=False)

    def record(self, method: Union[Method, str], b: int, ell: int) -> CellRecord:
        name = _method(method).value
        for rec in self.records:
            if rec.method == name and rec.b == b and rec.ell == ell:
                return rec
        raise KeyError((name, b, ell))

    def write(self, out_dir: Union[str, Path], stem: str = "mse_report") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(REPORT_COLUMNS)
            for rec in self.records:
                w.writerow(rec.row())
        side = {
            "config": self.config.to_dict(),
            "oracle_p": self.oracle_p,
            "oracle_std_err": self.oracle_std_err,
            "seeds": {
                "master_seed": self.config.master_seed,
                "series_stream": [SERIES, "r"],
                "bootstrap_stream": [BOOTSTRAP, "r", "cell"],
                "oracle_stream": [ORACLE, "i"],
            },
            "infeasible": [[r.method, r.b, r.ell, r.note] for r in self.records if not r.feasible],
            "wall_time": self.wall_time,
        }
        json_path.write_text(dumps(side) + "\n")
        return csv_path, json_path


def dumps(obj) -> str:
    """Compact JSON with every float written at 17 significant digits."""
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(obj)
        text = format(obj, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ---------------------------------------------------------------------------
# MSE experiment


@dataclass(frozen=True)
class _CellPlan:
    index: int
    b: int
    ell: int
    feasible: bool
    note: str
    nbc_k: float = math.nan


def _plan_cells(cfg: ExperimentConfig) -> list[_CellPlan]:
    plans = []
    for i, (b, ell) in enumerate(cfg.grid_bl):
        try:
            make_uns_params(b, ell, 1.0).check_sample(cfg.n)
            plans.append(_CellPlan(i, b, ell, True, "", make_nbc_params(cfg.n, cfg.h, b, ell, cfg.c0).k1))
        except InfeasibleParameterError as exc:
            plans.append(_CellPlan(i, b, ell, False, str(exc)))
    return plans


def _replicate(cfg: ExperimentConfig, plans: Sequence[_CellPlan], r: int) -> dict:
    """Integer counts of ``{T* <= y}`` for one replication.

    Keys are ``(method, cell_index)``; UNS gives one count per k1, EBC a
    ``(k1, c2)`` array, NBC a single count.
    """
    seed = cfg.require_seed()
    x = simulate_many(cfg.model, cfg.n, [seed_sequence(seed, SERIES, r)])[0]
    k1s = np.asarray(cfg.k1_grid)
    out: dict = {}
    for plan in plans:
        if not plan.feasible:
            continue
        b, ell = plan.b, plan.ell
        need_k1 = Method.UNS in cfg.methods or Method.EBC in cfg.methods
        ks = np.append(k1s, plan.nbc_k) if Method.NBC in cfg.methods else k1s
        if not need_k1:
            ks = ks[-1:]
        sums = block_sums_many(x, ell, ks, cfg.x0, cfg.kernel)
        values = sums / (ell * ks[:, None])
        cmeans = _conditional_means(sums, ell, ks)
        J = draw_indices(generator(seed, BOOTSTRAP, r, plan.index), sums.shape[1], b, cfg.B)
        first = first_terms(values, cmeans, ks, b, ell, J)
        if Method.NBC in cfg.methods:
            p = make_nbc_params(cfg.n, cfg.h, b, ell, cfg.c0)
            t = first[-1] + bias_shift(x, p, cfg.x0, cfg.kernel)
            out[(Method.NBC, plan.index)] = int(np.count_nonzero(t <= cfg.y))
        if Method.UNS in cfg.methods:
            out[(Method.UNS, plan.index)] = np.count_nonzero(first[: k1s.size] <= cfg.y, axis=1).astype(np.int64)
        if Method.EBC in cfg.methods:
            shifts = np.array(
                [bias_shift(x, make_ebc_params(cfg.n, cfg.h, b, ell, 1.0, cfg.c0, c2), cfg.x0, cfg.kernel) for c2 in cfg.c2_grid]
            )
            counts = np.empty((k1s.size, shifts.size), dtype=np.int64)
            for j in range(k1s.size):
                counts[j] = np.count_nonzero(first[j][:, None] + shifts[None, :] <= cfg.y, axis=0)
            out[(Method.EBC, plan.index)] = counts
    return out


def _replicate_block(args) -> list:
    cfg, plans, lo, hi = args
    return [_replicate(cfg, plans, r) for r in range(lo, hi)]


def _map(func, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [func(a) for a in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(func, items))


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit value, else ``BLOCKBOOT_WORKERS``, else 1."""
    if workers is None:
        env = os.environ.get("BLOCKBOOT_WORKERS")
        if env is None or env.strip() == "":
            return 1
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"BLOCKBOOT_WORKERS: not an integer: {env!r}") from None
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    return workers


class _Accumulator:
    """Per-grid-point sums of ``c``, ``c^2`` (exact integers) and ``e^2``."""

    def __init__(self, shape, B: int, p0: float) -> None:
        self.s1 = np.zeros(shape, dtype=np.int64)
        self.s2 = np.zeros(shape, dtype=np.int64)
        self.s4 = np.zeros(shape, dtype=float)
        self.B, self.p0, self.R = B, p0, 0

    def add(self, counts) -> None:
        c = np.asarray(counts, dtype=np.int64)
        self.s1 += c
        self.s2 += c * c
        self.s4 += (c / self.B - self.p0) ** 4
        self.R += 1

    def stats(self):
        R, B, p0 = self.R, self.B, self.p0
        mean = self.s1 / (R * B)
        bias = mean - p0
        variance = self.s2 / (R * B * B) - mean * mean
        mse = bias * bias + variance
        spread = np.maximum(self.s4 / R - mse * mse, 0.0)
        return mse, bias, variance, np.sqrt(spread / R)


def mse_experiment(cfg: ExperimentConfig, workers: Optional[int] = None, oracle: Optional[OracleResult] = None) -> MseReport:
    """Benchmark EBC, NBC and UNS over the configured ``(b, ell)`` cells.

    UNS and EBC report the grid point with the smallest MSE per cell. Cells
    whose ``(b, ell)`` is infeasible for ``n`` are listed but not run.
    """
    t0 = time.perf_counter()
    seed = cfg.require_seed()
    workers = resolve_workers(workers)
    if cfg.oracle_p is not None:
        oracle = OracleResult(float(cfg.oracle_p), 0.0, 0)
    elif oracle is None:
        oracle = true_cdf_oracle(cfg.model, cfg.n, cfg.x0, cfg.y, cfg.h, cfg.kernel, cfg.oracle_R, seed, workers)
    p0 = oracle.p
    plans = _plan_cells(cfg)
    shapes = {Method.NBC: (), Method.UNS: (len(cfg.k1_grid),), Method.EBC: (len(cfg.k1_grid), len(cfg.c2_grid))}
    acc = {(m, p.index): _Accumulator(shapes[m], cfg.B, p0) for m in cfg.methods for p in plans if p.feasible}
    step = max(1, min(64, math.ceil(cfg.R / (4 * workers))))
    blocks = [(cfg, plans, lo, min(lo + step, cfg.R)) for lo in range(0, cfg.R, step)]
    if workers <= 1:
        results: Iterable = map(_replicate_block, blocks)
        _reduce(results, acc)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            _reduce(ex.map(_replicate_block, blocks), acc)

    records, surfaces = [], {}
    for m in cfg.methods:
        for p in plans:
            if not p.feasible:
                records.append(CellRecord(m.value, p.b, p.ell, None, None, math.nan, math.nan, math.nan, math.nan, False, p.note))
                continue
            mse, bias, var, se = acc[(m, p.index)].stats()
            surfaces[(m.value, p.b, p.ell)] = mse
            if m is Method.NBC:
                idx, k1, c2 = (), p.nbc_k, None
            else:
                idx = np.unravel_index(int(np.argmin(mse)), mse.shape)
                k1 = cfg.k1_grid[idx[0]]
                c2 = cfg.c2_grid[idx[1]] if m is Method.EBC else None
            records.append(
                CellRecord(m.value, p.b, p.ell, k1, c2, float(mse[idx]), float(bias[idx]), float(var[idx]), float(se[idx]))
            )
    return MseReport(records, p0, oracle.std_err, cfg, time.perf_counter() - t0, surfaces)


def _reduce(block_results: Iterable[list], acc: dict) -> None:
    for block in block_results:
        for rep in block:
            for key, counts in rep.items():
                acc[key].add(counts)


def sensitivity_scan(cfg: ExperimentConfig, cell: tuple, param: str, method: Union[Method, str] = Method.UNS,
                     workers: Optional[int] = None, report: Optional[MseReport] = None) -> dict:
    """MSE along one tuning constant for a single cell, others at their optimum.

    ``param`` is ``"k1"``, ``"c2"`` or (EBC only) ``"both"`` for the full
    ``(k1, c2)`` surface. Returns ``{"param", "grid", "mse", ...}``.
    """
    method = _method(method)
    if method is Method.NBC or method is Method.CUSTOM:
        raise ConfigError("sensitivity_scan applies to UNS and EBC")
    if param not in ("k1", "c2", "both") or (method is Method.UNS and param != "k1"):
        raise ConfigError(f"param: {param!r} not scannable for {method.value}")
    b, ell = int(cell[0]), int(cell[1])
    if report is None:
        report = mse_experiment(replace(cfg, grid_bl=((b, ell),), methods=(method,)), workers)
    key = (method.value, b, ell)
    if key not in report.surfaces:
        raise InfeasibleParameterError(f"cell ({b}, {ell}) infeasible or not run")
    surf = report.surfaces[key]
    k1 = np.asarray(cfg.k1_grid)
    if method is Method.UNS:
        return {"param": "k1", "grid": k1, "mse": surf}
    i, j = np.unravel_index(int(np.argmin(surf)), surf.shape)
    if param == "k1":
        return {"param": "k1", "grid": k1, "mse": surf[:, j], "c2": cfg.c2_grid[j]}
    if param == "c2":
        return {"param": "c2", "grid": np.asarray(cfg.c2_grid), "mse": surf[i, :], "k1": cfg.k1_grid[i]}
    return {"param": "both", "k1_grid": k1, "c2_grid": np.asarray(cfg.c2_grid), "mse": surf}


def write_scan_csv(scan: dict, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if scan["param"] == "both":
            w.writerow(["k1", "c2", "mse"])
            for i, k in enumerate(scan["k1_grid"]):
                for j, c in enumerate(scan["c2_grid"]):
                    w.writerow([format(float(k), ".17g"), format(float(c), ".17g"), format(float(scan["mse"][i, j]), ".17g")])
        else:
            w.writerow([scan["param"], "mse"])
            for g, v in zip(scan["grid"], scan["mse"]):
                w.writerow([format(float(g), ".17g"), format(float(v), ".17g")])
    return path


# ---------------------------------------------------------------------------
# cumulant diagnostics


def _as_h_rule(h_rule) -> Callable[[int], float]:
    if callable(h_rule):
        return h_rule
    expo = float(h_rule)
    return lambda n: float(n) ** expo


def _cumulant_row(args) -> dict:
    model, n, h, x0, spec, R, seed, idx = args
    est = np.empty(R)
    step = _chunk_rows(n)
    for lo in range(0, R, step):
        hi = min(lo + step, R)
        x = simulate_many(model, n, [seed_sequence(seed, CUMULANT, idx, r) for r in range(lo, hi)])
        est[lo:hi] = spec((x - x0) / h).sum(axis=1) / (n * h)
    f0, f2 = marginal_density(model, x0), marginal_density_dd(model, x0)
    scaled = math.sqrt(n * h) * est
    v = float(np.var(scaled, ddof=1))
    m4 = float(np.mean((scaled - scaled.mean()) ** 4))
    lead = f0 * spec.nu2
    row = {
        "n": n,
        "h": h,
        "scaled_var": v,
        "scaled_var_std_err": math.sqrt(max(m4 - v * v, 0.0) / R),
        "ratio": v / lead,
        "ratio_std_err": math.sqrt(max(m4 - v * v, 0.0) / R) / lead,
        "mean": float(est.mean()),
        "mean_std_err": float(est.std(ddof=1) / math.sqrt(R)),
        "mean_leading": f0 + h * h * f2 * spec.mu2 / 2,
    }
    if model.phi == 0 and model.theta == 0:
        row["iid_exact_var"] = variance_exact_iid(model, x0, h, spec)
    return row


CUMULANT_COLUMNS = (
    "n", "h", "scaled_var", "scaled_var_std_err", "ratio", "ratio_std_err", "mean", "mean_std_err", "mean_leading", "iid_exact_var",
)


def cumulant_check(
    model: ProcessModel,
    n_list: Sequence[int],
    h_rule,
    kernel: KernelSpec = EPANECHNIKOV,
    R: int = 1000,
    seed: int = 0,
    x0: float = 1.0,
    workers: Optional[int] = None,
) -> list[dict]:
    """Empirical ``(nh) Var(fhat_h(x0))`` against its leading term ``f(x0) nu2``.

    ``h_rule`` maps ``n`` to ``h``; a number ``e`` means ``h = n^e``. One row
    per ``n``; for the i.i.d. model the exact finite-``h`` variance is added.
    """
    if R < 1000:
        raise ConfigError("R must be at least 1000")
    ns = [int(v) for v in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n_list must be increasing")
    rule = _as_h_rule(h_rule)
    args = [(model, n, rule(n), x0, kernel, R, seed, i) for i, n in enumerate(ns)]
    return _map(_cumulant_row, args, resolve_workers(workers))


def write_rows_csv(rows: Sequence[dict], columns: Sequence[str], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            vals = []
            for c in columns:
                v = row.get(c, "")
                vals.append(format(v, ".17g") if isinstance(v, float) else v)
            w.writerow(vals)
    return path
