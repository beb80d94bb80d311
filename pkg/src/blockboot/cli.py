"""Command-line interface: ``blockboot <subcommand> [options]``.

Exit status is 0 on success, 2 on a configuration error and 3 when the
requested parameters are infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import tuning
from .errors import ConfigError, InfeasibleParameterError
from .harness import (
    CUMULANT_COLUMNS,
    ExperimentConfig,
    cumulant_check,
    dumps,
    kde_bias_oracle,
    mse_experiment,
    resolve_workers,
    sensitivity_scan,
    true_cdf_oracle,
    write_rows_csv,
    write_scan_csv,
)
from .kernels import KernelKind, KernelSpec
from .process import ProcessModel, read_series_csv, simulate, write_series_csv
from .resampler import bootstrap_cdf, make_ebc_params, make_nbc_params, make_uns_params
from .rng import BOOTSTRAP, SERIES, seed_sequence

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_CONFIG_KEYS = set(ExperimentConfig.__dataclass_fields__)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load_settings(args) -> dict:
    """Config file, then ``--set`` overrides, then ``--seed``."""
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        for key in data:
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
    for item in args.set or []:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        data[key] = _parse_value(value)
    if args.seed is not None:
        data["master_seed"] = args.seed
    return data


def _pick(args, settings: dict, name: str, key: Optional[str] = None, default=None, required: bool = True):
    val = getattr(args, name, None)
    if val is None:
        val = settings.get(key or name, default)
    if val is None and required:
        raise ConfigError(f"missing config key {key or name!r}")
    return val


def _seed(args, settings: dict) -> int:
    seed = settings.get("master_seed")
    if seed is None:
        raise ConfigError("master_seed: supply --seed or master_seed in the config")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ConfigError("master_seed: must be a 64-bit unsigned integer")
    return seed


def _model(settings: dict, args) -> ProcessModel:
    m = dict(settings.get("model") or {})
    if getattr(args, "phi", None) is not None:
        m["phi"] = args.phi
    if getattr(args, "theta", None) is not None:
        m["theta"] = args.theta
    return ProcessModel(float(m.get("phi", 0.4)), float(m.get("theta", 0.3)), float(m.get("innovation_sd", 1.0)))


def _kernel(settings: dict) -> KernelSpec:
    try:
        return KernelSpec.of(KernelKind(str(settings.get("kernel", "epanechnikov")).lower()))
    except ValueError:
        raise ConfigError(f"kernel: unknown kernel {settings.get('kernel')!r}") from None


def _out_dir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(obj: dict, out: Path, name: str) -> None:
    line = dumps(obj)
    (out / name).write_text(line + "\n")
    print(line)


def cmd_simulate(args) -> int:
    s = _load_settings(args)
    n = int(_pick(args, s, "n"))
    sample = simulate(_model(s, args), n, seed_sequence(_seed(args, s), SERIES, 0))
    path = write_series_csv(sample, _out_dir(args) / "series.csv")
    print(path)
    return 0


def cmd_oracle(args) -> int:
    s = _load_settings(args)
    model, spec = _model(s, args), _kernel(s)
    n, h = int(_pick(args, s, "n")), float(_pick(args, s, "h"))
    x0, y = float(_pick(args, s, "x0")), float(_pick(args, s, "y"))
    R = int(_pick(args, s, "oracle_R", default=200_000))
    seed, workers = _seed(args, s), resolve_workers(args.workers)
    res = true_cdf_oracle(model, n, x0, y, h, spec, R, seed, workers)
    out = {"p": res.p, "std_err": res.std_err}
    if args.bias:
        bias = kde_bias_oracle(model, n, x0, h, spec, R, seed, workers)
        out.update(bias=bias.p, bias_std_err=bias.std_err)
    _emit(out, _out_dir(args), "oracle.json")
    return 0


def cmd_estimate(args) -> int:
    s = _load_settings(args)
    seed = _seed(args, s)
    spec = _kernel(s)
    if args.series is not None:
        sample = read_series_csv(args.series)
    else:
        sample = simulate(_model(s, args), int(_pick(args, s, "n")), seed_sequence(seed, SERIES, 0))
    n = sample.n
    h = float(_pick(args, s, "h"))
    x0, y = float(_pick(args, s, "x0")), float(_pick(args, s, "y"))
    c0 = float(_pick(args, s, "c0", default=0.5))
    B = int(_pick(args, s, "B", default=10_000))
    b, ell = args.b, args.ell
    if args.method == "ebc":
        params = make_ebc_params(n, h, b, ell, args.k1, c0, args.c2)
    elif args.method == "nbc":
        params = make_nbc_params(n, h, b, ell, c0)
    else:
        params = make_uns_params(b, ell, args.k1)
    est = bootstrap_cdf(sample, params, x0, y, B, spec, seed_sequence(seed, BOOTSTRAP, 0))
    out = {"method": params.method.value, "b": b, "ell": ell, "tau": params.tau, "k1": params.k1,
           "k2": params.k2, "k3": params.k3, **est.as_dict()}
    _emit(out, _out_dir(args), "estimate.json")
    return 0


def cmd_tune(args) -> int:
    m, regime, n = args.method, args.regime, args.n
    if n is None:
        raise ConfigError("missing config key 'n'")

    def need(name):
        v = getattr(args, name)
        if v is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required for {m} {regime}")
        return v

    if regime == "practical":
        if m != "ebc":
            raise ConfigError("the practical rule applies to ebc only")
        sel = tuning.practical_choice_ebc(n, need("b0"), need("delta"))
    elif m == "ebc" and regime == "polynomial":
        sel = tuning.ebc_optimal_poly(need("beta"), n, need("b"), need("delta"))
    elif m == "ebc":
        sel = tuning.ebc_optimal_expo(n, args.L_exponent)
    elif m == "nbc" and regime == "polynomial":
        sel = tuning.nbc_optimal_poly(need("beta"), n, need("h"), args.delta or 0.01, args.epsilon)
    elif m == "nbc":
        sel = tuning.nbc_optimal_expo(n, need("h"), args.subsampling)
    elif regime == "polynomial":
        sel = tuning.uns_optimal_poly(need("beta"), n, args.delta_prime)
    else:
        sel = tuning.uns_optimal_expo(n, args.L_exponent)
    _emit(sel.as_dict(), _out_dir(args), "tune.json")
    return 0


def cmd_benchmark(args) -> int:
    if args.config is None:
        raise ConfigError("benchmark requires --config")
    s = _load_settings(args)
    cfg = ExperimentConfig.from_dict(s)
    cfg.require_seed()
    report = mse_experiment(cfg, resolve_workers(args.workers))
    out = _out_dir(args)
    csv_path, json_path = report.write(out)
    print(csv_path)
    print(json_path)
    if args.scan:
        method, param = args.scan
        for b, ell in cfg.grid_bl:
            key = (method.upper(), b, ell)
            if key in report.surfaces:
                scan = sensitivity_scan(cfg, (b, ell), param, method, report=report)
                print(write_scan_csv(scan, out / f"scan_{method.lower()}_{param}_{b}_{ell}.csv"))
    return 0


def cmd_curves(args) -> int:
    out = _out_dir(args)
    betas = np.linspace(args.beta_min, args.beta_max, args.num)
    kinds = tuning.CURVE_KINDS if args.which == "all" else (args.which,)
    for kind in kinds:
        header, rows = tuning.g_curve_export(kind, betas)
        print(tuning.write_table_csv(header, rows, out / f"curve_{kind}.csv"))
    return 0


def cmd_cumulants(args) -> int:
    s = _load_settings(args)
    seed = _seed(args, s)
    model, spec = _model(s, args), _kernel(s)
    x0 = float(_pick(args, s, "x0", default=1.0))
    R = int(args.R)
    rows = cumulant_check(model, args.n_list, args.h_exponent, spec, R, seed, x0, resolve_workers(args.workers))
    print(write_rows_csv(rows, CUMULANT_COLUMNS, _out_dir(args) / "cumulants.csv"))
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--output-dir", default=".", help="directory for output files")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (JSON value)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--workers", type=int, help="worker processes (default: BLOCKBOOT_WORKERS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockboot", description="Hybrid block bootstrap for kernel density estimates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated ARMA(1,1) series as CSV")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--phi", type=float)
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="Monte Carlo truth P(T_h <= y)")
    _common(p)
    for name, typ in (("n", int), ("h", float), ("x0", float), ("y", float), ("phi", float), ("theta", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--oracle-R", dest="oracle_R", type=int)
    p.add_argument("--bias", action="store_true", help="also report the mean of fhat - f")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("estimate", help="one bootstrap estimate of P(T* <= y)")
    _common(p)
    p.add_argument("--series", type=Path, help="series CSV (default: simulate one)")
    p.add_argument("--method", choices=("ebc", "nbc", "uns"), required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    for name, typ in (("n", int), ("h", float), ("x0", float), ("y", float), ("c0", float), ("B", int),
                      ("phi", float), ("theta", float)):
        p.add_argument(f"--{name}", type=typ)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("tune", help="closed-form tuning selection as JSON")
    p.add_argument("--output-dir", default=".")
    p.add_argument("--method", choices=("ebc", "nbc", "uns"), required=True)
    p.add_argument("--regime", choices=("polynomial", "exponential", "practical"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--b", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--b0", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta-prime", dest="delta_prime", type=float, default=0.01)
    p.add_argument("--L-exponent", dest="L_exponent", type=float, default=1.0)
    p.add_argument("--subsampling", action="store_true")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("benchmark", help="MSE comparison of EBC, NBC and UNS")
    _common(p)
    p.add_argument("--scan", nargs=2, metavar=("METHOD", "PARAM"), help="also export sensitivity curves")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("curves", help="export g0/g1/g2, b_min/b_max and q-exponent curves")
    p.add_argument("--output-dir", default=".")
    p.add_argument("--which", choices=("all",) + tuning.CURVE_KINDS, default="all")
    p.add_argument("--beta-min", type=float, default=2.05)
    p.add_argument("--beta-max", type=float, default=20.0)
    p.add_argument("--num", type=int, default=200)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("cumulants", help="empirical variance of fhat against its leading term")
    _common(p)
    p.add_argument("--n-list", type=int, nargs="+", default=[500, 2000, 8000])
    p.add_argument("--h-exponent", type=float, default=-1 / 3)
    p.add_argument("--x0", type=float)
    p.add_argument("--R", type=int, default=10_000)
    p.add_argument("--phi", type=float)
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_cumulants)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleParameterError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
