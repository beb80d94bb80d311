"""Closed-form tuning rules for the hybrid block bootstrap.

The functions ``gamma0``, ``g0``, ``g1`` and ``g2`` describe how the mixing
exponent ``beta`` (``alpha(t) = O(t^-beta)``) enters the error rates; the
selectors turn them into concrete ``(b, ell, k)`` choices. Every
proportionality rule is realised with unit constants (overridable) and
ceiling rounding; the pre-rounding values are kept on the result.
"""

from __future__ import annotations

import csv
import enum
import functools
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError, InfeasibleParameterError
from .kernels import EPANECHNIKOV, KernelSpec
from .process import ProcessModel, marginal_density


@dataclass(frozen=True)
class GammaGConfig:
    """``d_max`` bounds the search for the infima over ``d >= 3``."""

    d_max: float = 400

    def __post_init__(self) -> None:
        if not self.d_max >= 3:
            raise ConfigError("d_max must be at least 3")


DEFAULT_G = GammaGConfig()


class SelectionRegime(str, enum.Enum):
    POLYNOMIAL_EBC = "PolynomialEBC"
    EXPONENTIAL_EBC = "ExponentialEBC"
    POLYNOMIAL_NBC = "PolynomialNBC"
    EXPONENTIAL_NBC = "ExponentialNBC"
    POLYNOMIAL_UNS = "PolynomialUNS"
    EXPONENTIAL_UNS = "ExponentialUNS"
    PRACTICAL = "Practical"


@dataclass(frozen=True)
class TuningSelection:
    """A rounded ``(b, ell, k1)`` choice plus the exponents that produced it."""

    b: int
    ell: int
    k1: float
    regime: SelectionRegime
    exponents_used: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self) -> None:
        if self.b < 1 or self.ell < 1 or not self.k1 > 0:
            raise InfeasibleParameterError("selection needs b >= 1, ell >= 1 and k1 > 0")

    def as_dict(self) -> dict:
        out = asdict(self)
        out["regime"] = self.regime.value
        out["notes"] = list(self.notes)
        return out


def _ceil(x: float) -> int:
    # absorb float noise such as 22.000000000000004
    return max(1, math.ceil(x * (1.0 - 1e-12)))


def _check_beta(beta: float) -> None:
    if not beta > 2:
        raise ValueError("beta out of range")


def gamma0(beta: float, d, cfg: GammaGConfig = DEFAULT_G):
    """Evaluate ``gamma0(beta, d)``; exactly 1 when ``beta <= d - 1``.

    ``d`` may be a scalar or an array (real values ``>= 3``).
    """
    _check_beta(beta)
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 3):
        raise ValueError("d must be at least 3")
    on = beta > d_arr - 1
    with np.errstate(all="ignore"):
        ratio = (beta - 1) / (beta + d_arr - 2)
        base = (beta - 1) * (beta + d_arr - 2) / (beta**2 + (d_arr - 3) * beta + (d_arr - 2) ** 2)
        val = 1.0 - ratio * base ** ((beta - 1) / (beta - d_arr + 1))
    out = np.where(on, val, 1.0)
    return float(out) if out.ndim == 0 else out


def _objective(which: str, beta: float, d):
    if which == "g0":
        return d * (beta / (beta - 1) - gamma0(beta, d))
    if which == "g1":
        return d * (2 - gamma0(beta, d))
    if which == "g2":
        return d * (2 - np.maximum(2 * gamma0(beta, 2 * np.asarray(d, dtype=float)) - 1, 0))
    raise ValueError(f"unknown function {which!r}")


@functools.lru_cache(maxsize=65536)
def _infimum(which: str, beta: float, d_max: float) -> tuple[float, float]:
    # Past the indicator switch the objective is linear increasing in d,
    # so the infimum lies in [3, switch].
    switch = beta + 1 if which != "g2" else (beta + 1) / 2
    upper = min(d_max, max(3.0, switch))
    if upper <= 3.0:
        return float(_objective(which, beta, 3.0)), 3.0
    npts = int(min(20001, max(401, 400 * (upper - 3))))
    grid = np.linspace(3.0, upper, npts)
    vals = _objective(which, beta, grid)
    i = int(np.argmin(vals))
    best_v, best_d = float(vals[i]), float(grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, npts - 1)]
    res = optimize.minimize_scalar(
        lambda t: float(_objective(which, beta, t)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13}
    )
    if res.fun < best_v:
        best_v, best_d = float(res.fun), float(res.x)
    for edge in (lo, hi):
        v = float(_objective(which, beta, edge))
        if v < best_v:
            best_v, best_d = v, float(edge)
    return best_v, best_d


def g_infimum(which: str, beta: float, cfg: GammaGConfig = DEFAULT_G) -> tuple[float, float]:
    """Return ``(g, d*)`` for ``which`` in ``{"g0", "g1", "g2"}``.

    ``d*`` is the (real) minimiser of the bracketed expression over
    ``d in [3, d_max]``. Warns when the minimiser sits on ``d_max``.
    """
    _check_beta(beta)
    raw, d_star = _infimum(which, float(beta), float(cfg.d_max))
    switch = beta + 1 if which != "g2" else (beta + 1) / 2
    if switch > cfg.d_max and d_star >= cfg.d_max - 1e-6:
        warnings.warn("infimum may be unattained at truncation", stacklevel=2)
    value = raw if which == "g0" else raw / 3.0 - 1.0
    return value, d_star


def g0(beta: float, cfg: GammaGConfig = DEFAULT_G) -> float:
    return g_infimum("g0", beta, cfg)[0]


def g1(beta: float, cfg: GammaGConfig = DEFAULT_G) -> float:
    return g_infimum("g1", beta, cfg)[0]


def g2(beta: float, cfg: GammaGConfig = DEFAULT_G) -> float:
    return g_infimum("g2", beta, cfg)[0]


def _beta1_root_fn(beta: float, cfg: GammaGConfig) -> float:
    return 3 * g1(beta, cfg) - (beta - 2) / beta


def _beta2_root_fn(beta: float, cfg: GammaGConfig) -> float:
    return 3 * g2(beta, cfg) - (beta - 4) / beta


def _bracket(func, grid: np.ndarray, last: bool) -> tuple[float, float]:
    vals = np.array([func(b) for b in grid])
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if flips.size == 0:
        raise ValueError("root bracketing failed")
    i = flips[-1] if last else flips[0]
    return float(grid[i]), float(grid[i + 1])


@functools.lru_cache(maxsize=8)
def _beta1(d_max: float) -> float:
    cfg = GammaGConfig(d_max)
    f = functools.partial(_beta1_root_fn, cfg=cfg)
    lo, hi = _bracket(f, np.linspace(2.0 + 1e-6, 4.0, 201), last=False)
    return float(optimize.bisect(f, lo, hi, xtol=1e-12))


@functools.lru_cache(maxsize=8)
def _beta2(d_max: float) -> float:
    cfg = GammaGConfig(d_max)
    f = functools.partial(_beta2_root_fn, cfg=cfg)
    lo, hi = _bracket(f, np.linspace(4.0 + 1e-6, 50.0, 921), last=True)
    return float(optimize.bisect(f, lo, hi, xtol=1e-12))


def beta1(cfg: GammaGConfig = DEFAULT_G) -> float:
    """Root of ``3 g1(beta) = (beta - 2)/beta`` on ``(2, 4]`` (about 2.216)."""
    return _beta1(float(cfg.d_max))


def beta2(cfg: GammaGConfig = DEFAULT_G) -> float:
    """Largest root of ``3 g2(beta) = (beta - 4)/beta`` on ``(4, 50]`` (about 6.054)."""
    return _beta2(float(cfg.d_max))


def b_min(beta: float, cfg: GammaGConfig = DEFAULT_G) -> float:
    """Lower exponent of the admissible range ``b ~ n^{b0}`` for EBC."""
    _check_beta(beta)
    den = 5 * beta**2 - 5 * beta - 4
    if beta <= beta1(cfg):
        return (beta - 1) * (3 * beta - 2 - 3 * beta * g1(beta, cfg)) / den
    return 2 * beta * (beta - 1) / den


def b_max(beta: float) -> float:
    _check_beta(beta)
    return (4 * beta**2 - 4 * beta - 4) / (5 * beta**2 - 5 * beta - 4)


def min_order_exponent(beta: float) -> float:
    """Exponent of the best normal-approximation error, ``-(b-1)(b-2)/(5b^2-5b-4)``."""
    return -(beta - 1) * (beta - 2) / (5 * beta**2 - 5 * beta - 4)


def practical_window(cfg: GammaGConfig = DEFAULT_G) -> tuple[float, float, float]:
    """``(b_min(beta1), b_max(beta1), delta_max)`` for the practical EBC rule."""
    b1 = beta1(cfg)
    lo, hi = b_min(b1, cfg), b_max(b1)
    return lo, hi, (hi - lo) / 3


def practical_choice_ebc(
    n: int,
    b0: float,
    delta: float,
    cfg: GammaGConfig = DEFAULT_G,
    constants: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> TuningSelection:
    """Rule of thumb ``b ~ n^{b0}``, ``ell ~ n^m``, ``k1 ~ n^{-m + delta/2}``
    with ``m = min(b0/2, 1 - b0)``; needs no knowledge of ``beta``."""
    lo, hi, dmax = practical_window(cfg)
    if not (0 < delta < dmax and lo + 2 * delta < b0 < hi - delta):
        raise InfeasibleParameterError(
            f"practical-choice window violated: need 0 < delta < {dmax:.5f} "
            f"and {lo + 2 * delta:.5f} < b0 < {hi - delta:.5f}"
        )
    cb, cl, ck = constants
    m = min(b0 / 2, 1 - b0)
    raw = {"b": cb * n**b0, "ell": cl * n**m, "k1": ck * n ** (-m + delta / 2)}
    return TuningSelection(
        _ceil(raw["b"]),
        _ceil(raw["ell"]),
        raw["k1"],
        SelectionRegime.PRACTICAL,
        {"b0": b0, "delta": delta, "ell_exponent": m, "k1_exponent": -m + delta / 2},
        raw,
    )


def ebc_optimal_poly(
    beta: float,
    n: int,
    b: int,
    delta: float,
    cfg: GammaGConfig = DEFAULT_G,
    constants: tuple[float, float] = (1.0, 1.0),
) -> TuningSelection:
    """Optimal ``(ell, k1)`` for EBC under polynomial mixing, given ``b``.

    Below ``beta1`` the block length grows as a ``beta``-dependent power of
    ``b``; above it ``ell ~ min(b^{1/2}, n/b)`` and ``k1 ~ n^{delta'}/ell``.
    ``delta'`` is the midpoint of its admissible interval.
    """
    _check_beta(beta)
    lo_exp, hi_exp = b_min(beta, cfg) + 2 * delta, b_max(beta) - delta
    if not n**lo_exp <= b <= n**hi_exp:
        raise InfeasibleParameterError(
            f"b outside the admissible EBC window [n^{lo_exp:.4f}, n^{hi_exp:.4f}]"
        )
    cl, ck = constants
    notes: list[str] = []
    b1 = beta1(cfg)
    if beta <= b1:
        gg = g1(beta, cfg)
        ell_exp = 1 + beta / (2 - 3 * beta + 3 * beta * gg)
        ell_raw = cl * min(b**ell_exp, n / b)
        k_exp = -beta / (5 * beta - 4 - 6 * beta * gg)
        bound = (
            2 * beta * (2 * beta - 4 + 3 * beta * (beta - 1) * gg)
            / ((5 * beta**2 - 5 * beta - 4) * (5 * beta - 4 - 6 * beta * gg))
        )
        if bound > 0:
            dprime = min(bound, delta / 2) / 2
        else:
            dprime = delta / 4
            notes.append("delta' upper bound non-positive; clamped to delta/4")
        k_raw = ck * n**dprime * max(ell_raw / b, (b * ell_raw) ** k_exp, 1 / ell_raw)
        case = "i"
        exps = {"case": case, "ell_b_exponent": ell_exp, "k1_blen_exponent": k_exp,
                "delta": delta, "delta_prime": dprime, "g1": gg}
    else:
        ell_raw = cl * min(math.sqrt(b), n / b)
        dprime = delta / 4
        k_raw = ck * n**dprime / ell_raw
        exps = {"case": "ii", "delta": delta, "delta_prime": dprime}
    raw = {"b": float(b), "ell": ell_raw, "k1": k_raw}
    return TuningSelection(int(b), _ceil(ell_raw), k_raw, SelectionRegime.POLYNOMIAL_EBC, exps, raw, tuple(notes))


def _slowly_varying(n: int, a: float) -> float:
    if n < 8:
        raise InfeasibleParameterError("n too small for log scaling")
    if not a > 0:
        raise ConfigError("L_n exponent must be positive")
    return math.log(n) ** (-a)


def ebc_optimal_expo(n: int, L_n_exponent: float = 1.0, constants: tuple[float, float] = (1.0, 1.0)) -> TuningSelection:
    """EBC under exponential mixing, with ``L_n = (log n)^{-a}``.

    ``ell ~ n^{1/3} (log n)^{2/3} L_n^{1/2}``, ``b = ceil(n/ell)``,
    ``k1 ~ (ell L_n^{1/2})^{-1}``.
    """
    L = _slowly_varying(n, L_n_exponent)
    cl, ck = constants
    logn = math.log(n)
    ell_raw = cl * n ** (1 / 3) * logn ** (2 / 3) * math.sqrt(L)
    ell = _ceil(ell_raw)
    k_raw = ck / (ell_raw * math.sqrt(L))
    raw = {"ell": ell_raw, "k1": k_raw, "L_n": L}
    return TuningSelection(
        math.ceil(n / ell), ell, k_raw, SelectionRegime.EXPONENTIAL_EBC,
        {"L_n": f"(log n)^-{L_n_exponent}", "ell_exponent": 1 / 3}, raw,
    )


def nbc_thresholds(beta: float, n: int, delta: float, epsilon: float, cfg: GammaGConfig = DEFAULT_G) -> dict:
    """Exponents ``e`` such that the NBC case boundaries sit at ``h = n^{-e}``."""
    gg = g1(beta, cfg)
    e1 = (7 * beta - 4) * (5 - 2 * epsilon) / (125 * beta - 100)
    e2 = (30 * gg + 25 + 20 * delta - epsilon * (12 * gg + 14)) / (150 * gg + 75)
    den3 = 35 * beta - 40 - 30 * beta * gg
    e3 = (7 * beta - 4) * (1 - 2 * delta) / den3 if den3 > 0 else math.inf
    return {"e1": e1, "e2": e2, "e3": e3, "g1": gg}


def nbc_optimal_poly(
    beta: float,
    n: int,
    h: float,
    delta: float = 0.01,
    epsilon: float = 0.01,
    cfg: GammaGConfig = DEFAULT_G,
) -> TuningSelection:
    """Optimal ``(b, ell)`` for NBC under polynomial mixing.

    Three regimes in ``h``: small ``h`` (case i) ties ``ell`` and ``b`` to
    ``nh^5``; intermediate (ii) and large (iii) ``h`` fix the series length
    ``b ell`` and put ``ell`` at the geometric midpoint of its allowed range.
    The returned ``k1`` is the oversmoothed NBC bandwidth with ``c0 = 0.5``.
    """
    _check_beta(beta)
    if not h > 0:
        raise ConfigError("h must be positive")
    th = nbc_thresholds(beta, n, delta, epsilon, cfg)
    gg = th["g1"]
    e1, e2, e3 = th["e1"], th["e2"], th["e3"]
    if h <= min(n ** (-e1), n ** (-e2)):
        case = "i"
        ell_raw = (n * h**5) ** (-0.5) * n ** (2 * epsilon / 5)
        b_raw = n ** (-1 + 3 * epsilon / 5) * h ** (-5)
        bl_raw = b_raw * ell_raw
    elif h > max(n ** (-e1), n ** (-e3) if math.isfinite(e3) else 0.0):
        case = "ii"
        bl_raw = n * h ** ((10 * beta - 20) / (7 * beta - 4))
        lower = n ** (epsilon / 5) * h ** (-5 * beta / (7 * beta - 4))
        upper = n**0.5 * h ** ((15 * beta - 20) / (14 * beta - 8))
        ell_raw = math.sqrt(lower * upper)
        b_raw = bl_raw / ell_raw
    else:
        case = "iii"
        bl_raw = (n ** (6 * gg + 2 + 10 * delta) * h ** (30 * gg - 15)) ** (1 / (6 * gg + 7))
        lower = n ** (epsilon / 5) * (n ** (1 - 2 * delta) * h**10) ** (-1 / (6 * gg + 7))
        upper = (n ** (6 * gg + 3 + 8 * delta) * h ** (30 * gg - 5)) ** (1 / (12 * gg + 14))
        ell_raw = math.sqrt(lower * upper)
        b_raw = bl_raw / ell_raw
    if b_raw < 1 or ell_raw < 1:
        raise InfeasibleParameterError("regime infeasible at this n")
    b, ell = _ceil(b_raw), _ceil(ell_raw)
    k = (0.75) ** (-0.4) * n**0.2 * (b * ell) ** (-0.2) * h
    raw = {"b": b_raw, "ell": ell_raw, "b_ell": bl_raw, "k1": k}
    exps = {"case": case, "delta": delta, "epsilon": epsilon, **th}
    return TuningSelection(b, ell, k, SelectionRegime.POLYNOMIAL_NBC, exps, raw)


def _smallest_int_with(power: float, coef: float, target: float = 1e3) -> int:
    # smallest integer l >= 1 with coef * l**power >= target
    if coef <= 0:
        raise InfeasibleParameterError("regime infeasible")
    ell = max(1, math.ceil((target / coef) ** (1 / power) * (1 - 1e-12)))
    while coef * ell**power < target:
        ell += 1
    while ell > 1 and coef * (ell - 1) ** power >= target:
        ell -= 1
    return ell


def nbc_first_branch(n: int, h: float) -> bool:
    """True when ``h^25 <= n^{-7} (log n)^{-18}`` (the small-bandwidth branch)."""
    logn = math.log(n)
    return 25 * math.log(h) <= -7 * logn - 18 * math.log(logn)


def nbc_optimal_expo(n: int, h: float, subsampling: bool = False, c0: float = 0.5) -> TuningSelection:
    """Optimal NBC ``(b, ell)`` under exponential mixing.

    The divergence conditions on ``ell`` are realised as the smallest integer
    making the relevant product reach ``10^3``. With ``subsampling=True`` the
    rule is specialised to ``b = 1``.
    """
    if not h > 0:
        raise ConfigError("h must be positive")
    if n < 8:
        raise InfeasibleParameterError("n too small for log scaling")
    logn = math.log(n)
    first = nbc_first_branch(n, h)
    if subsampling:
        ell_raw = max(n ** (4 / 9) * h ** (-5 / 9), n * (h * logn) ** (10 / 7))
        ell = _ceil(ell_raw)
        if ell > n:
            raise InfeasibleParameterError("regime infeasible")
        b, bl = 1, ell
        raw = {"ell": ell_raw}
    else:
        if first:
            bl = _ceil(n ** (4 / 9) * h ** (-5 / 9))
            ell = _smallest_int_with(9, n * h**10)
        else:
            bl = _ceil(n * (h * logn) ** (10 / 7))
            ell = _smallest_int_with(7, h**5 / logn**2)
        if ell > bl:
            raise InfeasibleParameterError("regime infeasible")
        b = math.ceil(bl / ell)
        raw = {"b_ell": float(bl)}
    k = nbc_bandwidth_value(n, h, b, ell, c0)
    raw["k1"] = k
    exps = {"branch": "first" if first else "second", "subsampling": subsampling}
    return TuningSelection(b, ell, k, SelectionRegime.EXPONENTIAL_NBC, exps, raw)


def nbc_bandwidth_value(n: int, h: float, b: int, ell: int, c0: float = 0.5) -> float:
    return (1.0 - c0 * c0) ** (-0.4) * n**0.2 * (b * ell) ** (-0.2) * h


def uns_k_exponent(beta: float, delta_prime: float = 0.01, cfg: GammaGConfig = DEFAULT_G) -> float:
    """Exponent of ``n`` in the optimal UNS bandwidth under polynomial mixing."""
    _check_beta(beta)
    if beta < beta1(cfg):
        return -beta / (beta * (5 - 6 * g1(beta, cfg)) - 4)
    if 4 < beta < beta2(cfg):
        return -2 * beta / (beta * (7 - 3 * g2(beta, cfg)) - 4)
    return -1 / 3 + delta_prime


def uns_optimal_poly(beta: float, n: int, delta_prime: float = 0.01, cfg: GammaGConfig = DEFAULT_G) -> TuningSelection:
    """UNS under polynomial mixing: ``k ~ n^{e(beta)}``, ``ell = k^{-1-delta'}``, ``b ~ n/ell``."""
    if not delta_prime > 0:
        raise ConfigError("delta_prime must be positive")
    e = uns_k_exponent(beta, delta_prime, cfg)
    k_raw = float(n) ** e
    ell_raw = k_raw ** (-1 - delta_prime)
    ell = _ceil(ell_raw)
    if ell > n:
        raise InfeasibleParameterError("regime infeasible at this n")
    raw = {"k1": k_raw, "ell": ell_raw}
    return TuningSelection(
        math.ceil(n / ell), ell, k_raw, SelectionRegime.POLYNOMIAL_UNS,
        {"k_exponent": e, "delta_prime": delta_prime}, raw,
    )


def uns_optimal_expo(n: int, L_n_exponent: float = 1.0) -> TuningSelection:
    """UNS under exponential mixing: ``k ~ n^{-1/3}(log n)^{-2/3}/L_n``, ``ell ~ (k L_n^3)^{-1}``."""
    L = _slowly_varying(n, L_n_exponent)
    k_raw = n ** (-1 / 3) * math.log(n) ** (-2 / 3) / L
    ell_raw = 1.0 / (k_raw * L**3)
    ell = _ceil(ell_raw)
    if ell > n:
        raise InfeasibleParameterError("regime infeasible at this n")
    raw = {"k1": k_raw, "ell": ell_raw, "L_n": L}
    return TuningSelection(
        math.ceil(n / ell), ell, k_raw, SelectionRegime.EXPONENTIAL_UNS,
        {"L_n": f"(log n)^-{L_n_exponent}"}, raw,
    )


@dataclass(frozen=True)
class NormalApproxInputs:
    y: float
    n: int
    h: float
    f_x0: float
    f2_x0: float
    mu2: float
    nu2: float

    def __post_init__(self) -> None:
        if not self.f_x0 > 0:
            raise ValueError("f_x0 must be positive")


def std_normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_approx(inp: NormalApproxInputs) -> float:
    """Normal approximation to ``P((nh)^{1/2}(fhat_h - f) <= y)`` with the leading bias shift."""
    shift = math.sqrt(inp.n) * inp.h**2.5 * inp.f2_x0 * inp.mu2 / 2
    return std_normal_cdf((inp.y - shift) / math.sqrt(inp.f_x0 * inp.nu2))


def variance_exact_iid(model: ProcessModel, x0: float, h: float, spec: KernelSpec = EPANECHNIKOV) -> float:
    """``(nh) Var(fhat_h(x0))`` for i.i.d. draws from the model's marginal.

    Equals ``int K(u)^2 f(x0 + hu) du - h (int K(u) f(x0 + hu) du)^2``,
    evaluated by adaptive quadrature.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    lim = spec.support_radius
    a, b = (-np.inf, np.inf) if math.isinf(lim) else (-lim, lim)

    def quad(fun):
        val, err = integrate.quad(fun, a, b, epsabs=1e-13, epsrel=1e-12, limit=200, full_output=False)
        if not math.isfinite(val) or err > 1e-9:
            raise ArithmeticError("quadrature did not converge")
        return val

    second = quad(lambda u: float(spec(u)) ** 2 * marginal_density(model, x0 + h * u))
    first = quad(lambda u: float(spec(u)) * marginal_density(model, x0 + h * u))
    return second - h * first * first


class RateRegime(str, enum.Enum):
    EXPONENTIAL_MIXING = "ExponentialMixing"
    IID = "IID"


@dataclass(frozen=True)
class RateRow:
    h_range: str
    rates: dict
    best: tuple
    worst: tuple


_EXP_ROWS = [
    RateRow("h ∝ n^{-1/5}",
            {"EBC": "h log n", "NBC": "(h log n)^{5/7}", "UNS": "inconsistent"}, ("EBC",), ("UNS",)),
    RateRow("n^{-7/25}(log n)^{2/5} ⪯ h ≺ n^{-1/5}",
            {"EBC": "h log n", "NBC": "(h log n)^{5/7}", "UNS": "n^{1/2}h^{5/2}"}, ("EBC",), ("UNS",)),
    RateRow("n^{-7/25}(log n)^{-18/25} ⪯ h ⪯ n^{-7/25}(log n)^{2/5}",
            {"EBC": "h log n", "NBC": "(h log n)^{5/7}", "UNS": "n^{1/2}h^{5/2}"}, ("EBC",), ("NBC",)),
    RateRow("n^{-1/3}(log n)^{2/3} ⪯ h ⪯ n^{-7/25}(log n)^{-18/25}",
            {"EBC": "h log n", "NBC": "(nh)^{-5/18}", "UNS": "n^{1/2}h^{5/2}"}, ("EBC",), ("NBC",)),
    RateRow("n^{-1/3}(log n)^{-2/3}L_n^{-1} ⪯ h ⪯ n^{-1/3}(log n)^{2/3}",
            {"EBC": "h log n", "NBC": "(nh)^{-5/18}", "UNS": "h log n"}, ("EBC", "UNS"), ("NBC",)),
    RateRow("n^{-1/3}(log n)^{-2/3}L_n^{2} ⪯ h ⪯ n^{-1/3}(log n)^{-2/3}L_n^{-1}",
            {"EBC": "n^{-1/3}(log n)^{1/3}L_n^{-1}", "NBC": "(nh)^{-5/18}",
             "UNS": "n^{-1/3}(log n)^{1/3}L_n^{-1}"}, ("EBC", "UNS"), ("NBC",)),
    RateRow("n^{-1} ≺ h ⪯ n^{-1/3}(log n)^{-2/3}L_n^{2}",
            {"EBC": "(nh)^{-1/2}", "NBC": "(nh)^{-5/18}", "UNS": "(nh)^{-1/2}"}, ("EBC", "UNS"), ("NBC",)),
]

_IID_ROWS = [
    RateRow("h ∝ n^{-1/5}",
            {"EBC": "n^{5/18}h^{5/2}", "NBC": "(nh)^{-5/18}", "UNS": "inconsistent"}, ("EBC",), ("UNS",)),
    RateRow("n^{-7/27} ⪯ h ≺ n^{-1/5}",
            {"EBC": "n^{5/18}h^{5/2}", "NBC": "(nh)^{-5/18}", "UNS": "n^{1/2}h^{5/2}"}, ("EBC",), ("UNS",)),
    RateRow("n^{-7/25} ⪯ h ⪯ n^{-7/27}",
            {"EBC": "(nh)^{-1/2}", "NBC": "(nh)^{-5/18}", "UNS": "n^{1/2}h^{5/2}"}, ("EBC",), ("UNS",)),
    RateRow("n^{-1/3} ⪯ h ⪯ n^{-7/25}",
            {"EBC": "(nh)^{-1/2}", "NBC": "(nh)^{-5/18}", "UNS": "n^{1/2}h^{5/2}"}, ("EBC",), ("NBC",)),
    RateRow("n^{-1} ≺ h ⪯ n^{-1/3}",
            {"EBC": "(nh)^{-1/2}", "NBC": "(nh)^{-5/18}", "UNS": "(nh)^{-1/2}"}, ("EBC", "UNS"), ("NBC",)),
]

RATE_TABLES = {RateRegime.EXPONENTIAL_MIXING: _EXP_ROWS, RateRegime.IID: _IID_ROWS}


def _normalise(desc: str) -> str:
    return "".join(desc.replace("−", "-").split())


def rate_table(regime: Union[RateRegime, str], h_descriptor: str) -> RateRow:
    """Look up the optimal-rate comparison row for a range of ``h``.

    ``h_descriptor`` is either the row's range string (whitespace and minus
    sign variants ignored) or ``"row<i>"`` with ``i`` counted from 1.
    """
    rows = RATE_TABLES[RateRegime(regime)]
    key = _normalise(h_descriptor)
    if key.startswith("row") and key[3:].isdigit():
        i = int(key[3:]) - 1
        if 0 <= i < len(rows):
            return rows[i]
    for row in rows:
        if _normalise(row.h_range) == key:
            return row
    valid = "; ".join(r.h_range for r in rows)
    raise KeyError(f"unknown h range {h_descriptor!r}; valid rows: {valid}")


def q_exponents(beta: float, b0: float, cfg: GammaGConfig = DEFAULT_G) -> float:
    """Exponent ``q`` of the bootstrap-induced EBC error under the practical rule.

    Arbitrarily small constants (``delta``) are set to zero.
    """
    m = min(b0 / 2, 1 - b0)
    gg1, gg2 = g1(beta, cfg), g2(beta, cfg)
    t1 = -m * (beta - 2) / beta
    t2 = -b0 / 2 - m / 2 - m * (-1.5 + 3 * gg1)
    t3 = -0.5 - b0 / 2 + m / 2 + m * 1.5 * (1 - gg2)
    return max(t1, t2, t3)


CURVE_KINDS = ("g0", "g1", "g2", "bminmax", "q_exponents")
Q_B0 = (2 / 3, 0.569)


def g_curve_export(which: str, beta_grid: Iterable[float], cfg: GammaGConfig = DEFAULT_G) -> tuple[list[str], list[tuple]]:
    """Tabulate a curve over ``beta_grid``; returns ``(header, rows)``."""
    if which not in CURVE_KINDS:
        raise ValueError(f"unknown curve {which!r}; choose from {CURVE_KINDS}")
    betas = [float(b) for b in beta_grid]
    if any(not b > 2 for b in betas):
        raise ValueError("beta out of range")
    if which in ("g0", "g1", "g2"):
        header = ["beta", "value", "minimizer_d"]
        rows = [(b, *g_infimum(which, b, cfg)) for b in betas]
    elif which == "bminmax":
        header = ["beta", "b_min", "b_max"]
        rows = [(b, b_min(b, cfg), b_max(b)) for b in betas]
    else:
        header = ["beta", "q_b0_0.6667", "q_b0_0.569", "min_order"]
        rows = [(b, *(q_exponents(b, b0, cfg) for b0 in Q_B0), min_order_exponent(b)) for b in betas]
    return header, rows


def write_table_csv(header: Sequence[str], rows: Iterable[Sequence], path: Union[str, Path]) -> Path:
    """CSV with floats at 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return path
