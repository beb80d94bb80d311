"""Hybrid block bootstrap for the kernel density estimator.

``b`` blocks of ``ell`` consecutive observations are drawn with replacement
from the ``n - ell + 1`` overlapping blocks. Only the block averages of the
kernel weights matter, so everything is expressed through
``U_i = (ell k)^{-1} sum_{t=i}^{i+ell-1} K((X_t - x0)/k)``.

The bootstrap statistic is

    T* = (b ell k1)^{1/2} (fhat*_{k1} - E*[fhat*_{k1}]) + tau (E*[fhat*_{k2}] - fhat_{k3})

whose second term is fixed given the sample. ``b = 1`` is subsampling,
``b = floor(n/ell)`` the moving block bootstrap.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, InfeasibleParameterError
from .kernels import EPANECHNIKOV, KernelSpec, SampleLike, kde_many, kernel_terms, sample_values
from .rng import SeedLike, generator

ANCHOR_EVERY = 4096
MAX_SERIES_FACTOR = 100  # cap on b*ell in multiples of n
WARN_SERIES_FACTOR = 4
MAX_ENUMERATION = 10**6
_GATHER_CHUNK = 2**22  # elements per gather when resampling many bandwidths


class Method(str, enum.Enum):
    EBC = "EBC"
    NBC = "NBC"
    UNS = "UNS"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class BootstrapParams:
    """Everything that defines one member of the estimator family."""

    b: int
    ell: int
    tau: float
    k1: float
    k2: float
    k3: float
    method: Method = Method.CUSTOM
    c0: Optional[float] = None
    c2: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        if int(self.b) != self.b or self.b < 1:
            raise ConfigError("b must be a positive integer")
        if int(self.ell) != self.ell or self.ell < 1:
            raise ConfigError("ell must be a positive integer")
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "ell", int(self.ell))
        if not self.tau >= 0:
            raise ConfigError("tau must be nonnegative")
        for name in ("k1", "k2", "k3"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.method is Method.UNS and self.tau != 0:
            raise ConfigError("UNS requires tau = 0")
        if self.method is Method.NBC:
            if self.k1 != self.k2:
                raise ConfigError("NBC requires k1 = k2")
            if not math.isclose(self.tau, math.sqrt(self.b * self.ell * self.k1), rel_tol=1e-12):
                raise ConfigError("NBC requires tau = (b ell k1)^{1/2}")
        if self.method in (Method.EBC, Method.NBC) and self.tau > 0 and not self.k3 < self.k2:
            raise ConfigError("k3 must be smaller than k2")

    def check_sample(self, n: int, cap_factor: int = MAX_SERIES_FACTOR) -> None:
        """Validate the block layout against a sample of size ``n``."""
        if self.ell > n:
            raise InfeasibleParameterError("block length exceeds sample")
        if self.b * self.ell > cap_factor * n:
            raise InfeasibleParameterError(
                f"bootstrap series length b*ell={self.b * self.ell} exceeds {cap_factor}*n"
            )
        if self.b * self.ell > WARN_SERIES_FACTOR * n:
            warnings.warn(f"b*ell={self.b * self.ell} is more than {WARN_SERIES_FACTOR}n", stacklevel=3)


@dataclass(frozen=True)
class BlockStats:
    """Block averages ``U_1..U_{n-ell+1}`` for one sample, block length and bandwidth."""

    values: np.ndarray
    ell: int
    k: float
    x0: float
    sums: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("block statistics must be a nonempty vector")

    @property
    def n_blocks(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class CdfEstimate:
    p_hat: float
    draws: int
    count: int

    @property
    def std_err(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.draws)

    def as_dict(self) -> dict:
        return {"p_hat": self.p_hat, "draws": self.draws, "count": self.count, "std_err": self.std_err}


def window_sums(a: np.ndarray, ell: int, anchor_every: int = ANCHOR_EVERY) -> np.ndarray:
    """Sums of every run of ``ell`` consecutive entries along the last axis.

    O(n) sliding update; the running sum is re-anchored to a direct sum every
    ``anchor_every`` windows so rounding drift stays bounded.
    """
    a = np.asarray(a, dtype=float)
    squeeze = a.ndim == 1
    a = np.atleast_2d(a)
    n = a.shape[1]
    if not 1 <= ell <= n:
        raise InfeasibleParameterError("block length exceeds sample")
    m = n - ell + 1
    if ell == 1:
        out = a.copy()
    else:
        step = a[:, ell:] - a[:, : m - 1]
        out = np.empty((a.shape[0], m))
        for start in range(0, m, anchor_every):
            stop = min(start + anchor_every, m)
            base = a[:, start : start + ell].sum(axis=1)
            out[:, start] = base
            if stop > start + 1:
                out[:, start + 1 : stop] = base[:, None] + np.cumsum(step[:, start : stop - 1], axis=1)
        np.maximum(out, 0.0, out=out)  # kernel weights are nonnegative; clear rounding residue
    return out[0] if squeeze else out


def block_sums_many(x: np.ndarray, ell: int, ks, x0: float, spec: KernelSpec) -> np.ndarray:
    """Raw kernel window sums, one row per bandwidth in ``ks``."""
    return window_sums(kernel_terms(x, x0, ks, spec), ell)


def block_stats(sample: SampleLike, ell: int, k: float, x0: float, spec: KernelSpec = EPANECHNIKOV) -> BlockStats:
    """Compute ``U_{i,k,ell}`` for every block start ``i``."""
    x = sample_values(sample)
    if not k > 0:
        raise ValueError("bandwidth k must be positive")
    if ell < 1:
        raise ValueError("ell must be positive")
    if ell > x.size:
        raise InfeasibleParameterError("block length exceeds sample")
    sums = block_sums_many(x, ell, [k], x0, spec)[0]
    return BlockStats(sums / (ell * k), int(ell), float(k), float(x0), sums)


def _conditional_means(sums: np.ndarray, ell: int, ks) -> np.ndarray:
    m = sums.shape[-1]
    return sums.sum(axis=-1) / (m * ell * np.asarray(ks, dtype=float))


def conditional_mean(stats: BlockStats) -> float:
    """``E[fhat* | X]``: the plain average of the block statistics (free of ``b``)."""
    if stats.sums is not None:
        return float(_conditional_means(stats.sums[None, :], stats.ell, [stats.k])[0])
    return float(np.mean(stats.values))


def bias_shift(sample: SampleLike, params: BootstrapParams, x0: float, spec: KernelSpec = EPANECHNIKOV) -> float:
    """The sample-measurable term ``tau (E*[fhat*_{k2}] - fhat_{k3})``."""
    if params.tau == 0:
        return 0.0
    x = sample_values(sample)
    cm2 = conditional_mean(block_stats(x, params.ell, params.k2, x0, spec))
    f3 = float(kde_many(x, x0, [params.k3], spec)[0])
    return params.tau * (cm2 - f3)


def draw_indices(rng: np.random.Generator, n_blocks: int, b: int, size: int) -> np.ndarray:
    """Zero-based block starts ``J`` of shape ``(size, b)``, uniform on ``0..n_blocks-1``."""
    return rng.integers(0, n_blocks, size=(size, b))


def resample_means(values: np.ndarray, J: np.ndarray) -> np.ndarray:
    """``fhat*`` for each index tuple (rows of ``J``), per row of ``values``.

    ``values`` is ``(m,)`` or ``(K, m)``; the result is ``(B,)`` or ``(K, B)``.
    """
    b = J.shape[1]
    if values.ndim == 1:
        return values[J].sum(axis=-1) / b
    out = np.empty((values.shape[0], J.shape[0]))
    rows = max(1, _GATHER_CHUNK // max(J.size, 1))
    for lo in range(0, values.shape[0], rows):
        out[lo : lo + rows] = values[lo : lo + rows][:, J].sum(axis=-1) / b
    return out


def first_terms(values: np.ndarray, cmeans, ks, b: int, ell: int, J: np.ndarray) -> np.ndarray:
    """Random part ``(b ell k)^{1/2} (fhat*_k - E*[fhat*_k])`` of ``T*``.

    Vectorised over bandwidths when ``values`` has one row per entry of ``ks``.
    """
    fstar = resample_means(values, J)
    if values.ndim == 1:
        return math.sqrt(b * ell * float(ks)) * (fstar - cmeans)
    scale = np.sqrt(b * ell * np.asarray(ks, dtype=float))
    return scale[:, None] * (fstar - np.asarray(cmeans)[:, None])


def _check_compatible(stats1: BlockStats, stats2: Optional[BlockStats]) -> None:
    if stats2 is None:
        return
    if stats1.ell != stats2.ell or stats1.x0 != stats2.x0 or stats1.n_blocks != stats2.n_blocks:
        raise ValueError("incompatible block statistics")


def t_star_draws(
    stats1: BlockStats,
    shift: float,
    params: BootstrapParams,
    B: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``B`` independent draws of ``T*`` given ``U_{.,k1,ell}`` and the bias shift."""
    J = draw_indices(rng, stats1.n_blocks, params.b, B)
    first = first_terms(stats1.values, conditional_mean(stats1), params.k1, params.b, params.ell, J)
    return first + shift


def draw_t_star(
    stats1: BlockStats,
    stats2: Optional[BlockStats],
    f_k3: float,
    params: BootstrapParams,
    rng: SeedLike,
) -> float:
    """One draw of ``T*``.

    The same index tuple serves both bandwidths; the ``k2`` part only enters
    through its conditional mean, so it is not random given the sample.
    """
    _check_compatible(stats1, stats2)
    if params.ell != stats1.ell or params.k1 != stats1.k:
        raise ValueError("incompatible block statistics")
    if params.tau != 0:
        if stats2 is None or stats2.k != params.k2:
            raise ValueError("incompatible block statistics")
        shift = params.tau * (conditional_mean(stats2) - f_k3)
    else:
        shift = 0.0
    return float(t_star_draws(stats1, shift, params, 1, generator(rng))[0])


def bootstrap_cdf(
    sample: SampleLike,
    params: BootstrapParams,
    x0: float,
    y: float,
    B: int,
    spec: KernelSpec = EPANECHNIKOV,
    rng: SeedLike = 0,
) -> CdfEstimate:
    """Monte Carlo estimate of ``P(T* <= y | X)`` from ``B`` bootstrap draws.

    Parameters
    ----------
    sample : TimeSeriesSample or array_like
    params : BootstrapParams
    x0, y : float
        Evaluation point of the density and of the distribution function.
    B : int
        Number of bootstrap draws.
    spec : KernelSpec
    rng : int, SeedSequence or Generator
        Random stream; the estimate is a deterministic function of it.

    Returns
    -------
    CdfEstimate
    """
    if B < 1:
        raise ValueError("B must be positive")
    x = sample_values(sample)
    params.check_sample(x.size)
    s1 = block_stats(x, params.ell, params.k1, x0, spec)
    shift = bias_shift(x, params, x0, spec)
    draws = t_star_draws(s1, shift, params, B, generator(rng))
    count = int(np.count_nonzero(draws <= y))
    return CdfEstimate(count / B, B, count)


def make_ebc_params(n: int, h: float, b: int, ell: int, k1: float, c0: float = 0.5, c2: float = 1.0) -> BootstrapParams:
    """Explicit bias correction: ``k2 = c2 n^{-1/9}``, ``k3 = c0 k2``,
    ``tau = n^{1/2} h^{5/2} / ((1 - c0^2) k2^2)``."""
    if not 0 < c0 < 1:
        raise ConfigError("invalid c0")
    if not c2 > 0:
        raise ConfigError("c2 must be positive")
    if not (h > 0 and k1 > 0):
        raise ConfigError("h and k1 must be positive")
    k2 = c2 * n ** (-1.0 / 9.0)
    k3 = c0 * k2
    tau = math.sqrt(n) * h**2.5 / ((1.0 - c0 * c0) * k2 * k2)
    return BootstrapParams(b, ell, tau, k1, k2, k3, Method.EBC, c0=c0, c2=c2)


def nbc_bandwidth(n: int, h: float, b: int, ell: int, c0: float = 0.5) -> float:
    """Oversmoothed bandwidth ``(1 - c0^2)^{-2/5} n^{1/5} (b ell)^{-1/5} h``."""
    return (1.0 - c0 * c0) ** (-0.4) * n**0.2 * (b * ell) ** (-0.2) * h


def make_nbc_params(n: int, h: float, b: int, ell: int, c0: float = 0.5) -> BootstrapParams:
    """No explicit correction: ``k1 = k2 = k``, ``k3 = c0 k``, ``tau = (b ell k)^{1/2}``."""
    if not 0 < c0 < 1:
        raise ConfigError("invalid c0")
    if not h > 0:
        raise ConfigError("h must be positive")
    k = nbc_bandwidth(n, h, b, ell, c0)
    return BootstrapParams(b, ell, math.sqrt(b * ell * k), k, k, c0 * k, Method.NBC, c0=c0)


def make_uns_params(b: int, ell: int, k1: float) -> BootstrapParams:
    """Undersmoothing: no bias term (``tau = 0``)."""
    return BootstrapParams(b, ell, 0.0, k1, k1, k1, Method.UNS)


@dataclass(frozen=True)
class DiscreteLaw:
    """A finitely supported distribution: sorted atoms with their probabilities."""

    values: np.ndarray
    probs: np.ndarray
    counts: np.ndarray
    total: int

    @classmethod
    def from_draws(cls, draws: np.ndarray) -> "DiscreteLaw":
        vals, counts = np.unique(draws, return_counts=True)
        return cls(vals, counts / draws.size, counts, int(draws.size))

    def cdf(self, y: float) -> float:
        return float(self.counts[self.values <= y].sum() / self.total)

    def mean(self) -> float:
        return float(np.dot(self.values, self.counts) / self.total)

    def quantile(self, q: float) -> float:
        cum = np.cumsum(self.counts) / self.total
        return float(self.values[np.searchsorted(cum, q, side="left")])


def _all_index_tuples(n_blocks: int, b: int, guard: int) -> np.ndarray:
    if n_blocks**b > guard:
        raise InfeasibleParameterError("enumeration too large")
    return np.indices((n_blocks,) * b).reshape(b, -1).T


def enumerate_resample_mean(stats: BlockStats, b: int, guard: int = MAX_ENUMERATION) -> DiscreteLaw:
    """Exact law of ``fhat*`` over all ``(n-ell+1)^b`` index tuples."""
    J = _all_index_tuples(stats.n_blocks, b, guard)
    return DiscreteLaw.from_draws(resample_means(stats.values, J))


def enumerate_t_star(
    sample: SampleLike,
    params: BootstrapParams,
    x0: float,
    spec: KernelSpec = EPANECHNIKOV,
    guard: int = MAX_ENUMERATION,
) -> DiscreteLaw:
    """Exact conditional law of ``T*`` by exhaustive enumeration (small cases only)."""
    x = sample_values(sample)
    params.check_sample(x.size)
    s1 = block_stats(x, params.ell, params.k1, x0, spec)
    J = _all_index_tuples(s1.n_blocks, params.b, guard)
    shift = bias_shift(x, params, x0, spec)
    first = first_terms(s1.values, conditional_mean(s1), params.k1, params.b, params.ell, J)
    return DiscreteLaw.from_draws(first + shift)
