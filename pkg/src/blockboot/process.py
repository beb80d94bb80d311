"""Stationary ARMA(1,1) series with a known Gaussian marginal.

The recursion ``X_t - phi X_{t-1} = e_t + theta e_{t-1}`` is started from its
stationary law: ``X_0`` is drawn from the marginal and ``e_0`` is a fresh
innovation, so no burn-in is needed.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence, Union

import numpy as np
from scipy.signal import lfilter

from .kernels import TimeSeriesSample
from .rng import SeedLike, generator


class MixingRegime(str, enum.Enum):
    POLYNOMIAL = "polynomial"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class MixingProfile:
    """Decay class of the strong mixing coefficients.

    ``alpha(t) = O(t^-beta)`` for the polynomial regime, ``O(exp(-C t))``
    for the exponential one. Only the regime tag drives tuning-rule dispatch.
    """

    regime: MixingRegime
    beta: Optional[float] = None
    rate_c: Optional[float] = None

    def __post_init__(self) -> None:
        regime = MixingRegime(self.regime)
        object.__setattr__(self, "regime", regime)
        if regime is MixingRegime.POLYNOMIAL:
            if self.beta is None or not self.beta > 2:
                raise ValueError("polynomial mixing requires beta > 2")
        elif self.rate_c is None or not self.rate_c > 0:
            raise ValueError("exponential mixing requires rate_c > 0")

    @classmethod
    def polynomial(cls, beta: float) -> "MixingProfile":
        return cls(MixingRegime.POLYNOMIAL, beta=beta)

    @classmethod
    def exponential(cls, rate_c: float) -> "MixingProfile":
        return cls(MixingRegime.EXPONENTIAL, rate_c=rate_c)


@dataclass(frozen=True)
class TrueDensity:
    f_x0: float
    f2_x0: float

    def __post_init__(self) -> None:
        if self.f_x0 < 0:
            raise ValueError("density must be nonnegative")


class Process(Protocol):
    """What downstream modules need from a data-generating process."""

    id: str

    def simulate(self, n: int, seed: SeedLike) -> TimeSeriesSample: ...

    def marginal_density(self, x): ...

    def marginal_density_dd(self, x): ...

    def mixing_profile(self) -> MixingProfile: ...


@dataclass(frozen=True)
class ProcessModel:
    """Gaussian ARMA(1,1) model."""

    phi: float
    theta: float
    innovation_sd: float = 1.0
    id: str = "arma11"

    def __post_init__(self) -> None:
        if not abs(self.phi) < 1:
            raise ValueError("|phi| must be < 1 for stationarity")
        if not self.innovation_sd > 0:
            raise ValueError("innovation_sd must be positive")

    @property
    def marginal_variance(self) -> float:
        s2 = self.innovation_sd**2
        return s2 * (1.0 + (self.theta + self.phi) ** 2 / (1.0 - self.phi**2))

    @property
    def lag1_autocorrelation(self) -> float:
        p, t = self.phi, self.theta
        return (p + t) * (1 + p * t) / (1 + 2 * p * t + t * t)

    def simulate(self, n: int, seed: SeedLike) -> TimeSeriesSample:
        return simulate(self, n, seed)

    def marginal_density(self, x):
        return marginal_density(self, x)

    def marginal_density_dd(self, x):
        return marginal_density_dd(self, x)

    def mixing_profile(self) -> MixingProfile:
        return mixing_profile(self)

    def true_density(self, x0: float) -> TrueDensity:
        return TrueDensity(float(marginal_density(self, x0)), float(marginal_density_dd(self, x0)))


REFERENCE_MODEL = ProcessModel(phi=0.4, theta=0.3)


def _standard_normals(model: ProcessModel, n: int, seed: SeedLike) -> np.ndarray:
    # layout: [X_0 draw, e_0, e_1, ..., e_n]
    return generator(seed).standard_normal(n + 2)


def _filter_rows(model: ProcessModel, z: np.ndarray) -> np.ndarray:
    sd = model.innovation_sd
    x0 = math.sqrt(model.marginal_variance) * z[:, 0]
    e0 = sd * z[:, 1]
    eps = sd * z[:, 2:]
    zi = (model.phi * x0 + model.theta * e0)[:, None]
    out, _ = lfilter([1.0, model.theta], [1.0, -model.phi], eps, axis=1, zi=zi)
    return out


def simulate_many(model: ProcessModel, n: int, seeds: Sequence[SeedLike]) -> np.ndarray:
    """Simulate one series per seed; row ``i`` equals ``simulate(model, n, seeds[i])``."""
    if n < 1:
        raise ValueError("n must be positive")
    z = np.empty((len(seeds), n + 2))
    for i, s in enumerate(seeds):
        z[i] = _standard_normals(model, n, s)
    return _filter_rows(model, z)


def simulate(model: ProcessModel, n: int, seed: SeedLike) -> TimeSeriesSample:
    """Draw ``X_1..X_n`` from the stationary ARMA(1,1) law.

    Deterministic given ``seed``; distinct seeds give independent streams.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    x = simulate_many(model, n, [seed])[0]
    origin = {"model": model.id} if isinstance(seed, np.random.Generator) else {"model": model.id, "seed": _seed_repr(seed)}
    return TimeSeriesSample(x, origin=origin)


def _seed_repr(seed) -> Union[int, list]:
    if isinstance(seed, np.random.SeedSequence):
        return [int(seed.entropy), *[int(k) for k in seed.spawn_key]]
    return int(seed)


def marginal_density(model: ProcessModel, x):
    var = model.marginal_variance
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x / var) / math.sqrt(2.0 * math.pi * var)
    return float(out) if out.ndim == 0 else out


def marginal_density_dd(model: ProcessModel, x):
    """Second derivative of the Gaussian marginal: ``f(x)(x^2/s^4 - 1/s^2)``."""
    var = model.marginal_variance
    x = np.asarray(x, dtype=float)
    out = np.asarray(marginal_density(model, x)) * (x * x / var**2 - 1.0 / var)
    return float(out) if out.ndim == 0 else out


def mixing_profile(model: ProcessModel) -> MixingProfile:
    """ARMA(1,1) with Gaussian noise is exponentially strong mixing.

    ``rate_c`` is informational: ``-log|phi|``, or infinity when ``phi = 0``.
    """
    rate = -math.log(abs(model.phi)) if model.phi != 0 else math.inf
    return MixingProfile.exponential(rate)


def write_series_csv(sample: Union[TimeSeriesSample, Iterable[float]], path: Union[str, Path]) -> Path:
    """Write a single ``x`` column with 17 significant digits."""
    values = sample.values if isinstance(sample, TimeSeriesSample) else np.asarray(list(sample), dtype=float)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"])
        for v in values:
            w.writerow([format(float(v), ".17g")])
    return path


def read_series_csv(path: Union[str, Path]) -> TimeSeriesSample:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x"]:
        raise ValueError(f"{path}: expected a single 'x' header column")
    values = [float(r[0]) for r in rows[1:] if r]
    return TimeSeriesSample(np.array(values), origin={"path": str(path)})
