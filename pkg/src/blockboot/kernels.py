"""Kernel functions and the kernel density estimator at a point."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate

_QUAD_TOL = 1e-10


class KernelKind(str, enum.Enum):
    EPANECHNIKOV = "epanechnikov"
    GAUSSIAN = "gaussian"


def _epanechnikov(u: np.ndarray) -> np.ndarray:
    # K(+-1) = 0, so the open interval suffices
    return np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)


def _gaussian(u: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


_KERNEL_FUNCS = {
    KernelKind.EPANECHNIKOV: _epanechnikov,
    KernelKind.GAUSSIAN: _gaussian,
}

_CLOSED_FORM_MOMENTS = {
    KernelKind.EPANECHNIKOV: (0.2, 0.6),
    KernelKind.GAUSSIAN: (1.0, 1.0 / (2.0 * math.sqrt(math.pi))),
}

_SUPPORT = {
    KernelKind.EPANECHNIKOV: 1.0,
    KernelKind.GAUSSIAN: math.inf,
}


def _quad_over_support(func, radius: float) -> float:
    if math.isinf(radius):
        val, _ = integrate.quad(func, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
    else:
        val, _ = integrate.quad(func, -radius, radius, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(val)


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric, nonnegative, bounded second-order kernel.

    Use :meth:`of` (or the module constants :data:`EPANECHNIKOV` and
    :data:`GAUSSIAN`) rather than filling the fields by hand; construction
    checks normalisation and the moments by quadrature.
    """

    kind: KernelKind
    support_radius: float
    mu2: float
    nu2: float

    def __post_init__(self) -> None:
        kind = KernelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.support_radius != _SUPPORT[kind]:
            raise ValueError(f"{kind.value} kernel has support radius {_SUPPORT[kind]}")
        if not (0.0 < self.mu2 < math.inf and 0.0 < self.nu2 < math.inf):
            raise ValueError("kernel moments must be positive and finite")
        f = _KERNEL_FUNCS[kind]
        mass = _quad_over_support(lambda u: float(f(np.asarray(u))), self.support_radius)
        if abs(mass - 1.0) > _QUAD_TOL:
            raise ValueError(f"kernel integrates to {mass!r}, not 1")
        probe = np.linspace(-3.0, 3.0, 61)
        vals = f(probe)
        if np.any(vals < 0) or not np.array_equal(vals, f(-probe)):
            raise ValueError("kernel must be nonnegative and symmetric")

    @classmethod
    def of(cls, kind: Union[KernelKind, str]) -> "KernelSpec":
        kind = KernelKind(kind)
        mu2, nu2 = _CLOSED_FORM_MOMENTS[kind]
        return cls(kind, _SUPPORT[kind], mu2, nu2)

    def __call__(self, u: ArrayLike) -> np.ndarray:
        return _KERNEL_FUNCS[self.kind](np.asarray(u, dtype=float))


EPANECHNIKOV = KernelSpec.of(KernelKind.EPANECHNIKOV)
GAUSSIAN = KernelSpec.of(KernelKind.GAUSSIAN)


@dataclass(frozen=True)
class TimeSeriesSample:
    """An observed stretch ``X_1, ..., X_n`` of a stationary series."""

    values: np.ndarray
    origin: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("sample must be one-dimensional")
        if arr.size < 2:
            raise ValueError("sample needs at least two observations")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class DensityEvalPoint:
    x0: float
    h: float

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise ValueError("bandwidth h must be positive")


SampleLike = Union[TimeSeriesSample, ArrayLike]


def sample_values(sample: SampleLike) -> np.ndarray:
    """Return the observations of ``sample`` as a float vector."""
    if isinstance(sample, TimeSeriesSample):
        return sample.values
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 1:
        raise ValueError("sample must be one-dimensional")
    return arr


def kernel_eval(spec: KernelSpec, u: ArrayLike) -> np.ndarray | float:
    """Evaluate ``K(u)``; scalars in, scalar out."""
    out = spec(u)
    return float(out) if out.ndim == 0 else out


def kernel_moments(spec: KernelSpec, method: str = "closed") -> tuple[float, float]:
    """Return ``(mu2, nu2) = (int u^2 K(u) du, int K(u)^2 du)``.

    ``method="quad"`` recomputes both integrals by adaptive quadrature
    instead of using the closed forms.
    """
    if method == "closed":
        return spec.mu2, spec.nu2
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    mu2 = _quad_over_support(lambda u: u * u * float(spec(u)), spec.support_radius)
    nu2 = _quad_over_support(lambda u: float(spec(u)) ** 2, spec.support_radius)
    return mu2, nu2


def kernel_terms(values: np.ndarray, x0: float, bandwidths: ArrayLike, spec: KernelSpec) -> np.ndarray:
    """Kernel weights ``K((X_t - x0)/k)`` as a ``(len(bandwidths), n)`` array."""
    ks = np.atleast_1d(np.asarray(bandwidths, dtype=float))
    if np.any(~(ks > 0)):
        raise ValueError("bandwidths must be positive")
    return spec((values[None, :] - x0) / ks[:, None])


def kde_many(sample: SampleLike, x0: float, bandwidths: ArrayLike, spec: KernelSpec = EPANECHNIKOV) -> np.ndarray:
    """Kernel density estimates at ``x0`` for several bandwidths at once.

    Each entry is bit-identical to :func:`kde` at that bandwidth.
    """
    x = sample_values(sample)
    if x.size == 0:
        raise ValueError("empty sample")
    ks = np.atleast_1d(np.asarray(bandwidths, dtype=float))
    sums = kernel_terms(x, x0, ks, spec).sum(axis=1)
    return sums / (x.size * ks)


def kde(sample: SampleLike, pt: DensityEvalPoint, spec: KernelSpec = EPANECHNIKOV) -> float:
    """Kernel density estimate ``(nh)^{-1} sum_i K((X_i - x0)/h)``.

    Parameters
    ----------
    sample : TimeSeriesSample or array_like
        Observations.
    pt : DensityEvalPoint
        Evaluation point ``x0`` and bandwidth ``h``.
    spec : KernelSpec
        Kernel, Epanechnikov by default.

    Returns
    -------
    float
        The (nonnegative) estimate.
    """
    return float(kde_many(sample, pt.x0, [pt.h], spec)[0])


def t_statistic(sample: SampleLike, pt: DensityEvalPoint, spec: KernelSpec, f_true: float) -> float:
    """Centred and scaled estimate ``(nh)^{1/2} (fhat_h(x0) - f_true)``."""
    if f_true < 0:
        raise ValueError("f_true must be nonnegative")
    n = sample_values(sample).size
    return math.sqrt(n * pt.h) * (kde(sample, pt, spec) - f_true)
