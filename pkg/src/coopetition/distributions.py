"""User-location laws on the unit interval.

Every distribution is restricted to [0, 1]. The Gaussian and gamma families
are truncated to that interval and renormalized, so ``cdf(0) == 0`` and
``cdf(1) == 1`` exactly.

Scalar methods (``pdf``, ``cdf``, ``mass``) are written against ``math`` so the
best-response line search can call them in a tight loop; the ``*_array``
variants broadcast over numpy arrays for grid work.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special, stats

from .errors import DomainError, ValidationError

HAZARD_GUARD = 1e-4

_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _check_location(x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"location {x!r} is outside the support [0, 1]")


class PreferenceDistribution:
    """Base class. Subclasses supply the untruncated ``_raw_pdf`` / ``_raw_cdf``."""

    kind = "abstract"

    def _raw_pdf(self, x):
        raise NotImplementedError

    def _raw_cdf(self, x):
        raise NotImplementedError

    def _raw_pdf_array(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _raw_cdf_array(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _init_truncation(self) -> None:
        lo = self._raw_cdf(0.0)
        z = self._raw_cdf(1.0) - lo
        if not z > 0.0:
            raise ValidationError(f"{self.kind}: no probability mass on [0, 1]")
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_z", z)

    def pdf(self, x: float) -> float:
        _check_location(x)
        return self._raw_pdf(x) / self._z

    def cdf(self, x: float) -> float:
        _check_location(x)
        return self._cdf_clamped(x)

    def sf(self, x: float) -> float:
        """Survival 1 - H(x), computed without cancellation near 1."""
        _check_location(x)
        return (self._raw_cdf(1.0) - self._raw_cdf(x)) / self._z

    def _cdf_clamped(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return (self._raw_cdf(x) - self._lo) / self._z

    def mass(self, a: float, b: float) -> float:
        """Probability of the interval (a, b] after clamping both ends to [0, 1]."""
        if not b > a:
            return 0.0
        return self._cdf_clamped(b) - self._cdf_clamped(a)

    def cdf_array(self, x) -> np.ndarray:
        """Vectorized CDF; arguments outside [0, 1] are clamped, never rejected."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = (self._raw_cdf_array(x) - self._lo) / self._z
        out = np.where(x >= 1.0, 1.0, out)
        return np.where(x <= 0.0, 0.0, out)

    def pdf_array(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any((x < 0.0) | (x > 1.0)):
            raise DomainError("pdf_array: locations outside [0, 1]")
        return self._raw_pdf_array(x) / self._z

    def mass_array(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return np.where(b > a, self.cdf_array(b) - self.cdf_array(a), 0.0)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(PreferenceDistribution):
    kind = "uniform"

    def __post_init__(self):
        self._init_truncation()

    def _raw_pdf(self, x):
        return 1.0

    def _raw_cdf(self, x):
        return x

    def _raw_pdf_array(self, x):
        return np.ones_like(x)

    def _raw_cdf_array(self, x):
        return x

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class TruncatedGaussian(PreferenceDistribution):
    mean: float = 0.5
    sd: float = 0.2
    kind = "truncated_gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.sd > 0):
            raise ValidationError("truncated_gaussian: sd must be positive and mean finite")
        self._init_truncation()

    def _raw_pdf(self, x):
        z = (x - self.mean) / self.sd
        return _INV_SQRT2PI * math.exp(-0.5 * z * z) / self.sd

    def _raw_cdf(self, x):
        return 0.5 * math.erfc(-(x - self.mean) / (self.sd * _SQRT2))

    def _raw_pdf_array(self, x):
        z = (x - self.mean) / self.sd
        return _INV_SQRT2PI * np.exp(-0.5 * z * z) / self.sd

    def _raw_cdf_array(self, x):
        return special.ndtr((x - self.mean) / self.sd)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class TruncatedGamma(PreferenceDistribution):
    """Gamma law shifted by ``loc`` and truncated to [0, 1].

    A negative ``loc`` keeps the density strictly positive at 0 for shape > 1.
    """

    shape: float = 2.0
    scale: float = 0.3
    loc: float = -0.2
    kind = "truncated_gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0 and math.isfinite(self.loc)):
            raise ValidationError("truncated_gamma: shape and scale must be positive")
        self._init_truncation()

    def _raw_pdf(self, x):
        y = x - self.loc
        if y <= 0.0:
            return 0.0
        k, s = self.shape, self.scale
        return math.exp((k - 1) * math.log(y) - y / s - math.lgamma(k) - k * math.log(s))

    def _raw_cdf(self, x):
        return float(special.gammainc(self.shape, max(x - self.loc, 0.0) / self.scale))

    def _raw_pdf_array(self, x):
        return stats.gamma.pdf(x, self.shape, loc=self.loc, scale=self.scale)

    def _raw_cdf_array(self, x):
        return special.gammainc(self.shape, np.maximum(x - self.loc, 0.0) / self.scale)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "shape": self.shape, "scale": self.scale, "loc": self.loc}


@dataclass(frozen=True)
class GaussianMixture(PreferenceDistribution):
    """Finite mixture of Gaussians, truncated to [0, 1] as a whole.

    ``components`` holds ``(weight, mean, sd)`` triples. Used to build
    densities that break the increasing-hazard condition.
    """

    components: tuple = ((0.5, 0.25, 0.07), (0.5, 0.75, 0.07))
    kind = "gaussian_mixture"

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        if not comps or any(len(c) != 3 or c[0] <= 0 or c[2] <= 0 for c in comps):
            raise ValidationError("gaussian_mixture: components need positive weight and sd")
        total = sum(c[0] for c in comps)
        object.__setattr__(self, "components", tuple((w / total, m, s) for w, m, s in comps))
        self._init_truncation()

    def _raw_pdf(self, x):
        return sum(w * _INV_SQRT2PI * math.exp(-0.5 * ((x - m) / s) ** 2) / s
                   for w, m, s in self.components)

    def _raw_cdf(self, x):
        return sum(w * 0.5 * math.erfc(-(x - m) / (s * _SQRT2)) for w, m, s in self.components)

    def _raw_pdf_array(self, x):
        return sum(w * _INV_SQRT2PI * np.exp(-0.5 * ((x - m) / s) ** 2) / s
                   for w, m, s in self.components)

    def _raw_cdf_array(self, x):
        return sum(w * special.ndtr((x - m) / s) for w, m, s in self.components)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "components": [list(c) for c in self.components]}


def valley_mixture() -> GaussianMixture:
    """Two well-separated bumps; the hazard rate dips across the valley."""
    return GaussianMixture(((0.5, 0.25, 0.07), (0.5, 0.75, 0.07)))


_KINDS = {
    "uniform": Uniform,
    "truncated_gaussian": TruncatedGaussian,
    "truncated_gamma": TruncatedGamma,
    "gaussian_mixture": GaussianMixture,
}


def from_dict(d: dict) -> PreferenceDistribution:
    """Build a distribution from its tagged-record form (see ``to_dict``)."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("distribution: expected a mapping with a 'kind' field")
    kind = d["kind"]
    if kind not in _KINDS:
        raise ValidationError(f"distribution.kind: unknown kind {kind!r}; expected one of {sorted(_KINDS)}")
    kwargs = {k: v for k, v in d.items() if k != "kind"}
    if kind == "gaussian_mixture" and "components" in kwargs:
        kwargs["components"] = tuple(tuple(c) for c in kwargs["components"])
    try:
        return _KINDS[kind](**kwargs)
    except TypeError as exc:
        raise ValidationError(f"distribution ({kind}): {exc}") from None


class HazardCheck(NamedTuple):
    passed: bool
    violation_at: float | None
    notes: tuple = ()


def hazard_monotone_check(dist: PreferenceDistribution, grid_points: int = 2001,
                          guard: float = HAZARD_GUARD, rtol: float = 1e-9) -> HazardCheck:
    """Check that h(x) / (1 - H(x)) is non-decreasing on [0, 1 - guard].

    Returns the first grid location where the hazard drops, if any.
    Non-finite hazard values are noted and skipped rather than failed.
    """
    if grid_points < 10:
        raise ValidationError("hazard_monotone_check: grid_points must be >= 10")
    xs = np.linspace(0.0, 1.0 - guard, grid_points)
    notes = []
    prev = None
    for x in xs:
        x = float(x)
        surv = dist.sf(x)
        with np.errstate(all="ignore"):
            hz = dist.pdf(x) / surv if surv > 0 else math.inf
        if not math.isfinite(hz):
            notes.append(f"non-finite hazard at {x:.6g} (guard band)")
            continue
        if prev is not None and hz < prev[1] - rtol * max(1.0, abs(prev[1])):
            return HazardCheck(False, x, tuple(notes))
        prev = (x, hz)
    return HazardCheck(True, None, tuple(notes))
