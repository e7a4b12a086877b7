"""
Catalog of closed-form families for the rectangular free convolution.

Each family is parameterized by the ratio ``lam`` and its own parameters.
Families with a known density expose it together with its support; the
stable and Poisson analogues are known only through their rectangular
R-transforms, and numeric densities for them come from
:func:`rectfree.analytic.recover_measure` (marked as derived).

Families
--------
``bernoulli_conv``
    ``nu (+)_lam nu`` with ``nu = (delta_-1 + delta_1) / 2``.
``rect_gaussian``
    Gaussian analogue ``N_{sigma2}``, ``C(z) = sigma2 z``.
``rect_cauchy``
    Cauchy analogue ``nu_t``, ``C(z) = i t sqrt(z)``.
``rect_stable``
    ``C(z) = -scale (-z)^(alpha/2)``, ``0 < alpha < 2``.
``rect_poisson``
    ``C(z) = c z / (1 - z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from rectfree.analytic import RectTransform, sqrt_cut_neg, sqrt_cut_pos
from rectfree.measure import Atomic, DensityMeasure, Measure
from rectfree.series import TruncatedSeries, cumulants_from_moments

__all__ = [
    "UnsupportedParameterError",
    "FAMILIES",
    "FAMILY_PARAMS",
    "CatalogEntry",
    "bernoulli_C",
    "bernoulli_measure",
    "bernoulli_conv_kappa",
    "bernoulli_conv_support",
    "bernoulli_conv_density",
    "bernoulli_conv_C",
    "rect_gaussian_support",
    "rect_gaussian_density",
    "rect_gaussian_C",
    "rect_cauchy_density",
    "rect_cauchy_C",
    "rect_stable_C",
    "rect_poisson_C",
    "catalog_entry",
    "catalog_measure",
    "catalog_listing",
    "default_catalog",
]

FAMILIES = ("bernoulli_conv", "rect_gaussian", "rect_cauchy", "rect_stable", "rect_poisson")

#: Parameter names accepted by each family.
FAMILY_PARAMS = {
    "bernoulli_conv": (),
    "rect_gaussian": ("sigma2",),
    "rect_cauchy": ("t",),
    "rect_stable": ("alpha", "scale"),
    "rect_poisson": ("c",),
}


class UnsupportedParameterError(ValueError):
    """Parameter value outside what a closed form covers."""


def _lam_ok(lam, allow_zero=True):
    if not (0 <= lam <= 1) or (lam == 0 and not allow_zero):
        raise UnsupportedParameterError(f"lambda = {lam!r} not supported here")


# ---------------------------------------------------------------------------
# Bernoulli and its self-convolution
# ---------------------------------------------------------------------------


def bernoulli_C(lam: float) -> RectTransform:
    """``C(z) = ((1 + 4 lam z)^(1/2) - 1) / (2 lam)`` (``z`` when ``lam = 0``)."""
    _lam_ok(lam)

    if lam == 0:
        return RectTransform.from_callable(0.0, lambda z: np.asarray(z, dtype=complex),
                                           lambda z: np.ones_like(np.asarray(z, dtype=complex)),
                                           name="bernoulli")

    def C(z):
        z = np.asarray(z, dtype=complex)
        # (sqrt(1 + 4 lam z) - 1) / (2 lam) = 2 z / (1 + sqrt(1 + 4 lam z))
        return 2 * z / (1 + sqrt_cut_neg(1 + 4 * lam * z))

    def dC(z):
        return 1.0 / sqrt_cut_neg(1 + 4 * lam * np.asarray(z, dtype=complex))

    head = TruncatedSeries.from_tail(cumulants_from_moments([1.0] * 16, lam, 16))
    return RectTransform.from_callable(lam, C, dC, head, name="bernoulli")


def bernoulli_measure() -> Atomic:
    return Atomic([-1.0, 1.0], [0.5, 0.5])


def bernoulli_conv_kappa(lam: float) -> float:
    """``kappa = 2 (lam (2 - lam))^(1/2)``."""
    return 2.0 * np.sqrt(lam * (2.0 - lam))


def bernoulli_conv_support(lam: float) -> tuple[float, float]:
    """Positive support interval ``[a, b]``; the support is ``[-b, -a] U [a, b]``."""
    if lam == 0:
        raise UnsupportedParameterError(
            "at lambda = 0 the convolution is atomic: (delta_-sqrt2 + delta_sqrt2) / 2"
        )
    _lam_ok(lam)
    k = bernoulli_conv_kappa(lam)
    return float(np.sqrt(max(2.0 - k, 0.0))), float(np.sqrt(2.0 + k))


def bernoulli_conv_density(lam: float, x):
    """Density of ``nu (+)_lam nu`` for ``0 < lam <= 1``.

    ``(kappa^2 - (x^2 - 2)^2)^(1/2) / (pi lam |x| (4 - x^2))`` on the support,
    0 elsewhere.
    """
    a, b = bernoulli_conv_support(lam)
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    k = bernoulli_conv_kappa(lam)
    inside = (ax > a) & (ax < b)
    out = np.zeros_like(x)
    xi = ax[inside]
    # kappa^2 - (x^2 - 2)^2 = (kappa - x^2 + 2)(kappa + x^2 - 2); factored
    # so that the endpoint zeros come out without cancellation
    rad = np.clip((k + 2.0 - xi * xi) * (k - 2.0 + xi * xi), 0.0, None)
    out[inside] = np.sqrt(rad) / (np.pi * lam * xi * (4.0 - xi * xi))
    return out


def bernoulli_conv_C(lam: float) -> RectTransform:
    """Twice the Bernoulli transform."""
    c = bernoulli_C(lam).scaled(2.0)
    return RectTransform(c.lam, c.evaluator, c.series_head, "bernoulli_conv")


# ---------------------------------------------------------------------------
# Gaussian analogue
# ---------------------------------------------------------------------------


def rect_gaussian_support(lam: float, sigma2: float = 1.0) -> tuple[float, float]:
    """``[sigma (1 - sqrt lam), sigma (1 + sqrt lam)]`` (positive half)."""
    if lam == 0:
        raise UnsupportedParameterError("the Gaussian analogue at lambda = 0 is not covered")
    _lam_ok(lam)
    s = np.sqrt(sigma2)
    return float(s * (1 - np.sqrt(lam))), float(s * (1 + np.sqrt(lam)))


def rect_gaussian_density(lam: float, sigma2: float, x):
    """Density of ``N_{sigma2}`` for ``0 < lam <= 1``.

    ``[4 lam - (x^2 / sigma2 - 1 - lam)^2]^(1/2) / (2 pi lam |x|)`` where the
    bracket is positive, i.e. on ``sigma (1 +- sqrt lam)``.
    """
    a, b = rect_gaussian_support(lam, sigma2)
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inside = (ax > a) & (ax < b)
    out = np.zeros_like(x)
    u = ax[inside] ** 2 / sigma2
    r = np.sqrt(lam)
    # 4 lam - (u - 1 - lam)^2 = ((1 + r)^2 - u)(u - (1 - r)^2)
    rad = np.clip(((1 + r) ** 2 - u) * (u - (1 - r) ** 2), 0.0, None)
    out[inside] = np.sqrt(rad) / (2 * np.pi * lam * ax[inside])
    return out


def rect_gaussian_C(lam: float, sigma2: float = 1.0) -> RectTransform:
    _lam_ok(lam)
    head = TruncatedSeries.from_tail([sigma2] + [0.0] * 15)
    return RectTransform.from_callable(
        lam,
        lambda z: sigma2 * np.asarray(z, dtype=complex),
        lambda z: np.full(np.shape(z), sigma2, dtype=complex),
        head,
        name="rect_gaussian",
    )


# ---------------------------------------------------------------------------
# Cauchy analogue
# ---------------------------------------------------------------------------


def rect_cauchy_gap(lam: float, t: float) -> float:
    return 0.5 * t * (1.0 - lam)


def rect_cauchy_density(lam: float, t: float, x):
    """``t / (pi (lam t^2 + x^2)) [1 - t^2 (lam - 1)^2 / (4 x^2)]^(1/2)`` for
    ``|x| > t (1 - lam) / 2``, 0 inside the gap."""
    _lam_ok(lam)
    if t <= 0:
        raise UnsupportedParameterError("t must be positive")
    x = np.asarray(x, dtype=float)
    g = rect_cauchy_gap(lam, t)
    ax = np.abs(x)
    inside = ax > g
    out = np.zeros_like(x)
    xi = ax[inside]
    out[inside] = t / (np.pi * (lam * t * t + xi * xi)) * np.sqrt(np.clip(1.0 - (g / xi) ** 2, 0.0, None))
    return out


def rect_cauchy_C(lam: float, t: float = 1.0) -> RectTransform:
    """``C(z) = i t sqrt(z)`` with the square root cut on ``[0, inf)``."""
    _lam_ok(lam)

    def C(z):
        return 1j * t * sqrt_cut_pos(z)

    def dC(z):
        return 0.5j * t / sqrt_cut_pos(z)

    return RectTransform.from_callable(lam, C, dC, None, name="rect_cauchy")


# ---------------------------------------------------------------------------
# Stable and Poisson analogues (transform only)
# ---------------------------------------------------------------------------


def rect_stable_C(lam: float, alpha: float, scale: float = 1.0) -> RectTransform:
    """``C(z) = -scale (-z)^(alpha/2)``, principal power on ``C \\ R_-`` of ``-z``."""
    _lam_ok(lam)
    if not 0 < alpha <= 2:
        raise UnsupportedParameterError("alpha must lie in (0, 2]")
    if scale <= 0:
        raise UnsupportedParameterError("scale must be positive")
    p = alpha / 2

    def C(z):
        mz = -np.asarray(z, dtype=complex)
        if np.any((mz.imag == 0) & (mz.real <= 0)) and p != 1:
            raise ValueError("stable transform is undefined on [0, inf)")
        return -scale * mz ** p

    def dC(z):
        mz = -np.asarray(z, dtype=complex)
        return scale * p * mz ** (p - 1)

    head = TruncatedSeries.from_tail([scale] + [0.0] * 15) if p == 1 else None
    return RectTransform.from_callable(lam, C, dC, head, name="rect_stable")


def rect_poisson_C(lam: float, c: float = 1.0) -> RectTransform:
    """``C(z) = c z / (1 - z)``; the cumulants are all equal to ``c``."""
    _lam_ok(lam)
    if c <= 0:
        raise UnsupportedParameterError("c must be positive")

    def C(z):
        z = np.asarray(z, dtype=complex)
        return c * z / (1 - z)

    def dC(z):
        z = np.asarray(z, dtype=complex)
        return c / (1 - z) ** 2

    head = TruncatedSeries.from_tail([c] * 16)
    return RectTransform.from_callable(lam, C, dC, head, name="rect_poisson")


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


@dataclass
class CatalogEntry:
    """One closed-form family at fixed parameters.

    ``density`` and ``support`` are ``None`` for the transform-only
    families.  ``support`` lists the positive-half intervals.
    """

    family: str
    lam: float
    params: dict
    C: RectTransform
    density: Optional[Callable] = None
    support: Optional[list] = None
    formulas: dict = field(default_factory=dict)

    @property
    def has_density(self) -> bool:
        return self.density is not None

    def measure(self) -> Measure:
        """The law as a :class:`DensityMeasure` (density families only)."""
        if self.density is None:
            raise UnsupportedParameterError(
                f"{self.family} is known through its transform only; use recover_measure"
            )
        ivs = []
        for a, b in self.support:
            ivs += [(a, b), (-b, -a)]
        scale = float(self.params.get("t", 1.0))
        return DensityMeasure(self.density, ivs, 0.0, scale, name=self.family)

    def describe(self) -> dict:
        return {
            "family": self.family,
            "lambda": self.lam,
            "params": dict(self.params),
            "support_positive_half": self.support,
            "has_density": self.has_density,
            "formulas": dict(self.formulas),
        }


def catalog_entry(family: str, lam: float, **params) -> CatalogEntry:
    """Build a :class:`CatalogEntry`.

    Unknown families raise ``KeyError``; parameter names the family does
    not take raise ``ValueError``.
    """
    unknown = sorted(set(params) - set(FAMILY_PARAMS.get(family, params)))
    if unknown:
        allowed = ", ".join(FAMILY_PARAMS[family]) or "none"
        raise ValueError(f"{family} does not take {', '.join(unknown)} (accepted: {allowed})")
    if family == "bernoulli_conv":
        a, b = bernoulli_conv_support(lam)
        return CatalogEntry(
            family, lam, {}, bernoulli_conv_C(lam),
            lambda x: bernoulli_conv_density(lam, x), [(a, b)],
            {
                "density": "(kappa^2 - (x^2 - 2)^2)^(1/2) / (pi lam |x| (4 - x^2)), kappa = 2 (lam (2 - lam))^(1/2)",
                "C": "((1 + 4 lam z)^(1/2) - 1) / lam",
            },
        )
    if family == "rect_gaussian":
        sigma2 = float(params.get("sigma2", 1.0))
        a, b = rect_gaussian_support(lam, sigma2)
        return CatalogEntry(
            family, lam, {"sigma2": sigma2}, rect_gaussian_C(lam, sigma2),
            lambda x: rect_gaussian_density(lam, sigma2, x), [(a, b)],
            {
                "density": "[4 lam - (x^2 / sigma2 - 1 - lam)^2]^(1/2) / (2 pi lam |x|)",
                "C": "sigma2 z",
            },
        )
    if family == "rect_cauchy":
        t = float(params.get("t", 1.0))
        return CatalogEntry(
            family, lam, {"t": t}, rect_cauchy_C(lam, t),
            lambda x: rect_cauchy_density(lam, t, x), [(rect_cauchy_gap(lam, t), np.inf)],
            {
                "density": "t / (pi (lam t^2 + x^2)) [1 - t^2 (lam - 1)^2 / (4 x^2)]^(1/2)",
                "C": "i t sqrt(z)",
            },
        )
    if family == "rect_stable":
        alpha = float(params.get("alpha", 1.5))
        scale = float(params.get("scale", 1.0))
        return CatalogEntry(family, lam, {"alpha": alpha, "scale": scale}, rect_stable_C(lam, alpha, scale),
                            formulas={"C": "-scale (-z)^(alpha/2)"})
    if family == "rect_poisson":
        c = float(params.get("c", 1.0))
        return CatalogEntry(family, lam, {"c": c}, rect_poisson_C(lam, c), formulas={"C": "c z / (1 - z)"})
    raise KeyError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def catalog_measure(family: str, lam: float = 0.5, **params) -> Measure:
    """Measure for a density family (used by the ``catalog`` file type)."""
    return catalog_entry(family, lam, **params).measure()


def default_catalog(lam: float = 0.5) -> list[CatalogEntry]:
    """One entry per family at canonical parameters."""
    return [
        catalog_entry("bernoulli_conv", lam),
        catalog_entry("rect_gaussian", lam, sigma2=1.0),
        catalog_entry("rect_cauchy", lam, t=1.0),
        catalog_entry("rect_stable", lam, alpha=1.5, scale=1.0),
        catalog_entry("rect_poisson", lam, c=1.0),
    ]


def catalog_listing(lam: float = 0.5) -> dict:
    """JSON-ready description of every family."""
    return {"lambda": lam, "families": [e.describe() for e in default_catalog(lam)]}
