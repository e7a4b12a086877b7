"""
The rectangular free convolution ``mu (+)_lam nu`` of symmetric measures.

Two routes are available:

* the series route (default) adds rectangular cumulants and converts back
  to moments; it never fails on moment input and is exact when the input
  moments and ``lam`` are rational;
* the analytic route adds rectangular R-transforms and recovers a density
  by Stieltjes inversion.

The ratio-0 and ratio-1 specializations are provided as independent
routes through ordinary free cumulants, used as cross-checks.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

from rectfree.analytic import EPS_SCHEDULE, RectTransform, RecoveryResult, C_from_measure, recover_measure
from rectfree.measure import Measure, MeasureError, require_symmetric
from rectfree.series import (
    cumulants_from_moments,
    free_cumulants_from_moments,
    free_moments_from_cumulants,
    moments_from_cumulants,
)

__all__ = [
    "even_moments_of",
    "convolve_moments",
    "convolve_analytic",
    "convolve_lambda0",
    "free_convolve_moments",
    "transform_of",
    "convolve_lambda1_free",
]

MomentInput = Union[Measure, Sequence]


def even_moments_of(mu: MomentInput, order: int) -> list:
    """``[m_2, ..., m_{2 order}]`` of a measure or an explicit moment list."""
    if isinstance(mu, Measure):
        require_symmetric(mu)
        m = mu.moments(order)
        return list(m) if isinstance(m, list) else [float(v) for v in m]
    m = list(mu)
    if len(m) < order:
        raise MeasureError(f"need {order} even moments, got {len(m)}")
    return m[:order]


def convolve_moments(mu1: MomentInput, mu2: MomentInput, lam, order: int = 8) -> list:
    """Even moments of ``mu1 (+)_lam mu2`` up to ``m_{2 order}``.

    The rectangular cumulants of the two inputs are added and converted
    back.  Rational moments and ratio give exact ``Fraction`` output.
    """
    m1 = even_moments_of(mu1, order)
    m2 = even_moments_of(mu2, order)
    c1 = cumulants_from_moments(m1, lam, order)
    c2 = cumulants_from_moments(m2, lam, order)
    return list(moments_from_cumulants([a + b for a, b in zip(c1, c2)], lam, order))


def transform_of(obj, lam: float, **kw) -> RectTransform:
    """Rectangular R-transform of a measure, catalog entry or transform."""
    if isinstance(obj, RectTransform):
        if obj.lam != lam:
            raise ValueError(f"transform has ratio {obj.lam}, expected {lam}")
        return obj
    C = getattr(obj, "C", None)
    if isinstance(C, RectTransform):  # a catalog entry
        if C.lam != lam:
            raise ValueError(f"catalog entry has ratio {C.lam}, expected {lam}")
        return C
    if isinstance(obj, Measure):
        return C_from_measure(obj, lam, **kw)
    raise TypeError(f"cannot build a rectangular R-transform from {type(obj).__name__}")


def convolve_analytic(mu1, mu2, lam: float, x_grid, eps_schedule=EPS_SCHEDULE) -> RecoveryResult:
    """Density of ``mu1 (+)_lam mu2`` from ``C_1 + C_2``.

    Inputs may be measures, catalog entries or transforms.  A failed domain
    certification surfaces as :class:`rectfree.analytic.DomainError`; the
    series route (:func:`convolve_moments`) is the fallback.
    """
    C = transform_of(mu1, lam) + transform_of(mu2, lam)
    return recover_measure(C, x_grid, eps_schedule)


def free_convolve_moments(nu1: Sequence, nu2: Sequence, order: int) -> list:
    """Moments ``[m_1, ..., m_order]`` of the additive free convolution."""
    k1 = free_cumulants_from_moments(list(nu1), order)
    k2 = free_cumulants_from_moments(list(nu2), order)
    return list(free_moments_from_cumulants([a + b for a, b in zip(k1, k2)], order))


def convolve_lambda0(mu1: MomentInput, mu2: MomentInput, order: int = 8) -> list:
    """Ratio-0 convolution through the square push-forward.

    The push-forward of ``mu1 (+)_0 mu2`` under ``x -> x^2`` is the free
    convolution of the push-forwards, whose moments are ``m_n = m_{2n}``.
    """
    rho1 = even_moments_of(mu1, order)
    rho2 = even_moments_of(mu2, order)
    return free_convolve_moments(rho1, rho2, order)


def _symmetric_full_moments(even: list) -> list:
    zero = Fraction(0) if all(isinstance(v, (int, Fraction)) for v in even) else 0.0
    out = []
    for v in even:
        out += [zero, v]
    return out


def convolve_lambda1_free(mu1: MomentInput, mu2: MomentInput, order: int = 8) -> list:
    """Even moments of ``mu1 (+) mu2`` (additive free convolution) up to
    ``m_{2 order}``, the ratio-1 cross-check."""
    f1 = _symmetric_full_moments(even_moments_of(mu1, order))
    f2 = _symmetric_full_moments(even_moments_of(mu2, order))
    full = free_convolve_moments(f1, f2, 2 * order)
    return list(full[1::2])

