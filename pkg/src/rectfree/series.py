"""
Truncated formal power series and the moment/cumulant transform chain.

A :class:`TruncatedSeries` keeps the coefficients of ``X^0 .. X^order``.
Two coefficient backends share the class: floating numpy arrays
(``complex128`` by default, any floating dtype on request) and ``object``
arrays of :class:`fractions.Fraction` for exact oracle work.  All arithmetic is exact modulo ``X^(order+1)``.

The rectangular chain works with generating series of even moments and
even cumulants,

.. math::

    M(X) = \\sum_{n\\ge1} m_{2n} X^n, \\qquad C(X) = \\sum_{n\\ge1} c_{2n} X^n,

linked by ``M = C(X T(M))`` with ``T(X) = (lam X + 1)(X + 1)``, or
equivalently ``C = U(X / (X T(M))^{<-1>} - 1)`` with ``U = (T - 1)^{<-1>}``.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from numbers import Rational

import numpy as np

__all__ = [
    "DEFAULT_ORDER",
    "SeriesError",
    "TruncatedSeries",
    "T_series",
    "U_series",
    "U_closed_coefficient",
    "cumulants_from_moments",
    "moments_from_cumulants",
    "free_cumulants_from_moments",
    "free_moments_from_cumulants",
]

DEFAULT_ORDER = 32


class SeriesError(ValueError):
    """Order mismatch or a non-invertible series."""


def _is_exact(v) -> bool:
    return isinstance(v, (Rational, Fraction)) and not isinstance(v, bool)


def _to_fraction(v):
    return Fraction(v)


class TruncatedSeries:
    """Power series truncated after ``X^order``.

    Parameters
    ----------
    coeffs : sequence
        Coefficients starting at ``X^0``.  Missing high coefficients are
        zero; extra ones are dropped.
    order : int, optional
        Truncation order.  Defaults to ``len(coeffs) - 1``.
    exact : bool, optional
        Use Fraction coefficients.  Inferred from ``coeffs`` when omitted.
    dtype : numpy dtype, optional
        Floating backend dtype (default ``complex128``); ignored when exact.
    """

    __slots__ = ("c", "order", "exact")

    def __init__(self, coeffs, order: int | None = None, exact: bool | None = None, dtype=None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise SeriesError("order must be nonnegative")
        if exact is None:
            exact = bool(coeffs) and all(_is_exact(v) for v in coeffs)
        coeffs = coeffs[: order + 1]
        if exact:
            arr = np.array([Fraction(0)] * (order + 1), dtype=object)
            for i, v in enumerate(coeffs):
                arr[i] = _to_fraction(v)
        else:
            arr = np.zeros(order + 1, dtype=complex if dtype is None else dtype)
            arr[: len(coeffs)] = coeffs
        self.c = arr
        self.order = order
        self.exact = exact

    # -- constructors -------------------------------------------------

    @classmethod
    def _wrap(cls, arr, exact):
        s = cls.__new__(cls)
        s.c = arr
        s.order = len(arr) - 1
        s.exact = exact
        return s

    @classmethod
    def x(cls, order: int, exact: bool = False, dtype=None) -> "TruncatedSeries":
        """The series ``X``."""
        return cls([0, 1], order, exact, dtype)

    @classmethod
    def constant(cls, value, order: int, exact: bool = False, dtype=None) -> "TruncatedSeries":
        return cls([value], order, exact, dtype)

    @classmethod
    def from_tail(cls, tail, order: int | None = None, exact: bool | None = None, dtype=None):
        """Series with zero constant term and ``tail[k]`` at ``X^(k+1)``."""
        tail = list(tail)
        if order is None:
            order = len(tail)
        return cls([0] + tail, order, exact, dtype)

    # -- helpers ------------------------------------------------------

    def _zero_arr(self, n=None):
        n = self.order + 1 if n is None else n
        if self.exact:
            return np.array([Fraction(0)] * n, dtype=object)
        return np.zeros(n, dtype=self.c.dtype)

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise SeriesError(f"order mismatch: {self.order} vs {other.order}")
            if other.exact == self.exact:
                return other
            if self.exact:
                raise SeriesError("cannot mix exact and floating coefficients")
            return TruncatedSeries._wrap(other.c.astype(self.c.dtype), False)
        return self._const(other)

    def _const(self, value) -> "TruncatedSeries":
        return TruncatedSeries.constant(value, self.order, self.exact, None if self.exact else self.c.dtype)

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries._wrap(self.c.copy(), self.exact)

    def __getitem__(self, k):
        return self.c[k]

    def __len__(self):
        return self.order + 1

    def tail(self) -> list:
        """Coefficients of ``X^1 .. X^order``."""
        return list(self.c[1:])

    def __repr__(self):
        kind = "exact" if self.exact else "float"
        return f"TruncatedSeries({list(self.c)!r}, order={self.order}, {kind})"

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and all(a == b for a, b in zip(self.c, other.c))

    __hash__ = None

    def allclose(self, other, rtol=1e-12, atol=1e-12) -> bool:
        other = self._coerce(other)
        return np.allclose(
            self.c.astype(complex), other.c.astype(complex), rtol=rtol, atol=atol
        )

    def truncate(self, order: int) -> "TruncatedSeries":
        arr = self._zero_arr(order + 1)
        n = min(order, self.order) + 1
        arr[:n] = self.c[:n]
        return TruncatedSeries._wrap(arr, self.exact)

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedSeries._wrap(self.c + other.c, self.exact)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._wrap(-self.c, self.exact)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            if self.exact:
                other = _to_fraction(other)
            return TruncatedSeries._wrap(self.c * other, self.exact)
        other = self._coerce(other)
        prod = np.convolve(self.c, other.c)[: self.order + 1]
        return TruncatedSeries._wrap(prod, self.exact)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        out = self._const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def reciprocal(self) -> "TruncatedSeries":
        """Multiplicative inverse; needs a nonzero constant term."""
        a = self.c
        if a[0] == 0:
            raise SeriesError("reciprocal needs a nonzero constant term")
        b = self._zero_arr()
        b[0] = 1 / a[0]
        for n in range(1, self.order + 1):
            b[n] = -np.dot(a[1 : n + 1], b[n - 1 :: -1][:n]) / a[0]
        return TruncatedSeries._wrap(b, self.exact)

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            if self.exact:
                return TruncatedSeries._wrap(self.c / _to_fraction(other), True)
            return TruncatedSeries._wrap(self.c / other, False)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def derivative(self) -> "TruncatedSeries":
        """Formal derivative; the top coefficient becomes zero."""
        d = self._zero_arr()
        k = np.arange(1, self.order + 1)
        if self.exact:
            d[:-1] = self.c[1:] * np.array([Fraction(int(i)) for i in k], dtype=object)
        else:
            d[:-1] = self.c[1:] * k
        return TruncatedSeries._wrap(d, self.exact)

    def shift_down(self) -> "TruncatedSeries":
        """``(S - S(0)) / X``; the top coefficient becomes zero."""
        d = self._zero_arr()
        d[:-1] = self.c[1:]
        return TruncatedSeries._wrap(d, self.exact)

    def shift_up(self) -> "TruncatedSeries":
        """``X * S`` truncated."""
        d = self._zero_arr()
        d[1:] = self.c[:-1]
        return TruncatedSeries._wrap(d, self.exact)

    # -- composition --------------------------------------------------

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """``self(inner(X))``; ``inner`` must have zero constant term."""
        inner = self._coerce(inner)
        if inner.c[0] != 0:
            raise SeriesError("inner series of a composition needs a zero constant term")
        out = self._const(self.c[-1])
        for k in range(self.order - 1, -1, -1):
            out = out * inner
            out.c[0] = out.c[0] + self.c[k]
        return out

    __call__ = compose

    def _check_invertible(self):
        if self.c[0] != 0:
            raise SeriesError("compositional inverse needs a zero constant term")
        if self.order < 1 or self.c[1] == 0:
            raise SeriesError("compositional inverse needs a nonzero linear coefficient")

    def comp_inverse(self) -> "TruncatedSeries":
        """Compositional inverse by Newton iteration on ``S(G) = X``.

        Each step ``G <- G - (S(G) - X) / S'(G)`` doubles the number of
        correct coefficients.
        """
        self._check_invertible()
        X = TruncatedSeries.x(self.order, self.exact, None if self.exact else self.c.dtype)
        g = X / self.c[1]
        dS = self.derivative()
        correct = 1
        while correct < self.order:
            correct = min(2 * correct, self.order)
            g = g - (self.compose(g) - X) / dS.compose(g)
        return g

    def comp_inverse_triangular(self) -> "TruncatedSeries":
        """Compositional inverse by solving for one coefficient at a time."""
        self._check_invertible()
        g = self._zero_arr()
        g[1] = 1 / self.c[1]
        for n in range(2, self.order + 1):
            partial = TruncatedSeries._wrap(g.copy(), self.exact)
            g[n] = -self.compose(partial).c[n] / self.c[1]
        return TruncatedSeries._wrap(g, self.exact)


# ---------------------------------------------------------------------------
# T, U and the rectangular chain
# ---------------------------------------------------------------------------


def _exact_lam(lam, exact: bool):
    if exact:
        if isinstance(lam, float):
            raise SeriesError("exact mode needs a rational lambda, got a float")
        return Fraction(lam)
    return lam


def _check_lam(lam):
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


def T_series(lam, order: int = DEFAULT_ORDER, exact: bool | None = None) -> TruncatedSeries:
    """``T(X) = (lam X + 1)(X + 1)``."""
    _check_lam(lam)
    if exact is None:
        exact = _is_exact(lam)
    lam = _exact_lam(lam, exact)
    return TruncatedSeries([1, 1 + lam, lam], order, exact)


def U_closed_coefficient(lam, n: int):
    """Coefficient of ``X^n`` in ``U = (T - 1)^{<-1>}`` from the closed formula."""
    if n < 1:
        raise ValueError("n must be positive")
    lam = Fraction(lam) if _is_exact(lam) else lam
    num = (-1) ** (n - 1) * lam ** (n - 1) * comb(2 * n, n)
    den = 2 * (lam + 1) ** (2 * n - 1) * (2 * n - 1)
    return num / den


def U_series(lam, order: int = DEFAULT_ORDER, exact: bool | None = None, dtype=None) -> TruncatedSeries:
    """``U = (T - 1)^{<-1>}``, equal to ``X`` when ``lam == 0``."""
    _check_lam(lam)
    if exact is None:
        exact = _is_exact(lam)
    lam = _exact_lam(lam, exact)
    coeffs = [U_closed_coefficient(lam, n) for n in range(1, order + 1)]
    return TruncatedSeries([0] + coeffs, order, exact, dtype)


def _prep(values, lam, order):
    values = list(values)
    if order is None:
        order = len(values)
    if len(values) < order:
        raise SeriesError(f"need {order} coefficients, got {len(values)}")
    values = values[:order]
    exact = all(_is_exact(v) for v in values) and _is_exact(lam)
    return values, order, exact


def _finish(s: TruncatedSeries, n: int, real: bool):
    out = s.c[1 : n + 1]
    if s.exact:
        return list(out)
    return out.real.astype(float) if real else out.astype(complex)


def _working(exact: bool, real: bool, lam):
    """Backend dtype and ratio for a conversion.

    The floating path runs in extended precision (``longdouble``) and
    rounds to double only at the end: the conversions cancel heavily, and
    the extra bits keep the round-off of the algorithm below the
    unavoidable error of storing the result in double precision.
    """
    if exact:
        return None, lam
    return (np.longdouble if real else np.clongdouble), np.longdouble(lam)


def _all_real(values) -> bool:
    return not any(isinstance(v, complex) or np.iscomplexobj(v) for v in values)


def _T_of(s: TruncatedSeries, lam) -> TruncatedSeries:
    # T(S) = 1 + (1 + lam) S + lam S^2
    return 1 + s * (1 + lam) + (s * s) * lam


def cumulants_from_moments(m, lam, order: int | None = None):
    """Rectangular cumulants ``[c_2, ..., c_{2 order}]`` from ``[m_2, ...]``.

    Exact (Fraction) when every input is rational, else extended-precision
    floating arithmetic with a real result for real input.
    """
    _check_lam(lam)
    m, order, exact = _prep(m, lam, order)
    lam = _exact_lam(lam, exact)
    real = _all_real(m)
    dtype, lam = _working(exact, real, lam)
    # One extra order: X / H^{<-1>} loses the top coefficient.
    N = order + 1
    M = TruncatedSeries.from_tail(m, N, exact, dtype)
    H = _T_of(M, lam).shift_up()
    Hinv = H.comp_inverse()
    Q = Hinv.shift_down().reciprocal() - 1
    C = U_series(lam, N, exact, dtype).compose(Q)
    return _finish(C, order, real)


def moments_from_cumulants(c, lam, order: int | None = None):
    """Even moments ``[m_2, ..., m_{2 order}]`` from ``[c_2, ...]``.

    Fixed-point iteration of ``M <- C(X T(M))``; iteration ``k`` fixes the
    coefficient of ``X^k``.
    """
    _check_lam(lam)
    c, order, exact = _prep(c, lam, order)
    lam = _exact_lam(lam, exact)
    real = _all_real(c)
    dtype, lam = _working(exact, real, lam)
    C = TruncatedSeries.from_tail(c, order, exact, dtype)
    M = TruncatedSeries.constant(0, order, exact, dtype)
    for _ in range(order):
        M = C.compose(_T_of(M, lam).shift_up())
    return _finish(M, order, real)


# ---------------------------------------------------------------------------
# Ordinary free cumulants via Lagrange inversion
# ---------------------------------------------------------------------------


def free_moments_from_cumulants(k, order: int | None = None):
    """Moments ``[m_1, ..., m_order]`` from free cumulants ``[k_1, ...]``.

    Lagrange inversion: ``m_n = [y^n] (1 + K(y))^(n+1) / (n + 1)``.
    """
    k, order, exact = _prep(k, 0, order)
    real = _all_real(k)
    one_plus_K = 1 + TruncatedSeries.from_tail(k, order, exact)
    out = []
    power = one_plus_K
    for n in range(1, order + 1):
        power = power * one_plus_K  # (1 + K)^(n+1)
        v = power.c[n] / (n + 1) if not exact else power.c[n] / Fraction(n + 1)
        out.append(v)
    if exact:
        return out
    out = np.array(out)
    return out.real.copy() if real else out


def free_cumulants_from_moments(m, order: int | None = None):
    """Free cumulants ``[k_1, ..., k_order]`` from moments ``[m_1, ...]``.

    Lagrange inversion: ``k_n = [z^(n-1)] M'(z) (1 + M(z))^(-n) / n``.
    """
    m, order, exact = _prep(m, 0, order)
    real = _all_real(m)
    M = TruncatedSeries.from_tail(m, order, exact)
    dM = M.derivative()
    inv = (1 + M).reciprocal()
    out = []
    power = TruncatedSeries.constant(1, order, exact)
    for n in range(1, order + 1):
        power = power * inv
        v = (dM * power).c[n - 1]
        out.append(v / Fraction(n) if exact else v / n)
    if exact:
        return out
    out = np.array(out)
    return out.real.copy() if real else out
