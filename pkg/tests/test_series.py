from fractions import Fraction

import numpy as np
import pytest

from rectfree.series import (
    SeriesError,
    T_series,
    TruncatedSeries,
    U_closed_coefficient,
    U_series,
    cumulants_from_moments,
    free_cumulants_from_moments,
    free_moments_from_cumulants,
    moments_from_cumulants,
)

F = Fraction


def test_arithmetic_exact():
    a = TruncatedSeries([1, 2, 3], exact=True)
    b = TruncatedSeries([0, 1, 1], exact=True)
    assert list((a * b).c) == [0, 1, 3]
    assert list((a + 1).c) == [2, 2, 3]
    assert list((a - a).c) == [0, 0, 0]
    assert list((a * a.reciprocal()).c) == [1, 0, 0]


def test_mixing_exact_and_float_raises():
    with pytest.raises(SeriesError):
        TruncatedSeries([1, 1], exact=True) + TruncatedSeries([1.0, 0.5])


def test_compose_and_inverse_roundtrip():
    s = TruncatedSeries([0, 1, F(1, 2), F(-1, 3), 2, F(5, 7)], exact=True)
    inv = s.comp_inverse()
    x = TruncatedSeries.x(5, exact=True)
    assert s.compose(inv) == x
    assert inv.compose(s) == x
    assert s.comp_inverse_triangular() == inv


def test_inverse_requires_linear_term():
    with pytest.raises(SeriesError):
        TruncatedSeries([0, 0, 1]).comp_inverse()
    with pytest.raises(SeriesError):
        TruncatedSeries([1, 1]).comp_inverse()


def test_log_series_inverse_is_exp_minus_one():
    n = 10
    log1p = TruncatedSeries([0] + [(-1) ** (k + 1) / k for k in range(1, n + 1)])
    inv = log1p.comp_inverse()
    fact = np.cumprod([1.0] + list(range(1, n + 1)))
    assert np.allclose(inv.c[1:].real, 1 / fact[1:], atol=1e-13)


def test_derivative_and_shifts():
    s = TruncatedSeries([1, 2, 3, 4], exact=True)
    assert list(s.derivative().c[:3]) == [2, 6, 12]
    assert list(s.shift_up().c) == [0, 1, 2, 3]
    assert list(TruncatedSeries([0, 1, 2, 3], exact=True).shift_down().c[:3]) == [1, 2, 3]


def test_T_and_U():
    lam = F(1, 2)
    t = T_series(lam, 4)
    assert list(t.c) == [1, F(3, 2), F(1, 2), 0, 0]
    assert U_closed_coefficient(lam, 1) == F(2, 3)
    assert U_series(0, 6, exact=True) == TruncatedSeries.x(6, exact=True)
    u = U_series(lam, 10)
    assert u.compose(T_series(lam, 10) - 1) == TruncatedSeries.x(10, exact=True)


def test_U_float_matches_exact():
    assert np.allclose(U_series(0.3, 12).c, np.array(U_series(F(3, 10), 12).c, dtype=complex))


def test_bernoulli_cumulants():
    c = cumulants_from_moments([1, 1, 1], 0.3, 3)
    assert np.allclose(c, [1, -0.3, 0.18])


def test_bernoulli_cumulants_exact():
    c = cumulants_from_moments([F(1)] * 3, F(3, 10), 3)
    assert c == [1, F(-3, 10), F(9, 50)]


def test_single_cumulant_moments():
    # rectangular Gaussian: only c_2 = 1
    m = moments_from_cumulants([F(1), 0, 0], F(1, 2), 3)
    assert m == [1, F(3, 2), F(11, 4)]


def test_free_conversions():
    # semicircle: k_2 = 1
    m = free_moments_from_cumulants([0, 1, 0, 0, 0, 0], 6)
    assert list(m) == [0, 1, 0, 2, 0, 5]
    assert list(free_cumulants_from_moments(m, 6)) == [0, 1, 0, 0, 0, 0]


def test_order_and_lambda_validation():
    with pytest.raises(SeriesError):
        cumulants_from_moments([1, 1], 0.5, 3)
    with pytest.raises(ValueError):
        moments_from_cumulants([1], 1.5, 1)
    with pytest.raises(SeriesError):
        U_series(0.5, 4, exact=True)
