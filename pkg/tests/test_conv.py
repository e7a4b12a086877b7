from fractions import Fraction

import numpy as np
import pytest

from rectfree.closedforms import bernoulli_conv_density, catalog_entry, rect_gaussian_C
from rectfree.conv import (
    convolve_analytic,
    convolve_lambda0,
    convolve_lambda1_free,
    convolve_moments,
    even_moments_of,
    free_convolve_moments,
    transform_of,
)
from rectfree.measure import MeasureError, bernoulli, dirac0

F = Fraction
ONES = [F(1)] * 6


def test_bernoulli_pair_half():
    assert convolve_moments(ONES, ONES, F(1, 2), 4) == [2, 5, 14, F(167, 4)]


@pytest.mark.parametrize("lam", [F(0), F(1, 4), F(1, 2), F(1)])
def test_m4_formula(lam):
    # m_4 of the Bernoulli pair is 4 + 2 lam
    assert convolve_moments(ONES, ONES, lam, 2)[1] == 4 + 2 * lam


def test_dirac_is_neutral():
    m = convolve_moments(bernoulli(), dirac0(), 0.5, 5)
    assert np.allclose(np.asarray(m, float), 1.0)


def test_commutative():
    a = [F(2), F(7), F(30)]
    b = [F(1, 2), F(1, 3), F(1, 4)]
    assert convolve_moments(a, b, F(1, 3), 3) == convolve_moments(b, a, F(1, 3), 3)


def test_ratio_zero_powers_of_two():
    assert convolve_lambda0(ONES, ONES, 6) == [2 ** n for n in range(1, 7)]


def test_ratio_one_central_binomials():
    assert convolve_lambda1_free(ONES, ONES, 6) == [2, 6, 20, 70, 252, 924]
    assert convolve_moments(ONES, ONES, F(1), 6) == [2, 6, 20, 70, 252, 924]


def test_free_convolution_of_semicircles():
    sc = [0, 1, 0, 2, 0, 5]
    assert list(free_convolve_moments(sc, sc, 6)) == [0, 2, 0, 8, 0, 40]


def test_even_moments_validation():
    with pytest.raises(MeasureError):
        even_moments_of([1, 1], 3)
    assert even_moments_of(bernoulli(), 2) == [1.0, 1.0]


def test_transform_of_dispatch():
    C = rect_gaussian_C(0.5)
    assert transform_of(C, 0.5) is C
    assert transform_of(catalog_entry("rect_gaussian", 0.5), 0.5) is not None
    with pytest.raises(ValueError):
        transform_of(C, 0.3)
    with pytest.raises(TypeError):
        transform_of(3.0, 0.5)


def test_analytic_bernoulli_pair_matches_closed_density():
    lam = 0.5
    x = np.linspace(-2.1, 2.1, 211)
    rec = convolve_analytic(bernoulli(), bernoulli(), lam, x)
    a, b = 0.5176380902050416, 1.9318516525781366
    inner = (np.abs(x) > a + 0.05) & (np.abs(x) < b - 0.05)
    assert np.max(np.abs(rec.density[inner] - bernoulli_conv_density(lam, x[inner]))) < 5e-3
    assert abs(rec.residual) < 2e-2


def test_analytic_gaussian_semigroup():
    lam = 0.5
    x = np.linspace(-2.5, 2.5, 101)
    rec = convolve_analytic(rect_gaussian_C(lam, 0.5), rect_gaussian_C(lam, 0.5), lam, x)
    ref = catalog_entry("rect_gaussian", lam, sigma2=1.0)
    (a, b), = ref.support
    inner = (np.abs(x) > a + 0.05) & (np.abs(x) < b - 0.05)
    assert np.max(np.abs(rec.density[inner] - ref.density(x[inner]))) < 5e-3


def test_continuity_under_perturbation():
    # small moves of the input atoms give small moves of the output law
    from rectfree.measure import Atomic, weak_distance

    lam = 0.5
    x = np.linspace(-2.4, 2.4, 241)

    def law(delta):
        mu = Atomic([-1 - delta, 1 + delta], [0.5, 0.5])
        return convolve_analytic(mu, mu, lam, x).measure()

    base = law(0.0)
    d_big = weak_distance(base, law(0.05))
    d_small = weak_distance(base, law(0.005))
    assert d_small < d_big < 0.1
    assert d_small < 0.02
