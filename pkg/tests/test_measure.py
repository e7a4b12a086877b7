import json

import numpy as np
import pytest
from scipy.integrate import quad

from rectfree.measure import (
    Atomic,
    DensityMeasure,
    GridDensity,
    MeasureError,
    MomentSeq,
    bernoulli,
    dirac0,
    load_measure,
    measure_from_dict,
    measure_to_dict,
    pullback_sqrt,
    pushforward_square,
    require_symmetric,
    save_measure,
    symmetrize,
    weak_distance,
)


def semicircle_pdf(x):
    return np.sqrt(np.clip(4 - x * x, 0, None)) / (2 * np.pi)


def semicircle():
    return DensityMeasure(semicircle_pdf, [(-2, 2)], name="semicircle")


def semicircle_G(z):
    # branch with G ~ 1/z at infinity
    z = np.asarray(z, dtype=complex)
    return (z - z * np.sqrt(1 - 4 / (z * z))) / 2


def test_bernoulli_cauchy_transform():
    z = np.array([0.3 + 1j, -2 - 0.5j, 5j])
    assert np.allclose(bernoulli().cauchy_transform(z), z / (z * z - 1), atol=1e-15)


def test_atomic_validation_and_merge():
    mu = Atomic([1, -1, 1], [0.25, 0.5, 0.25])
    assert list(mu.locations) == [-1, 1]
    assert mu.is_symmetric
    with pytest.raises(MeasureError):
        Atomic([1, 2], [0.5, 0.6])
    with pytest.raises(MeasureError):
        Atomic([1], [-1.0])


def test_dirac_moments_zero():
    assert np.all(dirac0().moments(4) == 0)


def test_semicircle_moments_and_transform():
    mu = semicircle()
    assert mu.mass() == pytest.approx(1, abs=1e-12)
    assert np.allclose(mu.moments(5), [1, 2, 5, 14, 42], rtol=1e-11)
    z = np.array([0.5 + 0.5j, -1 + 1e-3j, 3 - 2j, 1.2 - 1e-6j])
    assert np.allclose(mu.cauchy_transform(z), semicircle_G(z), atol=1e-9)


def test_density_derivative_matches_finite_difference():
    mu = semicircle()
    z = np.array([0.7 + 0.01j, -1.5 - 0.2j])
    g, dg = mu.cauchy_transform_d(z)
    h = 1e-7
    exact = (semicircle_G(z + h) - semicircle_G(z - h)) / (2 * h)
    assert np.allclose(g, semicircle_G(z), rtol=1e-7)
    assert np.allclose(dg, exact, rtol=1e-5)


def test_cauchy_transform_rejects_real_axis():
    with pytest.raises(MeasureError):
        semicircle().cauchy_transform(np.array([0.5 + 0j]))


def test_density_mass_check():
    with pytest.raises(MeasureError):
        DensityMeasure(lambda x: 0.4 * np.ones_like(x), [(-1, 1)])


def test_grid_density_exact_moments():
    x = np.linspace(-1, 1, 5)
    f = 1 - np.abs(x)  # triangle, exactly piecewise linear
    g = GridDensity(x, f)
    # m_2 of the triangle law = 1/6, m_4 = 1/15
    assert np.allclose(g.moments(2), [1 / 6, 1 / 15], rtol=1e-13)
    z = 0.2 + 0.3j
    expected = quad(lambda t: (1 - abs(t)) * (1 / (z - t)).real, -1, 1, points=[0])[0] + 1j * quad(
        lambda t: (1 - abs(t)) * (1 / (z - t)).imag, -1, 1, points=[0])[0]
    assert g.cauchy_transform(z) == pytest.approx(expected, abs=1e-12)


def test_grid_quantile_with_atom():
    x = np.linspace(-1, 1, 3)
    g = GridDensity(x, 0.5 * (1 - np.abs(x)) , atom0=0.5)
    assert g.quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    assert g.quantile(0.999) < 1


def test_moment_seq():
    m = MomentSeq((1, 1, 1), radius=1)
    assert m.moments(2) == [1, 1]
    z = 3 + 1j
    assert m.cauchy_transform(z) == pytest.approx(bernoulli().cauchy_transform(z), abs=1e-4)
    with pytest.raises(MeasureError):
        m.moments(4)
    with pytest.raises(MeasureError):
        m.cauchy_transform(0.5j)


def test_symmetrize_atomic():
    mu = symmetrize(Atomic([1, 3], [0.5, 0.5]))
    assert mu.is_symmetric
    assert mu.moments(1)[0] == pytest.approx(5)


def test_require_symmetric():
    with pytest.raises(MeasureError):
        require_symmetric(Atomic([1.0], [1.0]))


def test_pushforward_pullback_grid_roundtrip():
    x = np.linspace(-2, 2, 801)
    f = semicircle_pdf(x)
    g = GridDensity(x, f / np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))
    rho = pushforward_square(g)
    assert rho.x[0] == 0
    back = pullback_sqrt(rho)
    assert np.allclose(back.moments(4), g.moments(4), rtol=1e-10)


def test_pushforward_density_moments():
    mu = semicircle()
    rho = pushforward_square(mu)
    # first raw moment of the push-forward is m_2
    assert rho.raw_moments(2)[0] == pytest.approx(1.0, rel=1e-9)
    assert np.allclose(pullback_sqrt(rho).moments(3), [1, 2, 5], rtol=1e-8)


def test_pushforward_atomic():
    rho = pushforward_square(bernoulli())
    assert list(rho.locations) == [1.0]


def test_weak_distance():
    assert weak_distance(bernoulli(), bernoulli()) == 0
    assert weak_distance(bernoulli(), dirac0()) > 0.1


@pytest.mark.parametrize(
    "mu",
    [bernoulli(), GridDensity(np.linspace(-1, 1, 3), [0, 1, 0]), MomentSeq((1, 2, 5), 2.0)],
)
def test_json_roundtrip(mu, tmp_path):
    path = tmp_path / "m.json"
    save_measure(mu, path)
    back = load_measure(path)
    assert type(back) is type(mu)
    assert np.allclose(np.asarray(back.moments(2), float), np.asarray(mu.moments(2), float))
    assert measure_to_dict(back) == json.loads(path.read_text())


def test_catalog_json_type():
    mu = measure_from_dict({"type": "catalog", "family": "rect_gaussian", "params": {"lam": 0.5, "sigma2": 1}})
    assert np.allclose(mu.moments(2), [1, 1.5], rtol=1e-10)


def test_unknown_type():
    with pytest.raises((MeasureError, KeyError, ValueError)):
        measure_from_dict({"type": "nope"})
