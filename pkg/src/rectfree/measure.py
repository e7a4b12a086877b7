"""
Probability measures on the real line in the three representations used
throughout the package, plus the measure-level operations: symmetrization,
square push-forward and its inverse, moments, the Cauchy transform and a
Cauchy-transform distance metrizing weak convergence.

Representations
---------------
:class:`Atomic`
    finitely many atoms.
:class:`GridDensity`
    piecewise-linear density on a sorted grid, plus a point mass at 0.
:class:`DensityMeasure`
    a vectorized density callable on a union of (possibly unbounded)
    intervals, plus a point mass at 0.  Catalog laws use this form.
:class:`MomentSeq`
    even moments only, with a declared support radius.

A "symmetric measure" is any of these whose ``is_symmetric`` is true.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from rectfree._quad import exp_sinh, tanh_sinh

__all__ = [
    "MeasureError",
    "Measure",
    "Atomic",
    "GridDensity",
    "DensityMeasure",
    "MomentSeq",
    "dirac0",
    "bernoulli",
    "symmetrize",
    "pushforward_square",
    "pullback_sqrt",
    "moments",
    "cauchy_transform",
    "weak_distance",
    "weak_distance_grid",
    "require_symmetric",
    "measure_to_dict",
    "measure_from_dict",
    "load_measure",
    "save_measure",
]

MASS_TOL = 1e-8
DENSITY_MASS_TOL = 1e-6


class MeasureError(ValueError):
    """Invalid measure data or an unsupported operation on a representation."""


def _as_complex_offaxis(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise MeasureError("Cauchy transform is only defined off the real axis")
    return z


class Measure:
    """Common interface; see the concrete representations."""

    is_symmetric: bool

    def mass(self) -> float:
        raise NotImplementedError

    def raw_moments(self, k_max: int) -> np.ndarray:
        """``[int x^1 dmu, ..., int x^k_max dmu]``."""
        raise NotImplementedError

    def moments(self, n_max: int) -> np.ndarray:
        """Even moments ``[m_2, m_4, ..., m_{2 n_max}]``."""
        return self.raw_moments(2 * n_max)[1::2]

    def cauchy_transform(self, z):
        raise NotImplementedError

    def cauchy_transform_d(self, z):
        """``(G(z), G'(z))``; subclasses compute both in one pass."""
        z = np.asarray(z, dtype=complex)
        step = 1e-6 * np.maximum(np.abs(z.imag), 1e-8)
        return self.cauchy_transform(z), (self.cauchy_transform(z + step) - self.cauchy_transform(z - step)) / (2 * step)

    def support_radius(self) -> float:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Atomic
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Atomic(Measure):
    """Discrete measure ``sum_i w_i delta_{x_i}``; atoms are merged and sorted."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.locations, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if x.shape != w.shape or x.ndim != 1 or x.size == 0:
            raise MeasureError("locations and weights must be matching 1-d arrays")
        if np.any(w < 0) or not np.all(np.isfinite(x)):
            raise MeasureError("weights must be nonnegative and locations finite")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise MeasureError(f"atom weights sum to {w.sum()!r}, not 1")
        ux, inv = np.unique(x, return_inverse=True)
        uw = np.zeros_like(ux)
        np.add.at(uw, inv, w)
        keep = uw > 0
        object.__setattr__(self, "locations", ux[keep])
        object.__setattr__(self, "weights", uw[keep])

    @property
    def is_symmetric(self) -> bool:
        x, w = self.locations, self.weights
        return bool(np.allclose(x, -x[::-1], rtol=0, atol=1e-12) and np.allclose(w, w[::-1], rtol=0, atol=1e-12))

    def mass(self) -> float:
        return float(self.weights.sum())

    def raw_moments(self, k_max: int) -> np.ndarray:
        k = np.arange(1, k_max + 1)[:, None]
        return (self.weights * self.locations ** k).sum(axis=1)

    def cauchy_transform(self, z):
        z = _as_complex_offaxis(z)
        return (self.weights / (z[..., None] - self.locations)).sum(axis=-1)

    def cauchy_transform_d(self, z):
        z = _as_complex_offaxis(z)
        q = 1.0 / (z[..., None] - self.locations)
        return (self.weights * q).sum(axis=-1), -(self.weights * q * q).sum(axis=-1)

    def support_radius(self) -> float:
        return float(np.abs(self.locations).max())

    def quantile(self, p):
        """Left-continuous inverse of the distribution function."""
        cdf = np.cumsum(self.weights)
        idx = np.searchsorted(cdf, np.asarray(p) - 1e-15, side="left")
        return self.locations[np.minimum(idx, len(cdf) - 1)]


def dirac0() -> Atomic:
    return Atomic([0.0], [1.0])


def bernoulli(c: float = 1.0) -> Atomic:
    """``(delta_{-c} + delta_c) / 2``."""
    return Atomic([-c, c], [0.5, 0.5])


# ---------------------------------------------------------------------------
# GridDensity
# ---------------------------------------------------------------------------


def _cell_log(z, t0, t1):
    # log((z - t0) / (z - t1)) written to stay accurate for |z| >> cell width
    return np.log1p((t1 - t0) / (z - t1))


@dataclass(frozen=True, eq=False)
class GridDensity(Measure):
    """Piecewise-linear density on a sorted grid plus a point mass at 0.

    The density is zero outside ``[x[0], x[-1]]``.  ``atom0`` is the mass
    at the origin, which closes the total mass to 1.
    """

    x: np.ndarray
    density: np.ndarray
    atom0: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        f = np.asarray(self.density, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise MeasureError("grid and density must be matching 1-d arrays (>= 2 points)")
        if np.any(np.diff(x) <= 0):
            raise MeasureError("grid must be strictly increasing")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise MeasureError("density values must be finite and nonnegative")
        if self.atom0 < 0:
            raise MeasureError("atom0 must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "density", f)
        total = self.integral() + self.atom0
        if abs(total - 1.0) > MASS_TOL:
            raise MeasureError(f"grid integral + atom0 = {total!r}, not 1")

    def integral(self) -> float:
        return float(np.sum(0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.x)))

    @property
    def is_symmetric(self) -> bool:
        x, f = self.x, self.density
        return bool(np.allclose(x, -x[::-1], atol=1e-12) and np.allclose(f, f[::-1], atol=1e-12 * max(1.0, f.max())))

    def mass(self) -> float:
        return self.integral() + self.atom0

    def pdf(self, t):
        return np.interp(t, self.x, self.density, left=0.0, right=0.0)

    def raw_moments(self, k_max: int) -> np.ndarray:
        # exact integrals of the linear interpolant times t^k, cell by cell
        t0, t1 = self.x[:-1], self.x[1:]
        f0, f1 = self.density[:-1], self.density[1:]
        s = (f1 - f0) / (t1 - t0)
        alpha = f0 - s * t0
        out = np.empty(k_max)
        for k in range(1, k_max + 1):
            a = alpha * (t1 ** (k + 1) - t0 ** (k + 1)) / (k + 1)
            b = s * (t1 ** (k + 2) - t0 ** (k + 2)) / (k + 2)
            out[k - 1] = np.sum(a + b)
        return out

    def cauchy_transform(self, z):
        z = _as_complex_offaxis(z)
        zz = z[..., None]
        t0, t1 = self.x[:-1], self.x[1:]
        f0, f1 = self.density[:-1], self.density[1:]
        s = (f1 - f0) / (t1 - t0)
        # int (f0 + s(t - t0)) / (z - t) dt = f_lin(z) L - s (t1 - t0)
        flin = f0 + s * (zz - t0)
        g = (flin * _cell_log(zz, t0, t1) - s * (t1 - t0)).sum(axis=-1)
        return g + self.atom0 / z

    def cauchy_transform_d(self, z):
        z = _as_complex_offaxis(z)
        zz = z[..., None]
        t0, t1 = self.x[:-1], self.x[1:]
        f0, f1 = self.density[:-1], self.density[1:]
        s = (f1 - f0) / (t1 - t0)
        flin = f0 + s * (zz - t0)
        L = _cell_log(zz, t0, t1)
        g = (flin * L - s * (t1 - t0)).sum(axis=-1) + self.atom0 / z
        # d/dz log((z - t0)/(z - t1)) = (t0 - t1) / ((z - t0)(z - t1))
        dL = (t0 - t1) / ((zz - t0) * (zz - t1))
        dg = (s * L + flin * dL).sum(axis=-1) - self.atom0 / (z * z)
        return g, dg

    def support_radius(self) -> float:
        nz = np.nonzero(self.density)[0]
        r = 0.0 if nz.size == 0 else float(np.abs(self.x[[max(nz[0] - 1, 0), min(nz[-1] + 1, len(self.x) - 1)]]).max())
        return r

    def quantile(self, p):
        """Quantiles of the measure (atom at 0 included)."""
        cells = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.x)
        cdf = np.concatenate([[0.0], np.cumsum(cells)])
        # insert the atom at 0 as a jump
        if self.atom0 > 0:
            j = np.searchsorted(self.x, 0.0)
            grid = np.concatenate([self.x[:j], [0.0, 0.0], self.x[j:]])
            base = np.interp(0.0, self.x, cdf)
            cdf = np.concatenate([cdf[:j], [base, base + self.atom0], cdf[j:] + self.atom0])
        else:
            grid = self.x
        p = np.asarray(p, dtype=float)
        return np.interp(p, cdf, grid)


# ---------------------------------------------------------------------------
# DensityMeasure
# ---------------------------------------------------------------------------


def _normalize_intervals(intervals) -> list[tuple[float, float]]:
    out = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if not a < b:
            raise MeasureError(f"empty interval [{a}, {b}]")
        out.append((a, b))
    out.sort()
    for (a0, b0), (a1, b1) in zip(out, out[1:]):
        if a1 < b0:
            raise MeasureError("support intervals overlap")
    return out


class DensityMeasure(Measure):
    """Absolutely continuous measure with a vectorized density callable.

    Parameters
    ----------
    pdf : callable
        Vectorized density; only evaluated strictly inside ``intervals``.
    intervals : sequence of (a, b)
        Disjoint support intervals; ``b`` may be ``inf`` and ``a`` ``-inf``.
    atom0 : float
        Point mass at 0.
    scale : float
        Length scale for the half-line quadrature of unbounded intervals.
    """

    def __init__(self, pdf: Callable, intervals, atom0: float = 0.0, scale: float = 1.0,
                 name: str = "", check: bool = True):
        self.pdf_raw = pdf
        self.intervals = _normalize_intervals(intervals)
        self.atom0 = float(atom0)
        self.scale = float(scale)
        self.name = name
        nodes, weights, piece = [], [], []
        self._pieces = []
        for i, (a, b) in enumerate(self.intervals):
            for lo, hi, x, w in self._rules(a, b):
                nodes.append(x)
                weights.append(w)
                piece.append(np.full(x.size, len(self._pieces)))
                self._pieces.append((lo, hi))
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        self.node_piece = np.concatenate(piece)
        self.values = np.asarray(pdf(self.nodes), dtype=float)
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise MeasureError("density must be finite and nonnegative inside its support")
        self._wf = self.weights * self.values
        if check:
            total = self.mass()
            if abs(total - 1.0) > DENSITY_MASS_TOL:
                raise MeasureError(f"density integrates to {total!r} (+ atom0), not 1")

    def _rules(self, a, b):
        # Unbounded intervals are cut into a finite piece and a tail so that
        # near-axis evaluation can use singularity subtraction on the
        # finite piece.
        s = self.scale
        if np.isfinite(a) and np.isfinite(b):
            yield (a, b, *tanh_sinh(a, b))
        elif np.isfinite(a):
            c = max(a, 0.0) + 40 * s if a >= 0 else a + 40 * s
            yield (a, c, *tanh_sinh(a, c))
            yield (c, np.inf, *exp_sinh(c, max(s, abs(c))))
        elif np.isfinite(b):
            c = min(b, 0.0) - 40 * s if b <= 0 else b - 40 * s
            x, w = exp_sinh(-c, max(s, abs(c)))
            yield (-np.inf, c, -x[::-1], w[::-1])
            yield (c, b, *tanh_sinh(c, b))
        else:
            raise MeasureError("split (-inf, inf) into two half-lines")

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = np.zeros(t.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (t > a) & (t < b)
        if np.any(inside):
            out[inside] = self.pdf_raw(t[inside])
        return out

    @property
    def is_symmetric(self) -> bool:
        mirrored = _normalize_intervals([(-b, -a) for a, b in self.intervals])
        if not np.allclose(np.array(mirrored), np.array(self.intervals)):
            return False
        probe = self.nodes[:: max(1, self.nodes.size // 50)]
        return bool(np.allclose(self.pdf(probe), self.pdf(-probe), rtol=1e-10, atol=1e-14))

    def mass(self) -> float:
        return float(self._wf.sum()) + self.atom0

    def raw_moments(self, k_max: int) -> np.ndarray:
        k = np.arange(1, k_max + 1)[:, None]
        return (self._wf * self.nodes ** k).sum(axis=1)

    def support_radius(self) -> float:
        return float(max(max(abs(a), abs(b)) for a, b in self.intervals))

    def _taylor(self, x, a, b):
        """``f'(x)`` and ``f''(x)`` by central differences inside ``(a, b)``."""
        width = b - a
        room = np.minimum(x - a, b - x)
        h1 = np.minimum(1e-5 * width, 0.5 * room)
        h2 = np.minimum(1e-4 * width, 0.5 * room)
        f = self.pdf_raw
        d1 = (f(x + h1) - f(x - h1)) / (2 * h1)
        d2 = (f(x + h2) - 2 * f(x) + f(x - h2)) / (h2 * h2)
        return d1, d2

    def cauchy_transform(self, z):
        """``int f(t) / (z - t) dt`` (+ ``atom0 / z``).

        Points close to the axis inside a finite piece use second-order
        singularity subtraction; the subtracted terms are integrated in
        closed form.
        """
        return self._cauchy(z, False)

    def cauchy_transform_d(self, z):
        return self._cauchy(z, True)

    def _cauchy(self, z, want_d: bool):
        z = _as_complex_offaxis(z)
        shape = z.shape
        z = z.ravel()
        out = np.empty(z.size, dtype=complex)
        dout = np.empty(z.size, dtype=complex) if want_d else None
        plain = np.ones(z.size, dtype=bool)
        for p, (a, b) in enumerate(self._pieces):
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            width = b - a
            margin = 1e-3 * width
            near = (
                plain
                & (z.real > a + margin)
                & (z.real < b - margin)
                & (np.abs(z.imag) < 0.25 * width)
            )
            if not np.any(near):
                continue
            idx = np.nonzero(near)[0]
            zi = z[idx]
            xi = zi.real
            fx = self.pdf_raw(xi)
            dfx, d2fx = self._taylor(xi, a, b)
            sel = self.node_piece == p
            t, w, ft = self.nodes[sel], self.weights[sel], self.values[sel]
            u = t[None, :] - xi[:, None]
            num = w * (ft[None, :] - fx[:, None] - dfx[:, None] * u - 0.5 * d2fx[:, None] * u * u)
            q = 1.0 / (zi[:, None] - t[None, :])
            # closed forms of int (t - x)^k / (z - t) dt over [a, b], k = 0, 1, 2
            d = zi - xi
            L = np.log(zi - a) - np.log(zi - b)
            Q1 = d * L - width
            Q2 = -0.5 * ((b - xi) ** 2 - (a - xi) ** 2) - d * width + d * d * L
            local = (num * q).sum(axis=1) + fx * L + dfx * Q1 + 0.5 * d2fx * Q2
            rest = ~sel
            qo = 1.0 / (zi[:, None] - self.nodes[rest][None, :])
            other = (self._wf[rest] * qo).sum(axis=1)
            out[idx] = local + other + self.atom0 / zi
            if want_d:
                dL = -(b - a) / ((zi - a) * (zi - b))
                dQ1 = L + d * dL
                dQ2 = -width + 2 * d * L + d * d * dL
                dlocal = -(num * q * q).sum(axis=1) + fx * dL + dfx * dQ1 + 0.5 * d2fx * dQ2
                dother = -(self._wf[rest] * qo * qo).sum(axis=1)
                dout[idx] = dlocal + dother - self.atom0 / (zi * zi)
            plain[idx] = False
        if np.any(plain):
            zp = z[plain]
            q = 1.0 / (zp[:, None] - self.nodes[None, :])
            out[plain] = (self._wf * q).sum(axis=1) + self.atom0 / zp
            if want_d:
                dout[plain] = -(self._wf * q * q).sum(axis=1) - self.atom0 / (zp * zp)
        if want_d:
            return out.reshape(shape), dout.reshape(shape)
        return out.reshape(shape)

    def quantile(self, p, n_grid: int = 20001):
        """Quantiles by inverting a fine tabulated distribution function."""
        lo = max(-self.support_radius(), -1e6 * self.scale)
        hi = min(self.support_radius(), 1e6 * self.scale)
        edges = [lo]
        for a, b in self.intervals:
            edges += [max(a, lo), min(b, hi)]
        edges.append(hi)
        grid = np.unique(np.concatenate([np.linspace(lo, hi, n_grid), np.clip(edges, lo, hi)]))
        f = self.pdf(grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(grid))])
        if self.atom0 > 0:
            cdf = cdf + self.atom0 * (grid >= 0)
        cdf /= cdf[-1]
        return np.interp(np.asarray(p, dtype=float), cdf, grid)

    def to_grid(self, x) -> GridDensity:
        """Sample on ``x``; the mass lost to sampling is put into ``atom0``."""
        x = np.asarray(x, dtype=float)
        f = self.pdf(x)
        integral = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))
        scale = (1.0 - self.atom0) / integral if integral > 0 else 0.0
        return GridDensity(x, f * scale, self.atom0, meta={"source": self.name or "density"})


# ---------------------------------------------------------------------------
# MomentSeq
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentSeq(Measure):
    """Symmetric measure known through even moments ``m_2, ..., m_2N``."""

    even_moments: tuple
    radius: float

    def __post_init__(self):
        m = tuple(self.even_moments)
        if not m:
            raise MeasureError("need at least one moment")
        if self.radius <= 0:
            raise MeasureError("support radius must be positive")
        object.__setattr__(self, "even_moments", m)

    is_symmetric = True

    def mass(self) -> float:
        return 1.0

    def moments(self, n_max: int):
        if n_max > len(self.even_moments):
            raise MeasureError(
                f"requested m_{2 * n_max} but only {len(self.even_moments)} even moments are stored"
            )
        return np.array(self.even_moments[:n_max]) if not _exact_seq(self.even_moments) else list(self.even_moments[:n_max])

    def raw_moments(self, k_max: int):
        even = self.moments(k_max // 2)
        out = [0] * k_max
        for i, v in enumerate(even):
            out[2 * i + 1] = v
        return np.array(out, dtype=float) if not _exact_seq(self.even_moments) else out

    def cauchy_transform(self, z):
        """Laurent series ``sum m_2k / z^(2k+1)``; only for ``|z| >= 2 radius``."""
        z = _as_complex_offaxis(z)
        if np.any(np.abs(z) < 2 * self.radius):
            raise MeasureError("moment series only converges well for |z| >= 2 * radius")
        m = np.array([1.0] + [float(v) for v in self.even_moments])
        k = np.arange(m.size)
        return (m / z[..., None] ** (2 * k + 1)).sum(axis=-1)

    def cauchy_transform_d(self, z):
        g = self.cauchy_transform(z)
        z = np.asarray(z, dtype=complex)
        m = np.array([1.0] + [float(v) for v in self.even_moments])
        k = np.arange(m.size)
        return g, (-(2 * k + 1) * m / z[..., None] ** (2 * k + 2)).sum(axis=-1)

    def support_radius(self) -> float:
        return float(self.radius)


def _exact_seq(values) -> bool:
    from fractions import Fraction
    from numbers import Rational

    return all(isinstance(v, (Rational, Fraction)) for v in values)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def require_symmetric(mu: Measure) -> Measure:
    if not getattr(mu, "is_symmetric", False):
        raise MeasureError("a symmetric measure is required")
    return mu


def symmetrize(nu: Measure) -> Measure:
    """``(nu(B) + nu(-B)) / 2``."""
    if isinstance(nu, MomentSeq):
        return nu
    if abs(nu.mass() - 1.0) > DENSITY_MASS_TOL:
        raise MeasureError("input measure is not normalized")
    if isinstance(nu, Atomic):
        x = np.concatenate([nu.locations, -nu.locations])
        w = np.concatenate([nu.weights, nu.weights]) / 2
        return Atomic(x, w)
    if isinstance(nu, GridDensity):
        grid = np.union1d(nu.x, -nu.x)
        f = 0.5 * (nu.pdf(grid) + nu.pdf(-grid))
        # mass is preserved only up to re-interpolation on the union grid
        integral = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(grid)))
        return GridDensity(grid, f * (1.0 - nu.atom0) / integral, nu.atom0, meta=dict(nu.meta))
    if isinstance(nu, DensityMeasure):
        raw = nu.pdf

        def pdf(t):
            return 0.5 * (raw(t) + raw(-t))

        pieces = nu.intervals + [(-b, -a) for a, b in nu.intervals]
        return DensityMeasure(pdf, _merge(pieces), nu.atom0, nu.scale, name=f"sym({nu.name})")
    raise MeasureError(f"cannot symmetrize {type(nu).__name__}")


def _merge(intervals):
    ivs = sorted(intervals)
    out = [list(ivs[0])]
    for a, b in ivs[1:]:
        if a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(i) for i in out]


def pushforward_square(mu: Measure) -> Measure:
    """Image of a symmetric measure under ``x -> x^2`` (a measure on [0, inf))."""
    require_symmetric(mu)
    if isinstance(mu, Atomic):
        return Atomic(mu.locations ** 2, mu.weights)
    if isinstance(mu, GridDensity):
        pos = mu.x[mu.x >= 0]
        if pos[0] != 0:
            pos = np.concatenate([[0.0], pos])
        y = pos ** 2
        f = mu.pdf(pos)
        rho = np.empty_like(y)
        rho[1:] = f[1:] / pos[1:]
        # At the origin a positive density turns into a 1/sqrt(y) blow-up that
        # a piecewise-linear grid cannot carry.  The grid keeps the
        # neighbouring value there and f(0) travels in the metadata so that
        # pullback_sqrt restores the original nodes exactly.
        rho[0] = rho[1] if f[0] > 0 else (f[1] - f[0]) / pos[1]
        integral = float(np.sum(0.5 * (rho[1:] + rho[:-1]) * np.diff(y)))
        scale = (1.0 - mu.atom0) / integral if integral > 0 else 1.0
        meta = {**mu.meta, "pushforward": "square", "origin_density": float(f[0] * scale)}
        return GridDensity(y, rho * scale, mu.atom0, meta=meta)
    if isinstance(mu, DensityMeasure):
        raw = mu.pdf

        def pdf(y):
            r = np.sqrt(y)
            return raw(r) / r

        pieces = []
        for a, b in mu.intervals:
            if b <= 0:
                continue
            pieces.append((max(a, 0.0) ** 2, b ** 2))
        return DensityMeasure(pdf, pieces, mu.atom0, mu.scale ** 2, name=f"sq({mu.name})")
    raise MeasureError(f"push-forward of {type(mu).__name__} is not supported; use its moments")


def pullback_sqrt(rho: Measure) -> Measure:
    """The symmetric measure whose square push-forward is ``rho``."""
    if isinstance(rho, Atomic):
        if np.any(rho.locations < 0):
            raise MeasureError("pullback needs a measure on [0, inf)")
        r = np.sqrt(rho.locations)
        return Atomic(np.concatenate([r, -r]), np.concatenate([rho.weights, rho.weights]) / 2)
    if isinstance(rho, GridDensity):
        if rho.x[0] < 0 and np.any(rho.density[rho.x < 0] > 0):
            raise MeasureError("pullback needs a measure on [0, inf)")
        y = rho.x[rho.x >= 0]
        r = np.sqrt(y)
        f = rho.pdf(y) * r  # f(x) = rho(x^2) |x|
        if r[0] == 0:
            f[0] = rho.meta.get("origin_density", 0.0)
        x = np.concatenate([-r[::-1], r[1:] if r[0] == 0 else r])
        fx = np.concatenate([f[::-1], f[1:] if r[0] == 0 else f])
        integral = float(np.sum(0.5 * (fx[1:] + fx[:-1]) * np.diff(x)))
        fx = fx * (1.0 - rho.atom0) / integral if integral > 0 else fx
        meta = {k: v for k, v in rho.meta.items() if k not in ("pushforward", "origin_density")}
        return GridDensity(x, fx, rho.atom0, meta=meta)
    if isinstance(rho, DensityMeasure):
        if any(a < 0 for a, _ in rho.intervals):
            raise MeasureError("pullback needs a measure on [0, inf)")
        raw = rho.pdf

        def pdf(x):
            return raw(x * x) * np.abs(x)

        pieces = [(np.sqrt(a), np.sqrt(b)) for a, b in rho.intervals]
        pieces += [(-b, -a) for a, b in pieces]
        return DensityMeasure(pdf, _merge(pieces), rho.atom0, np.sqrt(rho.scale), name=f"sqrt({rho.name})")
    raise MeasureError(f"pullback of {type(rho).__name__} is not supported")


def moments(mu: Measure, n_max: int):
    """Even moments ``[m_2, ..., m_{2 n_max}]``."""
    return mu.moments(n_max)


def cauchy_transform(mu: Measure, z):
    """``G_mu(z) = int dmu(t) / (z - t)`` for ``z`` off the real axis."""
    return mu.cauchy_transform(z)


def weak_distance_grid(n: int = 64, reach: float = 50.0, lo: float = 0.05) -> np.ndarray:
    """Evaluation points for :func:`weak_distance` (``Im z = 1``)."""
    half = np.logspace(np.log10(lo), np.log10(reach), n // 2)
    return np.concatenate([-half[::-1], half]) + 1j


def weak_distance(mu1: Measure, mu2: Measure, grid=None) -> float:
    """``max |G_1(z) - G_2(z)|`` over a fixed grid on the line ``Im z = 1``."""
    z = weak_distance_grid() if grid is None else np.asarray(grid)
    return float(np.max(np.abs(mu1.cauchy_transform(z) - mu2.cauchy_transform(z))))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def measure_to_dict(mu: Measure) -> dict:
    if isinstance(mu, Atomic):
        return {"type": "atomic", "atoms": [[float(x), float(w)] for x, w in zip(mu.locations, mu.weights)]}
    if isinstance(mu, GridDensity):
        d = {"type": "grid", "x": mu.x.tolist(), "density": mu.density.tolist(), "atom0": float(mu.atom0)}
        if mu.meta:
            d["meta"] = mu.meta
        return d
    if isinstance(mu, MomentSeq):
        return {"type": "moments", "moments": [float(v) for v in mu.even_moments], "radius": float(mu.radius)}
    if isinstance(mu, DensityMeasure):
        raise MeasureError("callable densities are serialized via to_grid() or a catalog reference")
    raise MeasureError(f"unknown measure type {type(mu).__name__}")


def measure_from_dict(d: dict) -> Measure:
    kind = d.get("type")
    if kind == "atomic":
        atoms = np.asarray(d["atoms"], dtype=float).reshape(-1, 2)
        return Atomic(atoms[:, 0], atoms[:, 1])
    if kind == "grid":
        return GridDensity(d["x"], d["density"], float(d.get("atom0", 0.0)), meta=d.get("meta", {}))
    if kind == "moments":
        return MomentSeq(tuple(d["moments"]), float(d["radius"]))
    if kind == "catalog":
        from rectfree.closedforms import catalog_measure

        return catalog_measure(d["family"], **d.get("params", {}))
    raise MeasureError(f"unknown measure type {kind!r}")


def load_measure(path) -> Measure:
    with open(Path(path)) as fh:
        return measure_from_dict(json.load(fh))


def save_measure(mu: Measure, path) -> None:
    with open(Path(path), "w") as fh:
        json.dump(measure_to_dict(mu), fh, indent=1, sort_keys=True)
