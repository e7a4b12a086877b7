"""
The analytic transform chain: branch-aware square roots, the rectangular
Cauchy transform ``H``, its local inverse, the rectangular R-transform
``C`` and the recovery of a symmetric measure from ``C``.

Notation
--------
``T(X) = (lam X + 1)(X + 1)``, ``U = (T - 1)^{<-1>}`` and
``V(z) = U(z - 1) + 1``.  For a symmetric measure ``mu``::

    H(z) = lam G(1/sqrt z)^2 + (1 - lam) sqrt(z) G(1/sqrt z),   z not in [0, inf)
    C(z) = U(z / H^{-1}(z) - 1)

and ``C`` is additive under the rectangular free convolution.

Recovery works backwards: for ``w`` in the lower half plane put
``z = 1 / w^2`` and solve ``y = z T(C(y))`` for ``y = H(z)``; then
``w G(w) = V(y / z) = 1 + C(y)`` and the density is read off
``Im G(x - i eps) / pi`` as ``eps -> 0``.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from rectfree.measure import GridDensity, Measure, require_symmetric
from rectfree.series import TruncatedSeries, cumulants_from_moments

__all__ = [
    "DomainError",
    "sqrt_cut_pos",
    "sqrt_cut_neg",
    "T_eval",
    "U_eval",
    "V_eval",
    "H_eval",
    "H_inverse",
    "certify_beta",
    "RectTransform",
    "C_eval",
    "C_from_measure",
    "H_from_transform",
    "RecoveryResult",
    "recover_measure",
    "EPS_SCHEDULE",
    "thread_count",
]

#: Smoothing heights for Stieltjes inversion (extrapolated to 0).
EPS_SCHEDULE = (1e-2, 5e-3, 2.5e-3)

#: Values of the extrapolated density in [-NEG_TOL, 0) are plain round-off.
NEG_TOL = 1e-8

#: Normalization residuals above this are flagged.
FLAG_RESIDUAL = 0.05

_NEWTON_TOL = 1e-12

#: Residual accepted by warm-started solves during continuation.
WARM_TOL = 1e-9


class DomainError(ArithmeticError):
    """Newton failed to converge: the requested point lies outside the
    numerically certified domain.  ``beta`` is the largest certified radius
    on the negative axis (or ``None`` when it was not computed)."""

    def __init__(self, message: str, beta: Optional[float] = None):
        super().__init__(message if beta is None else f"{message} (certified beta = {beta:.6g})")
        self.beta = beta


def thread_count() -> int:
    """Worker threads allowed by ``RECTFREE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("RECTFREE_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Square roots and the auxiliary maps
# ---------------------------------------------------------------------------


def sqrt_cut_pos(z):
    """Square root analytic off ``[0, inf)`` with ``sqrt(-1) = i``.

    Values lie in the open upper half plane.
    """
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real >= 0)):
        raise ValueError("sqrt_cut_pos is undefined on [0, inf)")
    return 1j * np.sqrt(-z)


def sqrt_cut_neg(z):
    """Square root analytic off ``(-inf, 0]`` with ``1^(1/2) = 1``."""
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real <= 0)):
        raise ValueError("sqrt_cut_neg is undefined on (-inf, 0]")
    return np.sqrt(z)


def T_eval(lam: float, x):
    return (lam * x + 1.0) * (x + 1.0)


def U_eval(lam: float, s):
    """Principal inverse of ``T - 1`` (the root vanishing at ``s = 0``).

    Written as ``2 s / ((1 + lam) + sqrt((1 + lam)^2 + 4 lam s))`` to avoid
    cancellation; ``lam = 0`` gives ``U(s) = s`` explicitly.
    """
    s = np.asarray(s, dtype=complex)
    if lam == 0:
        return s.copy()
    disc = (1.0 + lam) ** 2 + 4.0 * lam * s
    return 2.0 * s / ((1.0 + lam) + np.sqrt(disc))


def U_derivative(lam: float, s):
    if lam == 0:
        return np.ones_like(np.asarray(s, dtype=complex))
    return 1.0 / np.sqrt((1.0 + lam) ** 2 + 4.0 * lam * np.asarray(s, dtype=complex))


def V_eval(lam: float, z):
    """``V(z) = U(z - 1) + 1``; ``V(z) = z`` when ``lam = 0``."""
    z = np.asarray(z, dtype=complex)
    if lam == 0:
        return z.copy()
    return U_eval(lam, z - 1.0) + 1.0


# ---------------------------------------------------------------------------
# H and its inverse
# ---------------------------------------------------------------------------


def _check_lam(lam):
    if not 0 <= lam <= 1:
        raise ValueError(f"ratio lambda must lie in [0, 1], got {lam!r}")


def H_eval(mu: Measure, lam: float, z):
    """Rectangular Cauchy transform with ratio ``lam``.

    ``H(z) = lam G(1/sqrt z)^2 + (1 - lam) sqrt(z) G(1/sqrt z)`` for ``z``
    off ``[0, inf)``.  The branch of the square root is irrelevant for a
    symmetric measure; :func:`sqrt_cut_pos` is used.
    """
    _check_lam(lam)
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real >= 0)):
        raise ValueError("H is defined on C minus [0, inf)")
    r = sqrt_cut_pos(z)
    G = mu.cauchy_transform(1.0 / r)
    return lam * G * G + (1.0 - lam) * r * G


def H_eval_d(mu: Measure, lam: float, z):
    """``(H(z), H'(z))`` from one pass over the measure."""
    _check_lam(lam)
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real >= 0)):
        raise ValueError("H is defined on C minus [0, inf)")
    r = sqrt_cut_pos(z)
    G, dG = mu.cauchy_transform_d(1.0 / r)
    du = -0.5 / (r * r * r)  # d/dz of 1/sqrt(z)
    H = lam * G * G + (1.0 - lam) * r * G
    dH = 2.0 * lam * G * dG * du + (1.0 - lam) * (G / (2.0 * r) + r * dG * du)
    return H, dH


def _newton_d(hd: Callable, y, seed, max_iter: int = 60, tol: float = _NEWTON_TOL):
    """Newton for ``h(x) = y`` with ``hd(x) = (h(x), h'(x))``.

    Returns ``(x, converged mask, h'(x))``; the stopping rules match
    :func:`_newton`.
    """
    x = np.array(seed, dtype=complex, copy=True)
    y = np.asarray(y, dtype=complex)
    scale = np.maximum(np.abs(y), 1.0)
    res_abs = np.full(x.shape, np.inf)
    dx = np.zeros(x.shape, dtype=complex)
    active = np.ones(x.shape, dtype=bool)
    finishing = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        hv, d = hd(x[idx])
        r = hv - y[idx]
        dx[idx] = d
        prev = res_abs[idx]
        res_abs[idx] = np.abs(r)
        stagnant = (res_abs[idx] <= tol * scale[idx]) & (res_abs[idx] > 0.25 * prev)
        stop = (res_abs[idx] <= 1e-14 * scale[idx]) | stagnant | finishing[idx] | ~np.isfinite(r)
        active[idx[stop]] = False
        keep = ~stop
        work = idx[keep]
        if work.size == 0:
            break
        with np.errstate(all="ignore"):
            step = r[keep] / d[keep]
        bad = ~np.isfinite(step)
        step[bad] = 0
        x[work] -= step
        finishing[work[bad | (np.abs(step) <= 1e-13 * np.abs(x[work]))]] = True
    ok = np.isfinite(res_abs) & (res_abs <= tol * scale)
    return x, ok, dx


def _fd_derivative(h: Callable, z, hz=None):
    step = 1e-6 * np.maximum(np.abs(z), 1e-8)
    return (h(z + step) - h(z - step)) / (2 * step)


def _newton(h: Callable, y, seed, max_iter: int = 60, tol: float = _NEWTON_TOL):
    """Vectorized Newton for ``h(x) = y``; returns (x, converged mask).

    Derivatives are central differences.  An entry counts as converged when
    ``|h(x) - y| <= tol * max(1, |y|)``.
    """
    x = np.array(seed, dtype=complex, copy=True)
    y = np.asarray(y, dtype=complex)
    scale = np.maximum(np.abs(y), 1.0)
    res_abs = np.full(x.shape, np.inf)
    active = np.ones(x.shape, dtype=bool)
    finishing = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        r = h(x[idx]) - y[idx]
        prev = res_abs[idx]
        res_abs[idx] = np.abs(r)
        # stop at round-off level, or once within tolerance and stagnating
        stagnant = (res_abs[idx] <= tol * scale[idx]) & (res_abs[idx] > 0.25 * prev)
        stop = (res_abs[idx] <= 1e-14 * scale[idx]) | stagnant | finishing[idx] | ~np.isfinite(r)
        active[idx[stop]] = False
        work = idx[~stop]
        if work.size == 0:
            break
        with np.errstate(all="ignore"):
            step = r[~stop] / _fd_derivative(h, x[work])
        bad = ~np.isfinite(step)
        step[bad] = 0
        x[work] -= step
        # a tiny (or impossible) step: evaluate the residual once more, then stop
        finishing[work[bad | (np.abs(step) <= 1e-13 * np.abs(x[work]))]] = True
    ok = np.isfinite(res_abs) & (res_abs <= tol * scale)
    return x, ok


def H_inverse(h: Callable, y, beta: Optional[float] = None, seed=None, ray_steps: int = 8):
    """Solve ``h(x) = y`` for ``x`` near ``y`` (``h(x) ~ x`` at 0).

    Parameters
    ----------
    h : callable
        Vectorized ``H`` (for instance ``lambda z: H_eval(mu, lam, z)``).
    y : complex or array
        Target values.  Real negative targets with a known ``beta`` are
        bracketed in ``[-beta, 0)`` and solved with Brent's method; complex
        targets are reached by Newton continuation along the segment from
        ``Re y`` (or ``-|y|``) to ``y``.
    beta : float, optional
        Certified radius (see :func:`certify_beta`).
    seed : array, optional
        Explicit Newton seed; skips the continuation.

    Raises
    ------
    DomainError
        Newton did not converge to the ``1e-12`` residual.
    """
    y = np.asarray(y, dtype=complex)
    shape = y.shape
    y = y.ravel()
    out = np.empty_like(y)
    if seed is not None:
        x, ok = _newton(h, y, np.asarray(seed, dtype=complex).ravel())
        if not np.all(ok):
            raise DomainError("Newton did not converge for H^{-1}", beta)
        return x.reshape(shape)

    real = (y.imag == 0) & (y.real < 0)
    if beta is not None and np.any(real):
        hb = h(np.array([-beta + 0j]))[0].real
        for i in np.nonzero(real)[0]:
            yi = y[i].real
            if not hb < yi:
                raise DomainError(f"y = {yi:.6g} is outside (H(-beta), 0) = ({hb:.6g}, 0)", beta)
            f = lambda t: h(np.array([t + 0j]))[0].real - yi  # noqa: E731
            upper = yi * 1e-3
            if not f(upper) > 0:
                raise DomainError(f"no sign change bracketing H^{{-1}}({yi:.6g})", beta)
            out[i] = brentq(f, -beta, upper, xtol=1e-300, rtol=1e-15)
        polished, ok = _newton(h, y[real], out[real])
        if np.all(ok):
            # keep the complex polish: tabulated transforms carry round-off
            # imaginary parts on the axis
            out[real] = polished
    rest = ~real if beta is not None else np.ones(y.shape, dtype=bool)
    if np.any(rest):
        yr = y[rest]
        start = np.where(yr.real < 0, yr.real, -np.abs(yr)) + 0j
        x = start.copy()
        for k in range(0, ray_steps + 1):
            target = start + (yr - start) * (k / ray_steps)
            x, ok = _newton(h, target, x)
            if not np.all(ok) and k == ray_steps:
                raise DomainError("Newton continuation for H^{-1} failed", beta)
        out[rest] = x
    res = np.abs(h(out) - y)
    if np.any(res > _NEWTON_TOL * np.maximum(1.0, np.abs(y))):
        raise DomainError(f"H^{{-1}} residual {res.max():.3g} exceeds 1e-12", beta)
    return out.reshape(shape)


def certify_beta(h: Callable, beta_max: float = 1.0, n_samples: int = 256, n_newton: int = 8,
                 iterations: int = 40) -> float:
    """Largest ``beta <= beta_max`` for which ``h`` passes the domain checks.

    On ``[-beta, 0)`` (sampled at ``n_samples`` geometrically spaced points)
    ``h`` must be real, finite and strictly increasing, and Newton must
    recover ``n_newton`` sample points from the seed ``y`` itself.  This is a
    constructive stand-in for an existence statement; it is a heuristic, not
    a proof.
    """

    def ok(beta: float) -> bool:
        x = -beta * np.geomspace(1e-6, 1.0, n_samples)[::-1]
        hx = h(x + 0j)
        if not np.all(np.isfinite(hx)) or np.max(np.abs(hx.imag)) > 1e-9 * np.max(np.abs(hx)):
            return False
        if np.any(np.diff(hx.real) <= 0):
            return False
        picks = x[:: max(1, n_samples // n_newton)]
        ys = h(picks + 0j).real + 0j
        sol, conv = _newton(h, ys, ys)
        return bool(np.all(conv) and np.allclose(sol.real, picks, rtol=1e-8, atol=1e-14))

    if ok(beta_max):
        return float(beta_max)
    lo, hi = 0.0, beta_max
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise DomainError("no certified interval found on the negative axis", 0.0)
    return lo


# ---------------------------------------------------------------------------
# RectTransform
# ---------------------------------------------------------------------------

#: evaluator(z, warm) -> (C(z), C'(z), new_warm)
Evaluator = Callable[[np.ndarray, object], tuple]


@dataclass(frozen=True)
class RectTransform:
    """An evaluable rectangular R-transform ``C``.

    Attributes
    ----------
    lam : float
        The ratio.
    evaluator : callable
        ``evaluator(z, warm) -> (value, derivative, warm)``.  ``warm`` is an
        opaque solver state (e.g. the last ``H^{-1}`` solution) that lets
        continuation-based callers restart Newton close to the answer; pass
        ``None`` for a cold evaluation.
    series_head : TruncatedSeries, optional
        Taylor expansion at 0 (the cumulant series ``sum c_2n z^n``).
    name : str
    derived : bool
        True when the transform was produced numerically from a density
        rather than given in closed form.
    """

    lam: float
    evaluator: Evaluator
    series_head: Optional[TruncatedSeries] = None
    name: str = ""
    derived: bool = False
    beta: Optional[float] = None

    def __post_init__(self):
        _check_lam(self.lam)

    def evaluate(self, z, warm=None):
        """``(C(z), warm)``."""
        v, _, w = self.evaluator(np.asarray(z, dtype=complex), warm)
        return v, w

    def value_and_derivative(self, z, warm=None):
        return self.evaluator(np.asarray(z, dtype=complex), warm)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.evaluator(z, None)[0]

    def __add__(self, other: "RectTransform") -> "RectTransform":
        if not isinstance(other, RectTransform):
            return NotImplemented
        if self.lam != other.lam:
            raise ValueError("cannot add transforms with different ratios")
        f, g = self.evaluator, other.evaluator

        def ev(z, warm):
            wf, wg = warm if warm is not None else (None, None)
            a, da, wf = f(z, wf)
            b, db, wg = g(z, wg)
            return a + b, da + db, (wf, wg)

        head = None
        if self.series_head is not None and other.series_head is not None:
            n = min(self.series_head.order, other.series_head.order)
            head = self.series_head.truncate(n) + other.series_head.truncate(n)
        betas = [b for b in (self.beta, other.beta) if b is not None]
        return RectTransform(
            self.lam, ev, head, f"{self.name}+{other.name}", self.derived or other.derived,
            min(betas) if betas else None,
        )

    def scaled(self, factor: float) -> "RectTransform":
        """``factor * C`` (the transform of a convolution power when
        ``factor`` is a positive integer)."""
        f = self.evaluator

        def ev(z, warm):
            a, da, w = f(z, warm)
            return factor * a, factor * da, w

        head = None if self.series_head is None else self.series_head * factor
        return RectTransform(self.lam, ev, head, f"{factor}*{self.name}", self.derived, self.beta)

    @classmethod
    def from_callable(cls, lam: float, func: Callable, deriv: Callable | None = None,
                      series_head=None, name: str = "", derived: bool = False):
        """Wrap a closed-form ``C`` (and optionally ``C'``)."""

        def ev(z, warm):
            v = np.asarray(func(z), dtype=complex)
            if deriv is not None:
                d = np.asarray(deriv(z), dtype=complex)
            else:
                step = 1e-6 * np.maximum(np.abs(z), 1e-6)
                d = (np.asarray(func(z + step)) - np.asarray(func(z - step))) / (2 * step)
            return v, d, None

        return cls(lam, ev, series_head, name, derived)


def C_from_measure(mu: Measure, lam: float, beta: Optional[float] = None, series_order: int = 0,
                   name: str = "") -> RectTransform:
    """``C(z) = U(z / H^{-1}(z) - 1)`` for a symmetric measure.

    The ``H^{-1}`` solve is warm-started from the caller-supplied state.
    Cold evaluations first try Newton seeded at the target and fall back
    to :func:`H_inverse` continuation.  ``series_order > 0``
    attaches the cumulant series computed from the moments.
    """
    require_symmetric(mu)
    _check_lam(lam)

    def h(z):
        return H_eval(mu, lam, z)

    if beta is None:
        beta = certify_beta(h)

    def hd(z):
        return H_eval_d(mu, lam, z)

    def ev(z, warm):
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        zf = z.ravel()
        # H(x) ~ x near 0, so the target itself is the natural cold seed
        seed = zf if warm is None else np.asarray(warm, dtype=complex).ravel()
        # near the real axis the transform of a tabulated density is only
        # known to ~1e-12, so warm (continuation) solves accept a looser
        # residual than the certified-domain inverse
        x, ok, dH = _newton_d(hd, zf, seed, tol=_NEWTON_TOL if warm is None else WARM_TOL)
        if not np.all(ok):
            x[~ok] = H_inverse(h, zf[~ok], beta=beta)
            dH[~ok] = hd(x[~ok])[1]
        s = zf / x - 1.0
        value = U_eval(lam, s)
        # d/dz of U(z / x(z) - 1) with x' = 1 / H'(x)
        ds = 1.0 / x - zf / (x * x) / dH
        deriv = U_derivative(lam, s) * ds
        return value.reshape(shape), deriv.reshape(shape), x.reshape(shape)

    head = None
    if series_order > 0:
        m = mu.moments(series_order)
        c = cumulants_from_moments(list(m), lam, series_order)
        head = TruncatedSeries.from_tail(c)
    return RectTransform(lam, ev, head, name or type(mu).__name__, True, beta)


def C_eval(mu: Measure, lam: float, z, beta: Optional[float] = None):
    """Evaluate the rectangular R-transform of ``mu`` at ``z``."""
    return C_from_measure(mu, lam, beta)(z)


# ---------------------------------------------------------------------------
# Recovery
# ---------------------------------------------------------------------------


def H_from_transform(C: RectTransform, z, n_steps: int = 24):
    """``H(z)`` for a law known only through ``C``: solves ``y = z T(C(y))``.

    ``H(z) ~ z`` near the origin, so the solution is continued along the
    ray from ``|z| = 1e-8`` (where ``y = z`` is an accurate seed) out to
    ``z``.  Raises :class:`DomainError` when Newton stalls.
    """
    lam = C.lam
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any((z.imag == 0) & (z.real >= 0)):
        raise DomainError("z must lie off [0, inf)", C.beta)
    r = np.abs(z)
    start = np.minimum(r, 1e-8)
    y, warm = z * (start / r), None
    for k in range(1, n_steps + 1):
        zk = z * (start / r) * (r / start) ** (k / n_steps)
        for _ in range(60):
            c, dc, warm = C.value_and_derivative(y, warm)
            F = y - zk * T_eval(lam, c)
            if np.all(np.abs(F) <= 1e-14 * np.maximum(np.abs(y), 1e-300)):
                break
            y = y - F / (1.0 - zk * (2 * lam * c + 1 + lam) * dc)
        else:
            if np.max(np.abs(F) / np.abs(y)) > 1e-10:
                raise DomainError("y = z T(C(y)) did not converge", C.beta)
    return y


@dataclass
class RecoveryResult:
    """Density recovered from a rectangular R-transform.

    ``density`` is the clipped extrapolated density on ``x``; ``atom0`` the
    mass missing from its integral (the atom-at-0 estimate, never negative);
    ``residual`` the signed ``1 - integral``.
    """

    x: np.ndarray
    density: np.ndarray
    atom0: float
    residual: float
    min_raw: float
    n_negative: int
    flagged: bool
    lam: float
    eps_schedule: tuple
    beta: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def measure(self) -> GridDensity:
        """A mass-one :class:`GridDensity` (rescaled if the integral exceeds 1)."""
        integral = 1.0 - self.residual
        dens = self.density if integral <= 1.0 else self.density / integral
        return GridDensity(self.x, dens, self.atom0, meta=self.metadata())

    def metadata(self) -> dict:
        return {
            "lambda": self.lam,
            "atom0": self.atom0,
            "normalization_residual": self.residual,
            "min_raw_density": self.min_raw,
            "negative_points_clipped": self.n_negative,
            "flagged": self.flagged,
            "certified_beta": self.beta,
            "eps_schedule": list(self.eps_schedule),
            **self.meta,
        }

    def write_csv(self, path) -> None:
        with open(Path(path), "w") as fh:
            fh.write("x,density\n")
            for a, b in zip(self.x, self.density):
                fh.write(f"{a:.17g},{b:.17g}\n")

    def write_json(self, path) -> None:
        with open(Path(path), "w") as fh:
            json.dump(self.metadata(), fh, indent=1, sort_keys=True)


def _solve_branch(C: RectTransform, w: np.ndarray, y0: np.ndarray, warm0, n_steps: int):
    """Continue ``y = z T(C(y))`` from ``w[0]`` rows to the last row.

    ``w`` has shape (n_steps + 1, n) and moves towards the real axis.
    Returns ``wG(w)`` at the last row.
    """
    lam = C.lam
    y, warm = y0, warm0
    out = []
    out_y = []
    prev = None
    for k in range(w.shape[0]):
        z = 1.0 / (w[k] * w[k])
        if prev is not None:
            # secant predictor along the path
            y_last, y_before, t_last, t_before = prev
            t_now = w[k].imag
            y = y_last + (y_last - y_before) * ((t_now - t_last) / (t_last - t_before))
        for _ in range(40):
            c, dc, warm = C.value_and_derivative(y, warm)
            F = y - z * T_eval(lam, c)
            # F carries the rounding of C multiplied by |z|
            tol = np.maximum(np.maximum(np.abs(y), np.abs(z)), 1.0)
            if np.all(np.abs(F) <= 1e-11 * tol):
                break
            dF = 1.0 - z * (2 * lam * c + 1 + lam) * dc
            y = y - F / dF
        else:
            if np.max(np.abs(F) / tol) > 1e-9:
                raise DomainError("fixed point y = z T(C(y)) did not converge", C.beta)
        out.append(1.0 + c)
        if k > 0:
            prev = (y, out_y[-1], w[k].imag, w[k - 1].imag)
        out_y.append(y)
    return np.array(out), y, warm


def _recover_chunk(C: RectTransform, xs: np.ndarray, eps_schedule, eps_start: float, ratio: float):
    xs = np.asarray(xs, dtype=float)
    eps_sorted = sorted(eps_schedule, reverse=True)
    top = max(eps_start, 4.0 * float(np.max(np.abs(xs))) if xs.size else eps_start)
    # geometric path from the top down through every smoothing height
    path = [top]
    marks = []
    for e in eps_sorted:
        n = max(1, int(np.ceil(np.log(path[-1] / e) / np.log(ratio))))
        path += list(np.geomspace(path[-1], e, n + 1)[1:])
        path[-1] = e
        marks.append(len(path) - 1)
    eps_arr = np.array(path)
    w = xs[None, :] - 1j * eps_arr[:, None]
    z0 = 1.0 / (w[0] * w[0])
    wG, _, _ = _solve_branch(C, w, z0.copy(), None, len(path))
    G = wG / w
    dens = np.array([G[m].imag / np.pi for m in marks])
    return dens, eps_sorted


def recover_measure(C: RectTransform, x_grid, eps_schedule=EPS_SCHEDULE, eps_start: float = 4.0,
                    ratio: float = 1.25, chunk: int = 256) -> RecoveryResult:
    """Recover a symmetric measure from its rectangular R-transform.

    For each ``x`` the point ``w = x - i eps`` is moved from ``eps_start``
    down to the smallest smoothing height, continuing the solution of
    ``y = z T(C(y))`` (``z = 1 / w^2``).  ``Im G(w) / pi`` at the heights in
    ``eps_schedule`` is extrapolated linearly to ``eps = 0``.

    The x points are processed in independent chunks (threads capped by
    ``RECTFREE_THREADS``); results do not depend on the thread count.
    """
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be strictly increasing with at least two points")
    ax = np.abs(x)
    # the transform of a symmetric law gives an even density: solve on |x|
    # (the point 0 uses a tiny offset because w = -i eps is purely imaginary)
    uniq, inv = np.unique(ax, return_inverse=True)
    pieces = [uniq[i : i + chunk] for i in range(0, uniq.size, chunk)]

    def work(p):
        return _recover_chunk(C, p, eps_schedule, eps_start, ratio)

    n_threads = min(thread_count(), len(pieces))
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            results = list(pool.map(work, pieces))
    else:
        results = [work(p) for p in pieces]
    dens_eps = np.concatenate([r[0] for r in results], axis=1)
    eps_sorted = np.array(results[0][1])
    # least-squares line in eps, evaluated at eps = 0
    A = np.vstack([np.ones_like(eps_sorted), eps_sorted]).T
    coef, *_ = np.linalg.lstsq(A, dens_eps, rcond=None)
    raw = coef[0][inv]
    min_raw = float(raw.min())
    n_negative = int(np.sum(raw < -NEG_TOL))
    dens = np.clip(raw, 0.0, None)
    integral = float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x)))
    residual = 1.0 - integral
    atom0 = max(residual, 0.0)
    return RecoveryResult(
        x=x,
        density=dens,
        atom0=atom0,
        residual=residual,
        min_raw=min_raw,
        n_negative=n_negative,
        flagged=abs(residual) > FLAG_RESIDUAL,
        lam=C.lam,
        eps_schedule=tuple(float(e) for e in eps_schedule),
        beta=C.beta,
        meta={"transform": C.name, "derived_not_closed_form": C.derived},
    )
