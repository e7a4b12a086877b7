"""
Monte Carlo harness for rectangular random matrices.

A ``q1 x q2`` matrix (``q1 <= q2``) with prescribed singular values ``s`` is
sampled as ``U diag(s) W^*`` with ``U`` Haar on ``U(q1)`` and ``W`` the
first ``q1`` columns of a Haar unitary of size ``q2`` (a Haar isometry).
The symmetrized singular law of ``A + B`` for independent such ``A, B``
approximates the rectangular free convolution with ratio ``q1 / q2``.

Randomness is counter-based: every trial owns a ``Philox`` stream spawned
from one seed, so results do not depend on the number of worker threads
(``RECTFREE_THREADS``).
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from rectfree.analytic import thread_count
from rectfree.conv import convolve_moments
from rectfree.measure import Atomic, Measure, MeasureError, require_symmetric

__all__ = [
    "trial_generators",
    "haar_unitary",
    "haar_isometry",
    "sample_rect",
    "singular_values",
    "quantile_singular_values",
    "functional_calculus",
    "McReport",
    "mc_convolution",
    "NullTraceStats",
    "parse_word",
    "null_ratio_trace",
    "predicted_word_trace",
    "EmbeddedMatrix",
    "block_expectation",
]


def trial_generators(seed: int, trials: int) -> list[np.random.Generator]:
    """Independent per-trial generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def _phase_fixed_q(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    ph = d / np.abs(d)
    return q * ph[None, :]


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``m x m`` unitary.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved
    into ``Q`` so that the triangular factor has a positive diagonal; without
    that correction the law is not Haar.
    """
    if m < 1:
        raise ValueError("dimension must be positive")
    return _phase_fixed_q(_ginibre(rng, m, m))


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """First ``cols`` columns of a Haar unitary of size ``rows``."""
    if cols > rows:
        raise ValueError("an isometry needs cols <= rows")
    return _phase_fixed_q(_ginibre(rng, rows, cols))


def sample_rect(q1: int, q2: int, singular_values, rng: np.random.Generator) -> np.ndarray:
    """Bi-unitarily invariant ``q1 x q2`` matrix with given singular values."""
    s = np.asarray(singular_values, dtype=float)
    if q1 > q2:
        raise ValueError("need q1 <= q2")
    if s.shape != (q1,):
        raise ValueError(f"need exactly q1 = {q1} singular values, got {s.shape}")
    if np.any(s < 0):
        raise ValueError("singular values must be nonnegative")
    U = haar_unitary(q1, rng)
    W = haar_isometry(q2, q1, rng)
    return (U * s[None, :]) @ W.conj().T


def singular_values(M: np.ndarray) -> np.ndarray:
    """Ascending singular values of a ``q1 x q2`` matrix, ``q1 <= q2``.

    Square roots of the eigenvalues of the Hermitian ``q1 x q1`` Gram
    matrix ``M M^*``.
    """
    M = np.asarray(M)
    if M.shape[0] > M.shape[1]:
        raise ValueError("expected a wide matrix (q1 <= q2)")
    ev = np.linalg.eigvalsh(M @ M.conj().T)
    return np.sqrt(np.clip(ev, 0.0, None))


def quantile_singular_values(mu: Measure, q1: int) -> np.ndarray:
    """Deterministic singular values ``|mu|`` quantiles at ``(i - 1/2) / q1``."""
    require_symmetric(mu)
    if not hasattr(mu, "quantile"):
        raise MeasureError(f"{type(mu).__name__} has no quantile function")
    p = (np.arange(q1) + 0.5) / q1
    # for symmetric mu the law of |X| has quantile Q_X((1 + p) / 2)
    return np.sort(np.abs(np.asarray(mu.quantile(0.5 + 0.5 * p), dtype=float)))


def functional_calculus(M: np.ndarray, F: Callable) -> np.ndarray:
    """``U diag(F(s)) W^*`` for ``M = U diag(s) W^*`` (``F`` odd, ``F(s) >= 0``)."""
    U, s, Wh = np.linalg.svd(M, full_matrices=False)
    return (U * np.asarray(F(s))[None, :]) @ Wh


def _threaded_map(fn, items):
    n = min(thread_count(), max(1, len(items)))
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# Convolution experiment
# ---------------------------------------------------------------------------


@dataclass
class McReport:
    """Empirical even moments of the symmetrized singular law of ``A + B``."""

    trials: int
    q1: int
    q2: int
    seed: int
    lam: float
    orders: list
    empirical: list
    stderr: list
    predicted: list
    zscores: list
    histogram: Optional[dict] = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def write_json(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def write_histogram_csv(self, path) -> None:
        if self.histogram is None:
            raise ValueError("no histogram was requested")
        with open(Path(path), "w") as fh:
            fh.write("bin_center,mass\n")
            for c, m in zip(self.histogram["centers"], self.histogram["mass"]):
                fh.write(f"{c:.17g},{m:.17g}\n")


def mc_convolution(mu1: Measure, mu2: Measure, q1: int, q2: int, trials: int, rng_seed: int,
                   n_moments: int = 3, bins: Optional[np.ndarray] = None, keep_singular_values: bool = False):
    """Sample ``A + B`` and compare its moments with the series prediction.

    ``A`` and ``B`` get singular values at the quantiles of ``|mu1|`` and
    ``|mu2|``.  Per trial the even moments ``m_2, ..., m_{2 n_moments}`` of
    the symmetrized singular law are recorded; the report holds their mean,
    standard error across trials and z-score against
    ``convolve_moments(mu1, mu2, q1 / q2)``.

    ``bins`` (edges) adds a histogram of the pooled symmetrized law.
    """
    if not (1 <= q1 <= q2):
        raise ValueError("need 1 <= q1 <= q2")
    if trials < 2:
        raise ValueError("need at least two trials for standard errors")
    s1 = quantile_singular_values(mu1, q1)
    s2 = quantile_singular_values(mu2, q1)
    gens = trial_generators(rng_seed, trials)
    ks = np.arange(1, n_moments + 1)

    def one(g):
        A = sample_rect(q1, q2, s1, g)
        B = sample_rect(q1, q2, s2, g)
        s = singular_values(A + B)
        return s

    svals = _threaded_map(one, gens)
    per_trial = np.array([[np.mean(s ** (2 * k)) for k in ks] for s in svals])
    mean = per_trial.mean(axis=0)
    se = per_trial.std(axis=0, ddof=1) / np.sqrt(trials)
    lam = q1 / q2
    pred = np.array(convolve_moments(mu1, mu2, lam, n_moments), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (mean - pred) / se, np.where(mean == pred, 0.0, np.inf))
    hist = None
    if bins is not None:
        pooled = np.concatenate([np.concatenate([s, -s]) for s in svals])
        counts, edges = np.histogram(pooled, bins=np.asarray(bins, dtype=float))
        hist = {
            "centers": (0.5 * (edges[1:] + edges[:-1])).tolist(),
            "mass": (counts / pooled.size).tolist(),
            "outside_mass": float(1.0 - counts.sum() / pooled.size),
        }
    report = McReport(
        trials=trials, q1=q1, q2=q2, seed=rng_seed, lam=lam,
        orders=[int(2 * k) for k in ks],
        empirical=mean.tolist(), stderr=se.tolist(), predicted=pred.tolist(), zscores=z.tolist(),
        histogram=hist,
    )
    if keep_singular_values:
        report.config["singular_values"] = [s.tolist() for s in svals]
    return report


# ---------------------------------------------------------------------------
# Words in two rectangular matrices
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"M([12])(\*?)")


def parse_word(word: str) -> list[tuple[int, bool]]:
    """``"M1* M2 M1* M2"`` -> ``[(1, True), (2, False), (1, True), (2, False)]``.

    The product must be dimensionally valid for ``q1 x q2`` factors and
    square overall.
    """
    compact = word.replace(" ", "")
    tokens = _TOKEN.findall(compact)
    if not tokens or "".join(f"M{i}{a}" for i, a in tokens) != compact:
        raise ValueError(f"malformed word {word!r}")
    letters = [(int(i), a == "*") for i, a in tokens]
    # shapes: M is (1 -> 2) i.e. q1 x q2; M* is q2 x q1
    rows = [2 if adj else 1 for _, adj in letters]
    cols = [1 if adj else 2 for _, adj in letters]
    for k in range(len(letters) - 1):
        if cols[k] != rows[k + 1]:
            raise ValueError(f"word {word!r} is not a valid product of q1 x q2 matrices")
    if rows[0] != cols[-1]:
        raise ValueError(f"word {word!r} is not square")
    return letters


@dataclass
class NullTraceStats:
    """Across-trial statistics of the normalized trace of a word.

    The trace is normalized by ``1 / q1`` (the smaller dimension), so that
    ``M1* M1`` gives the second moment of the singular law.
    """

    word: str
    q1: int
    q2: int
    trials: int
    seed: int
    mean_abs: float
    se_abs: float
    mean_trace: complex
    se_trace_real: float
    se_trace_imag: float
    predicted: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean_trace"] = [self.mean_trace.real, self.mean_trace.imag]
        return d


def predicted_word_trace(word: str, mu1: Measure, mu2: Measure) -> Optional[float]:
    """Square-case (ratio 1) limit of the normalized trace, where known.

    Two closed cases are covered: ``M_i^* M_i`` (and ``M_i M_i^*``) give the
    second moment of ``mu_i``; alternating words in which no factor is
    immediately followed by its own adjoint vanish, because products of
    free R-diagonal elements are R-diagonal and have vanishing trace on
    their nonzero powers.  Other words return ``None``.
    """
    letters = parse_word(word)
    if len(letters) == 2 and letters[0][0] == letters[1][0] and letters[0][1] != letters[1][1]:
        mu = mu1 if letters[0][0] == 1 else mu2
        return float(mu.moments(1)[0])
    idx = [i for i, _ in letters]
    alternating = all(a != b for a, b in zip(idx, idx[1:] + idx[:1]))
    if alternating and len(letters) % 2 == 0:
        return 0.0
    return None


def null_ratio_trace(q1: int, q2: int, word: str, trials: int, rng_seed: int,
                     mu1: Optional[Measure] = None, mu2: Optional[Measure] = None) -> NullTraceStats:
    """Normalized trace of a word in two independent bi-unitarily invariant
    ``q1 x q2`` matrices (unit singular values by default)."""
    letters = parse_word(word)
    if not (1 <= q1 <= q2):
        raise ValueError("need 1 <= q1 <= q2")
    mu1 = mu1 or Atomic([-1.0, 1.0], [0.5, 0.5])
    mu2 = mu2 or Atomic([-1.0, 1.0], [0.5, 0.5])
    s = {1: quantile_singular_values(mu1, q1), 2: quantile_singular_values(mu2, q1)}
    gens = trial_generators(rng_seed, trials)
    # the trace is cyclic: start at a q1-row factor so that every partial
    # product has q1 rows and the big q2 x q2 products never form
    start = next(k for k, (_, adj) in enumerate(letters) if not adj)
    cyclic = letters[start:] + letters[:start]

    def one(g):
        mats = {i: sample_rect(q1, q2, s[i], g) for i in (1, 2)}
        prod = None
        for i, adj in cyclic:
            f = mats[i].conj().T if adj else mats[i]
            prod = f if prod is None else prod @ f
        return np.trace(prod) / q1

    tr = np.array(_threaded_map(one, gens))
    ab = np.abs(tr)
    pred = predicted_word_trace(word, mu1, mu2) if q1 == q2 else None
    return NullTraceStats(
        word=word, q1=q1, q2=q2, trials=trials, seed=rng_seed,
        mean_abs=float(ab.mean()), se_abs=float(ab.std(ddof=1) / np.sqrt(trials)),
        mean_trace=complex(tr.mean()),
        se_trace_real=float(tr.real.std(ddof=1) / np.sqrt(trials)),
        se_trace_imag=float(tr.imag.std(ddof=1) / np.sqrt(trials)),
        predicted=pred,
    )


# ---------------------------------------------------------------------------
# Two-block embedding
# ---------------------------------------------------------------------------


@dataclass
class EmbeddedMatrix:
    """``n x n`` matrix (``n = q1 + q2``) with the two-block structure.

    Block ``(k, l)`` is the ``q_k x q_l`` sub-matrix; :meth:`extend` builds
    the ``n x n`` extension of a block matrix with zeros elsewhere.
    """

    q1: int
    q2: int
    data: np.ndarray

    def __post_init__(self):
        if not (1 <= self.q1 <= self.q2):
            raise ValueError("need 1 <= q1 <= q2")
        self.data = np.asarray(self.data, dtype=complex)
        n = self.q1 + self.q2
        if self.data.shape != (n, n):
            raise ValueError(f"data must be {n} x {n}")

    @property
    def n(self) -> int:
        return self.q1 + self.q2

    def _slice(self, k: int):
        return slice(0, self.q1) if k == 1 else slice(self.q1, self.n)

    def block(self, k: int, l: int) -> np.ndarray:
        return self.data[self._slice(k), self._slice(l)]

    @classmethod
    def extend(cls, M: np.ndarray, k: int, l: int, q1: int, q2: int) -> "EmbeddedMatrix":
        out = cls(q1, q2, np.zeros((q1 + q2, q1 + q2), dtype=complex))
        q = {1: q1, 2: q2}
        if np.shape(M) != (q[k], q[l]):
            raise ValueError(f"block ({k},{l}) must be {q[k]} x {q[l]}")
        out.data[out._slice(k), out._slice(l)] = M
        return out

    @classmethod
    def projection(cls, k: int, q1: int, q2: int) -> "EmbeddedMatrix":
        q = {1: q1, 2: q2}
        return cls.extend(np.eye(q[k]), k, k, q1, q2)

    def __matmul__(self, other: "EmbeddedMatrix") -> "EmbeddedMatrix":
        if (self.q1, self.q2) != (other.q1, other.q2):
            raise ValueError("block structures differ")
        return EmbeddedMatrix(self.q1, self.q2, self.data @ other.data)

    def __add__(self, other: "EmbeddedMatrix") -> "EmbeddedMatrix":
        if (self.q1, self.q2) != (other.q1, other.q2):
            raise ValueError("block structures differ")
        return EmbeddedMatrix(self.q1, self.q2, self.data + other.data)

    def adjoint(self) -> "EmbeddedMatrix":
        return EmbeddedMatrix(self.q1, self.q2, self.data.conj().T)


def block_expectation(X: EmbeddedMatrix) -> tuple[complex, complex]:
    """``(phi_1(X_11), phi_2(X_22))`` with ``phi_k = Tr / q_k``."""
    return (complex(np.trace(X.block(1, 1)) / X.q1), complex(np.trace(X.block(2, 2)) / X.q2))
