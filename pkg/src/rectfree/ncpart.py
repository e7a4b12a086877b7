"""
Non-crossing partitions and the brute-force moment oracles.

Everything here is exact: cumulants and the ratio ``lam`` may be
``fractions.Fraction`` (or ints), and the oracles return exact sums over
partitions.  The module is the ground truth for the series engine, so it
favours plain enumeration over cleverness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Sequence

__all__ = [
    "PartitionLimitError",
    "EvenPartition",
    "FreePartition",
    "MAX_N_HALF",
    "enumerate_ncprime",
    "enumerate_nc",
    "enumerate_ncprime_bruteforce",
    "set_partitions",
    "is_noncrossing",
    "e_stat",
    "o_stat",
    "rotate",
    "is_ncd",
    "moments_from_cumulants_oracle",
    "free_moments_from_free_cumulants",
]

#: Default size guard for enumeration (NC'(16) has 43263 elements).
MAX_N_HALF = 8


class PartitionLimitError(ValueError):
    """Raised when an enumeration would exceed the configured size guard."""


def _check_blocks(blocks, size):
    seen = sorted(x for b in blocks for x in b)
    if seen != list(range(1, size + 1)):
        raise ValueError(f"blocks do not partition 1..{size}: {blocks!r}")


def is_noncrossing(blocks: Sequence[Sequence[int]]) -> bool:
    """True if no a<b<c<d has a, c in one block and b, d in another."""
    owner = {}
    for i, b in enumerate(blocks):
        for x in b:
            owner[x] = i
    # Stack test: scanning left to right, a block may only be resumed when it
    # is on top of the stack of currently open blocks.
    last = {i: max(b) for i, b in enumerate(blocks)}
    stack: list[int] = []
    for x in sorted(owner):
        i = owner[x]
        if stack and stack[-1] == i:
            pass
        elif i in stack:
            return False
        else:
            stack.append(i)
        if x == last[i]:
            stack.pop()
    return True


def _normalize(blocks) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


@dataclass(frozen=True)
class FreePartition:
    """A non-crossing partition of ``{1, ..., n}``."""

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", _normalize(self.blocks))
        if self.n < 1:
            raise ValueError("n must be positive")
        _check_blocks(self.blocks, self.n)
        if not is_noncrossing(self.blocks):
            raise ValueError(f"crossing partition: {self.blocks!r}")

    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]


@dataclass(frozen=True)
class EvenPartition:
    """An element of NC'(2n): non-crossing, every block of even size.

    ``leader[k-1]`` is the minimum of the block containing ``k``.
    """

    n_half: int
    blocks: tuple[tuple[int, ...], ...]
    leader: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", _normalize(self.blocks))
        if self.n_half < 1:
            raise ValueError("n_half must be positive")
        _check_blocks(self.blocks, 2 * self.n_half)
        if any(len(b) % 2 for b in self.blocks):
            raise ValueError(f"odd block in {self.blocks!r}")
        if not is_noncrossing(self.blocks):
            raise ValueError(f"crossing partition: {self.blocks!r}")
        leader = [0] * (2 * self.n_half)
        for b in self.blocks:
            for x in b:
                leader[x - 1] = b[0]
        object.__setattr__(self, "leader", tuple(leader))

    @property
    def size(self) -> int:
        return 2 * self.n_half

    def e(self) -> int:
        return sum(1 for b in self.blocks if b[0] % 2 == 0)

    def o(self) -> int:
        return sum(1 for b in self.blocks if b[0] % 2 == 1)

    def same_block(self, i: int, j: int) -> bool:
        return self.leader[i - 1] == self.leader[j - 1]


def e_stat(p: EvenPartition) -> int:
    """Number of blocks with even minimum."""
    return p.e()


def o_stat(p: EvenPartition) -> int:
    """Number of blocks with odd minimum."""
    return p.o()


def rotate(p: EvenPartition) -> EvenPartition:
    """Apply the cycle ``2n -> 2n-1 -> ... -> 1 -> 2n`` to every block."""
    size = p.size
    return EvenPartition(
        p.n_half, tuple(tuple(size if x == 1 else x - 1 for x in b) for b in p.blocks)
    )


def is_ncd(p: EvenPartition) -> bool:
    """True iff every even ``k`` shares a block with ``k - 1``."""
    return all(p.same_block(k - 1, k) for k in range(2, p.size + 1, 2))


def _guard(n_half: int, limit: int | None) -> None:
    limit = MAX_N_HALF if limit is None else limit
    if n_half > limit:
        raise PartitionLimitError(
            f"n_half={n_half} exceeds the enumeration limit {limit}; "
            "pass limit=... to raise it"
        )


@lru_cache(maxsize=None)
def _nc_interval(lo: int, hi: int, even: bool) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All NC (or NC') partitions of the integer interval [lo, hi].

    Recursive interval decomposition: choose the block of ``lo``; the gaps
    between consecutive elements of that block (and the tail after its last
    element) are partitioned independently.
    """
    if lo > hi:
        return ((),)
    n = hi - lo + 1
    if even and n % 2:
        return ()
    out = []
    rest = range(lo + 1, hi + 1)
    for k in range(0, n):
        if even and k % 2 == 0:
            continue  # block of lo has k+1 elements, must be even
        for others in combinations(rest, k):
            block = (lo,) + others
            gaps = [(block[r] + 1, block[r + 1] - 1) for r in range(len(block) - 1)]
            gaps.append((block[-1] + 1, hi))
            if even and any((b - a + 1) % 2 for a, b in gaps):
                continue
            parts = [((block,),)]
            ok = True
            for a, b in gaps:
                sub = _nc_interval(a, b, even)
                if not sub:
                    ok = False
                    break
                parts.append(sub)
            if not ok:
                continue
            combos: list[tuple[tuple[int, ...], ...]] = [()]
            for choices in parts:
                combos = [c + s for c in combos for s in choices]
            out.extend(combos)
    return tuple(out)


def enumerate_ncprime(n_half: int, limit: int | None = None) -> list[EvenPartition]:
    """Every element of NC'(2n) exactly once, ``n = n_half``."""
    if n_half < 1:
        raise ValueError("n_half must be positive")
    _guard(n_half, limit)
    return [EvenPartition(n_half, b) for b in _nc_interval(1, 2 * n_half, True)]


def enumerate_nc(n: int, limit: int | None = None) -> list[FreePartition]:
    """Every non-crossing partition of ``{1, ..., n}``."""
    if n < 1:
        raise ValueError("n must be positive")
    _guard((n + 1) // 2, limit)
    return [FreePartition(n, b) for b in _nc_interval(1, n, False)]


def set_partitions(elements: Sequence[int]) -> Iterator[list[list[int]]]:
    """All set partitions of ``elements`` (restricted growth recursion)."""
    elements = list(elements)
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1 :]
        yield [[first]] + smaller


def enumerate_ncprime_bruteforce(n_half: int) -> list[EvenPartition]:
    """Filter all set partitions of [2n]; only for tiny cross-checks."""
    if n_half > 5:
        raise PartitionLimitError("brute-force filter is limited to n_half <= 5")
    out = []
    for blocks in set_partitions(range(1, 2 * n_half + 1)):
        if all(len(b) % 2 == 0 for b in blocks) and is_noncrossing(blocks):
            out.append(EvenPartition(n_half, tuple(tuple(b) for b in blocks)))
    return out


def _prod(values):
    out = 1
    for v in values:
        out = out * v
    return out


def moments_from_cumulants_oracle(c, lam, n_max: int, limit: int | None = None) -> list:
    """Even moments ``[m_2, ..., m_{2 n_max}]`` by summing over NC'(2n).

    ``c[k]`` is the cumulant of order ``2(k+1)``; ``lam`` is the ratio.  Use
    Fractions for exact results.
    """
    if len(c) < n_max:
        raise ValueError(f"need {n_max} cumulants, got {len(c)}")
    cum = {2 * (k + 1): v for k, v in enumerate(c)}
    out = []
    for n in range(1, n_max + 1):
        total = Fraction(0) if not isinstance(lam, float) else 0.0
        for p in enumerate_ncprime(n, limit):
            total += lam ** p.e() * _prod(cum[len(b)] for b in p.blocks)
        out.append(total)
    return out


def free_moments_from_free_cumulants(k, n_max: int, limit: int | None = None) -> list:
    """Moments ``[m_1, ..., m_{n_max}]`` from free cumulants ``k[0] = k_1, ...``."""
    if len(k) < n_max:
        raise ValueError(f"need {n_max} free cumulants, got {len(k)}")
    cum = {j + 1: v for j, v in enumerate(k)}
    out = []
    for n in range(1, n_max + 1):
        total = 0
        for p in enumerate_nc(n, limit):
            total += _prod(cum[len(b)] for b in p.blocks)
        out.append(total)
    return out
