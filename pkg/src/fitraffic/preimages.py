"""Preimages of a block of ``m + 1`` zeros and their ballot-path count.

A word ``a_1 ... a_p`` is *m-admissible* when every prefix has positive
weight, with weight ``+1`` per ``0`` and ``-m`` per ``1``. The admissible
words of length ``(n + 1)(m + 1)`` are exactly the ``n``-step preimages of
``0^(m+1)``. Those with ``n0`` zeros and ``n1`` ones are counted by the
generalized ballot number ``(n0 - m*n1) / (n0 + n1) * C(n0 + n1, n1)``.

Word indices: the integer ``w`` encodes the word whose ``k``-th symbol
(``k = 0`` leftmost) is bit ``k`` of ``w``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .lattice import CellsLike, as_cells, bits_to_str, iterate_open, local_rule

DEFAULT_ORACLE_LIMIT = 24
LOG_SPACE_THRESHOLD = 60


class ResourceLimitError(RuntimeError):
    """The exhaustive scan would exceed its configured word-length cap."""


def xi(bit: int, m: int) -> int:
    return 1 - (m + 1) * bit


def is_admissible(word: CellsLike, m: int) -> bool:
    """True iff every prefix sum of ``xi`` is strictly positive."""
    capital = 0
    for a in as_cells(word):
        capital += xi(int(a), m)
        if capital <= 0:
            return False
    return True


def admissible_words(p: int, m: int) -> Iterator[str]:
    """All m-admissible words of length ``p``, in lexicographic order."""

    def extend(prefix: list[str], capital: int) -> Iterator[str]:
        if len(prefix) == p:
            yield "".join(prefix)
            return
        for sym, w in (("0", 1), ("1", -m)):
            if capital + w > 0:
                prefix.append(sym)
                yield from extend(prefix, capital + w)
                prefix.pop()

    yield from extend([], 0)


def word_from_index(w: int, p: int) -> str:
    return bits_to_str((w >> k) & 1 for k in range(p))


def index_from_word(word: CellsLike) -> int:
    return sum(int(a) << k for k, a in enumerate(as_cells(word)))


def admissible_mask(p: int, m: int) -> np.ndarray:
    """Boolean array over all ``2**p`` word indices marking admissible words."""
    w = np.arange(2**p, dtype=np.int64)
    capital = np.zeros(w.size, dtype=np.int32)
    ok = np.ones(w.size, dtype=bool)
    for k in range(p):
        capital += 1 - (m + 1) * ((w >> k) & 1).astype(np.int32)
        ok &= capital > 0
    return ok


def _bit_planes(p: int, elems: np.ndarray) -> list[np.ndarray]:
    """Bit-sliced input planes: bit ``b`` of element ``e`` is word ``64*e + b``."""
    planes = []
    b = np.arange(64, dtype=np.uint64)
    for k in range(p):
        if k < 6:
            pattern = np.bitwise_or.reduce(np.uint64(1) << b[((b >> np.uint64(k)) & np.uint64(1)) == 1])
            planes.append(np.full(elems.size, pattern, dtype=np.uint64))
        else:
            on = ((elems >> (k - 6)) & 1).astype(bool)
            planes.append(np.where(on, np.uint64(0xFFFFFFFFFFFFFFFF), np.uint64(0)))
    return planes


def preimage_mask(m: int, n_steps: int, chunk_elems: int = 1 << 16) -> np.ndarray:
    """Boolean array over all ``2**p`` words, ``p = (n_steps+1)(m+1)``, marking those
    whose light cone evolves to ``0^(m+1)`` after ``n_steps`` steps.

    The scan is bit-sliced (64 words per machine word) and processed in chunks
    of ``chunk_elems`` machine words; chunks are merged in index order.
    """
    p = (n_steps + 1) * (m + 1)
    n_elems = max(1, (2**p) // 64)
    out = []
    for start in range(0, n_elems, chunk_elems):
        elems = np.arange(start, min(start + chunk_elems, n_elems), dtype=np.int64)
        planes = _bit_planes(p, elems)
        for _ in range(n_steps):
            planes = [local_rule(planes[i - m:i + 2], m) for i in range(m, len(planes) - 1)]
        assert len(planes) == m + 1
        occupied = planes[0]
        for pl in planes[1:]:
            occupied = occupied | pl
        hits = ~occupied
        out.append(np.unpackbits(hits.astype("<u8").view(np.uint8), bitorder="little"))
    return np.concatenate(out)[: 2**p].astype(bool)


@dataclass
class PreimageCount:
    m: int
    n_steps: int
    by_ones: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.by_ones.values())

    @property
    def length(self) -> int:
        return (self.n_steps + 1) * (self.m + 1)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n_steps": self.n_steps,
            "by_ones": {str(k): str(v) for k, v in sorted(self.by_ones.items())},
            "total": str(self.total),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PreimageCount":
        pc = cls(int(d["m"]), int(d["n_steps"]), {int(k): int(v) for k, v in d["by_ones"].items()})
        if "total" in d and int(d["total"]) != pc.total:
            raise ValueError("total does not match the sum of by_ones")
        return pc

    @classmethod
    def from_json(cls, text: str) -> "PreimageCount":
        return cls.from_dict(json.loads(text))


def enumerate_preimages_bruteforce(m: int, n_steps: int, limit: int = DEFAULT_ORACLE_LIMIT,
                                   return_words: bool = False):
    """Scan every word of length ``(n_steps+1)(m+1)`` through the open-boundary dynamics.

    Returns a :class:`PreimageCount`, or ``(count, word_indices)`` when
    ``return_words`` is set.
    """
    p = (n_steps + 1) * (m + 1)
    if p > limit:
        raise ResourceLimitError(f"exhaustive scan of 2**{p} words exceeds the limit 2**{limit}")
    idx = np.flatnonzero(preimage_mask(m, n_steps))
    ones = np.bitwise_count(idx.astype(np.uint64))
    tally = np.bincount(ones, minlength=p + 1)
    count = PreimageCount(m, n_steps, {k: int(c) for k, c in enumerate(tally) if c})
    if return_words:
        return count, idx
    return count


def preimages_by_iteration(m: int, n_steps: int) -> set[str]:
    """Slow per-word reference: every word whose ``iterate_open`` image is ``0^(m+1)``."""
    p = (n_steps + 1) * (m + 1)
    target = "0" * (m + 1)
    return {word_from_index(w, p) for w in range(2**p)
            if iterate_open(word_from_index(w, p), m, n_steps) == target}


def path_count(n0: int, n1: int, m: int) -> int:
    """Lattice paths from the origin to ``(n0, n1)`` staying strictly below ``x = m*y``."""
    if n0 < 0 or n1 < 0 or n0 + n1 < 1:
        raise ValueError("need n0, n1 >= 0 and n0 + n1 >= 1")
    lead = n0 - m * n1
    if lead <= 0:
        return 0
    q, r = divmod(lead * math.comb(n0 + n1, n1), n0 + n1)
    if r:
        raise ArithmeticError(f"non-integral ballot count for n0={n0}, n1={n1}, m={m}")
    return q


def count_admissible(m: int, n_steps: int) -> PreimageCount:
    p = (n_steps + 1) * (m + 1)
    by_ones = {}
    for n1 in range(p + 1):
        c = path_count(p - n1, n1, m)
        if c:
            by_ones[n1] = c
    return PreimageCount(m, n_steps, by_ones)


def preimage_probability(m: int, t: int, rho, exact: bool | None = None):
    """Probability that a Bernoulli(``rho``) word is a ``t``-step preimage of ``0^(m+1)``.

    Returns a :class:`~fractions.Fraction` when ``rho`` is a Fraction or
    ``exact`` is true; otherwise a float (summed in log space for words
    longer than 60 cells).
    """
    if exact is None:
        exact = isinstance(rho, Fraction)
    if exact:
        rho = Fraction(rho)
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    p = (t + 1) * (m + 1)
    counts = count_admissible(m, t).by_ones
    if exact:
        return sum((c * rho**n1 * (1 - rho) ** (p - n1) for n1, c in counts.items()), Fraction(0))
    rho = float(rho)
    if rho == 0.0:
        return 1.0
    if rho == 1.0:
        return 0.0
    if p <= LOG_SPACE_THRESHOLD:
        return math.fsum(c * rho**n1 * (1 - rho) ** (p - n1) for n1, c in counts.items())
    lr, lq = math.log(rho), math.log1p(-rho)
    logs = [math.log(c) + n1 * lr + (p - n1) * lq for n1, c in counts.items()]
    top = max(logs)
    return math.exp(top) * math.fsum(math.exp(x - top) for x in logs)
