"""Ring configurations and the synchronous update of the deterministic traffic rule.

A configuration is a periodic row of ``L`` cells, ``1`` for a car and ``0``
for an empty site. Cars move to the right. Each step every car advances by
``min(gap, m)`` sites, where ``gap`` is the number of empty sites in front of
it.

Two update routes are provided and must always agree:

* :func:`step` moves cars (position list, gaps, ``x += min(gap, m)``).
* :func:`step_local` applies a cellular-automaton local function of left
  radius ``m`` and right radius 1 to every site window.

:func:`iterate_open` evolves a finite, non-periodic word, tracking which
cells are still determined by the known input (the light cone).
"""

from __future__ import annotations

import struct
from typing import Iterable, Sequence, Union

import numpy as np

CellsLike = Union[str, Sequence[int], np.ndarray]

_HEADER = struct.Struct("<Q")

UNKNOWN = -1


def as_cells(cells: CellsLike) -> np.ndarray:
    """Coerce a '0'/'1' string or a 0/1 sequence into a uint8 array."""
    if isinstance(cells, str):
        if cells.strip("01"):
            raise ValueError(f"cell string may only contain '0' and '1': {cells!r}")
        return np.frombuffer(cells.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(cells)
    if arr.ndim != 1:
        raise ValueError("cells must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("cells must be 0 or 1")
    return arr.astype(np.uint8)


def bits_to_str(cells: Iterable[int]) -> str:
    return "".join("1" if c else "0" for c in cells)


class Configuration:
    """Immutable periodic configuration, stored bit-packed (little-endian bit order).

    ``Configuration("1100")`` and ``Configuration([1, 1, 0, 0])`` are equal.
    Site 0 is the first character/element.
    """

    __slots__ = ("_packed", "_L")

    def __init__(self, cells: CellsLike):
        arr = as_cells(cells)
        if arr.size < 1:
            raise ValueError("a configuration needs at least one cell")
        self._L = int(arr.size)
        self._packed = np.packbits(arr, bitorder="little")
        self._packed.flags.writeable = False

    @classmethod
    def from_positions(cls, positions: np.ndarray, L: int) -> "Configuration":
        cells = np.zeros(L, dtype=np.uint8)
        cells[np.asarray(positions, dtype=np.int64) % L] = 1
        return cls(cells)

    @classmethod
    def from_packed(cls, packed: bytes | np.ndarray, L: int) -> "Configuration":
        packed = np.frombuffer(bytes(packed), dtype=np.uint8)
        if packed.size != (L + 7) // 8:
            raise ValueError(f"expected {(L + 7) // 8} packed bytes for L={L}, got {packed.size}")
        return cls(np.unpackbits(packed, count=L, bitorder="little"))

    @property
    def L(self) -> int:
        return self._L

    @property
    def cells(self) -> np.ndarray:
        """Dense uint8 view of the cells (a fresh array each call)."""
        return np.unpackbits(self._packed, count=self._L, bitorder="little")

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    def positions(self) -> np.ndarray:
        """Sorted indices of occupied sites."""
        return np.flatnonzero(self.cells)

    @property
    def n_cars(self) -> int:
        return int(np.bitwise_count(self._packed).sum())

    @property
    def density(self) -> float:
        return self.n_cars / self._L

    def to_bytes(self) -> bytes:
        """8-byte little-endian length header followed by the packed cells."""
        return _HEADER.pack(self._L) + self._packed.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Configuration":
        if len(data) < _HEADER.size:
            raise ValueError("truncated configuration: missing length header")
        (L,) = _HEADER.unpack_from(data)
        return cls.from_packed(data[_HEADER.size:], L)

    def __len__(self) -> int:
        return self._L

    def __str__(self) -> str:
        return bits_to_str(self.cells)

    def __repr__(self) -> str:
        if self._L <= 64:
            return f"Configuration('{self}')"
        return f"Configuration(L={self._L}, N={self.n_cars})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._L == other._L and np.array_equal(self._packed, other._packed)

    def __hash__(self) -> int:
        return hash((self._L, self._packed.tobytes()))


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int or a sequence of ints (e.g. ``[seed, replica]``)."""
    return np.random.default_rng(seed)


def init_bernoulli(L: int, rho: float, seed) -> Configuration:
    """Each site independently occupied with probability ``rho``."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    if L < 1:
        raise ValueError("L must be >= 1")
    rng = make_rng(seed)
    return Configuration((rng.random(L) < rho).astype(np.uint8))


def init_fixed_count(L: int, N: int, seed) -> Configuration:
    """Exactly ``N`` cars on a uniformly random ``N``-subset of the ``L`` sites."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if not 0 <= N <= L:
        raise ValueError(f"need 0 <= N <= L, got N={N}, L={L}")
    rng = make_rng(seed)
    return Configuration.from_positions(rng.choice(L, size=N, replace=False), L)


def cyclic_gaps(positions: np.ndarray, L: int) -> np.ndarray:
    """Empty sites in front of each car; ``positions`` sorted, taken modulo ``L``.

    A lone car sees ``L - 1`` empty sites.
    """
    if positions.size == 0:
        return positions.copy()
    ahead = np.empty_like(positions)
    ahead[:-1] = positions[1:]
    ahead[-1] = positions[0] + L
    return ahead - positions - 1


def step(config: Configuration, m: int) -> Configuration:
    """One synchronous car-based update: every car advances ``min(gap, m)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    pos = config.positions()
    if pos.size == 0:
        return config
    v = np.minimum(cyclic_gaps(pos, config.L), m)
    return Configuration.from_positions(pos + v, config.L)


def local_rule(window: Sequence, m: int):
    """Next state of the centre cell from the window ``s[i-m], ..., s[i], s[i+1]``.

    Operands are boolean arrays (or bit-sliced unsigned integers); the result
    has the same type. An occupied cell stays occupied iff the cell ahead is
    occupied. An empty cell receives a car iff its nearest car behind lies
    within ``m`` sites and lands exactly here, which happens when the cell
    ahead is occupied (the car fills its whole gap) or when that car is
    exactly ``m`` sites back (it moves at full speed).
    """
    if len(window) != m + 2:
        raise ValueError(f"window must have m + 2 = {m + 2} cells")
    left = window[:m]
    centre, right = window[m], window[m + 1]
    any_left = left[0]
    for s in left[1:]:
        any_left = any_left | s
    if m == 1:
        none_between = ~(centre & ~centre)
    else:
        between = left[1]
        for s in left[2:]:
            between = between | s
        none_between = ~between
    arrive = (right & any_left) | (left[0] & none_between)
    return (centre & right) | (~centre & arrive)


def _local_update(cells: np.ndarray, m: int) -> np.ndarray:
    s = cells.astype(bool)
    window = [np.roll(s, k) for k in range(m, 0, -1)] + [s, np.roll(s, -1)]
    return local_rule(window, m).astype(np.uint8)


def step_local(config: Configuration, m: int) -> Configuration:
    """One synchronous update through the site-local rule, applied cyclically."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return Configuration(_local_update(config.cells, m))


def rule_table(m: int) -> dict[tuple[int, ...], int]:
    """Full truth table of the local rule over all ``2**(m+2)`` windows."""
    table = {}
    for code in range(2 ** (m + 2)):
        window = tuple((code >> (m + 1 - k)) & 1 for k in range(m + 2))
        out = local_rule([np.bool_(b) for b in window], m)
        table[window] = int(bool(out))
    return table


def wolfram_number(m: int = 1) -> int:
    """Wolfram code of the radius-1 rule; only meaningful for ``m == 1``."""
    if m != 1:
        raise ValueError("a Wolfram elementary code exists only for m == 1")
    table = rule_table(1)
    return sum(out << (4 * w[0] + 2 * w[1] + w[2]) for w, out in table.items())


def iterate_open(word: CellsLike, m: int, t: int) -> str:
    """Evolve a non-periodic word ``t`` steps and return its still-determined cells.

    Cells outside the word are unknown. A cell's next state is known only if
    its whole window ``[i-m, i+1]`` is known, so after ``t`` steps the
    surviving cells are those at offsets ``[m*t, len(word) - t)``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if t < 0:
        raise ValueError("t must be >= 0")
    cells = as_cells(word).astype(np.int8)
    p = cells.size
    if p < (m + 1) * t + 1:
        raise ValueError(
            f"word of length {p} is too short for {t} steps with m={m}; "
            f"need at least {(m + 1) * t + 1}"
        )
    state = cells
    for _ in range(t):
        known = state != UNKNOWN
        padded_known = np.concatenate([np.zeros(m, bool), known, np.zeros(1, bool)])
        padded = np.concatenate([np.zeros(m, bool), state == 1, np.zeros(1, bool)])
        window = [padded[k:k + p] for k in range(m + 2)]
        window_known = padded_known[0:p].copy()
        for k in range(1, m + 2):
            window_known &= padded_known[k:k + p]
        nxt = local_rule(window, m).astype(np.int8)
        nxt[~window_known] = UNKNOWN
        state = nxt
    (idx,) = np.nonzero(state != UNKNOWN)
    # Determined cells form one contiguous block by construction.
    assert idx.size == 0 or idx[-1] - idx[0] + 1 == idx.size
    return bits_to_str(state[idx])


def determined_span(word_length: int, m: int, t: int) -> tuple[int, int]:
    """Offsets ``[start, stop)`` of the original word still determined after ``t`` steps."""
    return m * t, word_length - t


class RingSimulator:
    """Car-based integrator for long runs.

    Positions are kept unwrapped: each car's coordinate only grows, and the
    ring is recovered modulo ``L``. Car order never changes, so no sorting is
    needed between steps.
    """

    def __init__(self, config: Configuration, m: int):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.m = m
        self.L = config.L
        self.x = config.positions().astype(np.int64)
        self.t = 0

    @property
    def n_cars(self) -> int:
        return int(self.x.size)

    def gaps(self) -> np.ndarray:
        return cyclic_gaps(self.x, self.L)

    def velocities(self) -> np.ndarray:
        return np.minimum(self.gaps(), self.m)

    def advance(self, steps: int = 1) -> None:
        for _ in range(steps):
            if self.x.size:
                self.x += self.velocities()
            self.t += 1

    def configuration(self) -> Configuration:
        return Configuration.from_positions(self.x, self.L)
