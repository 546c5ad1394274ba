"""Bit strings, the plateau fitness function, and Hamming-level bookkeeping.

Bit strings are stored as a Python int bit mask (position i is bit i), so the
one-bit count is a single popcount and flipping a set of positions is one XOR.
"""

from __future__ import annotations

import random
from dataclasses import dataclass


@dataclass(frozen=True)
class PlateauParams:
    """Problem size n and plateau radius k.

    The plateau of second-best fitness consists of all points with more than
    n-k but fewer than n one-bits, plus the k-th Hamming level itself.
    Requires k >= 2 (k = 1 degenerates to plain OneMax) and 2k < n so that the
    levels are distinct and the plateau is a proper subset of the cube.
    """

    n: int
    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"plateau radius k must be >= 2, got {self.k}")
        if 2 * self.k >= self.n:
            raise ValueError(f"need 2k < n, got n={self.n}, k={self.k}")


class BitString:
    """Immutable fixed-length bit string backed by an int mask."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: int):
        if n <= 0:
            raise ValueError(f"length must be positive, got {n}")
        if mask < 0 or mask >> n:
            raise ValueError("mask has bits outside [0..n)")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("BitString is immutable")

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from01(cls, s: str) -> "BitString":
        """Parse a left-to-right 0/1 string; character i is position i."""
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {s!r}")
        mask = 0
        for i, c in enumerate(s):
            if c == "1":
                mask |= 1 << i
        return cls(len(s), mask)

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "BitString":
        return cls(n, rng.getrandbits(n))

    def bit(self, i: int) -> int:
        return (self.mask >> i) & 1

    def flip(self, flip_mask: int) -> "BitString":
        """Return a copy with every position in flip_mask flipped."""
        return BitString(self.n, self.mask ^ flip_mask)

    def hamming(self, other: "BitString") -> int:
        if other.n != self.n:
            raise ValueError("length mismatch")
        return (self.mask ^ other.mask).bit_count()

    def to01(self) -> str:
        return "".join("1" if self.bit(i) else "0" for i in range(self.n))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitString)
            and self.n == other.n
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.n, self.mask))

    def __repr__(self) -> str:
        return f"BitString({self.to01()!r})"


def onemax(x: BitString) -> int:
    """Number of one-bits in x."""
    return x.mask.bit_count()


def onemax_after_flips(x: BitString, flip_mask: int) -> int:
    """One-bit count of x.flip(flip_mask), without building the new string.

    Incremental form used by the EA inner loop: zeros hit by the flip add one
    each, ones hit subtract one each.
    """
    if flip_mask < 0 or flip_mask >> x.n:
        raise ValueError("flip mask has bits outside [0..n)")
    hits_on_ones = (flip_mask & x.mask).bit_count()
    return x.mask.bit_count() + flip_mask.bit_count() - 2 * hits_on_ones


def fitness_of_onemax(p: PlateauParams, ones: int) -> int:
    """Plateau fitness as a function of the one-bit count alone."""
    if ones <= p.n - p.k:
        return ones
    if ones == p.n:
        return p.n
    return p.n - p.k


def plateau_fitness(p: PlateauParams, x: BitString) -> int:
    """Fitness of x: OneMax below the plateau, n-k on it, n at the optimum."""
    if x.n != p.n:
        raise ValueError(f"bit string has length {x.n}, params require {p.n}")
    return fitness_of_onemax(p, onemax(x))


def level_of(p: PlateauParams, x: BitString) -> int | None:
    """Level index i (one-bit count n-k+i) if x is on the plateau or optimal.

    Level k is the optimum; returns None below the plateau.
    """
    if x.n != p.n:
        raise ValueError(f"bit string has length {x.n}, params require {p.n}")
    ones = onemax(x)
    if ones < p.n - p.k:
        return None
    return ones - (p.n - p.k)


def sample_level_point(p: PlateauParams, level: int, rng: random.Random) -> BitString:
    """Uniform random point of the given level (exactly n-k+level one-bits)."""
    if not 0 <= level <= p.k:
        raise ValueError(f"level must be in [0..{p.k}], got {level}")
    zeros = p.k - level
    if zeros == 0:
        return BitString.ones(p.n)
    mask = (1 << p.n) - 1
    for pos in rng.sample(range(p.n), zeros):
        mask ^= 1 << pos
    return BitString(p.n, mask)
