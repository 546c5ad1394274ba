"""Unary unbiased mutation operators, represented by their flip-count distribution.

Every unary unbiased operator is equivalent to: draw a flip count alpha from a
distribution on [0..n], then flip exactly alpha positions chosen uniformly at
random. Operators therefore reduce to an :class:`AlphaDistribution`; only the
hyper-heuristic policies carry per-run state (handled by the engine).
"""

from __future__ import annotations

import bisect
import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .bitcore import BitString

# pmf vectors are materialized with n+1 entries; keep n sane
MAX_N = 10**6


class ZeroOneFlipWarning(UserWarning):
    """Operator never flips exactly one bit; runtime predictions do not apply."""


@dataclass(frozen=True)
class OperatorSpec:
    """Declarative description of a mutation operator.

    kind is one of "rls", "two_bit", "standard_bit", "fast_ga", "custom".
    """

    kind: str
    gamma: Fraction | None = None
    beta: float | None = None
    pmf: tuple[tuple[int, Fraction], ...] | None = None

    @classmethod
    def rls(cls) -> "OperatorSpec":
        return cls("rls")

    @classmethod
    def two_bit(cls) -> "OperatorSpec":
        return cls("two_bit")

    @classmethod
    def standard_bit(cls, gamma) -> "OperatorSpec":
        g = Fraction(gamma)
        if g <= 0:
            raise ValueError(f"standard bit mutation needs gamma > 0, got {gamma}")
        return cls("standard_bit", gamma=g)

    @classmethod
    def fast_ga(cls, beta: float) -> "OperatorSpec":
        if not beta > 1:
            raise ValueError(f"power-law exponent must satisfy beta > 1, got {beta}")
        return cls("fast_ga", beta=float(beta))

    @classmethod
    def custom(cls, pmf) -> "OperatorSpec":
        """pmf: mapping or iterable of (flip count, probability) pairs."""
        items = sorted(pmf.items() if hasattr(pmf, "items") else pmf)
        frozen = []
        for m, q in items:
            if m != int(m) or m < 0:
                raise ValueError(f"flip count must be a non-negative integer, got {m}")
            q = Fraction(q)
            if q < 0:
                raise ValueError(f"negative probability {q} at flip count {m}")
            if q > 0:
                frozen.append((int(m), q))
        return cls("custom", pmf=tuple(frozen))

    def label(self) -> str:
        if self.kind == "standard_bit":
            g = self.gamma
            return f"stdbit:{g.numerator / g.denominator:g}"
        if self.kind == "fast_ga":
            return f"fastga:{self.beta:g}"
        if self.kind == "custom":
            return "custom"
        return {"rls": "rls", "two_bit": "2bit"}[self.kind]


@dataclass(frozen=True)
class HyperHeuristicPolicy:
    """Selection policy over the one-bit-flip / two-bit-flip low-level operators.

    kind is one of "simple_random", "random_gradient", "permutation", "greedy".
    Policies are immutable; the run-time selection state (random_gradient's
    previously chosen operator, permutation's drawn order) lives inside a
    single run and is never shared.
    """

    kind: str

    KINDS = ("simple_random", "random_gradient", "permutation", "greedy")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown hyper-heuristic policy {self.kind!r}")

    def label(self) -> str:
        return "hh:" + self.kind.replace("_", "-")


class AlphaDistribution:
    """Distribution of the number of flipped bits, on [0..n].

    probs[m] is the probability of flipping exactly m bits, as Fractions
    (exact mode) or floats. The float cumulative is kept for inverse-CDF
    sampling in either mode.
    """

    __slots__ = ("n", "probs", "exact", "cdf")

    def __init__(self, n: int, probs, exact: bool):
        if n <= 0 or n > MAX_N:
            raise ValueError(f"need 0 < n <= {MAX_N}, got {n}")
        probs = tuple(probs)
        if len(probs) != n + 1:
            raise ValueError(f"pmf must have n+1 = {n + 1} entries, got {len(probs)}")
        if any(q < 0 for q in probs):
            raise ValueError("pmf has a negative entry")
        total = sum(probs)
        if exact:
            if total != 1:
                raise ValueError(f"exact pmf must sum to 1, got {total}")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"pmf sums to {total!r}, outside 1 +- 1e-12")
        self.n = n
        self.probs = probs
        self.exact = exact
        cdf = []
        acc = 0.0
        for q in probs:
            acc += float(q)
            cdf.append(acc)
        cdf[-1] = 1.0
        self.cdf = cdf
        if self.p_one == 0:
            warnings.warn(
                "operator flips exactly one bit with probability 0; "
                "the runtime theory's assumptions do not hold",
                ZeroOneFlipWarning,
                stacklevel=2,
            )

    @property
    def p_one(self):
        return self.probs[1]

    def pr(self, m: int):
        return self.probs[m] if 0 <= m <= self.n else (Fraction(0) if self.exact else 0.0)

    def pr_range(self, lo: int, hi: int):
        if not 0 <= lo <= hi <= self.n:
            raise ValueError(f"need 0 <= lo <= hi <= {self.n}, got [{lo}, {hi}]")
        return sum(self.probs[lo : hi + 1])

    @property
    def support_max(self) -> int:
        for m in range(self.n, -1, -1):
            if self.probs[m] > 0:
                return m
        raise ValueError("pmf is all zero")


def _binomial_pmf_exact(n: int, g: Fraction) -> list[Fraction]:
    p = g / n
    q = 1 - p
    return [Fraction(math.comb(n, m)) * p**m * q ** (n - m) for m in range(n + 1)]


def _binomial_pmf_float(n: int, g: float) -> list[float]:
    # log-space keeps this finite for large n
    p = g / n
    if p >= 1.0:
        return [0.0] * n + [1.0]
    logp = math.log(p)
    log1mp = math.log1p(-p)
    out = []
    for m in range(n + 1):
        lc = math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)
        out.append(math.exp(lc + m * logp + (n - m) * log1mp))
    return out


def pmf_of(spec, n: int, exact: bool = False) -> AlphaDistribution:
    """Flip-count distribution of an operator (or reducible policy) at size n.

    With exact=True the entries are Fractions and identities hold bit-exactly;
    this requires rational inputs (fast_ga only with integer beta).
    SimpleRandom and RandomGradient policies reduce to the uniform mix of one-
    and two-bit flips (for random gradient this is exact once on the plateau,
    where strict fitness gains never happen); permutation and greedy are not
    expressible as a single flip-count distribution and are rejected.
    """
    if n <= 0 or n > MAX_N:
        raise ValueError(f"need 0 < n <= {MAX_N}, got {n}")
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    if isinstance(spec, HyperHeuristicPolicy):
        if spec.kind in ("simple_random", "random_gradient"):
            half = Fraction(1, 2) if exact else 0.5
            probs = [zero] * (n + 1)
            probs[1] = half
            probs[2] = half
            return AlphaDistribution(n, probs, exact)
        raise ValueError(
            f"policy {spec.kind!r} is not a single unbiased operator; no pmf"
        )

    if spec.kind == "rls":
        probs = [zero] * (n + 1)
        probs[1] = one
        return AlphaDistribution(n, probs, exact)

    if spec.kind == "two_bit":
        probs = [zero] * (n + 1)
        probs[2] = one
        return AlphaDistribution(n, probs, exact)

    if spec.kind == "standard_bit":
        if spec.gamma > n:
            raise ValueError(f"gamma must be <= n, got {spec.gamma} at n={n}")
        if exact:
            return AlphaDistribution(n, _binomial_pmf_exact(n, spec.gamma), True)
        return AlphaDistribution(n, _binomial_pmf_float(n, float(spec.gamma)), False)

    if spec.kind == "fast_ga":
        if n < 2:
            raise ValueError("fast GA needs n >= 2")
        top = n // 2
        if exact:
            if spec.beta != int(spec.beta):
                raise ValueError(
                    f"exact mode needs an integer beta, got {spec.beta}"
                )
            b = int(spec.beta)
            weights = [Fraction(1, i**b) for i in range(1, top + 1)]
        else:
            weights = [i ** -spec.beta for i in range(1, top + 1)]
        h = sum(weights)
        probs = [zero] * (n + 1)
        for i, w in enumerate(weights, start=1):
            probs[i] = w / h
        return AlphaDistribution(n, probs, exact)

    if spec.kind == "custom":
        probs = [zero] * (n + 1)
        for m, q in spec.pmf:
            if m > n:
                raise ValueError(f"custom pmf has mass at {m} > n = {n}")
            probs[m] = q if exact else float(q)
        return AlphaDistribution(n, probs, exact)

    raise ValueError(f"unknown operator kind {spec.kind!r}")


def pr_range(dist: AlphaDistribution, lo: int, hi: int):
    """Probability of flipping between lo and hi bits inclusive."""
    return dist.pr_range(lo, hi)


def sample_alpha(dist: AlphaDistribution, rng) -> int:
    """Draw a flip count by inverse CDF over the precomputed cumulative."""
    return bisect.bisect_right(dist.cdf, rng.random())


class FlipSampler:
    """Uniform m-subset sampler by partial Fisher-Yates over a reused array.

    O(m) per draw after O(n) setup; any permutation left behind by earlier
    draws is a valid starting state, so no cleanup pass is needed. Not
    thread-safe: use one instance per thread.
    """

    __slots__ = ("n", "_idx")

    def __init__(self, n: int):
        self.n = n
        self._idx = list(range(n))

    def sample_positions(self, m: int, rng) -> list[int]:
        if not 0 <= m <= self.n:
            raise ValueError(f"need 0 <= m <= {self.n}, got {m}")
        idx = self._idx
        for t in range(m):
            j = rng.randrange(t, self.n)
            idx[t], idx[j] = idx[j], idx[t]
        return idx[:m]

    def sample_mask(self, m: int, rng) -> int:
        mask = 0
        for p in self.sample_positions(m, rng):
            mask |= 1 << p
        return mask


_samplers = threading.local()


def _thread_sampler(n: int) -> FlipSampler:
    cache = getattr(_samplers, "cache", None)
    if cache is None:
        cache = _samplers.cache = {}
    if n not in cache:
        cache[n] = FlipSampler(n)
    return cache[n]


def apply(x: BitString, m: int, rng) -> BitString:
    """Flip exactly m uniformly chosen distinct positions of x."""
    return x.flip(_thread_sampler(x.n).sample_mask(m, rng))


def mutate(x: BitString, dist: AlphaDistribution, rng) -> BitString:
    """One full mutation: draw the flip count, then flip that many positions."""
    return apply(x, sample_alpha(dist, rng), rng)


def custom_from_file(path) -> OperatorSpec:
    """Load a custom pmf from text: one "m probability" pair per line.

    Probabilities may be decimals or fractions "a/b"; blank lines and
    #-comments are skipped. Entries are parsed exactly (decimals included),
    so the file must sum to exactly 1.
    """
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'm probability', got {raw!r}")
        try:
            m = int(parts[0])
            q = Fraction(parts[1])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        pairs.append((m, q))
    if not pairs:
        raise ValueError(f"{path}: no pmf entries")
    seen = [m for m, _ in pairs]
    if len(set(seen)) != len(seen):
        raise ValueError(f"{path}: duplicate flip counts")
    return OperatorSpec.custom(pairs)
