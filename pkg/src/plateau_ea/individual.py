"""Brute-force oracle: the N-state chain over individual plateau points.

Transition probability between distinct plateau points x, y at Hamming
distance d is Pr[alpha = d] / C(n, d), independent of direction, so the
matrix is symmetric. The level chain is this chain aggregated over Hamming
levels; the embedding `phi` spreads level mass uniformly over a level's
points and intertwines the two transition matrices, which is what makes the
small-n chain a complete cross-check for the level-chain machinery.

Points are indexed level by level (level 0 first); inside a level, a point
is identified with its set of zero positions and ranked colexicographically,
giving a closed-form bijection and a stable dump order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .bitcore import PlateauParams
from .levelchain import build as build_level
from .linalg import solve_linear, vec_mat
from .mutation import AlphaDistribution

DEFAULT_CAP = 2000


class CapExceededError(ValueError):
    pass


@dataclass(frozen=True)
class IndividualChain:
    n: int
    k: int
    exact: bool
    levels: tuple  # level index per point
    zero_masks: tuple  # bit mask of zero positions per point
    P: tuple | np.ndarray  # N x N; nested tuples of Fractions, or float ndarray
    exit: tuple | np.ndarray  # length N

    @property
    def size(self) -> int:
        return len(self.levels)


def colex_rank(zero_positions) -> int:
    """Rank of a position set among same-size sets, colexicographic order."""
    return sum(math.comb(a, j) for j, a in enumerate(sorted(zero_positions), start=1))


def colex_unrank(rank: int, r: int) -> tuple[int, ...]:
    """Inverse of colex_rank for sets of size r."""
    out = []
    rem = rank
    for j in range(r, 0, -1):
        a = j - 1
        while math.comb(a + 1, j) <= rem:
            a += 1
        out.append(a)
        rem -= math.comb(a, j)
    return tuple(reversed(out))


def level_offsets(n: int, k: int) -> list[int]:
    """Start index of each level in the concatenated point order."""
    offs = [0]
    for i in range(k):
        offs.append(offs[-1] + math.comb(n, k - i))
    return offs


def point_index(n: int, k: int, zero_positions) -> int:
    """Index of the plateau point with the given zero set."""
    zeros = len(zero_positions)
    if not 1 <= zeros <= k:
        raise ValueError(f"zero set size must be in [1..{k}], got {zeros}")
    level = k - zeros
    return level_offsets(n, k)[level] + colex_rank(zero_positions)


def point_from_index(n: int, k: int, idx: int) -> tuple[int, ...]:
    """Zero-position set of the point at the given index."""
    offs = level_offsets(n, k)
    if not 0 <= idx < offs[-1]:
        raise ValueError(f"index {idx} out of range [0..{offs[-1]})")
    level = max(i for i in range(k) if offs[i] <= idx)
    return colex_unrank(idx - offs[level], k - level)


def plateau_points(n: int, k: int):
    """(levels, zero_masks) for all plateau points in canonical order."""
    levels = []
    masks = []
    for level in range(k):
        r = k - level
        subsets = sorted(
            combinations(range(n), r), key=lambda s: tuple(reversed(s))
        )
        for s in subsets:
            levels.append(level)
            m = 0
            for p in s:
                m |= 1 << p
            masks.append(m)
    return tuple(levels), tuple(masks)


def build_individual(
    n: int,
    k: int,
    dist: AlphaDistribution,
    exact: bool = False,
    cap: int = DEFAULT_CAP,
) -> IndividualChain:
    PlateauParams(n, k)
    if dist.n != n:
        raise ValueError(f"distribution is over [0..{dist.n}], chain needs n={n}")
    if exact and not dist.exact:
        raise ValueError("exact chain requires an exact flip-count distribution")
    N = sum(math.comb(n, k - i) for i in range(k))
    if N > cap:
        raise CapExceededError(
            f"individual chain has N={N} states, above the cap of {cap}"
        )
    levels, masks = plateau_points(n, k)

    if exact:
        qd = [dist.probs[d] / math.comb(n, d) for d in range(n + 1)]
        P = [[Fraction(0)] * N for _ in range(N)]
        ex = [Fraction(0)] * N
        for x in range(N):
            for y in range(x + 1, N):
                d = (masks[x] ^ masks[y]).bit_count()
                P[x][y] = P[y][x] = qd[d]
            z = k - levels[x]
            ex[x] = qd[z]
        for x in range(N):
            P[x][x] = 1 - sum(P[x][y] for y in range(N) if y != x) - ex[x]
        return IndividualChain(
            n=n,
            k=k,
            exact=True,
            levels=levels,
            zero_masks=masks,
            P=tuple(tuple(row) for row in P),
            exit=tuple(ex),
        )

    qd = np.array([float(dist.probs[d]) / math.comb(n, d) for d in range(n + 1)])
    marr = np.array(masks, dtype=np.uint64)
    D = np.bitwise_count(marr[:, None] ^ marr[None, :]).astype(np.int64)
    P = qd[D]
    ex = qd[k - np.array(levels)]
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1) - ex)
    return IndividualChain(
        n=n, k=k, exact=False, levels=levels, zero_masks=masks, P=P, exit=ex
    )


def phi(x, n: int, k: int):
    """Embed a level vector in point space: level j's value divided by its size.

    Linear, Manhattan-norm preserving, and intertwines the two transition
    matrices (phi(x P) = phi(x) P_ind).
    """
    if len(x) != k:
        raise ValueError(f"level vector must have {k} entries")
    out = []
    for j in range(k):
        c = math.comb(n, k - j)
        out.extend([x[j] / c] * c)
    return out


@dataclass(frozen=True)
class CommutationReport:
    n: int
    k: int
    max_discrepancy: Fraction | float
    exact: bool


def commutation_report(n: int, k: int, dist: AlphaDistribution, exact: bool = True) -> CommutationReport:
    """Max |phi(e_i P) - phi(e_i) P_ind| over the standard basis of level space."""
    level = build_level(n, k, dist, exact=exact)
    ind = build_individual(n, k, dist, exact=exact)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    worst = zero
    Pind = ind.P if exact else [list(row) for row in np.asarray(ind.P)]
    for i in range(k):
        e = [zero] * k
        e[i] = one
        lhs = phi(vec_mat(e, level.P), n, k)
        rhs = vec_mat(phi(e, n, k), Pind)
        d = max(abs(a - b) for a, b in zip(lhs, rhs))
        if d > worst:
            worst = d
    return CommutationReport(n=n, k=k, max_discrepancy=worst, exact=exact)


@dataclass(frozen=True)
class SpectrumInclusionReport:
    n: int
    k: int
    level_eigenvalues: tuple
    distances: tuple  # per level eigenvalue, min distance to the point spectrum
    max_distance: float


def spectrum_inclusion_report(n: int, k: int, dist: AlphaDistribution) -> SpectrumInclusionReport:
    """Distance of each level-chain eigenvalue to the point-chain spectrum."""
    from .levelchain import spectrum as level_spectrum

    level = build_level(n, k, dist, exact=False)
    ind = build_individual(n, k, dist, exact=False)
    lam_level = level_spectrum(level).eigenvalues
    lam_ind = np.linalg.eigvalsh(np.asarray(ind.P))
    dists = tuple(float(np.min(np.abs(lam_ind - lam))) for lam in lam_level)
    return SpectrumInclusionReport(
        n=n,
        k=k,
        level_eigenvalues=lam_level,
        distances=dists,
        max_distance=max(dists),
    )


def absorption_individual(chain: IndividualChain):
    """Expected absorption time from every plateau point: (I - P_ind) t = 1."""
    N = chain.size
    if chain.exact:
        one = Fraction(1)
        A = [
            [(one if i == j else Fraction(0)) - chain.P[i][j] for j in range(N)]
            for i in range(N)
        ]
        return solve_linear(A, [one] * N)
    A = np.eye(N) - np.asarray(chain.P)
    return np.linalg.solve(A, np.ones(N))


def absorption_by_level(chain: IndividualChain):
    """(per-level absorption times, max within-level spread).

    Unbiasedness makes all points of a level share one absorption time; the
    spread measures how exactly the numerics agree with that symmetry.
    """
    t = absorption_individual(chain)
    per_level = []
    spread = 0.0
    for level in range(chain.k):
        vals = [float(ti) for ti, lv in zip(t, chain.levels) if lv == level]
        per_level.append(sum(vals) / len(vals))
        spread = max(spread, max(vals) - min(vals))
    return per_level, spread


def dump_individual(chain: IndividualChain) -> str:
    """Index bijection plus the matrix, in the level-chain dump format."""
    mode = "rational" if chain.exact else "float"
    lines = [f"# individual chain n={chain.n} k={chain.k} N={chain.size} mode={mode}"]
    for i, (lv, m) in enumerate(zip(chain.levels, chain.zero_masks)):
        zeros = ",".join(str(p) for p in range(chain.n) if (m >> p) & 1)
        lines.append(f"point {i} level {lv} zeros {zeros}")
    P = chain.P if chain.exact else np.asarray(chain.P)
    for i in range(chain.size):
        row = P[i]
        if chain.exact:
            lines.append("P " + " ".join(str(x) for x in row))
        else:
            lines.append("P " + " ".join(format(float(x), ".17g") for x in row))
    if chain.exact:
        lines.append("exit " + " ".join(str(x) for x in chain.exit))
    else:
        lines.append(
            "exit " + " ".join(format(float(x), ".17g") for x in np.asarray(chain.exit))
        )
    return "\n".join(lines) + "\n"
