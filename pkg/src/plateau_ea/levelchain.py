"""The k-state leaky level chain: construction, absorption, tails, spectrum.

State i aggregates all plateau points with exactly n-k+i one-bits; the
optimum (level k) is dropped, so each row of the transition matrix P sums to
1 minus the per-step exit probability. The transition probability from level
i to level j sums, over the number m of "wasted" flips, the ways to pick the
right mix of zero- and one-positions:

    j > i:  sum_m C(k-i, j-i+m) C(n-k+i, m)     / C(n, j-i+2m) Pr[alpha = j-i+2m]
    j < i:  sum_m C(k-i, m)     C(n-k+i, i-j+m) / C(n, i-j+2m) Pr[alpha = i-j+2m]

with the diagonal defined as the complement and exit_i = Pr[alpha = k-i] / C(n, k-i).

Two numeric modes: exact rationals (identities hold bit-exactly) and float64.
The tail-envelope checker additionally evaluates the chain in mpmath floats
at whatever precision the requested horizon demands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .bitcore import PlateauParams
from .linalg import (
    SingularMatrixError,
    jacobi_eigh,
    left_residual_norm,
    solve_linear,
    symmetry_defect,
    vec_mat,
)
from .mutation import AlphaDistribution

FLOAT_K_CAP = 8  # beyond this, off-diagonal entries underflow float64 at large n


class NoExitPathError(ValueError):
    """The optimum is unreachable from some level; absorption is undefined."""


class InternalConsistencyError(RuntimeError):
    """A property the construction guarantees failed numerically."""


@dataclass(frozen=True)
class LevelChain:
    n: int
    k: int
    P: tuple  # k rows of k entries, Fraction or float
    exit: tuple  # k entries
    exact: bool
    alpha: AlphaDistribution | None = None


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: tuple  # sorted descending; all real
    left_eigenvectors: tuple  # row i is the left eigenvector for eigenvalues[i]
    residuals: tuple  # ||v P - lam v||_2 per pair
    symmetry_defect: float


@dataclass(frozen=True)
class StationaryDistribution:
    pi_star: tuple  # strictly positive, sums to 1
    lambda0: float
    residual: float


def plateau_size(n: int, k: int) -> int:
    """Number of plateau points N = sum_{i<k} C(n, k-i)."""
    return sum(math.comb(n, k - i) for i in range(k))


def build(n: int, k: int, dist: AlphaDistribution, exact: bool | None = None) -> LevelChain:
    """Level chain of the (1+1) EA with the given flip-count distribution."""
    PlateauParams(n, k)
    if dist.n != n:
        raise ValueError(f"distribution is over [0..{dist.n}], chain needs n={n}")
    if exact is None:
        exact = dist.exact
    if exact and not dist.exact:
        raise ValueError("exact chain requires an exact flip-count distribution")
    if not exact and k > FLOAT_K_CAP:
        raise ValueError(f"float mode supports k <= {FLOAT_K_CAP}, got {k}")

    pr = dist.probs if exact else [float(q) for q in dist.probs]
    zero = Fraction(0) if exact else 0.0

    def frac(num: int, den: int):
        return Fraction(num, den) if exact else num / den

    P = [[zero] * k for _ in range(k)]
    ex = [zero] * k
    for i in range(k):
        for j in range(k):
            if j > i:
                s = zero
                for m in range(k - j + 1):
                    a = j - i + 2 * m
                    w = math.comb(k - i, j - i + m) * math.comb(n - k + i, m)
                    s += frac(w, math.comb(n, a)) * pr[a]
                P[i][j] = s
            elif j < i:
                s = zero
                for m in range(k - i + 1):
                    a = i - j + 2 * m
                    w = math.comb(k - i, m) * math.comb(n - k + i, i - j + m)
                    s += frac(w, math.comb(n, a)) * pr[a]
                P[i][j] = s
        ex[i] = frac(1, math.comb(n, k - i)) * pr[k - i]
    for i in range(k):
        off = sum(P[i][j] for j in range(k) if j != i)
        P[i][i] = 1 - off - ex[i]
    return LevelChain(
        n=n,
        k=k,
        P=tuple(tuple(row) for row in P),
        exit=tuple(ex),
        exact=exact,
        alpha=dist,
    )


def as_float(chain: LevelChain) -> LevelChain:
    if not chain.exact:
        return chain
    return LevelChain(
        n=chain.n,
        k=chain.k,
        P=tuple(tuple(float(x) for x in row) for row in chain.P),
        exit=tuple(float(x) for x in chain.exit),
        exact=False,
        alpha=chain.alpha,
    )


def row_sums(chain: LevelChain) -> tuple:
    return tuple(sum(row) for row in chain.P)


def _check_reachable(chain: LevelChain) -> None:
    k = chain.k
    good = {i for i in range(k) if chain.exit[i] > 0}
    frontier = set(good)
    while frontier:
        nxt = {
            i
            for i in range(k)
            if i not in good and any(chain.P[i][j] > 0 for j in good)
        }
        good |= nxt
        frontier = nxt
    trapped = sorted(set(range(k)) - good)
    if trapped:
        raise NoExitPathError(
            f"levels {trapped} cannot reach the optimum "
            f"(exit probabilities {[float(e) for e in chain.exit]})"
        )


def absorption_times(chain: LevelChain) -> tuple:
    """Expected evaluations to hit the optimum from each level: (I - P) t = 1."""
    _check_reachable(chain)
    k = chain.k
    one = Fraction(1) if chain.exact else 1.0
    A = [
        [(one if i == j else one * 0) - chain.P[i][j] for j in range(k)]
        for i in range(k)
    ]
    try:
        return tuple(solve_linear(A, [one] * k))
    except SingularMatrixError as exc:
        raise NoExitPathError(f"absorption system is singular: {exc}") from exc


def _check_stochastic(chain: LevelChain, pi) -> list:
    pi = list(pi)
    if len(pi) != chain.k:
        raise ValueError(f"start vector must have {chain.k} entries")
    if any(q < 0 for q in pi):
        raise ValueError("start vector has a negative entry")
    total = sum(pi)
    if chain.exact and isinstance(total, Fraction):
        if total != 1:
            raise ValueError(f"start vector sums to {total}, not 1")
    elif abs(float(total) - 1.0) > 1e-12:
        raise ValueError(f"start vector sums to {float(total)!r}, not 1")
    return pi


def tail(chain: LevelChain, pi, t: int):
    """Survival probability ||pi P^t||_1 by t vector-matrix products."""
    if t < 0:
        raise ValueError("t must be >= 0")
    v = _check_stochastic(chain, pi)
    for _ in range(t):
        v = vec_mat(v, chain.P)
    return sum(v)


def tail_curve(chain: LevelChain, pi, ts):
    """Survival probabilities at each t in the sorted grid ts, one pass."""
    ts = list(ts)
    if ts != sorted(ts) or (ts and ts[0] < 0):
        raise ValueError("t grid must be sorted and non-negative")
    v = _check_stochastic(chain, pi)
    out = []
    cur = 0
    for t in ts:
        for _ in range(t - cur):
            v = vec_mat(v, chain.P)
        cur = t
        out.append(sum(v))
    return out


def tail_sum(chain: LevelChain, pi, horizon: int):
    """sum_{t=0}^{horizon-1} tail(t) plus the exact remainder (pi P^horizon) t_abs.

    The total equals pi . absorption_times identically; the partial sum
    converges to it as the remainder drains.
    """
    v = _check_stochastic(chain, pi)
    t_abs = absorption_times(chain)
    partial = v[0] * 0
    for _ in range(horizon):
        partial += sum(v)
        v = vec_mat(v, chain.P)
    remainder = sum(vi * ti for vi, ti in zip(v, t_abs))
    return partial, remainder


def _level_sizes(n: int, k: int) -> list[int]:
    return [math.comb(n, k - i) for i in range(k)]


def uniform_level_vector(n: int, k: int, exact: bool = True):
    """Level-space image u of the uniform distribution on the plateau."""
    PlateauParams(n, k)
    sizes = _level_sizes(n, k)
    total = sum(sizes)
    if exact:
        return tuple(Fraction(c, total) for c in sizes)
    return tuple(c / total for c in sizes)


def gap_bound(dist: AlphaDistribution, k: int):
    """Spectral gap lower bound (Pr[alpha=1])^(k-1) / ((k-1) 2^k)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    p1 = dist.p_one
    if p1 == 0:
        raise ValueError(
            "gap bound needs Pr[alpha = 1] > 0; the operator never flips one bit"
        )
    if isinstance(p1, Fraction):
        return p1 ** (k - 1) / ((k - 1) * 2**k)
    return float(p1) ** (k - 1) / ((k - 1) * 2**k)


def _symmetrized(chain: LevelChain):
    """D^(1/2) P D^(-1/2) with D = diag(level sizes); symmetric by detailed balance."""
    k = chain.k
    roots = [math.sqrt(c) for c in _level_sizes(chain.n, chain.k)]
    P = chain.P
    return [[roots[i] * P[i][j] / roots[j] for j in range(k)] for i in range(k)]


def spectrum(chain: LevelChain) -> SpectrumResult:
    """All eigenvalues (real) and left eigenvectors of P, sorted descending.

    Works on the similarity transform S = D^(1/2) P D^(-1/2), which the
    detailed-balance identity C(n,k-i) p_i^j = C(n,k-j) p_j^i makes symmetric,
    so realness holds by construction; eigenvectors map back as v D^(1/2).
    """
    fchain = as_float(chain)
    k = fchain.k
    S = _symmetrized(fchain)
    defect = symmetry_defect(S)
    if defect > 1e-12:
        raise InternalConsistencyError(
            f"symmetrized matrix has asymmetry {defect:.3e} > 1e-12; "
            "detailed balance is violated"
        )
    Ssym = [
        [(S[i][j] + S[j][i]) / 2 for j in range(k)]
        for i in range(k)
    ]
    evals, evecs = jacobi_eigh(Ssym, tol=1e-15)
    roots = [math.sqrt(c) for c in _level_sizes(fchain.n, fchain.k)]
    pairs = []
    for lam, v in zip(evals, evecs):
        left = [vi * ri for vi, ri in zip(v, roots)]
        norm = math.sqrt(sum(x * x for x in left))
        left = [x / norm for x in left]
        pairs.append((lam, left))
    pairs.sort(key=lambda p: p[0], reverse=True)
    lam0 = pairs[0][0]
    if any(abs(lam) >= abs(lam0) for lam, _ in pairs[1:]):
        raise InternalConsistencyError(
            "largest eigenvalue is not strictly dominant: "
            + str([lam for lam, _ in pairs])
        )
    residuals = tuple(
        left_residual_norm(v, fchain.P, lam) for lam, v in pairs
    )
    return SpectrumResult(
        eigenvalues=tuple(lam for lam, _ in pairs),
        left_eigenvectors=tuple(tuple(v) for _, v in pairs),
        residuals=residuals,
        symmetry_defect=defect,
    )


def conditional_stationary(chain: LevelChain, spec: SpectrumResult | None = None) -> StationaryDistribution:
    """Normalized positive left Perron eigenvector of P.

    This is the distribution over levels that one step leaves unchanged,
    conditioned on not hitting the optimum.
    """
    if spec is None:
        spec = spectrum(chain)
    lam0 = spec.eigenvalues[0]
    v = list(spec.left_eigenvectors[0])
    if sum(v) < 0:
        v = [-x for x in v]
    if any(x <= 0 for x in v):
        raise InternalConsistencyError(
            "Perron eigenvector has a non-positive component after sign fix "
            f"({v}); the chain is likely reducible, which happens for "
            "operators that never flip exactly one bit"
        )
    total = sum(v)
    pi = [x / total for x in v]
    residual = left_residual_norm(pi, as_float(chain).P, lam0)
    if residual > 1e-10:
        raise InternalConsistencyError(
            f"stationary residual {residual:.3e} exceeds 1e-10"
        )
    return StationaryDistribution(pi_star=tuple(pi), lambda0=lam0, residual=residual)


def leading_mass(chain: LevelChain, pi, stationary: StationaryDistribution | None = None) -> float:
    """||pi^0||_1: mass of pi's projection onto the Perron eigendirection.

    Evaluated by the level-space form of the individual-space projection
    (phi images are constant on levels, so the inner products collapse to
    k-term sums; the N-dimensional space is never materialized).
    """
    if stationary is None:
        stationary = conditional_stationary(chain)
    e0 = stationary.pi_star
    sizes = _level_sizes(chain.n, chain.k)
    pif = [float(x) for x in _check_stochastic(chain, pi)]
    num = sum(p * e / c for p, e, c in zip(pif, e0, sizes))
    den = sum(e * e / c for e, c in zip(e0, sizes))
    return num / den


@dataclass(frozen=True)
class EnvelopeReport:
    """Outcome of checking |tail(t) - pi0 lambda0^t| <= sqrt(N) (1-eps)^t for all t."""

    n: int
    k: int
    t_max: int
    dps: int
    lambda0: float
    pi0_norm: float
    eps: float
    min_slack: float  # min over t of (envelope - |deviation|) / envelope
    argmin_t: int
    holds: bool


def check_tail_envelope(
    n: int,
    k: int,
    dist: AlphaDistribution,
    pi=None,
    t_max: int | None = None,
    dps: int | None = None,
) -> EnvelopeReport:
    """Verify the spectral tail envelope at every t in [0..t_max].

    The envelope decays like (1-eps)^t, far below float64 resolution for
    interesting horizons, so the whole computation runs in mpmath floats at a
    precision chosen from the horizon. The chain itself is built exactly.
    """
    if not dist.exact:
        raise ValueError("envelope check needs an exact flip-count distribution")
    chain = build(n, k, dist, exact=True)
    eps = gap_bound(dist, k)
    N = plateau_size(n, k)
    if pi is None:
        pi = uniform_level_vector(n, k, exact=True)
    pi = [Fraction(x) for x in _check_stochastic(chain, pi)]
    if sum(pi) != 1:
        raise ValueError("start vector must be exactly stochastic for this check")
    if t_max is None:
        t_abs = absorption_times(chain)
        et = sum(float(p) * float(t) for p, t in zip(pi, t_abs))
        t_max = int(math.ceil(5 * et))
    if dps is None:
        per_step = -math.log10(1 - float(eps))
        dps = int(math.ceil(t_max * per_step + 0.5 * math.log10(N) + math.log10(t_max + 2) + 40))
    dps = max(dps, 50)

    with mp.workdps(dps):
        Pm = [[mp.mpf(x.numerator) / x.denominator for x in row] for row in chain.P]
        sizes = _level_sizes(n, k)
        roots = [mp.sqrt(c) for c in sizes]
        S = [
            [roots[i] * Pm[i][j] / roots[j] for j in range(k)]
            for i in range(k)
        ]
        Ssym = [[(S[i][j] + S[j][i]) / 2 for j in range(k)] for i in range(k)]
        evals, evecs = jacobi_eigh(
            Ssym, sqrt=mp.sqrt, tol=mp.mpf(10) ** (-(dps - 20)), max_sweeps=500
        )
        top = max(range(k), key=lambda i: evals[i])
        lam0 = evals[top]
        e0 = [v * r for v, r in zip(evecs[top], roots)]
        if sum(e0) < 0:
            e0 = [-x for x in e0]
        tot = sum(e0)
        e0 = [x / tot for x in e0]
        pim = [mp.mpf(x.numerator) / x.denominator for x in pi]
        num = sum(p * e / c for p, e, c in zip(pim, e0, sizes))
        den = sum(e * e / c for e, c in zip(e0, sizes))
        pi0 = num / den

        env = mp.sqrt(N)
        decay = 1 - mp.mpf(eps.numerator) / eps.denominator
        main = pi0
        v = pim
        min_slack = mp.mpf(2)
        argmin_t = 0
        for t in range(t_max + 1):
            drift = abs(sum(v) - main)
            slack = (env - drift) / env
            if slack < min_slack:
                min_slack = slack
                argmin_t = t
            v = vec_mat(v, Pm)
            main = main * lam0
            env = env * decay
        return EnvelopeReport(
            n=n,
            k=k,
            t_max=t_max,
            dps=dps,
            lambda0=float(lam0),
            pi0_norm=float(pi0),
            eps=float(eps),
            min_slack=float(min_slack),
            argmin_t=argmin_t,
            holds=min_slack >= 0,
        )


def _fmt(x, exact: bool) -> str:
    if exact:
        return str(x)
    return format(float(x), ".17g")


def dump_matrix(chain: LevelChain) -> str:
    """Plain-text dump: row-major P rows, then the exit vector.

    Fractions in lowest terms in exact mode, 17 significant digits in float.
    """
    mode = "rational" if chain.exact else "float"
    lines = [f"# level chain n={chain.n} k={chain.k} mode={mode}"]
    for row in chain.P:
        lines.append("P " + " ".join(_fmt(x, chain.exact) for x in row))
    lines.append("exit " + " ".join(_fmt(x, chain.exact) for x in chain.exit))
    return "\n".join(lines) + "\n"
