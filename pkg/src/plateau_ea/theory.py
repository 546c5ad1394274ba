"""Closed-form runtime predictions and the comparison table.

The headline prediction: starting anywhere on the plateau, the expected
number of evaluations is n^k / (k! Pr[1 <= alpha <= k]) up to lower-order
terms -- plateau size times the waiting time for a 1..k-bit flip. Everything
here evaluates that formula and its satellites (leading constants per
operator, the optimal standard-bit rate, the spectral tail envelope, and the
exact two-level closed form used as an independent oracle for k = 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .levelchain import gap_bound, plateau_size
from .mutation import AlphaDistribution, HyperHeuristicPolicy, OperatorSpec

ZETA_TERMS = 100_000


class NoPredictorError(ValueError):
    """The analysis does not cover this operator/policy."""


def harmonic(m: int, beta: float) -> float:
    """Generalized harmonic number H_{m,beta} = sum_{i<=m} i^-beta."""
    return math.fsum(i**-beta for i in range(1, m + 1))


def zeta(beta: float) -> float:
    """Riemann zeta for beta > 1: partial sum plus Euler-Maclaurin tail.

    Absolute error below 1e-10 for all beta > 1 (the neglected correction is
    O(beta M^-(beta+1)) with M = 1e5).
    """
    if not beta > 1:
        raise ValueError(f"zeta tail diverges for beta <= 1, got {beta}")
    M = ZETA_TERMS
    head = harmonic(M, beta)
    x = float(M + 1)
    tail = x ** (1 - beta) / (beta - 1) + 0.5 * x**-beta + beta / 12 * x ** (-beta - 1)
    return head + tail


def d_gamma(gamma: float, k: int) -> float:
    """Limit probability that standard bit mutation at rate gamma/n flips 1..k bits."""
    if gamma <= 0:
        raise ValueError(f"need gamma > 0, got {gamma}")
    return math.exp(-gamma) * math.fsum(gamma**i / math.factorial(i) for i in range(1, k + 1))


def optimal_gamma(k: int) -> float:
    """The unique maximizer of d_gamma: (k!)^(1/k), about k/e."""
    return math.factorial(k) ** (1.0 / k)


def asymptotic_runtime(n: int, k: int, dist: AlphaDistribution) -> float:
    """n^k / (k! Pr[1 <= alpha <= k]): plateau size over useful-flip probability."""
    p = float(dist.pr_range(1, k))
    if p == 0:
        raise ValueError("Pr[1 <= alpha <= k] is zero; the prediction is undefined")
    return n**k / (math.factorial(k) * p)


def lambda0_prediction(n: int, k: int, dist: AlphaDistribution) -> float:
    """Predicted largest eigenvalue 1 - Pr[1 <= alpha <= k] / N."""
    return 1.0 - float(dist.pr_range(1, k)) / plateau_size(n, k)


def leading_constant(spec, k: int) -> float:
    """Constant c with expected runtime c n^k / k!, in the n -> infinity limit.

    Custom operators are read as n-independent pmfs on their finite support.
    Permutation and greedy hyper-heuristics have no predictor.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if isinstance(spec, HyperHeuristicPolicy):
        if spec.kind in ("simple_random", "random_gradient"):
            return 1.0
        raise NoPredictorError(
            f"no runtime predictor for the {spec.kind!r} hyper-heuristic"
        )
    if spec.kind == "rls":
        return 1.0
    if spec.kind == "two_bit":
        return 1.0
    if spec.kind == "standard_bit":
        return 1.0 / d_gamma(float(spec.gamma), k)
    if spec.kind == "fast_ga":
        return zeta(spec.beta) / harmonic(k, spec.beta)
    if spec.kind == "custom":
        p = float(sum(q for m, q in spec.pmf if 1 <= m <= k))
        if p == 0:
            raise ValueError("custom operator never flips 1..k bits")
        return 1.0 / p
    raise ValueError(f"unknown operator kind {spec.kind!r}")


@dataclass(frozen=True)
class FastGAConstant:
    value: float  # H_{floor(n/2),beta}/H_{k,beta}, or its limit zeta/H
    bracket_low: float
    bracket_high: float
    limit: bool  # True when no n was given


def fast_ga_constant(beta: float, k: int, n: int | None = None) -> FastGAConstant:
    """Leading constant of the power-law operator, with its constant bracket."""
    if not beta > 1:
        raise ValueError(f"need beta > 1, got {beta}")
    hk = harmonic(k, beta)
    value = (zeta(beta) if n is None else harmonic(n // 2, beta)) / hk
    return FastGAConstant(
        value=value,
        bracket_low=(1 / (beta - 1)) / hk,
        bracket_high=(1 / (beta - 1) + 1) / hk,
        limit=n is None,
    )


def two_level_transitions(n: int, p1, p2, p3):
    """Exact level transitions for k = 2 and support {0,1,2,3}.

    Returns (p01, p02, p10, p12): up/exit-from-0/down/exit-from-1.
    """
    p1, p2, p3 = Fraction(p1), Fraction(p2), Fraction(p3)
    p01 = 2 * p1 / n + 6 * p3 / (n * (n - 1))
    p02 = 2 * p2 / (n * (n - 1))
    p10 = p1 * (n - 1) / n + 3 * p3 / n
    p12 = p1 / n
    return p01, p02, p10, p12


def two_level_closed_form(n: int, p1, p2, p3):
    """Exact expected runtimes (from level 0, from level 1) for k = 2.

    Solves the two-state first-step system in closed form. Requires support
    within {0,1,2,3}, probabilities summing to at most 1, and p1 > 0 (the
    standing assumption of the analysis; exit from level 1 is p1/n).
    """
    if n <= 4:
        raise ValueError("need n > 2k = 4")
    p1, p2, p3 = Fraction(p1), Fraction(p2), Fraction(p3)
    if min(p1, p2, p3) < 0 or p1 + p2 + p3 > 1:
        raise ValueError("need p1, p2, p3 >= 0 with p1 + p2 + p3 <= 1")
    if p1 == 0:
        raise ValueError("closed form assumes Pr[one-bit flip] > 0")
    p01, p02, p10, p12 = two_level_transitions(n, p1, p2, p3)
    den = p12 * p01 + p10 * p02 + p12 * p02
    if den == 0:
        raise ValueError("no route to the optimum: denominator is zero")
    et0 = (p10 + p01 + p12) / den
    et1 = (p10 + p01 + p02) / den
    return et0, et1


@dataclass(frozen=True)
class TailPrediction:
    t: int
    main: float  # pi0_norm * lambda0_pred^t
    envelope: float  # sqrt(N) (1 - eps)^t
    negligible_after: int  # t beyond which envelope < 1e-6 * main


def tail_prediction(
    n: int, k: int, dist: AlphaDistribution, t: int, pi0_norm: float = 1.0
) -> TailPrediction:
    """Predicted survival probability at time t, with its error envelope."""
    if t < 0:
        raise ValueError("t must be >= 0")
    lam = lambda0_prediction(n, k, dist)
    eps = float(gap_bound(dist, k))
    N = plateau_size(n, k)
    sqrt_n = math.sqrt(N)
    # envelope/main = sqrt(N)/pi0 * ((1-eps)/lam)^t falls below 1e-6 at:
    ratio = (1 - eps) / lam
    thresh = math.ceil(math.log(1e-6 * pi0_norm / sqrt_n) / math.log(ratio))
    return TailPrediction(
        t=t,
        main=pi0_norm * lam**t,
        envelope=sqrt_n * (1 - eps) ** t,
        negligible_after=max(0, thresh),
    )


@dataclass(frozen=True)
class Prediction:
    n: int
    k: int
    asymptotic_ET: float
    leading_constant: float
    lambda0_pred: float
    eps: float
    pi0_norm: float = 1.0


def predict(n: int, k: int, dist: AlphaDistribution) -> Prediction:
    """All closed-form outputs for one (n, k, operator) instance."""
    et = asymptotic_runtime(n, k, dist)
    return Prediction(
        n=n,
        k=k,
        asymptotic_ET=et,
        leading_constant=et * math.factorial(k) / n**k,
        lambda0_pred=lambda0_prediction(n, k, dist),
        eps=float(gap_bound(dist, k)),
    )


TABLE1_ROWS = (
    ("rls", lambda k: OperatorSpec.rls()),
    ("stdbit gamma=1", lambda k: OperatorSpec.standard_bit(1)),
    ("stdbit gamma=k/e", lambda k: OperatorSpec.standard_bit(Fraction(k) / Fraction(math.e))),
    ("fastga beta=1.5", lambda k: OperatorSpec.fast_ga(1.5)),
    ("fastga beta=2", lambda k: OperatorSpec.fast_ga(2.0)),
    ("hh simple-random", lambda k: HyperHeuristicPolicy("simple_random")),
    ("hh random-gradient", lambda k: HyperHeuristicPolicy("random_gradient")),
)


def table1(ks=(2, 4, 6)):
    """Leading constants for the seven tabulated operators at each k.

    Returns a list of (row label, {k: constant}) pairs.
    """
    out = []
    for label, make in TABLE1_ROWS:
        out.append((label, {k: leading_constant(make(k), k) for k in ks}))
    return out
