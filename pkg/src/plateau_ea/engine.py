"""The (1+1) EA and its hyper-heuristic variants, with a Monte Carlo harness.

Each iteration mutates the current individual, evaluates the offspring, and
accepts it when its fitness is at least the parent's. The runtime T counts
offspring evaluations up to and including the one that first evaluates the
all-ones optimum (the initial individual's evaluation is not counted; the
greedy hyper-heuristic evaluates two offspring per iteration and pays 2).

Trials are embarrassingly parallel and bit-reproducible: trial i runs on its
own SplitMix64 stream (see stream_seed), so results do not depend
on scheduling or thread count. The inner loop is JIT-compiled with numba;
`reference_run` is a pure-Python mirror that consumes the identical stream
and is used by the tests to cross-validate the compiled kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import config as _numba_config
from numba import get_num_threads, njit, prange, set_num_threads

from .bitcore import BitString, PlateauParams
from .mutation import AlphaDistribution, HyperHeuristicPolicy, OperatorSpec, pmf_of

U64 = np.uint64
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0**-53

_START_RANDOM, _START_PLATEAU, _START_LEVEL, _START_STRING = 0, 1, 2, 3
_POLICIES = {"simple_random": 0, "random_gradient": 1, "permutation": 2, "greedy": 3}

MAX_ITER_CAP = 1 << 62


# ---------------------------------------------------------------- RNG


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford mix13)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def stream_seed(seed: int, trial: int) -> int:
    """Initial stream state for a trial.

    Trial i gets the (i+1)-th output of a master SplitMix64 generator seeded
    with `seed`, so nearby seeds produce fully decorrelated stream sets
    (seed XOR i would merely permute the low trial indices).
    """
    return mix64((seed + (trial + 1) * _GOLDEN) & _MASK64)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(_MIX_A)
    z = (z ^ (z >> U64(27))) * U64(_MIX_B)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _next(state):
    state = state + U64(_GOLDEN)
    return state, _mix64(state)


@njit(cache=True, inline="always")
def _unit(z):
    return (z >> U64(11)) * _INV_2_53


# ---------------------------------------------------------------- kernels


@njit(cache=True, inline="always")
def _fit(ones, n, k):
    if ones <= n - k:
        return ones
    if ones == n:
        return n
    return n - k


@njit(cache=True)
def _start(state, n, k, x, idx, start_mode, start_level, level_cum):
    """Initialize x in place; returns (state, ones)."""
    W = x.shape[0]
    for w in range(W):
        x[w] = U64(0)
    if start_mode == _START_RANDOM:
        ones = 0
        for p in range(n):
            state, z = _next(state)
            if z & U64(1):
                x[p >> 6] |= U64(1) << U64(p & 63)
                ones += 1
        return state, ones
    # plateau-uniform or fixed level: all ones minus a uniform zero set
    lvl = start_level
    if start_mode == _START_PLATEAU:
        state, z = _next(state)
        u = _unit(z)
        lvl = 0
        while lvl < k - 1 and u >= level_cum[lvl]:
            lvl += 1
    for w in range(W):
        x[w] = U64(0xFFFFFFFFFFFFFFFF)
    extra = W * 64 - n
    if extra > 0:
        x[W - 1] = x[W - 1] >> U64(extra)
    zeros = k - lvl
    for t in range(zeros):
        state, z = _next(state)
        j = t + np.int64(z % U64(n - t))
        tmp = idx[t]
        idx[t] = idx[j]
        idx[j] = tmp
        p = idx[t]
        x[p >> 6] ^= U64(1) << U64(p & 63)
    return state, n - zeros


@njit(cache=True)
def _trial_std(state, n, k, cdf, start_mode, start_level, start_words, level_cum, max_iters):
    W = (n + 63) >> 6
    x = np.empty(W, np.uint64)
    idx = np.empty(n, np.int64)
    for i in range(n):
        idx[i] = i
    if start_mode == _START_STRING:
        ones = 0
        for w in range(W):
            x[w] = start_words[w]
        for p in range(n):
            if x[p >> 6] & (U64(1) << U64(p & 63)):
                ones += 1
    else:
        state, ones = _start(state, n, k, x, idx, start_mode, start_level, level_cum)

    nk = n - k
    fx = _fit(ones, n, k)
    entry = np.int64(-1)
    if ones >= nk:
        entry = 0
    T = np.int64(0)
    if ones == n:
        return T, entry, True
    while T < max_iters:
        state, z = _next(state)
        u = _unit(z)
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) >> 1
            if cdf[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        m = lo
        dones = 0
        for t in range(m):
            state, z = _next(state)
            j = t + np.int64(z % U64(n - t))
            tmp = idx[t]
            idx[t] = idx[j]
            idx[j] = tmp
            p = idx[t]
            w = p >> 6
            b = U64(1) << U64(p & 63)
            if x[w] & b:
                dones -= 1
            else:
                dones += 1
            x[w] ^= b
        ones_y = ones + dones
        T += 1
        fy = _fit(ones_y, n, k)
        if fy >= fx:
            ones = ones_y
            fx = fy
            if entry < 0 and ones >= nk:
                entry = T
            if ones == n:
                return T, entry, True
        else:
            for t in range(m):
                p = idx[t]
                x[p >> 6] ^= U64(1) << U64(p & 63)
    return max_iters, entry, False


@njit(cache=True)
def _trial_hyper(state, n, k, policy, start_mode, start_level, start_words, level_cum, max_iters):
    W = (n + 63) >> 6
    x = np.empty(W, np.uint64)
    idx = np.empty(n, np.int64)
    for i in range(n):
        idx[i] = i
    if start_mode == _START_STRING:
        ones = 0
        for w in range(W):
            x[w] = start_words[w]
        for p in range(n):
            if x[p >> 6] & (U64(1) << U64(p & 63)):
                ones += 1
    else:
        state, ones = _start(state, n, k, x, idx, start_mode, start_level, level_cum)

    nk = n - k
    fx = _fit(ones, n, k)
    entry = np.int64(-1)
    if ones >= nk:
        entry = 0
    T = np.int64(0)
    if ones == n:
        return T, entry, True

    last_op = 0  # random gradient: previous operator, 0 = draw afresh
    perm_first = 1
    if policy == 2:
        state, z = _next(state)
        perm_first = 1 if (z & U64(1)) == U64(0) else 2
    itno = 0

    while T < max_iters:
        if policy == 3:
            # greedy: both low-level operators, one-bit offspring evaluated first
            state, z = _next(state)
            pos1 = np.int64(z % U64(n))
            w1 = pos1 >> 6
            b1 = U64(1) << U64(pos1 & 63)
            ones1 = ones - 1 if x[w1] & b1 else ones + 1
            T += 1
            if ones1 == n:
                x[w1] ^= b1
                if entry < 0:
                    entry = T
                return T, entry, True
            state, z = _next(state)
            pa = np.int64(z % U64(n))
            state, z = _next(state)
            pb = np.int64(z % U64(n - 1))
            if pb >= pa:
                pb += 1
            d2 = 0
            wa = pa >> 6
            ba = U64(1) << U64(pa & 63)
            wb = pb >> 6
            bb = U64(1) << U64(pb & 63)
            d2 += -1 if x[wa] & ba else 1
            d2 += -1 if x[wb] & bb else 1
            ones2 = ones + d2
            T += 1
            f1 = _fit(ones1, n, k)
            f2 = _fit(ones2, n, k)
            if ones2 == n:
                win = 2
            elif ones1 == n:
                win = 1
            elif f1 > f2:
                win = 1
            elif f2 > f1:
                win = 2
            else:
                state, z = _next(state)
                win = 1 if (z & U64(1)) == U64(0) else 2
            fw = f1 if win == 1 else f2
            if fw >= fx:
                if win == 1:
                    x[w1] ^= b1
                    ones = ones1
                else:
                    x[wa] ^= ba
                    x[wb] ^= bb
                    ones = ones2
                fx = fw
                if entry < 0 and ones >= nk:
                    entry = T
                if ones == n:
                    return T, entry, True
            continue

        # single-offspring policies select the flip count m
        if policy == 0:
            state, z = _next(state)
            m = 1 if (z & U64(1)) == U64(0) else 2
        elif policy == 1:
            if last_op == 0:
                state, z = _next(state)
                m = 1 if (z & U64(1)) == U64(0) else 2
            else:
                m = last_op
        else:
            m = perm_first if (itno & 1) == 0 else 3 - perm_first
        itno += 1

        dones = 0
        for t in range(m):
            state, z = _next(state)
            j = t + np.int64(z % U64(n - t))
            tmp = idx[t]
            idx[t] = idx[j]
            idx[j] = tmp
            p = idx[t]
            w = p >> 6
            b = U64(1) << U64(p & 63)
            if x[w] & b:
                dones -= 1
            else:
                dones += 1
            x[w] ^= b
        ones_y = ones + dones
        T += 1
        fy = _fit(ones_y, n, k)
        gained = fy > fx
        if fy >= fx:
            ones = ones_y
            fx = fy
            if entry < 0 and ones >= nk:
                entry = T
            if ones == n:
                return T, entry, True
        else:
            for t in range(m):
                p = idx[t]
                x[p >> 6] ^= U64(1) << U64(p & 63)
        if policy == 1:
            last_op = m if gained else 0
    return max_iters, entry, False


@njit(cache=True, parallel=True)
def _trials_std(seed, trials, n, k, cdf, start_mode, start_level, start_words, level_cum, max_iters, out_T, out_entry, out_succ):
    for tr in prange(trials):
        st = _mix64(U64(seed) + (U64(tr) + U64(1)) * U64(_GOLDEN))
        T, entry, succ = _trial_std(
            st, n, k, cdf, start_mode, start_level, start_words, level_cum, max_iters
        )
        out_T[tr] = T
        out_entry[tr] = entry
        out_succ[tr] = 1 if succ else 0


@njit(cache=True, parallel=True)
def _trials_hyper(seed, trials, n, k, policy, start_mode, start_level, start_words, level_cum, max_iters, out_T, out_entry, out_succ):
    for tr in prange(trials):
        st = _mix64(U64(seed) + (U64(tr) + U64(1)) * U64(_GOLDEN))
        T, entry, succ = _trial_hyper(
            st, n, k, policy, start_mode, start_level, start_words, level_cum, max_iters
        )
        out_T[tr] = T
        out_entry[tr] = entry
        out_succ[tr] = 1 if succ else 0


# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class StartPolicy:
    """Where the run begins.

    kind: "random" (uniform bit string), "plateau" (uniform over all plateau
    points), "level" (uniform on one level; level k is the optimum), or
    "string" (a fixed bit string).
    """

    kind: str
    level: int | None = None
    bits: BitString | None = None

    @classmethod
    def random_string(cls) -> "StartPolicy":
        return cls("random")

    @classmethod
    def plateau_uniform(cls) -> "StartPolicy":
        return cls("plateau")

    @classmethod
    def fixed_level(cls, level: int) -> "StartPolicy":
        return cls("level", level=level)

    @classmethod
    def fixed_string(cls, bits: BitString) -> "StartPolicy":
        return cls("string", bits=bits)

    def describe(self) -> str:
        if self.kind == "level":
            return f"level:{self.level}"
        if self.kind == "string":
            return f"string:{self.bits.to01()}"
        return self.kind


@dataclass(frozen=True)
class RunConfig:
    params: PlateauParams
    operator: OperatorSpec | HyperHeuristicPolicy
    start: StartPolicy
    seed: int = 0
    max_iters: int | None = None

    def resolved_max_iters(self) -> int:
        if self.max_iters is not None:
            if self.max_iters <= 0:
                raise ValueError("max_iters must be positive")
            return min(self.max_iters, MAX_ITER_CAP)
        n, k = self.params.n, self.params.k
        return min(100 * n**k // math.factorial(k), MAX_ITER_CAP)


@dataclass(frozen=True)
class RunResult:
    T: int
    plateau_entry: int | None
    succeeded: bool


@dataclass(frozen=True)
class TrialSummary:
    trials: int
    mean: float
    variance: float
    std_error: float
    failures: int
    min: int
    max: int
    tail_grid: tuple[int, ...]
    tail_counts: tuple[int, ...]
    samples: np.ndarray | None

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.trials


def _level_cum(n: int, k: int) -> np.ndarray:
    sizes = [math.comb(n, k - i) for i in range(k)]
    total = sum(sizes)
    acc = 0.0
    out = np.empty(k, dtype=np.float64)
    for i, c in enumerate(sizes):
        acc += c / total
        out[i] = acc
    out[k - 1] = 1.0
    return out


def _kernel_args(cfg: RunConfig):
    n, k = cfg.params.n, cfg.params.k
    start = cfg.start
    start_words = np.zeros((n + 63) // 64, dtype=np.uint64)
    level_cum = _level_cum(n, k)
    if start.kind == "random":
        mode, level = _START_RANDOM, 0
    elif start.kind == "plateau":
        mode, level = _START_PLATEAU, 0
    elif start.kind == "level":
        if start.level is None or not 0 <= start.level <= k:
            raise ValueError(f"start level must be in [0..{k}]")
        mode, level = _START_LEVEL, start.level
    elif start.kind == "string":
        if start.bits is None or start.bits.n != n:
            raise ValueError("fixed-string start needs a bit string of length n")
        mode, level = _START_STRING, 0
        m = start.bits.mask
        for w in range(start_words.shape[0]):
            start_words[w] = (m >> (64 * w)) & _MASK64
    else:
        raise ValueError(f"unknown start kind {start.kind!r}")

    if isinstance(cfg.operator, HyperHeuristicPolicy):
        return ("hyper", _POLICIES[cfg.operator.kind], mode, level, start_words, level_cum)
    dist = pmf_of(cfg.operator, n, exact=False)
    cdf = np.array(dist.cdf, dtype=np.float64)
    return ("std", cdf, mode, level, start_words, level_cum)


def run_once(cfg: RunConfig, trial: int = 0) -> RunResult:
    """Execute one run on the trial's deterministic stream."""
    n, k = cfg.params.n, cfg.params.k
    kind, op_arg, mode, level, words, cum = _kernel_args(cfg)
    st = U64(stream_seed(cfg.seed, trial))
    mi = cfg.resolved_max_iters()
    if kind == "std":
        T, entry, succ = _trial_std(st, n, k, op_arg, mode, level, words, cum, mi)
    else:
        T, entry, succ = _trial_hyper(st, n, k, op_arg, mode, level, words, cum, mi)
    return RunResult(T=int(T), plateau_entry=None if entry < 0 else int(entry), succeeded=bool(succ))


def run_hyper(cfg: RunConfig, trial: int = 0) -> RunResult:
    """run_once restricted to hyper-heuristic configurations."""
    if not isinstance(cfg.operator, HyperHeuristicPolicy):
        raise ValueError("run_hyper needs a HyperHeuristicPolicy operator")
    return run_once(cfg, trial)


def run_trials(
    cfg: RunConfig,
    trials: int,
    threads: int | None = None,
    tail_grid=(),
    keep_samples: bool = True,
) -> TrialSummary:
    """Independent runs on per-trial streams; output is thread-count invariant."""
    if trials < 1:
        raise ValueError("need at least one trial")
    grid = tuple(int(t) for t in tail_grid)
    if list(grid) != sorted(grid) or (grid and grid[0] < 0):
        raise ValueError("tail grid must be sorted and non-negative")
    n, k = cfg.params.n, cfg.params.k
    kind, op_arg, mode, level, words, cum = _kernel_args(cfg)
    mi = cfg.resolved_max_iters()
    out_T = np.empty(trials, dtype=np.int64)
    out_entry = np.empty(trials, dtype=np.int64)
    out_succ = np.empty(trials, dtype=np.uint8)
    seed = U64(cfg.seed & _MASK64)

    old_threads = get_num_threads()
    if threads is not None:
        set_num_threads(max(1, min(threads, _numba_config.NUMBA_NUM_THREADS)))
    try:
        if kind == "std":
            _trials_std(seed, trials, n, k, op_arg, mode, level, words, cum, mi, out_T, out_entry, out_succ)
        else:
            _trials_hyper(seed, trials, n, k, op_arg, mode, level, words, cum, mi, out_T, out_entry, out_succ)
    finally:
        if threads is not None:
            set_num_threads(old_threads)

    mean = float(out_T.mean())
    variance = float(out_T.var(ddof=1)) if trials > 1 else 0.0
    return TrialSummary(
        trials=trials,
        mean=mean,
        variance=variance,
        std_error=math.sqrt(variance / trials),
        failures=int(trials - out_succ.sum()),
        min=int(out_T.min()),
        max=int(out_T.max()),
        tail_grid=grid,
        tail_counts=tuple(int(np.count_nonzero(out_T > t)) for t in grid),
        samples=out_T if keep_samples else None,
    )


def empirical_tail(summary: TrialSummary, t: int) -> float:
    """Fraction of runs with T > t; t must be on the recorded grid."""
    try:
        i = summary.tail_grid.index(t)
    except ValueError:
        raise ValueError(f"t={t} is not on the recorded grid {summary.tail_grid}") from None
    return summary.tail_counts[i] / summary.trials


# ---------------------------------------------------------------- reference mirror


def _next_py(state: int):
    state = (state + _GOLDEN) & _MASK64
    return state, mix64(state)


def reference_run(cfg: RunConfig, trial: int = 0, record=None) -> RunResult:
    """Pure-Python mirror of the kernels, consuming the identical stream.

    Slow; exists so tests can check the compiled path bit-for-bit. When
    `record` is a list, the accepted fitness after every iteration is
    appended to it.
    """
    n, k = cfg.params.n, cfg.params.k
    kind, op_arg, mode, level, words, cum = _kernel_args(cfg)
    state = stream_seed(cfg.seed, trial)
    mi = cfg.resolved_max_iters()
    idx = list(range(n))
    mask_all = (1 << n) - 1

    x = 0
    if mode == _START_STRING:
        x = cfg.start.bits.mask
        ones = x.bit_count()
    elif mode == _START_RANDOM:
        ones = 0
        for p in range(n):
            state, z = _next_py(state)
            if z & 1:
                x |= 1 << p
                ones += 1
    else:
        lvl = level
        if mode == _START_PLATEAU:
            state, z = _next_py(state)
            u = (z >> 11) * _INV_2_53
            lvl = 0
            while lvl < k - 1 and u >= cum[lvl]:
                lvl += 1
        x = mask_all
        for t in range(k - lvl):
            state, z = _next_py(state)
            j = t + z % (n - t)
            idx[t], idx[j] = idx[j], idx[t]
            x ^= 1 << idx[t]
        ones = n - (k - lvl)

    def fit(c):
        return c if c <= n - k else (n if c == n else n - k)

    fx = fit(ones)
    entry = 0 if ones >= n - k else -1
    T = 0
    if ones == n:
        return RunResult(0, entry, True)

    policy = op_arg if kind == "hyper" else None
    last_op = 0
    perm_first = 1
    if policy == 2:
        state, z = _next_py(state)
        perm_first = 1 if (z & 1) == 0 else 2
    itno = 0

    while T < mi:
        if policy == 3:
            state, z = _next_py(state)
            pos1 = z % n
            ones1 = ones - 1 if (x >> pos1) & 1 else ones + 1
            T += 1
            if ones1 == n:
                if entry < 0:
                    entry = T
                return RunResult(T, entry, True)
            state, z = _next_py(state)
            pa = z % n
            state, z = _next_py(state)
            pb = z % (n - 1)
            if pb >= pa:
                pb += 1
            d2 = (-1 if (x >> pa) & 1 else 1) + (-1 if (x >> pb) & 1 else 1)
            ones2 = ones + d2
            T += 1
            f1, f2 = fit(ones1), fit(ones2)
            if ones2 == n:
                win = 2
            elif ones1 == n:
                win = 1
            elif f1 > f2:
                win = 1
            elif f2 > f1:
                win = 2
            else:
                state, z = _next_py(state)
                win = 1 if (z & 1) == 0 else 2
            fw = f1 if win == 1 else f2
            if fw >= fx:
                if win == 1:
                    x ^= 1 << pos1
                    ones = ones1
                else:
                    x ^= (1 << pa) | (1 << pb)
                    ones = ones2
                fx = fw
                if entry < 0 and ones >= n - k:
                    entry = T
                if ones == n:
                    return RunResult(T, entry, True)
            if record is not None:
                record.append(fx)
            continue

        if policy is None:
            state, z = _next_py(state)
            u = (z >> 11) * _INV_2_53
            lo, hi = 0, n
            while lo < hi:
                mid = (lo + hi) >> 1
                if op_arg[mid] > u:
                    hi = mid
                else:
                    lo = mid + 1
            m = lo
        elif policy == 0:
            state, z = _next_py(state)
            m = 1 if (z & 1) == 0 else 2
        elif policy == 1:
            if last_op == 0:
                state, z = _next_py(state)
                m = 1 if (z & 1) == 0 else 2
            else:
                m = last_op
        else:
            m = perm_first if (itno & 1) == 0 else 3 - perm_first
        itno += 1

        flip = 0
        for t in range(m):
            state, z = _next_py(state)
            j = t + z % (n - t)
            idx[t], idx[j] = idx[j], idx[t]
            flip |= 1 << idx[t]
        y = x ^ flip
        ones_y = y.bit_count()
        T += 1
        fy = fit(ones_y)
        gained = fy > fx
        if fy >= fx:
            x, ones, fx = y, ones_y, fy
            if entry < 0 and ones >= n - k:
                entry = T
            if ones == n:
                return RunResult(T, entry, True)
        if record is not None:
            record.append(fx)
        if policy == 1:
            last_op = m if gained else 0
    return RunResult(mi, None if entry < 0 else entry, False)
