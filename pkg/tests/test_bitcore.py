import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateau_ea.bitcore import (
    BitString,
    PlateauParams,
    fitness_of_onemax,
    level_of,
    onemax,
    onemax_after_flips,
    plateau_fitness,
    sample_level_point,
)

P10 = PlateauParams(10, 2)

# chi-square 99.9% quantile, 44 degrees of freedom (45 strings at level 0)
CHI2_999_DF44 = 78.74952422804303


def bs(s: str) -> BitString:
    return BitString.from01(s)


def test_params_validation():
    PlateauParams(10, 2)
    PlateauParams(7, 3)
    with pytest.raises(ValueError):
        PlateauParams(10, 1)  # k=1 is plain OneMax, out of scope
    with pytest.raises(ValueError):
        PlateauParams(10, 5)  # needs 2k < n
    with pytest.raises(ValueError):
        PlateauParams(4, 2)


def test_onemax_trivial():
    assert onemax(BitString.ones(10)) == 10
    assert onemax(BitString.zeros(10)) == 0
    assert onemax(bs("1111100000")) == 5


def test_plateau_fitness_cases():
    assert plateau_fitness(P10, BitString.ones(10)) == 10
    assert plateau_fitness(P10, bs("1111111110")) == 8  # 9 ones: on the plateau
    assert plateau_fitness(P10, bs("1111100000")) == 5  # below: plain count
    assert plateau_fitness(P10, bs("1111111100")) == 8  # boundary level 0


def test_plateau_fitness_rejects_length_mismatch():
    with pytest.raises(ValueError):
        plateau_fitness(P10, BitString.ones(9))
    with pytest.raises(ValueError):
        level_of(P10, BitString.ones(11))


@given(st.integers(0, (1 << 10) - 1), st.integers(0, (1 << 10) - 1))
def test_fitness_depends_only_on_onemax(m1, m2):
    x1, x2 = BitString(10, m1), BitString(10, m2)
    if onemax(x1) == onemax(x2):
        assert plateau_fitness(P10, x1) == plateau_fitness(P10, x2)


def test_fitness_monotone_and_optimum_unique():
    vals = [fitness_of_onemax(P10, c) for c in range(11)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[10] == 10
    assert max(vals[:10]) == 8
    for mask in range(1 << 10):
        x = BitString(10, mask)
        assert (plateau_fitness(P10, x) == 10) == (mask == (1 << 10) - 1)


def test_level_of():
    assert level_of(P10, bs("1111111110")) == 1
    assert level_of(P10, bs("1111111000")) is None  # 7 ones
    assert level_of(P10, BitString.ones(10)) == 2
    assert level_of(P10, bs("1111111100")) == 0


def test_level_of_iff_on_plateau():
    for mask in range(1 << 10):
        x = BitString(10, mask)
        lv = level_of(P10, x)
        assert (lv is not None) == (plateau_fitness(P10, x) >= 8)
        if lv is not None:
            assert onemax(x) == 8 + lv


@given(
    st.integers(0, (1 << 12) - 1),
    st.integers(0, (1 << 12) - 1),
)
def test_incremental_onemax_agrees_with_full(mask, flip):
    x = BitString(12, mask)
    assert onemax_after_flips(x, flip) == onemax(x.flip(flip))


def test_sample_level_point_optimum_is_deterministic():
    rng = random.Random(1)
    for _ in range(5):
        assert sample_level_point(P10, 2, rng) == BitString.ones(10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2), st.integers(0, 10**9))
def test_sample_level_point_postcondition(level, seed):
    x = sample_level_point(P10, level, random.Random(seed))
    assert onemax(x) == 8 + level


def test_sample_level_point_rejects_bad_level():
    with pytest.raises(ValueError):
        sample_level_point(P10, 3, random.Random(0))
    with pytest.raises(ValueError):
        sample_level_point(P10, -1, random.Random(0))


def test_sample_level_point_uniform_chi_square():
    # level 0 has C(10,2) = 45 points; compare 1e5 draws against uniform
    rng = random.Random(20240811)
    trials = 100_000
    counts = Counter(sample_level_point(P10, 0, rng).mask for _ in range(trials))
    assert len(counts) == math.comb(10, 2)
    expected = trials / 45
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < CHI2_999_DF44


def test_bitstring_immutability_and_identity():
    x = bs("10101")
    with pytest.raises(AttributeError):
        x.mask = 0
    assert x == bs("10101")
    assert x != bs("10100")
    assert hash(x) == hash(bs("10101"))
    assert x.to01() == "10101"
    assert x.flip(0b00001) == bs("00101")
