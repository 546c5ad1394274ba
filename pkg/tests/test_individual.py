import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateau_ea.individual import (
    CapExceededError,
    IndividualChain,
    absorption_by_level,
    absorption_individual,
    build_individual,
    colex_rank,
    colex_unrank,
    commutation_report,
    dump_individual,
    phi,
    plateau_points,
    point_from_index,
    point_index,
    spectrum_inclusion_report,
)
from plateau_ea.levelchain import absorption_times, build as build_level
from plateau_ea.linalg import vec_mat
from plateau_ea.mutation import OperatorSpec, pmf_of

RLS = OperatorSpec.rls()
MIX = OperatorSpec.custom({1: Fraction(1, 2), 2: Fraction(1, 2)})
STDBIT1 = OperatorSpec.standard_bit(1)


def test_point_counts():
    levels, masks = plateau_points(8, 2)
    assert len(levels) == 36  # C(8,2) + C(8,1)
    assert levels.count(0) == 28 and levels.count(1) == 8
    assert len(set(masks)) == 36


def test_colex_rank_roundtrip():
    for r in (1, 2, 3):
        subsets = sorted(combinations(range(9), r), key=lambda s: tuple(reversed(s)))
        for rank, s in enumerate(subsets):
            assert colex_rank(s) == rank
            assert colex_unrank(rank, r) == s


def test_point_index_bijection():
    n, k = 9, 3
    levels, masks = plateau_points(n, k)
    for idx in range(len(levels)):
        zeros = point_from_index(n, k, idx)
        assert point_index(n, k, zeros) == idx
        mask = 0
        for p in zeros:
            mask |= 1 << p
        assert mask == masks[idx]
        assert len(zeros) == k - levels[idx]


def test_build_symmetry_exact():
    for spec in (RLS, MIX, STDBIT1):
        chain = build_individual(8, 2, pmf_of(spec, 8, exact=True), exact=True)
        N = chain.size
        for x in range(N):
            for y in range(N):
                assert chain.P[x][y] == chain.P[y][x]


def test_build_rows_sum_to_one_exact():
    chain = build_individual(8, 2, pmf_of(MIX, 8, exact=True), exact=True)
    for x in range(chain.size):
        assert sum(chain.P[x]) + chain.exit[x] == 1


def test_exit_at_top_level():
    n = 10
    dist = pmf_of(STDBIT1, n, exact=True)
    chain = build_individual(n, 2, dist, exact=True)
    for x in range(chain.size):
        if chain.levels[x] == 1:  # one zero left
            assert chain.exit[x] == dist.probs[1] / n
        else:
            assert chain.exit[x] == dist.probs[2] / math.comb(n, 2)


def test_transition_row_vs_enumeration():
    # enumerate all 2^6 flip subsets from one point and aggregate by target
    n, k = 6, 2
    dist = pmf_of(MIX, n, exact=True)
    chain = build_individual(n, k, dist, exact=True)
    x = 0  # some plateau point
    xmask = chain.zero_masks[x]
    mask_to_idx = {m: i for i, m in enumerate(chain.zero_masks)}
    row = [Fraction(0)] * chain.size
    ex = Fraction(0)
    stay = Fraction(0)
    for m in range(n + 1):
        pm = dist.probs[m]
        if pm == 0:
            continue
        share = Fraction(1, math.comb(n, m))
        for subset in combinations(range(n), m):
            fmask = 0
            for p in subset:
                fmask |= 1 << p
            new_zeros = xmask ^ fmask
            zc = new_zeros.bit_count()
            if zc == 0:
                ex += pm * share
            elif zc <= k:
                if new_zeros == xmask:
                    stay += pm * share
                else:
                    row[mask_to_idx[new_zeros]] += pm * share
            else:
                stay += pm * share
    assert chain.exit[x] == ex
    for y in range(chain.size):
        expect = stay if y == x else row[y]
        assert chain.P[x][y] == expect


def test_float_build_matches_exact():
    dist_e = pmf_of(STDBIT1, 8, exact=True)
    dist_f = pmf_of(STDBIT1, 8, exact=False)
    ce = build_individual(8, 2, dist_e, exact=True)
    cf = build_individual(8, 2, dist_f, exact=False)
    Pe = np.array([[float(v) for v in row] for row in ce.P])
    assert np.allclose(Pe, np.asarray(cf.P), atol=1e-14)
    assert np.allclose([float(v) for v in ce.exit], np.asarray(cf.exit), atol=1e-16)


def test_cap_enforced():
    with pytest.raises(CapExceededError):
        build_individual(30, 3, pmf_of(RLS, 30, exact=False), cap=2000)
    build_individual(14, 2, pmf_of(RLS, 14, exact=False), cap=2000)


def test_phi_uniform_and_linearity():
    n, k = 8, 2
    N = 36
    u = [Fraction(math.comb(n, k - j), N) for j in range(k)]
    img = phi(u, n, k)
    assert img == [Fraction(1, N)] * N
    zero = phi([Fraction(0)] * k, n, k)
    assert zero == [Fraction(0)] * N
    a, b = Fraction(2, 3), Fraction(-1, 5)
    x = [Fraction(1, 2), Fraction(1, 3)]
    y = [Fraction(1, 7), Fraction(2, 9)]
    lhs = phi([a * xi + b * yi for xi, yi in zip(x, y)], n, k)
    rhs = [a * xi + b * yi for xi, yi in zip(phi(x, n, k), phi(y, n, k))]
    assert lhs == rhs


@given(st.lists(st.fractions(min_value=-3, max_value=3), min_size=2, max_size=2))
def test_phi_manhattan_norm_invariant(x):
    img = phi(x, 8, 2)
    assert sum(abs(v) for v in img) == sum(abs(v) for v in x)


@pytest.mark.parametrize("n,k,spec", [(8, 2, RLS), (8, 2, STDBIT1), (8, 2, MIX), (9, 3, MIX)])
def test_commutation_exact(n, k, spec):
    rep = commutation_report(n, k, pmf_of(spec, n, exact=True), exact=True)
    assert rep.max_discrepancy == 0


def test_commutation_random_vectors_exact():
    # beyond the basis: arbitrary rational level vectors
    n, k = 8, 2
    dist = pmf_of(MIX, n, exact=True)
    level = build_level(n, k, dist)
    ind = build_individual(n, k, dist, exact=True)
    x = [Fraction(3, 7), Fraction(-2, 5)]
    lhs = phi(vec_mat(x, level.P), n, k)
    rhs = vec_mat(phi(x, n, k), ind.P)
    assert lhs == rhs


@pytest.mark.parametrize("n,k,spec", [(8, 2, RLS), (8, 2, MIX), (9, 3, MIX), (10, 2, STDBIT1)])
def test_spectrum_inclusion(n, k, spec):
    rep = spectrum_inclusion_report(n, k, pmf_of(spec, n, exact=True))
    assert rep.max_distance <= 1e-9
    # the Perron roots of both chains coincide
    ind = build_individual(n, k, pmf_of(spec, n, exact=False))
    lam_ind_max = float(np.linalg.eigvalsh(np.asarray(ind.P)).max())
    assert rep.level_eigenvalues[0] == pytest.approx(lam_ind_max, abs=1e-10)


def test_individual_chain_eigenvalues_real():
    ind = build_individual(8, 2, pmf_of(MIX, 8, exact=False))
    P = np.asarray(ind.P)
    lam = np.linalg.eigvals(P)
    assert np.max(np.abs(lam.imag)) < 1e-10  # symmetric, so real


def test_absorption_matches_level_chain():
    for n, k, spec in [(10, 2, RLS), (8, 2, MIX), (9, 3, MIX)]:
        dist = pmf_of(spec, n, exact=True)
        ind = build_individual(n, k, dist, exact=False)
        per_level, spread = absorption_by_level(ind)
        assert spread <= 1e-9
        level_times = [float(t) for t in absorption_times(build_level(n, k, dist))]
        for a, b in zip(per_level, level_times):
            assert abs(a - b) / b <= 1e-9
        if spec is RLS and n == 10:
            assert per_level[0] == pytest.approx(60.0, rel=1e-12)
            assert per_level[1] == pytest.approx(55.0, rel=1e-12)


def test_absorption_exit_only_variant():
    dist = pmf_of(RLS, 10, exact=False)
    chain = build_individual(10, 2, dist)
    N = chain.size
    zeroed = IndividualChain(
        n=10,
        k=2,
        exact=False,
        levels=chain.levels,
        zero_masks=chain.zero_masks,
        P=np.zeros((N, N)),
        exit=np.ones(N),
    )
    t = absorption_individual(zeroed)
    assert np.allclose(t, 1.0)


def test_absorption_exact_rational():
    dist = pmf_of(RLS, 8, exact=True)
    ind = build_individual(8, 2, dist, exact=True)
    t = absorption_individual(ind)
    level = absorption_times(build_level(8, 2, dist))
    for ti, lv in zip(t, ind.levels):
        assert ti == level[lv]  # bit-exact equality per level


def test_dump_individual_contains_bijection():
    chain = build_individual(6, 2, pmf_of(RLS, 6, exact=True), exact=True)
    text = dump_individual(chain)
    assert "point 0 level 0" in text
    assert text.count("point ") == chain.size
    assert text.count("\nP ") == chain.size
