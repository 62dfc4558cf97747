import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nuca.configurations import Configuration
from nuca.decide import HOLDS, injectivity_oracle
from nuca.engine import evaluate, evaluate_batch, finite_configurations
from nuca.linear import (
    LinearAlphabet,
    LinearLocalRule,
    double_dual_check,
    dual,
    from_table,
    global_matrix,
    rank_mod_p,
    to_nuca,
    to_table,
)
from nuca.rules import AsymptoticallyConstant, LocalRule, SparseSingular
from nuca.universe import GroupUniverse

Z = GroupUniverse(1)
Z3 = GroupUniverse(0, (3,))
M = ((0,), (1,))


def test_alphabet_order():
    a = LinearAlphabet(2, 2)
    assert [a.vector(i) for i in range(4)] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert a.letter((1, 0)) == 2
    with pytest.raises(ValueError):
        LinearAlphabet(4, 1)


def test_xor_is_linear():
    r = LinearLocalRule(2, 1, M, ([[1]], [[1]]))
    assert to_table(r) == LocalRule(2, M, (0, 1, 1, 0))
    assert from_table(LocalRule(2, M, (0, 1, 1, 0)), 2, 1) == r
    assert from_table(LocalRule(2, M, (0, 0, 0, 1)), 2, 1) is None


def test_dual_single_exception():
    a = LinearLocalRule(3, 1, M, ([[1]], [[2]]))
    b = LinearLocalRule(3, 1, M, ([[0]], [[1]]))
    s = AsymptoticallyConstant(Z, a, {(0,): b})
    d = dual(s)
    assert d.memory == ((-1,), (0,))
    # s*(g, m) = s(gm, m^-1)^T: cells 0 and 1 see the exception
    assert d.support == {(0,), (1,)}
    assert d.rule_at((0,)).as_dict() == {(-1,): ((2,),)}
    assert d.rule_at((1,)).as_dict() == {(-1,): ((1,),), (0,): ((1,),)}


def test_dual_of_sparse_unsupported():
    a = LinearLocalRule(2, 1, M, ([[1]], [[0]]))
    with pytest.raises(NotImplementedError):
        dual(SparseSingular(Z, a, 4, a))


def test_rank_mod_p():
    assert rank_mod_p(np.eye(3, dtype=int), 2) == 3
    assert rank_mod_p(np.array([[1, 1], [1, 1]]), 2) == 1
    assert rank_mod_p(np.array([[1, 2], [2, 1]]), 3) == 1


def _random_config(rng, u, p, n, memory, k):
    def rule():
        return LinearLocalRule(p, n, memory, tuple(rng.integers(0, p, (n, n)) for _ in memory))
    cells = u.cells() if u.is_finite else sorted(u.ball(2))
    idx = rng.permutation(len(cells))[:k]
    return AsymptoticallyConstant(u, rule(), {cells[i]: rule() for i in idx})


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]), st.integers(1, 2), st.integers(0, 3))
def test_double_dual(seed, p, n, k):
    rng = np.random.default_rng(seed)
    s = _random_config(rng, Z, p, n, ((-1,), (0,), (2,)), k)
    assert double_dual_check(s)


@pytest.mark.parametrize("text", ["Z/3", "Z/4", "Z/2 * Z/2"])
def test_transpose_oracle(text):
    u = GroupUniverse.parse(text)
    rng = np.random.default_rng(7)
    for _ in range(5):
        s = _random_config(rng, u, 2, 2, tuple(u.cells()[:2]), 2)
        assert np.array_equal(global_matrix(dual(s)), global_matrix(s).T)


def test_global_matrix_matches_table_evaluation():
    rng = np.random.default_rng(1)
    s = _random_config(rng, Z3, 3, 1, ((0,), (1,)), 1)
    A = global_matrix(s)
    X = finite_configurations(Z3, 3)
    Y = evaluate_batch(to_nuca(s), X)
    assert np.array_equal(Y, (X @ A.T) % 3)


def test_invertibility_agrees_with_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(20):
        s = _random_config(rng, Z3, 2, 1, ((0,), (1,)), int(rng.integers(0, 3)))
        full = rank_mod_p(global_matrix(s), 2) == 3
        assert full == (injectivity_oracle(to_nuca(s)).verdict == HOLDS)


def test_to_nuca_evaluates_linearly():
    r = LinearLocalRule(2, 2, M, ([[1, 0], [1, 1]], [[0, 1], [0, 0]]))
    n = to_nuca(AsymptoticallyConstant.constant(Z, r))
    a = LinearAlphabet(2, 2)
    x = Configuration(Z, 0, {(0,): a.letter((1, 0)), (1,): a.letter((1, 1))})
    y = evaluate(n, x)
    assert a.vector(y[(0,)]) == r([(1, 0), (1, 1)])
