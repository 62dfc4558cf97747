"""The nine acceptance criteria, one test each, each printing a pass/fail line."""

import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from nuca.configurations import Configuration, Pattern, restrict
from nuca.decide import (
    HOLDS,
    REFUTED,
    injectivity_oracle,
    perturbation_invert,
    post_surjectivity_check,
    pre_injectivity_check,
    reversibility_search,
    stable_sweep,
    surjectivity_window,
    ubs_localize,
)
from nuca.engine import (
    Nuca,
    async_run,
    compose,
    evaluate,
    evaluate_batch,
    evaluate_window,
    finite_configurations,
    identity_check,
    iterate,
)
from nuca.linear import LinearAlphabet, LinearLocalRule, double_dual_check, dual, to_nuca
from nuca.rules import AsymptoticallyConstant, LocalRule, SparseSingular, induced_local_map, projection_rule
from nuca.suites import perturbation_catalog
from nuca.universe import GroupUniverse

Z = GroupUniverse(1)


@contextmanager
def criterion(capsys, number, title, limit):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {title}: {status} ({elapsed:.1f}s, limit {limit}s)")
    assert elapsed < limit, f"criterion {number} took {elapsed:.1f}s"


def random_rule(rng, q, memory):
    return LocalRule(q, memory, tuple(rng.randrange(q) for _ in range(q ** len(memory))))


def random_ac(rng, u, memory, max_exc, cells=None):
    cells = cells if cells is not None else (u.cells() if u.is_finite else sorted(u.ball(2)))
    k = rng.randint(0, min(max_exc, len(cells)))
    return AsymptoticallyConstant(u, random_rule(rng, 2, memory), {g: random_rule(rng, 2, memory) for g in rng.sample(cells, k)})


def coherent(n, x, E):
    """evaluate, evaluate_window and the induced local map agree on E."""
    u = n.universe
    full = restrict(evaluate(n, x), E)
    EM = u.product_set(E, n.memory)
    window = evaluate_window(n, restrict(x, EM), E)
    bm = induced_local_map(u, E, {g: n.rule_at(g) for g in E})
    local = bm.apply_pattern(x)
    return full == window == local


# 1 ---------------------------------------------------------------------------------


def test_engine_coherence(capsys):
    with criterion(capsys, 1, "engine coherence", 5):
        rng = random.Random(1)
        u = GroupUniverse(0, (4,))
        cells = u.cells()
        subsets = [[c for i, c in enumerate(cells) if mask >> i & 1] for mask in range(1, 16)]
        checked = 0
        for _ in range(30):
            memory = tuple(sorted(rng.sample(cells, 2)))
            n = Nuca(random_ac(rng, u, memory, 3))
            for row in finite_configurations(u, 2).tolist():
                x = Configuration(u, 0, dict(zip(cells, row)))
                for E in subsets + [[cells[0]]]:
                    assert coherent(n, x, E)
                    checked += 1
        assert checked == 30 * 16 * 16
        u2 = GroupUniverse(2)
        ball1, ball2, ball3 = sorted(u2.ball(1)), sorted(u2.ball(2)), sorted(u2.ball(3))
        for _ in range(200):
            memory = tuple(sorted(rng.sample(ball1, 2)))
            n = Nuca(random_ac(rng, u2, memory, 3, ball2))
            x = Configuration(u2, rng.randrange(2), {g: rng.randrange(2) for g in rng.sample(ball2, 4)})
            E = rng.sample(ball3, rng.randint(1, 4))
            assert coherent(n, x, E)


# 2 ---------------------------------------------------------------------------------


def test_composition_soundness(capsys):
    with criterion(capsys, 2, "composition soundness", 10):
        rng = random.Random(2)
        u = GroupUniverse(0, (6,))
        X = finite_configurations(u, 2)
        ball1 = sorted(u.ball(1))
        perturbed = 0
        for i in range(30):
            s = Nuca(random_ac(rng, u, tuple(sorted(rng.sample(ball1, 2))), 0 if i < 5 else 3))
            d = Nuca(random_ac(rng, u, tuple(sorted(rng.sample(ball1, 2))), 0 if i < 5 else 3))
            perturbed += not (s.rules.is_constant and d.rules.is_constant)
            c = compose(s, d)
            assert np.array_equal(evaluate_batch(c, X), evaluate_batch(s, evaluate_batch(d, X)))
        assert perturbed >= 20


# 3 ---------------------------------------------------------------------------------

SMALL = ["Z/2", "Z/3", "Z/4", "Z/5", "Z/6", "Z/7", "Z/8", "Z/2 * Z/2", "Z/2 * Z/4", "Z/2 * Z/2 * Z/2", "Z/2 * Z/3"]


def brute_identity(t, s, X):
    return np.array_equal(evaluate_batch(t, evaluate_batch(s, X)), X)


def test_identity_check_equivalence(capsys):
    with criterion(capsys, 3, "identity check vs brute force", 30):
        rng = random.Random(3)
        holds = 0
        for text in SMALL:
            u = GroupUniverse.parse(text)
            assert u.order <= 8
            X = finite_configurations(u, 2)
            ball1 = sorted(u.ball(1))
            for i in range(50):
                memory = tuple(sorted(rng.sample(ball1, min(2, len(ball1)))))
                s = Nuca(random_ac(rng, u, memory, 2))
                if i % 5 == 0:
                    rep = reversibility_search(s, 1)
                    t = rep.certificate.flat if rep.verdict == HOLDS else Nuca(random_ac(rng, u, memory, 2))
                elif i % 5 == 1:
                    perm = rng.choice([(0, 0, 1, 1), (0, 1, 0, 1), (1, 1, 0, 0), (1, 0, 1, 0)])
                    rule = LocalRule(2, ((0,) * u.dim, ball1[-1]), perm)
                    s = t = Nuca(AsymptoticallyConstant(u, projection_rule(2, rule.memory), {u.identity: rule}))
                else:
                    t = Nuca(random_ac(rng, u, tuple(sorted(rng.sample(ball1, min(2, len(ball1))))), 2))
                got = bool(identity_check(t, s))
                assert got == brute_identity(t, s, X), (text, i)
                holds += got
        assert holds > 0


# 4 and 5 ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def catalog():
    return [(label, n, reversibility_search(n, 2)) for label, n in perturbation_catalog()]


def test_reversible_inverts(capsys, catalog):
    with criterion(capsys, 4, "reversible implies invertible", 60):
        assert len(catalog) == 48
        inverted = 0
        for label, n, rev in catalog:
            if rev.verdict != HOLDS:
                continue
            inv = perturbation_invert(n, 2)
            assert inv.verdict == HOLDS, label
            obj = inv.certificate
            assert obj.kind == "two-sided" and obj.verify(n, radius=3), label
            assert identity_check(obj.flat, n) and identity_check(n, obj.flat), label
            inverted += 1
        assert inverted > 0


def test_window_images(capsys, catalog):
    with criterion(capsys, 5, "no window witness for reversible cases", 60):
        windows = 0
        for label, n, rev in catalog:
            if rev.verdict != HOLDS:
                continue
            for k in range(5):
                rep = surjectivity_window(n, Z.ball(k))
                assert rep.verdict != REFUTED, (label, k, rep.witness)
                windows += 1
        assert windows > 0


# 6 ---------------------------------------------------------------------------------


def test_localization_contract(capsys):
    with criterion(capsys, 6, "localization contract", 10):
        M = ((0,), (1,))
        xor = LocalRule(2, M, (0, 1, 1, 0))
        s = Nuca(SparseSingular(Z, projection_rule(2, M), 4, xor))
        for k in (1, 2, 3):
            E = Z.ball(k)
            loc = ubs_localize(s, s, E)
            assert all(loc.p.rule_at(g) == s.rule_at(g) for g in E)
            assert all(loc.q.rule_at(g) == s.rule_at(g) for g in E)
            assert identity_check(loc.q, loc.p)


# 7 ---------------------------------------------------------------------------------


def test_post_and_pre_implies_stably_invertible(capsys):
    with criterion(capsys, 7, "post-surjective and pre-injective implies stably invertible", 60):
        rng = random.Random(7)
        hits = 0
        for _ in range(500):
            u = GroupUniverse(0, (rng.randint(2, 4),))
            memory = tuple(sorted(rng.sample(sorted(u.ball(1)), 2)))
            n = Nuca(random_ac(rng, u, memory, 2))
            if post_surjectivity_check(n).verdict == HOLDS and pre_injectivity_check(n).verdict == HOLDS:
                hits += 1
                assert stable_sweep(n, "invertible").verdict == HOLDS
        assert hits > 0


# 8 ---------------------------------------------------------------------------------


def random_linear(rng, u, p, n, memory, max_exc):
    def rule():
        return LinearLocalRule(p, n, memory, tuple(
            [[rng.randrange(p) for _ in range(n)] for _ in range(n)] for _ in memory))
    cells = u.cells() if u.is_finite else sorted(u.ball(2))
    return AsymptoticallyConstant(u, rule(), {g: rule() for g in rng.sample(cells, rng.randint(0, min(max_exc, len(cells))))})


def matrix_by_evaluation(s):
    """Global matrix of sigma_s computed by evaluating the table automaton on unit vectors."""
    u = s.universe
    b = s.background
    alph = LinearAlphabet(b.p, b.n)
    n = to_nuca(s)
    cells = u.cells()
    size = b.n * len(cells)
    cols = []
    for j in range(size):
        vec = np.zeros(size, dtype=int)
        vec[j] = 1
        x = Configuration(u, 0, {g: alph.letter(vec[i * b.n:(i + 1) * b.n]) for i, g in enumerate(cells)})
        y = evaluate(n, x)
        cols.append(np.concatenate([alph.vector(y[g]) for g in cells]))
    return np.array(cols).T


def test_duality(capsys):
    with criterion(capsys, 8, "duality", 30):
        rng = random.Random(8)
        universes = [Z, GroupUniverse(2), GroupUniverse(0, (5,)), GroupUniverse(1, (3,))]
        for _ in range(200):
            u = rng.choice(universes)
            memory = tuple(sorted(rng.sample(sorted(u.ball(1)), rng.randint(1, 3))))
            s = random_linear(rng, u, rng.choice((2, 3)), rng.randint(1, 2), memory, 3)
            assert double_dual_check(s)
        for text in ("Z/3", "Z/4", "Z/2 * Z/2"):
            u = GroupUniverse.parse(text)
            for _ in range(10):
                memory = tuple(sorted(rng.sample(u.cells(), rng.randint(1, u.order))))
                s = random_linear(rng, u, rng.choice((2, 3)), rng.randint(1, 2), memory, u.order)
                assert np.array_equal(matrix_by_evaluation(dual(s)), matrix_by_evaluation(s).T)
        invertible = 0
        for _ in range(200):
            u = GroupUniverse.parse(rng.choice(("Z/2", "Z/3", "Z/4", "Z/2 * Z/2")))
            memory = tuple(sorted(rng.sample(u.cells(), rng.randint(1, min(2, u.order)))))
            s = random_linear(rng, u, rng.choice((2, 3)), 1, memory, 2)
            a = injectivity_oracle(to_nuca(s)).verdict == HOLDS
            b = injectivity_oracle(to_nuca(dual(s))).verdict == HOLDS
            assert a == b
            invertible += a
        assert 0 < invertible < 200


# 9 ---------------------------------------------------------------------------------


def test_async_reduction(capsys):
    with criterion(capsys, 9, "asynchronous reduction", 10):
        rng = random.Random(9)
        u = GroupUniverse(0, (6,))
        memory = ((5,), (0,), (1,))  # -1, 0, 1
        everything = u.enumerate_all()
        for _ in range(20):
            rule = random_rule(rng, 2, memory)
            x0 = Configuration(u, 0, {g: rng.randrange(2) for g in u.cells()})
            assert async_run(rule, [everything] * 10, x0) == iterate(Nuca.constant(u, rule), x0, 10)
            a = rng.choice(u.cells())
            b = u.mul(a, (rng.choice((2, 3, 4)),))
            assert b not in u.product_set([a], memory) and a not in u.product_set([b], memory)
            assert async_run(rule, [{a}, {b}], x0) == async_run(rule, [{b}, {a}], x0)
