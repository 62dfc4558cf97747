import pytest

from nuca.configurations import Configuration
from nuca.decide import (
    HOLDS,
    INCONCLUSIVE,
    REFUTED,
    extract_block_map,
    injectivity_oracle,
    perturbation_invert,
    post_surjectivity_check,
    pre_injectivity_check,
    product_decomposition,
    reversibility_search,
    stable_sweep,
    surjectivity_window,
    ubs_localize,
)
from nuca.engine import Nuca, evaluate, identity_check
from nuca.rules import LocalRule, SparseSingular, projection_rule
from nuca.universe import GroupUniverse

Z = GroupUniverse(1)
Z3 = GroupUniverse(0, (3,))
Z5 = GroupUniverse(0, (5,))
M = ((0,), (1,))
PI = projection_rule(2, M)
XOR = LocalRule(2, M, (0, 1, 1, 0))
SHIFT = LocalRule(2, M, (0, 1, 0, 1))


def test_injectivity_oracle_examples():
    assert injectivity_oracle(Nuca.constant(Z3, PI)).verdict == HOLDS
    rep = injectivity_oracle(Nuca.constant(Z3, XOR))
    assert rep.verdict == REFUTED and rep.exit_code == 1
    assert "witness=x:000 y:111 image:000" in rep.lines()
    assert injectivity_oracle(Nuca.constant(Z5, SHIFT)).verdict == HOLDS


def test_surjectivity_window_examples():
    assert surjectivity_window(Nuca.constant(Z, PI), Z.ball(2)).verdict == INCONCLUSIVE
    rep = surjectivity_window(Nuca.constant(Z, XOR), [(0,)])
    assert rep.verdict == INCONCLUSIVE and rep.details["window_surjective"]
    rep = surjectivity_window(Nuca.constant(Z3, XOR), Z3.cells())
    assert rep.verdict == REFUTED
    # the image is the even-parity words; 001 is the first word outside it
    assert rep.witness["unreached"].word() == "001"
    assert rep.details["window_image_size"] == 4


def test_reversibility_examples():
    rep = reversibility_search(Nuca.constant(Z, SHIFT), 1)
    assert rep.verdict == HOLDS and rep.bounds["radius"] == 1
    t = rep.certificate.flat
    x = Configuration(Z, 0, {(2,): 1, (5,): 1})
    assert t.rule_at((0,))([x[(g,)] for g in range(-1, 2)]) == x[(-1,)]
    s = Nuca.perturbed(Z, PI, {(0,): XOR})
    rep = reversibility_search(s, 2)
    assert rep.verdict == HOLDS and identity_check(rep.certificate.flat, s)
    assert reversibility_search(Nuca.constant(Z, XOR), 2).verdict == INCONCLUSIVE


def test_extract_block_map_example():
    q = Nuca.perturbed(Z, PI, {(0,): XOR})
    phi = extract_block_map(q, [(0,), (1,)], [(0,)])
    assert {w: phi(w) for w in [(0, 0), (0, 1), (1, 0), (1, 1)]} == {
        (0, 0): (0, 0), (0, 1): (1, 1), (1, 0): (1, 0), (1, 1): (0, 1)}
    assert phi.is_bijective()
    ident = extract_block_map(Nuca.constant(Z, PI), [(0,), (1,)], [])
    assert all(ident(w) == w for w in [(0, 0), (0, 1), (1, 0), (1, 1)])


def test_extract_block_map_precondition():
    q = Nuca.perturbed(Z, PI, {(0,): XOR})
    with pytest.raises(ValueError, match=r"\(1\)"):
        extract_block_map(q, [(0,)], [(0,)])
    with pytest.raises(ValueError, match=r"\(0\)"):
        extract_block_map(q, [(0,), (1,)], [])


def test_perturbation_invert_involution():
    s = Nuca.perturbed(Z, PI, {(0,): XOR})
    rep = perturbation_invert(s, 2)
    assert rep.verdict == HOLDS
    inv = rep.certificate
    assert inv.verify(s, radius=3)
    assert identity_check(inv.flat, s) and identity_check(s, inv.flat)


def test_perturbation_invert_degenerate():
    s = Nuca.perturbed(Z, SHIFT, {(0,): LocalRule.from_function(2, M, lambda v: v[1] ^ (v[0] & 0))})
    assert s.rules.is_constant
    rep = perturbation_invert(s, 2)
    assert rep.verdict == HOLDS
    d = rep.certificate.flat
    x = Configuration(Z, 0, {(3,): 1})
    assert evaluate(d, x) == Configuration(Z, 0, {(4,): 1})


def test_perturbation_invert_noninvertible_background():
    rep = perturbation_invert(Nuca.perturbed(Z, XOR, {(0,): PI}), 2)
    assert rep.verdict == INCONCLUSIVE
    assert "background CA not invertible" in rep.details["reason"]


def test_perturbation_invert_refutes_collapse():
    zero = LocalRule(2, M, (0, 0, 0, 0))
    s = Nuca.perturbed(Z, SHIFT, {(0,): zero})
    rep = perturbation_invert(s, 2)
    assert rep.verdict == REFUTED
    assert evaluate(s, rep.witness["x"]) == evaluate(s, rep.witness["y"])


def test_ubs_localize_contracts():
    s = Nuca(SparseSingular(Z, PI, 4, XOR))
    for k in (1, 2):
        E = Z.ball(k)
        loc = ubs_localize(s, s, E)
        assert all(loc.p.rule_at(g) == s.rule_at(g) and loc.q.rule_at(g) == s.rule_at(g) for g in E)
        assert identity_check(loc.q, loc.p)
        assert loc.g0 not in Z.product_set(loc.F, loc.window)


def test_ubs_localize_already_local():
    s = Nuca.perturbed(Z, PI, {(0,): XOR})
    loc = ubs_localize(s, s, Z.ball(1))
    assert loc.p.rules.support == s.rules.support


def test_ubs_localize_rejects_non_inverse():
    s = Nuca.perturbed(Z, PI, {(0,): XOR})
    with pytest.raises(ValueError):
        ubs_localize(s, Nuca.constant(Z, PI), Z.ball(1))


def test_post_surjectivity():
    assert post_surjectivity_check(Nuca.constant(Z3, PI)).verdict == HOLDS
    assert post_surjectivity_check(Nuca.constant(Z3, XOR)).verdict == REFUTED
    # XOR on Z: flipping one output cell needs a correction of infinite support
    rep = post_surjectivity_check(Nuca.constant(Z, XOR), 1, 3)
    assert rep.verdict == REFUTED and rep.details["bounded"]
    assert post_surjectivity_check(Nuca.perturbed(Z, PI, {(0,): XOR}), 1, 2).verdict == INCONCLUSIVE


def test_pre_injectivity():
    assert pre_injectivity_check(Nuca.constant(Z3, XOR)).verdict == REFUTED
    assert pre_injectivity_check(Nuca.constant(Z, XOR), 2).verdict == INCONCLUSIVE
    zero = LocalRule(2, M, (0, 0, 0, 0))
    rep = pre_injectivity_check(Nuca.perturbed(Z, PI, {(0,): zero}), 1)
    assert rep.verdict == REFUTED


def test_stable_sweep():
    assert stable_sweep(Nuca.constant(Z3, SHIFT), "invertible").verdict == HOLDS
    rep = stable_sweep(Nuca.perturbed(Z3, SHIFT, {(1,): XOR}), "injective")
    assert rep.property == "stably_injective"
    with pytest.raises(ValueError):
        stable_sweep(Nuca.constant(Z, PI), "injective")


def test_product_decomposition_requires_partition():
    u = GroupUniverse(0, (4,))
    q = Nuca.perturbed(u, PI, {(0,): XOR})
    maps = product_decomposition(q, [[(0,), (1,)], [(2,), (3,)]])
    x = Configuration(u, 0, {(1,): 1})
    from nuca.decide import apply_product

    assert apply_product(maps, x) == evaluate(q, x)
    with pytest.raises(ValueError):
        product_decomposition(q, [[(0,), (1,)]])


def test_report_json_shape():
    rep = injectivity_oracle(Nuca.constant(Z3, XOR))
    d = rep.as_dict()
    assert d["verdict"] == REFUTED and d["witness"]["x"] == "000"
