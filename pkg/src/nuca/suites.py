"""Named desk-scale verification suites and the fixture corpus."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .configurations import Configuration
from .decide import (
    HOLDS,
    REFUTED,
    injectivity_oracle,
    perturbation_invert,
    post_surjectivity_check,
    pre_injectivity_check,
    product_decomposition,
    apply_product,
    reversibility_search,
    stable_sweep,
    surjectivity_window,
    ubs_localize,
)
from .engine import Nuca, compose, evaluate, identity_check
from .linear import LinearLocalRule, double_dual_check, dual, global_matrix, rank_mod_p, to_nuca
from .rules import AsymptoticallyConstant, LocalRule, enlarge_memory, projection_rule, verify_ubs
from .specfile import ExperimentSpec, parse_spec
from .universe import GroupUniverse

__all__ = ["FIXTURES", "SUITES", "SuiteReport", "load_fixture", "run_suite", "perturbation_catalog"]

FIXTURES = (
    "xor_z3",
    "xor_perturbation",
    "shift_perturbation",
    "xor_z",
    "sparse_xor_base4",
    "linear_z4",
    "shift_z32",
)


def load_fixture(name: str) -> ExperimentSpec:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    text = resources.files("nuca").joinpath("fixtures", f"{name}.nuca").read_text()
    return parse_spec(text)


def fixture_nuca(name: str) -> Nuca:
    spec = load_fixture(name)
    config = spec.require_config()
    if spec.linear is not None:
        return to_nuca(config)
    return Nuca(config)


@dataclass
class SuiteItem:
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class SuiteReport:
    suite: str
    items: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def lines(self) -> list[str]:
        out = [f"suite={self.suite}"]
        for i in self.items:
            out.append(f"check={i.name} result={'pass' if i.passed else 'FAIL'} {i.detail}")
        out.append(f"verdict={'holds' if self.passed else 'refuted'}")
        return out

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "verdict": "holds" if self.passed else "refuted",
            "checks": [{"name": i.name, "passed": i.passed, "detail": i.detail} for i in self.items],
        }


# -- catalogs ---------------------------------------------------------------------

Z = GroupUniverse(1)
BALL1 = ((-1,), (0,), (1,))


def perturbation_catalog() -> list[tuple[str, Nuca]]:
    """Backgrounds identity, left shift and right shift, each with one of the 16 rules on {0,1} at the origin."""
    pi = projection_rule(2, BALL1)
    shift = LocalRule.from_function(2, BALL1, lambda v: v[2])
    unshift = LocalRule.from_function(2, BALL1, lambda v: v[0])
    out = []
    for bname, background in (("pi", pi), ("shift", shift), ("unshift", unshift)):
        for k in range(16):
            rule = enlarge_memory(LocalRule(2, ((0,), (1,)), tuple((k >> (3 - i)) & 1 for i in range(4))), BALL1)
            out.append((f"{bname}+{k}", Nuca(AsymptoticallyConstant(Z, background, {(0,): rule}))))
    return out


def random_nuca(rng: random.Random, u: GroupUniverse, q: int = 2, memory=((0,), (1,)), exceptions: int = 2) -> Nuca:
    memory = tuple(tuple(m) + (0,) * (u.dim - len(m)) for m in memory)
    k = q ** len(memory)

    def rule():
        return LocalRule(q, memory, tuple(rng.randrange(q) for _ in range(k)))

    cells = u.cells() if u.is_finite else sorted(u.ball(2))
    exc = {g: rule() for g in rng.sample(cells, min(exceptions, len(cells)))}
    return Nuca(AsymptoticallyConstant(u, rule(), exc))


def random_linear(rng: random.Random, u: GroupUniverse, p: int, n: int, memory, exceptions: int) -> AsymptoticallyConstant:
    def rule():
        return LinearLocalRule(p, n, memory, tuple(
            tuple(tuple(rng.randrange(p) for _ in range(n)) for _ in range(n)) for _ in memory))

    cells = u.cells() if u.is_finite else sorted(u.ball(2))
    return AsymptoticallyConstant(u, rule(), {g: rule() for g in rng.sample(cells, min(exceptions, len(cells)))})


# -- checks --------------------------------------------------------------------------
# Each check takes a seed and returns (passed, detail).


def _reversible_inverts(seed):
    reversible = 0
    for label, n in perturbation_catalog():
        if reversibility_search(n, 2).verdict != HOLDS:
            continue
        reversible += 1
        inv = perturbation_invert(n, 2)
        if inv.verdict != HOLDS:
            return False, f"case={label} reversible but perturbation_invert={inv.verdict}"
        if not inv.certificate.verify(n, radius=3):
            return False, f"case={label} inverse fails on ball(3)"
    return True, f"cases=48 reversible={reversible}"


def _fixture_invert(name):
    def check(seed):
        n = fixture_nuca(name)
        rep = perturbation_invert(n, load_fixture(name).params.get("rmax", 2))
        ok = rep.verdict == HOLDS and bool(rep.certificate.verify(n, radius=3))
        return ok, f"fixture={name} verdict={rep.verdict}"
    return check


def _window_images(seed):
    windows = 0
    for label, n in perturbation_catalog():
        if reversibility_search(n, 2).verdict != HOLDS:
            continue
        for k in range(5):
            rep = surjectivity_window(n, Z.ball(k))
            windows += 1
            if rep.verdict == REFUTED:
                return False, f"case={label} window=ball({k}) unreached={rep.witness['unreached']}"
    return True, f"windows={windows} witnesses=0"


def _xor_window(seed):
    spec = load_fixture("xor_z")
    n = Nuca(spec.require_config())
    k = spec.params.get("window", 4)
    rep = surjectivity_window(n, Z.ball(k))
    rev = reversibility_search(n, spec.params.get("rmax", 2))
    ok = rep.verdict != REFUTED and rev.verdict != HOLDS
    return ok, f"fixture=xor_z window_surjective={rep.verdict != REFUTED} reversible={rev.verdict}"


def _post_surjective_inverts(seed):
    # post-surjectivity that survives the bounded search must come with an inverse
    survived = 0
    for label, n in perturbation_catalog():
        if post_surjectivity_check(n, 1, 3).verdict == REFUTED:
            continue
        survived += 1
        inv = perturbation_invert(n, 2)
        if inv.verdict != HOLDS:
            return False, f"case={label} not refuted as post-surjective but perturbation_invert={inv.verdict}"
    return True, f"cases=48 not_refuted={survived}"


def _post_pre_stable(samples):
    def check(seed):
        rng = random.Random(seed)
        hits = 0
        for i in range(samples):
            u = GroupUniverse(0, (rng.randint(2, 4),)) if rng.random() < 0.9 else GroupUniverse(0, (2, 2))
            n = random_nuca(rng, u, exceptions=rng.randint(0, 2))
            if post_surjectivity_check(n).verdict == HOLDS and pre_injectivity_check(n).verdict == HOLDS:
                hits += 1
                if stable_sweep(n, "invertible").verdict != HOLDS:
                    return False, f"sample={i} universe={u}"
        return True, f"samples={samples} post_and_pre={hits}"
    return check


def _reversible_vs_stable(seed):
    rng = random.Random(seed)
    for i in range(60):
        u = GroupUniverse(0, (rng.randint(2, 4),))
        n = random_nuca(rng, u, exceptions=rng.randint(0, 2))
        rev = reversibility_search(n, 2).verdict == HOLDS
        stable = stable_sweep(n, "injective").verdict == HOLDS
        if rev != stable:
            return False, f"sample={i} reversible={rev} stably_injective={stable}"
    return True, "samples=60"


def _xor_z3(seed):
    rep = injectivity_oracle(fixture_nuca("xor_z3"))
    w = rep.witness or {}
    from .decide import _render

    ok = rep.verdict == REFUTED and _render(w.get("x")) == "000" and _render(w.get("y")) == "111"
    return ok, f"fixture=xor_z3 verdict={rep.verdict}"


def _ball_exhaustion(seed):
    for text in ("Z", "Z^2", "Z * Z/4"):
        u = GroupUniverse.parse(text)
        prev = frozenset()
        for k in range(4):
            b = u.ball(k)
            if not (prev <= b and u.inverse_set(b) == b and u.identity in b and b == u.power_set(u.generators(), k)):
                return False, f"universe={u} k={k}"
            # FE^2 \ FE is nonempty when G is infinite
            if k >= 1 and not (u.product_set(b, u.power_set(b, 2)) - u.product_set(b, b)):
                return False, f"universe={u} k={k} empty ring"
            prev = b
    cyc = GroupUniverse(0, (32,))
    if cyc.ball(16) != cyc.enumerate_all():
        return False, "Z/32 not exhausted by ball(16)"
    return True, "universes=3 radii=0..3"


def _three_regions(seed):
    n = fixture_nuca("shift_z32")
    u = n.universe
    c = Nuca.constant(u, n.rules.background)
    d = reversibility_search(c, 1).certificate.flat
    qn = compose(d, n)
    E = u.ball(1)
    F = E
    FE, FE2, FE3, FE4 = (u.product_set(F, u.power_set(E, k)) for k in (1, 2, 3, 4))
    pi = projection_rule(2, qn.memory)
    if any(qn.rule_at(g) != pi for g in FE4 - FE):
        return False, "composite is not the projection on FE^4 \\ FE"
    inner, ring, outer = FE2, FE3 - FE2, u.enumerate_all() - FE3
    maps = product_decomposition(qn, [inner, ring, outer])
    rng = np.random.default_rng(seed)
    cells = u.cells()
    for _ in range(100):
        x = Configuration(u, 0, dict(zip(cells, rng.integers(0, 2, len(cells)).tolist())))
        if apply_product(maps, x) != evaluate(qn, x):
            return False, "product of blocks differs from the composite"
    ring_id = all(maps[1](w) == tuple(w) for w in np.indices((2,) * len(ring)).reshape(len(ring), -1).T.tolist())
    # a collapsing exception makes the inner block non-injective
    zero = LocalRule(2, n.memory, (0,) * 8)
    bad = compose(d, Nuca(AsymptoticallyConstant(u, n.rules.background, {(0,): zero})))
    bad_inner = product_decomposition(bad, [inner, ring, outer])[0]
    ok = ring_id and maps[0].is_bijective() and not bad_inner.is_bijective()
    return ok, f"inner={len(inner)} ring={len(ring)} outer={len(outer)} samples=100"


def _ubs_scan(seed):
    n = fixture_nuca("sparse_xor_base4")
    for k in (1, 2, 3):
        E = Z.ball(k)
        F = verify_ubs(n.rules, E, 64)
        if F is None or not E <= F:
            return False, f"no F for ball({k})"
        ring = Z.product_set(F, E) - F
        if len({n.rule_at(g) for g in ring}) > 1:
            return False, f"ball({k}) ring not constant"
    return True, "radii=1..3"


def _localize_sparse(seed):
    spec = load_fixture("sparse_xor_base4")
    n = Nuca(spec.require_config())
    for k in (1, 2, 3):
        E = Z.ball(k)
        loc = ubs_localize(n, n, E)
        if any(loc.p.rule_at(g) != n.rule_at(g) or loc.q.rule_at(g) != n.rule_at(g) for g in E):
            return False, f"ball({k}) restriction mismatch"
        if not identity_check(loc.q, loc.p):
            return False, f"ball({k}) identity fails"
    return True, "windows=ball(1..3)"


def _double_dual(count):
    def check(seed):
        rng = random.Random(seed)
        for i in range(count):
            p, nn = rng.choice((2, 3)), rng.randint(1, 2)
            u = rng.choice((Z, GroupUniverse(2), GroupUniverse(0, (5,))))
            memory = sorted(rng.sample(sorted(u.ball(1)), rng.randint(1, 3)))
            s = random_linear(rng, u, p, nn, memory, rng.randint(0, 3))
            if not double_dual_check(s):
                return False, f"sample={i}"
        return True, f"samples={count}"
    return check


def _transpose(count):
    def check(seed):
        rng = random.Random(seed)
        for text in ("Z/3", "Z/4", "Z/2 * Z/2"):
            u = GroupUniverse.parse(text)
            for _ in range(count):
                p, nn = rng.choice((2, 3)), rng.randint(1, 2)
                memory = sorted(rng.sample(u.cells(), rng.randint(1, u.order)))
                s = random_linear(rng, u, p, nn, memory, rng.randint(0, u.order))
                if not np.array_equal(global_matrix(dual(s)), global_matrix(s).T):
                    return False, f"universe={u}"
        return True, f"universes=3 samples={3 * count}"
    return check


def _invertibility(count):
    def check(seed):
        rng = random.Random(seed)
        agree = 0
        for i in range(count):
            u = rng.choice([GroupUniverse.parse(t) for t in ("Z/3", "Z/4", "Z/2 * Z/2", "Z/2")])
            p = rng.choice((2, 3))
            memory = sorted(rng.sample(u.cells(), rng.randint(1, min(2, u.order))))
            s = random_linear(rng, u, p, 1, memory, rng.randint(0, 2))
            full = u.order
            a = rank_mod_p(global_matrix(s), p) == full
            b = rank_mod_p(global_matrix(dual(s)), p) == full
            brute = injectivity_oracle(to_nuca(s)).verdict == HOLDS
            if not (a == b == brute):
                return False, f"sample={i} rank={a} dual_rank={b} brute={brute}"
            agree += 1
        return True, f"samples={agree}"
    return check


def _linear_fixture(seed):
    s = load_fixture("linear_z4").require_config()
    ok = bool(double_dual_check(s)) and np.array_equal(global_matrix(dual(s)), global_matrix(s).T)
    inv = rank_mod_p(global_matrix(s), 2) == 2 * s.universe.order
    ok = ok and inv == (injectivity_oracle(to_nuca(s)).verdict == HOLDS)
    return ok, f"fixture=linear_z4 invertible={inv}"


Check = Callable[[int], tuple]

SUITES: dict[str, list[tuple[str, Check]]] = {
    "theorem-a": [
        ("reversible-implies-invertible", _reversible_inverts),
        ("invert-xor-perturbation", _fixture_invert("xor_perturbation")),
        ("invert-shift-perturbation", _fixture_invert("shift_perturbation")),
    ],
    "theorem-b": [
        ("window-images-full", _window_images),
        ("xor-window-surjective", _xor_window),
    ],
    "theorem-c": [
        ("post-surjective-implies-invertible", _post_surjective_inverts),
        ("finite-post-and-pre", _post_pre_stable(100)),
    ],
    "theorem-d": [
        ("ball-exhaustion", _ball_exhaustion),
        ("sparse-bounded-singularity", _ubs_scan),
        ("three-region-decomposition", _three_regions),
    ],
    "duality": [
        ("double-dual", _double_dual(50)),
        ("transpose-oracle", _transpose(10)),
        ("invertibility-equivalence", _invertibility(50)),
        ("linear-fixture", _linear_fixture),
    ],
    "lemma-6.1": [
        ("localize-sparse-involution", _localize_sparse),
    ],
    "corollaries": [
        ("xor-z3-collision", _xor_z3),
        ("reversible-iff-stably-injective", _reversible_vs_stable),
        ("post-and-pre-implies-stably-invertible", _post_pre_stable(100)),
    ],
}


def run_suite(name: str, seed: int = 0) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    report = SuiteReport(name)
    for item, fn in SUITES[name]:
        t0 = time.perf_counter()
        try:
            passed, detail = fn(seed)
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"error={type(exc).__name__}: {exc}"
        report.items.append(SuiteItem(item, bool(passed), detail, time.perf_counter() - t0))
    return report
