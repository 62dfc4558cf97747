"""Evaluation, composition and left-inverse checking of non-uniform automata."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .configurations import Configuration, Pattern
from .rules import (
    AsymptoticallyConstant,
    LocalRule,
    SparseSingular,
    all_patterns,
    check_budget,
    enlarge_memory,
    normalized_memory,
    projection_rule,
)
from .universe import Element, GroupUniverse, format_element

__all__ = [
    "CheckResult",
    "Nuca",
    "UnsupportedError",
    "WindowError",
    "async_run",
    "compose",
    "evaluate",
    "evaluate_batch",
    "evaluate_window",
    "identity_at_cells",
    "identity_check",
    "iterate",
]


class UnsupportedError(ValueError):
    """The operation has no closed form for this class of rule configuration."""


class WindowError(ValueError):
    """A pattern does not cover the cells an evaluation needs."""


@dataclass(frozen=True, eq=False)
class Nuca:
    """The map ``x -> (g -> s(g)((g^-1 x)|_M))`` for a rule configuration ``s``.

    The memory is normalized on construction so that it contains the
    identity.
    """

    rules: AsymptoticallyConstant | SparseSingular

    def __post_init__(self):
        u = self.rules.universe
        memory = normalized_memory(self.rules.memory, u.dim)
        if memory != self.rules.memory:
            object.__setattr__(self, "rules", self.rules.map_rules(lambda r: enlarge_memory(r, memory)))
        for m in self.rules.memory:
            u.check(m)

    @classmethod
    def constant(cls, universe: GroupUniverse, rule: LocalRule) -> "Nuca":
        return cls(AsymptoticallyConstant.constant(universe, rule))

    @classmethod
    def perturbed(cls, universe: GroupUniverse, background: LocalRule, exceptions: Mapping) -> "Nuca":
        return cls(AsymptoticallyConstant(universe, background, exceptions))

    @property
    def universe(self) -> GroupUniverse:
        return self.rules.universe

    @property
    def q(self) -> int:
        return self.rules.q

    @property
    def memory(self) -> tuple:
        return self.rules.memory

    @property
    def is_closed_form(self) -> bool:
        return isinstance(self.rules, AsymptoticallyConstant)

    def rule_at(self, g: Element) -> LocalRule:
        return self.rules.rule_at(g)

    def shifted(self, g: Element) -> "Nuca":
        return Nuca(self.rules.shifted(g))

    def __call__(self, x: Configuration) -> Configuration:
        return evaluate(self, x)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a per-cell check; falsy when a counterexample was found."""

    holds: bool
    cell: Element | None = None
    witness: object = None
    background: bool = False
    cells_checked: int = 0

    def __bool__(self):
        return self.holds


# -- evaluation ----------------------------------------------------------------


def evaluate_window(n: Nuca, x, E: Iterable[Element]) -> Pattern:
    """``sigma_s(x)|_E``; ``x`` must be known on ``EM``."""
    u = n.universe
    E = sorted(E)
    M = n.memory
    if isinstance(x, Pattern):
        missing = u.product_set(E, M) - x.support
        if missing:
            cells = " ".join(format_element(g) for g in sorted(missing))
            raise WindowError(f"pattern does not cover cells {cells}")
    out = {}
    for g in E:
        out[g] = n.rule_at(g)([x[u.mul(g, m)] for m in M])
    return Pattern(u, out)


def evaluate(n: Nuca, x: Configuration) -> Configuration:
    """``sigma_s(x)`` for an asymptotically constant configuration ``x``."""
    u = n.universe
    if x.universe != u:
        raise ValueError("configuration and automaton live on different universes")
    s = n.rules
    if isinstance(s, SparseSingular):
        raise UnsupportedError("sparse singular rules have no closed-form output; use evaluate_window")
    M = n.memory
    background = s.background([x.background] * len(M))
    if u.is_finite:
        cells = u.enumerate_all()
    else:
        cells = s.support | u.product_set(x.support, u.inverse_set(M))
    values = {g: s.rule_at(g)([x[u.mul(g, m)] for m in M]) for g in cells}
    return Configuration(u, background, values)


def iterate(n: Nuca, x: Configuration, steps: int) -> Configuration:
    for _ in range(steps):
        x = evaluate(n, x)
    return x


def evaluate_batch(n: Nuca, X: np.ndarray) -> np.ndarray:
    """Evaluate on a batch of total configurations of a finite universe.

    Rows of ``X`` list letters in sorted cell order.
    """
    u = n.universe
    cells = u.cells()
    pos = {g: i for i, g in enumerate(cells)}
    X = np.asarray(X, dtype=np.int64)
    Y = np.empty_like(X)
    for i, g in enumerate(cells):
        cols = [pos[u.mul(g, m)] for m in n.memory]
        Y[:, i] = n.rule_at(g).apply_many(X[:, cols])
    return Y


def finite_configurations(u: GroupUniverse, q: int, budget: int | None = None) -> np.ndarray:
    """All configurations of a finite universe as rows in sorted cell order."""
    check_budget(q ** u.order, budget, "configuration enumeration")
    return all_patterns(q, u.order)


# -- composition ---------------------------------------------------------------


def compose(outer: Nuca, inner: Nuca, budget: int | None = None) -> Nuca:
    """A single automaton with memory ``MN`` computing ``outer o inner``.

    Each cell gets ``s(g) o f^{+N}_{M, g^-1 d|_M}``: the inner rules are
    applied on the translated memory and their outputs fed to the outer
    rule.
    """
    u = outer.universe
    if inner.universe != u or inner.q != outer.q:
        raise ValueError("composed automata must share universe and alphabet")
    if not (outer.is_closed_form and inner.is_closed_form):
        raise UnsupportedError("composition is only available for asymptotically constant rules")
    q = outer.q
    M, N = outer.memory, inner.memory
    MN = tuple(sorted(u.product_set(M, N)))
    check_budget(q ** len(MN), budget, "composite rule table")
    pos = {h: i for i, h in enumerate(MN)}
    cols = [[pos[u.mul(m, k)] for k in N] for m in M]
    U = all_patterns(q, len(MN))
    cache = {}

    def composite(s_rule, d_rules):
        key = (s_rule, d_rules)
        if key not in cache:
            mid = np.column_stack([d.apply_many(U[:, c]) for d, c in zip(d_rules, cols)])
            cache[key] = LocalRule(q, MN, tuple(s_rule.apply_many(mid).tolist()))
        return cache[key]

    s, d = outer.rules, inner.rules
    background = composite(s.background, (d.background,) * len(M))
    cells = s.support | u.product_set(d.support, u.inverse_set(M))
    exceptions = {g: composite(s.rule_at(g), tuple(d.rule_at(u.mul(g, m)) for m in M)) for g in cells}
    return Nuca(AsymptoticallyConstant(u, background, exceptions))


# -- left inverses -------------------------------------------------------------


def _check_cell(t: Nuca, s: Nuca, g: Element, cache: dict) -> Pattern | None:
    u = s.universe
    N, M = t.memory, s.memory
    t_rule = t.rule_at(g)
    s_rules = tuple(s.rule_at(u.mul(g, k)) for k in N)
    key = (t_rule, s_rules)
    if key in cache:
        return cache[key]
    NM = tuple(sorted(u.product_set(N, M)))
    pos = {h: i for i, h in enumerate(NM)}
    U = all_patterns(s.q, len(NM))
    mid = np.column_stack([r.apply_many(U[:, [pos[u.mul(k, m)] for m in M]]) for r, k in zip(s_rules, N)])
    bad = np.flatnonzero(t_rule.apply_many(mid) != U[:, pos[u.identity]])
    witness = None
    if len(bad):
        witness = Pattern.from_word(u, NM, U[bad[0]].tolist())
    cache[key] = witness
    return witness


def identity_at_cells(t: Nuca, s: Nuca, cells: Iterable[Element], budget: int | None = None) -> CheckResult:
    """Check ``sigma_t(sigma_s(x))(g) = x(g)`` for every ``x`` at the given cells.

    Each cell is decided by enumerating ``A^{NM}``: the condition holds iff
    ``t(g)`` composed with the induced local map of ``s`` on ``gN``
    (translated back to the origin) is the projection onto the identity.
    """
    u = s.universe
    if t.universe != u or t.q != s.q:
        raise ValueError("automata must share universe and alphabet")
    check_budget(s.q ** len(u.product_set(t.memory, s.memory)), budget, "identity check")
    cache = {}
    count = 0
    for g in cells:
        count += 1
        w = _check_cell(t, s, g, cache)
        if w is not None:
            return CheckResult(False, g, w, cells_checked=count)
    return CheckResult(True, cells_checked=count)


def special_cells(t: Nuca, s: Nuca) -> frozenset:
    """Cells whose check can differ from the background check."""
    u = s.universe
    return t.rules.support | u.product_set(s.rules.support, u.inverse_set(t.memory))


def identity_check(t: Nuca, s: Nuca, budget: int | None = None) -> CheckResult:
    """Decide ``sigma_t o sigma_s = Id`` for asymptotically constant rules.

    Over an infinite universe all cells outside the special set share the
    same local condition; three of them are checked as background
    representatives before the special cells.
    """
    if not (t.is_closed_form and s.is_closed_form):
        raise UnsupportedError("identity_check needs asymptotically constant rules; use identity_at_cells")
    u = s.universe
    special = special_cells(t, s)
    if u.is_finite:
        cells = u.cells()
        res = identity_at_cells(t, s, cells, budget)
        if not res.holds:
            return CheckResult(False, res.cell, res.witness, res.cell not in special, res.cells_checked)
        return res
    reps = u.far_cells(special, 3)
    res = identity_at_cells(t, s, reps, budget)
    if not res.holds:
        return CheckResult(False, res.cell, res.witness, True, res.cells_checked)
    res2 = identity_at_cells(t, s, sorted(special), budget)
    return CheckResult(res2.holds, res2.cell, res2.witness, False, res.cells_checked + res2.cells_checked)


# -- asynchronous runs -----------------------------------------------------------


def async_run(
    rule: LocalRule,
    schedule: Sequence[Iterable[Element]],
    x0: Configuration,
    upto: int | None = None,
) -> Configuration:
    """Update only the scheduled cells with ``rule`` at each step; others keep their letter.

    Step ``i`` is the perturbation of the identity automaton with ``rule``
    on the cells of ``schedule[i]``; the result after ``upto`` steps is the
    composite ``F_{upto-1} o ... o F_0`` applied to ``x0``.
    """
    u = x0.universe
    memory = normalized_memory(rule.memory, u.dim)
    rule = enlarge_memory(rule, memory)
    pi = projection_rule(rule.q, memory)
    x = x0
    for cells in list(schedule)[:upto]:
        step = Nuca(AsymptoticallyConstant(u, pi, {u.check(tuple(g)): rule for g in cells}))
        x = evaluate(step, x)
    return x
