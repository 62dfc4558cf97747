"""Local rules, configurations of local rules, block maps and induced local maps.

Rule tables are indexed lexicographically over the memory's declared cell
order: the first memory cell is the most significant digit and letter 0 is
the lowest.  For ``q = 2`` and memory ``((0,), (1,))`` the projection onto
the identity therefore has table ``0011``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .configurations import Configuration, Pattern
from .universe import Element, GroupUniverse, format_element

DEFAULT_BUDGET = 1 << 20


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured budget."""


def default_budget() -> int:
    return int(os.environ.get("NUCA_BUDGET", DEFAULT_BUDGET))


def check_budget(count: int, budget: int | None, what: str = "enumeration") -> int:
    budget = default_budget() if budget is None else budget
    if count > budget:
        raise BudgetExceeded(f"{what} needs {count} patterns, budget is {budget}")
    return budget


def all_patterns(q: int, k: int) -> np.ndarray:
    """Every word of length ``k`` over ``q`` letters, in index order, as rows."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((q,) * k, dtype=np.int64).reshape(k, -1).T


def _weights(q: int, k: int) -> np.ndarray:
    return q ** np.arange(k - 1, -1, -1, dtype=np.int64)


# -- local rules ------------------------------------------------------------


@dataclass(frozen=True)
class LocalRule:
    q: int
    memory: tuple
    table: tuple

    def __post_init__(self):
        object.__setattr__(self, "memory", tuple(tuple(m) for m in self.memory))
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if len(set(self.memory)) != len(self.memory):
            raise ValueError(f"memory has duplicate cells: {self.memory}")
        if len(self.table) != self.q ** len(self.memory):
            raise ValueError(f"table has {len(self.table)} entries, expected {self.q ** len(self.memory)}")
        if any(not 0 <= v < self.q for v in self.table):
            raise ValueError(f"table entries must be letters 0..{self.q - 1}")

    @classmethod
    def from_function(cls, q: int, memory: Sequence[Element], fn: Callable[[tuple], int]) -> "LocalRule":
        memory = tuple(memory)
        rows = all_patterns(q, len(memory))
        return cls(q, memory, tuple(int(fn(tuple(int(c) for c in row))) for row in rows))

    @cached_property
    def _array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)

    @cached_property
    def _w(self) -> np.ndarray:
        return _weights(self.q, len(self.memory))

    def index(self, values: Sequence[int]) -> int:
        i = 0
        for v in values:
            i = i * self.q + v
        return i

    def pattern(self, index: int) -> tuple:
        out = []
        for _ in self.memory:
            index, r = divmod(index, self.q)
            out.append(r)
        return tuple(reversed(out))

    def __call__(self, values: Sequence[int]) -> int:
        return self.table[self.index(values)]

    def apply_many(self, rows: np.ndarray) -> np.ndarray:
        """Apply to each row of a ``(P, |M|)`` array of memory patterns."""
        return self._array[rows @ self._w]

    def table_string(self) -> str:
        return "".join(str(v) if v < 10 else f"[{v}]" for v in self.table)


def projection_rule(q: int, memory: Sequence[Element]) -> LocalRule:
    """The rule ``v -> v(identity)``."""
    memory = tuple(memory)
    if not memory:
        raise ValueError("memory is empty")
    identity = (0,) * len(memory[0])
    if identity not in memory:
        raise ValueError(f"identity {format_element(identity)} is not in memory")
    i = memory.index(identity)
    return LocalRule.from_function(q, memory, lambda v: v[i])


def constant_rule(q: int, memory: Sequence[Element], letter: int) -> LocalRule:
    memory = tuple(memory)
    return LocalRule(q, memory, (letter,) * q ** len(memory))


def enlarge_memory(rule: LocalRule, memory: Sequence[Element]) -> LocalRule:
    """Re-express ``rule`` over a larger memory, ignoring the new cells."""
    memory = tuple(memory)
    if tuple(rule.memory) == memory:
        return rule
    missing = [m for m in rule.memory if m not in memory]
    if missing:
        raise ValueError(f"memory cells {missing} are not in the enlarged memory")
    cols = [memory.index(m) for m in rule.memory]
    rows = all_patterns(rule.q, len(memory))
    table = rule.apply_many(rows[:, cols]) if cols else np.full(len(rows), rule.table[0])
    return LocalRule(rule.q, memory, tuple(int(v) for v in table))


def normalized_memory(memory: Sequence[Element], dim: int) -> tuple:
    """``memory`` with the identity appended when absent."""
    memory = tuple(memory)
    identity = (0,) * dim
    return memory if identity in memory else memory + (identity,)


# -- configurations of local rules -------------------------------------------


def _same_memory(rules: Iterable) -> tuple:
    mems = {r.memory for r in rules}
    if len(mems) != 1:
        raise ValueError(f"rules disagree on memory: {sorted(mems)}")
    return mems.pop()


@dataclass(frozen=True, eq=False)
class AsymptoticallyConstant:
    """A background rule everywhere except at finitely many cells.

    A configuration without exceptions is a constant configuration, i.e. a
    classical cellular automaton.
    """

    universe: GroupUniverse
    background: object
    exceptions: Mapping[Element, object] = MappingProxyType({})

    def __post_init__(self):
        check = self.universe.check
        exc = {check(g): r for g, r in dict(self.exceptions).items() if r != self.background}
        _same_memory([self.background, *exc.values()])
        object.__setattr__(self, "exceptions", MappingProxyType(exc))

    @classmethod
    def constant(cls, universe: GroupUniverse, rule) -> "AsymptoticallyConstant":
        return cls(universe, rule, {})

    @property
    def memory(self) -> tuple:
        return self.background.memory

    @property
    def q(self) -> int:
        return self.background.q

    @property
    def is_constant(self) -> bool:
        return not self.exceptions

    @property
    def support(self) -> frozenset:
        return frozenset(self.exceptions)

    def rule_at(self, g: Element):
        return self.exceptions.get(g, self.background)

    def shifted(self, g: Element) -> "AsymptoticallyConstant":
        """The translate ``gs`` with ``(gs)(h) = s(g^-1 h)``."""
        u = self.universe
        return AsymptoticallyConstant(u, self.background, {u.mul(g, h): r for h, r in self.exceptions.items()})

    def map_rules(self, fn) -> "AsymptoticallyConstant":
        return AsymptoticallyConstant(self.universe, fn(self.background), {g: fn(r) for g, r in self.exceptions.items()})

    def __eq__(self, other):
        if not isinstance(other, AsymptoticallyConstant):
            return NotImplemented
        if other.universe != self.universe:
            return False
        if self.universe.is_finite:
            return all(self.rule_at(g) == other.rule_at(g) for g in self.universe.enumerate_all())
        return self.background == other.background and dict(self.exceptions) == dict(other.exceptions)



@dataclass(frozen=True, eq=False)
class SparseSingular:
    """Over Z: ``singular`` at the sites ``offset +- base^k`` (k >= 1), ``background`` elsewhere.

    ``extra`` overrides finitely many cells.  The site gaps grow
    geometrically, which is what makes the singularity uniformly bounded.
    """

    universe: GroupUniverse
    background: object
    base: int
    singular: object
    extra: Mapping[Element, object] = MappingProxyType({})
    offset: int = 0

    def __post_init__(self):
        if self.universe.free_rank != 1 or self.universe.moduli:
            raise ValueError(f"sparse singular configurations need universe Z, got {self.universe}")
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        extra = {self.universe.check(g): r for g, r in dict(self.extra).items()}
        _same_memory([self.background, self.singular, *extra.values()])
        object.__setattr__(self, "extra", MappingProxyType(extra))

    @property
    def memory(self) -> tuple:
        return self.background.memory

    @property
    def q(self) -> int:
        return self.background.q

    def is_site(self, g: Element) -> bool:
        v = abs(g[0] - self.offset)
        if v < self.base:
            return False
        while v % self.base == 0:
            v //= self.base
        return v == 1

    def rule_at(self, g: Element):
        if g in self.extra:
            return self.extra[g]
        return self.singular if self.is_site(g) else self.background

    def shifted(self, g: Element) -> "SparseSingular":
        u = self.universe
        return SparseSingular(
            u, self.background, self.base, self.singular,
            {u.mul(g, h): r for h, r in self.extra.items()}, self.offset + g[0],
        )

    def __eq__(self, other):
        if not isinstance(other, SparseSingular):
            return NotImplemented
        return (self.universe, self.background, self.base, self.singular, dict(self.extra), self.offset) == (
            other.universe, other.background, other.base, other.singular, dict(other.extra), other.offset)

    def map_rules(self, fn) -> "SparseSingular":
        return SparseSingular(
            self.universe, fn(self.background), self.base, fn(self.singular),
            {g: fn(r) for g, r in self.extra.items()}, self.offset,
        )


RuleConfiguration = AsymptoticallyConstant | SparseSingular


def restrict_rules(s, E: Iterable[Element]) -> dict:
    return {g: s.rule_at(g) for g in E}


# -- block maps ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockMap:
    """A map ``A^domain -> A^codomain`` evaluated row-wise on pattern arrays.

    ``func`` takes a ``(P, |domain|)`` array of letters (columns in
    ``domain`` order) and returns ``(P, |codomain|)``.  The full table is
    only materialized on demand and only within the budget.
    """

    q: int
    domain: tuple
    codomain: tuple
    func: Callable[[np.ndarray], np.ndarray]

    def apply_many(self, rows: np.ndarray) -> np.ndarray:
        return self.func(np.asarray(rows, dtype=np.int64).reshape(-1, len(self.domain)))

    def __call__(self, values: Sequence[int]) -> tuple:
        out = self.apply_many(np.array([values], dtype=np.int64))[0]
        return tuple(int(v) for v in out)

    def table(self, budget: int | None = None) -> np.ndarray:
        cached = self.__dict__.get("_table")
        if cached is not None:
            return cached
        check_budget(self.q ** len(self.domain), budget, "block map materialization")
        tab = self.apply_many(all_patterns(self.q, len(self.domain)))
        self.__dict__["_table"] = tab
        return tab

    def apply_pattern(self, x) -> Pattern:
        vals = [x[g] for g in self.domain]
        return Pattern.from_word(x.universe, self.codomain, self(vals))

    def is_bijective(self, budget: int | None = None) -> bool:
        if len(self.domain) != len(self.codomain):
            return False
        tab = self.table(budget)
        w = _weights(self.q, len(self.codomain))
        return len(np.unique(tab @ w)) == len(tab)

    def collision(self, budget: int | None = None) -> tuple[tuple, tuple] | None:
        """The lexicographically first pair of domain words with equal images."""
        tab = self.table(budget)
        keys = tab @ _weights(self.q, len(self.codomain))
        uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
        if not (counts > 1).any():
            return None
        i = int(first[counts > 1].min())
        j = int(np.flatnonzero(keys == keys[i])[1])
        rows = all_patterns(self.q, len(self.domain))
        return tuple(int(v) for v in rows[i]), tuple(int(v) for v in rows[j])

    def inverse(self, budget: int | None = None) -> "BlockMap":
        if not self.is_bijective(budget):
            raise ValueError("block map is not a bijection")
        tab = self.table(budget)
        keys = tab @ _weights(self.q, len(self.codomain))
        inv = np.empty_like(keys)
        inv[keys] = np.arange(len(keys))
        src = all_patterns(self.q, len(self.domain))
        w = _weights(self.q, len(self.codomain))
        pre = src[inv]
        return BlockMap(self.q, self.codomain, self.domain, lambda rows: pre[rows @ w])

    def apply_product(self, x: Configuration) -> Configuration:
        """Apply ``self x Id`` to a total configuration (domain and codomain must agree)."""
        if set(self.domain) != set(self.codomain):
            raise ValueError("product with the identity needs equal domain and codomain")
        out = self.apply_pattern(x)
        return x.with_values(out.values)


def induced_local_map(
    universe: GroupUniverse, E: Iterable[Element], w: Mapping[Element, LocalRule]
) -> BlockMap:
    """The map ``A^{EM} -> A^E``, ``x -> (g -> w(g)((g^-1 x)|_M))``."""
    E = sorted(E)
    missing = [g for g in E if g not in w]
    if missing:
        raise ValueError(f"no rule given for cells {[format_element(g) for g in missing]}")
    if not E:
        return BlockMap(2, (), (), lambda rows: np.zeros((len(rows), 0), dtype=np.int64))
    rules = [w[g] for g in E]
    memory = _same_memory(rules)
    q = rules[0].q
    domain = tuple(sorted(universe.product_set(E, memory)))
    pos = {h: i for i, h in enumerate(domain)}
    cols = [[pos[universe.mul(g, m)] for m in memory] for g in E]

    def func(rows):
        out = np.empty((len(rows), len(E)), dtype=np.int64)
        for i, rule in enumerate(rules):
            out[:, i] = rule.apply_many(rows[:, cols[i]])
        return out

    return BlockMap(q, domain, tuple(E), func)


# -- uniformly bounded singularity --------------------------------------------


def verify_ubs(s, E: Iterable[Element], search_limit: int) -> frozenset | None:
    """A ball ``F`` containing ``E`` with ``s`` constant on ``FE \\ F``.

    Returns the smallest such ball of radius at most ``search_limit`` (the
    limit is raised to a radius that is guaranteed to work for
    asymptotically constant ``s``), or ``None`` when the scan is exhausted.
    """
    u = s.universe
    E = frozenset(E)
    if u.identity not in E or u.inverse_set(E) != E:
        raise ValueError("E must be symmetric and contain the identity")
    if isinstance(s, AsymptoticallyConstant):
        if s.is_constant:
            return E
        search_limit = max(search_limit, u.radius(s.support) + u.radius(E))
    for k in range(u.radius(E), search_limit + 1):
        F = u.ball(k)
        ring = u.product_set(F, E) - F
        if len({s.rule_at(g) for g in ring}) <= 1:
            return F
    return None


def ubs_constant(s, F: Iterable[Element], E: Iterable[Element]):
    """The rule ``s`` takes on ``FE \\ F`` (its background when that set is empty)."""
    u = s.universe
    F = frozenset(F)
    ring = u.product_set(F, E) - F
    rules = {s.rule_at(g) for g in ring}
    if len(rules) > 1:
        raise ValueError("s is not constant on FE \\ F")
    return rules.pop() if rules else s.background
