"""Linear automata over vector alphabets ``F_p^n`` and their duals.

Letters enumerate the vectors of ``F_p^n`` lexicographically, first
coordinate most significant.  The dual of a configuration ``s`` lives on
the inverted memory and has ``s*(g, m) = s(gm, m^-1)^T``; over a finite
universe its global matrix is the transpose of the global matrix of ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .engine import CheckResult, Nuca
from .rules import (
    AsymptoticallyConstant,
    LocalRule,
    SparseSingular,
    all_patterns,
    check_budget,
)
from .universe import Element

__all__ = [
    "LinearAlphabet",
    "LinearLocalRule",
    "double_dual_check",
    "dual",
    "from_table",
    "global_matrix",
    "rank_mod_p",
    "to_nuca",
    "to_table",
]


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % k for k in range(2, int(p ** 0.5) + 1))


@dataclass(frozen=True)
class LinearAlphabet:
    p: int
    n: int = 1

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"field order {self.p} is not prime")
        if self.n < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def size(self) -> int:
        return self.p ** self.n

    def vector(self, letter: int) -> tuple:
        out = []
        for _ in range(self.n):
            letter, r = divmod(letter, self.p)
            out.append(r)
        return tuple(reversed(out))

    def letter(self, vec: Sequence[int]) -> int:
        i = 0
        for c in vec:
            i = i * self.p + int(c) % self.p
        return i

    @cached_property
    def vectors(self) -> np.ndarray:
        return all_patterns(self.p, self.n)


def _matrix(a, p: int, n: int) -> tuple:
    arr = np.asarray(a, dtype=np.int64).reshape(n, n) % p
    return tuple(tuple(int(v) for v in row) for row in arr)


@dataclass(frozen=True)
class LinearLocalRule:
    """``v -> sum_m A_m v(m)`` with one ``n x n`` matrix per memory cell."""

    p: int
    n: int
    memory: tuple
    matrices: tuple

    def __post_init__(self):
        LinearAlphabet(self.p, self.n)
        object.__setattr__(self, "memory", tuple(tuple(m) for m in self.memory))
        if len(self.matrices) != len(self.memory):
            raise ValueError("one matrix per memory cell is required")
        object.__setattr__(self, "matrices", tuple(_matrix(a, self.p, self.n) for a in self.matrices))

    @classmethod
    def from_dict(cls, p: int, n: int, memory: Sequence[Element], mats: Mapping) -> "LinearLocalRule":
        """Build from ``{cell: matrix}``; memory cells without an entry get the zero matrix."""
        memory = tuple(memory)
        extra = set(mats) - set(memory)
        if extra:
            raise ValueError(f"matrices given for cells outside the memory: {sorted(extra)}")
        zero = np.zeros((n, n), dtype=np.int64)
        return cls(p, n, memory, tuple(mats.get(m, zero) for m in memory))

    @property
    def q(self) -> int:
        return self.p ** self.n

    @property
    def alphabet(self) -> LinearAlphabet:
        return LinearAlphabet(self.p, self.n)

    def matrix(self, m: Element) -> np.ndarray:
        if m not in self.memory:
            return np.zeros((self.n, self.n), dtype=np.int64)
        return np.array(self.matrices[self.memory.index(m)], dtype=np.int64)

    def as_dict(self) -> dict:
        """Nonzero matrices keyed by memory cell; memory order does not matter."""
        return {m: a for m, a in zip(self.memory, self.matrices) if any(any(r) for r in a)}

    def __call__(self, vectors: Sequence[Sequence[int]]) -> tuple:
        acc = np.zeros(self.n, dtype=np.int64)
        for a, v in zip(self.matrices, vectors):
            acc += np.array(a, dtype=np.int64) @ np.asarray(v, dtype=np.int64)
        return tuple(int(c) for c in acc % self.p)


def to_table(r: LinearLocalRule, budget: int | None = None) -> LocalRule:
    """The same rule as a lookup table over letters."""
    alph = r.alphabet
    k = len(r.memory)
    check_budget(alph.size ** k, budget, "linear rule table")
    words = all_patterns(alph.size, k)
    vecs = alph.vectors
    acc = np.zeros((len(words), r.n), dtype=np.int64)
    for i, a in enumerate(r.matrices):
        acc += vecs[words[:, i]] @ np.array(a, dtype=np.int64).T
    acc %= r.p
    letters = acc @ (r.p ** np.arange(r.n - 1, -1, -1, dtype=np.int64))
    return LocalRule(alph.size, r.memory, tuple(letters.tolist()))


def from_table(rule: LocalRule, p: int, n: int) -> LinearLocalRule | None:
    """Recover matrices from a table rule, or ``None`` if the rule is not linear."""
    alph = LinearAlphabet(p, n)
    if rule.q != alph.size:
        raise ValueError(f"table alphabet {rule.q} is not {p}^{n}")
    k = len(rule.memory)
    mats = []
    for i in range(k):
        cols = []
        for j in range(n):
            e = [0] * n
            e[j] = 1
            word = [0] * k
            word[i] = alph.letter(e)
            cols.append(alph.vector(rule(word)))
        mats.append(np.array(cols, dtype=np.int64).T)
    candidate = LinearLocalRule(p, n, rule.memory, tuple(mats))
    return candidate if to_table(candidate) == rule else None


def to_nuca(s, budget: int | None = None) -> Nuca:
    cache = {}

    def conv(r):
        if r not in cache:
            cache[r] = to_table(r, budget)
        return cache[r]

    return Nuca(s.map_rules(conv))


def dual(s: AsymptoticallyConstant) -> AsymptoticallyConstant:
    """The dual configuration on memory ``M^-1``: ``s*(g, m) = s(gm, m^-1)^T``."""
    if isinstance(s, SparseSingular):
        raise NotImplementedError("duals of sparse singular configurations are not represented")
    u = s.universe
    M = s.memory
    Minv = tuple(sorted(u.inverse_set(M)))
    b = s.background

    def rule_at(g):
        return LinearLocalRule(b.p, b.n, Minv, tuple(s.rule_at(u.mul(g, m)).matrix(u.inv(m)).T for m in Minv))

    background = LinearLocalRule(b.p, b.n, Minv, tuple(b.matrix(u.inv(m)).T for m in Minv))
    cells = u.product_set(s.support, M)
    return AsymptoticallyConstant(u, background, {g: rule_at(g) for g in cells})


def double_dual_check(s: AsymptoticallyConstant) -> CheckResult:
    """Compare ``s**`` with ``s`` cell by cell, ignoring memory order and zero matrices."""
    u = s.universe
    ss = dual(dual(s))
    if ss.background.as_dict() != s.background.as_dict():
        return CheckResult(False, None, "background", background=True)
    cells = u.cells() if u.is_finite else sorted(s.support | ss.support)
    for g in cells:
        if ss.rule_at(g).as_dict() != s.rule_at(g).as_dict():
            return CheckResult(False, g, "matrices differ", cells_checked=len(cells))
    return CheckResult(True, cells_checked=len(cells))


def global_matrix(s: AsymptoticallyConstant, budget: int | None = None) -> np.ndarray:
    """The ``n|G| x n|G|`` matrix of ``sigma_s`` over a finite universe, blocks in sorted cell order."""
    u = s.universe
    if not u.is_finite:
        raise ValueError(f"global matrix needs a finite universe, got {u}")
    b = s.background
    size = b.n * u.order
    check_budget(size * size, budget, "global matrix")
    cells = u.cells()
    pos = {g: i for i, g in enumerate(cells)}
    out = np.zeros((size, size), dtype=np.int64)
    nn = b.n
    for g in cells:
        r = s.rule_at(g)
        i = pos[g] * nn
        for m, a in zip(r.memory, r.matrices):
            j = pos[u.mul(g, m)] * nn
            out[i:i + nn, j:j + nn] += np.array(a, dtype=np.int64)
    return out % b.p


def rank_mod_p(a: np.ndarray, p: int) -> int:
    a = np.array(a, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if a[r, c]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = a[rank] * pow(int(a[rank, c]), -1, p) % p
        others = np.flatnonzero(a[:, c])
        others = others[others != rank]
        a[others] = (a[others] - np.outer(a[others, c], a[rank])) % p
        rank += 1
        if rank == rows:
            break
    return rank


def vectorize(config, alph: LinearAlphabet) -> np.ndarray:
    """Stack the letter vectors of a finite-universe configuration in sorted cell order."""
    return np.concatenate([np.array(alph.vector(config[g]), dtype=np.int64) for g in config.universe.cells()])
