"""Finite patterns, background-plus-exceptions configurations and the shift action."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from .universe import Element, GroupUniverse, format_element

__all__ = [
    "Configuration",
    "Pattern",
    "asymptotic_diff",
    "restrict",
    "shift",
]


@dataclass(frozen=True, eq=False)
class Pattern:
    """A finite assignment of letters to cells."""

    universe: GroupUniverse
    values: Mapping[Element, int]

    def __post_init__(self):
        check = self.universe.check
        vals = {check(g): int(v) for g, v in dict(self.values).items()}
        object.__setattr__(self, "values", MappingProxyType(vals))

    @classmethod
    def from_word(cls, universe: GroupUniverse, cells: Iterable[Element], letters) -> "Pattern":
        cells = list(cells)
        letters = [int(c) for c in letters]
        if len(cells) != len(letters):
            raise ValueError(f"{len(cells)} cells but {len(letters)} letters")
        return cls(universe, dict(zip(cells, letters)))

    @property
    def support(self) -> frozenset:
        return frozenset(self.values)

    def __getitem__(self, g: Element) -> int:
        return self.values[g]

    def __contains__(self, g) -> bool:
        return g in self.values

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.universe == other.universe and dict(self.values) == dict(other.values)

    def __hash__(self):
        return hash((self.universe, frozenset(self.values.items())))

    def word(self, cells: Iterable[Element] | None = None) -> str:
        """Letters in sorted cell order (or the given order) as a digit string."""
        cells = sorted(self.values) if cells is None else cells
        return "".join(_letter(self.values[g]) for g in cells)

    def restrict(self, E: Iterable[Element]) -> "Pattern":
        return Pattern(self.universe, {g: self.values[g] for g in E})

    def __str__(self):
        return " ".join(f"{format_element(g)}={_letter(v)}" for g, v in sorted(self.values.items()))


@dataclass(frozen=True, eq=False)
class Configuration:
    """A total configuration equal to ``background`` off a finite exception set.

    Exceptions carrying the background letter are dropped, so two
    configurations over an infinite universe are equal exactly when their
    backgrounds and exception maps coincide.  Over a finite universe the
    comparison is cell by cell.
    """

    universe: GroupUniverse
    background: int
    exceptions: Mapping[Element, int] = MappingProxyType({})

    def __post_init__(self):
        check = self.universe.check
        b = int(self.background)
        exc = {check(g): int(v) for g, v in dict(self.exceptions).items() if int(v) != b}
        object.__setattr__(self, "background", b)
        object.__setattr__(self, "exceptions", MappingProxyType(exc))

    @classmethod
    def constant(cls, universe: GroupUniverse, letter: int) -> "Configuration":
        return cls(universe, letter, {})

    @property
    def support(self) -> frozenset:
        return frozenset(self.exceptions)

    def __getitem__(self, g: Element) -> int:
        return self.exceptions.get(g, self.background)

    def __contains__(self, g) -> bool:
        return True

    def with_values(self, values: Mapping[Element, int]) -> "Configuration":
        exc = dict(self.exceptions)
        exc.update(values)
        return Configuration(self.universe, self.background, exc)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        if self.universe != other.universe:
            return False
        if self.universe.is_finite:
            return all(self[g] == other[g] for g in self.universe.enumerate_all())
        return self.background == other.background and dict(self.exceptions) == dict(other.exceptions)

    def __hash__(self):
        if self.universe.is_finite:
            return hash((self.universe, tuple(self[g] for g in self.universe.cells())))
        return hash((self.universe, self.background, frozenset(self.exceptions.items())))

    def __str__(self):
        body = " ".join(f"{format_element(g)}={_letter(v)}" for g, v in sorted(self.exceptions.items()))
        return f"background={_letter(self.background)}" + (" " + body if body else "")


def _letter(v: int) -> str:
    return str(v) if v < 10 else f"[{v}]"


def shift(g: Element, x):
    """The shift action ``(gx)(h) = x(g^-1 h)`` on patterns and configurations."""
    u = x.universe
    if isinstance(x, Pattern):
        return Pattern(u, {u.mul(g, h): v for h, v in x.values.items()})
    return Configuration(u, x.background, {u.mul(g, h): v for h, v in x.exceptions.items()})


def restrict(x, E: Iterable[Element]) -> Pattern:
    return Pattern(x.universe, {g: x[g] for g in E})


def asymptotic_diff(x: Configuration, y: Configuration) -> frozenset | None:
    """Cells where ``x`` and ``y`` differ, or ``None`` if they are not asymptotic."""
    u = x.universe
    if y.universe != u:
        raise ValueError("configurations live on different universes")
    if u.is_finite:
        return frozenset(g for g in u.enumerate_all() if x[g] != y[g])
    if x.background != y.background:
        return None
    return frozenset(g for g in x.support | y.support if x[g] != y[g])
