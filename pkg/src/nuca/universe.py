"""Finitely generated abelian group universes Z^d x Z/n1 x ... x Z/nk.

Elements are plain integer tuples: free coordinates first, then one
coordinate per cyclic factor, reduced into ``[0, n)``.  The canonical
generating set is the identity together with the unit vectors and their
inverses, so balls are word-metric balls for that set.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable

Element = tuple[int, ...]
FiniteSubset = frozenset  # frozenset[Element]

__all__ = [
    "Element",
    "FiniteSubset",
    "GroupUniverse",
    "UniverseError",
    "format_element",
    "parse_element",
]


class UniverseError(ValueError):
    """Raised on malformed universe literals or elements from another universe."""


_FACTOR = re.compile(r"^Z(?:\^(\d+)|/(\d+))?$")
_ELEMENT = re.compile(r"^\(\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*\)$")


@dataclass(frozen=True)
class GroupUniverse:
    free_rank: int = 1
    moduli: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
        if self.free_rank < 0:
            raise UniverseError(f"negative free rank {self.free_rank}")
        bad = [m for m in self.moduli if m < 2]
        if bad:
            raise UniverseError(f"cyclic factor moduli must be >= 2, got {bad}")

    @classmethod
    def parse(cls, text: str) -> "GroupUniverse":
        """Parse ``Z^d * Z/n1 * ...``; factors may come in any order."""
        parts = [p.strip() for p in text.split("*")]
        if not text.strip() or any(not p for p in parts):
            raise UniverseError(f"malformed universe literal {text!r}")
        free, moduli = 0, []
        for part in parts:
            m = _FACTOR.match(part.replace(" ", ""))
            if m is None:
                raise UniverseError(f"malformed universe factor {part!r} in {text!r}")
            if m.group(1) is not None:
                free += int(m.group(1))
            elif m.group(2) is not None:
                moduli.append(int(m.group(2)))
            else:
                free += 1
        return cls(free, tuple(moduli))

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1 or not self.moduli:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{m}" for m in self.moduli)
        return " * ".join(parts)

    @property
    def dim(self) -> int:
        return self.free_rank + len(self.moduli)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int | None:
        if not self.is_finite:
            return None
        n = 1
        for m in self.moduli:
            n *= m
        return n

    @property
    def identity(self) -> Element:
        return (0,) * self.dim

    @property
    def _mods(self) -> tuple[int, ...]:
        return (0,) * self.free_rank + self.moduli

    # -- elements ---------------------------------------------------------

    def element(self, *coords: int) -> Element:
        """Build a canonical element; torsion coordinates are reduced."""
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        if len(coords) != self.dim:
            raise UniverseError(f"{coords} has {len(coords)} coordinates, {self} needs {self.dim}")
        return tuple(int(c) if m == 0 else int(c) % m for c, m in zip(coords, self._mods))

    def check(self, a: Element) -> Element:
        """Validate that ``a`` is a canonical element of this universe."""
        if not isinstance(a, tuple) or len(a) != self.dim:
            raise UniverseError(f"{a!r} is not an element of {self}")
        for c, m in zip(a, self._mods):
            if m and not 0 <= c < m:
                raise UniverseError(f"{a!r} is not an element of {self} (unreduced torsion)")
        return a

    def mul(self, a: Element, b: Element) -> Element:
        if len(a) != self.dim or len(b) != self.dim:
            raise UniverseError(f"cannot multiply {a!r} and {b!r} in {self}")
        return tuple(x + y if m == 0 else (x + y) % m for x, y, m in zip(a, b, self._mods))

    def inv(self, a: Element) -> Element:
        if len(a) != self.dim:
            raise UniverseError(f"{a!r} is not an element of {self}")
        return tuple(-x if m == 0 else (-x) % m for x, m in zip(a, self._mods))

    def norm(self, a: Element) -> int:
        """Word length with respect to the canonical generating set."""
        return sum(abs(x) if m == 0 else min(x, m - x) for x, m in zip(a, self._mods))

    # -- subsets ----------------------------------------------------------

    def generators(self) -> frozenset:
        """The canonical symmetric generating set, identity included."""
        out = {self.identity}
        for i in range(self.dim):
            for sign in (1, -1):
                e = [0] * self.dim
                e[i] = sign
                out.add(self.element(*e))
        return frozenset(out)

    def ball(self, k: int) -> frozenset:
        """All elements of word length at most ``k``."""
        if k < 0:
            raise UniverseError(f"negative radius {k}")
        ranges = [range(-k, k + 1) if m == 0 else range(m) for m in self._mods]
        return frozenset(g for g in itertools.product(*ranges) if self.norm(g) <= k)

    def radius(self, E: Iterable[Element]) -> int:
        return max((self.norm(g) for g in E), default=0)

    def product_set(self, E: Iterable[Element], F: Iterable[Element]) -> frozenset:
        F = tuple(F)
        return frozenset(self.mul(e, f) for e in E for f in F)

    def power_set(self, E: Iterable[Element], k: int) -> frozenset:
        """``E^k``; ``E^0`` is the identity singleton."""
        out = frozenset([self.identity])
        E = frozenset(E)
        for _ in range(k):
            out = self.product_set(out, E)
        return out

    def inverse_set(self, E: Iterable[Element]) -> frozenset:
        return frozenset(self.inv(e) for e in E)

    def translate(self, g: Element, E: Iterable[Element]) -> frozenset:
        return frozenset(self.mul(g, e) for e in E)

    def enumerate_all(self) -> frozenset:
        if not self.is_finite:
            raise UniverseError(f"cannot enumerate infinite universe {self}")
        return frozenset(itertools.product(*(range(m) for m in self.moduli)))

    def cells(self) -> list[Element]:
        """All elements of a finite universe in sorted order."""
        return sorted(self.enumerate_all())

    def far_cells(self, avoid: Iterable[Element], count: int = 3) -> list[Element]:
        """``count`` cells of an infinite universe lying outside ``avoid``."""
        if self.is_finite:
            raise UniverseError(f"{self} is finite")
        r = self.radius(avoid) + 1
        out = []
        for j in range(count):
            coords = [0] * self.dim
            coords[0] = r + j
            out.append(tuple(coords))
        return out

    # -- text -------------------------------------------------------------

    def parse_element(self, text: str) -> Element:
        return self.element(*parse_element(text))


def format_element(a: Element) -> str:
    return "(" + ",".join(str(c) for c in a) + ")"


def parse_element(text: str) -> tuple[int, ...]:
    m = _ELEMENT.match(text.strip())
    if m is None:
        raise UniverseError(f"malformed element literal {text!r}")
    if m.group(1) is None:
        return ()
    return tuple(int(c) for c in m.group(1).split(","))
