"""Plain-text experiment specs, pattern files and schedule files.

A spec is a sequence of lines::

    # comment
    universe Z
    alphabet 2                      # or: alphabet p=2 n=2
    rule pi memory=[(0),(1)] table=0011
    linrule a p=2 n=1 memory=[(0),(1)] m(0)=[[1]] m(1)=[[1]]
    background=pi
    exception (3) = xor
    sparse base=4 rule=xor          # optional offset=k
    window=2                        # also rmax, seed, budget, steps, ...

Tables list one digit per letter in lexicographic pattern order; letters
of 10 or more are written in brackets, e.g. ``[12]``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .configurations import Configuration, Pattern
from .linear import LinearAlphabet, LinearLocalRule
from .rules import AsymptoticallyConstant, LocalRule, SparseSingular
from .universe import GroupUniverse, UniverseError, format_element, parse_element

__all__ = [
    "ExperimentSpec",
    "SpecError",
    "dump_spec",
    "load_spec",
    "parse_pattern",
    "parse_schedule",
    "parse_spec",
    "spec_from_rules",
]

PARAMS = ("window", "rmax", "seed", "budget", "steps", "r_defect", "r_correction", "radius")


class SpecError(ValueError):
    def __init__(self, line: int | None, fieldname: str, message: str):
        self.line, self.field = line, fieldname
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}field '{fieldname}': {message}")


@dataclass
class ExperimentSpec:
    universe: GroupUniverse
    q: int
    linear: LinearAlphabet | None = None
    rules: dict = field(default_factory=dict)
    config: AsymptoticallyConstant | SparseSingular | None = None
    params: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.params.get("seed", 0)

    def digest(self) -> str:
        return hashlib.sha256(dump_spec(self).encode()).hexdigest()[:16]

    def require_config(self):
        if self.config is None:
            raise SpecError(None, "background", "spec defines no rule configuration")
        return self.config


# -- literals ------------------------------------------------------------------

_LETTER = re.compile(r"\[(\d+)\]|(\d)")
_CELL = r"\([^()]*\)"


def _parse_letters(text: str) -> tuple:
    pos, out = 0, []
    for m in _LETTER.finditer(text):
        if m.start() != pos:
            break
        out.append(int(m.group(1) or m.group(2)))
        pos = m.end()
    if pos != len(text):
        raise ValueError(f"bad letter at position {pos} of {text!r}")
    return tuple(out)


def _letters(values) -> str:
    return "".join(str(v) if v < 10 else f"[{v}]" for v in values)


def _parse_memory(text: str, u: GroupUniverse) -> tuple:
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"expected [(..),(..)], got {text!r}")
    cells = re.findall(_CELL, text[1:-1])
    rest = re.sub(_CELL, "", text[1:-1]).replace(",", "").strip()
    if rest or not cells:
        raise ValueError(f"malformed memory list {text!r}")
    return tuple(u.element(parse_element(c)) for c in cells)


def _memory(memory) -> str:
    return "[" + ",".join(format_element(m) for m in memory) + "]"


def _options(tokens, line: int, allowed: set) -> dict:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise SpecError(line, tok, "expected key=value")
        if key not in allowed and not key.startswith("m("):
            raise SpecError(line, key, "unknown option")
        out[key] = value
    return out


def _int(value: str, line: int, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise SpecError(line, name, f"expected an integer, got {value!r}") from None


# -- spec parsing -----------------------------------------------------------------


def parse_spec(text: str) -> ExperimentSpec:
    universe = q = linear = None
    rules: dict = {}
    background = sparse = None
    exceptions: dict = {}
    params: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0]
        if head == "universe":
            try:
                universe = GroupUniverse.parse(line[len("universe"):].strip())
            except UniverseError as exc:
                raise SpecError(lineno, "universe", str(exc)) from None
        elif head == "alphabet":
            rest = line.split()[1:]
            if len(rest) == 1 and "=" not in rest[0]:
                q = _int(rest[0], lineno, "alphabet")
                if q < 2:
                    raise SpecError(lineno, "alphabet", "alphabet needs at least 2 letters")
            else:
                opts = _options(rest, lineno, {"p", "n"})
                try:
                    linear = LinearAlphabet(_int(opts.get("p", ""), lineno, "p"), _int(opts.get("n", "1"), lineno, "n"))
                except ValueError as exc:
                    raise SpecError(lineno, "alphabet", str(exc)) from None
                q = linear.size
        elif head in ("rule", "linrule"):
            _need(universe, lineno, head, "universe")
            _need(q, lineno, head, "alphabet")
            parts = line.split()
            if len(parts) < 2 or "=" in parts[1]:
                raise SpecError(lineno, "name", "rule needs a name")
            name = parts[1]
            if name in rules:
                raise SpecError(lineno, "name", f"rule {name!r} defined twice")
            rules[name] = _parse_rule(head, parts[2:], lineno, universe, q, linear)
        elif line.startswith("background"):
            key, _, value = line.partition("=")
            if key.strip() != "background" or not value.strip():
                raise SpecError(lineno, "background", "expected background=<rule name>")
            background = _lookup(rules, value.strip(), lineno, "background")
        elif head == "exception":
            _need(universe, lineno, head, "universe")
            m = re.fullmatch(rf"exception\s*({_CELL})\s*=\s*(\S+)", line)
            if not m:
                raise SpecError(lineno, "exception", "expected exception (cell) = <rule name>")
            try:
                g = universe.element(parse_element(m.group(1)))
            except UniverseError as exc:
                raise SpecError(lineno, "cell", str(exc)) from None
            if g in exceptions:
                raise SpecError(lineno, "cell", f"duplicate exception at {format_element(g)}")
            exceptions[g] = _lookup(rules, m.group(2), lineno, "exception")
        elif head == "sparse":
            opts = _options(line.split()[1:], lineno, {"base", "rule", "offset"})
            if "base" not in opts or "rule" not in opts:
                raise SpecError(lineno, "sparse", "expected sparse base=<b> rule=<name>")
            sparse = (_int(opts["base"], lineno, "base"), _lookup(rules, opts["rule"], lineno, "rule"),
                      _int(opts.get("offset", "0"), lineno, "offset"))
        elif "=" in line and line.partition("=")[0].strip() in PARAMS:
            key, _, value = line.partition("=")
            params[key.strip()] = _int(value.strip(), lineno, key.strip())
        else:
            raise SpecError(lineno, head, "unknown directive")
    if universe is None:
        raise SpecError(None, "universe", "missing universe line")
    if q is None:
        raise SpecError(None, "alphabet", "missing alphabet line")
    config = None
    if background is None and (exceptions or sparse):
        raise SpecError(None, "background", "exceptions given without a background rule")
    if background is not None:
        try:
            if sparse:
                base, singular, offset = sparse
                config = SparseSingular(universe, background, base, singular, exceptions, offset)
            else:
                config = AsymptoticallyConstant(universe, background, exceptions)
        except ValueError as exc:
            raise SpecError(None, "sparse" if sparse else "exception", str(exc)) from None
    return ExperimentSpec(universe, q, linear, rules, config, params)


def _need(value, line, directive, what):
    if value is None:
        raise SpecError(line, directive, f"{what} must be declared first")


def _lookup(rules, name, line, fieldname):
    if name not in rules:
        raise SpecError(line, fieldname, f"unknown rule {name!r}")
    return rules[name]


def _parse_rule(kind, tokens, line, u, q, linear):
    if kind == "rule":
        opts = _options(tokens, line, {"memory", "table"})
        for key in ("memory", "table"):
            if key not in opts:
                raise SpecError(line, key, "missing")
        try:
            memory = _parse_memory(opts["memory"], u)
        except (ValueError, UniverseError) as exc:
            raise SpecError(line, "memory", str(exc)) from None
        try:
            table = _parse_letters(opts["table"])
            return LocalRule(q, memory, table)
        except ValueError as exc:
            raise SpecError(line, "table", str(exc)) from None
    opts = _options(tokens, line, {"p", "n", "memory"})
    if linear is None:
        raise SpecError(line, "linrule", "linear rules need a linear alphabet (alphabet p=.. n=..)")
    p, n = _int(opts.get("p", str(linear.p)), line, "p"), _int(opts.get("n", str(linear.n)), line, "n")
    if (p, n) != (linear.p, linear.n):
        raise SpecError(line, "p", f"rule over F_{p}^{n} but alphabet is F_{linear.p}^{linear.n}")
    try:
        memory = _parse_memory(opts.get("memory", ""), u)
    except (ValueError, UniverseError) as exc:
        raise SpecError(line, "memory", str(exc)) from None
    mats = {}
    for key, value in opts.items():
        if not key.startswith("m("):
            continue
        try:
            g = u.element(parse_element(key[1:]))
            mat = json.loads(value)
            if len(mat) != n or any(len(row) != n for row in mat):
                raise ValueError(f"expected a {n}x{n} matrix")
        except (ValueError, UniverseError) as exc:
            raise SpecError(line, key, str(exc)) from None
        mats[g] = mat
    try:
        return LinearLocalRule.from_dict(p, n, memory, mats)
    except ValueError as exc:
        raise SpecError(line, "memory", str(exc)) from None


def load_spec(path) -> ExperimentSpec:
    return parse_spec(Path(path).read_text())


# -- serialization -------------------------------------------------------------------


def _rule_line(name: str, r) -> str:
    if isinstance(r, LinearLocalRule):
        mats = " ".join(f"m{format_element(m)}={json.dumps([list(row) for row in a], separators=(',', ':'))}"
                        for m, a in zip(r.memory, r.matrices))
        return f"linrule {name} p={r.p} n={r.n} memory={_memory(r.memory)} {mats}"
    return f"rule {name} memory={_memory(r.memory)} table={_letters(r.table)}"


def dump_spec(spec: ExperimentSpec) -> str:
    out = [f"universe {spec.universe}"]
    if spec.linear is not None:
        out.append(f"alphabet p={spec.linear.p} n={spec.linear.n}")
    else:
        out.append(f"alphabet {spec.q}")
    names = {}
    for name, r in spec.rules.items():
        out.append(_rule_line(name, r))
        names.setdefault(r, name)
    s = spec.config
    if s is not None:
        out.append(f"background={names[s.background]}")
        if isinstance(s, SparseSingular):
            extra = f" offset={s.offset}" if s.offset else ""
            out.append(f"sparse base={s.base} rule={names[s.singular]}{extra}")
            exc = s.extra
        else:
            exc = s.exceptions
        for g in sorted(exc):
            out.append(f"exception {format_element(g)} = {names[exc[g]]}")
    for key in PARAMS:
        if key in spec.params:
            out.append(f"{key}={spec.params[key]}")
    return "\n".join(out) + "\n"


def spec_from_rules(config, params: dict | None = None, linear: LinearAlphabet | None = None) -> ExperimentSpec:
    """Wrap a rule configuration in a spec, naming rules ``r0, r1, ...`` in first-use order."""
    rules, seen = {}, {}
    ordered = [config.background]
    if isinstance(config, SparseSingular):
        ordered.append(config.singular)
        ordered += [config.extra[g] for g in sorted(config.extra)]
    else:
        ordered += [config.exceptions[g] for g in sorted(config.exceptions)]
    for r in ordered:
        if r not in seen:
            seen[r] = f"r{len(seen)}"
            rules[seen[r]] = r
    if linear is None and isinstance(config.background, LinearLocalRule):
        linear = config.background.alphabet
    return ExperimentSpec(config.universe, config.q, linear, rules, config, dict(params or {}))


# -- patterns and schedules --------------------------------------------------------------


def parse_pattern(text: str, u: GroupUniverse) -> Pattern | Configuration:
    """``background=b (g)=v ...`` gives a configuration; without a background, a pattern."""
    body = " ".join(line.split("#", 1)[0] for line in text.splitlines())
    background = None
    values = {}
    pos = 0
    token = re.compile(rf"\s*(?:background\s*=\s*(\d+|\[\d+\])|({_CELL})\s*=\s*(\d+|\[\d+\]))\s*")
    while pos < len(body):
        m = token.match(body, pos)
        if not m or m.end() == pos:
            raise SpecError(None, "pattern", f"cannot parse {body[pos:pos + 20]!r}")
        pos = m.end()
        if m.group(1) is not None:
            background = _parse_letters(m.group(1))[0]
            continue
        try:
            g = u.element(parse_element(m.group(2)))
        except UniverseError as exc:
            raise SpecError(None, "cell", str(exc)) from None
        values[g] = _parse_letters(m.group(3))[0]
    if background is None:
        return Pattern(u, values)
    return Configuration(u, background, values)


def parse_schedule(text: str, u: GroupUniverse) -> list[frozenset]:
    """One update set per line, cells separated by spaces; ``-`` is the empty set."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "-":
            steps.append(frozenset())
            continue
        cells = re.findall(_CELL, line)
        if re.sub(_CELL, "", line).strip():
            raise SpecError(lineno, "schedule", f"cannot parse {line!r}")
        try:
            steps.append(frozenset(u.element(parse_element(c)) for c in cells))
        except UniverseError as exc:
            raise SpecError(lineno, "cell", str(exc)) from None
    return steps
