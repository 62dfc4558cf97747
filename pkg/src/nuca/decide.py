"""Decision procedures, bounded semi-decisions and constructive inversion.

Every check returns a :class:`PropertyReport` whose verdict is one of
``holds``, ``refuted`` or ``inconclusive``.  Over infinite universes the
checks are bounded searches and the bounds used are recorded in the
report; a bounded search that finds nothing is never reported as a proof.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .configurations import Configuration, Pattern
from .engine import (
    CheckResult,
    Nuca,
    UnsupportedError,
    compose,
    evaluate,
    evaluate_batch,
    evaluate_window,
    finite_configurations,
    identity_at_cells,
    identity_check,
)
from .rules import (
    AsymptoticallyConstant,
    BlockMap,
    BudgetExceeded,
    LocalRule,
    _weights,
    all_patterns,
    check_budget,
    induced_local_map,
    projection_rule,
    restrict_rules,
    ubs_constant,
    verify_ubs,
)
from .universe import Element, format_element

HOLDS, REFUTED, INCONCLUSIVE = "holds", "refuted", "inconclusive"
EXIT_CODES = {HOLDS: 0, REFUTED: 1, INCONCLUSIVE: 2}
PROPERTIES = ("injective", "surjective", "post_surjective", "pre_injective", "invertible")


@dataclass
class PropertyReport:
    property: str
    verdict: str
    witness: dict | None = None
    bounds: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    certificate: object = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def __bool__(self):
        return self.verdict == HOLDS

    def lines(self) -> list[str]:
        out = [f"property={self.property}", f"verdict={self.verdict}"]
        for k, v in self.bounds.items():
            out.append(f"{k}={v}")
        for k, v in self.details.items():
            out.append(f"{k}={_render(v)}")
        if self.witness:
            out.append("witness=" + " ".join(f"{k}:{_render(v)}" for k, v in self.witness.items()))
        return out

    def as_dict(self) -> dict:
        d = {"property": self.property, "verdict": self.verdict, "bounds": dict(self.bounds)}
        d["details"] = {k: _plain(v) for k, v in self.details.items()}
        if self.witness:
            d["witness"] = {k: _render(v) for k, v in self.witness.items()}
        return d


def _plain(v):
    return v if isinstance(v, (bool, int, float, str)) else _render(v)


def _render(v) -> str:
    if isinstance(v, Configuration) and v.universe.is_finite:
        return "".join(str(v[g]) for g in v.universe.cells())
    if isinstance(v, Pattern):
        return str(v) if v.values else "(empty)"
    if isinstance(v, tuple) and v and all(isinstance(c, int) for c in v):
        return format_element(v)
    return str(v)


@dataclass(frozen=True, eq=False)
class InverseObject:
    """An inverse map as a composite of stages.

    ``stages`` is in composition order: the last stage is applied first.
    A :class:`BlockMap` stage ``Phi`` acts as ``Phi x Id`` on the cells
    outside its domain.  ``flat`` is a single equivalent automaton when
    one was built within budget.
    """

    stages: tuple
    flat: Nuca | None = None
    kind: str = "two-sided"

    def apply(self, x: Configuration) -> Configuration:
        for stage in reversed(self.stages):
            x = evaluate(stage, x) if isinstance(stage, Nuca) else stage.apply_product(x)
        return x

    def verify(self, original: Nuca, radius: int = 3, budget: int | None = None) -> CheckResult:
        """Check the inverse relation(s) on every configuration with exceptions in ``ball(radius)``.

        Over a finite universe every configuration is checked.
        """
        u = original.universe
        q = original.q
        count = 0
        for x in _perturbations(u, q, radius, budget):
            count += 1
            if self.apply(evaluate(original, x)) != x:
                return CheckResult(False, witness=x, cells_checked=count)
            if self.kind == "two-sided" and evaluate(original, self.apply(x)) != x:
                return CheckResult(False, witness=x, cells_checked=count)
        return CheckResult(True, cells_checked=count)


def _perturbations(u, q, radius, budget=None):
    if u.is_finite:
        X = finite_configurations(u, q, budget)
        cells = u.cells()
        for row in X.tolist():
            yield Configuration(u, 0, dict(zip(cells, row)))
        return
    cells = sorted(u.ball(radius))
    check_budget(q * q ** len(cells), budget, "perturbation enumeration")
    for b in range(q):
        for row in all_patterns(q, len(cells)).tolist():
            yield Configuration(u, b, dict(zip(cells, row)))


def _word(row) -> str:
    return "".join(str(int(v)) for v in row)


# -- brute force on finite universes ---------------------------------------------


def _finite_image(n: Nuca, budget):
    X = finite_configurations(n.universe, n.q, budget)
    Y = evaluate_batch(n, X)
    keys = Y @ _weights(n.q, Y.shape[1])
    return X, Y, keys


def injectivity_oracle(n: Nuca, budget: int | None = None) -> PropertyReport:
    """Exact injectivity (and surjectivity) by enumerating every configuration.

    The witness is the lexicographically first colliding pair.
    """
    u = n.universe
    if not u.is_finite:
        raise ValueError(f"injectivity oracle needs a finite universe, got {u}")
    bounds = {"configurations": n.q ** u.order}
    try:
        X, Y, keys = _finite_image(n, budget)
    except BudgetExceeded as exc:
        return PropertyReport("injective", INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})
    uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
    surjective = len(uniq) == len(keys)
    details = {"surjective": surjective, "image_size": len(uniq)}
    if surjective:
        return PropertyReport("injective", HOLDS, bounds=bounds, details=details)
    i = int(first[counts > 1].min())
    j = int(np.flatnonzero(keys == keys[i])[1])
    cells = u.cells()
    witness = {
        "x": Configuration(u, 0, dict(zip(cells, X[i].tolist()))),
        "y": Configuration(u, 0, dict(zip(cells, X[j].tolist()))),
        "image": Configuration(u, 0, dict(zip(cells, Y[i].tolist()))),
    }
    return PropertyReport("injective", REFUTED, witness, bounds, details)


def _finite_surjectivity(n: Nuca, budget, name: str) -> PropertyReport:
    u = n.universe
    bounds = {"configurations": n.q ** u.order}
    try:
        X, Y, keys = _finite_image(n, budget)
    except BudgetExceeded as exc:
        return PropertyReport(name, INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})
    reached = np.zeros(len(keys), dtype=bool)
    reached[keys] = True
    if reached.all():
        return PropertyReport(name, HOLDS, bounds=bounds, details={"image_size": len(keys)})
    miss = int(np.flatnonzero(~reached)[0])
    cells = u.cells()
    witness = {"unreached": Configuration(u, 0, dict(zip(cells, X[miss].tolist())))}
    return PropertyReport(name, REFUTED, witness, bounds, {"image_size": int(reached.sum())})


def surjectivity_window(n: Nuca, E: Iterable[Element], budget: int | None = None) -> PropertyReport:
    """Compute the window image ``{sigma_s(x)|_E}`` by enumerating ``A^{EM}``.

    A pattern on ``E`` outside the image refutes surjectivity.  A full
    window image is only evidence, so it is reported as inconclusive.
    """
    u = n.universe
    E = sorted(E)
    bm = induced_local_map(u, E, restrict_rules(n.rules, E))
    bounds = {"window": len(E), "inputs": n.q ** len(bm.domain)}
    try:
        tab = bm.table(budget)
    except BudgetExceeded as exc:
        return PropertyReport("surjective", INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})
    keys = tab @ _weights(n.q, len(E))
    reached = np.zeros(n.q ** len(E), dtype=bool)
    reached[keys] = True
    details = {"window_image_size": int(reached.sum()), "window_patterns": len(reached)}
    if reached.all():
        details["window_surjective"] = True
        return PropertyReport("surjective", INCONCLUSIVE, bounds=bounds, details=details)
    miss = int(np.flatnonzero(~reached)[0])
    word = all_patterns(n.q, len(E))[miss]
    witness = {"unreached": Pattern.from_word(u, E, word.tolist())}
    return PropertyReport("surjective", REFUTED, witness, bounds, details)


# -- left inverses ---------------------------------------------------------------


@dataclass
class _Obstruction:
    cell: Element
    u: Pattern
    v: Pattern


def left_inverse_at(n: Nuca, N: Sequence[Element], budget: int | None = None):
    """Try to build ``t`` with memory ``N`` and ``sigma_t o sigma_s = Id``.

    For each cell class the outputs ``o(u)`` of the translated induced
    local map are tabulated over ``u`` in ``A^{NM}``; a rule exists iff
    equal outputs always come from patterns agreeing at the identity.
    Table entries outside the image are filled with letter 0.  Returns the
    automaton, or an obstruction.
    """
    if not n.is_closed_form:
        raise UnsupportedError("left inverse search needs asymptotically constant rules")
    u, q, M, s = n.universe, n.q, n.memory, n.rules
    N = tuple(N)
    NM = tuple(sorted(u.product_set(N, M)))
    check_budget(q ** len(NM), budget, "left inverse search")
    pos = {h: i for i, h in enumerate(NM)}
    cols = [[pos[u.mul(k, m)] for m in M] for k in N]
    U = all_patterns(q, len(NM))
    ident = U[:, pos[u.identity]]
    wN = _weights(q, len(N))
    special = u.product_set(s.support, u.inverse_set(N))
    if u.is_finite:
        cells = u.cells()
        rest = [g for g in cells if g not in special]
        rep = rest[0] if rest else cells[0]
    else:
        rep = u.far_cells(special, 1)[0]
        cells = [rep] + sorted(special)
    cache = {}
    rules = {}
    for g in cells:
        key = tuple(s.rule_at(u.mul(g, k)) for k in N)
        if key not in cache:
            mid = np.column_stack([r.apply_many(U[:, c]) for r, c in zip(key, cols)])
            o = mid @ wN
            tab = np.full(q ** len(N), -1, dtype=np.int64)
            tab[o] = ident
            bad = np.flatnonzero(tab[o] != ident)
            if len(bad):
                i = int(bad[0])
                j = int(np.flatnonzero((o == o[i]) & (ident != ident[i]))[0])
                a, b = sorted((i, j))
                return _Obstruction(g, Pattern.from_word(u, NM, U[a].tolist()), Pattern.from_word(u, NM, U[b].tolist()))
            tab[tab < 0] = 0
            cache[key] = LocalRule(q, N, tuple(tab.tolist()))
        rules[g] = cache[key]
    background = rules[rep]
    return Nuca(AsymptoticallyConstant(u, background, {g: rules[g] for g in cells}))


def reversibility_search(n: Nuca, r_max: int, budget: int | None = None) -> PropertyReport:
    """Search a left inverse with memory ``ball(r)`` for ``r = 0..r_max``."""
    u = n.universe
    last = None
    for r in range(r_max + 1):
        try:
            t = left_inverse_at(n, sorted(u.ball(r)), budget)
        except BudgetExceeded as exc:
            return PropertyReport("reversible", INCONCLUSIVE, bounds={"rmax": r_max, "radius": r},
                                  details={"reason": str(exc)})
        if isinstance(t, Nuca):
            check = identity_check(t, n, budget)
            if not check.holds:
                raise RuntimeError(f"constructed left inverse fails at cell {check.cell}")
            return PropertyReport("reversible", HOLDS, bounds={"rmax": r_max, "radius": r},
                                  details={"inverse_memory": len(t.memory)},
                                  certificate=InverseObject((t,), flat=t, kind="left"))
        last = t
    details = {"reason": f"no left inverse with memory ball(r), r <= {r_max}"}
    if last is not None:
        details.update(obstruction_cell=last.cell, obstruction_u=last.u, obstruction_v=last.v)
    return PropertyReport("reversible", INCONCLUSIVE, bounds={"rmax": r_max}, details=details)


# -- block decompositions ----------------------------------------------------------


def extract_block_map(
    qn: Nuca, B: Iterable[Element], F: Iterable[Element], seed: int = 0, spot_checks: int = 20
) -> BlockMap:
    """The block ``Phi: A^B -> A^B`` with ``Phi(x) = sigma_q(y)|_B`` for any extension ``y``.

    Needs the projection rule on ``B \\ F`` and ``FM`` inside ``B``; then
    the value on ``B`` never reads outside ``B``.
    """
    u, q, M = qn.universe, qn.q, qn.memory
    B, F = frozenset(B), frozenset(F)
    if not F <= B:
        raise ValueError(f"cell {format_element(min(F - B))} of F is outside B")
    pi = projection_rule(q, M)
    for g in sorted(B - F):
        if qn.rule_at(g) != pi:
            raise ValueError(f"cell {format_element(g)} of B \\ F does not carry the projection rule")
    leak = u.product_set(F, M) - B
    if leak:
        raise ValueError(f"cell {format_element(min(leak))} of FM lies outside B")
    cells = tuple(sorted(B))
    pos = {h: i for i, h in enumerate(cells)}
    active = [(pos[g], qn.rule_at(g), [pos[u.mul(g, m)] for m in M]) for g in sorted(F)]

    def func(rows):
        out = rows.copy()
        for i, rule, cols in active:
            out[:, i] = rule.apply_many(rows[:, cols])
        return out

    phi = BlockMap(q, cells, cells, func)
    if spot_checks and cells:
        rng = random.Random(seed)
        ring = sorted(u.product_set(B, M) - B)
        for _ in range(spot_checks):
            word = [rng.randrange(q) for _ in cells]
            expect = phi(word)
            for _ in range(2):
                y = dict(zip(cells, word))
                y.update((g, rng.randrange(q)) for g in ring)
                got = evaluate_window(qn, Pattern(u, y), cells)
                if tuple(got[g] for g in cells) != expect:
                    raise AssertionError("block map depends on cells outside B")
    return phi


def product_decomposition(qn: Nuca, blocks: Sequence[Iterable[Element]]) -> list[BlockMap]:
    """Split ``sigma_q`` on a finite universe as a product of block maps over a partition."""
    u = qn.universe
    if not u.is_finite:
        raise ValueError("product decomposition is only materialized on finite universes")
    blocks = [frozenset(b) for b in blocks]
    covered = frozenset().union(*blocks)
    if covered != u.enumerate_all() or sum(len(b) for b in blocks) != u.order:
        raise ValueError("blocks must partition the universe")
    pi = projection_rule(qn.q, qn.memory)
    return [extract_block_map(qn, b, {g for g in b if qn.rule_at(g) != pi}, spot_checks=0) for b in blocks]


def apply_product(maps: Sequence[BlockMap], x: Configuration) -> Configuration:
    for bm in maps:
        x = x.with_values(bm.apply_pattern(x).values) if bm.domain else x
    return x


def _flatten_block(u, q, phi: BlockMap, budget) -> Nuca:
    """``phi x Id`` as an automaton with memory ``E^-1 E``."""
    E = phi.domain
    K = tuple(sorted(u.product_set(u.inverse_set(E), E)))
    check_budget(q ** len(K), budget, "flattened block rule")
    posK = {h: i for i, h in enumerate(K)}
    U = all_patterns(q, len(K))
    pi = projection_rule(q, K)
    exceptions = {}
    for i, g in enumerate(E):
        gi = u.inv(g)
        cols = [posK[u.mul(gi, e)] for e in E]
        exceptions[g] = LocalRule(q, K, tuple(phi.apply_many(U[:, cols])[:, i].tolist()))
    return Nuca(AsymptoticallyConstant(u, pi, exceptions))


def perturbation_invert(n: Nuca, r_max: int = 2, budget: int | None = None) -> PropertyReport:
    """Invert a local perturbation of an invertible cellular automaton.

    1. find ``d`` with ``sigma_c o sigma_d = sigma_d o sigma_c = Id`` for the background ``c``;
    2. ``q = s o d`` is the projection off the exception support ``F``;
    3. on ``E = FMN`` the composite splits as ``Phi x Id``;
    4. ``Phi`` bijective gives ``sigma_s^-1 = sigma_d o (Phi^-1 x Id)``, otherwise a
       collision of ``Phi`` pulled back through ``sigma_d`` refutes injectivity.
    """
    if not n.is_closed_form:
        raise UnsupportedError("perturbation_invert needs an asymptotically constant rule configuration")
    u, q, s = n.universe, n.q, n.rules
    bounds = {"rmax": r_max}
    cn = Nuca.constant(u, s.background)
    d = None
    try:
        for r in range(r_max + 1):
            t = left_inverse_at(cn, sorted(u.ball(r)), budget)
            if isinstance(t, Nuca) and identity_check(cn, t, budget).holds:
                d, bounds["background_inverse_radius"] = t, r
                break
    except BudgetExceeded as exc:
        return PropertyReport("invertible", INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})
    if d is None:
        return PropertyReport("invertible", INCONCLUSIVE, bounds=bounds,
                              details={"reason": f"background CA not invertible within r_max={r_max}"})
    F = s.support
    if not F:
        inv = InverseObject((d,), flat=d)
        return PropertyReport("invertible", HOLDS, bounds=bounds, certificate=inv)
    try:
        qn = compose(n, d, budget)
        E = u.product_set(u.product_set(F, n.memory), d.memory)
        check_budget(q ** len(E), budget, "block map on FMN")
        phi = extract_block_map(qn, E, F)
        bounds["block_cells"] = len(E)
        pair = phi.collision(budget)
        if pair is not None:
            cells = phi.domain
            y1 = Configuration(u, 0, dict(zip(cells, pair[0])))
            y2 = Configuration(u, 0, dict(zip(cells, pair[1])))
            x1, x2 = evaluate(d, y1), evaluate(d, y2)
            if evaluate(n, x1) != evaluate(n, x2) or x1 == x2:
                raise RuntimeError("pulled-back collision does not collide")
            return PropertyReport("invertible", REFUTED, {"x": x1, "y": x2, "image": evaluate(n, x1)}, bounds,
                                  {"reason": "block map on FMN is not injective"})
        phi_inv = phi.inverse(budget)
        flat = None
        try:
            flat = compose(d, _flatten_block(u, q, phi_inv, budget), budget)
        except BudgetExceeded:
            pass
        if flat is not None and not (identity_check(flat, n, budget) and identity_check(n, flat, budget)):
            raise RuntimeError("flattened inverse fails the identity check")
        return PropertyReport("invertible", HOLDS, bounds=bounds,
                              certificate=InverseObject((d, phi_inv), flat=flat))
    except BudgetExceeded as exc:
        return PropertyReport("invertible", INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})


# -- localization of uniformly bounded singularity -------------------------------------


@dataclass(frozen=True, eq=False)
class Localization:
    p: Nuca
    q: Nuca
    F: frozenset
    g0: Element | None
    window: frozenset


def ubs_localize(s: Nuca, t: Nuca, E: Iterable[Element], search_limit: int = 64) -> Localization:
    """Asymptotically constant ``p, q`` agreeing with ``s, t`` on ``E`` and with ``sigma_q o sigma_p = Id``.

    ``E`` is first enlarged to a symmetric set containing both memories
    (and the generators, so that ``FE^2 \\ FE`` is nonempty).  ``F`` is a
    ball containing ``E^3`` with ``s`` constant, equal to ``c``, on
    ``FE^3 \\ F``.  ``p`` is ``s`` on ``FE`` and ``c`` elsewhere; ``q`` is
    ``t`` on ``FE`` and ``t(g0)`` elsewhere for the smallest ``g0`` in
    ``FE^2 \\ FE``.
    """
    u = s.universe
    E0 = frozenset(E)
    W = set(E0) | {u.identity} | set(s.memory) | set(t.memory)
    if not u.is_finite:
        W |= u.generators()
    W = frozenset(W) | u.inverse_set(W)
    E3 = u.power_set(W, 3)
    F = verify_ubs(s.rules, E3, search_limit)
    if F is None:
        raise ValueError(f"no ball F of radius <= {search_limit} makes s constant on F E^3 \\ F")
    c = ubs_constant(s.rules, F, E3)
    FE = u.product_set(F, W)
    FE2 = u.product_set(FE, W)
    pre = identity_at_cells(t, s, sorted(FE2))
    if not pre.holds:
        raise ValueError(f"t is not a left inverse of s at cell {format_element(pre.cell)}")
    p = Nuca(AsymptoticallyConstant(u, c, {g: s.rule_at(g) for g in FE}))
    ring = FE2 - FE
    g0 = min(ring) if ring else None
    q_background = t.rule_at(g0 if g0 is not None else min(FE))
    qn = Nuca(AsymptoticallyConstant(u, q_background, {g: t.rule_at(g) for g in FE}))
    if any(p.rule_at(g) != s.rule_at(g) or qn.rule_at(g) != t.rule_at(g) for g in E0):
        raise RuntimeError("localized rules disagree with the originals on E")
    check = identity_check(qn, p)
    if not check.holds:
        raise RuntimeError(f"localized pair fails the identity check at {format_element(check.cell)}")
    return Localization(p, qn, F, g0, W)


# -- dynamical properties ----------------------------------------------------------------


def post_surjectivity_check(
    n: Nuca, r_defect: int = 1, r_correction: int = 2, budget: int | None = None
) -> PropertyReport:
    """Post-surjectivity: exact on finite universes, a bounded search otherwise.

    Over an infinite universe, ``x`` ranges over configurations with
    exceptions in ``ball(r_defect)`` and ``y`` over modifications of
    ``sigma_s(x)`` inside ``ball(r_defect)``; a correction ``z`` sharing the
    background of ``x`` with exceptions in ``ball(r_correction)`` is
    searched.  A refutation means no correction exists within that radius.
    """
    u, q, M = n.universe, n.q, n.memory
    if u.is_finite:
        return _finite_surjectivity(n, budget, "post_surjective")
    D = sorted(u.ball(r_defect))
    C = sorted(u.ball(r_correction))
    Minv = u.inverse_set(M)
    R = sorted(u.product_set(set(C) | set(D), Minv) | set(D))
    bounds = {"r_defect": r_defect, "r_correction": r_correction}
    try:
        check_budget(q ** len(C) + q ** (2 * len(D)), budget, "post-surjectivity search")
    except BudgetExceeded as exc:
        return PropertyReport("post_surjective", INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})
    bm = induced_local_map(u, R, restrict_rules(n.rules, R))
    dpos = {h: i for i, h in enumerate(bm.domain)}
    rpos = [R.index(g) for g in D]
    wR = _weights(q, len(R))
    for b in range(q):
        Z = np.full((q ** len(C), len(bm.domain)), b, dtype=np.int64)
        Z[:, [dpos[g] for g in C]] = all_patterns(q, len(C))
        reach = set((bm.apply_many(Z) @ wR).tolist())
        X = np.full((q ** len(D), len(bm.domain)), b, dtype=np.int64)
        X[:, [dpos[g] for g in D]] = all_patterns(q, len(D))
        images = bm.apply_many(X)
        mods = all_patterns(q, len(D))
        for i, img in enumerate(images):
            Y = np.tile(img, (len(mods), 1))
            Y[:, rpos] = mods
            keys = (Y @ wR).tolist()
            for j, k in enumerate(keys):
                if k not in reach:
                    x = Configuration(u, b, dict(zip(D, X[i, [dpos[g] for g in D]].tolist())))
                    y = Pattern.from_word(u, R, Y[j].tolist())
                    return PropertyReport("post_surjective", REFUTED, {"x": x, "y_on_R": y}, bounds,
                                          {"bounded": True, "note": f"no z with exceptions in ball({r_correction})"})
    return PropertyReport("post_surjective", INCONCLUSIVE, bounds=bounds,
                          details={"toward": HOLDS, "pairs_checked": q * q ** (2 * len(D))})


def pre_injectivity_check(n: Nuca, r: int = 1, budget: int | None = None) -> PropertyReport:
    """Search distinct asymptotic pairs with exceptions in ``ball(r)`` and equal images."""
    u, q, M = n.universe, n.q, n.memory
    if u.is_finite:
        rep = injectivity_oracle(n, budget)
        rep.property = "pre_injective"
        return rep
    D = sorted(u.ball(r))
    W = sorted(u.product_set(D, u.inverse_set(M)))
    bounds = {"radius": r}
    try:
        check_budget(q * q ** len(D), budget, "pre-injectivity search")
    except BudgetExceeded as exc:
        return PropertyReport("pre_injective", INCONCLUSIVE, bounds=bounds, details={"reason": str(exc)})
    bm = induced_local_map(u, W, restrict_rules(n.rules, W))
    dpos = {h: i for i, h in enumerate(bm.domain)}
    cols = [dpos[g] for g in D]
    words = all_patterns(q, len(D))
    for b in range(q):
        X = np.full((len(words), len(bm.domain)), b, dtype=np.int64)
        X[:, cols] = words
        keys = bm.apply_many(X) @ _weights(q, len(W))
        uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
        if (counts > 1).any():
            i = int(first[counts > 1].min())
            j = int(np.flatnonzero(keys == keys[i])[1])
            x = Configuration(u, b, dict(zip(D, words[i].tolist())))
            y = Configuration(u, b, dict(zip(D, words[j].tolist())))
            return PropertyReport("pre_injective", REFUTED, {"x": x, "y": y}, bounds)
    return PropertyReport("pre_injective", INCONCLUSIVE, bounds=bounds, details={"toward": HOLDS})


def stable_sweep(n: Nuca, prop: str, budget: int | None = None) -> PropertyReport:
    """Run an exact check on every translate ``sigma_{gs}`` of a finite-universe automaton."""
    u = n.universe
    if not u.is_finite:
        raise ValueError("stable sweep needs a finite universe; use reversibility_search instead")
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; expected one of {PROPERTIES}")
    name = f"stably_{prop}"
    for g in u.cells():
        shifted = n.shifted(g)
        if prop in ("surjective", "post_surjective"):
            rep = _finite_surjectivity(shifted, budget, prop)
        else:
            rep = injectivity_oracle(shifted, budget)
        if rep.verdict != HOLDS:
            witness = {"translate": g, **(rep.witness or {})}
            return PropertyReport(name, rep.verdict, witness, rep.bounds, rep.details)
    return PropertyReport(name, HOLDS, bounds={"translates": u.order})
