"""The ``nuca`` command line.

Exit codes: 0 holds/found, 1 refuted, 2 inconclusive, 64 usage or parse error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .configurations import Configuration, Pattern, restrict
from .decide import (
    EXIT_CODES,
    HOLDS,
    INCONCLUSIVE,
    PropertyReport,
    injectivity_oracle,
    perturbation_invert,
    post_surjectivity_check,
    pre_injectivity_check,
    reversibility_search,
    stable_sweep,
    surjectivity_window,
    ubs_localize,
)
from .engine import Nuca, UnsupportedError, WindowError, async_run, compose, evaluate_window, iterate
from .linear import LinearLocalRule, double_dual_check, dual, to_nuca
from .rules import BudgetExceeded, default_budget
from .specfile import SpecError, dump_spec, load_spec, parse_pattern, parse_schedule, spec_from_rules
from .suites import SUITES, run_suite
from .universe import UniverseError

USAGE_ERROR = 64
CHECKS = ("injective", "surjective-window", "reversible", "post-surjective", "pre-injective", "stable")


class NucaGroup(click.Group):
    """Maps usage and parse errors to exit code 64 (click would use 2, our 'inconclusive')."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.exceptions.Abort:
            click.echo("aborted", err=True)
            sys.exit(USAGE_ERROR)
        except click.ClickException as exc:
            exc.show()
            sys.exit(USAGE_ERROR)
        except (SpecError, UniverseError, WindowError, UnsupportedError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(USAGE_ERROR)
        sys.exit(rv if isinstance(rv, int) else 0)


# -- helpers -------------------------------------------------------------------------


def _load(path):
    return load_spec(path)


def _nuca(spec) -> Nuca:
    config = spec.require_config()
    if isinstance(config.background, LinearLocalRule):
        return to_nuca(config)
    return Nuca(config)


def _budget(flag, spec=None) -> int:
    if flag is not None:
        return flag
    if spec is not None and "budget" in spec.params:
        return spec.params["budget"]
    return default_budget()


def _param(flag, spec, key, default):
    if flag is not None:
        return flag
    return spec.params.get(key, default)


def _emit(header: dict, body_lines: list[str], body_dict: dict, as_json: bool):
    if as_json:
        click.echo(json.dumps({**header, **body_dict}, indent=2))
    else:
        for k, v in header.items():
            click.echo(f"{k}={v}")
        for line in body_lines:
            click.echo(line)


def _emit_report(command: str, spec, budget: int, rep: PropertyReport, as_json: bool, extra: dict | None = None):
    header = {"command": command, "spec_digest": spec.digest(), "budget": budget, **(extra or {})}
    _emit(header, rep.lines(), rep.as_dict(), as_json)
    return rep.exit_code


def _write_spec(path, config, params=None):
    text = dump_spec(spec_from_rules(config, params))
    Path(path).write_text(text)
    return text


common = [
    click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), required=True,
                 help="Experiment spec file."),
    click.option("--budget", type=click.IntRange(min=1), default=None, help="Enumeration budget."),
    click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON."),
]


def with_common(f):
    for opt in reversed(common):
        f = opt(f)
    return f


@click.group(cls=NucaGroup)
def cli():
    """Evaluate, check and invert non-uniform cellular automata."""


# -- engine commands ----------------------------------------------------------------


@cli.command("eval")
@with_common
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Pattern or configuration file.")
@click.option("--window", type=click.IntRange(min=0), default=None, help="Report the output on ball(window).")
@click.option("--steps", type=click.IntRange(min=0), default=1)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def eval_cmd(spec_path, budget, as_json, input_path, window, steps, out):
    """Apply the automaton to a configuration or a finite pattern."""
    spec = _load(spec_path)
    n = _nuca(spec)
    u = n.universe
    x = parse_pattern(Path(input_path).read_text(), u)
    window = _param(window, spec, "window", None)
    if isinstance(x, Pattern) or not n.is_closed_form:
        if window is None:
            raise click.UsageError("a finite pattern or sparse rules need --window")
        if steps != 1:
            raise click.UsageError("windowed evaluation supports --steps 1 only")
        result = evaluate_window(n, x, u.ball(window))
    else:
        result = iterate(n, x, steps)
        if window is not None:
            result = restrict(result, u.ball(window))
    text = str(result)
    if out:
        Path(out).write_text(text + "\n")
    header = {"command": "eval", "spec_digest": spec.digest(), "budget": _budget(budget, spec), "steps": steps}
    if window is not None:
        header["window"] = window
    _emit(header, [f"output={text}"], {"output": text}, as_json)
    return 0


@cli.command("compose")
@click.option("--outer", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--inner", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--budget", type=click.IntRange(min=1), default=None)
@click.option("--json", "as_json", is_flag=True)
def compose_cmd(outer, inner, out, budget, as_json):
    """Write a single automaton computing outer after inner."""
    a, b = _load(outer), _load(inner)
    budget = _budget(budget, a)
    try:
        c = compose(_nuca(a), _nuca(b), budget)
    except BudgetExceeded as exc:
        _emit({"command": "compose", "budget": budget}, [f"verdict={INCONCLUSIVE}", f"reason={exc}"],
              {"verdict": INCONCLUSIVE, "reason": str(exc)}, as_json)
        return EXIT_CODES[INCONCLUSIVE]
    spec = spec_from_rules(c.rules)
    text = dump_spec(spec)
    if out:
        Path(out).write_text(text)
    header = {"command": "compose", "outer_digest": a.digest(), "inner_digest": b.digest(),
              "spec_digest": spec.digest(), "budget": budget}
    lines = [f"memory={len(c.memory)}", f"exceptions={len(c.rules.exceptions)}"]
    if not out:
        lines += text.splitlines()
    _emit(header, lines, {"memory": len(c.memory), "exceptions": len(c.rules.exceptions), "spec": text}, as_json)
    return 0


@cli.command("async")
@with_common
@click.option("--schedule", "schedule_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--rule", "rule_name", default=None, help="Rule applied on update sets (default: the background).")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Initial configuration (default: all zero).")
@click.option("--steps", type=click.IntRange(min=0), default=None, help="Run only the first steps.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def async_cmd(spec_path, budget, as_json, schedule_path, rule_name, input_path, steps, out):
    """Run an asynchronous update schedule."""
    spec = _load(spec_path)
    u = spec.universe
    if rule_name is None:
        rule = spec.require_config().background
    elif rule_name in spec.rules:
        rule = spec.rules[rule_name]
    else:
        raise click.UsageError(f"unknown rule {rule_name!r}")
    if isinstance(rule, LinearLocalRule):
        from .linear import to_table

        rule = to_table(rule)
    schedule = parse_schedule(Path(schedule_path).read_text(), u)
    x0 = Configuration.constant(u, 0)
    if input_path:
        x0 = parse_pattern(Path(input_path).read_text(), u)
        if isinstance(x0, Pattern):
            raise click.UsageError("async runs need a configuration (add background=<letter>)")
    result = async_run(rule, schedule, x0, steps)
    text = str(result)
    if out:
        Path(out).write_text(text + "\n")
    ran = len(schedule) if steps is None else min(steps, len(schedule))
    header = {"command": "async", "spec_digest": spec.digest(), "budget": _budget(budget, spec), "steps": ran}
    _emit(header, [f"output={text}"], {"output": text}, as_json)
    return 0


# -- decision commands ----------------------------------------------------------------


@cli.command("check")
@click.argument("prop", type=click.Choice(CHECKS))
@with_common
@click.option("--rmax", type=click.IntRange(min=0), default=None)
@click.option("--window", type=click.IntRange(min=0), default=None)
def check_cmd(prop, spec_path, budget, as_json, rmax, window):
    """Decide or semi-decide a dynamical property."""
    spec = _load(spec_path)
    n = _nuca(spec)
    u = n.universe
    budget = _budget(budget, spec)
    rmax = _param(rmax, spec, "rmax", 2)
    window = _param(window, spec, "window", 1)
    try:
        if prop == "injective":
            if u.is_finite:
                rep = injectivity_oracle(n, budget)
            else:
                rep = perturbation_invert(n, rmax, budget)
                rep.property = "injective"
                if rep.verdict == HOLDS:
                    rep.details["via"] = "inverse found"
        elif prop == "surjective-window":
            rep = surjectivity_window(n, u.ball(window), budget)
        elif prop == "reversible":
            rep = reversibility_search(n, rmax, budget)
        elif prop == "post-surjective":
            rep = post_surjectivity_check(n, window, _param(None, spec, "r_correction", max(rmax, window + 1)), budget)
        elif prop == "pre-injective":
            rep = pre_injectivity_check(n, window, budget)
        else:
            if u.is_finite:
                rep = stable_sweep(n, "invertible", budget)
            else:
                rep = reversibility_search(n, rmax, budget)
                rep.property = "stably_injective"
    except BudgetExceeded as exc:
        rep = PropertyReport(prop, INCONCLUSIVE, details={"reason": str(exc)})
    return _emit_report(f"check {prop}", spec, budget, rep, as_json)


@cli.command("invert")
@with_common
@click.option("--rmax", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the inverse as a spec file.")
def invert_cmd(spec_path, budget, as_json, rmax, out):
    """Invert a local perturbation of an invertible cellular automaton."""
    spec = _load(spec_path)
    n = _nuca(spec)
    budget = _budget(budget, spec)
    rep = perturbation_invert(n, _param(rmax, spec, "rmax", 2), budget)
    extra = {}
    if rep.verdict == HOLDS:
        flat = rep.certificate.flat
        if flat is None:
            rep.details["note"] = "inverse kept as stages; flattened rule exceeds the budget"
        elif out:
            _write_spec(out, flat.rules)
            extra["inverse_written"] = out
            extra["inverse_digest"] = spec_from_rules(flat.rules).digest()
    return _emit_report("invert", spec, budget, rep, as_json, extra)


@cli.command("localize")
@with_common
@click.option("--inverse", "inverse_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--window", type=click.IntRange(min=0), default=None, help="E = ball(window).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write p here and q next to it with suffix .inverse.nuca.")
def localize_cmd(spec_path, budget, as_json, inverse_path, window, out):
    """Asymptotically constant p, q agreeing with s, t on a window with q o p = Id."""
    spec, tspec = _load(spec_path), _load(inverse_path)
    s, t = _nuca(spec), _nuca(tspec)
    window = _param(window, spec, "window", 1)
    budget = _budget(budget, spec)
    try:
        loc = ubs_localize(s, t, s.universe.ball(window))
    except ValueError as exc:
        rep = PropertyReport("localizable", INCONCLUSIVE, bounds={"window": window}, details={"reason": str(exc)})
        return _emit_report("localize", spec, budget, rep, as_json)
    details = {"F_size": len(loc.F), "g0": loc.g0, "p_exceptions": len(loc.p.rules.exceptions),
               "q_exceptions": len(loc.q.rules.exceptions)}
    extra = {}
    if out:
        qpath = str(Path(out).with_suffix("")) + ".inverse.nuca"
        _write_spec(out, loc.p.rules)
        _write_spec(qpath, loc.q.rules)
        extra.update(p_written=out, q_written=qpath)
    rep = PropertyReport("localizable", HOLDS, bounds={"window": window}, details=details)
    return _emit_report("localize", spec, budget, rep, as_json, extra)


@cli.command("dual")
@with_common
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def dual_cmd(spec_path, budget, as_json, out):
    """The dual of a linear rule configuration."""
    spec = _load(spec_path)
    s = spec.require_config()
    if not isinstance(s.background, LinearLocalRule):
        raise click.UsageError("dual needs linear rules (linrule)")
    try:
        d = dual(s)
    except NotImplementedError as exc:
        raise click.UsageError(str(exc)) from None
    dspec = spec_from_rules(d, linear=spec.linear)
    text = dump_spec(dspec)
    if out:
        Path(out).write_text(text)
    dd = double_dual_check(s)
    header = {"command": "dual", "spec_digest": spec.digest(), "budget": _budget(budget, spec),
              "dual_digest": dspec.digest()}
    lines = [f"double_dual={'holds' if dd else 'refuted'}"]
    if not out:
        lines += text.splitlines()
    _emit(header, lines, {"double_dual": bool(dd), "spec": text}, as_json)
    return 0 if dd else 1


@cli.command("verify")
@click.argument("suite", type=click.Choice([*SUITES, "all"]))
@click.option("--seed", type=int, default=0)
@click.option("--json", "as_json", is_flag=True)
def verify_cmd(suite, seed, as_json):
    """Run a named verification suite."""
    names = list(SUITES) if suite == "all" else [suite]
    reports = [run_suite(name, seed) for name in names]
    ok = all(r.passed for r in reports)
    if as_json:
        click.echo(json.dumps({"seed": seed, "suites": [r.as_dict() for r in reports]}, indent=2))
    else:
        click.echo(f"seed={seed}")
        for r in reports:
            for line in r.lines():
                click.echo(line)
    return 0 if ok else 1


def main(argv=None):
    cli.main(args=argv, prog_name="nuca")


if __name__ == "__main__":
    main()
