"""Non-uniform cellular automata over finitely generated abelian groups."""

from .configurations import Configuration, Pattern, asymptotic_diff, restrict, shift
from .engine import CheckResult, Nuca, async_run, compose, evaluate, evaluate_window, identity_check
from .rules import AsymptoticallyConstant, BlockMap, LocalRule, SparseSingular, induced_local_map, verify_ubs
from .universe import GroupUniverse

__all__ = [
    "AsymptoticallyConstant",
    "BlockMap",
    "CheckResult",
    "Configuration",
    "GroupUniverse",
    "LocalRule",
    "Nuca",
    "Pattern",
    "SparseSingular",
    "async_run",
    "asymptotic_diff",
    "compose",
    "evaluate",
    "evaluate_window",
    "identity_check",
    "induced_local_map",
    "restrict",
    "shift",
    "verify_ubs",
]
