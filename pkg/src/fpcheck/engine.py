"""Verification procedures built on the process algebra.

Refinement conclusions drawn here are at the support level, where the
underlying theorems hold for rejection-free operands.  Any operand with
rejections gets a warning on the verdict; warnings never flip a verdict.
"""

from __future__ import annotations

import functools
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Sequence

from . import algebra as A
from .algebra import FuzzyProcess
from .laws import DEFAULT_BUDGET, crisp_testers

SUPPORT = "support"
MEMBERSHIP = "membership"


@dataclass
class Verdict:
    check: str
    holds: bool
    level: str
    warnings: list[str] = field(default_factory=list)
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "holds": self.holds,
            "level": self.level,
            "warnings": list(self.warnings),
            "witness": self.witness,
            "details": self.details,
        }


def totality_warnings(operands: Sequence[tuple[str, FuzzyProcess]]) -> list[str]:
    out = []
    for name, p in operands:
        rej = A.rejections(p)
        if rej:
            out.append(f"non-total operand {name}: rejections {{{', '.join(rej)}}}")
    return out


def _not_accepted(p: FuzzyProcess) -> str | None:
    for label, g in zip(p.universe.labels, p.gvals):
        if not g:
            return label
    return None


def check_relative_correctness(p: FuzzyProcess, q: FuzzyProcess, names=("p", "q")) -> Verdict:
    """Does ``q`` work correctly in the environment of ``p``?

    Places ``q`` against the reflection of ``p`` and asks whether the
    composite accepts every execution.  For rejection-free operands this
    coincides with support refinement.
    """
    composite = A.product(A.reflect(p), q)
    missing = _not_accepted(composite)
    refines = A.support_refines(p, q)
    verdict = Verdict(
        "relative-correctness",
        missing is None,
        SUPPORT,
        totality_warnings(zip(names, (p, q))),
        None if missing is None else {"label": missing},
        {"support_refines": refines, "composite": A.process_to_json(composite)},
    )
    if verdict.holds != refines:
        verdict.warnings.append("relative correctness disagrees with support refinement")
    return verdict


def check_testing_refinement(
    p: FuzzyProcess, q: FuzzyProcess, names=("p", "q"), budget: int = DEFAULT_BUDGET
) -> Verdict:
    """Does ``q`` pass every crisp total test that ``p`` passes?"""
    witness = None
    for r in crisp_testers(p.universe, budget):
        if A.is_robust_support(A.product(r, p)) and not A.is_robust_support(A.product(r, q)):
            witness = {"tester": A.process_to_json(r)}
            break
    refines = A.support_refines(p, q)
    verdict = Verdict(
        "testing-refinement",
        witness is None,
        SUPPORT,
        totality_warnings(zip(names, (p, q))),
        witness,
        {"support_refines": refines},
    )
    if verdict.holds != refines:
        verdict.warnings.append("testing verdict disagrees with support refinement")
    return verdict


def solve_design_inequality(
    p: FuzzyProcess, q: FuzzyProcess, names=("p", "q")
) -> tuple[FuzzyProcess, Verdict]:
    """Least ``r`` with ``p ⊑ q ⊗ r``, namely ``p ⊕ -q``, plus its check."""
    r_min = A.sum(p, A.reflect(q))
    composite = A.product(q, r_min)
    bad = A.refinement_witness(p, composite, support=True)
    verdict = Verdict(
        "design-inequality",
        bad is None,
        SUPPORT,
        totality_warnings(list(zip(names, (p, q))) + [("r_min", r_min)]),
        None if bad is None else {"label": bad},
        {"r_min": A.process_to_json(r_min)},
    )
    return r_min, verdict


@dataclass
class Component:
    """One componentwise obligation ``target ⊑ parts[0] ⊗ parts[1] ⊗ ...``."""

    target: FuzzyProcess
    parts: list[FuzzyProcess]
    label: str = ""
    part_labels: list[str] = field(default_factory=list)


@dataclass
class ChainStep:
    index: int
    components: list[Component]


def _product_all(items: Sequence[FuzzyProcess]) -> FuzzyProcess:
    return functools.reduce(A.product, items)


def check_chain(steps: Sequence[ChainStep]) -> Verdict:
    """Verify a refinement chain componentwise.

    Step ``i`` relates ``t_i`` (product of the targets) to ``t_{i+1}``
    (product of all parts).  When every component holds, monotonicity of
    the product and transitivity give ``t_0 ⊑ t_n``.
    """
    if not steps:
        raise ValueError("a chain needs at least one step")
    universe = steps[0].components[0].target.universe
    warn: list[str] = []
    witness = None
    for step in steps:
        for j, comp in enumerate(step.components):
            for item in (comp.target, *comp.parts):
                if item.universe != universe:
                    raise A.UniverseMismatchError("chain operands live on different universes")
            labels = comp.part_labels or [f"b{step.index}{j}{k}" for k in range(len(comp.parts))]
            warn += totality_warnings(
                [(comp.label or f"a{step.index}{j}", comp.target), *zip(labels, comp.parts)]
            )
            if witness is None:
                rhs = _product_all(comp.parts)
                bad = A.refinement_witness(comp.target, rhs, support=True)
                if bad is not None:
                    witness = {"step": step.index, "component": j, "label": bad}
    first = _product_all([c.target for c in steps[0].components])
    last = _product_all([p for c in steps[-1].components for p in c.parts])
    direct = A.support_refines(first, last)
    details = {"endpoints_support_refines": direct}
    if witness is None and not direct:
        warn.append("endpoint refinement fails although every component holds")
    return Verdict("chain", witness is None, SUPPORT, list(dict.fromkeys(warn)), witness, details)


@dataclass
class FactorReport:
    process: FuzzyProcess
    robust: FuzzyProcess
    chaotic: FuzzyProcess
    robust_ok: bool
    chaotic_ok: bool
    exact: bool
    differing: list[str]
    warnings: list[str]

    def to_json(self) -> dict:
        return {
            "check": "factor",
            "robust": A.process_to_json(self.robust),
            "chaotic": A.process_to_json(self.chaotic),
            "robust_ok": self.robust_ok,
            "chaotic_ok": self.chaotic_ok,
            "reconstruction": "exact" if self.exact else "inexact",
            "differing": self.differing,
            "warnings": self.warnings,
        }


def factorize(p: FuzzyProcess, name: str = "p") -> FactorReport:
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", A.NonTotalWarning)
        robust, chaotic = A.factor(p)
    rebuilt = A.product(robust, chaotic)
    differing = [
        label
        for label, d1, g1, d2, g2 in zip(p.universe.labels, p.dvals, p.gvals, rebuilt.dvals, rebuilt.gvals)
        if d1 != d2 or g1 != g2
    ]
    return FactorReport(
        p,
        robust,
        chaotic,
        A.is_robust(robust),
        A.is_chaotic(chaotic),
        not differing,
        differing,
        totality_warnings([(name, p)]),
    )


def _first_label(p: FuzzyProcess, bad) -> str | None:
    for label, d, g in zip(p.universe.labels, p.dvals, p.gvals):
        if bad(d, g):
            return label
    return None


def check_assertion(kind: str, args: Sequence[FuzzyProcess], names: Sequence[str] = ()) -> Verdict:
    """Evaluate one DSL assertion kind on already-evaluated operands."""
    names = list(names) or [f"arg{i}" for i in range(len(args))]
    level = MEMBERSHIP
    warn: list[str] = []
    if kind in ("refines", "support-refines"):
        p, q = args
        support = kind == "support-refines"
        level = SUPPORT if support else MEMBERSHIP
        bad = A.refinement_witness(p, q, support=support)
        warn = totality_warnings(zip(names, args))
    elif kind == "equal":
        p, q = args
        if p.universe != q.universe:
            raise A.UniverseMismatchError("operands live on different universes")
        bad = next(
            (l for l, d1, g1, d2, g2 in zip(p.universe.labels, p.dvals, p.gvals, q.dvals, q.gvals)
             if d1 != d2 or g1 != g2),
            None,
        )
    elif kind == "robust":
        bad = _first_label(args[0], lambda d, g: g != A.ONE)
    elif kind == "chaotic":
        bad = _first_label(args[0], lambda d, g: d != A.ONE)
    elif kind == "total":
        bad = _first_label(args[0], lambda d, g: not d and not g)
    else:
        raise ValueError(f"unknown assertion kind {kind!r}")
    return Verdict(kind, bad is None, level, list(dict.fromkeys(warn)), None if bad is None else {"label": bad})
