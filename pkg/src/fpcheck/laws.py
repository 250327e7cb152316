"""Exhaustive law checking over small enumerated process domains.

Every algebraic claim about the process algebra is registered here as a
:class:`Law` and evaluated on the full Cartesian power of an
:class:`EnumerationDomain`.  Running each law on both the unrestricted and
the rejection-free ("total") domains tells us which side conditions the
claim actually needs.
"""

from __future__ import annotations

import functools
import itertools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import algebra as A
from .algebra import FuzzyProcess, ExecutionUniverse

DEFAULT_BUDGET = 10**7
MAX_COUNTEREXAMPLES = 10
MANIFEST_VERSION = 1

UNCONDITIONAL = "unconditional"
TOTAL_ONLY = "total-arguments-only"
UNKNOWN = "unknown"


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int, what: str = "tuples"):
        super().__init__(f"{what} required: {required} exceeds budget {budget}")
        self.required = required
        self.budget = budget


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("FPCHECK_BUDGET")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"FPCHECK_BUDGET must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError("FPCHECK_BUDGET must be positive")
    return value


def universe_of_size(n: int) -> ExecutionUniverse:
    """Standard universe ``a, b, c, ...`` used by the harness."""
    if n < 1:
        raise ValueError("universe size must be >= 1")
    return ExecutionUniverse(
        [chr(ord("a") + i) if i < 26 else f"e{i}" for i in range(n)]
    )


@dataclass(frozen=True)
class EnumerationDomain:
    universe: ExecutionUniverse
    grid_k: int = 1
    total_only: bool = False

    def __post_init__(self):
        if self.grid_k < 1:
            raise ValueError("grid_k must be a positive integer")

    @classmethod
    def of_size(cls, n: int, grid_k: int = 1, total_only: bool = False) -> "EnumerationDomain":
        return cls(universe_of_size(n), grid_k, total_only)

    @property
    def mode(self) -> str:
        return "crisp" if self.grid_k == 1 else "fuzzy-grid"

    def values(self) -> list[Fraction]:
        return [Fraction(i, self.grid_k) for i in range(self.grid_k + 1)]

    def size(self) -> int:
        per_label = (self.grid_k + 1) ** 2 - (1 if self.total_only else 0)
        return per_label ** len(self.universe)

    def describe(self) -> str:
        grid = "crisp" if self.grid_k == 1 else f"grid k={self.grid_k}"
        scope = "total" if self.total_only else "unrestricted"
        return f"{grid} |E|={len(self.universe)} {scope}"

    def to_json(self) -> dict:
        return {
            "universe": list(self.universe.labels),
            "mode": self.mode,
            "grid_k": self.grid_k,
            "total_only": self.total_only,
        }


def enumerate_processes(domain: EnumerationDomain, budget: int = DEFAULT_BUDGET) -> list[FuzzyProcess]:
    """Every process of ``domain`` exactly once, in lexicographic order.

    The first label is the most significant position; per label the
    (delta, gamma) pairs run in ascending lexicographic order.
    """
    count = domain.size()
    if count > budget:
        raise BudgetExceeded(count, budget, "processes")
    vals = domain.values()
    pairs = [(d, g) for d in vals for g in vals if not (domain.total_only and not d and not g)]
    out = []
    for combo in itertools.product(pairs, repeat=len(domain.universe)):
        out.append(
            FuzzyProcess(
                domain.universe,
                tuple(d for d, _ in combo),
                tuple(g for _, g in combo),
            )
        )
    return out


def crisp_testers(universe: ExecutionUniverse, budget: int = DEFAULT_BUDGET) -> tuple[FuzzyProcess, ...]:
    """Tester domain for the testing characterization: crisp total processes."""
    count = 3 ** len(universe)
    if count > budget:
        raise BudgetExceeded(count, budget, "testers")
    return _testers(universe)


@functools.lru_cache(maxsize=64)
def _testers(universe: ExecutionUniverse) -> tuple[FuzzyProcess, ...]:
    return tuple(enumerate_processes(EnumerationDomain(universe, 1, True)))


@dataclass(frozen=True)
class Law:
    id: str
    arity: int
    level: str  # "membership" | "support"
    family: str
    claim: Callable[..., bool] = field(compare=False, repr=False)
    statement: str = ""

    def __call__(self, *args) -> bool:
        return self.claim(*args)


@dataclass
class LawReport:
    law_id: str
    domains: list[EnumerationDomain]
    tuples_checked: int
    counterexamples: list[tuple[FuzzyProcess, ...]]
    precondition_class: str = UNKNOWN
    runs: list["LawReport"] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {
            "law": self.law_id,
            "domains": [d.to_json() for d in self.domains],
            "tuples_checked": self.tuples_checked,
            "passed": self.passed,
            "precondition_class": self.precondition_class,
            "counterexamples": [
                [A.process_to_json(p) for p in tup] for tup in self.counterexamples
            ],
        }


# -- claims --------------------------------------------------------------

def _implies(a: bool, b: bool) -> bool:
    return b or not a


def _prop1(p, q, r):
    return _implies(A.fuzzy_refines(p, q), A.fuzzy_refines(A.product(p, r), A.product(q, r)))


def _prop1_support(p, q, r):
    return _implies(A.support_refines(p, q), A.support_refines(A.product(p, r), A.product(q, r)))


def _delta_mono(p, q, r):
    if not A.fuzzy_refines(p, q):
        return True
    pr, qr = A.product(p, r), A.product(q, r)
    return all(a >= b for a, b in zip(pr.dvals, qr.dvals))


def _cor1(refines):
    def claim(p, q):
        return _implies(refines(p, q), refines(p, A.product(p, q)))
    return claim


def _cor2i(refines):
    def claim(p1, p2, q1, q2):
        return _implies(
            refines(p1, q1) and refines(p2, q2),
            refines(A.product(p1, p2), A.product(q1, q2)),
        )
    return claim


def _cor2ii(refines):
    def claim(p1, p2, q):
        return _implies(refines(p1, q) and refines(p2, q), refines(A.product(p1, p2), q))
    return claim


def _th1(refines, robust):
    def claim(p, q):
        return refines(p, q) == robust(A.product(A.reflect(p), q))
    return claim


def _th2(refines, robust):
    def claim(p, q):
        passes_all = True
        for r in _testers(p.universe):
            if robust(A.product(r, p)) and not robust(A.product(r, q)):
                passes_all = False
                break
        return refines(p, q) == passes_all
    return claim


def _th3(refines):
    def claim(p, q, r):
        return refines(p, A.product(q, r)) == refines(A.sum(p, A.reflect(q)), r)
    return claim


def _th4i(p):
    return A.is_robust(A.join(p, A.omega(p.universe)))


def _th4ii(p):
    return A.is_chaotic(A.meet(p, A.omega(p.universe)))


def _th4iii(p):
    w = A.omega(p.universe)
    return A.product(A.join(p, w), A.meet(p, w)) == p


def _prop2(p, q):
    if not (A.is_robust(p) and A.is_robust(q)):
        return True
    return all(
        A.is_robust(op(p, q)) for op in (A.product, A.sum, A.join, A.meet)
    )


def _prop3(p, q):
    r = A.fuzzy_refines(p, q)
    return r == (A.join(p, q) == q) == (A.meet(p, q) == p)


def _prop3ii(p, q, r):
    return A.meet(p, A.join(q, r)) == A.join(A.meet(p, q), A.meet(p, r))


def _prop3iii(p, q, r):
    return A.join(p, A.meet(q, r)) == A.meet(A.join(p, q), A.join(p, r))


def _omega_unit(p):
    return A.product(p, A.omega(p.universe)) == p


def _involution(p):
    return A.reflect(A.reflect(p)) == p


def _sum_duality(p, q):
    return A.sum(p, q) == A.sum_by_duality(p, q)


def _omega_join_reflect(universe):
    w = A.omega(universe)
    return A.join(w, A.reflect(w)) == w


def _commutative(p, q):
    return all(op(p, q) == op(q, p) for op in (A.product, A.sum, A.join, A.meet))


def _fuzzy_implies_support(p, q):
    return _implies(A.fuzzy_refines(p, q), A.support_refines(p, q))


_F, _S = A.fuzzy_refines, A.support_refines
_RF, _RS = A.is_robust, A.is_robust_support

LAWS: list[Law] = [
    Law("prop1", 3, "membership", "product monotonicity", _prop1,
        "p ⊑ q ⇒ p⊗r ⊑ q⊗r"),
    Law("prop1-support", 3, "support", "product monotonicity", _prop1_support,
        "supp(p ⊑ q) ⇒ supp(p⊗r ⊑ q⊗r)"),
    Law("delta-mono", 3, "membership", "product monotonicity", _delta_mono,
        "p ⊑ q ⇒ δ(p⊗r) ≥ δ(q⊗r)"),
    Law("cor1", 2, "membership", "product strengthening", _cor1(_F),
        "p ⊑ q ⇒ p ⊑ p⊗q"),
    Law("cor1-support", 2, "support", "product strengthening", _cor1(_S),
        "supp(p ⊑ q) ⇒ supp(p ⊑ p⊗q)"),
    Law("cor2i", 4, "membership", "componentwise composition", _cor2i(_F),
        "p1 ⊑ q1 ∧ p2 ⊑ q2 ⇒ p1⊗p2 ⊑ q1⊗q2"),
    Law("cor2i-support", 4, "support", "componentwise composition", _cor2i(_S),
        "support-level p1 ⊑ q1 ∧ p2 ⊑ q2 ⇒ p1⊗p2 ⊑ q1⊗q2"),
    Law("cor2ii", 3, "membership", "componentwise composition", _cor2ii(_F),
        "p1 ⊑ q ∧ p2 ⊑ q ⇒ p1⊗p2 ⊑ q"),
    Law("cor2ii-support", 3, "support", "componentwise composition", _cor2ii(_S),
        "support-level p1 ⊑ q ∧ p2 ⊑ q ⇒ p1⊗p2 ⊑ q"),
    Law("th1", 2, "membership", "relative correctness", _th1(_F, _RF),
        "p ⊑ q ⇔ γ(-p⊗q) ≡ 1"),
    Law("th1-support", 2, "support", "relative correctness", _th1(_S, _RS),
        "supp(p ⊑ q) ⇔ Y(-p⊗q) = E"),
    Law("th2", 2, "membership", "testing", _th2(_F, _RF),
        "p ⊑ q ⇔ ∀ crisp total r: r⊗p robust ⇒ r⊗q robust"),
    Law("th2-support", 2, "support", "testing", _th2(_S, _RS),
        "supp(p ⊑ q) ⇔ ∀ crisp total r: Y(r⊗p)=E ⇒ Y(r⊗q)=E"),
    Law("th3", 3, "membership", "design inequality", _th3(_F),
        "p ⊑ q⊗r ⇔ p⊕-q ⊑ r"),
    Law("th3-support", 3, "support", "design inequality", _th3(_S),
        "supp(p ⊑ q⊗r) ⇔ supp(p⊕-q ⊑ r)"),
    Law("th4i", 1, "membership", "robust/chaotic split", _th4i, "γ(p⊔Ω) ≡ 1"),
    Law("th4ii", 1, "membership", "robust/chaotic split", _th4ii, "δ(p⊓Ω) ≡ 1"),
    Law("th4iii", 1, "membership", "robust/chaotic split", _th4iii, "p = (p⊔Ω)⊗(p⊓Ω)"),
    Law("prop2", 2, "membership", "robust closure", _prop2,
        "p, q robust ⇒ p⊗q, p⊕q, p⊔q, p⊓q robust"),
    Law("prop3", 2, "membership", "lattice", _prop3,
        "p ⊑ q ⇔ p⊔q = q ⇔ p⊓q = p"),
    Law("prop3ii", 3, "membership", "lattice", _prop3ii,
        "p⊓(q⊔r) = (p⊓q)⊔(p⊓r)"),
    Law("prop3iii", 3, "membership", "lattice", _prop3iii,
        "p⊔(q⊓r) = (p⊔q)⊓(p⊔r)"),
    Law("omega-join-reflect", 0, "membership", "identities", _omega_join_reflect,
        "Ω ⊔ -Ω = Ω"),
    Law("omega-unit", 1, "membership", "identities", _omega_unit, "p⊗Ω = p"),
    Law("reflect-involution", 1, "membership", "identities", _involution, "--p = p"),
    Law("sum-duality", 2, "membership", "identities", _sum_duality,
        "p⊕q = -(-p ⊗ -q)"),
    Law("commutativity", 2, "membership", "identities", _commutative,
        "⊗, ⊕, ⊔, ⊓ commute"),
    Law("refines-support", 2, "membership", "refinement levels", _fuzzy_implies_support,
        "p ⊑ q ⇒ supp(p ⊑ q)"),
]

REGISTRY: dict[str, Law] = {law.id: law for law in LAWS}


def get_law(law_id: str) -> Law:
    try:
        return REGISTRY[law_id]
    except KeyError:
        raise KeyError(f"unknown law {law_id!r}") from None


def _tuple_count(law: Law, domain: EnumerationDomain) -> int:
    return domain.size() ** law.arity


def check_law(
    law: Law | str,
    domain: EnumerationDomain,
    budget: int = DEFAULT_BUDGET,
    vacuous: A.Rational | None = None,
) -> LawReport:
    """Evaluate ``law`` on every argument tuple drawn from ``domain``.

    Counterexamples are kept in enumeration order, at most
    :data:`MAX_COUNTEREXAMPLES` of them.  ``precondition_class`` is only
    meaningful on a single domain when the law passes (unconditional on an
    unrestricted domain); :func:`classify_preconditions` compares domains.
    """
    if isinstance(law, str):
        law = get_law(law)
    needed = _tuple_count(law, domain)
    if needed > budget:
        raise BudgetExceeded(needed, budget)
    processes = enumerate_processes(domain, budget)

    if vacuous is None:
        return _run(law, domain, processes)
    with A.vacuous_constant(vacuous):
        return _run(law, domain, processes)


def _run(law: Law, domain: EnumerationDomain, processes: Sequence[FuzzyProcess]) -> LawReport:
    if law.arity == 0:
        # Zero-arity claims are statements about the universe itself.
        counter = [] if law.claim(domain.universe) else [()]
        return _single(law, domain, 1, counter)

    claim = law.claim
    counter: list[tuple] = []
    checked = 0
    for args in itertools.product(processes, repeat=law.arity):
        checked += 1
        if not claim(*args) and len(counter) < MAX_COUNTEREXAMPLES:
            counter.append(args)
    return _single(law, domain, checked, counter)


def _single(law, domain, checked, counter) -> LawReport:
    if counter:
        cls = UNKNOWN
    else:
        cls = TOTAL_ONLY if domain.total_only else UNCONDITIONAL
    return LawReport(law.id, [domain], checked, counter, cls)


def replay(law: Law | str, args: Sequence[FuzzyProcess]) -> bool:
    """Re-evaluate ``law`` on one argument tuple; True means the claim holds."""
    if isinstance(law, str):
        law = get_law(law)
    if law.arity == 0:
        raise ValueError("zero-arity laws have no argument tuple to replay")
    return law.claim(*args)


# -- precondition classification ------------------------------------------

@dataclass(frozen=True)
class Envelope:
    """Which domains each law is swept on.

    Crisp universes go up to ``max_universe`` (capped at 3, or 2 for arity
    four); the fuzzy grid is used up to |E|=2 for arity <= 2 and |E|=1 above.
    """

    max_universe: int = 3
    grid_k: int = 2
    total_only: bool = False

    def domains(self, arity: int) -> list[EnumerationDomain]:
        crisp_cap = 3 if arity <= 3 else 2
        fuzzy_cap = 2 if arity <= 2 else 1
        scopes = (True,) if self.total_only else (False, True)
        out = []
        for n in range(1, min(self.max_universe, crisp_cap) + 1):
            for t in scopes:
                out.append(EnumerationDomain.of_size(n, 1, t))
        if self.grid_k > 1:
            for n in range(1, min(self.max_universe, fuzzy_cap) + 1):
                for t in scopes:
                    out.append(EnumerationDomain.of_size(n, self.grid_k, t))
        return out

    def describe(self) -> str:
        scope = "total-only" if self.total_only else "unrestricted+total"
        return f"max-universe={self.max_universe} grid={self.grid_k} {scope}"


DEFAULT_ENVELOPE = Envelope()


def classify_preconditions(
    law: Law | str,
    max_universe: int = 3,
    grid_k: int = 2,
    *,
    total_only: bool = False,
    budget: int = DEFAULT_BUDGET,
    vacuous: A.Rational | None = None,
) -> LawReport:
    """Run ``law`` over an envelope of domains and find the class that holds.

    ``unconditional`` if every domain passes; ``total-arguments-only`` if
    only the rejection-free domains pass; ``unknown`` otherwise.  The
    aggregated counterexamples are those of the first failing domain.
    """
    if isinstance(law, str):
        law = get_law(law)
    env = Envelope(max_universe, grid_k, total_only)
    runs = [check_law(law, d, budget, vacuous) for d in env.domains(law.arity)]
    total_ok = all(r.passed for r in runs if r.domains[0].total_only)
    free_runs = [r for r in runs if not r.domains[0].total_only]
    free_ok = all(r.passed for r in free_runs)
    if not total_ok:
        cls = UNKNOWN
    elif free_runs and free_ok:
        cls = UNCONDITIONAL
    else:
        cls = TOTAL_ONLY
    failing = next((r for r in runs if not r.passed), None)
    return LawReport(
        law.id,
        [d for r in runs for d in r.domains],
        sum(r.tuples_checked for r in runs),
        list(failing.counterexamples) if failing else [],
        cls,
        runs,
    )


def render_manifest(reports: Sequence[LawReport], envelope: Envelope) -> str:
    """Deterministic text form of a set of aggregated reports."""
    lines = [
        f"# fpcheck laws manifest v{MANIFEST_VERSION}",
        f"# envelope: {envelope.describe()}",
    ]
    for rep in reports:
        law = REGISTRY[rep.law_id]
        lines.append(
            f"law {law.id} level={law.level} arity={law.arity} class={rep.precondition_class}"
        )
        for run in rep.runs:
            verdict = "pass" if run.passed else "FAIL"
            lines.append(f"  {run.domains[0].describe()} tuples={run.tuples_checked} {verdict}")
        if rep.counterexamples:
            args = [A.process_to_json(p) for p in rep.counterexamples[0]]
            lines.append("  first-counterexample " + json.dumps(args, sort_keys=True))
    return "\n".join(lines) + "\n"


def run_envelope(
    envelope: Envelope = DEFAULT_ENVELOPE,
    budget: int = DEFAULT_BUDGET,
    laws: Sequence[Law] = LAWS,
) -> list[LawReport]:
    return [
        classify_preconditions(
            law, envelope.max_universe, envelope.grid_k,
            total_only=envelope.total_only, budget=budget,
        )
        for law in laws
    ]
