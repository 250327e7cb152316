from fractions import Fraction

import pytest

import fpcheck.algebra as A
from fpcheck import laws as L
from fpcheck.laws import EnumerationDomain, check_law, classify_preconditions

from conftest import p1


@pytest.mark.parametrize(
    "n, k, total, count",
    [(1, 1, True, 3), (2, 1, False, 16), (2, 2, False, 81), (3, 1, True, 27), (3, 1, False, 64)],
)
def test_enumeration_counts(n, k, total, count):
    procs = L.enumerate_processes(EnumerationDomain.of_size(n, k, total))
    assert len(procs) == count == len(set(procs))
    if total:
        assert all(A.is_total(p) for p in procs)


def test_enumeration_is_exhaustive_and_ordered():
    procs = L.enumerate_processes(EnumerationDomain.of_size(1))
    assert procs == [p1(0, 0), p1(0, 1), p1(1, 0), p1(1, 1)]
    grid = L.enumerate_processes(EnumerationDomain.of_size(2, 2))
    # brute force: every (delta, gamma) assignment appears exactly once
    vals = [Fraction(i, 2) for i in range(3)]
    seen = {(p.dvals, p.gvals) for p in grid}
    assert len(seen) == 81
    assert all(((d1, d2), (g1, g2)) in seen for d1 in vals for d2 in vals for g1 in vals for g2 in vals)


def test_enumeration_budget():
    with pytest.raises(L.BudgetExceeded) as exc:
        L.enumerate_processes(EnumerationDomain.of_size(3, 2), budget=100)
    assert exc.value.required == 9**3


def test_check_law_budget():
    with pytest.raises(L.BudgetExceeded):
        check_law("prop3ii", EnumerationDomain.of_size(3), budget=1000)


def test_prop3_on_fuzzy_grid():
    rep = check_law("prop3", EnumerationDomain.of_size(1, 2))
    assert rep.passed and rep.tuples_checked == 81
    assert rep.precondition_class == L.UNCONDITIONAL


def test_prop1_support_counterexample():
    rep = check_law("prop1-support", EnumerationDomain.of_size(1))
    assert not rep.passed
    assert rep.counterexamples[0] == (p1(1, 0), p1(1, 1), p1(0, 0))
    assert classify_preconditions("prop1-support").precondition_class == L.TOTAL_ONLY


def test_th4iii_total_only():
    rep = check_law("th4iii", EnumerationDomain.of_size(1, total_only=True))
    assert rep.passed and rep.tuples_checked == 3
    bad = check_law("th4iii", EnumerationDomain.of_size(1))
    assert bad.counterexamples == [(p1(0, 0),)]


@pytest.mark.parametrize(
    "law_id, expected",
    [("prop3", L.UNCONDITIONAL), ("th4iii", L.TOTAL_ONLY), ("th1-support", L.TOTAL_ONLY)],
)
def test_classify(law_id, expected):
    rep = classify_preconditions(law_id, max_universe=2)
    assert rep.precondition_class == expected


def test_th1_support_witness_has_rejection():
    rep = classify_preconditions("th1-support", max_universe=2)
    p, q = rep.counterexamples[0]
    assert A.rejections(p)


def test_counterexamples_bounded_and_deterministic():
    a = check_law("prop1", EnumerationDomain.of_size(2))
    b = check_law("prop1", EnumerationDomain.of_size(2))
    assert len(a.counterexamples) == L.MAX_COUNTEREXAMPLES
    assert a.counterexamples == b.counterexamples
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize("law_id", ["prop1", "prop1-support", "th3-support", "cor2i-support", "th4iii", "th2"])
def test_counterexamples_replay(law_id):
    rep = classify_preconditions(law_id, max_universe=2)
    assert rep.counterexamples
    for tup in rep.counterexamples:
        # round trip through the JSON form first
        restored = tuple(A.process_from_json(A.process_to_json(p)) for p in tup)
        assert not L.replay(law_id, restored)


REQUIRED = {
    "product monotonicity": {"prop1", "prop1-support"},
    "product strengthening": {"cor1"},
    "componentwise composition": {"cor2i", "cor2ii"},
    "relative correctness": {"th1"},
    "testing": {"th2"},
    "design inequality": {"th3"},
    "robust/chaotic split": {"th4i", "th4ii", "th4iii"},
    "robust closure": {"prop2"},
    "lattice": {"prop3"},
}


def test_registry_complete():
    for family, ids in REQUIRED.items():
        for law_id in ids:
            assert law_id in L.REGISTRY, law_id
            assert L.REGISTRY[law_id].family == family
    assert len(L.REGISTRY) == len(L.LAWS)


def test_envelope_domains():
    env = L.DEFAULT_ENVELOPE
    sizes = lambda ar: [(len(d.universe), d.grid_k, d.total_only) for d in env.domains(ar)]
    assert (3, 1, False) in sizes(3) and (3, 1, False) not in sizes(4)
    assert (2, 2, False) in sizes(2) and (2, 2, False) not in sizes(3)
    assert all(d.total_only for d in L.Envelope(total_only=True).domains(2))


def test_total_only_classification():
    rep = classify_preconditions("prop3", max_universe=1, grid_k=1, total_only=True)
    assert rep.precondition_class == L.TOTAL_ONLY


def test_vacuous_hook_changes_results():
    dom = EnumerationDomain.of_size(1, total_only=True)
    assert check_law("th4iii", dom).passed
    # the vacuous clause is empty on total processes, so the constant is irrelevant here
    assert check_law("th4iii", dom, vacuous=Fraction(1, 2)).passed
    free = EnumerationDomain.of_size(1)
    assert check_law("prop2", free, vacuous=0).passed
    assert not check_law("th1-support", EnumerationDomain.of_size(1, total_only=True), vacuous=0).passed


def test_manifest_is_deterministic():
    env = L.Envelope(1, 1)
    a = L.render_manifest(L.run_envelope(env), env)
    b = L.render_manifest(L.run_envelope(env), env)
    assert a == b and a.startswith("# fpcheck laws manifest v1")
    for law in L.LAWS:
        assert f"law {law.id} " in a


def test_budget_from_env(monkeypatch):
    monkeypatch.setenv("FPCHECK_BUDGET", "123")
    assert L.budget_from_env() == 123
    monkeypatch.setenv("FPCHECK_BUDGET", "x")
    with pytest.raises(ValueError):
        L.budget_from_env()
