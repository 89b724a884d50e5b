import random

import pytest

from eclogic.decide import SearchBudget, Verdict, atoms, sat, valid
from eclogic.mcheck import holds
from eclogic.proofcheck import SCHEMES, random_instance
from eclogic.syntax import Know, LogicId, Not, closure, fragment, parse, random_formula

EXACT = SearchBudget(exact=True)


def _sat(text, n=2, budget=EXACT):
    phi = parse(text, n)
    return sat(phi, fragment(phi), n, budget)


def test_atoms_of_an_atom():
    assert len(atoms(closure(parse("p"), LogicId.CL))) == 2


def test_atoms_respect_truth_axiom():
    k, p = parse("K1 p"), parse("p")
    for a in atoms(closure(parse("K1 p & ~p"), LogicId.CLK)):
        assert not (k in a and p not in a)


def test_atoms_unfold_common_knowledge():
    c = parse("C{1,2} p")
    for a in atoms(closure(c, LogicId.CLC)):
        if c in a:
            assert {Know(0, c), Know(1, c), parse("p")} <= a


@pytest.mark.parametrize("text,verdict", [
    ("K1 p & ~p", Verdict.UNSAT),
    ("C{1,2} p & ~K1 p", Verdict.UNSAT),
    ("[1] p & [2] ~p", Verdict.UNSAT),
    ("D{1,2} p & ~K1 p & ~K2 p", Verdict.SAT),
    ("[1] p & [2] q", Verdict.SAT),
    ("[] p & [1,2] ~p", Verdict.UNSAT),
    ("~[] ~p & ~[1,2] p", Verdict.UNSAT),
    ("C{1,2} p & ~C{1,2} C{1,2} p", Verdict.UNSAT),
    ("D{1,2} p & ~D{1,2} D{1,2} p", Verdict.UNSAT),
])
def test_exact_verdicts(text, verdict):
    res = _sat(text)
    assert res.verdict == verdict
    if verdict == Verdict.SAT:
        assert holds(res.witness, res.state, res.formula)


def test_bounded_search_finds_small_witness():
    res = _sat("D{1,2} p & ~K1 p & ~K2 p", budget=SearchBudget())
    assert res.verdict == Verdict.SAT and res.witness.n_states <= 3
    assert holds(res.witness, res.state, res.formula)


def test_bounded_search_reports_unknown_honestly():
    res = _sat("[1] p & [2] ~p", budget=SearchBudget(max_states=2))
    assert res.verdict == Verdict.UNKNOWN
    res = _sat("K1 p & ~p", budget=SearchBudget(max_states=2))
    assert res.verdict == Verdict.UNSAT and res.certificate == "atom-refutation"


def test_valid_examples():
    assert valid(parse("[1,2](p & q) -> [1,2]q"), LogicId.CL, 2, EXACT).verdict == Verdict.VALID
    assert valid(parse("D{1}p <-> K1 p"), LogicId.CLD, 2, EXACT).verdict == Verdict.VALID
    res = valid(parse("p -> [1]p"), LogicId.CL, 2)
    assert res.verdict == Verdict.NOT_VALID
    assert res.witness.n_states == 2
    assert not holds(res.witness, res.state, res.formula)


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(max_states=0)
    with pytest.raises(ValueError):
        sat(parse("K3 p"), LogicId.CLK, 2)
    with pytest.raises(ValueError):
        sat(parse("D{1,2} p"), LogicId.CLC, 2)


def test_enlarging_budget_never_flips_sat():
    rng = random.Random(6)
    for _ in range(40):
        phi = random_formula(rng, 2, 2, ("p",), LogicId.CL)
        verdicts = [sat(phi, LogicId.CL, 2, SearchBudget(max_states=m)).verdict
                    for m in (1, 2, 3)]
        for a, b in zip(verdicts, verdicts[1:]):
            assert not (a == Verdict.SAT and b == Verdict.UNSAT)
        exact = sat(phi, LogicId.CL, 2, EXACT).verdict
        if Verdict.SAT in verdicts:
            assert exact == Verdict.SAT
        if Verdict.UNSAT in verdicts:
            assert exact == Verdict.UNSAT


@pytest.mark.parametrize("scheme", [s for s in SCHEMES if s not in ("Prop",)])
def test_axiom_instances_are_valid(scheme):
    rng = random.Random(sorted(SCHEMES).index(scheme))
    checked = 0
    while checked < 5:
        phi = random_instance(scheme, rng, 2, depth=1, atoms=("p",))
        if len(closure(phi, fragment(phi)).unsigned) > 10:
            continue
        assert valid(phi, fragment(phi), 2, EXACT).verdict == Verdict.VALID
        checked += 1


@pytest.mark.parametrize("seed", range(8))
def test_exact_witnesses_with_dist_are_lifted(seed):
    rng = random.Random(seed)
    phi = random_formula(rng, 3, 3, ("p", "q"), LogicId.CLCD)
    res = sat(phi, fragment(phi), 3, EXACT)
    assert res.verdict in (Verdict.SAT, Verdict.UNSAT)
    if res.verdict == Verdict.SAT:
        assert holds(res.witness, res.state, phi)
    neg = sat(Not(phi), fragment(phi), 3, EXACT)
    assert Verdict.UNSAT not in (res.verdict, neg.verdict) or res.verdict != neg.verdict
