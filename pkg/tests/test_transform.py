import json
import random

import pytest

from eclogic.fileformat import load_structure_text
from eclogic.mcheck import extension, extensions
from eclogic.structures import (EffectivityFunction, Model, Pseudomodel, random_model,
                                random_pseudomodel, validate_effectivity)
from eclogic.syntax import LogicId, closure, parse, random_formula
from eclogic.transform import (RepresentativeDependence, filtrate, image, lift_effectivity,
                               lift_pseudomodel)


def _preserved(filt):
    src = extensions(filt.source, filt.cls.formulas)
    tgt = extensions(filt.target, filt.cls.formulas)
    return all(bool(src[g] >> s & 1) == bool(tgt[g] >> c & 1)
               for g in filt.cls.formulas for s, c in enumerate(filt.class_of))


def test_filtrate_top_collapses(m0):
    filt = filtrate(m0, parse("T"), LogicId.CLK)
    assert filt.ok and filt.target.n_states == 1
    assert validate_effectivity(filt.target.effectivity).ok


def test_filtrate_atom_separates(m0):
    filt = filtrate(m0, parse("p"), LogicId.CLK)
    assert filt.ok and filt.target.n_states == 2
    assert _preserved(filt)


def test_filtrate_chain_model():
    # a 4-state chain s0 ~1 s1 ~2 s2 ~1 s3 with p everywhere but s3
    M = load_structure_text(json.dumps({
        "agents": 2, "states": 4, "valuation": {"p": [0, 1, 2]},
        "partitions": {"1": [[0, 1], [2, 3]], "2": [[0], [1, 2], [3]]},
        "game_forms": [{"state": s, "actions": [1, 1], "outcomes": [s]} for s in range(4)]}))
    phi = parse("C{1,2} p")
    assert extension(M, phi).states == 0
    filt = filtrate(M, phi, LogicId.CLC)
    assert filt.ok and _preserved(filt)


def test_representative_dependence_is_reported():
    # s0 and s1 agree on p, but only at s0 can agent 1 force {s0, s1}
    M = load_structure_text(json.dumps({
        "agents": 1, "states": 3, "valuation": {"p": [0, 1]}, "partitions": {"1": [[0, 1, 2]]},
        "game_forms": [{"state": 0, "actions": [2], "outcomes": [0, 2]},
                       {"state": 1, "actions": [1], "outcomes": [2]},
                       {"state": 2, "actions": [1], "outcomes": [2]}]}))
    filt = filtrate(M, parse("p"), LogicId.CL)
    assert not filt.representative_independent
    assert any(isinstance(d, RepresentativeDependence) and d.cls == 0 and d.coalition == 1
               for d in filt.diagnostics)


def test_filtration_size_bound_and_idempotence():
    rng = random.Random(3)
    for _ in range(40):
        M = random_model(rng, 2, rng.randint(1, 6))
        phi = random_formula(rng, 2, 2, ("p", "q"), LogicId.CLK)
        filt = filtrate(M, phi, LogicId.CLK)
        assert len(filt.signatures) <= 2 ** (len(filt.cls) // 2)
        if filt.ok:
            again = filtrate(filt.target, phi, LogicId.CLK)
            assert again.ok
            assert set(again.signatures) == set(filt.signatures)


def test_filtration_with_dist_targets_pseudomodel():
    rng = random.Random(11)
    seen = 0
    for _ in range(60):
        M = random_model(rng, 2, rng.randint(2, 5))
        phi = parse("D{1,2} p & ~K1 p")
        filt = filtrate(M, phi, LogicId.CLD)
        if filt.ok:
            seen += 1
            assert isinstance(filt.target, Pseudomodel) and _preserved(filt)
    assert seen


def test_lift_identity_when_already_a_model(m0):
    pm = Pseudomodel.from_model(m0)
    lift = lift_pseudomodel(pm, parse("D{1,2} p"))
    assert lift.f == (0, 1) and lift.target.n_states == 2


def test_lift_two_state_example(ab):
    phi = parse("D{1,2} p")
    assert extension(ab, phi).states == 0b01
    lift = lift_pseudomodel(ab, phi)
    ext = extension(lift.target, phi)
    for u in lift.preimages(0):
        assert u in ext
    assert all(lift.f[u] == 0 for u in ext.state_list())


def test_lift_without_modal_groups_preserves_truth():
    rng = random.Random(5)
    for _ in range(20):
        pm = random_pseudomodel(rng, 2, rng.randint(1, 4))
        phi = random_formula(rng, 3, 2, ("p", "q"), LogicId.CL)
        lift = lift_pseudomodel(pm, phi)
        src = extensions(pm, [phi])[phi]
        assert extensions(lift.target, [phi])[phi] == image(src, lift.f)


@pytest.mark.parametrize("seed", range(10))
def test_lift_random_pseudomodels(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    pm = random_pseudomodel(rng, n, rng.randint(1, 4))
    phi = random_formula(rng, 3, n, ("p", "q"), LogicId.CLCD)
    lift = lift_pseudomodel(pm, phi)
    assert set(lift.f) == set(range(pm.n_states))
    assert lift.checked == len(closure(phi, LogicId.CLCD))
    assert validate_effectivity(lift.target.effectivity).ok


def test_lift_effectivity_identity_and_validity():
    rng = random.Random(8)
    for _ in range(30):
        M = random_model(rng, 2, rng.randint(1, 4))
        E = M.effectivity
        assert lift_effectivity(E, tuple(range(E.n_states))).same_as(E)
        f = tuple(range(E.n_states)) + tuple(rng.randrange(E.n_states) for _ in range(3))
        Ep = lift_effectivity(E, f)
        assert validate_effectivity(Ep).ok
        # X in E(G)(f(u)) iff the image of X is in E'(G)(u)
        for u, s in enumerate(f):
            for G in range(3):
                for X in range(E.full + 1):
                    assert E.contains(s, G, X) == Ep.contains(u, G, image(X, f))


def test_lift_effectivity_needs_onto_map():
    E = EffectivityFunction.from_cores(2, 1, [[{0b11}, {0b01, 0b10}]] * 2)
    with pytest.raises(ValueError):
        lift_effectivity(E, (0, 0))


def test_model_is_built_from_lifted_effectivity():
    rng = random.Random(12)
    M = random_model(rng, 2, 3)
    f = (0, 1, 2, 0)
    Model(2, 4, {}, ((0b1111,), (0b1111,)), lift_effectivity(M.effectivity, f))
