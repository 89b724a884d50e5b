import random

import pytest

from eclogic.structures import (EffectivityFunction, GameForm, InvalidStructure, Model,
                                Pseudomodel, alpha_effectivity, join, meet, minimal_sets,
                                minimal_transversals, normalize_partition,
                                partition_from_matrix, random_game_form, random_pseudomodel,
                                refines, seeded_playable_effectivity, validate_effectivity,
                                validate_pseudomodel)

from oracles import alpha_family, failing_conditions, same_block


def _fams(E):
    return [[set(E.family(s, G)) for G in range(1 << E.n_agents)] for s in range(E.n_states)]


def test_partition_helpers():
    assert normalize_partition([0b0011, 0b1100], 4) == (0b0011, 0b1100)
    with pytest.raises(InvalidStructure):
        normalize_partition([0b011, 0b110], 3)
    with pytest.raises(InvalidStructure):
        normalize_partition([0b001], 3)
    a, b = (0b0011, 0b1100), (0b0101, 0b1010)
    assert sorted(meet([a, b], 4)) == [1, 2, 4, 8]
    assert join([a, b], 4) == (0b1111,)
    assert refines(meet([a, b], 4), a) is None
    assert refines(a, b) is not None
    assert partition_from_matrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]]) == (0b011, 0b100)


def test_minimal_sets_and_transversals():
    assert minimal_sets([0b011, 0b001, 0b110]) == {0b001, 0b110}
    assert minimal_transversals([0b011, 0b110]) == {0b010, 0b101}


def test_core_examples():
    full = 0b111
    E = EffectivityFunction.explicit(3, 1, [[{full}, {full}]] * 3)
    assert E.core(0, 0) == {full}
    up = EffectivityFunction.from_cores(3, 1, [[{0b001}, {0b001}]] * 3)
    assert up.core(0, 0) == {0b001}
    assert up.family(0, 0) == {X for X in range(8) if X & 1}


def test_random_core_matches_scan():
    rng = random.Random(4)
    for _ in range(50):
        g = random_game_form(rng, 2, 4)
        E = alpha_effectivity(g)
        for s in range(4):
            for G in range(4):
                fam = E.family(s, G)
                scan = {X for X in fam if not any(Y != X and Y & ~X == 0 for Y in fam)}
                assert E.core(s, G) == scan


def test_liveness_violation_reported():
    fams = [[{0, 0b11}, {0b11}], [{0b11}, {0b11}]]
    rep = validate_effectivity(EffectivityFunction.explicit(2, 1, fams))
    assert "E1" in rep.conditions()
    assert any(v.condition == "E1" and v.state == 0 for v in rep.violations)


@pytest.mark.parametrize("seed", range(30))
def test_alpha_effectivity_matches_strategy_oracle(seed):
    rng = random.Random(seed)
    n_agents, n_states = rng.randint(1, 3), rng.randint(1, 4)
    g = random_game_form(rng, n_agents, n_states, 3)
    E = alpha_effectivity(g)
    for s in range(n_states):
        for G in range(1 << n_agents):
            assert set(E.family(s, G)) == alpha_family(g, s, G)
    assert not failing_conditions(_fams(E), n_states, n_agents)
    assert validate_effectivity(E).ok


@pytest.mark.parametrize("seed", range(60))
def test_validator_agrees_with_oracle_on_arbitrary_families(seed):
    rng = random.Random(seed)
    n_agents, n_states = rng.randint(1, 2), rng.randint(1, 3)
    full = (1 << n_states) - 1
    # start from a playable function, then perturb one family
    g = random_game_form(rng, n_agents, n_states, 2)
    fams = _fams(alpha_effectivity(g))
    s, G = rng.randrange(n_states), rng.randrange(1 << n_agents)
    X = rng.randint(0, full)
    if X in fams[s][G]:
        fams[s][G].discard(X)
    else:
        fams[s][G].add(X)
    E = EffectivityFunction.explicit(n_states, n_agents, fams)
    assert validate_effectivity(E).conditions() == failing_conditions(fams, n_states, n_agents)


def test_seeded_generator_yields_playable_functions():
    rng = random.Random(1)
    made = 0
    while made < 50:
        E = seeded_playable_effectivity(rng, 2, 3)
        if E is None:
            continue
        made += 1
        bad = failing_conditions(_fams(E), 3, 2)
        assert bad <= {"E6"} and "E6" not in bad


def test_game_form_validation():
    with pytest.raises(InvalidStructure):
        GameForm(2, 2, ((2, 1), (1, 1)), ((0,), (0,)))
    with pytest.raises(InvalidStructure):
        GameForm(1, 2, ((1,), (1,)), ((2,), (0,)))


def test_model_rejects_non_playable_effectivity():
    fams = [[{0b01, 0b11}, {0b01, 0b11}], [{0b11}, {0b11}]]
    E = EffectivityFunction.explicit(2, 1, fams)
    with pytest.raises(InvalidStructure):
        Model(1, 2, {"p": 1}, ((0b11,),), E)


def test_model_relations(m0):
    assert m0.knowledge(0) == (0b11,)
    assert sorted(m0.intersection(0b11)) == [0b01, 0b10]
    assert m0.common(0b11) == (0b11,)


def test_pseudomodel_violations(m0):
    with pytest.raises(InvalidStructure) as exc:
        Pseudomodel(m0, {0b01: (0b01, 0b10)})
    assert "singleton" in exc.value.report.conditions()
    with pytest.raises(InvalidStructure) as exc:
        Pseudomodel(m0, {0b01: (0b11,), 0b11: (0b11,), 0b10: (0b01, 0b10)})
    assert "antimonotone" in exc.value.report.conditions()


def test_model_lifted_to_pseudomodel_is_valid():
    rng = random.Random(2)
    for _ in range(40):
        pm = random_pseudomodel(rng, 3, rng.randint(1, 5))
        assert validate_pseudomodel(pm).ok
        base = Pseudomodel.from_model(pm.model)
        assert validate_pseudomodel(base).ok and base.is_model()
        for G, part in pm.R.items():
            for H in pm.R:
                if G & H == G:
                    # bigger groups see at least as finely
                    assert all(same_block(part, s, t)
                               for s in range(pm.n_states) for t in range(pm.n_states)
                               if same_block(pm.R[H], s, t))
