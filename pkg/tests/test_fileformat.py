import json
import random

import pytest

from eclogic.fileformat import (ModelFileError, dumps_structure, load_structure,
                                load_structure_text)
from eclogic.mcheck import extensions
from eclogic.structures import Pseudomodel, random_model, random_pseudomodel
from eclogic.syntax import LogicId, random_formula
from eclogic.transform import filtrate


def _same_semantics(a, b, rng, n_agents):
    fs = [random_formula(rng, 3, n_agents, ("p", "q")) for _ in range(30)]
    return extensions(a, fs) == extensions(b, fs)


@pytest.mark.parametrize("seed", range(15))
def test_round_trip(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    for S in (random_model(rng, n, rng.randint(1, 5)), random_pseudomodel(rng, n, rng.randint(1, 5))):
        text = dumps_structure(S, {"seed": seed})
        back = load_structure_text(text)
        assert dumps_structure(back, {"seed": seed}) == text
        assert isinstance(back, Pseudomodel) == isinstance(S, Pseudomodel)
        assert _same_semantics(S, back, rng, n)


def test_effectivity_files_round_trip(m0):
    filt = filtrate(m0, random_formula(random.Random(1), 2, 2, ("p",)), LogicId.CLK)
    text = dumps_structure(filt.target)
    assert "effectivity" in json.loads(text)
    assert dumps_structure(load_structure_text(text)) == text


def test_explicit_and_generator_modes_agree():
    base = {"agents": 1, "states": 2, "valuation": {"p": [0]}, "partitions": {"1": [[0, 1]]}}
    explicit = dict(base, effectivity=[
        {"state": s, "coalition": G, "family": fam}
        for s in (0, 1)
        for G, fam in (([], [[0, 1]]), ([1], [[0], [1], [0, 1]]))])
    gens = dict(base, effectivity_mode="generators", effectivity=[
        {"state": s, "coalition": G, "family": fam}
        for s in (0, 1)
        for G, fam in (([], [[0, 1]]), ([1], [[0], [1]]))])
    a = load_structure_text(json.dumps(explicit))
    b = load_structure_text(json.dumps(gens))
    assert a.effectivity.same_as(b.effectivity)


@pytest.mark.parametrize("text,where", [
    ('{"agents": 2,', "line 1"),
    ('{"states": 1}', "top level"),
    ('{"agents": 1, "states": 2, "valuation": {"p": [5]}, "partitions": {}, '
     '"game_forms": []}', "valuation.p[0]"),
    ('{"agents": 1, "states": 1, "valuation": {}, "partitions": {"1": [[0]]}, '
     '"game_forms": [{"state": 0, "actions": [2], "outcomes": [0]}]}', "game_forms[0].outcomes"),
    ('{"agents": 1, "states": 1, "valuation": {}, "partitions": {"3": [[0]]}, '
     '"game_forms": []}', "partitions.3"),
])
def test_errors_name_their_location(text, where):
    with pytest.raises(ModelFileError) as exc:
        load_structure_text(text)
    assert where in str(exc.value)
    assert not exc.value.invalid


def test_invalid_structure_is_flagged(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "agents": 1, "states": 2, "valuation": {}, "partitions": {"1": [[0, 1]]},
        "effectivity": [{"state": s, "coalition": G, "family": [[0, 1], []]}
                        for s in (0, 1) for G in ([], [1])]}))
    with pytest.raises(ModelFileError) as exc:
        load_structure(str(path))
    assert exc.value.invalid and "E1" in str(exc.value) and str(path) in str(exc.value)


def test_labels_and_indices_both_resolve(m0):
    assert m0.state_id("s1") == 1
    assert m0.label(0) == "s0"
