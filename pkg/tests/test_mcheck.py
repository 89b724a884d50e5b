import os
import random
import subprocess
import sys

import numpy as np
import pytest

from eclogic import kernels
from eclogic.mcheck import Program, batch_valid, extension, extensions, holds, valid_in
from eclogic.search import sweep_search, verify_hit
from eclogic.structures import Pseudomodel, random_model, random_pseudomodel
from eclogic.syntax import Common, Dist, Know, parse, random_formula

from oracles import reachable, same_block


def S(ext):
    return set(ext.state_list())


def test_m0_extensions(m0):
    assert S(extension(m0, parse("[1] p"))) == {0, 1}
    assert S(extension(m0, parse("[2] p"))) == set()
    assert S(extension(m0, parse("K1 p"))) == set()
    assert S(extension(m0, parse("D{1,2} p"))) == {0}
    assert S(extension(m0, parse("C{1,2} p"))) == set()


def test_m0_axiom_instances(m0):
    assert holds(m0, 0, parse("[1,2] T"))
    assert not holds(m0, 0, parse("[1,2] F"))
    assert holds(m0, 0, parse("~[]~p -> [1,2]p"))
    assert valid_in(m0, parse("K1 p -> p"))
    assert valid_in(m0, parse("D{1} p <-> K1 p"))
    assert not valid_in(m0, parse("p"))


def _oracle_truth(M, f, s):
    """Direct recursive semantics with path-based C and pairwise D."""
    n = M.n_states
    name = type(f).__name__
    if name == "Atom":
        return bool(M.atom(f.name) >> s & 1)
    if name == "Top":
        return True
    if name == "Not":
        return not _oracle_truth(M, f.sub, s)
    if name == "And":
        return _oracle_truth(M, f.left, s) and _oracle_truth(M, f.right, s)
    X = sum(1 << t for t in range(n) if _oracle_truth(M, f.sub, t))
    if name == "Coal":
        G = sum(1 << i for i in f.coalition)
        return M.effectivity.contains(s, G, X)
    if isinstance(f, Know):
        return all(X >> t & 1 for t in range(n) if same_block(M.knowledge(f.agent), s, t))
    if isinstance(f, Common):
        parts = [M.knowledge(i) for i in f.group]
        return all(X >> t & 1 for t in reachable(parts, n, s))
    assert isinstance(f, Dist)
    if isinstance(M, Pseudomodel):
        rel = M.R[sum(1 << i for i in f.group)]
        return all(X >> t & 1 for t in range(n) if same_block(rel, s, t))
    return all(X >> t & 1 for t in range(n)
               if all(same_block(M.knowledge(i), s, t) for i in f.group))


@pytest.mark.parametrize("seed", range(20))
def test_evaluator_matches_path_semantics(seed):
    rng = random.Random(seed)
    n_agents = rng.randint(1, 3)
    M = random_model(rng, n_agents, rng.randint(1, 7), ("p", "q"))
    pm = random_pseudomodel(rng, n_agents, rng.randint(1, 5), ("p", "q"))
    for _ in range(25):
        f = random_formula(rng, 4, n_agents, ("p", "q"))
        for struct in (M, pm):
            ext = extension(struct, f)
            assert [s in ext for s in range(struct.n_states)] == \
                [_oracle_truth(struct, f, s) for s in range(struct.n_states)]


def test_common_is_least_fixpoint_of_everybody_knows():
    rng = random.Random(7)
    for _ in range(50):
        M = random_model(rng, 3, rng.randint(1, 6))
        f = Common(frozenset({0, 2}), parse("p | q"))
        ext = extensions(M, [f, f.sub])
        # C_G φ is the largest X with X ⊆ E_G(φ ∧ X)
        X = M.full
        while True:
            inner = ext[f.sub] & X
            ek = M.full
            for i in (0, 2):
                ek &= sum(b for b in M.knowledge(i) if b & ~inner == 0)
            if ek == X:
                break
            X = ek
        assert ext[f] == X


def _random_batch(seed, n=40):
    rng = random.Random(seed)
    structs = [random_model(rng, 2, rng.randint(1, 6)) for _ in range(n)]
    fs = [random_formula(rng, 4, 2, ("p", "q")) for _ in range(60)]
    return structs, fs


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernels unavailable")
def test_kernel_backends_agree_on_eval():
    structs, fs = _random_batch(3)
    prog = Program(fs, 2)
    a = prog.run(structs, "compiled")
    b = prog.run(structs, "python")
    assert np.array_equal(a, b)


def test_program_matches_reference_evaluator():
    structs, fs = _random_batch(5)
    masks = Program(fs, 2).run(structs)
    for i, M in enumerate(structs):
        ext = extensions(M, fs)
        assert [ext[f] for f in fs] == [int(x) for x in masks[i]]


def test_batch_valid_handles_large_structures():
    rng = random.Random(9)
    structs = [random_model(rng, 2, 8), random_model(rng, 2, 3)]
    fs = [parse("K1 p -> p"), parse("p")]
    mat = batch_valid(structs, fs, 2)
    assert mat[:, 0].all()
    assert list(mat[:, 1]) == [valid_in(M, fs[1]) for M in structs]


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernels unavailable")
def test_kernel_backends_agree_on_sweep():
    goals = [parse(t) for t in ("[1] p & ~[2] p", "K1 p & ~[1,2] p", "D{1,2} p & ~K2 p",
                                "C{1,2} ~p & [] p")]
    a, _ = sweep_search(goals, 2, 2, 2, atoms=["p"], backend="compiled")
    b, _ = sweep_search(goals, 2, 2, 2, atoms=["p"], backend="python")
    for ha, hb, g in zip(a, b, goals):
        assert (ha is None) == (hb is None)
        if ha is not None:
            assert ha.states == hb.states
            assert verify_hit(ha, g)


def test_environment_forces_fallback():
    env = dict(os.environ, ECLOGIC_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", "import eclogic; print(eclogic.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
