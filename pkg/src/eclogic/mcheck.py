"""Model checking over models and pseudomodels.

``extension`` is the reference evaluator: a memoized recursion that follows
the satisfaction clauses directly.  ``Program`` compiles a batch of formulas
into a flat instruction list that the kernels evaluate over many small
structures at once; it is used for the large randomized checks and always
agrees with ``extension`` (tested).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import kernels
from .structures import Model, Pseudomodel, bits
from .syntax import (And, Atom, Coal, Common, Dist, Formula, Know, Not, Top,
                     check_agents, postorder, set_to_mask)

Structure = Union[Model, Pseudomodel]


@dataclass(frozen=True)
class Extension:
    formula: Formula
    states: int  # bitmask

    def __contains__(self, s: int) -> bool:
        return bool(self.states >> s & 1)

    def state_list(self) -> list[int]:
        return list(bits(self.states))


def box(partition: Sequence[int], X: int) -> int:
    """States all of whose cell-mates lie in X."""
    out = 0
    for b in partition:
        if b & ~X == 0:
            out |= b
    return out


def relation_for(M: Structure, f: Formula) -> tuple:
    if isinstance(f, Know):
        return M.partitions[f.agent]
    if isinstance(f, Common):
        return M.common(set_to_mask(f.group))
    if isinstance(f, Dist):
        return M.distributed(set_to_mask(f.group))
    raise TypeError(f)


def _evaluate(M: Structure, roots: Iterable[Formula], memo: dict) -> dict:
    full = M.full
    E = M.effectivity
    for f in postorder(roots):
        if f in memo:
            continue
        if isinstance(f, Atom):
            v = M.atom(f.name)
        elif isinstance(f, Top):
            v = full
        elif isinstance(f, Not):
            v = full & ~memo[f.sub]
        elif isinstance(f, And):
            v = memo[f.left] & memo[f.right]
        elif isinstance(f, Coal):
            X = memo[f.sub]
            G = set_to_mask(f.coalition)
            v = 0
            for s in range(M.n_states):
                if E.contains(s, G, X):
                    v |= 1 << s
        elif isinstance(f, (Know, Common, Dist)):
            v = box(relation_for(M, f), memo[f.sub])
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f] = v
    return memo


def extensions(M: Structure, formulas: Iterable[Formula]) -> dict:
    """Truth sets of all subformulas of ``formulas`` (formula -> bitmask)."""
    formulas = list(formulas)
    for f in formulas:
        check_agents(f, M.n_agents)
    return _evaluate(M, formulas, {})


def extension(M: Structure, phi: Formula) -> Extension:
    return Extension(phi, extensions(M, [phi])[phi])


def holds(M: Structure, s: int, phi: Formula) -> bool:
    if not 0 <= s < M.n_states:
        raise ValueError(f"no state {s}")
    return s in extension(M, phi)


def valid_in(M: Structure, phi: Formula) -> bool:
    return extension(M, phi).states == M.full


# ---------------------------------------------------------------------------
# Compiled programs


class Program:
    """A batch of formulas as a topologically ordered instruction list."""

    MAX_STATES = 6

    def __init__(self, formulas: Sequence[Formula], n_agents: int):
        self.n_agents = n_agents
        self.formulas = list(formulas)
        for f in self.formulas:
            check_agents(f, n_agents)
        self.atoms: list[str] = []
        self.relations: list[tuple] = []
        self.index: dict[Formula, int] = {}
        ops: list[tuple[int, int, int]] = []
        atom_slot: dict[str, int] = {}
        rel_slot: dict[tuple, int] = {}
        for f in postorder(self.formulas):
            if isinstance(f, Atom):
                if f.name not in atom_slot:
                    atom_slot[f.name] = len(self.atoms) + 1
                    self.atoms.append(f.name)
                op = (kernels.CONST, atom_slot[f.name], 0)
            elif isinstance(f, Top):
                op = (kernels.CONST, 0, 0)
            elif isinstance(f, Not):
                op = (kernels.NOT, self.index[f.sub], 0)
            elif isinstance(f, And):
                op = (kernels.AND, self.index[f.left], self.index[f.right])
            elif isinstance(f, Coal):
                op = (kernels.COAL, self.index[f.sub], set_to_mask(f.coalition))
            else:
                key = relation_key(f)
                if key not in rel_slot:
                    rel_slot[key] = len(self.relations)
                    self.relations.append(key)
                op = (kernels.BOX, self.index[f.sub], rel_slot[key])
            self.index[f] = len(ops)
            ops.append(op)
        self.ops = np.array(ops, dtype=np.int32).reshape(-1, 3)
        self.roots = [self.index[f] for f in self.formulas]

    def tables(self, M: Structure):
        """(consts, boxtab, coaltab) for one structure with at most 6 states."""
        m = M.n_states
        if m > self.MAX_STATES:
            raise ValueError("compiled evaluation needs at most 6 states")
        if M.n_agents != self.n_agents:
            raise ValueError("agent count mismatch")
        consts = np.zeros(len(self.atoms) + 1, dtype=np.uint8)
        consts[0] = M.full
        for k, a in enumerate(self.atoms):
            consts[k + 1] = M.atom(a)
        boxtab = np.zeros((max(1, len(self.relations)), 64), dtype=np.uint8)
        for r, key in enumerate(self.relations):
            part = relation_partition(M, key)
            for X in range(1 << m):
                boxtab[r, X] = box(part, X)
        n_coal = 1 << self.n_agents
        coaltab = np.zeros((n_coal, self.MAX_STATES), dtype=np.uint64)
        E = M.effectivity
        for G in range(n_coal):
            for s in range(m):
                coaltab[G, s] = E.member_bits(s, G)
        return consts, boxtab, coaltab

    def run(self, structures: Sequence[Structure], backend=None) -> np.ndarray:
        """Extension masks, shape (len(structures), len(formulas))."""
        if not structures:
            return np.zeros((0, len(self.roots)), dtype=np.uint8)
        tabs = [self.tables(M) for M in structures]
        consts = np.stack([t[0] for t in tabs])
        boxtab = np.stack([t[1] for t in tabs])
        coaltab = np.stack([t[2] for t in tabs])
        nstates = np.array([M.n_states for M in structures], dtype=np.int32)
        impl = kernels.backend(backend)
        out = impl.eval_batch(self.ops, consts, boxtab, coaltab, nstates)
        return np.asarray(out)[:, self.roots]


def relation_key(f: Formula) -> tuple:
    if isinstance(f, Know):
        return ("K", 1 << f.agent)
    if isinstance(f, Common):
        return ("C", set_to_mask(f.group))
    if isinstance(f, Dist):
        return ("D", set_to_mask(f.group))
    raise TypeError(f)


def relation_partition(M: Structure, key: tuple) -> tuple:
    kind, G = key
    if kind == "K":
        return M.partitions[G.bit_length() - 1]
    if kind == "C":
        return M.common(G)
    return M.distributed(G)


def batch_valid(structures: Sequence[Structure], formulas: Sequence[Formula],
                n_agents: int) -> np.ndarray:
    """Boolean matrix: formula j valid in structure i."""
    prog = Program(formulas, n_agents)
    small = [k for k, M in enumerate(structures) if M.n_states <= Program.MAX_STATES]
    out = np.zeros((len(structures), len(formulas)), dtype=bool)
    if small:
        masks = prog.run([structures[k] for k in small])
        fulls = np.array([structures[k].full for k in small], dtype=np.uint8)[:, None]
        out[small] = masks == fulls
    for k, M in enumerate(structures):
        if M.n_states > Program.MAX_STATES:
            ext = extensions(M, formulas)
            out[k] = [ext[f] == M.full for f in formulas]
    return out
