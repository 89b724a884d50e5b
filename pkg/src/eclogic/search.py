"""Brute-force structure enumeration.

A *frame* fixes the state count, the valuation and the agents' partitions.
A structure over a frame additionally picks, at every state, one local
alpha-effectivity function from a library obtained by enumerating all game
forms with a bounded number of actions.  ``sweep_search`` scans every such
structure (frames up to state permutation) with the kernel ``sweep``.
"""

from __future__ import annotations

import functools
import itertools
import json
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .mcheck import Program, box, extension, relation_for, relation_partition
from .structures import (GameForm, Model, alpha_effectivity, local_alpha, meet, join,
                         normalize_partition)
from .syntax import And, Atom, Coal, Formula, Not, Top, children, postorder


# ---------------------------------------------------------------------------
# Local effectivity library

MAX_TABLES = 2_000_000


@dataclass(frozen=True)
class Library:
    n_agents: int
    n_states: int
    max_actions: int
    cores: tuple      # entry -> tuple of cores per coalition
    games: tuple      # entry -> (actions, outcomes) realizing it
    memb: np.ndarray  # uint64 (L, 2**n_agents) member bitsets

    def __len__(self) -> int:
        return len(self.cores)


def _enumerate_library(n_agents: int, n_states: int, max_actions: int):
    seen: dict[tuple, tuple] = {}
    for acts in itertools.product(range(1, max_actions + 1), repeat=n_agents):
        size = 1
        for a in acts:
            size *= a
        for outs in itertools.product(range(n_states), repeat=size):
            c = local_alpha(n_agents, acts, outs)
            if c not in seen:
                seen[c] = (acts, outs)
    return seen


def library_size_estimate(n_agents: int, n_states: int, max_actions: int) -> int:
    total = 0
    for acts in itertools.product(range(1, max_actions + 1), repeat=n_agents):
        size = 1
        for a in acts:
            size *= a
        total += n_states ** size
    return total


def _cache_path(n_agents: int, n_states: int, max_actions: int) -> str | None:
    root = os.environ.get("ECLOGIC_CACHE_DIR")
    if not root:
        return None
    return os.path.join(root, f"library-{n_agents}-{n_states}-{max_actions}.json")


@functools.lru_cache(maxsize=None)
def local_library(n_agents: int, n_states: int, max_actions: int) -> Library:
    """All distinct local alpha-effectivity functions of game forms with at
    most ``max_actions`` actions per agent over ``n_states`` successors."""
    if n_states > Program.MAX_STATES:
        raise ValueError("libraries are limited to 6 states")
    if library_size_estimate(n_agents, n_states, max_actions) > MAX_TABLES:
        raise ValueError(f"too many game forms to enumerate for {n_agents} agents, "
                         f"{n_states} states, {max_actions} actions")
    path = _cache_path(n_agents, n_states, max_actions)
    items = None
    if path and os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        items = [(tuple(frozenset(c) for c in cores), (tuple(a), tuple(o)))
                 for cores, a, o in raw]
    if items is None:
        items = list(_enumerate_library(n_agents, n_states, max_actions).items())
        if path:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump([[[sorted(c) for c in cores], list(g[0]), list(g[1])]
                           for cores, g in items], fh)
    n_coal = 1 << n_agents
    memb = np.zeros((len(items), n_coal), dtype=np.uint64)
    for k, (cores, _) in enumerate(items):
        for G in range(n_coal):
            v = 0
            for X in range(1 << n_states):
                if any(g & ~X == 0 for g in cores[G]):
                    v |= 1 << X
            memb[k, G] = v
    return Library(n_agents, n_states, max_actions, tuple(c for c, _ in items),
                   tuple(g for _, g in items), memb)


@functools.lru_cache(maxsize=None)
def trivial_library(n_agents: int, n_states: int) -> Library:
    """One entry: every agent has a single action leading to state 0."""
    acts = (1,) * n_agents
    outs = (0,)
    cores = local_alpha(n_agents, acts, outs)
    n_coal = 1 << n_agents
    memb = np.zeros((1, n_coal), dtype=np.uint64)
    for G in range(n_coal):
        memb[0, G] = sum(1 << X for X in range(1 << n_states) if X & 1)
    return Library(n_agents, n_states, 1, (cores,), ((acts, outs),), memb)


# ---------------------------------------------------------------------------
# Frames


@dataclass(frozen=True)
class Frame:
    n_agents: int
    n_states: int
    atoms: tuple       # atom names
    valuation: tuple   # mask per atom
    partitions: tuple  # per agent

    def model(self, game: GameForm) -> Model:
        return Model(self.n_agents, self.n_states, dict(zip(self.atoms, self.valuation)),
                     self.partitions, alpha_effectivity(game), None, game)

    # the Program tables only need these
    @property
    def full(self) -> int:
        return (1 << self.n_states) - 1

    def atom(self, name: str) -> int:
        return dict(zip(self.atoms, self.valuation)).get(name, 0)

    def common(self, G: int) -> tuple:
        return join([self.partitions[i] for i in range(self.n_agents) if G >> i & 1],
                    self.n_states)

    def distributed(self, G: int) -> tuple:
        return meet([self.partitions[i] for i in range(self.n_agents) if G >> i & 1],
                    self.n_states)


def set_partitions(n: int) -> list[tuple[int, ...]]:
    """All partitions of range(n) as normalized block-mask tuples."""
    out = []

    def rec(i: int, blocks: list[int]):
        if i == n:
            out.append(normalize_partition(blocks, n))
            return
        for k in range(len(blocks)):
            blocks[k] |= 1 << i
            rec(i + 1, blocks)
            blocks[k] &= ~(1 << i)
        blocks.append(1 << i)
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out


def _permute_mask(mask: int, perm: Sequence[int]) -> int:
    out = 0
    for s, t in enumerate(perm):
        if mask >> s & 1:
            out |= 1 << t
    return out


def _frame_key(valuation, partitions, perm) -> tuple:
    val = tuple(_permute_mask(v, perm) for v in valuation)
    parts = tuple(tuple(sorted(_permute_mask(b, perm) for b in p)) for p in partitions)
    return (val, parts)


def enumerate_frames(n_agents: int, n_states: int, atoms: Sequence[str],
                     canonical: bool = True) -> Iterator[Frame]:
    """Frames in a fixed order; with ``canonical`` only the lexicographically
    least representative of each state-permutation orbit."""
    atoms = tuple(atoms)
    perms = list(itertools.permutations(range(n_states)))
    parts = set_partitions(n_states)
    for valuation in itertools.product(range(1 << n_states), repeat=len(atoms)):
        for partitions in itertools.product(parts, repeat=n_agents):
            if canonical:
                key = _frame_key(valuation, partitions, perms[0])
                if any(_frame_key(valuation, partitions, p) < key for p in perms[1:]):
                    continue
            yield Frame(n_agents, n_states, atoms, tuple(valuation), tuple(partitions))


# ---------------------------------------------------------------------------
# Sweep


@dataclass
class SweepHit:
    model: Model
    states: int  # where the goal holds


@dataclass
class SweepStats:
    frames: int = 0
    tuples: int = 0
    exhausted: bool = True


def _frame_program(goals: Sequence[Formula], frame: Frame, n_agents: int):
    """Program over ``goals`` with tuple-independent nodes folded into constants."""
    prog = Program(goals, n_agents)
    dynamic = set()
    for f in postorder(goals):
        if isinstance(f, Coal) or any(c in dynamic for c in children(f)):
            dynamic.add(f)
    static = [f for f in prog.index if f not in dynamic]
    ext = {}
    if static:
        ext = _frame_extensions(frame, static)
    consts = [frame.full]
    new_index: dict[Formula, int] = {}
    ops = []
    for f in static:
        new_index[f] = len(ops)
        ops.append((kernels.CONST, len(consts), 0))
        consts.append(ext[f])
    relations: list[tuple] = []
    rel_slot: dict[tuple, int] = {}
    for f, k in sorted(prog.index.items(), key=lambda kv: kv[1]):
        if f not in dynamic:
            continue
        op, a, b = (int(x) for x in prog.ops[k])
        a_f = children(f)[0]
        if op == kernels.NOT:
            ops_entry = (op, new_index[a_f], 0)
        elif op == kernels.AND:
            ops_entry = (op, new_index[f.left], new_index[f.right])
        elif op == kernels.COAL:
            ops_entry = (op, new_index[a_f], b)
        elif op == kernels.BOX:
            key = prog.relations[b]
            if key not in rel_slot:
                rel_slot[key] = len(relations)
                relations.append(key)
            ops_entry = (op, new_index[a_f], rel_slot[key])
        else:
            raise AssertionError(op)
        new_index[f] = len(ops)
        ops.append(ops_entry)
    boxtab = np.zeros((max(1, len(relations)), 64), dtype=np.uint8)
    for r, key in enumerate(relations):
        part = relation_partition(frame, key)
        for X in range(1 << frame.n_states):
            boxtab[r, X] = box(part, X)
    return (np.array(ops, dtype=np.int32).reshape(-1, 3),
            np.array(consts, dtype=np.uint8), boxtab,
            np.array([new_index[g] for g in goals], dtype=np.int32))


def _frame_extensions(frame: Frame, formulas: Sequence[Formula]) -> dict:
    out: dict = {}
    for f in postorder(formulas):
        if isinstance(f, Atom):
            v = frame.atom(f.name)
        elif isinstance(f, Top):
            v = frame.full
        elif isinstance(f, Not):
            v = frame.full & ~out[f.sub]
        elif isinstance(f, And):
            v = out[f.left] & out[f.right]
        else:
            v = box(relation_for(frame, f), out[f.sub])
        out[f] = v
    return out


def _has_coalition(f: Formula) -> bool:
    return any(isinstance(g, Coal) for g in postorder([f]))


def sweep_search(goals: Sequence[Formula], n_agents: int, max_states: int,
                 max_actions: int, atoms: Sequence[str] | None = None,
                 min_states: int = 1, backend: str | None = None,
                 chunk: int = 1 << 18) -> tuple[list, SweepStats]:
    """For each goal, the first structure (in enumeration order) where it
    holds somewhere, or None if there is none up to the bounds."""
    goals = list(goals)
    if atoms is None:
        atoms = sorted({f.name for f in postorder(goals) if isinstance(f, Atom)})
    impl = kernels.backend(backend)
    hits: list = [None] * len(goals)
    stats = SweepStats()
    coalitional = any(_has_coalition(g) for g in goals)
    for m in range(min_states, max_states + 1):
        lib = local_library(n_agents, m, max_actions) if coalitional else trivial_library(n_agents, m)
        L = len(lib)
        total = L ** m
        for frame in enumerate_frames(n_agents, m, atoms):
            open_idx = [k for k in range(len(goals)) if hits[k] is None]
            if not open_idx:
                return hits, stats
            stats.frames += 1
            pos = 0
            while pos < total and open_idx:
                sub = [goals[k] for k in open_idx]
                ops, consts, boxtab, goal_nodes = _frame_program(sub, frame, n_agents)
                found = np.full(len(sub), -1, dtype=np.int64)
                found_states = np.zeros(len(sub), dtype=np.uint8)
                count = min(chunk, total - pos)
                scanned = impl.sweep(ops, consts, boxtab, lib.memb, m, goal_nodes,
                                     pos, count, found, found_states)
                stats.tuples += int(scanned)
                for j, k in enumerate(open_idx):
                    if found[j] >= 0:
                        model = _tuple_model(frame, lib, int(found[j]))
                        hits[k] = SweepHit(model, int(found_states[j]))
                open_idx = [k for k in open_idx if hits[k] is None]
                pos += count
    return hits, stats


def _tuple_model(frame: Frame, lib: Library, t: int) -> Model:
    L = len(lib)
    actions, outcomes = [], []
    for _ in range(frame.n_states):
        acts, outs = lib.games[t % L]
        actions.append(acts)
        outcomes.append(outs)
        t //= L
    game = GameForm(frame.n_agents, frame.n_states, tuple(actions), tuple(outcomes))
    return frame.model(game)


def verify_hit(hit: SweepHit, goal: Formula) -> bool:
    """Re-check a sweep result with the reference evaluator."""
    ext = extension(hit.model, goal).states
    return ext != 0 and ext == hit.states
