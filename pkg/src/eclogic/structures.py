"""Finite structures: effectivity functions, game forms, models, pseudomodels.

State sets and coalitions are bitmasks.  Bit ``s`` of a state set is state
``s``; bit ``i`` of a coalition is agent ``i``.  An effectivity function
stores, for every state and coalition, either the full family of sets
(``upward=False``) or a family of generators whose upward closure is meant
(``upward=True``).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class InvalidStructure(ValueError):
    def __init__(self, message: str, report: "ValidationReport | None" = None):
        self.report = report
        super().__init__(message)


# ---------------------------------------------------------------------------
# Bitmask helpers


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


def minimal_sets(family: Iterable[int]) -> frozenset:
    """The subset-minimal members of a family of bitmasks."""
    kept: list[int] = []
    for x in sorted(set(family), key=lambda v: (v.bit_count(), v)):
        if not any(k & x == k for k in kept):
            kept.append(x)
    return frozenset(kept)


def minimal_transversals(family: Iterable[int]) -> frozenset:
    """Minimal sets meeting every member of ``family`` (Berge's algorithm)."""
    trans = {0}
    for g in sorted(minimal_sets(family), key=lambda v: (v.bit_count(), v)):
        grown = set()
        for t in trans:
            if t & g:
                grown.add(t)
            else:
                grown.update(t | (1 << b) for b in bits(g))
        trans = set(minimal_sets(grown))
    return frozenset(trans)


def fmt_set(mask: int) -> str:
    return "{" + ",".join(str(b) for b in bits(mask)) + "}"


def fmt_agents(mask: int) -> str:
    """Coalition mask in the 1-based agent numbering of the concrete syntax."""
    return "{" + ",".join(str(b + 1) for b in bits(mask)) + "}"


# ---------------------------------------------------------------------------
# Partitions (equivalence relations)


def normalize_partition(blocks: Iterable[int], n_states: int) -> tuple[int, ...]:
    """Sort blocks by least element and check they partition the state set."""
    blocks = [b for b in blocks]
    full = (1 << n_states) - 1
    seen = 0
    for b in blocks:
        if b == 0:
            raise InvalidStructure("empty block in partition")
        if b & seen:
            raise InvalidStructure(f"overlapping blocks at states {fmt_set(b & seen)}")
        if b & ~full:
            raise InvalidStructure(f"block {fmt_set(b)} mentions unknown states")
        seen |= b
    if seen != full:
        raise InvalidStructure(f"partition misses states {fmt_set(full & ~seen)}")
    return tuple(sorted(blocks, key=lambda b: b & -b))


def block_index(partition: Sequence[int], n_states: int) -> list[int]:
    """state -> block mask."""
    out = [0] * n_states
    for b in partition:
        for s in bits(b):
            out[s] = b
    return out


def meet(partitions: Sequence[Sequence[int]], n_states: int) -> tuple[int, ...]:
    """Common refinement (intersection of the equivalences)."""
    cur = [(1 << n_states) - 1]
    for p in partitions:
        cur = [a & b for a in cur for b in p if a & b]
    return tuple(sorted(cur, key=lambda b: b & -b))


def join(partitions: Sequence[Sequence[int]], n_states: int) -> tuple[int, ...]:
    """Finest common coarsening (transitive closure of the union)."""
    parent = list(range(n_states))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in partitions:
        for b in p:
            first = (b & -b).bit_length() - 1
            for s in bits(b):
                ra, rb = find(first), find(s)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, int] = {}
    for s in range(n_states):
        r = find(s)
        groups[r] = groups.get(r, 0) | (1 << s)
    return tuple(sorted(groups.values(), key=lambda b: b & -b))


def refines(fine: Sequence[int], coarse: Sequence[int]) -> tuple[int, int] | None:
    """None if every block of ``fine`` lies inside a block of ``coarse``;
    otherwise a pair of states related by ``fine`` but not by ``coarse``."""
    for b in fine:
        for c in coarse:
            if b & c and b & ~c:
                s = ((b & c) & -(b & c)).bit_length() - 1
                t = ((b & ~c) & -(b & ~c)).bit_length() - 1
                return (s, t)
    return None


def partition_from_matrix(matrix: Sequence[Sequence[int | bool]]) -> tuple[int, ...]:
    """Convert a 0/1 relation matrix into a partition, rejecting relations
    that are not equivalences."""
    m = len(matrix)
    rel = [[bool(v) for v in row] for row in matrix]
    if any(len(row) != m for row in rel):
        raise InvalidStructure("relation matrix is not square")
    for s in range(m):
        if not rel[s][s]:
            raise InvalidStructure(f"relation is not reflexive at state {s}")
        for t in range(m):
            if rel[s][t] and not rel[t][s]:
                raise InvalidStructure(f"relation is not symmetric at ({s},{t})")
            if rel[s][t]:
                for u in range(m):
                    if rel[t][u] and not rel[s][u]:
                        raise InvalidStructure(
                            f"relation is not transitive at ({s},{t},{u})")
    blocks = {mask_of(t for t in range(m) if rel[s][t]) for s in range(m)}
    return normalize_partition(blocks, m)


# ---------------------------------------------------------------------------
# Effectivity functions


@dataclass(frozen=True)
class EffectivityFunction:
    n_states: int
    n_agents: int
    families: tuple  # families[s][G] -> frozenset of state-set masks
    upward: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.n_states < 1:
            raise InvalidStructure("an effectivity function needs at least one state")
        n_coal = 1 << self.n_agents
        fams = tuple(tuple(frozenset(f) for f in row) for row in self.families)
        if len(fams) != self.n_states or any(len(row) != n_coal for row in fams):
            raise InvalidStructure("effectivity table has the wrong shape")
        full = self.full
        for row in fams:
            for fam in row:
                if any(x & ~full for x in fam):
                    raise InvalidStructure("effectivity mentions unknown states")
        object.__setattr__(self, "families", fams)

    @classmethod
    def from_cores(cls, n_states: int, n_agents: int, cores) -> "EffectivityFunction":
        return cls(n_states, n_agents, cores, upward=True)

    @classmethod
    def explicit(cls, n_states: int, n_agents: int, families) -> "EffectivityFunction":
        return cls(n_states, n_agents, families, upward=False)

    @property
    def full(self) -> int:
        return (1 << self.n_states) - 1

    @property
    def grand(self) -> int:
        return (1 << self.n_agents) - 1

    def contains(self, s: int, coalition: int, X: int) -> bool:
        fam = self.families[s][coalition]
        if self.upward:
            return any(g & ~X == 0 for g in fam)
        return X in fam

    def core(self, s: int, coalition: int) -> frozenset:
        key = ("core", s, coalition)
        if key not in self._cache:
            self._cache[key] = minimal_sets(self.families[s][coalition])
        return self._cache[key]

    def cores(self) -> tuple:
        """Canonical form: minimal members per state and coalition."""
        return tuple(tuple(self.core(s, g) for g in range(1 << self.n_agents))
                     for s in range(self.n_states))

    def family(self, s: int, coalition: int) -> frozenset:
        """All member sets; only sensible for small state spaces."""
        if not self.upward:
            return self.families[s][coalition]
        return frozenset(X for X in range(self.full + 1) if self.contains(s, coalition, X))

    def member_bits(self, s: int, coalition: int) -> int:
        """Bit X is set iff X is a member; requires n_states <= 6."""
        if self.n_states > 6:
            raise ValueError("member bitsets need at most 6 states")
        key = ("bits", s, coalition)
        if key not in self._cache:
            v = 0
            for X in range(self.full + 1):
                if self.contains(s, coalition, X):
                    v |= 1 << X
            self._cache[key] = v
        return self._cache[key]

    def same_as(self, other: "EffectivityFunction") -> bool:
        if (self.n_states, self.n_agents) != (other.n_states, other.n_agents):
            return False
        if self.upward and other.upward:
            return self.cores() == other.cores()
        return all(self.family(s, g) == other.family(s, g)
                   for s in range(self.n_states) for g in range(1 << self.n_agents))


@dataclass(frozen=True)
class Violation:
    condition: str
    state: int
    coalition: int
    X: int | None = None
    Y: int | None = None
    other_coalition: int | None = None

    def describe(self) -> str:
        parts = [f"{self.condition} at state {self.state}, coalition {fmt_agents(self.coalition)}"]
        if self.other_coalition is not None:
            parts.append(f"with coalition {fmt_agents(self.other_coalition)}")
        if self.X is not None:
            parts.append(f"X={fmt_set(self.X)}")
        if self.Y is not None:
            parts.append(f"Y={fmt_set(self.Y)}")
        return ", ".join(parts)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set:
        return {v.condition for v in self.violations}

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(v.describe() for v in self.violations)


def validate_effectivity(E: EffectivityFunction, playable_only: bool = False) -> ValidationReport:
    """Check E1-E6 (E1-E5 with ``playable_only``), one witness per failing case."""
    rep = ValidationReport()
    full, grand = E.full, E.grand
    n_coal = 1 << E.n_agents
    m = E.n_states
    for s in range(m):
        upward_here = True
        for G in range(n_coal):
            fam = E.families[s][G]
            if E.contains(s, G, 0):
                rep.violations.append(Violation("E1", s, G, X=0))
            if not E.contains(s, G, full):
                rep.violations.append(Violation("E2", s, G, X=full))
            if not E.upward:
                for X in sorted(fam):
                    missing = next((X | (1 << b) for b in range(m)
                                    if not (X >> b) & 1 and (X | (1 << b)) not in fam), None)
                    if missing is not None:
                        rep.violations.append(Violation("E4", s, G, X=X, Y=missing))
                        upward_here = False
                        break

        def members(G: int) -> Iterable[int]:
            return E.core(s, G) if upward_here else sorted(E.families[s][G])

        # E3
        if upward_here:
            for T in sorted(minimal_transversals(E.core(s, 0))):
                if not E.contains(s, grand, T):
                    rep.violations.append(Violation("E3", s, grand, X=T))
                    break
        elif m <= 16:
            for X in range(full + 1):
                if not E.contains(s, 0, full & ~X) and not E.contains(s, grand, X):
                    rep.violations.append(Violation("E3", s, grand, X=X))
                    break
        else:
            rep.skipped.append(("E3", s))

        # E5
        for G1 in range(n_coal):
            for G2 in range(G1, n_coal):
                if G1 & G2:
                    continue
                bad = next(((x, y) for x in members(G1) for y in members(G2)
                            if not E.contains(s, G1 | G2, x & y)), None)
                if bad is not None:
                    rep.violations.append(
                        Violation("E5", s, G1, X=bad[0], Y=bad[1], other_coalition=G2))

        if not playable_only and not nonmonotonic_core(E, s):
            rep.violations.append(Violation("E6", s, 0))
    return rep


def nonmonotonic_core(E: EffectivityFunction, s: int) -> frozenset:
    """The subset-minimal members of E(∅)(s)."""
    return E.core(s, 0)


def require_playable(E: EffectivityFunction, playable_only: bool = False) -> None:
    rep = validate_effectivity(E, playable_only)
    if not rep.ok:
        raise InvalidStructure("effectivity function is not truly playable: "
                               + rep.describe(), rep)


# ---------------------------------------------------------------------------
# Game forms


def profiles(actions: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Action profiles in row-major order, last agent fastest."""
    return itertools.product(*(range(a) for a in actions))


def local_alpha(n_agents: int, actions: Sequence[int], outcomes: Sequence[int]) -> tuple:
    """Cores of the alpha-effectivity at one state, indexed by coalition."""
    cores = []
    profs = list(profiles(actions))
    for G in range(1 << n_agents):
        members = [i for i in range(n_agents) if (G >> i) & 1]
        forced: dict[tuple, int] = {}
        for prof, o in zip(profs, outcomes):
            key = tuple(prof[i] for i in members)
            forced[key] = forced.get(key, 0) | (1 << o)
        cores.append(minimal_sets(forced.values()))
    return tuple(cores)


@dataclass(frozen=True)
class GameForm:
    n_agents: int
    n_states: int
    actions: tuple   # actions[s][i] = number of actions of agent i at s
    outcomes: tuple  # outcomes[s][k] = successor of the k-th profile at s

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(tuple(a) for a in self.actions))
        object.__setattr__(self, "outcomes", tuple(tuple(o) for o in self.outcomes))
        if len(self.actions) != self.n_states or len(self.outcomes) != self.n_states:
            raise InvalidStructure("game form needs one entry per state")
        for s, (acts, outs) in enumerate(zip(self.actions, self.outcomes)):
            if len(acts) != self.n_agents or any(a < 1 for a in acts):
                raise InvalidStructure(f"state {s}: every agent needs at least one action")
            size = 1
            for a in acts:
                size *= a
            if len(outs) != size:
                raise InvalidStructure(
                    f"state {s}: outcome table has {len(outs)} entries, expected {size}")
            if any(not 0 <= o < self.n_states for o in outs):
                raise InvalidStructure(f"state {s}: outcome outside the state space")

    def outcome(self, s: int, profile: Sequence[int]) -> int:
        k = 0
        for a, n in zip(profile, self.actions[s]):
            k = k * n + a
        return self.outcomes[s][k]


def alpha_effectivity(g: GameForm) -> EffectivityFunction:
    cores = [local_alpha(g.n_agents, g.actions[s], g.outcomes[s]) for s in range(g.n_states)]
    return EffectivityFunction.from_cores(g.n_states, g.n_agents, cores)


# ---------------------------------------------------------------------------
# Models and pseudomodels


@dataclass(frozen=True, eq=False)
class Model:
    n_agents: int
    n_states: int
    valuation: Mapping[str, int]
    partitions: tuple          # partitions[i] = blocks of agent i's relation
    effectivity: EffectivityFunction
    labels: tuple | None = None
    game_form: GameForm | None = None
    playable_only: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.n_states < 1:
            raise InvalidStructure("a model needs at least one state")
        if self.n_agents < 1:
            raise InvalidStructure("a model needs at least one agent")
        if len(self.partitions) != self.n_agents:
            raise InvalidStructure("one partition per agent is required")
        parts = tuple(normalize_partition(p, self.n_states) for p in self.partitions)
        object.__setattr__(self, "partitions", parts)
        val = {}
        for name, mask in sorted(self.valuation.items()):
            if mask & ~self.full:
                raise InvalidStructure(f"atom {name} holds at unknown states")
            val[name] = mask
        object.__setattr__(self, "valuation", val)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.n_states or len(set(labels)) != len(labels):
                raise InvalidStructure("labels must be distinct, one per state")
            object.__setattr__(self, "labels", labels)
        E = self.effectivity
        if (E.n_states, E.n_agents) != (self.n_states, self.n_agents):
            raise InvalidStructure("effectivity dimensions do not match the model")
        require_playable(E, self.playable_only)

    @property
    def full(self) -> int:
        return (1 << self.n_states) - 1

    def label(self, s: int) -> str:
        return self.labels[s] if self.labels else f"s{s}"

    def state_id(self, ref: str | int) -> int:
        if isinstance(ref, int):
            if not 0 <= ref < self.n_states:
                raise InvalidStructure(f"no state {ref}")
            return ref
        names = [self.label(s) for s in range(self.n_states)]
        if ref in names:
            return names.index(ref)
        if ref.isdigit() and int(ref) < self.n_states:
            return int(ref)
        raise InvalidStructure(f"unknown state {ref!r}")

    def atom(self, name: str) -> int:
        return self.valuation.get(name, 0)

    def knowledge(self, agent: int) -> tuple:
        return self.partitions[agent]

    def common(self, group: int) -> tuple:
        key = ("C", group)
        if key not in self._cache:
            self._cache[key] = join([self.partitions[i] for i in bits(group)], self.n_states)
        return self._cache[key]

    def intersection(self, group: int) -> tuple:
        key = ("meet", group)
        if key not in self._cache:
            self._cache[key] = meet([self.partitions[i] for i in bits(group)], self.n_states)
        return self._cache[key]

    def distributed(self, group: int) -> tuple:
        return self.intersection(group)

    def with_effectivity(self, E: EffectivityFunction) -> "Model":
        return Model(self.n_agents, self.n_states, dict(self.valuation), self.partitions, E,
                     self.labels, None, self.playable_only)


@dataclass(frozen=True, eq=False)
class Pseudomodel:
    """A model together with explicit relations R_G interpreting D_G."""

    model: Model
    R: Mapping[int, tuple]  # group mask -> partition; missing groups default to meets

    def __post_init__(self):
        m = self.model
        R = {}
        for G in range(1, 1 << m.n_agents):
            if G in self.R:
                R[G] = normalize_partition(self.R[G], m.n_states)
            elif G.bit_count() == 1:
                R[G] = m.partitions[G.bit_length() - 1]
        # groups left open take the meet of their proper subgroups
        for G in sorted(range(1, 1 << m.n_agents), key=lambda g: (g.bit_count(), g)):
            if G not in R:
                subs = [R[H] for H in range(1, G) if H & G == H]
                R[G] = meet(subs, m.n_states)
        object.__setattr__(self, "R", R)
        rep = validate_pseudomodel(self)
        if not rep.ok:
            raise InvalidStructure("invalid pseudomodel: " + rep.describe(), rep)

    @classmethod
    def from_model(cls, m: Model) -> "Pseudomodel":
        return cls(m, {G: m.intersection(G) for G in range(1, 1 << m.n_agents)})

    def __getattr__(self, name):
        # delegate n_agents, valuation, effectivity, ... to the underlying model
        if name in ("model", "R"):
            raise AttributeError(name)
        return getattr(self.model, name)

    def distributed(self, group: int) -> tuple:
        return self.R[group]

    def is_model(self) -> bool:
        """True when every R_G already equals the intersection of the ∼_i."""
        return all(self.R[G] == self.model.intersection(G) for G in self.R)


@dataclass(frozen=True)
class RelationViolation:
    condition: str
    group: int
    other_group: int | None = None
    pair: tuple | None = None

    def describe(self) -> str:
        txt = f"{self.condition} for group {fmt_agents(self.group)}"
        if self.other_group is not None:
            txt += f" vs {fmt_agents(self.other_group)}"
        if self.pair is not None:
            txt += f" at states {self.pair}"
        return txt


def validate_pseudomodel(pm: Pseudomodel) -> ValidationReport:
    rep = ValidationReport()
    m = pm.model
    for G, part in pm.R.items():
        try:
            normalize_partition(part, m.n_states)
        except InvalidStructure:
            rep.violations.append(RelationViolation("equivalence", G))
    for i in range(m.n_agents):
        mine = pm.R.get(1 << i)
        if mine is None or tuple(sorted(mine)) != tuple(sorted(m.partitions[i])):
            pair = refines(mine or (), m.partitions[i]) or refines(m.partitions[i], mine or ())
            rep.violations.append(RelationViolation("singleton", 1 << i, pair=pair))
    for G in pm.R:
        for H in pm.R:
            if G != H and G & H == G:
                bad = refines(pm.R[H], pm.R[G])
                if bad is not None:
                    rep.violations.append(RelationViolation("antimonotone", H, G, bad))
    return rep


# ---------------------------------------------------------------------------
# Random generators (deterministic given the Random instance)


def random_partition(rng: random.Random, n_states: int, max_blocks: int | None = None) -> tuple:
    k = rng.randint(1, max_blocks or n_states)
    groups: dict[int, int] = {}
    for s in range(n_states):
        b = rng.randrange(k)
        groups[b] = groups.get(b, 0) | (1 << s)
    return normalize_partition(groups.values(), n_states)


def random_game_form(rng: random.Random, n_agents: int, n_states: int,
                     max_actions: int = 3) -> GameForm:
    actions, outcomes = [], []
    for _ in range(n_states):
        acts = tuple(rng.randint(1, max_actions) for _ in range(n_agents))
        size = 1
        for a in acts:
            size *= a
        # a bias towards few successors makes E(∅) less trivial
        support = rng.sample(range(n_states), rng.randint(1, n_states))
        outcomes.append(tuple(rng.choice(support) for _ in range(size)))
        actions.append(acts)
    return GameForm(n_agents, n_states, tuple(actions), tuple(outcomes))


def random_valuation(rng: random.Random, n_states: int, atoms: Sequence[str]) -> dict:
    return {a: rng.randrange(1 << n_states) for a in atoms}


def random_model(rng: random.Random, n_agents: int, n_states: int,
                 atoms: Sequence[str] = ("p", "q"), max_actions: int = 3) -> Model:
    g = random_game_form(rng, n_agents, n_states, max_actions)
    parts = tuple(random_partition(rng, n_states) for _ in range(n_agents))
    return Model(n_agents, n_states, random_valuation(rng, n_states, atoms), parts,
                 alpha_effectivity(g), None, g)


def random_refinement(rng: random.Random, partition: Sequence[int], split: float = 0.5) -> tuple:
    out = []
    for b in partition:
        if b.bit_count() > 1 and rng.random() < split:
            k = rng.randint(2, b.bit_count())
            groups: dict[int, int] = {}
            for s in bits(b):
                c = rng.randrange(k)
                groups[c] = groups.get(c, 0) | (1 << s)
            out.extend(groups.values())
        else:
            out.append(b)
    return tuple(sorted(out, key=lambda x: x & -x))


def random_pseudomodel(rng: random.Random, n_agents: int, n_states: int,
                       atoms: Sequence[str] = ("p", "q"), max_actions: int = 3,
                       max_blocks: int | None = 2) -> Pseudomodel:
    """Coarse agent relations with R_G drawn as random refinements of the
    meet of the relations of all proper subgroups."""
    g = random_game_form(rng, n_agents, n_states, max_actions)
    parts = tuple(random_partition(rng, n_states, max_blocks) for _ in range(n_agents))
    m = Model(n_agents, n_states, random_valuation(rng, n_states, atoms), parts,
              alpha_effectivity(g), None, g)
    R: dict[int, tuple] = {1 << i: parts[i] for i in range(n_agents)}
    for G in sorted(range(1, 1 << n_agents), key=lambda x: (x.bit_count(), x)):
        if G.bit_count() < 2:
            continue
        base = meet([R[H] for H in range(1, G) if H & G == H], n_states)
        R[G] = random_refinement(rng, base)
    return Pseudomodel(m, R)


def seeded_playable_effectivity(rng: random.Random, n_agents: int, n_states: int,
                                seeds_per_coalition: int = 2) -> EffectivityFunction | None:
    """Explicit E built by upward-closing random seed sets and repairing
    superadditivity and N-maximality; None if the repair produces the empty
    set.  Used to probe the E1-E5 => E6 direction independently of game forms."""
    full = (1 << n_states) - 1
    grand = (1 << n_agents) - 1
    n_coal = 1 << n_agents
    families = []
    for _ in range(n_states):
        gens: list[set[int]] = []
        for G in range(n_coal):
            seeds = {full}
            for _ in range(rng.randint(0, seeds_per_coalition)):
                seeds.add(rng.randint(1, full))
            gens.append(seeds)
        # close under intersections along disjoint coalitions, then add the
        # sets N-maximality demands; repeat until nothing changes
        changed = True
        while changed:
            changed = False
            for G1 in range(n_coal):
                for G2 in range(n_coal):
                    if G1 & G2:
                        continue
                    target = gens[G1 | G2]
                    for x in list(gens[G1]):
                        for y in list(gens[G2]):
                            z = x & y
                            if not any(g & ~z == 0 for g in target):
                                target.add(z)
                                changed = True
            if any(0 in g for g in gens):
                return None
            for T in minimal_transversals(gens[0]):
                if not any(g & ~T == 0 for g in gens[grand]):
                    gens[grand].add(T)
                    changed = True
        row = []
        for G in range(n_coal):
            core = minimal_sets(gens[G])
            row.append(frozenset(X for X in range(full + 1)
                                 if any(g & ~X == 0 for g in core)))
        families.append(tuple(row))
    return EffectivityFunction.explicit(n_states, n_agents, families)
