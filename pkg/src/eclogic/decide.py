"""Satisfiability and validity.

Two procedures share the atom construction (coherent truth assignments to
the closure of the input formula):

* exact: elimination of atoms whose demands cannot be met by the surviving
  atoms.  Epistemic demands need witnesses in the right cell; coalition
  demands need a truly playable local effectivity function, decided by
  building the least one compatible with the positive literals and checking
  the negative ones against it.  What survives is a model (a pseudomodel
  when D is present, then lifted); if no surviving atom contains the
  formula it is unsatisfiable.
* bounded: exhaustive scan of game-form structures up to a size budget.
  It can only answer SAT (with a witness) or UNKNOWN.

Every SAT answer carries a witness model that is re-checked with the
reference model checker before it is returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .mcheck import extension, extensions
from .search import sweep_search, verify_hit
from .structures import (EffectivityFunction, Model, Pseudomodel, bits, minimal_sets)
from .syntax import (And, Atom, ClosureSet, Coal, Common, Dist, Formula, Know, LogicId,
                     Not, Top, check_agents, closure, fragment, set_to_mask, to_text)
from .transform import (LiftFailed, group_key_mask, key_masks, lift_pseudomodel,
                        partition_by_key)


class Verdict(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"
    VALID = "VALID"
    NOT_VALID = "NOT_VALID"


@dataclass(frozen=True)
class SearchBudget:
    max_states: int = 3
    max_actions: int = 2
    exact: bool = False
    max_atoms: int = 1 << 16
    max_lift_states: int = 20000
    minimize: bool = True

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("budget needs at least one state")
        if self.max_actions < 1:
            raise ValueError("budget needs at least one action per agent")


@dataclass
class SatResult:
    verdict: Verdict
    formula: Formula
    logic: LogicId
    n_agents: int
    witness: Model | None = None
    state: int | None = None
    bound: int | None = None
    certificate: str | None = None
    stats: dict = field(default_factory=dict)

    def record(self) -> dict:
        out = {"verdict": self.verdict.value, "formula": to_text(self.formula),
               "logic": self.logic.value, "agents": self.n_agents}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.witness is not None:
            out["witness_states"] = self.witness.n_states
            out["state"] = self.witness.label(self.state)
        return out


# ---------------------------------------------------------------------------
# Atoms


class AtomSpace:
    """Coherent truth assignments to the unsigned members of a closure set."""

    def __init__(self, cls: ClosureSet, max_atoms: int | None = None):
        self.cls = cls
        self.unsigned = cls.unsigned
        self.index = {f: k for k, f in enumerate(self.unsigned)}
        self.implications = self._implications()
        self.atoms = self._enumerate(max_atoms)

    def literal(self, f: Formula) -> tuple[int, bool]:
        """(index of the unsigned core of f, whether f is an even negation of it)."""
        positive = True
        while isinstance(f, Not):
            f = f.sub
            positive = not positive
        return self.index[f], positive

    def _implications(self) -> list[tuple[tuple[int, bool], tuple[int, bool]]]:
        U = self.unsigned
        imp = []
        logic = self.cls.logic
        dists: dict[Formula, list[tuple[int, int]]] = {}
        for k, f in enumerate(U):
            if isinstance(f, (Know, Common, Dist)):
                # T, C unfolding, DT: the operator implies its argument
                imp.append(((k, True), self.literal(f.sub)))
            if isinstance(f, Common) and logic.has_common:
                for i in sorted(f.group):
                    kc = Know(i, f)
                    if kc in self.index:
                        imp.append(((k, True), (self.index[kc], True)))
            if isinstance(f, Dist):
                dists.setdefault(f.sub, []).append((set_to_mask(f.group), k))
                if len(f.group) == 1:
                    (i,) = f.group
                    kf = Know(i, f.sub)
                    if kf in self.index:
                        imp.append(((k, True), (self.index[kf], True)))
                        imp.append(((self.index[kf], True), (k, True)))
        for sub, items in dists.items():
            for G, kg in items:
                for H, kh in items:
                    if G != H and G & H == G:
                        imp.append(((kg, True), (kh, True)))
        return imp

    def _enumerate(self, max_atoms: int | None) -> list[int]:
        U = self.unsigned
        n = len(U)
        checks: list[list] = [[] for _ in range(n)]
        for a, b in self.implications:
            checks[max(a[0], b[0])].append((a, b))
        kinds = []
        for f in U:
            if isinstance(f, Top):
                kinds.append(("top",))
            elif isinstance(f, And):
                kinds.append(("and", self.literal(f.left), self.literal(f.right)))
            else:
                kinds.append(("free",))
        out: list[int] = []

        def val(sig: int, lit: tuple[int, bool]) -> bool:
            return bool(sig >> lit[0] & 1) == lit[1]

        def ok(sig: int, k: int) -> bool:
            for a, b in checks[k]:
                if val(sig, a) and not val(sig, b):
                    return False
            return True

        def rec(k: int, sig: int):
            if max_atoms is not None and len(out) > max_atoms:
                return
            if k == n:
                out.append(sig)
                return
            kind = kinds[k]
            if kind[0] == "top":
                options = (True,)
            elif kind[0] == "and":
                options = (val(sig, kind[1]) and val(sig, kind[2]),)
            else:
                options = (False, True)
            for v in options:
                s2 = sig | (1 << k) if v else sig
                if ok(s2, k):
                    rec(k + 1, s2)

        rec(0, 0)
        out.sort()
        return out

    def holds(self, sig: int, f: Formula) -> bool:
        k, pos = self.literal(f)
        return bool(sig >> k & 1) == pos

    def describe(self, sig: int) -> list[str]:
        return [to_text(f) if sig >> k & 1 else to_text(Not(f))
                for k, f in enumerate(self.unsigned)]


def atoms(cls: ClosureSet) -> list[frozenset]:
    """All coherent atoms, each as the set of unsigned closure members it makes true."""
    space = AtomSpace(cls)
    return [frozenset(f for k, f in enumerate(space.unsigned) if sig >> k & 1)
            for sig in space.atoms]


# ---------------------------------------------------------------------------
# Local coalition check


def least_effectivity(pos: dict, grand: int, alive: int, grand_pos: list, n_agents: int):
    """Least truly playable local effectivity over the state set ``alive``
    containing the sets in ``pos[G]`` (G not the grand coalition).

    ``grand_pos`` lists the sets that must be in E(N); they are handled by
    duality.  Returns (cores per coalition below N, X0) where X0 is the
    least element of E(∅), or None when no playable E contains all of them.
    """
    X0 = alive
    for X in pos.get(0, ()):
        X0 &= X
    if X0 == 0:
        return None
    for X in grand_pos:
        if X0 & X == 0:
            return None
    F: dict[int, frozenset] = {0: frozenset([X0])}
    for G in range(1, grand + 1):
        cand = {X0}
        cand.update(X & X0 for X in pos.get(G, ()))
        low = G & -G
        G1 = (G - 1) & G
        while G1:
            if G1 & low and G1 != G:
                for x in F[G1]:
                    for y in F[G ^ G1]:
                        cand.add(x & y)
            G1 = (G1 - 1) & G
        F[G] = minimal_sets(cand)
        if 0 in F[G]:
            return None
    return F, X0


class _Eliminator:
    def __init__(self, space: AtomSpace, n_agents: int):
        self.space = space
        self.n = n_agents
        self.grand = (1 << n_agents) - 1
        U = space.unsigned
        A = space.atoms
        self.n_atoms = len(A)
        self.all = (1 << len(A)) - 1
        self.T = []
        for k in range(len(U)):
            m = 0
            for p, sig in enumerate(A):
                if sig >> k & 1:
                    m |= 1 << p
            self.T.append(m)
        self.know, self.dist = key_masks(U)
        # cells of the agents' relations and of the D relations (by key)
        self.rel_cells: dict[tuple, list[int]] = {}
        for i in range(n_agents):
            self.rel_cells[("K", i)] = self._cells(self.know.get(i, 0))
        for G in self.dist:
            self.rel_cells[("D", G)] = self._cells(group_key_mask(G, self.know, self.dist))
        self.demands = []   # (kind, key, unsigned index, child literal)
        self.coal = []      # (G, unsigned index, child literal)
        for k, f in enumerate(U):
            if isinstance(f, Know):
                self.demands.append(("K", ("K", f.agent), k, space.literal(f.sub)))
            elif isinstance(f, Dist):
                self.demands.append(("D", ("D", set_to_mask(f.group)), k, space.literal(f.sub)))
            elif isinstance(f, Common):
                self.demands.append(("C", set_to_mask(f.group), k, space.literal(f.sub)))
            elif isinstance(f, Coal):
                self.coal.append((set_to_mask(f.coalition), k, space.literal(f.sub)))

    def _cells(self, keymask: int) -> list[int]:
        groups: dict[int, int] = {}
        keys = [sig & keymask for sig in self.space.atoms]
        for p, key in enumerate(keys):
            groups[key] = groups.get(key, 0) | (1 << p)
        return [groups[key] for key in keys]

    def ext(self, lit: tuple[int, bool], alive: int) -> int:
        m = self.T[lit[0]]
        return (m if lit[1] else ~m) & alive

    def components(self, G: int, alive: int) -> dict[int, int]:
        """position -> component mask of the union of ∼_i (i in G) on alive."""
        comp: dict[int, int] = {}
        for p in bits(alive):
            if p in comp:
                continue
            seen = 1 << p
            frontier = 1 << p
            while frontier:
                nxt = 0
                for q in bits(frontier):
                    for i in bits(G):
                        nxt |= self.rel_cells[("K", i)][q]
                nxt &= alive & ~seen
                seen |= nxt
                frontier = nxt
            for q in bits(seen):
                comp[q] = seen
        return comp

    def coalition_check(self, p: int, alive: int):
        sig = self.space.atoms[p]
        pos: dict[int, list[int]] = {}
        neg: dict[int, list[int]] = {}
        grand_pos: list[int] = []
        for G, k, lit in self.coal:
            X = self.ext(lit, alive)
            if sig >> k & 1:
                if G == self.grand:
                    grand_pos.append(X)
                else:
                    pos.setdefault(G, []).append(X)
            elif G == self.grand:
                # X ∉ E(N) iff its complement is in E(∅)
                pos.setdefault(0, []).append(alive & ~X)
            else:
                neg.setdefault(G, []).append(X)
        res = least_effectivity(pos, self.grand, alive, grand_pos, self.n)
        if res is None:
            return None
        F, X0 = res
        for G, Xs in neg.items():
            for X in Xs:
                if any(g & ~X == 0 for g in F[G]):
                    return None
        return F, X0

    def run(self, alive: int) -> int:
        while True:
            remove = 0
            comps = {}
            for kind, key, k, lit in self.demands:
                if kind == "C" and key not in comps:
                    comps[key] = self.components(key, alive)
            cache: dict = {}
            for p in bits(alive):
                sig = self.space.atoms[p]
                dead = False
                for kind, key, k, lit in self.demands:
                    if sig >> k & 1:
                        continue
                    cell = comps[key][p] if kind == "C" else self.rel_cells[key][p]
                    if cell & alive & ~self.ext(lit, alive) == 0:
                        dead = True
                        break
                if not dead and self.coal:
                    pattern = tuple(sig >> k & 1 for _, k, _ in self.coal)
                    if pattern not in cache:
                        cache[pattern] = self.coalition_check(p, alive) is not None
                    dead = not cache[pattern]
                if dead:
                    remove |= 1 << p
            if not remove:
                return alive
            alive &= ~remove


# ---------------------------------------------------------------------------
# Building the witness


def _structure_from_atoms(el: _Eliminator, alive: int, n_agents: int, dist_logic: bool):
    space = el.space
    positions = list(bits(alive))
    sigs = [space.atoms[p] for p in positions]
    m = len(positions)
    to_state = {p: s for s, p in enumerate(positions)}

    def convert(mask: int) -> int:
        out = 0
        for p in bits(mask & alive):
            out |= 1 << to_state[p]
        return out

    partitions = tuple(partition_by_key([sig & el.know.get(i, 0) for sig in sigs])
                       for i in range(n_agents))
    valuation = {}
    for k, f in enumerate(space.unsigned):
        if isinstance(f, Atom):
            valuation[f.name] = convert(el.T[k])
    grand = el.grand
    cores = []
    for p in positions:
        res = el.coalition_check(p, alive)
        assert res is not None, "surviving atom failed its coalition check"
        F, X0 = res
        row = [frozenset(convert(x) for x in F[G]) for G in range(grand)]
        row.append(frozenset(1 << to_state[q] for q in bits(X0)))
        cores.append(row)
    E = EffectivityFunction.from_cores(m, n_agents, cores)
    labels = tuple(f"a{p}" for p in positions)
    model = Model(n_agents, m, valuation, partitions, E, labels)
    if not dist_logic:
        struct = model
    else:
        R = {G: partition_by_key([sig & group_key_mask(G, el.know, el.dist) for sig in sigs])
             for G in range(1, grand + 1)}
        struct = Pseudomodel(model, R)
    # truth lemma: every closure member holds exactly at the atoms containing it
    ext = extensions(struct, space.unsigned)
    for k, f in enumerate(space.unsigned):
        if ext[f] != convert(el.T[k]):
            raise AssertionError(f"truth lemma fails for {to_text(f)}")
    return struct, to_state


# ---------------------------------------------------------------------------
# Entry points


def _check_input(phi: Formula, logic: LogicId, n_agents: int) -> None:
    if n_agents < 1:
        raise ValueError("at least one agent is required")
    check_agents(phi, n_agents)
    if not logic.admits(fragment(phi)):
        raise ValueError(f"{to_text(phi)} is not a {logic.value} formula")


def sat(phi: Formula, logic: LogicId, n_agents: int,
        budget: SearchBudget | None = None) -> SatResult:
    budget = budget or SearchBudget()
    _check_input(phi, logic, n_agents)
    cls = closure(phi, logic)
    space = AtomSpace(cls, budget.max_atoms)
    stats = {"closure": len(cls), "atoms": len(space.atoms)}
    if len(space.atoms) > budget.max_atoms:
        return SatResult(Verdict.UNKNOWN, phi, logic, n_agents, bound=budget.max_atoms,
                         certificate="atom-budget", stats=stats)
    candidates = [p for p, sig in enumerate(space.atoms) if space.holds(sig, phi)]
    if not candidates:
        return SatResult(Verdict.UNSAT, phi, logic, n_agents, bound=len(space.atoms),
                         certificate="atom-refutation", stats=stats)
    if budget.exact:
        return _sat_exact(phi, logic, n_agents, budget, space, stats)
    hits, sweep_stats = sweep_search([phi], n_agents, budget.max_states, budget.max_actions)
    stats.update(frames=sweep_stats.frames, structures=sweep_stats.tuples)
    hit = hits[0]
    if hit is not None and verify_hit(hit, phi):
        state = next(iter(bits(hit.states)))
        return SatResult(Verdict.SAT, phi, logic, n_agents, hit.model, state,
                         bound=budget.max_states, certificate="bounded-search", stats=stats)
    return SatResult(Verdict.UNKNOWN, phi, logic, n_agents, bound=budget.max_states,
                     certificate="bounded-search", stats=stats)


def _sat_exact(phi, logic, n_agents, budget, space, stats) -> SatResult:
    el = _Eliminator(space, n_agents)
    alive = el.run(el.all)
    goal = 0
    for p in bits(alive):
        if space.holds(space.atoms[p], phi):
            goal |= 1 << p
    stats["surviving"] = alive.bit_count()
    if not goal:
        return SatResult(Verdict.UNSAT, phi, logic, n_agents, bound=len(space.atoms),
                         certificate="elimination", stats=stats)
    if budget.minimize and alive.bit_count() <= 64:
        alive = _minimize(el, alive, space, phi)
    struct, to_state = _structure_from_atoms(el, alive, n_agents, logic.has_dist)
    p0 = next(p for p in bits(alive) if space.holds(space.atoms[p], phi))
    state = to_state[p0]
    if isinstance(struct, Pseudomodel):
        try:
            lift = lift_pseudomodel(struct, phi, budget.max_lift_states)
        except LiftFailed as exc:
            stats["lift"] = str(exc)
            return SatResult(Verdict.UNKNOWN, phi, logic, n_agents, bound=len(space.atoms),
                             certificate="lift-failed", stats=stats)
        model = lift.target
        state = lift.preimages(state)[0]
    else:
        model = struct
    if state not in extension(model, phi):
        raise AssertionError("witness does not satisfy the formula")
    stats["witness_states"] = model.n_states
    return SatResult(Verdict.SAT, phi, logic, n_agents, model, state,
                     bound=len(space.atoms), certificate="elimination", stats=stats)


def _minimize(el: _Eliminator, alive: int, space: AtomSpace, phi: Formula) -> int:
    """Greedily drop atoms while a closed set satisfying phi remains."""
    for p in list(bits(alive)):
        if not alive >> p & 1:
            continue
        trial = el.run(alive & ~(1 << p))
        if any(space.holds(space.atoms[q], phi) for q in bits(trial)):
            alive = trial
    return alive


def valid(phi: Formula, logic: LogicId, n_agents: int,
          budget: SearchBudget | None = None) -> SatResult:
    res = sat(Not(phi), logic, n_agents, budget)
    res.formula = phi
    if res.verdict == Verdict.UNSAT:
        res.verdict = Verdict.VALID
    elif res.verdict == Verdict.SAT:
        res.verdict = Verdict.NOT_VALID
    return res
