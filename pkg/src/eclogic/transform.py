"""Structure transformations: filtration through a closure set, and lifting
pseudomodels to models.

Both constructions check their own output: the filtration reports whether
truth of every closure member survives the quotient, and the lifting refuses
to return a target that disagrees with its source on the closure.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .mcheck import Structure, extensions
from .structures import (EffectivityFunction, InvalidStructure, Model, Pseudomodel,
                         bits, minimal_sets, minimal_transversals, validate_effectivity)
from .syntax import (ClosureSet, Dist, Formula, LogicId, Know, closure, fragment,
                     set_to_mask, to_text)


# ---------------------------------------------------------------------------
# Filtration


@dataclass(frozen=True)
class RepresentativeDependence:
    coalition: int
    cls: int
    X: int  # set of target classes

    def describe(self) -> str:
        return (f"RepresentativeDependence: class {self.cls}, coalition "
                f"{sorted(bits(self.coalition))}, X={sorted(bits(self.X))}")


@dataclass(frozen=True)
class TruthNotPreserved:
    formula: Formula
    state: int

    def describe(self) -> str:
        return f"TruthNotPreserved: {to_text(self.formula)} at source state {self.state}"


@dataclass(frozen=True)
class EffectivityInvalid:
    report: str

    def describe(self) -> str:
        return f"EffectivityInvalid: {self.report}"


@dataclass
class Filtration:
    source: Structure
    cls: ClosureSet
    class_of: tuple            # source state -> class id
    signatures: tuple          # class id -> frozenset of unsigned members true there
    target: Structure | None = None
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.target is not None and not self.diagnostics

    @property
    def representative_independent(self) -> bool:
        return not any(isinstance(d, RepresentativeDependence) for d in self.diagnostics)

    def preimage(self, X: int) -> int:
        out = 0
        for s, c in enumerate(self.class_of):
            if X >> c & 1:
                out |= 1 << s
        return out


def key_masks(unsigned: Sequence[Formula]):
    """Index masks of K_i members and D_G members of an unsigned closure list."""
    know: dict[int, int] = {}
    dist: dict[int, int] = {}
    for k, f in enumerate(unsigned):
        if isinstance(f, Know):
            know[f.agent] = know.get(f.agent, 0) | (1 << k)
        elif isinstance(f, Dist):
            G = set_to_mask(f.group)
            dist[G] = dist.get(G, 0) | (1 << k)
    return know, dist


def group_key_mask(G: int, know: dict, dist: dict) -> int:
    """Closure members whose agreement defines the group relation R_G:
    all K_i with i in G and all D_H with H a non-empty subset of G."""
    mask = 0
    for i in bits(G):
        mask |= know.get(i, 0)
    for H, m in dist.items():
        if H & G == H:
            mask |= m
    return mask


def partition_by_key(keys: Sequence[int]) -> tuple:
    groups: dict[int, int] = {}
    for s, k in enumerate(keys):
        groups[k] = groups.get(k, 0) | (1 << s)
    return tuple(sorted(groups.values(), key=lambda b: b & -b))


def filtrate(M: Structure, phi: Formula, logic: LogicId) -> Filtration:
    cls = closure(phi, logic)
    unsigned = cls.unsigned
    ext = extensions(M, unsigned)
    sig_of_state = []
    for s in range(M.n_states):
        sig = 0
        for k, f in enumerate(unsigned):
            if ext[f] >> s & 1:
                sig |= 1 << k
        sig_of_state.append(sig)
    classes: dict[int, int] = {}
    class_of = []
    for sig in sig_of_state:
        if sig not in classes:
            classes[sig] = len(classes)
        class_of.append(classes[sig])
    sigs = list(classes)
    n_cls = len(sigs)
    signatures = tuple(frozenset(f for k, f in enumerate(unsigned) if sig >> k & 1)
                       for sig in sigs)
    filt = Filtration(M, cls, tuple(class_of), signatures)

    know, dist = key_masks(unsigned)
    partitions = tuple(partition_by_key([sig & know.get(i, 0) for sig in sigs])
                       for i in range(M.n_agents))
    valuation = {}
    for k, f in enumerate(unsigned):
        if hasattr(f, "name"):
            valuation[f.name] = sum(1 << c for c, sig in enumerate(sigs) if sig >> k & 1)

    # E^f(G)(c) = {X : preimage(X) in E(G)(s)} for the first s in class c
    E = M.effectivity
    reps = [class_of.index(c) for c in range(n_cls)]
    members = [[s for s in range(M.n_states) if class_of[s] == c] for c in range(n_cls)]
    n_coal = 1 << M.n_agents
    fams = []
    for c in range(n_cls):
        row = []
        for G in range(n_coal):
            fam = set()
            for X in range(1 << n_cls):
                pre = filt.preimage(X)
                here = E.contains(reps[c], G, pre)
                if here:
                    fam.add(X)
                for s in members[c][1:]:
                    if E.contains(s, G, pre) != here:
                        filt.diagnostics.append(RepresentativeDependence(G, c, X))
                        break
            row.append(frozenset(fam))
        fams.append(tuple(row))
    Ef = EffectivityFunction.explicit(n_cls, M.n_agents, fams)
    rep = validate_effectivity(Ef)
    if not rep.ok:
        filt.diagnostics.append(EffectivityInvalid(rep.describe()))
        return filt
    Ef = EffectivityFunction.from_cores(n_cls, M.n_agents,
                                        [[Ef.core(c, G) for G in range(n_coal)]
                                         for c in range(n_cls)])
    labels = tuple(f"c{c}" for c in range(n_cls))
    target_model = Model(M.n_agents, n_cls, valuation, partitions, Ef, labels)
    target: Structure = target_model
    if logic.has_dist:
        R = {G: partition_by_key([sig & group_key_mask(G, know, dist) for sig in sigs])
             for G in range(1, n_coal)}
        target = Pseudomodel(target_model, R)
    filt.target = target

    text = extensions(target, unsigned)
    for f in unsigned:
        for s in range(M.n_states):
            if bool(ext[f] >> s & 1) != bool(text[f] >> class_of[s] & 1):
                filt.diagnostics.append(TruthNotPreserved(f, s))
                break
    return filt


# ---------------------------------------------------------------------------
# Lifting


class LiftFailed(RuntimeError):
    pass


def image(X: int, f: Sequence[int]) -> int:
    """All target states mapped into X."""
    out = 0
    for u, s in enumerate(f):
        if X >> s & 1:
            out |= 1 << u
    return out


def check_order_embedding(sets: Sequence[int], f: Sequence[int]) -> None:
    """For surjective f, strict inclusions survive taking images."""
    imgs = [image(X, f) for X in sets]
    for X, IX in zip(sets, imgs):
        for Y, IY in zip(sets, imgs):
            if X != Y and X & Y == X:
                assert IX != IY and IX & IY == IX, "image is not an order embedding"


def lift_effectivity(E: EffectivityFunction, f: Sequence[int]) -> EffectivityFunction:
    """E' over the domain of f: for G other than the grand coalition the
    upward closure of the images of E(G)(f(u)); for the grand coalition the
    sets whose complement is outside E'(∅)(u)."""
    n_target = len(f)
    if set(f) != set(range(E.n_states)):
        raise ValueError("f must be onto the source states")
    grand = E.grand
    cores = []
    for u in range(n_target):
        s = f[u]
        row = []
        for G in range(1 << E.n_agents):
            if G == grand:
                row.append(None)
            else:
                src = E.core(s, G)
                check_order_embedding(sorted(src), f)
                row.append(minimal_sets(image(X, f) for X in src))
        row[grand] = minimal_transversals(row[0])
        cores.append(row)
    Ep = EffectivityFunction.from_cores(n_target, E.n_agents, cores)
    return Ep


@dataclass
class Lifting:
    source: Pseudomodel
    target: Model
    f: tuple            # target state -> source state
    checked: int        # closure members compared
    colored_groups: tuple = ()

    def preimages(self, s: int) -> list[int]:
        return [u for u, t in enumerate(self.f) if t == s]


def _colored_groups(pm: Pseudomodel, phi: Formula) -> list[int]:
    groups = set()
    for g in closure(phi, LogicId.CLCD).formulas:
        if isinstance(g, Dist) and len(g.group) > 1:
            G = set_to_mask(g.group)
            if tuple(sorted(pm.R[G])) != tuple(sorted(pm.model.intersection(G))):
                groups.add(G)
    return sorted(groups, key=lambda G: (G.bit_count(), G))


def lift_pseudomodel(pm: Pseudomodel, phi: Formula, max_states: int = 20000) -> Lifting:
    """A model with a surjection onto ``pm`` agreeing with it on cl(φ).

    Every group H whose R_H is strictly finer than the intersection of its
    members' relations gets one colour per member.  A state of the target is
    a source state s plus colours w with, for each such H, the colours of H
    summing to the index of s's R_H-cell inside its intersection cell (modulo
    the number of such cells).  Agent i cannot see the colours of others, so
    the intersection of the lifted relations over H recovers exactly R_H.
    Only states reachable from one seed per source state are built.
    """
    if not LogicId.CLCD.admits(fragment(phi)):
        raise ValueError("formula outside CLCD")
    M = pm.model
    n = M.n_agents
    colored = _colored_groups(pm, phi)
    if not colored:
        f = tuple(range(M.n_states))
        target = Model(n, M.n_states, dict(M.valuation), M.partitions, M.effectivity,
                       M.labels, M.game_form, M.playable_only)
        lift = Lifting(pm, target, f, 0, ())
        lift.checked = _verify(lift, phi)
        return lift

    comps = [(H, i) for H in colored for i in bits(H)]
    comp_index = {c: k for k, c in enumerate(comps)}
    # per colored group: state -> (cell size m_c, index of R_H-cell), modulus k_H
    info = {}
    for H in colored:
        meet_part = M.intersection(H)
        cell = {}
        for c in meet_part:
            subs = sorted((b for b in pm.R[H] if b & c), key=lambda b: b & -b)
            for idx, b in enumerate(subs):
                for s in bits(b):
                    cell[s] = (len(subs), idx)
        k_H = 1
        for size, _ in cell.values():
            k_H = k_H * size // math.gcd(k_H, size)
        info[H] = (cell, k_H)

    def fix(t: int, w: list[int], moving: int) -> tuple | None:
        """Adjust colours so that state t's constraints hold; only components
        of agents outside ``moving`` may change.  None if impossible."""
        w = list(w)
        for H in colored:
            cell, k_H = info[H]
            size, idx = cell[t]
            total = sum(w[comp_index[(H, i)]] for i in bits(H))
            delta = (idx - total) % size
            if delta == 0:
                continue
            free = [i for i in bits(H) if not moving >> i & 1]
            if not free:
                return None
            k = comp_index[(H, free[0])]
            w[k] = (w[k] + delta) % k_H
        return tuple(w)

    relations = [(1 << i, M.partitions[i]) for i in range(n)]
    for g in closure(phi, LogicId.CLCD).formulas:
        if isinstance(g, Dist) and len(g.group) > 1:
            G = set_to_mask(g.group)
            if (G, pm.R[G]) not in relations:
                relations.append((G, pm.R[G]))

    nodes: dict[tuple, int] = {}
    order: list[tuple] = []
    queue: deque = deque()
    for s in range(M.n_states):
        start = fix(s, [0] * len(comps), 0)
        assert start is not None
        node = (s, start)
        if node not in nodes:
            nodes[node] = len(order)
            order.append(node)
            queue.append(node)
    while queue:
        s, w = queue.popleft()
        for G, part in relations:
            block = next(b for b in part if b >> s & 1)
            for t in bits(block):
                w2 = fix(t, w, G)
                if w2 is None:
                    raise LiftFailed(f"no colouring step from state {s} to {t}")
                node = (t, w2)
                if node not in nodes:
                    if len(order) >= max_states:
                        raise LiftFailed(f"lifted model exceeds {max_states} states")
                    nodes[node] = len(order)
                    order.append(node)
                    queue.append(node)

    f = tuple(s for s, _ in order)
    m2 = len(order)
    parts = []
    for i in range(n):
        own = [comp_index[c] for c in comps if c[1] == i]
        src_block = {s: k for k, b in enumerate(M.partitions[i]) for s in bits(b)}
        keys = [(src_block[s], tuple(w[k] for k in own)) for s, w in order]
        groups: dict = {}
        for u, key in enumerate(keys):
            groups[key] = groups.get(key, 0) | (1 << u)
        parts.append(tuple(sorted(groups.values(), key=lambda b: b & -b)))
    valuation = {a: image(v, f) for a, v in M.valuation.items()}
    Ep = lift_effectivity(M.effectivity, f)
    counter: dict[int, int] = {}
    labels = []
    for s in f:
        counter[s] = counter.get(s, 0) + 1
        labels.append(f"{M.label(s)}_{counter[s] - 1}")
    try:
        target = Model(n, m2, valuation, tuple(parts), Ep, tuple(labels))
    except InvalidStructure as exc:
        raise LiftFailed(f"lifted structure is invalid: {exc}") from None
    lift = Lifting(pm, target, f, 0, tuple(colored))
    lift.checked = _verify(lift, phi)
    return lift


def _verify(lift: Lifting, phi: Formula) -> int:
    members = sorted(closure(phi, LogicId.CLCD).formulas, key=lambda g: (to_text(g)))
    src = extensions(lift.source, members)
    tgt = extensions(lift.target, members)
    for g in members:
        if tgt[g] != image(src[g], lift.f):
            raise LiftFailed(f"truth of {to_text(g)} not preserved by the lifting")
    return len(members)
