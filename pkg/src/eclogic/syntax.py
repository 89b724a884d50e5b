"""Formulas of epistemic coalition logic: AST, concrete syntax, closure sets.

The core grammar has atoms, ``T``, negation, conjunction, the coalition
modality ``[G]``, individual knowledge ``Ki``, common knowledge ``C{G}`` and
distributed knowledge ``D{G}``.  Everything else (``F``, ``|``, ``->``,
``<->``, ``E{G}``) is sugar and is expanded while parsing:

    F        := ~T
    a | b    := ~(~a & ~b)
    a -> b   := ~(a & ~b)
    a <-> b  := ((a -> b) & (b -> a))
    E{G} a   := K_i1 a & K_i2 a & ...   (left nested, agents ascending)

Agents are 0-based internally and 1-based in concrete syntax.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class FormulaSyntaxError(ValueError):
    """Raised for malformed formula text; ``pos`` is a 0-based offset."""

    def __init__(self, message: str, pos: int | None = None, kind: str = "Syntax"):
        self.pos = pos
        self.kind = kind
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{kind}Error{where}: {message}")


# ---------------------------------------------------------------------------
# AST


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


def _hashed(cls):
    """Cache the structural hash; formulas are used heavily as dict keys.

    Must be applied beneath ``@dataclass`` so the generated ``__init__``
    calls ``__post_init__`` and the explicit ``__hash__`` is kept.
    """

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((cls.__name__,) + tuple(
            getattr(self, f) for f in cls.__dataclass_fields__ if f != "_h")))

    def __hash__(self):
        return self._h

    cls.__post_init__ = __post_init__
    cls.__hash__ = __hash__
    return cls


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Atom(Formula):
    name: str
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Top(Formula):
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Not(Formula):
    sub: Formula
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class And(Formula):
    left: Formula
    right: Formula
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Coal(Formula):
    coalition: frozenset
    sub: Formula
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Know(Formula):
    agent: int
    sub: Formula
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Common(Formula):
    group: frozenset
    sub: Formula
    _h: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True, eq=True, repr=True)
@_hashed
class Dist(Formula):
    group: frozenset
    sub: Formula
    _h: int = field(default=0, compare=False, repr=False)


MODAL = (Coal, Know, Common, Dist)
TOP = Top()


def top() -> Formula:
    return TOP


def bot() -> Formula:
    return Not(TOP)


def neg(a: Formula) -> Formula:
    return Not(a)


def conj(a: Formula, b: Formula) -> Formula:
    return And(a, b)


def disj(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def conj_all(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``T``."""
    out = None
    for f in items:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def every_knows(group: Iterable[int], sub: Formula) -> Formula:
    agents = sorted(set(group))
    if not agents:
        raise FormulaSyntaxError("E needs a non-empty group", kind="EmptyGroup")
    return conj_all(Know(i, sub) for i in agents)


def as_implication(f: Formula) -> tuple[Formula, Formula] | None:
    if isinstance(f, Not) and isinstance(f.sub, And) and isinstance(f.sub.right, Not):
        return f.sub.left, f.sub.right.sub
    return None


def as_disjunction(f: Formula) -> tuple[Formula, Formula] | None:
    if (isinstance(f, Not) and isinstance(f.sub, And)
            and isinstance(f.sub.left, Not) and isinstance(f.sub.right, Not)):
        return f.sub.left.sub, f.sub.right.sub
    return None


def as_biconditional(f: Formula) -> tuple[Formula, Formula] | None:
    if not isinstance(f, And):
        return None
    lhs, rhs = as_implication(f.left), as_implication(f.right)
    if lhs is None or rhs is None or lhs != (rhs[1], rhs[0]):
        return None
    return lhs


def as_every_knows(f: Formula) -> tuple[frozenset, Formula] | None:
    """Inverse of :func:`every_knows` on its canonical (expanded) form."""
    items = []
    while isinstance(f, And):
        items.append(f.right)
        f = f.left
    items.append(f)
    items.reverse()
    if not all(isinstance(k, Know) for k in items):
        return None
    body = items[0].sub
    agents = [k.agent for k in items]
    if any(k.sub != body for k in items) or agents != sorted(set(agents)):
        return None
    return frozenset(agents), body


# ---------------------------------------------------------------------------
# Traversal helpers


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, And):
        return (f.left, f.right)
    if isinstance(f, (Not, Coal, Know, Common, Dist)):
        return (f.sub,)
    return ()


def subformulas(f: Formula) -> set[Formula]:
    seen: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        stack.extend(children(g))
    return seen


def postorder(roots: Iterable[Formula]) -> list[Formula]:
    """Distinct subformulas of ``roots``, children before parents."""
    out: list[Formula] = []
    seen: set[Formula] = set()
    for root in roots:
        stack = [(root, False)]
        while stack:
            g, expanded = stack.pop()
            if g in seen:
                continue
            if expanded:
                seen.add(g)
                out.append(g)
                continue
            stack.append((g, True))
            for c in reversed(children(g)):
                if c not in seen:
                    stack.append((c, False))
    return out


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def modal_depth(f: Formula) -> int:
    d = max((modal_depth(c) for c in children(f)), default=0)
    return d + 1 if isinstance(f, MODAL) else d


def atoms_of(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


def agents_of(f: Formula) -> set[int]:
    out: set[int] = set()
    for g in subformulas(f):
        if isinstance(g, Know):
            out.add(g.agent)
        elif isinstance(g, Coal):
            out |= g.coalition
        elif isinstance(g, (Common, Dist)):
            out |= g.group
    return out


def check_agents(f: Formula, n_agents: int) -> None:
    """Raise if ``f`` mentions an agent outside ``0..n_agents-1``."""
    for g in subformulas(f):
        if isinstance(g, (Common, Dist)) and not g.group:
            raise FormulaSyntaxError("C/D need a non-empty group", kind="EmptyGroup")
    bad = [a for a in agents_of(f) if a >= n_agents or a < 0]
    if bad:
        raise FormulaSyntaxError(
            f"agent {max(bad) + 1} is outside 1..{n_agents}", kind="AgentRange")


# ---------------------------------------------------------------------------
# Fragments


class LogicId(enum.Enum):
    CL = "CL"
    CLK = "CLK"
    CLC = "CLC"
    CLD = "CLD"
    CLCD = "CLCD"

    @property
    def features(self) -> frozenset:
        return _FEATURES[self]

    @property
    def has_common(self) -> bool:
        return "C" in self.features

    @property
    def has_dist(self) -> bool:
        return "D" in self.features

    def admits(self, other: "LogicId") -> bool:
        return other.features <= self.features

    @classmethod
    def parse(cls, text: str) -> "LogicId":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown logic {text!r}; expected one of "
                             + ", ".join(m.value for m in cls)) from None


_FEATURES = {
    LogicId.CL: frozenset(),
    LogicId.CLK: frozenset("K"),
    LogicId.CLC: frozenset("KC"),
    LogicId.CLD: frozenset("KD"),
    LogicId.CLCD: frozenset("KCD"),
}


def fragment(f: Formula) -> LogicId:
    feats = set()
    for g in subformulas(f):
        if isinstance(g, Know):
            feats.add("K")
        elif isinstance(g, Common):
            feats.update("KC")
        elif isinstance(g, Dist):
            feats.update("KD")
    for logic in LogicId:
        if logic.features == feats:
            return logic
    raise AssertionError(feats)


# ---------------------------------------------------------------------------
# Printing


def _agents_text(agents: Iterable[int]) -> str:
    return ",".join(str(a + 1) for a in sorted(agents))


def to_text(f: Formula) -> str:
    """Canonical concrete syntax.  Binary connectives are always parenthesised."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Not):
        if isinstance(f.sub, Top):
            return "F"
        pair = as_disjunction(f)
        # ~(~(a & b) & ~c) reads better as ((a | b) -> c) than as ((~a & ~b) | c)
        if pair is not None and not isinstance(f.sub.left.sub, And):
            return f"({to_text(pair[0])} | {to_text(pair[1])})"
        pair = as_implication(f)
        if pair is not None:
            return f"({to_text(pair[0])} -> {to_text(pair[1])})"
        return "~" + to_text(f.sub)
    if isinstance(f, And):
        pair = as_biconditional(f)
        if pair is not None:
            return f"({to_text(pair[0])} <-> {to_text(pair[1])})"
        return f"({to_text(f.left)} & {to_text(f.right)})"
    if isinstance(f, Coal):
        return f"[{_agents_text(f.coalition)}] {to_text(f.sub)}"
    if isinstance(f, Know):
        return f"K{f.agent + 1} {to_text(f.sub)}"
    if isinstance(f, Common):
        return f"C{{{_agents_text(f.group)}}} {to_text(f.sub)}"
    if isinstance(f, Dist):
        return f"D{{{_agents_text(f.group)}}} {to_text(f.sub)}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<know>K(?P<kagent>\d+))
  | (?P<group>(?P<gop>[CDE])\{)
  | (?P<atom>[a-z][a-z0-9_]*)
  | (?P<const>[TF])
  | (?P<num>\d+)
  | (?P<sym>[~&|()\[\],}])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "kagent":
            kind = "know"
        if kind == "gop":
            kind = "group"
        if kind != "ws":
            if kind == "sym":
                kind = m.group()
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, n_agents: int | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n_agents

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, kind: str | None = None) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "eof" else repr(kind)
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise FormulaSyntaxError(f"expected {want}, found {got}", tok[2])
        self.i += 1
        return tok

    def agent(self, digits: str, pos: int) -> int:
        a = int(digits)
        if a < 1:
            raise FormulaSyntaxError("agents are numbered from 1", pos, kind="AgentRange")
        if self.n is not None and a > self.n:
            raise FormulaSyntaxError(f"agent {a} is outside 1..{self.n}", pos,
                                     kind="AgentRange")
        return a - 1

    def agent_list(self, close: str) -> frozenset:
        agents = []
        if self.peek()[0] != close:
            while True:
                tok = self.take("num")
                agents.append(self.agent(tok[1], tok[2]))
                if self.peek()[0] != ",":
                    break
                self.take(",")
        self.take(close)
        return frozenset(agents)

    def parse(self) -> Formula:
        f = self.iff()
        self.take("eof")
        return f

    # <-> is the loosest and right associative, then ->, |, &
    def iff(self) -> Formula:
        left = self.imp()
        if self.peek()[0] == "iff":
            self.take()
            return iff(left, self.iff())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            return implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek()[0] == "|":
            self.take()
            left = disj(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek()[0] == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, text, pos = self.peek()
        if kind == "~":
            self.take()
            return Not(self.unary())
        if kind == "[":
            self.take()
            coalition = self.agent_list("]")
            return Coal(coalition, self.unary())
        if kind == "know":
            self.take()
            return Know(self.agent(text[1:], pos), self.unary())
        if kind == "group":
            self.take()
            group = self.agent_list("}")
            if not group:
                raise FormulaSyntaxError(f"{text[0]} needs a non-empty group", pos,
                                         kind="EmptyGroup")
            body = self.unary()
            if text[0] == "C":
                return Common(group, body)
            if text[0] == "D":
                return Dist(group, body)
            return every_knows(group, body)
        if kind == "atom":
            self.take()
            return Atom(text)
        if kind == "const":
            self.take()
            return TOP if text == "T" else bot()
        if kind == "(":
            self.take()
            f = self.iff()
            self.take(")")
            return f
        got = "end of input" if kind == "eof" else repr(text)
        raise FormulaSyntaxError(f"expected a formula, found {got}", pos)


def parse(text: str, n_agents: int | None = None) -> Formula:
    """Parse concrete syntax.  With ``n_agents`` given, agent indices are
    range-checked against it."""
    return _Parser(text, n_agents).parse()


# ---------------------------------------------------------------------------
# Closure sets


def formula_key(f: Formula) -> tuple[int, str]:
    return (size(f), to_text(f))


@dataclass(frozen=True)
class ClosureSet:
    """``cl(origin)`` for a given logic.

    ``unsigned`` lists the members that are not negations, in canonical
    order; a truth assignment to them fixes the truth of every member.
    """

    origin: Formula
    logic: LogicId
    formulas: frozenset
    unsigned: tuple
    bound: int

    def __contains__(self, f: Formula) -> bool:
        return f in self.formulas

    def __len__(self) -> int:
        return len(self.formulas)

    def index(self) -> dict[Formula, int]:
        return {f: i for i, f in enumerate(self.unsigned)}


def closure(f: Formula, logic: LogicId) -> ClosureSet:
    if not logic.admits(fragment(f)):
        raise ValueError(f"{to_text(f)} is not a {logic.value} formula")
    base: set[Formula] = set()
    todo = [f]
    while todo:
        g = todo.pop()
        if g in base:
            continue
        base.add(g)
        todo.extend(children(g))
        if logic.has_common and isinstance(g, Common):
            todo.extend(Know(i, g) for i in g.group)
        if logic.has_dist:
            if isinstance(g, Dist) and len(g.group) == 1:
                (i,) = g.group
                todo.append(Know(i, g.sub))
            elif isinstance(g, Know):
                todo.append(Dist(frozenset([g.agent]), g.sub))
    members = set(base)
    members.update(Not(g) for g in base if not isinstance(g, Not))
    unsigned = tuple(sorted((g for g in members if not isinstance(g, Not)), key=formula_key))

    subs = subformulas(f)
    n_common = sum(len(g.group) for g in subs if isinstance(g, Common))
    n_partner = sum(1 for g in base
                    if (isinstance(g, Know) or (isinstance(g, Dist) and len(g.group) == 1))
                    and g not in subs)
    bound = 2 * (len(subs) + n_common + n_partner)
    return ClosureSet(f, logic, frozenset(members), unsigned, bound)


# ---------------------------------------------------------------------------
# Random formulas


def random_formula(rng: random.Random, depth: int, n_agents: int,
                   atoms: tuple[str, ...] = ("p", "q"),
                   logic: LogicId = LogicId.CLCD) -> Formula:
    """A random formula of nesting depth at most ``depth``."""
    if depth <= 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.08:
            return TOP
        return Atom(rng.choice(atoms))
    kinds = ["not", "and", "and", "coal"]
    if "K" in logic.features:
        kinds.append("know")
    if logic.has_common:
        kinds.append("common")
    if logic.has_dist:
        kinds.append("dist")
    kind = rng.choice(kinds)
    sub = random_formula(rng, depth - 1, n_agents, atoms, logic)
    if kind == "not":
        return Not(sub)
    if kind == "and":
        return And(sub, random_formula(rng, depth - 1, n_agents, atoms, logic))
    if kind == "coal":
        return Coal(random_agent_set(rng, n_agents, allow_empty=True), sub)
    if kind == "know":
        return Know(rng.randrange(n_agents), sub)
    group = random_agent_set(rng, n_agents, allow_empty=False)
    return Common(group, sub) if kind == "common" else Dist(group, sub)


def random_agent_set(rng: random.Random, n_agents: int, allow_empty: bool) -> frozenset:
    while True:
        g = frozenset(i for i in range(n_agents) if rng.random() < 0.5)
        if g or allow_empty:
            return g


def iter_agent_sets(n_agents: int, allow_empty: bool = True) -> Iterator[frozenset]:
    for mask in range(0 if allow_empty else 1, 1 << n_agents):
        yield mask_to_set(mask)


def set_to_mask(agents: Iterable[int]) -> int:
    m = 0
    for a in agents:
        m |= 1 << a
    return m


def mask_to_set(mask: int) -> frozenset:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)
