"""Hilbert-style proof checking for CL, CLK, CLC, CLD and CLCD.

A proof file has a header and numbered lines::

    system CLCD
    agents 2
    1. (p -> (p | q))                 ; Prop
    2. ([1] p <-> [1] (p & (p | q)))  ; RG 5
    3. q                              ; MP 1 2

Line numbers are labels: they must be distinct and references must point to
earlier lines.  ``#`` starts a comment.  Axiom lines carry just the scheme
name; the checker finds the substitution.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .mcheck import batch_valid
from .structures import random_model
from .syntax import (TOP, And, Atom, Coal, Common, Dist, Formula, FormulaSyntaxError, Know,
                     LogicId, Not, Top, as_biconditional, as_implication, atoms_of,
                     check_agents, every_knows, fragment, iff, implies, parse,
                     random_agent_set, random_formula, to_text)


class ProofFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ---------------------------------------------------------------------------
# Patterns


class Pat:
    def match(self, f: Formula, env: dict, n: int) -> bool:
        raise NotImplementedError

    def build(self, env: dict, n: int) -> Formula:
        raise NotImplementedError


@dataclass(frozen=True)
class PVar(Pat):
    name: str

    def match(self, f, env, n):
        if self.name in env:
            return env[self.name] == f
        env[self.name] = f
        return True

    def build(self, env, n):
        return env[self.name]


@dataclass(frozen=True)
class PTop(Pat):
    def match(self, f, env, n):
        return isinstance(f, Top)

    def build(self, env, n):
        return TOP


@dataclass(frozen=True)
class PNot(Pat):
    sub: Pat

    def match(self, f, env, n):
        return isinstance(f, Not) and self.sub.match(f.sub, env, n)

    def build(self, env, n):
        return Not(self.sub.build(env, n))


@dataclass(frozen=True)
class PAnd(Pat):
    left: Pat
    right: Pat

    def match(self, f, env, n):
        return (isinstance(f, And) and self.left.match(f.left, env, n)
                and self.right.match(f.right, env, n))

    def build(self, env, n):
        return And(self.left.build(env, n), self.right.build(env, n))


# agent-set patterns: a variable name, "EMPTY", "GRAND", or ("union", a, b)

def _match_set(pat, value: frozenset, env: dict, n: int) -> bool:
    if pat == "EMPTY":
        return value == frozenset()
    if pat == "GRAND":
        return value == frozenset(range(n))
    if isinstance(pat, tuple) and pat[0] == "union":
        a, b = pat[1], pat[2]
        if a not in env or b not in env:
            return False
        return env[a] | env[b] == value
    if isinstance(pat, tuple) and pat[0] == "single":
        if len(value) != 1:
            return False
        (i,) = value
        return _match_agent(pat[1], i, env)
    if pat in env:
        return env[pat] == value
    env[pat] = value
    return True


def _build_set(pat, env: dict, n: int) -> frozenset:
    if pat == "EMPTY":
        return frozenset()
    if pat == "GRAND":
        return frozenset(range(n))
    if isinstance(pat, tuple) and pat[0] == "union":
        return env[pat[1]] | env[pat[2]]
    if isinstance(pat, tuple) and pat[0] == "single":
        return frozenset([env[pat[1]]])
    return env[pat]


def _match_agent(name: str, i: int, env: dict) -> bool:
    if name in env:
        return env[name] == i
    env[name] = i
    return True


@dataclass(frozen=True)
class PCoal(Pat):
    group: object
    sub: Pat

    def match(self, f, env, n):
        return (isinstance(f, Coal) and _match_set(self.group, f.coalition, env, n)
                and self.sub.match(f.sub, env, n))

    def build(self, env, n):
        return Coal(_build_set(self.group, env, n), self.sub.build(env, n))


@dataclass(frozen=True)
class PKnow(Pat):
    agent: str
    sub: Pat

    def match(self, f, env, n):
        return (isinstance(f, Know) and _match_agent(self.agent, f.agent, env)
                and self.sub.match(f.sub, env, n))

    def build(self, env, n):
        return Know(env[self.agent], self.sub.build(env, n))


@dataclass(frozen=True)
class PGroupOp(Pat):
    cls: type  # Common or Dist
    group: object
    sub: Pat

    def match(self, f, env, n):
        return (isinstance(f, self.cls) and _match_set(self.group, f.group, env, n)
                and self.sub.match(f.sub, env, n))

    def build(self, env, n):
        return self.cls(_build_set(self.group, env, n), self.sub.build(env, n))


@dataclass(frozen=True)
class PEveryKnows(Pat):
    """E_G sub, in its expanded form (left-nested K_i conjunction)."""
    group: object
    sub: Pat

    def match(self, f, env, n):
        items = []
        while isinstance(f, And):
            items.append(f.right)
            f = f.left
        items.append(f)
        items.reverse()
        if not all(isinstance(k, Know) for k in items):
            return False
        agents = [k.agent for k in items]
        if agents != sorted(set(agents)):
            return False
        if not _match_set(self.group, frozenset(agents), env, n):
            return False
        return all(self.sub.match(k.sub, env, n) for k in items)

    def build(self, env, n):
        return every_knows(_build_set(self.group, env, n), self.sub.build(env, n))


def p_implies(a: Pat, b: Pat) -> Pat:
    return PNot(PAnd(a, PNot(b)))


def p_iff(a: Pat, b: Pat) -> Pat:
    return PAnd(p_implies(a, b), p_implies(b, a))


PHI, PSI = PVar("phi"), PVar("psi")
BOT = PNot(PTop())


@dataclass(frozen=True)
class Scheme:
    name: str
    pattern: Pat | None          # None for Prop
    side: Callable[[dict], bool] | None = None
    side_text: str = ""

    def match(self, f: Formula, n: int) -> dict | None:
        if self.pattern is None:
            return {} if is_tautology(f) else None
        env: dict = {}
        if not self.pattern.match(f, env, n):
            return None
        if self.side is not None and not self.side(env):
            return None
        if self.name == "C1" and not is_tautology(f):
            return None
        return env

    def instantiate(self, env: dict, n: int) -> Formula:
        if self.pattern is None:
            raise ValueError("Prop has no schematic form")
        if self.side is not None and not self.side(env):
            raise ValueError(f"side condition of {self.name} fails: {self.side_text}")
        return self.pattern.build(env, n)


SCHEMES: dict[str, Scheme] = {s.name: s for s in [
    Scheme("Prop", None),
    Scheme("G1", PNot(PCoal("G", BOT))),
    Scheme("G2", PCoal("G", PTop())),
    Scheme("G3", p_implies(PNot(PCoal("EMPTY", PNot(PHI))), PCoal("GRAND", PHI))),
    Scheme("G4", p_implies(PCoal("G", PAnd(PHI, PSI)), PCoal("G", PSI))),
    Scheme("G5", p_implies(PAnd(PCoal("G1", PHI), PCoal("G2", PSI)),
                           PCoal(("union", "G1", "G2"), PAnd(PHI, PSI))),
           lambda e: not (e["G1"] & e["G2"]), "G1 and G2 disjoint"),
    Scheme("K", p_implies(PKnow("i", p_implies(PHI, PSI)),
                          p_implies(PKnow("i", PHI), PKnow("i", PSI)))),
    Scheme("T", p_implies(PKnow("i", PHI), PHI)),
    Scheme("4", p_implies(PKnow("i", PHI), PKnow("i", PKnow("i", PHI)))),
    Scheme("5", p_implies(PNot(PKnow("i", PHI)), PKnow("i", PNot(PKnow("i", PHI))))),
    Scheme("C1", p_iff(PEveryKnows("G", PHI), PEveryKnows("G", PHI))),
    Scheme("C2", p_implies(PGroupOp(Common, "G", PHI),
                           PEveryKnows("G", PAnd(PHI, PGroupOp(Common, "G", PHI))))),
    Scheme("DK", p_implies(PGroupOp(Dist, "G", p_implies(PHI, PSI)),
                           p_implies(PGroupOp(Dist, "G", PHI), PGroupOp(Dist, "G", PSI)))),
    Scheme("DT", p_implies(PGroupOp(Dist, "G", PHI), PHI)),
    Scheme("D4", p_implies(PGroupOp(Dist, "G", PHI),
                           PGroupOp(Dist, "G", PGroupOp(Dist, "G", PHI)))),
    Scheme("D5", p_implies(PNot(PGroupOp(Dist, "G", PHI)),
                           PGroupOp(Dist, "G", PNot(PGroupOp(Dist, "G", PHI))))),
    Scheme("D1", p_iff(PKnow("i", PHI), PGroupOp(Dist, ("single", "i"), PHI))),
    Scheme("D2", p_implies(PGroupOp(Dist, "G", PHI), PGroupOp(Dist, "H", PHI)),
           lambda e: e["G"] <= e["H"], "G subset of H"),
]}

_CL = {"Prop", "G1", "G2", "G3", "G4", "G5"}
_K = {"K", "T", "4", "5"}
_C = {"C1", "C2"}
_D = {"DK", "DT", "D4", "D5", "D1", "D2"}

SYSTEM_SCHEMES = {
    LogicId.CL: _CL,
    LogicId.CLK: _CL | _K,
    LogicId.CLC: _CL | _K | _C,
    LogicId.CLD: _CL | _K | _D,
    LogicId.CLCD: _CL | _K | _C | _D,
}
SYSTEM_RULES = {
    LogicId.CL: {"MP", "RG"},
    LogicId.CLK: {"MP", "RG", "RN"},
    LogicId.CLC: {"MP", "RG", "RN", "RC"},
    LogicId.CLD: {"MP", "RG", "RN"},
    LogicId.CLCD: {"MP", "RG", "RN", "RC"},
}
RULE_ARITY = {"MP": 2, "RG": 1, "RN": 1, "RC": 1}


# ---------------------------------------------------------------------------
# Propositional tautologies

MAX_OPAQUE = 16


def _opaque(f: Formula, out: dict) -> None:
    if isinstance(f, Not):
        _opaque(f.sub, out)
    elif isinstance(f, And):
        _opaque(f.left, out)
        _opaque(f.right, out)
    elif not isinstance(f, Top) and f not in out:
        out[f] = len(out)


def is_tautology(f: Formula) -> bool:
    """Truth-table check treating atoms and modal subformulas as variables."""
    vars_: dict = {}
    _opaque(f, vars_)
    k = len(vars_)
    if k > MAX_OPAQUE:
        raise ValueError(f"{k} distinct opaque subformulas; at most {MAX_OPAQUE} supported")
    rows = 1 << k
    full = (1 << rows) - 1
    # column j: bit r is bit j of the row number r
    cols = []
    for j in range(k):
        block = ((1 << (1 << j)) - 1) << (1 << j)
        period = 1 << (j + 1)
        col = 0
        for start in range(0, rows, period):
            col |= block << start
        cols.append(col & full)
    memo: dict = {}

    def ev(g: Formula) -> int:
        if g in memo:
            return memo[g]
        if isinstance(g, Top):
            v = full
        elif isinstance(g, Not):
            v = full ^ ev(g.sub)
        elif isinstance(g, And):
            v = ev(g.left) & ev(g.right)
        else:
            v = cols[vars_[g]]
        memo[g] = v
        return v

    return ev(f) == full


# ---------------------------------------------------------------------------
# Proofs


@dataclass(frozen=True)
class ProofLine:
    label: int
    formula: Formula
    tag: str
    refs: tuple = ()
    source_line: int | None = None


@dataclass
class Proof:
    system: LogicId
    n_agents: int
    lines: list

    def formulas(self) -> list[Formula]:
        return [ln.formula for ln in self.lines]


@dataclass
class LineVerdict:
    label: int
    ok: bool
    message: str
    substitution: dict = field(default_factory=dict)


@dataclass
class ProofReport:
    lines: list

    @property
    def accepted(self) -> bool:
        return all(v.ok for v in self.lines)

    @property
    def rejected_at(self) -> int | None:
        return next((v.label for v in self.lines if not v.ok), None)


def parse_proof(text: str) -> Proof:
    system = None
    n_agents = None
    raw_lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "system" and len(head) == 2:
            try:
                system = LogicId.parse(head[1])
            except ValueError as exc:
                raise ProofFormatError(str(exc), no) from None
            continue
        if head[0] == "agents" and len(head) == 2:
            if not head[1].isdigit() or int(head[1]) < 1:
                raise ProofFormatError("agents must be a positive integer", no)
            n_agents = int(head[1])
            continue
        raw_lines.append((no, line))
    if system is None:
        raise ProofFormatError("missing 'system' header")
    if n_agents is None:
        raise ProofFormatError("missing 'agents' header")
    lines = []
    for no, line in raw_lines:
        label_part, sep, rest = line.partition(".")
        if not sep or not label_part.strip().isdigit():
            raise ProofFormatError("expected '<number>. <formula> ; <justification>'", no)
        body, sep, just = rest.rpartition(";")
        if not sep:
            raise ProofFormatError("missing '; <justification>'", no)
        try:
            formula = parse(body.strip(), n_agents)
        except FormulaSyntaxError as exc:
            raise ProofFormatError(str(exc), no) from None
        parts = just.split()
        if not parts:
            raise ProofFormatError("empty justification", no)
        tag = parts[0]
        if tag not in SCHEMES and tag not in RULE_ARITY:
            raise ProofFormatError(f"unknown justification {tag!r}", no)
        try:
            refs = tuple(int(x) for x in parts[1:])
        except ValueError:
            raise ProofFormatError("line references must be numbers", no) from None
        lines.append(ProofLine(int(label_part), formula, tag, refs, no))
    return Proof(system, n_agents, lines)


def load_proof(path: str) -> Proof:
    with open(path, encoding="utf-8") as fh:
        return parse_proof(fh.read())


def dumps_proof(proof: Proof) -> str:
    out = [f"system {proof.system.value}", f"agents {proof.n_agents}"]
    for ln in proof.lines:
        just = " ".join([ln.tag] + [str(r) for r in ln.refs])
        out.append(f"{ln.label}. {to_text(ln.formula)} ; {just}")
    return "\n".join(out) + "\n"


def match_axiom(f: Formula, scheme: str, n_agents: int) -> dict | None:
    """Substitution showing ``f`` is an instance of ``scheme`` (side
    conditions included), or None."""
    return SCHEMES[scheme].match(f, n_agents)


def _check_rule(ln: ProofLine, proven: dict) -> tuple[bool, str]:
    tag = ln.tag
    prem = [proven[r] for r in ln.refs]
    f = ln.formula
    if tag == "MP":
        a, b = prem
        for minor, major in ((a, b), (b, a)):
            imp = as_implication(major)
            if imp is not None and imp[0] == minor and imp[1] == f:
                return True, "modus ponens"
        return False, "premises do not have the shapes φ and φ -> conclusion"
    if tag == "RG":
        (p,) = prem
        pair, concl = as_biconditional(p), as_biconditional(f)
        if pair is None:
            return False, "premise is not a biconditional"
        if (concl is None or not isinstance(concl[0], Coal) or not isinstance(concl[1], Coal)
                or concl[0].coalition != concl[1].coalition):
            return False, "conclusion is not [G]φ <-> [G]ψ"
        G = concl[0].coalition
        if iff(Coal(G, pair[0]), Coal(G, pair[1])) != f:
            return False, "conclusion does not match the premise"
        return True, "coalition congruence"
    if tag == "RN":
        (p,) = prem
        if isinstance(f, Know) and f.sub == p:
            return True, "necessitation"
        return False, "conclusion is not K_i applied to the premise"
    if tag == "RC":
        (p,) = prem
        imp = as_implication(f)
        if imp is None or not isinstance(imp[1], Common):
            return False, "conclusion is not φ -> C_G ψ"
        phi, c = imp
        expected = implies(phi, every_knows(c.group, And(phi, c.sub)))
        if p != expected:
            return False, f"premise should be {to_text(expected)}"
        return True, "common knowledge induction"
    raise AssertionError(tag)


def check_proof(proof: Proof) -> ProofReport:
    verdicts = []
    proven: dict[int, Formula] = {}
    seen: set[int] = set()
    schemes = SYSTEM_SCHEMES[proof.system]
    rules = SYSTEM_RULES[proof.system]
    for ln in proof.lines:
        ok, msg, env = False, "", {}
        if ln.label in seen:
            msg = f"duplicate line number {ln.label}"
        else:
            try:
                check_agents(ln.formula, proof.n_agents)
                lang_ok = proof.system.admits(fragment(ln.formula))
            except FormulaSyntaxError as exc:
                lang_ok, msg = False, str(exc)
            if not lang_ok:
                msg = msg or f"formula is not in the language of {proof.system.value}"
            elif ln.tag in SCHEMES:
                if ln.tag not in schemes:
                    msg = f"{ln.tag} is not an axiom of {proof.system.value}"
                elif ln.refs:
                    msg = "axioms take no line references"
                else:
                    try:
                        env = match_axiom(ln.formula, ln.tag, proof.n_agents)
                    except ValueError as exc:
                        env, msg = None, str(exc)
                    ok = env is not None
                    msg = msg or (f"instance of {ln.tag}" if ok else f"not an instance of {ln.tag}")
                    env = env or {}
            elif ln.tag not in rules:
                msg = f"rule {ln.tag} is not part of {proof.system.value}"
            elif len(ln.refs) != RULE_ARITY[ln.tag]:
                msg = f"{ln.tag} needs {RULE_ARITY[ln.tag]} line reference(s)"
            elif any(r not in proven for r in ln.refs):
                bad = next(r for r in ln.refs if r not in proven)
                msg = f"line {bad} is not an earlier line"
            else:
                ok, msg = _check_rule(ln, proven)
        seen.add(ln.label)
        # later lines may cite this one; a failed line is still recorded so
        # that the first failure is the one reported
        proven[ln.label] = ln.formula
        verdicts.append(LineVerdict(ln.label, ok, msg, env))
    return ProofReport(verdicts)


# ---------------------------------------------------------------------------
# Semantic cross-check


@dataclass
class CrossReport:
    structures: int
    countermodels: list  # (line label, structure index)

    @property
    def ok(self) -> bool:
        return not self.countermodels


def random_structures(n_agents: int, count: int, seed: int, max_states: int = 6,
                      atoms: Sequence[str] = ("p", "q", "r"), max_actions: int = 3) -> list:
    rng = random.Random(seed)
    return [random_model(rng, n_agents, rng.randint(1, max_states), atoms, max_actions)
            for _ in range(count)]


def cross_validate(proof: Proof, count: int = 1000, seed: int = 0,
                   structures: Sequence | None = None) -> CrossReport:
    """Check every line of ``proof`` for validity on random structures."""
    atoms = sorted(set().union(*(atoms_of(ln.formula) for ln in proof.lines))) or ["p"]
    if structures is None:
        structures = random_structures(proof.n_agents, count, seed, atoms=atoms)
    mat = batch_valid(structures, proof.formulas(), proof.n_agents)
    bad = []
    for j, ln in enumerate(proof.lines):
        for i in range(len(structures)):
            if not mat[i, j]:
                bad.append((ln.label, i))
                break
    return CrossReport(len(structures), bad)


# ---------------------------------------------------------------------------
# Random instances (soundness battery)

PROP_TEMPLATES = [
    "phi -> (psi -> phi)",
    "(phi -> (psi -> chi)) -> ((phi -> psi) -> (phi -> chi))",
    "(~psi -> ~phi) -> (phi -> psi)",
    "phi | ~phi",
    "(phi & psi) -> (psi & phi)",
]


def _prop_instance(rng: random.Random, sub: Callable[[], Formula]) -> Formula:
    text = rng.choice(PROP_TEMPLATES)
    env = {"phi": sub(), "psi": sub(), "chi": sub()}
    # substitute by parsing the template over placeholder atoms
    tmpl = parse(text.replace("phi", "x_phi").replace("psi", "x_psi").replace("chi", "x_chi"))
    return _substitute(tmpl, {Atom("x_" + k): v for k, v in env.items()})


def _substitute(f: Formula, env: dict) -> Formula:
    if f in env:
        return env[f]
    if isinstance(f, Not):
        return Not(_substitute(f.sub, env))
    if isinstance(f, And):
        return And(_substitute(f.left, env), _substitute(f.right, env))
    return f


def random_instance(scheme: str, rng: random.Random, n_agents: int, depth: int = 4,
                    atoms: Sequence[str] = ("p", "q", "r"),
                    logic: LogicId = LogicId.CLCD) -> Formula:
    """A random instance of an axiom scheme over ``n_agents`` agents."""
    def sub() -> Formula:
        return random_formula(rng, rng.randint(0, depth), n_agents, tuple(atoms), logic)

    if scheme == "Prop":
        return _prop_instance(rng, sub)
    env: dict = {"phi": sub(), "psi": sub(), "i": rng.randrange(n_agents)}
    if scheme == "G5":
        G1 = random_agent_set(rng, n_agents, allow_empty=True)
        rest = [a for a in range(n_agents) if a not in G1]
        env["G1"] = G1
        env["G2"] = frozenset(a for a in rest if rng.random() < 0.5)
    elif scheme == "D2":
        G = random_agent_set(rng, n_agents, allow_empty=False)
        env["G"] = G
        env["H"] = G | frozenset(a for a in range(n_agents) if rng.random() < 0.5)
    else:
        empty_ok = scheme.startswith("G")
        env["G"] = random_agent_set(rng, n_agents, allow_empty=empty_ok)
    return SCHEMES[scheme].instantiate(env, n_agents)
