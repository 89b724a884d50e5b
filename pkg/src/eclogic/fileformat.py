"""JSON model files.

A file describes a model, or a pseudomodel when it has an ``R`` field::

    {
      "agents": 2,
      "states": {"count": 2, "labels": ["s0", "s1"]},
      "valuation": {"p": ["s0"]},
      "partitions": {"1": [["s0", "s1"]], "2": [["s0"], ["s1"]]},
      "game_forms": [{"state": "s0", "actions": [2, 1], "outcomes": ["s0", "s1"]},
                     {"state": "s1", "actions": [2, 1], "outcomes": ["s0", "s1"]}],
      "R": {"1,2": [["s0"], ["s1"]]}
    }

Instead of ``game_forms`` a file may give ``effectivity``: a list of
``{"state": s, "coalition": [agents], "family": [[states], ...]}`` entries,
read as complete families (``"effectivity_mode": "explicit"``, the default)
or as generators of upward-closed families (``"generators"``).  Agents are
1-based; states are labels or 0-based indices.  Outcome tables list one
successor per action profile, last agent varying fastest.
"""

from __future__ import annotations

import json
from typing import Any

from .structures import (EffectivityFunction, GameForm, InvalidStructure, Model,
                         Pseudomodel, alpha_effectivity, bits,
                         normalize_partition)


class ModelFileError(ValueError):
    """``invalid`` marks well-formed files whose structure breaks an invariant."""

    def __init__(self, message: str, where: str | None = None, invalid: bool = False):
        self.where = where
        self.invalid = invalid
        super().__init__(f"{where}: {message}" if where else message)


def _require(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ModelFileError(f"missing field {key!r}", where or "top level")
    return obj[key]


class _Reader:
    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ModelFileError("expected a JSON object", "top level")
        self.data = data
        n = _require(data, "agents", "")
        if not isinstance(n, int) or n < 1:
            raise ModelFileError("must be a positive integer", "agents")
        self.n_agents = n
        st = _require(data, "states", "")
        if isinstance(st, int):
            st = {"count": st}
        count = _require(st, "count", "states")
        if not isinstance(count, int) or count < 1:
            raise ModelFileError("must be a positive integer", "states.count")
        self.n_states = count
        labels = st.get("labels")
        if labels is not None:
            if (not isinstance(labels, list) or len(labels) != count
                    or len(set(map(str, labels))) != count):
                raise ModelFileError(f"need {count} distinct labels", "states.labels")
            labels = [str(x) for x in labels]
        self.labels = labels

    def state(self, ref: Any, where: str) -> int:
        if isinstance(ref, bool):
            raise ModelFileError(f"bad state reference {ref!r}", where)
        if isinstance(ref, int):
            if 0 <= ref < self.n_states:
                return ref
        elif isinstance(ref, str):
            if self.labels and ref in self.labels:
                return self.labels.index(ref)
            if ref.isdigit() and int(ref) < self.n_states:
                return int(ref)
        raise ModelFileError(f"unknown state {ref!r}", where)

    def states(self, refs: Any, where: str) -> int:
        if not isinstance(refs, list):
            raise ModelFileError("expected a list of states", where)
        mask = 0
        for k, r in enumerate(refs):
            mask |= 1 << self.state(r, f"{where}[{k}]")
        return mask

    def agent(self, ref: Any, where: str) -> int:
        try:
            a = int(ref)
        except (TypeError, ValueError):
            raise ModelFileError(f"bad agent {ref!r}", where) from None
        if not 1 <= a <= self.n_agents:
            raise ModelFileError(f"agent {a} outside 1..{self.n_agents}", where)
        return a - 1

    def group(self, ref: Any, where: str) -> int:
        if isinstance(ref, str):
            items = [x for x in ref.replace(" ", "").split(",") if x]
        elif isinstance(ref, list):
            items = ref
        else:
            raise ModelFileError(f"bad coalition {ref!r}", where)
        mask = 0
        for k, a in enumerate(items):
            mask |= 1 << self.agent(a, f"{where}[{k}]")
        return mask

    def blocks(self, value: Any, where: str) -> list[int]:
        if not isinstance(value, list):
            raise ModelFileError("expected a list of blocks", where)
        return [self.states(b, f"{where}[{k}]") for k, b in enumerate(value)]

    def model(self) -> Model:
        d = self.data
        val = {}
        for name, refs in sorted(_require(d, "valuation", "").items()):
            val[str(name)] = self.states(refs, f"valuation.{name}")
        parts_raw = _require(d, "partitions", "")
        if not isinstance(parts_raw, dict):
            raise ModelFileError("expected an object keyed by agent", "partitions")
        parts: list = [None] * self.n_agents
        for key, value in parts_raw.items():
            i = self.agent(key, f"partitions.{key}")
            parts[i] = self.blocks(value, f"partitions.{key}")
        for i, p in enumerate(parts):
            if p is None:
                # agents without a partition cannot tell states apart
                parts[i] = [(1 << self.n_states) - 1]
            else:
                try:
                    normalize_partition(p, self.n_states)
                except InvalidStructure as exc:
                    raise ModelFileError(str(exc), f"partitions.{i + 1}") from None
        has_g, has_e = "game_forms" in d, "effectivity" in d
        if has_g == has_e:
            raise ModelFileError("exactly one of 'game_forms' and 'effectivity' is required",
                                 "top level")
        game = None
        if has_g:
            game = self.game_form(d["game_forms"])
            E = alpha_effectivity(game)
        else:
            E = self.effectivity(d["effectivity"], d.get("effectivity_mode", "explicit"))
        try:
            return Model(self.n_agents, self.n_states, val, tuple(parts), E,
                         tuple(self.labels) if self.labels else None, game,
                         bool(d.get("playable_only", False)))
        except InvalidStructure as exc:
            raise ModelFileError(str(exc), "effectivity" if has_e else "game_forms",
                                 invalid=True) from None

    def game_form(self, raw: Any) -> GameForm:
        if not isinstance(raw, list):
            raise ModelFileError("expected a list", "game_forms")
        actions: list = [None] * self.n_states
        outcomes: list = [None] * self.n_states
        for k, entry in enumerate(raw):
            where = f"game_forms[{k}]"
            s = self.state(_require(entry, "state", where), f"{where}.state")
            acts = _require(entry, "actions", where)
            if (not isinstance(acts, list) or len(acts) != self.n_agents
                    or not all(isinstance(a, int) and a >= 1 for a in acts)):
                raise ModelFileError(f"need {self.n_agents} positive action counts",
                                     f"{where}.actions")
            outs = _require(entry, "outcomes", where)
            size = 1
            for a in acts:
                size *= a
            if not isinstance(outs, list) or len(outs) != size:
                raise ModelFileError(f"need {size} outcomes", f"{where}.outcomes")
            actions[s] = tuple(acts)
            outcomes[s] = tuple(self.state(o, f"{where}.outcomes[{j}]")
                                for j, o in enumerate(outs))
        missing = [s for s in range(self.n_states) if actions[s] is None]
        if missing:
            raise ModelFileError(f"no game form for state {missing[0]}", "game_forms")
        return GameForm(self.n_agents, self.n_states, tuple(actions), tuple(outcomes))

    def effectivity(self, raw: Any, mode: str) -> EffectivityFunction:
        if mode not in ("explicit", "generators"):
            raise ModelFileError("must be 'explicit' or 'generators'", "effectivity_mode")
        if not isinstance(raw, list):
            raise ModelFileError("expected a list", "effectivity")
        n_coal = 1 << self.n_agents
        fams = [[set() for _ in range(n_coal)] for _ in range(self.n_states)]
        for k, entry in enumerate(raw):
            where = f"effectivity[{k}]"
            s = self.state(_require(entry, "state", where), f"{where}.state")
            G = self.group(_require(entry, "coalition", where), f"{where}.coalition")
            fam = _require(entry, "family", where)
            if not isinstance(fam, list):
                raise ModelFileError("expected a list of state sets", f"{where}.family")
            for j, X in enumerate(fam):
                fams[s][G].add(self.states(X, f"{where}.family[{j}]"))
        return EffectivityFunction(self.n_states, self.n_agents, fams,
                                   upward=(mode == "generators"))

    def structure(self) -> Model | Pseudomodel:
        m = self.model()
        if "R" not in self.data:
            return m
        raw = self.data["R"]
        if not isinstance(raw, dict):
            raise ModelFileError("expected an object keyed by group", "R")
        R = {}
        for key, value in raw.items():
            G = self.group(key, f"R.{key}")
            if G == 0:
                raise ModelFileError("groups must be non-empty", f"R.{key}")
            R[G] = self.blocks(value, f"R.{key}")
        try:
            return Pseudomodel(m, R)
        except InvalidStructure as exc:
            raise ModelFileError(str(exc), "R", invalid=True) from None


def load_structure_text(text: str) -> Model | Pseudomodel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return _Reader(data).structure()


def load_structure(path: str) -> Model | Pseudomodel:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return load_structure_text(text)
    except ModelFileError as exc:
        raise ModelFileError(str(exc).split(": ", 1)[-1] if exc.where else str(exc),
                             f"{path}: {exc.where}" if exc.where else path, exc.invalid) from None


def _state_list(M: Model, mask: int) -> list:
    return [M.label(s) for s in bits(mask)]


def _group_key(G: int) -> str:
    return ",".join(str(i + 1) for i in bits(G))


def structure_to_dict(S: Model | Pseudomodel, provenance: dict | None = None) -> dict:
    M = S.model if isinstance(S, Pseudomodel) else S
    out: dict[str, Any] = {
        "agents": M.n_agents,
        "states": {"count": M.n_states, "labels": [M.label(s) for s in range(M.n_states)]},
        "valuation": {a: _state_list(M, v) for a, v in sorted(M.valuation.items())},
        "partitions": {str(i + 1): [_state_list(M, b) for b in p]
                       for i, p in enumerate(M.partitions)},
    }
    if M.game_form is not None:
        g = M.game_form
        out["game_forms"] = [{"state": M.label(s), "actions": list(g.actions[s]),
                              "outcomes": [M.label(o) for o in g.outcomes[s]]}
                             for s in range(M.n_states)]
    else:
        E = M.effectivity
        entries = []
        for s in range(M.n_states):
            for G in range(1 << M.n_agents):
                fam = E.core(s, G) if E.upward else E.families[s][G]
                entries.append({"state": M.label(s),
                                "coalition": [i + 1 for i in bits(G)],
                                "family": [_state_list(M, X)
                                           for X in sorted(fam, key=lambda x: (x.bit_count(), x))]})
        out["effectivity"] = entries
        out["effectivity_mode"] = "generators" if E.upward else "explicit"
    if M.playable_only:
        out["playable_only"] = True
    if isinstance(S, Pseudomodel):
        out["R"] = {_group_key(G): [_state_list(M, b) for b in S.R[G]]
                    for G in sorted(S.R, key=lambda g: (g.bit_count(), g))
                    if G.bit_count() > 1}
    if provenance is not None:
        out["provenance"] = provenance
    return out


def dumps_structure(S: Model | Pseudomodel, provenance: dict | None = None) -> str:
    return json.dumps(structure_to_dict(S, provenance), indent=1, sort_keys=True) + "\n"
