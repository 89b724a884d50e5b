"""Command-line entry point.

Exit status: 0 for success, SAT, VALID and accepted proofs; 1 for UNSAT,
NOT_VALID, rejected proofs, invalid models and failed transformations; 2 for
usage and input errors; 3 when a bounded search returns UNKNOWN.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

from . import kernels
from .decide import SearchBudget, sat, valid
from .fileformat import ModelFileError, load_structure, structure_to_dict
from .mcheck import extension
from .proofcheck import ProofFormatError, check_proof, cross_validate, load_proof
from .structures import (InvalidStructure, Pseudomodel, random_model, random_pseudomodel,
                         validate_effectivity)
from .syntax import (FormulaSyntaxError, LogicId, closure, fragment, modal_depth, parse, size,
                     to_text)
from .transform import LiftFailed, filtrate, lift_pseudomodel

SCHEMA = 1
EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3


class InputError(Exception):
    pass


class Output:
    def __init__(self, command: str, structured: bool, stream=None):
        self.command = command
        self.structured = structured
        self.stream = stream or sys.stdout

    def record(self, rec: dict, text: str | None = None) -> None:
        if self.structured:
            rec = {"schema": SCHEMA, "command": self.command, **rec}
            self.stream.write(json.dumps(rec, sort_keys=True) + "\n")
        elif text is not None:
            self.stream.write(text.rstrip("\n") + "\n")


def _table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _formula(text: str, n_agents: int | None) -> object:
    try:
        return parse(text, n_agents)
    except FormulaSyntaxError as exc:
        raise InputError(f"formula: {exc}") from None


def _logic(name: str | None, phi) -> LogicId:
    if name is None:
        return fragment(phi)
    logic = LogicId.parse(name)
    if not logic.admits(fragment(phi)):
        raise InputError(f"formula is not in the language of {logic.value}")
    return logic


def _model(path: str):
    return load_structure(path)


def _state(M, ref: str) -> int:
    try:
        return M.state_id(ref)
    except (KeyError, ValueError, IndexError):
        raise InputError(f"unknown state {ref!r}") from None


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _dump(S, provenance=None) -> str:
    return json.dumps(structure_to_dict(S, provenance), indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Commands


def cmd_parse(args, out: Output) -> int:
    phi = _formula(args.formula, args.agents)
    logic = _logic(args.logic, phi)
    cls = closure(phi, logic)
    rec = {"formula": to_text(phi), "fragment": fragment(phi).value, "logic": logic.value,
           "size": size(phi), "modal_depth": modal_depth(phi), "closure": len(cls)}
    out.record(rec, "\n".join(f"{k}: {v}" for k, v in rec.items()))
    return EXIT_OK


def cmd_check_model(args, out: Output) -> int:
    try:
        S = _model(args.model)
    except ModelFileError as exc:
        if not exc.invalid:
            raise
        out.record({"model": args.model, "ok": False, "diagnostics": [str(exc)]},
                   f"{args.model}: invalid\n  {exc}")
        return EXIT_NO
    M = S.model if isinstance(S, Pseudomodel) else S
    rep = validate_effectivity(M.effectivity, M.playable_only)
    rec = {"model": args.model, "ok": rep.ok, "agents": M.n_agents, "states": M.n_states,
           "kind": "pseudomodel" if isinstance(S, Pseudomodel) else "model",
           "source": "game_forms" if M.game_form is not None else "effectivity",
           "diagnostics": [v.describe() for v in rep.violations]}
    text = (f"{args.model}: {'ok' if rep.ok else 'invalid'} ({rec['kind']}, {M.n_agents} agents, "
            f"{M.n_states} states, {rec['source']})")
    out.record(rec, text)
    return EXIT_OK if rep.ok else EXIT_NO


def cmd_mc(args, out: Output) -> int:
    S = _model(args.model)
    phi = _formula(args.formula, S.n_agents)
    ext = extension(S, phi)
    states = [_state(S, args.state)] if args.state is not None else range(S.n_states)
    rows = [[S.label(s), s in ext] for s in states]
    rec = {"formula": to_text(phi), "truth": {S.label(s): s in ext for s in states},
           "valid": ext.states == S.full}
    out.record(rec, f"{to_text(phi)}\n" + _table(["state", "holds"], rows))
    return EXIT_OK


def cmd_filtrate(args, out: Output) -> int:
    S = _model(args.model)
    phi = _formula(args.formula, S.n_agents)
    logic = _logic(args.logic, phi)
    filt = filtrate(S, phi, logic)
    diags = [d.describe() for d in filt.diagnostics]
    rec = {"formula": to_text(phi), "logic": logic.value, "ok": filt.ok,
           "classes": len(filt.signatures),
           "class_of": {S.label(s): c for s, c in enumerate(filt.class_of)},
           "diagnostics": diags}
    if filt.target is not None:
        if args.output:
            _write(args.output, _dump(filt.target))
        else:
            rec["target"] = structure_to_dict(filt.target)
    rows = [[f"c{c}", ", ".join(S.label(s) for s, k in enumerate(filt.class_of) if k == c)]
            for c in range(len(filt.signatures))]
    text = f"{to_text(phi)}: {len(rows)} classes\n" + _table(["class", "states"], rows)
    if diags:
        text += "\n" + "\n".join(diags)
    if filt.target is not None and not args.output:
        text += "\n" + _dump(filt.target)
    out.record(rec, text)
    return EXIT_OK if filt.ok else EXIT_NO


def cmd_lift(args, out: Output) -> int:
    S = _model(args.model)
    if not isinstance(S, Pseudomodel):
        raise InputError("lift needs a pseudomodel file (one with an 'R' field)")
    phi = _formula(args.formula, S.n_agents)
    try:
        lift = lift_pseudomodel(S, phi, args.max_states)
    except LiftFailed as exc:
        out.record({"formula": to_text(phi), "ok": False, "diagnostics": [str(exc)]},
                   f"lift failed: {exc}")
        return EXIT_NO
    M = lift.target
    f_map = {M.label(u): S.label(t) for u, t in enumerate(lift.f)}
    rec = {"formula": to_text(phi), "ok": True, "states": M.n_states, "map": f_map,
           "checked": lift.checked}
    if args.output:
        _write(args.output, _dump(M))
    else:
        rec["target"] = structure_to_dict(M)
    text = (f"{to_text(phi)}: lifted to {M.n_states} states, {lift.checked} closure "
            "members checked\n" + _table(["state", "image"], sorted(f_map.items())))
    if not args.output:
        text += "\n" + _dump(M)
    out.record(rec, text)
    return EXIT_OK


def _budget(args) -> SearchBudget:
    try:
        return SearchBudget(max_states=args.max_states, max_actions=args.max_actions,
                            exact=args.exact, max_atoms=args.max_atoms,
                            max_lift_states=args.max_lift_states)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _decide_one(job: tuple) -> tuple[dict, str, dict | None]:
    text, n_agents, logic_name, budget, mode = job
    phi = parse(text, n_agents)
    logic = LogicId.parse(logic_name) if logic_name else fragment(phi)
    res = (sat if mode == "sat" else valid)(phi, logic, n_agents, budget)
    rec = res.record()
    witness = None
    if res.witness is not None:
        witness = structure_to_dict(res.witness, {"formula": rec["formula"], "verdict": rec["verdict"],
                                                  "state": res.witness.label(res.state)})
    return rec, res.verdict.value, witness


def cmd_decide(args, out: Output) -> int:
    if args.formula is None and args.formulas is None:
        raise InputError("give --formula or --formulas")
    texts = [args.formula] if args.formula is not None else []
    if args.formulas is not None:
        with open(args.formulas, encoding="utf-8") as fh:
            texts += [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    budget = _budget(args)
    jobs = []
    for t in texts:
        phi = _formula(t, args.agents)
        _logic(args.logic, phi)
        jobs.append((to_text(phi), args.agents, args.logic, budget, args.command))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_decide_one, jobs))
    else:
        results = [_decide_one(j) for j in jobs]
    worst = EXIT_OK
    for k, (rec, verdict, witness) in enumerate(results):
        code = {"SAT": EXIT_OK, "VALID": EXIT_OK, "UNSAT": EXIT_NO,
                "NOT_VALID": EXIT_NO, "UNKNOWN": EXIT_UNKNOWN}[verdict]
        worst = max(worst, code)
        if witness is not None and args.witness:
            path = args.witness if len(results) == 1 else f"{args.witness}.{k}"
            _write(path, json.dumps(witness, indent=1, sort_keys=True) + "\n")
        elif witness is not None and out.structured:
            rec["witness"] = witness
        text = f"{verdict}  {rec['formula']}"
        if "certificate" in rec:
            text += f"  ({rec['certificate']}"
            if "witness_states" in rec:
                text += f", witness with {rec['witness_states']} states at {rec['state']}"
            text += ")"
        out.record(rec, text)
    return worst


def _find_proof(path: str) -> str:
    if os.path.exists(path):
        return path
    corpus = resources.files("eclogic") / "corpus" / os.path.basename(path)
    if corpus.is_file():
        return str(corpus)
    raise InputError(f"no such proof file: {path}")


def cmd_prove(args, out: Output) -> int:
    proof = load_proof(_find_proof(args.proof))
    if args.agents is not None and args.agents != proof.n_agents:
        raise InputError(f"--agents {args.agents} but the proof declares {proof.n_agents}")
    if args.system is not None:
        proof.system = LogicId.parse(args.system)
    report = check_proof(proof)
    rec = {"proof": os.path.basename(args.proof), "system": proof.system.value,
           "agents": proof.n_agents, "accepted": report.accepted,
           "rejected_at": report.rejected_at,
           "lines": [{"line": v.label, "ok": v.ok, "message": v.message} for v in report.lines]}
    rows = [[v.label, "ok" if v.ok else "FAIL", v.message] for v in report.lines]
    verdict = "accepted" if report.accepted else f"rejected at line {report.rejected_at}"
    text = _table(["line", "status", "reason"], rows) + f"\n{verdict}"
    if args.cross_validate:
        cv = cross_validate(proof, args.cross_validate, args.seed)
        rec["cross_validation"] = {"structures": cv.structures,
                                   "countermodels": [{"line": ln, "structure": i}
                                                     for ln, i in cv.countermodels]}
        text += (f"\ncross-validation on {cv.structures} structures: "
                 + ("no countermodels" if cv.ok else
                    ", ".join(f"line {ln} fails in structure {i}" for ln, i in cv.countermodels)))
        if not cv.ok:
            rec["accepted"] = False
    out.record(rec, text)
    return EXIT_OK if rec["accepted"] else EXIT_NO


def cmd_gen(args, out: Output) -> int:
    if args.agents < 1 or args.states < 1 or args.count < 0:
        raise InputError("--agents and --states must be positive, --count non-negative")
    rng = random.Random(args.seed)
    atoms = [a for a in args.atoms.split(",") if a]
    for k in range(args.count):
        n_states = rng.randint(1, args.states)
        if args.pseudo:
            S = random_pseudomodel(rng, args.agents, n_states, atoms, args.max_actions)
        else:
            S = random_model(rng, args.agents, n_states, atoms, args.max_actions)
        prov = {"generator": "pseudomodel" if args.pseudo else "model", "seed": args.seed,
                "index": k}
        if args.output_dir:
            os.makedirs(args.output_dir, exist_ok=True)
            path = os.path.join(args.output_dir, f"gen-{k:04d}.json")
            _write(path, _dump(S, prov))
            out.record({"index": k, "path": path, "states": S.n_states}, path)
        else:
            out.record({"index": k, "structure": structure_to_dict(S, prov)}, _dump(S, prov))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "structured"], default="text",
                        help="structured: one JSON record per line")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--kernels", choices=["auto", "compiled", "python"], default="auto",
                        help="model-checking kernel backend")

    p = argparse.ArgumentParser(prog="eclogic",
                                description="Epistemic coalition logic workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="parse and normalise a formula")
    s.add_argument("--formula", required=True)
    s.add_argument("--agents", type=int)
    s.add_argument("--logic")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("check-model", parents=[common], help="validate a model file")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_check_model)

    s = sub.add_parser("mc", parents=[common], help="model-check a formula")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--state")
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("filtrate", parents=[common], help="filtrate a model through cl(φ)")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--logic")
    s.add_argument("--output", help="write the target structure here")
    s.set_defaults(func=cmd_filtrate)

    s = sub.add_parser("lift", parents=[common], help="lift a pseudomodel to a model")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--max-states", type=int, default=20000)
    s.add_argument("--output", help="write the lifted model here")
    s.set_defaults(func=cmd_lift)

    for name in ("sat", "valid"):
        s = sub.add_parser(name, parents=[common], help=f"decide {name}isfiability"
                           if name == "sat" else "decide validity")
        s.add_argument("--agents", type=int, required=True)
        s.add_argument("--formula")
        s.add_argument("--formulas", help="file with one formula per line")
        s.add_argument("--logic")
        s.add_argument("--exact", action="store_true", help="run the complete procedure")
        s.add_argument("--max-states", type=int, default=3)
        s.add_argument("--max-actions", type=int, default=2)
        s.add_argument("--max-atoms", type=int, default=1 << 16)
        s.add_argument("--max-lift-states", type=int, default=20000)
        s.add_argument("--witness", help="write the witness model here")
        s.add_argument("--jobs", type=int, default=1)
        s.set_defaults(func=cmd_decide)

    s = sub.add_parser("prove", parents=[common], help="check a proof file")
    s.add_argument("--proof", required=True)
    s.add_argument("--system")
    s.add_argument("--agents", type=int)
    s.add_argument("--cross-validate", type=int, default=0, metavar="N",
                   help="also check every line on N random structures")
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("gen", parents=[common], help="generate random structures")
    s.add_argument("--agents", type=int, required=True)
    s.add_argument("--states", type=int, required=True, help="maximum number of states")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--atoms", default="p,q")
    s.add_argument("--max-actions", type=int, default=3)
    s.add_argument("--pseudo", action="store_true", help="generate pseudomodels")
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Output(args.command, args.format == "structured")
    if args.kernels != "auto":
        kernels.use(args.kernels)
    try:
        return args.func(args, out)
    except (InputError, FormulaSyntaxError, ModelFileError, ProofFormatError,
            InvalidStructure, ValueError, OSError) as exc:
        out.record({"error": str(exc)})
        print(f"eclogic {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
