"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--structures 2000] [--formulas 300] [--repeat 3]
"""

import argparse
import random
import time

import numpy as np

from eclogic import kernels
from eclogic.mcheck import Program
from eclogic.search import sweep_search
from eclogic.structures import random_model
from eclogic.syntax import parse, random_formula


def best_of(repeat, fn):
    times = []
    result = None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def bench_eval(args, backends):
    rng = random.Random(args.seed)
    structs = [random_model(rng, 2, rng.randint(1, 6)) for _ in range(args.structures)]
    fs = [random_formula(rng, 5, 2, ("p", "q")) for _ in range(args.formulas)]
    prog = Program(fs, 2)
    # table construction is shared Python code; time only the kernel call
    tabs = [prog.tables(M) for M in structs]
    consts = np.stack([t[0] for t in tabs])
    boxtab = np.stack([t[1] for t in tabs])
    coaltab = np.stack([t[2] for t in tabs])
    nstates = np.array([M.n_states for M in structs], dtype=np.int32)
    out = {}
    for name in backends:
        impl = kernels.backend(name)
        secs, res = best_of(args.repeat, lambda: np.asarray(
            impl.eval_batch(prog.ops, consts, boxtab, coaltab, nstates)))
        out[name] = (secs, res)
        print(f"eval_batch  {name:9s} {secs * 1e3:9.1f} ms  "
              f"({len(prog.ops)} nodes x {len(structs)} structures)")
    return out


def bench_sweep(args, backends):
    goals = [parse(t) for t in ("[1] p & ~[2] p & K1 [2] ~p", "D{1,2} p & ~K1 p & ~K2 p",
                                "C{1,2} [] p & ~[1,2] p",
                                # unsatisfiable, so the sweep runs to exhaustion
                                "[1] p & [2] ~p")]
    out = {}
    for name in backends:
        secs, (hits, stats) = best_of(
            args.repeat, lambda: sweep_search(goals, 2, args.sweep_states, args.sweep_actions, atoms=["p"],
                                              backend=name))
        out[name] = (secs, [h and h.states for h in hits])
        print(f"sweep       {name:9s} {secs * 1e3:9.1f} ms  ({stats.tuples} structures)")
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--structures", type=int, default=2000)
    ap.add_argument("--formulas", type=int, default=300)
    ap.add_argument("--sweep-states", type=int, default=3)
    ap.add_argument("--sweep-actions", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    backends = ["python"]
    try:
        kernels.backend("compiled")
        backends.insert(0, "compiled")
    except ImportError:
        print("compiled kernels not built; timing the fallback only")
    ev = bench_eval(args, backends)
    sw = bench_sweep(args, backends)
    if len(backends) == 2:
        assert np.array_equal(ev["compiled"][1], ev["python"][1])
        assert sw["compiled"][1] == sw["python"][1]
        print(f"speedup: eval_batch {ev['python'][0] / ev['compiled'][0]:.1f}x, "
              f"sweep {sw['python'][0] / sw['compiled'][0]:.1f}x (results identical)")


if __name__ == "__main__":
    main()
