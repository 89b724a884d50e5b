"""Numpy implementations of the hot kernels (fallback for _ckernels).

Programs are int32 arrays of shape (n_nodes, 3) holding (op, a, b):

    CONST  a = slot in the constants array
    NOT    a = child node
    AND    a, b = child nodes
    BOX    a = child node, b = relation row in the box table
    COAL   a = child node, b = coalition mask (row of the membership table)

State sets are uint8 masks (at most 6 states), membership tables hold one
uint64 per (coalition, state) whose bit X says whether the set X is in the
family.
"""

from __future__ import annotations

import numpy as np

CONST, NOT, AND, BOX, COAL = 0, 1, 2, 3, 4


def eval_batch(ops, consts, boxtab, coaltab, nstates):
    """Evaluate one program on many structures at once.

    consts  uint8  (n_struct, n_const)   slot 0 is the full state set
    boxtab  uint8  (n_struct, n_rel, 64)
    coaltab uint64 (n_struct, n_coal, 6)
    nstates int32  (n_struct,)
    returns uint8 (n_struct, n_nodes)
    """
    n_struct = consts.shape[0]
    n_nodes = ops.shape[0]
    out = np.zeros((n_struct, n_nodes), dtype=np.uint8)
    rows = np.arange(n_struct)
    full = consts[:, 0]
    for k in range(n_nodes):
        op, a, b = int(ops[k, 0]), int(ops[k, 1]), int(ops[k, 2])
        if op == CONST:
            out[:, k] = consts[:, a]
        elif op == NOT:
            out[:, k] = full & ~out[:, a]
        elif op == AND:
            out[:, k] = out[:, a] & out[:, b]
        elif op == BOX:
            out[:, k] = boxtab[rows, b, out[:, a]]
        elif op == COAL:
            x = out[:, a].astype(np.uint64)
            r = np.zeros(n_struct, dtype=np.uint8)
            for s in range(int(nstates.max())):
                hit = ((coaltab[:, b, s] >> x) & np.uint64(1)).astype(np.uint8)
                hit &= (nstates > s).astype(np.uint8)
                r |= hit << np.uint8(s)
            out[:, k] = r
        else:
            raise ValueError(f"bad opcode {op}")
    return out


def sweep(ops, consts, boxtab, memb, n_states, goals, start, count, found, found_states,
          chunk=1 << 15):
    """Scan effectivity tuples ``start .. start+count-1`` of one frame.

    Tuple t assigns library entry (t // L**s) % L to state s.  For each goal
    node not yet found (found[g] < 0) the first tuple making its extension
    non-empty is recorded in ``found`` and the extension in ``found_states``.
    Returns the number of tuples scanned (less than ``count`` only when every
    goal has been found).
    """
    L = memb.shape[0]
    n_nodes = ops.shape[0]
    full = np.uint8(consts[0])
    scanned = 0
    pos = start
    end = start + count
    while pos < end:
        if (found >= 0).all():
            break
        hi = min(end, pos + chunk)
        t = np.arange(pos, hi, dtype=np.int64)
        digits = []
        rem = t.copy()
        for _ in range(n_states):
            digits.append(rem % L)
            rem //= L
        vals = np.zeros((n_nodes, hi - pos), dtype=np.uint8)
        for k in range(n_nodes):
            op, a, b = int(ops[k, 0]), int(ops[k, 1]), int(ops[k, 2])
            if op == CONST:
                vals[k] = consts[a]
            elif op == NOT:
                vals[k] = full & ~vals[a]
            elif op == AND:
                vals[k] = vals[a] & vals[b]
            elif op == BOX:
                vals[k] = boxtab[b][vals[a]]
            elif op == COAL:
                x = vals[a].astype(np.uint64)
                r = np.zeros(hi - pos, dtype=np.uint8)
                for s in range(n_states):
                    hit = (memb[digits[s], b] >> x) & np.uint64(1)
                    r |= hit.astype(np.uint8) << np.uint8(s)
                vals[k] = r
        for gi, g in enumerate(goals):
            if found[gi] >= 0:
                continue
            nz = np.flatnonzero(vals[g])
            if nz.size:
                found[gi] = pos + int(nz[0])
                found_states[gi] = vals[g][nz[0]]
        scanned += hi - pos
        pos = hi
    return scanned
