# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in _pykernels (same signatures)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint8_t, uint64_t, int32_t, int64_t

cnp.import_array()

cdef enum:
    CONST = 0
    NOT = 1
    AND = 2
    BOX = 3
    COAL = 4


def eval_batch(const int32_t[:, :] ops, const uint8_t[:, :] consts,
               const uint8_t[:, :, :] boxtab, const uint64_t[:, :, :] coaltab,
               const int32_t[:] nstates):
    cdef Py_ssize_t n_struct = consts.shape[0]
    cdef Py_ssize_t n_nodes = ops.shape[0]
    out_arr = np.zeros((n_struct, n_nodes), dtype=np.uint8)
    cdef uint8_t[:, :] out = out_arr
    cdef Py_ssize_t i, k, s
    cdef int op, a, b, m
    cdef uint8_t full, r, x
    for i in range(n_struct):
        full = consts[i, 0]
        m = nstates[i]
        for k in range(n_nodes):
            op = ops[k, 0]
            a = ops[k, 1]
            b = ops[k, 2]
            if op == CONST:
                out[i, k] = consts[i, a]
            elif op == NOT:
                out[i, k] = full & ~out[i, a]
            elif op == AND:
                out[i, k] = out[i, a] & out[i, b]
            elif op == BOX:
                out[i, k] = boxtab[i, b, out[i, a]]
            else:
                x = out[i, a]
                r = 0
                for s in range(m):
                    if (coaltab[i, b, s] >> x) & 1:
                        r |= <uint8_t>(1 << s)
                out[i, k] = r
    return out_arr


def sweep(const int32_t[:, :] ops, const uint8_t[:] consts, const uint8_t[:, :] boxtab,
          const uint64_t[:, :] memb, int n_states, const int32_t[:] goals,
          int64_t start, int64_t count, int64_t[:] found, uint8_t[:] found_states,
          chunk=None):
    cdef Py_ssize_t L = memb.shape[0]
    cdef Py_ssize_t n_nodes = ops.shape[0]
    cdef Py_ssize_t n_goals = goals.shape[0]
    cdef uint8_t full = consts[0]
    cdef int64_t t, rem
    cdef Py_ssize_t k, s, gi
    cdef int op, a, b
    cdef uint8_t r, x
    cdef int remaining = 0
    cdef int64_t digit[8]
    cdef Py_ssize_t first_dynamic = 0
    vals_arr = np.zeros(n_nodes, dtype=np.uint8)
    cdef uint8_t[:] vals = vals_arr
    if n_states > 6:
        raise ValueError("sweep supports at most 6 states")
    for gi in range(n_goals):
        if found[gi] < 0:
            remaining += 1
    if remaining == 0:
        return 0
    # nodes before the first coalition node are tuple-independent
    while first_dynamic < n_nodes and ops[first_dynamic, 0] != COAL:
        first_dynamic += 1
    for k in range(first_dynamic):
        op = ops[k, 0]
        a = ops[k, 1]
        b = ops[k, 2]
        if op == CONST:
            vals[k] = consts[a]
        elif op == NOT:
            vals[k] = full & ~vals[a]
        elif op == AND:
            vals[k] = vals[a] & vals[b]
        elif op == BOX:
            vals[k] = boxtab[b, vals[a]]
    rem = start
    for s in range(n_states):
        digit[s] = rem % L
        rem = rem // L
    for t in range(start, start + count):
        for k in range(first_dynamic, n_nodes):
            op = ops[k, 0]
            a = ops[k, 1]
            b = ops[k, 2]
            if op == CONST:
                vals[k] = consts[a]
            elif op == NOT:
                vals[k] = full & ~vals[a]
            elif op == AND:
                vals[k] = vals[a] & vals[b]
            elif op == BOX:
                vals[k] = boxtab[b, vals[a]]
            else:
                x = vals[a]
                r = 0
                for s in range(n_states):
                    if (memb[digit[s], b] >> x) & 1:
                        r |= <uint8_t>(1 << s)
                vals[k] = r
        for gi in range(n_goals):
            if found[gi] < 0 and vals[goals[gi]] != 0:
                found[gi] = t
                found_states[gi] = vals[goals[gi]]
                remaining -= 1
        if remaining == 0:
            return t - start + 1
        # advance the mixed-radix counter, state 0 fastest
        s = 0
        while s < n_states:
            digit[s] += 1
            if digit[s] < L:
                break
            digit[s] = 0
            s += 1
    return count
