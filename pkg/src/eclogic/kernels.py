"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``ECLOGIC_KERNELS=python`` is set, the numpy versions
are used.  Both expose ``eval_batch`` and ``sweep`` with identical results.
"""

from __future__ import annotations

import os

from . import _pykernels

CONST, NOT, AND, BOX, COAL = (_pykernels.CONST, _pykernels.NOT, _pykernels.AND,
                              _pykernels.BOX, _pykernels.COAL)


def _load():
    if os.environ.get("ECLOGIC_KERNELS", "").lower() == "python":
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels, "python"
    return _ckernels, "compiled"


_impl, BACKEND = _load()


def backend(name: str | None = None):
    """Kernel module by name ("compiled" or "python"); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def use(name: str) -> None:
    """Switch the active backend for this process."""
    global _impl, BACKEND
    _impl, BACKEND = backend(name), name


def eval_batch(ops, consts, boxtab, coaltab, nstates):
    return _impl.eval_batch(ops, consts, boxtab, coaltab, nstates)


def sweep(ops, consts, boxtab, memb, n_states, goals, start, count, found, found_states):
    return _impl.sweep(ops, consts, boxtab, memb, n_states, goals, start, count,
                       found, found_states)
