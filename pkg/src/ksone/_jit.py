"""Shared numba decorator.

Setting ``NUMBA_DISABLE_JIT=1`` runs every kernel as plain Python, which is
handy under a debugger or a coverage tool.
"""

import numba

jit = numba.njit(cache=True)
