"""Hot numeric kernels: exact transport solve and co-occurrence counting.

Both kernels are written in an njit-compatible subset of numpy and compiled
with numba when available. Setting VERSEALIGN_NUMBA=0 selects the uncompiled
fallback (same function object, so both paths are arithmetically identical).
benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_REDUCED_COST_TOL = 1e-12
_MAX_PIVOTS = 65536


def _transport_simplex(wa, wb, cost):
    """Solve the balanced transportation problem exactly.

    wa: (m,) source weights, wb: (n,) target weights, both summing to the
    same total; cost: (m, n) ground costs. Returns the (m, n) optimal flow
    matrix found by the transportation simplex with Bland's rule (entering:
    lexicographically first negative reduced cost; leaving: lexicographically
    first among ratio-test ties), so the result is deterministic and the
    basis always holds at most m + n - 1 positive entries.
    """
    m = wa.shape[0]
    n = wb.shape[0]
    flow = np.zeros((m, n), dtype=np.float64)
    basis = np.zeros((m, n), dtype=np.bool_)

    # Northwest-corner start: exactly m + n - 1 basic cells, zeros included.
    a = wa.copy()
    b = wb.copy()
    i = 0
    j = 0
    while True:
        q = min(a[i], b[j])
        flow[i, j] = q
        basis[i, j] = True
        a[i] -= q
        b[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if a[i] <= 0.0 and i < m - 1:
            i += 1
        else:
            j += 1

    u = np.zeros(m, dtype=np.float64)
    v = np.zeros(n, dtype=np.float64)
    known_u = np.zeros(m, dtype=np.bool_)
    known_v = np.zeros(n, dtype=np.bool_)
    work = np.zeros((m, n), dtype=np.bool_)
    cyc_r = np.zeros(m + n + 1, dtype=np.int64)
    cyc_c = np.zeros(m + n + 1, dtype=np.int64)

    for _pivot in range(_MAX_PIVOTS):
        # Potentials u_r + v_c = cost[r, c] on basic cells, rooted at u[0]=0.
        for r in range(m):
            known_u[r] = False
        for c in range(n):
            known_v[c] = False
        known_u[0] = True
        u[0] = 0.0
        for _sweep in range(m + n):
            changed = False
            for r in range(m):
                for c in range(n):
                    if basis[r, c]:
                        if known_u[r] and not known_v[c]:
                            v[c] = cost[r, c] - u[r]
                            known_v[c] = True
                            changed = True
                        elif known_v[c] and not known_u[r]:
                            u[r] = cost[r, c] - v[c]
                            known_u[r] = True
                            changed = True
            if not changed:
                break

        er = -1
        ec = -1
        for r in range(m):
            for c in range(n):
                if not basis[r, c] and cost[r, c] - u[r] - v[c] < -_REDUCED_COST_TOL:
                    er = r
                    ec = c
                    break
            if er >= 0:
                break
        if er < 0:
            break  # all reduced costs non-negative: optimal

        # The basis is a spanning tree; adding the entering cell closes one
        # cycle. Strip degree-1 rows/columns until only the cycle remains.
        for r in range(m):
            for c in range(n):
                work[r, c] = basis[r, c]
        work[er, ec] = True
        stripped = True
        while stripped:
            stripped = False
            for r in range(m):
                cnt = 0
                last_c = -1
                for c in range(n):
                    if work[r, c]:
                        cnt += 1
                        last_c = c
                if cnt == 1:
                    work[r, last_c] = False
                    stripped = True
            for c in range(n):
                cnt = 0
                last_r = -1
                for r in range(m):
                    if work[r, c]:
                        cnt += 1
                        last_r = r
                if cnt == 1:
                    work[last_r, c] = False
                    stripped = True

        # Walk the cycle from the entering cell, alternating row/col moves.
        length = 0
        cr = er
        cc = ec
        row_move = True
        while True:
            cyc_r[length] = cr
            cyc_c[length] = cc
            length += 1
            if row_move:
                for c in range(n):
                    if c != cc and work[cr, c]:
                        cc = c
                        break
            else:
                for r in range(m):
                    if r != cr and work[r, cc]:
                        cr = r
                        break
            row_move = not row_move
            if cr == er and cc == ec:
                break

        # Ratio test over the odd (donating) positions.
        theta = np.inf
        lv_r = -1
        lv_c = -1
        for k in range(1, length, 2):
            f = flow[cyc_r[k], cyc_c[k]]
            if f < theta or (
                f == theta
                and (cyc_r[k] < lv_r or (cyc_r[k] == lv_r and cyc_c[k] < lv_c))
            ):
                theta = f
                lv_r = cyc_r[k]
                lv_c = cyc_c[k]
        if lv_r < 0:
            break  # defensive: no donor found, should be unreachable

        for k in range(length):
            if k % 2 == 0:
                flow[cyc_r[k], cyc_c[k]] += theta
            else:
                flow[cyc_r[k], cyc_c[k]] -= theta
        flow[lv_r, lv_c] = 0.0
        basis[lv_r, lv_c] = False
        basis[er, ec] = True

    return flow


def _accumulate_cooccurrence(token_ids, offsets, window, counts):
    """Add symmetric within-line co-occurrence counts into `counts`.

    token_ids: flat int64 array of all lines back to back; offsets: int64
    array of line boundaries (len = n_lines + 1). Pairs of equal tokens are
    skipped so the diagonal stays zero; windows never cross line boundaries.
    """
    n_lines = offsets.shape[0] - 1
    for li in range(n_lines):
        start = offsets[li]
        stop = offsets[li + 1]
        for p in range(start, stop):
            hi = p + window
            if hi > stop - 1:
                hi = stop - 1
            for q in range(p + 1, hi + 1):
                ti = token_ids[p]
                tj = token_ids[q]
                if ti != tj:
                    counts[ti, tj] += 1.0
                    counts[tj, ti] += 1.0


try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency normally
    njit = None
    _HAS_NUMBA = False

transport_simplex_py = _transport_simplex
accumulate_cooccurrence_py = _accumulate_cooccurrence

if _HAS_NUMBA:
    transport_simplex_nb = njit(cache=True)(_transport_simplex)
    accumulate_cooccurrence_nb = njit(cache=True)(_accumulate_cooccurrence)
else:  # pragma: no cover
    transport_simplex_nb = None
    accumulate_cooccurrence_nb = None

USE_NUMBA = _HAS_NUMBA and os.environ.get("VERSEALIGN_NUMBA", "1") != "0"
BACKEND = "numba" if USE_NUMBA else "numpy"

transport_simplex = transport_simplex_nb if USE_NUMBA else transport_simplex_py
accumulate_cooccurrence = (
    accumulate_cooccurrence_nb if USE_NUMBA else accumulate_cooccurrence_py
)


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs (no-op on the fallback path)."""
    wa = np.array([0.5, 0.5])
    wb = np.array([0.25, 0.75])
    cost = np.array([[0.0, 1.0], [1.0, 0.5]])
    transport_simplex(wa, wb, cost)
    counts = np.zeros((2, 2))
    accumulate_cooccurrence(
        np.array([0, 1], dtype=np.int64), np.array([0, 2], dtype=np.int64), 2, counts
    )
