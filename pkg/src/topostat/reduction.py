"""Persistence pairing by column reduction of the Z/2 boundary matrix.

Standard left-to-right reduction run one dimension at a time in decreasing
order with the clearing optimization: once a cell is paired as a birth, its
own column is known to reduce to zero and is skipped. Columns are sparse
sorted index arrays; addition over Z/2 is a symmetric-difference merge.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .diagram import PersistenceDiagram
from .filtration import Filtration


@njit(cache=True)
def _symdiff(a, b):
    out = np.empty(len(a) + len(b), dtype=np.int64)
    i = j = k = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < len(a):
        out[k] = a[i]
        i += 1
        k += 1
    while j < len(b):
        out[k] = b[j]
        j += 1
        k += 1
    return out[:k]


@njit(cache=True)
def _reduce(dims, bptr, bidx):
    n = len(dims)
    killer = np.full(n, -1, dtype=np.int64)   # birth cell -> killing column
    creates = np.zeros(n, dtype=np.bool_)     # cell opens a class
    creates[:] = False
    for j in range(n):
        if dims[j] == 0:
            creates[j] = True

    top = 0
    for j in range(n):
        if dims[j] > top:
            top = dims[j]

    low_owner = np.full(n, -1, dtype=np.int64)  # pivot row -> owning column
    for d in range(top, 0, -1):
        # per-pass storage of reduced columns, one growable buffer
        cap = max(16, len(bidx))
        buf = np.empty(cap, dtype=np.int64)
        used = 0
        col_start = np.full(n, -1, dtype=np.int64)
        col_len = np.zeros(n, dtype=np.int64)

        for j in range(n):
            if dims[j] != d:
                continue
            if killer[j] != -1:
                continue  # cleared: paired as a birth by dimension d+1
            col = bidx[bptr[j]:bptr[j + 1]].copy()
            while len(col) > 0:
                piv = col[-1]
                k = low_owner[piv]
                if k == -1:
                    low_owner[piv] = j
                    killer[piv] = j
                    creates[piv] = True
                    if used + len(col) > cap:
                        newcap = cap
                        while newcap < used + len(col):
                            newcap *= 2
                        newbuf = np.empty(newcap, dtype=np.int64)
                        newbuf[:used] = buf[:used]
                        buf = newbuf
                        cap = newcap
                    col_start[j] = used
                    col_len[j] = len(col)
                    buf[used:used + len(col)] = col
                    used += len(col)
                    break
                other = buf[col_start[k]:col_start[k] + col_len[k]]
                col = _symdiff(col, other)
            if len(col) == 0:
                creates[j] = True

    return killer, creates


def compute_persistence(f: Filtration, max_dim: int) -> PersistenceDiagram:
    """Persistence diagram of a filtration for dimensions 0..max_dim.

    Essential classes are reported with death = +inf. Zero-persistence
    pairs (equal birth and death value) are dropped.
    """
    f.validate()
    if len(f) == 0:
        return PersistenceDiagram([], [], [])
    killer, creates = _reduce(
        np.ascontiguousarray(f.dims, dtype=np.int8),
        np.ascontiguousarray(f.boundary_ptr, dtype=np.int64),
        np.ascontiguousarray(f.boundary_idx, dtype=np.int64),
    )
    dims = []
    births = []
    deaths = []
    paired = killer >= 0
    bsel = np.flatnonzero(paired)
    for i in bsel:
        d = int(f.dims[i])
        if d > max_dim:
            continue
        b, de = float(f.values[i]), float(f.values[killer[i]])
        if de > b:
            dims.append(d)
            births.append(b)
            deaths.append(de)
    esel = np.flatnonzero(creates & ~paired)
    for i in esel:
        d = int(f.dims[i])
        if d > max_dim:
            continue
        dims.append(d)
        births.append(float(f.values[i]))
        deaths.append(np.inf)
    return PersistenceDiagram(dims, births, deaths)
