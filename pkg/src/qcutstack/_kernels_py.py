"""Pure Python versions of the hot loops.

These are the reference implementations. The compiled module
``_kernels`` provides the same functions with identical results and is
preferred when it is importable.
"""
import math

import numpy as np


def cycle_decompose(perm):
    """Split a permutation of 0..N-1 into cycles.

    Cycles start at their smallest element and are listed by that element.
    Returns ``(order, starts)`` where cycle ``c`` is
    ``order[starts[c]:starts[c + 1]]``. Raises ValueError when ``perm``
    is not a bijection.
    """
    perm = np.ascontiguousarray(perm, dtype=np.int64)
    n = perm.shape[0]
    p = perm.tolist()
    seen = bytearray(n)
    order = []
    starts = [0]
    for q0 in range(n):
        if seen[q0]:
            continue
        q = q0
        while True:
            if q < 0 or q >= n or seen[q]:
                raise ValueError("map is not a bijection of Z_N")
            seen[q] = 1
            order.append(q)
            q = p[q]
            if q == q0:
                break
        starts.append(len(order))
    return np.array(order, dtype=np.int64), np.array(starts, dtype=np.int64)


def orbit_gauge(orbit, n):
    """Integer phase numerators of the orbit gauge, modulo n*K.

    For an orbit Q_0..Q_{K-1} the entry at position j is
    ``j*S - K*P_j`` reduced mod n*K, where ``S = sum Q^2`` and
    ``P_j = Q_0^2 + ... + Q_{j-1}^2``. The gauge phase is
    ``exp(2*pi*i*g/(n*K))``.
    """
    orbit = [int(q) for q in orbit]
    k = len(orbit)
    mod = n * k
    s = sum(q * q for q in orbit) % mod
    out = np.empty(k, dtype=np.int64)
    partial = 0
    for j, q in enumerate(orbit):
        out[j] = (j * s - k * partial) % mod
        partial = (partial + q * q) % n
    return out


def greedy_nearest(sources, targets, free):
    """Assign each source the free lattice index nearest to its target.

    ``targets`` are real positions in [0, N) on the circle Z_N; sources are
    served in the given order and each takes the closest index still free.
    Equidistant candidates resolve to the smaller index. ``free`` is a
    0/1 array of length N and is not modified. Returns one image per
    source, or -1 once nothing is left.
    """
    free = np.asarray(free, dtype=np.uint8)
    n = free.shape[0]
    right = list(range(n))
    left = list(range(n))
    avail = free.tolist()
    remaining = int(sum(avail))
    for i in range(n):
        if not avail[i]:
            right[i] = (i + 1) % n
            left[i] = (i - 1) % n

    def find(par, i):
        root = i
        while par[root] != root:
            root = par[root]
        while par[i] != root:
            par[i], i = root, par[i]
        return root

    m = len(sources)
    out = np.full(m, -1, dtype=np.int64)
    tg = np.asarray(targets, dtype=np.float64).tolist()
    for idx in range(m):
        if remaining == 0:
            break
        t = tg[idx] % n
        c = math.ceil(t) % n
        fl = math.floor(t) % n
        r = find(right, c)
        l = find(left, fl)
        dr = (r - t) % n
        dl = (t - l) % n
        if dr < dl:
            j = r
        elif dl < dr:
            j = l
        else:
            j = min(r, l)
        out[idx] = j
        right[j] = (j + 1) % n
        left[j] = (j - 1) % n
        remaining -= 1
    return out
