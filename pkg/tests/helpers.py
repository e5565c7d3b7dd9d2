"""Shared test oracles, independent of the code paths they check."""

import numpy as np

from sumfree.construction import iter_pool


def brute_force_v(params):
    """Enumerate W x W and keep pairs whose completion c = target - a - b
    stays in range and carries the pool histogram."""
    q, n = params.q, params.n
    pool = [np.array(v, dtype=np.int16) for v in iter_pool(params.marginal.counts)]
    pool_arr = np.array(pool, dtype=np.int16)
    counts = params.marginal.counts
    target = np.full(n, q - 1, dtype=np.int16)
    triples = []
    for a in pool:
        c_block = target - a - pool_arr
        ok = (c_block >= 0).all(axis=1)
        for v in range(q):
            ok &= (c_block == v).sum(axis=1) == counts[v]
        for j in np.flatnonzero(ok):
            b = pool_arr[j]
            c = target - a - b
            triples.append((tuple(int(x) for x in a),
                            tuple(int(x) for x in b),
                            tuple(int(x) for x in c)))
    return triples


def odd_primes_below(limit):
    flags = [True] * limit
    flags[0] = flags[1] = False
    for i in range(2, int(limit ** 0.5) + 1):
        if flags[i]:
            for j in range(i * i, limit, i):
                flags[j] = False
    return [p for p in range(3, limit) if flags[p]]
