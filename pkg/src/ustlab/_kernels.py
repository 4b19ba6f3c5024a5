"""Compiled inner loops.

Every kernel takes a network in CSR form (``indptr``, ``indices``,
``cumw`` = per-row running weight sums, ``strength``, ``loops``) plus a
``numpy.random.Generator`` whose state numba shares with the caller.
"""

import numba
import numpy as np

_JIT = dict(nogil=True, cache=True)

_POPCOUNT16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)


@numba.njit(**_JIT)
def _pick(v, indptr, indices, cumw, strength, loops, unit, rng):
    lo = indptr[v]
    deg = indptr[v + 1] - lo
    if unit:
        return indices[lo + np.int64(rng.random() * deg)]
    r = rng.random() * strength[v]
    k = np.searchsorted(cumw[lo:lo + deg], r, side="right")
    if k >= deg:
        if loops[v] > 0.0:
            return v
        k = deg - 1
    return indices[lo + k]


@numba.njit(**_JIT)
def _shuffle(a, rng):
    for i in range(a.size - 1, 0, -1):
        j = np.int64(rng.random() * (i + 1))
        a[i], a[j] = a[j], a[i]


@numba.njit(**_JIT)
def grow_tree(indptr, indices, cumw, strength, loops, unit, in_tree, nxt, order, rng, max_steps):
    """Attach the walks of Wilson's algorithm to an existing tree, in place.

    ``in_tree``/``nxt`` hold the current tree (``nxt`` points toward its root).
    Walks start from ``order`` entries not yet in the tree; ``nxt`` is
    overwritten on every exit, so following it from the start vertex traces the
    loop erasure.  Returns ``(walk_len, ok)``; ``ok`` is False when
    ``max_steps > 0`` and the total step count reached it.
    """
    walk_len = np.zeros(order.size, np.int64)
    total = 0
    for i in range(order.size):
        start = order[i]
        u = start
        steps = 0
        while not in_tree[u]:
            w = _pick(u, indptr, indices, cumw, strength, loops, unit, rng)
            steps += 1
            if w != u:
                nxt[u] = w
                u = w
            if max_steps > 0 and total + steps >= max_steps:
                return walk_len, False
        walk_len[i] = steps
        total += steps
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    return walk_len, True


@numba.njit(**_JIT)
def wilson(indptr, indices, cumw, strength, loops, unit, order, rng, max_steps):
    """Wilson's algorithm rooted at ``order[0]``.

    Returns ``(parent, walk_len, ok)`` with ``parent[root] = -1`` and
    ``walk_len[i]`` the raw walk length started from ``order[i]``.
    """
    n = indptr.size - 1
    in_tree = np.zeros(n, np.bool_)
    nxt = np.full(n, -1, np.int64)
    in_tree[order[0]] = True
    walk_len, ok = grow_tree(indptr, indices, cumw, strength, loops, unit, in_tree, nxt, order, rng, max_steps)
    nxt[order[0]] = -1
    return nxt, walk_len, ok


@numba.njit(**_JIT)
def wilson_batch(indptr, indices, cumw, strength, loops, unit, count, rng):
    """``count`` independent trees, each with a fresh uniformly random ordering."""
    n = indptr.size - 1
    out = np.empty((count, n), np.int64)
    order = np.arange(n)
    for s in range(count):
        _shuffle(order, rng)
        parent, _, _ = wilson(indptr, indices, cumw, strength, loops, unit, order, rng, 0)
        out[s] = parent
    return out


@numba.njit(**_JIT)
def walk(indptr, indices, cumw, strength, loops, unit, start, target, budget, mode, lazyvec, rng):
    """Trace of one walk; stops on entering ``target`` or after ``budget`` steps (``budget < 0``: no cap).

    ``mode``: 0 simple, 1 lazy (hold w.p. 1/2), 2 lazy-vector (hold w.p. ``lazyvec[v]``).
    Returns ``(trace, hit)``.
    """
    cap = 64
    trace = np.empty(cap, np.int64)
    trace[0] = start
    length = 1
    u = start
    if target[u]:
        return trace[:1].copy(), True
    t = 0
    while budget < 0 or t < budget:
        hold = 0.0
        if mode == 1:
            hold = 0.5
        elif mode == 2:
            hold = lazyvec[u]
        if hold > 0.0 and rng.random() < hold:
            w = u
        else:
            w = _pick(u, indptr, indices, cumw, strength, loops, unit, rng)
        t += 1
        if length == cap:
            cap *= 2
            grown = np.empty(cap, np.int64)
            grown[:length] = trace[:length]
            trace = grown
        trace[length] = w
        length += 1
        u = w
        if target[u]:
            return trace[:length].copy(), True
    return trace[:length].copy(), False


@numba.njit(**_JIT)
def hit_within(indptr, indices, cumw, strength, loops, unit, start, target, horizon, trials, rng):
    """Number of simple walks from ``start`` that visit ``target`` at some time in ``[0, horizon]``."""
    hits = 0
    for _ in range(trials):
        u = start
        if target[u]:
            hits += 1
            continue
        for _t in range(horizon):
            u = _pick(u, indptr, indices, cumw, strength, loops, unit, rng)
            if target[u]:
                hits += 1
                break
    return hits


@numba.njit(**_JIT)
def block_exits(indptr, indices, cumw, strength, loops, unit, start, block, horizon, trials, rng):
    """Per start vertex, count walks with an exit step and walks that never leave ``block``.

    exit: some ``t`` in ``[1, horizon]`` with ``X_t`` in block and ``X_{t+1}`` outside.
    stay: ``X[0, horizon]`` inside block.
    """
    escapes = 0
    stays = 0
    for _ in range(trials):
        u = start
        inside = block[u]
        stayed = inside
        escaped = False
        for t in range(1, horizon + 2):
            w = _pick(u, indptr, indices, cumw, strength, loops, unit, rng)
            if t >= 2 and block[u] and not block[w]:
                escaped = True
            if t <= horizon and not block[w]:
                stayed = False
            u = w
        if escaped:
            escapes += 1
        if stayed:
            stays += 1
    return escapes, stays


@numba.njit(**_JIT)
def _bfs_far(ptr, adj, s, n):
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[s] = 0
    queue[0] = s
    head, tail = 0, 1
    while head < tail:
        x = queue[head]
        head += 1
        for j in range(ptr[x], ptr[x + 1]):
            y = adj[j]
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue[tail] = y
                tail += 1
    far = queue[tail - 1]
    return far, dist[far], tail


@numba.njit(**_JIT)
def tree_diameter(parent):
    """Double sweep on the tree given by a parent array; -1 if the array is not a spanning tree."""
    n = parent.size
    deg = np.zeros(n, np.int64)
    for v in range(n):
        p = parent[v]
        if p >= 0:
            deg[v] += 1
            deg[p] += 1
    ptr = np.zeros(n + 1, np.int64)
    for v in range(n):
        ptr[v + 1] = ptr[v] + deg[v]
    fill = ptr[:-1].copy()
    adj = np.empty(ptr[n], np.int64)
    for v in range(n):
        p = parent[v]
        if p >= 0:
            adj[fill[v]] = p
            fill[v] += 1
            adj[fill[p]] = v
            fill[p] += 1
    a, _, reached = _bfs_far(ptr, adj, 0, n)
    if reached != n or ptr[n] != 2 * (n - 1):
        return -1
    _, d, _ = _bfs_far(ptr, adj, a, n)
    return d


@numba.njit(**_JIT)
def _popcount(x, table):
    c = 0
    while x:
        c += table[x & 0xFFFF]
        x >>= 16
    return c


@numba.njit(**_JIT)
def _ctz(i):
    b = 0
    while (i & 1) == 0:
        i >>= 1
        b += 1
    return b


@numba.njit(**_JIT)
def min_conductance(adj_bits, deg, table):
    """Exact min of cut(S)/vol(S) over nonempty S with 2 vol(S) <= vol(V).

    Gray-code sweep over all subsets; ties go to the smaller bitmask.
    Returns ``(cut, vol, mask)`` of the minimizer.
    """
    n = adj_bits.size
    total = 0
    for v in range(n):
        total += deg[v]
    best_cut, best_vol, best_mask = -1, 1, 0
    cut, vol, g = 0, 0, 0
    for i in range(1, 1 << n):
        b = _ctz(i)
        bit = np.int64(1) << b
        if g & bit:
            g ^= bit
            cut -= deg[b] - 2 * _popcount(adj_bits[b] & g, table)
            vol -= deg[b]
        else:
            cut += deg[b] - 2 * _popcount(adj_bits[b] & g, table)
            vol += deg[b]
            g |= bit
        if vol > 0 and 2 * vol <= total:
            if best_cut < 0:
                better = True
            else:
                lhs = cut * best_vol
                rhs = best_cut * vol
                better = lhs < rhs or (lhs == rhs and g < best_mask)
            if better:
                best_cut, best_vol, best_mask = cut, vol, g
    return best_cut, best_vol, best_mask


@numba.njit(**_JIT)
def min_ratio_cut(adj_bits, table):
    """Exact min of |E(T, W-T)| / (|T| |W-T|) over proper nonempty T not containing vertex 0.

    Returns ``(cut, size, mask)``.
    """
    n = adj_bits.size
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = _popcount(adj_bits[v], table)
    best_cut, best_den, best_mask = -1, 1, 0
    cut, size, g = 0, 0, 0
    for i in range(1, 1 << (n - 1)):
        b = _ctz(i) + 1
        bit = np.int64(1) << b
        if g & bit:
            g ^= bit
            cut -= deg[b] - 2 * _popcount(adj_bits[b] & g, table)
            size -= 1
        else:
            cut += deg[b] - 2 * _popcount(adj_bits[b] & g, table)
            size += 1
            g |= bit
        den = size * (n - size)
        if best_cut < 0:
            better = True
        else:
            lhs = cut * best_den
            rhs = best_cut * den
            better = lhs < rhs or (lhs == rhs and g < best_mask)
        if better:
            best_cut, best_den, best_mask = cut, den, g
    return best_cut, best_den, best_mask


@numba.njit(**_JIT)
def bfs_path_loads(indptr, indices, pi):
    """Congestion of BFS shortest paths with smallest-id parent tie-breaking.

    ``load[a, b]`` = sum over ordered pairs (x, y) whose path uses the directed
    edge a -> b of pi(x) pi(y) |path|.  ``ok`` is False if some pair is unreachable.
    """
    n = indptr.size - 1
    load = np.zeros((n, n))
    dist = np.empty(n, np.int64)
    parent = np.empty(n, np.int64)
    order = np.empty(n, np.int64)
    acc = np.empty(n)
    for x in range(n):
        dist[:] = -1
        parent[:] = -1
        dist[x] = 0
        order[0] = x
        filled = 1
        layer_start, layer_end = 0, 1
        while layer_start < layer_end:
            layer = np.sort(order[layer_start:layer_end])
            order[layer_start:layer_end] = layer
            for idx in range(layer.size):
                a = layer[idx]
                for j in range(indptr[a], indptr[a + 1]):
                    y = indices[j]
                    if dist[y] < 0:
                        dist[y] = dist[a] + 1
                        parent[y] = a
                        order[filled] = y
                        filled += 1
            layer_start, layer_end = layer_end, filled
        if filled != n:
            return load, False
        for k in range(n):
            v = order[k]
            acc[v] = pi[v] * dist[v]
        for k in range(n - 1, 0, -1):
            v = order[k]
            p = parent[v]
            load[p, v] += pi[x] * acc[v]
            acc[p] += acc[v]
    return load, True
