"""Compiled kernels for the native tree learners.

Exact (sorted-scan) split search for both the class-weighted Gini CART
used by the random forest and the second-order boosting tree. Trees are
emitted as flat arrays so models serialize deterministically; all
randomness flows through an explicit splitmix64 stream seeded per tree,
which makes parallel and serial builds bit-identical.
"""

import numpy as np
from numba import njit

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True, inline="always")
def _next_u64(state):
    s = (state[0] + _GOLDEN) & _MASK
    state[0] = s
    z = s
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK
    return z ^ (z >> np.uint64(31))


def mix_seed(seed: int, index: int) -> int:
    """Derive a per-tree stream seed; plain Python mirror of splitmix64."""
    mask = 0xFFFFFFFFFFFFFFFF
    s = (seed * 0x9E3779B97F4A7C15 + index + 1) & mask
    z = s
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


@njit(cache=True, nogil=True)
def build_cart_tree(X, y, w, max_depth, min_samples_split, max_features,
                    seed, bootstrap):
    """Grow one class-weighted Gini CART on a bootstrap of (X, y, w).

    Returns (feature, threshold, left, right, count0, count1, importances,
    node_count). Leaves have feature == -1 and carry weighted class counts.
    """
    n, f = X.shape
    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed)

    idx = np.empty(n, np.int64)
    if bootstrap:
        for i in range(n):
            idx[i] = np.int64(_next_u64(state) % np.uint64(n))
    else:
        for i in range(n):
            idx[i] = i

    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, np.int32)
    thr = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int32)
    right = np.full(max_nodes, -1, np.int32)
    c0 = np.zeros(max_nodes, np.float64)
    c1 = np.zeros(max_nodes, np.float64)
    imp = np.zeros(f, np.float64)
    depth_of = np.zeros(max_nodes, np.int64)
    stack = np.empty((max_nodes, 3), np.int64)
    fperm = np.arange(f)
    buf = np.empty(n, np.int64)
    vals = np.empty(n, np.float64)

    node_count = 1
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = depth_of[node]
        nn = end - start

        w0 = 0.0
        w1 = 0.0
        for i in range(start, end):
            if y[idx[i]] == 0:
                w0 += w[idx[i]]
            else:
                w1 += w[idx[i]]
        c0[node] = w0
        c1[node] = w1
        if nn < min_samples_split or depth >= max_depth or w0 == 0.0 or w1 == 0.0:
            continue

        total = w0 + w1
        parent_gini = 1.0 - (w0 / total) ** 2 - (w1 / total) ** 2
        best_gain = 1e-12
        best_feat = -1
        best_thr = 0.0
        for j in range(max_features):
            k = j + np.int64(_next_u64(state) % np.uint64(f - j))
            tmp = fperm[j]
            fperm[j] = fperm[k]
            fperm[k] = tmp
            ff = fperm[j]
            for i in range(nn):
                vals[i] = X[idx[start + i], ff]
            order = np.argsort(vals[:nn])
            lw0 = 0.0
            lw1 = 0.0
            for i in range(nn - 1):
                oi = idx[start + order[i]]
                if y[oi] == 0:
                    lw0 += w[oi]
                else:
                    lw1 += w[oi]
                lo = vals[order[i]]
                hi = vals[order[i + 1]]
                if lo < hi:
                    wl = lw0 + lw1
                    wr = total - wl
                    gl = 1.0 - (lw0 / wl) ** 2 - (lw1 / wl) ** 2
                    gr = 1.0 - ((w0 - lw0) / wr) ** 2 - ((w1 - lw1) / wr) ** 2
                    gain = parent_gini - (wl * gl + wr * gr) / total
                    if gain > best_gain:
                        mid = 0.5 * (lo + hi)
                        if mid >= hi:
                            mid = lo
                        best_gain = gain
                        best_feat = ff
                        best_thr = mid
        if best_feat < 0:
            continue

        lo_ptr = 0
        hi_ptr = nn
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                buf[lo_ptr] = idx[i]
                lo_ptr += 1
            else:
                hi_ptr -= 1
                buf[hi_ptr] = idx[i]
        for i in range(nn):
            idx[start + i] = buf[i]

        feat[node] = best_feat
        thr[node] = best_thr
        imp[best_feat] += best_gain * total
        child_l = node_count
        child_r = node_count + 1
        node_count += 2
        left[node] = child_l
        right[node] = child_r
        depth_of[child_l] = depth + 1
        depth_of[child_r] = depth + 1
        stack[sp, 0] = child_l
        stack[sp, 1] = start
        stack[sp, 2] = start + lo_ptr
        sp += 1
        stack[sp, 0] = child_r
        stack[sp, 1] = start + lo_ptr
        stack[sp, 2] = end
        sp += 1

    return (feat[:node_count].copy(), thr[:node_count].copy(),
            left[:node_count].copy(), right[:node_count].copy(),
            c0[:node_count].copy(), c1[:node_count].copy(), imp, node_count)


@njit(cache=True, nogil=True)
def build_boost_tree(X, grad, hess, max_depth, reg_lambda):
    """Grow one second-order boosting tree with exact split search.

    Leaf weights are -G/(H+lambda); split gain is the usual structure-score
    improvement. Returns (feature, threshold, left, right, weight,
    importances, node_count).
    """
    n, f = X.shape
    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, np.int32)
    thr = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int32)
    right = np.full(max_nodes, -1, np.int32)
    weight = np.zeros(max_nodes, np.float64)
    imp = np.zeros(f, np.float64)
    depth_of = np.zeros(max_nodes, np.int64)
    stack = np.empty((max_nodes, 3), np.int64)
    idx = np.arange(n)
    buf = np.empty(n, np.int64)
    vals = np.empty(n, np.float64)

    node_count = 1
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = depth_of[node]
        nn = end - start

        g_sum = 0.0
        h_sum = 0.0
        for i in range(start, end):
            g_sum += grad[idx[i]]
            h_sum += hess[idx[i]]
        weight[node] = -g_sum / (h_sum + reg_lambda)
        if nn < 2 or depth >= max_depth:
            continue

        parent_score = g_sum * g_sum / (h_sum + reg_lambda)
        best_gain = 1e-12
        best_feat = -1
        best_thr = 0.0
        for ff in range(f):
            for i in range(nn):
                vals[i] = X[idx[start + i], ff]
            order = np.argsort(vals[:nn])
            gl = 0.0
            hl = 0.0
            for i in range(nn - 1):
                oi = idx[start + order[i]]
                gl += grad[oi]
                hl += hess[oi]
                lo = vals[order[i]]
                hi = vals[order[i + 1]]
                if lo < hi:
                    gr = g_sum - gl
                    hr = h_sum - hl
                    gain = 0.5 * (
                        gl * gl / (hl + reg_lambda)
                        + gr * gr / (hr + reg_lambda)
                        - parent_score
                    )
                    if gain > best_gain:
                        mid = 0.5 * (lo + hi)
                        if mid >= hi:
                            mid = lo
                        best_gain = gain
                        best_feat = ff
                        best_thr = mid
        if best_feat < 0:
            continue

        lo_ptr = 0
        hi_ptr = nn
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                buf[lo_ptr] = idx[i]
                lo_ptr += 1
            else:
                hi_ptr -= 1
                buf[hi_ptr] = idx[i]
        for i in range(nn):
            idx[start + i] = buf[i]

        feat[node] = best_feat
        thr[node] = best_thr
        imp[best_feat] += best_gain
        child_l = node_count
        child_r = node_count + 1
        node_count += 2
        left[node] = child_l
        right[node] = child_r
        depth_of[child_l] = depth + 1
        depth_of[child_r] = depth + 1
        stack[sp, 0] = child_l
        stack[sp, 1] = start
        stack[sp, 2] = start + lo_ptr
        sp += 1
        stack[sp, 0] = child_r
        stack[sp, 1] = start + lo_ptr
        stack[sp, 2] = end
        sp += 1

    return (feat[:node_count].copy(), thr[:node_count].copy(),
            left[:node_count].copy(), right[:node_count].copy(),
            weight[:node_count].copy(), imp, node_count)


@njit(cache=True, nogil=True)
def cart_accumulate_proba(feat, thr, left, right, c0, c1, X, out):
    """Add this tree's leaf class distribution to ``out`` (n, 2)."""
    for i in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        total = c0[node] + c1[node]
        out[i, 0] += c0[node] / total
        out[i, 1] += c1[node] / total


@njit(cache=True, nogil=True)
def boost_accumulate_margin(feat, thr, left, right, weight, X, out, scale):
    """Add ``scale`` times this tree's leaf weight to the margin ``out``."""
    for i in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] += scale * weight[node]
