"""Pure numpy implementations of the hot loops in ``_core.pyx``.

Same signatures and return conventions; used when the extension is not built
or when ``LISTSECRECY_PURE=1``.
"""
import numpy as np

_CHUNK_CELLS = 1 << 24


def ba_solve(p, A, d, q0, max_iter, tol):
    p = np.asarray(p, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    q = np.array(q0, dtype=np.float64, copy=True)
    prev = -1.0
    rate = dist = 0.0
    cond = np.zeros_like(A)
    converged = False
    it = 0
    live = p > 0
    while it < max_iter:
        it += 1
        cond = q[None, :] * A
        s = cond.sum(axis=1, keepdims=True)
        np.divide(cond, s, out=cond, where=s > 0)
        qn = p @ cond
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((cond > 0) & (qn[None, :] > 0), cond / qn[None, :], 1.0)
            terms = np.where(live[:, None], cond * np.log2(ratio), 0.0)
        rate = float(p @ terms.sum(axis=1))
        dist = float(p @ (cond * d).sum(axis=1))
        q = qn
        if abs(rate - prev) < tol:
            converged = True
            break
        prev = rate
    return cond, q, max(rate, 0.0), dist, it, converged


def pairwise_sum(a, b, table):
    a = np.asarray(a)
    b = np.asarray(b)
    table = np.asarray(table, dtype=np.float64)
    na, n = a.shape
    nb = b.shape[0]
    out = np.empty((na, nb), dtype=np.float64)
    step = max(1, _CHUNK_CELLS // max(1, nb * n))
    for lo in range(0, na, step):
        blk = a[lo:lo + step]
        out[lo:lo + step] = table[blk[:, None, :], b[None, :, :]].sum(axis=2)
    return out


def cover_matrix(a, b, table, threshold):
    return (pairwise_sum(a, b, table) <= threshold).astype(np.uint8)


def greedy_max_cover(cover, weights, budget):
    cover = np.asarray(cover, dtype=bool)
    w = np.asarray(weights, dtype=np.float64)
    floor = 1e-12 * float(w.sum())
    uncovered = np.ones(cover.shape[1], dtype=bool)
    used = np.zeros(cover.shape[0], dtype=bool)
    chosen = []
    total = 0.0
    while len(chosen) < budget:
        gain = cover @ np.where(uncovered, w, 0.0)
        gain[used] = -np.inf
        top = float(gain.max())
        if not top > floor:
            break
        # gains within the floor of the maximum count as tied
        best = int(np.flatnonzero(gain >= top - floor)[0])
        used[best] = True
        chosen.append(best)
        total += float(gain[best])
        uncovered &= ~cover[best]
    return np.asarray(chosen, dtype=np.int64), total
