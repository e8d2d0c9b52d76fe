"""Backend selection for the hot loops.

The compiled extension ``_core`` is used when importable; otherwise (or when
the environment variable ``LISTSECRECY_PURE`` is set to a non-empty value other
than ``0``) the numpy fallback in ``_core_py`` is used. ``BACKEND`` names the
active choice. Inputs are coerced here so both backends see identical dtypes.
"""
import os

import numpy as np

from . import _core_py

if os.environ.get("LISTSECRECY_PURE", "0") not in ("", "0"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _core_py
        BACKEND = "python"

# distortion sums are compared against thresholds with this absolute slack
THRESHOLD_EPS = 1e-9


def _seqs(a):
    a = np.ascontiguousarray(a, dtype=np.uint8)
    if a.ndim == 1:
        a = a[None, :]
    return a


def ba_solve(p, A, d, q0, max_iter=10000, tol=1e-10, impl=None):
    impl = impl or _impl
    return impl.ba_solve(
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(d, dtype=np.float64),
        np.ascontiguousarray(q0, dtype=np.float64),
        int(max_iter),
        float(tol),
    )


def pairwise_sum(a, b, table, impl=None):
    """Matrix of per-pair sums ``sum_i table[a_i, b_i]`` over two sequence sets."""
    impl = impl or _impl
    return impl.pairwise_sum(_seqs(a), _seqs(b), np.ascontiguousarray(table, dtype=np.float64))


def cover_matrix(a, b, table, threshold, impl=None):
    """0/1 matrix: pair sum at most ``threshold`` (plus ``THRESHOLD_EPS``)."""
    impl = impl or _impl
    return impl.cover_matrix(
        _seqs(a), _seqs(b), np.ascontiguousarray(table, dtype=np.float64),
        float(threshold) + THRESHOLD_EPS,
    )


def greedy_max_cover(cover, weights, budget, impl=None):
    """Greedy weighted max coverage. Returns (chosen rows, covered weight)."""
    impl = impl or _impl
    cover = np.ascontiguousarray(cover, dtype=np.uint8)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    chosen, _ = impl.greedy_max_cover(cover, weights, int(budget))
    if len(chosen) == 0:
        return chosen, 0.0
    hit = cover[chosen].astype(bool).any(axis=0)
    return chosen, float(weights[hit].sum())
