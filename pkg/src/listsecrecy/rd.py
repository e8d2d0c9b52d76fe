"""Rate-distortion solvers built on Blahut-Arimoto.

Slopes are in bits per unit distortion (``slope <= 0``); the corresponding BA
parameter is ``beta = -slope * ln 2``. Functions of a rate or a distortion
level locate the matching slope with Brent's method in ``log(beta)`` and then
apply a first-order correction along the curve, whose local slope is known
exactly at a BA fixed point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .prob import (
    Channel,
    Distribution,
    DistortionMatrix,
    JointDistribution,
    kl_divergence,
    tv_distance,
)

MAX_ITER = 10000
TOL = 1e-10
# root finders keep iterating through the slow zone next to the zero-rate knee
SEARCH_MAX_ITER = 400000

LN2 = math.log(2.0)
_LOG_BETA_LO = math.log(1e-6)
_LOG_BETA_HI = math.log(2e3)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RDPoint:
    rate: float
    distortion: float
    slope: float
    test_channel: Channel
    iterations: int = 0

    def output_marginal(self, P: Distribution) -> Distribution:
        return self.test_channel.push(P)


@dataclass(frozen=True)
class SideInfoRDPoint:
    rate: float
    distortion: float
    slope: float
    per_y_channels: tuple  # Channel or None (for P(y) = 0)


def _check(P: Distribution, d: DistortionMatrix):
    if P.alphabet_size != d.source_alphabet:
        raise ValueError("source alphabet does not match distortion rows")


def _beta(slope: float) -> float:
    if slope > 0:
        raise ValueError("slope must be <= 0")
    return -slope * LN2


def zero_rate_point(P: Distribution, d: DistortionMatrix) -> RDPoint:
    """The best constant reconstruction; ties go to the smallest symbol."""
    _check(P, d)
    exp_d = P.mass @ d.values
    z = int(np.argmin(exp_d))
    rows = np.zeros(d.shape)
    rows[:, z] = 1.0
    return RDPoint(0.0, float(exp_d[z]), 0.0, Channel(rows))


def zero_rate_distortion(P: Distribution, d: DistortionMatrix) -> float:
    """D(0) = min_z E d(X, z)."""
    return zero_rate_point(P, d).distortion


def _run(P, d, A, q0, max_iter, tol, slope):
    cond, q, rate, dist, it, ok = kernels.ba_solve(P.mass, A, d.values, q0, max_iter, tol)
    if not ok:
        raise ConvergenceError(
            f"Blahut-Arimoto did not converge in {max_iter} iterations (slope {slope})"
        )
    rows = np.where(P.mass[:, None] > 0, cond, q[None, :])
    rows = rows / rows.sum(axis=1, keepdims=True)
    return RDPoint(float(rate), float(dist), float(slope), Channel(rows), int(it)), q


def lossless_point(P: Distribution, d: DistortionMatrix, max_iter=MAX_ITER, tol=TOL) -> RDPoint:
    """R(0): least mutual information among channels with zero distortion."""
    _check(P, d)
    A = (d.values == 0).astype(float)
    q0 = np.full(d.recon_alphabet, 1.0 / d.recon_alphabet)
    return _run(P, d, A, q0, max_iter, tol, -math.inf)[0]


def blahut_arimoto(
    P: Distribution,
    d: DistortionMatrix,
    slope: float,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
    q_init=None,
) -> RDPoint:
    """One point on the R(D) curve: the BA fixed point at the given slope."""
    _check(P, d)
    if slope == 0:
        return zero_rate_point(P, d)
    if slope == -math.inf:
        return lossless_point(P, d, max_iter, tol)
    beta = _beta(slope)
    q0 = np.full(d.recon_alphabet, 1.0 / d.recon_alphabet) if q_init is None else q_init
    return _run(P, d, np.exp(-beta * d.values), q0, max_iter, tol, slope)[0]


def rd_curve(
    P: Distribution,
    d: DistortionMatrix,
    slope_grid: Sequence[float],
    max_iter: int = MAX_ITER,
    tol: float = TOL,
) -> list[RDPoint]:
    """BA points for every slope in ``slope_grid`` (returned in grid order)."""
    if len(slope_grid) == 0:
        raise ValueError("slope grid is empty")
    return [blahut_arimoto(P, d, s, max_iter, tol) for s in slope_grid]


class _Solver:
    """Warm-started BA evaluations at a varying beta for one source."""

    def __init__(self, P, d, max_iter):
        self.P, self.d, self.max_iter = P, d, max_iter
        self.q = np.full(d.recon_alphabet, 1.0 / d.recon_alphabet)

    def at(self, log_beta) -> RDPoint:
        beta = math.exp(log_beta)
        pt, q = _run(self.P, self.d, np.exp(-beta * self.d.values), self.q,
                     self.max_iter, TOL, -beta / LN2)
        # keep every symbol alive so later warm starts can still move mass onto it
        self.q = 0.5 * q + 0.5 / q.size
        return pt


def _chord(d0: float, pt, R: float) -> float:
    # below the flattest solved slope: segment from the zero-rate point
    d1 = min(pt.distortion, d0)
    return d0 + (d1 - d0) * (R / pt.rate if pt.rate > 0 else 1.0)


def _root(f, lo=_LOG_BETA_LO, hi=_LOG_BETA_HI):
    return brentq(f, lo, hi, xtol=1e-13, rtol=1e-13, maxiter=200)


def rate_distortion_point(
    P: Distribution, d: DistortionMatrix, D: float, max_iter: int = SEARCH_MAX_ITER
) -> RDPoint:
    """Point on the curve at distortion ``D``."""
    _check(P, d)
    if D < 0:
        raise ValueError("distortion must be nonnegative")
    zp = zero_rate_point(P, d)
    if D >= zp.distortion:
        return RDPoint(0.0, float(D), 0.0, zp.test_channel)
    if D == 0:
        return lossless_point(P, d, max_iter)
    solver = _Solver(P, d, max_iter)
    hi_pt = solver.at(_LOG_BETA_HI)
    if hi_pt.distortion > D:
        # D lies below what the steepest slope reaches; use the zero-distortion end
        lp = lossless_point(P, d, max_iter)
        w = D / hi_pt.distortion
        return RDPoint(w * hi_pt.rate + (1 - w) * lp.rate, float(D), hi_pt.slope, hi_pt.test_channel)
    lb = _root(lambda t: solver.at(t).distortion - D)
    pt = solver.at(lb)
    rate = max(0.0, pt.rate + pt.slope * (D - pt.distortion))
    return RDPoint(rate, float(D), pt.slope, pt.test_channel, pt.iterations)


def rate_distortion(P: Distribution, d: DistortionMatrix, D: float, **kw) -> float:
    """R(D) in bits."""
    return rate_distortion_point(P, d, D, **kw).rate


def distortion_rate_point(
    P: Distribution, d: DistortionMatrix, R: float, max_iter: int = SEARCH_MAX_ITER
) -> RDPoint:
    """Point on the curve at rate ``R``; at the zero-rate knee the smaller distortion wins."""
    _check(P, d)
    if R < 0:
        raise ValueError("rate must be nonnegative")
    zp = zero_rate_point(P, d)
    if R == 0 or zp.distortion == 0:
        return zp
    lp = lossless_point(P, d, max_iter)
    if R >= lp.rate:
        return RDPoint(float(R), 0.0, -math.inf, lp.test_channel, lp.iterations)
    solver = _Solver(P, d, max_iter)
    hi_pt = solver.at(_LOG_BETA_HI)
    if hi_pt.rate < R:
        w = (R - hi_pt.rate) / (lp.rate - hi_pt.rate)
        return RDPoint(float(R), (1 - w) * hi_pt.distortion, hi_pt.slope, hi_pt.test_channel)
    lo_pt = solver.at(_LOG_BETA_LO)
    if lo_pt.rate >= R:
        dist = _chord(zp.distortion, lo_pt, R)
        return RDPoint(float(R), dist, lo_pt.slope, lo_pt.test_channel, lo_pt.iterations)
    lb = _root(lambda t: solver.at(t).rate - R)
    pt = solver.at(lb)
    dist = pt.distortion
    if pt.slope < 0:
        dist += (R - pt.rate) / pt.slope
    # tiny slopes converge slowly; the curve never exceeds the zero-rate value
    dist = min(max(0.0, dist), zp.distortion)
    return RDPoint(float(R), dist, pt.slope, pt.test_channel, pt.iterations)


def distortion_rate(P: Distribution, d: DistortionMatrix, R: float, **kw) -> float:
    """D(R): least expected distortion at mutual information at most ``R``."""
    return distortion_rate_point(P, d, R, **kw).distortion


# --- side information at encoder and decoder --------------------------------


class _SideSolver:
    def __init__(self, PXY: JointDistribution, d: DistortionMatrix, max_iter):
        if PXY.row_alphabet != d.source_alphabet:
            raise ValueError("joint row alphabet does not match distortion rows")
        self.d = d
        py = PXY.mass.sum(axis=0)
        self.weights = []
        self.solvers = []
        self.index = []
        for y in range(PXY.col_alphabet):
            if py[y] <= 0:
                continue
            cond = PXY.mass[:, y] / py[y]
            src = Distribution(np.clip(cond, 0, None) / cond.sum())
            self.weights.append(float(py[y]))
            self.solvers.append(_Solver(src, d, max_iter))
            self.index.append(y)
        self.ny = PXY.col_alphabet

    def _channels(self, pts):
        out = [None] * self.ny
        for y, pt in zip(self.index, pts):
            out[y] = pt.test_channel
        return tuple(out)

    def combine(self, pts, slope) -> SideInfoRDPoint:
        r = sum(w * p.rate for w, p in zip(self.weights, pts))
        dd = sum(w * p.distortion for w, p in zip(self.weights, pts))
        return SideInfoRDPoint(float(r), float(dd), float(slope), self._channels(pts))

    def at(self, log_beta) -> SideInfoRDPoint:
        pts = [s.at(log_beta) for s in self.solvers]
        return self.combine(pts, -math.exp(log_beta) / LN2)

    def zero_rate(self):
        return self.combine([zero_rate_point(s.P, self.d) for s in self.solvers], 0.0)

    def lossless(self):
        return self.combine([lossless_point(s.P, self.d, s.max_iter) for s in self.solvers],
                            -math.inf)


def side_info_distortion_rate_point(
    PXY: JointDistribution, d: DistortionMatrix, R: float, max_iter: int = SEARCH_MAX_ITER
) -> SideInfoRDPoint:
    """D(R, P_XY) with a common slope across the conditional sources P_{X|Y=y}."""
    if R < 0:
        raise ValueError("rate must be nonnegative")
    ss = _SideSolver(PXY, d, max_iter)
    zp = ss.zero_rate()
    if R == 0 or zp.distortion == 0:
        return zp
    lp = ss.lossless()
    if R >= lp.rate:
        return SideInfoRDPoint(float(R), 0.0, -math.inf, lp.per_y_channels)
    hi_pt = ss.at(_LOG_BETA_HI)
    if hi_pt.rate < R:
        w = (R - hi_pt.rate) / (lp.rate - hi_pt.rate)
        return SideInfoRDPoint(float(R), (1 - w) * hi_pt.distortion, hi_pt.slope,
                               hi_pt.per_y_channels)
    lo_pt = ss.at(_LOG_BETA_LO)
    if lo_pt.rate >= R:
        return SideInfoRDPoint(float(R), _chord(zp.distortion, lo_pt, R), lo_pt.slope,
                               lo_pt.per_y_channels)
    lb = _root(lambda t: ss.at(t).rate - R)
    pt = ss.at(lb)
    dist = pt.distortion + ((R - pt.rate) / pt.slope if pt.slope < 0 else 0.0)
    dist = min(max(0.0, dist), zp.distortion)
    return SideInfoRDPoint(float(R), dist, pt.slope, pt.per_y_channels)


def side_info_distortion_rate(PXY: JointDistribution, d: DistortionMatrix, R: float, **kw) -> float:
    return side_info_distortion_rate_point(PXY, d, R, **kw).distortion


def side_info_rate_distortion(
    PXY: JointDistribution, d: DistortionMatrix, D: float, max_iter: int = SEARCH_MAX_ITER
) -> float:
    """R_Y(D) = min I(X;Z|Y) subject to E d(X,Z) <= D."""
    if D < 0:
        raise ValueError("distortion must be nonnegative")
    ss = _SideSolver(PXY, d, max_iter)
    zp = ss.zero_rate()
    if D >= zp.distortion:
        return 0.0
    if D == 0:
        return ss.lossless().rate
    hi_pt = ss.at(_LOG_BETA_HI)
    if hi_pt.distortion > D:
        lp = ss.lossless()
        w = D / hi_pt.distortion
        return w * hi_pt.rate + (1 - w) * lp.rate
    lb = _root(lambda t: ss.at(t).distortion - D)
    pt = ss.at(lb)
    return max(0.0, pt.rate + pt.slope * (D - pt.distortion))


# --- exponent of the probability of a distortion ball -----------------------


def simplex_grid(k: int, steps: int) -> np.ndarray:
    """All pmfs on ``k`` symbols with masses in multiples of ``1/steps``."""
    if k == 1:
        return np.ones((1, 1))
    pts = []

    def rec(prefix, left, slots):
        if slots == 1:
            pts.append(prefix + [left])
            return
        for c in range(left + 1):
            rec(prefix + [c], left - c, slots - 1)

    rec([], steps, k)
    return np.asarray(pts, dtype=float) / steps


@dataclass(frozen=True)
class ExponentResult:
    value: float
    minimizer: Distribution


def rd_exponent_point(
    P: Distribution,
    d: DistortionMatrix,
    D: float,
    delta: float = math.inf,
    steps: int | None = None,
    refinements: int = 3,
) -> ExponentResult:
    """min over Q with TV(Q, P) <= delta of R(D, Q) + D(Q || P).

    Grid search over the simplex with successive local refinement. The ball is
    taken closed; the infimum over the open ball is the same by continuity.
    """
    _check(P, d)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return ExponentResult(rate_distortion(P, d, D), P)
    k = P.alphabet_size
    if steps is None:
        steps = {1: 1, 2: 200, 3: 40}.get(k, 12)
    cache: dict[tuple, float] = {}

    def value(q):
        key = tuple(np.round(q, 12))
        if key not in cache:
            kl = kl_divergence(q, P.mass)
            if math.isinf(kl):
                cache[key] = math.inf
            else:
                Q = Distribution(np.clip(q, 0, None) / q.sum())
                cache[key] = rate_distortion(Q, d, D) + kl
        return cache[key]

    def feasible(q):
        return tv_distance(q, P.mass) <= delta + 1e-12

    if k == 2:
        lo = max(0.0, P.mass[1] - delta)
        hi = min(1.0, P.mass[1] + delta)
        cand = [np.array([1 - t, t]) for t in np.linspace(lo, hi, steps + 1)]
    else:
        cand = [q for q in simplex_grid(k, steps) if feasible(q)]
        cand.append(P.mass.copy())
    best = min(cand, key=value)
    h = (1.0 / steps) if k > 2 else (min(1.0, 2 * delta) / steps)
    for _ in range(refinements):
        h /= 10.0
        local = []
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                for t in range(1, 11):
                    q = best.copy()
                    q[i] += t * h
                    q[j] -= t * h
                    if q.min() >= 0 and feasible(q):
                        local.append(q)
        if local:
            cand_best = min(local, key=value)
            if value(cand_best) < value(best):
                best = cand_best
    Q = Distribution(np.clip(best, 0, None) / best.sum())
    return ExponentResult(float(value(best)), Q)


def rd_exponent(P: Distribution, d: DistortionMatrix, D: float, delta: float = math.inf, **kw) -> float:
    return rd_exponent_point(P, d, D, delta, **kw).value
