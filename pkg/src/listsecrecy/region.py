"""Boundaries of the achievable secrecy regions.

Lossless: the eavesdropper's best guaranteed distortion is D(R_L) when the key
rate exceeds R_L and 0 otherwise. Lossy: maximize over helper channels
P_{Y|X} meeting I(X;Y) <= R and E d_B(X,Y) <= D_B the value D(R_L) when
R_L < R0, otherwise min{D(R_L), D(R_L - R0, P_XY)}.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .prob import Channel, Distribution, DistortionMatrix, JointDistribution, entropy
from .rd import distortion_rate, side_info_distortion_rate, simplex_grid

GRID_STEPS = (0.02, 0.05, 0.1, 0.125, 0.2, 0.25)
MAX_CHANNELS = 20000
FEAS_TOL = 1e-12


class InfeasibleRate(ValueError):
    pass


@dataclass(frozen=True)
class LosslessRegionQuery:
    R: float
    R0: float
    RL: float
    source: Distribution
    d_E: DistortionMatrix

    def __post_init__(self):
        if min(self.R, self.R0, self.RL) < 0:
            raise ValueError("rates must be nonnegative")


@dataclass(frozen=True)
class LossyRegionQuery:
    R: float
    R0: float
    RL: float
    D_B: float
    source: Distribution
    d_B: DistortionMatrix
    d_E: DistortionMatrix

    def __post_init__(self):
        if min(self.R, self.R0, self.RL) < 0 or self.D_B < 0:
            raise ValueError("rates and D_B must be nonnegative")


@dataclass(frozen=True)
class BoundaryPoint:
    value: float  # max eavesdropper distortion; nan when infeasible
    feasible: bool
    witness: Channel | None = None


def lossless_max_eve_distortion(q: LosslessRegionQuery) -> float:
    h = entropy(q.source)
    if q.R < h - 1e-12:
        raise InfeasibleRate(f"message rate {q.R} is below the source entropy {h:.6g}")
    if q.R0 > q.RL:
        return distortion_rate(q.source, q.d_E, q.RL)
    return 0.0


@dataclass(frozen=True)
class ChannelGrid:
    """Per-row simplex grid over P_{Y|X}; ``step=None`` picks a default."""

    y_alphabet: int | None = None
    step: float | None = None
    refine: bool = True


def default_step(nx: int, ny: int) -> float:
    """0.02 for binary helpers, else the finest step keeping the grid small."""
    if ny == 2:
        return 0.02
    for s in GRID_STEPS:
        per_row = math.comb(round(1 / s) + ny - 1, ny - 1)
        if per_row ** nx <= MAX_CHANNELS:
            return s
    return GRID_STEPS[-1]


def _pad(d_B: DistortionMatrix, ny: int) -> np.ndarray:
    v = d_B.values
    if v.shape[1] >= ny:
        return v
    extra = np.repeat(v.max(axis=1, keepdims=True), ny - v.shape[1], axis=1)
    return np.hstack([v, extra])


def _channel_stack(nx, ny, step):
    rows = simplex_grid(ny, round(1 / step))
    idx = np.stack(np.meshgrid(*[np.arange(len(rows))] * nx, indexing="ij"), -1).reshape(-1, nx)
    return rows[idx]  # (channels, nx, ny)


def _screen(P, W, dB, R, D_B):
    """Feasibility and a cheap upper bound (zero-rate side-info distortion) per channel."""
    J = P[None, :, None] * W  # (c, x, y)
    py = J.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(J > 0, J / (P[None, :, None] * py[:, None, :]), 1.0)
        mi = np.sum(np.where(J > 0, J * np.log2(ratio), 0.0), axis=(1, 2))
    edb = np.einsum("cxy,xy->c", J, dB)
    ok = (mi <= R + FEAS_TOL) & (edb <= D_B + FEAS_TOL)
    return ok, J


def _zero_rate_bound(J, dE):
    # sum_y min_z sum_x J[x, y] d_E[x, z]
    return np.einsum("cxy,xz->cyz", J, dE).min(axis=2).sum(axis=1)


def lossy_max_eve_distortion(q: LossyRegionQuery, grid: ChannelGrid | None = None) -> BoundaryPoint:
    grid = grid or ChannelGrid()
    P = q.source.mass
    nx = P.size
    ny = grid.y_alphabet or max(nx + 1, q.d_B.recon_alphabet)
    dB = _pad(q.d_B, ny)
    step = grid.step or default_step(nx, ny)
    W = _channel_stack(nx, ny, step)
    ok, J = _screen(P, W, dB, q.R, q.D_B)
    if not ok.any():
        return BoundaryPoint(math.nan, False, None)
    d_RL = distortion_rate(q.source, q.d_E, q.RL)
    if q.RL < q.R0:
        first = int(np.flatnonzero(ok)[0])
        return BoundaryPoint(d_RL, True, Channel(W[first]))
    r = q.RL - q.R0
    best, best_w = _search(W[ok], J[ok], q.d_E, r, d_RL, -math.inf, None)
    if grid.refine and best < d_RL - 1e-12:
        local = _neighbourhood(best_w, step)
        ok2, J2 = _screen(P, local, dB, q.R, q.D_B)
        if ok2.any():
            best, best_w = _search(local[ok2], J2[ok2], q.d_E, r, d_RL, best, best_w)
    return BoundaryPoint(float(best), True, Channel(best_w))


def _search(W, J, dE, r, cap, best, best_w):
    """Branch and bound: visit channels by decreasing zero-rate bound."""
    ub = np.minimum(_zero_rate_bound(J, dE.values), cap)
    cache: dict = {}
    for i in np.argsort(-ub, kind="stable"):
        if ub[i] <= best + 1e-12:
            break
        key = _canonical(J[i])
        if key not in cache:
            cache[key] = min(cap, side_info_distortion_rate(JointDistribution(_clean(J[i])), dE, r))
        v = cache[key]
        if v > best + 1e-12:
            best, best_w = v, W[i]
            if best >= cap - 1e-12:
                break
    return best, best_w


def _clean(J):
    J = np.clip(J, 0, None)
    return J / J.sum()


def _canonical(J):
    # the value does not depend on how helper symbols are labelled
    cols = sorted(tuple(np.round(J[:, y], 12)) for y in range(J.shape[1]))
    return tuple(cols)


def _neighbourhood(Wc, step, sub=5):
    """Channels within one grid step of ``Wc``, on a grid ``sub`` times finer."""
    nx, ny = Wc.shape
    h = step / sub
    per_row = []
    for x in range(nx):
        pts = []
        for i in range(ny):
            for j in range(ny):
                if i == j:
                    continue
                for t in range(1, sub + 1):
                    row = Wc[x].copy()
                    row[i] += t * h
                    row[j] -= t * h
                    if row.min() >= -1e-12:
                        pts.append(np.clip(row, 0, None))
        pts.append(Wc[x].copy())
        per_row.append(np.array(pts))
    idx = np.stack(np.meshgrid(*[np.arange(len(p)) for p in per_row], indexing="ij"), -1).reshape(-1, nx)
    return np.stack([np.stack([per_row[x][k[x]] for x in range(nx)]) for k in idx])


# --- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    sweep_var: str
    value: float
    D_E_max: float
    feasible: bool
    witness: Channel | None

    def csv_fields(self) -> list:
        wj = "" if self.witness is None else json.dumps(self.witness.rows.round(9).tolist())
        return [self.sweep_var, self.value, self.D_E_max, int(self.feasible), wj]


def _one(args):
    template, var, v, grid = args
    q = replace(template, **{var: v})
    if isinstance(q, LosslessRegionQuery):
        try:
            return SweepRow(var, v, lossless_max_eve_distortion(q), True, None)
        except InfeasibleRate:
            return SweepRow(var, v, math.nan, False, None)
    pt = lossy_max_eve_distortion(q, grid)
    return SweepRow(var, v, pt.value, pt.feasible, pt.witness)


def region_sweep(template, sweep_var: str, values: Sequence[float], grid: ChannelGrid | None = None,
                 jobs: int = 1) -> list[SweepRow]:
    """Boundary value at every point of ``values`` (output sorted by value)."""
    allowed = {"RL", "R0"} | ({"D_B"} if isinstance(template, LossyRegionQuery) else set())
    if sweep_var not in allowed:
        raise ValueError(f"sweep variable must be one of {sorted(allowed)}")
    values = sorted(float(v) for v in values)
    if not values:
        raise ValueError("sweep grid is empty")
    tasks = [(template, sweep_var, v, grid) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_one, tasks))
    return [_one(t) for t in tasks]
