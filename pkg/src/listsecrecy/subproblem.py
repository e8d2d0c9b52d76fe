"""Compressing a codeword drawn uniformly from a random codebook.

A codebook of ``ceil(2^{n R_C})`` sequences is drawn i.i.d.; one entry is
picked uniformly and (in the noisy variant) passed through a memoryless
channel ``P_{X|Y}``. A rate-``R`` code is a set of ``ceil(2^{nR})``
reconstructions, and succeeds when some reconstruction is within ``D``.
``best_code_success`` is the best success probability over such codes for a
fixed codebook.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .cipher import index_count
from .errors import RegimeError, ResourceGuard
from .prob import (
    Channel,
    Distribution,
    DistortionMatrix,
    JointDistribution,
    all_sequences,
    check_sequence,
    iid_mass,
)
from .rd import rate_distortion, rd_exponent, side_info_rate_distortion
from .rng import check_seed, stream

DEFAULT_DELTA = 0.1
MAX_SUBSETS = 1_000_000
MAX_COVER_CELLS = 1 << 28


@dataclass(frozen=True, eq=False)
class SubproblemInstance:
    n: int
    R_C: float
    R: float
    D: float
    codebook: np.ndarray  # (entries, n) codeword symbols
    generator_dist: Distribution
    d: DistortionMatrix
    channel: Channel | None = None  # P_{X|Y}
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        cb = np.array(self.codebook, dtype=np.uint8, copy=True)
        if cb.ndim != 2 or cb.shape[1] != self.n:
            raise ValueError("codebook must be (entries, n)")
        cb.setflags(write=False)
        object.__setattr__(self, "codebook", cb)
        if min(self.R, self.R_C) < 0 or self.D < 0:
            raise ValueError("rates and distortion must be nonnegative")
        if self.channel is not None and self.channel.input_alphabet != self.generator_dist.alphabet_size:
            raise ValueError("channel input must match the codebook alphabet")

    @property
    def noisy(self) -> bool:
        return self.channel is not None

    @property
    def code_size(self) -> int:
        return index_count(self.n, self.R)

    @property
    def source_alphabet(self) -> int:
        return self.generator_dist.alphabet_size if self.channel is None else self.channel.output_alphabet

    def source_dist(self) -> Distribution:
        """Per-letter law of the observed sequence."""
        if self.channel is None:
            return self.generator_dist
        return self.channel.push(self.generator_dist)

    def joint_xy(self) -> JointDistribution:
        """P_XY indexed [x, y]."""
        return self.channel.joint(self.generator_dist).transpose()


def draw_instance(seed: int, n: int, R_C: float, R: float, D: float, generator_dist: Distribution,
                  d: DistortionMatrix, channel: Channel | None = None,
                  delta: float = DEFAULT_DELTA) -> SubproblemInstance:
    rng = stream(check_seed(seed), "codebook", n, 2)
    size = index_count(n, R_C)
    cb = rng.choice(generator_dist.alphabet_size, size=(size, n), p=generator_dist.mass)
    return SubproblemInstance(n, R_C, R, D, cb.astype(np.uint8), generator_dist, d, channel, delta)


# --- item weights ---------------------------------------------------------------


def _items(inst: SubproblemInstance):
    """Distinct observed sequences and their probabilities."""
    if not inst.noisy:
        uniq, counts = np.unique(inst.codebook, axis=0, return_counts=True)
        return uniq, counts / inst.codebook.shape[0]
    xs = all_sequences(inst.n, inst.source_alphabet)
    W = inst.channel.rows  # [y, x]
    w = np.zeros(xs.shape[0])
    for y in inst.codebook:
        w += np.prod(W[y[None, :], xs], axis=1)
    w /= inst.codebook.shape[0]
    keep = w > 0
    return xs[keep], w[keep]


def _typical_mask(inst: SubproblemInstance, items):
    P = inst.source_dist()
    k = P.alphabet_size
    types = np.stack([np.bincount(row, minlength=k) for row in items]) / inst.n
    return 0.5 * np.abs(types - P.mass[None, :]).sum(axis=1) < inst.delta


def _cover(inst: SubproblemInstance, items, cands=None):
    cands = all_sequences(inst.n, inst.d.recon_alphabet) if cands is None else cands
    cells = cands.shape[0] * items.shape[0]
    if cells > MAX_COVER_CELLS:
        raise ResourceGuard(f"coverage matrix of {cells} cells exceeds the cap")
    return cands, kernels.cover_matrix(cands, items, inst.d.values.T, inst.n * inst.D)


@dataclass(frozen=True)
class SuccessInterval:
    lower: float
    upper: float
    exact: bool
    code: np.ndarray  # reconstructions achieving ``lower``

    def contains(self, v: float, tol: float = 1e-12) -> bool:
        return self.lower - tol <= v <= self.upper + tol


def best_code_success(inst: SubproblemInstance, exhaustive: bool | None = None) -> SuccessInterval:
    """Best P[min_{z in code} d(X^n, z) <= D] over codes of the instance's size.

    Exact (by subset enumeration) when within the guard; otherwise the greedy
    code's success as lower end and the smaller of two upper bounds: the sum
    of the ``L`` largest single-reconstruction masses, and
    ``L * max_z P[d <= D, typical] + P[atypical]``.
    """
    L = inst.code_size
    nz = inst.d.recon_alphabet
    n_z = nz ** inst.n
    if inst.D >= inst.d.max_entry or (not inst.noisy and L >= inst.codebook.shape[0]):
        return _trivial_full(inst)
    items, w = _items(inst)
    cands, cover = _cover(inst, items)
    size = min(L, n_z)
    if exhaustive is None:
        exhaustive = math.comb(n_z, size) <= MAX_SUBSETS
    if exhaustive:
        val, best = _exhaustive(cover, w, size)
        return SuccessInterval(val, val, True, cands[list(best)])
    chosen, lower = kernels.greedy_max_cover(cover, w, size)
    single = cover.astype(np.float64) @ w
    top = float(np.sort(single)[::-1][:size].sum())
    typ = _typical_mask(inst, items)
    typ_best = float((cover[:, typ].astype(np.float64) @ w[typ]).max()) if typ.any() else 0.0
    union = size * typ_best + float(w[~typ].sum())
    upper = min(1.0, top, union)
    return SuccessInterval(float(lower), max(float(lower), upper), False, cands[chosen])


def _trivial_full(inst):
    # any single reconstruction covers everything, or one slot per codeword
    if inst.D >= inst.d.max_entry:
        code = np.zeros((1, inst.n), dtype=np.uint8)
    else:
        z = np.argmin(inst.d.values, axis=1)  # zero-distortion reconstruction per symbol
        code = z[inst.codebook].astype(np.uint8)
    return SuccessInterval(1.0, 1.0, True, code)


def _exhaustive(cover, w, size, chunk=1 << 14):
    nz = cover.shape[0]
    cov = cover.astype(bool)
    best, best_set = -1.0, ()
    combos = itertools.combinations(range(nz), size)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)),
                           dtype=np.int64)
        if flat.size == 0:
            break
        sets = flat.reshape(-1, size)
        vals = cov[sets].any(axis=1) @ w
        i = int(np.argmax(vals))  # first maximum: smallest subset in lexicographic order
        if vals[i] > best + 1e-15:
            best, best_set = float(vals[i]), tuple(sets[i])
    return best, best_set


def union_bound(inst: SubproblemInstance) -> float:
    """ceil(2^{nR}) * max_z P[d(X^n, z) <= D, X^n typical] + P[X^n atypical]."""
    items, w = _items(inst)
    typ = _typical_mask(inst, items)
    _, cover = _cover(inst, items)
    best = float((cover[:, typ].astype(float) @ w[typ]).max()) if typ.any() else 0.0
    return min(1.0, inst.code_size * best + float(w[~typ].sum()))


# --- the xi / zeta statistics ---------------------------------------------------


def xi_sum(inst: SubproblemInstance, z, **kw) -> float:
    """sum_j xi_{j,z}: lossless counts codewords that are typical and within D
    of ``z``; noisy sums the exact per-codeword probabilities ``zeta_{j,z}``."""
    z = check_sequence(z, inst.d.recon_alphabet)
    if z.size != inst.n:
        raise ValueError("z has the wrong length")
    if not inst.noisy:
        typ = _typical_mask(inst, inst.codebook)
        dist = kernels.pairwise_sum(inst.codebook, z, inst.d.values)[:, 0]
        return float(np.sum(typ & (dist <= inst.n * inst.D + kernels.THRESHOLD_EPS)))
    return float(sum(zeta(inst, y, z, **kw).value for y in inst.codebook))


@dataclass(frozen=True)
class ZetaValue:
    value: float
    denominator: int  # distortion grid 1/denominator
    rounding: float  # largest |d - rounded d| over the matrix


def distortion_lattice(d: DistortionMatrix, max_den: int = 1024):
    """Integer distortion levels on a common grid and the rounding incurred."""
    fr = [[Fraction(float(v)).limit_denominator(max_den) for v in row] for row in d.values]
    den = math.lcm(*(f.denominator for row in fr for f in row))
    levels = np.array([[int(f * den) for f in row] for row in fr], dtype=np.int64)
    err = float(np.max(np.abs(levels / den - d.values)))
    return levels, den, err


def zeta(inst: SubproblemInstance, y, z, max_den: int = 1024) -> ZetaValue:
    """P[d(X^n, z) <= D and (X^n, y) jointly typical | Y^n = y], X^n ~ P_{X|Y}^n.

    Positions sharing the same (y_i, z_i) are exchangeable, so the dynamic
    program runs over these groups; its state is the accumulated integer
    distortion level together with the joint (x, y) counts.
    """
    y = check_sequence(y, inst.generator_dist.alphabet_size)
    z = check_sequence(z, inst.d.recon_alphabet)
    n = inst.n
    levels, den, err = distortion_lattice(inst.d, max_den)
    cap = math.floor(n * inst.D * den + 1e-9)
    W = inst.channel.rows
    nx, ny = W.shape[1], W.shape[0]
    Pxy = inst.joint_xy().mass
    # state: (level, counts tuple over (x, y) cells) -> probability
    states = {(0, (0,) * (nx * ny)): 1.0}
    for (b, c), cnt in _group_counts(y, z, ny, inst.d.recon_alphabet).items():
        comps = _compositions_with_prob(cnt, W[b])
        nxt: dict = {}
        for (lev, cells), p in states.items():
            for comp, q in comps:
                add = sum(levels[a, c] * comp[a] for a in range(nx))
                nl = lev + add
                if nl > cap:
                    continue
                new = list(cells)
                for a in range(nx):
                    new[a * ny + b] += comp[a]
                key = (nl, tuple(new))
                nxt[key] = nxt.get(key, 0.0) + p * q
        states = nxt
    total = 0.0
    for (lev, cells), p in states.items():
        T = np.array(cells, dtype=float).reshape(nx, ny) / n
        if 0.5 * np.abs(T - Pxy).sum() < inst.delta:
            total += p
    return ZetaValue(total, den, err)


def _group_counts(y, z, ny, nz):
    out = {}
    for b, c in zip(y.tolist(), z.tolist()):
        out[(b, c)] = out.get((b, c), 0) + 1
    return dict(sorted(out.items()))


def _compositions_with_prob(cnt, row):
    """Every split of ``cnt`` i.i.d. draws from ``row`` into symbol counts, with its probability."""
    k = len(row)
    out = []

    def rec(prefix, left, a):
        if a == k - 1:
            comp = prefix + [left]
            coef = math.factorial(cnt)
            p = 1.0
            for s, m in enumerate(comp):
                coef //= math.factorial(m)
                p *= row[s] ** m
            if p * coef > 0:
                out.append((tuple(comp), coef * p))
            return
        for m in range(left + 1):
            rec(prefix + [m], left - m, a + 1)

    rec([], cnt, 0)
    return out


def zeta_support_slack(inst: SubproblemInstance, pairs=None) -> dict:
    """Largest zeta over (y, z) pairs against 2^{-n R_Y(D)}.

    Returns the measured ``max (R_Y(D) + log2(zeta) / n)``, i.e. the o(1)
    term the bound needs at this blocklength (nonpositive means the bound
    holds with no slack).
    """
    ry = side_info_rate_distortion(inst.joint_xy(), inst.d, inst.D)
    if pairs is None:
        ys = all_sequences(inst.n, inst.generator_dist.alphabet_size)
        zs = all_sequences(inst.n, inst.d.recon_alphabet)
        pairs = ((y, z) for y in ys for z in zs)
    worst = -math.inf
    zmax = 0.0
    for y, z in pairs:
        v = zeta(inst, y, z).value
        if v > 0:
            worst = max(worst, ry + math.log2(v) / inst.n)
            zmax = max(zmax, v)
    return {"R_Y": ry, "max_zeta": zmax, "slack": worst,
            "bound": 2.0 ** (-inst.n * ry)}


def type_class_bound(P: Distribution, d: DistortionMatrix, D: float, n: int,
                     delta: float = DEFAULT_DELTA) -> float:
    """Upper bound on P[d(X^n, z) <= D, X^n typical] for X^n i.i.d. P and any z:
    (n+1)^{|X||Z|} 2^{-n E}, E the exponent minimized over the closed TV ball."""
    e = rd_exponent(P, d, D, delta)
    return min(1.0, (n + 1) ** (P.alphabet_size * d.recon_alphabet) * 2.0 ** (-n * e))


def exact_xi_mean(P: Distribution, d: DistortionMatrix, D: float, z, delta: float = DEFAULT_DELTA) -> float:
    """E[xi_{j,z}] = P[d(X^n, z) <= D, X^n typical] by enumeration of X^n."""
    z = check_sequence(z, d.recon_alphabet)
    n = z.size
    xs = all_sequences(n, P.alphabet_size)
    px = iid_mass(xs, P)
    dist = kernels.pairwise_sum(xs, z, d.values)[:, 0]
    types = np.stack([np.bincount(r, minlength=P.alphabet_size) for r in xs]) / n
    typ = 0.5 * np.abs(types - P.mass).sum(axis=1) < delta
    return float(px[typ & (dist <= n * D + kernels.THRESHOLD_EPS)].sum())


# --- concentration bounds -----------------------------------------------------


def chernoff_binary(m: int, p: float, k: float) -> float:
    """(e m p / k)^k, bounding P[Bin(m, p) > k]."""
    if m < 1 or not 0 <= p <= 1 or k <= 0:
        raise ValueError("need m >= 1, p in [0, 1], k > 0")
    return (math.e * m * p / k) ** k


def chernoff_bounded(m: int, p: float, k: float, a: float) -> float:
    """(e m p / k)^{k/a}, bounding P[sum > k] for i.i.d. [0, a] variables of mean p."""
    if a <= 0 or m < 1 or not 0 <= p <= a or k <= 0:
        raise ValueError("need a > 0, m >= 1, p in [0, a], k > 0")
    return (math.e * m * p / k) ** (k / a)


def binomial_tail(m: int, p: float, k: float) -> float:
    """Exact P[Bin(m, p) > k]."""
    lo = math.floor(k) + 1
    return float(sum(math.comb(m, i) * p ** i * (1 - p) ** (m - i) for i in range(max(lo, 0), m + 1)))


# --- decay experiments --------------------------------------------------------


@dataclass(frozen=True)
class Tau:
    """Sub-exponential threshold: ``c / n^power`` or ``c * 2^{-sqrt(n)}``."""

    kind: str = "poly"
    c: float = 1.0
    power: float = 1.0

    def __post_init__(self):
        if self.kind not in ("poly", "sqrt_exp"):
            raise ValueError("tau must be 'poly' or 'sqrt_exp'")
        if self.c <= 0 or (self.kind == "poly" and self.power <= 0):
            raise ValueError("tau parameters must be positive")

    def __call__(self, n: int) -> float:
        if self.kind == "poly":
            return self.c / n ** self.power
        return self.c * 2.0 ** (-math.sqrt(n))


def regime_limits(generator_dist: Distribution, d: DistortionMatrix, D: float, R_C: float,
                  channel: Channel | None = None) -> dict:
    """Rate ceiling: min{R(D), R_C} without noise, min{R(D), R_Y(D) + R_C} with."""
    if channel is None:
        rd = rate_distortion(generator_dist, d, D)
        return {"R(D)": rd, "ceiling": min(rd, R_C)}
    joint = channel.joint(generator_dist).transpose()
    rd = rate_distortion(joint.row_marginal(), d, D)
    ry = side_info_rate_distortion(joint, d, D)
    return {"R(D)": rd, "R_Y(D)": ry, "ceiling": min(rd, ry + R_C)}


def check_regime(R: float, generator_dist, d, D, R_C, channel=None) -> dict:
    lim = regime_limits(generator_dist, d, D, R_C, channel)
    if R >= lim["ceiling"]:
        if channel is None:
            cond = f"R < min{{R(D), R_C}} = min{{{lim['R(D)']:.6g}, {R_C:.6g}}}"
        else:
            cond = (f"R < min{{R(D), R_Y(D) + R_C}} = "
                    f"min{{{lim['R(D)']:.6g}, {lim['R_Y(D)']:.6g} + {R_C:.6g}}}")
        raise RegimeError(f"refused: regime requires {cond}, got R = {R:.6g}")
    return lim


@dataclass(frozen=True)
class DecayRow:
    n: int
    seed: int
    lower: float
    upper: float
    tau_n: float
    exceeds: bool
    exact: bool


def decay_experiment(
    n_grid: Sequence[int], seeds: Sequence[int], R_C: float, R: float, D: float,
    generator_dist: Distribution, d: DistortionMatrix, tau: Tau | Callable = Tau(),
    channel: Channel | None = None, delta: float = DEFAULT_DELTA, enforce_regime: bool = True,
) -> list[DecayRow]:
    """Best-code success per (n, seed) with the indicator ``upper > tau_n``."""
    if enforce_regime:
        check_regime(R, generator_dist, d, D, R_C, channel)
    rows = []
    for n in n_grid:
        t = tau(n)
        for s in seeds:
            inst = draw_instance(s, n, R_C, R, D, generator_dist, d, channel, delta)
            iv = best_code_success(inst)
            rows.append(DecayRow(n, int(s), iv.lower, iv.upper, t, iv.upper > t, iv.exact))
    return rows


def exceed_fraction(rows: Sequence[DecayRow]) -> dict:
    out: dict = {}
    for r in rows:
        out.setdefault(r.n, []).append(r.exceeds)
    return {n: float(np.mean(v)) for n, v in sorted(out.items())}
