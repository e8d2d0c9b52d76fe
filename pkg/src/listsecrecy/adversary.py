"""Eavesdropper side: lists, henchman codes and concrete attacks.

A henchman sees ``(x^n, m)`` and sends ``m_H`` in ``[0, list_size)``; the
eavesdropper outputs ``z^n(m, m_H)``. A reconstruction list is the same thing
seen from the decoder side. Sequences are identified with their index in
lexicographic order; ``all_sequences`` maps indices back to symbols.

Attack success is "distortion strictly below D": the cipher designer wants
``P[d(X^n, Z^n) >= D]`` large, the adversary wants it small.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cipher import CipherCode, decode, index_count, induced_joint
from .errors import ResourceGuard
from .prob import Distribution, DistortionMatrix, all_sequences, check_sequence
from .rd import distortion_rate_point
from .rng import check_seed, stream

MAX_ENUMERATION = 4_000_000


@dataclass(frozen=True)
class ReconstructionList:
    """``lists[m]`` is a tuple of reconstruction-sequence indices for message m."""

    n: int
    recon_alphabet: int
    lists: tuple
    rate: float | None = None

    def __post_init__(self):
        if self.rate is not None:
            cap = index_count(self.n, self.rate)
            if any(len(lst) > cap for lst in self.lists):
                raise ValueError(f"a list exceeds the size bound {cap}")

    def sequences(self, m: int) -> np.ndarray:
        idx = np.asarray(self.lists[m], dtype=np.int64)
        return _decode_indices(idx, self.n, self.recon_alphabet)


@dataclass(frozen=True)
class HenchmanCode:
    """``decoder[m][j]`` is the reconstruction index sent for helper index j.

    ``encoder(x_idx, m)`` returns the helper index for source block ``x_idx``.
    """

    n: int
    recon_alphabet: int
    decoder: tuple
    enc_table: np.ndarray  # (source blocks, messages) helper indices
    rate: float | None = None

    def __post_init__(self):
        if self.rate is not None:
            cap = index_count(self.n, self.rate)
            if any(len(row) > cap for row in self.decoder):
                raise ValueError(f"helper index count exceeds {cap}")

    def encoder(self, x_idx: int, m: int) -> int:
        return int(self.enc_table[x_idx, m])

    def reconstruct(self, x_idx: int, m: int) -> int:
        return self.decoder[m][self.encoder(x_idx, m)]


def _decode_indices(idx, n, alphabet):
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.uint8)
    rem = idx.copy()
    for i in range(n - 1, -1, -1):
        out[:, i] = rem % alphabet
        rem //= alphabet
    return out


def _distortion_table(n: int, d: DistortionMatrix) -> np.ndarray:
    """Sum distortion between every source block and every reconstruction block."""
    xs = all_sequences(n, d.source_alphabet)
    zs = all_sequences(n, d.recon_alphabet)
    return kernels.pairwise_sum(xs, zs, d.values)


def list_to_henchman(L: ReconstructionList, d: DistortionMatrix) -> HenchmanCode:
    """Helper sends the position of the closest list entry (smallest on ties)."""
    dist = _distortion_table(L.n, d)
    enc = np.zeros((dist.shape[0], len(L.lists)), dtype=np.int64)
    for m, lst in enumerate(L.lists):
        if len(lst):
            enc[:, m] = np.argmin(dist[:, list(lst)], axis=1)
    return HenchmanCode(L.n, L.recon_alphabet, tuple(tuple(lst) for lst in L.lists), enc, L.rate)


def henchman_to_list(h: HenchmanCode) -> ReconstructionList:
    """Decoder image per message (helper indices the encoder never uses included)."""
    return ReconstructionList(h.n, h.recon_alphabet, tuple(tuple(row) for row in h.decoder), h.rate)


def henchman_distortions(h: HenchmanCode, d: DistortionMatrix) -> np.ndarray:
    """Per-letter distortion achieved for every (x^n, m)."""
    dist = _distortion_table(h.n, d)
    out = np.empty(h.enc_table.shape)
    for m, row in enumerate(h.decoder):
        z = np.asarray(row)[h.enc_table[:, m]]
        out[:, m] = dist[np.arange(dist.shape[0]), z]
    return out / h.n


def list_distortions(L: ReconstructionList, d: DistortionMatrix) -> np.ndarray:
    """min over the list for every (x^n, m)."""
    dist = _distortion_table(L.n, d)
    out = np.full((dist.shape[0], len(L.lists)), np.inf)
    for m, lst in enumerate(L.lists):
        if len(lst):
            out[:, m] = dist[:, list(lst)].min(axis=1)
    return out / L.n


# --- exhaustive optimal attacks -----------------------------------------------


def _success_cover(n, d, D):
    """cover[z, x] = 1 iff d(x, z) < D."""
    dist = _distortion_table(n, d) / n
    return (dist < D - 1e-12).T


def optimal_list_value(weights, n: int, d: DistortionMatrix, list_size: int, D: float,
                       per_message: bool = False):
    """Best covered weight over lists: sum_m max_{|L|=list_size} sum_x w[x,m] 1{min_L d < D}.

    ``weights`` is (source blocks, messages) and may be integer for exact
    arithmetic; columns may also stack messages of many codes, in which case
    ``per_message=True`` returns the per-column optimum. Exhaustive over
    subsets of reconstruction blocks.
    """
    w = np.asarray(weights)
    cover = _success_cover(n, d, D)
    nz = cover.shape[0]
    size = min(list_size, nz)
    count = math.comb(nz, size)
    if count * w.shape[1] > MAX_ENUMERATION:
        raise ResourceGuard(f"{count} lists per message exceed the enumeration cap")
    patterns = np.array(
        [cover[list(s)].any(axis=0) for s in itertools.combinations(range(nz), size)]
    )
    best = _best_per_column(w, patterns)
    return best if per_message else best.sum()


def optimal_henchman_value(weights, n: int, d: DistortionMatrix, list_size: int, D: float,
                           per_message: bool = False):
    """Best covered weight over henchman codes, enumerating every decoder table
    and every helper encoder separately for each message."""
    w = np.asarray(weights)
    cover = _success_cover(n, d, D)
    nz, nx = cover.shape
    n_dec = nz ** list_size
    n_enc = list_size ** nx
    if n_dec * n_enc > MAX_ENUMERATION:
        raise ResourceGuard(f"{n_dec * n_enc} henchman codes per message exceed the cap")
    decs = np.array(list(itertools.product(range(nz), repeat=list_size)), dtype=np.int64)
    encs = np.array(list(itertools.product(range(list_size), repeat=nx)), dtype=np.int64)
    # z chosen for block x is decs[:, encs[:, x]]
    chosen = decs[:, encs]  # (n_dec, n_enc, nx)
    patterns = cover[chosen, np.arange(nx)].reshape(-1, nx)
    patterns = np.unique(patterns, axis=0)
    best = _best_per_column(w, patterns)
    return best if per_message else best.sum()


def _best_per_column(w, patterns, chunk=1 << 12):
    if w.dtype == object:
        pat = patterns.astype(object)
        return np.array([max(pat @ w[:, m]) for m in range(w.shape[1])], dtype=object)
    pat = patterns.astype(w.dtype)
    best = None
    for s in range(0, pat.shape[0], chunk):
        v = (pat[s:s + chunk] @ w).max(axis=0)
        best = v if best is None else np.maximum(best, v)
    return best


def optimal_attack_value(code: CipherCode, source: Distribution, RL: float, D: float,
                         d_E: DistortionMatrix) -> float:
    """Exact min over henchman codes of P[d(X^n, Z^n) >= D] under the induced joint."""
    if D <= 0:
        return 1.0
    joint = induced_joint(code, source).xm_marginal()
    n = code.codebook.n
    covered = optimal_list_value(joint, n, d_E, index_count(n, RL), D)
    return float(min(1.0, max(0.0, 1.0 - covered)))


def exact_message_weights(code: CipherCode, source: Distribution, max_den: int = 1 << 20):
    """Integer weights proportional to P(x^n, m) for a lossless-mode code.

    Source masses are taken as exact rationals (denominator at most
    ``max_den``), so comparisons of covered weight are exact.
    Returns ``(weights, denominator)``.
    """
    from fractions import Fraction

    if code.mode != "lossless":
        raise ValueError("exact weights are defined for lossless codes")
    cb = code.codebook
    fr = [Fraction(float(p)).limit_denominator(max_den) for p in source.mass]
    den = math.lcm(*(f.denominator for f in fr))
    num = np.array([int(f * den) for f in fr], dtype=object)
    xs = all_sequences(cb.n, cb.alphabet)
    px = np.ones(xs.shape[0], dtype=object)
    for i in range(cb.n):
        px = px * num[xs[:, i]]
    M, K = cb.num_messages, cb.num_keys
    lcm_m = math.lcm(*range(1, M + 1))
    w = np.zeros((xs.shape[0], M), dtype=object)
    idx = _index_of(cb.entries, cb.alphabet)  # (M, K)
    for k in range(K):
        col = idx[:, k]
        counts = np.bincount(col, minlength=xs.shape[0])
        for m in range(M):
            x = col[m]
            w[x, m] += lcm_m // int(counts[x])
        unmatched = counts == 0
        w[unmatched, 0] += lcm_m
    w = w * px[:, None]
    total_den = den ** cb.n * K * lcm_m
    if all(int(v) < (1 << 62) for v in w.ravel()):
        w = w.astype(np.int64)
    return w, total_den


def _index_of(entries, alphabet):
    n = entries.shape[-1]
    pw = alphabet ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return entries.astype(np.int64) @ pw


# --- constructive attacks ---------------------------------------------------


@dataclass(frozen=True)
class AttackOutcome:
    z: np.ndarray
    distortion: float
    helper_index: int


def key_enumeration_attack(code: CipherCode, x, m: int, d: DistortionMatrix) -> AttackOutcome:
    """Helper sends the key whose decryption of ``m`` is closest to ``x``.

    With rate at least R0 the helper can index every key, so for an error-free
    code the true key is among the candidates and the distortion is zero.
    """
    x = check_sequence(x, code.source_alphabet)
    cand = code.codebook.entries[m]  # (keys, n)
    dist = kernels.pairwise_sum(x, cand, d.values)[0]
    k = int(np.argmin(dist))
    return AttackOutcome(decode(code, m, k), float(dist[k] / x.size), k)


def key_enumeration_list(code: CipherCode) -> ReconstructionList:
    """The list view: for message m, all key decryptions of m."""
    idx = _index_of(code.codebook.entries, code.codebook.alphabet)
    return ReconstructionList(code.codebook.n, code.codebook.alphabet,
                              tuple(tuple(int(v) for v in row) for row in idx))


@dataclass(frozen=True)
class P2PList:
    sequences: np.ndarray  # (list size, n)
    rate: float
    reference_distortion: float
    output_marginal: Distribution


def p2p_attack(P: Distribution, d_E: DistortionMatrix, RL: float, n: int, seed: int) -> P2PList:
    """Message-independent list: ceil(2^{n RL}) sequences drawn i.i.d. from the
    output marginal of the distortion-rate-optimal test channel at RL."""
    seed = check_seed(seed)
    size = index_count(n, RL)
    pt = distortion_rate_point(P, d_E, RL)
    q = pt.output_marginal(P)
    nz = d_E.recon_alphabet
    if size >= nz ** n:
        seqs = all_sequences(n, nz)
    else:
        rng = stream(seed, "attack", n)
        seqs = rng.choice(nz, size=(size, n), p=q.mass).astype(np.uint8)
    return P2PList(seqs, RL, pt.distortion, q)


def list_min_distortion(seqs, xs, d: DistortionMatrix) -> np.ndarray:
    """Per-letter min distortion from each row of ``xs`` to the list."""
    xs = np.atleast_2d(xs)
    return kernels.pairwise_sum(xs, seqs, d.values).min(axis=1) / xs.shape[1]


def p2p_expected_min_distortion(P: Distribution, q: Distribution, n: int, size: int) -> float:
    """E over source and codebook of the min Hamming distortion of a binary
    i.i.d. list: ``sum_t P[min > t] / n`` with the per-codeword distance law
    conditioned on the source block's weight."""
    if P.alphabet_size != 2 or q.alphabet_size != 2:
        raise ValueError("closed form implemented for binary Hamming")
    p, qq = P.mass[1], q.mass[1]
    total = 0.0
    for w in range(n + 1):
        pw = math.comb(n, w) * p ** w * (1 - p) ** (n - w)
        if pw == 0:
            continue
        # distance = (#ones of z among the n-w zeros of x) + (#zeros of z among the w ones)
        a = np.array([math.comb(n - w, i) * qq ** i * (1 - qq) ** (n - w - i) for i in range(n - w + 1)])
        b = np.array([math.comb(w, i) * (1 - qq) ** i * qq ** (w - i) for i in range(w + 1)])
        law = np.convolve(a, b)
        cdf = np.cumsum(law)
        tail = np.clip(1.0 - cdf[:-1], 0.0, 1.0)
        total += pw * float(np.sum(tail ** size))
    return total / n


def simulate_p2p(P: Distribution, d_E: DistortionMatrix, RL: float, n: int, seed: int,
                 draws: int = 200) -> dict:
    att = p2p_attack(P, d_E, RL, n, seed)
    rng = stream(seed, "source", n)
    xs = rng.choice(P.alphabet_size, size=(draws, n), p=P.mass)
    dist = list_min_distortion(att.sequences, xs, d_E)
    return {
        "attack": "p2p",
        "params": {"n": n, "RL": RL, "seed": seed, "list_size": int(att.sequences.shape[0])},
        "empirical_mean_distortion": float(dist.mean()),
        "empirical_success": float(np.mean(dist <= att.reference_distortion + 0.05)),
        "reference_value": att.reference_distortion,
    }
