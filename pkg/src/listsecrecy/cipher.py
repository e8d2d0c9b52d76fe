"""Shannon cipher system at small blocklength.

A codebook holds ``ceil(2^{nR}) x ceil(2^{nR0})`` sequences indexed by
message ``m`` and key ``k``. The likelihood encoder picks ``m`` with
probability proportional to the likelihood of the source block under codeword
``(m, k)``: an indicator in lossless mode, ``prod_i P_{X|Y}(x_i | y_i(m,k))``
in lossy mode. The decoder returns the codeword.

``induced_joint`` tabulates the distribution of ``(X^n, M, K)`` produced by the
real encoder on an i.i.d. source; ``ideal_joint`` the one obtained by drawing
``(m, k)`` uniformly and passing the codeword through the channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceGuard
from .prob import Channel, Distribution, all_sequences, check_sequence, iid_mass, tv_distance
from .rng import check_seed, stream

MAX_CODEBOOK_SYMBOLS = 1 << 24
MAX_TABLE_CELLS = 1 << 22


def index_count(n: int, rate: float) -> int:
    """ceil(2^{n*rate}), without float noise pushing an exact power of two up."""
    if rate < 0:
        raise ValueError("rates must be nonnegative")
    e = n * rate
    r = round(e)
    if abs(e - r) < 1e-9:
        return 1 << int(r)
    return int(math.ceil(2.0 ** e))


@dataclass(frozen=True, eq=False)
class Codebook:
    n: int
    R: float
    R0: float
    entries: np.ndarray  # (messages, keys, n) uint8
    seed: int | None
    generator_dist: Distribution

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.uint8, copy=True)
        if e.ndim != 3 or e.shape[2] != self.n:
            raise ValueError("entries must have shape (messages, keys, n)")
        if e.size and e.max() >= self.generator_dist.alphabet_size:
            raise ValueError("codeword symbol outside the generator alphabet")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def num_messages(self) -> int:
        return self.entries.shape[0]

    @property
    def num_keys(self) -> int:
        return self.entries.shape[1]

    @property
    def alphabet(self) -> int:
        return self.generator_dist.alphabet_size

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "R": self.R,
            "R0": self.R0,
            "seed": self.seed,
            "generator_dist": self.generator_dist.to_json(),
            "entries": self.entries.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Codebook":
        return cls(
            int(obj["n"]), float(obj["R"]), float(obj["R0"]),
            np.asarray(obj["entries"], dtype=np.uint8),
            obj.get("seed"), Distribution.from_json(obj["generator_dist"]),
        )


def build_codebook(
    seed: int, n: int, R: float, R0: float, generator_dist: Distribution,
    max_symbols: int = MAX_CODEBOOK_SYMBOLS,
) -> Codebook:
    """Random codebook, entries i.i.d. from ``generator_dist``."""
    seed = check_seed(seed)
    if n < 1:
        raise ValueError("blocklength must be positive")
    nm, nk = index_count(n, R), index_count(n, R0)
    total = nm * nk * n
    if total > max_symbols:
        raise ResourceGuard(f"codebook needs {total} symbols, cap is {max_symbols}")
    rng = stream(seed, "codebook", n)
    entries = rng.choice(generator_dist.alphabet_size, size=(nm, nk, n), p=generator_dist.mass)
    return Codebook(n, R, R0, entries.astype(np.uint8), seed, generator_dist)


@dataclass(frozen=True)
class CipherCode:
    """Likelihood encoder and codeword decoder over ``codebook``.

    ``channel`` is P_{X|Y} (input = codeword symbol, output = source symbol);
    ``None`` means lossless mode.
    """

    codebook: Codebook
    channel: Channel | None = None

    def __post_init__(self):
        if self.channel is not None and self.channel.input_alphabet != self.codebook.alphabet:
            raise ValueError("channel input alphabet must match the codebook alphabet")

    @property
    def mode(self) -> str:
        return "lossless" if self.channel is None else "lossy"

    @property
    def source_alphabet(self) -> int:
        return self.codebook.alphabet if self.channel is None else self.channel.output_alphabet

    def letter_likelihood(self) -> np.ndarray:
        """W[y, x]: per-letter likelihood of source symbol x under codeword symbol y."""
        if self.channel is None:
            return np.eye(self.codebook.alphabet)
        return self.channel.rows


def _likelihoods(code: CipherCode, x: np.ndarray, k: int) -> np.ndarray:
    W = code.letter_likelihood()
    col = code.codebook.entries[:, k, :]  # (messages, n)
    return np.prod(W[col, x[None, :]], axis=1)


def encoder_distribution(code: CipherCode, x, k: int) -> tuple[np.ndarray, bool]:
    """P_{M|X^n K}(. | x, k) and whether the zero-normalizer fallback fired."""
    x = check_sequence(x, code.source_alphabet)
    if x.size != code.codebook.n:
        raise ValueError("source block has the wrong length")
    if not 0 <= k < code.codebook.num_keys:
        raise IndexError("key index out of range")
    lik = _likelihoods(code, x, k)
    total = lik.sum()
    if total <= 0:
        out = np.zeros(code.codebook.num_messages)
        out[0] = 1.0
        return out, True
    return lik / total, False


def likelihood_encode(code: CipherCode, x, k: int, rng: np.random.Generator,
                      return_info: bool = False):
    probs, fallback = encoder_distribution(code, x, k)
    if fallback:
        m = 0
    else:
        m = int(rng.choice(probs.size, p=probs))
    if return_info:
        return m, {"fallback": fallback}
    return m


def decode(code: CipherCode, m: int, k: int) -> np.ndarray:
    cb = code.codebook
    if not (0 <= m < cb.num_messages and 0 <= k < cb.num_keys):
        raise IndexError(f"(m, k) = ({m}, {k}) out of range")
    return cb.entries[m, k].copy()


# --- exact joint tables ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InducedJoint:
    """Probability table indexed ``[x^n index, m, k]``."""

    table: np.ndarray
    n: int
    alphabet: int

    def x_marginal(self) -> np.ndarray:
        return self.table.sum(axis=(1, 2))

    def mk_marginal(self) -> np.ndarray:
        return self.table.sum(axis=0)

    def xm_marginal(self) -> np.ndarray:
        return self.table.sum(axis=2)

    def tv(self, other: "InducedJoint") -> float:
        return tv_distance(self.table, other.table)


def _table_guard(code: CipherCode):
    cb = code.codebook
    cells = code.source_alphabet ** cb.n * cb.num_messages * cb.num_keys
    if cells > MAX_TABLE_CELLS:
        raise ResourceGuard(f"joint table needs {cells} cells, cap is {MAX_TABLE_CELLS}")


def likelihood_table(code: CipherCode) -> np.ndarray:
    """L[x, m, k] = prod_i W[y_i(m,k), x_i] for every source block x."""
    _table_guard(code)
    cb = code.codebook
    xs = all_sequences(cb.n, code.source_alphabet)
    W = code.letter_likelihood()
    L = np.ones((xs.shape[0], cb.num_messages, cb.num_keys))
    for i in range(cb.n):
        # W[entries] is (m, k, |X|); pick column x_i for every block
        L *= np.moveaxis(W[cb.entries[:, :, i]][:, :, xs[:, i]], 2, 0)
    return L


def ideal_joint(code: CipherCode) -> InducedJoint:
    L = likelihood_table(code)
    cb = code.codebook
    return InducedJoint(L / (cb.num_messages * cb.num_keys), cb.n, code.source_alphabet)


def induced_joint(code: CipherCode, source: Distribution) -> InducedJoint:
    if source.alphabet_size != code.source_alphabet:
        raise ValueError("source alphabet does not match the code")
    L = likelihood_table(code)
    cb = code.codebook
    norm = L.sum(axis=1, keepdims=True)
    cond = np.divide(L, norm, out=np.zeros_like(L), where=norm > 0)
    dead = norm[:, 0, :] <= 0
    cond[:, 0, :][dead] = 1.0
    px = iid_mass(all_sequences(cb.n, code.source_alphabet), source)
    return InducedJoint(px[:, None, None] * cond / cb.num_keys, cb.n, code.source_alphabet)


def conditional_given_message(code: CipherCode, m: int) -> np.ndarray:
    """Q_{X^n | M=m} as a vector over source blocks in index order."""
    if not 0 <= m < code.codebook.num_messages:
        raise IndexError("message index out of range")
    L = likelihood_table(code)
    return L[:, m, :].mean(axis=1)


def exact_error_probability(code: CipherCode, source: Distribution) -> float:
    """P[decode(M, K) != X^n] under the induced joint (lossless mode)."""
    P = induced_joint(code, source)
    cb = code.codebook
    xs_idx = _codeword_indices(cb)
    hit = np.zeros(P.table.shape, dtype=bool)
    mm, kk = np.meshgrid(np.arange(cb.num_messages), np.arange(cb.num_keys), indexing="ij")
    hit[xs_idx, mm, kk] = True
    return float(P.table[~hit].sum())


def _codeword_indices(cb: Codebook) -> np.ndarray:
    w = cb.alphabet ** np.arange(cb.n - 1, -1, -1, dtype=np.int64)
    return cb.entries.astype(np.int64) @ w


def simulate_errors(code: CipherCode, source: Distribution, trials: int, seed: int) -> float:
    """Monte Carlo rate of ``decode(encode(X, K), K) != X``."""
    rng_src = stream(seed, "source", code.codebook.n)
    rng_enc = stream(seed, "encoder", code.codebook.n)
    xs = rng_src.choice(source.alphabet_size, size=(trials, code.codebook.n), p=source.mass)
    ks = rng_src.integers(code.codebook.num_keys, size=trials)
    errors = 0
    for x, k in zip(xs, ks):
        m = likelihood_encode(code, x, int(k), rng_enc)
        errors += not np.array_equal(decode(code, m, int(k)), x)
    return errors / trials


def permutation_code(n: int, alphabet: int, R0: float, seed: int) -> CipherCode:
    """Error-free lossless code: for every key, the messages list all blocks in a
    key-dependent random order (message rate log2 of the alphabet)."""
    nk = index_count(n, R0)
    xs = all_sequences(n, alphabet)
    rng = stream(check_seed(seed), "codebook", n, 1)
    entries = np.stack([xs[rng.permutation(xs.shape[0])] for _ in range(nk)], axis=1)
    cb = Codebook(n, math.log2(alphabet), R0, entries, seed,
                  Distribution(np.full(alphabet, 1.0 / alphabet)))
    return CipherCode(cb)
