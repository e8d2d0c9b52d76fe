"""Finite-alphabet probability primitives.

All information measures are in bits. Probability objects validate on
construction and hold read-only arrays. Sequences are plain 1-D integer numpy
arrays of alphabet indices.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

PROB_TOL = 1e-12


class InvalidDistribution(ValueError):
    pass


class AlphabetMismatch(ValueError):
    pass


def _frozen(a, ndim):
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise InvalidDistribution(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_mass(arr, what):
    if arr.size == 0:
        raise InvalidDistribution(f"{what}: empty")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidDistribution(f"{what}: masses must be finite and nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > PROB_TOL * max(1, arr.size):
        raise InvalidDistribution(f"{what}: masses sum to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class Distribution:
    mass: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.mass, 1)
        _check_mass(arr, "Distribution")
        object.__setattr__(self, "mass", arr)

    @property
    def alphabet_size(self) -> int:
        return self.mass.shape[0]

    def __len__(self):
        return self.alphabet_size

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.mass, other.mass)

    def __repr__(self):
        return f"Distribution({np.array2string(self.mass, precision=6)})"

    def to_json(self) -> dict:
        return {"alphabet": self.alphabet_size, "mass": self.mass.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Distribution":
        dist = cls(obj["mass"])
        if "alphabet" in obj and int(obj["alphabet"]) != dist.alphabet_size:
            raise InvalidDistribution("alphabet field disagrees with mass length")
        return dist


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint pmf over (row symbol, column symbol)."""

    mass: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.mass, 2)
        _check_mass(arr, "JointDistribution")
        object.__setattr__(self, "mass", arr)

    @property
    def row_alphabet(self) -> int:
        return self.mass.shape[0]

    @property
    def col_alphabet(self) -> int:
        return self.mass.shape[1]

    def row_marginal(self) -> Distribution:
        return Distribution(_renorm(self.mass.sum(axis=1)))

    def col_marginal(self) -> Distribution:
        return Distribution(_renorm(self.mass.sum(axis=0)))

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.mass.T)

    def to_json(self) -> dict:
        return matrix_to_json(self.mass)

    @classmethod
    def from_json(cls, obj: dict) -> "JointDistribution":
        return cls(matrix_from_json(obj))


@dataclass(frozen=True, eq=False)
class Channel:
    """Stochastic matrix; ``rows[a]`` is the output pmf for input ``a``."""

    rows: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.rows, 2)
        for a in range(arr.shape[0]):
            _check_mass(arr[a], f"Channel row {a}")
        object.__setattr__(self, "rows", arr)

    @property
    def input_alphabet(self) -> int:
        return self.rows.shape[0]

    @property
    def output_alphabet(self) -> int:
        return self.rows.shape[1]

    def row(self, a: int) -> Distribution:
        return Distribution(self.rows[a])

    def joint(self, p: Distribution) -> JointDistribution:
        """Joint of (input, output) when the input is drawn from ``p``."""
        if p.alphabet_size != self.input_alphabet:
            raise AlphabetMismatch("input distribution does not match channel input")
        return JointDistribution(p.mass[:, None] * self.rows)

    def push(self, p: Distribution) -> Distribution:
        if p.alphabet_size != self.input_alphabet:
            raise AlphabetMismatch("input distribution does not match channel input")
        return Distribution(_renorm(p.mass @ self.rows))

    def to_json(self) -> dict:
        return matrix_to_json(self.rows)

    @classmethod
    def from_json(cls, obj: dict) -> "Channel":
        return cls(matrix_from_json(obj))

    @classmethod
    def identity(cls, size: int) -> "Channel":
        return cls(np.eye(size))

    @classmethod
    def bsc(cls, crossover: float) -> "Channel":
        return cls([[1 - crossover, crossover], [crossover, 1 - crossover]])


@dataclass(frozen=True, eq=False)
class DistortionMatrix:
    """Per-letter distortion d(x, z); every row must contain a zero."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("distortion must be a nonempty matrix")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("distortion entries must be finite and nonnegative")
        if not np.all((arr == 0).any(axis=1)):
            raise ValueError("every source symbol needs a zero-distortion reconstruction")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def shape(self):
        return self.values.shape

    @property
    def source_alphabet(self) -> int:
        return self.values.shape[0]

    @property
    def recon_alphabet(self) -> int:
        return self.values.shape[1]

    @property
    def max_entry(self) -> float:
        return float(self.values.max())

    def to_json(self) -> dict:
        return matrix_to_json(self.values)

    @classmethod
    def from_json(cls, obj: dict) -> "DistortionMatrix":
        return cls(matrix_from_json(obj))

    @classmethod
    def hamming(cls, nx: int, nz: int | None = None) -> "DistortionMatrix":
        nz = nx if nz is None else nz
        return cls((np.arange(nx)[:, None] != np.arange(nz)[None, :]).astype(float))


def matrix_to_json(m) -> dict:
    m = np.asarray(m)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "mass": m.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    m = np.asarray(obj["mass"], dtype=np.float64)
    if m.ndim == 1 and "rows" in obj and "cols" in obj:
        m = m.reshape(int(obj["rows"]), int(obj["cols"]))
    if m.ndim != 2:
        raise ValueError("matrix JSON must be row-major nested lists")
    if ("rows" in obj and m.shape[0] != int(obj["rows"])) or (
        "cols" in obj and m.shape[1] != int(obj["cols"])
    ):
        raise ValueError("matrix JSON shape fields disagree with data")
    return m


def _renorm(v):
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, None)
    return v / v.sum()


def bernoulli(p: float) -> Distribution:
    return Distribution([1.0 - p, p])


def uniform(k: int) -> Distribution:
    return Distribution(np.full(k, 1.0 / k))


# --- information measures ----------------------------------------------------


def _plogp(v):
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(v)
    nz = v > 0
    out[nz] = v[nz] * np.log2(v[nz])
    return out


def _as_mass(P):
    if isinstance(P, (Distribution, JointDistribution)):
        return P.mass
    return np.asarray(P, dtype=np.float64)


def tv_distance(P, Q) -> float:
    """Total variation: half the L1 distance between two pmfs on one alphabet."""
    p, q = _as_mass(P), _as_mass(Q)
    if p.shape != q.shape:
        raise AlphabetMismatch(f"alphabet shapes differ: {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def entropy(P) -> float:
    return float(max(0.0, -_plogp(_as_mass(P)).sum()))


def binary_entropy(p: float) -> float:
    return entropy([p, 1.0 - p])


def mutual_information(P) -> float:
    m = _as_mass(P)
    h = entropy(m.sum(axis=1)) + entropy(m.sum(axis=0)) - entropy(m.ravel())
    return max(0.0, h)


def conditional_mutual_information(P) -> float:
    """I(X;Z|Y) for a three-way pmf indexed ``[x, y, z]``."""
    m = np.asarray(_as_mass(P), dtype=np.float64)
    if m.ndim != 3:
        raise ValueError("expected a three-way joint indexed [x, y, z]")
    total = 0.0
    for y in range(m.shape[1]):
        py = m[:, y, :].sum()
        if py > 0:
            total += py * mutual_information(m[:, y, :] / py)
    return max(0.0, float(total))


def kl_divergence(Q, P) -> float:
    """D(Q||P) in bits; +inf when Q puts mass where P has none."""
    q, p = _as_mass(Q), _as_mass(P)
    if q.shape != p.shape:
        raise AlphabetMismatch(f"alphabet shapes differ: {q.shape} vs {p.shape}")
    sup = q > 0
    if np.any(p[sup] <= 0):
        return math.inf
    return float(max(0.0, (q[sup] * np.log2(q[sup] / p[sup])).sum()))


# --- sequences and types -----------------------------------------------------


def check_sequence(x, alphabet: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("sequence must be a nonempty 1-d array")
    if np.any(x < 0) or np.any(x >= alphabet):
        raise ValueError(f"sequence symbols must lie in [0, {alphabet})")
    return x.astype(np.int64)


def empirical_type(x, alphabet: int) -> Distribution:
    x = check_sequence(x, alphabet)
    return Distribution(np.bincount(x, minlength=alphabet) / x.size)


def joint_type(x, y, nx: int, ny: int) -> JointDistribution:
    x = check_sequence(x, nx)
    y = check_sequence(y, ny)
    if x.size != y.size:
        raise ValueError("sequences differ in length")
    counts = np.bincount(x * ny + y, minlength=nx * ny).reshape(nx, ny)
    return JointDistribution(counts / x.size)


def is_typical(x, P: Distribution, delta: float) -> bool:
    if delta <= 0:
        raise ValueError("delta must be positive")
    return tv_distance(empirical_type(x, P.alphabet_size), P) < delta


def avg_distortion(x, z, d: DistortionMatrix) -> float:
    x = check_sequence(x, d.source_alphabet)
    z = check_sequence(z, d.recon_alphabet)
    if x.size != z.size:
        raise ValueError("sequences differ in length")
    return float(d.values[x, z].mean())


def all_sequences(n: int, alphabet: int) -> np.ndarray:
    """Every length-``n`` sequence, in lexicographic (= index) order."""
    if alphabet ** n > 1 << 26:
        raise MemoryError(f"{alphabet}^{n} sequences is too many to enumerate")
    grid = np.array(list(itertools.product(range(alphabet), repeat=n)), dtype=np.uint8)
    return grid.reshape(alphabet ** n, n)


def sequence_index(x, alphabet: int) -> int:
    idx = 0
    for s in np.asarray(x).tolist():
        idx = idx * alphabet + int(s)
    return idx


def sequence_indices(xs, alphabet: int) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=np.int64))
    weights = alphabet ** np.arange(xs.shape[1] - 1, -1, -1, dtype=np.int64)
    return xs @ weights


def iid_mass(seqs, P: Distribution) -> np.ndarray:
    """Probability of each row of ``seqs`` under the i.i.d. law of ``P``."""
    seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
    return np.prod(P.mass[seqs], axis=1)
