"""Method-of-types helpers: joint types, conditional shells, covering codebooks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .errors import ResourceGuard
from .prob import Channel, DistortionMatrix, JointDistribution, all_sequences, check_sequence
from .rd import side_info_distortion_rate

MAX_TYPES = 2_000_000
MAX_CANDIDATES = 1 << 16
MAX_SHELL = 1 << 20


@dataclass(frozen=True, eq=False)
class TypeIndex:
    """Joint count matrix ``counts[x, y]`` summing to ``n``."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or np.any(c < 0) or c.sum() <= 0:
            raise ValueError("counts must be a nonnegative matrix with positive total")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def key(self) -> tuple:
        return tuple(self.counts.ravel().tolist())

    def __eq__(self, other):
        return isinstance(other, TypeIndex) and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.counts.shape, self.key()))

    def distribution(self) -> JointDistribution:
        return JointDistribution(self.counts / self.n)

    def x_counts(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def y_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def realize(self) -> tuple[np.ndarray, np.ndarray]:
        """A sequence pair with this joint type (cells filled in index order)."""
        xs, ys = [], []
        for (a, b), c in np.ndenumerate(self.counts):
            xs += [a] * int(c)
            ys += [b] * int(c)
        return np.array(xs, dtype=np.uint8), np.array(ys, dtype=np.uint8)

    @classmethod
    def of(cls, x, y, nx: int, ny: int) -> "TypeIndex":
        x = check_sequence(x, nx)
        y = check_sequence(y, ny)
        if x.size != y.size:
            raise ValueError("sequences differ in length")
        return cls(np.bincount(x * ny + y, minlength=nx * ny).reshape(nx, ny))


def _compositions(n: int, cells: int) -> Iterator[tuple]:
    # stars and bars: choose cells-1 bar positions among n+cells-1 slots
    for bars in itertools.combinations(range(n + cells - 1), cells - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(n + cells - 1 - prev - 1)
        yield tuple(out)


def count_joint_types(n: int, nx: int, ny: int = 1) -> int:
    return math.comb(n + nx * ny - 1, nx * ny - 1)


def enumerate_joint_types(n: int, nx: int, ny: int = 1) -> list[TypeIndex]:
    if n < 1:
        raise ValueError("n must be positive")
    total = count_joint_types(n, nx, ny)
    if total > MAX_TYPES:
        raise ResourceGuard(f"{total} joint types exceed the cap {MAX_TYPES}")
    return [TypeIndex(np.reshape(c, (nx, ny))) for c in _compositions(n, nx * ny)]


def joint_type_rank(t: TypeIndex) -> int:
    """Position of ``t`` in ``enumerate_joint_types`` order."""
    nx, ny = t.counts.shape
    target = t.key()
    for i, c in enumerate(_compositions(t.n, nx * ny)):
        if c == target:
            return i
    raise ValueError("type not found")


def type_class_size(counts) -> int:
    counts = [int(c) for c in np.ravel(counts)]
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


# --- conditional shells --------------------------------------------------------


def _shell_counts(z: np.ndarray, V, nx: int) -> np.ndarray:
    """Integer count matrix ``C[a, b]``: positions with z=a that carry x=b."""
    zc = np.bincount(z, minlength=V.shape[0])
    C = V * zc[:, None]
    Ci = np.rint(C).astype(np.int64)
    if np.any(np.abs(C - Ci) > 1e-9):
        raise ValueError("conditional type is inconsistent with the counts of the sequence")
    if np.any(Ci.sum(axis=1) != zc[: Ci.shape[0]]) or np.any(Ci < 0):
        raise ValueError("conditional type rows must be distributions over the used symbols")
    if Ci.shape[1] != nx:
        raise ValueError("conditional type has the wrong output alphabet")
    return Ci


def v_shell_size(z, V: Channel | np.ndarray) -> int:
    rows = V.rows if isinstance(V, Channel) else np.asarray(V, dtype=float)
    z = check_sequence(z, rows.shape[0])
    C = _shell_counts(z, rows, rows.shape[1])
    return math.prod(type_class_size(C[a]) for a in range(C.shape[0]) if C[a].sum())


def v_shell(z, V: Channel | np.ndarray) -> Iterator[np.ndarray]:
    """Lazily yield every x^n whose conditional type given ``z`` is ``V``.

    ``V[a, b]`` is the fraction of the positions with ``z_i = a`` at which
    ``x_i = b``. Yields in a fixed order.
    """
    rows = V.rows if isinstance(V, Channel) else np.asarray(V, dtype=float)
    z = check_sequence(z, rows.shape[0])
    C = _shell_counts(z, rows, rows.shape[1])
    return _shell_from_counts(z, C)


def _multiset_arrangements(counts):
    """All distinct arrangements of a multiset given by symbol counts."""
    total = sum(counts)
    if total == 0:
        yield ()
        return
    for b, c in enumerate(counts):
        if c:
            rest = list(counts)
            rest[b] -= 1
            for tail in _multiset_arrangements(rest):
                yield (b,) + tail


def _shell_from_counts(z, C):
    groups = [np.flatnonzero(z == a) for a in range(C.shape[0])]
    parts = [list(_multiset_arrangements(C[a].tolist())) if len(groups[a]) else [()]
             for a in range(C.shape[0])]
    for combo in itertools.product(*parts):
        x = np.empty(z.size, dtype=np.uint8)
        for a, arr in enumerate(combo):
            if len(groups[a]):
                x[groups[a]] = arr
        yield x


def conditional_shell(y, jt: TypeIndex) -> Iterator[np.ndarray]:
    """Every x^n with joint type ``jt`` together with ``y``; empty if inconsistent."""
    nx, ny = jt.counts.shape
    y = check_sequence(y, ny)
    if y.size != jt.n or not np.array_equal(np.bincount(y, minlength=ny), jt.y_counts()):
        return iter(())
    return _shell_from_counts(y, jt.counts.T)


def conditional_shell_size(y, jt: TypeIndex) -> int:
    nx, ny = jt.counts.shape
    y = check_sequence(y, ny)
    if y.size != jt.n or not np.array_equal(np.bincount(y, minlength=ny), jt.y_counts()):
        return 0
    return math.prod(type_class_size(jt.counts[:, b]) for b in range(ny))


# --- covering codebooks -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoveringCodebook:
    y: np.ndarray
    joint_type: TypeIndex
    rate: float
    target: float  # per-letter distortion promised to every shell member
    entries: np.ndarray  # (size, n)
    guarantee: bool
    covered_fraction: float
    slack_bits: float  # log2(size) - n*rate, floored at 0
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def covering_codebook(
    y, jt: TypeIndex, r: float, tau: float, d: DistortionMatrix,
    max_slack: float = 0.5,
) -> CoveringCodebook:
    """Greedy set cover of the conditional shell of ``y`` within D(r, jt) + tau.

    Candidates are all reconstruction blocks; the codebook grows until every
    shell member is covered or ``ceil(2^{n(r + max_slack)})`` entries are used.
    """
    if r < 0:
        raise ValueError("rate must be nonnegative")
    nx, ny = jt.counts.shape
    y = check_sequence(y, ny)
    n = y.size
    target = side_info_distortion_rate(jt.distribution(), d, r) + tau
    size = conditional_shell_size(y, jt)
    if size == 0:
        return CoveringCodebook(y, jt, r, target, np.zeros((0, n), np.uint8), True, 1.0, 0.0)
    if size > MAX_SHELL:
        raise ResourceGuard(f"shell of {size} sequences exceeds the cap {MAX_SHELL}")
    nz = d.recon_alphabet
    if nz ** n > MAX_CANDIDATES:
        raise ResourceGuard(f"{nz}^{n} candidate reconstructions exceed the cap")
    shell = np.array(list(conditional_shell(y, jt)), dtype=np.uint8)
    cands = all_sequences(n, nz)
    cover = kernels.cover_matrix(cands, shell, d.values.T, n * target)
    budget = int(math.ceil(2.0 ** (n * (r + max_slack)) - 1e-9))
    chosen, covered = kernels.greedy_max_cover(cover, np.ones(shell.shape[0]), budget)
    frac = covered / shell.shape[0]
    entries = cands[chosen]
    slack = max(0.0, math.log2(max(1, entries.shape[0])) - n * r)
    return CoveringCodebook(y, jt, r, target, entries, bool(frac >= 1.0), float(frac), slack,
                            {"shell_size": int(shell.shape[0]), "budget": budget})


@dataclass(frozen=True)
class TypeCoverDescription:
    type_rank: int
    codeword_index: int
    bits: float
    z: np.ndarray
    distortion: float
    reference: float  # D(r, T_{x^n y^n})
    guarantee: bool
    slack_bits: float
    bound_bits: float  # n r + |X||Y| log2(n+1) + slack_bits


def typecover_attack(x, y, r: float, d: DistortionMatrix, tau: float, ny: int | None = None,
                     max_slack: float = 0.5) -> TypeCoverDescription:
    """Describe the joint type of (x, y), then the index of the closest entry of
    the covering codebook built for that type and ``y``."""
    nx = d.source_alphabet
    x = check_sequence(x, nx)
    ny = int(np.max(y)) + 1 if ny is None else ny
    y = check_sequence(y, ny)
    if x.size != y.size:
        raise ValueError("sequences differ in length")
    n = x.size
    jt = TypeIndex.of(x, y, nx, ny)
    cb = covering_codebook(y, jt, r, tau, d, max_slack)
    dist = kernels.pairwise_sum(x, cb.entries, d.values)[0] / n
    j = int(np.argmin(dist))
    ntypes = count_joint_types(n, nx, ny)
    bits = math.log2(ntypes) + math.log2(max(1, cb.size))
    bound = n * r + nx * ny * math.log2(n + 1) + cb.slack_bits
    return TypeCoverDescription(
        joint_type_rank(jt), j, bits, cb.entries[j].copy(), float(dist[j]),
        cb.target - tau, cb.guarantee, cb.slack_bits, bound,
    )
