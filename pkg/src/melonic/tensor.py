"""Symmetric tensors: packed storage, random ensembles, contractions, and
trace-invariant evaluation.

Storage keeps one float64 value per sorted multi-index (i1 <= ... <= ip),
C(N+p-1, p) entries in colexicographic order via the combinadic ranking; the
full symmetry is structural, never duplicated.  Trace invariants contract one
dense tensor copy per map vertex over the shared edge indices, with a greedy
elimination order.  Exact expectations of trace invariants under the entry
ensembles are computed in rational arithmetic, by two independent routes
(exhaustive index sums, and injective sums grouped by edge partitions).

Trace values are plain floats from the numerical paths and
``fractions.Fraction`` from the exact-expectation paths.
"""

from __future__ import annotations

import itertools
import json
import math
import string
import struct
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolation, ResourceLimitError
from .maps import (
    CombinatorialMap,
    EdgePartition,
    cycles,
    dual,
    edge_list,
    merge_edges,
    multigraph,
    rooted_connected,
)
from .hypergraph import hypergraph_of

_EINSUM_LETTERS = string.ascii_letters
_MAX_EDGES = len(_EINSUM_LETTERS)
_EXHAUSTIVE_TERM_GUARD = 10**8
_INJECTIVE_TERM_GUARD = 2 * 10**6
_PARTITION_EDGE_GUARD = 9


class _IndexTable:
    """Per-(p, N) ranking machinery shared by all tensors of that shape."""

    def __init__(self, p: int, N: int):
        self.p = p
        self.N = N
        self.size = math.comb(N + p - 1, p) if p > 0 else 1
        # python binomial table for scalar ranking (exact, overflow-free)
        self._binom = [[math.comb(j, k) for k in range(p + 1)] for j in range(N + p + 1)]
        rows = np.array(
            list(itertools.combinations_with_replacement(range(N), p)), dtype=np.int64
        ).reshape(self.size, p)
        ranks = self._rank_rows(rows)
        order = np.argsort(ranks)
        self.mindex = rows[order]
        assert np.array_equal(self._rank_rows(self.mindex), np.arange(self.size))
        # product of factorials of the index multiplicities, per rank
        runlen = np.ones(self.size, dtype=np.int64)
        cprod = np.ones(self.size, dtype=np.int64)
        for j in range(1, p):
            eq = self.mindex[:, j] == self.mindex[:, j - 1]
            runlen = np.where(eq, runlen + 1, 1)
            cprod = np.where(eq, cprod * runlen, cprod)
        self.count_factorial = cprod
        self.orbit = math.factorial(p) // cprod if p > 0 else np.ones(1, dtype=np.int64)
        # sigma^2 profile of the Gaussian orthogonal tensor ensemble
        self.sigma2 = cprod / float(math.factorial(max(p - 1, 0)))
        self._dense_map: Optional[np.ndarray] = None
        self._flat_sorted: Optional[np.ndarray] = None

    def _rank_rows(self, rows: np.ndarray) -> np.ndarray:
        p, N = self.p, self.N
        if p == 0:
            return np.zeros(len(rows), dtype=np.int64)
        binom = np.array(self._binom, dtype=np.int64)
        js = rows + np.arange(p, dtype=np.int64)
        return binom[js, np.arange(1, p + 1)].sum(axis=1)

    def rank(self, idx: Sequence[int]) -> int:
        srt = sorted(idx)
        return sum(self._binom[srt[k] + k][k + 1] for k in range(self.p))

    def dense_map(self) -> np.ndarray:
        """rank of the sorted multi-index, for every flat dense position."""
        if self._dense_map is None:
            p, N = self.p, self.N
            if p == 0:
                self._dense_map = np.zeros(1, dtype=np.int64)
            else:
                grid = np.indices((N,) * p).reshape(p, -1).T
                self._dense_map = self._rank_rows(np.sort(grid, axis=1))
        return self._dense_map

    def flat_sorted(self) -> np.ndarray:
        """flat dense position of each sorted multi-index, in rank order."""
        if self._flat_sorted is None:
            p, N = self.p, self.N
            if p == 0:
                self._flat_sorted = np.zeros(1, dtype=np.int64)
            else:
                weights = N ** np.arange(p - 1, -1, -1, dtype=np.int64)
                self._flat_sorted = self.mindex @ weights
        return self._flat_sorted


@lru_cache(maxsize=64)
def _table(p: int, N: int) -> _IndexTable:
    if p < 0 or N < 1:
        raise ContractViolation("need p >= 0 and N >= 1")
    return _IndexTable(p, N)


class SymTensor:
    """Order-p, dimension-N real symmetric tensor in packed storage."""

    __slots__ = ("p", "N", "values", "_dense_cache")

    def __init__(self, p: int, N: int, values: np.ndarray):
        tbl = _table(p, N)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.shape != (tbl.size,):
            raise ContractViolation(
                f"expected {tbl.size} packed entries for p={p}, N={N}, got {values.shape}"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_dense_cache", None)

    def __setattr__(self, name, value):
        raise AttributeError("SymTensor is immutable")

    @classmethod
    def zeros(cls, p: int, N: int) -> "SymTensor":
        return cls(p, N, np.zeros(_table(p, N).size))

    @classmethod
    def from_dense(cls, p: int, N: int, dense: np.ndarray) -> "SymTensor":
        dense = np.asarray(dense, dtype=np.float64)
        if dense.shape != (N,) * p:
            raise ContractViolation(f"dense shape {dense.shape} != {(N,) * p}")
        return cls(p, N, dense.reshape(-1)[_table(p, N).flat_sorted()])

    def __getitem__(self, idx) -> float:
        if self.p == 0:
            if idx not in ((), None):
                raise ContractViolation("order-0 tensor takes the empty index")
            return float(self.values[0])
        if len(idx) != self.p:
            raise ContractViolation(f"need {self.p} indices, got {len(idx)}")
        return float(self.values[_table(self.p, self.N).rank(idx)])

    def to_dense(self) -> np.ndarray:
        tbl = _table(self.p, self.N)
        dense = self.values[tbl.dense_map()]
        return dense.reshape((self.N,) * self.p)

    def _dense(self) -> np.ndarray:
        """Cached dense view (read-only)."""
        if self._dense_cache is None:
            d = self.to_dense()
            d.flags.writeable = False
            object.__setattr__(self, "_dense_cache", d)
        return self._dense_cache

    def scaled(self, c: float) -> "SymTensor":
        return SymTensor(self.p, self.N, self.values * c)

    def frobenius_sq(self) -> float:
        tbl = _table(self.p, self.N)
        return float(np.dot(tbl.orbit.astype(np.float64), self.values**2))

    def __repr__(self) -> str:
        return f"SymTensor(p={self.p}, N={self.N}, {len(self.values)} packed entries)"


# ---------------------------------------------------------------------------
# entry ensembles
# ---------------------------------------------------------------------------

KINDS = (
    "gaussian-gote",
    "gaussian-offdiag-only",
    "rademacher",
    "uniform",
    "symmetrized-pareto",
)


@dataclass(frozen=True)
class EntryDistribution:
    """Law of the unscaled tensor entries, all centered and symmetric.

    All kinds except ``gaussian-offdiag-only`` put the invariant variance
    profile prod_a c_a! / (p-1)! on every entry type; the off-diagonal-only
    kind keeps the off-diagonal variance 1/(p-1)! and gives diagonal types
    that same flat value (only the off-diagonal variance matters for the
    limit).  ``symmetrized-pareto`` has Pareto tails of the given index and
    no closed-form high moments, so it is Monte Carlo only.
    """

    kind: str
    tail_index: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown entry distribution {self.kind!r}")
        if self.kind == "symmetrized-pareto":
            if self.tail_index is None or self.tail_index <= 2:
                raise ContractViolation("symmetrized-pareto needs tail_index > 2")
        elif self.tail_index is not None:
            raise ContractViolation("tail_index only applies to symmetrized-pareto")

    @classmethod
    def from_string(cls, text: str) -> "EntryDistribution":
        """Parse e.g. ``"rademacher"`` or ``"symmetrized-pareto:3.5"``."""
        if ":" in text:
            kind, arg = text.split(":", 1)
            return cls(kind, float(arg))
        return cls(text)

    @property
    def flat_profile(self) -> bool:
        return self.kind == "gaussian-offdiag-only"

    @property
    def has_exact_moments(self) -> bool:
        return self.kind != "symmetrized-pareto"

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Unit-variance raw variates."""
        if self.kind in ("gaussian-gote", "gaussian-offdiag-only"):
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
        if self.kind == "uniform":
            r = math.sqrt(3.0)
            return rng.uniform(-r, r, size)
        alpha = self.tail_index
        mag = rng.random(size) ** (-1.0 / alpha)
        sign = rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
        return sign * mag / math.sqrt(alpha / (alpha - 2.0))

    def moment(self, m: int, sigma2: Fraction) -> Fraction:
        """Exact E[X^m] for an entry of variance sigma2."""
        if not self.has_exact_moments:
            raise ContractViolation(
                "symmetrized-pareto entries have no exact moment oracle"
            )
        if m % 2:
            return Fraction(0)
        half = m // 2
        if self.kind in ("gaussian-gote", "gaussian-offdiag-only"):
            return Fraction(math.prod(range(1, m, 2))) * sigma2**half
        if self.kind == "rademacher":
            return sigma2**half
        # uniform on [-a, a] with a^2 = 3 sigma2
        return (Fraction(3) * sigma2) ** half / (m + 1)


GAUSSIAN_GOTE = EntryDistribution("gaussian-gote")
RADEMACHER = EntryDistribution("rademacher")


def entry_sigma2(dist: EntryDistribution, p: int, multiplicities: Sequence[int]) -> Fraction:
    """Exact variance of an unscaled entry whose index has the given
    multiplicity pattern (counts summing to p)."""
    if dist.flat_profile:
        return Fraction(1, math.factorial(p - 1))
    num = math.prod(math.factorial(c) for c in multiplicities)
    return Fraction(num, math.factorial(p - 1))


def sample_wigner(p: int, N: int, dist: EntryDistribution, seed) -> SymTensor:
    """One independent draw per sorted multi-index, scaled so the unscaled
    off-diagonal variance 1/(p-1)! becomes 1/((p-1)! N^{p-1})."""
    if p < 1:
        raise ContractViolation("p must be at least 1")
    tbl = _table(p, N)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    raw = dist.draw(rng, tbl.size)
    if dist.flat_profile:
        sigma = math.sqrt(1.0 / math.factorial(p - 1)) * np.ones(tbl.size)
    else:
        sigma = np.sqrt(tbl.sigma2)
    scale = float(N) ** (-(p - 1) / 2.0)
    return SymTensor(p, N, raw * sigma * scale)


def sample_gote(p: int, N: int, seed) -> SymTensor:
    """Gaussian orthogonal tensor ensemble, normalised by N^{(p-1)/2}."""
    return sample_wigner(p, N, GAUSSIAN_GOTE, seed)


# ---------------------------------------------------------------------------
# contractions and invariants
# ---------------------------------------------------------------------------


def contract(T: SymTensor, vectors: Sequence[np.ndarray]) -> SymTensor:
    """Contract the first k legs against the given vectors; the result is the
    symmetric tensor of order p-k."""
    k = len(vectors)
    if k > T.p:
        raise ContractViolation(f"cannot contract {k} legs of an order-{T.p} tensor")
    if k == 0:
        return T
    out = T.to_dense()
    for v in vectors:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (T.N,):
            raise ContractViolation(f"vector of shape {v.shape}, expected ({T.N},)")
        out = np.tensordot(v, out, axes=(0, 0))
    return SymTensor.from_dense(T.p - k, T.N, out)


def multilinear_transform(T: SymTensor, U: np.ndarray) -> SymTensor:
    """(U . T)_{i1..ip} = sum_j T_{j1..jp} U_{i1 j1} ... U_{ip jp}."""
    U = np.asarray(U, dtype=np.float64)
    if U.shape != (T.N, T.N):
        raise ContractViolation("U must be an N x N matrix")
    p = T.p
    ins = _EINSUM_LETTERS[:p]
    outs = _EINSUM_LETTERS[p : 2 * p]
    eq = ins + "," + ",".join(o + i for o, i in zip(outs, ins)) + "->" + outs
    dense = np.einsum(eq, T.to_dense(), *([U] * p), optimize="greedy")
    return SymTensor.from_dense(p, T.N, dense)


def _vertex_edge_ids(b: CombinatorialMap) -> list[tuple[int, ...]]:
    """For each vertex, the edge index of every halfedge in cycle order."""
    edge_of = {}
    for i, (h, k) in enumerate(edge_list(b)):
        edge_of[h] = i
        edge_of[k] = i
    return [tuple(edge_of[h] for h in cyc) for cyc in cycles(b.sigma)]


_PATH_CACHE: dict = {}


def trace_invariant(b: CombinatorialMap, T: SymTensor) -> float:
    """Tr_b(T): sum over edge-index assignments of the product of one tensor
    entry per vertex, evaluated as a tensor-network contraction with a greedy
    elimination order."""
    if b.p != T.p:
        raise ContractViolation(f"map order {b.p} != tensor order {T.p}")
    verts = _vertex_edge_ids(b)
    m = b.size // 2
    if m > _MAX_EDGES:
        raise ResourceLimitError(f"{m} edges exceeds the contraction guard")
    eq = ",".join("".join(_EINSUM_LETTERS[e] for e in vert) for vert in verts) + "->"
    dense = T._dense()
    operands = [dense] * len(verts)
    key = (eq, T.N)
    path = _PATH_CACHE.get(key)
    if path is None:
        # allow intermediates up to order 4 (capped), else the path search
        # degrades to the naive full loop on expander-like maps
        budget = min(max(T.N**4, T.N**T.p), 1 << 26)
        path = np.einsum_path(eq, *operands, optimize=("greedy", budget))[0]
        _PATH_CACHE[key] = path
    return float(np.einsum(eq, *operands, optimize=path))


def injective_trace(b: CombinatorialMap, pi: EdgePartition, T: SymTensor) -> float:
    """Tr0_{b_pi}(T): the same sum restricted to pairwise-distinct block
    indices, by direct iteration."""
    if b.p != T.p:
        raise ContractViolation(f"map order {b.p} != tensor order {T.p}")
    edges = edge_list(b)
    if pi.m != len(edges):
        raise ContractViolation("partition does not match the edge set")
    block_of = {}
    for bi, block in enumerate(pi.blocks):
        for e in block:
            block_of[e] = bi
    verts = [
        tuple(block_of[e] for e in vert) for vert in _vertex_edge_ids(b)
    ]
    r = len(pi)
    N = T.N
    if r > N:
        return 0.0
    if math.perm(N, r) > _INJECTIVE_TERM_GUARD:
        raise ResourceLimitError("too many injective assignments; lower N or |pi|")
    total = []
    for assign in itertools.permutations(range(N), r):
        prod = 1.0
        for vert in verts:
            prod *= T[tuple(assign[v] for v in vert)]
        total.append(prod)
    return math.fsum(total)


def _multigraph_key(b: CombinatorialMap):
    """Canonical form of G(b) under vertex relabelling (exact for n <= 8)."""
    edges = multigraph(b)
    n = b.n
    if n > 8:
        return ("raw", tuple(sorted(edges)), id(b))
    best = None
    for perm in itertools.permutations(range(n)):
        relab = tuple(sorted(tuple(sorted((perm[u], perm[v]))) for u, v in edges))
        if best is None or relab < best:
            best = relab
    return best


@lru_cache(maxsize=None)
def _trace_classes(p: int, n: int) -> tuple[tuple[CombinatorialMap, int], ...]:
    """Group the maps of B_n^(p) by multigraph isomorphism; Tr_b of a
    symmetric tensor only depends on that class."""
    groups: dict = {}
    for b in rooted_connected(p, n):
        groups.setdefault(_multigraph_key(b), []).append(b)
    return tuple((members[0], len(members)) for members in groups.values())


def balanced_invariant(n: int, T: SymTensor) -> float:
    """I_n(T) = sum of Tr_b(T) over the rooted connected p-regular maps with
    n vertices; N by convention at n = 0."""
    if n < 0:
        raise ContractViolation("n must be nonnegative")
    if n == 0:
        return float(T.N)
    if T.p < 2:
        raise ContractViolation("balanced invariants need tensor order >= 2")
    return math.fsum(
        count * trace_invariant(rep, T) for rep, count in _trace_classes(T.p, n)
    )


def resolvent_series(T: SymTensor, z: complex, K: int) -> complex:
    """Truncated moment expansion sum_{n<=K} I_n(T) / (N z^{n+1})."""
    if K < 0:
        raise ContractViolation("K must be nonnegative")
    if z == 0:
        raise ContractViolation("z must be nonzero")
    z = complex(z)
    total = 0j
    for n in range(K + 1):
        total += balanced_invariant(n, T) / (T.N * z ** (n + 1))
    return total


# ---------------------------------------------------------------------------
# exact expectations
# ---------------------------------------------------------------------------


def _scale_exact(total: Fraction, n: int, p: int, N: int) -> Fraction:
    if total == 0:
        return Fraction(0)
    assert n % 2 == 0  # nonzero expectations need an even number of factors
    return total / Fraction(N ** ((n // 2) * (p - 1)))


def expected_trace_exhaustive(
    b: CombinatorialMap, N: int, dist: EntryDistribution
) -> Fraction:
    """E[Tr_b(W_N)] by brute force over all edge-index assignments.

    Entry factors landing on the same sorted multi-index are grouped and
    their joint moment read off the distribution's exact oracle; independence
    up to symmetry does the rest.  Exact rational output.
    """
    verts = _vertex_edge_ids(b)
    m = len(edge_list(b))
    if N**m > _EXHAUSTIVE_TERM_GUARD:
        raise ResourceLimitError(f"{N}^{m} assignments exceed the exhaustive guard")
    p = b.p
    moment_memo: dict = {}
    total = Fraction(0)
    for assign in itertools.product(range(N), repeat=m):
        groups = Counter(tuple(sorted(assign[e] for e in vert)) for vert in verts)
        term = Fraction(1)
        for tup, cnt in groups.items():
            pattern = tuple(sorted(Counter(tup).values()))
            key = (cnt, pattern)
            mom = moment_memo.get(key)
            if mom is None:
                mom = dist.moment(cnt, entry_sigma2(dist, p, pattern))
                moment_memo[key] = mom
            if mom == 0:
                term = Fraction(0)
                break
            term *= mom
        total += term
    return _scale_exact(total, b.n, p, N)


def expected_trace_partitions(
    b: CombinatorialMap, N: int, dist: EntryDistribution
) -> Fraction:
    """E[Tr_b(W_N)] as a sum over edge partitions of injective-trace
    expectations.

    For each partition pi, the folded dual hypergraph H(dual(b_pi)) carries
    one moment factor per distinct hyperedge; every injective assignment of
    the |pi| blocks contributes that same product, N falling-factorial |pi|
    times.  Exact rational output; agrees with the exhaustive route.
    """
    m = len(edge_list(b))
    if m > _PARTITION_EDGE_GUARD:
        raise ResourceLimitError(f"Bell({m}) partitions exceed the partition guard")
    p = b.p
    from .maps import enumerate_edge_partitions

    total = Fraction(0)
    for pi in enumerate_edge_partitions(m):
        H = hypergraph_of(dual(merge_edges(b, pi)))
        factor = Fraction(1)
        for e, mult in zip(H.edges, H.mult):
            pattern = tuple(sorted(Counter(e).values()))
            mom = dist.moment(mult, entry_sigma2(dist, p, pattern))
            if mom == 0:
                factor = Fraction(0)
                break
            factor *= mom
        if factor:
            total += math.perm(N, len(pi)) * factor
    return _scale_exact(total, b.n, p, N)


def expected_balanced_invariant(
    p: int, n: int, N: int, dist: EntryDistribution
) -> Fraction:
    """Exact E[I_n(W_N)] by summing the partition oracle over the maps."""
    if n == 0:
        return Fraction(N)
    return sum(
        (expected_trace_partitions(b, N, dist) for b in rooted_connected(p, n)),
        Fraction(0),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def save_tensor(T: SymTensor, path) -> None:
    """Binary little-endian: uint32 p, uint32 N, then the packed float64
    payload in colex multi-index order."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", T.p, T.N))
        fh.write(T.values.astype("<f8").tobytes())


def load_tensor(path) -> SymTensor:
    with open(path, "rb") as fh:
        p, N = struct.unpack("<II", fh.read(8))
        values = np.frombuffer(fh.read(), dtype="<f8")
    return SymTensor(p, N, values)


def tensor_to_json(T: SymTensor) -> dict:
    return {"p": T.p, "N": T.N, "values": T.values.tolist()}


def tensor_from_json(obj: dict | str) -> SymTensor:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return SymTensor(obj["p"], obj["N"], np.asarray(obj["values"]))
