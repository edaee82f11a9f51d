"""Combinatorial maps and hypermaps as permutation pairs on halfedges.

A map is a pair of permutations (sigma, tau) on the halfedge set
{0, ..., |Q|-1}: the cycles of sigma are the vertices, the cycles of tau the
(hyper)edges.  For a p-regular map every sigma-cycle has length p and tau is
a fixed-point-free involution; merging tau-cycles along an edge partition
yields a hypermap.  Rooted maps are marked at one halfedge and compared up to
root-preserving relabelling.

Edge indexing convention used throughout the package: the edges of a map are
its tau-cycles sorted by minimal halfedge, and an ``EdgePartition`` refers to
these indices.
"""

from __future__ import annotations

import json
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from .errors import ContractViolation, InvalidPartitionError


class Permutation:
    """A permutation of {0, ..., n-1} stored by its image array."""

    __slots__ = ("image",)

    def __init__(self, image: Sequence[int]):
        image = tuple(image)
        n = len(image)
        seen = [False] * n
        for v in image:
            if not 0 <= v < n or seen[v]:
                raise ContractViolation(f"not a bijection of range({n}): {image}")
            seen[v] = True
        object.__setattr__(self, "image", image)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    def __call__(self, h: int) -> int:
        return self.image[h]

    def __len__(self) -> int:
        return len(self.image)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __repr__(self) -> str:
        return f"Permutation({list(self.image)})"

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for h, v in enumerate(self.image):
            inv[v] = h
        return Permutation(inv)

    def conjugate(self, theta: "Permutation") -> "Permutation":
        """Return theta o self o theta^{-1}."""
        n = len(self.image)
        if len(theta) != n:
            raise ContractViolation("conjugating permutation acts on a different set")
        out = [0] * n
        for h in range(n):
            out[theta(h)] = theta(self(h))
        return Permutation(out)

    def is_involution(self) -> bool:
        return all(self(self(h)) == h for h in range(len(self)))

    def has_fixed_point(self) -> bool:
        return any(self(h) == h for h in range(len(self)))


def cycles(perm: Permutation) -> list[tuple[int, ...]]:
    """Cycle decomposition; each cycle starts at its minimal element and the
    list is sorted by those minima.

    >>> cycles(Permutation([1, 2, 0, 4, 5, 3]))
    [(0, 1, 2), (3, 4, 5)]
    >>> cycles(Permutation([0, 1, 2]))
    [(0,), (1,), (2,)]
    """
    n = len(perm)
    seen = [False] * n
    out = []
    for start in range(n):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        h = perm(start)
        while h != start:
            seen[h] = True
            cyc.append(h)
            h = perm(h)
        out.append(tuple(cyc))
    return out


class Hypermap:
    """Pair of permutations on a common halfedge set, optionally rooted.

    Vertices are the cycles of ``sigma``, hyperedges the cycles of ``tau``.
    """

    __slots__ = ("sigma", "tau", "root")

    def __init__(self, sigma: Permutation, tau: Permutation, root: Optional[int] = None):
        if len(sigma) != len(tau):
            raise ContractViolation("sigma and tau act on different halfedge sets")
        if root is not None and not 0 <= root < len(sigma):
            raise ContractViolation(f"root {root} outside halfedge range")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "root", root)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def size(self) -> int:
        """Number of halfedges."""
        return len(self.sigma)

    def vertices(self) -> list[tuple[int, ...]]:
        return cycles(self.sigma)

    def hyperedges(self) -> list[tuple[int, ...]]:
        return cycles(self.tau)

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and self.sigma == other.sigma
            and self.tau == other.tau
            and self.root == other.root
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.sigma, self.tau, self.root))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(sigma={list(self.sigma.image)}, tau={list(self.tau.image)}, root={self.root})"


class CombinatorialMap(Hypermap):
    """p-regular combinatorial map: sigma has only p-cycles and tau is a
    fixed-point-free involution (every edge is a 2-cycle)."""

    __slots__ = ("p",)

    def __init__(self, p: int, sigma: Permutation, tau: Permutation, root: Optional[int] = None):
        super().__init__(sigma, tau, root)
        if p < 2:
            raise ContractViolation("vertex valence p must be at least 2")
        if any(len(c) != p for c in cycles(sigma)):
            raise ContractViolation("sigma has a cycle of length != p")
        if not tau.is_involution() or tau.has_fixed_point():
            raise ContractViolation("tau must be a fixed-point-free involution")
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        """Number of vertices."""
        return self.size // self.p

    def __hash__(self) -> int:
        return hash((self.p, self.sigma, self.tau, self.root))

    def __eq__(self, other) -> bool:
        return super().__eq__(other) and self.p == other.p


class EdgePartition:
    """Set partition of the edge index range {0, ..., m-1}.

    Blocks are normalised to sorted tuples, listed by minimal element.
    """

    __slots__ = ("blocks", "m")

    def __init__(self, blocks, m: Optional[int] = None):
        norm = sorted(tuple(sorted(b)) for b in blocks)
        flat = [e for b in norm for e in b]
        size = m if m is not None else len(flat)
        if sorted(flat) != list(range(size)) or any(not b for b in norm):
            raise InvalidPartitionError(f"blocks {list(blocks)} do not partition range({size})")
        object.__setattr__(self, "blocks", tuple(norm))
        object.__setattr__(self, "m", size)

    def __setattr__(self, name, value):
        raise AttributeError("EdgePartition is immutable")

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, EdgePartition) and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.blocks)

    def __repr__(self) -> str:
        return f"EdgePartition({[list(b) for b in self.blocks]})"

    @classmethod
    def singletons(cls, m: int) -> "EdgePartition":
        return cls([(e,) for e in range(m)], m)


class CanonicalCode:
    """Root-preserving relabelling invariant of a rooted connected map.

    Two rooted maps have equal codes iff some halfedge relabelling carries one
    onto the other and maps root to root.
    """

    __slots__ = ("code",)

    def __init__(self, code: Sequence[int]):
        object.__setattr__(self, "code", tuple(code))

    def __setattr__(self, name, value):
        raise AttributeError("CanonicalCode is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, CanonicalCode) and self.code == other.code

    def __lt__(self, other) -> bool:
        return self.code < other.code

    def __hash__(self) -> int:
        return hash(self.code)

    def __repr__(self) -> str:
        return f"CanonicalCode({list(self.code)})"


def dual(b: Hypermap) -> Hypermap:
    """The dual hypermap (tau, sigma); vertices and hyperedges swap roles."""
    return Hypermap(b.tau, b.sigma, b.root)


def relabel(b: Hypermap, theta: Permutation) -> Hypermap:
    """Conjugate both permutations by theta (and move the root along)."""
    sigma = b.sigma.conjugate(theta)
    tau = b.tau.conjugate(theta)
    root = None if b.root is None else theta(b.root)
    if isinstance(b, CombinatorialMap):
        return CombinatorialMap(b.p, sigma, tau, root)
    return Hypermap(sigma, tau, root)


def edge_list(b: CombinatorialMap) -> list[tuple[int, int]]:
    """Edges as halfedge pairs (h, tau(h)) with h < tau(h), sorted by h.

    The position in this list is the edge index used by ``EdgePartition``.
    """
    return [tuple(c) for c in cycles(b.tau)]


def vertex_of_halfedge(b: Hypermap) -> list[int]:
    """Array mapping each halfedge to the index of its sigma-cycle."""
    vid = [0] * b.size
    for i, cyc in enumerate(cycles(b.sigma)):
        for h in cyc:
            vid[h] = i
    return vid


def multigraph(b: CombinatorialMap) -> list[tuple[int, int]]:
    """The underlying multigraph G(b): one sorted vertex pair per edge,
    in edge-index order (self-loops appear as (v, v))."""
    vid = vertex_of_halfedge(b)
    return [tuple(sorted((vid[h], vid[k]))) for h, k in edge_list(b)]


def merge_edges(b: CombinatorialMap, pi: EdgePartition) -> Hypermap:
    """The hypermap b_pi: tau-cycles within one block of pi are merged.

    The merged cycle concatenates the member 2-cycles sorted by minimal
    halfedge.  Downstream evaluation only reads which halfedges share a
    hyperedge, so the cyclic order inside a merged cycle is a free choice;
    this one makes the output deterministic.
    """
    edges = edge_list(b)
    if pi.m != len(edges):
        raise InvalidPartitionError(
            f"partition of {pi.m} edges applied to a map with {len(edges)} edges"
        )
    image = list(range(b.size))
    for block in pi.blocks:
        run = [h for e in block for h in edges[e]]
        for i, h in enumerate(run):
            image[h] = run[(i + 1) % len(run)]
    return Hypermap(b.sigma, Permutation(image), b.root)


def is_connected(b: Hypermap) -> bool:
    """True iff the group generated by sigma and tau acts transitively on the
    halfedges."""
    nq = b.size
    if nq == 0:
        return True
    seen = [False] * nq
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        h = stack.pop()
        for g in (b.sigma(h), b.tau(h)):
            if not seen[g]:
                seen[g] = True
                count += 1
                stack.append(g)
    return count == nq


def _bfs_labels(b: Hypermap) -> list[int]:
    """Discovery index of every halfedge under the deterministic traversal
    from the root (advance along sigma, then cross tau).  -1 if unreached."""
    label = [-1] * b.size
    label[b.root] = 0
    queue = [b.root]
    head = 0
    nxt = 1
    while head < len(queue):
        h = queue[head]
        head += 1
        for g in (b.sigma(h), b.tau(h)):
            if label[g] == -1:
                label[g] = nxt
                nxt += 1
                queue.append(g)
    return label


def canonical_code(b: CombinatorialMap) -> CanonicalCode:
    """Relabel halfedges by traversal discovery order from the root and read
    off the permutation images.

    The traversal order is equivariant under root-preserving relabelling, so
    equal codes characterise equivalent rooted maps.
    """
    if b.root is None:
        raise ContractViolation("canonical_code requires a rooted map")
    label = _bfs_labels(b)
    if min(label) < 0:
        raise ContractViolation("canonical_code requires a connected map")
    nq = b.size
    sig = [0] * nq
    tau = [0] * nq
    for h in range(nq):
        sig[label[h]] = label[b.sigma(h)]
        tau[label[h]] = label[b.tau(h)]
    return CanonicalCode((b.p, b.n, *sig, *tau))


def _canonical_sigma(p: int, n: int) -> Permutation:
    """n consecutive p-cycles (0,...,p-1)(p,...,2p-1)..."""
    image = []
    for v in range(n):
        base = v * p
        image.extend(base + (i + 1) % p for i in range(p))
    return Permutation(image)


def enumerate_rooted_connected(p: int, n: int) -> list[CombinatorialMap]:
    """All rooted connected p-regular maps with n vertices, one canonical
    representative per root-preserving relabelling class, sorted by code.

    sigma is fixed as n consecutive p-cycles and the root is halfedge 0,
    which loses no generality.  Rather than enumerating all perfect matchings
    and deduplicating, the search generates exactly one matching per class:
    rooting makes the relabelling action free, and each class contains a
    unique matching for which the root traversal discovers vertices in index
    order, entering each new vertex at its first halfedge.  Branching is
    restricted to such traversal-normal matchings.

    Returns the empty list when n*p is odd (no perfect matching exists).
    """
    if p < 2:
        raise ContractViolation("p must be at least 2")
    if n < 1:
        raise ContractViolation("n must be at least 1")
    nq = n * p
    if nq % 2:
        return []
    sigma = _canonical_sigma(p, n)
    sig = sigma.image
    tau = [-1] * nq
    labeled = [False] * nq
    order: list[int] = []
    found: list[tuple[int, ...]] = []

    def mark(h: int) -> None:
        labeled[h] = True
        order.append(h)

    def unmark() -> None:
        labeled[order.pop()] = False

    def search(pos: int, disc: int) -> None:
        fresh_marks = 0
        while pos < len(order):
            h = order[pos]
            s = sig[h]
            if not labeled[s]:
                mark(s)
                fresh_marks += 1
            t = tau[h]
            if t == -1:
                cands = [g for g in range(disc * p) if tau[g] == -1 and g != h]
                if disc < n:
                    cands.append(disc * p)
                for g in cands:
                    new_vertex = g == disc * p
                    tau[h] = g
                    tau[g] = h
                    sub = not labeled[g]
                    if sub:
                        mark(g)
                    search(pos + 1, disc + 1 if new_vertex else disc)
                    if sub:
                        unmark()
                    tau[h] = -1
                    tau[g] = -1
                for _ in range(fresh_marks):
                    unmark()
                return
            if not labeled[t]:
                mark(t)
                fresh_marks += 1
            pos += 1
        if disc == n and len(order) == nq:
            found.append(tuple(tau))
        for _ in range(fresh_marks):
            unmark()

    mark(0)
    search(0, 1)
    unmark()
    maps = [CombinatorialMap(p, sigma, Permutation(t), root=0) for t in found]
    maps.sort(key=canonical_code)
    return maps


@lru_cache(maxsize=None)
def rooted_connected(p: int, n: int) -> tuple[CombinatorialMap, ...]:
    """Cached tuple version of :func:`enumerate_rooted_connected`."""
    return tuple(enumerate_rooted_connected(p, n))


def enumerate_edge_partitions(m: int) -> Iterator[EdgePartition]:
    """All set partitions of {0, ..., m-1}, in restricted-growth-string order.

    Yields Bell(m) partitions.
    """
    if m < 1:
        raise ContractViolation("m must be at least 1")
    rgs = [0] * m

    def gen(i: int, nblocks: int):
        if i == m:
            blocks: list[list[int]] = [[] for _ in range(nblocks)]
            for e, blk in enumerate(rgs):
                blocks[blk].append(e)
            yield EdgePartition(blocks, m)
            return
        for blk in range(nblocks + 1):
            rgs[i] = blk
            yield from gen(i + 1, max(nblocks, blk + 1))

    yield from gen(0, 0)


def map_to_json(b: CombinatorialMap) -> dict:
    """JSON-serialisable description used by the CLI."""
    return {
        "p": b.p,
        "n": b.n,
        "sigma": list(b.sigma.image),
        "tau": list(b.tau.image),
        "root": b.root,
    }


def map_from_json(obj: dict | str) -> CombinatorialMap:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return CombinatorialMap(
        obj["p"], Permutation(obj["sigma"]), Permutation(obj["tau"]), obj.get("root")
    )
