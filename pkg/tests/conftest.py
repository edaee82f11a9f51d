"""Shared test oracles, deliberately independent of the library code paths
they cross-check: a matching-based enumerator, a nested-loop trace evaluator,
and small combinatorial helpers."""

import itertools
import random

import numpy as np
import pytest

from melonic.maps import CombinatorialMap, Permutation, canonical_code, is_connected


def canonical_sigma(p: int, n: int) -> Permutation:
    image = []
    for v in range(n):
        base = v * p
        image.extend(base + (i + 1) % p for i in range(p))
    return Permutation(image)


def all_matchings(nq: int):
    """Every perfect matching on {0,...,nq-1}, smallest unmatched halfedge
    paired first."""

    def rec(unmatched):
        if not unmatched:
            yield []
            return
        h = unmatched[0]
        for i in range(1, len(unmatched)):
            rest = unmatched[1:i] + unmatched[i + 1 :]
            for rest_pairs in rec(rest):
                yield [(h, unmatched[i])] + rest_pairs

    yield from rec(list(range(nq)))


def brute_force_codes(p: int, n: int) -> set:
    """Canonical codes of the rooted connected classes, via exhaustive
    matching enumeration plus dedupe."""
    nq = n * p
    if nq % 2:
        return set()
    sigma = canonical_sigma(p, n)
    codes = set()
    for pairs in all_matchings(nq):
        image = list(range(nq))
        for a, b in pairs:
            image[a] = b
            image[b] = a
        m = CombinatorialMap(p, sigma, Permutation(image), root=0)
        if is_connected(m):
            codes.add(canonical_code(m))
    return codes


def naive_trace(b: CombinatorialMap, T) -> float:
    """Nested loop over all edge-index assignments, element lookups only."""
    from melonic.maps import cycles, edge_list

    edges = edge_list(b)
    edge_of = {}
    for i, (h, k) in enumerate(edges):
        edge_of[h] = i
        edge_of[k] = i
    verts = [tuple(edge_of[h] for h in c) for c in cycles(b.sigma)]
    total = 0.0
    for assign in itertools.product(range(T.N), repeat=len(edges)):
        prod = 1.0
        for vert in verts:
            prod *= T[tuple(assign[e] for e in vert)]
        total += prod
    return total


def random_permutation(rng: random.Random, n: int) -> Permutation:
    image = list(range(n))
    rng.shuffle(image)
    return Permutation(image)


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture
def nprng():
    return np.random.default_rng(20240817)
