"""Monte Carlo engine and exact finite-N tables for the desk-scale
verification runs.

Reproducibility contract: every sample draws from its own RNG substream
derived from (seed, N, stream tag, sample index), and aggregation reads the
samples in index order, so results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .counting import fuss_catalan
from .errors import ContractViolation, DomainError, ResourceLimitError
from .limitlaw import contracted_law, moment
from .maps import canonical_code, edge_list, rooted_connected
from .hypergraph import is_melonic_graph
from .tensor import (
    GAUSSIAN_GOTE,
    EntryDistribution,
    SymTensor,
    balanced_invariant,
    contract,
    expected_trace_partitions,
    resolvent_series,
    sample_gote,
    sample_wigner,
)

_HALFEDGE_GUARD = 22
_P2_VERTEX_GUARD = 64
_SAMPLE_STREAM = 0
_VECTOR_STREAM = 1


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, *key)))


def _check_enumeration_feasible(p: int, n_max: int) -> None:
    if p >= 3 and p * n_max > _HALFEDGE_GUARD:
        raise ResourceLimitError(
            f"p*n = {p * n_max} halfedges exceeds the enumeration guard ({_HALFEDGE_GUARD})"
        )
    if p == 2 and n_max > _P2_VERTEX_GUARD:
        raise ResourceLimitError(f"n = {n_max} exceeds the p=2 guard ({_P2_VERTEX_GUARD})")


@dataclass
class ExperimentConfig:
    """Shared knobs of the Monte Carlo subcommands."""

    p: int = 3
    n_max: int = 2
    N_grid: tuple[int, ...] = (16, 32)
    samples: int = 200
    seed: int = 1
    dist: EntryDistribution = GAUSSIAN_GOTE
    k: int = 0
    threads: int = 1
    out: Optional[str] = None
    fmt: str = "csv"

    def __post_init__(self):
        self.N_grid = tuple(self.N_grid)
        if isinstance(self.dist, str):
            self.dist = EntryDistribution.from_string(self.dist)
        if list(self.N_grid) != sorted(self.N_grid) or len(set(self.N_grid)) != len(self.N_grid):
            raise ContractViolation("N_grid must be strictly ascending")
        if not self.N_grid:
            raise ContractViolation("N_grid must not be empty")
        if any(N < 1 for N in self.N_grid):
            raise ContractViolation("dimensions must be positive")
        if self.samples < 2:
            raise ContractViolation("need at least 2 samples to estimate a variance")
        if self.threads < 1:
            raise ContractViolation("threads must be positive")
        if self.fmt not in ("csv", "json"):
            raise ContractViolation("format must be csv or json")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        kw = dict(obj)
        if "format" in kw:
            kw["fmt"] = kw.pop("format")
        if "dist" in kw and isinstance(kw["dist"], str):
            kw["dist"] = EntryDistribution.from_string(kw["dist"])
        if "N_grid" in kw:
            kw["N_grid"] = tuple(kw["N_grid"])
        return cls(**kw)


@dataclass
class MomentEstimate:
    """One Monte Carlo row: estimates of I_n/N at one dimension."""

    N: int
    n: int
    mean: float
    stderr: float
    variance: float
    target: float
    deviation: float


@dataclass
class HeavyTailEstimate:
    """Median-based row used for entry laws without high moments."""

    N: int
    n: int
    median: float
    iqr: float
    target: float


@dataclass
class MelonicLimitRow:
    """Exact expectations of one trace invariant along an N grid."""

    index: int
    code: tuple[int, ...]
    melonic: bool
    alpha: float
    values: tuple[float, ...]
    deviations: tuple[float, ...]
    slope: Optional[float]


@dataclass
class VarianceScaling:
    rows: tuple[tuple[int, float], ...]
    slope: float


@dataclass
class ResolventCheck:
    N: int
    z: complex
    K: int
    series: complex
    direct: complex
    gap: float
    tail_bound: float
    spectral_radius: float


def _collect(
    worker: Callable[[int], Sequence[float]], samples: int, threads: int
) -> np.ndarray:
    """Run the per-sample worker and stack results in sample order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, range(samples)))
    else:
        results = [worker(i) for i in range(samples)]
    return np.asarray(results, dtype=np.float64)


def _estimate_rows(
    N: int, ns: Sequence[int], data: np.ndarray, targets: Sequence[float]
) -> list[MomentEstimate]:
    rows = []
    for j, n in enumerate(ns):
        col = data[:, j]
        mean = float(np.mean(col))
        var = float(np.var(col, ddof=1))
        stderr = math.sqrt(var / len(col))
        rows.append(
            MomentEstimate(
                N=N,
                n=n,
                mean=mean,
                stderr=stderr,
                variance=var,
                target=targets[j],
                deviation=mean - targets[j],
            )
        )
    return rows


def mc_moments(cfg: ExperimentConfig) -> list[MomentEstimate]:
    """Sample Wigner tensors and estimate E[I_n/N] for every n <= n_max on
    the N grid, against the limiting moments."""
    _check_enumeration_feasible(cfg.p, cfg.n_max)
    ns = list(range(1, cfg.n_max + 1))
    targets = [float(moment(cfg.p, n)) for n in ns]
    rows: list[MomentEstimate] = []
    for N in cfg.N_grid:

        def worker(idx: int, N=N) -> list[float]:
            W = sample_wigner(cfg.p, N, cfg.dist, (cfg.seed, N, _SAMPLE_STREAM, idx))
            return [balanced_invariant(n, W) / N for n in ns]

        data = _collect(worker, cfg.samples, cfg.threads)
        rows.extend(_estimate_rows(N, ns, data, targets))
    return rows


def variance_scaling(cfg: ExperimentConfig) -> VarianceScaling:
    """Sample variances of I_n/N along a dyadic N grid, with the fitted
    log-log slope.

    The variance is O(1/N^2), so the slope should come out at or below -2;
    the matrix case sits at -2, higher orders decay faster at desk sizes.
    """
    if len(cfg.N_grid) < 2:
        raise ContractViolation("variance scaling needs at least two dimensions")
    for a, b in zip(cfg.N_grid, cfg.N_grid[1:]):
        if b != 2 * a:
            raise ContractViolation("N_grid must double between consecutive entries")
    _check_enumeration_feasible(cfg.p, cfg.n_max)
    n = cfg.n_max
    variances = []
    for N in cfg.N_grid:

        def worker(idx: int, N=N) -> list[float]:
            W = sample_wigner(cfg.p, N, cfg.dist, (cfg.seed, N, _SAMPLE_STREAM, idx))
            return [balanced_invariant(n, W) / N]

        data = _collect(worker, cfg.samples, cfg.threads)
        variances.append(float(np.var(data[:, 0], ddof=1)))
    slope = float(
        np.polyfit(np.log(np.asarray(cfg.N_grid, float)), np.log(variances), 1)[0]
    )
    return VarianceScaling(rows=tuple(zip(cfg.N_grid, variances)), slope=slope)


def melonic_limit_table(
    p: int, n: int, N_grid: Sequence[int], dist: EntryDistribution
) -> list[MelonicLimitRow]:
    """Exact E[Tr_b(W_N)]/N for every rooted connected map with n vertices,
    against the melonic limit alpha = (p-1)!^{-n/2}.

    The deviation column decays like 1/N; the fitted log-log slope is
    reported per map, or None when the map is exact at every N (deviation
    identically zero, which the flat variance profile produces on melonic
    maps).

    p >= 3 only: at p = 2 the single cycle map is folded by every
    non-crossing partition and its limit is a Catalan number, so the
    one-partition weight alpha does not describe it.
    """
    if p < 3:
        raise ContractViolation("the per-map limit table needs p >= 3")
    _check_enumeration_feasible(p, n)
    maps = rooted_connected(p, n)
    if maps and len(edge_list(maps[0])) > 9:
        raise ResourceLimitError("partition oracle guard: too many edges")
    alpha_melonic = Fraction(1, math.factorial(p - 1) ** (n // 2)) if n % 2 == 0 else Fraction(0)
    rows = []
    logN = np.log(np.asarray(N_grid, dtype=float))
    for i, b in enumerate(maps):
        melonic = is_melonic_graph(b)
        alpha = alpha_melonic if melonic else Fraction(0)
        values = [expected_trace_partitions(b, N, dist) / N for N in N_grid]
        devs = [abs(v - alpha) for v in values]
        if all(d > 0 for d in devs):
            slope = float(np.polyfit(logN, np.log([float(d) for d in devs]), 1)[0])
        else:
            slope = None
        rows.append(
            MelonicLimitRow(
                index=i,
                code=canonical_code(b).code,
                melonic=melonic,
                alpha=float(alpha),
                values=tuple(float(v) for v in values),
                deviations=tuple(float(d) for d in devs),
                slope=slope,
            )
        )
    return rows


def contraction_moments(
    p: int,
    k: int,
    N_grid: Sequence[int],
    n_max: int,
    samples: int,
    seed: int,
    threads: int = 1,
    random_unit: bool = False,
    dist: EntryDistribution = GAUSSIAN_GOTE,
) -> list[MomentEstimate]:
    """Moments of the k-fold contracted, N^{k/2}-rescaled Gaussian tensor
    against the dilated limit law of order p-k.

    Gaussian entries only (the contraction limit is proved in that case).
    The contraction vector is e^(1) (orthogonal invariance makes this free
    for the invariant ensemble); ``random_unit`` draws one deterministic unit
    vector per dimension instead.
    """
    if dist.kind not in ("gaussian-gote", "gaussian-offdiag-only"):
        raise ContractViolation("contraction experiments take Gaussian entries only")
    if dist.flat_profile and k >= 2:
        # with k indices pinned, diagonal-type variances enter the limit at
        # depth >= 2, so the flat profile would drift from the target law
        raise ContractViolation("the off-diagonal-only profile is valid for k <= 1 only")
    law = contracted_law(p, k)  # validates 0 <= k <= p-2
    _check_enumeration_feasible(p - k, n_max)
    ns = list(range(1, n_max + 1))
    targets = [float(law.moment(n)) for n in ns]
    rows: list[MomentEstimate] = []
    for N in N_grid:
        if random_unit:
            u = _rng(seed, N, _VECTOR_STREAM).standard_normal(N)
            u /= np.linalg.norm(u)
        else:
            u = np.zeros(N)
            u[0] = 1.0
        scale = float(N) ** (k / 2.0)

        def worker(idx: int, N=N, u=u, scale=scale) -> list[float]:
            W = sample_wigner(p, N, dist, (seed, N, _SAMPLE_STREAM, idx))
            tilde = contract(W, [u] * k).scaled(scale) if k else W
            return [balanced_invariant(n, tilde) / N for n in ns]

        data = _collect(worker, samples, threads)
        rows.extend(_estimate_rows(N, ns, data, targets))
    return rows


def heavy_tail_moments(
    p: int,
    n: int,
    N_grid: Sequence[int],
    samples: int,
    seed: int,
    tail_index: float,
    threads: int = 1,
    dist: Optional[EntryDistribution] = None,
) -> list[HeavyTailEstimate]:
    """Median and interquartile range of I_n/N under heavy-tailed entries.

    Convergence here is in probability only, so medians replace means; the
    interesting regime is tail index in (p, p+1), where exactly p absolute
    moments exist.  A different ``dist`` can be passed as a control.
    """
    if dist is None:
        dist = EntryDistribution("symmetrized-pareto", tail_index)
    _check_enumeration_feasible(p, n)
    target = float(moment(p, n))
    rows = []
    for N in N_grid:

        def worker(idx: int, N=N) -> list[float]:
            W = sample_wigner(p, N, dist, (seed, N, _SAMPLE_STREAM, idx))
            return [balanced_invariant(n, W) / N]

        data = _collect(worker, samples, threads)[:, 0]
        q25, q50, q75 = np.percentile(data, [25, 50, 75])
        rows.append(
            HeavyTailEstimate(N=N, n=n, median=float(q50), iqr=float(q75 - q25), target=target)
        )
    return rows


def resolvent_crosscheck(
    N: int,
    z: float,
    K: int,
    seed: int,
    tensor: Optional[SymTensor] = None,
    margin: float = 0.1,
) -> ResolventCheck:
    """p=2 consistency: the truncated moment expansion of the resolvent trace
    against the dense linear-algebra value (1/N) Tr((zI - M)^{-1}).

    The gap is bounded by the geometric tail (r/|z|)^{K+1} / (|z| - r) with r
    the spectral radius.
    """
    W = tensor if tensor is not None else sample_gote(2, N, (seed, N, _SAMPLE_STREAM, 0))
    if W.p != 2 or W.N != N:
        raise ContractViolation("resolvent cross-check needs an order-2 tensor of size N")
    dense = W.to_dense()
    radius = float(np.max(np.abs(np.linalg.eigvalsh(dense)))) if N else 0.0
    zc = complex(z)
    if abs(zc) <= radius + margin:
        raise DomainError(f"|z| = {abs(zc):.4g} too close to the spectrum (radius {radius:.4g})")
    series = resolvent_series(W, zc, K)
    direct = complex(np.trace(np.linalg.inv(zc * np.eye(N) - dense)) / N)
    gap = abs(series - direct)
    bound = (radius / abs(zc)) ** (K + 1) / (abs(zc) - radius)
    return ResolventCheck(
        N=N,
        z=zc,
        K=K,
        series=series,
        direct=direct,
        gap=gap,
        tail_bound=bound,
        spectral_radius=radius,
    )


def melonic_weight_closure(p: int, m: int) -> bool:
    """Exact cross-module identity: the melonic map count times the limiting
    per-map weight alpha equals the Fuss-Catalan moment,
    count * (p-1)!^{-m} == F_p(m)."""
    from .counting import count_melonic_maps

    lhs = Fraction(count_melonic_maps(p, m), math.factorial(p - 1) ** m)
    return lhs == fuss_catalan(p, m)
