"""Node-group extraction: a group of nodes S together with a linking pattern
T, scored by how much denser the S-T connections are than the S-to-rest
connections, found by random-restart hill climbing and kept only when the
score beats the same search on a matched Erdos-Renyi random graph.

Group taxonomy follows the Jaccard index of S and T: S = T is a community,
disjoint S and T form a module (structurally equivalent nodes sharing the
same neighbors), anything in between is a mixture.

The objective is

    score(S, T) = sqrt(links(S, T)) * (links(S, T) / pairs(S, T)
                                       - links(S, Tc) / pairs(S, Tc))

where pairs(X, Y) counts unordered pairs {u, v}, u != v, with one endpoint
in X and the other in Y, Tc is the complement of T, and a density term is
zero whenever its pair count is zero. Links with both endpoints outside S
never contribute. The sqrt factor rewards larger groups so that a single
dense pair cannot dominate, while keeping sparse giant groups (in the
extreme, S = T = the whole graph) below any genuinely dense structure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import get_context
from typing import Iterable, Optional

import numpy as np

from . import _climb
from .graph import Graph, GraphError, RngLike, as_generator, erdos_renyi_gnm

__all__ = [
    "GroupKind",
    "NodeGroup",
    "ExtractionConfig",
    "ExtractionResult",
    "BestGroup",
    "links_between",
    "group_objective",
    "jaccard",
    "classify_group",
    "hill_climb",
    "null_threshold",
    "extract_groups",
]


class GroupKind(enum.Enum):
    COMMUNITY = "community"
    MIXTURE = "mixture"
    MODULE = "module"


@dataclass(frozen=True)
class NodeGroup:
    """One extracted group: members S, linking pattern T, and its stats."""

    members: frozenset
    pattern: frozenset
    score: float
    tau: Fraction
    kind: GroupKind
    order: int

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def pattern_size(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs of the sequential extraction loop.

    threshold_mode selects whether the significance threshold is recalibrated
    on each residual graph ("per_iteration", default) or computed once for
    the input graph and reused ("initial").
    """

    restarts: int = 10
    null_runs: int = 100
    percentile: float = 99.0
    max_groups: Optional[int] = None
    threshold_mode: str = "per_iteration"

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise GraphError("restarts must be >= 1")
        if self.null_runs < 1:
            raise GraphError("null_runs must be >= 1")
        if not 0.0 < self.percentile < 100.0:
            raise GraphError("percentile must lie strictly between 0 and 100")
        if self.max_groups is not None and self.max_groups < 0:
            raise GraphError("max_groups must be non-negative")
        if self.threshold_mode not in ("per_iteration", "initial"):
            raise GraphError(f"unknown threshold_mode {self.threshold_mode!r}")


@dataclass(frozen=True)
class ExtractionResult:
    groups: tuple[NodeGroup, ...]
    residual_n: int
    residual_m: int
    thresholds: tuple[float, ...]


@dataclass(frozen=True)
class BestGroup:
    members: frozenset
    pattern: frozenset
    score: float


# -- objective, evaluated directly from node sets ----------------------------

def _admissible_pairs(x: int, y: int, inter: int) -> int:
    return x * y - inter - inter * (inter - 1) // 2


def links_between(g: Graph, s_nodes: Iterable[int], t_nodes: Iterable[int]) -> int:
    """Number of links with one endpoint in S and the other in T; a link
    inside the intersection counts once."""
    in_s = np.zeros(g.n, dtype=bool)
    in_t = np.zeros(g.n, dtype=bool)
    in_s[g._require_indices(s_nodes)] = True
    in_t[g._require_indices(t_nodes)] = True
    u, v = g._u, g._v
    hit = (in_s[u] & in_t[v]) | (in_s[v] & in_t[u])
    return int(np.count_nonzero(hit))


def group_objective(g: Graph, s_nodes: Iterable[int], t_nodes: Iterable[int]) -> float:
    """Score of a candidate (S, T); see the module docstring for the formula.

    Raises GraphError for empty S or T or unknown nodes.
    """
    s = frozenset(int(x) for x in s_nodes)
    t = frozenset(int(x) for x in t_nodes)
    if not s or not t:
        raise GraphError("S and T must be nonempty")
    inter = len(s & t)
    pi_st = _admissible_pairs(len(s), len(t), inter)
    d = len(s) - inter
    pi_stc = _admissible_pairs(len(s), g.n - len(t), d)
    in_s = np.zeros(g.n, dtype=bool)
    in_t = np.zeros(g.n, dtype=bool)
    in_s[g._require_indices(s)] = True
    in_t[g._require_indices(t)] = True
    u, v = g._u, g._v
    l_st = int(np.count_nonzero((in_s[u] & in_t[v]) | (in_s[v] & in_t[u])))
    l_stc = int(np.count_nonzero((in_s[u] & ~in_t[v]) | (in_s[v] & ~in_t[u])))
    if l_st == 0:
        return 0.0
    term_a = l_st / pi_st
    term_b = l_stc / pi_stc if pi_stc > 0 else 0.0
    return math.sqrt(l_st) * (term_a - term_b)


def jaccard(s_nodes: Iterable[int], t_nodes: Iterable[int]) -> Fraction:
    """Exact Jaccard index |S & T| / |S | T| as a Fraction."""
    s = frozenset(s_nodes)
    t = frozenset(t_nodes)
    union = s | t
    if not union:
        raise GraphError("S and T may not both be empty")
    return Fraction(len(s & t), len(union))


def classify_group(s_nodes: Iterable[int], t_nodes: Iterable[int]) -> GroupKind:
    """Community iff S == T, module iff S and T are disjoint, else mixture.

    Decided on exact set relations, never on floating-point values.
    """
    s = frozenset(s_nodes)
    t = frozenset(t_nodes)
    if not (s | t):
        raise GraphError("S and T may not both be empty")
    if s == t:
        return GroupKind.COMMUNITY
    if not (s & t):
        return GroupKind.MODULE
    return GroupKind.MIXTURE


# -- hill climbing ------------------------------------------------------------

def _hill_climb_masks(g: Graph, gen: np.random.Generator, restarts: int):
    """Best (score, S mask, T mask) over independent restarts; ties keep the
    earliest restart."""
    if g.m < 1:
        raise GraphError("hill climbing requires a graph with at least one link")
    if restarts < 1:
        raise GraphError("restarts must be >= 1")
    # per-restart draws are taken up front so restarts are order-independent
    seed_nodes = gen.integers(0, g.n, size=restarts)
    rng_seeds = gen.integers(0, 2**31 - 1, size=restarts)
    best = None
    for k in range(restarts):
        w, in_s, in_t = _climb.restart_climb(
            g._indptr, g._nbrs, g._deg, g._u, g._v,
            int(seed_nodes[k]), int(rng_seeds[k]),
        )
        if best is None or w > best[0] + _climb.EPS:
            best = (w, in_s, in_t)
    return best


def hill_climb(g: Graph, rng: RngLike, restarts: int = 10) -> BestGroup:
    """Best (S, T) found by `restarts` climbs, each starting from the closed
    neighborhood of a uniformly chosen node and applying first-improving
    single-node moves in uniformly random scan order."""
    gen = as_generator(rng)
    w, in_s, in_t = _hill_climb_masks(g, gen, restarts)
    labels = g.labels
    return BestGroup(
        members=frozenset(labels[in_s].tolist()),
        pattern=frozenset(labels[in_t].tolist()),
        score=w,
    )


# -- null model threshold ------------------------------------------------------

def _null_trial(args) -> float:
    n, m, restarts, seed = args
    gen = np.random.default_rng(seed)
    g = erdos_renyi_gnm(n, m, gen)
    return _hill_climb_masks(g, gen, restarts)[0]


def _nearest_rank(values: list[float], percentile: float) -> float:
    ranked = sorted(values)
    rank = math.ceil(percentile / 100.0 * len(ranked))
    rank = min(max(rank, 1), len(ranked))
    return ranked[rank - 1]


def null_threshold(
    n: int,
    m: int,
    config: ExtractionConfig = ExtractionConfig(),
    rng: RngLike = 0,
    workers: int = 1,
) -> float:
    """Significance bar for a graph with n nodes and m links: the configured
    percentile (nearest rank) of best scores found on `null_runs` fresh
    G(n, m) graphs, each searched exactly like the observed graph.

    Trials use independent derived streams, so they may run on several worker
    processes without changing the result.
    """
    if n < 2 or m < 1:
        raise GraphError("null model needs n >= 2 and m >= 1")
    gen = as_generator(rng)
    seeds = gen.integers(0, 2**63, size=config.null_runs, dtype=np.uint64)
    tasks = [(n, m, config.restarts, int(s)) for s in seeds.tolist()]
    if workers > 1 and config.null_runs > 1:
        _climb.warm_up()  # compile before forking
        ctx = get_context("fork")
        chunk = max(1, len(tasks) // (workers * 4))
        with ctx.Pool(workers) as pool:
            values = pool.map(_null_trial, tasks, chunksize=chunk)
    else:
        values = [_null_trial(t) for t in tasks]
    return _nearest_rank(values, config.percentile)


# -- sequential extraction -----------------------------------------------------

def _remove_group_links(g: Graph, in_s: np.ndarray, in_t: np.ndarray) -> Graph:
    """Drop every link between S and T, then drop nodes that become isolated.

    Nodes that were already isolated before the removal stay.
    """
    u, v = g._u, g._v
    gone = (in_s[u] & in_t[v]) | (in_s[v] & in_t[u])
    keep_links = ~gone
    new_deg = np.bincount(u[keep_links], minlength=g.n) + np.bincount(
        v[keep_links], minlength=g.n
    )
    keep_node = (new_deg > 0) | (np.asarray(g._deg) == 0)
    remap = np.cumsum(keep_node, dtype=np.int64) - 1
    labels = g.labels[keep_node]
    return Graph._from_indexed(labels.copy(), remap[u[keep_links]], remap[v[keep_links]])


def extract_groups(
    g: Graph,
    config: ExtractionConfig = ExtractionConfig(),
    rng: RngLike = 0,
    workers: int = 1,
) -> ExtractionResult:
    """Sequentially extract statistically significant groups.

    Each round searches the current residual graph, keeps the best group only
    if its score beats the Erdos-Renyi threshold for the residual's size, then
    deletes the S-T links (and any node this isolates) and repeats. Stops on
    link exhaustion, the max_groups cap, or the first insignificant result.
    Thresholds are memoized per (n, m) within one call.
    """
    gen = as_generator(rng)
    residual = g
    groups: list[NodeGroup] = []
    thresholds: list[float] = []
    cache: dict[tuple[int, int], float] = {}
    initial_threshold: Optional[float] = None
    while True:
        if residual.m == 0:
            break
        if config.max_groups is not None and len(groups) >= config.max_groups:
            break
        if config.threshold_mode == "initial":
            if initial_threshold is None:
                initial_threshold = null_threshold(
                    residual.n, residual.m, config, gen, workers
                )
            threshold = initial_threshold
        else:
            key = (residual.n, residual.m)
            if key not in cache:
                cache[key] = null_threshold(residual.n, residual.m, config, gen, workers)
            threshold = cache[key]
        thresholds.append(threshold)
        w, in_s, in_t = _hill_climb_masks(residual, gen, config.restarts)
        if w <= threshold:
            break
        labels = residual.labels
        members = frozenset(labels[in_s].tolist())
        pattern = frozenset(labels[in_t].tolist())
        groups.append(
            NodeGroup(
                members=members,
                pattern=pattern,
                score=w,
                tau=jaccard(members, pattern),
                kind=classify_group(members, pattern),
                order=len(groups) + 1,
            )
        )
        residual = _remove_group_links(residual, in_s, in_t)
    return ExtractionResult(
        groups=tuple(groups),
        residual_n=residual.n,
        residual_m=residual.m,
        thresholds=tuple(thresholds),
    )
