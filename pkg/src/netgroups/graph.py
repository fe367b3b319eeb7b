"""Immutable undirected graphs with original node labels, edge-list I/O,
connected components, and the uniform G(n, m) generator used as null model.

Graphs are simple: no self-loops, no duplicate links. Construction collapses
duplicate or reversed pairs and drops self-loops, matching how the edge-list
loader treats real-world files. Every randomized operation takes an explicit
random source, so results are reproducible run to run and safe to parallelize
with disjoint stream indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import IO, Iterable, Iterator, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _sparse_components

__all__ = [
    "GraphError",
    "RandomSource",
    "RngLike",
    "as_generator",
    "Graph",
    "GraphStats",
    "load_edge_list",
    "read_edge_list",
    "write_edge_list",
    "save_edge_list",
    "induced_subgraph",
    "connected_components",
    "largest_component",
    "erdos_renyi_gnm",
    "basic_stats",
]

# Stream algorithm identifier recorded in provenance: numpy PCG64 seeded via
# SeedSequence(seed, spawn_key=(stream_index,)).
GENERATOR_KIND = "pcg64"


class GraphError(ValueError):
    """Malformed graph input or an argument outside an operation's domain."""


@dataclass(frozen=True)
class RandomSource:
    """Identity of a reproducible random stream.

    The same (seed, stream_index) yields the same value sequence across runs
    and platforms. Streams with different indices are statistically
    independent, so parallel work must use disjoint indices.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise GraphError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        key = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(key))

    def stream(self, index: int) -> "RandomSource":
        """Source for the given stream index (absolute, not an offset)."""
        return replace(self, stream_index=index)


RngLike = Union[RandomSource, np.random.Generator, int]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Coerce a RandomSource, bare seed, or live generator to a generator.

    A RandomSource or integer seed starts a fresh stream; passing a live
    generator continues it, which is how multi-stage pipelines thread one
    stream through their stages.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomSource):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RandomSource(int(rng)).generator()
    raise TypeError(f"expected RandomSource, Generator, or int seed, got {type(rng)!r}")


class Graph:
    """Undirected simple graph over arbitrary integer node labels.

    Immutable after construction and safe to share across threads or forked
    worker processes. Internally nodes are re-indexed densely; all public
    output uses the original labels.
    """

    __slots__ = ("_labels", "_index", "_u", "_v", "_indptr", "_nbrs", "_deg", "_linkset")

    def __init__(self, links: Iterable[tuple[int, int]] = (), nodes: Iterable[int] = ()):
        label_set = {int(x) for x in nodes}
        pairs = set()
        for a, b in links:
            a, b = int(a), int(b)
            if a == b:
                continue  # self-loops are dropped entirely, loader semantics
            label_set.add(a)
            label_set.add(b)
            pairs.add((a, b) if a < b else (b, a))
        labels = np.array(sorted(label_set), dtype=np.int64)
        index = {lab: i for i, lab in enumerate(labels.tolist())}
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            u = np.array([index[a] for a in arr[:, 0].tolist()], dtype=np.int64)
            v = np.array([index[b] for b in arr[:, 1].tolist()], dtype=np.int64)
        else:
            u = np.empty(0, dtype=np.int64)
            v = np.empty(0, dtype=np.int64)
        self._init_indexed(labels, index, u, v)

    # -- construction internals -------------------------------------------

    @classmethod
    def _from_indexed(cls, labels: np.ndarray, u: np.ndarray, v: np.ndarray) -> "Graph":
        """Trusted fast path: labels sorted ascending, u < v, pairs distinct."""
        g = cls.__new__(cls)
        order = np.lexsort((v, u))
        index = {lab: i for i, lab in enumerate(labels.tolist())}
        g._init_indexed(labels, index, u[order], v[order])
        return g

    def _init_indexed(self, labels, index, u, v) -> None:
        n = labels.shape[0]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        nbrs = dst[order].astype(np.int64)
        deg = np.bincount(src, minlength=n).astype(np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        for arr in (labels, u, v, nbrs, deg, indptr):
            arr.setflags(write=False)
        self._labels = labels
        self._index = index
        self._u = u
        self._v = v
        self._nbrs = nbrs
        self._deg = deg
        self._indptr = indptr
        self._linkset = None

    # -- basic queries ------------------------------------------------------

    @property
    def n(self) -> int:
        return self._labels.shape[0]

    @property
    def m(self) -> int:
        return self._u.shape[0]

    @property
    def labels(self) -> np.ndarray:
        """Node labels, sorted ascending (read-only view)."""
        return self._labels

    def node_set(self) -> frozenset:
        return frozenset(self._labels.tolist())

    def has_node(self, label: int) -> bool:
        return label in self._index

    def degree(self, label: int) -> int:
        return int(self._deg[self._require_index(label)])

    def neighbors(self, label: int) -> np.ndarray:
        """Neighbor labels of a node, sorted ascending (read-only view)."""
        i = self._require_index(label)
        return self._labels[self._nbrs[self._indptr[i]:self._indptr[i + 1]]]

    def links(self) -> Iterator[tuple[int, int]]:
        """Links as (u, v) label pairs with u < v, in canonical sorted order."""
        lu = self._labels[self._u]
        lv = self._labels[self._v]
        return zip(lu.tolist(), lv.tolist())

    def link_set(self) -> frozenset:
        if self._linkset is None:
            self._linkset = frozenset(self.links())
        return self._linkset

    def has_link(self, a: int, b: int) -> bool:
        if a > b:
            a, b = b, a
        return (a, b) in self.link_set()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and bool(np.array_equal(self._labels, other._labels))
            and self.link_set() == other.link_set()
        )

    def __hash__(self):  # pragma: no cover - graphs are not meant as dict keys
        return hash((self.n, self.m))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # -- index helpers (internal API used by sampling/extraction) -----------

    def _require_index(self, label: int) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise GraphError(f"unknown node label {label!r}") from None

    def _require_indices(self, labels: Iterable[int]) -> np.ndarray:
        return np.fromiter(
            (self._require_index(int(x)) for x in labels), dtype=np.int64
        )

    def induced(self, keep: Iterable[int]) -> "Graph":
        return induced_subgraph(self, keep)


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    mean_degree: float


def basic_stats(g: Graph) -> GraphStats:
    """Node count, link count, and mean degree (2m/n; zeros for empty)."""
    if g.n == 0:
        return GraphStats(0, 0, 0.0)
    return GraphStats(g.n, g.m, 2.0 * g.m / g.n)


# -- edge-list I/O -----------------------------------------------------------

_ISOLATED_TAG = "isolated:"


def load_edge_list(text: Union[str, IO, Iterable[str]]) -> Graph:
    """Parse a whitespace edge list into a graph.

    Each non-comment line holds two integer labels; lines starting with '#'
    are comments. Duplicate and reversed pairs collapse to one undirected
    link; self-loop lines are dropped entirely. A comment of the form
    '# isolated: 3 7 11' (as produced by write_edge_list) re-registers
    degree-zero nodes, so sampled subgraphs round-trip losslessly.

    Raises GraphError with the offending line number on malformed input.
    """
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text
    pairs: list[tuple[int, int]] = []
    isolated: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith(_ISOLATED_TAG):
                try:
                    isolated.extend(int(t) for t in body[len(_ISOLATED_TAG):].split())
                except ValueError:
                    pass  # an ordinary comment that happens to match the tag
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphError(f"line {lineno}: expected two node labels, got {len(tokens)}")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer node label in {line!r}") from None
        pairs.append((a, b))
    return Graph(pairs, nodes=isolated)


def read_edge_list(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_edge_list(fh)


def write_edge_list(g: Graph) -> str:
    """Canonical text form: one 'u v' line per link with u < v, sorted; any
    degree-zero nodes are recorded first on a '# isolated:' comment line."""
    out: list[str] = []
    iso = g.labels[np.asarray(g._deg) == 0]
    if iso.size:
        out.append("# " + _ISOLATED_TAG + " " + " ".join(str(x) for x in iso.tolist()))
    out.extend(f"{u} {v}" for u, v in g.links())
    return "\n".join(out) + ("\n" if out else "")


def save_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_edge_list(g))


# -- subgraphs and components ------------------------------------------------

def induced_subgraph(g: Graph, keep: Iterable[int]) -> Graph:
    """Subgraph on `keep` with every original link between kept nodes.

    Raises GraphError if `keep` mentions an unknown node.
    """
    idx = g._require_indices(keep)
    mask = np.zeros(g.n, dtype=bool)
    mask[idx] = True
    sel = mask[g._u] & mask[g._v]
    remap = np.cumsum(mask, dtype=np.int64) - 1
    labels = g._labels[mask]
    return Graph._from_indexed(labels.copy(), remap[g._u[sel]], remap[g._v[sel]])


def connected_components(g: Graph) -> dict[int, int]:
    """Label each node with a component id.

    Ids are contiguous from 0, ordered by decreasing component size with ties
    broken by the smallest member label.
    """
    if g.n == 0:
        return {}
    if g.m == 0:
        raw = np.arange(g.n)
        ncomp = g.n
    else:
        data = np.ones(2 * g.m, dtype=np.int8)
        rows = np.concatenate([g._u, g._v])
        cols = np.concatenate([g._v, g._u])
        adj = csr_matrix((data, (rows, cols)), shape=(g.n, g.n))
        ncomp, raw = _sparse_components(adj, directed=False)
    sizes = np.bincount(raw, minlength=ncomp)
    first = np.full(ncomp, g.n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(g.n))
    # labels are ascending in index order, so the smallest index in a
    # component carries its smallest label
    order = sorted(range(ncomp), key=lambda c: (-int(sizes[c]), int(first[c])))
    newid = np.empty(ncomp, dtype=np.int64)
    newid[order] = np.arange(ncomp)
    comp = newid[raw]
    return {int(lab): int(c) for lab, c in zip(g._labels.tolist(), comp.tolist())}


def largest_component(g: Graph) -> Graph:
    """Induced subgraph on the largest connected component."""
    if g.n == 0:
        return g
    comp = connected_components(g)
    keep = [lab for lab, c in comp.items() if c == 0]
    return induced_subgraph(g, keep)


# -- Erdos-Renyi G(n, m) -----------------------------------------------------

def _pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _decode_pairs(t: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices in [0, n(n-1)/2) to pairs (i, j) with i < j.

    Index layout is row-major over rows i of length n-1-i, i.e.
    offset(i) = i*(2n - i - 1)/2.
    """
    b = 2 * n - 1
    i = ((b - np.sqrt(b * b - 8.0 * t)) // 2).astype(np.int64)
    # float sqrt can land one row off near boundaries; correct exactly
    for _ in range(2):
        off = i * (2 * n - i - 1) // 2
        too_high = off > t
        if too_high.any():
            i[too_high] -= 1
        off = i * (2 * n - i - 1) // 2
        nxt = (i + 1) * (2 * n - i - 2) // 2
        too_low = t >= nxt
        if too_low.any():
            i[too_low] += 1
    off = i * (2 * n - i - 1) // 2
    j = t - off + i + 1
    return i, j


def _distinct_uniform(total: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """`count` distinct integers uniform over [0, total), without replacement.

    Keeps the first `count` distinct values of an i.i.d. uniform stream,
    which has exactly the sequential-rejection distribution.
    """
    if count == 0:
        return np.empty(0, dtype=np.int64)
    draws = np.empty(0, dtype=np.int64)
    need = count
    while True:
        batch = gen.integers(0, total, size=need + max(16, need // 8), dtype=np.int64)
        draws = np.concatenate([draws, batch])
        uniq, first = np.unique(draws, return_index=True)
        if uniq.size >= count:
            order = np.argsort(first, kind="stable")
            return uniq[order[:count]]
        need = count - uniq.size


def erdos_renyi_gnm(n: int, m: int, rng: RngLike) -> Graph:
    """Uniform random graph with exactly n nodes (labels 0..n-1) and m links.

    Raises GraphError when m exceeds n(n-1)/2.
    """
    if n < 0:
        raise GraphError("node count must be non-negative")
    total = _pair_count(n)
    if not 0 <= m <= total:
        raise GraphError(f"link count {m} outside [0, {total}] for n={n}")
    gen = as_generator(rng)
    labels = np.arange(n, dtype=np.int64)
    if m == 0:
        return Graph._from_indexed(labels, np.empty(0, np.int64), np.empty(0, np.int64))
    if m > total // 2:
        # dense regime: sample the complement instead
        missing = _distinct_uniform(total, total - m, gen)
        chosen = np.setdiff1d(np.arange(total, dtype=np.int64), missing)
    else:
        chosen = _distinct_uniform(total, m, gen)
    u, v = _decode_pairs(np.sort(chosen), n)
    return Graph._from_indexed(labels, u, v)
