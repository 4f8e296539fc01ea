#!/usr/bin/env python3
"""
Network representation and combinatorial analysis.

Holds the undirected connected graph with its self-loop gains and alarm
thresholds, the Laplacian, BFS distances, and the dominating-set machinery
that defines the defender's action space.

Vertices are 0-based inside the library; documents and the command line are
1-based and converted only here (parse_network / to_document).
"""

import itertools
import json
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from secalloc.errors import EmptyCollection, GenerationError, GraphError, SchemaError

logger = logging.getLogger(__name__)

DEFAULT_THETA = 0.5
DEFAULT_DELTA = 1.0

# Subsets tested per vectorized block during enumeration.
BLOCK_SIZE = 4096


class Network(BaseModel):
    """Undirected connected graph with per-vertex gains and thresholds."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    edges: Tuple[Tuple[int, int], ...] = ()
    theta: Tuple[float, ...]
    delta: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_graph(self) -> "Network":
        # GraphError/SchemaError are not ValueErrors, so pydantic lets them through.
        return self.check()

    def check(self) -> "Network":
        """Validate the graph invariants, raising GraphError/SchemaError."""
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"Edge ({u + 1}, {v + 1}) has an endpoint outside 1..{self.n}")
            if u == v:
                raise GraphError(f"Self-edge at vertex {u + 1} is not allowed")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"Duplicate edge ({key[0] + 1}, {key[1] + 1})")
            seen.add(key)

        for name, values in (("theta", self.theta), ("delta", self.delta)):
            if len(values) != self.n:
                raise SchemaError(f"{name} has length {len(values)}, expected {self.n}")
            if any(not (value > 0) for value in values):
                raise SchemaError(f"{name} entries must be strictly positive")

        if not nx.is_connected(self.to_networkx()):
            raise GraphError("Graph is disconnected")
        return self

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def neighbors(self, v: int) -> List[int]:
        return sorted(u if w == v else w for u, w in self.edges if v in (u, w))

    def with_theta(self, theta: Sequence[float]) -> "Network":
        return Network(n=self.n, edges=self.edges, theta=tuple(float(t) for t in theta), delta=self.delta)

    def with_delta(self, delta: Sequence[float]) -> "Network":
        return Network(n=self.n, edges=self.edges, theta=self.theta, delta=tuple(float(d) for d in delta))


class MonitorSet(BaseModel):
    """Strictly increasing vertex subset under a sensor budget."""

    model_config = ConfigDict(frozen=True)

    vertices: Tuple[int, ...]
    budget: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_vertices(self) -> "MonitorSet":
        if not self.vertices:
            raise ValueError("monitor set must be nonempty")
        if any(b <= a for a, b in zip(self.vertices, self.vertices[1:])):
            raise ValueError(f"monitor vertices must be strictly increasing: {self.vertices}")
        if self.vertices[0] < 0:
            raise ValueError("monitor vertices must be nonnegative")
        if len(self.vertices) > self.budget:
            raise ValueError(f"{len(self.vertices)} monitors exceed the budget {self.budget}")
        return self

    @classmethod
    def of(cls, vertices: Sequence[int], budget: Optional[int] = None) -> "MonitorSet":
        ordered = tuple(sorted(set(int(v) for v in vertices)))
        return cls(vertices=ordered, budget=budget if budget is not None else max(len(ordered), 1))

    def check(self, n: int) -> "MonitorSet":
        if self.vertices[-1] >= n:
            raise GraphError(f"Monitor vertex {self.vertices[-1] + 1} outside 1..{n}")
        return self

    def union(self, vertex: int) -> "MonitorSet":
        merged = tuple(sorted(set(self.vertices) | {vertex}))
        return MonitorSet(vertices=merged, budget=max(self.budget, len(merged)))

    def one_based(self) -> List[int]:
        return [v + 1 for v in self.vertices]

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.vertices)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self.vertices


class DominatingCollection(BaseModel):
    """The defender's action space: every dominating set within budget."""

    model_config = ConfigDict(frozen=True)

    sets: Tuple[MonitorSet, ...]
    budget: int

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[MonitorSet]:
        return iter(self.sets)

    def __getitem__(self, index: int) -> MonitorSet:
        return self.sets[index]

    def to_document(self) -> List[List[int]]:
        return [m.one_based() for m in self.sets]


class NetworkSummary(BaseModel):
    n: int
    edges: int
    degree_min: int
    degree_mean: float
    degree_max: int
    diameter: int
    algebraic_connectivity: float


class NetworkDocument(BaseModel):
    """JSON schema of a network file (1-based vertices)."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(..., ge=1)
    edges: List[Tuple[int, int]] = []
    theta: Optional[List[float]] = None
    delta: Optional[List[float]] = None


def parse_network(document: Union[str, bytes, Dict[str, Any]],
                  theta_default: float = DEFAULT_THETA,
                  delta_default: float = DEFAULT_DELTA) -> Network:
    """Parse and validate a network document (JSON text or decoded mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise SchemaError(f"Network document is not valid JSON: {e}") from e

    try:
        doc = NetworkDocument.model_validate(document)
    except ValidationError as e:
        raise SchemaError(f"Network document does not match the schema: {e}") from e

    edges = tuple((u - 1, v - 1) for u, v in doc.edges)
    theta = tuple(doc.theta) if doc.theta is not None else (theta_default,) * doc.n
    delta = tuple(doc.delta) if doc.delta is not None else (delta_default,) * doc.n

    net = Network(n=doc.n, edges=edges, theta=theta, delta=delta)
    return net.model_copy(update={"edges": _normalized_edges(net.edges)})


def to_document(net: Network) -> Dict[str, Any]:
    return {
        "n": net.n,
        "edges": [[u + 1, v + 1] for u, v in net.edges],
        "theta": list(net.theta),
        "delta": list(net.delta),
    }


def load_network(path: Union[str, Path], **defaults: float) -> Network:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise SchemaError(f"Cannot read network file {path}: {e}") from e
    net = parse_network(text, **defaults)
    logger.info(f"Loaded network {path} with {net.n} vertices and {len(net.edges)} edges")
    return net


def save_network(net: Network, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(to_document(net)) + "\n")
    return path


def make_network(n: int, edges: Sequence[Tuple[int, int]],
                 theta: Union[float, Sequence[float]] = DEFAULT_THETA,
                 delta: Union[float, Sequence[float]] = DEFAULT_DELTA) -> Network:
    """Build a validated Network from 0-based edges."""
    theta = (float(theta),) * n if np.isscalar(theta) else tuple(float(t) for t in theta)
    delta = (float(delta),) * n if np.isscalar(delta) else tuple(float(d) for d in delta)
    net = Network(n=n, edges=tuple((int(u), int(v)) for u, v in edges), theta=theta, delta=delta)
    return net.model_copy(update={"edges": _normalized_edges(net.edges)})


def _normalized_edges(edges: Sequence[Tuple[int, int]]) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted((min(u, v), max(u, v)) for u, v in edges))


def generate_erdos_renyi(n: int, q: float, seed: int,
                         theta: float = DEFAULT_THETA,
                         delta: float = DEFAULT_DELTA,
                         max_attempts: int = 1000) -> Network:
    """Sample a connected G(n, q) graph, resampling until connected.

    Every unordered pair is included independently with probability q; the
    generator is seeded once, so the same (n, q, seed) always yields the same
    graph.
    """
    if n < 2:
        raise GenerationError(f"Erdős–Rényi generation needs n >= 2, got {n}")
    if not (0.0 < q <= 1.0):
        raise GenerationError(f"Edge probability must lie in (0, 1], got {q}")

    rng = random.Random(seed)
    for attempt in range(1, max_attempts + 1):
        sample = nx.gnp_random_graph(n, q, seed=rng)
        if nx.is_connected(sample):
            if attempt > 1:
                logger.debug(f"G({n}, {q}) seed {seed}: connected after {attempt} attempts")
            return make_network(n, list(sample.edges()), theta, delta)

    raise GenerationError(f"No connected G({n}, {q}) sample after {max_attempts} attempts (seed {seed})")


def adjacency(net: Network) -> np.ndarray:
    a = np.zeros((net.n, net.n))
    for u, v in net.edges:
        a[u, v] = a[v, u] = 1.0
    return a


def laplacian(net: Network) -> np.ndarray:
    """L = Δ − A."""
    a = adjacency(net)
    return np.diag(a.sum(axis=1)) - a


def distance(net: Network, u: int, v: int) -> int:
    """Shortest-path edge count between u and v (BFS)."""
    return nx.shortest_path_length(net.to_networkx(), u, v)


def distance_matrix(net: Network) -> np.ndarray:
    dist = np.zeros((net.n, net.n), dtype=int)
    for source, lengths in nx.all_pairs_shortest_path_length(net.to_networkx()):
        for target, length in lengths.items():
            dist[source, target] = length
    return dist


def network_summary(net: Network) -> NetworkSummary:
    degrees = adjacency(net).sum(axis=1)
    spectrum = np.linalg.eigvalsh(laplacian(net))
    return NetworkSummary(
        n=net.n,
        edges=len(net.edges),
        degree_min=int(degrees.min()),
        degree_mean=float(degrees.mean()),
        degree_max=int(degrees.max()),
        diameter=nx.diameter(net.to_networkx()),
        algebraic_connectivity=float(spectrum[1]) if net.n > 1 else 0.0,
    )


def is_dominating(net: Network, m: MonitorSet) -> bool:
    """Algebraic test: every entry of C(M) = (A + I) Σ e_m must be positive.

    Rows are examined one at a time and the scan stops at the first zero.
    """
    m.check(net.n)
    closed = adjacency(net) + np.eye(net.n)
    indicator = np.zeros(net.n)
    indicator[list(m.vertices)] = 1.0
    for row in closed:
        if row @ indicator <= 0:
            return False
    return True


def _dominating_block(closed: np.ndarray, combos: np.ndarray) -> np.ndarray:
    """C(M) > 0 for a whole block of same-size subsets at once."""
    indicators = np.zeros((closed.shape[0], len(combos)))
    columns = np.repeat(np.arange(len(combos)), combos.shape[1])
    indicators[combos.ravel(), columns] = 1.0
    return np.all(closed @ indicators > 0, axis=0)


def _subset_blocks(n: int, n_s: int) -> List[np.ndarray]:
    """Candidate subsets, by size then lexicographically, in fixed blocks."""
    blocks = []
    for k in range(1, min(n_s, n) + 1):
        combos = itertools.combinations(range(n), k)
        while True:
            chunk = list(itertools.islice(combos, BLOCK_SIZE))
            if not chunk:
                break
            blocks.append(np.array(chunk, dtype=int))
    return blocks


def _dominating_subsets(net: Network, n_s: int, workers: int = 1) -> List[Tuple[int, ...]]:
    closed = adjacency(net) + np.eye(net.n)
    blocks = _subset_blocks(net.n, n_s)
    results: List[List[Tuple[int, ...]]] = [[] for _ in blocks]

    def scan(block: np.ndarray) -> List[Tuple[int, ...]]:
        mask = _dominating_block(closed, block)
        return [tuple(int(v) for v in row) for row in block[mask]]

    if workers <= 1 or len(blocks) <= 1:
        results = [scan(block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_index = {executor.submit(scan, block): i for i, block in enumerate(blocks)}
            for future in as_completed(future_to_index):
                results[future_to_index[future]] = future.result()

    return sorted(subset for block in results for subset in block)


def enumerate_dominating_sets(net: Network, n_s: int, workers: int = 1) -> DominatingCollection:
    """All dominating sets with at most n_s vertices, lexicographically sorted."""
    if n_s < 1:
        raise EmptyCollection(f"Sensor budget must be positive, got {n_s}")

    subsets = _dominating_subsets(net, n_s, workers)
    if not subsets:
        raise EmptyCollection(f"No dominating set with at most {n_s} vertices")

    logger.info(f"Found {len(subsets)} dominating sets out of {subset_count(net.n, min(n_s, net.n))} subsets")
    return DominatingCollection(
        sets=tuple(MonitorSet(vertices=s, budget=n_s) for s in subsets),
        budget=n_s,
    )


def count_dominating_sets(net: Network, n_s: int) -> int:
    return len(_dominating_subsets(net, n_s))


def subset_count(n: int, n_s: int) -> int:
    """S(n, n_s): number of nonempty subsets with at most n_s elements."""
    return sum(math.comb(n, k) for k in range(1, n_s + 1))


def partition(items: Sequence[Any], n_c: int) -> List[List[Any]]:
    """Split items into n_c contiguous chunks whose sizes differ by at most one."""
    bounds = np.array_split(np.arange(len(items)), max(n_c, 1))
    return [[items[i] for i in chunk] for chunk in bounds]
