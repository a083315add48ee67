"""
Coalitions and communication graphs
Coalitions are plain ints used as bit sets over node indices 0..n-1 (n <= 64).
A Graph keeps one neighbour bit row per node; all connectivity work is BFS
over those rows masked by the coalition.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from myerson_config import GRAPH_DEFAULTS
from myerson_errors import GraphFormatError, InvalidParameterError

logger = logging.getLogger(__name__)

Coalition = int

MAX_NODES = GRAPH_DEFAULTS['max_nodes']
GRAPH_MODELS = ('cycle', 'erdos_renyi', 'barabasi_albert', 'star')


def full_mask(n: int) -> Coalition:
    return (1 << n) - 1


def popcount(c: Coalition) -> int:
    return c.bit_count()


def nodes_of(c: Coalition) -> List[int]:
    """Member indices in ascending order"""
    nodes = []
    while c:
        low = c & -c
        nodes.append(low.bit_length() - 1)
        c ^= low
    return nodes


def coalition_from_nodes(nodes: Iterable[int], n: Optional[int] = None) -> Coalition:
    c = 0
    for v in nodes:
        if v < 0 or (n is not None and v >= n):
            raise InvalidParameterError(f"node {v} outside 0..{n - 1 if n else '?'}")
        c |= 1 << v
    return c


@dataclass(frozen=True)
class Graph:
    n: int
    adj: Tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_NODES:
            raise InvalidParameterError(f"graph needs 1 <= n <= {MAX_NODES}, got {self.n}")
        if len(self.adj) != self.n:
            raise InvalidParameterError(f"expected {self.n} adjacency rows, got {len(self.adj)}")
        mask = full_mask(self.n)
        for u, row in enumerate(self.adj):
            if row & ~mask:
                raise InvalidParameterError(f"row {u} has bits outside 0..{self.n - 1}")
            if row >> u & 1:
                raise InvalidParameterError(f"self-loop at node {u}")
            for v in nodes_of(row):
                if not self.adj[v] >> u & 1:
                    raise InvalidParameterError(f"edge {u}-{v} is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> 'Graph':
        if not 1 <= n <= MAX_NODES:
            raise InvalidParameterError(f"graph needs 1 <= n <= {MAX_NODES}, got {n}")
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"edge {u}-{v} out of range for n={n}")
            if u == v:
                raise InvalidParameterError(f"self-loop at node {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @property
    def vertices(self) -> Coalition:
        return full_mask(self.n)

    def edges(self) -> List[Tuple[int, int]]:
        """Canonical edge list, u < v, sorted"""
        return [(u, v) for u in range(self.n) for v in nodes_of(self.adj[u]) if u < v]

    def edge_count(self) -> int:
        return sum(popcount(row) for row in self.adj) // 2

    def degree(self, u: int) -> int:
        return popcount(self.adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def to_networkx(self):
        import networkx as nx
        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(self.n))
        nx_graph.add_edges_from(self.edges())
        return nx_graph


def add_edge(g: Graph, u: int, v: int) -> Graph:
    """New graph with the extra edge u-v"""
    if u == v:
        raise InvalidParameterError(f"self-loop at node {u}")
    rows = list(g.adj)
    rows[u] |= 1 << v
    rows[v] |= 1 << u
    return Graph(g.n, tuple(rows))


# Connectivity primitives

def _reach(g: Graph, within: Coalition, start: Coalition) -> Coalition:
    seen = start
    frontier = start
    adj = g.adj
    while frontier:
        grown = 0
        while frontier:
            low = frontier & -frontier
            grown |= adj[low.bit_length() - 1]
            frontier ^= low
        frontier = grown & within & ~seen
        seen |= frontier
    return seen


def is_connected(g: Graph, c: Coalition) -> bool:
    """True iff the subgraph induced by c is connected; the empty coalition is not"""
    if not c:
        return False
    return _reach(g, c, c & -c) == c


def components(g: Graph, c: Coalition) -> List[Coalition]:
    """Connected components of G(c), ordered by smallest member"""
    parts = []
    remaining = c
    while remaining:
        part = _reach(g, remaining, remaining & -remaining)
        parts.append(part)
        remaining &= ~part
    return parts


def neighbors(g: Graph, c: Coalition) -> Coalition:
    """N(c): nodes outside c adjacent to some member"""
    around = 0
    rest = c
    adj = g.adj
    while rest:
        low = rest & -rest
        around |= adj[low.bit_length() - 1]
        rest ^= low
    return around & ~c


def connected_components(g: Graph) -> List[Coalition]:
    return components(g, g.vertices)


# Random graph generators

def _rng(seed: int) -> np.random.Generator:
    if seed < 0:
        raise InvalidParameterError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidParameterError(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> Graph:
    """Star with centre 0"""
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def erdos_renyi_graph(n: int, edge_prob: float, seed: int) -> Graph:
    if not 0.0 <= edge_prob <= 1.0:
        raise InvalidParameterError(f"edge probability must lie in [0, 1], got {edge_prob}")
    rng = _rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    draws = rng.random(len(pairs))
    return Graph.from_edges(n, [pair for pair, x in zip(pairs, draws) if x < edge_prob])


def barabasi_albert_graph(n: int, m0: int, m: int, seed: int) -> Graph:
    """Preferential attachment grown from m0 nodes joined as a path"""
    if not 1 <= m <= m0 < n:
        raise InvalidParameterError(f"preferential attachment needs 1 <= m <= m0 < n, got m={m} m0={m0} n={n}")
    rng = _rng(seed)
    edges = [(i, i + 1) for i in range(m0 - 1)]
    degree = np.zeros(n, dtype=float)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1

    for t in range(m0, n):
        chosen = []
        weights = degree[:t].copy()
        for _ in range(m):
            if weights.sum() <= 0:
                weights = np.ones(t)
                weights[chosen] = 0.0
            target = int(rng.choice(t, p=weights / weights.sum()))
            chosen.append(target)
            weights[target] = 0.0
        for target in chosen:
            edges.append((target, t))
            degree[target] += 1
        degree[t] = m
    return Graph.from_edges(n, edges)


def generate_graph(model: str, n: int, seed: int = 0, edge_prob: Optional[float] = None,
                   m0: Optional[int] = None, m: Optional[int] = None) -> Graph:
    """Build a graph from one of the supported models; deterministic in (model, params, seed)"""
    if not 1 <= n <= MAX_NODES:
        raise InvalidParameterError(f"graph needs 1 <= n <= {MAX_NODES}, got {n}")
    if model == 'cycle':
        return cycle_graph(n)
    if model == 'star':
        return star_graph(n)
    if model == 'erdos_renyi':
        p = GRAPH_DEFAULTS['edge_prob'] if edge_prob is None else edge_prob
        return erdos_renyi_graph(n, p, seed)
    if model == 'barabasi_albert':
        return barabasi_albert_graph(
            n,
            GRAPH_DEFAULTS['m0'] if m0 is None else m0,
            GRAPH_DEFAULTS['m'] if m is None else m,
            seed,
        )
    raise InvalidParameterError(f"unknown graph model {model!r}; expected one of {', '.join(GRAPH_MODELS)}")


# Text format

def serialize_graph(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse `n <count>` followed by one `<u> <v>` edge per line"""
    n = None
    edges = []
    seen = set()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != 'n':
                raise GraphFormatError("expected header 'n <count>'", line_number)
            try:
                n = int(fields[1])
            except ValueError:
                raise GraphFormatError(f"node count {fields[1]!r} is not an integer", line_number)
            if not 1 <= n <= MAX_NODES:
                raise GraphFormatError(f"node count must lie in 1..{MAX_NODES}", line_number)
            continue
        if len(fields) != 2:
            raise GraphFormatError(f"expected '<u> <v>', got {line!r}", line_number)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphFormatError(f"edge {line!r} is not a pair of integers", line_number)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"node index out of range for n={n}", line_number)
        if u == v:
            raise GraphFormatError(f"self-loop at node {u}", line_number)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key[0]}-{key[1]}", line_number)
        seen.add(key)
        edges.append(key)
    if n is None:
        raise GraphFormatError("missing header 'n <count>'")
    return Graph.from_edges(n, edges)
