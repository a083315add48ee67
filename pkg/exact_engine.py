"""
Exact Myerson values
Two independent engines: the Shapley subset formula over the restricted game,
and a single pass over the connected coalitions of the graph.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from coalition_graph import Coalition, Graph, neighbors, nodes_of, popcount
from games import CharacteristicFunction, materialize, popcounts, restrict
from myerson_config import EXACT_SETTINGS, OUTPUT_SETTINGS
from myerson_errors import InvalidParameterError, SizeLimitError

logger = logging.getLogger(__name__)


@dataclass
class Allocation:
    """Per-node payoff vector with run diagnostics"""
    values: List[float]
    method: str = 'exact'
    samples: int = 0
    elapsed_ns: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = [float(x) for x in self.values]
        for i, x in enumerate(self.values):
            if not math.isfinite(x):
                raise InvalidParameterError(f"allocation entry {i} is not finite: {x}")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def total(self) -> float:
        return math.fsum(self.values)

    def to_text(self) -> str:
        digits = OUTPUT_SETTINGS['significant_digits']
        return "".join(f"{i} {x:.{digits}g}\n" for i, x in enumerate(self.values))


def parse_allocation(text: str) -> Allocation:
    values = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2 or fields[0] != str(len(values)):
            raise InvalidParameterError(f"line {line_number}: expected '{len(values)} <value>', got {line!r}")
        values.append(float(fields[1]))
    return Allocation(values, method='parsed')


class CompensatedSum:
    """Neumaier-compensated accumulator over a fixed-length vector"""

    def __init__(self, n: int):
        self.total = np.zeros(n)
        self.carry = np.zeros(n)

    def add(self, x):
        x = np.asarray(x, dtype=float)
        t = self.total + x
        big = np.abs(self.total) >= np.abs(x)
        self.carry += np.where(big, (self.total - t) + x, (x - t) + self.total)
        self.total = t

    def add_at(self, i: int, x: float):
        s = self.total[i]
        t = s + x
        if abs(s) >= abs(x):
            self.carry[i] += (s - t) + x
        else:
            self.carry[i] += (x - t) + s
        self.total[i] = t

    def value(self) -> np.ndarray:
        return self.total + self.carry


# Weights

@lru_cache(maxsize=None)
def shapley_weight(n: int, size: int) -> float:
    """|C|!(n-|C|-1)!/n!"""
    return 1.0 / (n * math.comb(n - 1, size))


def myerson_weights(a: int, b: int, exact: bool = False) -> Tuple[Union[float, Fraction], Union[float, Fraction]]:
    """(member weight, neighbour weight) for a connected C with |C|=a, |N(C)|=b

    member:    (a-1)! b! / (a+b)!
    neighbour: a! (b-1)! / (a+b)!   (0 when b == 0)
    """
    if exact:
        if a + b > EXACT_SETTINGS['rational_limit']:
            raise SizeLimitError(f"rational weights limited to a+b <= {EXACT_SETTINGS['rational_limit']}")
        plus = Fraction(1, a * math.comb(a + b, a))
        minus = Fraction(1, b * math.comb(a + b, b)) if b else Fraction(0)
        return plus, minus
    return _float_weights(a, b)


@lru_cache(maxsize=None)
def _float_weights(a: int, b: int) -> Tuple[float, float]:
    plus = 1.0 / (a * math.comb(a + b, a))
    minus = 1.0 / (b * math.comb(a + b, b)) if b else 0.0
    return plus, minus


# Subset engine

def _check_subset_size(n: int):
    if n > EXACT_SETTINGS['subset_limit']:
        raise SizeLimitError(f"subset enumeration limited to n <= {EXACT_SETTINGS['subset_limit']}, got {n}")


def shapley_subsets(v: CharacteristicFunction) -> Allocation:
    """Shapley value from the subset formula, all players in one pass over the table"""
    _check_subset_size(v.n)
    start = time.perf_counter_ns()
    n = v.n
    table = materialize(v).values
    masks = np.arange(1 << n, dtype=np.int64)
    counts = popcounts(n)
    weights = np.array([shapley_weight(n, k) for k in range(n)] + [0.0])

    result = []
    for i in range(n):
        bit = 1 << i
        outside = masks[(masks & bit) == 0]
        gains = table[outside | bit] - table[outside]
        result.append(math.fsum((weights[counts[outside]] * gains).tolist()))
    return Allocation(result, method='subsets', elapsed_ns=time.perf_counter_ns() - start)


def myerson_exact_subsets(g: Graph, v: CharacteristicFunction) -> Allocation:
    allocation = shapley_subsets(restrict(g, v))
    allocation.method = 'exact-subsets'
    return allocation


# Connected-coalition engine

def enumerate_connected(g: Graph) -> Iterator[Tuple[Coalition, Coalition]]:
    """Every nonempty connected coalition exactly once, with its neighbourhood

    Each coalition is grown from its smallest vertex; vertices tried in an
    earlier branch are banned from later ones.
    """
    adj = g.adj

    def grow(members: Coalition, frontier: Coalition, banned: Coalition):
        yield members, neighbors(g, members)
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            reach = (frontier | adj[low.bit_length() - 1]) & ~(members | low | banned)
            yield from grow(members | low, reach, banned)
            banned |= low

    for root in range(g.n):
        root_bit = 1 << root
        below = root_bit - 1
        yield from grow(root_bit, adj[root] & ~below, below | root_bit)


def count_connected(g: Graph) -> int:
    return sum(1 for _ in enumerate_connected(g))


def myerson_exact_connected(g: Graph, v: CharacteristicFunction) -> Allocation:
    """MV = MV+ - MV-, accumulated over the connected coalitions in enumeration order"""
    if v.n != g.n:
        raise InvalidParameterError(f"game has {v.n} players but graph has {g.n} nodes")
    start = time.perf_counter_ns()
    acc = CompensatedSum(g.n)
    visited = 0
    for members, around in enumerate_connected(g):
        visited += 1
        worth = v.value(members)
        if worth == 0.0:
            continue
        plus, minus = _float_weights(popcount(members), popcount(around))
        for u in nodes_of(members):
            acc.add_at(u, plus * worth)
        for u in nodes_of(around):
            acc.add_at(u, -minus * worth)
    logger.debug(f"Visited {visited} connected coalitions")
    return Allocation(acc.value().tolist(), method='exact-connected',
                      elapsed_ns=time.perf_counter_ns() - start,
                      meta={'connected_coalitions': visited})


def myerson_exact_rational(g: Graph, v: CharacteristicFunction) -> List[Fraction]:
    """Slow path with Fraction weights; values of nu converted exactly"""
    totals = [Fraction(0)] * g.n
    for members, around in enumerate_connected(g):
        worth = Fraction(v.value(members))
        plus, minus = myerson_weights(popcount(members), popcount(around), exact=True)
        for u in nodes_of(members):
            totals[u] += plus * worth
        for u in nodes_of(around):
            totals[u] -= minus * worth
    return totals


def myerson_exact(g: Graph, v: CharacteristicFunction, method: str = 'connected') -> Allocation:
    if method == 'connected':
        return myerson_exact_connected(g, v)
    if method == 'subsets':
        return myerson_exact_subsets(g, v)
    raise InvalidParameterError(f"unknown exact method {method!r}; expected subsets or connected")


def max_deviation(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise InvalidParameterError(f"length mismatch: {len(a)} vs {len(b)}")
    return max((abs(x - y) for x, y in zip(a, b)), default=0.0)
