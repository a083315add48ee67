"""
Monte Carlo estimators of the Myerson value

- PermutationSampler: sampled preceding sets with the swap trick
- HybridSampler: exact contributions for the first/last Ex+1 positions,
  sampling in between
- ConnectedSampler: uniform nonempty coalitions, only connected ones count,
  evaluated with the raw characteristic function
"""

import hashlib
import logging
import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, List, Optional, Tuple

import numpy as np

from coalition_graph import Coalition, Graph, full_mask, is_connected, neighbors, nodes_of, popcount
from exact_engine import Allocation, CompensatedSum, myerson_weights, shapley_weight
from games import CharacteristicFunction, restrict
from myerson_errors import InvalidParameterError

logger = logging.getLogger(__name__)

SWAP_NODE = 0
ALGORITHMS = ('permutations', 'hybrid', 'connected')


class RngStream:
    """Seeded numpy stream; split(label) derives an independent child stream"""

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        if seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self.path = path
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=path)))

    def split(self, label: str) -> 'RngStream':
        digest = hashlib.blake2b(label.encode('utf-8'), digest_size=8).digest()
        return RngStream(self.seed, self.path + (int.from_bytes(digest, 'little'),))

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in [low, high], both inclusive"""
        return int(self.generator.integers(low, high, endpoint=True))

    def bits(self, n: int) -> int:
        """n independent fair bits as an int"""
        raw = int.from_bytes(self.generator.bytes(8), 'little')
        return raw & full_mask(n)

    def choose(self, pool: List[int], k: int) -> List[int]:
        return [pool[i] for i in self.generator.choice(len(pool), size=k, replace=False)]


def random_coalition_of_size(n: int, k: int, excluded: int, rng: RngStream) -> Coalition:
    """Uniform size-k subset of {0..n-1} minus `excluded`"""
    if not 0 <= k <= n - 1:
        raise InvalidParameterError(f"coalition size {k} outside 0..{n - 1}")
    if not 0 <= excluded < n:
        raise InvalidParameterError(f"excluded node {excluded} outside 0..{n - 1}")
    pool = [u for u in range(n) if u != excluded]
    if k == len(pool):
        return full_mask(n) & ~(1 << excluded)
    c = 0
    for u in rng.choose(pool, k):
        c |= 1 << u
    return c


def random_nonempty_coalition(n: int, rng: RngStream) -> Coalition:
    """Uniform over the 2^n - 1 nonempty subsets (rejects the empty draw)"""
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    while True:
        c = rng.bits(n)
        if c:
            return c


SizeLaw = Callable[[RngStream, int, int], int]


def uniform_size(rng: RngStream, low: int, high: int) -> int:
    return rng.integer(low, high)


@dataclass
class SamplerConfig:
    samples: int
    seed: int = 0
    exact_levels: int = 0
    size_distribution: Optional[SizeLaw] = None

    def validate(self, alg: str):
        if self.samples < 0:
            raise InvalidParameterError(f"sample count must be >= 0, got {self.samples}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}")
        if alg == 'hybrid' and self.exact_levels < 0:
            raise InvalidParameterError(f"exact levels must be >= 0, got {self.exact_levels}")


def swap(sample: Coalition, v: int, s: int = SWAP_NODE) -> Coalition:
    """S with v replaced by s when v is in S; v is never in the result"""
    bit = 1 << v
    if sample & bit:
        return (sample ^ bit) | (1 << s)
    return sample


class _Estimator:
    method = ''

    def __init__(self, graph: Graph, game: CharacteristicFunction, config: SamplerConfig):
        if game.n != graph.n:
            raise InvalidParameterError(f"game has {game.n} players but graph has {graph.n} nodes")
        config.validate(self.method)
        self.graph = graph
        self.game = game
        self.config = config
        self.n = graph.n
        self.rng = RngStream(config.seed).split(self.method)
        self.acc = CompensatedSum(self.n)
        self.drawn = 0
        self.elapsed_ns = 0

    def next_sample(self) -> Coalition:
        raise NotImplementedError

    def contribution(self, sample: Coalition) -> np.ndarray:
        raise NotImplementedError

    def observe(self, sample: Coalition):
        self.acc.add(self.contribution(sample))
        self.drawn += 1

    def draw(self, count: int):
        start = time.perf_counter_ns()
        for _ in range(count):
            self.observe(self.next_sample())
        self.elapsed_ns += time.perf_counter_ns() - start

    def estimate(self) -> np.ndarray:
        raise NotImplementedError

    def allocation(self) -> Allocation:
        return Allocation(self.estimate().tolist(), method=self.method,
                          samples=self.drawn, elapsed_ns=self.elapsed_ns)


class PermutationSampler(_Estimator):
    method = 'permutations'

    def __init__(self, graph: Graph, game: CharacteristicFunction, config: SamplerConfig, memo: bool = True):
        super().__init__(graph, game, config)
        self.restricted = restrict(graph, game, memo=memo)
        self.size_law = config.size_distribution or uniform_size
        self.low, self.high = self._size_range()

    def _size_range(self) -> Tuple[int, int]:
        return 0, self.n - 1

    def next_sample(self) -> Coalition:
        k = self.size_law(self.rng, self.low, self.high)
        return random_coalition_of_size(self.n, k, SWAP_NODE, self.rng)

    def contribution(self, sample: Coalition) -> np.ndarray:
        worth = self.restricted.value
        out = np.empty(self.n)
        for v in range(self.n):
            c = swap(sample, v)
            out[v] = worth(c | (1 << v)) - worth(c)
        return out

    def estimate(self) -> np.ndarray:
        if not self.drawn:
            return np.zeros(self.n)
        return self.acc.value() / self.drawn


def hybrid_size_partition(n: int, exact_levels: int) -> Tuple[List[int], List[int]]:
    """(preceding-set sizes computed exactly, sizes left to sampling)"""
    small = list(range(0, min(exact_levels, n - 1) + 1))
    large = [n - size - 1 for size in small if n - size - 1 > exact_levels]
    exact = sorted(set(small) | set(large))
    sampled = list(range(exact_levels + 1, n - exact_levels - 1))
    return exact, sampled


class HybridSampler(PermutationSampler):
    method = 'hybrid'

    def __init__(self, graph: Graph, game: CharacteristicFunction, config: SamplerConfig, memo: bool = True):
        super().__init__(graph, game, config, memo=memo)
        self.exact_levels = config.exact_levels
        self.full_exact = self.high < self.low
        if self.full_exact and config.samples:
            logger.warning(f"⚠️ Ex={self.exact_levels} covers every position for n={self.n}; "
                           f"ignoring {config.samples} requested samples")
        self.scale = (self.n - 2 * self.exact_levels - 2) / self.n
        start = time.perf_counter_ns()
        self.exact_part = self._exact_part()
        self.elapsed_ns += time.perf_counter_ns() - start

    def _size_range(self) -> Tuple[int, int]:
        ex = self.config.exact_levels
        return ex + 1, self.n - ex - 2

    def _exact_part(self) -> np.ndarray:
        n = self.n
        worth = self.restricted.value
        everyone = full_mask(n)
        exact_sizes, _ = hybrid_size_partition(n, self.exact_levels)
        acc = CompensatedSum(n)
        for size in exact_sizes:
            weight = shapley_weight(n, size)
            for members in combinations(range(n), size):
                c = 0
                for u in members:
                    c |= 1 << u
                base = worth(c)
                gains = np.zeros(n)
                for v in nodes_of(everyone & ~c):
                    gains[v] = weight * (worth(c | (1 << v)) - base)
                acc.add(gains)
        return acc.value()

    def next_sample(self) -> Coalition:
        if self.full_exact:
            raise InvalidParameterError("hybrid run is full-exact; nothing to sample")
        return super().next_sample()

    def draw(self, count: int):
        if self.full_exact:
            return
        super().draw(count)

    def estimate(self) -> np.ndarray:
        if self.full_exact or not self.drawn:
            return self.exact_part.copy()
        return self.exact_part + self.scale * (self.acc.value() / self.drawn)


class ConnectedSampler(_Estimator):
    method = 'connected'

    def __init__(self, graph: Graph, game: CharacteristicFunction, config: SamplerConfig):
        super().__init__(graph, game, config)
        self.scale = float((1 << self.n) - 1)
        self.hits = 0

    def next_sample(self) -> Coalition:
        return random_nonempty_coalition(self.n, self.rng)

    def _terms(self, sample: Coalition) -> Optional[np.ndarray]:
        if not is_connected(self.graph, sample):
            return None
        around = neighbors(self.graph, sample)
        worth = self.game.value(sample)
        plus, minus = myerson_weights(popcount(sample), popcount(around))
        out = np.zeros(self.n)
        for u in nodes_of(sample):
            out[u] = plus * worth
        for u in nodes_of(around):
            out[u] = -minus * worth
        return out

    def contribution(self, sample: Coalition) -> np.ndarray:
        out = self._terms(sample)
        return np.zeros(self.n) if out is None else out

    def observe(self, sample: Coalition):
        out = self._terms(sample)
        if out is not None:
            self.hits += 1
            self.acc.add(out)
        self.drawn += 1

    def estimate(self) -> np.ndarray:
        if not self.drawn:
            return np.zeros(self.n)
        return self.scale / self.drawn * self.acc.value()

    def allocation(self) -> Allocation:
        allocation = super().allocation()
        allocation.meta['connected_hits'] = self.hits
        return allocation


def make_sampler(alg: str, graph: Graph, game: CharacteristicFunction, config: SamplerConfig) -> _Estimator:
    if alg == 'permutations':
        return PermutationSampler(graph, game, config)
    if alg == 'hybrid':
        return HybridSampler(graph, game, config)
    if alg == 'connected':
        return ConnectedSampler(graph, game, config)
    raise InvalidParameterError(f"unknown algorithm {alg!r}; expected one of {', '.join(ALGORITHMS)}")


def _run(alg: str, g: Graph, v: CharacteristicFunction, cfg: SamplerConfig) -> Allocation:
    sampler = make_sampler(alg, g, v, cfg)
    needs_samples = not (isinstance(sampler, HybridSampler) and sampler.full_exact)
    if needs_samples and cfg.samples < 1:
        raise InvalidParameterError(f"{alg} sampling needs at least one sample")
    sampler.draw(cfg.samples)
    allocation = sampler.allocation()
    logger.debug(f"{alg}: {allocation.samples} samples in {allocation.elapsed_ns / 1e6:.1f} ms")
    return allocation


def approx_permutations(g: Graph, v: CharacteristicFunction, cfg: SamplerConfig) -> Allocation:
    return _run('permutations', g, v, cfg)


def approx_hybrid(g: Graph, v: CharacteristicFunction, cfg: SamplerConfig) -> Allocation:
    return _run('hybrid', g, v, cfg)


def approx_connected(g: Graph, v: CharacteristicFunction, cfg: SamplerConfig) -> Allocation:
    return _run('connected', g, v, cfg)


def approximate(alg: str, g: Graph, v: CharacteristicFunction, cfg: SamplerConfig) -> Allocation:
    return _run(alg, g, v, cfg)


def expected_estimate(sampler: _Estimator) -> np.ndarray:
    """Exact expectation of one sample's estimate, by enumerating the sample space

    Only for small n; used to check unbiasedness.
    """
    n = sampler.n
    if isinstance(sampler, ConnectedSampler):
        total = CompensatedSum(n)
        for c in range(1, 1 << n):
            total.add(sampler.contribution(c))
        return total.value()

    pool = [u for u in range(n) if u != SWAP_NODE]
    sizes = list(range(sampler.low, sampler.high + 1))
    total = CompensatedSum(n)
    for k in sizes:
        weight = 1.0 / (len(sizes) * math.comb(n - 1, k))
        for members in combinations(pool, k):
            c = 0
            for u in members:
                c |= 1 << u
            total.add(weight * sampler.contribution(c))
    mean = total.value()
    if isinstance(sampler, HybridSampler):
        if sampler.full_exact:
            return sampler.exact_part.copy()
        return sampler.exact_part + sampler.scale * mean
    return mean
