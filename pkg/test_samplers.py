import math

import numpy as np
import pytest

from bench import l1_error
from coalition_graph import Graph, cycle_graph, generate_graph
from conftest import PATH_VALUES
from exact_engine import myerson_exact_connected, myerson_exact_subsets
from games import GameSpec, UniformGame, generate_game, restrict
from myerson_errors import InvalidParameterError
import samplers
from samplers import (
    ConnectedSampler, HybridSampler, PermutationSampler, RngStream, SamplerConfig, approx_connected,
    approx_hybrid, approx_permutations, approximate, expected_estimate, hybrid_size_partition,
    random_coalition_of_size, random_nonempty_coalition, swap,
)

TOL = 1e-9


class TestRandomCoalitions:
    def test_size_extremes(self):
        rng = RngStream(3)
        assert random_coalition_of_size(5, 0, 2, rng) == 0
        assert random_coalition_of_size(5, 4, 2, rng) == 0b11011

    def test_excluded_never_drawn(self):
        rng = RngStream(4)
        for k in range(6):
            c = random_coalition_of_size(7, k, 3, rng)
            assert not c >> 3 & 1
            assert bin(c).count('1') == k

    def test_uniform_over_subsets(self):
        rng = RngStream(5)
        draws = 10_000
        zeros = sum(random_coalition_of_size(3, 1, 2, rng) == 0b001 for _ in range(draws))
        sigma = math.sqrt(0.25 / draws)
        assert abs(zeros / draws - 0.5) < 3 * sigma

    def test_bad_arguments(self):
        rng = RngStream(0)
        with pytest.raises(InvalidParameterError):
            random_coalition_of_size(3, 3, 0, rng)
        with pytest.raises(InvalidParameterError):
            random_coalition_of_size(3, 1, 3, rng)

    def test_nonempty_single_player(self):
        rng = RngStream(6)
        assert all(random_nonempty_coalition(1, rng) == 1 for _ in range(50))

    def test_nonempty_uniform(self):
        rng = RngStream(7)
        draws = 10_000
        seen = [random_nonempty_coalition(2, rng) for _ in range(draws)]
        assert 0 not in seen
        sigma = math.sqrt((1 / 3) * (2 / 3) / draws)
        for c in (1, 2, 3):
            assert abs(seen.count(c) / draws - 1 / 3) < 3 * sigma

    def test_streams_split_independently(self):
        a = RngStream(9).split('permutations')
        b = RngStream(9).split('hybrid')
        again = RngStream(9).split('permutations')
        first = [a.integer(0, 1 << 30) for _ in range(5)]
        assert first == [again.integer(0, 1 << 30) for _ in range(5)]
        assert first != [b.integer(0, 1 << 30) for _ in range(5)]


def test_swap():
    assert swap(0b110, 1) == 0b101
    assert swap(0b100, 1) == 0b100
    assert swap(0b010, 0) == 0b010


class TestPermutations:
    def test_single_node(self):
        g = Graph.from_edges(1, [])
        v = UniformGame(1, 8)
        for alg in ('permutations', 'hybrid', 'connected'):
            result = approximate(alg, g, v, SamplerConfig(samples=7, seed=1))
            assert result.values == pytest.approx([v.value(1)]), alg

    def test_sample_count_recorded(self, path3, squares):
        result = approx_permutations(path3, squares, SamplerConfig(samples=40, seed=2))
        assert result.samples == 40
        assert result.method == 'permutations'

    def test_needs_samples(self, path3, squares):
        with pytest.raises(InvalidParameterError):
            approx_permutations(path3, squares, SamplerConfig(samples=0))
        with pytest.raises(InvalidParameterError):
            approx_permutations(path3, squares, SamplerConfig(samples=-1))

    def test_deterministic_in_seed(self, path3, squares):
        cfg = SamplerConfig(samples=200, seed=42)
        assert approx_permutations(path3, squares, cfg).values == approx_permutations(path3, squares, cfg).values
        other = approx_permutations(path3, squares, SamplerConfig(samples=200, seed=43))
        assert other.values != approx_permutations(path3, squares, cfg).values

    def test_size_law_hook(self, path3, squares):
        last = SamplerConfig(samples=10, seed=1, size_distribution=lambda rng, low, high: high)
        worth = restrict(path3, squares)
        expected = [worth(0b111) - worth(0b111 ^ (1 << v)) for v in range(3)]
        assert approx_permutations(path3, squares, last).values == pytest.approx(expected)

    @pytest.mark.parametrize('cls', [PermutationSampler, HybridSampler])
    def test_cache_stays_flat_on_large_graphs(self, cls):
        g = cycle_graph(40)
        sampler = cls(g, UniformGame(40, 3), SamplerConfig(samples=0, seed=1, exact_levels=1))
        for _ in range(4):
            sampler.draw(500)
            assert sampler.restricted.memo_size == 0
        assert sampler.drawn == 2000

    def test_unknown_algorithm(self, path3, squares):
        with pytest.raises(InvalidParameterError):
            approximate('bootstrap', path3, squares, SamplerConfig(samples=1))


class TestHybrid:
    def test_size_partition(self):
        assert hybrid_size_partition(5, 0) == ([0, 4], [1, 2, 3])
        assert hybrid_size_partition(15, 1) == ([0, 1, 13, 14], list(range(2, 13)))
        assert hybrid_size_partition(3, 1) == ([0, 1, 2], [])

    def test_full_exact_path(self, path3, squares):
        result = approx_hybrid(path3, squares, SamplerConfig(samples=0, exact_levels=1))
        assert result.values == pytest.approx(PATH_VALUES, abs=TOL)
        assert result.samples == 0

    def test_zero_levels_on_three_nodes_needs_samples(self, path3, squares):
        with pytest.raises(InvalidParameterError):
            approx_hybrid(path3, squares, SamplerConfig(samples=0, exact_levels=0))

    def test_full_exact_ignores_requested_samples(self, path3, squares, caplog):
        result = approx_hybrid(path3, squares, SamplerConfig(samples=50, exact_levels=3))
        assert result.samples == 0
        assert 'ignoring 50 requested samples' in caplog.text

    @pytest.mark.parametrize('n', [3, 4, 5, 8, 10, 12])
    def test_full_exact_matches_subset_engine(self, n):
        g = generate_graph('barabasi_albert', n, seed=n, m0=2, m=1 + n % 2)
        v = generate_game(GameSpec('uniform' if n > 10 else 'superadditive', n, seed=n))
        levels = math.ceil((n - 2) / 2)
        sampler = HybridSampler(g, v, SamplerConfig(samples=0, exact_levels=levels))
        assert sampler.full_exact
        result = approx_hybrid(g, v, SamplerConfig(samples=0, exact_levels=levels))
        assert max(abs(a - b) for a, b in zip(result.values, myerson_exact_subsets(g, v).values)) <= TOL

    def test_negative_levels(self, path3, squares):
        with pytest.raises(InvalidParameterError):
            approx_hybrid(path3, squares, SamplerConfig(samples=5, exact_levels=-1))


class TestConnected:
    def test_forced_connected_sample(self, path3, squares):
        sampler = ConnectedSampler(path3, squares, SamplerConfig(samples=1))
        sampler.observe(0b011)
        result = sampler.allocation()
        assert result.values == pytest.approx([14 / 3, 14 / 3, -28 / 3])
        assert result.meta['connected_hits'] == 1
        assert l1_error(result.values, PATH_VALUES) == pytest.approx(15)

    def test_disconnected_sample_adds_nothing(self, path3, squares):
        sampler = ConnectedSampler(path3, squares, SamplerConfig(samples=1))
        sampler.observe(0b101)
        assert sampler.allocation().values == [0.0, 0.0, 0.0]
        assert sampler.hits == 0

    def test_never_builds_restricted_game(self, path3, squares, monkeypatch):
        def refuse(*args, **kwargs):
            raise AssertionError("connected sampling must use the raw game")
        monkeypatch.setattr(samplers, 'restrict', refuse)
        result = approx_connected(path3, squares, SamplerConfig(samples=500, seed=3))
        assert result.samples == 500


class TestUnbiasedness:
    """Exhaustive expectation over each estimator's sample space equals the exact value"""

    def _check(self, sampler, exact, label):
        expected = expected_estimate(sampler)
        assert np.max(np.abs(expected - np.array(exact))) <= TOL, label

    def test_permutations(self, instances):
        for g, v, label in instances(25, 3, 6, seed=31):
            exact = myerson_exact_subsets(g, v).values
            self._check(PermutationSampler(g, v, SamplerConfig(samples=0)), exact, label)

    def test_hybrid_every_level(self, instances):
        for g, v, label in instances(15, 3, 6, seed=37):
            exact = myerson_exact_subsets(g, v).values
            for levels in range(0, g.n):
                self._check(HybridSampler(g, v, SamplerConfig(samples=0, exact_levels=levels)), exact, label)

    def test_connected(self, instances):
        for g, v, label in instances(25, 3, 6, seed=41):
            exact = myerson_exact_connected(g, v).values
            self._check(ConnectedSampler(g, v, SamplerConfig(samples=0)), exact, label)


@pytest.mark.slow
def test_permutations_converge_on_path(path3, squares):
    within = 0
    seeds = range(100)
    for seed in seeds:
        result = approx_permutations(path3, squares, SamplerConfig(samples=100_000, seed=seed))
        within += l1_error(result.values, PATH_VALUES) < 0.05
    assert within >= 0.95 * len(seeds)


@pytest.mark.slow
@pytest.mark.parametrize('alg', ['permutations', 'hybrid'])
@pytest.mark.parametrize('m', [2 ** 10, 2 ** 12])
def test_error_shrinks_with_square_root_of_samples(alg, m):
    g = generate_graph('barabasi_albert', 15, seed=2020, m0=2, m=2)
    v = generate_game(GameSpec('superadditive', 15, seed=2020, max_gain=3.0))
    exact = myerson_exact_connected(g, v).values

    def mean_error(samples):
        errors = []
        for seed in range(30):
            result = approximate(alg, g, v, SamplerConfig(samples=samples, seed=seed, exact_levels=1))
            errors.append(l1_error(result.values, exact))
        return sum(errors) / len(errors)

    ratio = mean_error(4 * m) / mean_error(m)
    assert 0.35 <= ratio <= 0.65


def _error_after_evaluations(sampler, exact, evaluations):
    while sampler.restricted.evaluations < evaluations:
        sampler.draw(1)
    return l1_error(sampler.estimate().tolist(), exact)


@pytest.mark.slow
@pytest.mark.parametrize('game', ['uniform', 'superadditive', 'submodular'])
def test_hybrid_wins_at_equal_evaluations(game):
    g = generate_graph('barabasi_albert', 15, seed=2020, m0=2, m=2)
    v = generate_game(GameSpec(game, 15, seed=2020, max_gain=3.0))
    exact = myerson_exact_connected(g, v).values
    evaluations = 30 * 1024
    wins = 0
    for seed in range(30):
        cfg = SamplerConfig(samples=0, seed=seed, exact_levels=1)
        hybrid = _error_after_evaluations(HybridSampler(g, v, cfg), exact, evaluations)
        plain = _error_after_evaluations(PermutationSampler(g, v, cfg), exact, evaluations)
        wins += hybrid <= plain
    assert wins >= 24, game
