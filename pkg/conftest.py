import random

import pytest

from coalition_graph import Graph, complete_graph, cycle_graph, generate_graph, path_graph, star_graph
from games import GameSpec, SizeGame, generate_game

PATH_VALUES = (8 / 3, 11 / 3, 8 / 3)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def star5():
    return star_graph(5)


@pytest.fixture
def triangle():
    return complete_graph(3)


@pytest.fixture
def squares():
    """nu(C) = |C|^2 on three players"""
    return SizeGame(3, 2.0)


def make_instance(rng: random.Random, n: int):
    """Random (graph, game) pair covering every graph model and game generator"""
    model = rng.choice(['cycle', 'star', 'erdos_renyi', 'barabasi_albert', 'path'])
    seed = rng.randrange(1 << 32)
    if model == 'path':
        g = path_graph(n)
    elif model == 'cycle':
        g = cycle_graph(n)
    elif model == 'star':
        g = star_graph(n)
    elif model == 'erdos_renyi':
        g = generate_graph('erdos_renyi', n, seed, edge_prob=rng.choice([0.2, 0.4, 0.7]))
    else:
        m0 = rng.randint(1, min(3, n - 1))
        g = generate_graph('barabasi_albert', n, seed, m0=m0, m=rng.randint(1, m0))
    game_type = rng.choice(['uniform', 'superadditive', 'submodular', 'size'])
    v = generate_game(GameSpec(type=game_type, n=n, seed=seed, size_exponent=rng.choice([1.0, 1.5, 2.0])))
    return g, v, f"{model}/{game_type}/n={n}/seed={seed}"


@pytest.fixture
def instances():
    """Factory: list of random instances with n drawn from [low, high]"""
    def build(count: int, low: int, high: int, seed: int = 7):
        rng = random.Random(seed)
        return [make_instance(rng, rng.randint(low, high)) for _ in range(count)]
    return build


@pytest.fixture
def random_graph():
    def build(n: int, p: float, seed: int) -> Graph:
        return generate_graph('erdos_renyi', n, seed, edge_prob=p)
    return build
