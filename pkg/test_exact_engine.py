import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from coalition_graph import (
    Graph, add_edge, coalition_from_nodes, complete_graph, connected_components, cycle_graph, is_connected,
    neighbors, nodes_of, path_graph, star_graph,
)
from conftest import PATH_VALUES
from exact_engine import (
    Allocation, CompensatedSum, count_connected, enumerate_connected, max_deviation, myerson_exact,
    myerson_exact_connected, myerson_exact_rational, myerson_exact_subsets, myerson_weights, parse_allocation,
    shapley_subsets, shapley_weight,
)
from games import FunctionGame, SizeGame, UniformGame
from myerson_errors import InvalidParameterError, SizeLimitError

TOL = 1e-9


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, edges)


class TestWeights:
    def test_shapley_weight(self):
        assert shapley_weight(3, 1) == pytest.approx(1 / 6)
        assert shapley_weight(4, 0) == pytest.approx(1 / 4)

    @pytest.mark.parametrize('a,b', [(1, 0), (1, 3), (2, 1), (3, 2), (5, 5)])
    def test_factorial_forms(self, a, b):
        plus, minus = myerson_weights(a, b, exact=True)
        total = math.factorial(a + b)
        assert plus == Fraction(math.factorial(a - 1) * math.factorial(b), total)
        if b:
            assert minus == Fraction(math.factorial(a) * math.factorial(b - 1), total)
        else:
            assert minus == 0
        assert myerson_weights(a, b) == pytest.approx((float(plus), float(minus)))

    def test_path_pair_weights(self):
        assert myerson_weights(2, 1, exact=True) == (Fraction(1, 6), Fraction(1, 3))


class TestEnumeration:
    def test_path_coalitions(self, path3):
        found = sorted(c for c, _ in enumerate_connected(path3))
        assert found == sorted([0b001, 0b010, 0b100, 0b011, 0b110, 0b111])

    @pytest.mark.parametrize('g,count', [(path_graph(3), 6), (cycle_graph(4), 13), (star_graph(5), 20)])
    def test_counts(self, g, count):
        assert count_connected(g) == count

    def test_complete_graph_has_every_coalition(self):
        assert count_connected(complete_graph(7)) == (1 << 7) - 1

    @given(small_graphs())
    def test_matches_brute_force(self, g):
        pairs = list(enumerate_connected(g))
        found = [c for c, _ in pairs]
        assert len(found) == len(set(found))
        expected = {c for c in range(1, 1 << g.n) if is_connected(g, c)}
        assert set(found) == expected
        for c, around in pairs:
            assert around == neighbors(g, c)


class TestExactValues:
    @pytest.mark.parametrize('engine', [myerson_exact_subsets, myerson_exact_connected])
    def test_path_squares(self, engine, path3, squares):
        assert engine(path3, squares).values == pytest.approx(PATH_VALUES, abs=TOL)

    def test_triangle_is_shapley(self, triangle, squares):
        assert myerson_exact_subsets(triangle, squares).values == pytest.approx([3, 3, 3], abs=TOL)
        assert shapley_subsets(squares).values == pytest.approx([3, 3, 3], abs=TOL)

    @pytest.mark.parametrize('engine', [myerson_exact_subsets, myerson_exact_connected])
    def test_additive_game_pays_ones(self, engine):
        g = Graph.from_edges(6, [(0, 1), (2, 3), (3, 4)])
        assert engine(g, SizeGame(6, 1.0)).values == pytest.approx([1.0] * 6, abs=TOL)

    @pytest.mark.parametrize('engine', [myerson_exact_subsets, myerson_exact_connected])
    def test_isolated_nodes(self, engine):
        g = Graph.from_edges(2, [])
        assert engine(g, SizeGame(2, 2.0)).values == pytest.approx([1, 1], abs=TOL)

    def test_single_node(self):
        g = Graph.from_edges(1, [])
        v = UniformGame(1, 3)
        assert myerson_exact_connected(g, v).values == pytest.approx([v.value(1)])

    def test_rational_path(self, path3, squares):
        assert myerson_exact_rational(path3, squares) == [Fraction(8, 3), Fraction(11, 3), Fraction(8, 3)]

    def test_dispatch(self, path3, squares):
        assert myerson_exact(path3, squares, 'subsets').method == 'exact-subsets'
        assert myerson_exact(path3, squares).method == 'exact-connected'
        with pytest.raises(InvalidParameterError):
            myerson_exact(path3, squares, 'permutations')

    def test_visit_count_recorded(self, star5):
        allocation = myerson_exact_connected(star5, SizeGame(5, 2.0))
        assert allocation.meta['connected_coalitions'] == 20

    def test_size_mismatch(self, path3):
        with pytest.raises(InvalidParameterError):
            myerson_exact_connected(path3, SizeGame(4))

    def test_subset_engine_limit(self):
        with pytest.raises(SizeLimitError):
            myerson_exact_subsets(path_graph(25), SizeGame(25))


class TestOracleEquivalence:
    def test_engines_agree(self, instances):
        for g, v, label in instances(50, 4, 10, seed=2020):
            a = myerson_exact_subsets(g, v).values
            b = myerson_exact_connected(g, v).values
            assert max_deviation(a, b) <= TOL, label

    def test_rational_engine_agrees(self, instances):
        for g, v, label in instances(8, 3, 7, seed=11):
            exact = [float(x) for x in myerson_exact_rational(g, v)]
            assert max_deviation(exact, myerson_exact_connected(g, v).values) <= TOL, label


class TestAxioms:
    def test_component_efficiency(self, instances):
        for g, v, label in instances(50, 4, 10, seed=17):
            values = myerson_exact_connected(g, v).values
            for part in connected_components(g):
                paid = math.fsum(values[u] for u in nodes_of(part))
                assert paid == pytest.approx(v.value(part), abs=TOL), label

    def test_fairness_under_edge_addition(self, instances):
        checked = 0
        for g, v, label in instances(50, 4, 10, seed=23):
            missing = [(u, w) for u in range(g.n) for w in range(u + 1, g.n) if not g.has_edge(u, w)]
            if not missing:
                continue
            u, w = missing[len(missing) // 2]
            before = myerson_exact_connected(g, v).values
            after = myerson_exact_connected(add_edge(g, u, w), v).values
            assert after[u] - before[u] == pytest.approx(after[w] - before[w], abs=TOL), label
            checked += 1
        assert checked > 0

    def test_symmetric_cycle(self):
        g = cycle_graph(7)
        values = myerson_exact_connected(g, SizeGame(7, 2.0)).values
        assert values == pytest.approx([49 / 7] * 7, abs=TOL)

    def test_isolated_player_gets_own_worth(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2)])
        v = FunctionGame(4, lambda c: bin(c).count('1') ** 3 + (c & 1))
        values = myerson_exact_subsets(g, v).values
        assert values[3] == pytest.approx(v.value(coalition_from_nodes([3])), abs=TOL)


class TestAllocation:
    def test_text_format(self):
        assert Allocation(list(PATH_VALUES)).to_text() == "0 2.66666666667\n1 3.66666666667\n2 2.66666666667\n"

    def test_parse_text(self):
        parsed = parse_allocation("0 1.5\n1 -2\n\n")
        assert parsed.values == [1.5, -2.0]

    def test_parse_rejects_out_of_order(self):
        with pytest.raises(InvalidParameterError, match='line 2'):
            parse_allocation("0 1\n2 1\n")

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidParameterError):
            Allocation([1.0, float('nan')])

    def test_total(self):
        assert Allocation([0.1] * 10).total() == 1.0

    def test_max_deviation(self):
        assert max_deviation([1, 2], [1, 2]) == 0
        assert max_deviation([1, 2], [0, 2.5]) == 1
        with pytest.raises(InvalidParameterError):
            max_deviation([1], [1, 2])


def test_compensated_sum_keeps_small_terms():
    acc = CompensatedSum(2)
    acc.add([1e16, 1.0])
    acc.add([1.0, 1e-16])
    acc.add([-1e16, 0.0])
    acc.add_at(1, -1.0)
    assert acc.value().tolist() == [1.0, 1e-16]
