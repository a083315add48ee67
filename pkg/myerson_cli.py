#!/usr/bin/env python3
"""
Myerson Toolkit - command line front door
Generate graphs and games, compute exact or sampled Myerson values,
evaluate sample-size bounds and run the benchmark grid.
"""

import argparse
import logging
import sys
import traceback
from pathlib import Path
from typing import List, Optional

import numpy as np

from bench import Budget, GraphParams, appendix_config, bench_suite, BenchConfig, paper_config
from bounds import BoundParams, samples_required
from coalition_graph import GRAPH_MODELS, generate_graph, parse_graph, serialize_graph
from exact_engine import max_deviation, myerson_exact_connected, myerson_exact_subsets
from games import GAME_TYPES, generate_game, load_game, parse_game_spec, store_table
from myerson_config import BENCH_SETTINGS, EXACT_SETTINGS, load_settings
from myerson_errors import MyersonError
from samplers import ALGORITHMS, SamplerConfig, approximate

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def _entropy_seed() -> int:
    return int(np.random.SeedSequence().entropy) & ((1 << 63) - 1)


def _announce_seed(seed: int):
    print(f"seed {seed}", file=sys.stderr)


def _write_output(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text)
        logger.info(f"✅ Wrote {path}")
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    return Path(path).read_text()


def _int_list(raw: str) -> List[int]:
    return [int(x) for x in raw.split(',') if x.strip()]


def _float_list(raw: str) -> List[float]:
    return [float(x) for x in raw.split(',') if x.strip()]


def _seed_range(raw: str) -> List[int]:
    """'a:b' (half-open) or a comma list"""
    if ':' in raw:
        low, high = raw.split(':', 1)
        return list(range(int(low), int(high)))
    return _int_list(raw)


# Commands

def cmd_gen_graph(args) -> int:
    seed = args.seed
    if seed is None and args.model in ('erdos_renyi', 'barabasi_albert'):
        seed = _entropy_seed()
        _announce_seed(seed)
    g = generate_graph(args.model, args.n, seed or 0, edge_prob=args.edge_prob, m0=args.m0, m=args.m)
    _write_output(serialize_graph(g), args.output)
    return 0


def cmd_gen_game(args) -> int:
    text = args.spec
    if not any(token.startswith('seed=') for token in text.split()):
        seed = _entropy_seed()
        _announce_seed(seed)
        text = f"{text} seed={seed}"
    v = generate_game(parse_game_spec(text))
    _write_output(store_table(v), args.output)
    return 0


def cmd_exact(args) -> int:
    g = parse_graph(_read(args.graph))
    v = load_game(_read(args.game))
    if args.method == 'subsets':
        allocation = myerson_exact_subsets(g, v)
    else:
        allocation = myerson_exact_connected(g, v)
    if args.check:
        other = myerson_exact_connected(g, v) if args.method == 'subsets' else myerson_exact_subsets(g, v)
        gap = max_deviation(allocation.values, other.values)
        if gap > EXACT_SETTINGS['tolerance']:
            raise MyersonError(f"exact engines disagree by {gap:.3g}")
        logger.info(f"✅ Engines agree within {gap:.3g}")
    sys.stdout.write(allocation.to_text())
    return 0


def cmd_approx(args) -> int:
    g = parse_graph(_read(args.graph))
    v = load_game(_read(args.game))
    seed = args.seed
    if seed is None:
        seed = _entropy_seed()
        _announce_seed(seed)
    cfg = SamplerConfig(samples=args.samples, seed=seed, exact_levels=args.exact_levels)
    allocation = approximate(args.alg, g, v, cfg)
    logger.info(f"📊 {args.alg}: {allocation.samples} samples, {allocation.elapsed_ns / 1e6:.1f} ms")
    sys.stdout.write(allocation.to_text())
    return 0


def cmd_bound(args) -> int:
    params = BoundParams(epsilon=args.epsilon, delta=args.delta, r=args.range, n=args.n,
                         exact_levels=args.exact_levels, formula=args.formula)
    print(samples_required(params, args.alg))
    return 0


def _bench_config(args) -> BenchConfig:
    budgets = [Budget('samples', m) for m in _int_list(args.sample_budgets)]
    budgets += [Budget('wall_time', t) for t in _float_list(args.time_budgets)]
    options = dict(
        n=args.n,
        algs=tuple(args.algs.split(',')),
        seeds=_seed_range(args.seeds),
        budgets=budgets,
        exact_levels=args.exact_levels,
        instance_seed=args.instance_seed,
        workers=args.workers or load_settings().bench_workers,
        batch_size=load_settings().batch_size,
    )
    if args.max_gain is not None:
        options['max_gain'] = args.max_gain
    if args.grid == 'paper':
        return paper_config(**options)
    if args.grid == 'appendix':
        return appendix_config(**options)
    graph = GraphParams(args.graph_model, edge_prob=args.edge_prob, m0=args.m0, m=args.m)
    cells = [(graph, game) for game in args.game_types.split(',')]
    return BenchConfig(cells=cells, **options)


def cmd_bench(args) -> int:
    config = _bench_config(args)
    _write_output(bench_suite(config), args.output)
    return 0


class OneLineParser(argparse.ArgumentParser):
    """Rejects bad arguments with a single `error:` line and exit code 2"""

    def error(self, message: str):
        self.exit(2, f"error: {self.prog}: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = OneLineParser(prog='myerson', description="Exact and Monte Carlo Myerson values")
    parser.add_argument('--verbose', '-v', action='store_true', help="debug logging")
    sub = parser.add_subparsers(dest='verb', metavar='<command>')
    sub.required = True

    p = sub.add_parser('gen-graph', help="generate a random graph")
    p.add_argument('--model', required=True, choices=GRAPH_MODELS)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--edge-prob', type=float)
    p.add_argument('--m0', type=int)
    p.add_argument('--m', type=int)
    p.add_argument('--seed', type=int)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_gen_graph)

    p = sub.add_parser('gen-game', help="materialize a game from a spec string")
    p.add_argument('--spec', required=True, help=f"type=<{'|'.join(GAME_TYPES)}> n=<n> seed=<s> ...")
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_gen_game)

    p = sub.add_parser('exact', help="exact Myerson value")
    p.add_argument('--graph', required=True)
    p.add_argument('--game', required=True, help="game table or spec-string file")
    p.add_argument('--method', choices=('subsets', 'connected'), default='connected')
    p.add_argument('--check', action='store_true', help="cross-check with the other engine")
    p.set_defaults(handler=cmd_exact)

    p = sub.add_parser('approx', help="Monte Carlo estimate")
    p.add_argument('--alg', required=True, choices=ALGORITHMS)
    p.add_argument('--graph', required=True)
    p.add_argument('--game', required=True)
    p.add_argument('--samples', type=int, required=True)
    p.add_argument('--exact-levels', type=int, default=0)
    p.add_argument('--seed', type=int)
    p.set_defaults(handler=cmd_approx)

    p = sub.add_parser('bound', help="PAC sample count")
    p.add_argument('--alg', required=True, choices=ALGORITHMS)
    p.add_argument('--epsilon', type=float, required=True)
    p.add_argument('--delta', type=float, required=True)
    p.add_argument('--range', type=float, required=True)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--exact-levels', type=int, default=0)
    p.add_argument('--formula', choices=('paper', 'standard'), default='paper')
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser('bench', help="error-vs-budget experiment grid")
    p.add_argument('--grid', choices=('paper', 'appendix', 'custom'), default='paper')
    p.add_argument('--n', type=int, default=BENCH_SETTINGS['n'])
    p.add_argument('--algs', default=','.join(ALGORITHMS))
    p.add_argument('--seeds', default=f"0:{BENCH_SETTINGS['seeds']}", help="a:b or comma list")
    p.add_argument('--sample-budgets', default=','.join(str(m) for m in BENCH_SETTINGS['sample_budgets']))
    p.add_argument('--time-budgets', default=','.join(str(t) for t in BENCH_SETTINGS['time_budgets']))
    p.add_argument('--exact-levels', type=int, default=BENCH_SETTINGS['hybrid_exact_levels'])
    p.add_argument('--instance-seed', type=int, default=BENCH_SETTINGS['instance_seed'])
    p.add_argument('--max-gain', type=float)
    p.add_argument('--workers', type=int)
    p.add_argument('--graph-model', choices=GRAPH_MODELS, default='barabasi_albert')
    p.add_argument('--edge-prob', type=float)
    p.add_argument('--m0', type=int)
    p.add_argument('--m', type=int)
    p.add_argument('--game-types', default='uniform,superadditive,submodular')
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = load_settings()
    logging.basicConfig(format=LOG_FORMAT, level=logging.DEBUG if args.verbose else settings.log_level)
    try:
        return args.handler(args)
    except (MyersonError, OSError, ValueError) as e:
        logger.debug(traceback.format_exc())
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        logger.info("Stopped by user (Ctrl+C)")
        return 130


if __name__ == "__main__":
    sys.exit(main())
