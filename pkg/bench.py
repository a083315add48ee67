"""
Benchmark harness: L1 error of the estimators against the exact Myerson value
under sample-count and wall-time budgets, emitted as CSV.
"""

import csv
import io
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

from coalition_graph import Graph, generate_graph
from exact_engine import Allocation, max_deviation, myerson_exact_connected, myerson_exact_subsets
from games import CharacteristicFunction, GameSpec, generate_game
from myerson_config import BENCH_SETTINGS, EXACT_SETTINGS, GAME_DEFAULTS, GRAPH_DEFAULTS, OUTPUT_SETTINGS
from myerson_errors import InvalidParameterError, SizeLimitError
from samplers import ALGORITHMS, HybridSampler, SamplerConfig, make_sampler

logger = logging.getLogger(__name__)

BUDGET_KINDS = ('samples', 'wall_time')
CSV_HEADER = OUTPUT_SETTINGS['csv_header']


@dataclass(frozen=True)
class Budget:
    kind: str
    amount: float

    def __post_init__(self):
        if self.kind not in BUDGET_KINDS:
            raise InvalidParameterError(f"unknown budget kind {self.kind!r}; expected samples or wall_time")
        if not self.amount > 0:
            raise InvalidParameterError(f"budget must be positive, got {self.amount}")
        if self.kind == 'samples' and int(self.amount) != self.amount:
            raise InvalidParameterError(f"sample budget must be an integer, got {self.amount}")

    def label(self) -> str:
        return str(int(self.amount)) if self.kind == 'samples' else repr(float(self.amount))


@dataclass
class TrialRecord:
    alg: str
    graph_model: str
    game_type: str
    n: int
    seed: int
    budget_kind: str
    budget: float
    samples: int
    elapsed_ns: int
    error_l1: float

    def to_row(self) -> List[str]:
        budget = Budget(self.budget_kind, self.budget).label()
        return [self.alg, self.graph_model, self.game_type, str(self.n), str(self.seed),
                self.budget_kind, budget, str(self.samples), str(self.elapsed_ns), repr(self.error_l1)]

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> 'TrialRecord':
        kind = row['budget_kind']
        return cls(
            alg=row['alg'],
            graph_model=row['graph_model'],
            game_type=row['game_type'],
            n=int(row['n']),
            seed=int(row['seed']),
            budget_kind=kind,
            budget=int(row['budget']) if kind == 'samples' else float(row['budget']),
            samples=int(row['samples']),
            elapsed_ns=int(row['elapsed_ns']),
            error_l1=float(row['error_l1']),
        )


def l1_error(est: Sequence[float], exact: Sequence[float]) -> float:
    """Sum over players of absolute deviations"""
    if len(est) != len(exact):
        raise InvalidParameterError(f"length mismatch: {len(est)} vs {len(exact)}")
    return sum(abs(a - b) for a, b in zip(est, exact))


def run_trial(alg: str, g: Graph, v: CharacteristicFunction, exact: Allocation, budget: Budget, seed: int,
              exact_levels: int = BENCH_SETTINGS['hybrid_exact_levels'],
              batch_size: int = BENCH_SETTINGS['batch_size'],
              graph_model: str = '', game_type: str = '') -> TrialRecord:
    """Run one estimator until the budget is spent and score its final estimate"""
    if batch_size < 1:
        raise InvalidParameterError(f"batch size must be positive, got {batch_size}")
    start = time.perf_counter_ns()
    nominal = int(budget.amount) if budget.kind == 'samples' else 0
    sampler = make_sampler(alg, g, v, SamplerConfig(samples=nominal, seed=seed, exact_levels=exact_levels))
    idle = isinstance(sampler, HybridSampler) and sampler.full_exact

    if idle:
        pass
    elif budget.kind == 'samples':
        target = int(budget.amount)
        while sampler.drawn < target:
            sampler.draw(min(batch_size, target - sampler.drawn))
    else:
        limit_ns = int(budget.amount * 1e9)
        batch = min(BENCH_SETTINGS['probe_batch'], batch_size)
        while time.perf_counter_ns() - start < limit_ns:
            before = time.perf_counter_ns()
            sampler.draw(batch)
            per_sample = max((time.perf_counter_ns() - before) / batch, 1.0)
            remaining = limit_ns - (time.perf_counter_ns() - start)
            batch = max(1, min(batch_size, int(remaining / per_sample)))

    elapsed = time.perf_counter_ns() - start
    estimate = sampler.allocation()
    return TrialRecord(
        alg=alg,
        graph_model=graph_model,
        game_type=game_type,
        n=g.n,
        seed=seed,
        budget_kind=budget.kind,
        budget=int(budget.amount) if budget.kind == 'samples' else float(budget.amount),
        samples=estimate.samples,
        elapsed_ns=elapsed,
        error_l1=l1_error(estimate.values, exact.values),
    )


# Experiment grid

@dataclass(frozen=True)
class GraphParams:
    model: str
    edge_prob: Optional[float] = None
    m0: Optional[int] = None
    m: Optional[int] = None

    def label(self) -> str:
        if self.model == 'erdos_renyi':
            return f"erdos_renyi/p={self.edge_prob}"
        if self.model == 'barabasi_albert':
            return f"barabasi_albert/m0={self.m0}/m={self.m}"
        return self.model

    def build(self, n: int, seed: int) -> Graph:
        return generate_graph(self.model, n, seed, edge_prob=self.edge_prob, m0=self.m0, m=self.m)


def game_label(spec: GameSpec) -> str:
    if spec.type == 'superadditive':
        return f"superadditive/maxGain={spec.max_gain}"
    if spec.type == 'submodular':
        return f"submodular/maxSingleton={spec.max_singleton}"
    if spec.type == 'size':
        return f"size/exponent={spec.size_exponent}"
    return spec.type


@dataclass
class BenchConfig:
    cells: List[Tuple[GraphParams, str]]
    n: int = BENCH_SETTINGS['n']
    algs: Tuple[str, ...] = ALGORITHMS
    seeds: Sequence[int] = tuple(range(BENCH_SETTINGS['seeds']))
    budgets: List[Budget] = field(default_factory=list)
    exact_levels: int = BENCH_SETTINGS['hybrid_exact_levels']
    instance_seed: int = BENCH_SETTINGS['instance_seed']
    workers: int = BENCH_SETTINGS['workers']
    batch_size: int = BENCH_SETTINGS['batch_size']
    max_gain: float = GAME_DEFAULTS['max_gain']
    max_singleton: float = GAME_DEFAULTS['max_singleton']
    size_exponent: float = GAME_DEFAULTS['size_exponent']

    def game_spec(self, game_type: str) -> GameSpec:
        return GameSpec(type=game_type, n=self.n, seed=self.instance_seed, max_gain=self.max_gain,
                        max_singleton=self.max_singleton, size_exponent=self.size_exponent)

    def validate(self):
        if not self.cells:
            raise InvalidParameterError("bench grid has no (graph, game) cells")
        if not self.budgets:
            raise InvalidParameterError("bench grid has no budget points")
        for alg in self.algs:
            if alg not in ALGORITHMS:
                raise InvalidParameterError(f"unknown algorithm {alg!r}")
        for _, game_type in self.cells:
            spec = self.game_spec(game_type)
            try:
                spec.validate()
            except SizeLimitError as e:
                raise SizeLimitError(f"infeasible grid cell: {e}")


def default_budgets() -> List[Budget]:
    budgets = [Budget('samples', m) for m in BENCH_SETTINGS['sample_budgets']]
    budgets.extend(Budget('wall_time', t) for t in BENCH_SETTINGS['time_budgets'])
    return budgets


def paper_config(**overrides) -> BenchConfig:
    """Preferential attachment graph, three random games"""
    ba = GraphParams('barabasi_albert', m0=GRAPH_DEFAULTS['m0'], m=GRAPH_DEFAULTS['m'])
    cells = [(ba, game) for game in ('uniform', 'superadditive', 'submodular')]
    overrides.setdefault('budgets', default_budgets())
    return BenchConfig(cells=cells, **overrides)


def appendix_config(**overrides) -> BenchConfig:
    """Cycle and Erdos-Renyi graphs"""
    cycle = GraphParams('cycle')
    er = GraphParams('erdos_renyi', edge_prob=GRAPH_DEFAULTS['edge_prob'])
    cells = [(cycle, game) for game in ('size', 'uniform', 'superadditive')]
    cells += [(er, game) for game in ('uniform', 'superadditive', 'submodular')]
    overrides.setdefault('budgets', default_budgets())
    return BenchConfig(cells=cells, **overrides)


def exact_reference(g: Graph, v: CharacteristicFunction) -> Allocation:
    """Connected-coalition engine, cross-checked by the subset engine for small n"""
    exact = myerson_exact_connected(g, v)
    if g.n <= EXACT_SETTINGS['cross_check_limit']:
        check = myerson_exact_subsets(g, v)
        gap = max_deviation(exact.values, check.values)
        if gap > EXACT_SETTINGS['tolerance'] * max(1.0, max(abs(x) for x in exact.values)):
            logger.error(f"❌ Exact engines disagree by {gap:.3g}")
            raise InvalidParameterError(f"exact engines disagree by {gap:.3g}")
    return exact


def _trial_job(job) -> TrialRecord:
    alg, g, v, exact, budget, seed, exact_levels, batch_size, graph_label, game_text = job
    return run_trial(alg, g, v, exact, budget, seed, exact_levels=exact_levels, batch_size=batch_size,
                     graph_model=graph_label, game_type=game_text)


def run_suite(config: BenchConfig) -> List[TrialRecord]:
    config.validate()
    jobs = []
    for graph_params, game_type in config.cells:
        spec = config.game_spec(game_type)
        g = graph_params.build(config.n, config.instance_seed)
        v = generate_game(spec)
        logger.info(f"📊 Exact reference for {graph_params.label()} x {game_label(spec)}")
        exact = exact_reference(g, v)
        for alg in config.algs:
            for seed in config.seeds:
                for budget in config.budgets:
                    jobs.append((alg, g, v, exact, budget, seed, config.exact_levels, config.batch_size,
                                 graph_params.label(), game_label(spec)))

    logger.info(f"🚀 Running {len(jobs)} trials on {config.workers} worker(s)")
    if config.workers > 1:
        with Pool(config.workers) as pool:
            records = list(pool.imap(_trial_job, jobs))
    else:
        records = [_trial_job(job) for job in jobs]
    logger.info(f"✅ Finished {len(records)} trials")
    return records


def write_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(record.to_row())
    return buf.getvalue()


def parse_csv(text: str) -> List[TrialRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise InvalidParameterError(f"unexpected CSV header {reader.fieldnames}")
    return [TrialRecord.from_row(row) for row in reader]


def bench_suite(config: BenchConfig) -> str:
    records = run_suite(config)
    for (graph, game, alg, kind, budget), error in sorted(summarize(records).items()):
        logger.info(f"📊 {graph} {game} {alg} {kind}={budget}: mean L1 {error:.4g}")
    return write_csv(records)


def summarize(records: Sequence[TrialRecord]) -> Dict[Tuple[str, str, str, str, float], float]:
    """Mean L1 error per (graph, game, alg, budget kind, budget)"""
    groups = defaultdict(list)
    for r in records:
        groups[(r.graph_model, r.game_type, r.alg, r.budget_kind, r.budget)].append(r.error_l1)
    return {key: sum(errors) / len(errors) for key, errors in groups.items()}
