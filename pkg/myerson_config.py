#!/usr/bin/env python3
"""
Configuration for the Myerson value toolkit
Named defaults for generators, samplers and the benchmark harness, plus the
few ambient settings that can be overridden from the environment (.env).
"""

import logging
import os
from dataclasses import dataclass

logger = logging.getLogger(__name__)

# Game generator defaults
GAME_DEFAULTS = {
    'max_gain': 3.0,          # degree of superadditivity
    'max_singleton': 1.0,     # upper bound for submodular singletons
    'size_exponent': 2.0,     # size valuation nu(C) = |C| ** exponent
    'table_limit': 24,        # largest n for materialized tables
    'memo_limit': 1 << 18,    # cached nu_G values per restricted game
}

# Graph generator defaults
GRAPH_DEFAULTS = {
    'edge_prob': 0.4,         # Erdos-Renyi appendix setting
    'm0': 2,                  # Barabasi-Albert seed nodes (connected as a path)
    'm': 2,                   # edges attached by each new node
    'max_nodes': 64,
}

# Exact engine limits
EXACT_SETTINGS = {
    'subset_limit': 24,       # subset enumeration is 2^n
    'rational_limit': 20,     # exact Fraction weights
    'cross_check_limit': 20,  # benchmark references also run the subset engine
    'tolerance': 1e-9,
}

# Benchmark harness
BENCH_SETTINGS = {
    'n': 15,
    'batch_size': 256,
    'probe_batch': 16,        # first batch of a wall-time trial
    'sample_budgets': [4 ** k for k in range(3, 8)],
    'time_budgets': [0.01, 0.1, 1.0],
    'hybrid_exact_levels': 1,
    'seeds': 30,
    'instance_seed': 2020,
    'workers': 1,
}

# Output formatting
OUTPUT_SETTINGS = {
    'significant_digits': 12,
    'csv_header': [
        'alg', 'graph_model', 'game_type', 'n', 'seed',
        'budget_kind', 'budget', 'samples', 'elapsed_ns', 'error_l1',
    ],
}


@dataclass(frozen=True)
class Settings:
    log_level: str = 'INFO'
    bench_workers: int = 1
    batch_size: int = 256


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"⚠️ Ignoring {name}={raw!r}: not an integer")
        return default
    if value < 1:
        logger.warning(f"⚠️ Ignoring {name}={value}: must be at least 1")
        return default
    return value


def load_settings() -> Settings:
    """Load ambient settings from the environment (and .env if present)"""
    try:
        from dotenv import load_dotenv
        load_dotenv()
    except Exception as e:
        logger.warning(f"Could not load .env file: {e}")

    level = os.getenv('MYERSON_LOG_LEVEL', 'INFO').upper()
    if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        logger.warning(f"⚠️ Unknown MYERSON_LOG_LEVEL {level!r}, using INFO")
        level = 'INFO'

    return Settings(
        log_level=level,
        bench_workers=_int_from_env('MYERSON_BENCH_WORKERS', BENCH_SETTINGS['workers']),
        batch_size=_int_from_env('MYERSON_BATCH_SIZE', BENCH_SETTINGS['batch_size']),
    )


if __name__ == "__main__":
    settings = load_settings()
    print("Myerson Toolkit Configuration")
    print("=" * 30)
    print(f"Log level: {settings.log_level}")
    print(f"Bench workers: {settings.bench_workers}")
    print(f"Batch size: {settings.batch_size}")
    print(f"Max gain: {GAME_DEFAULTS['max_gain']}")
    print(f"BA parameters: m0={GRAPH_DEFAULTS['m0']} m={GRAPH_DEFAULTS['m']}")
