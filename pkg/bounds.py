"""
Range estimates and PAC sample-size bounds

Two formula families are kept side by side:
  paper    - cube-root closed forms (per-sample range taken as r/m)
  standard - linear Hoeffding form m >= -ln(delta/2) r^2 / (2 eps^2)
The ceiling is applied last, after every multiplier.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from coalition_graph import Graph
from exact_engine import enumerate_connected
from games import CharacteristicFunction, materialize, popcounts
from myerson_errors import InvalidParameterError, SizeLimitError
from myerson_config import GAME_DEFAULTS

logger = logging.getLogger(__name__)

RANGE_MODES = ('sign_definite', 'general', 'hybrid', 'connected')
FORMULAS = ('paper', 'standard')


def alpha(n: int) -> float:
    """(floor(n/2))! (floor((n-1)/2))! / n!"""
    if n < 1:
        raise InvalidParameterError(f"alpha needs n >= 1, got {n}")
    return math.factorial(n // 2) * math.factorial((n - 1) // 2) / math.factorial(n)


def range_estimate(v: CharacteristicFunction, g: Optional[Graph] = None, mode: str = 'sign_definite',
                   exact_levels: int = 0) -> float:
    """Conservative range r of the sampled term, from the values of nu"""
    if mode not in RANGE_MODES:
        raise InvalidParameterError(f"unknown range mode {mode!r}; expected one of {', '.join(RANGE_MODES)}")
    n = v.n

    if mode == 'connected' and g is not None:
        if g.n != n:
            raise InvalidParameterError(f"game has {n} players but graph has {g.n} nodes")
        magnitudes = np.array([abs(v.value(c)) for c, _ in enumerate_connected(g)])
    else:
        if n > GAME_DEFAULTS['table_limit']:
            raise SizeLimitError(f"range estimate enumerates 2^n coalitions; n={n} is too large")
        table = np.abs(materialize(v).values)
        if mode == 'hybrid':
            counts = popcounts(n)
            keep = (counts > exact_levels) & (counts < n - exact_levels - 1)
            magnitudes = table[keep]
        else:
            magnitudes = table[1:]

    if magnitudes.size == 0:
        return 0.0
    top = float(magnitudes.max())
    if mode == 'general':
        return n * top
    if mode == 'connected':
        return top + alpha(n) / n * float(magnitudes.min())
    return top


@dataclass(frozen=True)
class BoundParams:
    epsilon: float
    delta: float
    r: float
    n: int
    exact_levels: int = 0
    formula: str = 'paper'

    def validate(self):
        if not self.epsilon > 0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.r >= 0:
            raise InvalidParameterError(f"range must be non-negative, got {self.r}")
        if self.n < 1:
            raise InvalidParameterError(f"n must be positive, got {self.n}")
        if self.exact_levels < 0:
            raise InvalidParameterError(f"exact levels must be >= 0, got {self.exact_levels}")
        if self.formula not in FORMULAS:
            raise InvalidParameterError(f"unknown formula {self.formula!r}; expected paper or standard")


def hoeffding_base(epsilon: float, delta: float, r: float) -> float:
    """-ln(delta/2) r^2 / (2 eps^2)"""
    return -math.log(delta / 2) * r * r / (2 * epsilon * epsilon)


def hybrid_factor(n: int, exact_levels: int) -> float:
    return (n - 2 * exact_levels - 2) / n


def sample_bound(p: BoundParams, alg: str) -> float:
    """Pre-ceiling sample count"""
    p.validate()
    base = hoeffding_base(p.epsilon, p.delta, p.r)
    if alg == 'permutations':
        multiplier = 1.0
    elif alg == 'hybrid':
        factor = hybrid_factor(p.n, p.exact_levels)
        if factor <= 0:
            return 0.0
        multiplier = factor
    elif alg == 'connected':
        multiplier = float((1 << p.n) - 1)
    else:
        raise InvalidParameterError(f"unknown algorithm {alg!r}")

    if p.formula == 'paper':
        return multiplier ** (2.0 / 3.0) * base ** (1.0 / 3.0)
    return multiplier ** 2 * base


def samples_required(p: BoundParams, alg: str) -> int:
    if alg == 'hybrid' and hybrid_factor(p.n, p.exact_levels) <= 0:
        p.validate()
        logger.warning(f"⚠️ Ex={p.exact_levels} makes the hybrid run full-exact for n={p.n}; no samples needed")
        return 0
    return math.ceil(sample_bound(p, alg))
