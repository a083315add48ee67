"""
Characteristic functions, graph restriction and random game generators
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from coalition_graph import Coalition, Graph, components, full_mask, nodes_of, popcount
from myerson_config import GAME_DEFAULTS
from myerson_errors import GameFormatError, InvalidParameterError, SizeLimitError

logger = logging.getLogger(__name__)

GAME_TYPES = ('uniform', 'superadditive', 'submodular', 'size', 'plusminus')
TABLE_TYPES = ('superadditive', 'submodular')

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """64-bit avalanche mix (splitmix64 finaliser)"""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class CharacteristicFunction:
    """nu: 2^V -> R with nu(empty) = 0; subclasses implement _value for nonempty coalitions"""

    backing = 'abstract'

    def __init__(self, n: int):
        if n < 1:
            raise InvalidParameterError(f"a game needs at least one player, got n={n}")
        self.n = n

    def _value(self, c: Coalition) -> float:
        raise NotImplementedError

    def value(self, c: Coalition) -> float:
        if not c:
            return 0.0
        return self._value(c)

    __call__ = value

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, backing={self.backing})"


class UniformGame(CharacteristicFunction):
    """nu(C) ~ U(0, |C|), drawn lazily from a stream keyed by (seed, C)"""

    backing = 'lazy-seeded'

    def __init__(self, n: int, seed: int):
        super().__init__(n)
        self.seed = seed
        self._key = mix64(seed & _MASK64)

    def _value(self, c: Coalition) -> float:
        bits = mix64(self._key ^ c)
        # (0, 1) open: never exactly 0
        unit = ((bits >> 11) + 0.5) / 9007199254740992.0
        return unit * popcount(c)


class SizeGame(CharacteristicFunction):
    backing = 'size-based'

    def __init__(self, n: int, exponent: float = GAME_DEFAULTS['size_exponent']):
        super().__init__(n)
        self.exponent = exponent

    def _value(self, c: Coalition) -> float:
        return float(popcount(c)) ** self.exponent


class PlusMinusGame(CharacteristicFunction):
    """1 on singletons, -1 on every larger coalition"""

    backing = 'size-based'

    def _value(self, c: Coalition) -> float:
        return 1.0 if popcount(c) == 1 else -1.0


class FunctionGame(CharacteristicFunction):
    backing = 'function'

    def __init__(self, n: int, fn: Callable[[Coalition], float]):
        super().__init__(n)
        self.fn = fn

    def _value(self, c: Coalition) -> float:
        return float(self.fn(c))


class TableGame(CharacteristicFunction):
    backing = 'table'

    def __init__(self, n: int, values: np.ndarray, clamped: int = 0):
        super().__init__(n)
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << n,):
            raise InvalidParameterError(f"table for n={n} needs {1 << n} entries, got {values.shape}")
        values = values.copy()
        values[0] = 0.0
        values.setflags(write=False)
        self.values = values
        self.clamped = clamped

    def _value(self, c: Coalition) -> float:
        return float(self.values[c])


class RestrictedGame(CharacteristicFunction):
    """nu_G(C) = sum of nu over the connected components of G(C)"""

    backing = 'restricted'

    def __init__(self, graph: Graph, base: CharacteristicFunction, memo: bool = False,
                 memo_limit: Optional[int] = None):
        super().__init__(graph.n)
        self.graph = graph
        self.base = base
        self.evaluations = 0
        # no memo above the table limit; entries stop at memo_limit
        if memo and graph.n > GAME_DEFAULTS['table_limit']:
            logger.debug(f"n={graph.n} above table limit, restricted game runs without memo")
            memo = False
        self.memo_limit = GAME_DEFAULTS['memo_limit'] if memo_limit is None else memo_limit
        self._memo: Optional[Dict[Coalition, float]] = {} if memo else None

    def _value(self, c: Coalition) -> float:
        self.evaluations += 1
        if self._memo is not None:
            cached = self._memo.get(c)
            if cached is not None:
                return cached
        total = 0.0
        base = self.base
        for part in components(self.graph, c):
            total += base.value(part)
        if self._memo is not None and len(self._memo) < self.memo_limit:
            self._memo[c] = total
        return total

    @property
    def memo_size(self) -> int:
        return 0 if self._memo is None else len(self._memo)


def restrict(g: Graph, v: CharacteristicFunction, memo: bool = False,
             memo_limit: Optional[int] = None) -> RestrictedGame:
    if v.n != g.n:
        raise InvalidParameterError(f"game has {v.n} players but graph has {g.n} nodes")
    return RestrictedGame(g, v, memo=memo, memo_limit=memo_limit)


def marginal_contribution(v: CharacteristicFunction, c: Coalition, i: int) -> float:
    """nu(C + i) - nu(C) for a player outside C"""
    bit = 1 << i
    if c & bit:
        raise InvalidParameterError(f"player {i} already belongs to the coalition")
    return v.value(c | bit) - v.value(c)


def materialize(v: CharacteristicFunction) -> TableGame:
    """All 2^n values as a table game"""
    if isinstance(v, TableGame):
        return v
    if v.n > GAME_DEFAULTS['table_limit']:
        raise SizeLimitError(f"cannot tabulate n={v.n} (limit {GAME_DEFAULTS['table_limit']})")
    values = np.fromiter((v.value(c) for c in range(1 << v.n)), dtype=float, count=1 << v.n)
    return TableGame(v.n, values)


# Generators

@dataclass(frozen=True)
class GameSpec:
    type: str
    n: int
    seed: int = 0
    max_gain: float = GAME_DEFAULTS['max_gain']
    max_singleton: float = GAME_DEFAULTS['max_singleton']
    size_exponent: float = GAME_DEFAULTS['size_exponent']

    def validate(self):
        if self.type not in GAME_TYPES:
            raise InvalidParameterError(f"unknown game type {self.type!r}; expected one of {', '.join(GAME_TYPES)}")
        if self.n < 1:
            raise InvalidParameterError(f"game needs n >= 1, got {self.n}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}")
        if not self.max_gain > 0:
            raise InvalidParameterError(f"maxGain must be positive, got {self.max_gain}")
        if not self.max_singleton > 0:
            raise InvalidParameterError(f"maxSingleton must be positive, got {self.max_singleton}")
        if self.type in TABLE_TYPES and self.n > GAME_DEFAULTS['table_limit']:
            raise SizeLimitError(
                f"{self.type} games are tabulated; n={self.n} exceeds {GAME_DEFAULTS['table_limit']}"
            )


def popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        counts += (masks >> b) & 1
    return counts


def _layers(n: int):
    """Nonempty masks grouped by cardinality, ascending within each layer"""
    counts = popcounts(n)
    masks = np.arange(1 << n, dtype=np.int64)
    for k in range(1, n + 1):
        yield k, masks[counts == k]


def superadditive_table(n: int, seed: int, max_gain: float) -> TableGame:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = np.zeros(1 << n, dtype=float)
    for k, layer in _layers(n):
        draws = rng.random(len(layer))
        if k == 1:
            values[layer] = draws * max_gain
            continue
        for c, u in zip(layer.tolist(), draws.tolist()):
            members = nodes_of(c)
            low = 1 << members[0]
            subs = np.zeros(1, dtype=np.int64)
            for p in members[1:]:
                subs = np.concatenate([subs, subs | (1 << p)])
            # last entry is C minus its lowest member; drop it so S stays proper
            part = subs[:-1] | low
            kappa = float(np.max(values[part] + values[c ^ part]))
            values[c] = kappa + u * max_gain
    return TableGame(n, values)


def submodular_table(n: int, seed: int, max_singleton: float) -> TableGame:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = np.zeros(1 << n, dtype=float)
    clamped = 0
    for k, layer in _layers(n):
        draws = rng.random(len(layer))
        if k == 1:
            values[layer] = draws * max_singleton
            continue
        for c, u in zip(layer.tolist(), draws.tolist()):
            bits = np.array([1 << p for p in nodes_of(c)], dtype=np.int64)
            minus_one = values[c ^ bits]
            minus_two = values[c ^ bits[:, None] ^ bits[None, :]]
            bound = minus_one[:, None] + minus_one[None, :] - minus_two
            np.fill_diagonal(bound, np.inf)
            lam = float(minus_one.max())
            mu = float(bound.min())
            if mu < lam:
                values[c] = lam
                clamped += 1
            else:
                values[c] = lam + u * (mu - lam)
    if clamped:
        logger.warning(f"⚠️ Submodular generator clamped {clamped} coalitions to their monotone floor")
    return TableGame(n, values, clamped=clamped)


def generate_game(spec: GameSpec) -> CharacteristicFunction:
    spec.validate()
    if spec.type == 'uniform':
        return UniformGame(spec.n, spec.seed)
    if spec.type == 'size':
        return SizeGame(spec.n, spec.size_exponent)
    if spec.type == 'plusminus':
        return PlusMinusGame(spec.n)
    logger.info(f"🚀 Building {spec.type} table for n={spec.n} (seed {spec.seed})")
    if spec.type == 'superadditive':
        return superadditive_table(spec.n, spec.seed, spec.max_gain)
    return submodular_table(spec.n, spec.seed, spec.max_singleton)


# Text formats

_SPEC_KEYS = {
    'type': 'type',
    'n': 'n',
    'seed': 'seed',
    'maxGain': 'max_gain',
    'maxSingleton': 'max_singleton',
    'exponent': 'size_exponent',
}


def parse_game_spec(text: str) -> GameSpec:
    """Parse `type=<t> n=<n> seed=<u64> [maxGain=<f>] [maxSingleton=<f>] [exponent=<f>]`"""
    fields = {}
    for token in text.split():
        key, sep, raw = token.partition('=')
        if not sep or key not in _SPEC_KEYS:
            raise GameFormatError(f"unrecognised spec token {token!r}")
        if _SPEC_KEYS[key] in fields:
            raise GameFormatError(f"spec key {key!r} given twice")
        fields[_SPEC_KEYS[key]] = raw
    if 'type' not in fields or 'n' not in fields:
        raise GameFormatError("game spec needs at least type=<t> and n=<n>")
    try:
        spec = GameSpec(
            type=fields['type'],
            n=int(fields['n']),
            seed=int(fields.get('seed', 0)),
            max_gain=float(fields.get('max_gain', GAME_DEFAULTS['max_gain'])),
            max_singleton=float(fields.get('max_singleton', GAME_DEFAULTS['max_singleton'])),
            size_exponent=float(fields.get('size_exponent', GAME_DEFAULTS['size_exponent'])),
        )
    except ValueError as e:
        raise GameFormatError(f"bad value in game spec: {e}")
    spec.validate()
    return spec


def format_game_spec(spec: GameSpec) -> str:
    parts = [f"type={spec.type}", f"n={spec.n}", f"seed={spec.seed}"]
    if spec.type == 'superadditive':
        parts.append(f"maxGain={spec.max_gain!r}")
    elif spec.type == 'submodular':
        parts.append(f"maxSingleton={spec.max_singleton!r}")
    elif spec.type == 'size':
        parts.append(f"exponent={spec.size_exponent!r}")
    return " ".join(parts)


def format_value(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def store_table(v: CharacteristicFunction) -> str:
    """Table text: `n <count>` then `<hex-mask> <value>` for every nonempty coalition"""
    if v.n > GAME_DEFAULTS['table_limit']:
        raise SizeLimitError(f"cannot store a table for n={v.n}")
    lines = [f"n {v.n}"]
    lines.extend(f"{c:x} {format_value(v.value(c))}" for c in range(1, 1 << v.n))
    return "\n".join(lines) + "\n"


def load_table(text: str) -> TableGame:
    n = None
    values = None
    filled = None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != 'n':
                raise GameFormatError("expected header 'n <count>'", line_number)
            try:
                n = int(fields[1])
            except ValueError:
                raise GameFormatError(f"player count {fields[1]!r} is not an integer", line_number)
            if not 1 <= n <= GAME_DEFAULTS['table_limit']:
                raise GameFormatError(f"player count must lie in 1..{GAME_DEFAULTS['table_limit']}", line_number)
            values = np.zeros(1 << n, dtype=float)
            filled = np.zeros(1 << n, dtype=bool)
            continue
        if len(fields) != 2:
            raise GameFormatError(f"expected '<hex-mask> <value>', got {line!r}", line_number)
        try:
            mask = int(fields[0], 16)
        except ValueError:
            raise GameFormatError(f"coalition mask {fields[0]!r} is not hexadecimal", line_number)
        if not 0 < mask <= full_mask(n):
            raise GameFormatError(f"coalition mask {fields[0]} outside 1..{full_mask(n):x}", line_number)
        if filled[mask]:
            raise GameFormatError(f"duplicate entry for coalition {mask:x}", line_number)
        try:
            values[mask] = float(fields[1])
        except ValueError:
            raise GameFormatError(f"value {fields[1]!r} is not a number", line_number)
        filled[mask] = True
    if n is None:
        raise GameFormatError("missing header 'n <count>'")
    missing = np.flatnonzero(~filled[1:])
    if len(missing):
        raise GameFormatError(f"missing coalition {int(missing[0]) + 1:x} ({len(missing)} absent)")
    return TableGame(n, values)


def load_game(text: str) -> CharacteristicFunction:
    """Table text or a one-line spec string"""
    stripped = text.strip()
    if stripped.startswith('n '):
        return load_table(text)
    return generate_game(parse_game_spec(stripped))
