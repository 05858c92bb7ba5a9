"""Game graphs, strategies, value vectors, and the text format.

A game is a finite directed graph on vertices 1..n. Vertex n-1 is the
0-sink and vertex n the 1-sink; every other vertex is owned by the max
player, the min player, or chance ("avg") and has exactly two distinct
children. One token starts on the start vertex and moves along edges,
the owner choosing at player vertices and a fair coin at avg vertices.
Max wins if the token reaches the 1-sink; the value of a vertex is the
probability of that event under optimal play from both sides.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, TextIO, Union

from .exceptions import FormatError, StrategyError, ValidationError


class VertexKind(Enum):
    MAX = "max"
    MIN = "min"
    AVG = "avg"
    SINK0 = "sink0"
    SINK1 = "sink1"

    @property
    def is_sink(self) -> bool:
        return self in (VertexKind.SINK0, VertexKind.SINK1)

    @property
    def is_player(self) -> bool:
        return self in (VertexKind.MAX, VertexKind.MIN)


_KIND_BY_NAME = {
    "max": VertexKind.MAX,
    "min": VertexKind.MIN,
    "avg": VertexKind.AVG,
}


@dataclass(frozen=True)
class Game:
    """Immutable game graph.

    kinds[i-1] and children[i-1] describe vertex i; sinks store None for
    children. Construct through build_game or parse_game, which validate.
    """

    n: int
    start: int
    kinds: tuple[VertexKind, ...]
    children: tuple[Union[tuple[int, int], None], ...]

    @property
    def sink0(self) -> int:
        return self.n - 1

    @property
    def sink1(self) -> int:
        return self.n

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @property
    def interior(self) -> range:
        """Non-sink vertices."""
        return range(1, self.n - 1)

    @property
    def edge_count(self) -> int:
        return 2 * max(self.n - 2, 0)

    def kind(self, v: int) -> VertexKind:
        return self.kinds[v - 1]

    def children_of(self, v: int) -> tuple[int, int]:
        pair = self.children[v - 1]
        if pair is None:
            raise ValueError(f"vertex {v} is a sink and has no children")
        return pair

    def vertices_of_kind(self, kind: VertexKind) -> tuple[int, ...]:
        return tuple(v for v in self.vertices if self.kinds[v - 1] is kind)

    def has_kind(self, kind: VertexKind) -> bool:
        return any(k is kind for k in self.kinds)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield every (vertex, child) pair, left slot first."""
        for v in self.interior:
            c = self.children[v - 1]
            if c is not None:
                yield (v, c[0])
                yield (v, c[1])


def validate_game(game: Game) -> None:
    """Raise ValidationError naming the first violated invariant."""
    n = game.n
    if n < 2:
        raise ValidationError(f"vertex count must be at least 2, got {n}")
    if len(game.kinds) != n or len(game.children) != n:
        raise ValidationError("kinds/children length does not match vertex count")
    if not 1 <= game.start <= n:
        raise ValidationError(f"start out of range: {game.start} not in 1..{n}")
    if game.kinds[n - 2] is not VertexKind.SINK0:
        raise ValidationError(f"vertex {n - 1} must be the 0-sink")
    if game.kinds[n - 1] is not VertexKind.SINK1:
        raise ValidationError(f"vertex {n} must be the 1-sink")
    for s in (n - 1, n):
        if game.children[s - 1] is not None:
            raise ValidationError(f"sink {s} must not have children")
    for v in game.interior:
        kind = game.kinds[v - 1]
        if kind.is_sink:
            raise ValidationError(f"only the last two vertices may be sinks, vertex {v} is one")
        pair = game.children[v - 1]
        if pair is None or len(pair) != 2:
            raise ValidationError(f"vertex {v} must have exactly two children")
        a, b = pair
        for c in pair:
            if not 1 <= c <= n:
                raise ValidationError(f"child {c} of vertex {v} out of range 1..{n}")
        if a == b:
            raise ValidationError(f"children of vertex {v} are not distinct")


def build_game(
    n: int,
    start: int,
    rows: Iterable[tuple[int, Union[str, VertexKind], int, int]],
) -> Game:
    """Assemble and validate a game from (id, kind, child1, child2) rows.

    Rows may arrive in any order; ids must cover 1..n-2 exactly once.
    """
    if n < 2:
        raise ValidationError(f"vertex count must be at least 2, got {n}")
    kinds: list[Union[VertexKind, None]] = [None] * n
    children: list[Union[tuple[int, int], None]] = [None] * n
    for vid, kind, c1, c2 in rows:
        if not 1 <= vid <= n - 2:
            raise ValidationError(f"vertex id {vid} out of range 1..{n - 2}")
        if kinds[vid - 1] is not None:
            raise ValidationError(f"duplicate vertex line for vertex {vid}")
        if isinstance(kind, str):
            try:
                kind = _KIND_BY_NAME[kind]
            except KeyError:
                raise ValidationError(f"unknown vertex kind {kind!r}") from None
        elif kind.is_sink:
            raise ValidationError(f"vertex {vid} may not be declared a sink")
        kinds[vid - 1] = kind
        children[vid - 1] = (c1, c2)
    for v in range(1, n - 1):
        if kinds[v - 1] is None:
            raise ValidationError(f"missing vertex {v}")
    kinds[n - 2] = VertexKind.SINK0
    kinds[n - 1] = VertexKind.SINK1
    game = Game(n=n, start=start, kinds=tuple(kinds), children=tuple(children))
    validate_game(game)
    return game


@dataclass(frozen=True)
class Strategy:
    """A positional strategy: one child choice per owned vertex.

    picks is kept sorted by vertex id so equal strategies compare and
    hash equal regardless of construction order.
    """

    owner: VertexKind
    picks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.owner not in (VertexKind.MAX, VertexKind.MIN):
            raise StrategyError(f"strategy owner must be max or min, got {self.owner.value}")
        ordered = tuple(sorted(self.picks))
        if len({v for v, _ in ordered}) != len(ordered):
            raise StrategyError("strategy picks the same vertex twice")
        object.__setattr__(self, "picks", ordered)
        object.__setattr__(self, "_map", dict(ordered))

    @classmethod
    def of(cls, owner: VertexKind, picks: Mapping[int, int]) -> "Strategy":
        return cls(owner, tuple(picks.items()))

    def pick(self, v: int) -> int:
        try:
            return self._map[v]
        except KeyError:
            raise StrategyError(f"strategy has no pick for vertex {v}") from None

    def as_dict(self) -> dict[int, int]:
        return dict(self.picks)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.picks)


def validate_strategy(game: Game, strategy: Strategy) -> None:
    """Check that the strategy covers exactly the owner's vertices with real edges."""
    owned = set(game.vertices_of_kind(strategy.owner))
    got = set(strategy.vertices)
    if got != owned:
        missing = sorted(owned - got)
        extra = sorted(got - owned)
        parts = []
        if missing:
            parts.append(f"missing picks for {missing}")
        if extra:
            parts.append(f"picks for non-{strategy.owner.value} vertices {extra}")
        raise StrategyError("strategy/game mismatch: " + "; ".join(parts))
    for v, c in strategy.picks:
        if c not in game.children_of(v):
            raise StrategyError(f"strategy pick {v}->{c} is not an edge of the game")


def enumerate_strategies(game: Game, owner: VertexKind) -> tuple[Strategy, ...]:
    """All strategies for one player, lexicographic, left children first.

    The first entry always picks every vertex's left child. A player
    with no vertices gets the single empty strategy.
    """
    if owner not in (VertexKind.MAX, VertexKind.MIN):
        raise StrategyError(f"strategy owner must be max or min, got {owner.value}")
    owned = game.vertices_of_kind(owner)
    slots = [tuple((v, c) for c in game.children_of(v)) for v in owned]
    return tuple(Strategy(owner, combo) for combo in itertools.product(*slots))


class ValueVector:
    """Exact per-vertex probabilities, indexed by 1-based vertex id."""

    __slots__ = ("_vals",)

    def __init__(self, values: Iterable[Union[Fraction, int]]):
        vals = tuple(Fraction(x) for x in values)
        for idx, x in enumerate(vals):
            if not 0 <= x <= 1:
                raise ValidationError(f"value at vertex {idx + 1} outside [0, 1]: {x}")
        self._vals = vals

    @classmethod
    def from_map(cls, n: int, mapping: Mapping[int, Fraction], default: Fraction = Fraction(0)) -> "ValueVector":
        return cls(mapping.get(v, default) for v in range(1, n + 1))

    @property
    def n(self) -> int:
        return len(self._vals)

    @property
    def components(self) -> tuple[Fraction, ...]:
        return self._vals

    def __len__(self) -> int:
        return len(self._vals)

    def __getitem__(self, vid: int) -> Fraction:
        if not 1 <= vid <= len(self._vals):
            raise IndexError(f"vertex id {vid} out of range 1..{len(self._vals)}")
        return self._vals[vid - 1]

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return ((i + 1, x) for i, x in enumerate(self._vals))

    def __eq__(self, other) -> bool:
        return isinstance(other, ValueVector) and self._vals == other._vals

    def __hash__(self) -> int:
        return hash(self._vals)

    def gap(self, other: "ValueVector") -> Fraction:
        """Largest componentwise absolute difference."""
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return max((abs(a - b) for a, b in zip(self._vals, other._vals)), default=Fraction(0))

    def leq(self, other: "ValueVector") -> bool:
        """Componentwise <=."""
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return all(a <= b for a, b in zip(self._vals, other._vals))

    def __repr__(self) -> str:
        return "ValueVector(" + ", ".join(format_rational(x) for x in self._vals) + ")"


def format_rational(x: Fraction) -> str:
    """Render as 'p/q', or plain 'p' for integers."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_rational(text: str) -> Fraction:
    m = _RATIONAL_RE.match(text.strip())
    if not m:
        raise FormatError(f"expected a rational like '2/3' or '1', got {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise FormatError(f"zero denominator in rational {text!r}")
    return Fraction(num, den)


def _tokenize(text: str) -> list[tuple[int, list[tuple[int, str]]]]:
    """Split into significant lines of (column, token) pairs.

    Text after '#' on a line is a comment; blank lines are dropped.
    Columns are 1-based character positions in the original line.
    """
    out = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", body)]
        if toks:
            out.append((ln, toks))
    return out


def _parse_int(tok: tuple[int, str], what: str, line: int) -> int:
    col, text = tok
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"expected integer {what}, got {text!r}", line, col) from None


def parse_game(source: Union[str, TextIO]) -> Game:
    """Parse the text game format.

    Layout: a header line 'ssg <n> <start>', then one line per non-sink
    vertex, '<id> <max|min|avg> <child1> <child2>', in any order. Blank
    lines and '#' comments are ignored. Sinks are implicit: vertex n-1
    is the 0-sink and vertex n the 1-sink.
    """
    text = source if isinstance(source, str) else source.read()
    lines = _tokenize(text)
    if not lines:
        raise FormatError("empty input: expected header 'ssg <n> <start>'", 1, 1)

    ln, toks = lines[0]
    if toks[0][1] != "ssg":
        raise FormatError(f"expected header keyword 'ssg', got {toks[0][1]!r}", ln, toks[0][0])
    if len(toks) != 3:
        col = toks[-1][0] if len(toks) > 3 else toks[0][0]
        raise FormatError("header must be 'ssg <n> <start>'", ln, col)
    n = _parse_int(toks[1], "vertex count", ln)
    start = _parse_int(toks[2], "start vertex", ln)

    rows = []
    for ln, toks in lines[1:]:
        if len(toks) != 4:
            raise FormatError(
                "vertex line must be '<id> <max|min|avg> <child1> <child2>'", ln, toks[0][0]
            )
        vid = _parse_int(toks[0], "vertex id", ln)
        kcol, kname = toks[1]
        if kname not in _KIND_BY_NAME:
            raise FormatError(f"unknown vertex kind {kname!r} (want max, min, or avg)", ln, kcol)
        c1 = _parse_int(toks[2], "child", ln)
        c2 = _parse_int(toks[3], "child", ln)
        rows.append((vid, kname, c1, c2))

    return build_game(n, start, rows)


def serialize_game(game: Game) -> str:
    """Canonical text form: header plus vertex lines in ascending id order."""
    out = [f"ssg {game.n} {game.start}"]
    for v in game.interior:
        c1, c2 = game.children_of(v)
        out.append(f"{v} {game.kind(v).value} {c1} {c2}")
    return "\n".join(out) + "\n"
