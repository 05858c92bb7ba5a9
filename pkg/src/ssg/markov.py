"""Reduced games, their exact value vectors, and the stopping test.

Fixing one player's strategy removes that player's choices; fixing both
leaves a Markov chain. The chain's absorption probabilities into the
1-sink satisfy v = Q v + b where Q holds the transition weights of the
vertices that can reach a sink at all and b is the unit vector of the
1-sink. Vertices that cannot reach a sink sit on closed cycles and are
worth exactly 0, so their rows are zeroed and the rest of the system
becomes uniquely solvable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from . import kernels
from .exceptions import BudgetError, InternalCheckError, PreconditionError, StrategyError
from .games import (
    Game,
    Strategy,
    ValueVector,
    VertexKind,
    enumerate_strategies,
    validate_strategy,
)

@dataclass(frozen=True)
class ReducedGame:
    """A game with zero, one, or two strategies fixed.

    tau fixes the min player, sigma the max player. A missing strategy
    for a player with no vertices counts as fixed.
    """

    game: Game
    tau: Union[Strategy, None] = None
    sigma: Union[Strategy, None] = None

    def successors(self, v: int) -> tuple[int, ...]:
        kind = self.game.kind(v)
        if kind.is_sink:
            return ()
        if kind is VertexKind.MIN and self.tau is not None:
            return (self.tau.pick(v),)
        if kind is VertexKind.MAX and self.sigma is not None:
            return (self.sigma.pick(v),)
        return self.game.children_of(v)

    @property
    def fully_reduced(self) -> bool:
        min_done = self.tau is not None or not self.game.has_kind(VertexKind.MIN)
        max_done = self.sigma is not None or not self.game.has_kind(VertexKind.MAX)
        return min_done and max_done

    def edges(self) -> Iterator[tuple[int, int]]:
        for v in self.game.interior:
            for j in self.successors(v):
                yield (v, j)


def reduce_game(game: Game, tau: Union[Strategy, None] = None, sigma: Union[Strategy, None] = None) -> ReducedGame:
    """Fix strategies after checking they belong to the right players."""
    if tau is not None:
        if tau.owner is not VertexKind.MIN:
            raise StrategyError("tau must be a min-player strategy")
        validate_strategy(game, tau)
    if sigma is not None:
        if sigma.owner is not VertexKind.MAX:
            raise StrategyError("sigma must be a max-player strategy")
        validate_strategy(game, sigma)
    return ReducedGame(game=game, tau=tau, sigma=sigma)


def _require_fully_reduced(rg: ReducedGame, what: str) -> None:
    if not rg.fully_reduced:
        raise PreconditionError(f"{what} needs both players' strategies fixed")


def sink_reachable_set(rg: ReducedGame) -> frozenset[int]:
    """Non-sink vertices with a directed path to either sink.

    Backward traversal from the sinks over the reduced edge relation.
    """
    _require_fully_reduced(rg, "sink_reachable_set")
    game = rg.game
    preds: dict[int, list[int]] = {}
    for v in game.interior:
        for j in rg.successors(v):
            preds.setdefault(j, []).append(v)
    seen = {game.sink0, game.sink1}
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for p in preds.get(v, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return frozenset(seen - {game.sink0, game.sink1})


class LinearSystem:
    """The sparse system v = Q v + b of a fully reduced game.

    Rows are dicts column->weight. Rows of vertices outside t_set are
    all zero, as are sink rows; b carries the single 1 of the 1-sink.
    """

    def __init__(self, rows: tuple[Mapping[int, Fraction], ...], b: tuple[Fraction, ...], t_set: frozenset[int]):
        if len(rows) != len(b):
            raise PreconditionError("rows and b must have equal length")
        self._rows = rows
        self._b = b
        self._t_set = t_set

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def b(self) -> tuple[Fraction, ...]:
        return self._b

    @property
    def t_set(self) -> frozenset[int]:
        return self._t_set

    def q(self, i: int, j: int) -> Fraction:
        return self._rows[i - 1].get(j, Fraction(0))

    def row(self, i: int) -> dict[int, Fraction]:
        return dict(self._rows[i - 1])

    def residual_holds(self, values: ValueVector) -> bool:
        """Exact check of v = Q v + b."""
        if values.n != self.n:
            raise PreconditionError(f"value vector length {values.n} != {self.n}")
        for i in range(1, self.n + 1):
            rhs = self._b[i - 1] + sum(
                (w * values[j] for j, w in self._rows[i - 1].items()), Fraction(0)
            )
            if values[i] != rhs:
                return False
        return True


def build_linear_system(rg: ReducedGame) -> LinearSystem:
    _require_fully_reduced(rg, "build_linear_system")
    game = rg.game
    t = sink_reachable_set(rg)
    rows: list[dict[int, Fraction]] = [{} for _ in range(game.n)]
    b = [Fraction(0)] * game.n
    b[game.sink1 - 1] = Fraction(1)
    for v in t:
        succ = rg.successors(v)
        w = Fraction(1, len(succ))
        row = rows[v - 1]
        for j in succ:
            row[j] = row.get(j, Fraction(0)) + w
    return LinearSystem(tuple(rows), tuple(b), t)


def solve_value_vector(rg: ReducedGame) -> ValueVector:
    """Exact absorption probabilities of a fully reduced game.

    Sparse Gaussian elimination over the sink-reaching vertices only.
    Columns are eliminated in descending vertex id; the pivot is the
    lowest-numbered remaining row with a nonzero coefficient, which
    makes the whole procedure deterministic. On chain-structured games
    (including stopping-transform outputs) this order keeps the fill-in
    near zero, so the cost stays close to linear in the vertex count.
    """
    _require_fully_reduced(rg, "solve_value_vector")
    game = rg.game
    t = sink_reachable_set(rg)

    known: dict[int, Fraction] = {game.sink0: Fraction(0), game.sink1: Fraction(1)}
    for v in game.interior:
        if v not in t:
            known[v] = Fraction(0)

    # Row v: v - sum(w * child) = const, with known children folded into const.
    rows: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    col_index: dict[int, set[int]] = {}
    for v in t:
        succ = rg.successors(v)
        w = Fraction(1, len(succ))
        coeffs = {v: Fraction(1)}
        const = Fraction(0)
        for j in succ:
            if j in t:
                coeffs[j] = coeffs.get(j, Fraction(0)) - w
            else:
                const += w * known[j]
        rows[v] = {c: x for c, x in coeffs.items() if x != 0}
        rhs[v] = const
        for c in rows[v]:
            col_index.setdefault(c, set()).add(v)

    remaining = set(t)
    pivots: list[tuple[int, int]] = []
    for col in sorted(t, reverse=True):
        holders = col_index.get(col, set()) & remaining
        if not holders:
            raise InternalCheckError(f"singular system at column {col}")
        prow = min(holders)
        remaining.discard(prow)
        pivots.append((col, prow))
        pcoeffs = rows[prow]
        pval = pcoeffs[col]
        for r in sorted(holders - {prow}):
            rrow = rows[r]
            factor = rrow[col] / pval
            for c2, x2 in pcoeffs.items():
                if c2 == col:
                    del rrow[col]
                    col_index[c2].discard(r)
                    continue
                nv = rrow.get(c2, Fraction(0)) - factor * x2
                if nv == 0:
                    if c2 in rrow:
                        del rrow[c2]
                        col_index[c2].discard(r)
                else:
                    rrow[c2] = nv
                    col_index.setdefault(c2, set()).add(r)
            rhs[r] -= factor * rhs[prow]

    values = dict(known)
    for col, prow in reversed(pivots):
        acc = rhs[prow]
        prowc = rows[prow]
        for c2, x2 in prowc.items():
            if c2 != col:
                acc -= x2 * values[c2]
        values[col] = acc / prowc[col]

    return ValueVector(values[v] for v in game.vertices)


def in_value_set(x: Fraction, t: int) -> bool:
    """Whether x can occur as a vertex value of a reduced game whose
    sink-reaching set has t vertices: a rational p/q in lowest terms
    with 0 <= p <= q <= 4**t."""
    if t < 0:
        raise PreconditionError(f"t must be nonnegative, got {t}")
    x = Fraction(x)
    return 0 <= x <= 1 and x.denominator <= 4**t


def is_stopping(game: Game) -> bool:
    """Whether every play reaches a sink with probability 1 under all
    strategy pairs.

    Least fixpoint of 'surely progresses toward a sink': an avg vertex
    qualifies once one child does (the coin eventually takes that exit),
    a player vertex only once both children do (the owner may pick
    either). The game is stopping iff the fixpoint covers every vertex.
    Equivalent to the per-strategy-pair definition, but linear time.
    """
    n = game.n
    need = {}
    for v in game.interior:
        need[v] = 1 if game.kind(v) is VertexKind.AVG else 2
    preds: dict[int, list[int]] = {}
    for v in game.interior:
        for j in game.children_of(v):
            preds.setdefault(j, []).append(v)
    covered = {game.sink0, game.sink1}
    counts: dict[int, int] = {}
    queue = deque(covered)
    while queue:
        v = queue.popleft()
        for p in preds.get(v, ()):
            if p in covered:
                continue
            counts[p] = counts.get(p, 0) + 1
            if counts[p] >= need[p]:
                covered.add(p)
                queue.append(p)
    return len(covered) == n


def is_stopping_exhaustive(game: Game, max_player_vertices: int = 12) -> bool:
    """The stopping test by its definition: every strategy pair, every
    vertex reaches a sink. Exponential; a cross-check oracle for small
    games, not for production use."""
    players = len(game.vertices_of_kind(VertexKind.MAX)) + len(
        game.vertices_of_kind(VertexKind.MIN)
    )
    if players > max_player_vertices:
        raise BudgetError(
            f"{players} player vertices exceeds the exhaustive budget of {max_player_vertices}"
        )
    for tau in enumerate_strategies(game, VertexKind.MIN):
        for sigma in enumerate_strategies(game, VertexKind.MAX):
            rg = ReducedGame(game, tau, sigma)
            reach = sink_reachable_set(rg)
            if len(reach) != game.n - 2:
                return False
    return True


def _reduced_arrays(rg: ReducedGame):
    """Pack a fully reduced game into flat arrays for the rollout kernels."""
    import numpy as np

    game = rg.game
    kind = np.empty(game.n, dtype=np.int8)
    s0 = np.empty(game.n, dtype=np.int64)
    s1 = np.empty(game.n, dtype=np.int64)
    for v in game.vertices:
        k = game.kind(v)
        kind[v - 1] = kernels.KIND_CODES[k.value]
        succ = rg.successors(v)
        if not succ:
            s0[v - 1] = s1[v - 1] = v - 1
        elif len(succ) == 1:
            s0[v - 1] = s1[v - 1] = succ[0] - 1
        else:
            s0[v - 1] = succ[0] - 1
            s1[v - 1] = succ[1] - 1
    return kind, s0, s1


@dataclass(frozen=True)
class MCEstimate:
    """Outcome counts of random plays from one vertex."""

    hits: int
    plays: int
    truncated: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.hits, self.plays)


def mc_estimate(
    rg: ReducedGame,
    start: Union[int, None] = None,
    plays: int = 100_000,
    seed: int = 0,
    max_steps: Union[int, None] = None,
    backend: Union[str, None] = None,
) -> MCEstimate:
    """Monte-Carlo estimate of one vertex's value in a reduced game.

    A sanity tool, not an exact method. Plays still unresolved after
    max_steps count as misses, which biases long-cycling games low.
    """
    _require_fully_reduced(rg, "mc_estimate")
    if plays < 1:
        raise PreconditionError(f"plays must be positive, got {plays}")
    game = rg.game
    if start is None:
        start = game.start
    if not 1 <= start <= game.n:
        raise PreconditionError(f"start out of range: {start}")
    if max_steps is None:
        max_steps = 4096 * game.n
    kind, s0, s1 = _reduced_arrays(rg)
    hits, truncated = kernels.mc_run(kind, s0, s1, start - 1, plays, max_steps, seed, backend)
    return MCEstimate(hits=hits, plays=plays, truncated=truncated)
