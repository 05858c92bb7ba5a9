"""Make any game stopping by threading edges through coin-flip chains.

Every edge (i, j) of the original game is replaced by a run of m fair
coin vertices. Each one continues toward j on one outcome; the last one
diverts to the 0-sink on the other, so a single traversal of the old
edge now gets killed with probability 2**-m. With m = c*n and c large
enough, the perturbation of every value is far below the spacing of
representable values, which is what lets exact answers be recovered
from the stopping companion game.

Vertex numbering in the transformed game: original non-sinks keep their
ids, chain vertices fill n-1 .. n'-2 (allocated per original vertex in
ascending order, left edge first), and the two sinks move to n'-1, n'.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

from .exceptions import PreconditionError
from .games import Game, Strategy, VertexKind, build_game
from .markov import reduce_game, solve_value_vector


@dataclass(frozen=True)
class StoppingTransform:
    """Bookkeeping of one chain construction.

    c is the chain-length multiplier, m = c * n the per-edge chain
    length, and stop_prob = 2**-m the chance one traversal of an
    original edge is diverted to the 0-sink. vertex_map sends original
    ids to transformed ids; edge_chains lists each original edge's
    chain vertices in traversal order.
    """

    c: int
    m: int
    stop_prob: Fraction
    n_original: int
    n_transformed: int
    vertex_map: dict[int, int]
    edge_chains: dict[tuple[int, int], tuple[int, ...]]

    def mapped(self, vid: int) -> int:
        try:
            return self.vertex_map[vid]
        except KeyError:
            raise PreconditionError(f"vertex {vid} is not an original-game vertex") from None


def build_stopping_game(game: Game, c: int = 9) -> tuple[Game, StoppingTransform]:
    """Return the stopping companion game and its transform record."""
    if c < 1:
        raise PreconditionError(f"chain multiplier c must be positive, got {c}")
    n = game.n
    m = c * n
    n_prime = n + m * game.edge_count
    sink0p = n_prime - 1
    sink1p = n_prime

    vertex_map = {v: v for v in game.interior}
    vertex_map[game.sink0] = sink0p
    vertex_map[game.sink1] = sink1p

    rows: list[tuple[int, VertexKind, int, int]] = []
    edge_chains: dict[tuple[int, int], tuple[int, ...]] = {}
    next_id = n - 1
    for v in game.interior:
        heads = []
        for j in game.children_of(v):
            ids = tuple(range(next_id, next_id + m))
            next_id += m
            edge_chains[(v, j)] = ids
            heads.append(ids[0])
            mj = vertex_map[j]
            for k, a in enumerate(ids):
                if k + 1 < m:
                    rows.append((a, VertexKind.AVG, mj, ids[k + 1]))
                elif mj != sink0p:
                    rows.append((a, VertexKind.AVG, mj, sink0p))
                else:
                    # The edge already points at the 0-sink; a plain
                    # (sink0, sink0) pair would repeat a child, so the
                    # divert slot loops. Both slots force value 0 and
                    # the exit slot keeps the chain stopping.
                    rows.append((a, VertexKind.AVG, mj, a))
        rows.append((v, game.kind(v), heads[0], heads[1]))

    transformed = build_game(n_prime, vertex_map[game.start], rows)
    record = StoppingTransform(
        c=c,
        m=m,
        stop_prob=Fraction(1, 2**m),
        n_original=n,
        n_transformed=n_prime,
        vertex_map=vertex_map,
        edge_chains=edge_chains,
    )
    return transformed, record


def lift_strategy(transform: StoppingTransform, strategy: Strategy) -> Strategy:
    """Carry a strategy over to the transformed game.

    A pick i->j becomes i->head of the (i, j) chain; ownership and the
    set of owned vertices are unchanged because chains are all avg.
    """
    picks = {}
    for v, j in strategy.picks:
        try:
            picks[v] = transform.edge_chains[(v, j)][0]
        except KeyError:
            raise PreconditionError(f"pick {v}->{j} is not an original-game edge") from None
    return Strategy.of(strategy.owner, picks)


def transform_error_bound(n: int, c: int) -> Fraction:
    """Worst-case value perturbation of the chain construction: 2**(n*(3-c)).

    Vacuous (>= 1) for small c; at c = 9 it is 2**(-6n), far below the
    4**(-2n) spacing of exactly representable values.
    """
    e = n * (3 - c)
    if e >= 0:
        return Fraction(2**e)
    return Fraction(1, 2**-e)


class BoundCheck(NamedTuple):
    max_gap: Fraction
    within_bound: bool
    dominated: bool


def verify_transform_bound(
    game: Game,
    c: int,
    tau: Union[Strategy, None] = None,
    sigma: Union[Strategy, None] = None,
) -> BoundCheck:
    """Compare exact values of a strategy pair before and after the transform.

    Solves both reduced chains exactly and reports the largest gap over
    original vertices against 2**(n*(3-c)), plus whether the transformed
    values are dominated (chains only leak mass to the 0-sink, so they
    must be). The strategies must fully reduce the game.
    """
    rg = reduce_game(game, tau, sigma)
    if not rg.fully_reduced:
        raise PreconditionError("verify_transform_bound needs both strategies fixed")
    v = solve_value_vector(rg)
    transformed, record = build_stopping_game(game, c)
    rg2 = reduce_game(
        transformed,
        lift_strategy(record, tau) if tau is not None else None,
        lift_strategy(record, sigma) if sigma is not None else None,
    )
    v2 = solve_value_vector(rg2)
    gap = max(
        (abs(v[i] - v2[record.mapped(i)]) for i in game.vertices),
        default=Fraction(0),
    )
    return BoundCheck(
        max_gap=gap,
        within_bound=gap <= transform_error_bound(game.n, c),
        dominated=all(v2[record.mapped(i)] <= v[i] for i in game.vertices),
    )
