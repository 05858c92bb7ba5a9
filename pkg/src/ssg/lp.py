"""One-player games as exact linear programs, and a rational simplex.

When only one player has choices left, optimal values are the optimum
of a small linear program. With no min vertices: minimize the sum of
all values subject to each max vertex dominating both children and each
avg vertex dominating its children's mean. With no max vertices the
directions flip, plus one extra ingredient: vertices from which min can
keep the play away from the 1-sink forever are pinned to 0 first, since
otherwise cycling solutions would satisfy every <= row while being too
large. Both builders also accept a reduced game whose missing player is
fixed by strategy; fixed vertices turn into pass-through equalities.

The simplex is an exact two-phase primal method over Fractions with
Bland's anti-cycling rule. Variables are implicitly nonnegative.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

from .exceptions import (
    InfeasibleError,
    InternalCheckError,
    PreconditionError,
    UnboundedError,
)
from .games import Game, ValueVector, VertexKind, format_rational
from .markov import ReducedGame

RELATIONS = ("<=", ">=", "=")

_MAX_PIVOTS = 100_000


class Constraint(NamedTuple):
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction


@dataclass(frozen=True)
class LinearProgram:
    """A rational LP over implicitly nonnegative variables."""

    variables: tuple[str, ...]
    objective: tuple[Fraction, ...]
    direction: str
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        if self.direction not in ("min", "max"):
            raise PreconditionError(f"direction must be 'min' or 'max', got {self.direction!r}")
        if len(set(self.variables)) != len(self.variables):
            raise PreconditionError("variable names must be unique")
        if len(self.objective) != len(self.variables):
            raise PreconditionError("objective length does not match variable count")
        for k, con in enumerate(self.constraints):
            if len(con.coeffs) != len(self.variables):
                raise PreconditionError(f"constraint {k} width does not match variable count")
            if con.relation not in RELATIONS:
                raise PreconditionError(f"constraint {k} has unknown relation {con.relation!r}")


def _term_list(coeffs, names) -> str:
    parts = []
    for c, name in zip(coeffs, names):
        if c == 0:
            continue
        mag = abs(c)
        body = name if mag == 1 else f"{format_rational(mag)} {name}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def dump_lp(lp: LinearProgram) -> str:
    """Human-readable listing, one constraint per line."""
    out = [f"{lp.direction} {_term_list(lp.objective, lp.variables)}", "s.t."]
    for con in lp.constraints:
        out.append(f"  {_term_list(con.coeffs, lp.variables)} {con.relation} {format_rational(con.rhs)}")
    return "\n".join(out) + "\n"


def _as_reduced(game: Union[Game, ReducedGame]) -> ReducedGame:
    return game if isinstance(game, ReducedGame) else ReducedGame(game)


def _var_names(n: int) -> tuple[str, ...]:
    return tuple(f"v{i}" for i in range(1, n + 1))


def _unit(n: int, i: int, value: Fraction = Fraction(1)) -> list[Fraction]:
    row = [Fraction(0)] * n
    row[i - 1] = value
    return row


def _edge_row(n: int, v: int, succ: tuple[int, ...]) -> tuple[Fraction, ...]:
    """Coefficients of v(v) - average-or-copy of successors."""
    row = [Fraction(0)] * n
    row[v - 1] = Fraction(1)
    w = Fraction(1, len(succ))
    for j in succ:
        row[j - 1] -= w
    return tuple(row)


def build_lp_min_free(game: Union[Game, ReducedGame]) -> LinearProgram:
    """LP whose unique optimum is the value vector when min has no choices.

    Accepts a plain game without min vertices or a reduced game whose
    min side is fixed. Minimizing the value sum pushes every component
    down onto the max/avg dominance rows, and vertices trapped in
    cycles fall to 0 on their own.
    """
    rg = _as_reduced(game)
    g = rg.game
    if g.has_kind(VertexKind.MIN) and rg.tau is None:
        raise PreconditionError("game has unfixed min vertices; fix tau or use the max-free builder")
    n = g.n
    cons: list[Constraint] = [
        Constraint(tuple(_unit(n, g.sink0)), "=", Fraction(0)),
        Constraint(tuple(_unit(n, g.sink1)), "=", Fraction(1)),
    ]
    for i in range(1, n + 1):
        cons.append(Constraint(tuple(_unit(n, i)), ">=", Fraction(0)))
    for v in g.interior:
        succ = rg.successors(v)
        if len(succ) == 1:
            cons.append(Constraint(_edge_row(n, v, succ), "=", Fraction(0)))
        elif g.kind(v) is VertexKind.MAX:
            for j in succ:
                cons.append(Constraint(_edge_row(n, v, (j,)), ">=", Fraction(0)))
        else:
            cons.append(Constraint(_edge_row(n, v, succ), ">=", Fraction(0)))
    return LinearProgram(
        variables=_var_names(n),
        objective=tuple(Fraction(1) for _ in range(n)),
        direction="min",
        constraints=tuple(cons),
    )


def zero_value_set(game: Union[Game, ReducedGame]) -> frozenset[int]:
    """Vertices whose value is exactly 0 when max has no choices.

    Complements the least fixpoint of "can be steered to the 1-sink
    with positive probability": the 1-sink itself, any avg vertex with
    a qualifying child, any min vertex with both children qualifying,
    any fixed vertex whose pick qualifies. Everything outside, the min
    player can trap away from the 1-sink forever. Always contains the
    0-sink.
    """
    rg = _as_reduced(game)
    g = rg.game
    if g.has_kind(VertexKind.MAX) and rg.sigma is None:
        raise PreconditionError("zero_value_set needs the max side absent or fixed")
    need = {}
    preds: dict[int, list[int]] = {}
    for v in g.interior:
        succ = rg.successors(v)
        need[v] = 2 if (g.kind(v) is VertexKind.MIN and len(succ) == 2) else 1
        for j in succ:
            preds.setdefault(j, []).append(v)
    reach = {g.sink1}
    counts: dict[int, int] = {}
    queue = deque(reach)
    while queue:
        v = queue.popleft()
        for p in preds.get(v, ()):
            if p in reach:
                continue
            counts[p] = counts.get(p, 0) + 1
            if counts[p] >= need[p]:
                reach.add(p)
                queue.append(p)
    return frozenset(set(g.vertices) - reach)


def build_lp_max_free(game: Union[Game, ReducedGame]) -> LinearProgram:
    """LP whose unique optimum is the value vector when max has no choices.

    Mirror image of the min-free program: maximize the value sum under
    v(i) <= 1 and min/avg dominance rows, with the zero_value_set
    pinned to 0 so that cycling cannot inflate the optimum.
    """
    rg = _as_reduced(game)
    g = rg.game
    if g.has_kind(VertexKind.MAX) and rg.sigma is None:
        raise PreconditionError("game has unfixed max vertices; fix sigma or use the min-free builder")
    n = g.n
    zero = zero_value_set(rg)
    cons: list[Constraint] = [
        Constraint(tuple(_unit(n, g.sink0)), "=", Fraction(0)),
        Constraint(tuple(_unit(n, g.sink1)), "=", Fraction(1)),
    ]
    for i in sorted(zero - {g.sink0}):
        cons.append(Constraint(tuple(_unit(n, i)), "=", Fraction(0)))
    for v in g.interior:
        if v in zero:
            continue
        cons.append(Constraint(tuple(_unit(n, v)), "<=", Fraction(1)))
        succ = rg.successors(v)
        if len(succ) == 1:
            cons.append(Constraint(_edge_row(n, v, succ), "=", Fraction(0)))
        elif g.kind(v) is VertexKind.MIN:
            for j in succ:
                cons.append(Constraint(_edge_row(n, v, (j,)), "<=", Fraction(0)))
        else:
            cons.append(Constraint(_edge_row(n, v, succ), "<=", Fraction(0)))
    return LinearProgram(
        variables=_var_names(n),
        objective=tuple(Fraction(1) for _ in range(n)),
        direction="max",
        constraints=tuple(cons),
    )


class SimplexResult(NamedTuple):
    values: tuple[Fraction, ...]
    objective: Fraction
    pivots: int


def simplex_optimize(lp: LinearProgram) -> SimplexResult:
    """Exact two-phase primal simplex with Bland's rule.

    Raises InfeasibleError or UnboundedError as appropriate; otherwise
    returns an optimal vertex of the feasible region.
    """
    nv = len(lp.variables)
    maximize = lp.direction == "max"
    obj = [x if maximize else -x for x in lp.objective]

    # Normalize to Ax (rel) b with b >= 0, then add slack/artificial columns.
    rows = []
    for con in lp.constraints:
        coeffs = list(con.coeffs)
        rel = con.relation
        rhs = con.rhs
        if rhs < 0:
            coeffs = [-x for x in coeffs]
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append((coeffs, rel, rhs))

    n_slack = sum(1 for _, rel, _ in rows if rel != "=")
    n_art = sum(1 for _, rel, _ in rows if rel != "<=")
    ncols = nv + n_slack + n_art
    art_start = nv + n_slack

    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    slack_at = nv
    art_at = art_start
    artificial_rows = []
    for coeffs, rel, rhs in rows:
        row = [Fraction(x) for x in coeffs] + [Fraction(0)] * (ncols - nv) + [Fraction(rhs)]
        if rel == "<=":
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        elif rel == ">=":
            row[slack_at] = Fraction(-1)
            slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            artificial_rows.append(len(tableau))
            art_at += 1
        else:
            row[art_at] = Fraction(1)
            basis.append(art_at)
            artificial_rows.append(len(tableau))
            art_at += 1
        tableau.append(row)

    m = len(tableau)
    pivots = 0

    def pivot(r: int, j: int) -> None:
        nonlocal pivots
        pivots += 1
        prow = tableau[r]
        pv = prow[j]
        tableau[r] = [x / pv for x in prow]
        prow = tableau[r]
        for i in range(m):
            if i == r:
                continue
            factor = tableau[i][j]
            if factor != 0:
                tableau[i] = [x - factor * y for x, y in zip(tableau[i], prow)]
        basis[r] = j

    def run_phase(cost: list[Fraction], allowed: range) -> None:
        # cost[j] holds the reduced cost z_j - c_j; optimal when all >= 0.
        nonlocal pivots
        zrow = list(cost)

        def apply_pivot_to_z(r: int, j: int) -> None:
            factor = zrow[j]
            if factor != 0:
                prow = tableau[r]
                for k in range(len(zrow)):
                    zrow[k] -= factor * prow[k]

        while True:
            if pivots > _MAX_PIVOTS:
                raise InternalCheckError("simplex exceeded its pivot budget")
            enter = -1
            for j in allowed:
                if zrow[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return
            leave = -1
            best = None
            for i in range(m):
                a = tableau[i][enter]
                if a > 0:
                    ratio = tableau[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best = ratio
                        leave = i
            if leave < 0:
                raise UnboundedError("objective is unbounded over the feasible region")
            pivot(leave, enter)
            apply_pivot_to_z(leave, enter)

    if n_art:
        # Phase 1: drive the artificial variables to zero.
        cost = [Fraction(0)] * (ncols + 1)
        for j in range(art_start, ncols):
            cost[j] = Fraction(1)
        # Canonicalize against the starting basis (artificials are basic).
        for r in artificial_rows:
            for k in range(ncols + 1):
                cost[k] -= tableau[r][k]
        run_phase(cost, range(0, ncols))
        infeas = sum((tableau[i][-1] for i in range(m) if basis[i] >= art_start), Fraction(0))
        if infeas != 0:
            raise InfeasibleError("constraints admit no solution")
        # Pivot leftover artificials out of the basis, or drop dead rows.
        for i in range(m - 1, -1, -1):
            if basis[i] < art_start:
                continue
            j = next((k for k in range(art_start) if tableau[i][k] != 0), -1)
            if j >= 0:
                pivot(i, j)
            else:
                del tableau[i]
                del basis[i]
                m -= 1

    cost = [Fraction(0)] * (ncols + 1)
    for j in range(nv):
        cost[j] = -obj[j]
    for i in range(m):
        bj = basis[i]
        cb = obj[bj] if bj < nv else Fraction(0)
        if cb != 0:
            for k in range(ncols + 1):
                cost[k] += cb * tableau[i][k]
    run_phase(cost, range(0, art_start))

    values = [Fraction(0)] * nv
    for i in range(m):
        if basis[i] < nv:
            values[basis[i]] = tableau[i][-1]
    objective = sum((c * x for c, x in zip(lp.objective, values)), Fraction(0))
    return SimplexResult(values=tuple(values), objective=objective, pivots=pivots)


def simplex_solve(lp: LinearProgram) -> ValueVector:
    """Solve and wrap the optimum as a value vector.

    Meant for the game programs built above, whose optima always lie in
    [0, 1]; use simplex_optimize for arbitrary programs.
    """
    return ValueVector(simplex_optimize(lp).values)
