"""Optimal values, optimal strategies, and decision procedures.

The solvers compute the unique optimal value vector, characterized as
the fixed point of the one-step update operator (max/min of children at
player vertices, mean at avg vertices) that agrees with the reachable
absorption probabilities. Methods:

  value_iteration  approximate, iterates the operator from zero
  solve_avg_free   exact attractor layering for games without chance
  hoffman_karp     exact strategy improvement for stopping games
  (LP)             exact simplex when one player has no choices
  brute_force_oracle  exact by enumeration, for cross-checking
  solve            dispatcher; falls back to the chain transform so
                   every game gets an exact answer

Exactness on non-stopping mixed games comes from the transform: values
of the stopping companion are within half the spacing of representable
values of the original's, so snapping them back recovers the original
values exactly, and the pair (snapped, companion) is a checkable
certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

from . import kernels
from .exceptions import (
    BudgetError,
    CertificateError,
    InternalCheckError,
    NonConvergenceError,
    PreconditionError,
)
from .games import (
    Game,
    Strategy,
    ValueVector,
    VertexKind,
    enumerate_strategies,
)
from .lp import build_lp_max_free, build_lp_min_free, simplex_optimize, simplex_solve
from .markov import ReducedGame, is_stopping, reduce_game, solve_value_vector
from .stopping import StoppingTransform, build_stopping_game

DEFAULT_C = 9
DEFAULT_ORACLE_BUDGET = 16
DEFAULT_MAX_ITERS = 200_000

METHODS = ("auto", "vi", "hk", "lp", "avg-free", "oracle")


def value_separation(n: int) -> Fraction:
    """Minimum gap between distinct representable vertex values, 4**(-2n).

    Two distinct rationals with denominators at most 4**n differ by at
    least 1/(q*q') >= 4**(-2n); anything closer than half of that to a
    representable value identifies it uniquely.
    """
    return Fraction(1, 4 ** (2 * n))


def default_epsilon(n: int) -> Fraction:
    """Default value-iteration tolerance, 4**-(3n+1).

    A residual below epsilon leaves a geometric tail of further sweeps;
    on a stopping game some sink is hit within n steps with probability
    at least 2**-n, so the tail is at most about n * 2**n * epsilon.
    The extra 4**-(n+1) under the quarter-separation target absorbs
    that amplification, leaving the final approximation within a
    quarter separation of the exact fixed point.
    """
    return value_separation(n) / 4 ** (n + 1)


def apply_operator(game: Game, v: ValueVector) -> ValueVector:
    """One synchronous update: sinks to 0/1, players to max/min of
    children, avg to the mean."""
    if v.n != game.n:
        raise PreconditionError(f"value vector length {v.n} does not match game size {game.n}")
    out = []
    for i in game.vertices:
        kind = game.kind(i)
        if kind is VertexKind.SINK0:
            out.append(Fraction(0))
        elif kind is VertexKind.SINK1:
            out.append(Fraction(1))
        else:
            a, b = game.children_of(i)
            if kind is VertexKind.MAX:
                out.append(max(v[a], v[b]))
            elif kind is VertexKind.MIN:
                out.append(min(v[a], v[b]))
            else:
                out.append((v[a] + v[b]) / 2)
    return ValueVector(out)


def _progress_ranks(game: Game, v: ValueVector) -> dict[int, int]:
    """Backward layering over value-preserving edges.

    Rank 0 is the sinks; a player vertex is ranked once some optimal
    child is, an avg vertex once either child is. Vertices with a path
    to a sink through optimal play all get ranked; a positive-value
    vertex left unranked would contradict v being optimal.
    """
    ranks = {game.sink0: 0, game.sink1: 0}
    pending = set(game.interior)
    while pending:
        added = False
        for i in sorted(pending):
            kind = game.kind(i)
            a, b = game.children_of(i)
            if kind is VertexKind.AVG:
                options = (a, b)
            elif kind is VertexKind.MAX:
                best = max(v[a], v[b])
                options = tuple(c for c in (a, b) if v[c] == best)
            else:
                best = min(v[a], v[b])
                options = tuple(c for c in (a, b) if v[c] == best)
            ranked = [ranks[c] for c in options if c in ranks]
            if ranked:
                ranks[i] = min(ranked) + 1
                pending.discard(i)
                added = True
        if not added:
            break
    return ranks


def greedy_strategies(game: Game, v: ValueVector) -> tuple[Strategy, Strategy]:
    """Extract locally optimal strategies from an optimal value vector.

    Ties between equal-valued children break toward the lower child id,
    except at positive-value vertices, where they break toward the
    child closer to a sink under optimal play (then lower id). The
    exception keeps ties from forming positive-value cycles, which
    would strand the play and lose value; ties at value 0 cannot lose
    anything, so they stay literal.
    """
    if v.n != game.n:
        raise PreconditionError(f"value vector length {v.n} does not match game size {game.n}")
    ranks = _progress_ranks(game, v)
    tau_picks: dict[int, int] = {}
    sigma_picks: dict[int, int] = {}
    for i in game.interior:
        kind = game.kind(i)
        if not kind.is_player:
            continue
        a, b = game.children_of(i)
        if v[a] != v[b]:
            want_max = kind is VertexKind.MAX
            pick = a if (v[a] > v[b]) == want_max else b
        elif v[i] == 0:
            pick = min(a, b)
        else:
            pick = min((c for c in (a, b)), key=lambda c: (ranks.get(c, game.n + 1), c))
        if kind is VertexKind.MIN:
            tau_picks[i] = pick
        else:
            sigma_picks[i] = pick
    return (
        Strategy.of(VertexKind.MIN, tau_picks),
        Strategy.of(VertexKind.MAX, sigma_picks),
    )


def _operator_arrays(game: Game):
    """Kind codes and 0-based child indices for the sweep kernels."""
    kind = []
    c0 = []
    c1 = []
    for i in game.vertices:
        k = game.kind(i)
        kind.append(kernels.KIND_CODES[k.value])
        if k.is_sink:
            c0.append(i - 1)
            c1.append(i - 1)
        else:
            a, b = game.children_of(i)
            c0.append(a - 1)
            c1.append(b - 1)
    return kind, c0, c1


def _grid_setup(n: int, epsilon: Union[Fraction, None]):
    """Pick the fixed-point scale for a tolerance; returns (eps, K, thr).

    The grid is at least 16x finer than epsilon. Whenever that fits the
    int64 kernels the full 60 bits are used (extra precision is free);
    otherwise the big-integer path gets 16 guard bits.
    """
    eps = Fraction(epsilon) if epsilon is not None else default_epsilon(n)
    if eps <= 0:
        raise PreconditionError(f"epsilon must be positive, got {eps}")
    scaled = (16 * eps.denominator + eps.numerator - 1) // eps.numerator
    bits = max(20, (max(scaled, 1) - 1).bit_length())
    if bits <= kernels.K_MAX_INT64:
        bits = kernels.K_MAX_INT64
    else:
        bits += 16
    one = 1 << bits
    thr = (eps.numerator * one - 1) // eps.denominator
    return eps, bits, min(thr, one)


def value_iteration(
    game: Game,
    max_iters: int = DEFAULT_MAX_ITERS,
    epsilon: Union[Fraction, None] = None,
    backend: Union[str, None] = None,
) -> tuple[ValueVector, int]:
    """Iterate the update operator from zero (sinks pinned) until the
    largest componentwise change drops below epsilon.

    Runs on a fixed-point integer grid with averages rounded down, so
    iterates are exactly monotone nondecreasing and never exceed the
    true fixed point. Returns (approximation, productive sweeps), where
    a sweep is productive if it changed anything. Raises
    NonConvergenceError (with partial values attached) at max_iters.
    """
    if max_iters < 1:
        raise PreconditionError(f"max_iters must be positive, got {max_iters}")
    eps, bits, thr = _grid_setup(game.n, epsilon)
    one = 1 << bits
    kind, c0, c1 = _operator_arrays(game)
    if bits <= kernels.K_MAX_INT64:
        raw, productive, converged = kernels.vi_run(kind, c0, c1, one, thr, max_iters, backend)
        ints = [int(x) for x in raw]
    else:
        ints, productive, converged = kernels.vi_run_object(kind, c0, c1, one, thr, max_iters)
    values = ValueVector(Fraction(x, one) for x in ints)
    if not converged:
        raise NonConvergenceError(
            f"value iteration did not reach epsilon={eps} within {max_iters} sweeps",
            values=values,
            iterations=productive,
        )
    return values, productive


def vi_iterates(
    game: Game,
    epsilon: Union[Fraction, None] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Iterator[ValueVector]:
    """Yield the start vector and every sweep result, stopping where
    value_iteration would stop. Same grid arithmetic, so the final
    yield equals value_iteration's result exactly."""
    _eps, bits, thr = _grid_setup(game.n, epsilon)
    one = 1 << bits
    kind, c0, c1 = _operator_arrays(game)
    v = kernels.start_vector(kind, one)
    yield ValueVector(Fraction(x, one) for x in v)
    sweeps = 0
    while sweeps < max_iters:
        new = kernels.sweep_ints(kind, c0, c1, v, one)
        res = max((b - a for a, b in zip(v, new)), default=0)
        v = new
        sweeps += 1
        yield ValueVector(Fraction(x, one) for x in v)
        if res <= thr:
            return


def avg_free_run(game: Game) -> tuple[ValueVector, int]:
    """Attractor solve for games without chance vertices; returns the
    exact 0/1 value vector and the number of passes executed.

    Two sweeps of rules per pass over undetermined vertices: a max
    vertex becomes 1 as soon as a determined child is 1, a min vertex 0
    as soon as a determined child is 0; with both children determined
    the vertex takes their max/min. Vertices never determined have no
    way to force the 1-sink and no need to avoid it: they are 0.
    The loop runs at most n-2 passes.
    """
    if game.has_kind(VertexKind.AVG):
        raise PreconditionError("game has avg vertices; this solver handles player-only games")
    val: dict[int, Fraction] = {v: Fraction(0) for v in game.vertices}
    val[game.sink1] = Fraction(1)
    done = {game.sink0, game.sink1}
    passes = 0
    while len(done) < game.n:
        changed = False
        for i in game.interior:
            if i in done:
                continue
            a, b = game.children_of(i)
            a_done = a in done
            b_done = b in done
            if game.kind(i) is VertexKind.MAX:
                if (a_done and val[a] == 1) or (b_done and val[b] == 1):
                    val[i] = Fraction(1)
                elif a_done and b_done:
                    val[i] = max(val[a], val[b])
                else:
                    continue
            else:
                if (a_done and val[a] == 0) or (b_done and val[b] == 0):
                    val[i] = Fraction(0)
                elif a_done and b_done:
                    val[i] = min(val[a], val[b])
                else:
                    continue
            done.add(i)
            changed = True
        passes += 1
        if not changed:
            break
    return ValueVector(val[v] for v in game.vertices), passes


def solve_avg_free(game: Game) -> ValueVector:
    """Exact optimal values of a game without chance vertices."""
    values, _passes = avg_free_run(game)
    return values


def best_response(game: Game, fixed: Strategy) -> tuple[Strategy, ValueVector]:
    """Optimal reply values against one fixed strategy, via the exact LP.

    Fixing one player leaves a one-player game; the matching linear
    program's optimum is its value vector. The reply strategy is read
    off greedily with the lower-index tie-break.
    """
    if fixed.owner is VertexKind.MIN:
        values = simplex_solve(build_lp_min_free(reduce_game(game, tau=fixed)))
        free = VertexKind.MAX
    else:
        values = simplex_solve(build_lp_max_free(reduce_game(game, sigma=fixed)))
        free = VertexKind.MIN
    picks = {}
    for i in game.vertices_of_kind(free):
        a, b = game.children_of(i)
        if values[a] == values[b]:
            picks[i] = min(a, b)
        elif free is VertexKind.MAX:
            picks[i] = a if values[a] > values[b] else b
        else:
            picks[i] = a if values[a] < values[b] else b
    return Strategy.of(free, picks), values


@dataclass(frozen=True)
class Certificate:
    """Witness pair for the exact-solve pipeline.

    z claims to be the optimal value vector of the game; s the optimal
    value vector of its chain-stopping companion with multiplier c.
    Acceptance requires both to be operator fixed points with every
    original vertex's gap below half the value separation.
    """

    z: ValueVector
    s: ValueVector
    c: int = DEFAULT_C

    @property
    def separation(self) -> Fraction:
        return value_separation(self.z.n)


@dataclass(frozen=True)
class SolveReport:
    """Everything a solver run produced."""

    values: ValueVector
    tau: Strategy
    sigma: Strategy
    method: str
    iterations: int
    certificate: Union[Certificate, None] = None


def _report(game: Game, values: ValueVector, method: str, iterations: int,
            certificate: Union[Certificate, None] = None) -> SolveReport:
    tau, sigma = greedy_strategies(game, values)
    return SolveReport(
        values=values,
        tau=tau,
        sigma=sigma,
        method=method,
        iterations=iterations,
        certificate=certificate,
    )


def _min_best_reply(game: Game, sigma: Strategy) -> tuple[Strategy, ValueVector]:
    """Exact min-side best reply on a stopping game by policy iteration.

    Evaluate the current reply exactly, switch every min vertex whose
    other child is strictly better, repeat. Values never increase and
    the greedy map is deterministic, so the loop settles; the bound is
    the number of distinct min strategies.
    """
    mins = game.vertices_of_kind(VertexKind.MIN)
    tau = Strategy.of(VertexKind.MIN, {v: game.children_of(v)[0] for v in mins})
    guard = 2 ** len(mins) + 2
    for _ in range(guard):
        values = solve_value_vector(reduce_game(game, tau, sigma))
        picks = {}
        for i in mins:
            a, b = game.children_of(i)
            if values[a] == values[b]:
                picks[i] = min(a, b)
            else:
                picks[i] = a if values[a] < values[b] else b
        new_tau = Strategy.of(VertexKind.MIN, picks)
        if new_tau == tau:
            return tau, values
        tau = new_tau
    raise InternalCheckError("min policy iteration failed to settle")


def hoffman_karp(game: Game) -> SolveReport:
    """Exact strategy improvement for stopping games.

    Start max at all left children; each round, compute min's exact
    best reply and switch every max vertex whose other child is
    strictly better under those values. No switchable vertex means the
    values are a fixed point of the update operator, hence optimal.
    Rounds are bounded by the number of distinct max strategies.
    """
    if not is_stopping(game):
        raise PreconditionError("strategy improvement needs a stopping game; transform first")
    maxes = game.vertices_of_kind(VertexKind.MAX)
    bound = 2 ** len(maxes)
    sigma = Strategy.of(VertexKind.MAX, {v: game.children_of(v)[0] for v in maxes})
    rounds = 0
    while True:
        _tau, values = _min_best_reply(game, sigma)
        switched = {}
        for i in maxes:
            a, b = game.children_of(i)
            pick = sigma.pick(i)
            other = b if pick == a else a
            if values[other] > values[pick]:
                switched[i] = other
        if not switched:
            return _report(game, values, "hk", rounds)
        if rounds >= bound:
            raise InternalCheckError("strategy improvement exceeded its round bound")
        sigma = Strategy.of(VertexKind.MAX, {**sigma.as_dict(), **switched})
        rounds += 1


def round_to_value_set(x: Fraction, n: int) -> Fraction:
    """Snap an approximation to the unique representable vertex value
    within half the separation 4**(-2n).

    Representable values for an n-vertex game have denominator at most
    4**n; the closest one is found by best rational approximation. If
    even that lies half a separation or more away the precondition was
    violated and the call fails rather than guess.
    """
    x = Fraction(x)
    best = x.limit_denominator(4**n)
    if best < 0:
        best = Fraction(0)
    elif best > 1:
        best = Fraction(1)
    if abs(x - best) < value_separation(n) / 2:
        return best
    raise PreconditionError(
        f"no representable value within half a separation of {x} for n={n}"
    )


def _transform_solve(game: Game, c: int) -> tuple[ValueVector, ValueVector, int, StoppingTransform]:
    """Solve exactly through the stopping companion.

    Returns (z, s, improvement rounds, transform record): s is the
    companion's exact optimal vector from strategy improvement, z the
    snap-back of s onto the original game's representable values. The
    operator and gap checks are theory-guaranteed; failing them means a
    bug, not bad input.
    """
    transformed, record = build_stopping_game(game, c)
    inner = hoffman_karp(transformed)
    s = inner.values
    z = ValueVector(round_to_value_set(s[record.mapped(i)], game.n) for i in game.vertices)
    half_sep = value_separation(game.n) / 2
    if apply_operator(game, z) != z:
        raise InternalCheckError("snapped vector is not an operator fixed point")
    for i in game.vertices:
        if abs(z[i] - s[record.mapped(i)]) >= half_sep:
            raise InternalCheckError(f"snap-back gap at vertex {i} reaches half a separation")
    return z, s, inner.iterations, record


def solve(
    game: Game,
    method: str = "auto",
    c: int = DEFAULT_C,
    with_certificate: bool = False,
    epsilon: Union[Fraction, None] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    oracle_budget: int = DEFAULT_ORACLE_BUDGET,
    backend: Union[str, None] = None,
) -> SolveReport:
    """Compute the optimal value vector by the requested method.

    auto picks the cheapest exact path: the attractor solver when there
    is no chance, the LP when one player is absent, strategy
    improvement when the game is stopping, and otherwise the chain
    transform (solve the stopping companion, snap values back, verify).
    The transform path always attaches a certificate; pass
    with_certificate to force one on the other paths too.
    """
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}; want one of {', '.join(METHODS)}")

    has_avg = game.has_kind(VertexKind.AVG)
    has_max = game.has_kind(VertexKind.MAX)
    has_min = game.has_kind(VertexKind.MIN)

    if method == "auto":
        if not has_avg:
            method = "avg-free"
        elif not has_min or not has_max:
            method = "lp"
        elif is_stopping(game):
            method = "hk"
        else:
            z, s, rounds, _record = _transform_solve(game, c)
            cert = Certificate(z=z, s=s, c=c)
            return _report(game, z, "transform", rounds, cert)

    if method == "avg-free":
        if has_avg:
            raise PreconditionError("avg-free method on a game with avg vertices")
        values, passes = avg_free_run(game)
        report = _report(game, values, "avg-free", passes)
    elif method == "lp":
        if has_min and has_max:
            raise PreconditionError("lp method needs a game with at most one player present")
        if not has_min:
            result = simplex_optimize(build_lp_min_free(game))
        else:
            result = simplex_optimize(build_lp_max_free(game))
        report = _report(game, ValueVector(result.values), "lp", result.pivots)
    elif method == "hk":
        report = hoffman_karp(game)
    elif method == "vi":
        if not is_stopping(game):
            raise PreconditionError("vi method needs a stopping game; transform first")
        approx, iters = value_iteration(game, max_iters=max_iters, epsilon=epsilon, backend=backend)
        z = ValueVector(round_to_value_set(x, game.n) for x in approx.components)
        if apply_operator(game, z) != z:
            raise NonConvergenceError(
                "value iteration result does not snap to a fixed point; lower epsilon",
                values=approx,
                iterations=iters,
            )
        report = _report(game, z, "vi", iters)
    else:  # oracle
        report = brute_force_oracle(game, budget=oracle_budget)

    if with_certificate and report.certificate is None:
        z, s, _rounds, _record = _transform_solve(game, c)
        if z != report.values:
            raise InternalCheckError("certificate values disagree with the solve result")
        report = SolveReport(
            values=report.values,
            tau=report.tau,
            sigma=report.sigma,
            method=report.method,
            iterations=report.iterations,
            certificate=Certificate(z=z, s=s, c=c),
        )
    return report


def brute_force_oracle(game: Game, budget: int = DEFAULT_ORACLE_BUDGET) -> SolveReport:
    """Optimal values by enumerating every strategy pair.

    Solves each fully reduced chain exactly and returns the first pair
    (in lexicographic order, min strategies outermost) that is a
    componentwise saddle point: max cannot raise any component against
    it, min cannot lower any. Reference implementation for the test
    suite; exponential, hence the budget on combined strategy bits.
    """
    n_max = len(game.vertices_of_kind(VertexKind.MAX))
    n_min = len(game.vertices_of_kind(VertexKind.MIN))
    if n_max + n_min > budget:
        raise BudgetError(
            f"{n_max + n_min} combined strategy bits exceed the oracle budget of {budget}"
        )
    taus = enumerate_strategies(game, VertexKind.MIN)
    sigmas = enumerate_strategies(game, VertexKind.MAX)
    table = [
        [solve_value_vector(ReducedGame(game, tau, sigma)) for sigma in sigmas]
        for tau in taus
    ]
    pairs = 0
    for ti, tau in enumerate(taus):
        for si, sigma in enumerate(sigmas):
            pairs += 1
            vals = table[ti][si]
            if all(table[ti][sj].leq(vals) for sj in range(len(sigmas))) and all(
                vals.leq(table[tj][si]) for tj in range(len(taus))
            ):
                return SolveReport(
                    values=vals,
                    tau=tau,
                    sigma=sigma,
                    method="oracle",
                    iterations=pairs,
                    certificate=None,
                )
    raise InternalCheckError("no saddle point among strategy pairs")


def game_value(game: Game) -> Fraction:
    """The game's value: the optimal value at the start vertex."""
    return solve(game, "auto").values[game.start]


def decide_value(game: Game, alpha: Fraction) -> bool:
    """Exact strict comparison: is the game value greater than alpha?"""
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise PreconditionError(f"alpha must lie in [0, 1], got {alpha}")
    return game_value(game) > alpha


def verify_ovv_certificate(game: Game, cert: Certificate) -> bool:
    """Check a witness pair without trusting the solver that made it.

    Rebuilds the stopping companion for cert.c and checks exactly:
    z is a fixed point of the game's operator, s of the companion's,
    and every original vertex's |z - s| gap is below half the value
    separation. Together these force z to be the optimal value vector.
    Dimension mismatches raise; failed checks just return False.
    """
    if cert.z.n != game.n:
        raise CertificateError(f"certificate z has {cert.z.n} entries, game has {game.n}")
    transformed, record = build_stopping_game(game, cert.c)
    if cert.s.n != transformed.n:
        raise CertificateError(
            f"certificate s has {cert.s.n} entries, companion game has {transformed.n}"
        )
    if apply_operator(game, cert.z) != cert.z:
        return False
    if apply_operator(transformed, cert.s) != cert.s:
        return False
    half_sep = value_separation(game.n) / 2
    for i in game.vertices:
        if abs(cert.z[i] - cert.s[record.mapped(i)]) >= half_sep:
            return False
    return True


def verify_value_certificate(
    game: Game,
    s: ValueVector,
    alpha: Fraction,
    c: int = DEFAULT_C,
    complement: bool = False,
) -> bool:
    """Check a witness for the decision 'game value > alpha'.

    s must be an exact operator fixed point of the stopping companion;
    the claim holds when s at the mapped start vertex exceeds alpha
    (or, for the complement decision, does not). Sound for alpha with
    denominator at most 4**n because the companion's start value lies
    within half a separation of the true game value.
    """
    transformed, record = build_stopping_game(game, c)
    if s.n != transformed.n:
        raise CertificateError(
            f"certificate s has {s.n} entries, companion game has {transformed.n}"
        )
    if apply_operator(transformed, s) != s:
        return False
    at_start = s[record.mapped(game.start)]
    return at_start <= alpha if complement else at_start > alpha
