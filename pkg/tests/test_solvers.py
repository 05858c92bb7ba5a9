"""End-to-end solver behavior: operator, iteration, improvement, oracle,
dispatch, and certificate checking."""

from fractions import Fraction

import pytest

from ssg import (
    BudgetError,
    Certificate,
    CertificateError,
    NonConvergenceError,
    PreconditionError,
    Strategy,
    ValueVector,
    VertexKind,
    apply_operator,
    best_response,
    brute_force_oracle,
    build_game,
    decide_value,
    default_epsilon,
    game_value,
    greedy_strategies,
    hoffman_karp,
    random_game,
    round_to_value_set,
    solve,
    solve_avg_free,
    value_iteration,
    value_separation,
    verify_ovv_certificate,
    verify_value_certificate,
    vi_iterates,
)
from ssg.fixtures import (
    FIXTURES,
    GAME_A,
    GAME_B,
    GAME_C,
    GAME_D,
    GAME_E,
    GAME_F,
    GAME_G,
)

HALF = Fraction(1, 2)

# a game using all three kinds with a max/min cycle, so it is not stopping
MIXED_LOOPY = build_game(5, 1, [(1, "max", 2, 3), (2, "min", 1, 3), (3, "avg", 4, 5)])
# same kinds but acyclic through the interior
MIXED_STOPPING = build_game(5, 1, [(1, "max", 2, 4), (2, "min", 3, 5), (3, "avg", 4, 5)])


# ----------------------------------------------------------- operator


def test_operator_single_coin_flip():
    assert apply_operator(GAME_A, ValueVector([0, 0, 1])) == ValueVector([HALF, 0, 1])


def test_operator_max_picks_larger_child():
    assert apply_operator(GAME_F, ValueVector([0, 0, 1])) == ValueVector([1, 0, 1])


@pytest.mark.parametrize("x", [Fraction(0), Fraction(1, 8), Fraction(1, 2), Fraction(1)])
def test_operator_fixed_point_family(x):
    # min vertices mirroring each other track any common value
    v = ValueVector([x, x, 0, 1])
    assert apply_operator(GAME_D, v) == v


def test_operator_keeps_sinks():
    v = apply_operator(GAME_G, ValueVector([0, 0, 0, 0, 1]))
    assert v[4] == 0 and v[5] == 1


# ----------------------------------------------------- value iteration


def test_vi_exact_after_one_sweep():
    values, sweeps = value_iteration(GAME_A)
    assert values == ValueVector([HALF, 0, 1])
    assert sweeps == 1


def test_vi_immediate_when_start_is_fixed():
    values, sweeps = value_iteration(GAME_D)
    assert values == ValueVector([0, 0, 0, 1])
    assert sweeps == 0


def test_vi_converges_on_chance_cycle():
    eps = Fraction(1, 10**6)
    values, sweeps = value_iteration(GAME_B, epsilon=eps)
    assert abs(values[1] - Fraction(2, 3)) <= eps
    assert abs(values[2] - Fraction(1, 3)) <= eps
    assert sweeps <= 40


def test_vi_approaches_from_below():
    for game, expect in [
        (GAME_B, ValueVector([Fraction(2, 3), Fraction(1, 3), 0, 1])),
        (MIXED_STOPPING, solve(MIXED_STOPPING).values),
    ]:
        approx, _ = value_iteration(game)
        assert approx.leq(expect)


def test_vi_iteration_cap():
    with pytest.raises(NonConvergenceError) as info:
        value_iteration(GAME_B, max_iters=3, epsilon=Fraction(1, 10**12))
    err = info.value
    assert err.iterations == 3
    assert err.values is not None and err.values[3] == 0 and err.values[4] == 1


def test_vi_rejects_bad_max_iters():
    with pytest.raises(PreconditionError):
        value_iteration(GAME_A, max_iters=0)


def test_vi_iterates_monotone_and_consistent():
    seen = list(vi_iterates(GAME_B))
    assert len(seen) >= 2
    for prev, cur in zip(seen, seen[1:]):
        assert prev.leq(cur)
    final, _ = value_iteration(GAME_B)
    assert seen[-1] == final


# ------------------------------------------------------ avg-free games


def test_avg_free_max_reaches_sink():
    v = solve_avg_free(GAME_F)
    assert v[1] == 1


def test_avg_free_cycles_are_worthless():
    assert solve_avg_free(GAME_D) == ValueVector([0, 0, 0, 1])
    assert solve_avg_free(GAME_E) == ValueVector([0, 0, 0, 1])


def test_avg_free_rejects_chance():
    with pytest.raises(PreconditionError):
        solve_avg_free(GAME_A)


# ------------------------------------------------------- best response


def test_best_response_vs_min_cycling():
    reply, values = best_response(GAME_E, Strategy.of(VertexKind.MIN, {2: 1}))
    assert values == ValueVector([0, 0, 0, 1])
    assert reply.pick(1) == 2  # zero everywhere, lower index wins


def test_best_response_vs_min_quitting():
    reply, values = best_response(GAME_E, Strategy.of(VertexKind.MIN, {2: 4}))
    assert values == ValueVector([1, 1, 0, 1])
    assert reply.pick(1) == 2


def test_best_response_with_no_free_vertices():
    reply, values = best_response(GAME_G, Strategy.of(VertexKind.MAX, {1: 2}))
    assert values == ValueVector([HALF, HALF, Fraction(3, 4), 0, 1])
    assert reply.as_dict() == {}


# ------------------------------------------------- strategy improvement


def test_hk_switches_to_better_coin():
    report = hoffman_karp(GAME_G)
    assert report.values == ValueVector([Fraction(3, 4), HALF, Fraction(3, 4), 0, 1])
    assert report.sigma.pick(1) == 3
    assert report.iterations <= 2


def test_hk_no_max_means_no_rounds():
    report = hoffman_karp(GAME_A)
    assert report.values == ValueVector([HALF, 0, 1])
    assert report.iterations == 0


def test_hk_single_max_choice():
    report = hoffman_karp(GAME_F)
    assert report.values == ValueVector([1, 0, 1])
    assert report.sigma.pick(1) == 3


def test_hk_needs_stopping():
    with pytest.raises(PreconditionError):
        hoffman_karp(GAME_C)


def test_hk_on_mixed_stopping_game():
    report = hoffman_karp(MIXED_STOPPING)
    assert report.values == brute_force_oracle(MIXED_STOPPING).values


# ------------------------------------------------------------ rounding


def test_rounding_snaps_nearby_points():
    sep = value_separation(3)
    assert round_to_value_set(HALF + sep / 8, 3) == HALF
    assert round_to_value_set(HALF, 3) == HALF
    assert round_to_value_set(Fraction(0), 3) == 0


def test_rounding_clamps_into_unit_interval():
    assert round_to_value_set(Fraction(-1, 10**9), 4) == 0
    assert round_to_value_set(Fraction(1) + Fraction(1, 10**9), 4) == 1


def test_rounding_refuses_distant_points():
    with pytest.raises(PreconditionError):
        round_to_value_set(Fraction(51, 100), 3)


# ------------------------------------------------------ greedy readout


def test_greedy_prefers_strictly_better_child():
    report = solve(GAME_G)
    assert report.sigma.pick(1) == 3


def test_greedy_zero_class_takes_lower_index():
    tau, _sigma = greedy_strategies(GAME_C, ValueVector([0, 0, 1]))
    assert tau.pick(1) == 1
    tau, sigma = greedy_strategies(GAME_E, ValueVector([0, 0, 0, 1]))
    assert tau.pick(2) == 1
    assert sigma.pick(1) == 2


def test_greedy_positive_tie_heads_for_the_sink():
    # both children of vertex 1 are worth 1, but child 5 is the 1-sink
    # itself; picking the lower index 2 would spin on the 1 <-> 2 cycle
    g = build_game(5, 1, [(1, "max", 2, 5), (2, "max", 5, 1), (3, "avg", 4, 5)])
    report = solve(g)
    assert report.values[1] == 1
    assert report.sigma.pick(1) == 5
    assert report.sigma.pick(2) == 5


def test_reported_strategies_achieve_the_values():
    from ssg import reduce_game, solve_value_vector

    for game in FIXTURES.values():
        report = solve(game)
        chained = solve_value_vector(reduce_game(game, report.tau, report.sigma))
        assert chained == report.values


# ------------------------------------------------------------- oracle


def test_oracle_on_fixture_games():
    assert brute_force_oracle(GAME_E).values == ValueVector([0, 0, 0, 1])
    assert brute_force_oracle(GAME_G).values == ValueVector(
        [Fraction(3, 4), HALF, Fraction(3, 4), 0, 1]
    )


def test_oracle_with_no_players_checks_one_pair():
    report = brute_force_oracle(GAME_A)
    assert report.iterations == 1
    assert report.tau.as_dict() == {} and report.sigma.as_dict() == {}


def test_oracle_budget():
    with pytest.raises(BudgetError):
        brute_force_oracle(GAME_E, budget=1)


# ----------------------------------------------------------- dispatch


@pytest.mark.parametrize(
    "game, expected_method",
    [
        (GAME_C, "avg-free"),
        (GAME_D, "avg-free"),
        (GAME_E, "avg-free"),
        (GAME_A, "lp"),
        (GAME_B, "lp"),
        (GAME_G, "lp"),
        (MIXED_STOPPING, "hk"),
        (MIXED_LOOPY, "transform"),
    ],
)
def test_auto_routes_by_shape(game, expected_method):
    assert solve(game).method == expected_method


def test_transform_route_carries_certificate():
    report = solve(MIXED_LOOPY)
    assert report.method == "transform"
    assert report.certificate is not None
    assert verify_ovv_certificate(MIXED_LOOPY, report.certificate)
    assert report.values == brute_force_oracle(MIXED_LOOPY).values


def test_requested_certificate_on_other_routes():
    report = solve(GAME_B, with_certificate=True)
    assert report.method == "lp"
    assert report.certificate is not None
    assert verify_ovv_certificate(GAME_B, report.certificate)


def test_methods_agree_on_stopping_game():
    reports = {m: solve(MIXED_STOPPING, method=m) for m in ("vi", "hk", "oracle", "auto")}
    values = {m: r.values for m, r in reports.items()}
    assert len(set(values.values())) == 1


def test_vi_method_snaps_to_exact_values():
    report = solve(GAME_B, method="vi")
    assert report.values == ValueVector([Fraction(2, 3), Fraction(1, 3), 0, 1])


def test_vi_method_needs_stopping():
    with pytest.raises(PreconditionError):
        solve(GAME_C, method="vi")


def test_method_preconditions():
    with pytest.raises(PreconditionError):
        solve(GAME_A, method="avg-free")
    with pytest.raises(PreconditionError):
        solve(MIXED_STOPPING, method="lp")
    with pytest.raises(PreconditionError):
        solve(GAME_A, method="newton")


def test_solve_backend_override():
    a = solve(MIXED_STOPPING, method="vi", backend="numpy")
    b = solve(MIXED_STOPPING, method="vi", backend="numba")
    assert a.values == b.values


# ---------------------------------------------------- value & decision


def test_game_values():
    assert game_value(GAME_A) == HALF
    assert game_value(GAME_B) == Fraction(2, 3)
    assert game_value(GAME_D) == 0


def test_decide_is_strict():
    assert decide_value(GAME_A, Fraction(1, 4))
    assert not decide_value(GAME_A, HALF)
    assert decide_value(GAME_B, HALF)


def test_decide_rejects_out_of_range_threshold():
    with pytest.raises(PreconditionError):
        decide_value(GAME_A, Fraction(-1, 10))
    with pytest.raises(PreconditionError):
        decide_value(GAME_A, Fraction(2))


# -------------------------------------------------------- certificates


def test_certificate_roundtrip():
    report = solve(MIXED_LOOPY, with_certificate=True)
    cert = report.certificate
    assert verify_ovv_certificate(MIXED_LOOPY, cert)
    assert cert.separation == value_separation(MIXED_LOOPY.n)


def test_certificate_rejects_perturbed_claim():
    cert = solve(MIXED_LOOPY, with_certificate=True).certificate
    sep = value_separation(MIXED_LOOPY.n)
    bumped = list(cert.z.components)
    bumped[0] = bumped[0] + sep
    bad = Certificate(z=ValueVector(bumped), s=cert.s, c=cert.c)
    assert not verify_ovv_certificate(MIXED_LOOPY, bad)


def test_certificate_rejects_wrong_fixed_point():
    # (1/8, 1/8, 0, 1) satisfies the operator but sits far from the
    # companion's vector, so the gap check catches it
    cert = solve(GAME_D, with_certificate=True).certificate
    assert verify_ovv_certificate(GAME_D, cert)
    imposter = Certificate(
        z=ValueVector([Fraction(1, 8), Fraction(1, 8), 0, 1]), s=cert.s, c=cert.c
    )
    assert apply_operator(GAME_D, imposter.z) == imposter.z
    assert not verify_ovv_certificate(GAME_D, imposter)


def test_certificate_dimension_mismatch():
    cert = solve(GAME_D, with_certificate=True).certificate
    with pytest.raises(CertificateError):
        verify_ovv_certificate(GAME_A, Certificate(z=cert.z, s=cert.s, c=cert.c))
    with pytest.raises(CertificateError):
        verify_ovv_certificate(GAME_D, Certificate(z=cert.z, s=cert.z, c=cert.c))


def test_value_certificate_decides_threshold():
    s = solve(GAME_B, with_certificate=True).certificate.s
    assert verify_value_certificate(GAME_B, s, HALF)
    assert not verify_value_certificate(GAME_B, s, HALF, complement=True)
    assert not verify_value_certificate(GAME_B, s, Fraction(3, 4))
    assert verify_value_certificate(GAME_B, s, Fraction(3, 4), complement=True)


def test_value_certificate_strict_at_the_value():
    s = solve(GAME_A, with_certificate=True).certificate.s
    assert not verify_value_certificate(GAME_A, s, HALF)
    assert verify_value_certificate(GAME_A, s, Fraction(1, 4))


def test_value_certificate_requires_fixed_point():
    cert = solve(GAME_B, with_certificate=True).certificate
    warped = list(cert.s.components)
    warped[0] = Fraction(9, 10)
    assert not verify_value_certificate(GAME_B, ValueVector(warped), Fraction(1, 10))


def test_value_certificate_dimension_mismatch():
    with pytest.raises(CertificateError):
        verify_value_certificate(GAME_B, ValueVector([0, 1]), HALF)


# ---------------------------------------------------------- invariants


def test_default_epsilon_is_well_inside_separation():
    for n in (3, 5, 9):
        assert default_epsilon(n) <= value_separation(n) / 4


def test_solutions_match_oracle_on_random_pool():
    for seed in range(30):
        g = random_game(3 + seed % 5, seed=seed)
        assert solve(g).values == brute_force_oracle(g).values
