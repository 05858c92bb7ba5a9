"""Small hand-built games used across the test suite and docs."""

from __future__ import annotations

from .games import Game, build_game

# Single coin flip between the two sinks.
GAME_A: Game = build_game(3, 1, [(1, "avg", 2, 3)])

# Two chance vertices feeding each other; values 2/3 and 1/3.
GAME_B: Game = build_game(4, 1, [(1, "avg", 2, 4), (2, "avg", 1, 3)])

# One min vertex that can stall on a self loop.
GAME_C: Game = build_game(3, 1, [(1, "min", 1, 2)])

# Two min vertices that can cycle forever; the whole interior is worth 0.
GAME_D: Game = build_game(4, 1, [(1, "min", 2, 4), (2, "min", 1, 4)])

# Max feeding a min vertex that can cycle back.
GAME_E: Game = build_game(4, 1, [(1, "max", 2, 3), (2, "min", 1, 4)])

# One max vertex choosing between the sinks.
GAME_F: Game = build_game(3, 1, [(1, "max", 2, 3)])

# Max choosing between two chance vertices with different odds.
GAME_G: Game = build_game(
    5, 1, [(1, "max", 2, 3), (2, "avg", 4, 5), (3, "avg", 2, 5)]
)

FIXTURES: dict[str, Game] = {
    "GAME-A": GAME_A,
    "GAME-B": GAME_B,
    "GAME-C": GAME_C,
    "GAME-D": GAME_D,
    "GAME-E": GAME_E,
    "GAME-F": GAME_F,
    "GAME-G": GAME_G,
}
