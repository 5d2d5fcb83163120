"""Pure-strategy minimax payoffs and punishment profiles.

The minimax value of a player is what the other players can hold them down
to when they coordinate on a worst-case pure joint action and the player
best-responds: min over the others' joint actions of the max over own
actions. Everything here enumerates pure profiles, which is exact at desk
scale; mixed punishments are deliberately out of scope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .game import PayoffVector, StageGame


@dataclass(frozen=True)
class MinimaxResult:
    """Minimax value plus the witnesses realising it.

    ``punisher_profile`` holds the other players' actions (in increasing
    player order, the punished player omitted) achieving the outer min;
    ``best_reply`` is the player's own action achieving the inner max
    against that profile. Ties break toward the lexicographically smallest
    punisher profile and then the smallest own action index.
    """

    player: int
    value: Fraction
    punisher_profile: tuple[int, ...]
    best_reply: int


def minimax_value(game: StageGame, player: int) -> MinimaxResult:
    """Compute a player's pure-strategy minimax value and witnesses."""
    if not 0 <= player < game.n_players:
        raise IndexError(f"player index {player} out of range")
    others = [i for i in range(game.n_players) if i != player]
    best: MinimaxResult | None = None
    for combo in itertools.product(*(range(game.shape[j]) for j in others)):
        profile = [0] * game.n_players
        for j, a in zip(others, combo):
            profile[j] = a
        reply, reply_value = 0, None
        for a in range(game.shape[player]):
            profile[player] = a
            u = game.payoff(tuple(profile))[player]
            if reply_value is None or u > reply_value:
                reply, reply_value = a, u
        if best is None or reply_value < best.value:
            best = MinimaxResult(
                player=player,
                value=reply_value,
                punisher_profile=combo,
                best_reply=reply,
            )
    return best


def minimax_point(game: StageGame) -> PayoffVector:
    """The vector of all players' minimax values."""
    return tuple(minimax_value(game, i).value for i in range(game.n_players))
