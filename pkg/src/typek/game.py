"""Finite n-player stage games with exact rational payoffs.

Games are parsed from a small JSON document format (see ``parse_game``) and
held immutable afterwards, so they are safe to share between threads.
Payoffs are stored as ``fractions.Fraction`` throughout: the equilibrium
checks built on top compare values exactly instead of through float
tolerances.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

Profile = tuple[int, ...]
PayoffVector = tuple[Fraction, ...]

BUILTIN_NAMES = ("fig1", "fig2", "fig4")


class GameFormatError(ValueError):
    """A game document or game definition is invalid."""


class GameSyntaxError(GameFormatError):
    """The document is not well-formed JSON; the message reports the position."""


class DuplicateLabelError(GameFormatError):
    """A player label, action label or payoff key appears more than once."""


class MissingPayoffError(GameFormatError):
    """The payoff map does not cover every joint action profile."""


class ArityMismatchError(GameFormatError):
    """A list or key in the document has the wrong length for the player count."""


class UnknownLabelError(GameFormatError):
    """A payoff key refers to a label that was never declared."""


def as_fraction(value: int | str | Fraction) -> Fraction:
    """Convert an exact payoff number: an int, a Fraction, or a string
    such as "3", "-3", "3/4" or "0.25". Floats are rejected so inexact
    values can never leak into a game."""
    if isinstance(value, bool):
        raise GameFormatError(f"not a payoff number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise GameFormatError(f"not a rational number: {value!r}") from exc
    if isinstance(value, float):
        raise GameFormatError(
            f"float payoff {value!r} not allowed, write non-integers as \"p/q\""
        )
    raise GameFormatError(f"not a rational number: {value!r}")


@dataclass(frozen=True)
class StageGame:
    """An immutable normal-form game: players, action labels, payoff table.

    ``table`` is indexed row-major over action indices in declared player
    order: profile ``(a_0, ..., a_{n-1})`` lives at
    ``((a_0 * |A_1| + a_1) * |A_2| + a_2) ...``.
    """

    name: str
    players: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    table: tuple[PayoffVector, ...]

    def __post_init__(self) -> None:
        if len(self.players) < 2:
            raise GameFormatError("a game needs at least two players")
        if len(set(self.players)) != len(self.players):
            raise DuplicateLabelError("duplicate player label")
        if len(self.actions) != len(self.players):
            raise ArityMismatchError("need exactly one action list per player")
        for who, acts in zip(self.players, self.actions):
            if not acts:
                raise GameFormatError(f"player {who!r} has no actions")
            if len(set(acts)) != len(acts):
                raise DuplicateLabelError(f"duplicate action label for player {who!r}")
        if len(self.table) != self.profile_count:
            raise MissingPayoffError(
                f"payoff table has {len(self.table)} entries, "
                f"needs {self.profile_count}"
            )
        for vec in self.table:
            if len(vec) != len(self.players):
                raise ArityMismatchError(
                    "payoff vector length must equal the player count"
                )

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(acts) for acts in self.actions)

    @property
    def profile_count(self) -> int:
        return math.prod(self.shape)

    def profiles(self):
        """Iterate all joint action profiles in row-major order."""
        return itertools.product(*(range(m) for m in self.shape))

    def flat_index(self, profile: Profile) -> int:
        if len(profile) != self.n_players:
            raise ArityMismatchError(
                f"profile {profile!r} has wrong length for {self.n_players} players"
            )
        idx = 0
        for a, m in zip(profile, self.shape):
            if not 0 <= a < m:
                raise IndexError(f"action index {a} out of range in {profile!r}")
            idx = idx * m + a
        return idx

    def payoff(self, profile: Profile) -> PayoffVector:
        """Exact payoff vector lookup for a joint action profile."""
        return self.table[self.flat_index(profile)]

    def player_index(self, label: str) -> int:
        try:
            return self.players.index(label)
        except ValueError:
            raise UnknownLabelError(f"unknown player {label!r}") from None

    def action_index(self, player: int, label: str) -> int:
        try:
            return self.actions[player].index(label)
        except ValueError:
            raise UnknownLabelError(
                f"unknown action {label!r} for player {self.players[player]!r}"
            ) from None

    def profile_from_labels(self, labels) -> Profile:
        labels = tuple(labels)
        if len(labels) != self.n_players:
            raise ArityMismatchError(
                f"profile {labels!r} has wrong length for {self.n_players} players"
            )
        return tuple(self.action_index(i, lab) for i, lab in enumerate(labels))

    def profile_labels(self, profile: Profile) -> tuple[str, ...]:
        return tuple(self.actions[i][a] for i, a in enumerate(profile))

    def profile_key(self, profile: Profile) -> str:
        return ",".join(self.profile_labels(profile))


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise DuplicateLabelError(f"duplicate key {key!r}")
        seen.add(key)
    return dict(pairs)


def parse_game(text: str) -> StageGame:
    """Parse a game document.

    The format is a JSON object with fields ``name`` (string), ``players``
    (array of strings), ``actions`` (array of arrays of strings, aligned
    with players) and ``payoffs`` (object mapping "a1,a2,...,an" keys to
    arrays of n numbers, where a number is a decimal integer or a "p/q"
    fraction string).

    Raises a distinct error kind per failure mode: GameSyntaxError with the
    position for malformed JSON, MissingPayoffError naming the first absent
    profile, DuplicateLabelError, ArityMismatchError and UnknownLabelError.
    """
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise GameSyntaxError(
            f"line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise GameFormatError("top level of a game document must be an object")
    for field in ("name", "players", "actions", "payoffs"):
        if field not in doc:
            raise GameFormatError(f"missing field {field!r}")
    name = doc["name"]
    if not isinstance(name, str):
        raise GameFormatError("field 'name' must be a string")
    raw_players = doc["players"]
    if not isinstance(raw_players, list) or not all(
        isinstance(p, str) for p in raw_players
    ):
        raise GameFormatError("field 'players' must be an array of strings")
    players = tuple(raw_players)
    raw_actions = doc["actions"]
    if not isinstance(raw_actions, list):
        raise GameFormatError("field 'actions' must be an array of arrays")
    if len(raw_actions) != len(players):
        raise ArityMismatchError(
            f"'actions' has {len(raw_actions)} entries for {len(players)} players"
        )
    for acts in raw_actions:
        if not isinstance(acts, list) or not all(isinstance(a, str) for a in acts):
            raise GameFormatError("each 'actions' entry must be an array of strings")
    actions = tuple(tuple(acts) for acts in raw_actions)
    raw_payoffs = doc["payoffs"]
    if not isinstance(raw_payoffs, dict):
        raise GameFormatError("field 'payoffs' must be an object")

    # Validate labels before key resolution so duplicates get their own error.
    if len(players) < 2:
        raise GameFormatError("a game needs at least two players")
    if len(set(players)) != len(players):
        raise DuplicateLabelError("duplicate player label")
    for who, acts in zip(players, actions):
        if not acts:
            raise GameFormatError(f"player {who!r} has no actions")
        if len(set(acts)) != len(acts):
            raise DuplicateLabelError(f"duplicate action label for player {who!r}")

    def resolve(player: int, label: str) -> int:
        try:
            return actions[player].index(label)
        except ValueError:
            raise UnknownLabelError(
                f"unknown action {label!r} for player {players[player]!r}"
            ) from None

    shape = tuple(len(acts) for acts in actions)
    slots: dict[Profile, PayoffVector] = {}
    for key, value in raw_payoffs.items():
        labels = key.split(",")
        if len(labels) != len(players):
            raise ArityMismatchError(
                f"payoff key {key!r} names {len(labels)} actions "
                f"for {len(players)} players"
            )
        profile = tuple(resolve(i, lab) for i, lab in enumerate(labels))
        if not isinstance(value, list):
            raise GameFormatError(f"payoff entry {key!r} must be an array")
        if len(value) != len(players):
            raise ArityMismatchError(
                f"payoff entry {key!r} has {len(value)} values "
                f"for {len(players)} players"
            )
        slots[profile] = tuple(as_fraction(v) for v in value)

    table = []
    for profile in itertools.product(*(range(m) for m in shape)):
        if profile not in slots:
            missing = ",".join(
                actions[i][a] for i, a in enumerate(profile)
            )
            raise MissingPayoffError(f"missing payoff entry {missing!r}")
        table.append(slots[profile])
    return StageGame(name=name, players=players, actions=actions, table=tuple(table))


def format_rational(value: Fraction) -> int | str:
    """Render exactly: a plain int when integral, else a "p/q" string."""
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def serialize_game(game: StageGame) -> str:
    """Render a game back to its document form. ``parse_game`` of the result
    reconstructs an identical StageGame."""
    payoffs = {
        game.profile_key(profile): [format_rational(v) for v in game.payoff(profile)]
        for profile in game.profiles()
    }
    doc = {
        "name": game.name,
        "players": list(game.players),
        "actions": [list(acts) for acts in game.actions],
        "payoffs": payoffs,
    }
    return json.dumps(doc, indent=2) + "\n"


def zero_sum_check(game: StageGame) -> bool:
    """True iff every payoff vector sums to zero exactly."""
    return all(sum(vec) == 0 for vec in game.table)


def action_dominates(game: StageGame, player: int, better: int, worse: int) -> bool:
    """True iff action ``better`` strictly dominates ``worse`` for ``player``:
    it pays strictly more against every joint action of the others."""
    others = [i for i in range(game.n_players) if i != player]
    for combo in itertools.product(*(range(game.shape[j]) for j in others)):
        profile = [0] * game.n_players
        for j, a in zip(others, combo):
            profile[j] = a
        profile[player] = better
        hi = game.payoff(tuple(profile))[player]
        profile[player] = worse
        lo = game.payoff(tuple(profile))[player]
        if not hi > lo:
            return False
    return True


@lru_cache(maxsize=1)
def _builtins() -> tuple[tuple[str, StageGame], ...]:
    loaded = []
    for name in BUILTIN_NAMES:
        text = (
            resources.files("typek")
            .joinpath(f"games/{name}.json")
            .read_text(encoding="utf-8")
        )
        loaded.append((name, parse_game(text)))
    return tuple(loaded)


def builtin_games() -> dict[str, StageGame]:
    """The bundled example games, keyed by name.

    ``fig1`` is a three-player zero-sum prisoner's dilemma variant (two
    prisoners plus a police player), ``fig2`` a two-player anti-coordination
    game with two pure equilibria, and ``fig4`` a three-player game in which
    action R is strictly dominated for everyone.
    """
    return dict(_builtins())


def load_builtin(name: str) -> StageGame:
    for key, game in _builtins():
        if key == name:
            return game
    raise GameFormatError(f"unknown builtin game {name!r}")
