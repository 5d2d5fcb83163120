"""Reactive strategies as finite-state machines, and coordination plans.

A machine emits a rational-weight distribution over its own actions each
round, then observes the round's full joint action profile and follows a
deterministic state transition. The first-round action comes from
``initial_action``; from round one onward it comes from the current state's
emission, so behaviour depends on history only through the state.

Machines built by ``grim_trigger``, ``constant_strategy``,
``cycle_strategy`` and ``myopic_best_responder`` ignore the observer's own
column of the joint profile (their transitions are invariant to it). The
coordination-game machines from ``fig2_coordinator`` are the exception:
repeating "last round's agreed profile" requires remembering the player's
own realised coin flip, which only the full profile carries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .game import Profile, StageGame, load_builtin
from .minimax import minimax_value

Distribution = dict[int, Fraction]

ONE = Fraction(1)


def point_mass(action: int) -> Distribution:
    return {action: ONE}


def uniform(actions) -> Distribution:
    actions = list(actions)
    share = Fraction(1, len(actions))
    return {a: share for a in actions}


@dataclass(frozen=True)
class ReactiveStrategy:
    """A finite-state machine strategy for one player.

    ``transitions`` must be total over states and joint profiles of the
    game the machine is played in; ``emissions[s]`` is the distribution
    emitted while in state ``s`` (unused for the start state at round 0,
    where ``initial_action`` applies).
    """

    player: int
    start: int
    initial_action: Distribution
    emissions: tuple[Distribution, ...]
    transitions: dict[tuple[int, Profile], int]

    def __post_init__(self) -> None:
        for dist in (self.initial_action, *self.emissions):
            if not dist:
                raise ValueError("empty emission distribution")
            if any(w <= 0 for w in dist.values()):
                raise ValueError("emission weights must be positive")
            if sum(dist.values()) != 1:
                raise ValueError("emission weights must sum to exactly 1")

    @property
    def n_states(self) -> int:
        return len(self.emissions)

    def is_deterministic(self) -> bool:
        return len(self.initial_action) == 1 and all(
            len(dist) == 1 for dist in self.emissions
        )

    def validate_for(self, game: StageGame) -> None:
        """Check action bounds and transition totality against a game."""
        if not 0 <= self.player < game.n_players:
            raise ValueError(f"player index {self.player} out of range")
        for dist in (self.initial_action, *self.emissions):
            for a in dist:
                if not 0 <= a < game.shape[self.player]:
                    raise ValueError(f"emitted action {a} out of range")
        for state in range(self.n_states):
            for profile in game.profiles():
                if (state, profile) not in self.transitions:
                    raise ValueError(
                        f"transition missing for state {state}, profile {profile}"
                    )

    def ignores_own_action(self, game: StageGame) -> bool:
        """True iff transitions never depend on the player's own column."""
        me = self.player
        others = [i for i in range(game.n_players) if i != me]
        for state in range(self.n_states):
            for combo in itertools.product(*(range(game.shape[j]) for j in others)):
                profile = [0] * game.n_players
                for j, a in zip(others, combo):
                    profile[j] = a
                targets = set()
                for own in range(game.shape[me]):
                    profile[me] = own
                    targets.add(self.transitions[(state, tuple(profile))])
                if len(targets) > 1:
                    return False
        return True


@dataclass(frozen=True)
class CoordinationPlan:
    """A group of players plus the periodic joint path they commit to.

    ``group`` is a strictly increasing tuple of at least two player
    indices. ``path`` is a sequence of phases; each phase assigns one
    action index per group member, aligned with ``group``. The path is
    normalised to its minimal period on construction. Enforcement is
    always the grim trigger: any observed deviation by a group member
    sends every member to their minimax reply forever.
    """

    group: tuple[int, ...]
    path: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        group = tuple(self.group)
        path = tuple(tuple(phase) for phase in self.path)
        if len(group) < 2:
            raise ValueError("a coordination group needs at least two players")
        if any(b <= a for a, b in zip(group, group[1:])):
            raise ValueError("group indices must be strictly increasing")
        if not path:
            raise ValueError("a coordination path needs at least one phase")
        if any(len(phase) != len(group) for phase in path):
            raise ValueError("each phase must assign one action per group member")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "path", _minimal_period(path))

    @property
    def period(self) -> int:
        return len(self.path)

    def member_position(self, player: int) -> int:
        try:
            return self.group.index(player)
        except ValueError:
            raise ValueError(f"player {player} is not in group {self.group}") from None

    def action_at(self, phase: int, player: int) -> int:
        return self.path[phase % self.period][self.member_position(player)]

    def outsiders(self, game: StageGame) -> tuple[int, ...]:
        return tuple(i for i in range(game.n_players) if i not in self.group)

    def validate(self, game: StageGame) -> None:
        if self.group[-1] >= game.n_players:
            raise ValueError(
                f"group {self.group} exceeds the {game.n_players} players"
            )
        for phase in self.path:
            for player, action in zip(self.group, phase):
                if not 0 <= action < game.shape[player]:
                    raise ValueError(
                        f"action index {action} out of range for "
                        f"player {game.players[player]!r}"
                    )

    @classmethod
    def from_labels(cls, game: StageGame, group_labels, path_phases):
        """Build a plan from player labels and per-phase action labels.

        ``path_phases`` is a sequence of label tuples aligned with
        ``group_labels``; the group is sorted into player order and each
        phase is permuted to match.
        """
        indices = [game.player_index(lab) for lab in group_labels]
        if len(set(indices)) != len(indices):
            raise ValueError("duplicate player in group")
        order = sorted(range(len(indices)), key=lambda pos: indices[pos])
        group = tuple(indices[pos] for pos in order)
        path = []
        for phase in path_phases:
            phase = tuple(phase)
            if len(phase) != len(group):
                raise ValueError(
                    f"phase {phase!r} does not match group size {len(group)}"
                )
            path.append(
                tuple(
                    game.action_index(indices[pos], phase[pos]) for pos in order
                )
            )
        return cls(group=group, path=tuple(path))

    def path_labels(self, game: StageGame) -> tuple[tuple[str, ...], ...]:
        return tuple(
            tuple(game.actions[p][a] for p, a in zip(self.group, phase))
            for phase in self.path
        )


def _minimal_period(path: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    n = len(path)
    for d in range(1, n + 1):
        if n % d == 0 and all(path[i] == path[i % d] for i in range(n)):
            return path[:d]
    return path


def grim_trigger(game: StageGame, plan: CoordinationPlan, player: int) -> ReactiveStrategy:
    """Trigger machine for one group member.

    On-path states cycle through the plan, emitting the member's assigned
    action. Any observed off-path action by another group member moves the
    machine to an absorbing punish state that emits the member's minimax
    best reply forever. Outsiders' actions never trigger punishment, and
    neither does the member's own column.
    """
    plan.validate(game)
    pos = plan.member_position(player)
    p = plan.period
    punish = p
    reply = minimax_value(game, player).best_reply
    emissions = tuple(
        point_mass(phase[pos]) for phase in plan.path
    ) + (point_mass(reply),)
    transitions: dict[tuple[int, Profile], int] = {}
    watched = [j for j in plan.group if j != player]
    for state in range(p):
        assigned = {
            j: plan.path[state][plan.member_position(j)] for j in watched
        }
        for profile in game.profiles():
            deviated = any(profile[j] != assigned[j] for j in watched)
            transitions[(state, profile)] = punish if deviated else (state + 1) % p
    for profile in game.profiles():
        transitions[(punish, profile)] = punish
    return ReactiveStrategy(
        player=player,
        start=0,
        initial_action=point_mass(plan.path[0][pos]),
        emissions=emissions,
        transitions=transitions,
    )


def constant_strategy(game: StageGame, player: int, action: int | str) -> ReactiveStrategy:
    """Single-state machine that always plays one action."""
    if isinstance(action, str):
        action = game.action_index(player, action)
    if not 0 <= action < game.shape[player]:
        raise ValueError(f"action index {action} out of range")
    transitions = {(0, profile): 0 for profile in game.profiles()}
    return ReactiveStrategy(
        player=player,
        start=0,
        initial_action=point_mass(action),
        emissions=(point_mass(action),),
        transitions=transitions,
    )


def cycle_strategy(game: StageGame, player: int, own_actions) -> ReactiveStrategy:
    """Machine that cycles through a fixed own-action sequence, ignoring
    everything it observes."""
    acts = [
        game.action_index(player, a) if isinstance(a, str) else a
        for a in own_actions
    ]
    if not acts:
        raise ValueError("cycle needs at least one action")
    for a in acts:
        if not 0 <= a < game.shape[player]:
            raise ValueError(f"action index {a} out of range")
    p = len(acts)
    transitions = {
        (state, profile): (state + 1) % p
        for state in range(p)
        for profile in game.profiles()
    }
    return ReactiveStrategy(
        player=player,
        start=0,
        initial_action=point_mass(acts[0]),
        emissions=tuple(point_mass(a) for a in acts),
        transitions=transitions,
    )


# States of the coordination-game machines.
_SEARCHING, _HOLD_L, _HOLD_R = 0, 1, 2


def fig2_coordinator(side: str) -> ReactiveStrategy:
    """One of the two symmetric machines that lock the bundled fig2 game
    onto a pure equilibrium.

    While searching, the machine randomises uniformly over L and R. After a
    round whose joint outcome was (L, R) or (R, L) it repeats its own part
    of that outcome forever; any other outcome sends it back to searching.
    """
    if side not in ("row", "col"):
        raise ValueError("side must be 'row' or 'col'")
    game = load_builtin("fig2")
    player = 0 if side == "row" else 1
    left, right = 0, 1
    hold = {
        (left, right): _HOLD_L if side == "row" else _HOLD_R,
        (right, left): _HOLD_R if side == "row" else _HOLD_L,
    }
    transitions = {}
    for state in (_SEARCHING, _HOLD_L, _HOLD_R):
        for profile in game.profiles():
            transitions[(state, profile)] = hold.get(profile, _SEARCHING)
    return ReactiveStrategy(
        player=player,
        start=_SEARCHING,
        initial_action=uniform((left, right)),
        emissions=(
            uniform((left, right)),
            point_mass(left),
            point_mass(right),
        ),
        transitions=transitions,
    )


def outsider_responses(game: StageGame, plan: CoordinationPlan) -> dict[int, tuple[int, ...]]:
    """Per-phase myopic best responses of every player outside the group.

    Outsiders are resolved in player-index order; while resolving one, the
    already-resolved outsiders keep their computed phase actions and any
    not-yet-resolved outsiders sit at action 0. Ties break toward the
    smallest action index. With a single outsider this is plain per-phase
    best response to the group's path.
    """
    plan.validate(game)
    outsiders = plan.outsiders(game)
    p = plan.period
    current: dict[int, list[int]] = {j: [0] * p for j in outsiders}
    for j in outsiders:
        for phase in range(p):
            profile = [0] * game.n_players
            for member, action in zip(plan.group, plan.path[phase]):
                profile[member] = action
            for other in outsiders:
                if other != j:
                    profile[other] = current[other][phase]
            best, best_u = 0, None
            for a in range(game.shape[j]):
                profile[j] = a
                u = game.payoff(tuple(profile))[j]
                if best_u is None or u > best_u:
                    best, best_u = a, u
            current[j][phase] = best
    return {j: tuple(current[j]) for j in outsiders}


def myopic_best_responder(game: StageGame, player: int, known_plan: CoordinationPlan) -> ReactiveStrategy:
    """Cyclic machine for an outsider playing its per-phase best response
    to a known coordination plan."""
    if player in known_plan.group:
        raise ValueError(
            f"player {game.players[player]!r} is inside the coordination group"
        )
    responses = outsider_responses(game, known_plan)[player]
    return cycle_strategy(game, player, responses)


def strategy_from_spec(
    game: StageGame,
    player: int,
    spec: str,
    plan: CoordinationPlan | None = None,
) -> ReactiveStrategy:
    """Build a machine from a preset string.

    Presets: ``grim`` (group member of ``plan``), ``myopic`` (outsider of
    ``plan``), ``fig2row`` / ``fig2col`` (two-player two-action games
    only), ``const:<action>`` and ``path:<a1|a2|...>``.
    """
    if spec == "grim":
        if plan is None:
            raise ValueError("preset 'grim' needs a coordination plan")
        return grim_trigger(game, plan, player)
    if spec == "myopic":
        if plan is None:
            raise ValueError("preset 'myopic' needs a coordination plan")
        return myopic_best_responder(game, player, plan)
    if spec in ("fig2row", "fig2col"):
        if game.n_players != 2 or game.shape != (2, 2):
            raise ValueError(f"preset {spec!r} needs a 2x2 two-player game")
        machine = fig2_coordinator("row" if spec == "fig2row" else "col")
        if machine.player != player:
            raise ValueError(
                f"preset {spec!r} is for player {machine.player}, not {player}"
            )
        return machine
    if spec.startswith("const:"):
        return constant_strategy(game, player, spec[len("const:"):])
    if spec.startswith("path:"):
        labels = spec[len("path:"):].split("|")
        return cycle_strategy(game, player, labels)
    raise ValueError(f"unknown strategy preset {spec!r}")
