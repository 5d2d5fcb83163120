"""Coordination-equilibrium checks for small repeated games.

The central object is a coordination plan: a group of players following a
periodic joint path enforced by grim triggers, while everyone outside the
group plays myopic per-phase best responses. All checks are exact over
rationals:

* the coordination-gain condition: every member's worst-case average over
  arbitrary outsider play strictly beats their minimax value,
* the joint-deviation condition: no alternative periodic path of bounded
  period makes the group better off (quantifier selectable, see
  ``check_eq5``),
* stage Nash membership and tremble stability of the induced per-round
  profiles,
* the critical discount factor below which a one-shot deviation beats the
  trigger threat,
* exhaustive enumeration of all passing (group, path) pairs in a game.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .game import (
    PayoffVector,
    Profile,
    StageGame,
    format_rational,
)
from .minimax import minimax_point, minimax_value
from .simulate import limit_average_of_path
from .strategies import CoordinationPlan, myopic_best_responder, outsider_responses

MODES = ("pareto", "strict")


class SearchBudgetError(RuntimeError):
    """The enumeration candidate space exceeds the configured budget."""


@dataclass(frozen=True)
class DeviationWitness:
    """An alternative group path that improves on the plan under the chosen
    deviation mode, with its exact outcome."""

    path: tuple[tuple[int, ...], ...]
    payoffs: PayoffVector
    member_payoffs: dict[int, Fraction]


@dataclass(frozen=True)
class VerificationReport:
    """Everything the type-k checks establish about one coordination plan.

    ``eq4_holds`` maps each member to the strict coordination-gain verdict
    and ``guaranteed_payoffs`` to the worst-case average behind it.
    ``eq5_holds`` is the joint-deviation verdict for the given mode, with
    ``deviation_witness`` set exactly when it fails. ``passed`` combines
    both: the plan is reported as a type-k equilibrium when every member
    gains strictly and the group has no profitable joint deviation.
    """

    game: StageGame
    plan: CoordinationPlan
    mode: str
    max_period: int
    outsider_responses: dict[int, tuple[int, ...]]
    profile_payoff: PayoffVector
    guaranteed_payoffs: dict[int, Fraction]
    eq4_holds: dict[int, bool]
    eq5_holds: bool
    deviation_witness: DeviationWitness | None
    folk_strict: bool
    is_stage_ne: bool
    stage_stable: bool

    @property
    def passed(self) -> bool:
        return self.eq5_holds and all(self.eq4_holds.values())

    @property
    def k(self) -> int:
        return len(self.plan.group)

    def to_json_dict(self) -> dict:
        game = self.game
        witness = None
        if self.deviation_witness is not None:
            witness = {
                "path": [
                    [game.actions[p][a] for p, a in zip(self.plan.group, phase)]
                    for phase in self.deviation_witness.path
                ],
                "payoffs": [format_rational(v) for v in self.deviation_witness.payoffs],
            }
        return {
            "game": game.name,
            "group": [game.players[i] for i in self.plan.group],
            "path": [list(phase) for phase in self.plan.path_labels(game)],
            "mode": self.mode,
            "max_period": self.max_period,
            "outsider_responses": {
                game.players[j]: [game.actions[j][a] for a in acts]
                for j, acts in sorted(self.outsider_responses.items())
            },
            "profile_payoff": [format_rational(v) for v in self.profile_payoff],
            "guaranteed_payoffs": {
                game.players[i]: format_rational(v)
                for i, v in sorted(self.guaranteed_payoffs.items())
            },
            "eq4_holds": {
                game.players[i]: ok for i, ok in sorted(self.eq4_holds.items())
            },
            "eq5_holds": self.eq5_holds,
            "deviation_witness": witness,
            "folk_strict": self.folk_strict,
            "is_stage_ne": self.is_stage_ne,
            "stage_stable": self.stage_stable,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class DiscountThreshold:
    """Critical discount factor of one group member.

    ``gain`` is the best one-shot deviation premium across path phases,
    ``per_round_loss`` the stationary cost of being punished afterwards
    (average on-path payoff minus the minimax value). The trigger deters
    deviations for every discount factor strictly above ``delta_star``.
    """

    member: int
    gain: Fraction
    per_round_loss: Fraction
    delta_star: Fraction

    def margin(self, delta) -> Fraction:
        """Discounted future loss minus the one-shot gain at ``delta``;
        positive exactly when conforming beats deviating."""
        from .game import as_fraction

        delta = as_fraction(delta)
        if not 0 < delta < 1:
            raise ValueError("discount factor must satisfy 0 < delta < 1")
        return delta / (1 - delta) * self.per_round_loss - self.gain

    def satisfied(self, delta) -> bool:
        from .game import as_fraction

        return as_fraction(delta) > self.delta_star


@lru_cache(maxsize=256)
def _cell_outcomes(game: StageGame, group: tuple[int, ...]):
    """Per group-action cell: the full profile with myopic outsider
    responses filled in, and its payoff vector.

    Myopic responses are phase-separable, so any path's outcome is the
    mean of the outcomes of its cells.
    """
    outcomes = {}
    for cell in itertools.product(*(range(game.shape[i]) for i in group)):
        plan = CoordinationPlan(group=group, path=(cell,))
        responses = outsider_responses(game, plan)
        profile = [0] * game.n_players
        for member, action in zip(group, cell):
            profile[member] = action
        for j, acts in responses.items():
            profile[j] = acts[0]
        profile = tuple(profile)
        outcomes[cell] = (profile, game.payoff(profile), responses)
    return outcomes


def _plan_cells(plan: CoordinationPlan) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(phase) for phase in plan.path)


def _mean(vectors) -> PayoffVector:
    vectors = list(vectors)
    n = len(vectors[0])
    return tuple(sum(vec[i] for vec in vectors) / len(vectors) for i in range(n))


def plan_outcome(game: StageGame, plan: CoordinationPlan):
    """Exact average payoff vector of a plan with myopic outsiders, plus
    the per-phase outsider responses."""
    plan.validate(game)
    outcomes = _cell_outcomes(game, plan.group)
    payoff = _mean([outcomes[cell][1] for cell in _plan_cells(plan)])
    responses = {
        j: tuple(outcomes[cell][2][j][0] for cell in _plan_cells(plan))
        for j in plan.outsiders(game)
    }
    return payoff, responses


def check_eq4(game: StageGame, plan: CoordinationPlan):
    """The coordination-gain condition, member by member.

    A member's guaranteed payoff is the path average of their worst case
    over all pure outsider joint actions; the condition holds when that
    average strictly exceeds the member's minimax value. Returns
    ``(holds, guaranteed)`` as dicts keyed by member index.
    """
    plan.validate(game)
    outsiders = plan.outsiders(game)
    guaranteed: dict[int, Fraction] = {}
    holds: dict[int, bool] = {}
    for pos, member in enumerate(plan.group):
        phase_worsts = []
        for phase in plan.path:
            worst = None
            for combo in itertools.product(
                *(range(game.shape[j]) for j in outsiders)
            ):
                profile = [0] * game.n_players
                for m, action in zip(plan.group, phase):
                    profile[m] = action
                for j, a in zip(outsiders, combo):
                    profile[j] = a
                u = game.payoff(tuple(profile))[member]
                if worst is None or u < worst:
                    worst = u
            phase_worsts.append(worst)
        value = sum(phase_worsts) / len(phase_worsts)
        guaranteed[member] = value
        holds[member] = value > minimax_value(game, member).value
    return holds, guaranteed


def _canonical_path(path: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    n = len(path)
    for d in range(1, n + 1):
        if n % d == 0 and all(path[i] == path[i % d] for i in range(n)):
            path = path[:d]
            break
    return min(path[r:] + path[:r] for r in range(len(path)))


def candidate_paths(game: StageGame, group: tuple[int, ...], max_period: int):
    """All periodic joint paths for a group with period up to
    ``max_period``, one canonical representative per rotation class,
    ordered by period and then lexicographically."""
    cells = list(itertools.product(*(range(game.shape[i]) for i in group)))
    seen = set()
    out = []
    for p in range(1, max_period + 1):
        for path in itertools.product(cells, repeat=p):
            canon = _canonical_path(path)
            if canon not in seen:
                seen.add(canon)
                out.append(canon)
    return out


def candidate_path_payoffs(game: StageGame, group: tuple[int, ...], max_period: int):
    """Exact outcome of every candidate path (myopic outsiders), as a dict
    from canonical path to full payoff vector."""
    outcomes = _cell_outcomes(game, tuple(group))
    return {
        path: _mean([outcomes[cell][1] for cell in path])
        for path in candidate_paths(game, tuple(group), max_period)
    }


def check_eq5(
    game: StageGame,
    plan: CoordinationPlan,
    max_period: int,
    mode: str = "pareto",
):
    """The joint-deviation condition.

    Every periodic path of period at most ``max_period`` (other than the
    plan itself, up to rotation) is tried as a simultaneous group
    deviation; outsiders re-best-respond to it. Under ``pareto`` mode the
    condition fails when some alternative makes every member strictly
    better off; under ``strict`` mode, when some alternative makes any
    member strictly better off. On failure the first such alternative is
    returned as a witness, re-verified through the strategy machines.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    plan.validate(game)
    if max_period < plan.period:
        raise ValueError(
            f"max_period {max_period} is smaller than the plan period {plan.period}"
        )
    outcomes = _cell_outcomes(game, plan.group)
    base = _mean([outcomes[cell][1] for cell in _plan_cells(plan)])
    plan_canon = _canonical_path(_plan_cells(plan))
    members = plan.group
    for path in candidate_paths(game, plan.group, max_period):
        if path == plan_canon:
            continue
        payoffs = _mean([outcomes[cell][1] for cell in path])
        gains = [payoffs[i] > base[i] for i in members]
        beats = all(gains) if mode == "pareto" else any(gains)
        if beats:
            witness = DeviationWitness(
                path=path,
                payoffs=payoffs,
                member_payoffs={i: payoffs[i] for i in members},
            )
            _reverify_witness(game, plan, witness, base, mode)
            return False, witness
    return True, None


def _reverify_witness(game, plan, witness, base, mode):
    """Replay a witness through the machine simulator; the exact limit
    average must reproduce the table-derived payoffs and the claimed
    improvement."""
    alt = CoordinationPlan(group=plan.group, path=witness.path)
    machines = {
        j: myopic_best_responder(game, j, alt) for j in alt.outsiders(game)
    }
    replayed = limit_average_of_path(game, alt, machines)
    if replayed != witness.payoffs:
        raise RuntimeError(
            f"witness replay mismatch: {replayed} != {witness.payoffs}"
        )
    gains = [replayed[i] > base[i] for i in plan.group]
    sound = all(gains) if mode == "pareto" else any(gains)
    if not sound:
        raise RuntimeError("witness does not improve the group as claimed")


def _is_pure_ne(game: StageGame, profile: Profile) -> bool:
    payoffs = game.payoff(profile)
    for player in range(game.n_players):
        mutated = list(profile)
        for a in range(game.shape[player]):
            if a == profile[player]:
                continue
            mutated[player] = a
            if game.payoff(tuple(mutated))[player] > payoffs[player]:
                return False
        mutated[player] = profile[player]
    return True


def stage_pure_ne(game: StageGame) -> list[Profile]:
    """All pure-strategy Nash equilibria of the stage game, in row-major
    profile order."""
    return [profile for profile in game.profiles() if _is_pure_ne(game, profile)]


def stage_ne_stability(game: StageGame, ne: Profile) -> bool:
    """Tremble stability of a pure stage equilibrium.

    For every player j and alternative action a', model j playing a' with
    an infinitesimal weight. Stability requires (a) every other player's
    equilibrium action to stay a best reply, comparing payoffs as linear
    functions of the tremble and breaking ties at zero by the tremble
    coefficient, and (b) the deviator to be strictly worse off at a'.
    """
    if not _is_pure_ne(game, ne):
        raise ValueError(f"{game.profile_key(ne)} is not a pure stage equilibrium")
    payoffs = game.payoff(ne)
    for j in range(game.n_players):
        for alt in range(game.shape[j]):
            if alt == ne[j]:
                continue
            perturbed = list(ne)
            perturbed[j] = alt
            if not game.payoff(tuple(perturbed))[j] < payoffs[j]:
                return False
            for m in range(game.n_players):
                if m == j:
                    continue

                def level(own: int, with_alt: bool) -> Fraction:
                    probe = list(ne)
                    probe[m] = own
                    if with_alt:
                        probe[j] = alt
                    return game.payoff(tuple(probe))[m]

                base_m = level(ne[m], False)
                coef_m = level(ne[m], True)
                for b in range(game.shape[m]):
                    if b == ne[m]:
                        continue
                    base_b = level(b, False)
                    if base_b > base_m:
                        return False
                    if base_b == base_m and level(b, True) > coef_m:
                        return False
    return True


def verify_type_k(
    game: StageGame,
    plan: CoordinationPlan,
    max_period: int | None = None,
    mode: str = "pareto",
) -> VerificationReport:
    """Run every check against one coordination plan and assemble the
    report.

    ``max_period`` bounds the joint-deviation search and defaults to the
    larger of 3 and the plan period. The report also states whether the
    profile payoff strictly dominates the minimax point (the strict folk
    condition) and whether each per-phase profile is a stage equilibrium,
    stable under trembles.
    """
    plan.validate(game)
    if max_period is None:
        max_period = max(3, plan.period)
    profile_payoff, responses = plan_outcome(game, plan)
    eq4_holds, guaranteed = check_eq4(game, plan)
    eq5_holds, witness = check_eq5(game, plan, max_period, mode)
    mm = minimax_point(game)
    folk_strict = all(u > v for u, v in zip(profile_payoff, mm))
    outcomes = _cell_outcomes(game, plan.group)
    phase_profiles = [outcomes[cell][0] for cell in _plan_cells(plan)]
    is_stage_ne = all(_is_pure_ne(game, prof) for prof in phase_profiles)
    stage_stable = is_stage_ne and all(
        stage_ne_stability(game, prof) for prof in phase_profiles
    )
    return VerificationReport(
        game=game,
        plan=plan,
        mode=mode,
        max_period=max_period,
        outsider_responses=responses,
        profile_payoff=profile_payoff,
        guaranteed_payoffs=guaranteed,
        eq4_holds=eq4_holds,
        eq5_holds=eq5_holds,
        deviation_witness=witness,
        folk_strict=folk_strict,
        is_stage_ne=is_stage_ne,
        stage_stable=stage_stable,
    )


def discount_threshold(game: StageGame, plan: CoordinationPlan, member: int) -> DiscountThreshold:
    """Critical discount factor for one member of a verified plan.

    The gain is the best one-shot deviation premium over the path phases,
    holding the rest of the round fixed; the per-round loss is the plan's
    average payoff minus the member's minimax value, the stationary cost
    of being punished forever after.
    """
    plan.validate(game)
    pos = plan.member_position(member)
    outcomes = _cell_outcomes(game, plan.group)
    gain = None
    on_path = []
    for phase in _plan_cells(plan):
        profile, payoffs, _ = outcomes[phase]
        u0 = payoffs[member]
        on_path.append(u0)
        mutated = list(profile)
        for a in range(game.shape[member]):
            if a == phase[pos]:
                continue
            mutated[member] = a
            premium = game.payoff(tuple(mutated))[member] - u0
            if gain is None or premium > gain:
                gain = premium
    mean = sum(on_path) / len(on_path)
    loss = mean - minimax_value(game, member).value
    if gain <= 0:
        delta_star = Fraction(0)
    elif loss <= 0:
        raise ValueError(
            "plan gives the member no surplus over minimax, "
            "so no discount factor deters deviation"
        )
    else:
        delta_star = gain / (gain + loss)
    return DiscountThreshold(
        member=member, gain=gain, per_round_loss=loss, delta_star=delta_star
    )


def discount_thresholds(game: StageGame, plan: CoordinationPlan) -> dict[int, DiscountThreshold]:
    return {member: discount_threshold(game, plan, member) for member in plan.group}


def enumerate_type_k(
    game: StageGame,
    max_period: int,
    mode: str = "pareto",
    budget: int = 500_000,
) -> list[VerificationReport]:
    """All coordination plans that verify as type-k equilibria.

    Iterates every group of size at least two and every canonical periodic
    path up to ``max_period``, keeps the plans whose report passes, and
    deduplicates by (group, payoff vector). The result is sorted by group
    size, group, and payoff. Raises SearchBudgetError up front when the
    candidate space exceeds ``budget``.
    """
    if max_period < 1:
        raise ValueError("max_period must be at least 1")
    players = range(game.n_players)
    groups = [
        combo
        for size in range(2, game.n_players + 1)
        for combo in itertools.combinations(players, size)
    ]
    total = 0
    for group in groups:
        cells = 1
        for i in group:
            cells *= game.shape[i]
        total += sum(cells**p for p in range(1, max_period + 1))
    if total > budget:
        raise SearchBudgetError(
            f"{total} candidate paths exceed the budget of {budget}"
        )

    reports = []
    seen: set[tuple] = set()
    for group in groups:
        for path in candidate_paths(game, group, max_period):
            plan = CoordinationPlan(group=group, path=path)
            if plan.period > max_period:
                continue
            report = verify_type_k(game, plan, max_period, mode)
            if not report.passed:
                continue
            key = (group, report.profile_payoff)
            if key in seen:
                continue
            seen.add(key)
            reports.append(report)
    reports.sort(key=lambda r: (len(r.plan.group), r.plan.group, r.profile_payoff))
    return reports


def achievable_points(game: StageGame, group: tuple[int, ...]) -> tuple[PayoffVector, ...]:
    """The payoff vectors the group can steer the game to, one per group
    action cell, with outsiders playing their myopic responses. Long-run
    averages of any periodic path are convex combinations of these."""
    outcomes = _cell_outcomes(game, tuple(sorted(group)))
    return tuple(outcomes[cell][1] for cell in sorted(outcomes))


def random_game(
    rng: random.Random,
    n_players: int = 3,
    n_actions: int = 2,
    low: int = -5,
    high: int = 5,
    name: str = "random",
) -> StageGame:
    """A game with integer payoffs drawn uniformly from [low, high]."""
    players = tuple(f"P{i}" for i in range(n_players))
    actions = tuple(tuple(f"a{a}" for a in range(n_actions)) for _ in players)
    count = n_actions**n_players
    table = tuple(
        tuple(Fraction(rng.randint(low, high)) for _ in players)
        for _ in range(count)
    )
    return StageGame(name=name, players=players, actions=actions, table=table)
