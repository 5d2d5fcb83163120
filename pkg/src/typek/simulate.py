"""Repeated-game execution for reactive strategy machines.

``run`` plays the machines against each other round by round under perfect
monitoring: every machine observes the full joint profile after each round.
Averages and discounted sums are computed in exact rationals. For periodic
deterministic play, ``limit_average_of_path`` returns the exact long-run
mean by detecting the joint state cycle instead of truncating a simulation.
"""

from __future__ import annotations

import io
import csv
import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from .game import PayoffVector, Profile, StageGame, as_fraction, format_rational
from .strategies import CoordinationPlan, Distribution, ReactiveStrategy, fig2_coordinator


def _sample(dist: Distribution, rng: random.Random) -> int:
    if len(dist) == 1:
        return next(iter(dist))
    denom = lcm(*(w.denominator for w in dist.values()))
    draw = rng.randrange(denom)
    acc = 0
    for action in sorted(dist):
        acc += int(dist[action] * denom)
        if draw < acc:
            return action
    raise AssertionError("weights summed below 1")


def _trial_rng(seed: int, trial: int) -> random.Random:
    # String seeding keeps per-trial streams deterministic across platforms.
    return random.Random(f"{seed}:{trial}")


@dataclass(frozen=True)
class SimulationRun:
    """Trace and exact payoff summaries of one repeated-game execution.

    ``trace`` holds rounds 0..horizon inclusive; ``averages`` is the exact
    arithmetic mean of the trace payoffs and ``discounted`` the exact sum
    of delta**t times the round payoffs when a discount factor was given.
    """

    game: StageGame
    strategies: tuple[ReactiveStrategy, ...]
    horizon: int
    seed: int
    delta: Fraction | None
    trace: tuple[tuple[Profile, PayoffVector], ...]
    averages: PayoffVector
    discounted: PayoffVector | None


def run(
    game: StageGame,
    strategies: Sequence[ReactiveStrategy],
    horizon: int,
    seed: int = 0,
    delta=None,
) -> SimulationRun:
    """Play one machine per player for ``horizon + 1`` rounds."""
    strategies = tuple(strategies)
    if len(strategies) != game.n_players:
        raise ValueError(
            f"{len(strategies)} strategies supplied for {game.n_players} players"
        )
    for i, machine in enumerate(strategies):
        if machine.player != i:
            raise ValueError(
                f"strategy at position {i} was built for player {machine.player}"
            )
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if delta is not None:
        delta = as_fraction(delta)
        if not 0 < delta < 1:
            raise ValueError("discount factor must satisfy 0 < delta < 1")

    rng = random.Random(seed)
    states = [m.start for m in strategies]
    trace = []
    totals = [Fraction(0)] * game.n_players
    discounted = [Fraction(0)] * game.n_players if delta is not None else None
    weight = Fraction(1)
    for t in range(horizon + 1):
        profile = tuple(
            _sample(m.initial_action if t == 0 else m.emissions[states[i]], rng)
            for i, m in enumerate(strategies)
        )
        payoffs = game.payoff(profile)
        trace.append((profile, payoffs))
        for i, u in enumerate(payoffs):
            totals[i] += u
            if discounted is not None:
                discounted[i] += weight * u
        if delta is not None:
            weight *= delta
        for i, machine in enumerate(strategies):
            try:
                states[i] = machine.transitions[(states[i], profile)]
            except KeyError:
                raise ValueError(
                    f"strategy for player {game.players[i]!r} has no transition "
                    f"for profile {game.profile_key(profile)}"
                ) from None
    rounds = horizon + 1
    return SimulationRun(
        game=game,
        strategies=strategies,
        horizon=horizon,
        seed=seed,
        delta=delta,
        trace=tuple(trace),
        averages=tuple(total / rounds for total in totals),
        discounted=tuple(discounted) if discounted is not None else None,
    )


def limit_average_of_path(
    game: StageGame,
    plan: CoordinationPlan,
    outsider_strategies: Mapping[int, ReactiveStrategy],
) -> PayoffVector:
    """Exact long-run average payoff when the group follows its path and
    the outsiders run the given deterministic machines.

    The joint state (path phase plus outsider machine states) lives in a
    finite space, so deterministic play is eventually periodic; the mean is
    taken over exactly one cycle, with any transient discarded. Randomised
    outsider machines are rejected since they have no single limit cycle.
    """
    plan.validate(game)
    outsiders = plan.outsiders(game)
    if set(outsider_strategies) != set(outsiders):
        raise ValueError(
            f"need exactly one strategy for each outsider {outsiders}"
        )
    for j, machine in outsider_strategies.items():
        if machine.player != j:
            raise ValueError(f"machine for player {j} was built for {machine.player}")
        if not machine.is_deterministic():
            raise ValueError(
                f"outsider machine for player {game.players[j]!r} is randomised "
                "and has no limit cycle"
            )

    def the(dist: Distribution) -> int:
        return next(iter(dist))

    p = plan.period
    states = {j: outsider_strategies[j].start for j in outsiders}
    seen: dict[tuple, int] = {}
    payoff_log: list[PayoffVector] = []
    t = 0
    while True:
        key = (t % p, tuple(states[j] for j in outsiders))
        if key in seen:
            start = seen[key]
            cycle = payoff_log[start:]
            length = len(cycle)
            return tuple(
                sum(vec[i] for vec in cycle) / length
                for i in range(game.n_players)
            )
        seen[key] = t
        profile = [0] * game.n_players
        for member, action in zip(plan.group, plan.path[t % p]):
            profile[member] = action
        for j in outsiders:
            machine = outsider_strategies[j]
            dist = machine.initial_action if t == 0 else machine.emissions[states[j]]
            profile[j] = the(dist)
        profile = tuple(profile)
        payoff_log.append(game.payoff(profile))
        for j in outsiders:
            states[j] = outsider_strategies[j].transitions[(states[j], profile)]
        t += 1


def fig2_convergence_experiment(
    trials: int,
    max_t: int,
    seed: int = 0,
    row: ReactiveStrategy | None = None,
    col: ReactiveStrategy | None = None,
) -> tuple[Fraction, ...]:
    """Empirical lock-in probabilities for the coordination-game machines.

    Returns one exact fraction per round t = 1..max_t: the share of trials
    in which a coordinated outcome, (L, R) or (R, L), occurred in some
    round before t, so that round t is already a repetition of it. Each
    trial draws its randomness from a stream derived from (seed, trial).
    Alternative machines may be passed in; they must share the lock-in
    property of the defaults (a coordinated outcome, once seen, repeats).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if max_t < 1:
        raise ValueError("need at least one round")
    from .game import load_builtin

    game = load_builtin("fig2")
    row = row if row is not None else fig2_coordinator("row")
    col = col if col is not None else fig2_coordinator("col")
    coordinated = {(0, 1), (1, 0)}
    locked_counts = [0] * max_t  # index i: first coordination at round i
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        states = [row.start, col.start]
        for t in range(max_t):
            profile = (
                _sample(row.initial_action if t == 0 else row.emissions[states[0]], rng),
                _sample(col.initial_action if t == 0 else col.emissions[states[1]], rng),
            )
            if profile in coordinated:
                locked_counts[t] += 1
                break
            states[0] = row.transitions[(states[0], profile)]
            states[1] = col.transitions[(states[1], profile)]
    cumulative = 0
    out = []
    for t in range(max_t):
        cumulative += locked_counts[t]
        out.append(Fraction(cumulative, trials))
    return tuple(out)


def trace_to_csv(sim: SimulationRun) -> str:
    """Render a run's trace as CSV with one row per round."""
    game = sim.game
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["t"]
        + [f"action_{p}" for p in game.players]
        + [f"payoff_{p}" for p in game.players]
    )
    for t, (profile, payoffs) in enumerate(sim.trace):
        writer.writerow(
            [t]
            + list(game.profile_labels(profile))
            + [format_rational(u) for u in payoffs]
        )
    return buf.getvalue()
