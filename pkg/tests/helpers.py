"""Independent oracles and generators for the test suite.

Everything here recomputes quantities from first principles (explicit state
sequences, unreduced resolution maps) without touching the dynamic programs
or reduced enumerations it is used to check.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from cfpomdp import (
    DeterministicPolicy,
    FiniteDist,
    History,
    Pomdp,
    StochasticPolicy,
)
from cfpomdp.envpolicy import support_size_within

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# oracle: history probability by explicit state-sequence enumeration


def brute_history_prob(
    p: Pomdp, h: History, pi: StochasticPolicy, start: str | None = None
) -> Fraction:
    """Sum over all state sequences of the product of initial, observation,
    transition, and policy factors."""
    t = h.length
    total = ZERO
    for seq in itertools.product(p.states, repeat=t + 1):
        term = ONE if start is not None else p.init.prob(seq[0])
        if start is not None and seq[0] != start:
            continue
        term *= p.obs_dist(seq[0]).prob(h.initial_obs)
        for k, (action, obs) in enumerate(h.steps, start=1):
            term *= p.trans_dist(seq[k - 1], action).prob(seq[k])
            term *= p.obs_dist(seq[k]).prob(obs)
            term *= pi.prob(h.prefix(k - 1), action)
        total += term
    return total


def brute_posterior(
    p: Pomdp, h: History, pi: StochasticPolicy
) -> dict[str, Fraction]:
    """Bayes over the initial state with the policy factors kept in."""
    joint = {
        s: p.init.prob(s) * brute_history_prob(p, h, pi, start=s) for s in p.states
    }
    total = sum(joint.values(), ZERO)
    if total == 0:
        return {s: ZERO for s in p.states}
    return {s: joint[s] / total for s in p.states}


# ---------------------------------------------------------------------------
# oracle: unreduced resolutions (support choices only; off-support maps have
# probability 0 and contribute nothing)


def full_resolutions(p: Pomdp, m: int):
    """Every total resolution map built from support choices, with its
    unreduced probability: the product over *all* rows, visited or not."""
    trans_rows = [(s, a, i) for i in range(1, m + 1) for s in p.states for a in p.actions]
    obs_rows = [(s, i) for i in range(m + 1) for s in p.states]
    trans_opts = [
        [s2 for s2, w in p.trans_dist(s, a).entries if w > 0] for s, a, _ in trans_rows
    ]
    obs_opts = [[o for o, w in p.obs_dist(s).entries if w > 0] for s, _ in obs_rows]
    for t0, w0 in p.init.entries:
        if w0 <= 0:
            continue
        for trans_combo in itertools.product(*trans_opts):
            trans_map = dict(zip(trans_rows, trans_combo))
            prob_t = w0
            for (s, a, _), s2 in trans_map.items():
                prob_t *= p.trans_dist(s, a).prob(s2)
            for obs_combo in itertools.product(*obs_opts):
                obs_map = dict(zip(obs_rows, obs_combo))
                prob = prob_t
                for (s, _), o in obs_map.items():
                    prob *= p.obs_dist(s).prob(o)
                yield t0, trans_map, obs_map, prob


def reduce_resolution(p: Pomdp, t0: str, trans_map, obs_map, m: int):
    """Restrict a total resolution to the entries reachable under itself."""
    recorded_trans = {}
    recorded_obs = {(t0, 0): obs_map[(t0, 0)]}
    frontier = {t0}
    for i in range(1, m + 1):
        nxt = set()
        for s in sorted(frontier):
            for a in p.actions:
                s2 = trans_map[(s, a, i)]
                recorded_trans[(s, a, i)] = s2
                nxt.add(s2)
        frontier = nxt
        for s in frontier:
            recorded_obs[(s, i)] = obs_map[(s, i)]
    return (t0, frozenset(recorded_trans.items()), frozenset(recorded_obs.items()))


def full_history_prob_given_resolution(
    h: History, t0: str, trans_map, obs_map, pi: StochasticPolicy
) -> Fraction:
    """Evolution through an explicit total resolution."""
    if obs_map[(t0, 0)] != h.initial_obs:
        return ZERO
    state = t0
    prob = ONE
    for turn, (action, obs) in enumerate(h.steps, start=1):
        prob *= pi.prob(h.prefix(turn - 1), action)
        if prob == 0:
            return ZERO
        state = trans_map[(state, action, turn)]
        if obs_map[(state, turn)] != obs:
            return ZERO
    return prob


def brute_collection_prob(p: Pomdp, pairs, m: int) -> Fraction:
    """Direct sum over unreduced resolutions; only usable on tiny inputs."""
    total = ZERO
    for t0, trans_map, obs_map, prob in full_resolutions(p, m):
        term = prob
        for h, pi in pairs:
            term *= full_history_prob_given_resolution(h, t0, trans_map, obs_map, pi)
            if term == 0:
                break
        total += term
    return total


# ---------------------------------------------------------------------------
# random environments and policies


def random_dist(rng: random.Random, pool, max_support: int = 2) -> dict[str, Fraction]:
    size = 1 if rng.random() < 0.55 else min(max_support, len(pool))
    support = rng.sample(list(pool), size)
    weights = [rng.randint(1, 5) for _ in support]
    total = sum(weights)
    return {x: Fraction(w, total) for x, w in zip(support, weights)}


def random_pomdp(
    rng: random.Random,
    max_states: int = 4,
    max_actions: int = 3,
    max_obs: int = 3,
    resolution_cap: int = 512,
    horizon_cap: int = 2,
    alphabets: tuple[tuple[str, ...], tuple[str, ...]] | None = None,
) -> Pomdp:
    """A random environment with exact rational kernels, small enough that
    the reduced support stays enumerable up to `horizon_cap`."""
    for _ in range(500):
        n_states = rng.randint(2, max_states)
        if alphabets is None:
            actions = tuple(f"a{i}" for i in range(rng.randint(2, max_actions)))
            observations = tuple(f"x{i}" for i in range(rng.randint(2, max_obs)))
        else:
            actions, observations = alphabets
        states = tuple(f"q{i}" for i in range(n_states))
        p = Pomdp.build(
            states,
            actions,
            observations,
            random_dist(rng, states),
            {(s, a): random_dist(rng, states) for s in states for a in actions},
            {s: random_dist(rng, observations) for s in states},
        )
        if all(
            support_size_within(p, m, resolution_cap)
            for m in range(1, horizon_cap + 1)
        ):
            return p
    raise RuntimeError("could not draw a small-support environment")


def relabel_states(p: Pomdp, prefix: str = "r_") -> Pomdp:
    """Rename states (alphabets untouched); counterfactually equivalent."""
    name = {s: f"{prefix}{s}" for s in p.states}
    return Pomdp.build(
        tuple(name[s] for s in p.states),
        p.actions,
        p.observations,
        {name[s]: w for s, w in p.init.entries},
        {
            (name[s], a): {name[s2]: w for s2, w in dist.entries}
            for (s, a), dist in p.trans
        },
        {name[s]: {o: w for o, w in dist.entries} for s, dist in p.obs},
    )


def split_initial_state(p: Pomdp) -> Pomdp:
    """Split the first initial-support state into two equal halves with
    identical rows; counterfactually equivalent to the original."""
    target = p.init.support[0]
    twin = target + "_twin"
    states = p.states + (twin,)
    init = []
    for s, w in p.init.entries:
        if s == target:
            init.extend([(s, w / 2), (twin, w / 2)])
        else:
            init.append((s, w))
    trans = {(s, a): dist for (s, a), dist in p.trans}
    for a in p.actions:
        trans[(twin, a)] = p.trans_dist(target, a)
    obs = {s: dist for s, dist in p.obs}
    obs[twin] = p.obs_dist(target)
    return Pomdp.build(states, p.actions, p.observations, FiniteDist.of(init), trans, obs)


def perturb_one_row(p: Pomdp, rng: random.Random) -> Pomdp:
    """Replace one transition row with a fresh random distribution."""
    s = rng.choice(p.states)
    a = rng.choice(p.actions)
    trans = {key: dist for key, dist in p.trans}
    trans[(s, a)] = FiniteDist.of(random_dist(rng, p.states))
    return Pomdp.build(p.states, p.actions, p.observations, p.init, trans, dict(p.obs))


def random_det_policy(p: Pomdp, m: int, rng: random.Random) -> DeterministicPolicy:
    from cfpomdp.core import decision_points

    return DeterministicPolicy(
        tuple((h, rng.choice(p.actions)) for h in decision_points(p, m))
    )


def random_stochastic_policy(p: Pomdp, m: int, rng: random.Random) -> StochasticPolicy:
    from cfpomdp.core import decision_points

    decisions = []
    for h in decision_points(p, m):
        decisions.append((h, FiniteDist.of(random_dist(rng, p.actions, max_support=len(p.actions)))))
    return StochasticPolicy(tuple(decisions))


def reachable_up_to(p: Pomdp, m: int) -> list[History]:
    from cfpomdp import reachable_histories

    out: list[History] = []
    for group in reachable_histories(p, m).values():
        out.extend(group)
    return out


# ---------------------------------------------------------------------------
# tiny fixed environments for unreduced-resolution oracles


def tiny_two_state() -> Pomdp:
    return Pomdp.build(
        ("u", "v"),
        ("a", "b"),
        ("x", "y"),
        {"u": Fraction(2, 3), "v": Fraction(1, 3)},
        {
            ("u", "a"): {"u": Fraction(1, 2), "v": Fraction(1, 2)},
            ("u", "b"): {"v": Fraction(1)},
            ("v", "a"): {"u": Fraction(1, 4), "v": Fraction(3, 4)},
            ("v", "b"): {"u": Fraction(1)},
        },
        {
            "u": {"x": Fraction(1, 3), "y": Fraction(2, 3)},
            "v": {"y": Fraction(1)},
        },
    )


def tiny_three_state() -> Pomdp:
    return Pomdp.build(
        ("u", "v", "w"),
        ("a", "b"),
        ("x", "y"),
        {"u": Fraction(1, 2), "w": Fraction(1, 2)},
        {
            ("u", "a"): {"v": Fraction(1, 3), "w": Fraction(2, 3)},
            ("u", "b"): {"u": Fraction(1)},
            ("v", "a"): {"v": Fraction(1)},
            ("v", "b"): {"u": Fraction(1, 2), "w": Fraction(1, 2)},
            ("w", "a"): {"w": Fraction(1)},
            ("w", "b"): {"v": Fraction(1)},
        },
        {
            "u": {"x": Fraction(1)},
            "v": {"x": Fraction(1, 4), "y": Fraction(3, 4)},
            "w": {"y": Fraction(1)},
        },
    )
