"""Environment policies: deterministic resolutions of an environment's
randomness for m turns.

A resolution fixes the initial state, one outcome for every transition row
(state, action, turn) and one observation for every (state, turn).  Stored
policies are *reduced*: choices are recorded only at entries reachable from
the chosen initial state under the policy's own choices, and the probability
of a reduced policy aggregates every full resolution that restricts to it
(the factors of unrecorded entries sum out to 1).  Reduction leaves every
probability of interest unchanged while keeping enumeration tractable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, cached_property

from .core import (
    DeterministicPolicy,
    History,
    Pomdp,
    Rat,
    StochasticPolicy,
    enumerate_det_policies,
)
from .errors import InputError

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True, eq=False)
class EnvironmentPolicy:
    """One reduced resolution of an environment's randomness for `horizon`
    turns.

    `trans_choice` maps (state, action, turn i in 1..m) to the state entered
    at turn i; `obs_choice` maps (state, turn i in 0..m) to the observation
    made on arriving in that state at turn i.
    """

    init_state: str
    trans_choice: tuple[tuple[tuple[str, str, int], str], ...]
    obs_choice: tuple[tuple[tuple[str, int], str], ...]
    horizon: int

    @cached_property
    def _trans(self) -> dict[tuple[str, str, int], str]:
        return dict(self.trans_choice)

    @cached_property
    def _obs(self) -> dict[tuple[str, int], str]:
        return dict(self.obs_choice)

    def next_state(self, state: str, action: str, turn: int) -> str:
        try:
            return self._trans[(state, action, turn)]
        except KeyError:
            raise InputError(
                f"environment policy has no choice at ({state}, {action}, {turn})"
            ) from None

    def obs_at(self, state: str, turn: int) -> str:
        try:
            return self._obs[(state, turn)]
        except KeyError:
            raise InputError(
                f"environment policy has no observation choice at ({state}, {turn})"
            ) from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EnvironmentPolicy):
            return NotImplemented
        return (
            self.init_state == other.init_state
            and self.horizon == other.horizon
            and self._trans == other._trans
            and self._obs == other._obs
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.init_state,
                self.horizon,
                frozenset(self.trans_choice),
                frozenset(self.obs_choice),
            )
        )

    def describe(self) -> str:
        trans = " ".join(
            f"({s},{a},{i})->{s2}"
            for (s, a, i), s2 in sorted(self.trans_choice, key=lambda kv: (kv[0][2], kv[0][0], kv[0][1]))
        )
        obs = " ".join(
            f"({s},{i})->{o}"
            for (s, i), o in sorted(self.obs_choice, key=lambda kv: (kv[0][1], kv[0][0]))
        )
        return f"init {self.init_state} | trans {trans or '-'} | obs {obs or '-'}"


def _iter_support(p: Pomdp, m: int):
    """Depth-first enumeration of reduced environment policies with their
    aggregated probabilities, in canonical declaration order."""
    if m < 1:
        raise InputError(f"turn count must be >= 1, got {m}")
    state_order = p.state_index

    def obs_stage(turn, visited, prob, trans_acc, obs_acc):
        rows = sorted(visited, key=state_order.__getitem__)
        row_choices = [
            [(s, o, w) for o, w in p.obs_dist(s).entries if w > 0] for s in rows
        ]
        for combo in itertools.product(*row_choices):
            prob2 = prob
            for _, _, w in combo:
                prob2 *= w
            obs_acc2 = obs_acc + tuple(((s, turn), o) for s, o, _ in combo)
            if turn == m:
                yield EnvironmentPolicy(
                    init_state=trans_acc[0],
                    trans_choice=trans_acc[1],
                    obs_choice=obs_acc2,
                    horizon=m,
                ), prob2
            else:
                yield from trans_stage(turn + 1, rows, prob2, trans_acc, obs_acc2)

    def trans_stage(turn, current, prob, trans_acc, obs_acc):
        rows = [(s, a) for s in current for a in p.actions]
        row_choices = [
            [(s, a, s2, w) for s2, w in p.trans_dist(s, a).entries if w > 0]
            for s, a in rows
        ]
        for combo in itertools.product(*row_choices):
            prob2 = prob
            for _, _, _, w in combo:
                prob2 *= w
            choices = tuple(((s, a, turn), s2) for s, a, s2, _ in combo)
            visited = {s2 for _, _, s2, _ in combo}
            yield from obs_stage(
                turn,
                visited,
                prob2,
                (trans_acc[0], trans_acc[1] + choices),
                obs_acc,
            )

    for s0, w0 in p.init.entries:
        if w0 > 0:
            yield from obs_stage(0, {s0}, w0, (s0, ()), ())


@lru_cache(maxsize=None)
def enumerate_support(p: Pomdp, m: int) -> tuple[tuple[EnvironmentPolicy, Rat], ...]:
    """All reduced environment policies of positive probability, with their
    aggregated probabilities.  Probabilities are strictly positive and sum
    to exactly 1."""
    return tuple(_iter_support(p, m))


def support_size_within(p: Pomdp, m: int, cap: int) -> bool:
    """True iff the reduced support has at most `cap` policies (enumeration
    aborts early past the cap)."""
    count = 0
    for _ in _iter_support(p, m):
        count += 1
        if count > cap:
            return False
    return True


def env_policy_prob(p: Pomdp, ep: EnvironmentPolicy) -> Rat:
    """Aggregated probability of a reduced environment policy: the product of
    the environment's probabilities over the recorded entries."""
    if ep.init_state not in p.state_index:
        raise InputError(f"unknown state {ep.init_state!r} in environment policy")
    prob = p.init.prob(ep.init_state)
    for (s, a, _), s2 in ep.trans_choice:
        if s not in p.state_index or a not in p.action_index or s2 not in p.state_index:
            raise InputError(f"unknown symbol in choice ({s},{a})->{s2}")
        prob *= p.trans_dist(s, a).prob(s2)
    for (s, _), o in ep.obs_choice:
        if s not in p.state_index or o not in p.obs_index:
            raise InputError(f"unknown symbol in choice ({s})->{o}")
        prob *= p.obs_dist(s).prob(o)
    return prob


def rollout(p: Pomdp, ep: EnvironmentPolicy, pi: DeterministicPolicy) -> History:
    """The unique history generated by a deterministic policy inside one
    resolution of the environment."""
    state = ep.init_state
    h = History(ep.obs_at(state, 0))
    for turn in range(1, ep.horizon + 1):
        action = pi.action_at(h)
        state = ep.next_state(state, action, turn)
        h = h.extend(action, ep.obs_at(state, turn))
    return h


def history_prob_given_ep(
    p: Pomdp, h: History, ep: EnvironmentPolicy, pi: StochasticPolicy
) -> Rat:
    """Probability of `h` given one resolution: the product of the policy's
    action probabilities if `h` is consistent with the resolution's
    deterministic evolution, else 0."""
    p.check_history_symbols(h)
    if h.length > ep.horizon:
        raise InputError(
            f"history length {h.length} exceeds environment policy horizon {ep.horizon}"
        )
    state = ep.init_state
    if ep.obs_at(state, 0) != h.initial_obs:
        return _ZERO
    prob = _ONE
    for turn, (action, obs) in enumerate(h.steps, start=1):
        prob *= pi.prob(h.prefix(turn - 1), action)
        if prob == 0:
            return _ZERO
        state = ep.next_state(state, action, turn)
        if ep.obs_at(state, turn) != obs:
            return _ZERO
    return prob


def env_policy_posterior(
    p: Pomdp, h: History, pi: StochasticPolicy, m: int | None = None
) -> dict[EnvironmentPolicy, Rat]:
    """Posterior over the reduced support of horizon `m` (default: covering
    `h`) given `h`; all-zero when `h` is impossible under `pi`."""
    if m is None:
        m = max(h.length, 1)
    if m < h.length:
        raise InputError(f"posterior horizon {m} shorter than history ({h.length})")
    support = enumerate_support(p, m)
    joint = {
        ep: prior * history_prob_given_ep(p, h, ep, pi) for ep, prior in support
    }
    total = sum(joint.values(), _ZERO)
    if total == 0:
        return {ep: _ZERO for ep, _ in support}
    return {ep: w / total for ep, w in joint.items()}


@dataclass(frozen=True, eq=False)
class BehaviorMap:
    """The function sending each deterministic policy to the length-m history
    it generates inside a fixed resolution (or from a fixed initial state of
    a deterministic environment).

    Canonically represented by the response function from action sequences to
    observation sequences, which determines the policy-to-history assignment
    and is comparable across environments sharing alphabets.
    """

    horizon: int
    response: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    @cached_property
    def _resp(self) -> dict[tuple[str, ...], tuple[str, ...]]:
        return dict(self.response)

    def history_for(self, pi: DeterministicPolicy) -> History:
        """Unfold the response function along a deterministic policy."""
        actions: list[str] = []
        h: History | None = None
        for _ in range(self.horizon):
            prefix = self._history_from(tuple(actions))
            actions.append(pi.action_at(prefix))
        return self._history_from(tuple(actions))

    def _history_from(self, actions: tuple[str, ...]) -> History:
        # Observations depend only on the action prefix, so pad with any key.
        for full, observations in self.response:
            if full[: len(actions)] == actions:
                h = History(observations[0])
                for t, a in enumerate(actions):
                    h = h.extend(a, observations[t + 1])
                return h
        raise InputError(f"action sequence {actions} outside the behavior map")

    def assignment(self, p: Pomdp) -> dict[DeterministicPolicy, History]:
        """Materialize the policy-to-history map over all deterministic
        policies of `p` at this horizon."""
        return {pi: self.history_for(pi) for pi in enumerate_det_policies(p, self.horizon)}

    def histories(self) -> tuple[History, ...]:
        """All histories in the image of the map, one per action sequence."""
        out = []
        for actions, observations in self.response:
            h = History(observations[0])
            for t, a in enumerate(actions):
                h = h.extend(a, observations[t + 1])
            out.append(h)
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BehaviorMap):
            return NotImplemented
        return self.horizon == other.horizon and self.response == other.response

    def __hash__(self) -> int:
        return hash((self.horizon, self.response))


def _response_of(
    p: Pomdp, ep: EnvironmentPolicy, m: int
) -> tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]:
    entries = []
    for actions in itertools.product(p.actions, repeat=m):
        state = ep.init_state
        observations = [ep.obs_at(state, 0)]
        for turn, action in enumerate(actions, start=1):
            state = ep.next_state(state, action, turn)
            observations.append(ep.obs_at(state, turn))
        entries.append((actions, tuple(observations)))
    return tuple(sorted(entries))


def behavior_map(p: Pomdp, ep: EnvironmentPolicy, m: int) -> BehaviorMap:
    """Behavior map of one resolution: every deterministic policy is sent to
    its rollout."""
    if m != ep.horizon:
        raise InputError(
            f"turn count {m} does not match environment policy horizon {ep.horizon}"
        )
    return BehaviorMap(horizon=m, response=_response_of(p, ep, m))


def count_env_policies(p: Pomdp, m: int, convention: str = "full") -> int:
    """Number of (unreduced) environment policies.

    ``full`` counts initial-state, transition, and observation components:
    |S| * |S|^(|S||A|m) * |O|^(|S|(m+1)).  ``transition-only`` omits the
    observation component: |S| * |S|^(|S||A|m).
    """
    if m < 1:
        raise InputError(f"turn count must be >= 1, got {m}")
    ns, na, no = len(p.states), len(p.actions), len(p.observations)
    base = ns * ns ** (ns * na * m)
    if convention == "transition-only":
        return base
    if convention == "full":
        return base * no ** (ns * (m + 1))
    raise InputError(f"unknown convention {convention!r} (use full or transition-only)")
