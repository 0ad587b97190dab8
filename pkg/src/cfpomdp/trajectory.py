"""History probabilities, conditional history probabilities, and the Bayes
posterior over the initial state.

Probabilities are computed by an exact dynamic program over the joint
distribution of the current state given the observed prefix; state sequences
are marginalized, never enumerated.
"""

from __future__ import annotations

from fractions import Fraction

from .core import FiniteDist, History, Pomdp, Rat, StochasticPolicy

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _state_weights(p: Pomdp, h: History, start: str | None = None) -> Rat:
    """Total weight of `h` with all policy factors dropped.

    This is the probability of `h` under the policy that plays h's own
    actions.  With `start` given, the initial distribution is replaced by a
    point mass on that state (used for the posterior's likelihood).
    """
    if start is None:
        weights = {s: w for s, w in p.init.entries if w > 0}
    else:
        weights = {start: _ONE}
    weights = {
        s: w * p.obs_dist(s).prob(h.initial_obs)
        for s, w in weights.items()
        if p.obs_dist(s).prob(h.initial_obs) > 0
    }
    for action, obs in h.steps:
        nxt: dict[str, Rat] = {}
        for s, w in weights.items():
            for s2, wt in p.trans_dist(s, action).entries:
                wo = p.obs_dist(s2).prob(obs)
                if wt > 0 and wo > 0:
                    nxt[s2] = nxt.get(s2, _ZERO) + w * wt * wo
        weights = nxt
        if not weights:
            return _ZERO
    return sum(weights.values(), _ZERO)


def _policy_factor(h: History, pi: StochasticPolicy) -> Rat:
    """Product of the policy's probabilities for h's actions along h."""
    factor = _ONE
    for t in range(h.length):
        factor *= pi.prob(h.prefix(t), h.steps[t][0])
        if factor == 0:
            return _ZERO
    return factor


def history_prob(p: Pomdp, h: History, pi: StochasticPolicy) -> Rat:
    """Exact probability of observing `h` when acting with `pi`."""
    p.check_history_symbols(h)
    factor = _policy_factor(h, pi)
    if factor == 0:
        return _ZERO
    return factor * _state_weights(p, h)


def history_prob_from_state(
    p: Pomdp, h: History, start: str, pi: StochasticPolicy
) -> Rat:
    """Probability of `h` under `pi` conditional on the initial state."""
    p.check_history_symbols(h)
    factor = _policy_factor(h, pi)
    if factor == 0:
        return _ZERO
    return factor * _state_weights(p, h, start=start)


def cond_history_prob(
    p: Pomdp, h_long: History, h_short: History, pi: StochasticPolicy
) -> Rat:
    """Probability of `h_long` given `h_short` under `pi`.

    Non-extensions are impossible, hence 0; conditioning on a history of
    probability 0 yields 0 by convention, so the function is total.
    """
    p.check_history_symbols(h_long)
    p.check_history_symbols(h_short)
    if not h_short.is_prefix_of(h_long):
        return _ZERO
    denom = history_prob(p, h_short, pi)
    if denom == 0:
        return _ZERO
    return history_prob(p, h_long, pi) / denom


def initial_posterior(p: Pomdp, h: History) -> dict[str, Rat]:
    """Posterior over the initial state given `h`, for every state.

    The policy's action factors cancel out of the Bayes ratio, so the result
    is policy-independent; it is computed with them dropped.  If no policy
    makes `h` possible, every entry is 0.
    """
    p.check_history_symbols(h)
    likelihood = {s: _state_weights(p, h, start=s) for s in p.states}
    joint = {s: p.init.prob(s) * likelihood[s] for s in p.states}
    total = sum(joint.values(), _ZERO)
    if total == 0:
        return {s: _ZERO for s in p.states}
    return {s: joint[s] / total for s in p.states}
