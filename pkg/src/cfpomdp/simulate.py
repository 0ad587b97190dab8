"""Seeded Monte Carlo cross-check for joint history probabilities.

Each episode samples one resolution of the environment's randomness from the
reduced support and rolls every agent through it, so sampled joint
frequencies estimate exactly the quantities `collection_prob` computes.
Identical seeds give identical output.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .core import DeterministicPolicy, History, Pomdp, Rat
from .envpolicy import enumerate_support, rollout
from .equivalence import CollectionQuery, collection_prob
from .errors import InputError

_SCALE = 2**64


@dataclass(frozen=True)
class SimulationResult:
    episodes: int
    seed: int
    # one entry per observed joint outcome: histories, count, exact probability
    outcomes: tuple[tuple[tuple[History, ...], int, Rat], ...]

    def frequency(self, joint: tuple[History, ...]) -> Fraction:
        for histories, count, _ in self.outcomes:
            if histories == joint:
                return Fraction(count, self.episodes)
        return Fraction(0)

    def exact(self, joint: tuple[History, ...]) -> Rat | None:
        for histories, _, exact in self.outcomes:
            if histories == joint:
                return exact
        return None


def simulate(
    p: Pomdp,
    m: int,
    policies: list[DeterministicPolicy],
    episodes: int,
    seed: int,
) -> SimulationResult:
    """Sample `episodes` shared resolutions and report the empirical joint
    history frequencies next to their exact probabilities."""
    if not policies:
        raise InputError("need at least one agent policy")
    if episodes < 1:
        raise InputError(f"episodes must be >= 1, got {episodes}")
    support = enumerate_support(p, m)

    # All policies are deterministic, so a resolution fixes the whole joint
    # outcome; sampling reduces to a histogram over resolutions.
    joint_of = [tuple(rollout(p, ep, pi) for pi in policies) for ep, _ in support]
    cumulative: list[Fraction] = []
    running = Fraction(0)
    for _, prob in support:
        running += prob
        cumulative.append(running)

    counts = [0] * len(support)
    rng = random.Random(seed)
    for _ in range(episodes):
        draw = Fraction(rng.getrandbits(64), _SCALE)
        lo, hi = 0, len(cumulative) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if draw < cumulative[mid]:
                hi = mid
            else:
                lo = mid + 1
        counts[lo] += 1

    merged: dict[tuple[History, ...], int] = {}
    for joint, count in zip(joint_of, counts):
        if count:
            merged[joint] = merged.get(joint, 0) + count

    outcomes = []
    for joint in sorted(merged, key=lambda js: tuple(str(h) for h in js)):
        query = CollectionQuery(
            tuple((h, pi.as_stochastic()) for h, pi in zip(joint, policies))
        )
        outcomes.append((joint, merged[joint], collection_prob(p, query, m)))
    return SimulationResult(episodes=episodes, seed=seed, outcomes=tuple(outcomes))
