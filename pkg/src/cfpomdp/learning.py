"""Pure learning processes: history functionals of the form

    P(h) = sum over initial states s of  w_s * posterior(initial = s | h)

on a deterministic environment.  Such a functional transfers unchanged to
any other deterministic environment that is counterfactually equivalent at
the same horizon: matching cells of the two behavior partitions carry equal
mass, and the transferred weight of a cell is the mass-weighted average of
the source weights on the matching cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

from .core import History, Pomdp, Rat, history_sort_key, parse_rational, reachable_histories
from .determinize import behavior_partition, is_deterministic
from .equivalence import check_cf_equiv
from .errors import CfpomdpError, DeterminismError, InputError
from .trajectory import initial_posterior

_ZERO = Fraction(0)


@dataclass(frozen=True)
class PureLearningSpec:
    """A deterministic environment, a horizon, and one weight in [0, 1] per
    initial-support state."""

    env: Pomdp
    weights: tuple[tuple[str, Rat], ...]
    horizon: int

    def __post_init__(self):
        if not is_deterministic(self.env):
            raise DeterminismError("pure learning processes need a deterministic environment")
        if self.horizon < 1:
            raise InputError(f"horizon must be >= 1, got {self.horizon}")
        support = set(self.env.init.support)
        given = [s for s, _ in self.weights]
        if len(set(given)) != len(given):
            raise InputError("duplicate state in weight vector")
        if set(given) != support:
            missing = sorted(support - set(given))
            alien = sorted(set(given) - support)
            details = []
            if missing:
                details.append(f"missing weights for {missing}")
            if alien:
                details.append(f"weights for non-initial states {alien}")
            raise InputError("; ".join(details))
        for s, w in self.weights:
            if not 0 <= w <= 1:
                raise InputError(f"weight for {s} outside [0, 1]: {w}")

    @classmethod
    def of(cls, env: Pomdp, weights, horizon: int) -> "PureLearningSpec":
        items = weights.items() if hasattr(weights, "items") else weights
        ordered = sorted(
            ((s, Fraction(w)) for s, w in items),
            key=lambda kv: env.state_index.get(kv[0], len(env.states)),
        )
        return cls(env, tuple(ordered), horizon)

    @cached_property
    def _weights(self) -> dict[str, Rat]:
        return dict(self.weights)


def evaluate(spec: PureLearningSpec, h: History) -> Rat:
    """Value of the learning process on `h`: the weight average under the
    posterior over initial states.  Impossible histories evaluate to 0."""
    if h.length > spec.horizon:
        raise InputError(
            f"history length {h.length} exceeds the horizon {spec.horizon}"
        )
    posterior = initial_posterior(spec.env, h)
    return sum(
        (w * posterior[s] for s, w in spec.weights),
        _ZERO,
    )


def transfer(spec: PureLearningSpec, target: Pomdp, m: int) -> PureLearningSpec:
    """Carry a learning process to a counterfactually equivalent
    deterministic environment by averaging weights cell by cell."""
    if m != spec.horizon:
        raise InputError(
            f"turn count {m} does not match the learning process horizon {spec.horizon}"
        )
    if not is_deterministic(target):
        raise DeterminismError("transfer target must be deterministic")
    verdict = check_cf_equiv(spec.env, target, m)
    if not verdict.equivalent:
        raise InputError(
            "transfer requires counterfactually equivalent environments at the given horizon"
        )
    source_cells = behavior_partition(spec.env, m)
    target_cells = behavior_partition(target, m)
    source_by_map = {bm: (members, mass) for bm, members, mass in source_cells.cells}

    new_weights: list[tuple[str, Rat]] = []
    for bm, members, mass in target_cells.cells:
        if bm not in source_by_map:
            raise CfpomdpError(
                "internal consistency error: unmatched behavior cell despite equivalence"
            )
        src_members, src_mass = source_by_map[bm]
        if src_mass != mass:
            raise CfpomdpError(
                "internal consistency error: matched cells with unequal masses"
            )
        averaged = (
            sum(
                (spec.env.init.prob(s) * spec._weights[s] for s in src_members),
                _ZERO,
            )
            / src_mass
        )
        for s in members:
            new_weights.append((s, averaged))
    return PureLearningSpec.of(target, new_weights, m)


def verify_universality(
    spec: PureLearningSpec, target: Pomdp, m: int
) -> tuple[bool, History | None]:
    """Check that the transferred process agrees with the original on every
    reachable history of length <= m; returns the first differing history
    when they disagree."""
    moved = transfer(spec, target, m)
    union: set[History] = set()
    for p in (spec.env, target):
        for group in reachable_histories(p, m).values():
            union.update(group)
    for h in sorted(union, key=history_sort_key):
        if evaluate(spec, h) != evaluate(moved, h):
            return False, h
    return True, None


def load_weights(path: str | Path) -> dict[str, Rat]:
    """Read a weight vector: one ``state p/q`` line per state, '#' comments."""
    out: dict[str, Rat] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(
                f"{path}:{lineno}: expected 'state p/q', got {raw!r}"
            )
        state, value = parts
        if state in out:
            raise InputError(f"{path}:{lineno}: duplicate state {state!r}")
        out[state] = parse_rational(value)
    return out


def save_weights(path: str | Path, weights) -> None:
    items = weights.items() if hasattr(weights, "items") else weights
    lines = [f"{s} {w}" for s, w in items]
    Path(path).write_text("\n".join(lines) + "\n")
